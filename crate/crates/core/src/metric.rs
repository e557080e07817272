//! Path pseudo metrics, intrinsic-metric checks, embedding metrics, balls
//! and distances to the boundary.

use alloc::collections::BinaryHeap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::{check_len, MeasuredGraph, WeightedGraph};

/// Tolerance for metric axioms.
pub const METRIC_TOL: f64 = 1e-12;

/// Edge lengths `σ`, aligned with [`WeightedGraph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLength {
    sigma: Vec<f64>,
}

impl EdgeLength {
    pub fn new(graph: &WeightedGraph, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != graph.edges().len() || sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::SigmaEdgeMismatch);
        }
        Ok(Self { sigma })
    }

    /// From `(x, y, σ)` entries, one per edge in either orientation.
    pub fn from_pairs(graph: &WeightedGraph, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sigma = vec![f64::NAN; graph.edges().len()];
        for &(x, y, s) in pairs {
            let n = graph.edge_between(x, y).ok_or(Error::SigmaEdgeMismatch)?;
            if !sigma[n.edge].is_nan() && sigma[n.edge] != s {
                return Err(Error::SigmaEdgeMismatch);
            }
            sigma[n.edge] = s;
        }
        Self::new(graph, sigma)
    }

    /// `σ = b`, the path metric induced by the weights themselves.
    pub fn from_weights(graph: &WeightedGraph) -> Self {
        Self {
            sigma: graph.edges().iter().map(|e| e.weight).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            sigma: self.sigma.iter().map(|s| s * c).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PseudoMetric {
    /// Explicit symmetric table.
    Table(Vec<Vec<f64>>),
    /// Path pseudo metric of `σ`, stored as its all-pairs table.
    Path { sigma: EdgeLength, table: Vec<Vec<f64>> },
    /// `d(x, y) = |ι(x) - ι(y)|`.
    Embedding(Vec<Vec<f64>>),
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl PseudoMetric {
    /// Validated table: symmetric, zero diagonal, triangle inequality.
    pub fn table(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::BadParameter("distance table must be square".into()));
        }
        let m = PseudoMetric::Table(rows);
        if m.axiom_violation() > METRIC_TOL {
            return Err(Error::BadParameter("table is not a pseudo metric".into()));
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        match self {
            PseudoMetric::Table(t) | PseudoMetric::Path { table: t, .. } => t.len(),
            PseudoMetric::Embedding(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        match self {
            PseudoMetric::Table(t) | PseudoMetric::Path { table: t, .. } => t[x][y],
            PseudoMetric::Embedding(c) => euclidean(&c[x], &c[y]),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PseudoMetric::Table(_) => "table",
            PseudoMetric::Path { .. } => "path",
            PseudoMetric::Embedding(_) => "embedding",
        }
    }

    /// Largest violation of symmetry, zero diagonal or the triangle
    /// inequality over all vertex triples. Pairs at infinite distance are skipped.
    pub fn axiom_violation(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for x in 0..n {
            worst = worst.max(self.distance(x, x).abs());
            for y in 0..n {
                let dxy = self.distance(x, y);
                if dxy.is_nan() || dxy < 0.0 {
                    return f64::INFINITY;
                }
                if dxy.is_finite() {
                    worst = worst.max((dxy - self.distance(y, x)).abs());
                }
                for z in 0..n {
                    let via = self.distance(x, z) + self.distance(z, y);
                    if via.is_finite() {
                        worst = worst.max(dxy - via);
                    }
                }
            }
        }
        worst
    }

    /// Triangle defect on the given triples only.
    pub fn triangle_violation(&self, triples: &[(usize, usize, usize)]) -> f64 {
        triples
            .iter()
            .map(|&(x, y, z)| {
                let via = self.distance(x, z) + self.distance(z, y);
                if via.is_finite() {
                    self.distance(x, y) - via
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths with edge costs `σ`.
pub fn dijkstra(graph: &WeightedGraph, sigma: &EdgeLength, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, x)) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for n in graph.neighbors(x) {
            let nd = d + sigma.sigma[n.edge];
            if nd < dist[n.vertex] {
                dist[n.vertex] = nd;
                heap.push(Entry(nd, n.vertex));
            }
        }
    }
    dist
}

/// Path pseudo metric `ρ_σ`. The flag is true when some pair lies in
/// different components (distance `+∞`).
pub fn path_metric(graph: &WeightedGraph, sigma: &EdgeLength) -> Result<(PseudoMetric, bool)> {
    if sigma.sigma.len() != graph.edges().len() {
        return Err(Error::SigmaEdgeMismatch);
    }
    let table: Vec<Vec<f64>> = (0..graph.len()).map(|s| dijkstra(graph, sigma, s)).collect();
    let disconnected = table.iter().flatten().any(|d| d.is_infinite());
    Ok((
        PseudoMetric::Path {
            sigma: sigma.clone(),
            table,
        },
        disconnected,
    ))
}

/// `σ_H(x,y) = min{μ(x)/deg(x), μ(y)/deg(y)}^{1/2}`.
pub fn huang_sigma(mg: &MeasuredGraph) -> Result<EdgeLength> {
    let deg = mg.graph.degrees();
    let mut sigma = Vec::with_capacity(mg.graph.edges().len());
    for e in mg.graph.edges() {
        for x in [e.u, e.v] {
            if !(deg[x] > 0.0) {
                return Err(Error::IsolatedEndpoint(mg.graph.id(x).to_string()));
            }
        }
        let q = (mg.mu()[e.u] / deg[e.u]).min(mg.mu()[e.v] / deg[e.v]);
        sigma.push(q.sqrt());
    }
    Ok(EdgeLength { sigma })
}

/// `μ(x) - Σ_y b(x,y) σ(x,y)²`; nonnegative everywhere iff `ρ_σ` is strongly intrinsic.
pub fn strongly_intrinsic_slack(mg: &MeasuredGraph, sigma: &EdgeLength) -> Vec<f64> {
    (0..mg.len())
        .map(|x| {
            let load: f64 = mg
                .graph
                .neighbors(x)
                .iter()
                .map(|n| n.weight * sigma.sigma[n.edge] * sigma.sigma[n.edge])
                .sum();
            mg.mu()[x] - load
        })
        .collect()
}

/// `μ(x) - Σ_y b(x,y) ρ(x,y)²`, with the number of neighbour pairs skipped
/// because their distance is infinite.
pub fn intrinsic_slack(mg: &MeasuredGraph, rho: &PseudoMetric) -> (Vec<f64>, usize) {
    let mut skipped = 0;
    let slack = (0..mg.len())
        .map(|x| {
            let mut load = 0.0;
            for n in mg.graph.neighbors(x) {
                let d = rho.distance(x, n.vertex);
                if d.is_finite() {
                    load += n.weight * d * d;
                } else {
                    skipped += 1;
                }
            }
            mg.mu()[x] - load
        })
        .collect();
    (slack, skipped)
}

/// `μ_ι(x) = Σ_y b(x,y) |ι(x) - ι(y)|²`.
pub fn embedding_measure(graph: &WeightedGraph, coords: &[Vec<f64>]) -> Vec<f64> {
    (0..graph.len())
        .map(|x| {
            graph
                .neighbors(x)
                .iter()
                .map(|n| {
                    let d = euclidean(&coords[x], &coords[n.vertex]);
                    n.weight * d * d
                })
                .sum()
        })
        .collect()
}

/// Pairs of vertices with identical coordinates.
fn collisions(coords: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    let key = |i: usize| coords[i].clone();
    order.sort_by(|&a, &b| {
        key(a)
            .iter()
            .zip(key(b).iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    let mut out = Vec::new();
    for w in order.windows(2) {
        if coords[w[0]] == coords[w[1]] {
            out.push((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMetric {
    pub metric: PseudoMetric,
    pub mu_iota: Vec<f64>,
    /// Vertex pairs mapped to the same point (ι not injective).
    pub collisions: Vec<(usize, usize)>,
}

/// `d_ι` and `μ_ι` for coordinates given per vertex (`None` = missing).
pub fn embedding_metric(graph: &WeightedGraph, iota: Vec<Option<Vec<f64>>>) -> Result<EmbeddingMetric> {
    check_len(graph.len(), iota.len())?;
    let mut coords = Vec::with_capacity(iota.len());
    for (x, c) in iota.into_iter().enumerate() {
        coords.push(c.ok_or_else(|| Error::MissingCoordinate(graph.id(x).to_string()))?);
    }
    if let Some(first) = coords.first() {
        let dim = first.len();
        if let Some(c) = coords.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.len(),
            });
        }
    }
    let mu_iota = embedding_measure(graph, &coords);
    let collisions = collisions(&coords);
    Ok(EmbeddingMetric {
        metric: PseudoMetric::Embedding(coords),
        mu_iota,
        collisions,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub members: Vec<usize>,
    /// The ball reaches the truncation: it contains a section-boundary
    /// vertex, or every vertex when no boundary is declared.
    pub saturated: bool,
}

/// `{x : ρ(o, x) ≤ r}` on the loaded section.
pub fn ball(graph: &WeightedGraph, rho: &PseudoMetric, o: usize, r: f64) -> Ball {
    let members: Vec<usize> = (0..rho.len()).filter(|&x| rho.distance(o, x) <= r).collect();
    let boundary = graph.section_boundary();
    let saturated = if boundary.is_empty() {
        members.len() == rho.len()
    } else {
        boundary.iter().any(|b| members.binary_search(b).is_ok())
    };
    Ball { members, saturated }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    /// Accumulation points in the embedding space.
    Points(Vec<Vec<f64>>),
    /// Distance to the boundary given per vertex.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDistance {
    pub distance: Vec<f64>,
    /// Vertices at distance zero (the boundary is not closed there).
    pub zeros: Vec<usize>,
}

/// `D(x) = ρ(x, ∂X)`; `+∞` everywhere for an empty point list.
pub fn boundary_distance(
    graph: &WeightedGraph,
    rho: &PseudoMetric,
    spec: &BoundarySpec,
) -> Result<BoundaryDistance> {
    let distance = match spec {
        BoundarySpec::Table(t) => {
            check_len(graph.len(), t.len())?;
            if let Some(x) = t.iter().position(|&d| !(d >= 0.0)) {
                return Err(Error::NegativeDistance(graph.id(x).to_string()));
            }
            t.clone()
        }
        BoundarySpec::Points(points) => {
            let PseudoMetric::Embedding(coords) = rho else {
                return Err(Error::BadParameter(
                    "boundary points require an embedding metric".into(),
                ));
            };
            coords
                .iter()
                .map(|c| {
                    points
                        .iter()
                        .map(|p| euclidean(c, p))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        }
    };
    let zeros = distance
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0.0)
        .map(|(x, _)| x)
        .collect();
    Ok(BoundaryDistance { distance, zeros })
}

/// `w_min(x) - 1/(2 D(x)²) - V_ref(x)`, with `1/∞ = 0`.
pub fn metric_criterion_slack(
    graph: &WeightedGraph,
    w_min: &[f64],
    d: &[f64],
    v_ref: &[f64],
) -> Result<Vec<f64>> {
    check_len(graph.len(), w_min.len())?;
    check_len(graph.len(), d.len())?;
    check_len(graph.len(), v_ref.len())?;
    if let Some(x) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveD(graph.id(x).to_string()));
    }
    Ok((0..graph.len())
        .map(|x| {
            let inv = if d[x].is_infinite() { 0.0 } else { 1.0 / (2.0 * d[x] * d[x]) };
            w_min[x] - inv - v_ref[x]
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionMetric {
    pub metric: PseudoMetric,
    pub mu_f: Vec<f64>,
    /// `μ_f(X)`.
    pub total_mass: f64,
    /// `2 Q_0(f)`.
    pub twice_energy: f64,
}

/// `d_f(x,y) = |f(x) - f(y)|` and `μ_f(x) = Σ_y b(x,y)|f(x) - f(y)|²`.
pub fn intrinsic_from_function(graph: &WeightedGraph, f: &[f64]) -> Result<FunctionMetric> {
    check_len(graph.len(), f.len())?;
    let coords: Vec<Vec<f64>> = f.iter().map(|&v| vec![v]).collect();
    if let Some(&(a, b)) = collisions(&coords).first() {
        return Err(Error::NotInjective(
            graph.id(a).to_string(),
            graph.id(b).to_string(),
        ));
    }
    let mu_f = embedding_measure(graph, &coords);
    let total_mass = mu_f.iter().sum();
    Ok(FunctionMetric {
        metric: PseudoMetric::Embedding(coords),
        mu_f,
        total_mass,
        twice_energy: 2.0 * graph.dirichlet_energy(f),
    })
}
