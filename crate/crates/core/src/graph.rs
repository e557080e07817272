//! Weighted graphs, measures, paths and exhaustions.
//!
//! Vertices carry opaque string ids; every numeric routine works on the
//! dense index `0..len()` assigned in insertion order. Vertex functions are
//! plain slices aligned with that order.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Weights below this are rejected so that positivity stays testable.
pub const MIN_WEIGHT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: usize,
    pub weight: f64,
    /// Position of the edge in [`WeightedGraph::edges`].
    pub edge: usize,
}

/// Finite weighted graph with symmetric, strictly positive edge weights and
/// no self-loops. Each unordered pair is stored once.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    lookup: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Neighbor>>,
    section_boundary: Vec<usize>,
}

impl WeightedGraph {
    /// Validates and builds a graph from string ids.
    pub fn new<I, S, E, T>(vertices: I, edges: E) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        E: IntoIterator<Item = (T, T, f64)>,
        T: AsRef<str>,
    {
        let ids: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut lookup = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if lookup.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        let mut indexed = Vec::new();
        for (u, v, w) in edges {
            let iu = *lookup
                .get(u.as_ref())
                .ok_or_else(|| Error::UnknownVertex(u.as_ref().to_string()))?;
            let iv = *lookup
                .get(v.as_ref())
                .ok_or_else(|| Error::UnknownVertex(v.as_ref().to_string()))?;
            indexed.push((iu, iv, w));
        }
        Self::build(ids, lookup, indexed)
    }

    /// Builds a graph from ids and index-based edges.
    pub fn from_indexed(ids: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut lookup = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if lookup.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        for &(u, v, _) in &edges {
            for x in [u, v] {
                if x >= ids.len() {
                    return Err(Error::UnknownVertex(x.to_string()));
                }
            }
        }
        Self::build(ids, lookup, edges)
    }

    fn build(
        ids: Vec<String>,
        lookup: BTreeMap<String, usize>,
        raw: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(raw.len());
        let mut adjacency: Vec<Vec<Neighbor>> = vec![Vec::new(); ids.len()];
        for (u, v, weight) in raw {
            if u == v {
                return Err(Error::SelfLoop(ids[u].clone()));
            }
            if !(weight.is_finite() && weight >= MIN_WEIGHT) {
                return Err(Error::NonPositiveWeight {
                    u: ids[u].clone(),
                    v: ids[v].clone(),
                    weight,
                });
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(Error::DuplicateEdge {
                    u: ids[u].clone(),
                    v: ids[v].clone(),
                });
            }
            let edge = edges.len();
            edges.push(Edge { u: a, v: b, weight });
            adjacency[a].push(Neighbor { vertex: b, weight, edge });
            adjacency[b].push(Neighbor { vertex: a, weight, edge });
        }
        for list in &mut adjacency {
            list.sort_by_key(|n| n.vertex);
        }
        Ok(Self {
            ids,
            lookup,
            edges,
            adjacency,
            section_boundary: Vec::new(),
        })
    }

    /// Marks the vertices where a finite section was cut out of a larger graph.
    pub fn with_section_boundary(mut self, boundary: Vec<usize>) -> Self {
        self.section_boundary = boundary;
        self
    }

    pub fn section_boundary(&self) -> &[usize] {
        &self.section_boundary
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>> {
        ids.iter().map(|s| self.index_of(s.as_ref())).collect()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[Neighbor] {
        &self.adjacency[x]
    }

    /// Edge weight `b(x, y)`; zero for non-adjacent pairs.
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.edge_between(x, y).map_or(0.0, |n| n.weight)
    }

    pub fn edge_between(&self, x: usize, y: usize) -> Option<&Neighbor> {
        let list = &self.adjacency[x];
        list.binary_search_by_key(&y, |n| n.vertex)
            .ok()
            .map(|i| &list[i])
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        self.edge_between(x, y).is_some()
    }

    /// `deg(x) = Σ_y b(x, y)` by vertex id.
    pub fn degree(&self, id: &str) -> Result<f64> {
        Ok(self.degree_at(self.index_of(id)?))
    }

    pub fn degree_at(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|n| n.weight).sum()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.len()).map(|x| self.degree_at(x)).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// `½ Σ_{x,y} b(x,y) (f(x) - f(y))²`, i.e. one term per edge.
    pub fn dirichlet_energy(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.weight * (f[e.u] - f[e.v]) * (f[e.u] - f[e.v]))
            .sum()
    }

    /// Combinatorial Laplacian `Σ_y b(x,y)(f(x) - f(y))` plus `diag(extra)`.
    pub fn laplacian_plus_diagonal(&self, extra: &[f64]) -> crate::linalg::CsrMatrix<f64> {
        let mut t = Vec::with_capacity(self.len() + 2 * self.edges.len());
        for x in 0..self.len() {
            t.push((x, x, self.degree_at(x) + extra[x]));
        }
        for e in &self.edges {
            t.push((e.u, e.v, -e.weight));
            t.push((e.v, e.u, -e.weight));
        }
        crate::linalg::CsrMatrix::from_triplets(self.len(), self.len(), t)
    }

    /// `U ∪ {x : x ~ y for some y ∈ U}`, sorted.
    pub fn combinatorial_neighborhood(&self, subset: &[usize]) -> Result<Vec<usize>> {
        let mut out = BTreeSet::new();
        for &x in subset {
            if x >= self.len() {
                return Err(Error::UnknownVertex(x.to_string()));
            }
            out.insert(x);
            out.extend(self.adjacency[x].iter().map(|n| n.vertex));
        }
        Ok(out.into_iter().collect())
    }

    /// True iff consecutive vertices of the path are adjacent.
    pub fn is_path(&self, path: &Path) -> bool {
        if path.0.iter().any(|&x| x >= self.len()) {
            return false;
        }
        path.0.windows(2).all(|w| self.adjacent(w[0], w[1]))
    }

    /// Hop distances from `seed`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, seed: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        dist[seed] = Some(0);
        queue.push_back(seed);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0);
            for n in &self.adjacency[x] {
                if dist[n.vertex].is_none() {
                    dist[n.vertex] = Some(d + 1);
                    queue.push_back(n.vertex);
                }
            }
        }
        dist
    }

    /// Component label per vertex and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.len()];
        let mut count = 0;
        for s in 0..self.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = count;
            while let Some(x) = stack.pop() {
                for n in &self.adjacency[x] {
                    if label[n.vertex] == usize::MAX {
                        label[n.vertex] = count;
                        stack.push(n.vertex);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 <= 1
    }

    /// Graph with weights `f(x) f(y) b(x, y)`; edges whose product vanishes are dropped.
    pub fn ground_state_graph(&self, f: &[f64]) -> Result<WeightedGraph> {
        check_len(self.len(), f.len())?;
        if let Some(x) = f.iter().position(|&v| !(v >= 0.0)) {
            return Err(Error::NegativeFunction(self.ids[x].clone()));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| (e.u, e.v, f[e.u] * f[e.v] * e.weight))
            .filter(|&(_, _, w)| w >= MIN_WEIGHT)
            .collect();
        Ok(WeightedGraph::from_indexed(self.ids.clone(), edges)?
            .with_section_boundary(self.section_boundary.clone()))
    }

    /// Induced subgraph on `subset` (in the given order).
    pub fn induced(&self, subset: &[usize]) -> Result<WeightedGraph> {
        let mut position = vec![usize::MAX; self.len()];
        for (i, &x) in subset.iter().enumerate() {
            position[x] = i;
        }
        let ids = subset.iter().map(|&x| self.ids[x].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| position[e.u] != usize::MAX && position[e.v] != usize::MAX)
            .map(|e| (position[e.u], position[e.v], e.weight))
            .collect();
        WeightedGraph::from_indexed(ids, edges)
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Weighted graph together with a strictly positive measure `μ` and a real potential `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredGraph {
    pub graph: WeightedGraph,
    mu: Vec<f64>,
    potential: Vec<f64>,
}

impl MeasuredGraph {
    pub fn new(graph: WeightedGraph, mu: Vec<f64>, potential: Vec<f64>) -> Result<Self> {
        check_len(graph.len(), mu.len())?;
        check_len(graph.len(), potential.len())?;
        if let Some(x) = mu.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::NonPositiveMeasure(graph.id(x).to_string()));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParameter("potential must be finite".into()));
        }
        Ok(Self { graph, mu, potential })
    }

    /// Counting measure and zero potential.
    pub fn counting(graph: WeightedGraph) -> Self {
        let n = graph.len();
        Self {
            graph,
            mu: vec![1.0; n],
            potential: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn with_potential(&self, potential: Vec<f64>) -> Result<Self> {
        Self::new(self.graph.clone(), self.mu.clone(), potential)
    }

    pub fn with_mu(&self, mu: Vec<f64>) -> Result<Self> {
        Self::new(self.graph.clone(), mu, self.potential.clone())
    }

    /// `Deg(x) = deg(x) / μ(x)`.
    pub fn normalized_degree(&self, x: usize) -> f64 {
        self.graph.degree_at(x) / self.mu[x]
    }

    pub fn has_zero_potential(&self) -> bool {
        self.potential.iter().all(|&v| v == 0.0)
    }

    /// `Σ |f|² μ`.
    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mu).map(|(v, m)| v * v * m).sum()
    }
}

/// Finite sequence of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn from_ids<S: AsRef<str>>(graph: &WeightedGraph, ids: &[S]) -> Result<Self> {
        Ok(Path(graph.indices_of(ids)?))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// True iff all consecutive pairs of `path` are edges of `graph`.
pub fn validate_path(graph: &WeightedGraph, path: &Path) -> bool {
    graph.is_path(path)
}

/// Nested finite vertex sets `K_1 ⊆ K_2 ⊆ …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exhaustion {
    sets: Vec<Vec<usize>>,
}

impl Exhaustion {
    pub fn new(mut sets: Vec<Vec<usize>>) -> Result<Self> {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        for w in sets.windows(2) {
            let outer: BTreeSet<_> = w[1].iter().collect();
            if !w[0].iter().all(|x| outer.contains(x)) {
                return Err(Error::BadParameter("exhaustion sets must be nested".into()));
            }
        }
        Ok(Self { sets })
    }

    /// Breadth-first balls of the given hop radii around `seed`.
    pub fn bfs_balls(graph: &WeightedGraph, seed: usize, radii: &[usize]) -> Result<Self> {
        if seed >= graph.len() {
            return Err(Error::UnknownVertex(seed.to_string()));
        }
        let mut radii = radii.to_vec();
        radii.sort_unstable();
        let dist = graph.bfs_distances(seed);
        let sets = radii
            .iter()
            .map(|&r| {
                (0..graph.len())
                    .filter(|&x| matches!(dist[x], Some(d) if d <= r))
                    .collect()
            })
            .collect();
        Self::new(sets)
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WeightedGraph {
        WeightedGraph::new(["0", "1", "2"], [("0", "1", 1.0), ("1", "2", 1.0)]).unwrap()
    }

    fn k4() -> WeightedGraph {
        let ids = ["0", "1", "2", "3"];
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((ids[i], ids[j], 1.0));
            }
        }
        WeightedGraph::new(ids, edges).unwrap()
    }

    #[test]
    fn path_graph_degree() {
        let g = path3();
        assert_eq!(g.degree("1").unwrap(), 2.0);
        assert_eq!(g.degree("0").unwrap(), 1.0);
        assert!(matches!(g.degree("9"), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            WeightedGraph::new(["0"], [("0", "0", 1.0)]),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            WeightedGraph::new(["0", "1"], [("0", "1", 1.0), ("1", "0", 2.0)]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(["0", "1"], [("0", "1", 0.0)]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(["0", "1"], [("0", "1", 1e-301)]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(["0", "1"], [("0", "2", 1.0)]),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn isolated_vertex_and_k4_degrees() {
        let g = WeightedGraph::new(["a", "b", "c"], [("a", "b", 1.0)]).unwrap();
        assert_eq!(g.degree("c").unwrap(), 0.0);
        let k = k4();
        for id in ["0", "1", "2", "3"] {
            assert_eq!(k.degree(id).unwrap(), 3.0);
        }
    }

    #[test]
    fn neighborhoods() {
        let g = path3();
        assert_eq!(g.combinatorial_neighborhood(&[1]).unwrap(), vec![0, 1, 2]);
        assert!(g.combinatorial_neighborhood(&[]).unwrap().is_empty());
        assert_eq!(k4().combinatorial_neighborhood(&[0]).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn paths() {
        let g = path3();
        assert!(validate_path(&g, &Path(vec![0, 1, 2])));
        assert!(!validate_path(&g, &Path(vec![0, 2])));
        assert!(validate_path(&g, &Path(vec![1])));
    }

    #[test]
    fn ground_state_weights() {
        let g = path3();
        assert_eq!(g.ground_state_graph(&[1.0; 3]).unwrap(), g);
        assert!(g.ground_state_graph(&[0.0; 3]).unwrap().edges().is_empty());
        let gs = g.ground_state_graph(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(gs.weight(0, 1), 2.0);
        assert_eq!(gs.weight(1, 2), 6.0);
        assert!(matches!(
            g.ground_state_graph(&[1.0, -1.0, 1.0]),
            Err(Error::NegativeFunction(_))
        ));
    }

    #[test]
    fn bfs_exhaustion_is_nested() {
        let g = path3();
        let ex = Exhaustion::bfs_balls(&g, 0, &[0, 1, 2]).unwrap();
        assert_eq!(ex.sets(), &[vec![0], vec![0, 1], vec![0, 1, 2]]);
        assert!(Exhaustion::new(vec![vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn measure_must_be_positive() {
        assert!(matches!(
            MeasuredGraph::new(path3(), vec![1.0, 0.0, 1.0], vec![0.0; 3]),
            Err(Error::NonPositiveMeasure(_))
        ));
    }
}
