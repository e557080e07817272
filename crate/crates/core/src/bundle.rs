//! Hermitian vector bundles over a graph: fibers, self-adjoint
//! endomorphisms `W_x` and unitary connections `Φ_{x,y}`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{hermitian_eigenvalues, C64};

/// Tolerance for Hermiticity, unitarity and inverse consistency.
pub const BUNDLE_TOL: f64 = 1e-10;

/// Largest entry of `a - b`.
pub fn max_defect(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_defect(m, &m.adjoint())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBundle {
    ids: Vec<String>,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    endo: Vec<DMatrix<C64>>,
    connection: BTreeMap<(usize, usize), DMatrix<C64>>,
}

impl HermitianBundle {
    /// Checks only shapes of `W`; the connection is checked by
    /// [`validate_connection`].
    pub fn new(
        graph: &WeightedGraph,
        dims: Vec<usize>,
        endo: Vec<DMatrix<C64>>,
        connection: BTreeMap<(usize, usize), DMatrix<C64>>,
    ) -> Result<Self> {
        crate::graph::check_len(graph.len(), dims.len())?;
        crate::graph::check_len(graph.len(), endo.len())?;
        for (x, (&d, w)) in dims.iter().zip(&endo).enumerate() {
            if d == 0 {
                return Err(Error::BadParameter(alloc::format!(
                    "fiber dimension at {} must be positive",
                    graph.id(x)
                )));
            }
            if w.nrows() != d || w.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: if w.nrows() != d { w.nrows() } else { w.ncols() },
                });
            }
        }
        let mut offsets = vec![0; dims.len() + 1];
        for (x, &d) in dims.iter().enumerate() {
            offsets[x + 1] = offsets[x] + d;
        }
        Ok(Self {
            ids: graph.ids().to_vec(),
            dims,
            offsets,
            endo,
            connection,
        })
    }

    /// Trivial bundle of rank `dim`: `Φ = Id`, `W = 0`.
    pub fn trivial(graph: &WeightedGraph, dim: usize) -> Result<Self> {
        let mut connection = BTreeMap::new();
        for e in graph.edges() {
            connection.insert((e.u, e.v), DMatrix::identity(dim, dim));
            connection.insert((e.v, e.u), DMatrix::identity(dim, dim));
        }
        Self::new(
            graph,
            vec![dim; graph.len()],
            vec![DMatrix::zeros(dim, dim); graph.len()],
            connection,
        )
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Row offsets of each fiber in the direct sum; length `len() + 1`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn total_dim(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    pub fn endomorphism(&self, x: usize) -> &DMatrix<C64> {
        &self.endo[x]
    }

    pub fn endomorphisms(&self) -> &[DMatrix<C64>] {
        &self.endo
    }

    /// `Φ_{x,y}`, mapping the fiber at `y` into the fiber at `x`.
    pub fn connection(&self, x: usize, y: usize) -> Option<&DMatrix<C64>> {
        self.connection.get(&(x, y))
    }

    pub fn connections(&self) -> &BTreeMap<(usize, usize), DMatrix<C64>> {
        &self.connection
    }

    pub fn is_scalar(&self) -> bool {
        self.dims.iter().all(|&d| d == 1)
    }

    /// Same bundle with every `Φ` replaced by `-Φ`.
    pub fn negated_connection(&self) -> Self {
        let mut out = self.clone();
        for m in out.connection.values_mut() {
            *m = -m.clone();
        }
        out
    }

    /// Same connection with new endomorphisms.
    pub fn with_endomorphisms(&self, endo: Vec<DMatrix<C64>>) -> Result<Self> {
        let mut out = self.clone();
        crate::graph::check_len(self.len(), endo.len())?;
        for (x, w) in endo.iter().enumerate() {
            if w.nrows() != self.dims[x] || w.ncols() != self.dims[x] {
                return Err(Error::DimensionMismatch {
                    expected: self.dims[x],
                    found: w.nrows(),
                });
            }
        }
        out.endo = endo;
        Ok(out)
    }

    /// `W_min(x)`: the bottom of the spectrum of each `W_x`.
    pub fn w_min(&self) -> Result<Vec<f64>> {
        self.endo_spectra()
            .map(|s| s.into_iter().map(|ev| ev[0]).collect())
    }

    /// Ascending eigenvalues of each `W_x`.
    pub fn endo_spectra(&self) -> Result<Vec<Vec<f64>>> {
        self.endo
            .iter()
            .enumerate()
            .map(|(x, w)| {
                if hermitian_defect(w) > BUNDLE_TOL {
                    return Err(Error::NonHermitian(self.ids[x].clone()));
                }
                if w.nrows() == 1 {
                    Ok(vec![w[(0, 0)].re])
                } else {
                    Ok(hermitian_eigenvalues(w.clone()))
                }
            })
            .collect()
    }
}

/// Scalar magnetic potential `θ(x,y)`, stored for both orientations in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    theta: BTreeMap<(usize, usize), f64>,
}

fn wrap(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

impl ScalarField {
    /// `θ(x,y) = θ` for `x < y` and `-θ` in the other orientation.
    pub fn constant(graph: &WeightedGraph, theta: f64) -> Self {
        let mut map = BTreeMap::new();
        for e in graph.edges() {
            map.insert((e.u, e.v), wrap(theta));
            map.insert((e.v, e.u), wrap(-theta));
        }
        Self { theta: map }
    }

    pub fn zero(graph: &WeightedGraph) -> Self {
        Self::constant(graph, 0.0)
    }

    /// Angles on ordered pairs. A missing orientation is filled in by
    /// antisymmetry; both given must agree modulo `2π`.
    pub fn from_entries(
        graph: &WeightedGraph,
        entries: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self> {
        let mut given = BTreeMap::new();
        for ((x, y), t) in entries {
            if !graph.adjacent(x, y) {
                return Err(Error::BadParameter(alloc::format!(
                    "phase given on non-edge {}-{}",
                    graph.id(x),
                    graph.id(y)
                )));
            }
            given.insert((x, y), t);
        }
        let mut theta = BTreeMap::new();
        for e in graph.edges() {
            let (a, b) = ((e.u, e.v), (e.v, e.u));
            let (ta, tb) = match (given.get(&a), given.get(&b)) {
                (Some(&s), Some(&t)) => (s, t),
                (Some(&s), None) => (s, -s),
                (None, Some(&t)) => (-t, t),
                (None, None) => (0.0, 0.0),
            };
            theta.insert(a, wrap(ta));
            theta.insert(b, wrap(tb));
        }
        Ok(Self { theta })
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.theta.get(&(x, y)).copied()
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.theta
    }
}

/// Rank-one bundle with `W_x = [V(x)]` and `Φ_{x,y} = [e^{iθ(x,y)}]`.
pub fn scalar_to_bundle(
    graph: &WeightedGraph,
    theta: &ScalarField,
    potential: &[f64],
) -> Result<HermitianBundle> {
    crate::graph::check_len(graph.len(), potential.len())?;
    let mut connection = BTreeMap::new();
    for e in graph.edges() {
        let t = theta.get(e.u, e.v).unwrap_or(0.0);
        let s = theta.get(e.v, e.u).unwrap_or(0.0);
        if angular_distance(t, -s) > BUNDLE_TOL {
            return Err(Error::AsymmetricTheta {
                u: graph.id(e.u).to_string(),
                v: graph.id(e.v).to_string(),
            });
        }
        connection.insert((e.u, e.v), DMatrix::from_element(1, 1, C64::from_polar(1.0, t)));
        connection.insert((e.v, e.u), DMatrix::from_element(1, 1, C64::from_polar(1.0, s)));
    }
    let endo = potential
        .iter()
        .map(|&v| DMatrix::from_element(1, 1, C64::new(v, 0.0)))
        .collect();
    HermitianBundle::new(graph, vec![1; graph.len()], endo, connection)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    NotHermitian,
    NotUnitary,
    InverseMismatch,
    MissingConnection,
    ExtraneousConnection,
    ShapeMismatch,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::NotHermitian => "NotHermitian",
            ViolationKind::NotUnitary => "NotUnitary",
            ViolationKind::InverseMismatch => "InverseMismatch",
            ViolationKind::MissingConnection => "MissingConnection",
            ViolationKind::ExtraneousConnection => "ExtraneousConnection",
            ViolationKind::ShapeMismatch => "ShapeMismatch",
        }
    }
}

/// One failed bundle invariant. `edge` is set for connection problems,
/// `vertex` for endomorphism problems.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub edge: Option<(String, String)>,
    pub vertex: Option<String>,
    pub defect: f64,
}

/// All invariant violations of `bundle` over `graph`; empty iff valid.
pub fn validate_connection(graph: &WeightedGraph, bundle: &HermitianBundle) -> Vec<Violation> {
    let mut out = Vec::new();
    if bundle.len() != graph.len() {
        out.push(Violation {
            kind: ViolationKind::ShapeMismatch,
            edge: None,
            vertex: None,
            defect: f64::INFINITY,
        });
        return out;
    }
    let edge_violation = |kind, x: usize, y: usize, defect| Violation {
        kind,
        edge: Some((graph.id(x).to_string(), graph.id(y).to_string())),
        vertex: None,
        defect,
    };
    for x in 0..bundle.len() {
        let d = hermitian_defect(bundle.endomorphism(x));
        if d > BUNDLE_TOL {
            out.push(Violation {
                kind: ViolationKind::NotHermitian,
                edge: None,
                vertex: Some(graph.id(x).to_string()),
                defect: d,
            });
        }
    }
    for (&(x, y), phi) in bundle.connections() {
        if x >= graph.len() || y >= graph.len() || !graph.adjacent(x, y) {
            out.push(Violation {
                kind: ViolationKind::ExtraneousConnection,
                edge: Some((
                    bundle.ids.get(x).cloned().unwrap_or_default(),
                    bundle.ids.get(y).cloned().unwrap_or_default(),
                )),
                vertex: None,
                defect: f64::INFINITY,
            });
            continue;
        }
        let (dx, dy) = (bundle.dims[x], bundle.dims[y]);
        if dx != dy || phi.nrows() != dx || phi.ncols() != dy {
            out.push(edge_violation(ViolationKind::ShapeMismatch, x, y, f64::INFINITY));
            continue;
        }
        let gram = phi.adjoint() * phi;
        let d = max_defect(&gram, &DMatrix::identity(dx, dx));
        if d > BUNDLE_TOL {
            out.push(edge_violation(ViolationKind::NotUnitary, x, y, d));
        }
        if let Some(back) = bundle.connection(y, x) {
            if back.nrows() == dy && back.ncols() == dx {
                let d = max_defect(&(phi * back), &DMatrix::identity(dx, dx));
                if d > BUNDLE_TOL {
                    out.push(edge_violation(ViolationKind::InverseMismatch, x, y, d));
                }
            }
        }
    }
    for e in graph.edges() {
        for (x, y) in [(e.u, e.v), (e.v, e.u)] {
            if bundle.connection(x, y).is_none() {
                out.push(edge_violation(ViolationKind::MissingConnection, x, y, f64::INFINITY));
            }
        }
    }
    out
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Reproducible bundle of constant rank: `W_x = (G + G*)/2` for complex
/// Gaussian `G`, `Φ_{x,y}` the unitary factor of a QR decomposition and
/// `Φ_{y,x} = Φ_{x,y}*`.
pub fn random_bundle(graph: &WeightedGraph, dim: usize, seed: u64) -> Result<HermitianBundle> {
    if dim == 0 {
        return Err(Error::BadParameter("dim must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let endo = (0..graph.len())
        .map(|_| {
            let g = gaussian_matrix(&mut rng, dim);
            (g.clone() + g.adjoint()).scale(0.5)
        })
        .collect();
    let mut connection = BTreeMap::new();
    for e in graph.edges() {
        let (q, r) = gaussian_matrix(&mut rng, dim).qr().unpack();
        // fix column phases so the distribution is Haar
        let mut q = q;
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        connection.insert((e.v, e.u), q.adjoint());
        connection.insert((e.u, e.v), q);
    }
    HermitianBundle::new(graph, vec![dim; graph.len()], endo, connection)
}

/// Section of a bundle: one complex vector per vertex, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    offsets: Vec<usize>,
    data: Vec<C64>,
}

impl Section {
    pub fn zeros(bundle: &HermitianBundle) -> Self {
        Self {
            offsets: bundle.offsets.clone(),
            data: vec![C64::new(0.0, 0.0); bundle.total_dim()],
        }
    }

    pub fn from_vectors(vectors: Vec<Vec<C64>>) -> Self {
        let mut offsets = vec![0];
        let mut data = Vec::new();
        for v in vectors {
            data.extend(v);
            offsets.push(data.len());
        }
        Self { offsets, data }
    }

    /// Rank-one section from a real function.
    pub fn from_real(f: &[f64]) -> Self {
        Self {
            offsets: (0..=f.len()).collect(),
            data: f.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }

    /// Section with the same layout as `bundle` from flat data.
    pub fn from_flat(bundle: &HermitianBundle, data: Vec<C64>) -> Result<Self> {
        if data.len() != bundle.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: bundle.total_dim(),
                found: data.len(),
            });
        }
        Ok(Self {
            offsets: bundle.offsets.clone(),
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    pub fn at(&self, x: usize) -> &[C64] {
        &self.data[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn at_mut(&mut self, x: usize) -> &mut [C64] {
        let span = self.offsets[x]..self.offsets[x + 1];
        &mut self.data[span]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Pointwise norm `|f|(x)`.
    pub fn abs(&self) -> Vec<f64> {
        (0..self.len())
            .map(|x| self.at(x).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    /// `sgn f = f / |f|` where `f ≠ 0`, zero elsewhere.
    pub fn sgn(&self) -> Section {
        let abs = self.abs();
        let mut out = self.clone();
        for (x, a) in abs.into_iter().enumerate() {
            for z in out.at_mut(x) {
                *z = if a > 0.0 { *z / a } else { C64::new(0.0, 0.0) };
            }
        }
        out
    }

    /// Multiplies the fiber at `x` by `c[x]`.
    pub fn scale_pointwise(&self, c: &[f64]) -> Section {
        let mut out = self.clone();
        for (x, &s) in c.iter().enumerate() {
            out.at_mut(x).iter_mut().for_each(|z| *z *= s);
        }
        out
    }

    /// Errors unless the fiber dimensions match `bundle`.
    pub fn check(&self, bundle: &HermitianBundle) -> Result<()> {
        if self.offsets != bundle.offsets {
            let found = if self.len() != bundle.len() {
                self.len()
            } else {
                (0..self.len())
                    .map(|x| self.dim(x))
                    .zip(bundle.dims())
                    .find(|(a, b)| a != *b)
                    .map(|(a, _)| a)
                    .unwrap_or(0)
            };
            let expected = if self.len() != bundle.len() {
                bundle.len()
            } else {
                (0..self.len())
                    .map(|x| (self.dim(x), bundle.dims[x]))
                    .find(|(a, b)| a != b)
                    .map(|(_, b)| b)
                    .unwrap_or(0)
            };
            return Err(Error::DimensionMismatch { expected, found });
        }
        Ok(())
    }
}
