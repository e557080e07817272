//! The operators `H` and `M`, their forms, and numerical checks of Green's
//! formula, Kato's inequality, the ground state transform and the
//! boundedness identity.
//!
//! Pairings are `μ`-weighted and antilinear in the first argument:
//! `(φ, ψ) = Σ_x ⟨φ(x), ψ(x)⟩ μ(x)`.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::bundle::{validate_connection, HermitianBundle, Section};
use crate::error::{Error, Result};
use crate::graph::{check_len, MeasuredGraph};
use crate::linalg::{
    dot, hermitian_eigh, hermitian_eigenvalues, lanczos_smallest, smallest_eigenvalue, CsrMatrix,
    C64, DENSE_EIGEN_LIMIT,
};

/// Tolerance used by the alignment and subsolution preconditions.
pub const PRECONDITION_TOL: f64 = 1e-9;
/// Tolerance of the iterative bottom-of-spectrum estimate.
pub const LAMBDA0_TOL: f64 = 1e-8;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `H f(x) = μ(x)⁻¹ Σ_y b(x,y)(f(x) - f(y)) + V(x) f(x)`.
pub fn apply_h(mg: &MeasuredGraph, f: &[f64]) -> Result<Vec<f64>> {
    check_len(mg.len(), f.len())?;
    Ok((0..mg.len())
        .map(|x| {
            let s: f64 = mg.graph.neighbors(x).iter().map(|n| n.weight * (f[x] - f[n.vertex])).sum();
            s / mg.mu()[x] + mg.potential()[x] * f[x]
        })
        .collect())
}

/// `M f(x) = μ(x)⁻¹ Σ_y b(x,y)(f(x) - Φ_{x,y} f(y)) + W_x f(x)`.
pub fn apply_m(mg: &MeasuredGraph, bundle: &HermitianBundle, f: &Section) -> Result<Section> {
    check_len(mg.len(), bundle.len())?;
    f.check(bundle)?;
    let mut out = Section::zeros(bundle);
    for x in 0..mg.len() {
        let fx = nalgebra::DVector::from_column_slice(f.at(x));
        let mut acc = nalgebra::DVector::from_element(fx.len(), czero());
        for n in mg.graph.neighbors(x) {
            let phi = bundle
                .connection(x, n.vertex)
                .ok_or_else(|| Error::ValidationFailure("missing connection".into()))?;
            let fy = nalgebra::DVector::from_column_slice(f.at(n.vertex));
            acc += (&fx - phi * fy).scale(n.weight);
        }
        let value = acc.unscale(mg.mu()[x]) + bundle.endomorphism(x) * &fx;
        out.at_mut(x).copy_from_slice(value.as_slice());
    }
    Ok(out)
}

/// `(φ, ψ) = Σ_x ⟨φ(x), ψ(x)⟩ μ(x)`.
pub fn pairing(mg: &MeasuredGraph, phi: &Section, psi: &Section) -> C64 {
    (0..mg.len())
        .map(|x| dot(phi.at(x), psi.at(x)) * mg.mu()[x])
        .sum()
}

/// Real `μ`-weighted pairing.
pub fn real_pairing(mg: &MeasuredGraph, f: &[f64], g: &[f64]) -> f64 {
    f.iter().zip(g).zip(mg.mu()).map(|((a, b), m)| a * b * m).sum()
}

/// Finite-section matrix of `M`.
///
/// `action` holds `M` in the fiber coordinates; `symmetric` holds
/// `D^{1/2} M D^{-1/2}` with `D = diag(μ)`, which is Hermitian.
#[derive(Debug, Clone)]
pub struct AssembledOperator {
    pub action: CsrMatrix<C64>,
    pub symmetric: CsrMatrix<C64>,
    /// `μ` of the vertex owning each row.
    pub weights: Vec<f64>,
    /// `(vertex, fiber coordinate)` of each row.
    pub index: Vec<(usize, usize)>,
    offsets: Vec<usize>,
}

/// Builds the matrix of `M`. The bundle must pass [`validate_connection`].
pub fn assemble(mg: &MeasuredGraph, bundle: &HermitianBundle) -> Result<AssembledOperator> {
    let violations = validate_connection(&mg.graph, bundle);
    if let Some(v) = violations.first() {
        let place = match (&v.edge, &v.vertex) {
            (Some((a, b)), _) => alloc::format!("{a}->{b}"),
            (None, Some(x)) => x.clone(),
            _ => "bundle".to_string(),
        };
        return Err(Error::ValidationFailure(alloc::format!(
            "{} at {place} ({} violations)",
            v.kind.name(),
            violations.len()
        )));
    }
    let offsets = bundle.offsets().to_vec();
    let n = bundle.total_dim();
    let mut action = Vec::new();
    let mut symmetric = Vec::new();
    let mut weights = vec![0.0; n];
    let mut index = vec![(0, 0); n];
    for x in 0..mg.len() {
        let (ox, dx) = (offsets[x], bundle.dims()[x]);
        let mu_x = mg.mu()[x];
        let deg = mg.normalized_degree(x);
        let w = bundle.endomorphism(x);
        for i in 0..dx {
            weights[ox + i] = mu_x;
            index[ox + i] = (x, i);
            for j in 0..dx {
                let mut v = w[(i, j)];
                if i == j {
                    v += deg;
                }
                action.push((ox + i, ox + j, v));
                symmetric.push((ox + i, ox + j, v));
            }
        }
        for nb in mg.graph.neighbors(x) {
            let y = nb.vertex;
            let phi = bundle.connection(x, y).expect("validated");
            let oy = offsets[y];
            let a = -nb.weight / mu_x;
            let s = -nb.weight / (mu_x * mg.mu()[y]).sqrt();
            for i in 0..dx {
                for j in 0..bundle.dims()[y] {
                    action.push((ox + i, oy + j, phi[(i, j)] * a));
                    symmetric.push((ox + i, oy + j, phi[(i, j)] * s));
                }
            }
        }
    }
    Ok(AssembledOperator {
        action: CsrMatrix::from_triplets(n, n, action),
        symmetric: CsrMatrix::from_triplets(n, n, symmetric),
        weights,
        index,
        offsets,
    })
}

impl AssembledOperator {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `M f` via the stored matrix.
    pub fn apply(&self, f: &Section) -> Section {
        let data = self.action.mul_vec(f.data());
        Section::from_vectors(
            (0..self.offsets.len() - 1)
                .map(|x| data[self.offsets[x]..self.offsets[x + 1]].to_vec())
                .collect(),
        )
    }

    /// Largest entry of `DM - (DM)*`.
    pub fn weighted_self_adjoint_defect(&self) -> f64 {
        self.action
            .map(|r, _, v| v * self.weights[r])
            .hermitian_defect()
    }

    /// Full ascending spectrum (dense).
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.symmetric.to_dense())
    }

    /// Ascending eigenpairs with eigenvectors mapped back to sections of `M`,
    /// normalised in the `μ`-weighted norm.
    pub fn eigenpairs(&self) -> Vec<(f64, Section)> {
        let (values, vectors) = hermitian_eigh(self.symmetric.to_dense());
        values
            .into_iter()
            .enumerate()
            .map(|(k, lambda)| {
                let data: Vec<C64> = (0..self.dim())
                    .map(|r| vectors[(r, k)] / self.weights[r].sqrt())
                    .collect();
                let section = Section::from_vectors(
                    (0..self.offsets.len() - 1)
                        .map(|x| data[self.offsets[x]..self.offsets[x + 1]].to_vec())
                        .collect(),
                );
                (lambda, section)
            })
            .collect()
    }

    /// Bottom and top of the spectrum.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        if self.dim() < DENSE_EIGEN_LIMIT {
            let s = self.spectrum();
            Ok((s[0], s[s.len() - 1]))
        } else {
            let lo = lanczos_smallest(&self.symmetric, LAMBDA0_TOL, 120, 200)?;
            let neg = self.symmetric.map(|_, _, v| -v);
            let hi = -lanczos_smallest(&neg, LAMBDA0_TOL, 120, 200)?;
            Ok((lo, hi))
        }
    }
}

/// Bottom of the spectrum of the assembled operator.
pub fn lambda0_estimate(op: &AssembledOperator) -> Result<f64> {
    smallest_eigenvalue(&op.symmetric, LAMBDA0_TOL)
}

/// Value of the form; the split is present for on-diagonal evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValue {
    pub value: C64,
    pub kinetic: Option<f64>,
    pub endomorphism: Option<f64>,
}

/// `Q(φ, ψ) = ½ Σ_{x,y} b ⟨φ(x) - Φ_{x,y}φ(y), ψ(x) - Φ_{x,y}ψ(y)⟩ + Σ_x ⟨W_x φ(x), ψ(x)⟩ μ(x)`.
pub fn form_qc(
    mg: &MeasuredGraph,
    bundle: &HermitianBundle,
    phi: &Section,
    psi: &Section,
) -> Result<FormValue> {
    phi.check(bundle)?;
    psi.check(bundle)?;
    let mut kinetic = czero();
    for e in mg.graph.edges() {
        // the (x,y) and (y,x) terms coincide for unitary Φ; sum both as written
        for (x, y) in [(e.u, e.v), (e.v, e.u)] {
            let p = bundle
                .connection(x, y)
                .ok_or_else(|| Error::ValidationFailure("missing connection".into()))?;
            let dp = nalgebra::DVector::from_column_slice(phi.at(x))
                - p * nalgebra::DVector::from_column_slice(phi.at(y));
            let dq = nalgebra::DVector::from_column_slice(psi.at(x))
                - p * nalgebra::DVector::from_column_slice(psi.at(y));
            kinetic += dp.dotc(&dq) * (0.5 * e.weight);
        }
    }
    let mut endo = czero();
    for x in 0..mg.len() {
        let wp = bundle.endomorphism(x) * nalgebra::DVector::from_column_slice(phi.at(x));
        endo += wp.dotc(&nalgebra::DVector::from_column_slice(psi.at(x))) * mg.mu()[x];
    }
    let diagonal = phi == psi;
    Ok(FormValue {
        value: kinetic + endo,
        kinetic: diagonal.then_some(kinetic.re),
        endomorphism: diagonal.then_some(endo.re),
    })
}

/// Residuals of Green's formula on a finite graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenResidual {
    /// `|(φ, Mf) - Q(φ, f)|`.
    pub form_gap: f64,
    /// `|(φ, Mf) - (Mφ, f)|`.
    pub symmetry_gap: f64,
}

pub fn greens_residual(
    mg: &MeasuredGraph,
    bundle: &HermitianBundle,
    phi: &Section,
    f: &Section,
) -> Result<GreenResidual> {
    let mf = apply_m(mg, bundle, f)?;
    let mphi = apply_m(mg, bundle, phi)?;
    let lhs = pairing(mg, phi, &mf);
    let q = form_qc(mg, bundle, phi, f)?.value;
    Ok(GreenResidual {
        form_gap: (lhs - q).norm(),
        symmetry_gap: (lhs - pairing(mg, &mphi, f)).norm(),
    })
}

/// `Re (φ, Mf) - (|φ|, H_{μ,w_min} |f|)`. Requires `⟨f(x), φ(x)⟩ = |f(x)||φ(x)|`
/// at every vertex.
pub fn kato_gap(
    mg: &MeasuredGraph,
    bundle: &HermitianBundle,
    f: &Section,
    phi: &Section,
) -> Result<f64> {
    f.check(bundle)?;
    phi.check(bundle)?;
    let (af, ap) = (f.abs(), phi.abs());
    for x in 0..mg.len() {
        let inner = dot(f.at(x), phi.at(x));
        let target = af[x] * ap[x];
        if (inner - target).norm() > PRECONDITION_TOL * target.max(1.0) {
            return Err(Error::AlignmentViolated(mg.graph.id(x).to_string()));
        }
    }
    let comparison = mg.with_potential(bundle.w_min()?)?;
    let lhs = pairing(mg, phi, &apply_m(mg, bundle, f)?).re;
    let rhs = real_pairing(mg, &ap, &apply_h(&comparison, &af)?);
    Ok(lhs - rhs)
}

/// `H_{μ,w_min}|f| - λ|f|` pointwise; nonpositive when `Mf = λf`.
pub fn subsolution_excess(
    mg: &MeasuredGraph,
    bundle: &HermitianBundle,
    f: &Section,
    lambda: f64,
) -> Result<Vec<f64>> {
    let comparison = mg.with_potential(bundle.w_min()?)?;
    let af = f.abs();
    Ok(apply_h(&comparison, &af)?
        .into_iter()
        .zip(&af)
        .map(|(h, a)| h - lambda * a)
        .collect())
}

/// `Q^c(f φ) = ½ Σ b (fφ(x) - fφ(y))² + Σ V (fφ)² μ` for real functions.
pub fn scalar_energy(mg: &MeasuredGraph, f: &[f64]) -> f64 {
    mg.graph.dirichlet_energy(f) + f.iter().zip(mg.potential()).zip(mg.mu()).map(|((a, v), m)| a * a * v * m).sum::<f64>()
}

/// Right side minus left side of `Q^c(fφ) ≤ Q^{c,f}(φ) + λ‖fφ‖²`, where
/// `Q^{c,f}` is the potential-free form of the ground-state graph
/// `f(x) f(y) b(x,y)`. Requires `f ≥ 0` and `H f ≤ λ f`.
pub fn ground_state_inequality(
    mg: &MeasuredGraph,
    f: &[f64],
    lambda: f64,
    phi: &[f64],
) -> Result<f64> {
    check_len(mg.len(), phi.len())?;
    let transformed = mg.graph.ground_state_graph(f)?;
    let hf = apply_h(mg, f)?;
    let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for x in 0..mg.len() {
        if hf[x] > lambda * f[x] + PRECONDITION_TOL * scale {
            return Err(Error::NotSubsolution(mg.graph.id(x).to_string()));
        }
    }
    let f_phi: Vec<f64> = f.iter().zip(phi).map(|(a, b)| a * b).collect();
    let lhs = scalar_energy(mg, &f_phi);
    let rhs = transformed.dirichlet_energy(phi) + lambda * mg.norm_sq(&f_phi);
    Ok(rhs - lhs)
}

/// `B(x) = max |spec(Deg(x) I + W_x)|`.
pub fn b_function(mg: &MeasuredGraph, bundle: &HermitianBundle) -> Result<Vec<f64>> {
    let spectra = bundle.endo_spectra()?;
    Ok(spectra
        .iter()
        .enumerate()
        .map(|(x, ev)| {
            let deg = mg.normalized_degree(x);
            let lo = (deg + ev[0]).abs();
            let hi = (deg + ev[ev.len() - 1]).abs();
            lo.max(hi)
        })
        .collect())
}

/// `q_{Deg+W}(φ) = Σ ⟨(Deg(x) + W_x) φ(x), φ(x)⟩ μ(x)`.
fn q_deg_w(mg: &MeasuredGraph, bundle: &HermitianBundle, phi: &Section) -> f64 {
    (0..mg.len())
        .map(|x| {
            let v = nalgebra::DVector::from_column_slice(phi.at(x));
            let wv = bundle.endomorphism(x) * &v + v.scale(mg.normalized_degree(x));
            v.dotc(&wv).re * mg.mu()[x]
        })
        .sum()
}

/// Relative residual of `Q_{Φ,W}(φ) = 2 q_{Deg+W}(φ) - Q_{-Φ,W}(φ)`.
pub fn heart_residual(mg: &MeasuredGraph, bundle: &HermitianBundle, phi: &Section) -> Result<f64> {
    let plus = form_qc(mg, bundle, phi, phi)?.value.re;
    let minus = form_qc(mg, &bundle.negated_connection(), phi, phi)?.value.re;
    let q = q_deg_w(mg, bundle, phi);
    let scale = plus.abs().max(minus.abs()).max(q.abs()).max(1.0);
    Ok((plus - (2.0 * q - minus)).abs() / scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub b_max: f64,
    /// `(λ_min, λ_max)` for the connection `Φ`.
    pub plus: (f64, f64),
    /// `(λ_min, λ_max)` for `-Φ`.
    pub minus: (f64, f64),
    /// Largest relative residual of the identity over the probes.
    pub heart_residual: f64,
}

pub fn boundedness_report(
    mg: &MeasuredGraph,
    bundle: &HermitianBundle,
    probes: &[Section],
) -> Result<BoundednessReport> {
    let b = b_function(mg, bundle)?;
    let plus = assemble(mg, bundle)?.extreme_eigenvalues()?;
    let minus = assemble(mg, &bundle.negated_connection())?.extreme_eigenvalues()?;
    let mut heart = 0.0f64;
    for p in probes {
        heart = heart.max(heart_residual(mg, bundle, p)?);
    }
    Ok(BoundednessReport {
        b_max: b.into_iter().fold(0.0, f64::max),
        plus,
        minus,
        heart_residual: heart,
    })
}

/// `D^{1/2} H D^{-1/2}` for a real scalar potential.
pub fn symmetrized_scalar(mg: &MeasuredGraph, potential: &[f64]) -> CsrMatrix<f64> {
    let extra: Vec<f64> = potential.iter().zip(mg.mu()).map(|(v, m)| v * m).collect();
    let mu = mg.mu();
    mg.graph
        .laplacian_plus_diagonal(&extra)
        .map(|r, c, v| v / (mu[r] * mu[c]).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventTable {
    pub n_list: Vec<usize>,
    /// `G^n_α f` for each `n`, in the order of `n_list`.
    pub rows: Vec<Vec<f64>>,
    /// Largest entrywise decrease between consecutive rows (0 if monotone).
    pub max_decrease: f64,
    pub monotone: bool,
}

/// Resolvents of `H` with the truncated potentials `V_n = max(V, -n)`,
/// i.e. solutions of `(H_n + α) g = f`.
pub fn monotone_resolvent_experiment(
    mg: &MeasuredGraph,
    alpha: f64,
    f: &[f64],
    n_list: &[usize],
) -> Result<ResolventTable> {
    check_len(mg.len(), f.len())?;
    if let Some(x) = f.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeFunction(mg.graph.id(x).to_string()));
    }
    let mut n_sorted = n_list.to_vec();
    n_sorted.sort_unstable();
    let mut rows = Vec::new();
    for &n in &n_sorted {
        let vn: Vec<f64> = mg.potential().iter().map(|&v| v.max(-(n as f64))).collect();
        if vn.iter().any(|&v| v < 0.0) {
            let lambda0 = smallest_eigenvalue(&symmetrized_scalar(mg, &vn), LAMBDA0_TOL)?;
            if alpha <= -lambda0 {
                return Err(Error::AlphaTooSmall { alpha, bound: -lambda0 });
            }
        } else if alpha <= 0.0 {
            return Err(Error::AlphaTooSmall { alpha, bound: 0.0 });
        }
        let extra: Vec<f64> = vn.iter().zip(mg.mu()).map(|(v, m)| (v + alpha) * m).collect();
        let a = mg.graph.laplacian_plus_diagonal(&extra);
        let rhs: Vec<f64> = f.iter().zip(mg.mu()).map(|(v, m)| v * m).collect();
        rows.push(crate::linalg::SpdSolver::new(a)?.solve(&rhs)?);
    }
    let scale = rows.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut max_decrease = 0.0f64;
    for w in rows.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            max_decrease = max_decrease.max(a - b);
        }
    }
    Ok(ResolventTable {
        n_list: n_sorted,
        rows,
        max_decrease,
        monotone: max_decrease <= 1e-10 * scale,
    })
}

/// Checks `Q^c_0(φ) ≥ Σ w |φ|²` on the finite graph: the margin is the
/// smallest eigenvalue of the form matrix `L - diag(w)`.
pub fn hardy_weight_check(mg: &MeasuredGraph, w: &[f64]) -> Result<(bool, f64)> {
    check_len(mg.len(), w.len())?;
    if !mg.has_zero_potential() {
        return Err(Error::NonZeroPotential);
    }
    if let Some(x) = w.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeWeight(mg.graph.id(x).to_string()));
    }
    let minus_w: Vec<f64> = w.iter().map(|v| -v).collect();
    let m = mg.graph.laplacian_plus_diagonal(&minus_w);
    let margin = smallest_eigenvalue(&m, LAMBDA0_TOL)?;
    Ok((margin >= -PRECONDITION_TOL, margin))
}

/// Dense matrix of the real form `Q^c` in the standard basis (`μ` absent).
pub fn scalar_form_dense(mg: &MeasuredGraph) -> DMatrix<f64> {
    let extra: Vec<f64> = mg.potential().iter().zip(mg.mu()).map(|(v, m)| v * m).collect();
    mg.graph.laplacian_plus_diagonal(&extra).to_dense()
}
