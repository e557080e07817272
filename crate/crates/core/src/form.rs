//! Finite Dirichlet and Neumann forms on vertex subsets, their resolvents,
//! Beurling–Deny checks, 1-excessive functions, capacities and the
//! measure-space criterion.
//!
//! A form is stored through its matrix `A` with `Q(f) = fᵀ A f`; the
//! associated operator is `L = D⁻¹ A` on `ℓ²(U, μ)`, `D = diag(μ)`.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;

use rand::Rng;

use crate::bundle::ScalarField;
use crate::error::{Error, Result};
use crate::graph::{check_len, Exhaustion, MeasuredGraph, Path};
use crate::linalg::{hermitian_eigenvalues, smallest_eigenvalue, CsrMatrix, SpdSolver};
use crate::operator::LAMBDA0_TOL;

/// Verdict tolerance for positivity, Markov and excessive checks.
pub const CHECK_TOL: f64 = 1e-9;
/// Required margin of `α` above `-λ0`.
pub const ALPHA_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormMode {
    Dirichlet,
    Neumann,
}

impl FormMode {
    pub fn name(self) -> &'static str {
        match self {
            FormMode::Dirichlet => "dirichlet",
            FormMode::Neumann => "neumann",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiniteForm {
    subset: Vec<usize>,
    position: Vec<Option<usize>>,
    mode: FormMode,
    matrix: CsrMatrix<f64>,
    mu: Vec<f64>,
    lambda0: OnceCell<f64>,
}

fn sorted_subset(mg: &MeasuredGraph, subset: &[usize]) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&x) = s.iter().find(|&&x| x >= mg.len()) {
        return Err(Error::UnknownVertex(x.to_string()));
    }
    Ok(s)
}

impl FiniteForm {
    fn build(mg: &MeasuredGraph, subset: Vec<usize>, mode: FormMode, matrix: CsrMatrix<f64>) -> Self {
        let mut position = vec![None; mg.len()];
        for (i, &x) in subset.iter().enumerate() {
            position[x] = Some(i);
        }
        let mu = subset.iter().map(|&x| mg.mu()[x]).collect();
        Self {
            subset,
            position,
            mode,
            matrix,
            mu,
            lambda0: OnceCell::new(),
        }
    }

    /// `Q^(N)_U(f) = ½ Σ_{x,y∈U} b (f(x) - f(y))² + Σ_{x∈U} f(x)² (V(x) + d_U(x)) μ(x)`,
    /// assembled from the induced subgraph and the killing term `d_U`.
    pub fn neumann(mg: &MeasuredGraph, subset: &[usize]) -> Result<Self> {
        let subset = sorted_subset(mg, subset)?;
        let mut inside = vec![false; mg.len()];
        subset.iter().for_each(|&x| inside[x] = true);
        let induced = mg.graph.induced(&subset)?;
        let extra: Vec<f64> = subset
            .iter()
            .map(|&x| {
                let killing: f64 = mg
                    .graph
                    .neighbors(x)
                    .iter()
                    .filter(|n| !inside[n.vertex])
                    .map(|n| n.weight)
                    .sum();
                mg.potential()[x] * mg.mu()[x] + killing
            })
            .collect();
        let matrix = induced.laplacian_plus_diagonal(&extra);
        Ok(Self::build(mg, subset, FormMode::Neumann, matrix))
    }

    /// Host form on functions extended by zero off `U`: the principal
    /// submatrix of the host form matrix.
    pub fn dirichlet(mg: &MeasuredGraph, subset: &[usize]) -> Result<Self> {
        let subset = sorted_subset(mg, subset)?;
        let extra: Vec<f64> = mg.potential().iter().zip(mg.mu()).map(|(v, m)| v * m).collect();
        let matrix = mg.graph.laplacian_plus_diagonal(&extra).principal(&subset);
        Ok(Self::build(mg, subset, FormMode::Dirichlet, matrix))
    }

    pub fn new(mg: &MeasuredGraph, subset: &[usize], mode: FormMode) -> Result<Self> {
        match mode {
            FormMode::Neumann => Self::neumann(mg, subset),
            FormMode::Dirichlet => Self::dirichlet(mg, subset),
        }
    }

    /// Form of the whole host.
    pub fn full(mg: &MeasuredGraph) -> Result<Self> {
        Self::neumann(mg, &(0..mg.len()).collect::<Vec<_>>())
    }

    /// Real form of the scalar magnetic operator whose phases are all `0`
    /// or `π`: an edge with `Φ = -1` contributes `b (f(x) + f(y))²`.
    pub fn magnetic_real(mg: &MeasuredGraph, theta: &ScalarField) -> Result<Self> {
        let n = mg.len();
        let mut t = Vec::new();
        for x in 0..n {
            t.push((x, x, mg.graph.degree_at(x) + mg.potential()[x] * mg.mu()[x]));
        }
        for e in mg.graph.edges() {
            let angle = theta.get(e.u, e.v).unwrap_or(0.0);
            let (c, s) = (num_traits::Float::cos(angle), num_traits::Float::sin(angle));
            if s.abs() > 1e-12 {
                return Err(Error::BadParameter("phase must be 0 or π for a real form".into()));
            }
            let sign = if c > 0.0 { -1.0 } else { 1.0 };
            t.push((e.u, e.v, sign * e.weight));
            t.push((e.v, e.u, sign * e.weight));
        }
        let matrix = CsrMatrix::from_triplets(n, n, t);
        Ok(Self::build(mg, (0..n).collect(), FormMode::Neumann, matrix))
    }

    pub fn mode(&self) -> FormMode {
        self.mode
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn len(&self) -> usize {
        self.subset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset.is_empty()
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Local index of a host vertex.
    pub fn local(&self, host: usize) -> Option<usize> {
        self.position.get(host).copied().flatten()
    }

    /// Restriction of a host function to `U`.
    pub fn restrict(&self, host_f: &[f64]) -> Vec<f64> {
        self.subset.iter().map(|&x| host_f[x]).collect()
    }

    /// Zero extension of a function on `U` to the host.
    pub fn extend(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.position.len()];
        for (i, &x) in self.subset.iter().enumerate() {
            out[x] = f[i];
        }
        out
    }

    pub fn bilinear(&self, f: &[f64], g: &[f64]) -> f64 {
        self.matrix.mul_vec(g).iter().zip(f).map(|(a, b)| a * b).sum()
    }

    pub fn energy(&self, f: &[f64]) -> f64 {
        self.bilinear(f, f)
    }

    /// `⟨f, g⟩_μ` on `U`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.mu).map(|((a, b), m)| a * b * m).sum()
    }

    /// `‖f‖²_Q = Q(f) + ‖f‖²_μ`.
    pub fn form_norm_sq(&self, f: &[f64]) -> f64 {
        self.energy(f) + self.inner(f, f)
    }

    /// `A` is diagonally dominant with nonnegative diagonal, hence `Q ≥ 0`.
    fn obviously_nonnegative(&self) -> bool {
        (0..self.len()).all(|r| {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (c, v) in self.matrix.row(r) {
                if c == r {
                    diag += v;
                } else {
                    off += v.abs();
                }
            }
            diag >= off
        })
    }

    /// Bottom of the spectrum of `L = D⁻¹ A`.
    pub fn lambda0(&self) -> Result<f64> {
        if let Some(&v) = self.lambda0.get() {
            return Ok(v);
        }
        let mu = &self.mu;
        let sym = self.matrix.map(|r, c, v| v / (mu[r] * mu[c]).sqrt());
        let v = smallest_eigenvalue(&sym, LAMBDA0_TOL)?;
        Ok(*self.lambda0.get_or_init(|| v))
    }

    fn check_alpha(&self, alpha: f64) -> Result<()> {
        if alpha > ALPHA_MARGIN && self.obviously_nonnegative() {
            return Ok(());
        }
        let bound = -self.lambda0()? + ALPHA_MARGIN;
        if !(alpha > bound) {
            return Err(Error::AlphaTooSmall { alpha, bound });
        }
        Ok(())
    }

    /// Factorised `(L + α)⁻¹`.
    pub fn resolvent_solver(&self, alpha: f64) -> Result<Resolvent> {
        self.check_alpha(alpha)?;
        let shift: Vec<f64> = self.mu.iter().map(|m| alpha * m).collect();
        let system = self.matrix.add_diagonal(&shift);
        Ok(Resolvent {
            alpha,
            solver: SpdSolver::new(system.clone())?,
            system,
            mu: self.mu.clone(),
        })
    }

    /// `G_α f = (L + α)⁻¹ f`.
    pub fn resolvent(&self, alpha: f64, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), f.len())?;
        self.resolvent_solver(alpha)?.apply(f)
    }

    /// `q^(α)(f) = α ⟨f - α G_α f, f⟩_μ`.
    pub fn approximating_form(&self, alpha: f64, f: &[f64]) -> Result<f64> {
        let g = self.resolvent(alpha, f)?;
        let diff: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - alpha * b).collect();
        Ok(alpha * self.inner(&diff, f))
    }

    /// Full ascending spectrum of `L`.
    pub fn spectrum(&self) -> Vec<f64> {
        let mu = &self.mu;
        hermitian_eigenvalues(self.matrix.map(|r, c, v| v / (mu[r] * mu[c]).sqrt()).to_dense())
    }
}

/// `(L + α)⁻¹` for one `α`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct Resolvent {
    pub alpha: f64,
    solver: SpdSolver,
    system: CsrMatrix<f64>,
    mu: Vec<f64>,
}

impl Resolvent {
    /// Solves `(A + αD) g = D f`; the relative residual must stay below 1e-10.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = f.iter().zip(&self.mu).map(|(a, m)| a * m).collect();
        let g = self.solver.solve(&rhs)?;
        let r = self.system.mul_vec(&g);
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = r.iter().zip(&rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if err > 1e-10 * scale.max(f64::MIN_POSITIVE) && err > 0.0 {
            return Err(Error::SolveFailure(alloc::format!("resolvent residual {err:e}")));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeurlingDenyReport {
    pub alphas: Vec<f64>,
    pub trials: usize,
    /// Largest `-(G_α f)(x)` over `f ≥ 0` (0 if none negative).
    pub positivity_violation: f64,
    /// Largest `(α G_α f)(x) - 1` over `0 ≤ f ≤ 1` (0 if none).
    pub markov_violation: f64,
    pub positivity_preserving: bool,
    pub markovian: bool,
}

/// Default `α` values for the Beurling–Deny check.
pub const BD_ALPHAS: [f64; 3] = [0.1, 1.0, 10.0];

/// Positivity preservation and Markov property of the resolvent, tested on
/// unit vectors, constants and `trials` random functions per `α`.
pub fn beurling_deny_check(form: &FiniteForm, trials: usize, seed: u64) -> Result<BeurlingDenyReport> {
    let mut r = crate::random::rng(seed);
    let n = form.len();
    let lambda_shift = if form.obviously_nonnegative() { 0.0 } else { (-form.lambda0()?).max(0.0) };
    let alphas: Vec<f64> = BD_ALPHAS.iter().map(|a| a + lambda_shift).collect();
    let mut pos = 0.0f64;
    let mut markov = 0.0f64;
    for &alpha in &alphas {
        let g = form.resolvent_solver(alpha)?;
        let mut probes: Vec<Vec<f64>> = (0..n)
            .map(|x| {
                let mut e = vec![0.0; n];
                e[x] = 1.0;
                e
            })
            .collect();
        probes.push(vec![1.0; n]);
        for _ in 0..trials {
            probes.push(
                (0..n)
                    .map(|_| if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..=1.0) })
                    .collect(),
            );
        }
        for f in &probes {
            let out = g.apply(f)?;
            for v in out {
                pos = pos.max(-v);
                markov = markov.max(alpha * v - 1.0);
            }
        }
    }
    Ok(BeurlingDenyReport {
        alphas,
        trials,
        positivity_violation: pos,
        markov_violation: markov,
        positivity_preserving: pos <= CHECK_TOL,
        markovian: markov <= CHECK_TOL,
    })
}

/// Default `β` values for 1-excessive certificates.
pub const EXCESSIVE_BETAS: [f64; 7] = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3];

#[derive(Debug, Clone, PartialEq)]
pub struct ExcessiveCertificate {
    /// `h` on the form's subset.
    pub h: Vec<f64>,
    pub tested_betas: Vec<f64>,
    /// `max_{β, x} (β G_{β+1} h - h)(x)`.
    pub max_violation: f64,
}

impl ExcessiveCertificate {
    pub fn is_valid(&self) -> bool {
        self.max_violation <= CHECK_TOL
    }
}

/// Tests `β (L + β + 1)⁻¹ h ≤ h` for each `β`; `h` lives on the form's subset.
pub fn excessive_check(form: &FiniteForm, h: &[f64], betas: &[f64]) -> Result<ExcessiveCertificate> {
    check_len(form.len(), h.len())?;
    if let Some(i) = h.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeH(form.subset[i].to_string()));
    }
    if betas.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::BadParameter("betas must be positive".into()));
    }
    let scale = h.iter().fold(1.0f64, |m, v| m.max(*v));
    let mut worst = f64::NEG_INFINITY;
    for &beta in betas {
        let g = form.resolvent(beta + 1.0, h)?;
        for (a, b) in g.iter().zip(h) {
            worst = worst.max(beta * a - b);
        }
    }
    Ok(ExcessiveCertificate {
        h: h.to_vec(),
        tested_betas: betas.to_vec(),
        max_violation: worst.max(0.0) / scale,
    })
}

/// `h = G_1 g` scaled to maximum 1, which is 1-excessive whenever the
/// resolvent is positivity preserving.
pub fn auto_excessive(form: &FiniteForm, g: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = g.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeFunction(form.subset[i].to_string()));
    }
    let h = form.resolvent(1.0, g)?;
    let m = h.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(if m > 0.0 { h.into_iter().map(|v| v / m).collect() } else { h })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub value: f64,
    /// Equilibrium potential `h_U` on the form's subset.
    pub equilibrium: Vec<f64>,
    /// `max(-min h_U, max(h_U - h), max_U |h_U - h|)`.
    pub sandwich_defect: f64,
    pub sandwich_ok: bool,
}

fn split_target(form: &FiniteForm, target: &[usize]) -> Result<(Vec<bool>, Vec<usize>, Vec<usize>)> {
    let mut in_target = vec![false; form.len()];
    for &x in target {
        let i = form
            .local(x)
            .ok_or_else(|| Error::BadParameter(alloc::format!("target vertex {x} outside the form domain")))?;
        in_target[i] = true;
    }
    let fixed = (0..form.len()).filter(|&i| in_target[i]).collect();
    let free = (0..form.len()).filter(|&i| !in_target[i]).collect();
    Ok((in_target, fixed, free))
}

/// `A + D`, the matrix of `‖·‖²_Q`.
fn norm_matrix(form: &FiniteForm) -> CsrMatrix<f64> {
    form.matrix.add_diagonal(&form.mu)
}

fn require_valid(cert: &ExcessiveCertificate, form: &FiniteForm) -> Result<()> {
    check_len(form.len(), cert.h.len())?;
    if !cert.is_valid() {
        return Err(Error::NotExcessive(cert.max_violation));
    }
    Ok(())
}

/// `cap_h(U) = inf {‖f‖²_Q : f ≥ 1_U h}`, computed by fixing `f = h` on `U`
/// and minimising over the remaining values. `target` holds host indices.
pub fn capacity(form: &FiniteForm, cert: &ExcessiveCertificate, target: &[usize]) -> Result<CapacityResult> {
    require_valid(cert, form)?;
    let h = &cert.h;
    let (in_target, fixed, free) = split_target(form, target)?;
    let b = norm_matrix(form);
    let mut f = vec![0.0; form.len()];
    if !fixed.is_empty() {
        for &i in &fixed {
            f[i] = h[i];
        }
        if !free.is_empty() {
            // B_FF f_F = -B_FU h_U
            let mut rhs = vec![0.0; free.len()];
            for (k, &i) in free.iter().enumerate() {
                rhs[k] = -b.row(i).filter(|(c, _)| in_target[*c]).map(|(c, v)| v * h[c]).sum::<f64>();
            }
            let sol = SpdSolver::new(b.principal(&free))?.solve(&rhs)?;
            for (k, &i) in free.iter().enumerate() {
                f[i] = sol[k];
            }
        }
    }
    let value = b.mul_vec(&f).iter().zip(&f).map(|(a, c)| a * c).sum::<f64>();
    let mut defect = 0.0f64;
    for i in 0..form.len() {
        defect = defect.max(-f[i]).max(f[i] - h[i]);
        if in_target[i] {
            defect = defect.max((f[i] - h[i]).abs());
        }
    }
    Ok(CapacityResult {
        value,
        equilibrium: f,
        sandwich_defect: defect,
        sandwich_ok: defect <= CHECK_TOL,
    })
}

/// `inf {‖h - f‖²_Q : f = 0 on U}` via the projection onto functions
/// vanishing on `U`; equals [`capacity`] by the paper's lemma.
pub fn capacity_alt(form: &FiniteForm, cert: &ExcessiveCertificate, target: &[usize]) -> Result<f64> {
    require_valid(cert, form)?;
    let h = &cert.h;
    let (_, _, free) = split_target(form, target)?;
    let b = norm_matrix(form);
    let bh = b.mul_vec(h);
    let total: f64 = bh.iter().zip(h).map(|(a, c)| a * c).sum();
    if free.is_empty() {
        return Ok(total);
    }
    // B_FF f_F = (B h)_F, value = hᵀBh - f_F · (Bh)_F
    let rhs: Vec<f64> = free.iter().map(|&i| bh[i]).collect();
    let sol = SpdSolver::new(b.principal(&free))?.solve(&rhs)?;
    let proj: f64 = sol.iter().zip(&rhs).map(|(a, c)| a * c).sum();
    Ok((total - proj).max(0.0))
}

/// Largest form domain accepted by [`capacity_obstacle_oracle`].
pub const ORACLE_MAX_VARIABLES: usize = 12;

/// Minimises `‖f‖²_Q` subject to `f ≥ 1_U h` (including `f ≥ 0` off `U`) by
/// projected gradient descent. Only for forms with at most
/// [`ORACLE_MAX_VARIABLES`] unknowns.
pub fn capacity_obstacle_oracle(form: &FiniteForm, h: &[f64], target: &[usize]) -> Result<f64> {
    check_len(form.len(), h.len())?;
    if form.len() > ORACLE_MAX_VARIABLES {
        return Err(Error::BadParameter("oracle is limited to 12 unknowns".into()));
    }
    let (in_target, _, _) = split_target(form, target)?;
    let lower: Vec<f64> = (0..form.len()).map(|i| if in_target[i] { h[i] } else { 0.0 }).collect();
    let b = norm_matrix(form);
    let top = *hermitian_eigenvalues(b.to_dense()).last().unwrap_or(&1.0);
    let step = 1.0 / top;
    let mut f = lower.clone();
    for _ in 0..2_000_000 {
        let grad = b.mul_vec(&f);
        let mut moved = 0.0f64;
        for i in 0..f.len() {
            let next = (f[i] - step * grad[i]).max(lower[i]);
            moved = moved.max((next - f[i]).abs());
            f[i] = next;
        }
        if moved < 1e-15 {
            break;
        }
    }
    Ok(b.mul_vec(&f).iter().zip(&f).map(|(a, c)| a * c).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCapacity {
    /// `cap_h(X \ K_n)` for each set of the exhaustion.
    pub values: Vec<f64>,
    pub nonincreasing: bool,
    pub certificate: ExcessiveCertificate,
}

/// Capacities of the complements of an exhaustion, for `h` on the whole host.
pub fn boundary_capacity(mg: &MeasuredGraph, h: &[f64], ex: &Exhaustion) -> Result<BoundaryCapacity> {
    let form = FiniteForm::full(mg)?;
    let cert = excessive_check(&form, h, &EXCESSIVE_BETAS)?;
    require_valid(&cert, &form)?;
    let mut values = Vec::with_capacity(ex.sets().len());
    for k in ex.sets() {
        let mut inside = vec![false; mg.len()];
        k.iter().for_each(|&x| inside[x] = true);
        let complement: Vec<usize> = (0..mg.len()).filter(|&x| !inside[x]).collect();
        values.push(capacity(&form, &cert, &complement)?.value);
    }
    let scale = values.first().copied().unwrap_or(0.0).abs().max(1.0);
    let nonincreasing = values.windows(2).all(|w| w[1] <= w[0] + 1e-10 * scale);
    Ok(BoundaryCapacity {
        values,
        nonincreasing,
        certificate: cert,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceProbe {
    pub levels: Vec<f64>,
    /// `Q_0(1 - e_n)` per level.
    pub energies: Vec<f64>,
    pub f_max: f64,
    /// Energies are nonincreasing in the level.
    pub monotone: bool,
}

/// Energies of `1 - e_n` for the cutoffs `e_n = (n + 1 - f)_+ ∧ 1`.
pub fn recurrence_probe(mg: &MeasuredGraph, f: &[f64], levels: &[f64]) -> Result<RecurrenceProbe> {
    check_len(mg.len(), f.len())?;
    if !mg.has_zero_potential() {
        return Err(Error::NonZeroPotential);
    }
    if let Some(x) = f.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeF(mg.graph.id(x).to_string()));
    }
    let energies: Vec<f64> = levels
        .iter()
        .map(|&n| {
            let one_minus_e: Vec<f64> = f.iter().map(|&v| 1.0 - (n + 1.0 - v).clamp(0.0, 1.0)).collect();
            mg.graph.dirichlet_energy(&one_minus_e)
        })
        .collect();
    let monotone = energies.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(RecurrenceProbe {
        levels: levels.to_vec(),
        energies,
        f_max: f.iter().fold(0.0, |m: f64, v| m.max(*v)),
        monotone,
    })
}

/// Partial sums `S_1..S_N` of
/// `Σ_n μ(x_n) Π_{j<n} (1 + μ(x_j)(w_min(x_j) - α)/deg(x_j))²` along `path = (x_0, x_1, …)`.
pub fn measure_criterion_partial_sums(
    mg: &MeasuredGraph,
    w_min: &[f64],
    alpha: f64,
    path: &Path,
    n: usize,
) -> Result<Vec<f64>> {
    check_len(mg.len(), w_min.len())?;
    if path.len() < n + 1 {
        return Err(Error::InvalidPath(alloc::format!(
            "need {} vertices, path has {}",
            n + 1,
            path.len()
        )));
    }
    if !mg.graph.is_path(path) {
        return Err(Error::InvalidPath("consecutive vertices are not adjacent".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut product = 1.0;
    let mut sum = 0.0;
    for m in 1..=n {
        let xj = path.0[m - 1];
        let deg = mg.graph.degree_at(xj);
        if !(deg > 0.0) {
            return Err(Error::ZeroDegree(mg.graph.id(xj).to_string()));
        }
        let factor = 1.0 + mg.mu()[xj] * (w_min[xj] - alpha) / deg;
        product *= factor * factor;
        sum += mg.mu()[path.0[m]] * product;
        out.push(sum);
    }
    Ok(out)
}

/// `(Q⁰_U(f), Q^(N)_U(f))` for a host function supported in `U`.
pub fn form_comparison(mg: &MeasuredGraph, subset: &[usize], f: &[f64]) -> Result<(f64, f64)> {
    check_len(mg.len(), f.len())?;
    let neumann = FiniteForm::neumann(mg, subset)?;
    if let Some(x) = (0..mg.len()).find(|&x| neumann.local(x).is_none() && f[x] != 0.0) {
        return Err(Error::SupportViolation(mg.graph.id(x).to_string()));
    }
    let dirichlet = FiniteForm::dirichlet(mg, subset)?;
    let local = neumann.restrict(f);
    Ok((dirichlet.energy(&local), neumann.energy(&local)))
}
