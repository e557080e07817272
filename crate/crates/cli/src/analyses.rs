//! The named analyses. Each fills a [`Report`]; results recorded before an
//! error are kept and written alongside it.

use std::path::Path;

use graphlap_core::bundle::{random_bundle, scalar_to_bundle, validate_connection, HermitianBundle, ScalarField};
use graphlap_core::families::f_alpha;
use graphlap_core::form::{
    auto_excessive, boundary_capacity, capacity, capacity_alt, capacity_obstacle_oracle, excessive_check,
    measure_criterion_partial_sums, recurrence_probe, FiniteForm, FormMode, EXCESSIVE_BETAS,
    ORACLE_MAX_VARIABLES,
};
use graphlap_core::linalg::{hermitian_eigenvalues, hermitian_eigh, DENSE_EIGEN_LIMIT};
use graphlap_core::metric::{
    boundary_distance, embedding_metric, intrinsic_slack, metric_criterion_slack, path_metric,
    strongly_intrinsic_slack, BoundarySpec,
};
use graphlap_core::operator::{
    apply_m, assemble, boundedness_report, ground_state_inequality, greens_residual, heart_residual, kato_gap,
    scalar_energy, subsolution_excess, symmetrized_scalar,
};
use graphlap_core::random::{aligned_section, random_measured_graph, random_real, random_section, rng};
use graphlap_core::{Error, Exhaustion, MeasuredGraph, Path as VertexPath};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Analysis, Params};
use crate::error::{CliError, CliResult};
use crate::io::{load_bundle, load_graph, load_metric, load_vertex_function, num, LoadedMetric, Table};
use crate::report::Report;

pub const GREEN_TOL: f64 = 1e-10;
pub const KATO_TOL: f64 = 1e-9;
pub const HEART_TOL: f64 = 1e-10;
pub const SUBSOLUTION_TOL: f64 = 1e-8;
pub const ROUTE_TOL: f64 = 1e-8;
pub const SANDWICH_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-6;
pub const SLACK_TOL: f64 = 1e-12;
/// Criterion (♣) counts as converging when the second half of the partial
/// sums adds at most this much.
pub const TAIL_TOL: f64 = 1e-3;
/// Largest operator handled by dense eigenpairs in the subsolution check.
const SUBSOLUTION_DENSE_LIMIT: usize = 400;

#[derive(Default)]
pub struct Inputs {
    pub mg: Option<MeasuredGraph>,
    pub bundle: Option<HermitianBundle>,
    pub metric: Option<LoadedMetric>,
    pub boundary: Option<Vec<f64>>,
}

pub fn load_inputs(
    graph: Option<&Path>,
    bundle: Option<&Path>,
    metric: Option<&Path>,
    boundary: Option<&Path>,
    report: &mut Report,
) -> CliResult<Inputs> {
    let mut inputs = Inputs::default();
    let Some(gpath) = graph else {
        if bundle.is_some() || metric.is_some() || boundary.is_some() {
            return Err(CliError::Config("bundle, metric and boundary files require --graph".into()));
        }
        return Ok(inputs);
    };
    let mg = load_graph(gpath)?;
    let (_, components) = mg.graph.components();
    report.input(
        "graph",
        json!({
            "path": gpath.display().to_string(),
            "vertices": mg.len(),
            "edges": mg.graph.edges().len(),
            "components": components,
            "total_weight": num(mg.graph.total_weight()),
            "section_boundary": mg.graph.section_boundary().len(),
        }),
    );
    if let Some(bpath) = bundle {
        let b = load_bundle(bpath, &mg.graph)?;
        report.input(
            "bundle",
            json!({
                "path": bpath.display().to_string(),
                "total_dim": b.total_dim(),
                "max_fiber_dim": b.dims().iter().copied().max().unwrap_or(0),
                "scalar": b.is_scalar(),
            }),
        );
        inputs.bundle = Some(b);
    }
    if let Some(mpath) = metric {
        let m = load_metric(mpath, &mg)?;
        let kind = match &m {
            LoadedMetric::Path { .. } => "path",
            LoadedMetric::Embedding { .. } => "embedding",
        };
        report.input("metric", json!({ "path": mpath.display().to_string(), "kind": kind }));
        inputs.metric = Some(m);
    }
    if let Some(dpath) = boundary {
        inputs.boundary = Some(load_vertex_function(dpath, &mg.graph)?);
        report.input("boundary", json!({ "path": dpath.display().to_string() }));
    }
    inputs.mg = Some(mg);
    Ok(inputs)
}

pub fn run_analysis(
    analysis: Analysis,
    inputs: &Inputs,
    params: &Params,
    seed: u64,
    report: &mut Report,
) -> CliResult<()> {
    match analysis {
        Analysis::Validate => validate(inputs, report),
        Analysis::Assemble => assemble_matrix(inputs, params, report),
        Analysis::Spectrum => spectrum(inputs, params, report),
        Analysis::GreenKato => green_kato(inputs, params, seed, report),
        Analysis::Bounded => bounded(inputs, params, seed, report),
        Analysis::CriterionMeasure => criterion_measure(inputs, params, report),
        Analysis::CriterionMetric => criterion_metric(inputs, params, report),
        Analysis::Capacity => capacity_analysis(inputs, params, report),
        Analysis::BoundaryCapacity => boundary_capacity_analysis(inputs, params, report),
        Analysis::Recurrence => recurrence(inputs, params, report),
        Analysis::Example => Err(CliError::Config("`example` is handled by the runner".into())),
    }
}

fn graph(inputs: &Inputs) -> CliResult<&MeasuredGraph> {
    inputs
        .mg
        .as_ref()
        .ok_or_else(|| CliError::Config("this analysis requires --graph".into()))
}

/// The bundle file, or the scalar bundle with `θ ≡ 0` and `W = V`.
fn bundle_or_scalar(inputs: &Inputs, mg: &MeasuredGraph) -> CliResult<HermitianBundle> {
    match &inputs.bundle {
        Some(b) => Ok(b.clone()),
        None => Ok(scalar_to_bundle(&mg.graph, &ScalarField::zero(&mg.graph), mg.potential())?),
    }
}

fn w_min(inputs: &Inputs, mg: &MeasuredGraph) -> CliResult<Vec<f64>> {
    match &inputs.bundle {
        Some(b) => Ok(b.w_min()?),
        None => Ok(mg.potential().to_vec()),
    }
}

fn id_list(mg: &MeasuredGraph, text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Ok(mg.graph.index_of(s)?))
        .collect()
}

fn ids_of(mg: &MeasuredGraph, idx: &[usize]) -> String {
    idx.iter().map(|&x| mg.graph.id(x)).collect::<Vec<_>>().join(",")
}

fn fold_max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn fold_min(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

fn validate(inputs: &Inputs, report: &mut Report) -> CliResult<()> {
    let mg = graph(inputs)?;
    let mut table = Table::new("violations.csv", &["kind", "u", "v", "vertex", "defect"]);
    let mut violations = Vec::new();
    if let Some(bundle) = &inputs.bundle {
        for v in validate_connection(&mg.graph, bundle) {
            let (u, w) = v.edge.clone().unwrap_or_default();
            let vertex = v.vertex.clone().unwrap_or_default();
            violations.push(json!({
                "kind": v.kind.name(),
                "edge": v.edge.as_ref().map(|(a, b)| vec![a.clone(), b.clone()]),
                "vertex": v.vertex,
                "defect": num(v.defect),
            }));
            table.push(vec![v.kind.name().into(), u.into(), w.into(), vertex.into(), v.defect.into()]);
        }
    }
    let mut metric_ok = true;
    if let Some(metric) = &inputs.metric {
        match metric {
            LoadedMetric::Path { sigma, .. } => {
                let (rho, disconnected) = path_metric(&mg.graph, sigma)?;
                let axiom = rho.axiom_violation();
                report.residual("metric_axiom_violation", axiom);
                metric_ok = axiom <= SLACK_TOL;
                if disconnected {
                    report.warn("graph is disconnected: some path distances are infinite");
                }
            }
            LoadedMetric::Embedding { iota, .. } => match embedding_metric(&mg.graph, iota.clone()) {
                Ok(em) => {
                    if !em.collisions.is_empty() {
                        report.warn(format!(
                            "embedding is not injective: {} coinciding pairs, d_iota is only a pseudo metric",
                            em.collisions.len()
                        ));
                    }
                }
                Err(Error::MissingCoordinate(id)) => {
                    metric_ok = false;
                    violations.push(json!({ "kind": "MissingCoordinate", "vertex": id, "edge": null, "defect": 0.0 }));
                    table.push(vec!["MissingCoordinate".into(), "".into(), "".into(), id.into(), 0.0.into()]);
                }
                Err(e) => return Err(e.into()),
            },
        }
    }
    let count = violations.len();
    report.result("violations", Value::Array(violations));
    report.result("connected", mg.graph.is_connected());
    report.verdict("bundle_valid", inputs.bundle.is_none() || count == 0);
    report.verdict("metric_valid", metric_ok);
    report.table(table);
    if count > 0 {
        return Err(Error::ValidationFailure(format!("{count} violation(s)")).into());
    }
    if !metric_ok {
        return Err(Error::ValidationFailure("metric axioms violated".into()).into());
    }
    Ok(())
}

fn assembled(inputs: &Inputs, params: &Params) -> CliResult<(graphlap_core::operator::AssembledOperator, bool)> {
    let mg = graph(inputs)?;
    let flip = params.bool("flip", false)?;
    let mut bundle = bundle_or_scalar(inputs, mg)?;
    if flip {
        bundle = bundle.negated_connection();
    }
    Ok((assemble(mg, &bundle)?, flip))
}

fn assemble_matrix(inputs: &Inputs, params: &Params, report: &mut Report) -> CliResult<()> {
    let mg = graph(inputs)?;
    let (op, flip) = assembled(inputs, params)?;
    let defect = op.weighted_self_adjoint_defect();
    let scale = op.action.map(|_, _, v| v).to_dense().iter().fold(1.0f64, |m, v| m.max(v.norm()));
    report.residual("weighted_self_adjoint_defect", defect);
    report.verdict("self_adjoint", defect <= 1e-10 * scale);
    report.result("dim", op.dim());
    report.result("nnz", op.action.nnz());
    report.result("flipped_connection", flip);
    let mut table = Table::new(
        "operator.csv",
        &["row", "col", "row_vertex", "row_fiber", "col_vertex", "col_fiber", "re", "im"],
    );
    for r in 0..op.dim() {
        for (c, v) in op.action.row(r) {
            let (rx, rf) = op.index[r];
            let (cx, cf) = op.index[c];
            table.push(vec![
                r.into(),
                c.into(),
                mg.graph.id(rx).into(),
                rf.into(),
                mg.graph.id(cx).into(),
                cf.into(),
                v.re.into(),
                v.im.into(),
            ]);
        }
    }
    report.table(table);
    Ok(())
}

fn spectrum(inputs: &Inputs, params: &Params, report: &mut Report) -> CliResult<()> {
    let (op, flip) = assembled(inputs, params)?;
    let extremes_only = params.bool("extremes", false)? || op.dim() >= DENSE_EIGEN_LIMIT;
    report.residual("weighted_self_adjoint_defect", op.weighted_self_adjoint_defect());
    report.result("dim", op.dim());
    report.result("flipped_connection", flip);
    if extremes_only {
        let (lo, hi) = op.extreme_eigenvalues()?;
        report.spectrum("method", "lanczos-extremes");
        report.spectrum("min", num(lo));
        report.spectrum("max", num(hi));
        report.spectrum("lambda0", num(lo));
    } else {
        let ev = op.spectrum();
        report.spectrum("method", "dense");
        report.spectrum("count", ev.len());
        report.spectrum("min", num(ev[0]));
        report.spectrum("max", num(ev[ev.len() - 1]));
        report.spectrum("lambda0", num(ev[0]));
        let mut table = Table::new("spectrum.csv", &["index", "eigenvalue"]);
        for (i, &e) in ev.iter().enumerate() {
            table.push(vec![i.into(), e.into()]);
        }
        report.table(table);
    }
    Ok(())
}

struct TrialRow {
    vertices: usize,
    dim: usize,
    green_form: f64,
    green_symmetry: f64,
    kato_gap: f64,
    heart: f64,
    subsolution: f64,
    ground_state: f64,
}

/// Independent per-trial stream derived from the run seed.
fn trial_seed(seed: u64, t: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64)
}

fn green_kato_trial(
    inputs: &Inputs,
    seed: u64,
    t: usize,
    max_vertices: usize,
    max_dim: usize,
) -> CliResult<TrialRow> {
    let s = trial_seed(seed, t);
    let mg = match &inputs.mg {
        Some(mg) => mg.clone(),
        None => random_measured_graph(s, max_vertices)?,
    };
    let dim = 1 + (s % max_dim as u64) as usize;
    let bundle = match &inputs.bundle {
        Some(b) => b.clone(),
        None => random_bundle(&mg.graph, dim, s)?,
    };
    let mut r = rng(s ^ 0xC0FF_EE00);
    let phi = random_section(&bundle, &mut r);
    let f = random_section(&bundle, &mut r);

    let green = greens_residual(&mg, &bundle, &phi, &f)?;
    let (mf, mphi) = (apply_m(&mg, &bundle, &f)?, apply_m(&mg, &bundle, &phi)?);
    let (a, b, c, d) = (phi.abs(), mf.abs(), mphi.abs(), f.abs());
    let scale = 1.0 + (0..mg.len()).map(|x| (a[x] * b[x] + c[x] * d[x]) * mg.mu()[x]).sum::<f64>();

    let aligned = aligned_section(&f, &mut r);
    let kato = kato_gap(&mg, &bundle, &f, &aligned)?;
    let heart = heart_residual(&mg, &bundle, &phi)?;

    let op = assemble(&mg, &bundle)?;
    let subsolution = if op.dim() <= SUBSOLUTION_DENSE_LIMIT {
        let mut worst = f64::NEG_INFINITY;
        for (lambda, u) in op.eigenpairs() {
            worst = worst.max(fold_max(subsolution_excess(&mg, &bundle, &u, lambda)?));
        }
        worst
    } else {
        f64::NAN
    };

    // ground state of the scalar operator H_{μ,V}, taken positive
    let (values, vectors) = hermitian_eigh(symmetrized_scalar(&mg, mg.potential()).to_dense());
    let lambda = values[0];
    let ground: Vec<f64> = (0..mg.len()).map(|x| vectors[(x, 0)].abs() / mg.mu()[x].sqrt()).collect();
    let test = random_real(mg.len(), &mut r);
    let gap = ground_state_inequality(&mg, &ground, lambda, &test)?;
    let product: Vec<f64> = ground.iter().zip(&test).map(|(g, t)| g * t).collect();
    let gs_scale = 1.0 + scalar_energy(&mg, &product).abs() + lambda.abs() * mg.norm_sq(&product);

    Ok(TrialRow {
        vertices: mg.len(),
        dim: bundle.dims().iter().copied().max().unwrap_or(1),
        green_form: green.form_gap / scale,
        green_symmetry: green.symmetry_gap / scale,
        kato_gap: kato,
        heart,
        subsolution,
        ground_state: gap / gs_scale,
    })
}

fn green_kato(inputs: &Inputs, params: &Params, seed: u64, report: &mut Report) -> CliResult<()> {
    let trials = params.usize("trials", 100)?;
    let max_vertices = params.usize("max_vertices", 50)?;
    let max_dim = params.usize("max_dim", 3)?;
    if trials == 0 || max_vertices < 2 || max_dim == 0 {
        return Err(CliError::Config("need trials ≥ 1, max_vertices ≥ 2, max_dim ≥ 1".into()));
    }
    let rows: Vec<CliResult<TrialRow>> = (0..trials)
        .into_par_iter()
        .map(|t| green_kato_trial(inputs, seed, t, max_vertices, max_dim))
        .collect();
    let rows: Vec<TrialRow> = rows.into_iter().collect::<CliResult<_>>()?;

    let mut table = Table::new(
        "green_kato.csv",
        &[
            "trial",
            "vertices",
            "dim",
            "green_form_residual",
            "green_symmetry_residual",
            "kato_gap",
            "heart_residual",
            "subsolution_excess",
            "ground_state_gap",
        ],
    );
    for (t, row) in rows.iter().enumerate() {
        table.push(vec![
            t.into(),
            row.vertices.into(),
            row.dim.into(),
            row.green_form.into(),
            row.green_symmetry.into(),
            row.kato_gap.into(),
            row.heart.into(),
            row.subsolution.into(),
            row.ground_state.into(),
        ]);
    }
    let green = fold_max(rows.iter().map(|r| r.green_form.max(r.green_symmetry)));
    let kato = fold_min(rows.iter().map(|r| r.kato_gap));
    let heart = fold_max(rows.iter().map(|r| r.heart));
    let checked: Vec<f64> = rows.iter().map(|r| r.subsolution).filter(|v| !v.is_nan()).collect();
    let subsolution = checked.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ground = fold_min(rows.iter().map(|r| r.ground_state));
    if checked.len() < rows.len() {
        report.warn(format!(
            "subsolution check skipped on {} trial(s) above {SUBSOLUTION_DENSE_LIMIT} rows",
            rows.len() - checked.len()
        ));
    }
    report.result("trials", trials);
    report.residual("green_max", green);
    report.residual("kato_gap_min", kato);
    report.residual("heart_max", heart);
    report.residual("subsolution_excess_max", subsolution);
    report.residual("ground_state_gap_min", ground);
    report.verdict("green", green <= GREEN_TOL);
    report.verdict("kato", kato >= -KATO_TOL);
    report.verdict("heart", heart <= HEART_TOL);
    report.verdict("subsolution", checked.is_empty() || subsolution <= SUBSOLUTION_TOL);
    report.verdict("ground_state", ground >= -KATO_TOL);
    report.table(table);
    Ok(())
}

/// `θ ≡ π`, `W = -Deg`: the bundle whose operator is the adjacency matrix.
fn is_adjacency_encoding(mg: &MeasuredGraph, bundle: &HermitianBundle) -> bool {
    bundle.is_scalar()
        && bundle.connections().values().all(|p| (p[(0, 0)].re + 1.0).abs() < 1e-12 && p[(0, 0)].im.abs() < 1e-12)
        && (0..mg.len()).all(|x| {
            let w = bundle.endomorphism(x)[(0, 0)];
            (w.re + mg.normalized_degree(x)).abs() < 1e-12 && w.im.abs() < 1e-12
        })
}

fn bounded(inputs: &Inputs, params: &Params, seed: u64, report: &mut Report) -> CliResult<()> {
    let mg = graph(inputs)?;
    let bundle = bundle_or_scalar(inputs, mg)?;
    let probes = params.usize("probes", 10)?;
    let mut r = rng(seed);
    let sections: Vec<_> = (0..probes).map(|_| random_section(&bundle, &mut r)).collect();
    let rep = boundedness_report(mg, &bundle, &sections)?;
    report.result("b_max", num(rep.b_max));
    report.spectrum("plus_min", num(rep.plus.0));
    report.spectrum("plus_max", num(rep.plus.1));
    report.spectrum("minus_min", num(rep.minus.0));
    report.spectrum("minus_max", num(rep.minus.1));
    report.residual("heart_max", rep.heart_residual);
    report.verdict("heart", rep.heart_residual <= HEART_TOL);

    // M is block diagonal over components
    let op = assemble(mg, &bundle)?;
    let (label, count) = mg.graph.components();
    let adjacency = is_adjacency_encoding(mg, &bundle);
    let mut table = Table::new(
        "components.csv",
        &["component", "vertices", "edges", "complete", "lambda_min", "lambda_max", "paper_top"],
    );
    let mut blocks = Vec::new();
    let mut discrepancy = false;
    for comp in 0..count {
        let members: Vec<usize> = (0..mg.len()).filter(|&x| label[x] == comp).collect();
        let rows: Vec<usize> = (0..op.dim()).filter(|&i| label[op.index[i].0] == comp).collect();
        if rows.len() >= DENSE_EIGEN_LIMIT {
            report.warn(format!("component {comp} skipped: {} rows exceed the dense limit", rows.len()));
            continue;
        }
        let ev = hermitian_eigenvalues(op.symmetric.principal(&rows).to_dense());
        let n = members.len();
        let edges = mg
            .graph
            .edges()
            .iter()
            .filter(|e| label[e.u] == comp)
            .count();
        let complete = n >= 2 && edges == n * (n - 1) / 2;
        // the paper states the spectrum of K_n as {n, -1}
        let paper_top = (adjacency && complete).then_some(n as f64);
        if let Some(p) = paper_top {
            discrepancy |= (ev[ev.len() - 1] - p).abs() > 1e-9;
        }
        table.push(vec![
            comp.into(),
            n.into(),
            edges.into(),
            complete.into(),
            ev[0].into(),
            ev[ev.len() - 1].into(),
            paper_top.map_or(crate::io::Cell::S(String::new()), crate::io::Cell::F),
        ]);
        blocks.push(json!({
            "vertices": n,
            "complete": complete,
            "lambda_min": num(ev[0]),
            "lambda_max": num(ev[ev.len() - 1]),
        }));
    }
    report.result("components", Value::Array(blocks));
    report.result("adjacency_encoding", adjacency);
    if discrepancy {
        report.warn(
            "complete blocks K_n have top adjacency eigenvalue n-1; the paper states n (lower bound -1 agrees)",
        );
    }
    report.table(table);
    Ok(())
}

/// `"0", "1", "2", …` as long as consecutive integers are adjacent.
fn integer_ray(mg: &MeasuredGraph) -> CliResult<VertexPath> {
    let mut path = vec![mg
        .graph
        .index_of("0")
        .map_err(|_| CliError::param("path", "no vertex `0`; give path=id,id,…"))?];
    let mut k = 1u64;
    while let Ok(x) = mg.graph.index_of(&k.to_string()) {
        if !mg.graph.adjacent(path[path.len() - 1], x) {
            break;
        }
        path.push(x);
        k += 1;
    }
    Ok(VertexPath(path))
}

fn criterion_measure(inputs: &Inputs, params: &Params, report: &mut Report) -> CliResult<()> {
    let mg = graph(inputs)?;
    let shift = params.f64("shift", 0.0)?;
    let path = match params.get("path") {
        Some(text) => VertexPath(id_list(mg, text)?),
        None => integer_ray(mg)?,
    };
    if path.len() < 2 {
        return Err(CliError::param("path", "needs at least two vertices"));
    }
    let n = params.usize("N", path.len() - 1)?;
    let w = w_min(inputs, mg)?;
    let sums = measure_criterion_partial_sums(mg, &w, shift, &path, n)?;
    let mut table = Table::new("partial_sums.csv", &["n", "vertex", "S_n", "increment"]);
    let mut prev = 0.0;
    for (i, &s) in sums.iter().enumerate() {
        table.push(vec![(i + 1).into(), mg.graph.id(path.0[i + 1]).into(), s.into(), (s - prev).into()]);
        prev = s;
    }
    let last = sums[n - 1];
    let half = if n >= 2 { sums[n / 2 - 1] } else { 0.0 };
    report.result("N", n);
    report.result("shift", num(shift));
    report.result("S_N", num(last));
    report.result("S_half", num(half));
    report.result("tail", num(last - half));
    report.result("last_increment", num(last - if n >= 2 { sums[n - 2] } else { 0.0 }));
    report.verdict("converging", last - half <= TAIL_TOL);
    report.table(table);
    Ok(())
}

fn v_ref(params: &Params, mg: &MeasuredGraph) -> CliResult<Vec<f64>> {
    match params.get("v_ref") {
        None => Ok(vec![0.0; mg.len()]),
        Some(text) => match text.parse::<f64>() {
            Ok(c) if c.is_finite() => Ok(vec![c; mg.len()]),
            Ok(_) => Err(CliError::param("v_ref", "must be finite")),
            Err(_) => load_vertex_function(Path::new(text), &mg.graph),
        },
    }
}

fn criterion_metric(inputs: &Inputs, params: &Params, report: &mut Report) -> CliResult<()> {
    let mg = graph(inputs)?;
    let metric = inputs
        .metric
        .as_ref()
        .ok_or_else(|| CliError::Config("criterion-metric requires --metric".into()))?;
    let w = w_min(inputs, mg)?;
    let vref = v_ref(params, mg)?;
    let n = mg.len();
    let (d, intrinsic, strong) = match metric {
        LoadedMetric::Embedding {
            iota,
            boundary_points,
            boundary_distance: table,
        } => {
            let em = embedding_metric(&mg.graph, iota.clone())?;
            if !em.collisions.is_empty() {
                report.warn("embedding is not injective; d_iota is a pseudo metric");
            }
            let spec = match inputs.boundary.clone().or_else(|| table.clone()) {
                Some(t) => BoundarySpec::Table(t),
                None => BoundarySpec::Points(boundary_points.clone()),
            };
            let d = boundary_distance(&mg.graph, &em.metric, &spec)?;
            let intrinsic: Vec<f64> = (0..n).map(|x| mg.mu()[x] - em.mu_iota[x]).collect();
            (d, intrinsic, None)
        }
        LoadedMetric::Path {
            sigma,
            boundary_distance: table,
        } => {
            let (rho, disconnected) = path_metric(&mg.graph, sigma)?;
            if disconnected {
                report.warn("graph is disconnected: some path distances are infinite");
            }
            let t = inputs
                .boundary
                .clone()
                .or_else(|| table.clone())
                .unwrap_or_else(|| vec![f64::INFINITY; n]);
            let d = boundary_distance(&mg.graph, &rho, &BoundarySpec::Table(t))?;
            let (intrinsic, skipped) = intrinsic_slack(mg, &rho);
            if skipped > 0 {
                report.warn(format!("{skipped} infinite-distance neighbour pair(s) skipped in the intrinsic check"));
            }
            (d, intrinsic, Some(strongly_intrinsic_slack(mg, sigma)))
        }
    };
    if !d.zeros.is_empty() {
        report.result(
            "boundary_zeros",
            d.zeros.iter().map(|&x| mg.graph.id(x).to_string()).collect::<Vec<_>>(),
        );
    }
    let slack = metric_criterion_slack(&mg.graph, &w, &d.distance, &vref)?;
    let mut table = Table::new(
        "metric_criterion.csv",
        &["vertex", "w_min", "D", "v_ref", "slack", "intrinsic_slack", "strongly_intrinsic_slack"],
    );
    for x in 0..n {
        table.push(vec![
            mg.graph.id(x).into(),
            w[x].into(),
            d.distance[x].into(),
            vref[x].into(),
            slack[x].into(),
            intrinsic[x].into(),
            strong.as_ref().map_or(crate::io::Cell::S(String::new()), |s| s[x].into()),
        ]);
    }
    let (argmin, min_slack) = slack
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, s)| if s < a.1 { (i, s) } else { a });
    report.result("min_slack", num(min_slack));
    report.result("argmin", mg.graph.id(argmin));
    report.result("min_intrinsic_slack", num(fold_min(intrinsic.iter().copied())));
    report.verdict("hypothesis_holds", min_slack >= -SLACK_TOL);
    report.verdict("intrinsic", fold_min(intrinsic.iter().copied()) >= -SLACK_TOL);
    if let Some(s) = &strong {
        let m = fold_min(s.iter().copied());
        report.result("min_strongly_intrinsic_slack", num(m));
        report.verdict("strongly_intrinsic", m >= -SLACK_TOL);
    }
    report.table(table);
    Ok(())
}

fn excessive_h(form: &FiniteForm, params: &Params) -> CliResult<Vec<f64>> {
    match params.get("h").unwrap_or("auto") {
        "one" => Ok(vec![1.0; form.len()]),
        _ => Ok(auto_excessive(form, &vec![1.0; form.len()])?),
    }
}

fn capacity_analysis(inputs: &Inputs, params: &Params, report: &mut Report) -> CliResult<()> {
    let mg = graph(inputs)?;
    let subset = match params.get("subset") {
        Some(text) => id_list(mg, text)?,
        None => (0..mg.len()).collect(),
    };
    let mode = match params.get("mode").unwrap_or("neumann") {
        "dirichlet" => FormMode::Dirichlet,
        _ => FormMode::Neumann,
    };
    let targets: Vec<Vec<usize>> = match params.get("targets") {
        Some(text) => text.split(';').map(|g| id_list(mg, g)).collect::<CliResult<_>>()?,
        None => vec![vec![subset[0]]],
    };
    let form = FiniteForm::new(mg, &subset, mode)?;
    let h = excessive_h(&form, params)?;
    let cert = excessive_check(&form, &h, &EXCESSIVE_BETAS)?;
    report.result("mode", mode.name());
    report.result("subset_size", form.len());
    report.residual("excessive_violation", cert.max_violation);
    report.verdict("h_excessive", cert.is_valid());

    let mut caps = Table::new(
        "capacity.csv",
        &["target", "vertices", "capacity", "capacity_alt", "oracle", "sandwich_defect"],
    );
    let mut eq = Table::new("equilibrium.csv", &["target", "vertex", "h", "equilibrium"]);
    let (mut route, mut oracle_gap, mut sandwich) = (0.0f64, 0.0f64, 0.0f64);
    let mut values = Vec::new();
    for (t, target) in targets.iter().enumerate() {
        let c = capacity(&form, &cert, target)?;
        let alt = capacity_alt(&form, &cert, target)?;
        let oracle = if form.len() <= ORACLE_MAX_VARIABLES {
            let o = capacity_obstacle_oracle(&form, &h, target)?;
            oracle_gap = oracle_gap.max((o - c.value).abs() / (1.0 + c.value.abs()));
            Some(o)
        } else {
            None
        };
        route = route.max((c.value - alt).abs() / (1.0 + c.value.abs()));
        sandwich = sandwich.max(c.sandwich_defect);
        caps.push(vec![
            t.into(),
            ids_of(mg, target).into(),
            c.value.into(),
            alt.into(),
            oracle.map_or(crate::io::Cell::S(String::new()), crate::io::Cell::F),
            c.sandwich_defect.into(),
        ]);
        for (i, &x) in form.subset().iter().enumerate() {
            eq.push(vec![t.into(), mg.graph.id(x).into(), h[i].into(), c.equilibrium[i].into()]);
        }
        values.push(json!({
            "vertices": ids_of(mg, target),
            "capacity": num(c.value),
            "capacity_alt": num(alt),
            "oracle": oracle.map(num),
        }));
    }
    report.result("capacities", Value::Array(values));
    report.residual("route_gap_max", route);
    report.residual("sandwich_defect_max", sandwich);
    report.verdict("routes_agree", route <= ROUTE_TOL);
    report.verdict("sandwich", sandwich <= SANDWICH_TOL);
    if form.len() <= ORACLE_MAX_VARIABLES {
        report.residual("oracle_gap_max", oracle_gap);
        report.verdict("oracle_agrees", oracle_gap <= ORACLE_TOL);
    }
    report.table(caps);
    report.table(eq);
    Ok(())
}

/// `"a..b"` (inclusive) or a comma list.
fn parse_radii(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::param("radii", format!("`{text}` is neither a..b nor a comma list"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn boundary_capacity_analysis(inputs: &Inputs, params: &Params, report: &mut Report) -> CliResult<()> {
    let mg = graph(inputs)?;
    let center = match params.get("center") {
        Some(id) => mg.graph.index_of(id)?,
        None => mg.graph.index_of("0").unwrap_or(0),
    };
    let radii = match params.get("radii") {
        Some(text) => parse_radii(text)?,
        None => {
            let ecc = mg.graph.bfs_distances(center).into_iter().flatten().max().unwrap_or(0);
            if ecc <= 1 { vec![0] } else { (1..ecc).collect() }
        }
    };
    let form = FiniteForm::full(mg)?;
    let h = excessive_h(&form, params)?;
    let ex = Exhaustion::bfs_balls(&mg.graph, center, &radii)?;
    let bc = boundary_capacity(mg, &h, &ex)?;
    let mut sorted = radii.clone();
    sorted.sort_unstable();
    let mut table = Table::new("boundary_capacity.csv", &["radius", "ball_size", "capacity"]);
    for ((r, set), c) in sorted.iter().zip(ex.sets()).zip(&bc.values) {
        table.push(vec![(*r).into(), set.len().into(), (*c).into()]);
    }
    let first = bc.values[0];
    let last = bc.values[bc.values.len() - 1];
    report.result("center", mg.graph.id(center));
    report.result("balls", bc.values.len());
    report.result("first", num(first));
    report.result("last", num(last));
    report.result("ratio", num(if first > 0.0 { last / first } else { f64::NAN }));
    report.residual("excessive_violation", bc.certificate.max_violation);
    report.verdict("nonincreasing", bc.nonincreasing);
    report.table(table);
    Ok(())
}

fn recurrence(inputs: &Inputs, params: &Params, report: &mut Report) -> CliResult<()> {
    let mg = graph(inputs)?;
    let f = match params.get("f").unwrap_or("f-alpha") {
        "f-alpha" => {
            let alpha = params.f64("f_alpha", 0.75)?;
            mg.graph
                .ids()
                .iter()
                .map(|id| {
                    id.parse::<i64>()
                        .map(|k| f_alpha(k, alpha, false))
                        .map_err(|_| CliError::param("f", format!("f-alpha needs integer vertex ids, found `{id}`")))
                })
                .collect::<CliResult<Vec<f64>>>()?
        }
        file => load_vertex_function(Path::new(file), &mg.graph)?,
    };
    let levels: Vec<f64> = (1..=params.usize("levels", 15)?).map(|l| l as f64).collect();
    if levels.is_empty() {
        return Err(CliError::param("levels", "must be positive"));
    }
    let probe = recurrence_probe(mg, &f, &levels)?;
    let mut table = Table::new("recurrence.csv", &["level", "energy"]);
    for (l, e) in probe.levels.iter().zip(&probe.energies) {
        table.push(vec![(*l).into(), (*e).into()]);
    }
    let first = probe.energies[0];
    let last = probe.energies[probe.energies.len() - 1];
    if levels[levels.len() - 1] + 1.0 > probe.f_max {
        report.warn("top level reaches max f: the cutoff is identically one there");
    }
    report.result("f_max", num(probe.f_max));
    report.result("first", num(first));
    report.result("last", num(last));
    report.result("ratio", num(if first > 0.0 { last / first } else { f64::NAN }));
    report.verdict("monotone", probe.monotone);
    report.table(table);
    Ok(())
}
