//! Input files for the standard example families.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use graphlap_core::bundle::{scalar_to_bundle, ScalarField};
use graphlap_core::families::{
    circle_packing_nerve, complete_union, hex_patch, iota_z, line_z, LineMeasure, LinePotential,
    DEFAULT_TANGENCY_TOL,
};
use graphlap_core::operator::hardy_weight_check;
use graphlap_core::{MeasuredGraph, WeightedGraph};
use serde_json::json;

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::io::{bundle_to_file, graph_to_file, num, vertex_function_json, write_json, MetricFile};
use crate::report::Report;

pub const NAMES: [&str; 5] = ["z-line", "z-line-nu", "complete-union", "circle-packing", "hardy-stub"];

pub const GRAPH_FILE: &str = "graph.json";
pub const BUNDLE_FILE: &str = "bundle.json";
pub const METRIC_FILE: &str = "metric.json";
pub const HARDY_FILE: &str = "hardy_weight.json";

fn line_measure(params: &Params, quartic_default: bool) -> CliResult<LineMeasure> {
    Ok(match params.get("alpha") {
        Some(_) => LineMeasure::NuAlpha(params.f64("alpha", 0.0)?),
        None if quartic_default => LineMeasure::NuQuartic,
        None => LineMeasure::Uniform,
    })
}

fn line_potential(params: &Params) -> LinePotential {
    match params.get("V") {
        Some("half-square") => LinePotential::HalfSquare,
        _ => LinePotential::Zero,
    }
}

/// `ι(k) = 2 - 1/k` with the single boundary point `2`.
fn line_embedding(mg: &MeasuredGraph, radius: usize) -> MetricFile {
    let iota = mg
        .graph
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), vec![iota_z(i as i64 - radius as i64)]))
        .collect();
    MetricFile::Embedding {
        iota,
        boundary: vec![vec![2.0]],
        boundary_distance: None,
    }
}

/// Optimal Hardy weight of the half-line with a Dirichlet condition at 0,
/// `w(n) = 2 - √(1 - 1/n) - √(1 + 1/n)`.
fn half_line_hardy_weight(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let t = 1.0 / n as f64;
    2.0 - (1.0 - t).sqrt() - (1.0 + t).sqrt()
}

/// Writes the files of `name` into `dir` and records what was written.
pub fn emit_example(name: &str, params: &Params, dir: &Path, report: &mut Report) -> CliResult<()> {
    let mut summary = serde_json::Map::new();
    summary.insert("name".into(), json!(name));
    let graph = match name {
        "z-line" | "z-line-nu" => {
            let n = params.usize("N", 10)?;
            let measure = line_measure(params, name == "z-line-nu")?;
            let mg = line_z(n, measure, line_potential(params))?;
            summary.insert("N".into(), json!(n));
            summary.insert("measure".into(), json!(format!("{measure:?}")));
            summary.insert("V".into(), json!(params.get("V").unwrap_or("zero")));
            write_json(&dir.join(METRIC_FILE), &line_embedding(&mg, n))?;
            report.files.push(METRIC_FILE.into());
            mg
        }
        "complete-union" => {
            let n_max = match params.opt_usize("n_max")? {
                Some(v) => v,
                None => params.usize("N", 4)?,
            };
            let connect = params.bool("connect", false)?;
            let mg = complete_union(n_max, connect)?;
            // adjacency encoding: θ ≡ -π, W = -deg
            let minus_deg: Vec<f64> = (0..mg.len()).map(|x| -mg.normalized_degree(x)).collect();
            let bundle = scalar_to_bundle(&mg.graph, &ScalarField::constant(&mg.graph, -PI), &minus_deg)?;
            write_json(&dir.join(BUNDLE_FILE), &bundle_to_file(&bundle))?;
            report.files.push(BUNDLE_FILE.into());
            summary.insert("n_max".into(), json!(n_max));
            summary.insert("connect".into(), json!(connect));
            summary.insert("bridges".into(), json!(if connect { n_max - 1 } else { 0 }));
            mg
        }
        "circle-packing" => {
            let rings = params.usize("rings", 2)?;
            let (mg, coords) = circle_packing_nerve(&hex_patch(rings), DEFAULT_TANGENCY_TOL)?;
            let iota: BTreeMap<String, Vec<f64>> = mg.graph.ids().iter().cloned().zip(coords).collect();
            let metric = MetricFile::Embedding {
                iota,
                boundary: Vec::new(),
                boundary_distance: None,
            };
            write_json(&dir.join(METRIC_FILE), &metric)?;
            report.files.push(METRIC_FILE.into());
            summary.insert("rings".into(), json!(rings));
            summary.insert("circles".into(), json!(mg.len()));
            mg
        }
        "hardy-stub" => {
            let n = params.usize("N", 50)?;
            if n == 0 {
                return Err(CliError::param("N", "must be positive"));
            }
            let ids: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
            let edges = (1..=n).map(|i| (i - 1, i, 1.0)).collect();
            let graph = WeightedGraph::from_indexed(ids, edges)?.with_section_boundary(vec![n]);
            let mg = MeasuredGraph::counting(graph);
            let w: Vec<f64> = (0..=n).map(half_line_hardy_weight).collect();
            write_json(&dir.join(HARDY_FILE), &vertex_function_json(&mg.graph, &w))?;
            report.files.push(HARDY_FILE.into());
            // on a finite section constants have zero energy, so only the
            // margin's approach to 0 as N grows carries information
            let (holds, margin) = hardy_weight_check(&mg, &w)?;
            summary.insert("N".into(), json!(n));
            summary.insert("hardy_margin".into(), num(margin));
            summary.insert("hardy_holds".into(), json!(holds));
            report.verdict("hardy_weight_on_section", holds);
            mg
        }
        other => return Err(CliError::UnknownExample(other.to_string())),
    };
    write_json(&dir.join(GRAPH_FILE), &graph_to_file(&graph))?;
    report.files.insert(0, GRAPH_FILE.into());
    summary.insert("vertices".into(), json!(graph.len()));
    summary.insert("edges".into(), json!(graph.graph.edges().len()));
    report.result("example", serde_json::Value::Object(summary));
    Ok(())
}
