//! JSON input files and CSV/JSON output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use graphlap_core::bundle::HermitianBundle;
use graphlap_core::linalg::C64;
use graphlap_core::metric::{huang_sigma, EdgeLength};
use graphlap_core::{MeasuredGraph, WeightedGraph};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Vertex ids may be written as strings or integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexId {
    Str(String),
    Num(serde_json::Number),
}

impl VertexId {
    pub fn as_string(&self) -> String {
        match self {
            VertexId::Str(s) => s.clone(),
            VertexId::Num(n) => n.to_string(),
        }
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId::Str(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<BTreeMap<String, f64>>,
    #[serde(default, rename = "V", skip_serializing_if = "Option::is_none")]
    pub potential: Option<BTreeMap<String, f64>>,
    /// Vertices adjacent to the truncated part of an infinite graph.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<VertexId>,
}

/// Complex matrices are row-major lists of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleFile {
    #[serde(default)]
    pub dim: BTreeMap<String, usize>,
    #[serde(default, rename = "W")]
    pub endo: BTreeMap<String, Vec<[f64; 2]>>,
    /// Keys `"u->v"`; the matrix maps the fiber at `v` to the fiber at `u`.
    #[serde(default, rename = "Phi")]
    pub phi: BTreeMap<String, Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    /// `"huang"`, `"weights"` or `"unit"`.
    Named(String),
    /// Keys `"u->v"` (either orientation).
    Lengths(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MetricFile {
    Path {
        sigma: SigmaSpec,
        /// Distance to the Cauchy boundary per vertex; numbers or `"inf"`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        boundary_distance: Option<BTreeMap<String, Value>>,
    },
    Embedding {
        iota: BTreeMap<String, Vec<f64>>,
        /// Accumulation points of the embedded vertex set.
        #[serde(default)]
        boundary: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        boundary_distance: Option<BTreeMap<String, Value>>,
    },
}

/// A metric file resolved against a graph.
#[derive(Debug, Clone)]
pub enum LoadedMetric {
    Path {
        sigma: EdgeLength,
        boundary_distance: Option<Vec<f64>>,
    },
    Embedding {
        iota: Vec<Option<Vec<f64>>>,
        boundary_points: Vec<Vec<f64>>,
        boundary_distance: Option<Vec<f64>>,
    },
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn split_pair(key: &str) -> Option<(&str, &str)> {
    key.split_once("->")
}

/// Values for every vertex from a map; keys must be vertices.
fn per_vertex<T: Clone>(
    graph: &WeightedGraph,
    map: &BTreeMap<String, T>,
    what: &str,
    path: &Path,
) -> CliResult<Vec<T>> {
    for key in map.keys() {
        graph.index_of(key)?;
    }
    graph
        .ids()
        .iter()
        .map(|id| {
            map.get(id)
                .cloned()
                .ok_or_else(|| CliError::parse(path, format!("{what} has no value for vertex {id}")))
        })
        .collect()
}

pub fn graph_from_file(file: &GraphFile, path: &Path) -> CliResult<MeasuredGraph> {
    let ids: Vec<String> = file.vertices.iter().map(VertexId::as_string).collect();
    let edges: Vec<(String, String, f64)> = file
        .edges
        .iter()
        .map(|(u, v, b)| (u.as_string(), v.as_string(), *b))
        .collect();
    let mut graph = WeightedGraph::new(ids, edges)?;
    if !file.boundary.is_empty() {
        let boundary = file
            .boundary
            .iter()
            .map(|b| graph.index_of(&b.as_string()))
            .collect::<Result<Vec<_>, _>>()?;
        graph = graph.with_section_boundary(boundary);
    }
    let n = graph.len();
    let mu = match &file.mu {
        Some(m) => per_vertex(&graph, m, "mu", path)?,
        None => vec![1.0; n],
    };
    let v = match &file.potential {
        Some(m) => per_vertex(&graph, m, "V", path)?,
        None => vec![0.0; n],
    };
    Ok(MeasuredGraph::new(graph, mu, v)?)
}

pub fn load_graph(path: &Path) -> CliResult<MeasuredGraph> {
    graph_from_file(&read_json(path)?, path)
}

pub fn graph_to_file(mg: &MeasuredGraph) -> GraphFile {
    let g = &mg.graph;
    let ids = g.ids();
    GraphFile {
        vertices: ids.iter().map(|s| VertexId::Str(s.clone())).collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| (ids[e.u].as_str().into(), ids[e.v].as_str().into(), e.weight))
            .collect(),
        mu: Some(ids.iter().cloned().zip(mg.mu().iter().copied()).collect()),
        potential: Some(ids.iter().cloned().zip(mg.potential().iter().copied()).collect()),
        boundary: g.section_boundary().iter().map(|&x| ids[x].as_str().into()).collect(),
    }
}

fn matrix_from_pairs(entries: &[[f64; 2]], rows: usize, cols: usize) -> CliResult<DMatrix<C64>> {
    if entries.len() != rows * cols {
        return Err(graphlap_core::Error::DimensionMismatch {
            expected: rows * cols,
            found: entries.len(),
        }
        .into());
    }
    Ok(DMatrix::from_row_iterator(
        rows,
        cols,
        entries.iter().map(|[re, im]| C64::new(*re, *im)),
    ))
}

fn matrix_to_pairs(m: &DMatrix<C64>) -> Vec<[f64; 2]> {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
        .collect()
}

/// Missing `dim` entries default to 1 and missing `W` to zero. Missing or
/// extra connection matrices are left for `validate_connection` to report.
pub fn bundle_from_file(file: &BundleFile, graph: &WeightedGraph) -> CliResult<HermitianBundle> {
    for key in file.dim.keys().chain(file.endo.keys()) {
        graph.index_of(key)?;
    }
    let dims: Vec<usize> = graph
        .ids()
        .iter()
        .map(|id| file.dim.get(id).copied().unwrap_or(1))
        .collect();
    let mut endo = Vec::with_capacity(graph.len());
    for (x, id) in graph.ids().iter().enumerate() {
        endo.push(match file.endo.get(id) {
            Some(entries) => matrix_from_pairs(entries, dims[x], dims[x])?,
            None => DMatrix::zeros(dims[x], dims[x]),
        });
    }
    let mut connection = BTreeMap::new();
    for (key, entries) in &file.phi {
        let (u, v) = split_pair(key)
            .ok_or_else(|| CliError::Config(format!("connection key `{key}` is not of the form u->v")))?;
        let (x, y) = (graph.index_of(u)?, graph.index_of(v)?);
        connection.insert((x, y), matrix_from_pairs(entries, dims[x], dims[y])?);
    }
    Ok(HermitianBundle::new(graph, dims, endo, connection)?)
}

pub fn load_bundle(path: &Path, graph: &WeightedGraph) -> CliResult<HermitianBundle> {
    bundle_from_file(&read_json(path)?, graph)
}

pub fn bundle_to_file(bundle: &HermitianBundle) -> BundleFile {
    let ids = bundle.ids();
    BundleFile {
        dim: ids.iter().cloned().zip(bundle.dims().iter().copied()).collect(),
        endo: ids
            .iter()
            .cloned()
            .zip(bundle.endomorphisms().iter().map(matrix_to_pairs))
            .collect(),
        phi: bundle
            .connections()
            .iter()
            .map(|(&(x, y), m)| (format!("{}->{}", ids[x], ids[y]), matrix_to_pairs(m)))
            .collect(),
    }
}

/// Reads a number or one of the strings `"inf"`, `"infinity"`.
pub fn value_to_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Some(f64::INFINITY),
            other => other.parse().ok(),
        },
        _ => None,
    }
}

fn distance_table(
    graph: &WeightedGraph,
    map: &Option<BTreeMap<String, Value>>,
    path: &Path,
) -> CliResult<Option<Vec<f64>>> {
    let Some(map) = map else { return Ok(None) };
    let mut parsed = BTreeMap::new();
    for (k, v) in map {
        let d = value_to_f64(v)
            .ok_or_else(|| CliError::parse(path, format!("boundary distance of {k} is not a number")))?;
        parsed.insert(k.clone(), d);
    }
    Ok(Some(per_vertex(graph, &parsed, "boundary_distance", path)?))
}

pub fn metric_from_file(file: &MetricFile, mg: &MeasuredGraph, path: &Path) -> CliResult<LoadedMetric> {
    let graph = &mg.graph;
    match file {
        MetricFile::Path {
            sigma,
            boundary_distance,
        } => {
            let sigma = match sigma {
                SigmaSpec::Named(name) => match name.as_str() {
                    "huang" => huang_sigma(mg)?,
                    "weights" => EdgeLength::from_weights(graph),
                    "unit" => EdgeLength::new(graph, vec![1.0; graph.edges().len()])?,
                    other => {
                        return Err(CliError::parse(
                            path,
                            format!("unknown sigma rule `{other}` (expected huang, weights or unit)"),
                        ))
                    }
                },
                SigmaSpec::Lengths(map) => {
                    let mut pairs = Vec::with_capacity(map.len());
                    for (key, &s) in map {
                        let (u, v) = split_pair(key).ok_or_else(|| {
                            CliError::parse(path, format!("sigma key `{key}` is not of the form u->v"))
                        })?;
                        pairs.push((graph.index_of(u)?, graph.index_of(v)?, s));
                    }
                    EdgeLength::from_pairs(graph, &pairs)?
                }
            };
            Ok(LoadedMetric::Path {
                sigma,
                boundary_distance: distance_table(graph, boundary_distance, path)?,
            })
        }
        MetricFile::Embedding {
            iota,
            boundary,
            boundary_distance,
        } => {
            for key in iota.keys() {
                graph.index_of(key)?;
            }
            Ok(LoadedMetric::Embedding {
                iota: graph.ids().iter().map(|id| iota.get(id).cloned()).collect(),
                boundary_points: boundary.clone(),
                boundary_distance: distance_table(graph, boundary_distance, path)?,
            })
        }
    }
}

pub fn load_metric(path: &Path, mg: &MeasuredGraph) -> CliResult<LoadedMetric> {
    metric_from_file(&read_json(path)?, mg, path)
}

/// `{vertex: value}` file, one value per vertex.
pub fn load_vertex_function(path: &Path, graph: &WeightedGraph) -> CliResult<Vec<f64>> {
    let map: BTreeMap<String, Value> = read_json(path)?;
    let mut parsed = BTreeMap::new();
    for (k, v) in &map {
        let x = value_to_f64(v).ok_or_else(|| CliError::parse(path, format!("value of {k} is not a number")))?;
        parsed.insert(k.clone(), x);
    }
    per_vertex(graph, &parsed, "function", path)
}

pub fn vertex_function_json(graph: &WeightedGraph, f: &[f64]) -> BTreeMap<String, f64> {
    graph.ids().iter().cloned().zip(f.iter().copied()).collect()
}

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number, or a string for values JSON cannot represent.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(fmt_f64(x))
    }
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(x.to_string())
    }
}

/// A CSV table kept in memory until the run finishes.
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(&self.name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
        w.write_record(&self.header).map_err(|e| CliError::io(&path, e))?;
        for row in &self.rows {
            let record: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(x) => fmt_f64(*x),
                    Cell::I(i) => i.to_string(),
                    Cell::S(s) => s.clone(),
                })
                .collect();
            w.write_record(&record).map_err(|e| CliError::io(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }
}
