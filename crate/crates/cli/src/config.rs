//! Command line, config file, and the per-analysis parameter schema.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::io::read_json;

#[derive(Debug, Parser)]
#[command(
    name = "graphlap",
    version,
    about = "Magnetic Schrödinger operators, forms and capacities on weighted graphs",
    after_help = "ANALYSES: validate, assemble, spectrum, green-kato, bounded, criterion-measure, \
criterion-metric, capacity, boundary-capacity, recurrence, example\n\
EXAMPLES: z-line, z-line-nu, complete-union, circle-packing, hardy-stub\n\
ENV: GRAPHLAP_THREADS caps the number of worker threads."
)]
pub struct Args {
    /// Analysis to run. With `example`, `--analysis` names an optional
    /// follow-up analysis run on the emitted files.
    pub command: Option<String>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<PathBuf>,
    /// Boundary distance table `{vertex: D}`.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Experiment config JSON; command line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub analysis: Option<String>,
    /// Analysis parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_key_value)]
    pub params: Vec<(String, String)>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shorthand for `--param name=…`.
    #[arg(long)]
    pub name: Option<String>,
    /// Shorthand for `--param alpha=…`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Shorthand for `--param N=…`.
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Shorthand for `--param trials=…`.
    #[arg(long)]
    pub trials: Option<String>,
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected KEY=VALUE, got `{s}`")),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub graph: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub metric: Option<PathBuf>,
    pub boundary: Option<PathBuf>,
    pub analysis: Option<String>,
    /// Follow-up analysis after `example`.
    pub then: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Analysis {
    Validate,
    Assemble,
    Spectrum,
    GreenKato,
    Bounded,
    CriterionMeasure,
    CriterionMetric,
    Capacity,
    BoundaryCapacity,
    Recurrence,
    Example,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    UInt,
    Bool,
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: Kind,
    /// Allowed values for text parameters; empty means free text.
    pub choices: &'static [&'static str],
}

const fn p(name: &'static str, kind: Kind) -> ParamSpec {
    ParamSpec { name, kind, choices: &[] }
}

const fn c(name: &'static str, choices: &'static [&'static str]) -> ParamSpec {
    ParamSpec {
        name,
        kind: Kind::Text,
        choices,
    }
}

impl Analysis {
    pub const ALL: [Analysis; 11] = [
        Analysis::Validate,
        Analysis::Assemble,
        Analysis::Spectrum,
        Analysis::GreenKato,
        Analysis::Bounded,
        Analysis::CriterionMeasure,
        Analysis::CriterionMetric,
        Analysis::Capacity,
        Analysis::BoundaryCapacity,
        Analysis::Recurrence,
        Analysis::Example,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Validate => "validate",
            Analysis::Assemble => "assemble",
            Analysis::Spectrum => "spectrum",
            Analysis::GreenKato => "green-kato",
            Analysis::Bounded => "bounded",
            Analysis::CriterionMeasure => "criterion-measure",
            Analysis::CriterionMetric => "criterion-metric",
            Analysis::Capacity => "capacity",
            Analysis::BoundaryCapacity => "boundary-capacity",
            Analysis::Recurrence => "recurrence",
            Analysis::Example => "example",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| CliError::UnknownAnalysis(s.to_string()))
    }

    pub fn params(self) -> &'static [ParamSpec] {
        use Kind::*;
        match self {
            Analysis::Validate => const { &[] },
            Analysis::Assemble => const { &[p("flip", Bool)] },
            Analysis::Spectrum => const { &[p("flip", Bool), p("extremes", Bool)] },
            Analysis::GreenKato => const { &[p("trials", UInt), p("max_vertices", UInt), p("max_dim", UInt)] },
            Analysis::Bounded => const { &[p("probes", UInt)] },
            Analysis::CriterionMeasure => const { &[p("shift", Float), p("path", Text), p("N", UInt)] },
            Analysis::CriterionMetric => const { &[p("v_ref", Text)] },
            Analysis::Capacity => const { &[
                p("subset", Text),
                c("mode", &["neumann", "dirichlet"]),
                p("targets", Text),
                c("h", &["auto", "one"]),
            ] },
            Analysis::BoundaryCapacity => const { &[p("center", Text), p("radii", Text), c("h", &["auto", "one"])] },
            Analysis::Recurrence => const { &[p("f", Text), p("f_alpha", Float), p("levels", UInt)] },
            Analysis::Example => const { &[
                c("name", &crate::examples::NAMES),
                p("N", UInt),
                p("alpha", Float),
                c("V", &["zero", "half-square"]),
                p("n_max", UInt),
                p("connect", Bool),
                p("rings", UInt),
            ] },
        }
    }

    /// Whether the analysis cannot run without `--graph`.
    pub fn needs_graph(self) -> bool {
        !matches!(self, Analysis::Example | Analysis::GreenKato)
    }
}

/// Validated `key=value` parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(key, v),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::param(key, format!("`{v}` is not a nonnegative integer"))),
        }
    }

    pub fn opt_usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.get(key).map(|_| self.usize(key, 0)).transpose()
    }

    pub fn bool(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_bool(key, v),
        }
    }

    pub fn echo(&self) -> Value {
        json!(self.values)
    }

    /// Checks every key against the union of the given schemas, then the
    /// value against its kind.
    fn validate(&self, analyses: &[Analysis]) -> CliResult<()> {
        for (key, value) in &self.values {
            let spec = analyses
                .iter()
                .flat_map(|a| a.params().iter())
                .find(|s| s.name == key)
                .ok_or_else(|| CliError::UnknownParameter {
                    key: key.clone(),
                    analysis: analyses.iter().map(|a| a.name()).collect::<Vec<_>>().join(" + "),
                })?;
            match spec.kind {
                Kind::Float => {
                    parse_f64(key, value)?;
                }
                Kind::UInt => {
                    self.usize(key, 0)?;
                }
                Kind::Bool => {
                    parse_bool(key, value)?;
                }
                Kind::Text => {
                    if !spec.choices.is_empty() && !spec.choices.contains(&value.as_str()) {
                        if key == "name" {
                            return Err(CliError::UnknownExample(value.clone()));
                        }
                        return Err(CliError::param(
                            key,
                            format!("`{value}` is not one of {}", spec.choices.join(", ")),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_f64(key: &str, v: &str) -> CliResult<f64> {
    let x: f64 = v.parse().map_err(|_| CliError::param(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::param(key, "must be finite"));
    }
    Ok(x)
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v {
        "true" | "1" | "yes" | "" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::param(key, format!("`{v}` is not a boolean"))),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub graph: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub metric: Option<PathBuf>,
    pub boundary: Option<PathBuf>,
    pub analysis: Analysis,
    /// Follow-up analysis on the files written by `example`.
    pub then: Option<Analysis>,
    pub params: Params,
    pub out: PathBuf,
    pub seed: u64,
}

pub const DEFAULT_OUT: &str = "graphlap-out";

fn value_to_param(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn relative_to(base: Option<&Path>, p: PathBuf) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

impl ExperimentConfig {
    /// Merges the config file (if any) with the command line and validates
    /// the result. Paths in a config file are relative to that file.
    pub fn resolve(args: &Args) -> CliResult<Self> {
        let (file, base) = match &args.config {
            Some(path) => {
                if !path.is_file() {
                    return Err(CliError::io(path, "no such file"));
                }
                (read_json::<ConfigFile>(path)?, path.parent().map(Path::to_path_buf))
            }
            None => (ConfigFile::default(), None),
        };
        let base = base.as_deref();
        let pick = |flag: &Option<PathBuf>, from_file: &Option<PathBuf>| {
            flag.clone().or_else(|| from_file.clone().map(|p| relative_to(base, p)))
        };

        let flag_analysis = args.analysis.as_deref().map(Analysis::parse).transpose()?;
        let (analysis, then) = match args.command.as_deref() {
            Some(cmd) => {
                let primary = Analysis::parse(cmd)?;
                if primary == Analysis::Example {
                    (primary, flag_analysis)
                } else {
                    if matches!(flag_analysis, Some(a) if a != primary) {
                        return Err(CliError::Config(format!(
                            "`{cmd}` conflicts with --analysis {}",
                            args.analysis.as_deref().unwrap_or_default()
                        )));
                    }
                    (primary, None)
                }
            }
            None => {
                let primary = match flag_analysis {
                    Some(a) => a,
                    None => Analysis::parse(
                        file.analysis
                            .as_deref()
                            .ok_or_else(|| CliError::Config("no analysis given".into()))?,
                    )?,
                };
                let then = file.then.as_deref().map(Analysis::parse).transpose()?;
                (primary, then)
            }
        };
        if then == Some(Analysis::Example) {
            return Err(CliError::Config("the follow-up analysis cannot be `example`".into()));
        }
        if then.is_some() && analysis != Analysis::Example {
            return Err(CliError::Config("a follow-up analysis is only allowed after `example`".into()));
        }

        let mut values: BTreeMap<String, String> =
            file.params.iter().map(|(k, v)| (k.clone(), value_to_param(v))).collect();
        for (k, v) in &args.params {
            values.insert(k.clone(), v.clone());
        }
        for (key, flag) in [("name", &args.name), ("alpha", &args.alpha), ("N", &args.n), ("trials", &args.trials)] {
            if let Some(v) = flag {
                values.insert(key.to_string(), v.clone());
            }
        }
        let params = Params { values };
        let mut schemas = vec![analysis];
        schemas.extend(then);
        params.validate(&schemas)?;
        if analysis == Analysis::Example && params.get("name").is_none() {
            return Err(CliError::Config("example requires --name".into()));
        }

        let config = Self {
            graph: pick(&args.graph, &file.graph),
            bundle: pick(&args.bundle, &file.bundle),
            metric: pick(&args.metric, &file.metric),
            boundary: pick(&args.boundary, &file.boundary),
            analysis,
            then,
            params,
            out: pick(&args.out, &file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            seed: args.seed.or(file.seed).unwrap_or(0),
        };
        for path in [&config.graph, &config.bundle, &config.metric, &config.boundary].into_iter().flatten() {
            if !path.is_file() {
                return Err(CliError::io(path, "no such file"));
            }
        }
        if config.analysis.needs_graph() && config.graph.is_none() {
            return Err(CliError::Config(format!("{} requires --graph", config.analysis.name())));
        }
        Ok(config)
    }

    pub fn echo(&self) -> Value {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        json!({
            "analysis": self.analysis.name(),
            "then": self.then.map(Analysis::name),
            "graph": path(&self.graph),
            "bundle": path(&self.bundle),
            "metric": path(&self.metric),
            "boundary": path(&self.boundary),
            "params": self.params.echo(),
            "out": self.out.display().to_string(),
            "seed": self.seed,
        })
    }
}

/// Best-effort echo of the raw arguments when resolution itself failed.
pub fn raw_echo(args: &Args) -> Value {
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let params: BTreeMap<&str, &str> = args.params.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    json!({
        "command": args.command,
        "analysis": args.analysis,
        "graph": path(&args.graph),
        "bundle": path(&args.bundle),
        "metric": path(&args.metric),
        "boundary": path(&args.boundary),
        "config": path(&args.config),
        "params": params,
        "seed": args.seed,
    })
}
