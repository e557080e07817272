use serde_json::{Map, Value};

use crate::io::Table;

/// Everything an analysis produces. Blocks are JSON objects with sorted keys.
#[derive(Default)]
pub struct Report {
    pub inputs: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub spectrum: Map<String, Value>,
    pub verdicts: Map<String, Value>,
    pub results: Map<String, Value>,
    pub warnings: Vec<String>,
    pub tables: Vec<Table>,
    /// Input files written by `example`, relative to the output directory.
    pub files: Vec<String>,
}

impl Report {
    pub fn input(&mut self, key: &str, v: impl Into<Value>) {
        self.inputs.insert(key.into(), v.into());
    }

    pub fn residual(&mut self, key: &str, v: f64) {
        self.residuals.insert(key.into(), crate::io::num(v));
    }

    pub fn spectrum(&mut self, key: &str, v: impl Into<Value>) {
        self.spectrum.insert(key.into(), v.into());
    }

    pub fn verdict(&mut self, key: &str, ok: bool) {
        self.verdicts.insert(key.into(), Value::Bool(ok));
    }

    pub fn result(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.into(), v.into());
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }
}
