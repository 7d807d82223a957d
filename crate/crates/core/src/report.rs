//! Serializable record of one pipeline run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::encoding::ResourceCost;
use crate::error::Warning;
use crate::linalg::{CMatrix, CVector, C64};
use crate::oracles::OracleRead;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicCost {
    pub name: String,
    pub expression: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub pipeline: String,
    pub config: Value,
    pub result: Value,
    /// Fidelities, eigenvalue errors and residuals against the oracles.
    pub oracle_deltas: BTreeMap<String, f64>,
    pub ledger: ResourceCost,
    pub symbolic: Vec<SymbolicCost>,
    pub oracle_reads: Vec<OracleRead>,
    pub warnings: Vec<Warning>,
    pub wall_time_seconds: f64,
}

impl ExperimentReport {
    pub fn new(pipeline: &str, config: Value) -> Self {
        Self {
            pipeline: pipeline.to_string(),
            config,
            result: Value::Null,
            oracle_deltas: BTreeMap::new(),
            ledger: ResourceCost::free(),
            symbolic: Vec::new(),
            oracle_reads: Vec::new(),
            warnings: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn delta(&mut self, key: &str, value: f64) -> &mut Self {
        self.oracle_deltas.insert(key.to_string(), value);
        self
    }

    /// Violations of the report invariants: fidelities in `[0, 1]` and a
    /// non-negative ledger.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, v) in &self.oracle_deltas {
            if k.contains("fidelity") && !(0.0..=1.0 + 1e-12).contains(v) {
                out.push(format!("{k} = {v} outside [0, 1]"));
            }
        }
        let l = &self.ledger;
        if !(l.depth >= 0.0 && l.classical_preprocessing >= 0.0 && l.success_probability >= 0.0) {
            out.push(format!("negative ledger entry: {l:?}"));
        }
        out
    }

    /// Everything except the wall time.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Value::Object(m) = &mut v {
            m.remove("wall_time_seconds");
        }
        v
    }

    /// Pretty JSON; the wall time only when `timing` is set, so untimed
    /// reports of identical runs are byte-identical.
    pub fn to_json(&self, timing: bool) -> String {
        let v = if timing {
            serde_json::to_value(self).expect("reports serialize")
        } else {
            self.payload()
        };
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }

    /// Flat `key,value` rows of the result, deltas and ledger.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut rows: Vec<(String, String)> = vec![("pipeline".into(), self.pipeline.clone())];
        flatten("result", &self.result, &mut rows);
        for (k, v) in &self.oracle_deltas {
            rows.push((format!("delta.{k}"), format!("{v:e}")));
        }
        flatten("ledger", &serde_json::to_value(&self.ledger).expect("ledger serializes"), &mut rows);
        if timing {
            rows.push(("wall_time_seconds".into(), format!("{:e}", self.wall_time_seconds)));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "value"]).expect("in-memory csv");
        for (k, v) in rows {
            w.write_record([k, v]).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv writer emits UTF-8")
    }
}

/// Dotted-path leaves of a JSON value; nulls are skipped.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&format!("{prefix}.{k}"), x, out)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten(&format!("{prefix}.{i}"), x, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => {}
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

pub fn complex_value(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn vector_value(v: &CVector) -> Value {
    Value::Array(v.iter().map(|z| complex_value(*z)).collect())
}

pub fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect()))
            .collect(),
    )
}
