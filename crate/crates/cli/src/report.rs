//! Report schema and emission. One flat schema across all experiments:
//! JSON `{experiment, params:{...}, seed, estimates:[{name, value, stderr}],
//! pass, wall_time_s}` or CSV rows `experiment,name,value,stderr,n,k,seed`.

use crate::config::{ExperimentConfig, Format};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(name: impl Into<String>, value: f64, stderr: f64) -> Self {
        Self { name: name.into(), value, stderr }
    }

    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, 0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// full resolved configuration, sorted keys
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub estimates: Vec<Estimate>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn new(cfg: &ExperimentConfig, estimates: Vec<Estimate>, pass: bool, wall_time_s: f64) -> Self {
        let mut params = BTreeMap::new();
        for line in cfg.to_config_string().lines() {
            if let Some((k, v)) = line.split_once(" = ") {
                params.insert(k.to_string(), v.to_string());
            }
        }
        Self {
            experiment: cfg.experiment.clone(),
            params,
            seed: cfg.seed,
            estimates,
            pass,
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The JSON payload with wall time zeroed, for bit-identity comparisons.
    pub fn deterministic_payload(&self) -> String {
        let mut clone = self.clone();
        clone.wall_time_s = 0.0;
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,name,value,stderr,n,k,seed\n");
        let n = self.params.get("n").cloned().unwrap_or_default();
        let k = self.params.get("k").cloned().unwrap_or_default();
        for e in &self.estimates {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.experiment, e.name, e.value, e.stderr, n, k, self.seed
            ));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}
