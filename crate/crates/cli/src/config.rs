//! Experiment configuration: the flag set, `key = value` config files, and
//! the set-descriptor grammar.

use crate::{Error, Result};
use orthosphere::quadrature::QuadratureRule;
use orthosphere::sphere::{cap_threshold_for_measure, AnalyticConstants, CoordinateSet};

pub const EXPERIMENTS: [&str; 9] = [
    "spectra",
    "coarea",
    "theorem1",
    "conjecture",
    "smallball",
    "tailbound",
    "vsp",
    "rectangle",
    "suite",
];

/// Output format of the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format `{other}` (json|csv)"))),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Format::Json => write!(f, "json"),
            Format::Csv => write!(f, "csv"),
        }
    }
}

/// Fully resolved experiment configuration. Every field has a default, so a
/// config is always complete; reports echo all of it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub samples: usize,
    pub seed: u64,
    pub set: Option<String>,
    pub rho: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub out: Option<String>,
    pub format: Format,
    /// 0 means the library default
    pub threads: usize,
    // protocol-specific knobs (vsp experiment)
    pub dim_e: Option<usize>,
    pub net_size: Option<usize>,
    pub list_size: Option<usize>,
    pub quant_bits: Option<u32>,
    pub transcript: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let c = AnalyticConstants::default();
        Self {
            experiment: "suite".to_string(),
            n: 100,
            k: 1,
            trials: 200,
            samples: 10_000,
            seed: 1,
            set: None,
            rho: c.rho,
            alpha1: c.alpha1,
            alpha2: c.alpha2,
            out: None,
            format: Format::Json,
            threads: 0,
            dim_e: None,
            net_size: None,
            list_size: None,
            quant_bits: None,
            transcript: None,
        }
    }
}

impl ExperimentConfig {
    pub fn constants(&self) -> AnalyticConstants {
        AnalyticConstants { alpha1: self.alpha1, alpha2: self.alpha2, rho: self.rho }
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::Config(format!(
                "unknown experiment `{}`; expected one of {}",
                self.experiment,
                EXPERIMENTS.join("|")
            )));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        Ok(())
    }

    /// Serialize as `key = value` lines, one per field, in a fixed order.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut push = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        push("experiment", self.experiment.clone());
        push("n", self.n.to_string());
        push("k", self.k.to_string());
        push("trials", self.trials.to_string());
        push("samples", self.samples.to_string());
        push("seed", self.seed.to_string());
        if let Some(set) = &self.set {
            push("set", set.clone());
        }
        push("rho", format_float(self.rho));
        push("alpha1", format_float(self.alpha1));
        push("alpha2", format_float(self.alpha2));
        if let Some(out) = &self.out {
            push("out", out.clone());
        }
        push("format", self.format.to_string());
        push("threads", self.threads.to_string());
        if let Some(v) = self.dim_e {
            push("dim_e", v.to_string());
        }
        if let Some(v) = self.net_size {
            push("net_size", v.to_string());
        }
        if let Some(v) = self.list_size {
            push("list_size", v.to_string());
        }
        if let Some(v) = self.quant_bits {
            push("quant_bits", v.to_string());
        }
        if let Some(v) = &self.transcript {
            push("transcript", v.clone());
        }
        s
    }

    /// Parse `key = value` lines ('#' starts a comment) onto defaults.
    pub fn from_config_string(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )))?;
            cfg.apply(key.trim(), value.trim()).map_err(|e| {
                Error::Config(format!("line {}: {e}", lineno + 1))
            })?;
        }
        Ok(cfg)
    }

    /// Set one field from its textual form (shared by config files and flag
    /// merging).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad {what} value `{value}`"));
        match key {
            "experiment" => self.experiment = value.to_string(),
            "n" => self.n = value.parse().map_err(|_| bad("n"))?,
            "k" => self.k = value.parse().map_err(|_| bad("k"))?,
            "trials" => self.trials = value.parse().map_err(|_| bad("trials"))?,
            "samples" => self.samples = value.parse().map_err(|_| bad("samples"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "set" => self.set = Some(value.to_string()),
            "rho" => self.rho = value.parse().map_err(|_| bad("rho"))?,
            "alpha1" => self.alpha1 = value.parse().map_err(|_| bad("alpha1"))?,
            "alpha2" => self.alpha2 = value.parse().map_err(|_| bad("alpha2"))?,
            "out" => self.out = Some(value.to_string()),
            "format" => self.format = value.parse()?,
            "threads" => self.threads = value.parse().map_err(|_| bad("threads"))?,
            "dim_e" => self.dim_e = Some(value.parse().map_err(|_| bad("dim_e"))?),
            "net_size" => self.net_size = Some(value.parse().map_err(|_| bad("net_size"))?),
            "list_size" => self.list_size = Some(value.parse().map_err(|_| bad("list_size"))?),
            "quant_bits" => self.quant_bits = Some(value.parse().map_err(|_| bad("quant_bits"))?),
            "transcript" => self.transcript = Some(value.to_string()),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}

fn format_float(v: f64) -> String {
    // shortest round-trip representation
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Parse a set descriptor:
///   `cap:T=<real>`              cap {x1 >= T}
///   `box:[a,b]x[c,d]...`        product of intervals
///   `measure-cap:sigma=<real>`  cap with the given measure on S^{n-1}
pub fn parse_set_descriptor(
    text: &str,
    n: usize,
    rule: &QuadratureRule,
) -> Result<CoordinateSet> {
    let err = |pos: usize, msg: &str| Error::Parse { pos, msg: msg.to_string() };
    if let Some(rest) = text.strip_prefix("cap:") {
        let body = rest
            .strip_prefix("T=")
            .ok_or_else(|| err(4, "expected `T=<real>` after `cap:`"))?;
        let t: f64 = body
            .parse()
            .map_err(|_| err(6, "expected a real number for the cap threshold"))?;
        if !(-1.0..=1.0).contains(&t) {
            return Err(err(6, "cap threshold must lie in [-1, 1]"));
        }
        Ok(CoordinateSet::cap(t))
    } else if let Some(rest) = text.strip_prefix("measure-cap:") {
        let body = rest
            .strip_prefix("sigma=")
            .ok_or_else(|| err(12, "expected `sigma=<real>` after `measure-cap:`"))?;
        let sigma: f64 = body
            .parse()
            .map_err(|_| err(18, "expected a real number for the cap measure"))?;
        let t = cap_threshold_for_measure(n, sigma, rule)?;
        Ok(CoordinateSet::cap(t))
    } else if let Some(rest) = text.strip_prefix("box:") {
        let mut intervals = Vec::new();
        let base = 4usize;
        let mut offset = 0usize;
        for (i, part) in rest.split('x').enumerate() {
            let pos = base + offset;
            offset += part.len() + 1;
            let inner = part
                .strip_prefix('[')
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(|| err(pos, "expected `[a,b]`"))?;
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| err(pos + 1, "expected two comma-separated endpoints"))?;
            let a: f64 = a.trim().parse().map_err(|_| err(pos + 1, "bad left endpoint"))?;
            let b: f64 = b.trim().parse().map_err(|_| err(pos + 1, "bad right endpoint"))?;
            if a > b {
                return Err(err(pos + 1, "interval endpoints out of order"));
            }
            let _ = i;
            intervals.push((a, b));
        }
        if intervals.is_empty() {
            return Err(err(base, "box needs at least one interval"));
        }
        Ok(CoordinateSet::boxed(intervals))
    } else {
        Err(err(0, "expected `cap:`, `box:` or `measure-cap:` descriptor"))
    }
}
