//! Experiment documents.
//!
//! An experiment is described by a small TOML document. Every key is
//! optional; omitted keys fall back to the reference simulation setup, and
//! scenario-dependent keys (`sweep`, `methods`, `taus`, `complexity`) fall back
//! to the defaults of the chosen scenario.
//!
//! ```toml
//! schema_version = 1
//! scenario = "ber_vs_snr"
//! trials = 500
//! methods = ["RZF", "rKA", "SwoR-rKA"]
//! taus = [0.0, 0.3]
//! symbols_per_point = 1000000
//! out = "results"
//!
//! [base]
//! m = 256
//! s = 4
//! k = 16
//! seed = 7
//!
//! [sweep]
//! axis = "snr_db"
//! values = [5.0, 10.0, 15.0, 20.0]
//! ```

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::precoding::Method;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Average sum spectral efficiency against SNR.
    #[default]
    SeVsSnr,
    /// QPSK bit-error rate against SNR, perfect and imperfect CSI.
    BerVsSnr,
    /// Kaczmarz NMSE against the iteration count.
    NmseVsIter,
    /// Operation counts against the number of users.
    ComplexityVsK,
    /// Operation counts against the number of antennas.
    ComplexityVsM,
    /// The three-scheme complexity table.
    #[serde(rename = "table2")]
    TableII,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::SeVsSnr,
        Scenario::BerVsSnr,
        Scenario::NmseVsIter,
        Scenario::ComplexityVsK,
        Scenario::ComplexityVsM,
        Scenario::TableII,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SeVsSnr => "se_vs_snr",
            Scenario::BerVsSnr => "ber_vs_snr",
            Scenario::NmseVsIter => "nmse_vs_iter",
            Scenario::ComplexityVsK => "complexity_vs_k",
            Scenario::ComplexityVsM => "complexity_vs_m",
            Scenario::TableII => "table2",
        }
    }

    /// Sweep axes this scenario understands.
    pub fn axes(self) -> &'static [&'static str] {
        match self {
            Scenario::SeVsSnr | Scenario::BerVsSnr => {
                &["snr_db", "tau", "sigma2", "iterations", "m", "k", "s"]
            }
            Scenario::NmseVsIter => &["iterations"],
            Scenario::ComplexityVsK => &["k"],
            Scenario::ComplexityVsM => &["m"],
            Scenario::TableII => &["iterations"],
        }
    }

    pub fn is_link_level(self) -> bool {
        matches!(self, Scenario::SeVsSnr | Scenario::BerVsSnr)
    }

    pub fn is_complexity(self) -> bool {
        matches!(
            self,
            Scenario::ComplexityVsK | Scenario::ComplexityVsM | Scenario::TableII
        )
    }

    fn default_sweep(self) -> Sweep {
        let (axis, values): (&str, Vec<f64>) = match self {
            Scenario::SeVsSnr | Scenario::BerVsSnr => ("snr_db", vec![5.0, 10.0, 15.0, 20.0]),
            Scenario::NmseVsIter => ("iterations", (0..=150).map(f64::from).collect()),
            Scenario::ComplexityVsK => ("k", (1..=10).map(|k| f64::from(10 * k)).collect()),
            Scenario::ComplexityVsM => ("m", (1..=10).map(|m| f64::from(100 * m)).collect()),
            Scenario::TableII => ("iterations", vec![200.0]),
        };
        Sweep {
            axis: axis.to_string(),
            values,
        }
    }

    fn default_methods(self) -> Vec<Method> {
        match self {
            Scenario::NmseVsIter => vec![Method::Rka, Method::SworRka],
            _ => Method::REFERENCE.to_vec(),
        }
    }

    fn default_complexity(self) -> ComplexityParams {
        match self {
            Scenario::ComplexityVsK | Scenario::ComplexityVsM => ComplexityParams {
                m: 100,
                k: 100,
                s: 1,
                t: 200,
            },
            _ => ComplexityParams::default(),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// A numeric [`SystemConfig`] field, or a complexity parameter.
    pub axis: String,
    pub values: Vec<f64>,
}

/// Sizes fed to the operation-count formulas. `m`, `k` are per subarray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityParams {
    pub m: u64,
    pub k: u64,
    pub s: u64,
    pub t: u64,
}

impl Default for ComplexityParams {
    fn default() -> Self {
        Self {
            m: 64,
            k: 16,
            s: 4,
            t: 200,
        }
    }
}

/// Descriptive fields the statistical model does not consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Metadata {
    pub carrier_ghz: f64,
    pub array: String,
}

impl Default for Metadata {
    fn default() -> Self {
        Self {
            carrier_ghz: 2.6,
            array: "ULA".to_string(),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub schema_version: u32,
    pub scenario: Scenario,
    /// Monte-Carlo realizations per sweep point.
    pub trials: usize,
    pub methods: Vec<Method>,
    /// CSI qualities crossed with the sweep (link-level scenarios only).
    /// Absent when the sweep itself runs over `tau`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    /// Minimum QPSK symbols per point for `ber_vs_snr`.
    pub symbols_per_point: u64,
    pub out: PathBuf,
    pub base: SystemConfig,
    pub sweep: Sweep,
    pub complexity: ComplexityParams,
    pub metadata: Metadata,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        resolve(RawSpec::default()).expect("defaults are valid")
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    schema_version: Option<u32>,
    scenario: Option<Scenario>,
    trials: Option<usize>,
    methods: Option<Vec<Method>>,
    taus: Option<Vec<f64>>,
    symbols_per_point: Option<u64>,
    out: Option<PathBuf>,
    base: Option<SystemConfig>,
    sweep: Option<Sweep>,
    complexity: Option<ComplexityParams>,
    metadata: Option<Metadata>,
}

fn spec_err(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Spec {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Parse and validate a TOML experiment document.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let de = toml::Deserializer::parse(text).map_err(|e| spec_err("<document>", e.message()))?;
    let raw: RawSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let reason = e.inner().message().to_string();
        spec_err(
            if path == "." {
                "<document>".to_string()
            } else {
                path
            },
            reason,
        )
    })?;
    resolve(raw)
}

/// Render a spec as a document that [`parse_spec`] maps back to it.
pub fn to_toml(spec: &ExperimentSpec) -> Result<String> {
    toml::to_string(spec).map_err(|e| spec_err("<document>", e.to_string()))
}

fn resolve(raw: RawSpec) -> Result<ExperimentSpec> {
    let scenario = raw.scenario.unwrap_or_default();
    let sweep = raw.sweep.unwrap_or_else(|| scenario.default_sweep());
    let taus = match raw.taus {
        Some(t) => Some(t),
        None if scenario.is_link_level() && sweep.axis != "tau" => Some(vec![0.0, 0.3]),
        None => None,
    };
    let spec = ExperimentSpec {
        schema_version: raw.schema_version.unwrap_or(SCHEMA_VERSION),
        scenario,
        trials: raw.trials.unwrap_or(500),
        methods: raw.methods.unwrap_or_else(|| scenario.default_methods()),
        taus,
        symbols_per_point: raw.symbols_per_point.unwrap_or(1_000_000),
        out: raw.out.unwrap_or_else(|| PathBuf::from("results")),
        base: raw.base.unwrap_or_default(),
        sweep,
        complexity: raw
            .complexity
            .unwrap_or_else(|| scenario.default_complexity()),
        metadata: raw.metadata.unwrap_or_default(),
    };
    spec.validate()?;
    Ok(spec)
}

impl ExperimentSpec {
    /// Defaults of one scenario.
    pub fn for_scenario(scenario: Scenario) -> Self {
        resolve(RawSpec {
            scenario: Some(scenario),
            ..RawSpec::default()
        })
        .expect("scenario defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(spec_err(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        if self.trials == 0 {
            return Err(spec_err("trials", "must be >= 1"));
        }
        if self.symbols_per_point == 0 {
            return Err(spec_err("symbols_per_point", "must be >= 1"));
        }
        if self.methods.is_empty() {
            return Err(spec_err("methods", "must name at least one method"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(spec_err(
                    format!("methods[{i}]"),
                    format!("{m} listed twice"),
                ));
            }
            if self.scenario == Scenario::NmseVsIter && *m == Method::RzfDirect {
                return Err(spec_err(
                    format!("methods[{i}]"),
                    "RZF has no iteration axis; nmse_vs_iter takes Kaczmarz methods only",
                ));
            }
        }
        self.base.validate().map_err(|e| prefix(e, "base"))?;
        if self.base.seed > i64::MAX as u64 {
            return Err(spec_err("base.seed", format!("must be <= {}", i64::MAX)));
        }
        if self.metadata.carrier_ghz.is_nan() || self.metadata.carrier_ghz <= 0.0 {
            return Err(spec_err("metadata.carrier_ghz", "must be positive"));
        }

        let axes = self.scenario.axes();
        if !axes.contains(&self.sweep.axis.as_str()) {
            return Err(spec_err(
                "sweep.axis",
                format!(
                    "`{}` is not a sweep axis of {}; expected one of {}",
                    self.sweep.axis,
                    self.scenario,
                    axes.join(", ")
                ),
            ));
        }
        if self.sweep.values.is_empty() {
            return Err(spec_err("sweep.values", "must not be empty"));
        }
        for (i, &v) in self.sweep.values.iter().enumerate() {
            let path = format!("sweep.values[{i}]");
            if !v.is_finite() {
                return Err(spec_err(path, "must be finite"));
            }
            if axis_is_integer(&self.sweep.axis) && (v < 0.0 || v.fract() != 0.0) {
                return Err(spec_err(
                    path,
                    format!("{} takes non-negative integers", self.sweep.axis),
                ));
            }
        }

        match &self.taus {
            Some(_) if !self.scenario.is_link_level() => {
                return Err(spec_err("taus", format!("not used by {}", self.scenario)));
            }
            Some(_) if self.sweep.axis == "tau" => {
                return Err(spec_err("taus", "conflicts with a sweep over tau"));
            }
            Some(t) if t.is_empty() => return Err(spec_err("taus", "must not be empty")),
            Some(t) => {
                for (i, tau) in t.iter().enumerate() {
                    if !(0.0..=1.0).contains(tau) {
                        return Err(spec_err(format!("taus[{i}]"), "must lie in [0,1]"));
                    }
                }
            }
            None => {}
        }

        if self.scenario.is_complexity() {
            let c = &self.complexity;
            for (key, v) in [("m", c.m), ("k", c.k), ("s", c.s), ("t", c.t)] {
                if v == 0 {
                    return Err(spec_err(format!("complexity.{key}"), "must be >= 1"));
                }
            }
            for (i, p) in self.complexity_points().iter().enumerate() {
                if p.m == 0 || p.k == 0 {
                    return Err(spec_err(format!("sweep.values[{i}]"), "must be >= 1"));
                }
            }
        } else if self.scenario.is_link_level() {
            for (i, point) in self.link_points().into_iter().enumerate() {
                point
                    .config
                    .validate()
                    .map_err(|e| prefix(e, &format!("sweep.values[{}]", i / point.tau_count)))?;
            }
        } else if self.sweep.values.iter().any(|&t| t > 1e6) {
            return Err(spec_err(
                "sweep.values",
                "iteration checkpoints above 1e6 are not supported",
            ));
        }
        Ok(())
    }

    /// Resolved configurations of a link-level sweep, sweep value major and
    /// CSI quality minor.
    pub fn link_points(&self) -> Vec<LinkPointSpec> {
        let taus: Vec<Option<f64>> = match &self.taus {
            Some(t) => t.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::with_capacity(self.sweep.values.len() * taus.len());
        for &value in &self.sweep.values {
            for tau in &taus {
                let mut config = self.base.clone();
                set_axis(&mut config, &self.sweep.axis, value);
                if let Some(tau) = tau {
                    config.tau = *tau;
                }
                out.push(LinkPointSpec {
                    value,
                    config,
                    tau_count: taus.len(),
                });
            }
        }
        out
    }

    /// Complexity parameters per sweep value.
    pub fn complexity_points(&self) -> Vec<ComplexityParams> {
        self.sweep
            .values
            .iter()
            .map(|&v| {
                let mut p = self.complexity;
                match self.sweep.axis.as_str() {
                    "k" => p.k = v as u64,
                    "m" => p.m = v as u64,
                    "iterations" => p.t = v as u64,
                    _ => {}
                }
                p
            })
            .collect()
    }
}

/// One link-level operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPointSpec {
    pub value: f64,
    pub config: SystemConfig,
    tau_count: usize,
}

fn axis_is_integer(axis: &str) -> bool {
    matches!(axis, "iterations" | "m" | "k" | "s")
}

fn set_axis(config: &mut SystemConfig, axis: &str, v: f64) {
    match axis {
        "snr_db" => config.snr_db = v,
        "tau" => config.tau = v,
        "sigma2" => config.sigma2 = v,
        "iterations" => config.iterations = v as usize,
        "m" => config.m = v as usize,
        "k" => config.k = v as usize,
        "s" => config.s = v as usize,
        _ => unreachable!("axis checked by validate"),
    }
}

fn prefix(e: Error, at: &str) -> Error {
    match e {
        Error::InvalidParameter { key, reason } => spec_err(format!("{at}.{key}"), reason),
        other => spec_err(at, other.to_string()),
    }
}
