//! Sweep execution and CSV persistence.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::channel::ChannelModel;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::harness::spec::{to_toml, ComplexityParams, ExperimentSpec, LinkPointSpec, Scenario};
use crate::linalg::NeumaierSum;
use crate::metrics::{complexity_count, nmse_curve, LinkSimulation, MetricsReport};
use crate::precoding::{CsiSource, Method};
use crate::rng::{role, Streams};

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Outcome of one (sweep point, method) group.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub method: Method,
    /// Sweep-axis value of the point.
    pub value: f64,
    pub config_hash: String,
    pub result: std::result::Result<MetricsReport, String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub points: Vec<PointOutcome>,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// First 16 hex digits of the SHA-256 of a value's TOML rendering.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let text = toml::to_string(value).expect("config types render as TOML");
    Sha256::digest(text.as_bytes())[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Run every point of `spec` without touching the filesystem.
pub fn execute(spec: &ExperimentSpec) -> Result<Vec<PointOutcome>> {
    spec.validate()?;
    let streams = Streams::new(spec.base.seed);
    Ok(match spec.scenario {
        Scenario::SeVsSnr | Scenario::BerVsSnr => link_points(spec, &streams),
        Scenario::NmseVsIter => nmse_points(spec, &streams),
        Scenario::ComplexityVsK | Scenario::ComplexityVsM | Scenario::TableII => {
            complexity_points(spec)
        }
    })
}

/// Run `spec` and write `<out>/<scenario>.csv` plus the manifest.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let points = execute(spec)?;
    let (csv_path, manifest_path) = write_outputs(spec, &points, &spec.out)?;
    Ok(ExperimentOutput {
        points,
        csv_path,
        manifest_path,
    })
}

fn csi_for(config: &SystemConfig) -> CsiSource {
    if config.tau > 0.0 {
        CsiSource::Estimated
    } else {
        CsiSource::Perfect
    }
}

fn link_points(spec: &ExperimentSpec, streams: &Streams) -> Vec<PointOutcome> {
    let mut out = Vec::new();
    for point in spec.link_points() {
        let hash = config_hash(&point.config);
        for &method in &spec.methods {
            let result = run_link_point(spec, &point, method, streams).map_err(|e| {
                e.with_context(format!(
                    "{} = {}, tau = {}, {method}",
                    spec.sweep.axis, point.value, point.config.tau
                ))
                .to_string()
            });
            out.push(PointOutcome {
                method,
                value: point.value,
                config_hash: hash.clone(),
                result,
            });
        }
    }
    out
}

fn run_link_point(
    spec: &ExperimentSpec,
    point: &LinkPointSpec,
    method: Method,
    streams: &Streams,
) -> Result<MetricsReport> {
    let config = &point.config;
    let slots = match spec.scenario {
        Scenario::BerVsSnr => {
            let per_slot = (spec.trials * config.k) as u64;
            spec.symbols_per_point.div_ceil(per_slot) as usize
        }
        _ => 0,
    };
    let sim = LinkSimulation {
        method,
        csi: csi_for(config),
        trials: spec.trials,
        slots_per_trial: slots,
    };
    let link = sim.run(config, streams)?;
    let k_max = config.k_sub().into_iter().max().unwrap_or(0) as u64;
    Ok(MetricsReport {
        method,
        snr_db: config.snr_db,
        tau: config.tau,
        sinr: link.sinr,
        se: link.se,
        se_total: link.se_total,
        ber: link.ber,
        nmse_curve: Vec::new(),
        complexity: complexity_count(
            method,
            config.m_sub() as u64,
            k_max,
            config.s as u64,
            config.iterations as u64,
        ),
        trials: link.trials,
        seed: config.seed,
    })
}

/// Mean and standard error of the NMSE at every checkpoint, over all
/// subarray systems of every trial.
pub fn nmse_ensemble(
    config: &SystemConfig,
    method: Method,
    checkpoints: &[usize],
    trials: usize,
    streams: &Streams,
) -> Result<Vec<(usize, f64, f64)>> {
    let mode = method
        .selection_mode()
        .ok_or_else(|| Error::param("method", format!("{method} is not iterative")))?;
    if trials == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let model = ChannelModel::new(config)?;
    let xi = config.xi();
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let real = model.sample_trial(streams, t);
            let trial = streams.child(t);
            (0..config.s)
                .map(|s| {
                    let mut rng = trial.rng(&[role::KACZMARZ, s as u64]);
                    nmse_curve(&real.h[s][s], xi, mode, checkpoints, &mut rng)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let curves: Vec<&Vec<(usize, f64)>> = per_trial.iter().flatten().collect();
    let n = curves.len() as f64;
    Ok(checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mean = curves
                .iter()
                .map(|c| c[i].1)
                .collect::<NeumaierSum>()
                .value()
                / n;
            let var = curves
                .iter()
                .map(|c| (c[i].1 - mean).powi(2))
                .collect::<NeumaierSum>()
                .value()
                / (n - 1.0).max(1.0);
            (t, mean, (var / n).sqrt())
        })
        .collect())
}

fn nmse_points(spec: &ExperimentSpec, streams: &Streams) -> Vec<PointOutcome> {
    let checkpoints: Vec<usize> = spec.sweep.values.iter().map(|&v| v as usize).collect();
    let hash = config_hash(&spec.base);
    let mut out = Vec::new();
    for &method in &spec.methods {
        let curve = nmse_ensemble(&spec.base, method, &checkpoints, spec.trials, streams);
        for (i, &t) in checkpoints.iter().enumerate() {
            let result = match &curve {
                Ok(c) => Ok(MetricsReport {
                    method,
                    snr_db: spec.base.snr_db,
                    tau: 0.0,
                    sinr: Vec::new(),
                    se: Vec::new(),
                    se_total: f64::NAN,
                    ber: None,
                    nmse_curve: vec![(t, c[i].1)],
                    complexity: 0,
                    trials: spec.trials,
                    seed: spec.base.seed,
                }),
                Err(e) => Err(format!("{method}: {e}")),
            };
            out.push(PointOutcome {
                method,
                value: t as f64,
                config_hash: hash.clone(),
                result,
            });
        }
    }
    out
}

fn complexity_points(spec: &ExperimentSpec) -> Vec<PointOutcome> {
    let mut out = Vec::new();
    for (p, &value) in spec.complexity_points().iter().zip(&spec.sweep.values) {
        let hash = config_hash(p);
        for &method in &spec.methods {
            out.push(PointOutcome {
                method,
                value,
                config_hash: hash.clone(),
                result: Ok(MetricsReport {
                    method,
                    snr_db: f64::NAN,
                    tau: f64::NAN,
                    sinr: Vec::new(),
                    se: Vec::new(),
                    se_total: f64::NAN,
                    ber: None,
                    nmse_curve: Vec::new(),
                    complexity: complexity_count(method, p.m, p.k, p.s, p.t),
                    trials: 0,
                    seed: spec.base.seed,
                }),
            });
        }
    }
    out
}

#[derive(Serialize)]
struct LinkRow<'a> {
    scenario: &'a str,
    axis: &'a str,
    value: f64,
    method: &'a str,
    snr_db: f64,
    tau: f64,
    se_total: Option<f64>,
    ber: Option<f64>,
    ber_std_err: Option<f64>,
    bits: Option<u64>,
    seed: u64,
    trials: usize,
    config_hash: &'a str,
    status: &'a str,
    error: &'a str,
}

#[derive(Serialize)]
struct NmseRow<'a> {
    scenario: &'a str,
    method: &'a str,
    t: usize,
    nmse: Option<f64>,
    snr_db: f64,
    seed: u64,
    trials: usize,
    config_hash: &'a str,
    status: &'a str,
    error: &'a str,
}

#[derive(Serialize)]
struct ComplexityRow<'a> {
    scenario: &'a str,
    scheme: &'a str,
    m: u64,
    k: u64,
    s: u64,
    t: u64,
    ops: u64,
    seed: u64,
    trials: usize,
    config_hash: &'a str,
    status: &'a str,
    error: &'a str,
}

fn status<T>(r: &std::result::Result<T, String>) -> (&'static str, &str) {
    match r {
        Ok(_) => ("ok", ""),
        Err(e) => ("error", e.as_str()),
    }
}

/// Render the scenario CSV.
pub fn render_csv(spec: &ExperimentSpec, points: &[PointOutcome]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let scenario = spec.scenario.name();
    match spec.scenario {
        Scenario::SeVsSnr | Scenario::BerVsSnr => {
            let configs = spec.link_points();
            let per_config = spec.methods.len();
            for (i, p) in points.iter().enumerate() {
                let config = &configs[i / per_config].config;
                let (st, err) = status(&p.result);
                let ok = p.result.as_ref().ok();
                let ber = ok.and_then(|r| r.ber);
                w.serialize(LinkRow {
                    scenario,
                    axis: &spec.sweep.axis,
                    value: p.value,
                    method: p.method.label(),
                    snr_db: config.snr_db,
                    tau: config.tau,
                    se_total: ok.map(|r| r.se_total),
                    ber: ber.map(|b| b.ber),
                    ber_std_err: ber.map(|b| b.std_err),
                    bits: ber.map(|b| b.bits),
                    seed: config.seed,
                    trials: spec.trials,
                    config_hash: &p.config_hash,
                    status: st,
                    error: err,
                })?;
            }
        }
        Scenario::NmseVsIter => {
            for p in points {
                let (st, err) = status(&p.result);
                w.serialize(NmseRow {
                    scenario,
                    method: p.method.label(),
                    t: p.value as usize,
                    nmse: p.result.as_ref().ok().map(|r| r.nmse_curve[0].1),
                    snr_db: spec.base.snr_db,
                    seed: spec.base.seed,
                    trials: spec.trials,
                    config_hash: &p.config_hash,
                    status: st,
                    error: err,
                })?;
            }
        }
        Scenario::ComplexityVsK | Scenario::ComplexityVsM | Scenario::TableII => {
            let params = spec.complexity_points();
            let per_config = spec.methods.len();
            for (i, p) in points.iter().enumerate() {
                let c = params[i / per_config];
                let (st, err) = status(&p.result);
                w.serialize(ComplexityRow {
                    scenario,
                    scheme: p.method.label(),
                    m: c.m,
                    k: c.k,
                    s: c.s,
                    t: c.t,
                    ops: p.result.as_ref().map(|r| r.complexity).unwrap_or(0),
                    seed: spec.base.seed,
                    trials: 0,
                    config_hash: &p.config_hash,
                    status: st,
                    error: err,
                })?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

#[derive(Serialize)]
#[serde(untagged)]
enum ConfigRecord {
    System(SystemConfig),
    Complexity(ComplexityParams),
}

#[derive(Serialize)]
struct ConfigEntry {
    hash: String,
    config: ConfigRecord,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    scenario: &'a str,
    seed: u64,
    trials: usize,
    outputs: Vec<String>,
    spec: toml::Table,
    configs: Vec<ConfigEntry>,
}

/// Render the manifest: tool version, seed, the resolved spec and the
/// configuration behind every hash appearing in the CSV.
pub fn render_manifest(spec: &ExperimentSpec) -> Result<String> {
    let mut configs: Vec<ConfigEntry> = Vec::new();
    let mut push = |hash: String, config: ConfigRecord| {
        if !configs.iter().any(|c| c.hash == hash) {
            configs.push(ConfigEntry { hash, config });
        }
    };
    match spec.scenario {
        Scenario::SeVsSnr | Scenario::BerVsSnr => {
            for p in spec.link_points() {
                push(config_hash(&p.config), ConfigRecord::System(p.config));
            }
        }
        Scenario::NmseVsIter => push(
            config_hash(&spec.base),
            ConfigRecord::System(spec.base.clone()),
        ),
        _ => {
            for p in spec.complexity_points() {
                push(config_hash(&p), ConfigRecord::Complexity(p));
            }
        }
    }
    let spec_table: toml::Table = toml::from_str(&to_toml(spec)?).map_err(|e| Error::Spec {
        path: "<document>".into(),
        reason: e.to_string(),
    })?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        scenario: spec.scenario.name(),
        seed: spec.base.seed,
        trials: spec.trials,
        outputs: vec![csv_name(spec)],
        spec: spec_table,
        configs,
    };
    toml::to_string(&manifest).map_err(|e| Error::Spec {
        path: "manifest".into(),
        reason: e.to_string(),
    })
}

pub fn csv_name(spec: &ExperimentSpec) -> String {
    format!("{}.csv", spec.scenario.name())
}

/// Write the scenario CSV and manifest into `dir`, creating it if needed.
pub fn write_outputs(
    spec: &ExperimentSpec,
    points: &[PointOutcome],
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let ctx = |e: std::io::Error, what: &Path| {
        Error::Io(e).with_context(format!("writing {}", what.display()))
    };
    fs::create_dir_all(dir).map_err(|e| ctx(e, dir))?;
    let csv_path = dir.join(csv_name(spec));
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&csv_path, render_csv(spec, points)?).map_err(|e| ctx(e, &csv_path))?;
    fs::write(&manifest_path, render_manifest(spec)?).map_err(|e| ctx(e, &manifest_path))?;
    Ok((csv_path, manifest_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::parse_spec;

    #[test]
    fn table2_rows() {
        let spec = ExperimentSpec::for_scenario(Scenario::TableII);
        let pts = execute(&spec).unwrap();
        let ops: Vec<u64> = pts
            .iter()
            .map(|p| p.result.as_ref().unwrap().complexity)
            .collect();
        assert_eq!(ops, vec![109888, 51456, 59392]);
        let csv = String::from_utf8(render_csv(&spec, &pts).unwrap()).unwrap();
        assert!(
            csv.starts_with("scenario,scheme,m,k,s,t,ops,seed,trials,config_hash,status,error\n")
        );
        assert!(csv.contains("table2,SwoR-rKA,64,16,4,200,59392,"));
    }

    #[test]
    fn group_count_matches_sweep_times_methods() {
        let spec = parse_spec(
            "scenario = \"se_vs_snr\"\ntrials = 2\ntaus = [0.0]\n\
             [base]\nm = 16\ns = 2\nk = 4\niterations = 20\n\
             [sweep]\naxis = \"snr_db\"\nvalues = [0.0, 10.0, 20.0]\n",
        )
        .unwrap();
        let pts = execute(&spec).unwrap();
        assert_eq!(pts.len(), 3 * 3);
        assert!(pts.iter().all(|p| p.result.is_ok()));
    }

    #[test]
    fn failing_points_become_error_rows() {
        // Zero trials never passes validation; bypass it to force a runtime
        // failure at every point.
        let mut spec =
            parse_spec("trials = 1\ntaus = [0.0]\n[base]\nm = 8\ns = 1\nk = 2\n").unwrap();
        let streams = Streams::new(1);
        spec.trials = 0;
        let pts = link_points(&spec, &streams);
        assert_eq!(pts.len(), 4 * 3);
        assert!(pts.iter().all(|p| p.result.is_err()));
        let csv = String::from_utf8(render_csv(&spec, &pts).unwrap()).unwrap();
        assert_eq!(csv.lines().count(), 1 + 12);
        assert!(csv.lines().skip(1).all(|l| l.contains(",error,")));
        assert!(csv.contains("empty ensemble"));
    }

    #[test]
    fn hash_identifies_config() {
        let a = SystemConfig::default();
        let b = SystemConfig {
            snr_db: 15.0,
            ..a.clone()
        };
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 16);
    }

    #[test]
    fn manifest_lists_every_hash() {
        let spec = ExperimentSpec::for_scenario(Scenario::SeVsSnr);
        let manifest = render_manifest(&spec).unwrap();
        for p in spec.link_points() {
            assert!(manifest.contains(&config_hash(&p.config)));
        }
        let parsed: toml::Table = toml::from_str(&manifest).unwrap();
        assert_eq!(parsed["version"].as_str(), Some(env!("CARGO_PKG_VERSION")));
    }
}
