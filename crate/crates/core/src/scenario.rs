//! Scenario configs and ensemble runs.
//!
//! A scenario names a link preset (speed + carrier), a congestion
//! controller, and a seed list. Running one produces, per seed, a trace
//! CSV and a summary JSON, plus an ensemble aggregate and a manifest that
//! `compare` consumes to line up controllers on identical conditions.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::link::{build_profile, Carrier, HandoverEvent, HoKind, LinkError, LinkProfile};
use crate::metrics::{summarize, FlowSummary, MetricsError};
use crate::sim::{run, CcaConfig, SimConfig};
use crate::time::SimTime;

pub const PRESETS: [&str; 8] = [
    "static-A",
    "static-B",
    "hsr-200-A",
    "hsr-200-B",
    "hsr-300-A",
    "hsr-300-B",
    "hsr-350-A",
    "hsr-350-B",
];

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown preset {0:?}; valid presets: {}", PRESETS.join(", "))]
    UnknownPreset(String),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("bad scripted handover: {0}")]
    BadHandover(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("manifests not comparable: {0}")]
    Mismatch(String),
}

/// `speed-carrier` preset name -> link profile.
pub fn preset_profile(name: &str) -> Result<LinkProfile, ScenarioError> {
    let (speed_part, carrier_part) = name
        .rsplit_once('-')
        .ok_or_else(|| ScenarioError::UnknownPreset(name.into()))?;
    let carrier = match carrier_part {
        "A" => Carrier::A,
        "B" => Carrier::B,
        _ => return Err(ScenarioError::UnknownPreset(name.into())),
    };
    let speed = match speed_part {
        "static" => 0,
        "hsr-200" => 200,
        "hsr-300" => 300,
        "hsr-350" => 350,
        _ => return Err(ScenarioError::UnknownPreset(name.into())),
    };
    Ok(build_profile(speed, carrier)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedHandover {
    /// "I", "II", or "III".
    pub kind: String,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub preset: String,
    pub cca: CcaConfig,
    #[serde(default = "default_duration_s")]
    pub duration_s: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Coefficient of variation of PHY-rate jitter; presets default to 0.
    #[serde(default)]
    pub phy_jitter: Option<f64>,
    #[serde(default)]
    pub buffer_bytes: Option<u64>,
    #[serde(default)]
    pub base_owd_ms: Option<f64>,
    #[serde(default)]
    pub random_loss: Option<f64>,
    /// None = bulk flow for the whole duration.
    #[serde(default)]
    pub flow_size: Option<u64>,
    /// Fixed handover schedule instead of sampling from the preset.
    #[serde(default)]
    pub handovers: Option<Vec<ScriptedHandover>>,
}

fn default_duration_s() -> f64 {
    150.0
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

impl Scenario {
    pub fn from_toml_str(s: &str) -> Result<Scenario, ScenarioError> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Scenario, ScenarioError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn profile(&self) -> Result<LinkProfile, ScenarioError> {
        let mut p = preset_profile(&self.preset)?;
        if let Some(j) = self.phy_jitter {
            p.phy_jitter = j;
        }
        if let Some(b) = self.buffer_bytes {
            p.buffer_bytes = b;
        }
        if let Some(o) = self.base_owd_ms {
            p.base_owd_ms = o;
        }
        if let Some(l) = self.random_loss {
            p.random_loss = l;
        }
        Ok(p)
    }

    fn scripted_schedule(&self) -> Result<Option<Vec<HandoverEvent>>, ScenarioError> {
        let Some(list) = &self.handovers else {
            return Ok(None);
        };
        let mut events = Vec::with_capacity(list.len());
        for h in list {
            let kind = HoKind::from_label(&h.kind)
                .ok_or_else(|| ScenarioError::BadHandover(format!("kind {:?}", h.kind)))?;
            if !(h.start_s >= 0.0 && h.end_s > h.start_s) {
                return Err(ScenarioError::BadHandover(format!(
                    "interval {}..{}",
                    h.start_s, h.end_s
                )));
            }
            events.push(HandoverEvent {
                kind,
                ho_start: SimTime::from_secs_f64(h.start_s),
                ho_end: SimTime::from_secs_f64(h.end_s),
            });
        }
        events.sort_by_key(|e| e.ho_start);
        Ok(Some(events))
    }

    pub fn sim_config(&self, seed: u64) -> Result<SimConfig, ScenarioError> {
        let mut cfg = SimConfig::new(
            self.profile()?,
            self.cca.clone(),
            SimTime::from_secs_f64(self.duration_s),
            seed,
        );
        cfg.flow_size = self.flow_size;
        cfg.handovers = self.scripted_schedule()?;
        Ok(cfg)
    }

    /// Filesystem-safe run label, e.g. `hsr-350-B-bbrplus-l0.5`.
    pub fn slug(&self) -> String {
        let cca = match &self.cca {
            CcaConfig::Cubic => "cubic".into(),
            CcaConfig::Bbr => "bbr".into(),
            CcaConfig::BbrPlus { lambda, .. } => format!("bbrplus-l{lambda}"),
        };
        format!("{}-{cca}", self.preset)
    }

    pub fn config_sha256(&self) -> String {
        let canonical = toml::to_string(self).expect("scenario serializes");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        format!("{:x}", h.finalize())
    }
}

/// Cross-seed aggregate written alongside the per-seed summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ensemble {
    pub goodput_mean_mbps: f64,
    pub goodput_std_mbps: f64,
    pub loss_rate_mean: f64,
    /// RTT percentiles averaged across seeds; None if no RTT samples.
    pub rtt_p25_ms: Option<f64>,
    pub rtt_p50_ms: Option<f64>,
    pub rtt_p75_ms: Option<f64>,
    pub seeds: usize,
}

impl Ensemble {
    pub fn from_summaries(summaries: &[FlowSummary]) -> Ensemble {
        let n = summaries.len() as f64;
        let goodputs: Vec<f64> = summaries.iter().map(|s| s.goodput_mbps).collect();
        let mean = goodputs.iter().sum::<f64>() / n;
        let var = goodputs.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n;
        let rtt_avg = |f: fn(&crate::metrics::Percentiles) -> f64| {
            let vals: Vec<f64> = summaries.iter().filter_map(|s| s.rtt_ms.map(|p| f(&p))).collect();
            if vals.is_empty() {
                None
            } else {
                Some(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        };
        Ensemble {
            goodput_mean_mbps: mean,
            goodput_std_mbps: var.sqrt(),
            loss_rate_mean: summaries.iter().map(|s| s.loss_rate).sum::<f64>() / n,
            rtt_p25_ms: rtt_avg(|p| p.p25),
            rtt_p50_ms: rtt_avg(|p| p.p50),
            rtt_p75_ms: rtt_avg(|p| p.p75),
            seeds: summaries.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub preset: String,
    pub cca: CcaConfig,
    pub duration_s: f64,
    pub seeds: Vec<u64>,
    pub config_sha256: String,
    pub trace_files: Vec<String>,
    pub summary_files: Vec<String>,
    pub ensemble_file: String,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
    pub ensemble: Ensemble,
}

/// Runs all seeds (in parallel), writing `trace_<seed>.csv`,
/// `summary_<seed>.json`, `ensemble.json`, and `manifest.json` under
/// `<out_root>/<slug>/`.
pub fn run_scenario(scenario: &Scenario, out_root: &Path) -> Result<RunArtifacts, ScenarioError> {
    let dir = out_root.join(scenario.slug());
    fs::create_dir_all(&dir)?;

    let results: Vec<Result<(u64, FlowSummary), ScenarioError>> = scenario
        .seeds
        .par_iter()
        .map(|&seed| {
            let out = run(&scenario.sim_config(seed)?);
            let trace_path = dir.join(format!("trace_{seed}.csv"));
            out.trace.write_csv_file(&trace_path)?;
            let summary = summarize(&out.trace)?;
            let summary_path = dir.join(format!("summary_{seed}.json"));
            fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
            Ok((seed, summary))
        })
        .collect();

    let mut summaries = Vec::with_capacity(scenario.seeds.len());
    for r in results {
        summaries.push(r?.1);
    }
    let ensemble = Ensemble::from_summaries(&summaries);
    fs::write(dir.join("ensemble.json"), serde_json::to_string_pretty(&ensemble)?)?;

    let manifest = Manifest {
        preset: scenario.preset.clone(),
        cca: scenario.cca.clone(),
        duration_s: scenario.duration_s,
        seeds: scenario.seeds.clone(),
        config_sha256: scenario.config_sha256(),
        trace_files: scenario.seeds.iter().map(|s| format!("trace_{s}.csv")).collect(),
        summary_files: scenario.seeds.iter().map(|s| format!("summary_{s}.json")).collect(),
        ensemble_file: "ensemble.json".into(),
    };
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;

    Ok(RunArtifacts { dir, manifest_path, manifest, ensemble })
}

#[derive(Debug)]
pub struct CompareRow {
    pub label: String,
    pub ensemble: Ensemble,
}

#[derive(Debug)]
pub struct CompareReport {
    pub preset: String,
    pub seeds: Vec<u64>,
    pub rows: Vec<CompareRow>,
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "preset {}  ({} seeds)", self.preset, self.seeds.len())?;
        writeln!(
            f,
            "{:<24} {:>16} {:>10} {:>24}",
            "controller", "goodput (Mbps)", "loss", "RTT p25/p50/p75 (ms)"
        )?;
        for row in &self.rows {
            let e = &row.ensemble;
            let rtt = match (e.rtt_p25_ms, e.rtt_p50_ms, e.rtt_p75_ms) {
                (Some(a), Some(b), Some(c)) => format!("{a:.0}/{b:.0}/{c:.0}"),
                _ => "-".into(),
            };
            writeln!(
                f,
                "{:<24} {:>7.2} +/- {:<5.2} {:>9.4}% {:>24}",
                row.label,
                e.goodput_mean_mbps,
                e.goodput_std_mbps,
                e.loss_rate_mean * 100.0,
                rtt
            )?;
        }
        Ok(())
    }
}

/// Lines up runs of different controllers over the same preset and seed
/// list, paired by seed.
pub fn compare(manifest_paths: &[PathBuf]) -> Result<CompareReport, ScenarioError> {
    if manifest_paths.len() < 2 {
        return Err(ScenarioError::Mismatch("need at least 2 manifests".into()));
    }
    let mut rows = Vec::new();
    let mut key: Option<(String, Vec<u64>, f64)> = None;
    for path in manifest_paths {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let ensemble: Ensemble =
            serde_json::from_str(&fs::read_to_string(dir.join(&manifest.ensemble_file))?)?;
        match &key {
            None => key = Some((manifest.preset.clone(), manifest.seeds.clone(), manifest.duration_s)),
            Some((preset, seeds, duration)) => {
                if *preset != manifest.preset {
                    return Err(ScenarioError::Mismatch(format!(
                        "preset {} vs {}",
                        preset, manifest.preset
                    )));
                }
                if *seeds != manifest.seeds {
                    return Err(ScenarioError::Mismatch("seed lists differ".into()));
                }
                if *duration != manifest.duration_s {
                    return Err(ScenarioError::Mismatch("durations differ".into()));
                }
            }
        }
        rows.push(CompareRow { label: manifest.cca.label(), ensemble });
    }
    let (preset, seeds, _) = key.unwrap();
    Ok(CompareReport { preset, seeds, rows })
}
