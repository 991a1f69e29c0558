//! Deterministic packet-level simulator of a bulk TCP flow over a
//! high-mobility LTE bottleneck, with CUBIC, BBR, and a variance-aware
//! BBR variant, plus handover-centric trace analytics.

pub mod cc;
pub mod engine;
pub mod gamma;
pub mod link;
pub mod metrics;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod time;
pub mod trace;
pub mod transport;

pub use cc::{AckInfo, CongestionController, DEFAULT_MSS};
pub use engine::Engine;
pub use gamma::{fit_shifted_gamma, GammaFit, GammaFitError};
pub use link::{build_profile, Carrier, HandoverEvent, HoKind, LinkProfile};
pub use metrics::{
    infer_ho_start, instantaneous_impact, near_effect, percentile, summarize, FlowSummary,
    ImpactCurve, NearEffect,
};
pub use rng::RngStream;
pub use scenario::{compare, preset_profile, run_scenario, Scenario, PRESETS};
pub use sim::{run, CcaConfig, SimConfig, SimOutput};
pub use time::SimTime;
pub use trace::{FlowTrace, Record};
