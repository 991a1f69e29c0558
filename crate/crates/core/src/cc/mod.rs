//! Pluggable congestion controllers.
//!
//! Controllers are pure state machines over ack/loss/timeout inputs; they
//! never read a clock of their own, so a run is reproducible from its
//! event stream alone.

pub mod bbr;
pub mod cubic;
pub mod ewma;
pub mod filter;

use crate::time::SimTime;

pub const DEFAULT_MSS: u32 = 1448;

/// Everything a controller learns from one cumulative ack.
#[derive(Debug, Clone, Copy)]
pub struct AckInfo {
    pub now: SimTime,
    /// RTT sample in ms, taken from a never-retransmitted packet. None
    /// when the ack covers only retransmissions (Karn's rule).
    pub rtt_ms: Option<f64>,
    /// Delivery-rate sample in bits/s. None when the acked packet was
    /// retransmitted and the ack plausibly belongs to the earlier copy,
    /// which would make the elapsed time (and so the rate) meaningless.
    pub delivery_rate_bps: Option<f64>,
    /// Bytes newly acknowledged by this ack.
    pub newly_acked: u64,
    /// Bytes still in flight after this ack.
    pub bytes_in_flight: u64,
    /// True while the sender is still inside a loss-recovery episode
    /// (the recovery point has not been cumulatively acked yet).
    pub in_recovery: bool,
}

pub trait CongestionController: Send {
    fn on_ack(&mut self, ack: &AckInfo);
    fn on_loss(&mut self, now: SimTime);
    fn on_rto(&mut self, now: SimTime);
    fn cwnd_bytes(&self) -> u64;
    fn pacing_rate_bps(&self) -> f64;
    fn name(&self) -> &'static str;
}
