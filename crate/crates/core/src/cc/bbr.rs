//! BBR and BBR+ congestion control.
//!
//! BBR models the path with two windowed filters: BtlBw (max delivery
//! rate over the last 10 x RTprop) and RTprop (min RTT over the last
//! 10 s), and paces at pacing_gain x BtlBw while capping inflight at
//! cwnd_gain x BtlBw x RTprop. Loss does not touch the filters.
//!
//! BBR+ keeps the same skeleton but probes harder — pacing-gain cycle
//! (3/2, 1/2) instead of (5/4, 3/4, 1 x 6) — and compensates the RTprop
//! estimate for RTT variance:
//!
//!   rtprop+ = min_rtt_window + lambda * sqrt(Var(RTT))
//!
//! with the variance taken from time-decayed EWMAs of RTT and RTT^2.
//! lambda = 0 reduces the compensation to plain BBR's windowed minimum.

use crate::cc::ewma::TimeDecayedStats;
use crate::cc::filter::{WindowedMax, WindowedMin};
use crate::cc::{AckInfo, CongestionController};
use crate::time::SimTime;

pub const BBR_CYCLE: [f64; 8] = [1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
pub const BBR_PLUS_CYCLE: [f64; 2] = [1.5, 0.5];

pub const DEFAULT_DECAY_C: f64 = 0.15; // 1/s, ~7 s memory

const HIGH_GAIN: f64 = 2.885; // 2/ln 2
const DRAIN_GAIN: f64 = 1.0 / HIGH_GAIN;
const CWND_GAIN: f64 = 2.0;
const RTPROP_WINDOW: SimTime = SimTime::from_secs(10);
const BTLBW_WINDOW_RTPROPS: f64 = 10.0;
const STARTUP_GROWTH_TARGET: f64 = 1.25;
const STARTUP_FULL_BW_ROUNDS: u32 = 3;
const INITIAL_WINDOW_MSS: u64 = 10;
const MIN_WINDOW_MSS: u64 = 4;
const INITIAL_RTT_S: f64 = 0.1;

/// The RTprop compensation term, exposed for direct verification:
/// `min_rtt + lambda * sqrt(max(0, E(X^2) - E(X)^2))`.
pub fn rtprop_plus_ms(min_rtt_ms: f64, ewma_rtt_ms: f64, ewma_rtt_sq_ms2: f64, lambda: f64) -> f64 {
    let var = (ewma_rtt_sq_ms2 - ewma_rtt_ms * ewma_rtt_ms).max(0.0);
    min_rtt_ms + lambda * var.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Startup,
    Drain,
    ProbeBw,
}

pub struct Bbr {
    mss: u32,
    cycle: &'static [f64],
    lambda: f64,
    name: &'static str,

    mode: Mode,
    bw_filter: WindowedMax,
    rtt_filter: WindowedMin,
    /// Smallest RTT ever seen. The propagation delay of a fixed path does
    /// not rise, so this floors the windowed estimate: without it a standing
    /// queue can hide the floor from the 10 s window, and the resulting
    /// overestimate grows the window further (a divergent feedback loop
    /// that real BBR breaks by draining in probe-rtt).
    run_min_ms: Option<f64>,
    rtt_stats: TimeDecayedStats,

    round_start: SimTime,
    full_bw: f64,
    full_bw_rounds: u32,
    cycle_idx: usize,
    cycle_start: SimTime,

    cwnd: f64,
    pacing: f64,
    dbg_last: f64,
}

impl Bbr {
    pub fn bbr(mss: u32) -> Self {
        Self::build(mss, &BBR_CYCLE, 0.0, DEFAULT_DECAY_C, "bbr")
    }

    pub fn bbr_plus(mss: u32, lambda: f64, decay_c: f64) -> Self {
        Self::build(mss, &BBR_PLUS_CYCLE, lambda, decay_c, "bbrplus")
    }

    fn build(mss: u32, cycle: &'static [f64], lambda: f64, decay_c: f64, name: &'static str) -> Self {
        let init_cwnd = (INITIAL_WINDOW_MSS * mss as u64) as f64;
        Bbr {
            mss,
            cycle,
            lambda,
            name,
            mode: Mode::Startup,
            bw_filter: WindowedMax::new(),
            rtt_filter: WindowedMin::new(),
            run_min_ms: None,
            rtt_stats: TimeDecayedStats::new(decay_c),
            round_start: SimTime::ZERO,
            full_bw: 0.0,
            full_bw_rounds: 0,
            cycle_idx: 0,
            cycle_start: SimTime::ZERO,
            cwnd: init_cwnd,
            pacing: HIGH_GAIN * init_cwnd * 8.0 / INITIAL_RTT_S,
            dbg_last: -1.0,
        }
    }

    fn btlbw_bps(&self) -> Option<f64> {
        self.bw_filter.current()
    }

    /// RTprop in ms, without compensation: the windowed minimum, floored by
    /// the smallest RTT ever observed.
    pub fn rtprop_min_ms(&self) -> Option<f64> {
        match (self.rtt_filter.current(), self.run_min_ms) {
            (Some(w), Some(r)) => Some(w.min(r)),
            (w, r) => w.or(r),
        }
    }

    /// Effective RTprop in ms, variance-compensated when lambda > 0.
    pub fn rtprop_ms(&self) -> Option<f64> {
        let min = self.rtprop_min_ms()?;
        if self.lambda == 0.0 {
            return Some(min);
        }
        let mean = self.rtt_stats.mean()?;
        let mean_sq = self.rtt_stats.mean_sq()?;
        Some(rtprop_plus_ms(min, mean, mean_sq, self.lambda))
    }

    fn bdp_bytes(&self) -> Option<f64> {
        let bw = self.btlbw_bps()?;
        let rtprop_s = self.rtprop_ms()? / 1e3;
        Some(bw / 8.0 * rtprop_s)
    }

    fn pacing_gain(&self) -> f64 {
        match self.mode {
            Mode::Startup => HIGH_GAIN,
            Mode::Drain => DRAIN_GAIN,
            Mode::ProbeBw => self.cycle[self.cycle_idx],
        }
    }

    fn cwnd_gain(&self) -> f64 {
        match self.mode {
            Mode::Startup => HIGH_GAIN,
            Mode::Drain | Mode::ProbeBw => CWND_GAIN,
        }
    }

    fn min_cwnd(&self) -> f64 {
        (MIN_WINDOW_MSS * self.mss as u64) as f64
    }

    fn refresh_outputs(&mut self) {
        if let (Some(bw), Some(min_ms), Some(rtprop_ms)) =
            (self.btlbw_bps(), self.rtprop_min_ms(), self.rtprop_ms())
        {
            // Floor at one packet per RTprop: below that the connection
            // cannot complete a round per RTprop, samples can never measure
            // more than the send spacing, and the estimate pins itself near
            // zero instead of being probed back up.
            let floor = self.mss as f64 * 8.0 / (min_ms / 1e3);
            self.pacing = (self.pacing_gain() * bw).max(floor);
            self.cwnd = (self.cwnd_gain() * bw / 8.0 * (rtprop_ms / 1e3)).max(self.min_cwnd());
        }
    }

    fn advance_mode(&mut self, ack: &AckInfo) {
        let rtprop = SimTime::from_millis_f64(self.rtprop_min_ms().unwrap_or(INITIAL_RTT_S * 1e3));
        match self.mode {
            Mode::Startup => {
                if ack.now >= self.round_start + rtprop {
                    self.round_start = ack.now;
                    let bw = self.btlbw_bps().unwrap_or(0.0);
                    if bw >= self.full_bw * STARTUP_GROWTH_TARGET {
                        self.full_bw = bw;
                        self.full_bw_rounds = 0;
                    } else {
                        self.full_bw_rounds += 1;
                        if self.full_bw_rounds >= STARTUP_FULL_BW_ROUNDS {
                            self.mode = Mode::Drain;
                        }
                    }
                }
            }
            Mode::Drain => {
                if let Some(bdp) = self.bdp_bytes() {
                    if (ack.bytes_in_flight as f64) <= bdp {
                        self.mode = Mode::ProbeBw;
                        self.cycle_idx = 0;
                        self.cycle_start = ack.now;
                    }
                }
            }
            Mode::ProbeBw => {
                // Dwell one RTprop per gain phase.
                if ack.now >= self.cycle_start + rtprop {
                    self.cycle_idx = (self.cycle_idx + 1) % self.cycle.len();
                    self.cycle_start = ack.now;
                }
            }
        }
    }
}

impl CongestionController for Bbr {
    fn on_ack(&mut self, ack: &AckInfo) {
        if let Some(rtt_ms) = ack.rtt_ms {
            self.rtt_filter.update(ack.now, rtt_ms, RTPROP_WINDOW);
            self.run_min_ms = Some(self.run_min_ms.map_or(rtt_ms, |m| m.min(rtt_ms)));
            self.rtt_stats.update(rtt_ms, ack.now);
        }
        if let Some(rate) = ack.delivery_rate_bps {
            let rtprop_s = self.rtprop_min_ms().unwrap_or(INITIAL_RTT_S * 1e3) / 1e3;
            let bw_window = SimTime::from_secs_f64(BTLBW_WINDOW_RTPROPS * rtprop_s);
            self.bw_filter.update(ack.now, rate, bw_window);
            if std::env::var("BBR_DBG").is_ok() {
                let t = ack.now.as_secs_f64();
                if t.floor() > self.dbg_last.floor() {
                    eprintln!(
                        "DBG t={t:7.3} bw={:6.0}k last_sample={:6.0}k gain={:.2} pacing={:6.0}k cwnd={:6.0} bif={:6} rtprop={:5.1} mode={:?}",
                        self.bw_filter.current().unwrap_or(0.0) / 1e3,
                        rate / 1e3, self.pacing_gain(), self.pacing / 1e3,
                        self.cwnd, ack.bytes_in_flight,
                        self.rtprop_min_ms().unwrap_or(-1.0), self.mode
                    );
                }
                self.dbg_last = t;
            }
        }
        self.advance_mode(ack);
        self.refresh_outputs();
    }

    fn on_loss(&mut self, _now: SimTime) {
        // Loss is not a congestion signal for the model; filters age out
        // on their own.
    }

    fn on_rto(&mut self, now: SimTime) {
        // Conservative restart at one (ungained) BDP, but only from samples
        // still inside their windows: a stall longer than the BtlBw window
        // expires the whole bandwidth estimate, and the restart then begins
        // from the minimum window with recovery paced by the probing cycle.
        let rtprop_s = self.rtprop_min_ms().unwrap_or(INITIAL_RTT_S * 1e3) / 1e3;
        let bw_window = SimTime::from_secs_f64(BTLBW_WINDOW_RTPROPS * rtprop_s);
        self.bw_filter.evict(now, bw_window);
        self.rtt_filter.evict(now, RTPROP_WINDOW);
        self.cwnd = self.bdp_bytes().unwrap_or(self.min_cwnd()).max(self.min_cwnd());
        if self.btlbw_bps().is_none() {
            self.pacing = self.pacing_gain() * self.cwnd * 8.0 / rtprop_s;
        }
    }

    fn cwnd_bytes(&self) -> u64 {
        self.cwnd.max(self.mss as f64) as u64
    }

    fn pacing_rate_bps(&self) -> f64 {
        self.pacing
    }

    fn name(&self) -> &'static str {
        self.name
    }
}
