//! CUBIC congestion control.
//!
//! Loss-based: a loss event registers the current window as W_max and
//! multiplicatively decreases cwnd; between losses the window follows the
//! closed-form cubic W(t) = C*(t-K)^3 + W_max, concave up to W_max and
//! convex beyond it.

use crate::cc::{AckInfo, CongestionController};
use crate::time::SimTime;

pub const DEFAULT_C: f64 = 0.4; // MSS / s^3
pub const DEFAULT_BETA: f64 = 0.7;

const INITIAL_WINDOW_MSS: u64 = 10;
const INITIAL_SRTT_S: f64 = 0.1;
// Pacing headroom over cwnd/srtt so pacing never becomes the limiter
// ahead of the window itself.
const PACING_FACTOR: f64 = 2.0;

/// W(t) in bytes for an epoch that started at window `cwnd_epoch` after
/// registering `w_max`. `K = cbrt((w_max - cwnd_epoch) / C)` in MSS units;
/// after a multiplicative decrease (cwnd_epoch = beta * w_max) this is the
/// textbook `K = cbrt(w_max * (1 - beta) / C)`.
pub fn cubic_window(t_since_epoch_s: f64, w_max_bytes: f64, cwnd_epoch_bytes: f64, c: f64, mss: u32) -> f64 {
    let mss_f = mss as f64;
    let w_max = w_max_bytes / mss_f;
    let w0 = cwnd_epoch_bytes / mss_f;
    let k = ((w_max - w0).max(0.0) / c).cbrt();
    let w = c * (t_since_epoch_s - k).powi(3) + w_max;
    (w * mss_f).max(mss_f)
}

pub fn cubic_k(w_max_bytes: f64, cwnd_epoch_bytes: f64, c: f64, mss: u32) -> f64 {
    let mss_f = mss as f64;
    (((w_max_bytes - cwnd_epoch_bytes).max(0.0) / mss_f) / c).cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

pub struct Cubic {
    mss: u32,
    c: f64,
    beta: f64,
    mode: Mode,
    cwnd: f64,
    ssthresh: f64,
    w_max: f64,
    cwnd_epoch: f64,
    epoch_start: Option<SimTime>,
    srtt_s: f64,
}

impl Cubic {
    pub fn new(mss: u32) -> Self {
        Self::with_params(mss, DEFAULT_C, DEFAULT_BETA)
    }

    pub fn with_params(mss: u32, c: f64, beta: f64) -> Self {
        Cubic {
            mss,
            c,
            beta,
            mode: Mode::SlowStart,
            cwnd: (INITIAL_WINDOW_MSS * mss as u64) as f64,
            ssthresh: f64::INFINITY,
            w_max: 0.0,
            cwnd_epoch: 0.0,
            epoch_start: None,
            srtt_s: INITIAL_SRTT_S,
        }
    }

    fn enter_avoidance(&mut self, now: SimTime) {
        self.mode = Mode::CongestionAvoidance;
        self.epoch_start = Some(now);
        self.cwnd_epoch = self.cwnd;
        if self.w_max < self.cwnd {
            self.w_max = self.cwnd;
        }
    }
}

impl CongestionController for Cubic {
    fn on_ack(&mut self, ack: &AckInfo) {
        if let Some(rtt_ms) = ack.rtt_ms {
            self.srtt_s = 0.875 * self.srtt_s + 0.125 * rtt_ms / 1e3;
        }
        match self.mode {
            Mode::SlowStart => {
                self.cwnd += ack.newly_acked as f64;
                if self.cwnd >= self.ssthresh {
                    self.cwnd = self.ssthresh;
                    self.enter_avoidance(ack.now);
                }
            }
            Mode::CongestionAvoidance => {
                let t = (ack.now - self.epoch_start.unwrap()).as_secs_f64();
                self.cwnd = cubic_window(t, self.w_max, self.cwnd_epoch, self.c, self.mss);
            }
            Mode::FastRecovery => {
                // Hold the reduced window until the sender clears the
                // recovery point; growing here would refill the queue
                // before the retransmission gets through.
                if !ack.in_recovery {
                    self.enter_avoidance(ack.now);
                }
            }
        }
    }

    // The sender already limits this to one call per recovery episode, so
    // back-to-back calls mean back-to-back episodes and each one decays
    // the window further.
    fn on_loss(&mut self, _now: SimTime) {
        self.w_max = self.cwnd;
        self.cwnd = (self.cwnd * self.beta).max(self.mss as f64);
        self.ssthresh = self.cwnd;
        self.mode = Mode::FastRecovery;
    }

    fn on_rto(&mut self, _now: SimTime) {
        self.w_max = self.cwnd;
        self.ssthresh = (self.cwnd * self.beta).max(2.0 * self.mss as f64);
        self.cwnd = self.mss as f64;
        self.mode = Mode::SlowStart;
        self.epoch_start = None;
    }

    fn cwnd_bytes(&self) -> u64 {
        self.cwnd.max(self.mss as f64) as u64
    }

    fn pacing_rate_bps(&self) -> f64 {
        PACING_FACTOR * self.cwnd * 8.0 / self.srtt_s
    }

    fn name(&self) -> &'static str {
        "cubic"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MSS: u32 = 1448;

    fn ack(now: SimTime, rtt_ms: f64, acked: u64) -> AckInfo {
        AckInfo {
            now,
            rtt_ms: Some(rtt_ms),
            delivery_rate_bps: Some(8e6),
            newly_acked: acked,
            bytes_in_flight: 0,
            in_recovery: false,
        }
    }

    #[test]
    fn window_at_k_is_w_max() {
        let w_max = 100.0 * MSS as f64;
        let w0 = 0.7 * w_max;
        let k = cubic_k(w_max, w0, 0.4, MSS);
        let w = cubic_window(k, w_max, w0, 0.4, MSS);
        assert!((w - w_max).abs() < 1e-6);
    }

    #[test]
    fn hand_evaluated_closed_form() {
        // c=0.4, beta=0.7, w_max=100 MSS: W(0) = 70 MSS and K = cbrt(75) ~ 4.217 s.
        let w_max = 100.0 * MSS as f64;
        let w0 = 0.7 * w_max;
        let k = cubic_k(w_max, w0, 0.4, MSS);
        assert!((k - 75.0_f64.cbrt()).abs() < 1e-12);
        assert!((k - 4.217).abs() < 1e-3);
        let w0_eval = cubic_window(0.0, w_max, w0, 0.4, MSS);
        assert!((w0_eval - 70.0 * MSS as f64).abs() < 1e-6);
    }

    #[test]
    fn derivative_continuous_through_k() {
        // Polynomial smoothness across the concave-to-convex transition.
        let w_max = 100.0 * MSS as f64;
        let w0 = 0.7 * w_max;
        let k = cubic_k(w_max, w0, 0.4, MSS);
        let h = 1e-6;
        let left = (cubic_window(k, w_max, w0, 0.4, MSS) - cubic_window(k - h, w_max, w0, 0.4, MSS)) / h;
        let right = (cubic_window(k + h, w_max, w0, 0.4, MSS) - cubic_window(k, w_max, w0, 0.4, MSS)) / h;
        assert!((left - right).abs() < 1e-2);
    }

    #[test]
    fn loss_registers_w_max_and_backs_off() {
        let mut cc = Cubic::new(MSS);
        cc.cwnd = 100.0 * MSS as f64;
        cc.mode = Mode::CongestionAvoidance;
        cc.epoch_start = Some(SimTime::ZERO);
        cc.on_loss(SimTime::from_secs(1));
        assert_eq!(cc.w_max, 100.0 * MSS as f64);
        assert!((cc.cwnd - 70.0 * MSS as f64).abs() < 1e-6);
    }

    #[test]
    fn rto_collapses_to_one_mss() {
        let mut cc = Cubic::new(MSS);
        cc.cwnd = 50.0 * MSS as f64;
        cc.on_rto(SimTime::from_secs(1));
        assert_eq!(cc.cwnd_bytes(), MSS as u64);
        assert_eq!(cc.mode, Mode::SlowStart);
    }

    #[test]
    fn avoidance_follows_closed_form_at_sampled_instants() {
        let mut cc = Cubic::new(MSS);
        cc.cwnd = 100.0 * MSS as f64;
        cc.mode = Mode::CongestionAvoidance;
        cc.epoch_start = Some(SimTime::ZERO);
        cc.on_loss(SimTime::ZERO);
        // Recovery exits on the next ack, starting a fresh epoch at t=1s.
        cc.on_ack(&ack(SimTime::from_secs(1), 50.0, MSS as u64));
        let epoch = SimTime::from_secs(1);
        let w_max = 100.0 * MSS as f64;
        let w0 = 70.0 * MSS as f64;
        for ms in (0..8000).step_by(137) {
            let now = epoch + SimTime::from_ms(ms);
            cc.on_ack(&ack(now, 50.0, MSS as u64));
            let expect = cubic_window(ms as f64 / 1e3, w_max, w0, 0.4, MSS);
            assert!(
                (cc.cwnd - expect).abs() <= MSS as f64,
                "t={ms}ms got {} want {expect}",
                cc.cwnd
            );
        }
    }
}
