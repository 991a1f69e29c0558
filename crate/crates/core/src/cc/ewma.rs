//! Time-decayed exponentially weighted moving averages.
//!
//! Classical EWMA weights samples by arrival count, which couples the
//! estimate to the sending rate. Here the weight of history decays with
//! elapsed wall-clock (virtual) time instead: for a piecewise-constant
//! signal the discrete update below has the same fixpoint as the
//! continuous exponentially weighted time integral.

use crate::time::SimTime;

/// `sample + (prev - sample) * e^(-decay_c * (now - prev_time))`
///
/// `decay_c` is in 1/seconds.
pub fn ewma_time_decay(prev: f64, prev_time: SimTime, sample: f64, now: SimTime, decay_c: f64) -> f64 {
    debug_assert!(now >= prev_time);
    let dt = (now - prev_time).as_secs_f64();
    sample + (prev - sample) * (-decay_c * dt).exp()
}

/// Tracks E(X) and E(X^2) with time-based decay; variance is clamped at
/// zero since the two estimates can momentarily cross under floating point.
#[derive(Debug, Clone)]
pub struct TimeDecayedStats {
    decay_c: f64,
    mean: f64,
    mean_sq: f64,
    last: SimTime,
    seen: bool,
}

impl TimeDecayedStats {
    pub fn new(decay_c: f64) -> Self {
        assert!(decay_c > 0.0);
        TimeDecayedStats {
            decay_c,
            mean: 0.0,
            mean_sq: 0.0,
            last: SimTime::ZERO,
            seen: false,
        }
    }

    pub fn update(&mut self, sample: f64, now: SimTime) {
        if !self.seen {
            self.mean = sample;
            self.mean_sq = sample * sample;
            self.seen = true;
        } else {
            self.mean = ewma_time_decay(self.mean, self.last, sample, now, self.decay_c);
            self.mean_sq =
                ewma_time_decay(self.mean_sq, self.last, sample * sample, now, self.decay_c);
        }
        self.last = now;
    }

    pub fn mean(&self) -> Option<f64> {
        self.seen.then_some(self.mean)
    }

    pub fn mean_sq(&self) -> Option<f64> {
        self.seen.then_some(self.mean_sq)
    }

    pub fn variance(&self) -> Option<f64> {
        self.seen
            .then_some((self.mean_sq - self.mean * self.mean).max(0.0))
    }
}
