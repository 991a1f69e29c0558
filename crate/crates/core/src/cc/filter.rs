//! Windowed min/max filters over timestamped samples.
//!
//! Monotonic-wedge implementation: O(1) amortized per update, exact with
//! respect to a brute-force scan over all samples still inside the window.
//! The window length is passed per update because the bandwidth filter's
//! window (10 x RTprop) shrinks and grows with the RTprop estimate.

use std::collections::VecDeque;

use crate::time::SimTime;

#[derive(Debug, Clone, Default)]
pub struct WindowedMax {
    wedge: VecDeque<(SimTime, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct WindowedMin {
    wedge: VecDeque<(SimTime, f64)>,
}

impl WindowedMax {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, now: SimTime, value: f64, window: SimTime) -> f64 {
        let cutoff = now.saturating_sub(window);
        while self.wedge.front().is_some_and(|&(t, _)| t < cutoff) {
            self.wedge.pop_front();
        }
        while self.wedge.back().is_some_and(|&(_, v)| v <= value) {
            self.wedge.pop_back();
        }
        self.wedge.push_back((now, value));
        self.wedge.front().unwrap().1
    }

    /// Drop samples older than the window without adding a new one, so the
    /// maximum expires on schedule even when no samples are arriving.
    pub fn evict(&mut self, now: SimTime, window: SimTime) {
        let cutoff = now.saturating_sub(window);
        while self.wedge.front().is_some_and(|&(t, _)| t < cutoff) {
            self.wedge.pop_front();
        }
    }

    pub fn current(&self) -> Option<f64> {
        self.wedge.front().map(|&(_, v)| v)
    }
}

impl WindowedMin {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, now: SimTime, value: f64, window: SimTime) -> f64 {
        let cutoff = now.saturating_sub(window);
        while self.wedge.front().is_some_and(|&(t, _)| t < cutoff) {
            self.wedge.pop_front();
        }
        while self.wedge.back().is_some_and(|&(_, v)| v >= value) {
            self.wedge.pop_back();
        }
        self.wedge.push_back((now, value));
        self.wedge.front().unwrap().1
    }

    /// See [`WindowedMax::evict`].
    pub fn evict(&mut self, now: SimTime, window: SimTime) {
        let cutoff = now.saturating_sub(window);
        while self.wedge.front().is_some_and(|&(t, _)| t < cutoff) {
            self.wedge.pop_front();
        }
    }

    pub fn current(&self) -> Option<f64> {
        self.wedge.front().map(|&(_, v)| v)
    }
}
