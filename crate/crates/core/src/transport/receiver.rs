//! Receiver endpoint: cumulative acknowledgments and out-of-order
//! accounting.
//!
//! The out-of-order delay (OOD) of a packet is the time it waits in the
//! receive buffer for earlier-sequence packets before in-order release.

use std::collections::BTreeMap;

use crate::time::SimTime;

#[derive(Debug, Default)]
pub struct Receiver {
    cum_bytes: u64,
    /// Out-of-order packets held for a gap fill: seq -> (size, arrival).
    held: BTreeMap<u64, (u32, SimTime)>,
    ood_samples_ms: Vec<f64>,
}

impl Receiver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cum_bytes(&self) -> u64 {
        self.cum_bytes
    }

    pub fn ood_samples_ms(&self) -> &[f64] {
        &self.ood_samples_ms
    }

    /// Processes one delivered packet; returns the cumulative ack to send.
    pub fn on_packet(&mut self, seq: u64, size: u32, now: SimTime) -> u64 {
        if seq < self.cum_bytes {
            // Duplicate of already-released data; re-ack.
            return self.cum_bytes;
        }
        if seq == self.cum_bytes {
            self.cum_bytes += size as u64;
            self.ood_samples_ms.push(0.0);
            // Gap filled: release everything now contiguous.
            while let Some((&next, &(sz, arrived))) = self.held.first_key_value() {
                if next != self.cum_bytes {
                    break;
                }
                self.held.remove(&next);
                self.cum_bytes += sz as u64;
                self.ood_samples_ms.push((now - arrived).as_millis_f64());
            }
        } else {
            self.held.entry(seq).or_insert((size, now));
        }
        self.cum_bytes
    }
}
