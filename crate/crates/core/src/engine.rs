//! Virtual-time event loop.
//!
//! Events with equal timestamps fire in insertion order (stable FIFO
//! tie-break), which together with the seeded RNG streams makes whole
//! runs bit-reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::time::SimTime;

struct Entry<E> {
    fire_at: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}

impl<E> Eq for Entry<E> {}

impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert so the earliest (and on ties the
        // first-inserted) entry surfaces first.
        (other.fire_at, other.seq).cmp(&(self.fire_at, self.seq))
    }
}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct Engine<E> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Entry<E>>,
}

impl<E> Default for Engine<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Engine<E> {
    pub fn new() -> Self {
        Engine {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Panics if `at` is in the past; scheduling backwards is a bug in the
    /// caller, not a recoverable condition.
    pub fn schedule(&mut self, at: SimTime, payload: E) {
        assert!(
            at >= self.now,
            "scheduled event in the past: at={at} now={}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry {
            fire_at: at,
            seq,
            payload,
        });
    }

    /// Pops the next event due at or before `end`, advancing the clock to it.
    pub fn pop_due(&mut self, end: SimTime) -> Option<(SimTime, E)> {
        if self.heap.peek().is_some_and(|e| e.fire_at <= end) {
            let e = self.heap.pop().unwrap();
            debug_assert!(e.fire_at >= self.now);
            self.now = e.fire_at;
            Some((e.fire_at, e.payload))
        } else {
            None
        }
    }

    /// Processes every event with `fire_at <= end`, then leaves the clock at
    /// `end`. Returns the number of events processed. Handlers may schedule
    /// further events; those within range fire in the same call.
    pub fn run_until<F>(&mut self, end: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Engine<E>, SimTime, E),
    {
        let mut processed = 0;
        while let Some((t, ev)) = self.pop_due(end) {
            handler(self, t, ev);
            processed += 1;
        }
        if end > self.now {
            self.now = end;
        }
        processed
    }
}
