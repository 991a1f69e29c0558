//! Trace analytics: flow summaries and handover-centric rate curves.
//!
//! Everything here runs off a `FlowTrace` alone, so imported traces and
//! fresh simulation output go through identical code paths.
//!
//! Rate curves use the radio-layer delivery series (`link-deliver`
//! records): the rate over a window is the bytes delivered inside it
//! divided by its length, normalized by the whole-trace mean delivery
//! rate (outage intervals included).

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::link::HoKind;
use crate::time::SimTime;
use crate::trace::{FlowTrace, Record};
use crate::transport::Receiver;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("trace has no records")]
    EmptyTrace,
    #[error("no usable Type {0} handovers in trace")]
    NoHandovers(&'static str),
}

/// Linear-interpolation percentile, `p` in [0, 100]. Sorts a copy.
pub fn percentile(samples: &[f64], p: f64) -> f64 {
    assert!(!samples.is_empty(), "percentile of empty sample");
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (p / 100.0) * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        let w = rank - lo as f64;
        v[lo] * (1.0 - w) + v[hi] * w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Percentiles {
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub mean: f64,
    pub samples: usize,
}

impl Percentiles {
    pub fn of(samples: &[f64]) -> Option<Percentiles> {
        if samples.is_empty() {
            return None;
        }
        Some(Percentiles {
            p25: percentile(samples, 25.0),
            p50: percentile(samples, 50.0),
            p75: percentile(samples, 75.0),
            mean: samples.iter().sum::<f64>() / samples.len() as f64,
            samples: samples.len(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub duration_s: f64,
    /// Unique application bytes acknowledged, over the trace duration.
    pub goodput_mbps: f64,
    /// All radio-layer deliveries, retransmissions included.
    pub throughput_mbps: f64,
    pub sent_packets: u64,
    pub retx_packets: u64,
    pub dropped_packets: u64,
    /// Drops / sends.
    pub loss_rate: f64,
    pub rtt_ms: Option<Percentiles>,
    /// Receive-buffer out-of-order delays, replayed from deliveries.
    pub ood_ms: Option<Percentiles>,
    /// Completed handovers by type: [I, II, III].
    pub handovers: [u64; 3],
}

/// One completed handover as it appears in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandoverSpan {
    pub kind: HoKind,
    pub start: SimTime,
    pub end: SimTime,
}

pub fn handover_spans(trace: &FlowTrace) -> Vec<HandoverSpan> {
    let mut spans = Vec::new();
    let mut pending: Option<(HoKind, SimTime)> = None;
    for &(t, r) in &trace.records {
        match r {
            Record::HoStart { kind } => pending = Some((kind, t)),
            Record::HoEnd { kind } => {
                if let Some((k, start)) = pending.take() {
                    if k == kind {
                        spans.push(HandoverSpan { kind, start, end: t });
                    }
                }
            }
            _ => {}
        }
    }
    spans
}

/// Delivery series with prefix sums for O(log n) windowed-rate queries.
struct DeliverySeries {
    times_us: Vec<u64>,
    /// prefix[i] = bytes delivered strictly before times_us index i.
    prefix: Vec<u64>,
}

impl DeliverySeries {
    fn from_trace(trace: &FlowTrace) -> DeliverySeries {
        let mut times_us = Vec::new();
        let mut prefix = vec![0u64];
        for &(t, r) in &trace.records {
            if let Record::LinkDeliver { bytes, .. } = r {
                times_us.push(t.as_us());
                prefix.push(prefix.last().unwrap() + bytes as u64);
            }
        }
        DeliverySeries { times_us, prefix }
    }

    fn total_bytes(&self) -> u64 {
        *self.prefix.last().unwrap()
    }

    /// Bytes delivered in [from, to) in microseconds.
    fn bytes_between(&self, from_us: u64, to_us: u64) -> u64 {
        let a = self.times_us.partition_point(|&t| t < from_us);
        let b = self.times_us.partition_point(|&t| t < to_us);
        self.prefix[b] - self.prefix[a]
    }

    /// Time of the last delivery strictly before `t`.
    fn last_delivery_before(&self, t: SimTime) -> Option<SimTime> {
        let i = self.times_us.partition_point(|&u| u < t.as_us());
        if i == 0 {
            None
        } else {
            Some(SimTime::from_us(self.times_us[i - 1]))
        }
    }
}

/// Infers when a handover began from the delivery gap preceding its known
/// end: the instant of the last radio-layer delivery strictly before
/// `ho_end`. With a backlogged sender the link serves continuously, so
/// this lands within one packet service time of the true start.
pub fn infer_ho_start(trace: &FlowTrace, ho_end: SimTime) -> Option<SimTime> {
    DeliverySeries::from_trace(trace).last_delivery_before(ho_end)
}

pub fn summarize(trace: &FlowTrace) -> Result<FlowSummary, MetricsError> {
    if trace.records.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }
    let duration_s = trace.duration().as_secs_f64().max(1e-9);

    let mut sent_packets = 0u64;
    let mut retx_packets = 0u64;
    let mut dropped_packets = 0u64;
    let mut delivered_bytes = 0u64;
    let mut max_cum = 0u64;
    let mut ho_counts = [0u64; 3];

    // Karn's rule for passive RTT estimation: only packets that were never
    // retransmitted yield samples, matched on the first covering ack.
    let mut first_send: BTreeMap<u64, SimTime> = BTreeMap::new();
    let mut retx_seqs: HashSet<u64> = HashSet::new();
    let mut rtt_ms: Vec<f64> = Vec::new();
    let mut prev_cum = 0u64;
    let mut receiver = Receiver::new();

    for &(t, r) in &trace.records {
        match r {
            Record::Send { seq, retx, .. } => {
                sent_packets += 1;
                if retx {
                    retx_packets += 1;
                    retx_seqs.insert(seq);
                } else {
                    first_send.entry(seq).or_insert(t);
                }
            }
            Record::LinkDeliver { seq, bytes } => {
                delivered_bytes += bytes as u64;
                receiver.on_packet(seq, bytes, t);
            }
            Record::Ack { cum_bytes } => {
                if cum_bytes > prev_cum {
                    let covered: Vec<u64> =
                        first_send.range(prev_cum..cum_bytes).map(|(&s, _)| s).collect();
                    for seq in covered {
                        let sent_at = first_send.remove(&seq).unwrap();
                        if !retx_seqs.contains(&seq) {
                            rtt_ms.push((t - sent_at).as_millis_f64());
                        }
                    }
                    prev_cum = cum_bytes;
                }
                max_cum = max_cum.max(cum_bytes);
            }
            Record::Drop { .. } => dropped_packets += 1,
            Record::HoEnd { kind } => {
                ho_counts[match kind {
                    HoKind::TypeI => 0,
                    HoKind::TypeII => 1,
                    HoKind::TypeIII => 2,
                }] += 1;
            }
            _ => {}
        }
    }

    let ood: Vec<f64> = receiver
        .ood_samples_ms()
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .collect();

    Ok(FlowSummary {
        duration_s,
        goodput_mbps: max_cum as f64 * 8.0 / duration_s / 1e6,
        throughput_mbps: delivered_bytes as f64 * 8.0 / duration_s / 1e6,
        sent_packets,
        retx_packets,
        dropped_packets,
        loss_rate: if sent_packets > 0 {
            dropped_packets as f64 / sent_packets as f64
        } else {
            0.0
        },
        rtt_ms: Percentiles::of(&rtt_ms),
        ood_ms: Percentiles::of(&ood),
        handovers: ho_counts,
    })
}

/// Post-handover rate curve, ho_end-aligned and normalized by the
/// whole-trace mean delivery rate.
#[derive(Debug, Clone, Serialize)]
pub struct ImpactCurve {
    /// Normalized rate over the outage itself: delivered bytes across
    /// [inferred start, ho_end). The inferred start is the last delivery
    /// before the gap, so its bytes count and longer outages score lower.
    pub origin: f64,
    /// Normalized mean rate per bin after ho_end.
    pub bins: Vec<f64>,
    pub bin_s: f64,
    pub handovers: usize,
}

fn mean_rate_bps(series: &DeliverySeries, trace: &FlowTrace) -> f64 {
    series.total_bytes() as f64 * 8.0 / trace.duration().as_secs_f64().max(1e-9)
}

pub fn instantaneous_impact(
    trace: &FlowTrace,
    kind: HoKind,
    horizon: SimTime,
    bin: SimTime,
) -> Result<ImpactCurve, MetricsError> {
    let series = DeliverySeries::from_trace(trace);
    let base = mean_rate_bps(&series, trace);
    if base <= 0.0 {
        return Err(MetricsError::EmptyTrace);
    }
    let nbins = (horizon.as_us() / bin.as_us()) as usize;
    let mut origin_sum = 0.0;
    let mut bin_sums = vec![0.0f64; nbins];
    let mut count = 0usize;

    for span in handover_spans(trace) {
        if span.kind != kind || span.end + horizon > trace.duration() {
            continue;
        }
        let Some(inferred) = series.last_delivery_before(span.end) else {
            continue;
        };
        let outage_s = (span.end - inferred).as_secs_f64().max(1e-9);
        let outage_bytes = series.bytes_between(inferred.as_us(), span.end.as_us());
        origin_sum += outage_bytes as f64 * 8.0 / outage_s;
        for (k, sum) in bin_sums.iter_mut().enumerate() {
            let from = span.end + SimTime::from_us(bin.as_us() * k as u64);
            let to = from + bin;
            let bytes = series.bytes_between(from.as_us(), to.as_us());
            *sum += bytes as f64 * 8.0 / bin.as_secs_f64();
        }
        count += 1;
    }
    if count == 0 {
        return Err(MetricsError::NoHandovers(kind.label()));
    }
    let n = count as f64;
    Ok(ImpactCurve {
        origin: origin_sum / n / base,
        bins: bin_sums.into_iter().map(|s| s / n / base).collect(),
        bin_s: bin.as_secs_f64(),
        handovers: count,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NearEffect {
    /// Normalized mean rate over [ho_start, ho_end + x].
    pub value: f64,
    pub x_s: f64,
    pub handovers: usize,
}

/// Average impact of a handover felt up to `x` past its end, outage
/// included: values near 1 mean no lasting effect, values near 0 mean the
/// flow is still starved.
pub fn near_effect(trace: &FlowTrace, kind: HoKind, x: SimTime) -> Result<NearEffect, MetricsError> {
    let series = DeliverySeries::from_trace(trace);
    let base = mean_rate_bps(&series, trace);
    if base <= 0.0 {
        return Err(MetricsError::EmptyTrace);
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for span in handover_spans(trace) {
        if span.kind != kind || span.end + x > trace.duration() {
            continue;
        }
        let to = span.end + x;
        let window_s = (to - span.start).as_secs_f64().max(1e-9);
        let bytes = series.bytes_between(span.start.as_us(), to.as_us());
        sum += bytes as f64 * 8.0 / window_s;
        count += 1;
    }
    if count == 0 {
        return Err(MetricsError::NoHandovers(kind.label()));
    }
    Ok(NearEffect {
        value: sum / count as f64 / base,
        x_s: x.as_secs_f64(),
        handovers: count,
    })
}

/// Largest bytes-in-flight overshoot past the congestion window across all
/// send records; 0 means the invariant held everywhere.
pub fn max_window_overshoot(trace: &FlowTrace) -> u64 {
    trace
        .records
        .iter()
        .filter_map(|(_, r)| match r {
            Record::Send { cwnd, bif, .. } => Some(bif.saturating_sub(*cwnd)),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::DropReason;

    fn ms(v: u64) -> SimTime {
        SimTime::from_ms(v)
    }

    fn deliver(tr: &mut FlowTrace, t: SimTime, seq: u64) {
        tr.push(t, Record::LinkDeliver { seq, bytes: 1000 });
    }

    #[test]
    fn percentile_interpolates_linearly() {
        let v = [10.0, 20.0, 30.0, 40.0];
        assert_eq!(percentile(&v, 0.0), 10.0);
        assert_eq!(percentile(&v, 100.0), 40.0);
        assert_eq!(percentile(&v, 50.0), 25.0);
        assert_eq!(percentile(&v, 25.0), 17.5);
    }

    #[test]
    fn summary_counts_and_rates() {
        let mut tr = FlowTrace::default();
        tr.push(ms(0), Record::Send { seq: 0, bytes: 1000, retx: false, cwnd: 10_000, bif: 1000 });
        tr.push(ms(1), Record::Send { seq: 1000, bytes: 1000, retx: false, cwnd: 10_000, bif: 2000 });
        deliver(&mut tr, ms(25), 0);
        tr.push(ms(30), Record::Drop { seq: 1000, bytes: 1000, reason: DropReason::RandomLoss });
        tr.push(ms(50), Record::Ack { cum_bytes: 1000 });
        tr.push(ms(60), Record::Send { seq: 1000, bytes: 1000, retx: true, cwnd: 7000, bif: 1000 });
        deliver(&mut tr, ms(85), 1000);
        tr.push(ms(110), Record::Ack { cum_bytes: 2000 });
        tr.push(ms(1000), Record::PhyRate { bps: 1e6 });

        let s = summarize(&tr).unwrap();
        assert_eq!(s.sent_packets, 3);
        assert_eq!(s.retx_packets, 1);
        assert_eq!(s.dropped_packets, 1);
        assert_eq!(s.goodput_mbps, 2000.0 * 8.0 / 1.0 / 1e6);
        assert_eq!(s.throughput_mbps, 2000.0 * 8.0 / 1.0 / 1e6);
        // Only the never-retransmitted packet yields an RTT sample.
        let rtt = s.rtt_ms.unwrap();
        assert_eq!(rtt.samples, 1);
        assert_eq!(rtt.p50, 50.0);
    }

    #[test]
    fn ho_start_inference_picks_last_delivery_before_end() {
        let mut tr = FlowTrace::default();
        deliver(&mut tr, ms(100), 0);
        deliver(&mut tr, ms(200), 1000);
        tr.push(ms(210), Record::HoStart { kind: HoKind::TypeI });
        tr.push(ms(400), Record::HoEnd { kind: HoKind::TypeI });
        deliver(&mut tr, ms(401), 2000);
        assert_eq!(infer_ho_start(&tr, ms(400)), Some(ms(200)));
        assert_eq!(infer_ho_start(&tr, ms(50)), None);
    }

    #[test]
    fn impact_curve_normalizes_against_trace_mean() {
        // 10 s trace, steady 1 pkt / 100 ms except a 1 s outage at 4..5 s.
        let mut tr = FlowTrace::default();
        let mut seq = 0u64;
        for i in 0..100u64 {
            let t = ms(i * 100);
            if (4000..5000).contains(&(i * 100)) {
                if i * 100 == 4000 {
                    tr.push(t, Record::HoStart { kind: HoKind::TypeII });
                }
                continue;
            }
            if i * 100 == 5000 {
                tr.push(t, Record::HoEnd { kind: HoKind::TypeII });
            }
            deliver(&mut tr, t, seq);
            seq += 1000;
        }
        let curve =
            instantaneous_impact(&tr, HoKind::TypeII, SimTime::from_secs(4), ms(200)).unwrap();
        assert_eq!(curve.handovers, 1);
        // Post-handover bins resume the steady rate, which is ~1.1x the
        // outage-diluted trace mean.
        assert!(curve.bins[0] > 1.0, "bins[0] = {}", curve.bins[0]);
        // Origin covers the outage: one packet over ~1.1 s.
        assert!(curve.origin < 0.15, "origin = {}", curve.origin);

        let ne = near_effect(&tr, HoKind::TypeII, SimTime::from_secs(2)).unwrap();
        assert!(ne.value < 1.0);
        assert!(near_effect(&tr, HoKind::TypeIII, ms(100)).is_err());
    }

    #[test]
    fn overshoot_detects_violations() {
        let mut tr = FlowTrace::default();
        tr.push(ms(0), Record::Send { seq: 0, bytes: 1000, retx: false, cwnd: 5000, bif: 1000 });
        assert_eq!(max_window_overshoot(&tr), 0);
        tr.push(ms(1), Record::Send { seq: 1000, bytes: 1000, retx: false, cwnd: 5000, bif: 6000 });
        assert_eq!(max_window_overshoot(&tr), 1000);
    }
}
