//! Simulated LTE bottleneck.
//!
//! Speed-dependent PHY service rate with lognormal jitter, carrier-
//! dependent per-packet random loss, a drop-tail FIFO buffer, and the
//! three handover types:
//!
//! * Type I  (successful): service pauses, buffer retained, retained data
//!   delivered back-to-back at PHY rate right after the handover ends.
//! * Type II (radio link failure): longer pause, buffer retained.
//! * Type III (NAS recovery): buffer cleared at handover start; every
//!   resident packet counts as dropped and needs transport retransmission.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::rng::RngStream;
use crate::time::SimTime;
use crate::transport::Packet;

/// Trace length the per-type handover counts are quoted against.
pub const HO_REFERENCE_TRACE: SimTime = SimTime::from_secs(150);
/// PHY rate is piecewise constant, resampled on this grid.
pub const PHY_RESAMPLE_PERIOD: SimTime = SimTime::from_ms(100);

pub const DEFAULT_BUFFER_BYTES: u64 = 3 * 1024 * 1024;
pub const DEFAULT_BASE_OWD_MS: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Carrier {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HoKind {
    TypeI,
    TypeII,
    TypeIII,
}

impl HoKind {
    pub const ALL: [HoKind; 3] = [HoKind::TypeI, HoKind::TypeII, HoKind::TypeIII];

    pub fn label(self) -> &'static str {
        match self {
            HoKind::TypeI => "I",
            HoKind::TypeII => "II",
            HoKind::TypeIII => "III",
        }
    }

    pub fn from_label(s: &str) -> Option<HoKind> {
        match s {
            "I" => Some(HoKind::TypeI),
            "II" => Some(HoKind::TypeII),
            "III" => Some(HoKind::TypeIII),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            HoKind::TypeI => 0,
            HoKind::TypeII => 1,
            HoKind::TypeIII => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoParams {
    /// Mean handover count per 150 s trace.
    pub rate_per_trace: f64,
    /// Mean duration in seconds.
    pub mean_duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkProfile {
    pub speed_kmh: u32,
    /// No-handover PHY rate in Mbps.
    pub phy_rate_mbps: f64,
    /// Coefficient of variation of the lognormal PHY jitter; 0 disables it.
    pub phy_jitter: f64,
    /// Per-packet random loss probability.
    pub random_loss: f64,
    pub base_owd_ms: f64,
    pub buffer_bytes: u64,
    /// Indexed Type I, II, III.
    pub ho: [HoParams; 3],
}

#[derive(Debug, thiserror::Error)]
pub enum LinkError {
    #[error("unsupported speed {0} km/h; valid presets: 0, 200, 300, 350")]
    UnsupportedSpeed(u32),
}

/// Per-speed no-handover PHY rate, handover durations and counts, plus the
/// carrier loss rates measured with non-congesting probe flows.
pub fn build_profile(speed_kmh: u32, carrier: Carrier) -> Result<LinkProfile, LinkError> {
    let (phy, dur, count): (f64, [f64; 3], [f64; 3]) = match speed_kmh {
        0 => (14.68, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
        200 => (10.19, [0.35, 3.13, 4.03], [4.41, 0.18, 0.18]),
        300 => (8.89, [0.16, 2.09, 3.98], [9.36, 0.96, 0.84]),
        350 => (3.00, [0.21, 1.91, 5.49], [14.70, 2.00, 1.49]),
        other => return Err(LinkError::UnsupportedSpeed(other)),
    };
    let random_loss = match (speed_kmh, carrier) {
        (0, _) => 0.00008,
        (_, Carrier::A) => 0.0021,
        (_, Carrier::B) => 0.0135,
    };
    Ok(LinkProfile {
        speed_kmh,
        phy_rate_mbps: phy,
        phy_jitter: 0.0,
        random_loss,
        base_owd_ms: DEFAULT_BASE_OWD_MS,
        buffer_bytes: DEFAULT_BUFFER_BYTES,
        ho: [
            HoParams { rate_per_trace: count[0], mean_duration_s: dur[0] },
            HoParams { rate_per_trace: count[1], mean_duration_s: dur[1] },
            HoParams { rate_per_trace: count[2], mean_duration_s: dur[2] },
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandoverEvent {
    pub kind: HoKind,
    pub ho_start: SimTime,
    pub ho_end: SimTime,
}

/// Poisson arrivals per type (rate = count / 150 s) with exponential
/// durations. Overlaps are resolved by shifting the later event to start
/// just after the earlier one ends, preserving per-type counts and
/// durations. Returns a time-ordered, non-overlapping schedule.
pub fn sample_handover_schedule(
    profile: &LinkProfile,
    horizon: SimTime,
    rng: &mut ChaCha8Rng,
) -> Vec<HandoverEvent> {
    let mut events: Vec<HandoverEvent> = Vec::new();
    for kind in HoKind::ALL {
        let p = profile.ho[kind.index()];
        if p.rate_per_trace <= 0.0 {
            continue;
        }
        let arrival_rate = p.rate_per_trace / HO_REFERENCE_TRACE.as_secs_f64();
        let interarrival = Exp::new(arrival_rate).unwrap();
        let duration = Exp::new(1.0 / p.mean_duration_s.max(1e-9)).unwrap();
        let mut t = 0.0;
        loop {
            t += interarrival.sample(rng);
            if t >= horizon.as_secs_f64() {
                break;
            }
            let d = duration.sample(rng).max(1e-6);
            events.push(HandoverEvent {
                kind,
                ho_start: SimTime::from_secs_f64(t),
                ho_end: SimTime::from_secs_f64(t + d),
            });
        }
    }
    events.sort_by_key(|e| (e.ho_start, e.ho_end));
    let mut out: Vec<HandoverEvent> = Vec::with_capacity(events.len());
    for mut ev in events {
        if let Some(prev) = out.last() {
            if ev.ho_start <= prev.ho_end {
                let dur = ev.ho_end - ev.ho_start;
                ev.ho_start = prev.ho_end + SimTime::from_us(1);
                ev.ho_end = ev.ho_start + dur;
            }
        }
        out.push(ev);
    }
    out
}

/// Piecewise-constant PHY rate process: unit-mean lognormal jitter drawn
/// independently per 100 ms bin, random-access so queries and event-driven
/// updates agree exactly.
#[derive(Debug, Clone)]
pub struct PhyProcess {
    mean_bps: f64,
    cv: f64,
    streams: RngStream,
}

impl PhyProcess {
    pub fn new(profile: &LinkProfile, streams: RngStream) -> Self {
        PhyProcess {
            mean_bps: profile.phy_rate_mbps * 1e6,
            cv: profile.phy_jitter,
            streams,
        }
    }

    pub fn bin_of(t: SimTime) -> u64 {
        t.as_us() / PHY_RESAMPLE_PERIOD.as_us()
    }

    pub fn rate_at_bin(&self, bin: u64) -> f64 {
        if self.cv == 0.0 {
            return self.mean_bps;
        }
        // Unit-mean lognormal: sigma^2 = ln(1 + cv^2), mu = -sigma^2 / 2.
        let sigma2 = (1.0 + self.cv * self.cv).ln();
        let dist = LogNormal::new(-sigma2 / 2.0, sigma2.sqrt()).unwrap();
        let mut rng = self.streams.indexed("phy", bin);
        self.mean_bps * dist.sample(&mut rng)
    }

    pub fn rate_at(&self, t: SimTime) -> f64 {
        self.rate_at_bin(Self::bin_of(t))
    }
}

/// PHY rate at `t` in bits/s: zero inside any handover interval, otherwise
/// the jittered piecewise-constant rate.
pub fn phy_rate_at(t: SimTime, phy: &PhyProcess, schedule: &[HandoverEvent]) -> f64 {
    if schedule.iter().any(|h| t >= h.ho_start && t < h.ho_end) {
        0.0
    } else {
        phy.rate_at(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Accepted,
    DroppedRandomLoss,
    DroppedBufferFull,
    /// Arrived during a Type III disconnection: no attachment context
    /// exists to buffer it, so the packet is lost in the network.
    DroppedDetached,
}

/// Scheduling request the simulation loop turns into an engine event.
#[derive(Debug, Clone, Copy)]
pub struct ServiceSchedule {
    pub at: SimTime,
    pub generation: u64,
}

pub enum ServiceCompletion {
    /// Superseded by a rate change or handover; ignore.
    Stale,
    Delivered(Packet),
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct LinkCounters {
    pub enqueued_bytes: u64,
    pub delivered_bytes: u64,
    pub dropped_bytes: u64,
}

#[derive(Debug)]
struct Serving {
    pkt: Packet,
    remaining_bits: f64,
    last_progress: SimTime,
}

/// Bottleneck state: FIFO buffer plus a single in-service packet.
pub struct Link {
    profile: LinkProfile,
    queue: VecDeque<Packet>,
    queued_bytes: u64,
    serving: Option<Serving>,
    generation: u64,
    rate_bps: f64,
    in_handover: bool,
    /// Type III only: the terminal has no serving cell, so arrivals are
    /// dropped instead of buffered.
    detached: bool,
    counters: LinkCounters,
    loss_rng: ChaCha8Rng,
}

impl Link {
    pub fn new(profile: LinkProfile, loss_rng: ChaCha8Rng, initial_rate_bps: f64) -> Self {
        Link {
            profile,
            queue: VecDeque::new(),
            queued_bytes: 0,
            serving: None,
            generation: 0,
            rate_bps: initial_rate_bps,
            in_handover: false,
            detached: false,
            counters: LinkCounters::default(),
            loss_rng,
        }
    }

    pub fn counters(&self) -> LinkCounters {
        self.counters
    }

    /// Bytes currently resident: queued plus in service.
    pub fn resident_bytes(&self) -> u64 {
        self.queued_bytes + self.serving.as_ref().map_or(0, |s| s.pkt.size as u64)
    }

    /// Conservation check: everything that entered is accounted for.
    pub fn bytes_conserved(&self) -> bool {
        self.counters.enqueued_bytes
            == self.counters.delivered_bytes + self.counters.dropped_bytes + self.resident_bytes()
    }

    pub fn in_handover(&self) -> bool {
        self.in_handover
    }

    pub fn enqueue(&mut self, pkt: Packet, _now: SimTime) -> EnqueueOutcome {
        self.counters.enqueued_bytes += pkt.size as u64;
        if self.detached {
            self.counters.dropped_bytes += pkt.size as u64;
            return EnqueueOutcome::DroppedDetached;
        }
        if self.profile.random_loss > 0.0
            && self.loss_rng.random::<f64>() < self.profile.random_loss
        {
            self.counters.dropped_bytes += pkt.size as u64;
            return EnqueueOutcome::DroppedRandomLoss;
        }
        if self.resident_bytes() + pkt.size as u64 > self.profile.buffer_bytes {
            self.counters.dropped_bytes += pkt.size as u64;
            return EnqueueOutcome::DroppedBufferFull;
        }
        self.queued_bytes += pkt.size as u64;
        self.queue.push_back(pkt);
        EnqueueOutcome::Accepted
    }

    /// Starts serving the head-of-line packet if the server is idle and the
    /// link is up. Returns the completion to schedule, if any.
    pub fn start_service_if_idle(&mut self, now: SimTime) -> Option<ServiceSchedule> {
        if self.serving.is_some() || self.in_handover || self.rate_bps <= 0.0 {
            return None;
        }
        let pkt = self.queue.pop_front()?;
        self.queued_bytes -= pkt.size as u64;
        let remaining_bits = pkt.size as f64 * 8.0;
        self.serving = Some(Serving {
            pkt,
            remaining_bits,
            last_progress: now,
        });
        Some(self.schedule_completion(now))
    }

    fn schedule_completion(&mut self, now: SimTime) -> ServiceSchedule {
        let s = self.serving.as_ref().unwrap();
        let secs = s.remaining_bits / self.rate_bps;
        self.generation += 1;
        ServiceSchedule {
            at: now + SimTime::from_secs_f64(secs),
            generation: self.generation,
        }
    }

    pub fn complete_service(&mut self, generation: u64, _now: SimTime) -> ServiceCompletion {
        if generation != self.generation || self.serving.is_none() {
            return ServiceCompletion::Stale;
        }
        let s = self.serving.take().unwrap();
        self.counters.delivered_bytes += s.pkt.size as u64;
        ServiceCompletion::Delivered(s.pkt)
    }

    fn checkpoint_progress(&mut self, now: SimTime) {
        if let Some(s) = self.serving.as_mut() {
            let elapsed = (now.saturating_sub(s.last_progress)).as_secs_f64();
            if !self.in_handover && self.rate_bps > 0.0 {
                s.remaining_bits = (s.remaining_bits - elapsed * self.rate_bps).max(0.0);
            }
            s.last_progress = now;
        }
    }

    /// Applies a new nominal PHY rate. Any in-flight service is re-timed at
    /// the new rate; returns the replacement completion to schedule.
    pub fn set_phy_rate(&mut self, now: SimTime, rate_bps: f64) -> Option<ServiceSchedule> {
        self.checkpoint_progress(now);
        self.rate_bps = rate_bps;
        if self.in_handover || self.rate_bps <= 0.0 {
            self.generation += 1; // invalidate any pending completion
            return None;
        }
        if self.serving.is_some() {
            Some(self.schedule_completion(now))
        } else {
            self.start_service_if_idle(now)
        }
    }

    /// Service halts for every type; Type III additionally loses all
    /// resident data. Returns the packets dropped (empty for I/II).
    pub fn begin_handover(&mut self, now: SimTime, kind: HoKind) -> Vec<Packet> {
        self.checkpoint_progress(now);
        self.in_handover = true;
        self.generation += 1; // cancel any scheduled completion
        if kind != HoKind::TypeIII {
            return Vec::new();
        }
        self.detached = true;
        let mut dropped: Vec<Packet> = Vec::new();
        if let Some(s) = self.serving.take() {
            dropped.push(s.pkt);
        }
        while let Some(p) = self.queue.pop_front() {
            dropped.push(p);
        }
        self.queued_bytes = 0;
        for p in &dropped {
            self.counters.dropped_bytes += p.size as u64;
        }
        dropped
    }

    /// Resumes service; retained packets (Type I/II) go out back-to-back at
    /// the current PHY rate, which produces the post-handover burst.
    pub fn end_handover(&mut self, now: SimTime) -> Option<ServiceSchedule> {
        self.in_handover = false;
        self.detached = false;
        if let Some(s) = self.serving.as_mut() {
            s.last_progress = now;
            if self.rate_bps > 0.0 {
                return Some(self.schedule_completion(now));
            }
            return None;
        }
        self.start_service_if_idle(now)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::Packet;

    fn pkt(seq: u64) -> Packet {
        Packet {
            seq,
            size: 1448,
            sent_at: SimTime::ZERO,
            is_retx: false,
        }
    }

    fn quiet_link(random_loss: f64, buffer: u64) -> Link {
        let mut profile = build_profile(0, Carrier::A).unwrap();
        profile.random_loss = random_loss;
        profile.buffer_bytes = buffer;
        let rng = RngStream::new(1).stream("loss");
        Link::new(profile, rng, 8e6)
    }

    #[test]
    fn presets_match_measured_parameters() {
        let p = build_profile(350, Carrier::A).unwrap();
        assert_eq!(p.phy_rate_mbps, 3.00);
        assert_eq!(p.random_loss, 0.0021);
        assert_eq!(p.ho[0], HoParams { rate_per_trace: 14.70, mean_duration_s: 0.21 });
        assert_eq!(p.ho[1], HoParams { rate_per_trace: 2.00, mean_duration_s: 1.91 });
        assert_eq!(p.ho[2], HoParams { rate_per_trace: 1.49, mean_duration_s: 5.49 });

        let p0 = build_profile(0, Carrier::A).unwrap();
        assert_eq!(p0.phy_rate_mbps, 14.68);
        assert_eq!(p0.random_loss, 0.00008);
        assert!(p0.ho.iter().all(|h| h.rate_per_trace == 0.0));

        // PHY rate is carrier-independent; only loss varies.
        let pb = build_profile(300, Carrier::B).unwrap();
        assert_eq!(pb.phy_rate_mbps, 8.89);
        assert_eq!(pb.random_loss, 0.0135);
    }

    #[test]
    fn unsupported_speed_is_an_error() {
        assert!(build_profile(123, Carrier::A).is_err());
    }

    #[test]
    fn zero_rate_profile_yields_empty_schedule() {
        let p = build_profile(0, Carrier::A).unwrap();
        let mut rng = RngStream::new(5).stream("handover");
        assert!(sample_handover_schedule(&p, SimTime::from_secs(150), &mut rng).is_empty());
    }

    #[test]
    fn schedule_is_ordered_and_non_overlapping() {
        let p = build_profile(350, Carrier::A).unwrap();
        for seed in 0..50 {
            let mut rng = RngStream::new(seed).stream("handover");
            let sched = sample_handover_schedule(&p, SimTime::from_secs(150), &mut rng);
            for w in sched.windows(2) {
                assert!(w[0].ho_end < w[1].ho_start);
            }
            for ev in &sched {
                assert!(ev.ho_start < ev.ho_end);
            }
        }
    }

    #[test]
    fn schedule_counts_match_table_rates() {
        // Monte-Carlo check of the generator against its own parameters.
        let p = build_profile(350, Carrier::A).unwrap();
        let mut totals = [0u64; 3];
        let n = 1000;
        for seed in 0..n {
            let mut rng = RngStream::new(seed).stream("handover");
            for ev in sample_handover_schedule(&p, SimTime::from_secs(150), &mut rng) {
                totals[ev.kind.index()] += 1;
            }
        }
        let means = [
            totals[0] as f64 / n as f64,
            totals[1] as f64 / n as f64,
            totals[2] as f64 / n as f64,
        ];
        assert!((means[0] - 14.70).abs() / 14.70 < 0.05, "Type I mean {}", means[0]);
        assert!((means[1] - 2.00).abs() / 2.00 < 0.10, "Type II mean {}", means[1]);
        assert!((means[2] - 1.49).abs() / 1.49 < 0.10, "Type III mean {}", means[2]);
    }

    #[test]
    fn enqueue_outcomes() {
        let mut link = quiet_link(0.0, 2 * 1448);
        assert_eq!(link.enqueue(pkt(0), SimTime::ZERO), EnqueueOutcome::Accepted);
        assert_eq!(link.enqueue(pkt(1448), SimTime::ZERO), EnqueueOutcome::Accepted);
        assert_eq!(
            link.enqueue(pkt(2896), SimTime::ZERO),
            EnqueueOutcome::DroppedBufferFull
        );
        assert!(link.bytes_conserved());

        let mut lossy = quiet_link(1.0, 1 << 30);
        assert_eq!(
            lossy.enqueue(pkt(0), SimTime::ZERO),
            EnqueueOutcome::DroppedRandomLoss
        );
    }

    #[test]
    fn random_loss_frequency_matches_profile() {
        // >= 1e6 offered packets, observed frequency within 3 standard errors.
        let p_loss = 0.0135;
        let mut link = quiet_link(p_loss, 1 << 40);
        let n: u64 = 1_000_000;
        let mut drops = 0u64;
        for i in 0..n {
            if link.enqueue(pkt(i * 1448), SimTime::ZERO) == EnqueueOutcome::DroppedRandomLoss {
                drops += 1;
            }
        }
        let freq = drops as f64 / n as f64;
        let se = (p_loss * (1.0 - p_loss) / n as f64).sqrt();
        assert!((freq - p_loss).abs() < 3.0 * se, "freq {freq} vs {p_loss}");
    }

    #[test]
    fn type_iii_drops_residents_type_i_keeps_them() {
        for (kind, expect_drops) in [(HoKind::TypeIII, 5), (HoKind::TypeI, 0), (HoKind::TypeII, 0)] {
            let mut link = quiet_link(0.0, 1 << 30);
            for i in 0..5 {
                link.enqueue(pkt(i * 1448), SimTime::ZERO);
            }
            let dropped = link.begin_handover(SimTime::from_ms(10), kind);
            assert_eq!(dropped.len(), expect_drops, "{kind:?}");
            assert!(link.bytes_conserved());
            if kind == HoKind::TypeIII {
                assert_eq!(link.resident_bytes(), 0);
            } else {
                assert_eq!(link.resident_bytes(), 5 * 1448);
            }
        }
    }

    #[test]
    fn retained_buffer_drains_back_to_back_after_handover() {
        let mut link = quiet_link(0.0, 1 << 30);
        for i in 0..5 {
            link.enqueue(pkt(i * 1448), SimTime::ZERO);
        }
        assert!(link.begin_handover(SimTime::ZERO, HoKind::TypeI).is_empty());
        let end = SimTime::from_ms(210);
        let mut now = end;
        let mut sched = link.end_handover(end);
        let mut delivered = 0;
        let service = SimTime::from_secs_f64(1448.0 * 8.0 / 8e6);
        while let Some(s) = sched {
            assert_eq!(s.at, now + service);
            now = s.at;
            match link.complete_service(s.generation, now) {
                ServiceCompletion::Delivered(_) => delivered += 1,
                ServiceCompletion::Stale => panic!("unexpected stale completion"),
            }
            sched = link.start_service_if_idle(now);
        }
        assert_eq!(delivered, 5);
        assert!(link.bytes_conserved());
    }

    #[test]
    fn no_service_during_handover() {
        let mut link = quiet_link(0.0, 1 << 30);
        link.enqueue(pkt(0), SimTime::ZERO);
        let sched = link.start_service_if_idle(SimTime::ZERO).unwrap();
        link.begin_handover(SimTime::from_us(10), HoKind::TypeII);
        // The pre-handover completion is stale now.
        assert!(matches!(
            link.complete_service(sched.generation, sched.at),
            ServiceCompletion::Stale
        ));
        // And no new service can start while down.
        assert!(link.start_service_if_idle(SimTime::from_ms(1)).is_none());
    }

    #[test]
    fn rate_change_retimes_in_flight_service() {
        let mut link = quiet_link(0.0, 1 << 30);
        link.enqueue(pkt(0), SimTime::ZERO);
        let first = link.start_service_if_idle(SimTime::ZERO).unwrap();
        // Half way through, rate halves: remaining half of the bits now
        // take as long as the whole packet would have.
        let half = SimTime::from_us((first.at.as_us()) / 2);
        let second = link.set_phy_rate(half, 4e6).unwrap();
        assert!(matches!(
            link.complete_service(first.generation, first.at),
            ServiceCompletion::Stale
        ));
        let expected = half + (first.at - half) + (first.at - half);
        assert!(
            second.at.as_us().abs_diff(expected.as_us()) <= 2,
            "got {} want {expected}",
            second.at
        );
    }

    #[test]
    fn unit_mean_lognormal_jitter() {
        let mut profile = build_profile(350, Carrier::A).unwrap();
        profile.phy_jitter = 0.3;
        let phy = PhyProcess::new(&profile, RngStream::new(77));
        let n = 20_000u64;
        let mean: f64 = (0..n).map(|b| phy.rate_at_bin(b)).sum::<f64>() / n as f64;
        assert!((mean - 3e6).abs() / 3e6 < 0.03, "long-run mean {mean}");

        // Zero jitter: exactly the table rate.
        profile.phy_jitter = 0.0;
        let flat = PhyProcess::new(&profile, RngStream::new(77));
        assert_eq!(flat.rate_at(SimTime::from_secs(42)), 3e6);
    }

    #[test]
    fn phy_rate_is_zero_inside_handover() {
        let profile = build_profile(350, Carrier::A).unwrap();
        let phy = PhyProcess::new(&profile, RngStream::new(1));
        let sched = vec![HandoverEvent {
            kind: HoKind::TypeII,
            ho_start: SimTime::from_secs(10),
            ho_end: SimTime::from_secs(12),
        }];
        assert_eq!(phy_rate_at(SimTime::from_secs(11), &phy, &sched), 0.0);
        assert_eq!(phy_rate_at(SimTime::from_secs(13), &phy, &sched), 3e6);
    }
}
