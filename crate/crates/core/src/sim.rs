//! Simulation driver: one bulk flow over the mobile bottleneck.
//!
//! Wires the event engine to the link, sender, and receiver, and emits a
//! full flow trace. Runs with the same config and seed are byte-identical.

use serde::{Deserialize, Serialize};

use crate::cc::bbr::{Bbr, DEFAULT_DECAY_C};
use crate::cc::cubic::Cubic;
use crate::cc::{CongestionController, DEFAULT_MSS};
use crate::engine::Engine;
use crate::link::{
    EnqueueOutcome, HandoverEvent, Link, LinkCounters, LinkProfile, PhyProcess,
    ServiceCompletion, PHY_RESAMPLE_PERIOD,
};
use crate::rng::RngStream;
use crate::time::SimTime;
use crate::trace::{DropReason, FlowTrace, Record};
use crate::transport::{Packet, Receiver, Sender, SenderAction, SenderConfig};

/// Congestion-controller selection, as it appears in scenario configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CcaConfig {
    Cubic,
    Bbr,
    BbrPlus {
        lambda: f64,
        #[serde(default = "default_decay_c")]
        decay_c: f64,
    },
}

fn default_decay_c() -> f64 {
    DEFAULT_DECAY_C
}

impl CcaConfig {
    pub fn build(&self, mss: u32) -> Box<dyn CongestionController> {
        match *self {
            CcaConfig::Cubic => Box::new(Cubic::new(mss)),
            CcaConfig::Bbr => Box::new(Bbr::bbr(mss)),
            CcaConfig::BbrPlus { lambda, decay_c } => {
                Box::new(Bbr::bbr_plus(mss, lambda, decay_c))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            CcaConfig::Cubic => "cubic".into(),
            CcaConfig::Bbr => "bbr".into(),
            CcaConfig::BbrPlus { lambda, .. } => format!("bbrplus(lambda={lambda})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub profile: LinkProfile,
    pub cca: CcaConfig,
    pub duration: SimTime,
    pub seed: u64,
    /// None = bulk flow for the whole duration.
    pub flow_size: Option<u64>,
    pub mss: u32,
    /// Scripted handover schedule; None samples one from the profile.
    pub handovers: Option<Vec<HandoverEvent>>,
}

impl SimConfig {
    pub fn new(profile: LinkProfile, cca: CcaConfig, duration: SimTime, seed: u64) -> Self {
        SimConfig {
            profile,
            cca,
            duration,
            seed,
            flow_size: None,
            mss: DEFAULT_MSS,
            handovers: None,
        }
    }
}

#[derive(Debug)]
pub struct SimOutput {
    pub trace: FlowTrace,
    pub schedule: Vec<HandoverEvent>,
    pub link: LinkCounters,
    pub sent_packets: u64,
    /// Out-of-order delays observed at the receiver, in ms.
    pub ood_samples_ms: Vec<f64>,
    pub completed: bool,
    pub finished_at: SimTime,
}

enum Ev {
    PacedSend,
    LinkArrival(Packet),
    ServiceDone { generation: u64 },
    AckArrival { cum: u64, sacked_seq: u64 },
    Rto { generation: u64 },
    HoStart(usize),
    HoEnd(usize),
    PhyResample,
}

fn apply_actions(
    eng: &mut Engine<Ev>,
    trace: &mut FlowTrace,
    now: SimTime,
    owd: SimTime,
    cwnd: u64,
    bif: u64,
    actions: Vec<SenderAction>,
) {
    for a in actions {
        match a {
            SenderAction::Send(p) => {
                trace.push(
                    now,
                    Record::Send {
                        seq: p.seq,
                        bytes: p.size,
                        retx: p.is_retx,
                        cwnd,
                        bif,
                    },
                );
                eng.schedule(now + owd, Ev::LinkArrival(p));
            }
            SenderAction::ArmPacing(at) => eng.schedule(at.max(now), Ev::PacedSend),
            SenderAction::ArmRto { at, generation } => {
                eng.schedule(at.max(now), Ev::Rto { generation })
            }
        }
    }
}

pub fn run(config: &SimConfig) -> SimOutput {
    let streams = RngStream::new(config.seed);
    let phy = PhyProcess::new(&config.profile, streams);
    let schedule = config.handovers.clone().unwrap_or_else(|| {
        let mut rng = streams.stream("handover");
        crate::link::sample_handover_schedule(&config.profile, config.duration, &mut rng)
    });

    let owd = SimTime::from_millis_f64(config.profile.base_owd_ms);
    let mut link = Link::new(
        config.profile.clone(),
        streams.stream("loss"),
        phy.rate_at(SimTime::ZERO),
    );
    let mut sender = Sender::new(
        SenderConfig {
            mss: config.mss,
            flow_size: config.flow_size,
            ..SenderConfig::default()
        },
        config.cca.build(config.mss),
    );
    let mut receiver = Receiver::new();
    let mut trace = FlowTrace::default();
    let mut eng: Engine<Ev> = Engine::new();

    for (i, ho) in schedule.iter().enumerate() {
        if ho.ho_start >= config.duration {
            continue;
        }
        eng.schedule(ho.ho_start, Ev::HoStart(i));
        eng.schedule(ho.ho_end.min(config.duration), Ev::HoEnd(i));
    }
    if config.profile.phy_jitter > 0.0 {
        eng.schedule(SimTime::ZERO, Ev::PhyResample);
    }
    let mut last_phy_bps = phy.rate_at(SimTime::ZERO);
    trace.push(SimTime::ZERO, Record::PhyRate { bps: last_phy_bps });

    {
        let actions = sender.start(SimTime::ZERO);
        let (cwnd, bif) = (sender.cwnd_bytes(), sender.bytes_in_flight());
        apply_actions(&mut eng, &mut trace, SimTime::ZERO, owd, cwnd, bif, actions);
    }

    let mut completed = false;
    while let Some((now, ev)) = eng.pop_due(config.duration) {
        match ev {
            Ev::PacedSend => {
                let actions = sender.on_pacing_timer(now);
                let (cwnd, bif) = (sender.cwnd_bytes(), sender.bytes_in_flight());
                apply_actions(&mut eng, &mut trace, now, owd, cwnd, bif, actions);
            }
            Ev::Rto { generation } => {
                let actions = sender.on_rto(generation, now);
                let (cwnd, bif) = (sender.cwnd_bytes(), sender.bytes_in_flight());
                apply_actions(&mut eng, &mut trace, now, owd, cwnd, bif, actions);
            }
            Ev::LinkArrival(p) => match link.enqueue(p, now) {
                EnqueueOutcome::Accepted => {
                    if let Some(s) = link.start_service_if_idle(now) {
                        eng.schedule(s.at, Ev::ServiceDone { generation: s.generation });
                    }
                }
                EnqueueOutcome::DroppedRandomLoss => trace.push(
                    now,
                    Record::Drop { seq: p.seq, bytes: p.size, reason: DropReason::RandomLoss },
                ),
                EnqueueOutcome::DroppedBufferFull => trace.push(
                    now,
                    Record::Drop { seq: p.seq, bytes: p.size, reason: DropReason::BufferFull },
                ),
                EnqueueOutcome::DroppedDetached => trace.push(
                    now,
                    Record::Drop { seq: p.seq, bytes: p.size, reason: DropReason::Handover },
                ),
            },
            Ev::ServiceDone { generation } => {
                if let ServiceCompletion::Delivered(p) = link.complete_service(generation, now) {
                    trace.push(now, Record::LinkDeliver { seq: p.seq, bytes: p.size });
                    let cum = receiver.on_packet(p.seq, p.size, now);
                    eng.schedule(now + owd, Ev::AckArrival { cum, sacked_seq: p.seq });
                    if let Some(s) = link.start_service_if_idle(now) {
                        eng.schedule(s.at, Ev::ServiceDone { generation: s.generation });
                    }
                }
            }
            Ev::AckArrival { cum, sacked_seq } => {
                trace.push(now, Record::Ack { cum_bytes: cum });
                let actions = sender.on_ack(cum, sacked_seq, now);
                let (cwnd, bif) = (sender.cwnd_bytes(), sender.bytes_in_flight());
                apply_actions(&mut eng, &mut trace, now, owd, cwnd, bif, actions);
                if sender.is_complete() {
                    completed = true;
                    break;
                }
            }
            Ev::HoStart(i) => {
                let kind = schedule[i].kind;
                trace.push(now, Record::HoStart { kind });
                for p in link.begin_handover(now, kind) {
                    trace.push(
                        now,
                        Record::Drop { seq: p.seq, bytes: p.size, reason: DropReason::Handover },
                    );
                }
            }
            Ev::HoEnd(i) => {
                trace.push(now, Record::HoEnd { kind: schedule[i].kind });
                if let Some(s) = link.end_handover(now) {
                    eng.schedule(s.at, Ev::ServiceDone { generation: s.generation });
                }
            }
            Ev::PhyResample => {
                let bps = phy.rate_at(now);
                if bps != last_phy_bps {
                    last_phy_bps = bps;
                    trace.push(now, Record::PhyRate { bps });
                    if let Some(s) = link.set_phy_rate(now, bps) {
                        eng.schedule(s.at, Ev::ServiceDone { generation: s.generation });
                    }
                }
                let next = now + PHY_RESAMPLE_PERIOD;
                if next < config.duration {
                    eng.schedule(next, Ev::PhyResample);
                }
            }
        }
        debug_assert!(link.bytes_conserved());
    }

    SimOutput {
        trace,
        schedule,
        link: link.counters(),
        sent_packets: sender.sent_packets(),
        ood_samples_ms: receiver.ood_samples_ms().to_vec(),
        completed,
        finished_at: eng.now(),
    }
}
