//! Flow traces: the timestamped record stream every metric derives from.
//!
//! CSV schema, one line per event: `t_us,kind,seq,bytes,extra`.
//! The same analytics run on in-memory traces and on imported files, and a
//! serialization round trip preserves records exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::link::HoKind;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    RandomLoss,
    BufferFull,
    Handover,
}

impl DropReason {
    fn label(self) -> &'static str {
        match self {
            DropReason::RandomLoss => "random-loss",
            DropReason::BufferFull => "buffer-full",
            DropReason::Handover => "handover",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        match s {
            "random-loss" => Some(DropReason::RandomLoss),
            "buffer-full" => Some(DropReason::BufferFull),
            "handover" => Some(DropReason::Handover),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Record {
    Send {
        seq: u64,
        bytes: u32,
        retx: bool,
        /// Congestion window at the send decision, for invariant audits.
        cwnd: u64,
        /// Bytes in flight just after this send.
        bif: u64,
    },
    /// Radio-layer delivery of a downlink packet to the receiver.
    LinkDeliver { seq: u64, bytes: u32 },
    /// Cumulative ack arriving back at the sender.
    Ack { cum_bytes: u64 },
    Drop { seq: u64, bytes: u32, reason: DropReason },
    /// Nominal PHY rate resample.
    PhyRate { bps: f64 },
    HoStart { kind: HoKind },
    HoEnd { kind: HoKind },
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct FlowTrace {
    pub records: Vec<(SimTime, Record)>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {0}: malformed record: {1}")]
    Malformed(usize, String),
}

impl FlowTrace {
    pub fn push(&mut self, t: SimTime, r: Record) {
        debug_assert!(self.records.last().is_none_or(|&(last, _)| t >= last));
        self.records.push((t, r));
    }

    pub fn duration(&self) -> SimTime {
        self.records.last().map_or(SimTime::ZERO, |&(t, _)| t)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_us,kind,seq,bytes,extra")?;
        for &(t, r) in &self.records {
            let us = t.as_us();
            match r {
                Record::Send { seq, bytes, retx, cwnd, bif } => {
                    let flag = if retx { "retx;" } else { "" };
                    writeln!(w, "{us},send,{seq},{bytes},{flag}cwnd={cwnd};bif={bif}")?
                }
                Record::LinkDeliver { seq, bytes } => {
                    writeln!(w, "{us},link-deliver,{seq},{bytes},")?
                }
                Record::Ack { cum_bytes } => writeln!(w, "{us},ack,{cum_bytes},0,")?,
                Record::Drop { seq, bytes, reason } => {
                    writeln!(w, "{us},drop,{seq},{bytes},{}", reason.label())?
                }
                Record::PhyRate { bps } => writeln!(w, "{us},phy-rate,0,0,{bps}")?,
                Record::HoStart { kind } => writeln!(w, "{us},ho-start,0,0,{}", kind.label())?,
                Record::HoEnd { kind } => writeln!(w, "{us},ho-end,0,0,{}", kind.label())?,
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<FlowTrace, TraceError> {
        let mut trace = FlowTrace::default();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 && line.starts_with("t_us") {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let bad = || TraceError::Malformed(i + 1, line.clone());
            let mut parts = line.splitn(5, ',');
            let t: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let kind = parts.next().ok_or_else(bad)?;
            let seq: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let bytes: u32 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let extra = parts.next().unwrap_or("");
            let rec = match kind {
                "send" => {
                    let retx = extra.contains("retx");
                    let field = |name: &str| {
                        extra
                            .split(';')
                            .find_map(|tok| tok.strip_prefix(name))
                            .and_then(|v| v.parse().ok())
                    };
                    let cwnd = field("cwnd=").ok_or_else(bad)?;
                    let bif = field("bif=").ok_or_else(bad)?;
                    Record::Send { seq, bytes, retx, cwnd, bif }
                }
                "link-deliver" => Record::LinkDeliver { seq, bytes },
                "ack" => Record::Ack { cum_bytes: seq },
                "drop" => Record::Drop {
                    seq,
                    bytes,
                    reason: DropReason::from_label(extra).ok_or_else(bad)?,
                },
                "phy-rate" => Record::PhyRate {
                    bps: extra.parse().map_err(|_| bad())?,
                },
                "ho-start" => Record::HoStart {
                    kind: HoKind::from_label(extra).ok_or_else(bad)?,
                },
                "ho-end" => Record::HoEnd {
                    kind: HoKind::from_label(extra).ok_or_else(bad)?,
                },
                _ => return Err(bad()),
            };
            trace.push(SimTime::from_us(t), rec);
        }
        Ok(trace)
    }

    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> std::io::Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    pub fn read_csv_file<P: AsRef<Path>>(path: P) -> Result<FlowTrace, TraceError> {
        Self::read_csv(BufReader::new(File::open(path)?))
    }
}
