//! Sender and receiver endpoints driving a congestion controller over the
//! simulated link.

pub mod receiver;
pub mod sender;

pub use receiver::Receiver;
pub use sender::{Sender, SenderAction, SenderConfig};

use crate::time::SimTime;

/// Unit of simulated transfer. `seq` is a byte offset; original
/// transmissions are MSS-aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub seq: u64,
    pub size: u32,
    pub sent_at: SimTime,
    pub is_retx: bool,
}
