//! Core data carriers: node addresses, discrete time, payloads, frames, and
//! the chunk type the medium transports one slot at a time.
//!
//! A frame occupies the medium for `dur(msg)` consecutive slots and is split
//! into chunks `(msg, 1) .. (msg, dur)`. Each listener folds the chunk it
//! receives per slot into its reassembly register with [`chunk_merge`]; a
//! register holding `(msg, dur)` means `msg` completed in the previous slot.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Discrete time, one unit per transmission slot. Durations are >= 1; clock
/// values may be any integer.
pub type Time = i64;

/// Node address. Scenario configurations map display names onto indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u8);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Network-layer datum. `User` values come from the finite alphabet declared
/// by the scenario; the two reserved markers are only ever handed upward to
/// report the outcome of a send and never appear inside frames or guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Payload {
    User(u8),
    TxSuccess,
    TxFailure,
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::User(i) => write!(f, "p{i}"),
            Payload::TxSuccess => write!(f, "sent-ok"),
            Payload::TxFailure => write!(f, "sent-fail"),
        }
    }
}

/// Link-layer frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Message {
    Data { data: Payload, src: NodeId, dest: NodeId },
    Ack { src: NodeId, dest: NodeId },
    /// Request to send; `dur` is the requested silence period, counted from
    /// the slot in which the request completes.
    Rts { src: NodeId, dest: NodeId, dur: Time },
    /// Clear to send; `dur` as for `Rts`, counted from the grant's last slot.
    Cts { src: NodeId, dest: NodeId, dur: Time },
    /// Ad-hoc test message with an explicit transmission time.
    User { tag: u16, dur: Time },
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Data { data, src, dest } => write!(f, "data[{data} {src}>{dest}]"),
            Message::Ack { src, dest } => write!(f, "ack[{src}>{dest}]"),
            Message::Rts { src, dest, dur } => write!(f, "rts[{src}>{dest},{dur}]"),
            Message::Cts { src, dest, dur } => write!(f, "cts[{src}>{dest},{dur}]"),
            Message::User { tag, dur } => write!(f, "user[{tag},{dur}]"),
        }
    }
}

/// One slot of medium content: the `c`-th fragment of a message, junk from a
/// frame collision, or nothing at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Chunk {
    Frag(Message, Time),
    Conflict,
    Idle,
}

impl fmt::Display for Chunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chunk::Frag(m, c) => write!(f, "({m}:{c})"),
            Chunk::Conflict => write!(f, "conflict"),
            Chunk::Idle => write!(f, "idle"),
        }
    }
}

/// Transmission times per frame kind, in slots. All values must be >= 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DurationConfig {
    pub ack: Time,
    pub cts: Time,
    pub rts: Time,
    /// Default data frame duration; individual payloads may override it.
    pub data: Time,
    pub data_overrides: BTreeMap<Payload, Time>,
}

impl Default for DurationConfig {
    fn default() -> Self {
        DurationConfig {
            ack: 1,
            cts: 1,
            rts: 1,
            data: 3,
            data_overrides: BTreeMap::new(),
        }
    }
}

impl DurationConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [self.ack, self.cts, self.rts, self.data]
            .into_iter()
            .chain(self.data_overrides.values().copied());
        for d in all {
            if d < 1 {
                return Err(ModelError::InvalidDuration(format!(
                    "durations must be >= 1, got {d}"
                )));
            }
        }
        Ok(())
    }
}

/// Number of slots (equivalently, chunks) needed to transmit `msg`.
pub fn dur(msg: &Message, cfg: &DurationConfig) -> Time {
    match msg {
        Message::Data { data, .. } => *cfg.data_overrides.get(data).unwrap_or(&cfg.data),
        Message::Ack { .. } => cfg.ack,
        Message::Rts { .. } => cfg.rts,
        Message::Cts { .. } => cfg.cts,
        Message::User { dur, .. } => *dur,
    }
}

/// Folds the chunk received this slot into the reassembly register. The rows
/// apply top to bottom:
///
/// ```text
///   *        * conflict  = conflict
///   *        * idle      = idle
///   *        * (m:1)     = (m:1)
///   (m:c)    * (m:c+1)   = (m:c+1)
///   rfr      * (m:c+1)   = conflict        if rfr != (m:c)
/// ```
pub fn chunk_merge(rfr: Chunk, ch: Chunk) -> Chunk {
    match ch {
        Chunk::Conflict => Chunk::Conflict,
        Chunk::Idle => Chunk::Idle,
        Chunk::Frag(m, c) => {
            if c == 1 {
                Chunk::Frag(m, 1)
            } else if rfr == Chunk::Frag(m, c - 1) {
                Chunk::Frag(m, c)
            } else {
                Chunk::Conflict
            }
        }
    }
}

/// True iff `msg` completed in the last slot: the register holds its final
/// fragment.
pub fn is_new(rfr: Chunk, msg: &Message, cfg: &DurationConfig) -> bool {
    rfr == Chunk::Frag(*msg, dur(msg, cfg))
}

/// True iff the medium was idle during the last slot.
pub fn is_idle(rfr: Chunk) -> bool {
    rfr == Chunk::Idle
}
