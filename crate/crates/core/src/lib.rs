//! Executable semantics and analysis toolkit for collision-aware,
//! probabilistic link layer protocol models.
//!
//! The crate is layered the way the models are:
//!
//! * [`data`] — time, addresses, frames, and the chunk algebra the medium
//!   carries one slot at a time;
//! * [`builder`] / [`defs`] / [`process`] — sequential process definitions
//!   and their operational semantics, including uniform probabilistic
//!   choice with exact rational weights;
//! * [`node`] / [`network`] — addressed processes with transmission
//!   ranges, and the encapsulated composition in which simultaneous
//!   transmissions to one address collide;
//! * [`explore`] / [`liveness`] / [`bisim`] — bounded construction of the
//!   probabilistic transition system, deadlock-freedom and eventuality
//!   checking, minimal reachability probabilities over schedulers, and
//!   strong probabilistic bisimulation;
//! * [`csma`] / [`scenario`] / [`sim`] — carrier-sense multiple access
//!   models with and without virtual carrier sensing, the standard
//!   interference scenarios, and seeded Monte-Carlo simulation.

pub mod bisim;
pub mod builder;
pub mod csma;
pub mod data;
pub mod defs;
pub mod dist;
pub mod error;
pub mod expr;
pub mod explore;
pub mod liveness;
pub mod network;
pub mod node;
pub mod process;
pub mod scenario;
pub mod sim;

pub use data::{chunk_merge, dur, is_idle, is_new, Chunk, DurationConfig, Message, NodeId, Payload, Time};
pub use dist::{prob, Dist, Prob};
pub use error::{ExploreError, ModelError, SemanticsError};
