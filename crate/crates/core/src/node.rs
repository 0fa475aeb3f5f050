//! Node expressions: an addressed process with a transmission range.
//!
//! Timed process behaviour lifts to traffic: a transmitting node sends the
//! current fragment to every node in its range, a waiting node sends
//! nothing. Instantaneous actions are inherited with the node's address
//! attached. Connect and disconnect events edit ranges; under the symmetric
//! topology discipline both endpoints apply them.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::data::{Chunk, NodeId, Payload};
use crate::dist::Dist;
use crate::error::SemanticsError;
use crate::process::{advance, step, ProcAction, ProcEnv, ProcState, TimedOffer};

pub type ChunkMap = BTreeMap<NodeId, Chunk>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub id: NodeId,
    pub proc: ProcState,
    pub range: BTreeSet<NodeId>,
}

/// Node-level actions as the network layer sees them. Time-consuming
/// behaviour is reported separately as [`NodeTimed`] traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeAction {
    Tau,
    Deliver(NodeId, Payload),
    NewPkt(NodeId, Payload, NodeId),
}

/// One timed participation: the chunks this node puts on the medium, and
/// the pending continuation awaiting the chunk the medium delivers back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTimed {
    pub transmitted: ChunkMap,
    offer: TimedOffer,
}

/// Instantaneous transitions paired with timed participations.
pub type NodeStep = (Vec<(NodeAction, Dist<Node>)>, Vec<NodeTimed>);

/// Both transition families of a node from one evaluation of the process
/// semantics: instantaneous actions lifted pointwise, and timed
/// participations.
pub fn node_step(
    env: &ProcEnv,
    node: &Node,
    inj: Option<(Payload, NodeId)>,
) -> Result<NodeStep, SemanticsError> {
    let r = step(env, &node.proc, inj)?;
    let instants = r
        .instants
        .into_iter()
        .map(|(a, d)| {
            let label = match a {
                ProcAction::Tau => NodeAction::Tau,
                ProcAction::DeliverOut(p) => NodeAction::Deliver(node.id, p),
                ProcAction::NewPktIn(p, dst) => NodeAction::NewPkt(node.id, p, dst),
            };
            let lifted = d.map(|ps| Node {
                id: node.id,
                proc: ps.clone(),
                range: node.range.clone(),
            });
            (label, lifted)
        })
        .collect();
    let timed = r
        .offers
        .into_iter()
        .map(|offer| {
            let transmitted = match offer.chunk() {
                Some(fr) => node.range.iter().map(|&r| (r, fr)).collect(),
                None => ChunkMap::new(),
            };
            NodeTimed { transmitted, offer }
        })
        .collect();
    Ok((instants, timed))
}

/// Instantaneous transitions of a node, lifted pointwise onto node states.
pub fn node_instants(
    env: &ProcEnv,
    node: &Node,
    inj: Option<(Payload, NodeId)>,
) -> Result<Vec<(NodeAction, Dist<Node>)>, SemanticsError> {
    Ok(node_step(env, node, inj)?.0)
}

/// Timed participations of a node. Empty when only instantaneous actions
/// are enabled, in which case the node cannot take part in a slot yet.
pub fn node_timed(
    env: &ProcEnv,
    node: &Node,
    inj: Option<(Payload, NodeId)>,
) -> Result<Vec<NodeTimed>, SemanticsError> {
    Ok(node_step(env, node, inj)?.1)
}

/// Completes a timed participation once the network has fixed the chunk
/// this node receives for the slot.
pub fn node_advance(node: &Node, t: &NodeTimed, ch: Chunk) -> Node {
    Node {
        id: node.id,
        proc: advance(&node.proc.xi, &t.offer, ch),
        range: node.range.clone(),
    }
}

pub fn apply_connect(node: &Node, a: NodeId, b: NodeId) -> Node {
    let mut range = node.range.clone();
    if node.id == a {
        range.insert(b);
    }
    if node.id == b {
        range.insert(a);
    }
    Node { id: node.id, proc: node.proc.clone(), range }
}

pub fn apply_disconnect(node: &Node, a: NodeId, b: NodeId) -> Node {
    let mut range = node.range.clone();
    if node.id == a {
        range.remove(&b);
    }
    if node.id == b {
        range.remove(&a);
    }
    Node { id: node.id, proc: node.proc.clone(), range }
}
