//! Encapsulated networks: synchronized slots, frame collisions, and the
//! interleaving of instantaneous node actions.
//!
//! A slot happens only when every node contributes a timed participation;
//! the transmitted chunk maps are joined with [`uplus`], whose domain
//! overlaps become conflicts, and each node then receives exactly the chunk
//! the joined map assigns to its address (or an idle marker). This is also
//! what makes progress maximal: a node with pending instantaneous work has
//! no timed participation and thereby blocks the slot until done.
//!
//! The environment is explicit: a scenario's injection schedule decides
//! when a node may accept a packet from the network layer, and a mobility
//! policy decides which topology changes are available. An injection is
//! offered from its release time onward until taken, so time may still pass
//! while one is pending; the offer itself is a normal transition subject to
//! scheduler resolution.

use serde::{Deserialize, Serialize};

use crate::data::{Chunk, DurationConfig, NodeId, Payload, Time};
use crate::defs::CompiledDefs;
use crate::dist::Dist;
use crate::error::{ModelError, SemanticsError};
use crate::expr::Domains;
use crate::node::{node_advance, node_step, ChunkMap, Node, NodeAction};
use crate::process::ProcEnv;

/// Network-level transition labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NetAction {
    Tick,
    Tau,
    Deliver(NodeId, Payload),
    NewPkt(NodeId, Payload, NodeId),
    Connect(NodeId, NodeId),
    Disconnect(NodeId, NodeId),
}

impl std::fmt::Display for NetAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NetAction::Tick => write!(f, "tick"),
            NetAction::Tau => write!(f, "tau"),
            NetAction::Deliver(id, d) => write!(f, "{id}:deliver({d})"),
            NetAction::NewPkt(id, d, dest) => write!(f, "{id}:newpkt({d},{dest})"),
            NetAction::Connect(a, b) => write!(f, "connect({a},{b})"),
            NetAction::Disconnect(a, b) => write!(f, "disconnect({a},{b})"),
        }
    }
}

/// One scheduled packet hand-down. A repeating entry models a saturating
/// stream: taking it does not exhaust it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    pub node: NodeId,
    pub payload: Payload,
    pub dest: NodeId,
    pub from: Time,
    pub repeat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MobKind {
    Connect,
    Disconnect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobEvent {
    pub at: Time,
    pub kind: MobKind,
    pub a: NodeId,
    pub b: NodeId,
}

/// Topology-change policy for a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MobilityPolicy {
    Off,
    /// Timed events, fired in order once their time is reached.
    Script(Vec<MobEvent>),
    /// Every connect/disconnect is always available. Exploration under this
    /// policy is exponential; intended for small hand-made nets.
    Free,
}

/// Immutable model context shared by all states of one closed system.
#[derive(Debug, Clone)]
pub struct NetCtx {
    pub defs: CompiledDefs,
    pub durations: DurationConfig,
    pub domains: Domains,
    pub injections: Vec<Injection>,
    pub mobility: MobilityPolicy,
    /// Symmetric topology discipline: connect/disconnect edit both
    /// endpoints. When false only the first endpoint's range changes.
    pub symmetric: bool,
    pub node_names: Vec<String>,
    pub payload_names: Vec<String>,
}

impl NetCtx {
    pub fn proc_env(&self) -> ProcEnv<'_> {
        ProcEnv { defs: &self.defs, durations: &self.durations, domains: &self.domains }
    }

    pub fn node_name(&self, id: NodeId) -> String {
        self.node_names
            .get(id.0 as usize)
            .cloned()
            .unwrap_or_else(|| id.to_string())
    }

    pub fn payload_name(&self, p: Payload) -> String {
        match p {
            Payload::User(i) => self
                .payload_names
                .get(i as usize)
                .cloned()
                .unwrap_or_else(|| p.to_string()),
            other => other.to_string(),
        }
    }

    pub fn render_action(&self, a: &NetAction) -> String {
        match a {
            NetAction::Tick => "tick".into(),
            NetAction::Tau => "tau".into(),
            NetAction::Deliver(id, d) => {
                format!("{}:deliver({})", self.node_name(*id), self.payload_name(*d))
            }
            NetAction::NewPkt(id, d, dest) => format!(
                "{}:newpkt({},{})",
                self.node_name(*id),
                self.payload_name(*d),
                self.node_name(*dest)
            ),
            NetAction::Connect(a, b) => {
                format!("connect({},{})", self.node_name(*a), self.node_name(*b))
            }
            NetAction::Disconnect(a, b) => {
                format!("disconnect({},{})", self.node_name(*a), self.node_name(*b))
            }
        }
    }
}

/// State of the closed system: the nodes plus the environment's progress
/// through its schedule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetState {
    pub nodes: Vec<Node>,
    /// Bit i set iff one-shot injection i has been taken.
    pub inj_fired: u64,
    /// Release times of the schedule entries; kept in the state so clock
    /// normalization can shift them along with the clocks.
    pub inj_from: Vec<Time>,
    /// Next unfired scripted mobility event.
    pub mob_cursor: u16,
}

impl NetState {
    pub fn new(nodes: Vec<Node>, ctx: &NetCtx) -> Self {
        NetState {
            nodes,
            inj_fired: 0,
            inj_from: ctx.injections.iter().map(|i| i.from).collect(),
            mob_cursor: 0,
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

/// One network transition. Ticks carry the joined transmission map so
/// traces can show what crossed the medium.
#[derive(Debug, Clone)]
pub struct NetTransition {
    pub label: NetAction,
    pub dist: Dist<NetState>,
    pub traffic: Option<ChunkMap>,
}

/// Join of transmitted chunk maps; both transmitting to the same address
/// is a frame collision there.
pub fn uplus(t1: &ChunkMap, t2: &ChunkMap) -> ChunkMap {
    let mut out = t1.clone();
    for (id, ch) in t2 {
        out.entry(*id)
            .and_modify(|e| *e = Chunk::Conflict)
            .or_insert(*ch);
    }
    out
}

/// Connectivity predicate: `dest` lies in the transmission range of `id`.
pub fn cntd(st: &NetState, id: NodeId, dest: NodeId) -> Result<bool, ModelError> {
    if st.node(dest).is_none() {
        return Err(ModelError::UnknownNode(dest));
    }
    let n = st.node(id).ok_or(ModelError::UnknownNode(id))?;
    Ok(n.range.contains(&dest))
}

/// The injection currently offered to the node at `node_idx`, if any.
/// Entries are offered in schedule order, one per node at a time.
pub fn enabled_injection(ctx: &NetCtx, st: &NetState, node_idx: usize) -> Option<(usize, Payload, NodeId)> {
    let node = &st.nodes[node_idx];
    let now = node.proc.xi.now;
    ctx.injections.iter().enumerate().find_map(|(i, inj)| {
        let pending = inj.repeat || st.inj_fired & (1 << i) == 0;
        if inj.node == node.id && pending && now >= st.inj_from[i] {
            Some((i, inj.payload, inj.dest))
        } else {
            None
        }
    })
}

fn apply_mobility(ctx: &NetCtx, st: &NetState, kind: MobKind, a: NodeId, b: NodeId, advance_cursor: bool) -> NetState {
    let nodes = st
        .nodes
        .iter()
        .map(|n| {
            if ctx.symmetric {
                match kind {
                    MobKind::Connect => crate::node::apply_connect(n, a, b),
                    MobKind::Disconnect => crate::node::apply_disconnect(n, a, b),
                }
            } else if n.id == a {
                let mut range = n.range.clone();
                match kind {
                    MobKind::Connect => {
                        range.insert(b);
                    }
                    MobKind::Disconnect => {
                        range.remove(&b);
                    }
                }
                Node { id: n.id, proc: n.proc.clone(), range }
            } else {
                n.clone()
            }
        })
        .collect();
    NetState {
        nodes,
        inj_fired: st.inj_fired,
        inj_from: st.inj_from.clone(),
        mob_cursor: st.mob_cursor + if advance_cursor { 1 } else { 0 },
    }
}

/// All transitions of the encapsulated network.
///
/// One reduction is applied: a node whose entire behaviour is a single
/// internal step into a point distribution is run first and alone. Such a
/// step commutes with everything other nodes can do and blocks the slot
/// anyway, so interleaving it would only square the transient state count;
/// no scheduler choice and no labelled behaviour is lost.
pub fn net_transitions(ctx: &NetCtx, st: &NetState) -> Result<Vec<NetTransition>, SemanticsError> {
    let env = ctx.proc_env();
    let mut out = Vec::new();

    let mut per_node_instants = Vec::with_capacity(st.nodes.len());
    let mut per_node_timed = Vec::with_capacity(st.nodes.len());
    let mut injections = Vec::with_capacity(st.nodes.len());
    for (i, node) in st.nodes.iter().enumerate() {
        let inj = enabled_injection(ctx, st, i);
        let (instants, timed) = node_step(&env, node, inj.map(|(_, p, d)| (p, d)))?;
        per_node_instants.push(instants);
        per_node_timed.push(timed);
        injections.push(inj);
    }

    // The confluence reduction: lowest forced node goes first.
    let forced = (0..st.nodes.len()).find(|&i| {
        per_node_timed[i].is_empty()
            && per_node_instants[i].len() == 1
            && matches!(&per_node_instants[i][0], (NodeAction::Tau, d) if d.is_point())
    });

    // Instantaneous actions of each node, interleaved.
    for (i, instants) in per_node_instants.iter().enumerate() {
        if let Some(f) = forced {
            if i != f {
                continue;
            }
        }
        let inj = injections[i];
        for (action, dist) in instants {
            let label = match *action {
                NodeAction::Tau => NetAction::Tau,
                NodeAction::Deliver(id, d) => NetAction::Deliver(id, d),
                NodeAction::NewPkt(id, d, dest) => NetAction::NewPkt(id, d, dest),
            };
            let fired = match (*action, inj) {
                (NodeAction::NewPkt(..), Some((idx, _, _))) if !ctx.injections[idx].repeat => {
                    st.inj_fired | (1 << idx)
                }
                _ => st.inj_fired,
            };
            let dist = dist.map(|n| {
                let mut nodes = st.nodes.clone();
                nodes[i] = n.clone();
                NetState {
                    nodes,
                    inj_fired: fired,
                    inj_from: st.inj_from.clone(),
                    mob_cursor: st.mob_cursor,
                }
            });
            out.push(NetTransition { label, dist, traffic: None });
        }
    }
    if forced.is_some() {
        return Ok(out);
    }

    // Topology changes, synchronized across all nodes.
    match &ctx.mobility {
        MobilityPolicy::Off => {}
        MobilityPolicy::Script(events) => {
            if let Some(ev) = events.get(st.mob_cursor as usize) {
                let now = st.nodes.first().map(|n| n.proc.xi.now).unwrap_or(0);
                if now >= ev.at {
                    let label = match ev.kind {
                        MobKind::Connect => NetAction::Connect(ev.a, ev.b),
                        MobKind::Disconnect => NetAction::Disconnect(ev.a, ev.b),
                    };
                    let succ = apply_mobility(ctx, st, ev.kind, ev.a, ev.b, true);
                    out.push(NetTransition { label, dist: Dist::point(succ), traffic: None });
                }
            }
        }
        MobilityPolicy::Free => {
            for &a in &ctx.domains.ids {
                for &b in &ctx.domains.ids {
                    if a == b {
                        continue;
                    }
                    for kind in [MobKind::Connect, MobKind::Disconnect] {
                        let label = match kind {
                            MobKind::Connect => NetAction::Connect(a, b),
                            MobKind::Disconnect => NetAction::Disconnect(a, b),
                        };
                        let succ = apply_mobility(ctx, st, kind, a, b, false);
                        out.push(NetTransition { label, dist: Dist::point(succ), traffic: None });
                    }
                }
            }
        }
    }

    // The synchronized slot: enabled only when every node participates.
    let per_node = per_node_timed;
    let tick_possible = per_node.iter().all(|offers| !offers.is_empty());
    if tick_possible {
        let mut combo = vec![0usize; per_node.len()];
        loop {
            let mut traffic = ChunkMap::new();
            for (i, offers) in per_node.iter().enumerate() {
                traffic = uplus(&traffic, &offers[combo[i]].transmitted);
            }
            let nodes: Vec<Node> = st
                .nodes
                .iter()
                .enumerate()
                .map(|(i, node)| {
                    let ch = traffic.get(&node.id).copied().unwrap_or(Chunk::Idle);
                    node_advance(node, &per_node[i][combo[i]], ch)
                })
                .collect();
            let succ = NetState {
                nodes,
                inj_fired: st.inj_fired,
                inj_from: st.inj_from.clone(),
                mob_cursor: st.mob_cursor,
            };
            out.push(NetTransition {
                label: NetAction::Tick,
                dist: Dist::point(succ),
                traffic: Some(traffic),
            });

            // Advance the cartesian product over per-node offers.
            let mut i = 0;
            loop {
                if i == combo.len() {
                    break;
                }
                combo[i] += 1;
                if combo[i] < per_node[i].len() {
                    break;
                }
                combo[i] = 0;
                i += 1;
            }
            if i == combo.len() {
                break;
            }
        }
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::*;
    use crate::data::Message;
    use crate::defs::DefsBuilder;
    use crate::expr::VarType;
    use crate::process::{ProcState, Valuation};

    fn two_ids() -> Vec<NodeId> {
        vec![NodeId(0), NodeId(1)]
    }

    fn make_ctx(build: impl FnOnce(&mut DefsBuilder), ids: Vec<NodeId>) -> NetCtx {
        let mut b = DefsBuilder::new();
        build(&mut b);
        NetCtx {
            defs: b.compile().unwrap(),
            durations: DurationConfig::default(),
            domains: Domains { ids, payloads: vec![Payload::User(0)] },
            injections: vec![],
            mobility: MobilityPolicy::Off,
            symmetric: true,
            node_names: vec![],
            payload_names: vec![],
        }
    }

    fn make_node(ctx: &NetCtx, id: u8, proc_name: &str, range: &[u8]) -> Node {
        let body = ctx.defs.proc(ctx.defs.proc_by_name(proc_name).unwrap()).body;
        Node {
            id: NodeId(id),
            proc: ProcState { expr: body, xi: Valuation::initial() },
            range: range.iter().map(|&i| NodeId(i)).collect(),
        }
    }

    #[test]
    fn uplus_identity_overlap_and_algebra() {
        let m = Message::User { tag: 0, dur: 1 };
        let m2 = Message::User { tag: 1, dur: 1 };
        let empty = ChunkMap::new();
        let t1: ChunkMap = [(NodeId(1), Chunk::Frag(m, 1))].into_iter().collect();
        let t2: ChunkMap = [(NodeId(1), Chunk::Frag(m2, 1))].into_iter().collect();
        assert_eq!(uplus(&empty, &t1), t1);
        assert_eq!(uplus(&t1, &empty), t1);
        let joined = uplus(&t1, &t2);
        assert_eq!(joined.get(&NodeId(1)), Some(&Chunk::Conflict));
        // Conflicts swallow later joins in any association order.
        let t3: ChunkMap = [(NodeId(1), Chunk::Frag(m, 1))].into_iter().collect();
        assert_eq!(uplus(&joined, &t3), uplus(&t1, &uplus(&t2, &t3)));
    }

    #[test]
    fn two_waiting_nodes_tick_and_receive_idle() {
        let ctx = make_ctx(
            |b| {
                b.proc("P", &[], guard(ff(), call("P", vec![])));
            },
            two_ids(),
        );
        let st = NetState::new(
            vec![make_node(&ctx, 0, "P", &[1]), make_node(&ctx, 1, "P", &[0])],
            &ctx,
        );
        let ts = net_transitions(&ctx, &st).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].label, NetAction::Tick);
        let succ = ts[0].dist.support().next().unwrap();
        for n in &succ.nodes {
            assert_eq!(n.proc.xi.now, 1);
            assert_eq!(n.proc.xi.rfr, Chunk::Idle);
        }
    }

    #[test]
    fn transmission_reaches_range_and_self_reception_follows_own_range() {
        let m = Message::User { tag: 9, dur: 1 };
        let ctx = make_ctx(
            |b| {
                b.proc("T", &[], transmit(msg_lit(m), guard(ff(), call("T", vec![]))));
                b.proc("W", &[], guard(ff(), call("W", vec![])));
            },
            two_ids(),
        );
        // Sender not in its own range: it hears nothing of its own frame.
        let st = NetState::new(
            vec![make_node(&ctx, 0, "T", &[1]), make_node(&ctx, 1, "W", &[0])],
            &ctx,
        );
        let ts = net_transitions(&ctx, &st).unwrap();
        assert_eq!(ts.len(), 1);
        let succ = ts[0].dist.support().next().unwrap();
        assert_eq!(succ.node(NodeId(1)).unwrap().proc.xi.rfr, Chunk::Frag(m, 1));
        assert_eq!(succ.node(NodeId(0)).unwrap().proc.xi.rfr, Chunk::Idle);

        // Sender inside its own range receives its own fragment.
        let st = NetState::new(
            vec![make_node(&ctx, 0, "T", &[0, 1]), make_node(&ctx, 1, "W", &[0])],
            &ctx,
        );
        let ts = net_transitions(&ctx, &st).unwrap();
        let succ = ts[0].dist.support().next().unwrap();
        assert_eq!(succ.node(NodeId(0)).unwrap().proc.xi.rfr, Chunk::Frag(m, 1));
    }

    #[test]
    fn simultaneous_transmitters_collide_at_the_shared_receiver() {
        let ma = Message::User { tag: 1, dur: 1 };
        let mc = Message::User { tag: 2, dur: 1 };
        let ctx = make_ctx(
            |b| {
                b.proc("A", &[], transmit(msg_lit(ma), guard(ff(), call("A", vec![]))));
                b.proc("C", &[], transmit(msg_lit(mc), guard(ff(), call("C", vec![]))));
                b.proc("B", &[], guard(ff(), call("B", vec![])));
            },
            vec![NodeId(0), NodeId(1), NodeId(2)],
        );
        let st = NetState::new(
            vec![
                make_node(&ctx, 0, "A", &[1]),
                make_node(&ctx, 1, "B", &[0, 2]),
                make_node(&ctx, 2, "C", &[1]),
            ],
            &ctx,
        );
        let ts = net_transitions(&ctx, &st).unwrap();
        assert_eq!(ts.len(), 1);
        let traffic = ts[0].traffic.as_ref().unwrap();
        assert_eq!(traffic.get(&NodeId(1)), Some(&Chunk::Conflict));
        let succ = ts[0].dist.support().next().unwrap();
        assert_eq!(succ.node(NodeId(1)).unwrap().proc.xi.rfr, Chunk::Conflict);
        // A transmitting node out of its own range still hears nothing.
        assert_eq!(succ.node(NodeId(0)).unwrap().proc.xi.rfr, Chunk::Idle);
    }

    #[test]
    fn own_range_transmitter_gets_conflict_when_a_neighbour_transmits() {
        let ma = Message::User { tag: 1, dur: 1 };
        let mb = Message::User { tag: 2, dur: 1 };
        let ctx = make_ctx(
            |b| {
                b.proc("A", &[], transmit(msg_lit(ma), guard(ff(), call("A", vec![]))));
                b.proc("B", &[], transmit(msg_lit(mb), guard(ff(), call("B", vec![]))));
            },
            two_ids(),
        );
        let st = NetState::new(
            vec![make_node(&ctx, 0, "A", &[0, 1]), make_node(&ctx, 1, "B", &[0, 1])],
            &ctx,
        );
        let ts = net_transitions(&ctx, &st).unwrap();
        let succ = ts[0].dist.support().next().unwrap();
        assert_eq!(succ.node(NodeId(0)).unwrap().proc.xi.rfr, Chunk::Conflict);
        assert_eq!(succ.node(NodeId(1)).unwrap().proc.xi.rfr, Chunk::Conflict);
    }

    #[test]
    fn pending_instant_work_blocks_the_slot() {
        let ctx = make_ctx(
            |b| {
                b.var("x", VarType::Int);
                b.proc("P", &[], assign("x", ilit(1), guard(ff(), call("P", vec![]))));
                b.proc("W", &[], guard(ff(), call("W", vec![])));
            },
            two_ids(),
        );
        let st = NetState::new(
            vec![make_node(&ctx, 0, "P", &[1]), make_node(&ctx, 1, "W", &[0])],
            &ctx,
        );
        let ts = net_transitions(&ctx, &st).unwrap();
        assert!(ts.iter().all(|t| t.label != NetAction::Tick));
        assert!(ts.iter().any(|t| t.label == NetAction::Tau));
    }

    #[test]
    fn injection_is_offered_from_release_time_until_taken() {
        let mut ctx = make_ctx(
            |b| {
                b.var("d", VarType::Data);
                b.var("dst", VarType::Id);
                b.proc("P", &[], newpkt("d", "dst", guard(ff(), call("P", vec![]))));
            },
            two_ids(),
        );
        ctx.injections = vec![Injection {
            node: NodeId(0),
            payload: Payload::User(0),
            dest: NodeId(1),
            from: 1,
            repeat: false,
        }];
        let st = NetState::new(
            vec![make_node(&ctx, 0, "P", &[1]), make_node(&ctx, 1, "P", &[0])],
            &ctx,
        );
        // Not released yet: only the slot is available.
        let ts = net_transitions(&ctx, &st).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].label, NetAction::Tick);
        let after_tick = ts[0].dist.support().next().unwrap().clone();

        // Released: both the injection and further waiting are offered.
        let ts = net_transitions(&ctx, &after_tick).unwrap();
        let labels: Vec<NetAction> = ts.iter().map(|t| t.label).collect();
        assert!(labels.contains(&NetAction::Tick));
        assert!(labels.contains(&NetAction::NewPkt(NodeId(0), Payload::User(0), NodeId(1))));

        // Taking it consumes the one-shot entry.
        let taken = ts
            .iter()
            .find(|t| matches!(t.label, NetAction::NewPkt(..)))
            .unwrap()
            .dist
            .support()
            .next()
            .unwrap()
            .clone();
        assert_eq!(taken.inj_fired, 1);
        let ts = net_transitions(&ctx, &taken).unwrap();
        assert!(ts.iter().all(|t| !matches!(t.label, NetAction::NewPkt(..))));
    }

    #[test]
    fn scripted_mobility_fires_in_order_and_edits_symmetrically() {
        let mut ctx = make_ctx(
            |b| {
                b.proc("P", &[], guard(ff(), call("P", vec![])));
            },
            two_ids(),
        );
        ctx.mobility = MobilityPolicy::Script(vec![MobEvent {
            at: 0,
            kind: MobKind::Connect,
            a: NodeId(0),
            b: NodeId(1),
        }]);
        let st = NetState::new(
            vec![make_node(&ctx, 0, "P", &[]), make_node(&ctx, 1, "P", &[])],
            &ctx,
        );
        let ts = net_transitions(&ctx, &st).unwrap();
        let conn = ts
            .iter()
            .find(|t| t.label == NetAction::Connect(NodeId(0), NodeId(1)))
            .expect("connect event due");
        let succ = conn.dist.support().next().unwrap();
        assert!(succ.node(NodeId(0)).unwrap().range.contains(&NodeId(1)));
        assert!(succ.node(NodeId(1)).unwrap().range.contains(&NodeId(0)));
        assert_eq!(succ.mob_cursor, 1);
        assert!(cntd(succ, NodeId(0), NodeId(1)).unwrap());
        assert!(!cntd(&st, NodeId(0), NodeId(1)).unwrap());
    }

    #[test]
    fn cntd_rejects_unknown_ids() {
        let ctx = make_ctx(
            |b| {
                b.proc("P", &[], guard(ff(), call("P", vec![])));
            },
            two_ids(),
        );
        let st = NetState::new(vec![make_node(&ctx, 0, "P", &[])], &ctx);
        assert!(cntd(&st, NodeId(0), NodeId(9)).is_err());
    }
}
