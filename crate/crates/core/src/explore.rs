//! Bounded construction of the probabilistic transition system.
//!
//! Exploration walks the network semantics breadth-first, counting slots:
//! a state's depth is the least number of ticks from the root, and states
//! at the horizon are kept but marked truncated instead of expanded.
//! Analyses treat truncated states pessimistically, so horizon-bounded
//! verdicts stay sound.
//!
//! When the model's time discipline allows it, states are folded modulo a
//! common clock offset: stale absolute-time values are first clamped to a
//! slack window behind the clock (beyond which no guard can distinguish
//! them), then all clocks, stored time points and pending release times are
//! shifted so the least one becomes zero. Quiescent systems then loop
//! through finitely many states, which is what makes eventuality lassos
//! detectable at all.

use std::cmp::Reverse;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BinaryHeap, HashMap};
use std::hash::{Hash, Hasher};

use crate::data::Time;
use crate::dist::Dist;
use crate::error::ExploreError;
use crate::expr::{Value, VarType};
use crate::network::{net_transitions, MobilityPolicy, NetAction, NetCtx, NetState};

pub type StateId = u32;

#[derive(Debug, Clone, Copy)]
pub struct ExploreOpts {
    /// Number of slots to explore.
    pub horizon: u32,
    /// Hard cap on stored states.
    pub budget: usize,
    /// Fold states that differ only by a clock offset. Only honored when
    /// the compiled model's time discipline supports it.
    pub normalize: bool,
}

impl Default for ExploreOpts {
    fn default() -> Self {
        ExploreOpts { horizon: 30, budget: 1_000_000, normalize: true }
    }
}

/// The explored probabilistic transition system.
#[derive(Debug)]
pub struct Plts {
    pub states: Vec<NetState>,
    pub transitions: Vec<Vec<(NetAction, Dist<StateId>)>>,
    /// Least number of ticks from the root.
    pub depth: Vec<u32>,
    /// Frontier states cut off by the horizon; they have no stored
    /// transitions.
    pub truncated: Vec<bool>,
    /// Discovery edge towards the root, for trace reconstruction.
    pub parent: Vec<Option<(StateId, NetAction)>>,
    pub initial: StateId,
    pub horizon: u32,
    /// Whether clock-offset folding was actually applied.
    pub normalized: bool,
}

impl Plts {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.iter().map(|t| t.len()).sum()
    }

    pub fn num_truncated(&self) -> usize {
        self.truncated.iter().filter(|&&t| t).count()
    }

    /// Path of labels from the root to `target` along discovery edges.
    pub fn path_from_root(&self, target: StateId) -> Vec<(StateId, NetAction, StateId)> {
        let mut rev = Vec::new();
        let mut cur = target;
        while let Some((pred, label)) = self.parent[cur as usize] {
            rev.push((pred, label, cur));
            cur = pred;
        }
        rev.reverse();
        rev
    }
}

/// Whether states of this model may be folded modulo clock offset.
pub fn normalization_applicable(ctx: &NetCtx) -> bool {
    let script_times = matches!(&ctx.mobility, MobilityPolicy::Script(ev) if !ev.is_empty());
    ctx.defs.normalizable && !script_times
}

/// Canonicalizes a state by clamping stale time points and shifting all
/// clocks by their common minimum.
pub fn normalize_state(ctx: &NetCtx, st: &NetState) -> NetState {
    let mut st = st.clone();
    if st.nodes.is_empty() {
        return st;
    }
    let slack = ctx.defs.clamp_slack;

    // Clamp: values further than `slack` behind the local clock behave
    // identically in every guard, so pin them at the window edge.
    for node in &mut st.nodes {
        let now = node.proc.xi.now;
        let vars = &mut node.proc.xi.vars;
        for (v, val) in vars.iter_mut() {
            if ctx.defs.var_type(*v) == VarType::AbsTime {
                if let Value::Int(t) = val {
                    if *t < now - slack {
                        *val = Value::Int(now - slack);
                    }
                }
            }
        }
    }
    let global_now = st.nodes[0].proc.xi.now;
    for (i, from) in st.inj_from.iter_mut().enumerate() {
        let fired = !ctx.injections[i].repeat && st.inj_fired & (1 << i) != 0;
        if !fired && *from < global_now - slack {
            *from = global_now - slack;
        }
    }

    // Shift by the least stored time point.
    let mut min = Time::MAX;
    for node in &st.nodes {
        min = min.min(node.proc.xi.now);
        for (v, val) in &node.proc.xi.vars {
            if ctx.defs.var_type(*v) == VarType::AbsTime {
                if let Value::Int(t) = val {
                    min = min.min(*t);
                }
            }
        }
    }
    for (i, from) in st.inj_from.iter().enumerate() {
        let fired = !ctx.injections[i].repeat && st.inj_fired & (1 << i) != 0;
        if !fired {
            min = min.min(*from);
        }
    }
    for node in &mut st.nodes {
        node.proc.xi.now -= min;
        for (v, val) in node.proc.xi.vars.iter_mut() {
            if ctx.defs.var_type(*v) == VarType::AbsTime {
                if let Value::Int(t) = val {
                    *val = Value::Int(*t - min);
                }
            }
        }
    }
    for (i, from) in st.inj_from.iter_mut().enumerate() {
        let fired = !ctx.injections[i].repeat && st.inj_fired & (1 << i) != 0;
        if fired {
            *from = 0; // spent entries carry no information
        } else {
            *from -= min;
        }
    }
    st
}

// Hash-consing table: states live once in `Plts::states`, the map stores
// 64-bit hashes with collision buckets verified against the arena.
struct Interner {
    buckets: HashMap<u64, Vec<StateId>>,
}

impl Interner {
    fn new() -> Self {
        Interner { buckets: HashMap::new() }
    }

    fn intern(&mut self, states: &mut Vec<NetState>, st: NetState) -> (StateId, bool) {
        let mut h = DefaultHasher::new();
        st.hash(&mut h);
        let key = h.finish();
        let bucket = self.buckets.entry(key).or_default();
        for &id in bucket.iter() {
            if states[id as usize] == st {
                return (id, false);
            }
        }
        let id = states.len() as StateId;
        states.push(st);
        bucket.push(id);
        (id, true)
    }
}

/// Builds the transition system reachable from `init` within the horizon.
pub fn explore(ctx: &NetCtx, init: NetState, opts: ExploreOpts) -> Result<Plts, ExploreError> {
    let normalized = opts.normalize && normalization_applicable(ctx);
    let canon = |s: &NetState| {
        if normalized {
            normalize_state(ctx, s)
        } else {
            s.clone()
        }
    };

    let mut states: Vec<NetState> = Vec::new();
    let mut interner = Interner::new();
    let (root, _) = interner.intern(&mut states, canon(&init));

    let mut depth: Vec<u32> = vec![0];
    let mut truncated: Vec<bool> = vec![false];
    let mut parent: Vec<Option<(StateId, NetAction)>> = vec![None];
    let mut transitions: Vec<Vec<(NetAction, Dist<StateId>)>> = vec![Vec::new()];
    let mut expanded: Vec<bool> = vec![false];

    let mut heap: BinaryHeap<Reverse<(u32, StateId)>> = BinaryHeap::new();
    heap.push(Reverse((0, root)));

    while let Some(Reverse((d, id))) = heap.pop() {
        if expanded[id as usize] || d > depth[id as usize] {
            continue;
        }
        expanded[id as usize] = true;
        if d >= opts.horizon {
            truncated[id as usize] = true;
            continue;
        }
        let st = states[id as usize].clone();
        let outgoing = net_transitions(ctx, &st)?;
        let mut stored = Vec::with_capacity(outgoing.len());
        for t in outgoing {
            let child_depth = d + u32::from(t.label == NetAction::Tick);
            let dist = t.dist.map(|succ| {
                let (cid, fresh) = interner.intern(&mut states, canon(succ));
                if fresh {
                    depth.push(child_depth);
                    truncated.push(false);
                    parent.push(Some((id, t.label)));
                    transitions.push(Vec::new());
                    expanded.push(false);
                    heap.push(Reverse((child_depth, cid)));
                } else if child_depth < depth[cid as usize] && !expanded[cid as usize] {
                    depth[cid as usize] = child_depth;
                    parent[cid as usize] = Some((id, t.label));
                    heap.push(Reverse((child_depth, cid)));
                }
                cid
            });
            if states.len() > opts.budget {
                return Err(ExploreError::BudgetExceeded { budget: opts.budget });
            }
            stored.push((t.label, dist));
        }
        transitions[id as usize] = stored;
    }

    Ok(Plts {
        states,
        transitions,
        depth,
        truncated,
        parent,
        initial: root,
        horizon: opts.horizon,
        normalized,
    })
}

/// Result of the no-time-deadlock check: every non-truncated state must be
/// able to tick, act internally, or deliver, regardless of the environment.
#[derive(Debug)]
pub struct DeadlockReport {
    pub checked: usize,
    pub offenders: Vec<StateId>,
}

impl DeadlockReport {
    pub fn passed(&self) -> bool {
        self.offenders.is_empty()
    }
}

pub fn check_deadlock_freedom(p: &Plts) -> DeadlockReport {
    let mut offenders = Vec::new();
    let mut checked = 0;
    for (id, ts) in p.transitions.iter().enumerate() {
        if p.truncated[id] {
            continue;
        }
        checked += 1;
        let ok = ts.iter().any(|(label, _)| {
            matches!(label, NetAction::Tick | NetAction::Tau | NetAction::Deliver(..))
        });
        if !ok {
            offenders.push(id as StateId);
        }
    }
    DeadlockReport { checked, offenders }
}
