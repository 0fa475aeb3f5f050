//! Operational semantics of sequential processes.
//!
//! A process state pairs a program point with a valuation. Every state
//! yields two transition families:
//!
//! * instantaneous steps — internal steps, packet requests from the layer
//!   above, and deliveries to it — each ending in a distribution over
//!   successor states;
//! * timed offers — either the transmission of the next chunk of a frame or
//!   a plain wait — which the network layer synchronizes into one slot.
//!
//! Timed offers are resolved in two phases: the offer fixes the program
//! point and user bindings of the successor, and [`advance`] later applies
//! the chunk the medium delivered for the slot, folding it into the
//! reassembly register and stepping the clock. Waits never change the
//! program point and never unfold recursion; transmissions advance the
//! chunk counter and move on to the continuation after the final chunk.

use std::collections::BTreeMap;

use crate::data::{chunk_merge, dur, Chunk, DurationConfig, Message, NodeId, Payload, Time};
use crate::defs::{Binder, CompiledDefs, GuardPlan, NodeRef, SeqNode};
use crate::dist::Dist;
use crate::error::SemanticsError;
use crate::expr::{Domains, EvalCtx, Value, VarId};

/// Guard against defining equations that unfold without performing an
/// action.
const MAX_UNFOLD: usize = 128;

pub type VarMap = BTreeMap<VarId, Value>;

/// Valuation: the three read-only registers plus the user bindings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation {
    pub now: Time,
    pub rfr: Chunk,
    pub counter: Time,
    pub vars: VarMap,
}

impl Valuation {
    pub fn initial() -> Self {
        Valuation { now: 0, rfr: Chunk::Idle, counter: 0, vars: VarMap::new() }
    }
}

/// A process state: program point plus valuation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcState {
    pub expr: NodeRef,
    pub xi: Valuation,
}

/// Instantaneous process actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcAction {
    Tau,
    /// A packet for `dest` handed down by the network layer.
    NewPktIn(Payload, NodeId),
    /// Data handed up to the network layer.
    DeliverOut(Payload),
}

/// What a process offers for the next time slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OfferKind {
    /// Transmit fragment `idx` of `msg` during the slot.
    Transmit { msg: Message, idx: Time },
    Wait,
}

/// A timed offer: the successor program point and bindings are fixed now,
/// the received chunk is applied when the slot completes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedOffer {
    pub kind: OfferKind,
    next_expr: NodeRef,
    next_vars: VarMap,
    next_counter: Time,
}

impl TimedOffer {
    pub fn chunk(&self) -> Option<Chunk> {
        match self.kind {
            OfferKind::Transmit { msg, idx } => Some(Chunk::Frag(msg, idx)),
            OfferKind::Wait => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct StepResult {
    pub instants: Vec<(ProcAction, Dist<ProcState>)>,
    pub offers: Vec<TimedOffer>,
}

impl StepResult {
    fn has_wait(&self) -> bool {
        self.offers.iter().any(|o| o.kind == OfferKind::Wait)
    }

    fn canonicalize(&mut self) {
        self.instants.sort();
        self.instants.dedup();
        self.offers.sort();
        self.offers.dedup();
    }
}

/// Immutable evaluation environment shared by all nodes of a model.
#[derive(Debug, Clone, Copy)]
pub struct ProcEnv<'a> {
    pub defs: &'a CompiledDefs,
    pub durations: &'a DurationConfig,
    pub domains: &'a Domains,
}

impl<'a> ProcEnv<'a> {
    fn ectx(&self, vars: &'a VarMap, now: Time, rfr: Chunk) -> EvalCtx<'a> {
        EvalCtx { durations: self.durations, now, rfr, vars }
    }
}

/// All transitions of a process state. `inj` is the packet the environment
/// currently offers this node, if any.
pub fn step(
    env: &ProcEnv,
    st: &ProcState,
    inj: Option<(Payload, NodeId)>,
) -> Result<StepResult, SemanticsError> {
    let mut r = eval_step(
        env,
        st.expr,
        &st.xi.vars,
        st.xi.now,
        st.xi.rfr,
        st.xi.counter,
        inj,
        0,
    )?;
    r.canonicalize();
    Ok(r)
}

/// Only the instantaneous transitions of a state.
pub fn instant_steps(
    env: &ProcEnv,
    st: &ProcState,
    inj: Option<(Payload, NodeId)>,
) -> Result<Vec<(ProcAction, Dist<ProcState>)>, SemanticsError> {
    Ok(step(env, st, inj)?.instants)
}

/// Only the timed offers of a state. Empty means the state is purely
/// instantaneous and cannot take part in a slot yet.
pub fn timed_offers(
    env: &ProcEnv,
    st: &ProcState,
    inj: Option<(Payload, NodeId)>,
) -> Result<Vec<TimedOffer>, SemanticsError> {
    Ok(step(env, st, inj)?.offers)
}

/// Applies the chunk received for the slot to a timed offer, producing the
/// successor state. The register folds the chunk in and the clock advances.
pub fn advance(xi: &Valuation, offer: &TimedOffer, ch: Chunk) -> ProcState {
    ProcState {
        expr: offer.next_expr,
        xi: Valuation {
            now: xi.now + 1,
            rfr: chunk_merge(xi.rfr, ch),
            counter: offer.next_counter,
            vars: offer.next_vars.clone(),
        },
    }
}

fn wait_offer(expr: NodeRef, vars: &VarMap, counter: Time) -> TimedOffer {
    TimedOffer { kind: OfferKind::Wait, next_expr: expr, next_vars: vars.clone(), next_counter: counter }
}

fn point(expr: NodeRef, vars: VarMap, now: Time, rfr: Chunk, counter: Time) -> Dist<ProcState> {
    Dist::point(ProcState { expr, xi: Valuation { now, rfr, counter, vars } })
}

#[allow(clippy::too_many_arguments)]
fn eval_step(
    env: &ProcEnv,
    node: NodeRef,
    vars: &VarMap,
    now: Time,
    rfr: Chunk,
    counter: Time,
    inj: Option<(Payload, NodeId)>,
    depth: usize,
) -> Result<StepResult, SemanticsError> {
    let mut r = StepResult::default();
    match env.defs.node(node) {
        SeqNode::Assign { var, expr, then } => match env.ectx(vars, now, rfr).eval(expr) {
            Some(v) => {
                let mut nv = vars.clone();
                nv.insert(*var, v);
                r.instants.push((ProcAction::Tau, point(*then, nv, now, rfr, counter)));
            }
            None => r.offers.push(wait_offer(node, vars, counter)),
        },
        SeqNode::Deliver { data, then } => match env.ectx(vars, now, rfr).eval(data) {
            Some(Value::Data(p)) => {
                r.instants.push((
                    ProcAction::DeliverOut(p),
                    point(*then, vars.clone(), now, rfr, counter),
                ));
            }
            _ => r.offers.push(wait_offer(node, vars, counter)),
        },
        SeqNode::Transmit { msg, then } => match env.ectx(vars, now, rfr).eval(msg) {
            Some(Value::Msg(m)) => {
                let d = dur(&m, env.durations);
                let idx = counter + 1;
                debug_assert!(idx <= d, "chunk counter ran past the message duration");
                let (next_expr, next_counter) = if idx < d { (node, counter + 1) } else { (*then, 0) };
                r.offers.push(TimedOffer {
                    kind: OfferKind::Transmit { msg: m, idx },
                    next_expr,
                    next_vars: vars.clone(),
                    next_counter,
                });
            }
            _ => r.offers.push(wait_offer(node, vars, counter)),
        },
        SeqNode::NewPkt { data, dest, then } => {
            // A packet request can always be postponed by waiting.
            r.offers.push(wait_offer(node, vars, counter));
            if let Some((p, dst)) = inj {
                let mut nv = vars.clone();
                nv.insert(*data, Value::Data(p));
                nv.insert(*dest, Value::Id(dst));
                r.instants
                    .push((ProcAction::NewPktIn(p, dst), point(*then, nv, now, rfr, counter)));
            }
        }
        SeqNode::Guard { plan, phi, then } => {
            let plan = env.defs.guard_plan(*plan);
            let extensions = satisfying_extensions(env, plan, phi, vars, now, rfr);
            if extensions.is_empty() {
                r.offers.push(wait_offer(node, vars, counter));
            } else {
                for zeta in extensions {
                    r.instants.push((ProcAction::Tau, point(*then, zeta, now, rfr, counter)));
                }
            }
        }
        SeqNode::ProbChoice { var, bound, then } => {
            let n = match env.ectx(vars, now, rfr).eval(bound) {
                Some(Value::Int(n)) => n,
                _ => return Err(SemanticsError::UnvaluedProbBound),
            };
            if n < 0 {
                return Err(SemanticsError::NegativeProbBound(n));
            }
            let states = (0..=n).map(|i| {
                let mut nv = vars.clone();
                nv.insert(*var, Value::Int(i));
                ProcState { expr: *then, xi: Valuation { now, rfr, counter, vars: nv } }
            });
            r.instants.push((ProcAction::Tau, Dist::uniform(states)));
        }
        SeqNode::Choice { left, right } => {
            let l = eval_step(env, *left, vars, now, rfr, counter, inj, depth)?;
            let rr = eval_step(env, *right, vars, now, rfr, counter, inj, depth)?;
            let both_wait = l.has_wait() && rr.has_wait();
            r.instants.extend(l.instants);
            r.instants.extend(rr.instants);
            // Transmissions pass through and drop the other branch; the
            // choice itself waits only when both branches can.
            r.offers
                .extend(l.offers.into_iter().filter(|o| o.kind != OfferKind::Wait));
            r.offers
                .extend(rr.offers.into_iter().filter(|o| o.kind != OfferKind::Wait));
            if both_wait {
                r.offers.push(wait_offer(node, vars, counter));
            }
        }
        SeqNode::Call { proc, args } => {
            let ctx = env.ectx(vars, now, rfr);
            let vals: Option<Vec<Value>> = args.iter().map(|a| ctx.eval(a)).collect();
            match vals {
                None => r.offers.push(wait_offer(node, vars, counter)),
                Some(vals) => {
                    if depth >= MAX_UNFOLD {
                        return Err(SemanticsError::RecursionLimit(MAX_UNFOLD));
                    }
                    let def = env.defs.proc(*proc);
                    // Unfolding keeps only the read-only registers and the
                    // fresh parameter bindings.
                    let inner_vars: VarMap =
                        def.params.iter().copied().zip(vals).collect();
                    let inner =
                        eval_step(env, def.body, &inner_vars, now, rfr, counter, inj, depth + 1)?;
                    let body_waits = inner.has_wait();
                    r.instants.extend(inner.instants);
                    r.offers
                        .extend(inner.offers.into_iter().filter(|o| o.kind != OfferKind::Wait));
                    if body_waits {
                        // Waiting does not unfold the recursion.
                        r.offers.push(wait_offer(node, vars, counter));
                    }
                }
            }
        }
    }
    Ok(r)
}

// All extensions of the valuation that bind exactly the free variables of
// the guard and satisfy it, in deterministic order.
fn satisfying_extensions(
    env: &ProcEnv,
    plan: &GuardPlan,
    phi: &crate::expr::Formula<VarId>,
    vars: &VarMap,
    now: Time,
    rfr: Chunk,
) -> Vec<VarMap> {
    let mut candidates: Vec<(VarId, Vec<Value>)> = Vec::with_capacity(plan.free.len());
    for (v, binder) in &plan.free {
        debug_assert!(!vars.contains_key(v), "free guard variable already bound");
        let mut vals = match binder {
            Binder::Domain(ty) => env
                .domains
                .values_of(*ty)
                .expect("domain binder over non-finite type"),
            Binder::Unify(projs) => {
                let mut vals = Vec::new();
                if let Chunk::Frag(m, c) = rfr {
                    if c == dur(&m, env.durations) {
                        for p in projs {
                            if let Some(val) = p.project(&m) {
                                vals.push(val);
                            }
                        }
                    }
                }
                vals
            }
        };
        vals.dedup();
        if vals.is_empty() {
            return Vec::new();
        }
        candidates.push((*v, vals));
    }

    let mut out = Vec::new();
    let mut current = vars.clone();
    enumerate(env, phi, &candidates, 0, &mut current, now, rfr, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    env: &ProcEnv,
    phi: &crate::expr::Formula<VarId>,
    candidates: &[(VarId, Vec<Value>)],
    i: usize,
    current: &mut VarMap,
    now: Time,
    rfr: Chunk,
    out: &mut Vec<VarMap>,
) {
    if i == candidates.len() {
        if env.ectx(current, now, rfr).eval_formula(phi) == Some(true) {
            out.push(current.clone());
        }
        return;
    }
    let (v, vals) = &candidates[i];
    for val in vals {
        current.insert(*v, *val);
        enumerate(env, phi, candidates, i + 1, current, now, rfr, out);
    }
    current.remove(v);
}
