//! Eventuality properties over the explored transition system.
//!
//! A query names a set of triggering transitions (a label pattern plus an
//! optional connectivity side condition on the source state) and a set of
//! discharging labels. The property holds outright when every complete
//! path that starts with a trigger eventually performs a discharging
//! label. Quantitatively, the minimum probability of discharging is taken
//! over all schedulers, i.e. over every resolution of nondeterminism;
//! memoryless deterministic schedulers suffice for minimal reachability on
//! a finite system, and the computation below is exact.
//!
//! Horizon truncation is handled pessimistically: paths that run into the
//! frontier make a qualitative verdict `Unknown`, and frontier states count
//! zero in the quantitative one, so reported probabilities are sound lower
//! bounds for the untruncated system.

use std::collections::{HashMap, VecDeque};

use num::{One, Zero};

use crate::data::{NodeId, Payload};
use crate::dist::{Dist, Prob};
use crate::explore::{Plts, StateId};
use crate::network::{cntd, NetAction};

/// Label pattern; `None` fields are wildcards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelPat {
    Tick,
    Tau,
    Deliver { id: Option<NodeId>, data: Option<Payload> },
    NewPkt { id: Option<NodeId>, data: Option<Payload>, dest: Option<NodeId> },
    Connect { a: Option<NodeId>, b: Option<NodeId> },
    Disconnect { a: Option<NodeId>, b: Option<NodeId> },
}

impl LabelPat {
    pub fn matches(&self, action: &NetAction) -> bool {
        fn opt<T: PartialEq>(pat: &Option<T>, val: &T) -> bool {
            pat.as_ref().map(|p| p == val).unwrap_or(true)
        }
        match (self, action) {
            (LabelPat::Tick, NetAction::Tick) => true,
            (LabelPat::Tau, NetAction::Tau) => true,
            (LabelPat::Deliver { id, data }, NetAction::Deliver(i, d)) => {
                opt(id, i) && opt(data, d)
            }
            (LabelPat::NewPkt { id, data, dest }, NetAction::NewPkt(i, d, t)) => {
                opt(id, i) && opt(data, d) && opt(dest, t)
            }
            (LabelPat::Connect { a, b }, NetAction::Connect(x, y)) => opt(a, x) && opt(b, y),
            (LabelPat::Disconnect { a, b }, NetAction::Disconnect(x, y)) => opt(a, x) && opt(b, y),
            _ => false,
        }
    }
}

fn any_match(pats: &[LabelPat], action: &NetAction) -> bool {
    pats.iter().any(|p| p.matches(action))
}

/// Trigger: a label pattern plus an optional requirement that `a` can
/// reach `b` in the source state's topology.
#[derive(Debug, Clone)]
pub struct PreCondition {
    pub label: LabelPat,
    pub cntd: Option<(NodeId, NodeId)>,
}

#[derive(Debug, Clone)]
pub struct EventualityQuery {
    pub pre: PreCondition,
    pub post: Vec<LabelPat>,
}

/// The delivery property for one packet: triggered when `src` accepts
/// `data` for `dest` while connected to it; discharged by delivery at
/// `dest` or by any topology change. The weak variant is also discharged
/// by any further packet acceptance anywhere.
pub fn packet_delivery(src: NodeId, dest: NodeId, data: Payload, weak: bool) -> EventualityQuery {
    let mut post = vec![
        LabelPat::Deliver { id: Some(dest), data: Some(data) },
        LabelPat::Connect { a: None, b: None },
        LabelPat::Disconnect { a: None, b: None },
    ];
    if weak {
        post.push(LabelPat::NewPkt { id: None, data: None, dest: None });
    }
    EventualityQuery {
        pre: PreCondition {
            label: LabelPat::NewPkt { id: Some(src), data: Some(data), dest: Some(dest) },
            cntd: Some((src, dest)),
        },
        post,
    }
}

/// A transition reference: source state and index into its transition list.
pub type TransRef = (StateId, usize);

pub fn find_pre_transitions(p: &Plts, query: &EventualityQuery) -> Vec<TransRef> {
    let mut out = Vec::new();
    for (sid, ts) in p.transitions.iter().enumerate() {
        for (i, (label, _)) in ts.iter().enumerate() {
            if !query.pre.label.matches(label) {
                continue;
            }
            if let Some((a, b)) = query.pre.cntd {
                match cntd(&p.states[sid], a, b) {
                    Ok(true) => {}
                    _ => continue,
                }
            }
            out.push((sid as StateId, i));
        }
    }
    out
}

/// A rooted lasso or dead-end path violating an eventuality.
#[derive(Debug, Clone)]
pub struct CounterexamplePath {
    /// Discovery path from the initial state to the trigger's source.
    pub prefix: Vec<(StateId, NetAction, StateId)>,
    /// The trigger itself with the successor the path follows.
    pub trigger: (StateId, NetAction, StateId),
    /// Discharge-free continuation.
    pub avoid: Vec<(StateId, NetAction, StateId)>,
    /// Index into `avoid` where the path loops back; `None` when it ends in
    /// a state with no outgoing transitions.
    pub cycle_start: Option<usize>,
}

#[derive(Debug)]
pub enum Outcome {
    Holds,
    Counterexample(Box<CounterexamplePath>),
    /// No counterexample found, but some discharge-free path reaches the
    /// exploration frontier.
    Unknown,
}

impl Outcome {
    pub fn holds(&self) -> bool {
        matches!(self, Outcome::Holds)
    }
}

enum AvoidSearch {
    Clear,
    Truncation,
    Violation { path: Vec<(StateId, NetAction, StateId)>, cycle_start: Option<usize> },
}

// Discharge-free subgraph analysis, computed once per (system, post-set):
// which states can continue into a violation (a cycle or a dead state
// inside the avoid graph) and which can run into the horizon frontier.
struct AvoidAnalysis {
    can_violate: Vec<bool>,
    can_hit_frontier: Vec<bool>,
}

fn avoid_analysis(p: &Plts, post: &[LabelPat]) -> AvoidAnalysis {
    let n = p.transitions.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, ts) in p.transitions.iter().enumerate() {
        for (label, dist) in ts {
            if any_match(post, label) {
                continue;
            }
            for (succ, _) in dist.iter() {
                adj[s].push(*succ as usize);
            }
        }
        adj[s].sort_unstable();
        adj[s].dedup();
    }

    let mut scc_of = vec![usize::MAX; n];
    let sccs = tarjan_sccs(n, &adj);
    for (i, scc) in sccs.iter().enumerate() {
        for &s in scc {
            scc_of[s] = i;
        }
    }
    let mut can_violate = vec![false; n];
    let mut can_hit_frontier = vec![false; n];
    let mut scc_violate = vec![false; sccs.len()];
    let mut scc_frontier = vec![false; sccs.len()];
    // Components come out sinks-first, so successors are already final.
    for (i, scc) in sccs.iter().enumerate() {
        let cyclic = scc.len() > 1
            || adj[scc[0]].binary_search(&scc[0]).is_ok();
        let mut violate = false;
        let mut frontier = false;
        for &s in scc {
            if p.truncated[s] {
                frontier = true;
            } else if p.transitions[s].is_empty() {
                violate = true; // genuinely stuck: a finite complete path
            }
            for &t in &adj[s] {
                if scc_of[t] != i {
                    violate |= scc_violate[scc_of[t]];
                    frontier |= scc_frontier[scc_of[t]];
                }
            }
        }
        // A cycle inside the avoid graph is an infinite complete path,
        // but only if its states actually have behaviour (not frontier).
        if cyclic && scc.iter().any(|&s| !p.truncated[s]) {
            violate = true;
        }
        scc_violate[i] = violate;
        scc_frontier[i] = frontier;
        for &s in scc {
            can_violate[s] = violate;
            can_hit_frontier[s] = frontier;
        }
    }
    AvoidAnalysis { can_violate, can_hit_frontier }
}

// Searches the discharge-free subgraph from `start` for a complete path:
// a cycle, or a state with no transitions at all. Truncated states are
// horizon artifacts, not completions.
fn search_avoid(p: &Plts, start: StateId, post: &[LabelPat]) -> AvoidSearch {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnStack,
        Done,
    }

    fn edges(p: &Plts, s: StateId, post: &[LabelPat]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, (label, dist)) in p.transitions[s as usize].iter().enumerate() {
            if any_match(post, label) {
                continue;
            }
            for j in 0..dist.len() {
                out.push((i, j));
            }
        }
        out
    }

    if p.truncated[start as usize] {
        return AvoidSearch::Truncation;
    }
    if p.transitions[start as usize].is_empty() {
        return AvoidSearch::Violation { path: Vec::new(), cycle_start: None };
    }

    let n = p.transitions.len();
    let mut mark = vec![Mark::New; n];
    let mut order: Vec<(StateId, usize)> = Vec::new(); // (state, edge cursor)
    let mut path: Vec<(StateId, NetAction, StateId)> = Vec::new();
    let mut truncation_seen = false;

    mark[start as usize] = Mark::OnStack;
    order.push((start, 0));
    while let Some(&(s, _)) = order.last() {
        let es = edges(p, s, post);
        let cursor = {
            let top = order.last_mut().unwrap();
            let c = top.1;
            top.1 += 1;
            c
        };
        if cursor >= es.len() {
            mark[s as usize] = Mark::Done;
            order.pop();
            path.pop();
            continue;
        }
        let (ti, si) = es[cursor];
        let (label, dist) = &p.transitions[s as usize][ti];
        let succ = *dist.iter().nth(si).map(|(t, _)| t).unwrap();
        match mark[succ as usize] {
            Mark::OnStack => {
                path.push((s, *label, succ));
                let cycle_start = path.iter().position(|(from, _, _)| *from == succ).unwrap_or(0);
                return AvoidSearch::Violation { path, cycle_start: Some(cycle_start) };
            }
            Mark::Done => continue,
            Mark::New => {
                if p.truncated[succ as usize] {
                    truncation_seen = true;
                    mark[succ as usize] = Mark::Done;
                    continue;
                }
                if p.transitions[succ as usize].is_empty() {
                    path.push((s, *label, succ));
                    return AvoidSearch::Violation { path, cycle_start: None };
                }
                path.push((s, *label, succ));
                mark[succ as usize] = Mark::OnStack;
                order.push((succ, 0));
            }
        }
    }
    if truncation_seen {
        AvoidSearch::Truncation
    } else {
        AvoidSearch::Clear
    }
}

/// Qualitative check: every complete path from a trigger discharges.
pub fn holds_outright(p: &Plts, query: &EventualityQuery) -> Outcome {
    let pres = find_pre_transitions(p, query);
    let analysis = avoid_analysis(p, &query.post);
    let mut unknown = false;
    for (sid, ti) in pres {
        let (label, dist) = &p.transitions[sid as usize][ti];
        if any_match(&query.post, label) {
            continue; // the trigger itself discharges
        }
        for (succ, _) in dist.iter() {
            let s = *succ as usize;
            if analysis.can_violate[s] {
                match search_avoid(p, *succ, &query.post) {
                    AvoidSearch::Violation { path, cycle_start } => {
                        return Outcome::Counterexample(Box::new(CounterexamplePath {
                            prefix: p.path_from_root(sid),
                            trigger: (sid, *label, *succ),
                            avoid: path,
                            cycle_start,
                        }));
                    }
                    _ => unreachable!("analysis promised a violation path"),
                }
            }
            unknown |= analysis.can_hit_frontier[s];
        }
    }
    if unknown {
        Outcome::Unknown
    } else {
        Outcome::Holds
    }
}

/// Qualitative check from explicitly given start states: every complete
/// path from each start performs one of `post`.
pub fn eventually_from_states(p: &Plts, starts: &[StateId], post: &[LabelPat]) -> Outcome {
    let analysis = avoid_analysis(p, post);
    let mut unknown = false;
    for &s in starts {
        if analysis.can_violate[s as usize] {
            match search_avoid(p, s, post) {
                AvoidSearch::Violation { path, cycle_start } => {
                    return Outcome::Counterexample(Box::new(CounterexamplePath {
                        prefix: p.path_from_root(s),
                        trigger: (s, NetAction::Tau, s),
                        avoid: path,
                        cycle_start,
                    }));
                }
                _ => unreachable!("analysis promised a violation path"),
            }
        }
        unknown |= analysis.can_hit_frontier[s as usize];
    }
    if unknown {
        Outcome::Unknown
    } else {
        Outcome::Holds
    }
}

// ---------------------------------------------------------------------
// Minimal reachability over schedulers, exact.
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MinProbResult {
    pub value: Prob,
    /// Whether frontier states were reachable from the trigger; if so the
    /// value is a lower bound rather than the exact infimum.
    pub truncation_involved: bool,
}

// Greatest fixpoint of: a state can avoid discharging forever. Truncated
// and transition-less states count as avoiding (pessimistic frontier).
fn zero_set(p: &Plts, post: &[LabelPat]) -> Vec<bool> {
    let n = p.transitions.len();
    let mut in_z = vec![true; n];
    let mut choice_owner: Vec<StateId> = Vec::new();
    let mut succ_choices: HashMap<StateId, Vec<usize>> = HashMap::new();
    let mut viable: Vec<usize> = vec![0; n];
    for (s, ts) in p.transitions.iter().enumerate() {
        for (label, dist) in ts {
            if any_match(post, label) {
                continue;
            }
            let cid = choice_owner.len();
            choice_owner.push(s as StateId);
            for (succ, _) in dist.iter() {
                succ_choices.entry(*succ).or_default().push(cid);
            }
            viable[s] += 1;
        }
    }
    let mut spoiled = vec![false; choice_owner.len()];
    let mut queue: VecDeque<StateId> = VecDeque::new();
    for s in 0..n {
        let anchored = p.truncated[s] || p.transitions[s].is_empty();
        if !anchored && viable[s] == 0 {
            in_z[s] = false;
            queue.push_back(s as StateId);
        }
    }
    while let Some(v) = queue.pop_front() {
        if let Some(cids) = succ_choices.get(&v) {
            for &cid in cids.clone().iter() {
                if spoiled[cid] {
                    continue;
                }
                spoiled[cid] = true;
                let owner = choice_owner[cid] as usize;
                if !in_z[owner] {
                    continue;
                }
                viable[owner] -= 1;
                let anchored = p.truncated[owner] || p.transitions[owner].is_empty();
                if viable[owner] == 0 && !anchored {
                    in_z[owner] = false;
                    queue.push_back(owner as StateId);
                }
            }
        }
    }
    in_z
}

// Iterative Tarjan; returns components in reverse topological order.
fn tarjan_sccs(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *ei < adj[v].len() {
                let w = adj[v][*ei];
                *ei += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    sccs.push(scc);
                }
                let done = v;
                call.pop();
                if let Some(&mut (parent, _)) = call.last_mut() {
                    low[parent] = low[parent].min(low[done]);
                }
            }
        }
    }
    sccs
}

// Solves v = P v + b for a sparse row system, strongly connected
// components processed sinks-first with exact arithmetic. A component no
// probability mass ever leaves takes the least solution, zero.
struct LinearSystem {
    bias: Vec<Prob>,
    edges: Vec<Vec<(usize, Prob)>>,
}

impl LinearSystem {
    fn solve(&self) -> Vec<Prob> {
        let n = self.bias.len();
        let adj: Vec<Vec<usize>> = self
            .edges
            .iter()
            .map(|row| row.iter().map(|(j, _)| *j).collect())
            .collect();
        let mut values: Vec<Option<Prob>> = vec![None; n];
        for scc in tarjan_sccs(n, &adj) {
            self.solve_component(&scc, &mut values);
        }
        values.into_iter().map(|v| v.unwrap()).collect()
    }

    fn solve_component(&self, scc: &[usize], values: &mut [Option<Prob>]) {
        let local: HashMap<usize, usize> = scc.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let k = scc.len();
        let mut bias: Vec<Prob> = Vec::with_capacity(k);
        let mut within: Vec<Vec<(usize, Prob)>> = Vec::with_capacity(k);
        let mut within_mass: Vec<Prob> = Vec::with_capacity(k);
        for &g in scc {
            let mut b = self.bias[g].clone();
            let mut row = Vec::new();
            let mut mass = Prob::zero();
            for (j, w) in &self.edges[g] {
                match local.get(j) {
                    Some(&lj) => {
                        mass += w;
                        row.push((lj, w.clone()));
                    }
                    None => {
                        let vj = values[*j].as_ref().expect("sinks solved first").clone();
                        b += w.clone() * vj;
                    }
                }
            }
            bias.push(b);
            within.push(row);
            within_mass.push(mass);
        }

        let closed = bias.iter().all(|b| b.is_zero()) && within_mass.iter().all(|m| m.is_one());
        if closed {
            for &g in scc {
                values[g] = Some(Prob::zero());
            }
            return;
        }

        if k == 1 {
            let self_mass = within_mass[0].clone();
            let v = if self_mass.is_zero() {
                bias[0].clone()
            } else {
                bias[0].clone() / (Prob::one() - self_mass)
            };
            values[scc[0]] = Some(v);
            return;
        }

        // Dense Gaussian elimination on (I - P) x = b.
        let mut a: Vec<Vec<Prob>> = vec![vec![Prob::zero(); k + 1]; k];
        for i in 0..k {
            a[i][i] = Prob::one();
            for (j, w) in &within[i] {
                a[i][*j] -= w;
            }
            a[i][k] = bias[i].clone();
        }
        for col in 0..k {
            let pivot = (col..k)
                .find(|&r| !a[r][col].is_zero())
                .expect("component with escape mass is nonsingular");
            a.swap(col, pivot);
            let p = a[col][col].clone();
            for j in col..=k {
                a[col][j] = a[col][j].clone() / p.clone();
            }
            for r in 0..k {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for j in col..=k {
                        a[r][j] = a[r][j].clone() - f.clone() * a[col][j].clone();
                    }
                }
            }
        }
        for i in 0..k {
            values[scc[i]] = Some(a[i][k].clone());
        }
    }
}

// Value of one choice under the given state values.
fn choice_value(is_post: bool, dist: &Dist<StateId>, v: &dyn Fn(StateId) -> Prob) -> Prob {
    if is_post {
        return Prob::one();
    }
    let mut acc = Prob::zero();
    for (succ, w) in dist.iter() {
        let sv = v(*succ);
        if !sv.is_zero() {
            acc += w.clone() * sv;
        }
    }
    acc
}

/// Minimal discharge probabilities of every state, over all schedulers.
///
/// The zero region is computed graph-theoretically; on its complement the
/// fixpoint equations have a unique solution, found by policy iteration
/// with exact per-policy solves (deterministic memoryless policies suffice
/// for minimal reachability). Built once per post-set and consulted for
/// any number of triggers.
pub struct MinReach {
    values: HashMap<usize, Prob>,
    post: Vec<LabelPat>,
    /// States from which the frontier is reachable at all; values there
    /// are lower bounds.
    frontier_upstream: Vec<bool>,
}

impl MinReach {
    pub fn compute(p: &Plts, post: &[LabelPat]) -> MinReach {
        let in_z = zero_set(p, post);
        let n = p.transitions.len();
        let mut dense: HashMap<usize, usize> = HashMap::new();
        let mut members: Vec<usize> = Vec::new();
        for s in 0..n {
            if !in_z[s] {
                dense.insert(s, members.len());
                members.push(s);
            }
        }

        let choices: Vec<Vec<(bool, &Dist<StateId>)>> = members
            .iter()
            .map(|&s| {
                p.transitions[s]
                    .iter()
                    .map(|(l, d)| (any_match(post, l), d))
                    .collect()
            })
            .collect();

        let mut policy: Vec<usize> = vec![0; members.len()];
        let mut values: Vec<Prob> = vec![Prob::zero(); members.len()];

        loop {
            let mut sys = LinearSystem {
                bias: Vec::with_capacity(members.len()),
                edges: Vec::with_capacity(members.len()),
            };
            for (li, _) in members.iter().enumerate() {
                let (is_post, dist) = choices[li][policy[li]];
                if is_post {
                    sys.bias.push(Prob::one());
                    sys.edges.push(Vec::new());
                } else {
                    let mut row = Vec::new();
                    for (succ, w) in dist.iter() {
                        if let Some(&lj) = dense.get(&(*succ as usize)) {
                            row.push((lj, w.clone()));
                        }
                        // successors in the zero region contribute nothing
                    }
                    sys.bias.push(Prob::zero());
                    sys.edges.push(row);
                }
            }
            values = sys.solve();

            let lookup = |s: StateId| -> Prob {
                dense
                    .get(&(s as usize))
                    .map(|&li| values[li].clone())
                    .unwrap_or_else(Prob::zero)
            };
            let mut changed = false;
            for li in 0..members.len() {
                let mut best = policy[li];
                let mut best_v = choice_value(choices[li][best].0, choices[li][best].1, &lookup);
                for (ci, (is_post, dist)) in choices[li].iter().enumerate() {
                    if ci == best {
                        continue;
                    }
                    let v = choice_value(*is_post, dist, &lookup);
                    if v < best_v {
                        best = ci;
                        best_v = v;
                    }
                }
                if best != policy[li] {
                    policy[li] = best;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        MinReach {
            values: members.iter().enumerate().map(|(li, &s)| (s, values[li].clone())).collect(),
            post: post.to_vec(),
            frontier_upstream: frontier_upstream(p),
        }
    }

    pub fn state_value(&self, s: StateId) -> Prob {
        self.values.get(&(s as usize)).cloned().unwrap_or_else(Prob::zero)
    }

    /// Value of taking a specific transition first.
    pub fn transition_value(&self, p: &Plts, t: TransRef) -> MinProbResult {
        let (label, dist) = &p.transitions[t.0 as usize][t.1];
        let truncation_involved = dist
            .support()
            .any(|s| self.frontier_upstream[*s as usize]);
        if any_match(&self.post, label) {
            return MinProbResult { value: Prob::one(), truncation_involved };
        }
        let value = choice_value(false, dist, &|s| self.state_value(s));
        MinProbResult { value, truncation_involved }
    }
}

/// Minimum, over all schedulers, of the probability that a run starting
/// with the given transition ever performs a discharging label.
pub fn min_prob(p: &Plts, t: TransRef, post: &[LabelPat]) -> MinProbResult {
    MinReach::compute(p, post).transition_value(p, t)
}

// States that can reach the frontier: backward closure computed via the
// condensation in one pass.
fn frontier_upstream(p: &Plts) -> Vec<bool> {
    let n = p.transitions.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, ts) in p.transitions.iter().enumerate() {
        for (_, dist) in ts {
            for (succ, _) in dist.iter() {
                adj[s].push(*succ as usize);
            }
        }
        adj[s].sort_unstable();
        adj[s].dedup();
    }
    let sccs = tarjan_sccs(n, &adj);
    let mut scc_of = vec![usize::MAX; n];
    for (i, scc) in sccs.iter().enumerate() {
        for &s in scc {
            scc_of[s] = i;
        }
    }
    let mut out = vec![false; n];
    let mut scc_flag = vec![false; sccs.len()];
    for (i, scc) in sccs.iter().enumerate() {
        let mut flag = scc.iter().any(|&s| p.truncated[s]);
        for &s in scc {
            for &t in &adj[s] {
                if scc_of[t] != i {
                    flag |= scc_flag[scc_of[t]];
                }
            }
        }
        scc_flag[i] = flag;
        for &s in scc {
            out[s] = flag;
        }
    }
    out
}

/// Quantitative verdict for an eventuality at a probability threshold.
#[derive(Debug, Clone)]
pub struct ProbVerdict {
    pub holds: bool,
    /// Least trigger probability; `None` when no trigger is reachable.
    pub minimum: Option<Prob>,
    pub truncation_involved: bool,
    pub triggers_checked: usize,
    pub worst: Option<TransRef>,
}

/// Checks that every trigger discharges with probability at least
/// `threshold` under every scheduler.
pub fn prob_at_least(p: &Plts, query: &EventualityQuery, threshold: &Prob) -> ProbVerdict {
    let pres = find_pre_transitions(p, query);
    let reach = MinReach::compute(p, &query.post);
    let mut minimum: Option<Prob> = None;
    let mut worst = None;
    let mut truncation = false;
    for t in &pres {
        let r = reach.transition_value(p, *t);
        truncation |= r.truncation_involved;
        if minimum.as_ref().map(|m| r.value < *m).unwrap_or(true) {
            minimum = Some(r.value.clone());
            worst = Some(*t);
        }
    }
    let holds = match &minimum {
        Some(m) => m >= threshold,
        None => true,
    };
    ProbVerdict {
        holds,
        minimum,
        truncation_involved: truncation,
        triggers_checked: pres.len(),
        worst,
    }
}

/// Probability of discharging under the uniform memoryless scheduler,
/// starting from `from`. Pending packet hand-downs are taken eagerly, the
/// same convention the simulator uses, so simulated rates are comparable.
pub fn uniform_chain_prob(p: &Plts, from: StateId, post: &[LabelPat]) -> Prob {
    let n = p.transitions.len();
    let mut sys = LinearSystem { bias: vec![Prob::zero(); n], edges: vec![Vec::new(); n] };
    for s in 0..n {
        let ts = &p.transitions[s];
        if ts.is_empty() {
            continue; // frontier or dead: probability zero
        }
        let labels: Vec<NetAction> = ts.iter().map(|(l, _)| *l).collect();
        let chosen = scheduler_choices(&labels);
        let share = Prob::new(1.into(), (chosen.len() as i64).into());
        let mut bias = Prob::zero();
        let mut row: HashMap<usize, Prob> = HashMap::new();
        for &ci in &chosen {
            let (label, dist) = &ts[ci];
            if any_match(post, label) {
                bias += share.clone();
            } else {
                for (succ, w) in dist.iter() {
                    *row.entry(*succ as usize).or_insert_with(Prob::zero) +=
                        share.clone() * w.clone();
                }
            }
        }
        sys.bias[s] = bias;
        let mut row: Vec<(usize, Prob)> = row.into_iter().collect();
        row.sort_by_key(|(j, _)| *j);
        sys.edges[s] = row;
    }
    sys.solve()[from as usize].clone()
}

/// The transition subset the uniform scheduler draws from: pending packet
/// hand-downs first, otherwise everything.
pub fn scheduler_choices(labels: &[NetAction]) -> Vec<usize> {
    let newpkts: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, NetAction::NewPkt(..)))
        .map(|(i, _)| i)
        .collect();
    if newpkts.is_empty() {
        (0..labels.len()).collect()
    } else {
        newpkts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::prob;

    // Hand-built transition systems keep these tests independent of the
    // network semantics. `states` stays empty, so connectivity side
    // conditions are not exercised here (scenario tests cover them).
    fn plts(transitions: Vec<Vec<(NetAction, Dist<StateId>)>>, truncated: Vec<bool>) -> Plts {
        let n = transitions.len();
        Plts {
            states: Vec::new(),
            transitions,
            depth: vec![0; n],
            truncated,
            parent: vec![None; n],
            initial: 0,
            horizon: 100,
            normalized: false,
        }
    }

    fn deliver(id: u8) -> NetAction {
        NetAction::Deliver(NodeId(id), Payload::User(0))
    }

    fn post_deliver(id: u8) -> Vec<LabelPat> {
        vec![LabelPat::Deliver { id: Some(NodeId(id)), data: None }]
    }

    #[test]
    fn immediate_discharge_has_probability_one() {
        let p = plts(
            vec![
                vec![(deliver(0), Dist::point(1))],
                vec![(NetAction::Tick, Dist::point(1))],
            ],
            vec![false, false],
        );
        let r = min_prob(&p, (0, 0), &post_deliver(0));
        assert_eq!(r.value, Prob::one());
    }

    #[test]
    fn fair_coin_reaches_success_half_the_time() {
        // 0 --tau--> {1: delivers, 2: sink}
        let p = plts(
            vec![
                vec![(
                    NetAction::Tau,
                    Dist::from_weighted([(1, prob(1, 2)), (2, prob(1, 2))]),
                )],
                vec![(deliver(0), Dist::point(2))],
                vec![(NetAction::Tick, Dist::point(2))],
            ],
            vec![false, false, false],
        );
        let r = min_prob(&p, (0, 0), &post_deliver(0));
        assert_eq!(r.value, prob(1, 2));
        assert!(!r.truncation_involved);
    }

    #[test]
    fn adversary_avoids_discharge_when_it_can() {
        let p = plts(
            vec![vec![
                (deliver(0), Dist::point(0)),
                (NetAction::Tick, Dist::point(0)),
            ]],
            vec![false],
        );
        let r = min_prob(&p, (0, 1), &post_deliver(0));
        assert_eq!(r.value, Prob::zero());
        // The uniform scheduler leaves the loop eventually.
        assert_eq!(uniform_chain_prob(&p, 0, &post_deliver(0)), Prob::one());
    }

    #[test]
    fn probabilistic_cycle_solves_exactly() {
        // 0 --tau--> {0: 1/3, 1: 2/3}; the only continuation at 1 delivers,
        // so discharging is almost sure.
        let p = plts(
            vec![
                vec![(
                    NetAction::Tau,
                    Dist::from_weighted([(0, prob(1, 3)), (1, prob(2, 3))]),
                )],
                vec![(deliver(0), Dist::point(1))],
            ],
            vec![false, false],
        );
        let r = min_prob(&p, (0, 0), &post_deliver(0));
        assert_eq!(r.value, Prob::one());

        // An extra sink branch at 1 lets the adversary escape.
        let p = plts(
            vec![
                vec![(
                    NetAction::Tau,
                    Dist::from_weighted([(0, prob(1, 3)), (1, prob(2, 3))]),
                )],
                vec![
                    (deliver(0), Dist::point(1)),
                    (NetAction::Tick, Dist::point(2)),
                ],
                vec![(NetAction::Tick, Dist::point(2))],
            ],
            vec![false, false, false],
        );
        let r = min_prob(&p, (0, 0), &post_deliver(0));
        assert_eq!(r.value, Prob::zero());
    }

    #[test]
    fn truncated_frontier_counts_zero_and_flags() {
        let p = plts(
            vec![
                vec![(
                    NetAction::Tau,
                    Dist::from_weighted([(1, prob(1, 2)), (2, prob(1, 2))]),
                )],
                vec![(deliver(0), Dist::point(1))],
                vec![],
            ],
            vec![false, false, true],
        );
        let r = min_prob(&p, (0, 0), &post_deliver(0));
        assert_eq!(r.value, prob(1, 2));
        assert!(r.truncation_involved);
    }

    #[test]
    fn holds_outright_is_vacuous_when_post_covers_everything() {
        let p = plts(
            vec![
                vec![(deliver(0), Dist::point(1)), (NetAction::Tick, Dist::point(0))],
                vec![(deliver(0), Dist::point(0))],
            ],
            vec![false, false],
        );
        let q = EventualityQuery {
            pre: PreCondition { label: LabelPat::Tick, cntd: None },
            post: vec![
                LabelPat::Tick,
                LabelPat::Tau,
                LabelPat::Deliver { id: None, data: None },
            ],
        };
        assert!(holds_outright(&p, &q).holds());
    }

    #[test]
    fn lasso_counterexample_is_found_and_reported() {
        let p = plts(
            vec![
                vec![(NetAction::Tick, Dist::point(1))],
                vec![
                    (deliver(0), Dist::point(0)),
                    (NetAction::Tick, Dist::point(1)),
                ],
            ],
            vec![false, false],
        );
        let q = EventualityQuery {
            pre: PreCondition { label: LabelPat::Tick, cntd: None },
            post: post_deliver(0),
        };
        match holds_outright(&p, &q) {
            Outcome::Counterexample(ce) => assert!(ce.cycle_start.is_some()),
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn truncation_makes_the_verdict_unknown() {
        let p = plts(
            vec![vec![(NetAction::Tick, Dist::point(1))], vec![]],
            vec![false, true],
        );
        let q = EventualityQuery {
            pre: PreCondition { label: LabelPat::Tick, cntd: None },
            post: post_deliver(0),
        };
        assert!(matches!(holds_outright(&p, &q), Outcome::Unknown));
    }

    #[test]
    fn threshold_zero_always_holds() {
        let p = plts(vec![vec![(NetAction::Tick, Dist::point(0))]], vec![false]);
        let q = EventualityQuery {
            pre: PreCondition { label: LabelPat::Tick, cntd: None },
            post: post_deliver(3),
        };
        let v = prob_at_least(&p, &q, &Prob::zero());
        assert!(v.holds);
        assert_eq!(v.minimum, Some(Prob::zero()));
    }
}
