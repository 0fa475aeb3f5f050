//! Seeded Monte-Carlo simulation and replayable trace files.
//!
//! A trial resolves nondeterminism with a uniform draw over enabled
//! transitions, except that pending packet hand-downs are delivered first
//! (the environment does not dawdle); probabilistic choices are sampled by
//! their exact weights. Everything is driven by one stream cipher RNG, so
//! a trial is a pure function of its seed. Trial seeds derive from the
//! master seed by `splitmix64(master ^ index)`.
//!
//! Trace files are JSON lines: one header, then one record per transition
//! with the rendered label, the joined transmission map on ticks, a digest
//! of the successor state, and per-node snapshots. Simulation traces are
//! verified by re-running their seed; counterexample traces exported from
//! the analyser replay by matching labels and digests against the engine.

use std::collections::BTreeMap;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{BufRead, Write};

use num::{BigInt, Integer, One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Chunk, Message, NodeId, Payload, Time};
use crate::dist::Dist;
use crate::error::SemanticsError;
use crate::expr::Value;
use crate::explore::{normalization_applicable, normalize_state};
use crate::liveness::{scheduler_choices, CounterexamplePath};
use crate::network::{net_transitions, NetAction, NetCtx, NetState};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceHeader {
    pub version: u32,
    pub kind: String,
    pub scenario: String,
    pub protocol: String,
    pub seed: u64,
    pub horizon: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeSnapshot {
    pub name: String,
    pub at: String,
    pub now: Time,
    pub rfr: String,
    pub vars: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TraceRecord {
    pub step: u32,
    pub slot: Time,
    pub label: String,
    /// Digest of the successor state, for replay verification.
    pub digest: u64,
    /// The joined transmission map of a tick.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traffic: Option<BTreeMap<String, String>>,
    pub nodes: Vec<NodeSnapshot>,
}

pub fn state_digest(st: &NetState) -> u64 {
    let mut h = DefaultHasher::new();
    st.hash(&mut h);
    h.finish()
}

fn render_msg(ctx: &NetCtx, m: &Message) -> String {
    match m {
        Message::Data { data, src, dest } => format!(
            "data[{} {}>{}]",
            ctx.payload_name(*data),
            ctx.node_name(*src),
            ctx.node_name(*dest)
        ),
        Message::Ack { src, dest } => {
            format!("ack[{}>{}]", ctx.node_name(*src), ctx.node_name(*dest))
        }
        Message::Rts { src, dest, dur } => {
            format!("rts[{}>{},{}]", ctx.node_name(*src), ctx.node_name(*dest), dur)
        }
        Message::Cts { src, dest, dur } => {
            format!("cts[{}>{},{}]", ctx.node_name(*src), ctx.node_name(*dest), dur)
        }
        Message::User { tag, dur } => format!("user[{tag},{dur}]"),
    }
}

fn render_chunk(ctx: &NetCtx, ch: &Chunk) -> String {
    match ch {
        Chunk::Frag(m, c) => format!("({}:{})", render_msg(ctx, m), c),
        Chunk::Conflict => "conflict".into(),
        Chunk::Idle => "idle".into(),
    }
}

fn render_value(ctx: &NetCtx, v: &Value) -> String {
    match v {
        Value::Id(id) => ctx.node_name(*id),
        Value::Data(p) => ctx.payload_name(*p),
        Value::Msg(m) => render_msg(ctx, m),
        other => other.to_string(),
    }
}

pub fn snapshot(ctx: &NetCtx, st: &NetState) -> Vec<NodeSnapshot> {
    st.nodes
        .iter()
        .map(|n| NodeSnapshot {
            name: ctx.node_name(n.id),
            at: ctx.defs.describe(n.proc.expr),
            now: n.proc.xi.now,
            rfr: render_chunk(ctx, &n.proc.xi.rfr),
            vars: n
                .proc
                .xi
                .vars
                .iter()
                .map(|(k, v)| (ctx.defs.var_name(*k).to_string(), render_value(ctx, v)))
                .collect(),
        })
        .collect()
}

fn render_traffic(ctx: &NetCtx, t: &BTreeMap<NodeId, Chunk>) -> BTreeMap<String, String> {
    t.iter()
        .map(|(id, ch)| (ctx.node_name(*id), render_chunk(ctx, ch)))
        .collect()
}

/// <https://prng.di.unimi.it/splitmix64.c>; used to spread the master seed
/// over trials.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ index)
}

// Exact sampling: put all weights over a common denominator and draw an
// integer below it.
fn sample_dist<'a>(d: &'a Dist<NetState>, rng: &mut ChaCha8Rng) -> &'a NetState {
    if d.is_point() {
        return d.support().next().unwrap();
    }
    let denom = d
        .iter()
        .fold(BigInt::one(), |acc, (_, w)| acc.lcm(w.denom()));
    let denom_u64 = denom
        .to_u64()
        .expect("distribution denominator exceeds 64 bits");
    let mut draw = rng.gen_range(0..denom_u64);
    for (s, w) in d.iter() {
        let ticket = (w.numer() * (&denom / w.denom()))
            .to_u64()
            .expect("weight numerator exceeds 64 bits");
        if draw < ticket {
            return s;
        }
        draw -= ticket;
    }
    unreachable!("weights sum to one");
}

/// What one trial observed.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    /// Delivery slot per tracked packet, in schedule order.
    pub delivered_at: Vec<Option<Time>>,
    /// Injection slot per tracked packet.
    pub injected_at: Vec<Option<Time>>,
    /// Slots in which some node received a conflict.
    pub collision_slots: u32,
    /// Highest attempt counter observed per node.
    pub max_attempts: BTreeMap<String, i64>,
}

/// Runs one seeded trial for `horizon` slots, returning the outcome and
/// the full trace.
pub fn run_trial(
    ctx: &NetCtx,
    init: &NetState,
    tracked: &[(String, NodeId, Payload, NodeId)],
    horizon: u32,
    seed: u64,
) -> Result<(TrialOutcome, Vec<TraceRecord>), SemanticsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = init.clone();
    let mut records = Vec::new();
    let mut outcome = TrialOutcome {
        delivered_at: vec![None; tracked.len()],
        injected_at: vec![None; tracked.len()],
        collision_slots: 0,
        max_attempts: BTreeMap::new(),
    };
    let be_var = ctx.defs.var_id("be");

    let mut slots = 0u32;
    let mut step = 0u32;
    while slots < horizon {
        let ts = net_transitions(ctx, &state)?;
        if ts.is_empty() {
            break;
        }
        let labels: Vec<NetAction> = ts.iter().map(|t| t.label).collect();
        let choices = scheduler_choices(&labels);
        let pick = choices[rng.gen_range(0..choices.len())];
        let tr = &ts[pick];
        let succ = sample_dist(&tr.dist, &mut rng).clone();
        let slot_now = succ.nodes.first().map(|n| n.proc.xi.now).unwrap_or(0);

        match tr.label {
            NetAction::Tick => {
                slots += 1;
                if let Some(traffic) = &tr.traffic {
                    if traffic.values().any(|c| *c == Chunk::Conflict) {
                        outcome.collision_slots += 1;
                    }
                }
            }
            NetAction::Deliver(id, p) => {
                for (i, (_, _, payload, dest)) in tracked.iter().enumerate() {
                    if id == *dest && p == *payload && outcome.delivered_at[i].is_none() {
                        outcome.delivered_at[i] = Some(slot_now);
                    }
                }
            }
            NetAction::NewPkt(id, p, dest) => {
                for (i, (_, src, payload, d)) in tracked.iter().enumerate() {
                    if id == *src && p == *payload && dest == *d && outcome.injected_at[i].is_none()
                    {
                        outcome.injected_at[i] = Some(slot_now);
                    }
                }
            }
            _ => {}
        }
        if let Some(be) = be_var {
            for n in &succ.nodes {
                if let Some(Value::Int(v)) = n.proc.xi.vars.get(&be) {
                    let e = outcome
                        .max_attempts
                        .entry(ctx.node_name(n.id))
                        .or_insert(0);
                    *e = (*e).max(*v);
                }
            }
        }

        records.push(TraceRecord {
            step,
            slot: slot_now,
            label: ctx.render_action(&tr.label),
            digest: state_digest(&succ),
            traffic: tr.traffic.as_ref().map(|t| render_traffic(ctx, t)),
            nodes: snapshot(ctx, &succ),
        });
        state = succ;
        step += 1;
    }
    Ok((outcome, records))
}

#[derive(Debug, Clone, Serialize)]
pub struct PacketStats {
    pub label: String,
    pub delivered: u32,
    pub undelivered: u32,
    pub mean_latency_slots: Option<f64>,
}

/// Aggregate statistics over seeded trials.
#[derive(Debug, Clone, Serialize)]
pub struct DeliveryStats {
    pub trials: u32,
    pub horizon: u32,
    pub packets: Vec<PacketStats>,
    /// Delivered fraction over all tracked packets and trials.
    pub delivery_rate: f64,
    /// Trials in which some tracked packet ran out of horizon undelivered.
    pub horizon_exhausted: u32,
    pub mean_collision_slots: f64,
    /// Highest attempt counter seen anywhere -> number of trials.
    pub retry_histogram: BTreeMap<i64, u32>,
}

pub fn monte_carlo(
    ctx: &NetCtx,
    init: &NetState,
    tracked: &[(String, NodeId, Payload, NodeId)],
    horizon: u32,
    trials: u32,
    master_seed: u64,
) -> Result<DeliveryStats, SemanticsError> {
    assert!(trials >= 1, "at least one trial");
    let mut delivered = vec![0u32; tracked.len()];
    let mut latency_sum = vec![0i64; tracked.len()];
    let mut exhausted = 0u32;
    let mut collisions = 0u64;
    let mut retry_histogram: BTreeMap<i64, u32> = BTreeMap::new();

    for i in 0..trials {
        let (outcome, _) = run_trial(ctx, init, tracked, horizon, trial_seed(master_seed, i as u64))?;
        let mut missing = false;
        for (k, d) in outcome.delivered_at.iter().enumerate() {
            match (outcome.injected_at[k], d) {
                (Some(t0), Some(t1)) => {
                    delivered[k] += 1;
                    latency_sum[k] += t1 - t0;
                }
                _ => missing = true,
            }
        }
        if missing {
            exhausted += 1;
        }
        collisions += outcome.collision_slots as u64;
        let worst = outcome.max_attempts.values().copied().max().unwrap_or(0);
        *retry_histogram.entry(worst).or_insert(0) += 1;
    }

    let packets: Vec<PacketStats> = tracked
        .iter()
        .enumerate()
        .map(|(k, (label, _, _, _))| PacketStats {
            label: label.clone(),
            delivered: delivered[k],
            undelivered: trials - delivered[k],
            mean_latency_slots: if delivered[k] > 0 {
                Some(latency_sum[k] as f64 / delivered[k] as f64)
            } else {
                None
            },
        })
        .collect();
    let total: u32 = delivered.iter().sum();
    Ok(DeliveryStats {
        trials,
        horizon,
        packets,
        delivery_rate: total as f64 / (trials as f64 * tracked.len().max(1) as f64),
        horizon_exhausted: exhausted,
        mean_collision_slots: collisions as f64 / trials as f64,
        retry_histogram,
    })
}

pub fn write_trace<W: Write>(
    mut w: W,
    header: &TraceHeader,
    records: &[TraceRecord],
) -> std::io::Result<()> {
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(r: R) -> std::io::Result<(TraceHeader, Vec<TraceRecord>)> {
    let mut lines = r.lines();
    let header: TraceHeader = match lines.next() {
        Some(line) => serde_json::from_str(&line?)?,
        None => {
            return Err(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "empty trace file",
            ))
        }
    };
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok((header, records))
}

/// Re-runs a simulation trace's seed and checks the records match exactly.
pub fn verify_simulation_trace(
    ctx: &NetCtx,
    init: &NetState,
    tracked: &[(String, NodeId, Payload, NodeId)],
    header: &TraceHeader,
    records: &[TraceRecord],
) -> Result<(), String> {
    let (_, fresh) = run_trial(ctx, init, tracked, header.horizon, header.seed)
        .map_err(|e| e.to_string())?;
    if fresh.len() != records.len() {
        return Err(format!(
            "length mismatch: trace has {} records, replay produced {}",
            records.len(),
            fresh.len()
        ));
    }
    for (i, (a, b)) in records.iter().zip(&fresh).enumerate() {
        if a != b {
            return Err(format!("divergence at record {i}: {} vs {}", a.label, b.label));
        }
    }
    Ok(())
}

/// Exports an eventuality counterexample as a trace: the rooted prefix,
/// the trigger, and the discharge-free continuation (a lasso or dead end).
pub fn counterexample_trace(
    ctx: &NetCtx,
    plts: &crate::explore::Plts,
    ce: &CounterexamplePath,
    scenario: &str,
    protocol: &str,
) -> (TraceHeader, Vec<TraceRecord>) {
    let header = TraceHeader {
        version: TRACE_VERSION,
        kind: "counterexample".into(),
        scenario: scenario.into(),
        protocol: protocol.into(),
        seed: 0,
        horizon: plts.horizon,
    };
    let mut records = Vec::new();
    let mut step = 0u32;
    let mut push = |from: crate::explore::StateId, label: &NetAction, to: crate::explore::StateId, step: &mut u32| {
        let _ = from;
        let succ = &plts.states[to as usize];
        records.push(TraceRecord {
            step: *step,
            slot: succ.nodes.first().map(|n| n.proc.xi.now).unwrap_or(0),
            label: ctx.render_action(label),
            digest: state_digest(succ),
            traffic: None,
            nodes: snapshot(ctx, succ),
        });
        *step += 1;
    };
    for (f, l, t) in &ce.prefix {
        push(*f, l, *t, &mut step);
    }
    let (f, l, t) = &ce.trigger;
    push(*f, l, *t, &mut step);
    for (f, l, t) in &ce.avoid {
        push(*f, l, *t, &mut step);
    }
    (header, records)
}

/// Replays a counterexample trace against the engine: from the initial
/// state, each record must name an enabled transition label with a
/// successor whose digest matches.
pub fn verify_counterexample_trace(
    ctx: &NetCtx,
    init: &NetState,
    records: &[TraceRecord],
) -> Result<(), String> {
    let normalize = normalization_applicable(ctx);
    let canon = |s: &NetState| if normalize { normalize_state(ctx, s) } else { s.clone() };
    let mut cur = canon(init);
    for (i, rec) in records.iter().enumerate() {
        let ts = net_transitions(ctx, &cur).map_err(|e| e.to_string())?;
        let mut next = None;
        'outer: for t in &ts {
            if ctx.render_action(&t.label) != rec.label {
                continue;
            }
            for (succ, _) in t.dist.iter() {
                let c = canon(succ);
                if state_digest(&c) == rec.digest {
                    next = Some(c);
                    break 'outer;
                }
            }
        }
        match next {
            Some(s) => cur = s,
            None => {
                return Err(format!(
                    "record {i}: no enabled transition matches label `{}` with the stored digest",
                    rec.label
                ))
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{scenario_hidden_station, Protocol};

    #[test]
    fn identical_seeds_give_identical_traces() {
        let cfg = scenario_hidden_station(Protocol::Csma);
        let (ctx, init) = cfg.build().unwrap();
        let tracked = cfg.tracked_packets();
        let (_, a) = run_trial(&ctx, &init, &tracked, 20, 42).unwrap();
        let (_, b) = run_trial(&ctx, &init, &tracked, 20, 42).unwrap();
        assert_eq!(a, b);
        let (_, c) = run_trial(&ctx, &init, &tracked, 20, 43).unwrap();
        assert!(a != c, "different seeds should diverge in this scenario");
    }

    #[test]
    fn trace_files_round_trip_and_verify() {
        let cfg = scenario_hidden_station(Protocol::Csma);
        let (ctx, init) = cfg.build().unwrap();
        let tracked = cfg.tracked_packets();
        let (_, records) = run_trial(&ctx, &init, &tracked, 15, 7).unwrap();
        let header = TraceHeader {
            version: TRACE_VERSION,
            kind: "simulation".into(),
            scenario: cfg.name.clone(),
            protocol: cfg.protocol.to_string(),
            seed: 7,
            horizon: 15,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &header, &records).unwrap();
        let (h2, r2) = read_trace(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(h2.seed, 7);
        assert_eq!(r2, records);
        verify_simulation_trace(&ctx, &init, &tracked, &h2, &r2).unwrap();
    }

    #[test]
    fn splitmix_spreads_trial_seeds() {
        let a = trial_seed(1, 0);
        let b = trial_seed(1, 1);
        let c = trial_seed(2, 0);
        assert!(a != b && a != c && b != c);
    }
}
