//! Strong probabilistic bisimulation by partition refinement.
//!
//! Two states are equivalent when every labelled transition of one is
//! matched by the other into distributions that agree class-by-class.
//! Refinement starts from a single block and repeatedly splits blocks by
//! transition signatures (label plus class-aggregated distribution) until
//! stable; the result is the coarsest bisimulation.
//!
//! Comparing two systems explored to the same horizon is fair: frontier
//! states of both have no stored transitions and are indistinguishable.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use crate::dist::{Dist, Prob};
use crate::explore::Plts;
use crate::network::NetAction;

type Class = usize;
type Sig = BTreeSet<(NetAction, Vec<(Class, Prob)>)>;

#[derive(Debug)]
pub struct BisimResult {
    pub equivalent: bool,
    /// Number of equivalence classes of the union system.
    pub num_classes: usize,
    /// A label sequence telling the two initial states apart, when they
    /// are not equivalent.
    pub witness: Option<Vec<NetAction>>,
}

struct Union<'a> {
    a: &'a Plts,
    b: &'a Plts,
}

impl<'a> Union<'a> {
    fn len(&self) -> usize {
        self.a.transitions.len() + self.b.transitions.len()
    }

    fn transitions(&self, s: usize) -> Vec<(NetAction, Dist<usize>)> {
        let na = self.a.transitions.len();
        if s < na {
            self.a.transitions[s]
                .iter()
                .map(|(l, d)| (*l, d.map(|t| *t as usize)))
                .collect()
        } else {
            self.b.transitions[s - na]
                .iter()
                .map(|(l, d)| (*l, d.map(|t| *t as usize + na)))
                .collect()
        }
    }
}

fn class_dist(d: &Dist<usize>, classes: &[Class]) -> Vec<(Class, Prob)> {
    let mut agg: BTreeMap<Class, Prob> = BTreeMap::new();
    for (s, w) in d.iter() {
        *agg.entry(classes[*s]).or_insert_with(Prob::zero) += w.clone();
    }
    agg.into_iter().collect()
}

fn signature(u: &Union, s: usize, classes: &[Class]) -> Sig {
    u.transitions(s)
        .iter()
        .map(|(l, d)| (*l, class_dist(d, classes)))
        .collect()
}

/// Decides strong probabilistic bisimilarity of the two initial states.
pub fn strong_bisim(a: &Plts, b: &Plts) -> BisimResult {
    let u = Union { a, b };
    let n = u.len();
    let init_a = a.initial as usize;
    let init_b = b.initial as usize + a.transitions.len();

    let mut rounds: Vec<Vec<Class>> = vec![vec![0; n]];
    loop {
        let prev = rounds.last().unwrap();
        let mut keys: BTreeMap<Sig, Class> = BTreeMap::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let sig = signature(&u, s, prev);
            let fresh = keys.len();
            next[s] = *keys.entry(sig).or_insert(fresh);
        }
        // Refinement only splits blocks, so a stable class count means a
        // stable partition.
        let stable = keys.len() == prev.iter().copied().collect::<BTreeSet<_>>().len();
        rounds.push(next);
        if stable {
            break;
        }
    }

    let last = rounds.last().unwrap();
    let equivalent = last[init_a] == last[init_b];
    let witness = if equivalent {
        None
    } else {
        Some(explain(&u, &rounds, init_a, init_b))
    };
    BisimResult {
        equivalent,
        num_classes: last.iter().copied().collect::<BTreeSet<_>>().len(),
        witness,
    }
}

// Builds a distinguishing label sequence for a separated pair: take the
// label whose class-aggregated successor distributions disagree at the
// earliest separating round, then descend into successor classes whose
// masses differ.
fn explain(u: &Union, rounds: &[Vec<Class>], s0: usize, t0: usize) -> Vec<NetAction> {
    let mut out = Vec::new();
    let mut s = s0;
    let mut t = t0;
    let mut r = match (0..rounds.len()).find(|&r| rounds[r][s] != rounds[r][t]) {
        Some(r) => r,
        None => return out,
    };

    loop {
        debug_assert!(r >= 1, "round zero has a single class");
        let prev = &rounds[r - 1];
        let sig_s: BTreeSet<(NetAction, Vec<(Class, Prob)>)> = u
            .transitions(s)
            .iter()
            .map(|(l, d)| (*l, class_dist(d, prev)))
            .collect();
        let sig_t: BTreeSet<(NetAction, Vec<(Class, Prob)>)> = u
            .transitions(t)
            .iter()
            .map(|(l, d)| (*l, class_dist(d, prev)))
            .collect();

        // A signature entry present on one side only; swap so it is on s.
        let (from_s, (label, cdist)) = match sig_s.difference(&sig_t).next() {
            Some(k) => (true, k.clone()),
            None => match sig_t.difference(&sig_s).next() {
                Some(k) => (false, k.clone()),
                None => return out,
            },
        };
        let (s_cur, t_cur) = if from_s { (s, t) } else { (t, s) };
        out.push(label);

        // If the other side lacks the label entirely, the label alone
        // separates the pair.
        let other: Vec<Dist<usize>> = u
            .transitions(t_cur)
            .iter()
            .filter(|(l, _)| *l == label)
            .map(|(_, d)| d.clone())
            .collect();
        if other.is_empty() {
            return out;
        }
        let own: Dist<usize> = match u
            .transitions(s_cur)
            .iter()
            .find(|(l, d)| *l == label && class_dist(d, prev) == cdist)
        {
            Some((_, d)) => d.clone(),
            None => return out,
        };
        // Descend into successors whose earlier-round classes receive
        // different mass.
        let other = &other[0];
        let own_masses: BTreeMap<Class, Prob> = cdist.iter().cloned().collect();
        let other_masses: BTreeMap<Class, Prob> = class_dist(other, prev).into_iter().collect();
        let c_own = match own_masses
            .iter()
            .find(|(c, w)| other_masses.get(c).map(|w2| *w > w2).unwrap_or(true))
        {
            Some((c, _)) => *c,
            None => return out,
        };
        let c_other = match other_masses
            .iter()
            .find(|(c, w)| own_masses.get(c).map(|w2| *w > w2).unwrap_or(true))
        {
            Some((c, _)) => *c,
            None => return out,
        };
        let next_s = match own.support().find(|x| prev[**x] == c_own) {
            Some(x) => *x,
            None => return out,
        };
        let next_t = match other.support().find(|x| prev[**x] == c_other) {
            Some(x) => *x,
            None => return out,
        };
        s = next_s;
        t = next_t;
        r = match (1..=r.saturating_sub(1))
            .find(|&rr| rounds[rr][s] != rounds[rr][t])
        {
            Some(rr) => rr,
            None => return out,
        };
    }
}
