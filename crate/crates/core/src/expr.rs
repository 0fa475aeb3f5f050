//! Data expressions and guard formulas over the finite protocol domains.
//!
//! The AST is generic in its variable representation: model builders write
//! string names, the compiler resolves them to dense indices. Evaluation is
//! partial; `None` means some operand is unvalued under the current
//! valuation (an unbound variable, or a field projection on the wrong frame
//! kind), which the operational rules turn into a wait.

use std::collections::BTreeMap;
use std::fmt;

use crate::data::{dur, is_idle, is_new, Chunk, DurationConfig, Message, NodeId, Payload, Time};

/// Runtime value of a data expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Int(Time),
    Id(NodeId),
    Data(Payload),
    Msg(Message),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Id(id) => write!(f, "{id}"),
            Value::Data(p) => write!(f, "{p}"),
            Value::Msg(m) => write!(f, "{m}"),
        }
    }
}

/// Declared type of a variable. `Int` values are durations, counters and
/// other shift-invariant integers; `AbsTime` values are points on the local
/// clock and participate in clock-offset normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarType {
    Bool,
    Int,
    AbsTime,
    Id,
    Data,
    Msg,
}

/// Resolved variable index into the model's declaration table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u16);

/// The finite value domains a scenario declares for enumeration.
#[derive(Debug, Clone, Default)]
pub struct Domains {
    pub ids: Vec<NodeId>,
    pub payloads: Vec<Payload>,
}

impl Domains {
    pub fn values_of(&self, ty: VarType) -> Option<Vec<Value>> {
        match ty {
            VarType::Bool => Some(vec![Value::Bool(false), Value::Bool(true)]),
            VarType::Id => Some(self.ids.iter().map(|&i| Value::Id(i)).collect()),
            VarType::Data => Some(self.payloads.iter().map(|&p| Value::Data(p)).collect()),
            VarType::Int | VarType::AbsTime | VarType::Msg => None,
        }
    }
}

/// Data expression over variables of type `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr<V> {
    Lit(Value),
    Var(V),
    /// The local clock.
    Now,
    Add(Box<Expr<V>>, Box<Expr<V>>),
    Sub(Box<Expr<V>>, Box<Expr<V>>),
    Mul(Box<Expr<V>>, Box<Expr<V>>),
    /// Two to the power of the operand; the contention-window growth step.
    Pow2(Box<Expr<V>>),
    Max(Box<Expr<V>>, Box<Expr<V>>),
    Min(Box<Expr<V>>, Box<Expr<V>>),
    /// Transmission time of a message under the active duration config.
    DurOf(Box<Expr<V>>),
    /// Destination field of a frame; unvalued on frames without one.
    MsgDest(Box<Expr<V>>),
    DataFrame { data: Box<Expr<V>>, src: Box<Expr<V>>, dest: Box<Expr<V>> },
    AckFrame { src: Box<Expr<V>>, dest: Box<Expr<V>> },
    RtsFrame { src: Box<Expr<V>>, dest: Box<Expr<V>>, dur: Box<Expr<V>> },
    CtsFrame { src: Box<Expr<V>>, dest: Box<Expr<V>>, dur: Box<Expr<V>> },
}

/// Guard formula over variables of type `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula<V> {
    True,
    Not(Box<Formula<V>>),
    And(Box<Formula<V>>, Box<Formula<V>>),
    Or(Box<Formula<V>>, Box<Formula<V>>),
    Eq(Expr<V>, Expr<V>),
    Lt(Expr<V>, Expr<V>),
    Le(Expr<V>, Expr<V>),
    /// The message given by the operand completed in the last slot.
    New(Expr<V>),
    /// The medium was idle during the last slot.
    Idle,
}

impl<V> Formula<V> {
    pub fn and(self, other: Formula<V>) -> Formula<V> {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula<V>) -> Formula<V> {
        Formula::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula<V> {
        Formula::Not(Box::new(self))
    }
}

impl<V: Clone> Expr<V> {
    pub fn map_vars<W, F: FnMut(&V) -> W>(&self, f: &mut F) -> Expr<W> {
        use Expr::*;
        match self {
            Lit(v) => Lit(*v),
            Var(v) => Var(f(v)),
            Now => Now,
            Add(a, b) => Add(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Sub(a, b) => Sub(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Mul(a, b) => Mul(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Pow2(a) => Pow2(Box::new(a.map_vars(f))),
            Max(a, b) => Max(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Min(a, b) => Min(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            DurOf(a) => DurOf(Box::new(a.map_vars(f))),
            MsgDest(a) => MsgDest(Box::new(a.map_vars(f))),
            DataFrame { data, src, dest } => DataFrame {
                data: Box::new(data.map_vars(f)),
                src: Box::new(src.map_vars(f)),
                dest: Box::new(dest.map_vars(f)),
            },
            AckFrame { src, dest } => AckFrame {
                src: Box::new(src.map_vars(f)),
                dest: Box::new(dest.map_vars(f)),
            },
            RtsFrame { src, dest, dur } => RtsFrame {
                src: Box::new(src.map_vars(f)),
                dest: Box::new(dest.map_vars(f)),
                dur: Box::new(dur.map_vars(f)),
            },
            CtsFrame { src, dest, dur } => CtsFrame {
                src: Box::new(src.map_vars(f)),
                dest: Box::new(dest.map_vars(f)),
                dur: Box::new(dur.map_vars(f)),
            },
        }
    }

    pub fn visit_vars<F: FnMut(&V)>(&self, f: &mut F) {
        use Expr::*;
        match self {
            Lit(_) | Now => {}
            Var(v) => f(v),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Max(a, b) | Min(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Pow2(a) | DurOf(a) | MsgDest(a) => a.visit_vars(f),
            DataFrame { data, src, dest } => {
                data.visit_vars(f);
                src.visit_vars(f);
                dest.visit_vars(f);
            }
            AckFrame { src, dest } => {
                src.visit_vars(f);
                dest.visit_vars(f);
            }
            RtsFrame { src, dest, dur } | CtsFrame { src, dest, dur } => {
                src.visit_vars(f);
                dest.visit_vars(f);
                dur.visit_vars(f);
            }
        }
    }
}

impl<V: Clone> Formula<V> {
    pub fn map_vars<W, F: FnMut(&V) -> W>(&self, f: &mut F) -> Formula<W> {
        use Formula::*;
        match self {
            True => True,
            Not(a) => Not(Box::new(a.map_vars(f))),
            And(a, b) => And(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Or(a, b) => Or(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Eq(a, b) => Eq(a.map_vars(f), b.map_vars(f)),
            Lt(a, b) => Lt(a.map_vars(f), b.map_vars(f)),
            Le(a, b) => Le(a.map_vars(f), b.map_vars(f)),
            New(a) => New(a.map_vars(f)),
            Idle => Idle,
        }
    }

    pub fn visit_vars<F: FnMut(&V)>(&self, f: &mut F) {
        use Formula::*;
        match self {
            True | Idle => {}
            Not(a) => a.visit_vars(f),
            And(a, b) | Or(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Eq(a, b) | Lt(a, b) | Le(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            New(a) => a.visit_vars(f),
        }
    }
}

/// Evaluation context: the read-only process registers plus the user
/// variable bindings.
#[derive(Debug, Clone, Copy)]
pub struct EvalCtx<'a> {
    pub durations: &'a DurationConfig,
    pub now: Time,
    pub rfr: Chunk,
    pub vars: &'a BTreeMap<VarId, Value>,
}

impl<'a> EvalCtx<'a> {
    fn int(&self, e: &Expr<VarId>) -> Option<Time> {
        match self.eval(e)? {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    fn id(&self, e: &Expr<VarId>) -> Option<NodeId> {
        match self.eval(e)? {
            Value::Id(i) => Some(i),
            _ => None,
        }
    }

    fn payload(&self, e: &Expr<VarId>) -> Option<Payload> {
        match self.eval(e)? {
            Value::Data(p) => Some(p),
            _ => None,
        }
    }

    fn msg(&self, e: &Expr<VarId>) -> Option<Message> {
        match self.eval(e)? {
            Value::Msg(m) => Some(m),
            _ => None,
        }
    }

    pub fn eval(&self, e: &Expr<VarId>) -> Option<Value> {
        use Expr::*;
        Some(match e {
            Lit(v) => *v,
            Var(v) => *self.vars.get(v)?,
            Now => Value::Int(self.now),
            Add(a, b) => Value::Int(self.int(a)? + self.int(b)?),
            Sub(a, b) => Value::Int(self.int(a)? - self.int(b)?),
            Mul(a, b) => Value::Int(self.int(a)? * self.int(b)?),
            Pow2(a) => {
                let k = self.int(a)?;
                if !(0..=62).contains(&k) {
                    return None;
                }
                Value::Int(1 << k)
            }
            Max(a, b) => Value::Int(self.int(a)?.max(self.int(b)?)),
            Min(a, b) => Value::Int(self.int(a)?.min(self.int(b)?)),
            DurOf(a) => Value::Int(dur(&self.msg(a)?, self.durations)),
            MsgDest(a) => match self.msg(a)? {
                Message::Data { dest, .. }
                | Message::Ack { dest, .. }
                | Message::Rts { dest, .. }
                | Message::Cts { dest, .. } => Value::Id(dest),
                Message::User { .. } => return None,
            },
            DataFrame { data, src, dest } => Value::Msg(Message::Data {
                data: self.payload(data)?,
                src: self.id(src)?,
                dest: self.id(dest)?,
            }),
            AckFrame { src, dest } => Value::Msg(Message::Ack {
                src: self.id(src)?,
                dest: self.id(dest)?,
            }),
            RtsFrame { src, dest, dur } => Value::Msg(Message::Rts {
                src: self.id(src)?,
                dest: self.id(dest)?,
                dur: self.int(dur)?,
            }),
            CtsFrame { src, dest, dur } => Value::Msg(Message::Cts {
                src: self.id(src)?,
                dest: self.id(dest)?,
                dur: self.int(dur)?,
            }),
        })
    }

    /// Three-valued evaluation: `None` when the verdict depends on an
    /// unvalued operand.
    pub fn eval_formula(&self, phi: &Formula<VarId>) -> Option<bool> {
        use Formula::*;
        match phi {
            True => Some(true),
            Not(a) => self.eval_formula(a).map(|b| !b),
            And(a, b) => match (self.eval_formula(a), self.eval_formula(b)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Or(a, b) => match (self.eval_formula(a), self.eval_formula(b)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            Eq(a, b) => Some(self.eval(a)? == self.eval(b)?),
            Lt(a, b) => Some(self.int(a)? < self.int(b)?),
            Le(a, b) => Some(self.int(a)? <= self.int(b)?),
            New(a) => {
                let m = self.msg(a)?;
                Some(is_new(self.rfr, &m, self.durations))
            }
            Idle => Some(is_idle(self.rfr)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx<'a>(
        durations: &'a DurationConfig,
        vars: &'a BTreeMap<VarId, Value>,
        rfr: Chunk,
    ) -> EvalCtx<'a> {
        EvalCtx { durations, now: 7, rfr, vars }
    }

    #[test]
    fn arithmetic_and_partiality() {
        let d = DurationConfig::default();
        let mut vars = BTreeMap::new();
        vars.insert(VarId(0), Value::Int(4));
        let c = ctx(&d, &vars, Chunk::Idle);
        let e = Expr::Add(Box::new(Expr::Var(VarId(0))), Box::new(Expr::Now));
        assert_eq!(c.eval(&e), Some(Value::Int(11)));
        let unbound = Expr::Add(Box::new(Expr::Var(VarId(9))), Box::new(Expr::Now));
        assert_eq!(c.eval(&unbound), None);
    }

    #[test]
    fn kleene_connectives_shortcut_unvalued_operands() {
        let d = DurationConfig::default();
        let vars = BTreeMap::new();
        let c = ctx(&d, &vars, Chunk::Idle);
        let undef = Formula::Eq(Expr::Var(VarId(3)), Expr::Lit(Value::Int(0)));
        assert_eq!(c.eval_formula(&undef), None);
        assert_eq!(c.eval_formula(&Formula::True.not().and(undef.clone())), Some(false));
        assert_eq!(c.eval_formula(&Formula::True.or(undef)), Some(true));
    }

    #[test]
    fn new_checks_the_final_fragment() {
        let d = DurationConfig::default();
        let vars = BTreeMap::new();
        let m = Message::Ack { src: NodeId(0), dest: NodeId(1) };
        let c = ctx(&d, &vars, Chunk::Frag(m, 1));
        assert_eq!(c.eval_formula(&Formula::New(Expr::Lit(Value::Msg(m)))), Some(true));
        assert_eq!(c.eval_formula(&Formula::Idle), Some(false));
    }

    #[test]
    fn dest_projection_is_partial_on_test_messages() {
        let d = DurationConfig::default();
        let vars = BTreeMap::new();
        let c = ctx(&d, &vars, Chunk::Idle);
        let user = Expr::Lit(Value::Msg(Message::User { tag: 1, dur: 2 }));
        assert_eq!(c.eval(&Expr::MsgDest(Box::new(user))), None);
        let ack = Expr::Lit(Value::Msg(Message::Ack { src: NodeId(0), dest: NodeId(2) }));
        assert_eq!(
            c.eval(&Expr::MsgDest(Box::new(ack))),
            Some(Value::Id(NodeId(2)))
        );
    }
}
