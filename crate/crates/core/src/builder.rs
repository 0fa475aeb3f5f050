//! Construction syntax for sequential process definitions.
//!
//! Bodies are built as plain trees with string variable names and compiled
//! into an arena by [`crate::defs::DefsBuilder::compile`]. The helper
//! functions keep protocol definitions close to pseudo code.

use crate::data::{Message, NodeId, Payload, Time};
use crate::expr::{Expr, Formula, Value};

/// Sequential process expression, builder form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqExpr {
    Call(String, Vec<Expr<String>>),
    Guard(Formula<String>, Box<SeqExpr>),
    Assign(String, Expr<String>, Box<SeqExpr>),
    Transmit(Expr<String>, Box<SeqExpr>),
    NewPkt(String, String, Box<SeqExpr>),
    Deliver(Expr<String>, Box<SeqExpr>),
    Choice(Box<SeqExpr>, Box<SeqExpr>),
    ProbChoice(String, Expr<String>, Box<SeqExpr>),
}

pub fn var(n: &str) -> Expr<String> {
    Expr::Var(n.to_string())
}

pub fn ilit(i: Time) -> Expr<String> {
    Expr::Lit(Value::Int(i))
}

pub fn id_lit(id: NodeId) -> Expr<String> {
    Expr::Lit(Value::Id(id))
}

pub fn data_lit(p: Payload) -> Expr<String> {
    Expr::Lit(Value::Data(p))
}

pub fn msg_lit(m: Message) -> Expr<String> {
    Expr::Lit(Value::Msg(m))
}

pub fn now() -> Expr<String> {
    Expr::Now
}

pub fn add(a: Expr<String>, b: Expr<String>) -> Expr<String> {
    Expr::Add(Box::new(a), Box::new(b))
}

pub fn sub(a: Expr<String>, b: Expr<String>) -> Expr<String> {
    Expr::Sub(Box::new(a), Box::new(b))
}

pub fn mul(a: Expr<String>, b: Expr<String>) -> Expr<String> {
    Expr::Mul(Box::new(a), Box::new(b))
}

pub fn pow2(a: Expr<String>) -> Expr<String> {
    Expr::Pow2(Box::new(a))
}

pub fn emax(a: Expr<String>, b: Expr<String>) -> Expr<String> {
    Expr::Max(Box::new(a), Box::new(b))
}

pub fn emin(a: Expr<String>, b: Expr<String>) -> Expr<String> {
    Expr::Min(Box::new(a), Box::new(b))
}

pub fn dur_of(m: Expr<String>) -> Expr<String> {
    Expr::DurOf(Box::new(m))
}

pub fn msg_dest(m: Expr<String>) -> Expr<String> {
    Expr::MsgDest(Box::new(m))
}

pub fn dataframe(data: Expr<String>, src: Expr<String>, dest: Expr<String>) -> Expr<String> {
    Expr::DataFrame { data: Box::new(data), src: Box::new(src), dest: Box::new(dest) }
}

pub fn ackframe(src: Expr<String>, dest: Expr<String>) -> Expr<String> {
    Expr::AckFrame { src: Box::new(src), dest: Box::new(dest) }
}

pub fn rtsframe(src: Expr<String>, dest: Expr<String>, dur: Expr<String>) -> Expr<String> {
    Expr::RtsFrame { src: Box::new(src), dest: Box::new(dest), dur: Box::new(dur) }
}

pub fn ctsframe(src: Expr<String>, dest: Expr<String>, dur: Expr<String>) -> Expr<String> {
    Expr::CtsFrame { src: Box::new(src), dest: Box::new(dest), dur: Box::new(dur) }
}

pub fn tt() -> Formula<String> {
    Formula::True
}

pub fn ff() -> Formula<String> {
    Formula::True.not()
}

pub fn eq(a: Expr<String>, b: Expr<String>) -> Formula<String> {
    Formula::Eq(a, b)
}

pub fn ne(a: Expr<String>, b: Expr<String>) -> Formula<String> {
    Formula::Eq(a, b).not()
}

pub fn lt(a: Expr<String>, b: Expr<String>) -> Formula<String> {
    Formula::Lt(a, b)
}

pub fn le(a: Expr<String>, b: Expr<String>) -> Formula<String> {
    Formula::Le(a, b)
}

pub fn gt(a: Expr<String>, b: Expr<String>) -> Formula<String> {
    Formula::Lt(b, a)
}

pub fn ge(a: Expr<String>, b: Expr<String>) -> Formula<String> {
    Formula::Le(b, a)
}

pub fn fresh(m: Expr<String>) -> Formula<String> {
    Formula::New(m)
}

pub fn medium_idle() -> Formula<String> {
    Formula::Idle
}

pub fn call(name: &str, args: Vec<Expr<String>>) -> SeqExpr {
    SeqExpr::Call(name.to_string(), args)
}

pub fn guard(phi: Formula<String>, p: SeqExpr) -> SeqExpr {
    SeqExpr::Guard(phi, Box::new(p))
}

pub fn assign(v: &str, e: Expr<String>, p: SeqExpr) -> SeqExpr {
    SeqExpr::Assign(v.to_string(), e, Box::new(p))
}

pub fn transmit(m: Expr<String>, p: SeqExpr) -> SeqExpr {
    SeqExpr::Transmit(m, Box::new(p))
}

pub fn newpkt(data: &str, dest: &str, p: SeqExpr) -> SeqExpr {
    SeqExpr::NewPkt(data.to_string(), dest.to_string(), Box::new(p))
}

pub fn deliver(e: Expr<String>, p: SeqExpr) -> SeqExpr {
    SeqExpr::Deliver(e, Box::new(p))
}

pub fn choice(l: SeqExpr, r: SeqExpr) -> SeqExpr {
    SeqExpr::Choice(Box::new(l), Box::new(r))
}

/// Right-folded n-ary choice.
pub fn choice_all<I: IntoIterator<Item = SeqExpr>>(branches: I) -> SeqExpr {
    let mut items: Vec<SeqExpr> = branches.into_iter().collect();
    assert!(!items.is_empty(), "choice needs at least one branch");
    let mut acc = items.pop().unwrap();
    while let Some(b) = items.pop() {
        acc = choice(b, acc);
    }
    acc
}

/// Uniform probabilistic choice binding `v` to 0..=bound.
pub fn prob_choice(v: &str, bound: Expr<String>, p: SeqExpr) -> SeqExpr {
    SeqExpr::ProbChoice(v.to_string(), bound, Box::new(p))
}
