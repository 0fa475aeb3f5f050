//! Compiled process definitions.
//!
//! Compilation resolves variable names, checks types and static boundness,
//! plans how each guard binds its free variables, and decides whether the
//! model admits clock-offset normalization during exploration.
//!
//! Every variable occurrence must be introduced by a defining-equation
//! parameter, an assignment, a packet-request binder, a probabilistic
//! choice, or by the guard it occurs free in. A guard binds a free variable
//! either by enumerating its declared finite domain or, for integer-typed
//! variables, by matching it against a field of the frame just completed on
//! the medium; the latter requires the variable to occur as a bare frame
//! field inside a top-level freshness conjunct of that guard.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::builder::SeqExpr;
use crate::data::{Message, Time};
use crate::error::ModelError;
use crate::expr::{Expr, Formula, Value, VarId, VarType};

pub const RESERVED_VARS: [&str; 3] = ["now", "rfr", "counter"];

#[derive(Debug, Clone)]
pub struct VarDecl {
    pub name: String,
    pub ty: VarType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcId(pub u16);

/// Index of a program point in the definition arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef(pub u32);

#[derive(Debug, Clone)]
pub struct ProcDef {
    pub name: String,
    pub params: Vec<VarId>,
    pub body: NodeRef,
}

/// Frame kinds a guard can match a variable against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Data,
    Ack,
    Rts,
    Cts,
}

/// Projection of one field out of a completed frame of a given kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldProj {
    pub kind: FrameKind,
    pub field: u8,
}

impl FieldProj {
    pub fn project(&self, m: &Message) -> Option<Value> {
        match (self.kind, m) {
            (FrameKind::Data, Message::Data { data, src, dest }) => Some(match self.field {
                0 => Value::Data(*data),
                1 => Value::Id(*src),
                _ => Value::Id(*dest),
            }),
            (FrameKind::Ack, Message::Ack { src, dest }) => Some(match self.field {
                0 => Value::Id(*src),
                _ => Value::Id(*dest),
            }),
            (FrameKind::Rts, Message::Rts { src, dest, dur }) => Some(match self.field {
                0 => Value::Id(*src),
                1 => Value::Id(*dest),
                _ => Value::Int(*dur),
            }),
            (FrameKind::Cts, Message::Cts { src, dest, dur }) => Some(match self.field {
                0 => Value::Id(*src),
                1 => Value::Id(*dest),
                _ => Value::Int(*dur),
            }),
            _ => None,
        }
    }
}

/// How a guard obtains candidate values for one of its free variables.
#[derive(Debug, Clone)]
pub enum Binder {
    /// Enumerate the declared finite domain of the variable's type.
    Domain(VarType),
    /// Project candidates out of the frame completed in the last slot.
    Unify(Vec<FieldProj>),
}

#[derive(Debug, Clone)]
pub struct GuardPlan {
    /// Free variables in deterministic (first-occurrence) order.
    pub free: Vec<(VarId, Binder)>,
}

#[derive(Debug, Clone)]
pub enum SeqNode {
    Call { proc: ProcId, args: Vec<Expr<VarId>> },
    Guard { plan: u32, phi: Formula<VarId>, then: NodeRef },
    Assign { var: VarId, expr: Expr<VarId>, then: NodeRef },
    Transmit { msg: Expr<VarId>, then: NodeRef },
    NewPkt { data: VarId, dest: VarId, then: NodeRef },
    Deliver { data: Expr<VarId>, then: NodeRef },
    Choice { left: NodeRef, right: NodeRef },
    ProbChoice { var: VarId, bound: Expr<VarId>, then: NodeRef },
}

#[derive(Debug, Clone)]
pub struct CompiledDefs {
    pub vars: Vec<VarDecl>,
    pub procs: Vec<ProcDef>,
    nodes: Vec<SeqNode>,
    node_owner: Vec<ProcId>,
    guards: Vec<GuardPlan>,
    by_name: BTreeMap<String, ProcId>,
    /// Whether exploration may fold equal states that differ only by a
    /// common clock offset.
    pub normalizable: bool,
    /// Stale absolute-time values this far behind the clock behave
    /// identically; used to clamp them into a canonical form.
    pub clamp_slack: Time,
}

impl CompiledDefs {
    pub fn node(&self, r: NodeRef) -> &SeqNode {
        &self.nodes[r.0 as usize]
    }

    pub fn guard_plan(&self, idx: u32) -> &GuardPlan {
        &self.guards[idx as usize]
    }

    pub fn proc(&self, id: ProcId) -> &ProcDef {
        &self.procs[id.0 as usize]
    }

    pub fn proc_by_name(&self, name: &str) -> Option<ProcId> {
        self.by_name.get(name).copied()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|d| d.name == name)
            .map(|i| VarId(i as u16))
    }

    pub fn var_type(&self, v: VarId) -> VarType {
        self.vars[v.0 as usize].ty
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0 as usize].name
    }

    /// Initial state of a named process with its parameters bound, clock
    /// at zero and the medium register idle.
    pub fn initial_state(
        &self,
        name: &str,
        args: &[Value],
    ) -> Result<crate::process::ProcState, ModelError> {
        let pid = self
            .proc_by_name(name)
            .ok_or_else(|| ModelError::UnknownProcess(name.to_string()))?;
        let def = self.proc(pid);
        if def.params.len() != args.len() {
            return Err(ModelError::ArityMismatch(name.to_string()));
        }
        let mut xi = crate::process::Valuation::initial();
        xi.vars = def.params.iter().copied().zip(args.iter().copied()).collect();
        Ok(crate::process::ProcState { expr: def.body, xi })
    }

    /// Short human-readable tag for a program point, e.g. `Cca#3:guard`.
    pub fn describe(&self, r: NodeRef) -> String {
        let owner = self.node_owner[r.0 as usize];
        let head = match self.node(r) {
            SeqNode::Call { proc, .. } => return format!("{}()", self.proc(*proc).name),
            SeqNode::Guard { .. } => "guard",
            SeqNode::Assign { .. } => "assign",
            SeqNode::Transmit { .. } => "transmit",
            SeqNode::NewPkt { .. } => "newpkt",
            SeqNode::Deliver { .. } => "deliver",
            SeqNode::Choice { .. } => "choice",
            SeqNode::ProbChoice { .. } => "pchoice",
        };
        format!("{}#{}:{}", self.proc(owner).name, r.0, head)
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

/// Collects process and variable declarations and compiles them.
#[derive(Debug, Default)]
pub struct DefsBuilder {
    vars: Vec<VarDecl>,
    procs: Vec<(String, Vec<String>, SeqExpr)>,
}

impl DefsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self, name: &str, ty: VarType) -> &mut Self {
        self.vars.push(VarDecl { name: name.to_string(), ty });
        self
    }

    pub fn proc(&mut self, name: &str, params: &[&str], body: SeqExpr) -> &mut Self {
        self.procs.push((
            name.to_string(),
            params.iter().map(|s| s.to_string()).collect(),
            body,
        ));
        self
    }

    pub fn compile(&self) -> Result<CompiledDefs, ModelError> {
        Compiler::new(self)?.run()
    }
}

// Base types the checker compares; Int and AbsTime share one base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Base {
    Bool,
    Integer,
    Id,
    Data,
    Msg,
}

fn base_of(ty: VarType) -> Base {
    match ty {
        VarType::Bool => Base::Bool,
        VarType::Int | VarType::AbsTime => Base::Integer,
        VarType::Id => Base::Id,
        VarType::Data => Base::Data,
        VarType::Msg => Base::Msg,
    }
}

fn base_of_value(v: &Value) -> Base {
    match v {
        Value::Bool(_) => Base::Bool,
        Value::Int(_) => Base::Integer,
        Value::Id(_) => Base::Id,
        Value::Data(_) => Base::Data,
        Value::Msg(_) => Base::Msg,
    }
}

// Time classification for the normalization analysis. `NowBased` values
// ride on the local clock, `Stored` values are clock points kept in
// variables, `Dur` values are shift-invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TimeKind {
    Dur,
    NowBased,
    Stored,
    NonTime,
}

struct Compiler<'a> {
    b: &'a DefsBuilder,
    var_ids: BTreeMap<String, VarId>,
    proc_ids: BTreeMap<String, ProcId>,
    nodes: Vec<SeqNode>,
    node_owner: Vec<ProcId>,
    guards: Vec<GuardPlan>,
    normalizable: bool,
    max_lit: Time,
    current_proc: ProcId,
}

impl<'a> Compiler<'a> {
    fn new(b: &'a DefsBuilder) -> Result<Self, ModelError> {
        let mut var_ids = BTreeMap::new();
        for (i, d) in b.vars.iter().enumerate() {
            if RESERVED_VARS.contains(&d.name.as_str()) {
                return Err(ModelError::ReadOnlyVariable(d.name.clone()));
            }
            if var_ids.insert(d.name.clone(), VarId(i as u16)).is_some() {
                return Err(ModelError::DuplicateVariable(d.name.clone()));
            }
        }
        let mut proc_ids = BTreeMap::new();
        for (i, (name, _, _)) in b.procs.iter().enumerate() {
            if proc_ids.insert(name.clone(), ProcId(i as u16)).is_some() {
                return Err(ModelError::DuplicateProcess(name.clone()));
            }
        }
        Ok(Compiler {
            b,
            var_ids,
            proc_ids,
            nodes: Vec::new(),
            node_owner: Vec::new(),
            guards: Vec::new(),
            normalizable: true,
            max_lit: 0,
            current_proc: ProcId(0),
        })
    }

    fn run(mut self) -> Result<CompiledDefs, ModelError> {
        let mut procs = Vec::new();
        for (i, (name, params, body)) in self.b.procs.iter().enumerate() {
            self.current_proc = ProcId(i as u16);
            let param_ids: Vec<VarId> = params
                .iter()
                .map(|p| self.resolve_var(p))
                .collect::<Result<_, _>>()?;
            let bound: BTreeSet<VarId> = param_ids.iter().copied().collect();
            let body_ref = self.compile_node(body, &bound)?;
            procs.push(ProcDef { name: name.clone(), params: param_ids, body: body_ref });
        }
        Ok(CompiledDefs {
            vars: self.b.vars.clone(),
            procs,
            nodes: self.nodes,
            node_owner: self.node_owner,
            guards: self.guards,
            by_name: self.proc_ids,
            normalizable: self.normalizable,
            clamp_slack: self.max_lit + 1,
        })
    }

    fn resolve_var(&self, name: &str) -> Result<VarId, ModelError> {
        if RESERVED_VARS.contains(&name) {
            return Err(ModelError::ReadOnlyVariable(name.to_string()));
        }
        self.var_ids
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    fn proc_name(&self) -> String {
        self.b.procs[self.current_proc.0 as usize].0.clone()
    }

    fn push(&mut self, n: SeqNode) -> NodeRef {
        self.nodes.push(n);
        self.node_owner.push(self.current_proc);
        NodeRef((self.nodes.len() - 1) as u32)
    }

    fn type_err(&self, detail: impl Into<String>) -> ModelError {
        ModelError::TypeError { proc_name: self.proc_name(), detail: detail.into() }
    }

    fn compile_node(
        &mut self,
        e: &SeqExpr,
        bound: &BTreeSet<VarId>,
    ) -> Result<NodeRef, ModelError> {
        match e {
            SeqExpr::Call(name, args) => {
                let proc = *self
                    .proc_ids
                    .get(name)
                    .ok_or_else(|| ModelError::UnknownProcess(name.clone()))?;
                let (_, params, _) = &self.b.procs[proc.0 as usize];
                if params.len() != args.len() {
                    return Err(ModelError::ArityMismatch(name.clone()));
                }
                let mut cargs = Vec::with_capacity(args.len());
                for (p, a) in params.clone().iter().zip(args) {
                    let ca = self.compile_expr(a, bound)?;
                    let pid = self.resolve_var(p)?;
                    let want = base_of(self.b.vars[pid.0 as usize].ty);
                    let got = self.base_type(&ca)?;
                    if want != got {
                        return Err(self.type_err(format!(
                            "argument for `{p}` of `{name}` has base type {got:?}, expected {want:?}"
                        )));
                    }
                    self.check_assign_normalization(pid, &ca);
                    cargs.push(ca);
                }
                Ok(self.push(SeqNode::Call { proc, args: cargs }))
            }
            SeqExpr::Guard(phi, p) => {
                let cphi = self.compile_formula(phi, bound)?;
                self.check_formula_types(&cphi)?;
                self.check_formula_normalization(&cphi);
                self.note_formula_literals(&cphi);
                let mut free = Vec::new();
                let mut seen = BTreeSet::new();
                cphi.visit_vars(&mut |v: &VarId| {
                    if !bound.contains(v) && seen.insert(*v) {
                        free.push(*v);
                    }
                });
                let mut planned = Vec::new();
                for v in &free {
                    planned.push((*v, self.plan_binder(*v, &cphi)?));
                }
                let plan = self.guards.len() as u32;
                self.guards.push(GuardPlan { free: planned });
                let mut inner = bound.clone();
                inner.extend(free.iter().copied());
                let then = self.compile_node(p, &inner)?;
                Ok(self.push(SeqNode::Guard { plan, phi: cphi, then }))
            }
            SeqExpr::Assign(vname, expr, p) => {
                let var = self.resolve_var(vname)?;
                let cexpr = self.compile_expr(expr, bound)?;
                let want = base_of(self.b.vars[var.0 as usize].ty);
                let got = self.base_type(&cexpr)?;
                if want != got {
                    return Err(self.type_err(format!(
                        "assignment to `{vname}`: base type {got:?}, expected {want:?}"
                    )));
                }
                self.check_assign_normalization(var, &cexpr);
                let mut inner = bound.clone();
                inner.insert(var);
                let then = self.compile_node(p, &inner)?;
                Ok(self.push(SeqNode::Assign { var, expr: cexpr, then }))
            }
            SeqExpr::Transmit(msg, p) => {
                let cmsg = self.compile_expr(msg, bound)?;
                if self.base_type(&cmsg)? != Base::Msg {
                    return Err(self.type_err("transmit operand must be a message"));
                }
                let then = self.compile_node(p, bound)?;
                Ok(self.push(SeqNode::Transmit { msg: cmsg, then }))
            }
            SeqExpr::NewPkt(dname, destname, p) => {
                let data = self.resolve_var(dname)?;
                let dest = self.resolve_var(destname)?;
                if self.b.vars[data.0 as usize].ty != VarType::Data {
                    return Err(self.type_err(format!("newpkt data variable `{dname}` must have type Data")));
                }
                if self.b.vars[dest.0 as usize].ty != VarType::Id {
                    return Err(self.type_err(format!("newpkt dest variable `{destname}` must have type Id")));
                }
                let mut inner = bound.clone();
                inner.insert(data);
                inner.insert(dest);
                let then = self.compile_node(p, &inner)?;
                Ok(self.push(SeqNode::NewPkt { data, dest, then }))
            }
            SeqExpr::Deliver(dexpr, p) => {
                let cd = self.compile_expr(dexpr, bound)?;
                if self.base_type(&cd)? != Base::Data {
                    return Err(self.type_err("deliver operand must be network-layer data"));
                }
                let then = self.compile_node(p, bound)?;
                Ok(self.push(SeqNode::Deliver { data: cd, then }))
            }
            SeqExpr::Choice(l, r) => {
                let left = self.compile_node(l, bound)?;
                let right = self.compile_node(r, bound)?;
                Ok(self.push(SeqNode::Choice { left, right }))
            }
            SeqExpr::ProbChoice(vname, bound_expr, p) => {
                let var = self.resolve_var(vname)?;
                if base_of(self.b.vars[var.0 as usize].ty) != Base::Integer {
                    return Err(self.type_err(format!("probabilistic choice variable `{vname}` must be an integer")));
                }
                let cb = self.compile_expr(bound_expr, bound)?;
                if self.base_type(&cb)? != Base::Integer {
                    return Err(self.type_err("probabilistic choice bound must be an integer"));
                }
                let mut inner = bound.clone();
                inner.insert(var);
                let then = self.compile_node(p, &inner)?;
                Ok(self.push(SeqNode::ProbChoice { var, bound: cb, then }))
            }
        }
    }

    // Resolves variable names; also enforces static boundness for every
    // non-guard position (guards introduce their own free variables).
    fn compile_expr(
        &mut self,
        e: &Expr<String>,
        bound: &BTreeSet<VarId>,
    ) -> Result<Expr<VarId>, ModelError> {
        let mut err = None;
        let resolved = e.map_vars(&mut |name: &String| match self.resolve_var(name) {
            Ok(v) => {
                if !bound.contains(&v) && err.is_none() {
                    err = Some(ModelError::UnboundVariable {
                        proc_name: self.proc_name(),
                        name: name.clone(),
                    });
                }
                v
            }
            Err(e) => {
                if err.is_none() {
                    err = Some(e);
                }
                VarId(u16::MAX)
            }
        });
        match err {
            Some(e) => Err(e),
            None => {
                self.note_literals(&resolved);
                Ok(resolved)
            }
        }
    }

    // Guard formulas may mention unbound variables; resolve names only.
    fn compile_formula(
        &mut self,
        phi: &Formula<String>,
        _bound: &BTreeSet<VarId>,
    ) -> Result<Formula<VarId>, ModelError> {
        let mut err = None;
        let resolved = phi.map_vars(&mut |name: &String| match self.resolve_var(name) {
            Ok(v) => v,
            Err(e) => {
                if err.is_none() {
                    err = Some(e);
                }
                VarId(u16::MAX)
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(resolved),
        }
    }

    fn note_literals(&mut self, e: &Expr<VarId>) {
        if let Expr::Lit(Value::Int(k)) = e {
            self.max_lit = self.max_lit.max(k.abs());
        }
        match e {
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Max(a, b)
            | Expr::Min(a, b) => {
                self.note_literals(a);
                self.note_literals(b);
            }
            Expr::Pow2(a) | Expr::DurOf(a) | Expr::MsgDest(a) => self.note_literals(a),
            Expr::DataFrame { data, src, dest } => {
                self.note_literals(data);
                self.note_literals(src);
                self.note_literals(dest);
            }
            Expr::AckFrame { src, dest } => {
                self.note_literals(src);
                self.note_literals(dest);
            }
            Expr::RtsFrame { src, dest, dur } | Expr::CtsFrame { src, dest, dur } => {
                self.note_literals(src);
                self.note_literals(dest);
                self.note_literals(dur);
            }
            _ => {}
        }
    }

    fn note_formula_literals(&mut self, phi: &Formula<VarId>) {
        use Formula::*;
        match phi {
            True | Idle => {}
            Not(a) => self.note_formula_literals(a),
            And(a, b) | Or(a, b) => {
                self.note_formula_literals(a);
                self.note_formula_literals(b);
            }
            Eq(a, b) | Lt(a, b) | Le(a, b) => {
                self.note_literals(a);
                self.note_literals(b);
            }
            New(a) => self.note_literals(a),
        }
    }

    fn var_base(&self, v: VarId) -> Base {
        base_of(self.b.vars[v.0 as usize].ty)
    }

    fn base_type(&self, e: &Expr<VarId>) -> Result<Base, ModelError> {
        use Expr::*;
        Ok(match e {
            Lit(v) => base_of_value(v),
            Var(v) => self.var_base(*v),
            Now => Base::Integer,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Max(a, b) | Min(a, b) => {
                self.expect_int(a)?;
                self.expect_int(b)?;
                Base::Integer
            }
            Pow2(a) => {
                self.expect_int(a)?;
                Base::Integer
            }
            DurOf(a) => {
                self.expect(a, Base::Msg)?;
                Base::Integer
            }
            MsgDest(a) => {
                self.expect(a, Base::Msg)?;
                Base::Id
            }
            DataFrame { data, src, dest } => {
                self.expect(data, Base::Data)?;
                self.expect(src, Base::Id)?;
                self.expect(dest, Base::Id)?;
                Base::Msg
            }
            AckFrame { src, dest } => {
                self.expect(src, Base::Id)?;
                self.expect(dest, Base::Id)?;
                Base::Msg
            }
            RtsFrame { src, dest, dur } | CtsFrame { src, dest, dur } => {
                self.expect(src, Base::Id)?;
                self.expect(dest, Base::Id)?;
                self.expect_int(dur)?;
                Base::Msg
            }
        })
    }

    fn expect(&self, e: &Expr<VarId>, want: Base) -> Result<(), ModelError> {
        let got = self.base_type(e)?;
        if got != want {
            return Err(self.type_err(format!("expected {want:?}, got {got:?}")));
        }
        Ok(())
    }

    fn expect_int(&self, e: &Expr<VarId>) -> Result<(), ModelError> {
        self.expect(e, Base::Integer)
    }

    fn check_formula_types(&self, phi: &Formula<VarId>) -> Result<(), ModelError> {
        use Formula::*;
        match phi {
            True | Idle => Ok(()),
            Not(a) => self.check_formula_types(a),
            And(a, b) | Or(a, b) => {
                self.check_formula_types(a)?;
                self.check_formula_types(b)
            }
            Eq(a, b) => {
                let ta = self.base_type(a)?;
                let tb = self.base_type(b)?;
                if ta != tb {
                    return Err(self.type_err(format!("equality between {ta:?} and {tb:?}")));
                }
                Ok(())
            }
            Lt(a, b) | Le(a, b) => {
                self.expect_int(a)?;
                self.expect_int(b)
            }
            New(a) => self.expect(a, Base::Msg),
        }
    }

    // --- normalization analysis -----------------------------------------

    fn time_kind(&self, e: &Expr<VarId>) -> TimeKind {
        use Expr::*;
        match e {
            Lit(Value::Int(_)) => TimeKind::Dur,
            Lit(_) => TimeKind::NonTime,
            Var(v) => match self.b.vars[v.0 as usize].ty {
                VarType::AbsTime => TimeKind::Stored,
                VarType::Int => TimeKind::Dur,
                _ => TimeKind::NonTime,
            },
            Now => TimeKind::NowBased,
            Add(a, b) | Sub(a, b) => {
                let (ka, kb) = (self.time_kind(a), self.time_kind(b));
                match (ka, kb) {
                    (TimeKind::Dur, TimeKind::Dur) => TimeKind::Dur,
                    (TimeKind::NowBased, TimeKind::Dur) => TimeKind::NowBased,
                    (TimeKind::Dur, TimeKind::NowBased) if matches!(e, Add(..)) => TimeKind::NowBased,
                    (TimeKind::Stored, TimeKind::Dur) => TimeKind::Stored,
                    (TimeKind::Dur, TimeKind::Stored) if matches!(e, Add(..)) => TimeKind::Stored,
                    // Differences of clock points and other mixtures defeat
                    // the offset argument.
                    _ => TimeKind::NonTime,
                }
            }
            Mul(a, b) => {
                if self.time_kind(a) == TimeKind::Dur && self.time_kind(b) == TimeKind::Dur {
                    TimeKind::Dur
                } else {
                    TimeKind::NonTime
                }
            }
            Pow2(a) => {
                if self.time_kind(a) == TimeKind::Dur {
                    TimeKind::Dur
                } else {
                    TimeKind::NonTime
                }
            }
            Max(a, b) | Min(a, b) => {
                let (ka, kb) = (self.time_kind(a), self.time_kind(b));
                match (ka, kb) {
                    (TimeKind::Dur, TimeKind::Dur) => TimeKind::Dur,
                    (TimeKind::NowBased, TimeKind::NowBased) => TimeKind::NowBased,
                    (TimeKind::Stored, TimeKind::Stored)
                    | (TimeKind::Stored, TimeKind::NowBased)
                    | (TimeKind::NowBased, TimeKind::Stored) => TimeKind::Stored,
                    _ => TimeKind::NonTime,
                }
            }
            DurOf(_) => TimeKind::Dur,
            // Frame duration fields are durations by construction.
            _ => TimeKind::NonTime,
        }
    }

    // Comparisons may pit the clock against a stored point (plus literal),
    // or stay entirely within one shift class.
    fn comparison_ok(&self, a: &Expr<VarId>, b: &Expr<VarId>) -> bool {
        let (ka, kb) = (self.time_kind(a), self.time_kind(b));
        match (ka, kb) {
            (TimeKind::Dur, TimeKind::Dur) => true,
            (TimeKind::NowBased, TimeKind::NowBased) => true,
            (TimeKind::NowBased, TimeKind::Stored) => self.stored_offset_form(b),
            (TimeKind::Stored, TimeKind::NowBased) => self.stored_offset_form(a),
            _ => false,
        }
    }

    // `v`, `v + k`, `v - k` for stored v and literal k: the only stored
    // shapes whose staleness the clamp bound covers.
    fn stored_offset_form(&self, e: &Expr<VarId>) -> bool {
        match e {
            Expr::Var(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                matches!(a.as_ref(), Expr::Var(_)) && matches!(b.as_ref(), Expr::Lit(Value::Int(_)))
            }
            _ => false,
        }
    }

    fn check_formula_normalization(&mut self, phi: &Formula<VarId>) {
        use Formula::*;
        match phi {
            True | Idle => {}
            Not(a) => self.check_formula_normalization(a),
            And(a, b) | Or(a, b) => {
                self.check_formula_normalization(a);
                self.check_formula_normalization(b);
            }
            Eq(a, b) | Lt(a, b) | Le(a, b) => {
                let integer = self.base_type(a).map(|t| t == Base::Integer).unwrap_or(false);
                if integer && !self.comparison_ok(a, b) {
                    self.normalizable = false;
                }
            }
            New(_) => {}
        }
    }

    fn check_assign_normalization(&mut self, var: VarId, e: &Expr<VarId>) {
        let want = match self.b.vars[var.0 as usize].ty {
            VarType::AbsTime => TimeKind::Stored,
            VarType::Int => TimeKind::Dur,
            _ => return,
        };
        let got = self.time_kind(e);
        let ok = match want {
            TimeKind::Stored => matches!(got, TimeKind::Stored | TimeKind::NowBased),
            TimeKind::Dur => got == TimeKind::Dur,
            _ => true,
        };
        if !ok {
            self.normalizable = false;
        }
    }

    fn plan_binder(&self, v: VarId, phi: &Formula<VarId>) -> Result<Binder, ModelError> {
        let projs = frame_projections(v, phi);
        if !projs.is_empty() {
            return Ok(Binder::Unify(projs));
        }
        let ty = self.b.vars[v.0 as usize].ty;
        match ty {
            VarType::Bool | VarType::Id | VarType::Data => Ok(Binder::Domain(ty)),
            _ => Err(ModelError::UnbindableGuardVariable {
                proc_name: self.proc_name(),
                var: self.b.vars[v.0 as usize].name.clone(),
            }),
        }
    }
}

// Field positions of `v` inside freshness atoms that are top-level
// conjuncts of `phi`. Candidates drawn from these positions are complete:
// whenever such a conjunct holds, the frame on the medium determines `v`.
fn frame_projections(v: VarId, phi: &Formula<VarId>) -> Vec<FieldProj> {
    let mut out = Vec::new();
    let mut stack = vec![phi];
    while let Some(f) = stack.pop() {
        match f {
            Formula::And(a, b) => {
                stack.push(a);
                stack.push(b);
            }
            Formula::New(m) => collect_projs(v, m, &mut out),
            _ => {}
        }
    }
    out.dedup();
    out
}

fn collect_projs(v: VarId, m: &Expr<VarId>, out: &mut Vec<FieldProj>) {
    let is_var = |e: &Expr<VarId>| matches!(e, Expr::Var(x) if *x == v);
    match m {
        Expr::DataFrame { data, src, dest } => {
            for (i, f) in [data, src, dest].into_iter().enumerate() {
                if is_var(f) {
                    out.push(FieldProj { kind: FrameKind::Data, field: i as u8 });
                }
            }
        }
        Expr::AckFrame { src, dest } => {
            for (i, f) in [src, dest].into_iter().enumerate() {
                if is_var(f) {
                    out.push(FieldProj { kind: FrameKind::Ack, field: i as u8 });
                }
            }
        }
        Expr::RtsFrame { src, dest, dur } => {
            for (i, f) in [src, dest, dur].into_iter().enumerate() {
                if is_var(f) {
                    out.push(FieldProj { kind: FrameKind::Rts, field: i as u8 });
                }
            }
        }
        Expr::CtsFrame { src, dest, dur } => {
            for (i, f) in [src, dest, dur].into_iter().enumerate() {
                if is_var(f) {
                    out.push(FieldProj { kind: FrameKind::Cts, field: i as u8 });
                }
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::*;

    #[test]
    fn rejects_reserved_names() {
        let mut b = DefsBuilder::new();
        b.var("now", VarType::Int);
        b.proc("P", &[], guard(tt(), call("P", vec![])));
        assert!(matches!(b.compile(), Err(ModelError::ReadOnlyVariable(_))));
    }

    #[test]
    fn rejects_unbound_variables_and_type_mismatches() {
        let mut b = DefsBuilder::new();
        b.var("x", VarType::Int);
        b.proc(
            "P",
            &["x"],
            deliver(var("x"), call("P", vec![var("x")])),
        );
        assert!(matches!(b.compile(), Err(ModelError::TypeError { .. })));

        let mut b = DefsBuilder::new();
        b.var("d", VarType::Data);
        b.proc("P", &[], deliver(var("d"), call("P", vec![])));
        assert!(matches!(b.compile(), Err(ModelError::UnboundVariable { .. })));
    }

    #[test]
    fn guard_binds_variables_for_continuation() {
        let mut b = DefsBuilder::new();
        b.var("d", VarType::Data);
        b.proc(
            "P",
            &[],
            guard(
                eq(var("d"), var("d")),
                deliver(var("d"), call("P", vec![])),
            ),
        );
        let defs = b.compile().unwrap();
        assert!(defs.normalizable);
        let plan = defs.guard_plan(0);
        assert_eq!(plan.free.len(), 1);
        assert!(matches!(plan.free[0].1, Binder::Domain(VarType::Data)));
    }

    #[test]
    fn integer_guard_variable_requires_frame_position() {
        let mut b = DefsBuilder::new();
        b.var("t", VarType::Int);
        b.proc("P", &[], guard(eq(var("t"), ilit(3)), call("P", vec![])));
        assert!(matches!(
            b.compile(),
            Err(ModelError::UnbindableGuardVariable { .. })
        ));

        let mut b = DefsBuilder::new();
        b.var("t", VarType::Int);
        b.var("s", VarType::Id);
        b.var("r", VarType::Id);
        b.proc(
            "P",
            &[],
            guard(fresh(rtsframe(var("s"), var("r"), var("t"))), call("P", vec![])),
        );
        let defs = b.compile().unwrap();
        let plan = defs.guard_plan(0);
        assert!(plan
            .free
            .iter()
            .all(|(_, b)| matches!(b, Binder::Unify(_))));
    }

    #[test]
    fn clock_literal_comparison_defeats_normalization() {
        let mut b = DefsBuilder::new();
        b.proc("P", &[], guard(ge(now(), ilit(5)), call("P", vec![])));
        let defs = b.compile().unwrap();
        assert!(!defs.normalizable);
        assert_eq!(defs.clamp_slack, 6);
    }

    #[test]
    fn deadline_patterns_stay_normalizable() {
        let mut b = DefsBuilder::new();
        b.var("t", VarType::AbsTime);
        b.proc(
            "P",
            &["t"],
            choice(
                guard(ge(now(), var("t")), call("P", vec![var("t")])),
                guard(
                    gt(now(), sub(var("t"), ilit(1))),
                    assign("t", add(now(), ilit(4)), call("P", vec![var("t")])),
                ),
            ),
        );
        let defs = b.compile().unwrap();
        assert!(defs.normalizable);
    }
}
