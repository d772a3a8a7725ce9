//! Path-merging symbolic execution producing a verification condition, and
//! the same engine run with every choice fixed up front (replay).
//!
//! Obligations are scoped by the assumptions executed before them: the query
//! is `domain ∧ ∨ᵢ (prefixᵢ ∧ guardᵢ ∧ ¬bodyᵢ)` where `prefixᵢ` conjoins
//! `g ⇒ b` for every assume reached earlier in program order. This matches
//! concrete execution, which stops at whichever of an assume or an assert
//! fails first.

use std::collections::HashMap;
use std::rc::Rc;

use crate::ast::{BinOp, UnOp};
use crate::choice::{ChoiceKey, ModelOracle, Registry};
use crate::elaborate::{CellKind, InstanceTree, NodeId, Slot, ROOT};
use crate::eval::{EvalError, RunResult, TraceEvent, Verdict};
use crate::term::{BvOp, Const, IntOp, Sort, TermId, TermPool};
use crate::tir::*;
use crate::types::Ty;
use crate::value::{format_value, SparseArray, Value};

/// A value as a tree of terms. Records and vectors are always exploded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymVal {
    Unit,
    /// A scalar or array term.
    Term(TermId),
    Record(Rc<[(String, Ty)]>, Vec<SymVal>),
    Vector(Vec<SymVal>),
}

impl SymVal {
    fn term(&self) -> TermId {
        match self {
            SymVal::Term(t) => *t,
            other => panic!("expected a scalar, found {:?}", other),
        }
    }

    fn leaves(&self, out: &mut Vec<TermId>) {
        match self {
            SymVal::Unit => {}
            SymVal::Term(t) => out.push(*t),
            SymVal::Record(_, vs) | SymVal::Vector(vs) => vs.iter().for_each(|v| v.leaves(out)),
        }
    }
}

/// Per-leaf if-then-else of two values of the same type.
pub fn merge(pool: &mut TermPool, cond: TermId, a: &SymVal, b: &SymVal) -> SymVal {
    match (a, b) {
        (SymVal::Unit, SymVal::Unit) => SymVal::Unit,
        (SymVal::Term(x), SymVal::Term(y)) => SymVal::Term(pool.ite(cond, *x, *y)),
        (SymVal::Record(fs, xs), SymVal::Record(_, ys)) => {
            SymVal::Record(fs.clone(), xs.iter().zip(ys).map(|(x, y)| merge(pool, cond, x, y)).collect())
        }
        (SymVal::Vector(xs), SymVal::Vector(ys)) => {
            SymVal::Vector(xs.iter().zip(ys).map(|(x, y)| merge(pool, cond, x, y)).collect())
        }
        _ => panic!("merging values of different shapes"),
    }
}

pub fn leaf_sort(ty: &Ty) -> Sort {
    match ty {
        Ty::Bool => Sort::Bool,
        Ty::Bits(w) => Sort::Bv(*w),
        Ty::Int => Sort::Int,
        Ty::Enum(e) => Sort::Bv(e.encoding_width()),
        Ty::Array(k, v) => Sort::Array(Rc::new(leaf_sort(k)), Rc::new(leaf_sort(v))),
        other => panic!("`{}` is not a leaf type", other),
    }
}

/// Constant term(s) for a concrete value.
pub fn value_to_sym(pool: &mut TermPool, v: &Value) -> SymVal {
    match v {
        Value::Unit => SymVal::Unit,
        Value::Record(fs, vs) => SymVal::Record(fs.clone(), vs.iter().map(|x| value_to_sym(pool, x)).collect()),
        Value::Vector(vs) => SymVal::Vector(vs.iter().map(|x| value_to_sym(pool, x)).collect()),
        Value::Array(a) => {
            let d = value_to_sym(pool, &a.default).term();
            let mut t = pool.const_array(leaf_sort(&a.key), d);
            for (k, x) in a.mods.iter() {
                let k = value_to_sym(pool, k).term();
                let x = value_to_sym(pool, x).term();
                t = pool.store(t, k, x);
            }
            SymVal::Term(t)
        }
        scalar => SymVal::Term(scalar_term(pool, scalar)),
    }
}

fn scalar_term(pool: &mut TermPool, v: &Value) -> TermId {
    match v {
        Value::Bool(b) => pool.bool(*b),
        Value::Bits { width, value } => pool.bv(*width, *value),
        Value::Int(i) => pool.int(i.clone()),
        Value::Enum(e, i) => pool.bv(e.encoding_width(), *i as u128),
        other => panic!("not a scalar: {:?}", other),
    }
}

/// Reads back a fully constant value; `None` if any leaf is symbolic.
pub fn sym_to_value(pool: &TermPool, sv: &SymVal, ty: &Ty) -> Option<Value> {
    Some(match (sv, ty) {
        (SymVal::Unit, _) => Value::Unit,
        (SymVal::Record(_, vs), Ty::Record(fs)) => Value::Record(
            fs.clone(),
            vs.iter().zip(fs.iter()).map(|(v, (_, t))| sym_to_value(pool, v, t)).collect::<Option<_>>()?,
        ),
        (SymVal::Vector(vs), Ty::Vector(e, _)) => {
            Value::Vector(vs.iter().map(|v| sym_to_value(pool, v, e)).collect::<Option<_>>()?)
        }
        (SymVal::Term(t), Ty::Array(k, v)) => {
            let (entries, base) = pool.store_chain(*t);
            let crate::term::Node::ConstArray(_, d) = pool.node(base) else {
                return None;
            };
            let mut mods = Vec::new();
            for (key, val) in entries {
                mods.push((const_to_value(pool, key, k)?, const_to_value(pool, val, v)?));
            }
            Value::Array(SparseArray {
                key: (**k).clone(),
                value: (**v).clone(),
                default: Rc::new(const_to_value(pool, *d, v)?),
                mods: Rc::new(mods),
            })
        }
        (SymVal::Term(t), _) => const_to_value(pool, *t, ty)?,
        _ => return None,
    })
}

fn const_to_value(pool: &TermPool, t: TermId, ty: &Ty) -> Option<Value> {
    Some(match (pool.constant(t)?, ty) {
        (Const::Bool(b), Ty::Bool) => Value::Bool(b),
        (Const::Bv(w, v), Ty::Bits(_)) => Value::bits(w, v),
        (Const::Int(i), Ty::Int) => Value::Int(i),
        (Const::Bv(_, v), Ty::Enum(e)) if (v as usize) < e.variants.len() => Value::Enum(e.clone(), v as u32),
        _ => return None,
    })
}

#[derive(Clone, Debug)]
pub struct Obligation {
    /// Conjunction of `guard ⇒ body` over the assumes executed earlier.
    pub prefix: TermId,
    pub guard: TermId,
    pub body: TermId,
    pub site: SiteId,
}

/// The query "assumptions hold and some assertion fails".
pub struct Vc {
    pub pool: TermPool,
    pub registry: Registry,
    /// Range constraints on enum-valued choices.
    pub domain: Vec<TermId>,
    pub assumptions: Vec<(TermId, TermId)>,
    pub obligations: Vec<Obligation>,
    pub query: TermId,
}

enum Stop {
    Assert(SiteId),
    Assume(SiteId),
    Error(EvalError),
}

enum Mode<'m> {
    Symbolic,
    Replay { model: &'m ModelOracle, capacity: usize },
}

struct Exec<'a, 'm> {
    tp: &'a TypedProgram,
    tree: &'a InstanceTree,
    pool: TermPool,
    registry: Registry,
    mode: Mode<'m>,
    cells: Vec<SymVal>,
    guard: TermId,
    assumed: TermId,
    assumptions: Vec<(TermId, TermId)>,
    obligations: Vec<Obligation>,
    domain: Vec<TermId>,
    chain: Vec<SiteId>,
    transcript: String,
    events: Vec<TraceEvent>,
}

type Locals = Vec<Option<SymVal>>;

/// Symbolically executes `scenario` and builds its verification condition.
pub fn sym_exec(tp: &TypedProgram, tree: &InstanceTree, scenario: &str) -> Result<Vc, EvalError> {
    let mut ex = Exec::new(tp, tree, Mode::Symbolic);
    match ex.run(scenario) {
        Ok(()) => {}
        Err(Stop::Error(e)) => return Err(e),
        Err(_) => unreachable!("symbolic execution never stops early"),
    }
    let mut disjuncts = Vec::new();
    for ob in &ex.obligations {
        let nb = ex.pool.not(ob.body);
        disjuncts.push(ex.pool.and(&[ob.prefix, ob.guard, nb]));
    }
    let violation = ex.pool.or(&disjuncts);
    let mut conj = ex.domain.clone();
    conj.push(violation);
    let query = ex.pool.and(&conj);
    Ok(Vc {
        pool: ex.pool,
        registry: ex.registry,
        domain: ex.domain,
        assumptions: ex.assumptions,
        obligations: ex.obligations,
        query,
    })
}

/// Runs `scenario` with every choice taken from `model` (zero if absent).
pub fn replay(
    tp: &TypedProgram,
    tree: &InstanceTree,
    scenario: &str,
    model: &ModelOracle,
    capacity: usize,
) -> Result<RunResult, EvalError> {
    let mut ex = Exec::new(tp, tree, Mode::Replay { model, capacity });
    let verdict = match ex.run(scenario) {
        Ok(()) => Verdict::Passed,
        Err(Stop::Assert(site)) => Verdict::AssertionFailed {
            site,
            span: tp.site(site).span,
        },
        Err(Stop::Assume(site)) => Verdict::AssumeInfeasible {
            site,
            span: tp.site(site).span,
        },
        Err(Stop::Error(e)) => return Err(e),
    };
    let store = tree
        .cells
        .iter()
        .zip(&ex.cells)
        .map(|(c, v)| sym_to_value(&ex.pool, v, &c.ty()).expect("replay state is concrete"))
        .collect();
    Ok(RunResult {
        verdict,
        transcript: ex.transcript,
        events: ex.events,
        store,
    })
}

impl<'a, 'm> Exec<'a, 'm> {
    fn new(tp: &'a TypedProgram, tree: &'a InstanceTree, mode: Mode<'m>) -> Exec<'a, 'm> {
        let mut pool = TermPool::new();
        let t = pool.tt();
        Exec {
            tp,
            tree,
            pool,
            registry: Registry::default(),
            mode,
            cells: Vec::new(),
            guard: t,
            assumed: t,
            assumptions: Vec::new(),
            obligations: Vec::new(),
            domain: Vec::new(),
            chain: Vec::new(),
            transcript: String::new(),
            events: Vec::new(),
        }
    }

    fn concrete(&self) -> bool {
        matches!(self.mode, Mode::Replay { .. })
    }

    fn run(&mut self, scenario: &str) -> Result<(), Stop> {
        let f = self
            .tp
            .scenario(scenario)
            .map_err(|m| Stop::Error(EvalError::Scenario(m)))?;
        for c in &self.tree.cells {
            let v = match &c.kind {
                CellKind::State { init, .. } => self.eval(&mut Vec::new(), ROOT, init)?,
                CellKind::Array { key, value } => {
                    let z = value_to_sym(&mut self.pool, &Value::zero(value));
                    SymVal::Term(self.pool.const_array(leaf_sort(key), z.term()))
                }
            };
            self.cells.push(v);
        }
        let func = self.tp.func(f);
        let mut locals = vec![None; func.locals.len()];
        self.eval(&mut locals, ROOT, &func.body)?;
        Ok(())
    }

    fn choose(&mut self, site: SiteId, leaf: u32, ty: &Ty) -> Result<TermId, Stop> {
        let key = ChoiceKey {
            chain: self.chain.clone(),
            site,
            leaf,
        };
        let id = self.registry.register(key.clone(), ty.clone());
        match &self.mode {
            Mode::Symbolic => {
                let v = self.pool.var(id, leaf_sort(ty));
                if let Ty::Enum(e) = ty {
                    let n = e.variants.len() as u128;
                    let w = e.encoding_width();
                    if n < (1u128 << w) {
                        let bound = self.pool.bv(w, n);
                        let c = self.pool.ult(v, bound);
                        self.domain.push(c);
                    }
                }
                Ok(v)
            }
            Mode::Replay { model, .. } => {
                let value = model.values.get(&key).cloned().unwrap_or_else(|| Value::zero(ty));
                if !value.has_type(ty) {
                    return Err(Stop::Error(EvalError::BadChoice {
                        key: key.to_string(),
                        ty: ty.to_string(),
                        value: format_value(&value),
                    }));
                }
                Ok(value_to_sym(&mut self.pool, &value).term())
            }
        }
    }

    fn check_capacity(&self, array: TermId, span: crate::ast::Span) -> Result<(), Stop> {
        if let Mode::Replay { capacity, .. } = self.mode {
            let (entries, _) = self.pool.store_chain(array);
            if entries.len() > capacity {
                return Err(Stop::Error(EvalError::Capacity {
                    source: crate::value::CapacityError { capacity },
                    span,
                }));
            }
        }
        Ok(())
    }

    fn to_value(&self, sv: &SymVal, ty: &Ty) -> Result<Value, Stop> {
        sym_to_value(&self.pool, sv, ty).ok_or_else(|| {
            Stop::Error(EvalError::Scenario(
                "internal error: replay produced a non-constant value".to_string(),
            ))
        })
    }

    fn zero(&mut self, ty: &Ty) -> SymVal {
        value_to_sym(&mut self.pool, &Value::zero(ty))
    }

    /// Executes both arms under `c` and merges; a constant `c` runs one arm.
    fn branch<T, E>(&mut self, c: TermId, then: T, els: E) -> Result<SymVal, Stop>
    where
        T: FnOnce(&mut Self) -> Result<SymVal, Stop>,
        E: FnOnce(&mut Self) -> Result<SymVal, Stop>,
    {
        if let Some(b) = self.pool.as_bool(c) {
            return if b { then(self) } else { els(self) };
        }
        debug_assert!(!self.concrete());
        let saved_guard = self.guard;
        let saved_cells = self.cells.clone();
        self.guard = self.pool.and(&[saved_guard, c]);
        let t = then(self)?;
        let then_cells = std::mem::replace(&mut self.cells, saved_cells);
        let nc = self.pool.not(c);
        self.guard = self.pool.and(&[saved_guard, nc]);
        let f = els(self)?;
        self.guard = saved_guard;
        let mut merged = Vec::with_capacity(then_cells.len());
        for (a, b) in then_cells.iter().zip(&self.cells) {
            merged.push(if a == b { a.clone() } else { merge(&mut self.pool, c, a, b) });
        }
        self.cells = merged;
        Ok(merge(&mut self.pool, c, &t, &f))
    }

    fn eval(&mut self, locals: &mut Locals, node: NodeId, e: &TExpr) -> Result<SymVal, Stop> {
        Ok(match &e.kind {
            TExprKind::Unit => SymVal::Unit,
            TExprKind::Bool(b) => SymVal::Term(self.pool.bool(*b)),
            TExprKind::Bits(v) => {
                let Ty::Bits(w) = e.ty else { unreachable!() };
                SymVal::Term(self.pool.bv(w, *v))
            }
            TExprKind::Int(i) => SymVal::Term(self.pool.int(i.clone())),
            TExprKind::Variant(i) => {
                let Ty::Enum(d) = &e.ty else { unreachable!() };
                SymVal::Term(self.pool.bv(d.encoding_width(), *i as u128))
            }
            TExprKind::Local(id) => locals[id.0 as usize].clone().expect("bound before use"),
            TExprKind::Record(fields) => {
                let Ty::Record(fs) = &e.ty else { unreachable!() };
                let mut vs = Vec::with_capacity(fields.len());
                for f in fields {
                    vs.push(self.eval(locals, node, f)?);
                }
                SymVal::Record(fs.clone(), vs)
            }
            TExprKind::Field(base, i) => match self.eval(locals, node, base)? {
                SymVal::Record(_, mut vs) => vs.swap_remove(*i),
                _ => unreachable!(),
            },
            TExprKind::Vector(items) => {
                let mut vs = Vec::with_capacity(items.len());
                for it in items {
                    vs.push(self.eval(locals, node, it)?);
                }
                SymVal::Vector(vs)
            }
            TExprKind::Repeat(item, n) => {
                let v = self.eval(locals, node, item)?;
                SymVal::Vector(vec![v; *n as usize])
            }
            TExprKind::Index(base, index) => {
                let b = self.eval(locals, node, base)?;
                let i = self.eval(locals, node, index)?.term();
                match b {
                    SymVal::Vector(vs) => self.vector_read(vs, i, &e.ty),
                    SymVal::Term(a) => SymVal::Term(self.pool.select(a, i)),
                    _ => unreachable!(),
                }
            }
            TExprKind::Update { base, index, value } => {
                let b = self.eval(locals, node, base)?;
                let i = self.eval(locals, node, index)?.term();
                let v = self.eval(locals, node, value)?;
                match b {
                    SymVal::Vector(mut vs) => {
                        let w = self.index_width(i);
                        for j in 0..vs.len() {
                            if let Some(c) = self.index_is(i, w, j as u128) {
                                vs[j] = merge(&mut self.pool, c, &v, &vs[j]);
                            }
                        }
                        SymVal::Vector(vs)
                    }
                    SymVal::Term(a) => {
                        let t = self.pool.store(a, i, v.term());
                        self.check_capacity(t, e.span)?;
                        SymVal::Term(t)
                    }
                    _ => unreachable!(),
                }
            }
            TExprKind::SliceUpdate { base, start, value } => {
                let b = self.eval(locals, node, base)?;
                let s = self.eval(locals, node, start)?.term();
                let v = self.eval(locals, node, value)?;
                let (SymVal::Vector(mut vs), SymVal::Vector(src)) = (b, v) else { unreachable!() };
                let w = self.index_width(s);
                for j in 0..vs.len() {
                    for (k, x) in src.iter().enumerate().take(j + 1) {
                        if let Some(c) = self.index_is(s, w, (j - k) as u128) {
                            vs[j] = merge(&mut self.pool, c, x, &vs[j]);
                        }
                    }
                }
                SymVal::Vector(vs)
            }
            TExprKind::Slice { value, hi, lo } => {
                let x = self.eval(locals, node, value)?.term();
                SymVal::Term(self.pool.extract(*hi, *lo, x))
            }
            TExprKind::Unary(op, x) => {
                let v = self.eval(locals, node, x)?.term();
                SymVal::Term(match (op, &x.ty) {
                    (UnOp::Not, Ty::Bool) => self.pool.not(v),
                    (UnOp::Not, _) => self.pool.bvnot(v),
                    (UnOp::Neg, Ty::Int) => self.pool.intneg(v),
                    (UnOp::Neg, _) => self.pool.bvneg(v),
                })
            }
            TExprKind::Binary(op, a, b) => self.binary(locals, node, *op, a, b)?,
            TExprKind::Convert(conv, x) => {
                let v = self.eval(locals, node, x)?.term();
                SymVal::Term(match conv {
                    Conversion::ZeroExtend(m) => self.pool.zext_to(*m, v),
                    Conversion::Truncate(m) => self.pool.extract(m - 1, 0, v),
                    Conversion::ToInt => self.pool.bv2int(v),
                    Conversion::FromInt(m) => self.pool.int2bv(*m, v),
                })
            }
            TExprKind::Call { site, route, func, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(locals, node, a)?);
                }
                let Slot::Node(target) = self.tree.walk(node, route) else { unreachable!() };
                let f = self.tp.func(*func);
                let names = if self.concrete() {
                    let fname = format!("{}.{}", self.tp.module(f.module).name, f.name);
                    let inst = self.tree.node(target).path.clone();
                    let mut shown = Vec::new();
                    for (v, (_, t)) in vals.iter().zip(&f.params) {
                        shown.push(format_value(&self.to_value(v, t)?));
                    }
                    self.events.push(TraceEvent::Call {
                        func: fname.clone(),
                        instance: inst.clone(),
                        args: shown,
                    });
                    Some((fname, inst))
                } else {
                    None
                };
                let mut frame: Locals = vec![None; f.locals.len()];
                for (slot, v) in frame.iter_mut().zip(vals) {
                    *slot = Some(v);
                }
                self.chain.push(*site);
                let r = self.eval(&mut frame, target, &f.body);
                self.chain.pop();
                let r = r?;
                if let Some((func, instance)) = names {
                    let value = format_value(&self.to_value(&r, &f.ret)?);
                    self.events.push(TraceEvent::Return { func, instance, value });
                }
                r
            }
            TExprKind::Prim { route, op, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(locals, node, a)?);
                }
                let Slot::Cell(c) = self.tree.walk(node, route) else { unreachable!() };
                let c = c.0 as usize;
                match op {
                    PrimOp::Get => self.cells[c].clone(),
                    PrimOp::Set => {
                        // unconditional: the enclosing branch merge applies the guard
                        self.cells[c] = vals.pop().expect("value");
                        SymVal::Unit
                    }
                    PrimOp::Read => {
                        let a = self.cells[c].term();
                        SymVal::Term(self.pool.select(a, vals[0].term()))
                    }
                    PrimOp::Write => {
                        let v = vals.pop().expect("value").term();
                        let k = vals.pop().expect("key").term();
                        let a = self.cells[c].term();
                        let t = self.pool.store(a, k, v);
                        self.check_capacity(t, e.span)?;
                        self.cells[c] = SymVal::Term(t);
                        SymVal::Unit
                    }
                }
            }
            TExprKind::Havoc { site, route } => {
                let range = match self.tree.walk(node, route) {
                    Slot::Node(n) => self.tree.node(n).cells,
                    Slot::Cell(c) => (c.0, c.0 + 1),
                };
                let mut leaf = 0u32;
                for c in range.0..range.1 {
                    let ty = self.tree.cells[c as usize].ty();
                    let mut terms = Vec::new();
                    for lt in ty.leaves() {
                        terms.push(self.choose(*site, leaf, &lt)?);
                        leaf += 1;
                    }
                    let fresh = self.rebuild(&ty, &mut terms.into_iter());
                    self.cells[c as usize] = fresh;
                }
                SymVal::Unit
            }
            TExprKind::Any(site) => {
                let mut terms = Vec::new();
                for (i, lt) in e.ty.leaves().iter().enumerate() {
                    terms.push(self.choose(*site, i as u32, lt)?);
                }
                self.rebuild(&e.ty, &mut terms.into_iter())
            }
            TExprKind::Block(stmts, tail) => {
                for s in stmts {
                    match s {
                        TStmt::Let(id, v) => {
                            let v = self.eval(locals, node, v)?;
                            locals[id.0 as usize] = Some(v);
                        }
                        TStmt::Expr(x) => {
                            self.eval(locals, node, x)?;
                        }
                    }
                }
                self.eval(locals, node, tail)?
            }
            TExprKind::If(c, t, f) => {
                let c = self.eval(locals, node, c)?.term();
                // Arms see the same locals; lets inside them are scoped to the arm.
                let mut lt = locals.clone();
                let mut lf = locals.clone();
                self.branch(c, |s| s.eval(&mut lt, node, t), |s| s.eval(&mut lf, node, f))?
            }
            TExprKind::Assume(site, c) => {
                let b = self.eval(locals, node, c)?.term();
                if self.concrete() {
                    if self.pool.as_bool(b) != Some(true) {
                        return Err(Stop::Assume(*site));
                    }
                } else {
                    let imp = self.pool.implies(self.guard, b);
                    self.assumed = self.pool.and(&[self.assumed, imp]);
                    self.assumptions.push((self.guard, b));
                }
                SymVal::Unit
            }
            TExprKind::Assert(site, c) => {
                let b = self.eval(locals, node, c)?.term();
                if self.concrete() {
                    if self.pool.as_bool(b) != Some(true) {
                        return Err(Stop::Assert(*site));
                    }
                } else {
                    self.obligations.push(Obligation {
                        prefix: self.assumed,
                        guard: self.guard,
                        body: b,
                        site: *site,
                    });
                }
                SymVal::Unit
            }
            TExprKind::Printf(parts) => {
                let mut text = String::new();
                for p in parts {
                    match p {
                        FmtPart::Text(t) => text.push_str(t),
                        FmtPart::Hole(h) => {
                            let v = self.eval(locals, node, h)?;
                            if self.concrete() {
                                text.push_str(&format_value(&self.to_value(&v, &h.ty)?));
                            }
                        }
                    }
                }
                if self.concrete() {
                    self.transcript.push_str(&text);
                    self.events.push(TraceEvent::Printf { text });
                }
                SymVal::Unit
            }
        })
    }

    fn rebuild(&mut self, ty: &Ty, terms: &mut impl Iterator<Item = TermId>) -> SymVal {
        match ty {
            Ty::Unit => SymVal::Unit,
            Ty::Record(fs) => SymVal::Record(fs.clone(), fs.iter().map(|(_, t)| self.rebuild(t, terms)).collect()),
            Ty::Vector(e, n) => SymVal::Vector((0..*n).map(|_| self.rebuild(e, terms)).collect()),
            _ => SymVal::Term(terms.next().expect("enough leaves")),
        }
    }

    fn index_width(&self, i: TermId) -> u32 {
        match self.pool.sort(i) {
            Sort::Bv(w) => *w,
            s => panic!("vector index of sort {}", s),
        }
    }

    /// Condition `i == j`, or `None` if `j` is not representable.
    fn index_is(&mut self, i: TermId, w: u32, j: u128) -> Option<TermId> {
        if w < 128 && j >> w != 0 {
            return None;
        }
        let jt = self.pool.bv(w, j);
        Some(self.pool.eq(i, jt))
    }

    fn vector_read(&mut self, vs: Vec<SymVal>, i: TermId, elem: &Ty) -> SymVal {
        let w = self.index_width(i);
        if let Some(k) = self.pool.as_bv(i) {
            return if k < vs.len() as u128 {
                vs[k as usize].clone()
            } else {
                self.zero(elem)
            };
        }
        let mut acc = self.zero(elem);
        for (j, v) in vs.iter().enumerate().rev() {
            if let Some(c) = self.index_is(i, w, j as u128) {
                acc = merge(&mut self.pool, c, v, &acc);
            }
        }
        acc
    }

    fn equal(&mut self, a: &SymVal, b: &SymVal) -> TermId {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        a.leaves(&mut xs);
        b.leaves(&mut ys);
        let eqs: Vec<TermId> = xs.iter().zip(&ys).map(|(x, y)| self.pool.eq(*x, *y)).collect();
        self.pool.and(&eqs)
    }

    fn binary(&mut self, locals: &mut Locals, node: NodeId, op: BinOp, a: &TExpr, b: &TExpr) -> Result<SymVal, Stop> {
        if matches!(op, BinOp::And | BinOp::Or) {
            let l = self.eval(locals, node, a)?.term();
            let mut lr = locals.clone();
            let r = if op == BinOp::And {
                self.branch(l, |s| s.eval(&mut lr, node, b), |s| Ok(SymVal::Term(s.pool.ff())))?
            } else {
                self.branch(l, |s| Ok(SymVal::Term(s.pool.tt())), |s| s.eval(&mut lr, node, b))?
            };
            return Ok(r);
        }
        let l = self.eval(locals, node, a)?;
        let r = self.eval(locals, node, b)?;
        let p = &mut self.pool;
        let t = match op {
            BinOp::Eq => return Ok(SymVal::Term(self.equal(&l, &r))),
            BinOp::Ne => {
                let e = self.equal(&l, &r);
                return Ok(SymVal::Term(self.pool.not(e)));
            }
            _ => {
                let (x, y) = (l.term(), r.term());
                if a.ty == Ty::Int {
                    match op {
                        BinOp::Add => p.intop(IntOp::Add, x, y),
                        BinOp::Sub => p.intop(IntOp::Sub, x, y),
                        BinOp::Mul => p.intop(IntOp::Mul, x, y),
                        BinOp::Lt => p.intlt(x, y),
                        BinOp::Le => p.intle(x, y),
                        BinOp::Gt => p.intlt(y, x),
                        BinOp::Ge => p.intle(y, x),
                        _ => unreachable!(),
                    }
                } else {
                    match op {
                        BinOp::Add => p.bvop(BvOp::Add, x, y),
                        BinOp::Sub => p.bvop(BvOp::Sub, x, y),
                        BinOp::Mul => p.bvop(BvOp::Mul, x, y),
                        BinOp::BitAnd => p.bvop(BvOp::And, x, y),
                        BinOp::BitOr => p.bvop(BvOp::Or, x, y),
                        BinOp::BitXor => p.bvop(BvOp::Xor, x, y),
                        BinOp::Shl => p.bvop(BvOp::Shl, x, y),
                        BinOp::Shr => p.bvop(BvOp::Lshr, x, y),
                        BinOp::Lt => p.ult(x, y),
                        BinOp::Le => p.ule(x, y),
                        BinOp::Gt => p.ult(y, x),
                        BinOp::Ge => p.ule(y, x),
                        _ => unreachable!(),
                    }
                }
            }
        };
        Ok(SymVal::Term(t))
    }
}

impl Vc {
    /// Evaluates `t` with every choice variable fixed by `model` (zero if absent).
    pub fn evaluate(&mut self, t: TermId, model: &HashMap<u32, Value>) -> TermId {
        let mut subst = HashMap::new();
        for (id, (_, ty)) in self.registry.entries.iter().enumerate() {
            let id = id as u32;
            let v = model.get(&id).cloned().unwrap_or_else(|| Value::zero(ty));
            let term = value_to_sym(&mut self.pool, &v).term();
            subst.insert(id, term);
        }
        self.pool.instantiate(t, &subst)
    }

    /// The obligations the model violates (with its prefix satisfied).
    pub fn violated(&mut self, model: &HashMap<u32, Value>) -> Vec<SiteId> {
        let mut out = Vec::new();
        for i in 0..self.obligations.len() {
            let ob = self.obligations[i].clone();
            let nb = self.pool.not(ob.body);
            let t = self.pool.and(&[ob.prefix, ob.guard, nb]);
            let r = self.evaluate(t, model);
            if self.pool.as_bool(r) == Some(true) {
                out.push(ob.site);
            }
        }
        out
    }
}

/// Maps solver ids to choice keys using the registry of a symbolic run.
pub fn oracle_from_ids(registry: &Registry, values: &HashMap<u32, Value>) -> ModelOracle {
    let mut m = ModelOracle::default();
    for (id, v) in values {
        if let Some((key, _)) = registry.entries.get(*id as usize) {
            m.values.insert(key.clone(), v.clone());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elaborate::elaborate;
    use crate::parser::parse;
    use crate::term::Node;
    use crate::typecheck::check_program;
    use crate::value::DEFAULT_CAPACITY;

    fn setup(src: &str) -> (TypedProgram, InstanceTree) {
        let tp = check_program(&parse(src).unwrap()).unwrap();
        let tree = elaborate(&tp).unwrap();
        (tp, tree)
    }

    #[test]
    fn trivially_true_assert_folds_to_false_query() {
        let (tp, tree) = setup("module Main { mut fn s() { assert(any<Bool> || true) } }");
        let vc = sym_exec(&tp, &tree, "s").unwrap();
        assert_eq!(vc.pool.as_bool(vc.query), Some(false));
        assert_eq!(vc.registry.len(), 1);
    }

    #[test]
    fn no_obligations_means_false() {
        let (tp, tree) = setup("module Main { mut fn s() { () } }");
        let vc = sym_exec(&tp, &tree, "s").unwrap();
        assert_eq!(vc.pool.as_bool(vc.query), Some(false));
    }

    #[test]
    fn merge_behaviour() {
        let src = "module Main {
            instance a: State<BitInt(8)>(0);
            instance b: State<BitInt(8)>(0);
            mut fn s() {
              let c = any<Bool>;
              if c { b.set(1) } else { b.set(2) };
              if c { assert(a.get() == 0u8) } else { () }
            } }";
        let (tp, tree) = setup(src);
        let mut ex = Exec::new(&tp, &tree, Mode::Symbolic);
        ex.run("s").ok().unwrap();
        // untouched cell stays a constant
        assert_eq!(ex.pool.as_bv(ex.cells[0].term()), Some(0));
        assert!(matches!(ex.pool.node(ex.cells[1].term()), Node::Ite(..)));
        let ob = &ex.obligations[0];
        assert!(matches!(ex.pool.node(ob.guard), Node::Var(0)));
    }

    #[test]
    fn replay_matches_model() {
        let src = r#"module Main {
            instance x: State<BitInt(8)>(0);
            mut fn s() {
              let v = any<BitInt(8)>;
              if v > 100u8 { x.set(v); printf("big {v}\n") } else { printf("small\n") };
              assert(x.get() != 200u8)
            } }"#;
        let (tp, tree) = setup(src);
        let vc = sym_exec(&tp, &tree, "s").unwrap();
        let mut ids = HashMap::new();
        ids.insert(0u32, Value::bits(8, 200));
        let oracle = oracle_from_ids(&vc.registry, &ids);
        let r = replay(&tp, &tree, "s", &oracle, DEFAULT_CAPACITY).unwrap();
        assert_eq!(r.transcript, "big 200\n");
        assert!(matches!(r.verdict, Verdict::AssertionFailed { .. }));
        let mut vc = vc;
        let q = vc.query;
        let r = vc.evaluate(q, &ids);
        assert_eq!(vc.pool.as_bool(r), Some(true));
        assert_eq!(vc.violated(&ids).len(), 1);
        let r = vc.evaluate(q, &HashMap::new());
        assert_eq!(vc.pool.as_bool(r), Some(false));
        let r = replay(&tp, &tree, "s", &ModelOracle::default(), DEFAULT_CAPACITY).unwrap();
        assert_eq!(r.transcript, "small\n");
        assert_eq!(r.verdict, Verdict::Passed);
    }

    #[test]
    fn enum_choices_get_domain_constraints() {
        let src = "enum E { A, B, C } module Main { mut fn s() { let e = any<E>; assert(e != E::C) } }";
        let (tp, tree) = setup(src);
        let vc = sym_exec(&tp, &tree, "s").unwrap();
        assert_eq!(vc.domain.len(), 1);
    }

    #[test]
    fn havoc_on_array_is_one_variable() {
        let src = "module D { instance storage: Array<BitInt(31), BitInt(64)>; }
            module Main { instance d: D; mut fn s() { d.havoc(); assert(d.storage.read(0) == 0) } }";
        let (tp, tree) = setup(src);
        let vc = sym_exec(&tp, &tree, "s").unwrap();
        assert_eq!(vc.registry.len(), 1);
        assert_eq!(
            vc.pool.var_sorts[0],
            Sort::Array(Rc::new(Sort::Bv(31)), Rc::new(Sort::Bv(64)))
        );
    }
}
