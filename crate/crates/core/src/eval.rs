//! Concrete interpreter. It shares no code with the symbolic executor so it
//! can serve as an independent oracle for it.

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::ast::{BinOp, Span, UnOp};
use crate::choice::{ChoiceKey, ChoiceSource};
use crate::elaborate::{CellKind, InstanceTree, NodeId, Slot, ROOT};
use crate::tir::*;
use crate::types::Ty;
use crate::value::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Passed,
    AssertionFailed { site: SiteId, span: Span },
    AssumeInfeasible { site: SiteId, span: Span },
}

impl Verdict {
    /// CLI exit code for a concrete run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Passed => 0,
            Verdict::AssertionFailed { .. } => 2,
            Verdict::AssumeInfeasible { .. } => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum TraceEvent {
    Call {
        #[serde(rename = "fn")]
        func: String,
        instance: String,
        args: Vec<String>,
    },
    Return {
        #[serde(rename = "fn")]
        func: String,
        instance: String,
        value: String,
    },
    Printf {
        text: String,
    },
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub verdict: Verdict,
    /// Concatenated `printf` output.
    pub transcript: String,
    pub events: Vec<TraceEvent>,
    /// Final cell values, indexed by `CellId`.
    pub store: Vec<Value>,
}

impl RunResult {
    pub fn transcript_lines(&self) -> Vec<&str> {
        self.transcript.lines().collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("{span}: {source}")]
    Capacity { source: CapacityError, span: Span },
    #[error("{0}")]
    Scenario(String),
    #[error("choice {key} of type `{ty}` received a value of the wrong type: {value}")]
    BadChoice { key: String, ty: String, value: String },
}

pub(crate) enum Stop {
    Assert(SiteId),
    Assume(SiteId),
    Error(EvalError),
}

/// Evaluates every cell's initial value.
pub fn init_store(tp: &TypedProgram, tree: &InstanceTree) -> Vec<Value> {
    tree.cells
        .iter()
        .map(|c| match &c.kind {
            CellKind::State { init, .. } => {
                let mut src = crate::choice::ModelOracle::default();
                let mut it = Interp::new(tp, tree, &mut src, usize::MAX, Vec::new());
                match it.eval(&mut Vec::new(), ROOT, init) {
                    Ok(v) => v,
                    Err(_) => unreachable!("initial values are closed and pure"),
                }
            }
            CellKind::Array { key, value } => {
                Value::Array(SparseArray::new(key.clone(), value.clone(), Value::zero(value)))
            }
        })
        .collect()
}

/// Runs `scenario` to completion or to the first failing assume/assert.
pub fn run_scenario(
    tp: &TypedProgram,
    tree: &InstanceTree,
    scenario: &str,
    anys: &mut dyn ChoiceSource,
    capacity: usize,
) -> Result<RunResult, EvalError> {
    let f = tp.scenario(scenario).map_err(EvalError::Scenario)?;
    let store = init_store(tp, tree);
    let mut it = Interp::new(tp, tree, anys, capacity, store);
    let body = &tp.func(f).body;
    let mut locals = vec![None; tp.func(f).locals.len()];
    let verdict = match it.eval(&mut locals, ROOT, body) {
        Ok(_) => Verdict::Passed,
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
    Ok(RunResult {
        verdict,
        transcript: it.transcript,
        events: it.events,
        store: it.store,
    })
}

type Locals = Vec<Option<Value>>;

struct Interp<'a> {
    tp: &'a TypedProgram,
    tree: &'a InstanceTree,
    src: &'a mut dyn ChoiceSource,
    capacity: usize,
    store: Vec<Value>,
    chain: Vec<SiteId>,
    transcript: String,
    events: Vec<TraceEvent>,
}

impl<'a> Interp<'a> {
    fn new(
        tp: &'a TypedProgram,
        tree: &'a InstanceTree,
        src: &'a mut dyn ChoiceSource,
        capacity: usize,
        store: Vec<Value>,
    ) -> Interp<'a> {
        Interp {
            tp,
            tree,
            src,
            capacity,
            store,
            chain: Vec::new(),
            transcript: String::new(),
            events: Vec::new(),
        }
    }

    fn choose(&mut self, site: SiteId, leaf: u32, ty: &Ty) -> Result<Value, Stop> {
        let key = ChoiceKey {
            chain: self.chain.clone(),
            site,
            leaf,
        };
        let v = self.src.choose(&key, ty);
        if !v.has_type(ty) {
            return Err(Stop::Error(EvalError::BadChoice {
                key: key.to_string(),
                ty: ty.to_string(),
                value: format_value(&v),
            }));
        }
        Ok(v)
    }

    fn write(&self, a: &SparseArray, k: Value, v: Value, span: Span) -> Result<SparseArray, Stop> {
        sparse_write(a, k, v, self.capacity).map_err(|source| Stop::Error(EvalError::Capacity { source, span }))
    }

    fn eval(&mut self, locals: &mut Locals, node: NodeId, e: &TExpr) -> Result<Value, Stop> {
        let v = self.eval_inner(locals, node, e)?;
        debug_assert!(v.has_type(&e.ty), "{:?} is not a `{}`", v, e.ty);
        Ok(v)
    }

    fn eval_inner(&mut self, locals: &mut Locals, node: NodeId, e: &TExpr) -> Result<Value, Stop> {
        Ok(match &e.kind {
            TExprKind::Unit => Value::Unit,
            TExprKind::Bool(b) => Value::Bool(*b),
            TExprKind::Bits(v) => {
                let Ty::Bits(w) = e.ty else { unreachable!() };
                Value::bits(w, *v)
            }
            TExprKind::Int(i) => Value::Int(i.clone()),
            TExprKind::Variant(i) => {
                let Ty::Enum(d) = &e.ty else { unreachable!() };
                Value::Enum(d.clone(), *i)
            }
            TExprKind::Local(id) => locals[id.0 as usize].clone().expect("bound before use"),
            TExprKind::Record(fields) => {
                let Ty::Record(fs) = &e.ty else { unreachable!() };
                let mut vs = Vec::with_capacity(fields.len());
                for f in fields {
                    vs.push(self.eval(locals, node, f)?);
                }
                Value::Record(fs.clone(), vs)
            }
            TExprKind::Field(base, i) => match self.eval(locals, node, base)? {
                Value::Record(_, mut vs) => vs.swap_remove(*i),
                _ => unreachable!(),
            },
            TExprKind::Vector(items) => {
                let mut vs = Vec::with_capacity(items.len());
                for it in items {
                    vs.push(self.eval(locals, node, it)?);
                }
                Value::Vector(vs)
            }
            TExprKind::Repeat(item, n) => {
                let v = self.eval(locals, node, item)?;
                Value::Vector(vec![v; *n as usize])
            }
            TExprKind::Index(base, index) => {
                let b = self.eval(locals, node, base)?;
                let i = self.eval(locals, node, index)?;
                match b {
                    Value::Vector(mut vs) => {
                        let i = i.as_bits();
                        if i < vs.len() as u128 {
                            vs.swap_remove(i as usize)
                        } else {
                            Value::zero(&e.ty)
                        }
                    }
                    Value::Array(a) => sparse_read(&a, &i),
                    _ => unreachable!(),
                }
            }
            TExprKind::Update { base, index, value } => {
                let b = self.eval(locals, node, base)?;
                let i = self.eval(locals, node, index)?;
                let v = self.eval(locals, node, value)?;
                match b {
                    Value::Vector(mut vs) => {
                        let i = i.as_bits();
                        if i < vs.len() as u128 {
                            vs[i as usize] = v;
                        }
                        Value::Vector(vs)
                    }
                    Value::Array(a) => Value::Array(self.write(&a, i, v, e.span)?),
                    _ => unreachable!(),
                }
            }
            TExprKind::SliceUpdate { base, start, value } => {
                let b = self.eval(locals, node, base)?;
                let s = self.eval(locals, node, start)?.as_bits();
                let v = self.eval(locals, node, value)?;
                let (Value::Vector(mut vs), Value::Vector(src)) = (b, v) else { unreachable!() };
                for (j, x) in src.into_iter().enumerate() {
                    let pos = s.saturating_add(j as u128);
                    if pos < vs.len() as u128 {
                        vs[pos as usize] = x;
                    }
                }
                Value::Vector(vs)
            }
            TExprKind::Slice { value, hi, lo } => {
                let x = self.eval(locals, node, value)?.as_bits();
                Value::bits(hi - lo + 1, slice_bits(x, *hi, *lo))
            }
            TExprKind::Unary(op, x) => {
                let v = self.eval(locals, node, x)?;
                match (op, v) {
                    (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnOp::Not, Value::Bits { width, value }) => Value::bits(width, !value),
                    (UnOp::Neg, Value::Bits { width, value }) => Value::bits(width, value.wrapping_neg()),
                    (UnOp::Neg, Value::Int(i)) => Value::Int(-i),
                    _ => unreachable!(),
                }
            }
            TExprKind::Binary(op, a, b) => self.binary(locals, node, *op, a, b)?,
            TExprKind::Convert(conv, x) => {
                let v = self.eval(locals, node, x)?;
                match (conv, v) {
                    (Conversion::ZeroExtend(m), Value::Bits { value, .. }) => Value::bits(*m, value),
                    (Conversion::Truncate(m), Value::Bits { value, .. }) => Value::bits(*m, value),
                    (Conversion::ToInt, Value::Bits { value, .. }) => Value::Int(BigInt::from(value)),
                    (Conversion::FromInt(m), Value::Int(i)) => Value::bits(*m, int_to_bits(&i, *m)),
                    _ => unreachable!(),
                }
            }
            TExprKind::Call { site, route, func, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(locals, node, a)?);
                }
                let Slot::Node(target) = self.tree.walk(node, route) else { unreachable!() };
                let f = self.tp.func(*func);
                let fname = format!("{}.{}", self.tp.module(f.module).name, f.name);
                let inst = self.tree.node(target).path.clone();
                self.events.push(TraceEvent::Call {
                    func: fname.clone(),
                    instance: inst.clone(),
                    args: vals.iter().map(format_value).collect(),
                });
                let mut frame: Locals = vec![None; f.locals.len()];
                for (slot, v) in frame.iter_mut().zip(vals) {
                    *slot = Some(v);
                }
                self.chain.push(*site);
                let r = self.eval(&mut frame, target, &f.body);
                self.chain.pop();
                let r = r?;
                self.events.push(TraceEvent::Return {
                    func: fname,
                    instance: inst,
                    value: format_value(&r),
                });
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
                    PrimOp::Get => self.store[c].clone(),
                    PrimOp::Set => {
                        self.store[c] = vals.pop().expect("one argument");
                        Value::Unit
                    }
                    PrimOp::Read => {
                        let Value::Array(a) = &self.store[c] else { unreachable!() };
                        sparse_read(a, &vals[0])
                    }
                    PrimOp::Write => {
                        let v = vals.pop().expect("value");
                        let k = vals.pop().expect("key");
                        let Value::Array(a) = &self.store[c] else { unreachable!() };
                        let a = self.write(a, k, v, e.span)?;
                        self.store[c] = Value::Array(a);
                        Value::Unit
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
                    let mut vals = Vec::new();
                    for lt in ty.leaves() {
                        vals.push(self.choose(*site, leaf, &lt)?);
                        leaf += 1;
                    }
                    self.store[c as usize] = Value::from_leaves(&ty, &mut vals.into_iter());
                }
                Value::Unit
            }
            TExprKind::Any(site) => {
                let mut vals = Vec::new();
                for (i, lt) in e.ty.leaves().iter().enumerate() {
                    vals.push(self.choose(*site, i as u32, lt)?);
                }
                Value::from_leaves(&e.ty, &mut vals.into_iter())
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
                if self.eval(locals, node, c)?.as_bool() {
                    self.eval(locals, node, t)?
                } else {
                    self.eval(locals, node, f)?
                }
            }
            TExprKind::Assume(site, c) => {
                if !self.eval(locals, node, c)?.as_bool() {
                    return Err(Stop::Assume(*site));
                }
                Value::Unit
            }
            TExprKind::Assert(site, c) => {
                if !self.eval(locals, node, c)?.as_bool() {
                    return Err(Stop::Assert(*site));
                }
                Value::Unit
            }
            TExprKind::Printf(parts) => {
                let mut text = String::new();
                for p in parts {
                    match p {
                        FmtPart::Text(t) => text.push_str(t),
                        FmtPart::Hole(h) => {
                            let v = self.eval(locals, node, h)?;
                            text.push_str(&format_value(&v));
                        }
                    }
                }
                self.transcript.push_str(&text);
                self.events.push(TraceEvent::Printf { text });
                Value::Unit
            }
        })
    }

    fn binary(&mut self, locals: &mut Locals, node: NodeId, op: BinOp, a: &TExpr, b: &TExpr) -> Result<Value, Stop> {
        // `&&` and `||` short-circuit, including any effects on the right.
        match op {
            BinOp::And => {
                return Ok(Value::Bool(
                    self.eval(locals, node, a)?.as_bool() && self.eval(locals, node, b)?.as_bool(),
                ))
            }
            BinOp::Or => {
                return Ok(Value::Bool(
                    self.eval(locals, node, a)?.as_bool() || self.eval(locals, node, b)?.as_bool(),
                ))
            }
            _ => {}
        }
        let l = self.eval(locals, node, a)?;
        let r = self.eval(locals, node, b)?;
        Ok(apply_binary(op, &l, &r))
    }
}

/// Semantics of a non-short-circuit binary operator on concrete values.
pub fn apply_binary(op: BinOp, l: &Value, r: &Value) -> Value {
    match op {
        BinOp::Eq => return Value::Bool(l == r),
        BinOp::Ne => return Value::Bool(l != r),
        _ => {}
    }
    match (l, r) {
        (Value::Bits { width, value: x }, Value::Bits { value: y, .. }) => {
            let (w, x, y) = (*width, *x, *y);
            match op {
                BinOp::Add => Value::bits(w, x.wrapping_add(y)),
                BinOp::Sub => Value::bits(w, x.wrapping_sub(y)),
                BinOp::Mul => Value::bits(w, x.wrapping_mul(y)),
                BinOp::BitAnd => Value::bits(w, x & y),
                BinOp::BitOr => Value::bits(w, x | y),
                BinOp::BitXor => Value::bits(w, x ^ y),
                BinOp::Shl => Value::bits(w, shl(x, y, w)),
                BinOp::Shr => Value::bits(w, lshr(x, y, w)),
                BinOp::Lt => Value::Bool(x < y),
                BinOp::Le => Value::Bool(x <= y),
                BinOp::Gt => Value::Bool(x > y),
                BinOp::Ge => Value::Bool(x >= y),
                _ => unreachable!(),
            }
        }
        (Value::Int(x), Value::Int(y)) => match op {
            BinOp::Add => Value::Int(x + y),
            BinOp::Sub => Value::Int(x - y),
            BinOp::Mul => Value::Int(x * y),
            BinOp::Lt => Value::Bool(x < y),
            BinOp::Le => Value::Bool(x <= y),
            BinOp::Gt => Value::Bool(x > y),
            BinOp::Ge => Value::Bool(x >= y),
            _ => unreachable!(),
        },
        _ => unreachable!("ill-typed binary operands"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{ModelOracle, SeededRandom};
    use crate::elaborate::elaborate;
    use crate::parser::parse;
    use crate::typecheck::check_program;

    fn run(src: &str, scenario: &str, anys: &mut dyn ChoiceSource) -> RunResult {
        let tp = check_program(&parse(src).unwrap()).unwrap();
        let tree = elaborate(&tp).unwrap();
        run_scenario(&tp, &tree, scenario, anys, DEFAULT_CAPACITY).unwrap()
    }

    #[test]
    fn assert_true_passes_silently() {
        let r = run("module Main { mut fn s() { assert(true) } }", "s", &mut ModelOracle::default());
        assert_eq!(r.verdict, Verdict::Passed);
        assert!(r.transcript.is_empty());
    }

    #[test]
    fn assume_can_be_infeasible() {
        let src = "module Main { mut fn s() { assume(any<Bool>) } }";
        let mut infeasible = 0;
        for seed in 0..16 {
            if let Verdict::AssumeInfeasible { .. } = run(src, "s", &mut SeededRandom::new(seed)).verdict {
                infeasible += 1;
            }
        }
        assert!(infeasible > 0 && infeasible < 16);
    }

    #[test]
    fn init_values() {
        let src = "module Main {
            instance flag: State<Bool>(true);
            instance mem: Array<BitInt(31), BitInt(64)>;
            instance reg: State<BitInt(64)>(0);
            mut fn s() { () } }";
        let tp = check_program(&parse(src).unwrap()).unwrap();
        let tree = elaborate(&tp).unwrap();
        let store = init_store(&tp, &tree);
        assert_eq!(store[0], Value::Bool(true));
        match &store[1] {
            Value::Array(a) => {
                assert_eq!(*a.default, Value::bits(64, 0));
                assert!(a.is_empty());
            }
            v => panic!("{:?}", v),
        }
        assert_eq!(store[2], Value::bits(64, 0));
    }

    #[test]
    fn snapshot_isolation_and_transcript() {
        let src = r#"module Main {
            instance mem: Array<BitInt(4), BitInt(8)>;
            mut fn s() {
              mem.write(1, 5);
              let before = mem.get();
              mem.write(1, 9);
              let after = mem.get();
              printf("{before[1]} {after[1]} {before[2]}\n");
              assert(before[1] == after[1])
            } }"#;
        let r = run(src, "s", &mut ModelOracle::default());
        assert_eq!(r.transcript, "5 9 0\n");
        assert!(matches!(r.verdict, Verdict::AssertionFailed { .. }));
    }

    #[test]
    fn vector_edges() {
        let src = r#"module Main { mut fn s() {
            let v: [BitInt(8); 4] = [1, 2, 3, 4];
            let i: BitInt(3) = 6;
            let w = v with [i] = 9;
            let x = v with [2 ..] = [7u8, 8u8, 9u8];
            printf("{v[i]} {w} {x}\n")
        } }"#;
        let r = run(src, "s", &mut ModelOracle::default());
        assert_eq!(r.transcript, "0 [1, 2, 3, 4] [1, 2, 7, 8]\n");
    }

    #[test]
    fn capacity_is_a_resource_error() {
        let src = "module Main { instance m: Array<BitInt(8), Bool>;
            mut fn s() { m.write(1, true); m.write(2, true); m.write(3, true) } }";
        let tp = check_program(&parse(src).unwrap()).unwrap();
        let tree = elaborate(&tp).unwrap();
        let e = run_scenario(&tp, &tree, "s", &mut ModelOracle::default(), 2).unwrap_err();
        assert!(matches!(e, EvalError::Capacity { .. }));
    }

    #[test]
    fn call_events_and_short_circuit() {
        let src = r#"module Counter {
              instance n: State<BitInt(8)>(0);
              mut fn bump() -> Bool { n.set(n.get() + 1); true }
            }
            module Main {
              instance c: Counter;
              mut fn s() {
                let a = false && c.bump();
                let b = true || c.bump();
                let d = true && c.bump();
                printf("{a} {b} {d}\n")
              }
            }"#;
        let r = run(src, "s", &mut ModelOracle::default());
        assert_eq!(r.transcript, "false true true\n");
        let calls = r.events.iter().filter(|e| matches!(e, TraceEvent::Call { .. })).count();
        assert_eq!(calls, 1);
        assert_eq!(r.store[0], Value::bits(8, 1));
        let json = serde_json::to_string(&r.events[0]).unwrap();
        assert!(json.starts_with(r#"{"event":"call","fn":"Counter.bump","instance":"c""#), "{}", json);
    }
}
