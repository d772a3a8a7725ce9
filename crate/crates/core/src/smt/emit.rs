//! SMT-LIB v2 serialization of a verification condition.

use std::collections::HashMap;
use std::fmt::Write;

use crate::symexec::Vc;
use crate::term::{BvOp, IntOp, Node, Sort, TermId, TermPool};
use crate::value::Value;

/// Terms nested deeper than this are hoisted into a `define-fun`.
const MAX_INLINE_HEIGHT: u32 = 32;

pub fn var_name(id: u32) -> String {
    format!("c{}", id)
}

pub fn bv_literal(width: u32, value: u128) -> String {
    if width % 4 == 0 {
        format!("#x{:0w$x}", value, w = (width / 4) as usize)
    } else {
        format!("#b{:0w$b}", value, w = width as usize)
    }
}

fn int_literal(i: &num_bigint::BigInt) -> String {
    if i.sign() == num_bigint::Sign::Minus {
        format!("(- {})", -i)
    } else {
        i.to_string()
    }
}

/// A concrete value as an SMT-LIB term of sort `sort`.
pub fn value_literal(v: &Value, sort: &Sort) -> String {
    match (v, sort) {
        (Value::Bool(b), _) => b.to_string(),
        (Value::Bits { width, value }, _) => bv_literal(*width, *value),
        (Value::Int(i), _) => int_literal(i),
        (Value::Enum(_, i), Sort::Bv(w)) => bv_literal(*w, *i as u128),
        (Value::Array(a), Sort::Array(k, vs)) => {
            let mut s = format!("((as const {}) {})", sort, value_literal(&a.default, vs));
            for (key, val) in a.mods.iter() {
                s = format!("(store {} {} {})", s, value_literal(key, k), value_literal(val, vs));
            }
            s
        }
        _ => panic!("value {:?} does not fit sort {}", v, sort),
    }
}

fn uses_int(pool: &TermPool, reachable: &[TermId]) -> bool {
    reachable.iter().any(|&t| uses_int_sort(pool.sort(t)))
}

fn uses_int_sort(s: &Sort) -> bool {
    match s {
        Sort::Int => true,
        Sort::Array(k, v) => uses_int_sort(k) || uses_int_sort(v),
        _ => false,
    }
}

/// Terms reachable from `root`, in increasing id order (children first).
fn reachable(pool: &TermPool, root: TermId) -> Vec<TermId> {
    let mut seen = vec![false; pool.len()];
    let mut stack = vec![root];
    while let Some(t) = stack.pop() {
        if std::mem::replace(&mut seen[t.0 as usize], true) {
            continue;
        }
        stack.extend(pool.node(t).children());
    }
    (0..pool.len() as u32).filter(|&i| seen[i as usize]).map(TermId).collect()
}

struct Printer<'a> {
    pool: &'a TermPool,
    names: HashMap<TermId, String>,
}

impl Printer<'_> {
    fn term(&self, t: TermId, out: &mut String) {
        if let Some(n) = self.names.get(&t) {
            out.push_str(n);
            return;
        }
        let p = self.pool;
        let app = |out: &mut String, head: &str, args: &[TermId]| {
            out.push('(');
            out.push_str(head);
            for a in args {
                out.push(' ');
                self.term(*a, out);
            }
            out.push(')');
        };
        match p.node(t) {
            Node::BoolConst(b) => out.push_str(if *b { "true" } else { "false" }),
            Node::BvConst(w, v) => out.push_str(&bv_literal(*w, *v)),
            Node::IntConst(i) => out.push_str(&int_literal(i)),
            Node::Var(id) => out.push_str(&var_name(*id)),
            Node::Not(a) => app(out, "not", &[*a]),
            Node::And(xs) => app(out, "and", xs),
            Node::Or(xs) => app(out, "or", xs),
            Node::Ite(c, a, b) => app(out, "ite", &[*c, *a, *b]),
            Node::Eq(a, b) => app(out, "=", &[*a, *b]),
            Node::BvNot(a) => app(out, "bvnot", &[*a]),
            Node::BvNeg(a) => app(out, "bvneg", &[*a]),
            Node::Bv(op, a, b) => {
                let head = match op {
                    BvOp::Add => "bvadd",
                    BvOp::Sub => "bvsub",
                    BvOp::Mul => "bvmul",
                    BvOp::And => "bvand",
                    BvOp::Or => "bvor",
                    BvOp::Xor => "bvxor",
                    BvOp::Shl => "bvshl",
                    BvOp::Lshr => "bvlshr",
                };
                app(out, head, &[*a, *b])
            }
            Node::Ult(a, b) => app(out, "bvult", &[*a, *b]),
            Node::Ule(a, b) => app(out, "bvule", &[*a, *b]),
            Node::Extract(hi, lo, a) => app(out, &format!("(_ extract {} {})", hi, lo), &[*a]),
            Node::ZeroExt(by, a) => app(out, &format!("(_ zero_extend {})", by), &[*a]),
            Node::Int(op, a, b) => {
                let head = match op {
                    IntOp::Add => "+",
                    IntOp::Sub => "-",
                    IntOp::Mul => "*",
                };
                app(out, head, &[*a, *b])
            }
            Node::IntNeg(a) => app(out, "-", &[*a]),
            Node::IntLt(a, b) => app(out, "<", &[*a, *b]),
            Node::IntLe(a, b) => app(out, "<=", &[*a, *b]),
            Node::Bv2Int(a) => app(out, "bv2nat", &[*a]),
            Node::Int2Bv(w, a) => app(out, &format!("(_ int2bv {})", w), &[*a]),
            Node::Select(a, k) => app(out, "select", &[*a, *k]),
            Node::Store(a, k, v) => app(out, "store", &[*a, *k, *v]),
            Node::ConstArray(s, v) => app(out, &format!("(as const {})", s), &[*v]),
        }
    }
}

/// Serializes `vc`, optionally conjoining `pins` (variable = value).
pub fn emit_with_pins(vc: &Vc, pins: &[(u32, Value)]) -> String {
    let pool = &vc.pool;
    let root = vc.query;
    let terms = reachable(pool, root);

    let mut refs: HashMap<TermId, u32> = HashMap::new();
    for &t in &terms {
        for c in pool.node(t).children() {
            *refs.entry(c).or_default() += 1;
        }
    }
    let mut names = HashMap::new();
    let mut height: HashMap<TermId, u32> = HashMap::new();
    let mut defs = Vec::new();
    for &t in &terms {
        let node = pool.node(t);
        if node.children().is_empty() || t == root {
            height.insert(t, 0);
            continue;
        }
        let h = 1 + node
            .children()
            .iter()
            .map(|c| if names.contains_key(c) { 0 } else { height[c] })
            .max()
            .unwrap_or(0);
        height.insert(t, h);
        if refs.get(&t).copied().unwrap_or(0) > 1 || h > MAX_INLINE_HEIGHT {
            defs.push(t);
            names.insert(t, format!("t{}", t.0));
        }
    }

    let int = uses_int(pool, &terms) || pins.iter().any(|(id, _)| uses_int_sort(&pool.var_sorts[*id as usize]));
    let mut out = String::new();
    out.push_str(if int { "(set-logic ALL)\n" } else { "(set-logic QF_ABV)\n" });
    out.push_str("(set-option :produce-models true)\n");
    for (id, sort) in pool.var_sorts.iter().enumerate() {
        let _ = writeln!(out, "(declare-const {} {})", var_name(id as u32), sort);
    }
    let mut printer = Printer { pool, names: HashMap::new() };
    for t in defs {
        let mut body = String::new();
        printer.term(t, &mut body);
        let _ = writeln!(out, "(define-fun t{} () {} {})", t.0, pool.sort(t), body);
        printer.names.insert(t, names[&t].clone());
    }
    let mut body = String::new();
    printer.term(root, &mut body);
    if pins.is_empty() {
        let _ = writeln!(out, "(assert {})", body);
    } else {
        let _ = write!(out, "(assert (and {}", body);
        for (id, v) in pins {
            let _ = write!(out, " (= {} {})", var_name(*id), value_literal(v, &pool.var_sorts[*id as usize]));
        }
        out.push_str("))\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

pub fn emit_smtlib(vc: &Vc) -> String {
    emit_with_pins(vc, &[])
}
