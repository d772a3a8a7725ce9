//! Hash-consed solver terms with local constant folding.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;

use crate::value::{int_to_bits, lshr, mask, shl};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Bv(u32),
    Int,
    Array(Rc<Sort>, Rc<Sort>),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Bv(w) => write!(f, "(_ BitVec {})", w),
            Sort::Int => write!(f, "Int"),
            Sort::Array(k, v) => write!(f, "(Array {} {})", k, v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BvOp {
    Add,
    Sub,
    Mul,
    And,
    Or,
    Xor,
    Shl,
    Lshr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    BoolConst(bool),
    BvConst(u32, u128),
    IntConst(BigInt),
    /// Choice variable `c<id>`.
    Var(u32),
    Not(TermId),
    And(Vec<TermId>),
    Or(Vec<TermId>),
    Ite(TermId, TermId, TermId),
    Eq(TermId, TermId),
    BvNot(TermId),
    BvNeg(TermId),
    Bv(BvOp, TermId, TermId),
    Ult(TermId, TermId),
    Ule(TermId, TermId),
    Extract(u32, u32, TermId),
    ZeroExt(u32, TermId),
    Int(IntOp, TermId, TermId),
    IntNeg(TermId),
    IntLt(TermId, TermId),
    IntLe(TermId, TermId),
    Bv2Int(TermId),
    Int2Bv(u32, TermId),
    Select(TermId, TermId),
    Store(TermId, TermId, TermId),
    ConstArray(Sort, TermId),
}

impl Node {
    pub fn children(&self) -> Vec<TermId> {
        match self {
            Node::BoolConst(_) | Node::BvConst(..) | Node::IntConst(_) | Node::Var(_) => vec![],
            Node::Not(a)
            | Node::BvNot(a)
            | Node::BvNeg(a)
            | Node::Extract(_, _, a)
            | Node::ZeroExt(_, a)
            | Node::IntNeg(a)
            | Node::Bv2Int(a)
            | Node::Int2Bv(_, a)
            | Node::ConstArray(_, a) => vec![*a],
            Node::And(xs) | Node::Or(xs) => xs.clone(),
            Node::Eq(a, b)
            | Node::Bv(_, a, b)
            | Node::Ult(a, b)
            | Node::Ule(a, b)
            | Node::Int(_, a, b)
            | Node::IntLt(a, b)
            | Node::IntLe(a, b)
            | Node::Select(a, b) => vec![*a, *b],
            Node::Ite(a, b, c) | Node::Store(a, b, c) => vec![*a, *b, *c],
        }
    }
}

/// Constant value of a term, if it has folded to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Const {
    Bool(bool),
    Bv(u32, u128),
    Int(BigInt),
}

#[derive(Default)]
pub struct TermPool {
    nodes: Vec<Node>,
    sorts: Vec<Sort>,
    index: HashMap<Node, TermId>,
    /// Sort of each choice variable.
    pub var_sorts: Vec<Sort>,
}

impl TermPool {
    pub fn new() -> TermPool {
        TermPool::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: TermId) -> &Node {
        &self.nodes[t.0 as usize]
    }

    pub fn sort(&self, t: TermId) -> &Sort {
        &self.sorts[t.0 as usize]
    }

    fn bv_width(&self, t: TermId) -> u32 {
        match self.sort(t) {
            Sort::Bv(w) => *w,
            s => panic!("expected a bitvector, found {}", s),
        }
    }

    fn intern(&mut self, n: Node, sort: Sort) -> TermId {
        if let Some(&t) = self.index.get(&n) {
            return t;
        }
        let t = TermId(self.nodes.len() as u32);
        self.nodes.push(n.clone());
        self.sorts.push(sort);
        self.index.insert(n, t);
        t
    }

    pub fn constant(&self, t: TermId) -> Option<Const> {
        match self.node(t) {
            Node::BoolConst(b) => Some(Const::Bool(*b)),
            Node::BvConst(w, v) => Some(Const::Bv(*w, *v)),
            Node::IntConst(i) => Some(Const::Int(i.clone())),
            _ => None,
        }
    }

    pub fn as_bool(&self, t: TermId) -> Option<bool> {
        match self.node(t) {
            Node::BoolConst(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_bv(&self, t: TermId) -> Option<u128> {
        match self.node(t) {
            Node::BvConst(_, v) => Some(*v),
            _ => None,
        }
    }

    fn as_int(&self, t: TermId) -> Option<&BigInt> {
        match self.node(t) {
            Node::IntConst(i) => Some(i),
            _ => None,
        }
    }

    pub fn is_const(&self, t: TermId) -> bool {
        matches!(self.node(t), Node::BoolConst(_) | Node::BvConst(..) | Node::IntConst(_))
    }

    // ---- constructors ---------------------------------------------------

    pub fn bool(&mut self, b: bool) -> TermId {
        self.intern(Node::BoolConst(b), Sort::Bool)
    }

    pub fn tt(&mut self) -> TermId {
        self.bool(true)
    }

    pub fn ff(&mut self) -> TermId {
        self.bool(false)
    }

    pub fn bv(&mut self, width: u32, value: u128) -> TermId {
        self.intern(Node::BvConst(width, value & mask(width)), Sort::Bv(width))
    }

    pub fn int(&mut self, i: BigInt) -> TermId {
        self.intern(Node::IntConst(i), Sort::Int)
    }

    pub fn var(&mut self, id: u32, sort: Sort) -> TermId {
        if self.var_sorts.len() <= id as usize {
            self.var_sorts.resize(id as usize + 1, Sort::Bool);
        }
        self.var_sorts[id as usize] = sort.clone();
        self.intern(Node::Var(id), sort)
    }

    pub fn not(&mut self, a: TermId) -> TermId {
        match self.node(a) {
            Node::BoolConst(b) => {
                let b = !*b;
                self.bool(b)
            }
            Node::Not(x) => *x,
            _ => self.intern(Node::Not(a), Sort::Bool),
        }
    }

    pub fn and(&mut self, xs: &[TermId]) -> TermId {
        let mut out = Vec::new();
        for &x in xs {
            match self.node(x) {
                Node::BoolConst(true) => {}
                Node::BoolConst(false) => return self.ff(),
                _ => out.push(x),
            }
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|t| seen.insert(*t));
        match out.len() {
            0 => self.tt(),
            1 => out[0],
            _ => self.intern(Node::And(out), Sort::Bool),
        }
    }

    pub fn or(&mut self, xs: &[TermId]) -> TermId {
        let mut out = Vec::new();
        for &x in xs {
            match self.node(x) {
                Node::BoolConst(false) => {}
                Node::BoolConst(true) => return self.tt(),
                _ => out.push(x),
            }
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|t| seen.insert(*t));
        match out.len() {
            0 => self.ff(),
            1 => out[0],
            _ => self.intern(Node::Or(out), Sort::Bool),
        }
    }

    pub fn implies(&mut self, a: TermId, b: TermId) -> TermId {
        let na = self.not(a);
        self.or(&[na, b])
    }

    pub fn ite(&mut self, c: TermId, a: TermId, b: TermId) -> TermId {
        if a == b {
            return a;
        }
        if let Some(cv) = self.as_bool(c) {
            return if cv { a } else { b };
        }
        if *self.sort(a) == Sort::Bool {
            match (self.as_bool(a), self.as_bool(b)) {
                (Some(true), Some(false)) => return c,
                (Some(false), Some(true)) => return self.not(c),
                (Some(true), _) => return self.or(&[c, b]),
                (_, Some(false)) => return self.and(&[c, a]),
                (Some(false), _) => {
                    let nc = self.not(c);
                    return self.and(&[nc, b]);
                }
                (_, Some(true)) => {
                    let nc = self.not(c);
                    return self.or(&[nc, a]);
                }
                _ => {}
            }
        }
        // ite(!c, a, b) = ite(c, b, a)
        if let Node::Not(inner) = *self.node(c) {
            return self.ite(inner, b, a);
        }
        let sort = self.sort(a).clone();
        self.intern(Node::Ite(c, a, b), sort)
    }

    pub fn eq(&mut self, a: TermId, b: TermId) -> TermId {
        if a == b {
            return self.tt();
        }
        if let (Some(x), Some(y)) = (self.constant(a), self.constant(b)) {
            return self.bool(x == y);
        }
        if *self.sort(a) == Sort::Bool {
            match (self.as_bool(a), self.as_bool(b)) {
                (Some(true), _) => return b,
                (_, Some(true)) => return a,
                (Some(false), _) => return self.not(b),
                (_, Some(false)) => return self.not(a),
                _ => {}
            }
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.intern(Node::Eq(a, b), Sort::Bool)
    }

    pub fn bvnot(&mut self, a: TermId) -> TermId {
        let w = self.bv_width(a);
        if let Some(v) = self.as_bv(a) {
            return self.bv(w, !v);
        }
        self.intern(Node::BvNot(a), Sort::Bv(w))
    }

    pub fn bvneg(&mut self, a: TermId) -> TermId {
        let w = self.bv_width(a);
        if let Some(v) = self.as_bv(a) {
            return self.bv(w, v.wrapping_neg());
        }
        self.intern(Node::BvNeg(a), Sort::Bv(w))
    }

    pub fn bvop(&mut self, op: BvOp, a: TermId, b: TermId) -> TermId {
        let w = self.bv_width(a);
        if let (Some(x), Some(y)) = (self.as_bv(a), self.as_bv(b)) {
            let r = match op {
                BvOp::Add => x.wrapping_add(y),
                BvOp::Sub => x.wrapping_sub(y),
                BvOp::Mul => x.wrapping_mul(y),
                BvOp::And => x & y,
                BvOp::Or => x | y,
                BvOp::Xor => x ^ y,
                BvOp::Shl => shl(x, y, w),
                BvOp::Lshr => lshr(x, y, w),
            };
            return self.bv(w, r);
        }
        self.intern(Node::Bv(op, a, b), Sort::Bv(w))
    }

    pub fn ult(&mut self, a: TermId, b: TermId) -> TermId {
        if let (Some(x), Some(y)) = (self.as_bv(a), self.as_bv(b)) {
            return self.bool(x < y);
        }
        if a == b {
            return self.ff();
        }
        self.intern(Node::Ult(a, b), Sort::Bool)
    }

    pub fn ule(&mut self, a: TermId, b: TermId) -> TermId {
        if let (Some(x), Some(y)) = (self.as_bv(a), self.as_bv(b)) {
            return self.bool(x <= y);
        }
        if a == b {
            return self.tt();
        }
        self.intern(Node::Ule(a, b), Sort::Bool)
    }

    pub fn extract(&mut self, hi: u32, lo: u32, a: TermId) -> TermId {
        let w = self.bv_width(a);
        if lo == 0 && hi + 1 == w {
            return a;
        }
        if let Some(v) = self.as_bv(a) {
            return self.bv(hi - lo + 1, v >> lo);
        }
        self.intern(Node::Extract(hi, lo, a), Sort::Bv(hi - lo + 1))
    }

    /// Zero-extends `a` to `width` bits.
    pub fn zext_to(&mut self, width: u32, a: TermId) -> TermId {
        let w = self.bv_width(a);
        if width == w {
            return a;
        }
        if let Some(v) = self.as_bv(a) {
            return self.bv(width, v);
        }
        self.intern(Node::ZeroExt(width - w, a), Sort::Bv(width))
    }

    pub fn intop(&mut self, op: IntOp, a: TermId, b: TermId) -> TermId {
        if let (Some(x), Some(y)) = (self.as_int(a), self.as_int(b)) {
            let r = match op {
                IntOp::Add => x + y,
                IntOp::Sub => x - y,
                IntOp::Mul => x * y,
            };
            return self.int(r);
        }
        self.intern(Node::Int(op, a, b), Sort::Int)
    }

    pub fn intneg(&mut self, a: TermId) -> TermId {
        if let Some(x) = self.as_int(a) {
            let r = -x.clone();
            return self.int(r);
        }
        self.intern(Node::IntNeg(a), Sort::Int)
    }

    pub fn intlt(&mut self, a: TermId, b: TermId) -> TermId {
        if let (Some(x), Some(y)) = (self.as_int(a), self.as_int(b)) {
            let r = x < y;
            return self.bool(r);
        }
        self.intern(Node::IntLt(a, b), Sort::Bool)
    }

    pub fn intle(&mut self, a: TermId, b: TermId) -> TermId {
        if let (Some(x), Some(y)) = (self.as_int(a), self.as_int(b)) {
            let r = x <= y;
            return self.bool(r);
        }
        self.intern(Node::IntLe(a, b), Sort::Bool)
    }

    pub fn bv2int(&mut self, a: TermId) -> TermId {
        if let Some(v) = self.as_bv(a) {
            return self.int(BigInt::from(v));
        }
        self.intern(Node::Bv2Int(a), Sort::Int)
    }

    pub fn int2bv(&mut self, width: u32, a: TermId) -> TermId {
        if let Some(x) = self.as_int(a) {
            let v = int_to_bits(x, width);
            return self.bv(width, v);
        }
        self.intern(Node::Int2Bv(width, a), Sort::Bv(width))
    }

    pub fn const_array(&mut self, key: Sort, value: TermId) -> TermId {
        let vs = self.sort(value).clone();
        let sort = Sort::Array(Rc::new(key), Rc::new(vs));
        self.intern(Node::ConstArray(sort.clone(), value), sort)
    }

    pub fn select(&mut self, a: TermId, k: TermId) -> TermId {
        let mut cur = a;
        loop {
            match self.node(cur).clone() {
                Node::ConstArray(_, v) => return v,
                Node::Store(inner, key, val) => {
                    if key == k {
                        return val;
                    }
                    if self.is_const(key) && self.is_const(k) {
                        cur = inner;
                        continue;
                    }
                    break;
                }
                _ => break,
            }
        }
        let Sort::Array(_, v) = self.sort(cur).clone() else {
            panic!("select on a non-array")
        };
        self.intern(Node::Select(cur, k), (*v).clone())
    }

    /// Array store. A store to a constant key already present in the run of
    /// constant-key stores on top of the chain replaces that entry, so a
    /// concrete chain holds each key once.
    pub fn store(&mut self, a: TermId, k: TermId, v: TermId) -> TermId {
        let sort = self.sort(a).clone();
        if self.is_const(k) {
            let mut above = Vec::new();
            let mut cur = a;
            while let Node::Store(inner, key, val) = self.node(cur).clone() {
                if !self.is_const(key) {
                    break;
                }
                if key == k {
                    // Rewrite in place so entry order matches first-write order.
                    let mut base = self.intern(Node::Store(inner, k, v), sort.clone());
                    for (key, val) in above.into_iter().rev() {
                        base = self.intern(Node::Store(base, key, val), sort.clone());
                    }
                    return base;
                }
                above.push((key, val));
                cur = inner;
            }
        }
        self.intern(Node::Store(a, k, v), sort)
    }

    /// Rebuilds `t` with variables replaced per `subst`; with every
    /// variable bound to a constant the result folds to a constant.
    pub fn instantiate(&mut self, t: TermId, subst: &HashMap<u32, TermId>) -> TermId {
        let mut memo = HashMap::new();
        self.inst(t, subst, &mut memo)
    }

    fn inst(&mut self, t: TermId, subst: &HashMap<u32, TermId>, memo: &mut HashMap<TermId, TermId>) -> TermId {
        if let Some(&r) = memo.get(&t) {
            return r;
        }
        let n = self.node(t).clone();
        let mut go = |p: &mut Self, x: TermId| p.inst(x, subst, memo);
        let r = match n {
            Node::BoolConst(_) | Node::BvConst(..) | Node::IntConst(_) => t,
            Node::Var(id) => subst.get(&id).copied().unwrap_or(t),
            Node::Not(a) => {
                let a = go(self, a);
                self.not(a)
            }
            Node::And(xs) => {
                let xs: Vec<_> = xs.into_iter().map(|x| go(self, x)).collect();
                self.and(&xs)
            }
            Node::Or(xs) => {
                let xs: Vec<_> = xs.into_iter().map(|x| go(self, x)).collect();
                self.or(&xs)
            }
            Node::Ite(c, a, b) => {
                let (c, a, b) = (go(self, c), go(self, a), go(self, b));
                self.ite(c, a, b)
            }
            Node::Eq(a, b) => {
                let (a, b) = (go(self, a), go(self, b));
                self.eq(a, b)
            }
            Node::BvNot(a) => {
                let a = go(self, a);
                self.bvnot(a)
            }
            Node::BvNeg(a) => {
                let a = go(self, a);
                self.bvneg(a)
            }
            Node::Bv(op, a, b) => {
                let (a, b) = (go(self, a), go(self, b));
                self.bvop(op, a, b)
            }
            Node::Ult(a, b) => {
                let (a, b) = (go(self, a), go(self, b));
                self.ult(a, b)
            }
            Node::Ule(a, b) => {
                let (a, b) = (go(self, a), go(self, b));
                self.ule(a, b)
            }
            Node::Extract(hi, lo, a) => {
                let a = go(self, a);
                self.extract(hi, lo, a)
            }
            Node::ZeroExt(by, a) => {
                let a = go(self, a);
                let w = self.bv_width(a);
                self.zext_to(w + by, a)
            }
            Node::Int(op, a, b) => {
                let (a, b) = (go(self, a), go(self, b));
                self.intop(op, a, b)
            }
            Node::IntNeg(a) => {
                let a = go(self, a);
                self.intneg(a)
            }
            Node::IntLt(a, b) => {
                let (a, b) = (go(self, a), go(self, b));
                self.intlt(a, b)
            }
            Node::IntLe(a, b) => {
                let (a, b) = (go(self, a), go(self, b));
                self.intle(a, b)
            }
            Node::Bv2Int(a) => {
                let a = go(self, a);
                self.bv2int(a)
            }
            Node::Int2Bv(w, a) => {
                let a = go(self, a);
                self.int2bv(w, a)
            }
            Node::Select(a, k) => {
                let (a, k) = (go(self, a), go(self, k));
                self.select(a, k)
            }
            Node::Store(a, k, v) => {
                let (a, k, v) = (go(self, a), go(self, k), go(self, v));
                self.store(a, k, v)
            }
            Node::ConstArray(Sort::Array(k, _), v) => {
                let v = go(self, v);
                self.const_array((*k).clone(), v)
            }
            Node::ConstArray(..) => unreachable!("const array of non-array sort"),
        };
        memo.insert(t, r);
        r
    }

    /// Constant-key entries of a store chain (oldest first) and its base.
    pub fn store_chain(&self, a: TermId) -> (Vec<(TermId, TermId)>, TermId) {
        let mut entries = Vec::new();
        let mut cur = a;
        while let Node::Store(inner, k, v) = self.node(cur) {
            entries.push((*k, *v));
            cur = *inner;
        }
        entries.reverse();
        (entries, cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_and_folding() {
        let mut p = TermPool::new();
        let x = p.var(0, Sort::Bv(8));
        let one = p.bv(8, 1);
        let a = p.bvop(BvOp::Add, x, one);
        let b = p.bvop(BvOp::Add, x, one);
        assert_eq!(a, b);
        let two = p.bv(8, 2);
        let three = p.bvop(BvOp::Add, one, two);
        assert_eq!(p.as_bv(three), Some(3));
        let ff = p.bv(8, 0xff);
        let wrap = p.bvop(BvOp::Add, ff, one);
        assert_eq!(p.as_bv(wrap), Some(0));
    }

    #[test]
    fn ite_simplification() {
        let mut p = TermPool::new();
        let c = p.var(0, Sort::Bool);
        let x = p.var(1, Sort::Bv(4));
        assert_eq!(p.ite(c, x, x), x);
        let one = p.bv(4, 1);
        let two = p.bv(4, 2);
        let t = p.ite(c, one, two);
        assert!(matches!(p.node(t), Node::Ite(..)));
        let tt = p.tt();
        assert_eq!(p.ite(tt, one, two), one);
    }

    #[test]
    fn select_through_stores() {
        let mut p = TermPool::new();
        let zero = p.bv(64, 0);
        let base = p.const_array(Sort::Bv(8), zero);
        let k5 = p.bv(8, 5);
        let k6 = p.bv(8, 6);
        let nine = p.bv(64, 9);
        let a = p.store(base, k5, nine);
        assert_eq!(p.select(a, k5), nine);
        assert_eq!(p.select(a, k6), zero);
        let seven = p.bv(64, 7);
        let b = p.store(a, k6, seven);
        let c = p.store(b, k5, seven);
        let (entries, _) = p.store_chain(c);
        assert_eq!(entries.len(), 2);
        assert_eq!(p.select(c, k5), seven);
    }

    #[test]
    fn slices_and_conversions_fold() {
        let mut p = TermPool::new();
        let a = p.bv(48, 0x8000_0000_0070);
        let r = p.extract(6, 5, a);
        assert_eq!(p.as_bv(r), Some(3));
        let i = p.int(BigInt::from(-1));
        let b = p.int2bv(8, i);
        assert_eq!(p.as_bv(b), Some(0xff));
    }
}
