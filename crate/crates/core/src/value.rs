//! Concrete runtime values, bit-level helpers and the sparse array store.

use std::fmt::{self, Write};
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::types::{EnumDef, Ty};

pub const DEFAULT_CAPACITY: usize = 64;

/// All-ones mask of `width` bits.
pub fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

/// `x[hi downto lo]`.
pub fn slice_bits(x: u128, hi: u32, lo: u32) -> u128 {
    debug_assert!(hi >= lo && hi < 128);
    (x >> lo) & mask(hi - lo + 1)
}

pub fn shl(x: u128, by: u128, width: u32) -> u128 {
    if by >= width as u128 {
        0
    } else {
        (x << by) & mask(width)
    }
}

pub fn lshr(x: u128, by: u128, width: u32) -> u128 {
    if by >= width as u128 {
        0
    } else {
        x >> by
    }
}

/// Non-negative residue of `x` modulo `2^width`.
pub fn int_to_bits(x: &BigInt, width: u32) -> u128 {
    let m = BigInt::from(1u8) << width;
    let mut r = x % &m;
    if r.is_negative() {
        r += &m;
    }
    let (_, digits) = r.to_u64_digits();
    digits
        .iter()
        .take(2)
        .enumerate()
        .fold(0u128, |acc, (i, d)| acc | ((*d as u128) << (64 * i)))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Bits { width: u32, value: u128 },
    Int(BigInt),
    Enum(Rc<EnumDef>, u32),
    Record(Rc<[(String, Ty)]>, Vec<Value>),
    Vector(Vec<Value>),
    Array(SparseArray),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("sparse array capacity of {capacity} modifications exceeded")]
pub struct CapacityError {
    pub capacity: usize,
}

/// Default value plus an append-only list of modifications. Clones share the
/// list, so snapshots are cheap and unaffected by later writes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseArray {
    pub key: Ty,
    pub value: Ty,
    pub default: Rc<Value>,
    pub mods: Rc<Vec<(Value, Value)>>,
}

impl SparseArray {
    pub fn new(key: Ty, value: Ty, default: Value) -> SparseArray {
        SparseArray {
            key,
            value,
            default: Rc::new(default),
            mods: Rc::new(Vec::new()),
        }
    }

    /// Number of distinct keys written.
    pub fn len(&self) -> usize {
        self.mods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mods.is_empty()
    }
}

pub fn sparse_read(a: &SparseArray, k: &Value) -> Value {
    a.mods
        .iter()
        .rev()
        .find(|(key, _)| key == k)
        .map(|(_, v)| v.clone())
        .unwrap_or_else(|| (*a.default).clone())
}

/// Writes `k -> v`, replacing an earlier entry for the same key in place.
pub fn sparse_write(a: &SparseArray, k: Value, v: Value, capacity: usize) -> Result<SparseArray, CapacityError> {
    let mut mods: Vec<(Value, Value)> = (*a.mods).clone();
    if let Some(slot) = mods.iter_mut().find(|(key, _)| *key == k) {
        slot.1 = v;
    } else {
        if mods.len() >= capacity {
            return Err(CapacityError { capacity });
        }
        mods.push((k, v));
    }
    Ok(SparseArray {
        key: a.key.clone(),
        value: a.value.clone(),
        default: a.default.clone(),
        mods: Rc::new(mods),
    })
}

impl Value {
    pub fn bits(width: u32, value: u128) -> Value {
        Value::Bits {
            width,
            value: value & mask(width),
        }
    }

    pub fn zero(ty: &Ty) -> Value {
        match ty {
            Ty::Unit => Value::Unit,
            Ty::Bool => Value::Bool(false),
            Ty::Bits(w) => Value::bits(*w, 0),
            Ty::Int => Value::Int(BigInt::zero()),
            Ty::Enum(e) => Value::Enum(e.clone(), 0),
            Ty::Record(fs) => Value::Record(fs.clone(), fs.iter().map(|(_, t)| Value::zero(t)).collect()),
            Ty::Vector(e, n) => Value::Vector((0..*n).map(|_| Value::zero(e)).collect()),
            Ty::Array(k, v) => Value::Array(SparseArray::new((**k).clone(), (**v).clone(), Value::zero(v))),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("expected Bool, found {:?}", other),
        }
    }

    pub fn as_bits(&self) -> u128 {
        match self {
            Value::Bits { value, .. } => *value,
            other => panic!("expected BitInt, found {:?}", other),
        }
    }

    /// Runtime type check used by debug assertions.
    pub fn has_type(&self, ty: &Ty) -> bool {
        match (self, ty) {
            (Value::Unit, Ty::Unit) | (Value::Bool(_), Ty::Bool) | (Value::Int(_), Ty::Int) => true,
            (Value::Bits { width, value }, Ty::Bits(w)) => width == w && *value <= mask(*w),
            (Value::Enum(d, i), Ty::Enum(e)) => d == e && (*i as usize) < e.variants.len(),
            (Value::Record(fs, vs), Ty::Record(ts)) => {
                fs == ts && vs.len() == ts.len() && vs.iter().zip(ts.iter()).all(|(v, (_, t))| v.has_type(t))
            }
            (Value::Vector(vs), Ty::Vector(e, n)) => vs.len() as u64 == *n && vs.iter().all(|v| v.has_type(e)),
            (Value::Array(a), Ty::Array(k, v)) => a.key == **k && a.value == **v,
            _ => false,
        }
    }

    /// Scalar leaves in `Ty::leaves` order.
    pub fn leaves(&self) -> Vec<Value> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Value>) {
        match self {
            Value::Unit => {}
            Value::Record(_, vs) | Value::Vector(vs) => vs.iter().for_each(|v| v.collect_leaves(out)),
            other => out.push(other.clone()),
        }
    }

    /// Rebuilds a value of type `ty` from its leaves.
    pub fn from_leaves(ty: &Ty, leaves: &mut impl Iterator<Item = Value>) -> Value {
        match ty {
            Ty::Unit => Value::Unit,
            Ty::Record(fs) => Value::Record(fs.clone(), fs.iter().map(|(_, t)| Value::from_leaves(t, leaves)).collect()),
            Ty::Vector(e, n) => Value::Vector((0..*n).map(|_| Value::from_leaves(e, leaves)).collect()),
            _ => leaves.next().expect("enough leaves"),
        }
    }
}

fn hex_grouped(v: u128) -> String {
    let digits = format!("{:x}", v);
    let mut out = String::from("0x");
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 4 == 0 {
            out.push('_');
        }
        out.push(c);
    }
    out
}

/// Renders a value the way `printf` holes show it.
pub fn format_value(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v);
    s
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Unit => out.push_str("()"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Bits { width, value } => {
            if *width <= 8 || *value < 10 {
                let _ = write!(out, "{}", value);
            } else {
                let _ = write!(out, "{}u{}", hex_grouped(*value), width);
            }
        }
        Value::Int(i) => {
            let _ = write!(out, "{}", i);
        }
        Value::Enum(d, i) => {
            let _ = write!(out, "{}::{}", d.name, d.variants[*i as usize]);
        }
        Value::Record(fs, vs) => {
            out.push_str("{ ");
            for (i, ((n, _), v)) in fs.iter().zip(vs).enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: ", n);
                write_value(out, v);
            }
            out.push_str(" }");
        }
        Value::Vector(vs) => {
            out.push('[');
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, v);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("array { default: ");
            write_value(out, &a.default);
            for (k, v) in a.mods.iter() {
                out.push_str(", ");
                write_value(out, k);
                out.push_str(" => ");
                write_value(out, v);
            }
            out.push_str(" }");
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_value(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn k(x: u128) -> Value {
        Value::bits(8, x)
    }

    fn empty() -> SparseArray {
        SparseArray::new(Ty::Bits(8), Ty::Bits(64), Value::bits(64, 0))
    }

    #[test]
    fn read_after_write() {
        let a = sparse_write(&empty(), k(5), Value::bits(64, 9), 64).unwrap();
        assert_eq!(sparse_read(&a, &k(5)), Value::bits(64, 9));
        assert_eq!(sparse_read(&a, &k(6)), Value::bits(64, 0));
    }

    #[test]
    fn capacity_and_compaction() {
        let a = sparse_write(&empty(), k(1), Value::bits(64, 1), 2).unwrap();
        let a = sparse_write(&a, k(2), Value::bits(64, 2), 2).unwrap();
        let a = sparse_write(&a, k(1), Value::bits(64, 3), 2).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(sparse_read(&a, &k(1)), Value::bits(64, 3));
        assert!(sparse_write(&a, k(3), Value::bits(64, 4), 2).is_err());
    }

    #[test]
    fn snapshots_are_isolated() {
        let a = sparse_write(&empty(), k(1), Value::bits(64, 1), 64).unwrap();
        let snap = a.clone();
        let b = sparse_write(&a, k(1), Value::bits(64, 7), 64).unwrap();
        assert_eq!(sparse_read(&snap, &k(1)), Value::bits(64, 1));
        assert_eq!(sparse_read(&b, &k(1)), Value::bits(64, 7));
    }

    #[test]
    fn formatting() {
        assert_eq!(format_value(&Value::bits(48, 0x8000_0000_0070)), "0x8000_0000_0070u48");
        assert_eq!(format_value(&Value::bits(64, 1)), "1");
        assert_eq!(format_value(&Value::bits(64, 0x48ad_c33c_fdc9_99d4)), "0x48ad_c33c_fdc9_99d4u64");
        assert_eq!(format_value(&Value::bits(2, 3)), "3");
        assert_eq!(format_value(&Value::bits(8, 200)), "200");
        assert_eq!(format_value(&Value::Bool(true)), "true");
        let fs: Rc<[(String, Ty)]> = vec![("address".to_string(), Ty::Bits(48)), ("is_secure".to_string(), Ty::Bool)].into();
        let r = Value::Record(fs, vec![Value::bits(48, 0), Value::Bool(false)]);
        assert_eq!(format_value(&r), "{ address: 0, is_secure: false }");
    }

    #[test]
    fn config_address_0x70_decodes_to_region3_attr() {
        assert_eq!(slice_bits(0x70, 6, 5), 3);
        assert_eq!(slice_bits(0x70, 4, 3), 2);
    }

    #[test]
    fn int_residues() {
        assert_eq!(int_to_bits(&BigInt::from(-1), 8), 0xff);
        assert_eq!(int_to_bits(&BigInt::from(300), 8), 44);
        assert_eq!(int_to_bits(&(BigInt::from(1u8) << 127), 128), 1u128 << 127);
    }

    proptest! {
        #[test]
        fn sparse_matches_dense(ops in proptest::collection::vec((any::<bool>(), 0u8..=255, any::<u64>()), 1..200)) {
            let mut a = empty();
            let mut dense: HashMap<u8, u64> = HashMap::new();
            for (write, key, val) in ops {
                if write && (dense.contains_key(&key) || dense.len() < 64) {
                    a = sparse_write(&a, k(key as u128), Value::bits(64, val as u128), 64).unwrap();
                    dense.insert(key, val);
                } else {
                    let got = sparse_read(&a, &k(key as u128)).as_bits();
                    prop_assert_eq!(got, *dense.get(&key).unwrap_or(&0) as u128);
                }
            }
        }
    }
}
