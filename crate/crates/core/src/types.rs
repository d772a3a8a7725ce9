//! Resolved types. Aliases are expanded away; records are structural.

use std::fmt;
use std::rc::Rc;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EnumDef {
    pub name: String,
    pub variants: Vec<String>,
}

impl EnumDef {
    /// Bit width used to carry a variant index: `ceil(log2(max(n, 2)))`.
    pub fn encoding_width(&self) -> u32 {
        bits_for(self.variants.len().max(2) as u64)
    }

    pub fn variant_index(&self, name: &str) -> Option<u32> {
        self.variants.iter().position(|v| v == name).map(|i| i as u32)
    }
}

/// Number of bits needed to represent `n` distinct values.
pub fn bits_for(n: u64) -> u32 {
    if n <= 1 {
        1
    } else {
        64 - (n - 1).leading_zeros()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Unit,
    Bool,
    Bits(u32),
    Int,
    Enum(Rc<EnumDef>),
    Record(Rc<[(String, Ty)]>),
    Vector(Rc<Ty>, u64),
    /// Snapshot of a primitive `Array<K, V>`.
    Array(Rc<Ty>, Rc<Ty>),
}

impl Ty {
    pub fn is_scalar(&self) -> bool {
        matches!(self, Ty::Bool | Ty::Bits(_) | Ty::Int | Ty::Enum(_))
    }

    pub fn contains_array(&self) -> bool {
        match self {
            Ty::Array(..) => true,
            Ty::Record(fs) => fs.iter().any(|(_, t)| t.contains_array()),
            Ty::Vector(e, _) => e.contains_array(),
            _ => false,
        }
    }

    /// Why `==` is unavailable on this type, if it is.
    pub fn equality_restriction(&self) -> Option<&'static str> {
        match self {
            Ty::Bool | Ty::Bits(_) | Ty::Int | Ty::Enum(_) => None,
            Ty::Unit => Some("equality on the unit type is not supported"),
            Ty::Vector(..) | Ty::Array(..) => {
                Some("equality on indexed collections is not supported; compare elements at an `any` index instead")
            }
            Ty::Record(fs) => fs.iter().find_map(|(_, t)| t.equality_restriction()),
        }
    }

    /// Scalar leaves in a fixed order. Arrays contribute one array leaf per
    /// scalar leaf of their value type.
    pub fn leaves(&self) -> Vec<Ty> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Ty>) {
        match self {
            Ty::Unit => {}
            Ty::Bool | Ty::Bits(_) | Ty::Int | Ty::Enum(_) => out.push(self.clone()),
            Ty::Record(fs) => fs.iter().for_each(|(_, t)| t.collect_leaves(out)),
            Ty::Vector(e, n) => {
                for _ in 0..*n {
                    e.collect_leaves(out)
                }
            }
            Ty::Array(k, v) => {
                for leaf in v.leaves() {
                    out.push(Ty::Array(k.clone(), Rc::new(leaf)));
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Ty::Unit => 0,
            Ty::Bool | Ty::Bits(_) | Ty::Int | Ty::Enum(_) => 1,
            Ty::Record(fs) => fs.iter().map(|(_, t)| t.leaf_count()).sum(),
            Ty::Vector(e, n) => e.leaf_count() * *n as usize,
            Ty::Array(_, v) => v.leaf_count(),
        }
    }

    /// Total number of bits a scalar-only value of this type carries.
    pub fn bit_size(&self) -> Option<u64> {
        match self {
            Ty::Unit => Some(0),
            Ty::Bool => Some(1),
            Ty::Bits(w) => Some(*w as u64),
            Ty::Enum(e) => Some(e.encoding_width() as u64),
            Ty::Int | Ty::Array(..) => None,
            Ty::Record(fs) => fs.iter().map(|(_, t)| t.bit_size()).sum(),
            Ty::Vector(e, n) => e.bit_size().map(|b| b * n),
        }
    }

    pub fn record(fields: Vec<(String, Ty)>) -> Ty {
        Ty::Record(fields.into())
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Unit => write!(f, "()"),
            Ty::Bool => write!(f, "Bool"),
            Ty::Bits(w) => write!(f, "BitInt({})", w),
            Ty::Int => write!(f, "Int"),
            Ty::Enum(e) => write!(f, "{}", e.name),
            Ty::Record(fs) => {
                write!(f, "{{ ")?;
                for (i, (n, t)) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}: {}", n, t)?;
                }
                write!(f, " }}")
            }
            Ty::Vector(e, n) => write!(f, "[{}; {}]", e, n),
            Ty::Array(k, v) => write!(f, "Array<{}, {}>", k, v),
        }
    }
}
