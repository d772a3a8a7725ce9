//! Identities and sources for nondeterministic choices.
//!
//! A choice is named by the chain of call sites that led to it, the static
//! site of the `any` or `havoc`, and the scalar leaf it fills. With no loops
//! and no recursion every such key is produced at most once per run, so the
//! symbolic executor and the interpreter agree on names no matter how paths
//! are merged.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tir::SiteId;
use crate::types::Ty;
use crate::value::{mask, sparse_write, SparseArray, Value};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChoiceKey {
    pub chain: Vec<SiteId>,
    pub site: SiteId,
    pub leaf: u32,
}

impl fmt::Display for ChoiceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.chain {
            write!(f, "{}/", s.0)?;
        }
        write!(f, "{}#{}", self.site.0, self.leaf)
    }
}

/// Supplies a value for each scalar (or array) leaf the program asks for.
pub trait ChoiceSource {
    fn choose(&mut self, key: &ChoiceKey, ty: &Ty) -> Value;
}

/// Choice variables in the order the symbolic executor registered them;
/// the index is the solver-facing id `c<index>`.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    pub entries: Vec<(ChoiceKey, Ty)>,
    index: HashMap<ChoiceKey, u32>,
}

impl Registry {
    pub fn register(&mut self, key: ChoiceKey, ty: Ty) -> u32 {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.entries.len() as u32;
        self.index.insert(key.clone(), id);
        self.entries.push((key, ty));
        id
    }

    pub fn id_of(&self, key: &ChoiceKey) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub struct SeededRandom {
    rng: ChaCha8Rng,
}

impl SeededRandom {
    pub fn new(seed: u64) -> SeededRandom {
        SeededRandom {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn scalar(&mut self, ty: &Ty) -> Value {
        match ty {
            Ty::Bool => Value::Bool(self.rng.gen()),
            Ty::Bits(w) => Value::bits(*w, self.rng.gen::<u128>() & mask(*w)),
            Ty::Int => Value::Int(BigInt::from(self.rng.gen_range(-1000i64..=1000))),
            Ty::Enum(e) => Value::Enum(e.clone(), self.rng.gen_range(0..e.variants.len() as u32)),
            other => panic!("not a choice leaf: {}", other),
        }
    }
}

impl ChoiceSource for SeededRandom {
    fn choose(&mut self, _key: &ChoiceKey, ty: &Ty) -> Value {
        match ty {
            Ty::Array(k, v) => {
                let mut a = SparseArray::new((**k).clone(), (**v).clone(), self.scalar(v));
                for _ in 0..self.rng.gen_range(0..4) {
                    let key = self.scalar(k);
                    let val = self.scalar(v);
                    a = sparse_write(&a, key, val, usize::MAX).expect("unbounded");
                }
                Value::Array(a)
            }
            _ => self.scalar(ty),
        }
    }
}

/// Values from a solver model; anything absent is zero.
#[derive(Clone, Debug, Default)]
pub struct ModelOracle {
    pub values: HashMap<ChoiceKey, Value>,
}

impl ChoiceSource for ModelOracle {
    fn choose(&mut self, key: &ChoiceKey, ty: &Ty) -> Value {
        self.values.get(key).cloned().unwrap_or_else(|| Value::zero(ty))
    }
}

pub enum AnySource {
    SeededRandom(SeededRandom),
    ModelOracle(ModelOracle),
}

impl ChoiceSource for AnySource {
    fn choose(&mut self, key: &ChoiceKey, ty: &Ty) -> Value {
        match self {
            AnySource::SeededRandom(s) => s.choose(key, ty),
            AnySource::ModelOracle(m) => m.choose(key, ty),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_stable() {
        let mut r = Registry::default();
        let k = |s| ChoiceKey { chain: vec![SiteId(1)], site: SiteId(s), leaf: 0 };
        assert_eq!(r.register(k(4), Ty::Bool), 0);
        assert_eq!(r.register(k(2), Ty::Bool), 1);
        assert_eq!(r.register(k(4), Ty::Bool), 0);
        assert_eq!(r.id_of(&k(2)), Some(1));
    }

    #[test]
    fn seeded_random_is_deterministic() {
        let k = ChoiceKey { chain: vec![], site: SiteId(0), leaf: 0 };
        let draw = |seed| {
            let mut s = SeededRandom::new(seed);
            (0..8).map(|_| s.choose(&k, &Ty::Bits(48))).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn oracle_defaults_to_zero() {
        let mut m = ModelOracle::default();
        let k = ChoiceKey { chain: vec![], site: SiteId(3), leaf: 1 };
        assert_eq!(m.choose(&k, &Ty::Bits(5)), Value::bits(5, 0));
    }
}
