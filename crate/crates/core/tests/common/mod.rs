//! Random micro-scenarios with few choice bits, and an exhaustive
//! interpreter-based oracle for them.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use soc_core::choice::{ChoiceKey, ChoiceSource};
use soc_core::elaborate::InstanceTree;
use soc_core::eval::{run_scenario, Verdict};
use soc_core::tir::TypedProgram;
use soc_core::types::Ty;
use soc_core::value::{Value, DEFAULT_CAPACITY};

pub const MAX_CHOICE_BITS: u32 = 16;

const PRELUDE: &str = r#"
module Regs {
  instance p: State<BitInt(2)>(1);
  instance q: State<Bool>(false);
}

module Dev {
  instance a: State<BitInt(4)>(0);
  instance f: State<Bool>(false);
  instance v: State<[BitInt(4); 3]>([1, 2, 3]);
  instance m: Array<BitInt(2), BitInt(4)>;
  instance regs: Regs;

  mut fn bump(x: BitInt(4)) -> BitInt(4) {
    if f.get() {
      a.set(a.get() + x)
    } else {
      f.set(true)
    };
    a.get()
  }

  mut fn guard(x: BitInt(4)) -> Bool {
    if x[3 downto 3] == 1u1 {
      f.set(!f.get());
      false
    } else {
      true
    }
  }

  fn mix(x: BitInt(4), y: BitInt(4)) -> BitInt(4) {
    (x ^ y) + zero_extend<4>(x[1 downto 0])
  }
}
"#;

struct Gen {
    rng: ChaCha8Rng,
    bits: u32,
    bv_locals: Vec<String>,
    bool_locals: Vec<String>,
    next: u32,
}

impl Gen {
    fn any_bv(&mut self) -> Option<String> {
        if self.bits + 4 <= MAX_CHOICE_BITS {
            self.bits += 4;
            Some("any<BitInt(4)>".into())
        } else {
            None
        }
    }

    fn idx(&mut self) -> String {
        if self.bits + 2 <= MAX_CHOICE_BITS && self.rng.gen_bool(0.4) {
            self.bits += 2;
            return "any<BitInt(2)>".into();
        }
        match self.rng.gen_range(0..3) {
            0 => format!("{}u2", self.rng.gen_range(0..4)),
            1 => "dev.regs.p.get()".into(),
            _ => {
                let e = self.bv(1);
                format!("({})[2 downto 1]", e)
            }
        }
    }

    fn bv(&mut self, depth: u32) -> String {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            return match self.rng.gen_range(0..6) {
                0 if !self.bv_locals.is_empty() => {
                    let i = self.rng.gen_range(0..self.bv_locals.len());
                    self.bv_locals[i].clone()
                }
                1 => "dev.a.get()".into(),
                2 => self.any_bv().unwrap_or_else(|| "dev.a.get()".into()),
                _ => format!("{}u4", self.rng.gen_range(0..16)),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..11) {
            0 => format!("({} + {})", self.bv(d), self.bv(d)),
            1 => format!("({} - {})", self.bv(d), self.bv(d)),
            2 => format!("({} & {})", self.bv(d), self.bv(d)),
            3 => format!("({} << {})", self.bv(d), self.bv(d)),
            4 => format!("if {} {{ {} }} else {{ {} }}", self.boolean(d), self.bv(d), self.bv(d)),
            5 => format!("dev.bump({})", self.bv(d)),
            6 => format!("dev.v.get()[{}]", self.idx()),
            7 => format!("dev.m.read({})", self.idx()),
            8 => format!("dev.mix({}, {})", self.bv(d), self.bv(d)),
            9 => format!("from_int<4>(to_int({}) * 3)", self.bv(d)),
            _ => format!("zero_extend<4>(({})[3 downto 2])", self.bv(d)),
        }
    }

    fn boolean(&mut self, depth: u32) -> String {
        let leaf = depth == 0 || self.rng.gen_bool(0.25);
        if leaf {
            return match self.rng.gen_range(0..5) {
                0 if !self.bool_locals.is_empty() => {
                    let i = self.rng.gen_range(0..self.bool_locals.len());
                    self.bool_locals[i].clone()
                }
                1 => "dev.f.get()".into(),
                2 => "dev.regs.q.get()".into(),
                3 if self.bits < MAX_CHOICE_BITS => {
                    self.bits += 1;
                    "any<Bool>".into()
                }
                _ => (if self.rng.gen_bool(0.5) { "true" } else { "false" }).into(),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..9) {
            0 => format!("({} == {})", self.bv(d), self.bv(d)),
            1 => format!("({} < {})", self.bv(d), self.bv(d)),
            2 => format!("({} >= {})", self.bv(d), self.bv(d)),
            3 => format!("({} && {})", self.boolean(d), self.boolean(d)),
            4 => format!("({} || {})", self.boolean(d), self.boolean(d)),
            5 => format!("!{}", self.boolean(d)),
            6 => format!("dev.guard({})", self.bv(d)),
            7 => format!("(to_int({}) + 2 > to_int({}))", self.bv(d), self.bv(d)),
            _ => format!("({} != {})", self.boolean(d), self.boolean(d)),
        }
    }

    fn effect(&mut self, depth: u32) -> String {
        match self.rng.gen_range(0..9) {
            0 => format!("dev.a.set({})", self.bv(depth)),
            1 => format!("dev.f.set({})", self.boolean(depth)),
            2 => {
                let i = self.idx();
                format!("dev.v.set(dev.v.get() with [{}] = {})", i, self.bv(depth))
            }
            3 => {
                let i = self.idx();
                format!("dev.v.set(dev.v.get() with [{} ..] = [{}, {}])", i, self.bv(depth), self.bv(depth))
            }
            4 => {
                let i = self.idx();
                format!("dev.m.write({}, {})", i, self.bv(depth))
            }
            5 if self.bits + 3 <= MAX_CHOICE_BITS => {
                self.bits += 3;
                "dev.regs.havoc()".into()
            }
            6 if depth > 0 => format!(
                "if {} {{ {}; }} else {{ {}; }}",
                self.boolean(depth - 1),
                self.effect(depth - 1),
                self.effect(depth - 1)
            ),
            7 => format!("dev.regs.q.set({})", self.boolean(depth)),
            _ => format!("dev.bump({})", self.bv(depth)),
        }
    }
}

/// A well-typed program whose scenario `s` uses at most 16 bits of choices.
pub fn micro_scenario(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        bits: 0,
        bv_locals: Vec::new(),
        bool_locals: Vec::new(),
        next: 0,
    };
    let mut body = Vec::new();
    let n = g.rng.gen_range(3..8);
    for _ in 0..n {
        let stmt = match g.rng.gen_range(0..10) {
            0 | 1 => {
                let name = format!("x{}", g.next);
                g.next += 1;
                let e = g.bv(2);
                g.bv_locals.push(name.clone());
                format!("let {}: BitInt(4) = {};", name, e)
            }
            2 => {
                let name = format!("b{}", g.next);
                g.next += 1;
                let e = g.boolean(2);
                g.bool_locals.push(name.clone());
                format!("let {}: Bool = {};", name, e)
            }
            3 => format!("assume({});", g.boolean(2)),
            4 | 5 => format!("assert({});", g.boolean(2)),
            _ => format!("{};", g.effect(2)),
        };
        body.push(stmt);
    }
    let last = g.boolean(2);
    body.push(format!("assert({})", last));
    format!(
        "{}\nmodule Main {{\n  instance dev: Dev;\n\n  mut fn s() {{\n    {}\n  }}\n}}\n",
        PRELUDE,
        body.join("\n    ")
    )
}

/// Enumerates every execution by treating choices as an odometer over the
/// order in which they are requested.
struct Odometer {
    values: Vec<u128>,
    sizes: Vec<u128>,
    pos: usize,
}

impl ChoiceSource for Odometer {
    fn choose(&mut self, _key: &ChoiceKey, ty: &Ty) -> Value {
        let size: u128 = match ty {
            Ty::Bool => 2,
            Ty::Bits(w) => 1u128 << w,
            Ty::Enum(e) => e.variants.len() as u128,
            other => panic!("cannot enumerate {}", other),
        };
        if self.pos == self.values.len() {
            self.values.push(0);
            self.sizes.push(size);
        }
        let v = self.values[self.pos];
        self.pos += 1;
        match ty {
            Ty::Bool => Value::Bool(v == 1),
            Ty::Bits(w) => Value::bits(*w, v),
            Ty::Enum(e) => Value::Enum(e.clone(), v as u32),
            _ => unreachable!(),
        }
    }
}

pub struct BruteForce {
    pub violated: bool,
    pub executions: u64,
}

pub fn brute_force(tp: &TypedProgram, tree: &InstanceTree, scenario: &str) -> BruteForce {
    let mut o = Odometer {
        values: Vec::new(),
        sizes: Vec::new(),
        pos: 0,
    };
    let mut executions = 0;
    loop {
        o.pos = 0;
        let r = run_scenario(tp, tree, scenario, &mut o, DEFAULT_CAPACITY).expect("micro scenario runs");
        executions += 1;
        if matches!(r.verdict, Verdict::AssertionFailed { .. }) {
            return BruteForce {
                violated: true,
                executions,
            };
        }
        o.values.truncate(o.pos);
        o.sizes.truncate(o.pos);
        loop {
            match o.values.last_mut() {
                None => {
                    return BruteForce {
                        violated: false,
                        executions,
                    }
                }
                Some(v) => {
                    *v += 1;
                    if *v < *o.sizes.last().unwrap() {
                        break;
                    }
                    o.values.pop();
                    o.sizes.pop();
                }
            }
        }
    }
}
