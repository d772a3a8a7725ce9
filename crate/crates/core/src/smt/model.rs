//! Reading solver models back into concrete values, and the model file format.

use std::collections::HashMap;
use std::fmt::Write;

use num_bigint::BigInt;

use super::emit::{value_literal, var_name};
use super::sexp::{parse_all, Sexp, SexpError};
use crate::choice::Registry;
use crate::symexec::leaf_sort;
use crate::types::Ty;
use crate::value::{mask, sparse_write, SparseArray, Value};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Syntax(#[from] SexpError),
    #[error("model assigns `{name}` a value `{value}` that is not a `{ty}`")]
    SortMismatch { name: String, value: String, ty: String },
    #[error("model mentions `{0}`, which the scenario never chooses")]
    UnknownVariable(String),
    #[error("cannot interpret model value `{0}`")]
    Unsupported(String),
}

/// A function definition from the model: parameters and body.
struct Def<'a> {
    params: Vec<String>,
    sort: &'a Sexp,
    body: &'a Sexp,
}

fn collect_defs<'a>(e: &'a Sexp, out: &mut HashMap<String, Def<'a>>) {
    let Some(xs) = e.list() else { return };
    if let [Sexp::Atom(h), Sexp::Atom(name), Sexp::List(params), sort, body] = xs {
        if h == "define-fun" {
            let params = params
                .iter()
                .filter_map(|p| p.list().and_then(|p| p.first()).and_then(|n| n.atom()).map(str::to_string))
                .collect();
            out.insert(name.clone(), Def { params, sort, body });
            return;
        }
    }
    for x in xs {
        collect_defs(x, out);
    }
}

/// Substitutes `let` bindings so later stages see plain terms.
fn expand_lets(e: &Sexp, env: &HashMap<String, Sexp>) -> Sexp {
    match e {
        Sexp::Atom(a) => env.get(a).cloned().unwrap_or_else(|| e.clone()),
        Sexp::List(xs) => {
            if let [Sexp::Atom(h), Sexp::List(binds), body] = xs.as_slice() {
                if h == "let" {
                    let mut inner = env.clone();
                    for b in binds {
                        if let Some([Sexp::Atom(n), v]) = b.list() {
                            inner.insert(n.clone(), expand_lets(v, env));
                        }
                    }
                    return expand_lets(body, &inner);
                }
            }
            Sexp::List(xs.iter().map(|x| expand_lets(x, env)).collect())
        }
    }
}

fn scalar(e: &Sexp, ty: &Ty) -> Option<Value> {
    match (e, ty) {
        (Sexp::Atom(a), Ty::Bool) if a == "true" => Some(Value::Bool(true)),
        (Sexp::Atom(a), Ty::Bool) if a == "false" => Some(Value::Bool(false)),
        (_, Ty::Bits(w)) => {
            let (width, v) = bitvector(e)?;
            (width == *w).then(|| Value::bits(width, v))
        }
        (_, Ty::Enum(d)) => {
            let (width, v) = bitvector(e)?;
            (width == d.encoding_width() && v < d.variants.len() as u128).then(|| Value::Enum(d.clone(), v as u32))
        }
        (Sexp::Atom(a), Ty::Int) => a.parse::<BigInt>().ok().map(Value::Int),
        (Sexp::List(xs), Ty::Int) => match xs.as_slice() {
            [Sexp::Atom(m), Sexp::Atom(n)] if m == "-" => n.parse::<BigInt>().ok().map(|n| Value::Int(-n)),
            _ => None,
        },
        _ => None,
    }
}

fn bitvector(e: &Sexp) -> Option<(u32, u128)> {
    match e {
        Sexp::Atom(a) => {
            if let Some(b) = a.strip_prefix("#b") {
                Some((b.len() as u32, u128::from_str_radix(b, 2).ok()?))
            } else if let Some(h) = a.strip_prefix("#x") {
                Some((4 * h.len() as u32, u128::from_str_radix(h, 16).ok()?))
            } else {
                None
            }
        }
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(u), Sexp::Atom(v), Sexp::Atom(w)] if u == "_" && v.starts_with("bv") => {
                let w: u32 = w.parse().ok()?;
                let v: u128 = v[2..].parse().ok()?;
                (w <= 128 && v <= mask(w)).then_some((w, v))
            }
            _ => None,
        },
    }
}

struct ArrayReader<'a> {
    defs: &'a HashMap<String, Def<'a>>,
    key: &'a Ty,
    value: &'a Ty,
}

impl ArrayReader<'_> {
    /// Default value and entries (later entries shadow earlier ones).
    fn read(&self, e: &Sexp, depth: u32) -> Option<(Value, Vec<(Value, Value)>)> {
        if depth > 64 {
            return None;
        }
        let xs = e.list()?;
        match xs {
            [Sexp::List(head), v] if head.first().and_then(Sexp::atom) == Some("as") => {
                matches!(head.get(1).and_then(Sexp::atom), Some("const")).then_some(())?;
                Some((scalar(v, self.value)?, Vec::new()))
            }
            [Sexp::Atom(h), a, k, v] if h == "store" => {
                let (d, mut entries) = self.read(a, depth + 1)?;
                entries.push((scalar(k, self.key)?, scalar(v, self.value)?));
                Some((d, entries))
            }
            [Sexp::Atom(u), Sexp::Atom(a), Sexp::Atom(f)] if u == "_" && a == "as-array" => {
                let def = self.defs.get(f)?;
                let [param] = def.params.as_slice() else { return None };
                self.function(param, def.body, depth + 1)
            }
            [Sexp::Atom(l), Sexp::List(params), body] if l == "lambda" => {
                let [p] = params.as_slice() else { return None };
                let param = p.list()?.first()?.atom()?;
                self.function(param, body, depth + 1)
            }
            _ => None,
        }
    }

    /// An `ite` chain over equalities with the parameter.
    fn function(&self, param: &str, body: &Sexp, depth: u32) -> Option<(Value, Vec<(Value, Value)>)> {
        let mut entries = Vec::new();
        let mut cur = body;
        loop {
            match cur.list() {
                Some([Sexp::Atom(i), cond, then, els]) if i == "ite" => {
                    let k = match cond.list()? {
                        [Sexp::Atom(eq), Sexp::Atom(x), k] if eq == "=" && x == param => k,
                        [Sexp::Atom(eq), k, Sexp::Atom(x)] if eq == "=" && x == param => k,
                        _ => return None,
                    };
                    entries.push((scalar(k, self.key)?, scalar(then, self.value)?));
                    cur = els;
                }
                _ => break,
            }
        }
        // the first matching branch wins, so it must be applied last
        entries.reverse();
        if let Some(d) = scalar(cur, self.value) {
            return Some((d, entries));
        }
        let (d, mut inner) = self.read(cur, depth + 1)?;
        inner.extend(entries);
        Some((d, inner))
    }
}

fn array(defs: &HashMap<String, Def<'_>>, e: &Sexp, key: &Ty, value: &Ty) -> Option<Value> {
    let reader = ArrayReader { defs, key, value };
    let (d, entries) = reader.read(e, 0)?;
    let mut a = SparseArray::new(key.clone(), value.clone(), d);
    for (k, v) in entries {
        a = sparse_write(&a, k, v, usize::MAX).ok()?;
    }
    Some(Value::Array(a))
}

/// Reads every `c<id>` definition in solver output (or a saved model file).
pub fn parse_model(text: &str, registry: &Registry) -> Result<HashMap<u32, Value>, ModelError> {
    let exprs = parse_all(text)?;
    let mut defs = HashMap::new();
    for e in &exprs {
        collect_defs(e, &mut defs);
    }
    let mut out = HashMap::new();
    for (name, def) in &defs {
        let Some(id) = name.strip_prefix('c').and_then(|n| n.parse::<u32>().ok()) else {
            continue;
        };
        if !def.params.is_empty() {
            continue;
        }
        let Some((_, ty)) = registry.entries.get(id as usize) else {
            return Err(ModelError::UnknownVariable(name.clone()));
        };
        let body = expand_lets(def.body, &HashMap::new());
        let mismatch = || ModelError::SortMismatch {
            name: name.clone(),
            value: body.to_string(),
            ty: ty.to_string(),
        };
        if def.sort.to_string() != leaf_sort(ty).to_string() {
            return Err(mismatch());
        }
        let v = match ty {
            Ty::Array(k, v) => array(&defs, &body, k, v),
            _ => scalar(&body, ty),
        };
        match v {
            Some(v) => {
                out.insert(id, v);
            }
            None if bitvector(&body).is_some() || body.atom().is_some() => return Err(mismatch()),
            None => return Err(ModelError::Unsupported(body.to_string())),
        }
    }
    Ok(out)
}

/// Canonical model file text, ordered by variable id.
pub fn write_model(registry: &Registry, values: &HashMap<u32, Value>) -> String {
    let mut ids: Vec<_> = values.keys().copied().collect();
    ids.sort_unstable();
    let mut out = String::from("(model\n");
    for id in ids {
        let (key, ty) = &registry.entries[id as usize];
        let sort = leaf_sort(ty);
        let _ = writeln!(
            out,
            "  ; {}\n  (define-fun {} () {} {})",
            key,
            var_name(id),
            sort,
            value_literal(&values[&id], &sort)
        );
    }
    out.push_str(")\n");
    out
}
