//! Bidirectional type checking with exact bit-width tracking.
//!
//! Checking mode pushes an expected type into an expression (this is how
//! unsuffixed literals get their width); inference mode synthesises a type.
//! Subsumption is plain type equality: there are no implicit conversions.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use num_bigint::BigInt;

use crate::ast::{self, BinOp, Expr, ExprKind, FmtPiece, Span, Stmt, TypeExpr, TypeKind, UnOp};
use crate::diag::{Diagnostic, Diagnostics};
use crate::lexer::MAX_WIDTH;
use crate::tir::*;
use crate::types::{bits_for, EnumDef, Ty};

/// Longest vector the checker accepts.
pub const MAX_VECTOR_LEN: u64 = 4096;

type TcResult<T> = Result<T, Diagnostic>;

/// Type checks a parsed program.
pub fn check_program(p: &ast::Program) -> Result<TypedProgram, Diagnostics> {
    let mut cx = Checker::new(p);
    cx.run();
    if cx.errors.is_empty() {
        Ok(cx.finish())
    } else {
        cx.errors.sort_by_key(|d| (d.span.start, d.span.end));
        Err(Diagnostics(cx.errors))
    }
}

enum NamedType {
    Alias(usize),
    Enum(Rc<EnumDef>),
}

struct Checker<'p> {
    prog: &'p ast::Program,
    errors: Vec<Diagnostic>,
    names: HashMap<String, NamedType>,
    alias_cache: HashMap<usize, Ty>,
    alias_stack: Vec<usize>,
    enums: Vec<Rc<EnumDef>>,
    module_ids: HashMap<String, ModId>,
    modules: Vec<ModDef>,
    functions: Vec<Option<FnDef>>,
    fn_sigs: Vec<FnSig>,
    fn_index: HashMap<(ModId, String), FnId>,
    sites: Vec<SiteInfo>,
    call_graph: Vec<Vec<(FnId, Span)>>,
    root: Option<ModId>,
}

#[derive(Clone)]
struct FnSig {
    name: String,
    module: ModId,
    is_mut: bool,
    params: Vec<(String, Ty)>,
    ret: Ty,
    span: Span,
}

/// Where an expression is being checked.
struct FnCtx {
    module: ModId,
    func: Option<FnId>,
    is_mut: bool,
    /// Root-module code may descend freely through the instance tree.
    deep: bool,
    /// Initial-value expressions: no calls, no instance access, no choices.
    closed: bool,
    scopes: Vec<Vec<(String, LocalId)>>,
    locals: Vec<(String, Ty)>,
    calls: Vec<(FnId, Span)>,
}

impl FnCtx {
    fn lookup(&self, name: &str) -> Option<LocalId> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, id)| *id)
    }

    fn bind(&mut self, name: &str, ty: Ty) -> LocalId {
        let id = LocalId(self.locals.len() as u32);
        self.locals.push((name.to_string(), ty));
        self.scopes
            .last_mut()
            .expect("scope")
            .push((name.to_string(), id));
        id
    }
}

/// What a dotted call path resolved to.
enum Target {
    Module(ModId),
    State(Ty),
    Array(Ty, Ty),
}

fn err<T>(span: Span, msg: impl Into<String>) -> TcResult<T> {
    Err(Diagnostic::new(span, msg))
}

fn mismatch(span: Span, expected: &Ty, found: &Ty) -> Diagnostic {
    Diagnostic::new(
        span,
        format!("type mismatch: expected `{}`, found `{}`", expected, found),
    )
}

fn is_arith(op: BinOp) -> bool {
    matches!(
        op,
        BinOp::Add
            | BinOp::Sub
            | BinOp::Mul
            | BinOp::BitAnd
            | BinOp::BitOr
            | BinOp::BitXor
            | BinOp::Shl
            | BinOp::Shr
    )
}

fn is_order(op: BinOp) -> bool {
    matches!(op, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
}

/// True if the expression's type can only come from context (an unsuffixed
/// literal, possibly under arithmetic or a conditional).
fn needs_context(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Int { width: None, .. } => true,
        ExprKind::Unary(UnOp::Neg, x) => needs_context(x),
        ExprKind::Binary(op, a, b) if is_arith(*op) => needs_context(a) && needs_context(b),
        ExprKind::If { then, els: Some(e), .. } => needs_context(then) && needs_context(e),
        ExprKind::Block { tail: Some(t), .. } => needs_context(t),
        ExprKind::Vector(items) => !items.is_empty() && items.iter().all(needs_context),
        ExprKind::Repeat(x, _) => needs_context(x),
        _ => false,
    }
}

const BUILTINS: [&str; 4] = ["zero_extend", "truncate", "to_int", "from_int"];

impl<'p> Checker<'p> {
    fn new(prog: &'p ast::Program) -> Checker<'p> {
        Checker {
            prog,
            errors: Vec::new(),
            names: HashMap::new(),
            alias_cache: HashMap::new(),
            alias_stack: Vec::new(),
            enums: Vec::new(),
            module_ids: HashMap::new(),
            modules: Vec::new(),
            functions: Vec::new(),
            fn_sigs: Vec::new(),
            fn_index: HashMap::new(),
            sites: Vec::new(),
            call_graph: Vec::new(),
            root: None,
        }
    }

    fn report(&mut self, r: TcResult<()>) {
        if let Err(d) = r {
            self.errors.push(d);
        }
    }

    fn run(&mut self) {
        self.collect_type_names();
        for i in 0..self.prog.aliases.len() {
            let r = self.alias_type(i).map(|_| ());
            self.report(r);
        }
        self.collect_modules();
        if !self.errors.is_empty() {
            return;
        }
        self.check_instance_cycles();
        self.collect_signatures();
        self.check_init_values();
        self.check_bodies();
        self.check_recursion();
    }

    fn finish(self) -> TypedProgram {
        TypedProgram {
            program: self.prog.clone(),
            enums: self.enums,
            modules: self.modules,
            functions: self.functions.into_iter().map(|f| f.expect("body")).collect(),
            sites: self.sites,
            root: self.root.expect("root"),
            call_graph: self
                .call_graph
                .into_iter()
                .map(|edges| {
                    let mut v: Vec<FnId> = edges.into_iter().map(|(f, _)| f).collect();
                    v.sort();
                    v.dedup();
                    v
                })
                .collect(),
            fn_index: self.fn_index,
        }
    }

    // ---- types ----------------------------------------------------------

    fn collect_type_names(&mut self) {
        for (i, a) in self.prog.aliases.iter().enumerate() {
            if self.names.contains_key(&a.name.name) {
                self.errors.push(Diagnostic::new(
                    a.name.span,
                    format!("type `{}` is defined more than once", a.name),
                ));
                continue;
            }
            self.names.insert(a.name.name.clone(), NamedType::Alias(i));
        }
        for e in &self.prog.enums {
            if self.names.contains_key(&e.name.name) {
                self.errors.push(Diagnostic::new(
                    e.name.span,
                    format!("type `{}` is defined more than once", e.name),
                ));
                continue;
            }
            let mut seen = HashSet::new();
            for v in &e.variants {
                if !seen.insert(v.name.as_str()) {
                    self.errors.push(Diagnostic::new(
                        v.span,
                        format!("duplicate variant `{}` in enum `{}`", v, e.name),
                    ));
                }
            }
            if e.variants.is_empty() {
                self.errors.push(Diagnostic::new(
                    e.span,
                    format!("enum `{}` has no variants", e.name),
                ));
            }
            let def = Rc::new(EnumDef {
                name: e.name.name.clone(),
                variants: e.variants.iter().map(|v| v.name.clone()).collect(),
            });
            self.enums.push(def.clone());
            self.names.insert(e.name.name.clone(), NamedType::Enum(def));
        }
    }

    fn alias_type(&mut self, i: usize) -> TcResult<Ty> {
        if let Some(t) = self.alias_cache.get(&i) {
            return Ok(t.clone());
        }
        let a = &self.prog.aliases[i];
        if self.alias_stack.contains(&i) {
            return err(a.name.span, format!("type alias `{}` refers to itself", a.name));
        }
        self.alias_stack.push(i);
        let r = self.resolve_type(&a.ty);
        self.alias_stack.pop();
        let t = r?;
        self.alias_cache.insert(i, t.clone());
        Ok(t)
    }

    fn resolve_type(&mut self, t: &TypeExpr) -> TcResult<Ty> {
        Ok(match &t.kind {
            TypeKind::Unit => Ty::Unit,
            TypeKind::Bool => Ty::Bool,
            TypeKind::Int => Ty::Int,
            TypeKind::BitInt(w) => {
                if *w == 0 || *w > MAX_WIDTH {
                    return err(t.span, format!("bit width must be between 1 and {}", MAX_WIDTH));
                }
                Ty::Bits(*w)
            }
            TypeKind::Named(n) => match self.names.get(n) {
                Some(NamedType::Enum(e)) => Ty::Enum(e.clone()),
                Some(NamedType::Alias(i)) => {
                    let i = *i;
                    self.alias_type(i)?
                }
                None => return err(t.span, format!("unknown type `{}`", n)),
            },
            TypeKind::Vector(e, n) => {
                if *n > MAX_VECTOR_LEN {
                    return err(t.span, format!("vector length exceeds {}", MAX_VECTOR_LEN));
                }
                let e = self.resolve_type(e)?;
                if e.contains_array() {
                    return err(t.span, "array snapshots cannot be nested inside vectors");
                }
                if e == Ty::Unit {
                    return err(t.span, "vectors of `()` are not supported");
                }
                Ty::Vector(Rc::new(e), *n)
            }
            TypeKind::Record(fields) => {
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                for (n, ft) in fields {
                    if !seen.insert(n.name.as_str()) {
                        return err(n.span, format!("duplicate field `{}`", n));
                    }
                    let ft = self.resolve_type(ft)?;
                    if ft.contains_array() {
                        return err(n.span, "array snapshots cannot be record fields");
                    }
                    if ft == Ty::Unit {
                        return err(n.span, "record fields cannot have type `()`");
                    }
                    out.push((n.name.clone(), ft));
                }
                if out.is_empty() {
                    return err(t.span, "records need at least one field");
                }
                Ty::record(out)
            }
            TypeKind::ArrayOf(k, v) => {
                let kt = self.resolve_type(k)?;
                let vt = self.resolve_type(v)?;
                self.array_types_ok(&kt, &vt, t.span)?;
                Ty::Array(Rc::new(kt), Rc::new(vt))
            }
        })
    }

    fn array_types_ok(&self, k: &Ty, v: &Ty, span: Span) -> TcResult<()> {
        if !matches!(k, Ty::Bool | Ty::Bits(_) | Ty::Enum(_)) {
            return err(span, format!("array keys must be Bool, BitInt or enum, not `{}`", k));
        }
        // Enum values would need a quantified range constraint after havoc.
        if !matches!(v, Ty::Bool | Ty::Bits(_) | Ty::Int) {
            return err(span, format!("array values must be Bool, BitInt or Int, not `{}`", v));
        }
        Ok(())
    }

    // ---- modules --------------------------------------------------------

    fn collect_modules(&mut self) {
        for m in &self.prog.modules {
            if self.module_ids.contains_key(&m.name.name) {
                self.errors.push(Diagnostic::new(
                    m.name.span,
                    format!("module `{}` is defined more than once", m.name),
                ));
                continue;
            }
            let id = ModId(self.modules.len() as u32);
            self.module_ids.insert(m.name.name.clone(), id);
            self.modules.push(ModDef {
                name: m.name.name.clone(),
                instances: Vec::new(),
                callees: Vec::new(),
                wirings: m.wirings.clone(),
                functions: Vec::new(),
                span: m.span,
            });
        }
        match self.module_ids.get(&self.prog.root) {
            Some(id) => self.root = Some(*id),
            None => self.errors.push(Diagnostic::new(
                Span::synthetic(),
                format!("no root module `{}`", self.prog.root),
            )),
        }
        for (mi, m) in self.prog.modules.iter().enumerate() {
            if self.module_ids.get(&m.name.name) != Some(&ModId(mi as u32)) {
                continue;
            }
            let mut names: HashSet<&str> = HashSet::new();
            let mut insts = Vec::new();
            for inst in &m.instances {
                if !names.insert(&inst.name.name) {
                    self.errors.push(Diagnostic::new(
                        inst.name.span,
                        format!("`{}` is declared more than once in module `{}`", inst.name, m.name),
                    ));
                    continue;
                }
                let kind = match &inst.kind {
                    ast::InstanceKind::Module(mname) => match self.module_ids.get(&mname.name) {
                        Some(id) => InstKind::Module(*id),
                        None => {
                            self.errors.push(Diagnostic::new(
                                mname.span,
                                format!("unknown module `{}`", mname),
                            ));
                            continue;
                        }
                    },
                    ast::InstanceKind::State { ty, .. } => match self.resolve_type(ty) {
                        Ok(t) if t == Ty::Unit => {
                            self.errors.push(Diagnostic::new(ty.span, "State<()> holds nothing"));
                            continue;
                        }
                        Ok(t) if t.contains_array() => {
                            self.errors.push(Diagnostic::new(
                                ty.span,
                                "use the primitive Array module for array state",
                            ));
                            continue;
                        }
                        Ok(t) => InstKind::State {
                            ty: t,
                            init: TExpr::unit(Span::synthetic()),
                        },
                        Err(d) => {
                            self.errors.push(d);
                            continue;
                        }
                    },
                    ast::InstanceKind::Array { key, value } => {
                        let r = self.resolve_type(key).and_then(|k| {
                            let v = self.resolve_type(value)?;
                            self.array_types_ok(&k, &v, inst.span)?;
                            Ok((k, v))
                        });
                        match r {
                            Ok((key, value)) => InstKind::Array { key, value },
                            Err(d) => {
                                self.errors.push(d);
                                continue;
                            }
                        }
                    }
                };
                insts.push(InstDef {
                    name: inst.name.name.clone(),
                    kind,
                    span: inst.span,
                });
            }
            let mut callees = Vec::new();
            for c in &m.callees {
                if !names.insert(&c.name.name) {
                    self.errors.push(Diagnostic::new(
                        c.name.span,
                        format!("`{}` is declared more than once in module `{}`", c.name, m.name),
                    ));
                    continue;
                }
                match self.module_ids.get(&c.module.name) {
                    Some(id) => callees.push(CalleeDef {
                        name: c.name.name.clone(),
                        module: *id,
                        span: c.span,
                    }),
                    None => self.errors.push(Diagnostic::new(
                        c.module.span,
                        format!("unknown module `{}`", c.module),
                    )),
                }
            }
            self.modules[mi].instances = insts;
            self.modules[mi].callees = callees;
        }
    }

    fn check_instance_cycles(&mut self) {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(cx: &mut Checker, m: usize, state: &mut Vec<u8>) -> bool {
            if state[m] == 1 {
                return false;
            }
            if state[m] == 2 {
                return true;
            }
            state[m] = 1;
            let children: Vec<(usize, Span)> = cx.modules[m]
                .instances
                .iter()
                .filter_map(|i| match i.kind {
                    InstKind::Module(c) => Some((c.0 as usize, i.span)),
                    _ => None,
                })
                .collect();
            for (c, span) in children {
                if !visit(cx, c, state) {
                    if state[m] == 1 {
                        cx.errors.push(Diagnostic::new(
                            span,
                            format!("module `{}` (transitively) instantiates itself", cx.modules[m].name),
                        ));
                    }
                    state[m] = 2;
                    return false;
                }
            }
            state[m] = 2;
            true
        }
        let mut state = vec![0u8; self.modules.len()];
        for m in 0..self.modules.len() {
            visit(self, m, &mut state);
        }
    }

    fn collect_signatures(&mut self) {
        for (mi, m) in self.prog.modules.iter().enumerate() {
            let mid = ModId(mi as u32);
            if self.module_ids.get(&m.name.name) != Some(&mid) {
                continue;
            }
            let member_names: HashSet<String> = self.modules[mi]
                .instances
                .iter()
                .map(|i| i.name.clone())
                .chain(self.modules[mi].callees.iter().map(|c| c.name.clone()))
                .collect();
            for f in &m.functions {
                if self.fn_index.contains_key(&(mid, f.name.name.clone()))
                    || member_names.contains(&f.name.name)
                {
                    self.errors.push(Diagnostic::new(
                        f.name.span,
                        format!("`{}` is declared more than once in module `{}`", f.name, m.name),
                    ));
                    continue;
                }
                let mut params = Vec::new();
                let mut ok = true;
                let mut seen = HashSet::new();
                for p in &f.params {
                    if !seen.insert(p.name.name.as_str()) {
                        self.errors.push(Diagnostic::new(
                            p.name.span,
                            format!("duplicate parameter `{}`", p.name),
                        ));
                        ok = false;
                    }
                    match self.resolve_type(&p.ty) {
                        Ok(t) => params.push((p.name.name.clone(), t)),
                        Err(d) => {
                            self.errors.push(d);
                            ok = false;
                        }
                    }
                }
                let ret = match &f.ret {
                    None => Ty::Unit,
                    Some(t) => match self.resolve_type(t) {
                        Ok(t) => t,
                        Err(d) => {
                            self.errors.push(d);
                            ok = false;
                            Ty::Unit
                        }
                    },
                };
                if !ok {
                    continue;
                }
                let id = FnId(self.fn_sigs.len() as u32);
                self.fn_sigs.push(FnSig {
                    name: f.name.name.clone(),
                    module: mid,
                    is_mut: f.is_mut,
                    params,
                    ret,
                    span: f.span,
                });
                self.functions.push(None);
                self.call_graph.push(Vec::new());
                self.fn_index.insert((mid, f.name.name.clone()), id);
                self.modules[mi].functions.push(id);
            }
        }
    }

    fn check_init_values(&mut self) {
        for (mi, m) in self.prog.modules.iter().enumerate() {
            let mid = ModId(mi as u32);
            if self.module_ids.get(&m.name.name) != Some(&mid) {
                continue;
            }
            for inst in &m.instances {
                let ast::InstanceKind::State { init, .. } = &inst.kind else {
                    continue;
                };
                let Some(pos) = self.modules[mi]
                    .instances
                    .iter()
                    .position(|i| i.name == inst.name.name && matches!(i.kind, InstKind::State { .. }))
                else {
                    continue;
                };
                let InstKind::State { ty, .. } = &self.modules[mi].instances[pos].kind else {
                    continue;
                };
                let ty = ty.clone();
                let mut ctx = FnCtx {
                    module: mid,
                    func: None,
                    is_mut: false,
                    deep: false,
                    closed: true,
                    scopes: vec![Vec::new()],
                    locals: Vec::new(),
                    calls: Vec::new(),
                };
                match self.check_expr(&mut ctx, init, &ty) {
                    Ok(te) => {
                        if let InstKind::State { init, .. } = &mut self.modules[mi].instances[pos].kind {
                            *init = te;
                        }
                    }
                    Err(d) => self.errors.push(d),
                }
            }
        }
    }

    fn check_bodies(&mut self) {
        for (mi, m) in self.prog.modules.iter().enumerate() {
            let mid = ModId(mi as u32);
            for f in &m.functions {
                let Some(&fid) = self.fn_index.get(&(mid, f.name.name.clone())) else {
                    continue;
                };
                if self.functions[fid.0 as usize].is_some() {
                    continue;
                }
                let sig = self.fn_sigs[fid.0 as usize].clone();
                if sig.span.start != f.span.start {
                    continue;
                }
                let mut ctx = FnCtx {
                    module: mid,
                    func: Some(fid),
                    is_mut: sig.is_mut,
                    deep: Some(mid) == self.root,
                    closed: false,
                    scopes: vec![Vec::new()],
                    locals: Vec::new(),
                    calls: Vec::new(),
                };
                for (n, t) in &sig.params {
                    ctx.bind(n, t.clone());
                }
                match self.check_expr(&mut ctx, &f.body, &sig.ret) {
                    Ok(body) => {
                        self.call_graph[fid.0 as usize] = std::mem::take(&mut ctx.calls);
                        self.functions[fid.0 as usize] = Some(FnDef {
                            name: sig.name.clone(),
                            module: mid,
                            is_mut: sig.is_mut,
                            params: sig.params.clone(),
                            ret: sig.ret.clone(),
                            locals: ctx.locals,
                            body,
                            span: sig.span,
                        });
                    }
                    Err(d) => self.errors.push(d),
                }
            }
        }
    }

    fn check_recursion(&mut self) {
        let n = self.call_graph.len();
        let mut state = vec![0u8; n];
        let mut reported = false;
        fn dfs(
            f: usize,
            graph: &[Vec<(FnId, Span)>],
            state: &mut Vec<u8>,
            stack: &mut Vec<(usize, Span)>,
        ) -> Option<(usize, Span)> {
            state[f] = 1;
            for &(g, span) in &graph[f] {
                let g = g.0 as usize;
                if state[g] == 1 {
                    return Some((g, span));
                }
                if state[g] == 0 {
                    stack.push((g, span));
                    if let Some(c) = dfs(g, graph, state, stack) {
                        return Some(c);
                    }
                    stack.pop();
                }
            }
            state[f] = 2;
            None
        }
        for f in 0..n {
            if state[f] != 0 || reported {
                continue;
            }
            let mut stack = Vec::new();
            if let Some((target, span)) = dfs(f, &self.call_graph, &mut state, &mut stack) {
                let name = &self.fn_sigs[target].name;
                let module = &self.modules[self.fn_sigs[target].module.0 as usize].name;
                self.errors.push(Diagnostic::new(
                    span,
                    format!("recursion is not supported: call cycle through `{}.{}`", module, name),
                ));
                reported = true;
            }
        }
    }

    fn new_site(&mut self, kind: SiteKind, span: Span, ctx: &FnCtx) -> SiteId {
        let id = SiteId(self.sites.len() as u32);
        self.sites.push(SiteInfo {
            kind,
            span,
            func: ctx.func,
        });
        id
    }

    // ---- expressions ----------------------------------------------------

    fn texpr(kind: TExprKind, ty: Ty, span: Span) -> TExpr {
        TExpr { kind, ty, span }
    }

    /// Checks `e` against `expected`.
    pub(crate) fn check_expr(&mut self, ctx: &mut FnCtx, e: &Expr, expected: &Ty) -> TcResult<TExpr> {
        let span = e.span;
        match &e.kind {
            ExprKind::Int { value, width: None } => match expected {
                Ty::Bits(w) => {
                    if *w < 128 && value >> w != 0 {
                        return err(span, format!("literal {} does not fit in BitInt({})", value, w));
                    }
                    Ok(Self::texpr(TExprKind::Bits(*value), expected.clone(), span))
                }
                Ty::Int => Ok(Self::texpr(TExprKind::Int(BigInt::from(*value)), Ty::Int, span)),
                other => err(span, format!("type mismatch: expected `{}`, found integer literal", other)),
            },
            ExprKind::If { cond, then, els } => {
                let c = self.check_expr(ctx, cond, &Ty::Bool)?;
                let t = self.check_expr(ctx, then, expected)?;
                let f = match els {
                    Some(e) => self.check_expr(ctx, e, expected)?,
                    None => {
                        if *expected != Ty::Unit {
                            return err(
                                span,
                                format!("`if` without `else` has type `()`, but `{}` is expected", expected),
                            );
                        }
                        TExpr::unit(span)
                    }
                };
                Ok(Self::texpr(
                    TExprKind::If(Box::new(c), Box::new(t), Box::new(f)),
                    expected.clone(),
                    span,
                ))
            }
            ExprKind::Block { stmts, tail } => self.block(ctx, stmts, tail.as_deref(), Some(expected), span),
            ExprKind::Record(fields) => {
                let Ty::Record(decl) = expected else {
                    return err(span, format!("type mismatch: expected `{}`, found record literal", expected));
                };
                let decl = decl.clone();
                let mut seen = HashSet::new();
                for (n, _) in fields {
                    if !seen.insert(n.name.as_str()) {
                        return err(n.span, format!("field `{}` given more than once", n));
                    }
                    if !decl.iter().any(|(d, _)| *d == n.name) {
                        return err(n.span, format!("unknown field `{}` for record type `{}`", n, expected));
                    }
                }
                let missing: Vec<&str> = decl
                    .iter()
                    .filter(|(d, _)| !fields.iter().any(|(n, _)| n.name == *d))
                    .map(|(d, _)| d.as_str())
                    .collect();
                if !missing.is_empty() {
                    return err(
                        span,
                        format!(
                            "record literal of type `{}` is missing field(s): {}",
                            expected,
                            missing.iter().map(|m| format!("`{}`", m)).collect::<Vec<_>>().join(", ")
                        ),
                    );
                }
                let mut out = Vec::new();
                for (d, dt) in decl.iter() {
                    let (_, fe) = fields.iter().find(|(n, _)| n.name == *d).expect("present");
                    out.push(self.check_expr(ctx, fe, dt)?);
                }
                Ok(Self::texpr(TExprKind::Record(out), expected.clone(), span))
            }
            ExprKind::Vector(items) => {
                let Ty::Vector(elem, n) = expected else {
                    return err(span, format!("type mismatch: expected `{}`, found vector literal", expected));
                };
                if items.len() as u64 != *n {
                    return err(
                        span,
                        format!("vector literal has {} elements, but `{}` is expected", items.len(), expected),
                    );
                }
                let elem = elem.clone();
                let out = items
                    .iter()
                    .map(|i| self.check_expr(ctx, i, &elem))
                    .collect::<TcResult<Vec<_>>>()?;
                Ok(Self::texpr(TExprKind::Vector(out), expected.clone(), span))
            }
            ExprKind::Repeat(item, len) => {
                let Ty::Vector(elem, n) = expected else {
                    return err(span, format!("type mismatch: expected `{}`, found vector literal", expected));
                };
                if len != n {
                    return err(span, format!("vector literal has {} elements, but `{}` is expected", len, expected));
                }
                let elem = elem.clone();
                let x = self.check_expr(ctx, item, &elem)?;
                Ok(Self::texpr(TExprKind::Repeat(Box::new(x), *len), expected.clone(), span))
            }
            ExprKind::Binary(op, a, b) if is_arith(*op) && matches!(expected, Ty::Bits(_) | Ty::Int) => {
                if expected == &Ty::Int && matches!(op, BinOp::BitAnd | BinOp::BitOr | BinOp::BitXor | BinOp::Shl | BinOp::Shr) {
                    return err(span, format!("operator `{}` is not defined on `Int`", op.symbol()));
                }
                let l = self.check_expr(ctx, a, expected)?;
                let r = self.check_expr(ctx, b, expected)?;
                Ok(Self::texpr(TExprKind::Binary(*op, Box::new(l), Box::new(r)), expected.clone(), span))
            }
            ExprKind::Unary(op, x) if matches!(expected, Ty::Bits(_) | Ty::Int) => {
                if *op == UnOp::Not && *expected == Ty::Int {
                    return err(span, "operator `!` is not defined on `Int`");
                }
                let x = self.check_expr(ctx, x, expected)?;
                Ok(Self::texpr(TExprKind::Unary(*op, Box::new(x)), expected.clone(), span))
            }
            _ => {
                let te = self.infer_expr(ctx, e)?;
                if te.ty != *expected {
                    return Err(mismatch(span, expected, &te.ty));
                }
                Ok(te)
            }
        }
    }

    /// Synthesises a type for `e`.
    pub(crate) fn infer_expr(&mut self, ctx: &mut FnCtx, e: &Expr) -> TcResult<TExpr> {
        let span = e.span;
        match &e.kind {
            ExprKind::Unit => Ok(TExpr::unit(span)),
            ExprKind::Bool(b) => Ok(Self::texpr(TExprKind::Bool(*b), Ty::Bool, span)),
            ExprKind::Int { value, width: Some(w) } => Ok(Self::texpr(TExprKind::Bits(*value), Ty::Bits(*w), span)),
            ExprKind::Int { width: None, .. } => err(
                span,
                "cannot infer width of integer literal; add a `u<N>` suffix or a type annotation",
            ),
            ExprKind::Var(id) => {
                if let Some(local) = ctx.lookup(&id.name) {
                    let ty = ctx.locals[local.0 as usize].1.clone();
                    return Ok(Self::texpr(TExprKind::Local(local), ty, span));
                }
                let m = &self.modules[ctx.module.0 as usize];
                if m.instance(&id.name).is_some() || m.callee(&id.name).is_some() {
                    return err(span, format!("`{}` is an instance, not a value; call one of its functions", id));
                }
                err(span, format!("unknown name `{}`", id))
            }
            ExprKind::Variant { enum_name, variant } => match self.names.get(&enum_name.name) {
                Some(NamedType::Enum(def)) => {
                    let def = def.clone();
                    match def.variant_index(&variant.name) {
                        Some(i) => Ok(Self::texpr(TExprKind::Variant(i), Ty::Enum(def), span)),
                        None => err(variant.span, format!("enum `{}` has no variant `{}`", enum_name, variant)),
                    }
                }
                _ => err(enum_name.span, format!("unknown enum `{}`", enum_name)),
            },
            ExprKind::Record(fields) => {
                let mut seen = HashSet::new();
                let mut tys = Vec::new();
                let mut out = Vec::new();
                for (n, fe) in fields {
                    if !seen.insert(n.name.as_str()) {
                        return err(n.span, format!("field `{}` given more than once", n));
                    }
                    let te = self.infer_expr(ctx, fe)?;
                    tys.push((n.name.clone(), te.ty.clone()));
                    out.push(te);
                }
                Ok(Self::texpr(TExprKind::Record(out), Ty::record(tys), span))
            }
            ExprKind::Vector(items) => {
                if items.is_empty() {
                    return err(span, "cannot infer the element type of an empty vector");
                }
                let first_idx = items.iter().position(|i| !needs_context(i)).unwrap_or(0);
                let first = self.infer_expr(ctx, &items[first_idx])?;
                let elem = first.ty.clone();
                if elem.contains_array() {
                    return err(span, "array snapshots cannot be nested inside vectors");
                }
                let mut out = Vec::new();
                for (i, it) in items.iter().enumerate() {
                    if i == first_idx {
                        out.push(first.clone());
                    } else {
                        out.push(self.check_expr(ctx, it, &elem)?);
                    }
                }
                let n = out.len() as u64;
                Ok(Self::texpr(TExprKind::Vector(out), Ty::Vector(Rc::new(elem), n), span))
            }
            ExprKind::Repeat(item, n) => {
                if *n > MAX_VECTOR_LEN {
                    return err(span, format!("vector length exceeds {}", MAX_VECTOR_LEN));
                }
                let x = self.infer_expr(ctx, item)?;
                if x.ty.contains_array() {
                    return err(span, "array snapshots cannot be nested inside vectors");
                }
                let ty = Ty::Vector(Rc::new(x.ty.clone()), *n);
                Ok(Self::texpr(TExprKind::Repeat(Box::new(x), *n), ty, span))
            }
            ExprKind::Field(base, f) => {
                let b = self.infer_expr(ctx, base)?;
                let Ty::Record(fields) = &b.ty else {
                    return err(f.span, format!("type `{}` has no field `{}`", b.ty, f));
                };
                let Some(idx) = fields.iter().position(|(n, _)| *n == f.name) else {
                    return err(f.span, format!("unknown record field `{}` on type `{}`", f, b.ty));
                };
                let ty = fields[idx].1.clone();
                Ok(Self::texpr(TExprKind::Field(Box::new(b), idx), ty, span))
            }
            ExprKind::Index(base, index) => {
                let b = self.infer_expr(ctx, base)?;
                match b.ty.clone() {
                    Ty::Vector(elem, n) => {
                        let i = self.index_expr(ctx, index, n)?;
                        Ok(Self::texpr(TExprKind::Index(Box::new(b), Box::new(i)), (*elem).clone(), span))
                    }
                    Ty::Array(k, v) => {
                        let i = self.check_expr(ctx, index, &k)?;
                        Ok(Self::texpr(TExprKind::Index(Box::new(b), Box::new(i)), (*v).clone(), span))
                    }
                    other => err(span, format!("type `{}` cannot be indexed", other)),
                }
            }
            ExprKind::Update { base, index, value } => {
                let b = self.infer_expr(ctx, base)?;
                let (i, v) = match b.ty.clone() {
                    Ty::Vector(elem, n) => {
                        let i = self.index_expr(ctx, index, n)?;
                        (i, self.check_expr(ctx, value, &elem)?)
                    }
                    Ty::Array(k, val) => (self.check_expr(ctx, index, &k)?, self.check_expr(ctx, value, &val)?),
                    other => return err(span, format!("type `{}` cannot be updated by index", other)),
                };
                let ty = b.ty.clone();
                Ok(Self::texpr(
                    TExprKind::Update {
                        base: Box::new(b),
                        index: Box::new(i),
                        value: Box::new(v),
                    },
                    ty,
                    span,
                ))
            }
            ExprKind::SliceUpdate { base, start, value } => {
                let b = self.infer_expr(ctx, base)?;
                let Ty::Vector(elem, n) = b.ty.clone() else {
                    return err(span, format!("slice update needs a vector, found `{}`", b.ty));
                };
                let s = self.index_expr(ctx, start, n)?;
                let v = self.infer_expr(ctx, value)?;
                match &v.ty {
                    Ty::Vector(ve, m) if **ve == *elem && *m <= n => {}
                    other => {
                        return err(
                            value.span,
                            format!("slice update of `{}` needs a vector of `{}` no longer than {}, found `{}`", b.ty, elem, n, other),
                        )
                    }
                }
                let ty = b.ty.clone();
                Ok(Self::texpr(
                    TExprKind::SliceUpdate {
                        base: Box::new(b),
                        start: Box::new(s),
                        value: Box::new(v),
                    },
                    ty,
                    span,
                ))
            }
            ExprKind::Slice { value, hi, lo } => {
                let v = self.infer_expr(ctx, value)?;
                let Ty::Bits(w) = v.ty else {
                    return err(span, format!("bit slices need a BitInt operand, found `{}`", v.ty));
                };
                if hi < lo {
                    return err(span, format!("slice bounds reversed: {} downto {}", hi, lo));
                }
                if *hi >= w {
                    return err(span, format!("slice out of range: bit {} of `BitInt({})`", hi, w));
                }
                Ok(Self::texpr(
                    TExprKind::Slice {
                        value: Box::new(v),
                        hi: *hi,
                        lo: *lo,
                    },
                    Ty::Bits(hi - lo + 1),
                    span,
                ))
            }
            ExprKind::Unary(op, x) => {
                let v = self.infer_expr(ctx, x)?;
                match (op, &v.ty) {
                    (UnOp::Not, Ty::Bool | Ty::Bits(_)) | (UnOp::Neg, Ty::Bits(_) | Ty::Int) => {
                        let ty = v.ty.clone();
                        Ok(Self::texpr(TExprKind::Unary(*op, Box::new(v)), ty, span))
                    }
                    _ => err(
                        span,
                        format!(
                            "operator `{}` is not defined on `{}`",
                            if *op == UnOp::Not { "!" } else { "-" },
                            v.ty
                        ),
                    ),
                }
            }
            ExprKind::Binary(op, a, b) => self.binary(ctx, *op, a, b, span),
            ExprKind::Call { path, generics, args } => self.call(ctx, path, generics, args, span),
            ExprKind::Any(t) => {
                if ctx.closed {
                    return err(span, "initial values must be closed expressions");
                }
                if !ctx.is_mut {
                    return err(span, "`any` is not allowed in a pure `fn`; declare it `mut fn`");
                }
                let ty = self.resolve_type(t)?;
                if ty == Ty::Unit {
                    return err(span, "`any<()>` is meaningless");
                }
                let site = self.new_site(SiteKind::Any, span, ctx);
                Ok(Self::texpr(TExprKind::Any(site), ty, span))
            }
            ExprKind::Block { stmts, tail } => self.block(ctx, stmts, tail.as_deref(), None, span),
            ExprKind::If { cond, then, els } => {
                let c = self.check_expr(ctx, cond, &Ty::Bool)?;
                match els {
                    None => {
                        let t = self.check_expr(ctx, then, &Ty::Unit)?;
                        Ok(Self::texpr(
                            TExprKind::If(Box::new(c), Box::new(t), Box::new(TExpr::unit(span))),
                            Ty::Unit,
                            span,
                        ))
                    }
                    Some(els) => {
                        let (t, f) = if needs_context(then) && !needs_context(els) {
                            let f = self.infer_expr(ctx, els)?;
                            let t = self.check_expr(ctx, then, &f.ty)?;
                            (t, f)
                        } else {
                            let t = self.infer_expr(ctx, then)?;
                            let f = self.check_expr(ctx, els, &t.ty)?;
                            (t, f)
                        };
                        let ty = t.ty.clone();
                        Ok(Self::texpr(TExprKind::If(Box::new(c), Box::new(t), Box::new(f)), ty, span))
                    }
                }
            }
            ExprKind::Assume(c) | ExprKind::Assert(c) => {
                if ctx.closed {
                    return err(span, "initial values must be closed expressions");
                }
                let c = self.check_expr(ctx, c, &Ty::Bool)?;
                let is_assume = matches!(e.kind, ExprKind::Assume(_));
                let site = self.new_site(
                    if is_assume { SiteKind::Assume } else { SiteKind::Assert },
                    span,
                    ctx,
                );
                let kind = if is_assume {
                    TExprKind::Assume(site, Box::new(c))
                } else {
                    TExprKind::Assert(site, Box::new(c))
                };
                Ok(Self::texpr(kind, Ty::Unit, span))
            }
            ExprKind::Printf(pieces) => {
                if ctx.closed {
                    return err(span, "initial values must be closed expressions");
                }
                let mut parts = Vec::new();
                for p in pieces {
                    parts.push(match p {
                        FmtPiece::Text(t) => FmtPart::Text(t.clone()),
                        FmtPiece::Hole(h) => FmtPart::Hole(self.infer_expr(ctx, h)?),
                    });
                }
                Ok(Self::texpr(TExprKind::Printf(parts), Ty::Unit, span))
            }
        }
    }

    /// Vector index: any BitInt; unsuffixed literals are bounds-checked.
    fn index_expr(&mut self, ctx: &mut FnCtx, index: &Expr, len: u64) -> TcResult<TExpr> {
        if let ExprKind::Int { value, width: None } = index.kind {
            if value >= len as u128 {
                return err(index.span, format!("index {} out of range for vector of length {}", value, len));
            }
            let w = bits_for(len.max(2));
            return self.check_expr(ctx, index, &Ty::Bits(w));
        }
        let i = self.infer_expr(ctx, index)?;
        if !matches!(i.ty, Ty::Bits(_)) {
            return err(index.span, format!("vector index must be a BitInt, found `{}`", i.ty));
        }
        Ok(i)
    }

    fn binary(&mut self, ctx: &mut FnCtx, op: BinOp, a: &Expr, b: &Expr, span: Span) -> TcResult<TExpr> {
        if matches!(op, BinOp::And | BinOp::Or) {
            let l = self.check_expr(ctx, a, &Ty::Bool)?;
            let r = self.check_expr(ctx, b, &Ty::Bool)?;
            return Ok(Self::texpr(TExprKind::Binary(op, Box::new(l), Box::new(r)), Ty::Bool, span));
        }
        // Infer the side that carries its own type, check the other.
        let (l, r) = if needs_context(a) && !needs_context(b) {
            let r = self.infer_expr(ctx, b)?;
            let l = self.check_operand(ctx, a, &r.ty, op)?;
            (l, r)
        } else {
            let l = self.infer_expr(ctx, a)?;
            let r = self.check_operand(ctx, b, &l.ty, op)?;
            (l, r)
        };
        let ty = l.ty.clone();
        let result = if is_arith(op) {
            match (&ty, op) {
                (Ty::Bits(_), _) => ty.clone(),
                (Ty::Int, BinOp::Add | BinOp::Sub | BinOp::Mul) => Ty::Int,
                _ => return err(span, format!("operator `{}` is not defined on `{}`", op.symbol(), ty)),
            }
        } else if is_order(op) {
            if !matches!(ty, Ty::Bits(_) | Ty::Int) {
                return err(span, format!("operator `{}` is not defined on `{}`", op.symbol(), ty));
            }
            Ty::Bool
        } else {
            if let Some(why) = ty.equality_restriction() {
                return err(span, why);
            }
            Ty::Bool
        };
        Ok(Self::texpr(TExprKind::Binary(op, Box::new(l), Box::new(r)), result, span))
    }

    fn check_operand(&mut self, ctx: &mut FnCtx, e: &Expr, ty: &Ty, op: BinOp) -> TcResult<TExpr> {
        match self.check_expr(ctx, e, ty) {
            Err(d) if d.message.starts_with("type mismatch") => Err(Diagnostic::new(
                d.span,
                format!(
                    "operands of `{}` must have the same type: {} (left operand is `{}`)",
                    op.symbol(),
                    d.message.trim_start_matches("type mismatch: "),
                    ty
                ),
            )),
            r => r,
        }
    }

    fn block(
        &mut self,
        ctx: &mut FnCtx,
        stmts: &[Stmt],
        tail: Option<&Expr>,
        expected: Option<&Ty>,
        span: Span,
    ) -> TcResult<TExpr> {
        ctx.scopes.push(Vec::new());
        let r = (|| {
            let mut out = Vec::new();
            for s in stmts {
                match s {
                    Stmt::Let { name, ty, value } => {
                        let v = match ty {
                            Some(t) => {
                                let t = self.resolve_type(t)?;
                                self.check_expr(ctx, value, &t)?
                            }
                            None => self.infer_expr(ctx, value)?,
                        };
                        let id = ctx.bind(&name.name, v.ty.clone());
                        out.push(TStmt::Let(id, v));
                    }
                    Stmt::Expr(e) => {
                        let te = if needs_context(e) {
                            self.check_expr(ctx, e, &Ty::Unit)?
                        } else {
                            self.infer_expr(ctx, e)?
                        };
                        out.push(TStmt::Expr(te));
                    }
                }
            }
            let tail = match (tail, expected) {
                (Some(t), Some(exp)) => self.check_expr(ctx, t, exp)?,
                (Some(t), None) => self.infer_expr(ctx, t)?,
                (None, Some(exp)) if *exp != Ty::Unit => {
                    return err(span, format!("block has type `()`, but `{}` is expected", exp));
                }
                (None, _) => TExpr::unit(span),
            };
            let ty = tail.ty.clone();
            Ok(Self::texpr(TExprKind::Block(out, Box::new(tail)), ty, span))
        })();
        ctx.scopes.pop();
        r
    }

    fn call(
        &mut self,
        ctx: &mut FnCtx,
        path: &[ast::Ident],
        generics: &[u32],
        args: &[Expr],
        span: Span,
    ) -> TcResult<TExpr> {
        if ctx.closed {
            return err(span, "initial values must be closed expressions");
        }
        let last = path.last().expect("non-empty path");
        if path.len() == 1 && BUILTINS.contains(&last.name.as_str()) {
            return self.builtin(ctx, &last.name, generics, args, span);
        }
        if !generics.is_empty() {
            return err(span, format!("`{}` takes no generic arguments", last));
        }
        let arity = |expected: usize| -> TcResult<()> {
            if args.len() != expected {
                return err(
                    span,
                    format!("`{}` takes {} argument(s) but {} were supplied", last, expected, args.len()),
                );
            }
            Ok(())
        };
        // Resolve everything but the final segment to an instance.
        let mut route = Vec::new();
        let mut target = Target::Module(ctx.module);
        for (i, seg) in path[..path.len() - 1].iter().enumerate() {
            let Target::Module(m) = target else {
                return err(seg.span, format!("`{}` is not reachable through a primitive instance", seg));
            };
            let md = &self.modules[m.0 as usize];
            if i >= 1 && !ctx.deep {
                return err(
                    seg.span,
                    format!(
                        "`{}` is not a child or callee of module `{}`: module code may only reach its own instances and callees",
                        path[..=i].iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join("."),
                        self.modules[ctx.module.0 as usize].name
                    ),
                );
            }
            if let Some((idx, inst)) = md.instance(&seg.name) {
                route.push(RouteSeg::Child(idx));
                target = match &inst.kind {
                    InstKind::Module(c) => Target::Module(*c),
                    InstKind::State { ty, .. } => Target::State(ty.clone()),
                    InstKind::Array { key, value } => Target::Array(key.clone(), value.clone()),
                };
            } else if let Some((idx, c)) = md.callee(&seg.name).filter(|_| i == 0) {
                route.push(RouteSeg::Callee(idx));
                target = Target::Module(c.module);
            } else if i == 0 && ctx.lookup(&seg.name).is_some() {
                return err(seg.span, format!("`{}` is a value; values have no methods", seg));
            } else {
                return err(
                    seg.span,
                    format!("`{}` is not an instance or callee of module `{}`", seg, md.name),
                );
            }
        }
        let op = last.name.as_str();
        if op == "havoc" {
            arity(0)?;
            if !ctx.is_mut {
                return err(span, "`havoc` mutates state and is not allowed in a pure `fn`");
            }
            let site = self.new_site(SiteKind::Havoc, span, ctx);
            return Ok(Self::texpr(TExprKind::Havoc { site, route }, Ty::Unit, span));
        }
        match target {
            Target::Module(m) => {
                let Some(fid) = self.fn_index.get(&(m, op.to_string())).copied() else {
                    return err(
                        last.span,
                        format!("module `{}` has no function `{}`", self.modules[m.0 as usize].name, op),
                    );
                };
                let sig = self.fn_sigs[fid.0 as usize].clone();
                if sig.is_mut && !ctx.is_mut {
                    return err(
                        span,
                        format!("`mut fn {}` cannot be called from a pure `fn`", sig.name),
                    );
                }
                arity(sig.params.len())?;
                let args = args
                    .iter()
                    .zip(&sig.params)
                    .map(|(a, (_, t))| self.check_expr(ctx, a, t))
                    .collect::<TcResult<Vec<_>>>()?;
                let site = self.new_site(SiteKind::Call, span, ctx);
                ctx.calls.push((fid, span));
                Ok(Self::texpr(
                    TExprKind::Call {
                        site,
                        route,
                        func: fid,
                        args,
                    },
                    sig.ret.clone(),
                    span,
                ))
            }
            Target::State(ty) => {
                if !ctx.is_mut {
                    return err(span, "state access is not allowed in a pure `fn`; declare it `mut fn`");
                }
                let (prim, ret, params): (PrimOp, Ty, Vec<Ty>) = match op {
                    "get" => (PrimOp::Get, ty.clone(), vec![]),
                    "set" => (PrimOp::Set, Ty::Unit, vec![ty.clone()]),
                    _ => return err(last.span, format!("State has no operation `{}` (expected get, set, havoc)", op)),
                };
                self.prim(ctx, route, prim, ret, &params, args, span)
            }
            Target::Array(k, v) => {
                if !ctx.is_mut {
                    return err(span, "state access is not allowed in a pure `fn`; declare it `mut fn`");
                }
                let snap = Ty::Array(Rc::new(k.clone()), Rc::new(v.clone()));
                let (prim, ret, params) = match op {
                    "get" => (PrimOp::Get, snap, vec![]),
                    "set" => (PrimOp::Set, Ty::Unit, vec![snap]),
                    "read" => (PrimOp::Read, v.clone(), vec![k.clone()]),
                    "write" => (PrimOp::Write, Ty::Unit, vec![k.clone(), v.clone()]),
                    _ => {
                        return err(
                            last.span,
                            format!("Array has no operation `{}` (expected get, set, read, write, havoc)", op),
                        )
                    }
                };
                self.prim(ctx, route, prim, ret, &params, args, span)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn prim(
        &mut self,
        ctx: &mut FnCtx,
        route: Route,
        op: PrimOp,
        ret: Ty,
        params: &[Ty],
        args: &[Expr],
        span: Span,
    ) -> TcResult<TExpr> {
        if args.len() != params.len() {
            return err(
                span,
                format!("operation takes {} argument(s) but {} were supplied", params.len(), args.len()),
            );
        }
        let args = args
            .iter()
            .zip(params)
            .map(|(a, t)| self.check_expr(ctx, a, t))
            .collect::<TcResult<Vec<_>>>()?;
        Ok(Self::texpr(TExprKind::Prim { route, op, args }, ret, span))
    }

    fn builtin(&mut self, ctx: &mut FnCtx, name: &str, generics: &[u32], args: &[Expr], span: Span) -> TcResult<TExpr> {
        if args.len() != 1 {
            return err(span, format!("`{}` takes 1 argument but {} were supplied", name, args.len()));
        }
        let want_generic = name != "to_int";
        if want_generic != (generics.len() == 1) {
            return err(
                span,
                if want_generic {
                    format!("`{}` needs a width argument, e.g. `{}<64>(x)`", name, name)
                } else {
                    "`to_int` takes no width argument".to_string()
                },
            );
        }
        let m = generics.first().copied().unwrap_or(0);
        if want_generic && (m == 0 || m > MAX_WIDTH) {
            return err(span, format!("width must be between 1 and {}", MAX_WIDTH));
        }
        if name == "from_int" {
            let x = self.check_expr(ctx, &args[0], &Ty::Int)?;
            return Ok(Self::texpr(TExprKind::Convert(Conversion::FromInt(m), Box::new(x)), Ty::Bits(m), span));
        }
        let x = self.infer_expr(ctx, &args[0])?;
        let Ty::Bits(w) = x.ty else {
            return err(args[0].span, format!("`{}` needs a BitInt argument, found `{}`", name, x.ty));
        };
        let (conv, ty) = match name {
            "zero_extend" => {
                if m < w {
                    return err(span, format!("cannot zero-extend `BitInt({})` to {} bits", w, m));
                }
                (Conversion::ZeroExtend(m), Ty::Bits(m))
            }
            "truncate" => {
                if m > w {
                    return err(span, format!("cannot truncate `BitInt({})` to {} bits", w, m));
                }
                (Conversion::Truncate(m), Ty::Bits(m))
            }
            _ => (Conversion::ToInt, Ty::Int),
        };
        Ok(Self::texpr(TExprKind::Convert(conv, Box::new(x)), ty, span))
    }
}
