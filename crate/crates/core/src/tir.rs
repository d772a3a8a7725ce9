//! Typed intermediate representation produced by the type checker.

use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;

use crate::ast::{self, BinOp, Span, UnOp};
use crate::types::{EnumDef, Ty};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalId(pub u32);

/// Static program point of a call, `any`, `havoc`, `assume` or `assert`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteKind {
    Call,
    Any,
    Havoc,
    Assume,
    Assert,
}

#[derive(Clone, Debug)]
pub struct SiteInfo {
    pub kind: SiteKind,
    pub span: Span,
    pub func: Option<FnId>,
}

/// One step from an instance to a neighbour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RouteSeg {
    Child(u32),
    Callee(u32),
}

/// Path from the executing instance to a target instance.
pub type Route = Vec<RouteSeg>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimOp {
    Get,
    Set,
    Read,
    Write,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conversion {
    ZeroExtend(u32),
    Truncate(u32),
    ToInt,
    FromInt(u32),
}

#[derive(Clone, Debug)]
pub enum FmtPart {
    Text(String),
    Hole(TExpr),
}

#[derive(Clone, Debug)]
pub enum TStmt {
    Let(LocalId, TExpr),
    Expr(TExpr),
}

#[derive(Clone, Debug)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: Ty,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum TExprKind {
    Unit,
    Bool(bool),
    Bits(u128),
    Int(BigInt),
    Variant(u32),
    Local(LocalId),
    /// Fields in declaration order of the record type.
    Record(Vec<TExpr>),
    Field(Box<TExpr>, usize),
    Vector(Vec<TExpr>),
    Repeat(Box<TExpr>, u64),
    /// Vector element or array-snapshot read.
    Index(Box<TExpr>, Box<TExpr>),
    Update {
        base: Box<TExpr>,
        index: Box<TExpr>,
        value: Box<TExpr>,
    },
    SliceUpdate {
        base: Box<TExpr>,
        start: Box<TExpr>,
        value: Box<TExpr>,
    },
    Slice {
        value: Box<TExpr>,
        hi: u32,
        lo: u32,
    },
    Unary(UnOp, Box<TExpr>),
    /// Operand types are equal; the operator's meaning follows from them.
    Binary(BinOp, Box<TExpr>, Box<TExpr>),
    Convert(Conversion, Box<TExpr>),
    Call {
        site: SiteId,
        route: Route,
        func: FnId,
        args: Vec<TExpr>,
    },
    Prim {
        route: Route,
        op: PrimOp,
        args: Vec<TExpr>,
    },
    Havoc {
        site: SiteId,
        route: Route,
    },
    Any(SiteId),
    Block(Vec<TStmt>, Box<TExpr>),
    If(Box<TExpr>, Box<TExpr>, Box<TExpr>),
    Assume(SiteId, Box<TExpr>),
    Assert(SiteId, Box<TExpr>),
    Printf(Vec<FmtPart>),
}

impl TExpr {
    pub fn unit(span: Span) -> TExpr {
        TExpr {
            kind: TExprKind::Unit,
            ty: Ty::Unit,
            span,
        }
    }
}

#[derive(Clone, Debug)]
pub enum InstKind {
    Module(ModId),
    State { ty: Ty, init: TExpr },
    Array { key: Ty, value: Ty },
}

#[derive(Clone, Debug)]
pub struct InstDef {
    pub name: String,
    pub kind: InstKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct CalleeDef {
    pub name: String,
    pub module: ModId,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct ModDef {
    pub name: String,
    pub instances: Vec<InstDef>,
    pub callees: Vec<CalleeDef>,
    pub wirings: Vec<ast::Wiring>,
    pub functions: Vec<FnId>,
    pub span: Span,
}

impl ModDef {
    pub fn instance(&self, name: &str) -> Option<(u32, &InstDef)> {
        self.instances
            .iter()
            .enumerate()
            .find(|(_, i)| i.name == name)
            .map(|(i, d)| (i as u32, d))
    }

    pub fn callee(&self, name: &str) -> Option<(u32, &CalleeDef)> {
        self.callees
            .iter()
            .enumerate()
            .find(|(_, c)| c.name == name)
            .map(|(i, d)| (i as u32, d))
    }
}

#[derive(Clone, Debug)]
pub struct FnDef {
    pub name: String,
    pub module: ModId,
    pub is_mut: bool,
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    /// Slot table; parameters occupy the first slots.
    pub locals: Vec<(String, Ty)>,
    pub body: TExpr,
    pub span: Span,
}

/// A fully resolved, annotated program.
#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: ast::Program,
    pub enums: Vec<Rc<EnumDef>>,
    pub modules: Vec<ModDef>,
    pub functions: Vec<FnDef>,
    pub sites: Vec<SiteInfo>,
    pub root: ModId,
    /// Callees of each function, indexed by `FnId`.
    pub call_graph: Vec<Vec<FnId>>,
    pub fn_index: HashMap<(ModId, String), FnId>,
}

impl TypedProgram {
    pub fn module(&self, id: ModId) -> &ModDef {
        &self.modules[id.0 as usize]
    }

    pub fn func(&self, id: FnId) -> &FnDef {
        &self.functions[id.0 as usize]
    }

    pub fn site(&self, id: SiteId) -> &SiteInfo {
        &self.sites[id.0 as usize]
    }

    pub fn find_fn(&self, module: ModId, name: &str) -> Option<FnId> {
        self.fn_index.get(&(module, name.to_string())).copied()
    }

    pub fn module_by_name(&self, name: &str) -> Option<ModId> {
        self.modules
            .iter()
            .position(|m| m.name == name)
            .map(|i| ModId(i as u32))
    }

    /// Looks up a scenario: a zero-parameter `mut fn` of the root module.
    pub fn scenario(&self, name: &str) -> Result<FnId, String> {
        let root = self.module(self.root);
        let id = self
            .find_fn(self.root, name)
            .ok_or_else(|| format!("no scenario `{}` in module `{}`", name, root.name))?;
        let f = self.func(id);
        if !f.is_mut || !f.params.is_empty() {
            return Err(format!(
                "`{}` is not a scenario: scenarios are zero-parameter `mut fn`s of `{}`",
                name, root.name
            ));
        }
        Ok(id)
    }

    /// Names of all scenario-shaped functions in the root module.
    pub fn scenarios(&self) -> Vec<String> {
        self.module(self.root)
            .functions
            .iter()
            .map(|&f| self.func(f))
            .filter(|f| f.is_mut && f.params.is_empty())
            .map(|f| f.name.clone())
            .collect()
    }
}
