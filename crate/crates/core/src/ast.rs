//! Abstract syntax shared by every phase of the toolchain.
//!
//! The tree is produced by [`crate::parser`] and consumed by
//! [`crate::typecheck`]. Every node carries a [`Span`]; spans never take part
//! in equality, so two trees that differ only in source positions compare
//! equal.

use std::fmt;

/// A line/column position (both 1-based).
#[derive(Clone, Copy, Debug, Default, PartialOrd, Ord, PartialEq, Eq, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

/// Source range of a node. `synthetic` marks nodes injected by a later phase
/// rather than read from the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub lo: Pos,
    pub hi: Pos,
    pub synthetic: bool,
}

impl Span {
    pub fn new(start: usize, end: usize, lo: Pos, hi: Pos) -> Span {
        Span {
            start,
            end,
            lo,
            hi,
            synthetic: false,
        }
    }

    /// A span for generated nodes.
    pub fn synthetic() -> Span {
        Span {
            synthetic: true,
            ..Span::default()
        }
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        if self.synthetic {
            return other;
        }
        if other.synthetic {
            return self;
        }
        let (start, lo) = if self.start <= other.start {
            (self.start, self.lo)
        } else {
            (other.start, other.lo)
        };
        let (end, hi) = if self.end >= other.end {
            (self.end, self.hi)
        } else {
            (other.end, other.hi)
        };
        Span::new(start, end, lo, hi)
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn line(&self) -> u32 {
        self.lo.line
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.synthetic {
            write!(f, "<generated>")
        } else {
            write!(f, "{}:{}", self.lo.line, self.lo.col)
        }
    }
}

/// Access to the recorded source span of any AST node.
pub trait Spanned {
    fn span(&self) -> Span;
}

/// Returns the source span of `node`.
pub fn span_of<N: Spanned + ?Sized>(node: &N) -> Span {
    node.span()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Ident {
        Ident {
            name: name.into(),
            span,
        }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeExpr {
    pub kind: TypeKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeKind {
    Unit,
    Bool,
    BitInt(u32),
    Int,
    /// An alias or enum name; which one is decided during type checking.
    Named(String),
    Vector(Box<TypeExpr>, u64),
    Record(Vec<(Ident, TypeExpr)>),
    /// Snapshot type of a primitive `Array<K, V>`.
    ArrayOf(Box<TypeExpr>, Box<TypeExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Mul,
    Add,
    Sub,
    Shl,
    Shr,
    BitAnd,
    BitXor,
    BitOr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Mul => 10,
            BinOp::Add | BinOp::Sub => 9,
            BinOp::Shl | BinOp::Shr => 8,
            BinOp::BitAnd => 7,
            BinOp::BitXor => 6,
            BinOp::BitOr => 5,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::And => 2,
            BinOp::Or => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Mul => "*",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::BitAnd => "&",
            BinOp::BitXor => "^",
            BinOp::BitOr => "|",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FmtPiece {
    Text(String),
    Hole(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Let {
        name: Ident,
        ty: Option<TypeExpr>,
        value: Expr,
    },
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Unit,
    Bool(bool),
    /// Integer literal; `width` is the `u<N>` suffix if present.
    Int {
        value: u128,
        width: Option<u32>,
    },
    Var(Ident),
    Variant {
        enum_name: Ident,
        variant: Ident,
    },
    Record(Vec<(Ident, Expr)>),
    Vector(Vec<Expr>),
    /// `[elem; len]`
    Repeat(Box<Expr>, u64),
    Field(Box<Expr>, Ident),
    Index(Box<Expr>, Box<Expr>),
    /// `value[hi downto lo]`
    Slice {
        value: Box<Expr>,
        hi: u32,
        lo: u32,
    },
    /// `base with [index] = value`
    Update {
        base: Box<Expr>,
        index: Box<Expr>,
        value: Box<Expr>,
    },
    /// `base with [start ..] = value`
    SliceUpdate {
        base: Box<Expr>,
        start: Box<Expr>,
        value: Box<Expr>,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `a.b.f<N>(args)`: a call through a dotted instance/callee path. The
    /// last segment names the function or primitive operation.
    Call {
        path: Vec<Ident>,
        generics: Vec<u32>,
        args: Vec<Expr>,
    },
    Any(TypeExpr),
    Block {
        stmts: Vec<Stmt>,
        tail: Option<Box<Expr>>,
    },
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Option<Box<Expr>>,
    },
    Assume(Box<Expr>),
    Assert(Box<Expr>),
    Printf(Vec<FmtPiece>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    Module(Ident),
    State { ty: TypeExpr, init: Expr },
    Array { key: TypeExpr, value: TypeExpr },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceDecl {
    pub name: Ident,
    pub kind: InstanceKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalleeDecl {
    pub name: Ident,
    pub module: Ident,
    pub span: Span,
}

/// `child.callee -> target;`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wiring {
    pub child: Ident,
    pub callee: Ident,
    pub target: Vec<Ident>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnDecl {
    pub name: Ident,
    pub is_mut: bool,
    pub params: Vec<Param>,
    pub ret: Option<TypeExpr>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleDecl {
    pub name: Ident,
    pub instances: Vec<InstanceDecl>,
    pub callees: Vec<CalleeDecl>,
    pub wirings: Vec<Wiring>,
    pub functions: Vec<FnDecl>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeAlias {
    pub name: Ident,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumDecl {
    pub name: Ident,
    pub variants: Vec<Ident>,
    pub span: Span,
}

pub const DEFAULT_ROOT: &str = "Main";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub aliases: Vec<TypeAlias>,
    pub enums: Vec<EnumDecl>,
    pub modules: Vec<ModuleDecl>,
    pub root: String,
}

impl Program {
    pub fn module(&self, name: &str) -> Option<&ModuleDecl> {
        self.modules.iter().find(|m| m.name.name == name)
    }

    pub fn root_module(&self) -> Option<&ModuleDecl> {
        self.module(&self.root)
    }
}

macro_rules! spanned {
    ($($t:ty),*) => {
        $(impl Spanned for $t {
            fn span(&self) -> Span {
                self.span
            }
        })*
    };
}

spanned!(
    Ident,
    TypeExpr,
    Expr,
    InstanceDecl,
    CalleeDecl,
    Wiring,
    FnDecl,
    ModuleDecl,
    TypeAlias,
    EnumDecl
);

impl Spanned for Stmt {
    fn span(&self) -> Span {
        match self {
            Stmt::Let { name, value, .. } => name.span.to(value.span),
            Stmt::Expr(e) => e.span,
        }
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    /// Calls `f` on every direct child expression.
    pub fn for_each_child<'a>(&'a self, mut f: impl FnMut(&'a Expr)) {
        match &self.kind {
            ExprKind::Unit
            | ExprKind::Bool(_)
            | ExprKind::Int { .. }
            | ExprKind::Var(_)
            | ExprKind::Variant { .. }
            | ExprKind::Any(_) => {}
            ExprKind::Record(fields) => fields.iter().for_each(|(_, e)| f(e)),
            ExprKind::Vector(items) => items.iter().for_each(f),
            ExprKind::Repeat(e, _)
            | ExprKind::Field(e, _)
            | ExprKind::Slice { value: e, .. }
            | ExprKind::Unary(_, e)
            | ExprKind::Assume(e)
            | ExprKind::Assert(e) => f(e),
            ExprKind::Index(a, b) | ExprKind::Binary(_, a, b) => {
                f(a);
                f(b)
            }
            ExprKind::Update { base, index, value } => {
                f(base);
                f(index);
                f(value)
            }
            ExprKind::SliceUpdate { base, start, value } => {
                f(base);
                f(start);
                f(value)
            }
            ExprKind::Call { args, .. } => args.iter().for_each(f),
            ExprKind::Block { stmts, tail } => {
                for s in stmts {
                    match s {
                        Stmt::Let { value, .. } => f(value),
                        Stmt::Expr(e) => f(e),
                    }
                }
                if let Some(t) = tail {
                    f(t)
                }
            }
            ExprKind::If { cond, then, els } => {
                f(cond);
                f(then);
                if let Some(e) = els {
                    f(e)
                }
            }
            ExprKind::Printf(pieces) => {
                for p in pieces {
                    if let FmtPiece::Hole(e) = p {
                        f(e)
                    }
                }
            }
        }
    }

    /// `if` and block expressions may stand as statements without `;`.
    pub fn is_block_like(&self) -> bool {
        matches!(self.kind, ExprKind::If { .. } | ExprKind::Block { .. })
    }
}
