//! Recursive-descent parser producing [`ast::Program`](crate::ast::Program).
//!
//! Binary operator precedence, tightest first: postfix (field, index,
//! slice, call), unary `! -`, `*`, `+ -`, `<< >>`, `&`, `^`, `|`,
//! `< <= > >=`, `== !=`, `&&`, `||`, and finally `with [..] = ..`.

use crate::ast::*;
use crate::diag::Diagnostic;
use crate::lexer::{tokenize, tokenize_range, Keyword, Token, TokenKind};

/// Tokenizes and parses a whole source file.
pub fn parse(src: &str) -> Result<Program, Diagnostic> {
    let tokens = tokenize(src)?;
    parse_program(src, &tokens)
}

/// Parses a token list produced by [`tokenize`] over `src`.
pub fn parse_program(src: &str, tokens: &[Token]) -> Result<Program, Diagnostic> {
    let mut p = Parser::new(src, tokens.to_vec());
    p.program()
}

/// Parses a single expression (used by tests and tooling).
pub fn parse_expr(src: &str) -> Result<Expr, Diagnostic> {
    let tokens = tokenize(src)?;
    let mut p = Parser::new(src, tokens);
    let e = p.expr()?;
    p.expect(TokenKind::Eof)?;
    Ok(e)
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'s> Parser<'s> {
    fn new(src: &'s str, toks: Vec<Token>) -> Parser<'s> {
        Parser { src, toks, pos: 0 }
    }

    fn peek(&self) -> &TokenKind {
        &self.toks[self.pos].kind
    }

    fn peek_at(&self, n: usize) -> &TokenKind {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].kind
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek() == kind
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        self.peek() == &TokenKind::Keyword(kw)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        self.eat(&TokenKind::Keyword(kw))
    }

    fn error_expected(&self, expected: &[&str]) -> Diagnostic {
        let found = self.peek().to_string();
        let msg = if expected.len() == 1 {
            format!("expected {}, found {}", expected[0], found)
        } else {
            format!("expected one of {}, found {}", expected.join(", "), found)
        };
        Diagnostic::new(self.span(), msg)
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.at(&kind) {
            Ok(self.bump())
        } else {
            Err(self.error_expected(&[&kind.to_string()]))
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<Token> {
        self.expect(TokenKind::Keyword(kw))
    }

    /// Closes a generic argument list, splitting `>>` if needed.
    fn expect_gt(&mut self) -> PResult<()> {
        match self.peek() {
            TokenKind::Gt => {
                self.bump();
                Ok(())
            }
            TokenKind::Shr => {
                let t = &mut self.toks[self.pos];
                t.kind = TokenKind::Gt;
                t.span.start += 1;
                t.span.lo.col += 1;
                Ok(())
            }
            TokenKind::Ge => {
                let t = &mut self.toks[self.pos];
                t.kind = TokenKind::Assign;
                t.span.start += 1;
                t.span.lo.col += 1;
                Ok(())
            }
            _ => Err(self.error_expected(&["`>`"])),
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                let t = self.bump();
                Ok(Ident::new(name, t.span))
            }
            _ => Err(self.error_expected(&["identifier"])),
        }
    }

    fn int_literal(&mut self) -> PResult<(u128, Option<u32>, Span)> {
        match *self.peek() {
            TokenKind::Int { value, width } => {
                let t = self.bump();
                Ok((value, width, t.span))
            }
            _ => Err(self.error_expected(&["integer literal"])),
        }
    }

    fn small_int(&mut self, what: &str) -> PResult<u64> {
        let (v, w, span) = self.int_literal()?;
        if w.is_some() {
            return Err(Diagnostic::new(span, format!("{} must be an unsuffixed literal", what)));
        }
        u64::try_from(v).map_err(|_| Diagnostic::new(span, format!("{} too large", what)))
    }

    // ---- declarations -------------------------------------------------

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program {
            aliases: Vec::new(),
            enums: Vec::new(),
            modules: Vec::new(),
            root: DEFAULT_ROOT.to_string(),
        };
        loop {
            match self.peek() {
                TokenKind::Eof => break,
                TokenKind::Keyword(Keyword::Type) => prog.aliases.push(self.alias()?),
                TokenKind::Keyword(Keyword::Enum) => prog.enums.push(self.enum_decl()?),
                TokenKind::Keyword(Keyword::Module) => prog.modules.push(self.module()?),
                _ => return Err(self.error_expected(&["`type`", "`enum`", "`module`"])),
            }
        }
        Ok(prog)
    }

    fn alias(&mut self) -> PResult<TypeAlias> {
        let start = self.expect_kw(Keyword::Type)?.span;
        let name = self.ident()?;
        self.expect(TokenKind::Assign)?;
        let ty = self.type_expr()?;
        let end = self.expect(TokenKind::Semi)?.span;
        Ok(TypeAlias {
            name,
            ty,
            span: start.to(end),
        })
    }

    fn enum_decl(&mut self) -> PResult<EnumDecl> {
        let start = self.expect_kw(Keyword::Enum)?.span;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut variants = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            variants.push(self.ident()?);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        let end = self.expect(TokenKind::RBrace)?.span;
        self.eat(&TokenKind::Semi);
        Ok(EnumDecl {
            name,
            variants,
            span: start.to(end),
        })
    }

    fn module(&mut self) -> PResult<ModuleDecl> {
        let start = self.expect_kw(Keyword::Module)?.span;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut m = ModuleDecl {
            name,
            instances: Vec::new(),
            callees: Vec::new(),
            wirings: Vec::new(),
            functions: Vec::new(),
            span: start,
        };
        loop {
            match self.peek() {
                TokenKind::RBrace => break,
                TokenKind::Keyword(Keyword::Instance) => m.instances.push(self.instance()?),
                TokenKind::Keyword(Keyword::Callee) => {
                    let s = self.bump().span;
                    let name = self.ident()?;
                    self.expect(TokenKind::Colon)?;
                    let module = self.ident()?;
                    let e = self.expect(TokenKind::Semi)?.span;
                    m.callees.push(CalleeDecl {
                        name,
                        module,
                        span: s.to(e),
                    });
                }
                TokenKind::Keyword(Keyword::Fn | Keyword::Mut) => m.functions.push(self.function()?),
                TokenKind::Ident(_) => m.wirings.push(self.wiring()?),
                _ => {
                    return Err(self.error_expected(&[
                        "`instance`",
                        "`callee`",
                        "`fn`",
                        "`mut`",
                        "wiring",
                        "`}`",
                    ]))
                }
            }
        }
        let end = self.expect(TokenKind::RBrace)?.span;
        m.span = start.to(end);
        Ok(m)
    }

    fn instance(&mut self) -> PResult<InstanceDecl> {
        let start = self.expect_kw(Keyword::Instance)?.span;
        let name = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let module = self.ident()?;
        let kind = match module.name.as_str() {
            "State" if self.at(&TokenKind::Lt) => {
                self.bump();
                let ty = self.type_expr()?;
                self.expect_gt()?;
                self.expect(TokenKind::LParen)?;
                let init = self.expr()?;
                self.expect(TokenKind::RParen)?;
                InstanceKind::State { ty, init }
            }
            "Array" if self.at(&TokenKind::Lt) => {
                self.bump();
                let key = self.type_expr()?;
                self.expect(TokenKind::Comma)?;
                let value = self.type_expr()?;
                self.expect_gt()?;
                InstanceKind::Array { key, value }
            }
            _ => InstanceKind::Module(module),
        };
        let end = self.expect(TokenKind::Semi)?.span;
        Ok(InstanceDecl {
            name,
            kind,
            span: start.to(end),
        })
    }

    fn wiring(&mut self) -> PResult<Wiring> {
        let child = self.ident()?;
        self.expect(TokenKind::Dot)?;
        let callee = self.ident()?;
        self.expect(TokenKind::Arrow)?;
        let mut target = vec![self.ident()?];
        while self.eat(&TokenKind::Dot) {
            target.push(self.ident()?);
        }
        let end = self.expect(TokenKind::Semi)?.span;
        Ok(Wiring {
            span: child.span.to(end),
            child,
            callee,
            target,
        })
    }

    fn function(&mut self) -> PResult<FnDecl> {
        let start = self.span();
        let is_mut = self.eat_kw(Keyword::Mut);
        self.expect_kw(Keyword::Fn)?;
        let name = self.ident()?;
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        while !self.at(&TokenKind::RParen) {
            let pname = self.ident()?;
            self.expect(TokenKind::Colon)?;
            let ty = self.type_expr()?;
            params.push(Param { name: pname, ty });
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::RParen)?;
        let ret = if self.eat(&TokenKind::Arrow) {
            Some(self.type_expr()?)
        } else {
            None
        };
        if !self.at(&TokenKind::LBrace) {
            return Err(self.error_expected(&["`{`"]));
        }
        let body = self.block()?;
        Ok(FnDecl {
            span: start.to(body.span),
            name,
            is_mut,
            params,
            ret,
            body,
        })
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            TokenKind::LParen => {
                self.bump();
                self.expect(TokenKind::RParen)?;
                TypeKind::Unit
            }
            TokenKind::LBracket => {
                self.bump();
                let elem = self.type_expr()?;
                self.expect(TokenKind::Semi)?;
                let len = self.small_int("vector length")?;
                self.expect(TokenKind::RBracket)?;
                TypeKind::Vector(Box::new(elem), len)
            }
            TokenKind::LBrace => {
                self.bump();
                let mut fields = Vec::new();
                while !self.at(&TokenKind::RBrace) {
                    let name = self.ident()?;
                    self.expect(TokenKind::Colon)?;
                    let ty = self.type_expr()?;
                    fields.push((name, ty));
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
                self.expect(TokenKind::RBrace)?;
                TypeKind::Record(fields)
            }
            TokenKind::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "Bool" => TypeKind::Bool,
                    "Int" => TypeKind::Int,
                    "BitInt" => {
                        self.expect(TokenKind::LParen)?;
                        let w = self.small_int("bit width")?;
                        self.expect(TokenKind::RParen)?;
                        if w == 0 || w > crate::lexer::MAX_WIDTH as u64 {
                            return Err(Diagnostic::new(
                                start.to(self.prev_span()),
                                format!(
                                    "bit width must be between 1 and {}",
                                    crate::lexer::MAX_WIDTH
                                ),
                            ));
                        }
                        TypeKind::BitInt(w as u32)
                    }
                    "Array" if self.at(&TokenKind::Lt) => {
                        self.bump();
                        let k = self.type_expr()?;
                        self.expect(TokenKind::Comma)?;
                        let v = self.type_expr()?;
                        self.expect_gt()?;
                        TypeKind::ArrayOf(Box::new(k), Box::new(v))
                    }
                    _ => TypeKind::Named(name),
                }
            }
            _ => return Err(self.error_expected(&["type"])),
        };
        Ok(TypeExpr {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    // ---- expressions --------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.binary(1)?;
        while self.eat_kw(Keyword::With) {
            self.expect(TokenKind::LBracket)?;
            let index = self.expr()?;
            let slice = self.eat(&TokenKind::DotDot);
            self.expect(TokenKind::RBracket)?;
            self.expect(TokenKind::Assign)?;
            let value = self.binary(1)?;
            let span = e.span.to(value.span);
            let kind = if slice {
                ExprKind::SliceUpdate {
                    base: Box::new(e),
                    start: Box::new(index),
                    value: Box::new(value),
                }
            } else {
                ExprKind::Update {
                    base: Box::new(e),
                    index: Box::new(index),
                    value: Box::new(value),
                }
            };
            e = Expr::new(kind, span);
        }
        Ok(e)
    }

    fn binop_here(&self) -> Option<BinOp> {
        Some(match self.peek() {
            TokenKind::Star => BinOp::Mul,
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Shl => BinOp::Shl,
            TokenKind::Shr => BinOp::Shr,
            TokenKind::Amp => BinOp::BitAnd,
            TokenKind::Caret => BinOp::BitXor,
            TokenKind::Pipe => BinOp::BitOr,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::EqEq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::AmpAmp => BinOp::And,
            TokenKind::PipePipe => BinOp::Or,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop_here() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            TokenKind::Bang => UnOp::Not,
            TokenKind::Minus => UnOp::Neg,
            _ => return self.postfix(),
        };
        let start = self.bump().span;
        let e = self.unary()?;
        let span = start.to(e.span);
        Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), span))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                TokenKind::Dot => {
                    self.bump();
                    let field = self.ident()?;
                    let span = e.span.to(field.span);
                    e = Expr::new(ExprKind::Field(Box::new(e), field), span);
                }
                TokenKind::LBracket => {
                    self.bump();
                    let index = self.expr()?;
                    if self.eat_kw(Keyword::Downto) {
                        let hi = match index.kind {
                            ExprKind::Int { value, width: None } => value,
                            _ => {
                                return Err(Diagnostic::new(
                                    index.span,
                                    "slice bounds must be unsuffixed integer literals",
                                ))
                            }
                        };
                        let lo = self.small_int("slice bound")?;
                        let end = self.expect(TokenKind::RBracket)?.span;
                        let span = e.span.to(end);
                        if hi > u32::MAX as u128 || lo > u32::MAX as u64 {
                            return Err(Diagnostic::new(span, "slice bound too large"));
                        }
                        e = Expr::new(
                            ExprKind::Slice {
                                value: Box::new(e),
                                hi: hi as u32,
                                lo: lo as u32,
                            },
                            span,
                        );
                    } else {
                        let end = self.expect(TokenKind::RBracket)?.span;
                        let span = e.span.to(end);
                        e = Expr::new(ExprKind::Index(Box::new(e), Box::new(index)), span);
                    }
                }
                TokenKind::LParen => {
                    let Some(path) = call_path(&e) else {
                        return Err(Diagnostic::new(
                            self.span(),
                            "only named functions can be called",
                        ));
                    };
                    let args = self.call_args()?;
                    let span = e.span.to(self.prev_span());
                    e = Expr::new(
                        ExprKind::Call {
                            path,
                            generics: Vec::new(),
                            args,
                        },
                        span,
                    );
                }
                _ => return Ok(e),
            }
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        while !self.at(&TokenKind::RParen) {
            args.push(self.expr()?);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            TokenKind::Int { value, width } => {
                self.bump();
                ExprKind::Int { value, width }
            }
            TokenKind::Keyword(Keyword::True) => {
                self.bump();
                ExprKind::Bool(true)
            }
            TokenKind::Keyword(Keyword::False) => {
                self.bump();
                ExprKind::Bool(false)
            }
            TokenKind::LParen => {
                self.bump();
                if self.eat(&TokenKind::RParen) {
                    ExprKind::Unit
                } else {
                    let inner = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    return Ok(Expr::new(inner.kind, start.to(self.prev_span())));
                }
            }
            TokenKind::LBrace => {
                if matches!(self.peek_at(1), TokenKind::Ident(_))
                    && self.peek_at(2) == &TokenKind::Colon
                {
                    return self.record_literal();
                }
                return self.block();
            }
            TokenKind::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.at(&TokenKind::RBracket) {
                    let first = self.expr()?;
                    if self.eat(&TokenKind::Semi) {
                        let len = self.small_int("vector length")?;
                        self.expect(TokenKind::RBracket)?;
                        return Ok(Expr::new(
                            ExprKind::Repeat(Box::new(first), len),
                            start.to(self.prev_span()),
                        ));
                    }
                    items.push(first);
                    while self.eat(&TokenKind::Comma) {
                        if self.at(&TokenKind::RBracket) {
                            break;
                        }
                        items.push(self.expr()?);
                    }
                }
                self.expect(TokenKind::RBracket)?;
                ExprKind::Vector(items)
            }
            TokenKind::Keyword(Keyword::If) => return self.if_expr(),
            TokenKind::Keyword(Keyword::Any) => {
                self.bump();
                self.expect(TokenKind::Lt)?;
                let ty = self.type_expr()?;
                self.expect_gt()?;
                ExprKind::Any(ty)
            }
            TokenKind::Keyword(kw @ (Keyword::Assume | Keyword::Assert)) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let e = Box::new(self.expr()?);
                self.expect(TokenKind::RParen)?;
                if kw == Keyword::Assume {
                    ExprKind::Assume(e)
                } else {
                    ExprKind::Assert(e)
                }
            }
            TokenKind::Keyword(Keyword::Printf) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let tok = self.expect(TokenKind::Str)?;
                let pieces = self.format_string(&tok)?;
                self.expect(TokenKind::RParen)?;
                ExprKind::Printf(pieces)
            }
            TokenKind::Ident(name) => {
                let id = self.ident()?;
                if self.at(&TokenKind::ColonColon) {
                    self.bump();
                    let variant = self.ident()?;
                    ExprKind::Variant {
                        enum_name: id,
                        variant,
                    }
                } else if self.at(&TokenKind::Lt)
                    && matches!(self.peek_at(1), TokenKind::Int { width: None, .. })
                    && matches!(self.peek_at(2), TokenKind::Gt)
                    && matches!(self.peek_at(3), TokenKind::LParen)
                {
                    self.bump();
                    let g = self.small_int("generic argument")?;
                    self.expect_gt()?;
                    let args = self.call_args()?;
                    let g = u32::try_from(g).map_err(|_| {
                        Diagnostic::new(start, "generic argument too large")
                    })?;
                    ExprKind::Call {
                        path: vec![Ident::new(name, id.span)],
                        generics: vec![g],
                        args,
                    }
                } else {
                    ExprKind::Var(id)
                }
            }
            _ => return Err(self.error_expected(&["expression"])),
        };
        Ok(Expr::new(kind, start.to(self.prev_span())))
    }

    fn record_literal(&mut self) -> PResult<Expr> {
        let start = self.expect(TokenKind::LBrace)?.span;
        let mut fields = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            let name = self.ident()?;
            self.expect(TokenKind::Colon)?;
            let value = self.expr()?;
            fields.push((name, value));
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(Expr::new(ExprKind::Record(fields), start.to(end)))
    }

    fn if_expr(&mut self) -> PResult<Expr> {
        let start = self.expect_kw(Keyword::If)?.span;
        let cond = self.expr()?;
        if !self.at(&TokenKind::LBrace) {
            return Err(self.error_expected(&["`{`"]));
        }
        let then = self.block()?;
        let els = if self.eat_kw(Keyword::Else) {
            if self.at_kw(Keyword::If) {
                Some(Box::new(self.if_expr()?))
            } else if self.at(&TokenKind::LBrace) {
                Some(Box::new(self.block()?))
            } else {
                return Err(self.error_expected(&["`if`", "`{`"]));
            }
        } else {
            None
        };
        let end = els.as_ref().map(|e| e.span).unwrap_or(then.span);
        Ok(Expr::new(
            ExprKind::If {
                cond: Box::new(cond),
                then: Box::new(then),
                els,
            },
            start.to(end),
        ))
    }

    fn block(&mut self) -> PResult<Expr> {
        let start = self.expect(TokenKind::LBrace)?.span;
        let mut stmts = Vec::new();
        let mut tail = None;
        loop {
            if self.at(&TokenKind::RBrace) {
                break;
            }
            if self.eat(&TokenKind::Semi) {
                continue;
            }
            if self.eat_kw(Keyword::Let) {
                let name = self.ident()?;
                let ty = if self.eat(&TokenKind::Colon) {
                    Some(self.type_expr()?)
                } else {
                    None
                };
                self.expect(TokenKind::Assign)?;
                let value = self.expr()?;
                self.expect(TokenKind::Semi)?;
                stmts.push(Stmt::Let { name, ty, value });
                continue;
            }
            let e = self.expr()?;
            if self.eat(&TokenKind::Semi) {
                stmts.push(Stmt::Expr(e));
            } else if self.at(&TokenKind::RBrace) {
                tail = Some(Box::new(e));
                break;
            } else if e.is_block_like() {
                stmts.push(Stmt::Expr(e));
            } else {
                return Err(self.error_expected(&["`;`", "`}`"]));
            }
        }
        let end = self.expect(TokenKind::RBrace)?.span;
        Ok(Expr::new(ExprKind::Block { stmts, tail }, start.to(end)))
    }

    /// Splits a printf string into text and `{expr}` holes. `{{`/`}}` are
    /// literal braces; escapes `\n \t \\ \"` are decoded in text pieces.
    fn format_string(&mut self, tok: &Token) -> PResult<Vec<FmtPiece>> {
        let body_start = tok.span.start + 1;
        let body_end = tok.span.end - 1;
        let raw = &self.src[body_start..body_end];
        let mut pieces = Vec::new();
        let mut text = String::new();
        let mut chars = raw.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    let Some((_, e)) = chars.next() else { break };
                    text.push(match e {
                        'n' => '\n',
                        't' => '\t',
                        '0' => '\0',
                        other => other,
                    });
                }
                '{' if matches!(chars.peek(), Some((_, '{'))) => {
                    chars.next();
                    text.push('{');
                }
                '}' if matches!(chars.peek(), Some((_, '}'))) => {
                    chars.next();
                    text.push('}');
                }
                '{' => {
                    let hole_start = body_start + i + 1;
                    let mut depth = 1;
                    let mut hole_end = None;
                    for (j, d) in chars.by_ref() {
                        match d {
                            '{' => depth += 1,
                            '}' => {
                                depth -= 1;
                                if depth == 0 {
                                    hole_end = Some(body_start + j);
                                    break;
                                }
                            }
                            _ => {}
                        }
                    }
                    let Some(hole_end) = hole_end else {
                        return Err(Diagnostic::new(tok.span, "unclosed `{` in format string"));
                    };
                    if !text.is_empty() {
                        pieces.push(FmtPiece::Text(std::mem::take(&mut text)));
                    }
                    let toks = tokenize_range(self.src, hole_start, hole_end)?;
                    let mut sub = Parser::new(self.src, toks);
                    let e = sub.expr()?;
                    sub.expect(TokenKind::Eof)?;
                    pieces.push(FmtPiece::Hole(e));
                }
                '}' => {
                    return Err(Diagnostic::new(tok.span, "unmatched `}` in format string"));
                }
                c => text.push(c),
            }
        }
        if !text.is_empty() {
            pieces.push(FmtPiece::Text(text));
        }
        Ok(pieces)
    }
}

/// Flattens `a.b.c` into `[a, b, c]` if `e` is a plain dotted name.
fn call_path(e: &Expr) -> Option<Vec<Ident>> {
    match &e.kind {
        ExprKind::Var(id) => Some(vec![id.clone()]),
        ExprKind::Field(base, f) => {
            let mut p = call_path(base)?;
            p.push(f.clone());
            Some(p)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_aliases_parse() {
        let p = parse(
            "type PhysAddr = BitInt(48);
             type Request = { is_write: Bool, is_secure: Bool, address: PhysAddr, value: BitInt(64) };
             type Response = { ok: Bool, value: BitInt(64) };",
        )
        .unwrap();
        assert_eq!(p.aliases.len(), 3);
        assert_eq!(p.aliases[0].ty.kind, TypeKind::BitInt(48));
        match &p.aliases[1].ty.kind {
            TypeKind::Record(fields) => {
                let names: Vec<_> = fields.iter().map(|(n, _)| n.name.as_str()).collect();
                assert_eq!(names, ["is_write", "is_secure", "address", "value"]);
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn wiring_statement() {
        let p = parse(
            "module M { instance asc: ASC; instance dram: DRAM; asc.dram -> dram; }",
        )
        .unwrap();
        let w = &p.modules[0].wirings[0];
        assert_eq!(w.child.name, "asc");
        assert_eq!(w.callee.name, "dram");
        assert_eq!(w.target[0].name, "dram");
    }

    #[test]
    fn missing_let_value_is_a_syntax_error_at_semicolon() {
        let src = "module M { fn f() -> Bool { let x = ; true } }";
        let e = parse(src).unwrap_err();
        assert_eq!(&src[e.span.start..e.span.end], ";");
        assert!(e.message.starts_with("expected expression"), "{}", e.message);
    }

    #[test]
    fn precedence_levels() {
        let e = parse_expr("a || b && c == d < e + f * g").unwrap();
        // || at the root, && beneath it
        match e.kind {
            ExprKind::Binary(BinOp::Or, _, rhs) => match rhs.kind {
                ExprKind::Binary(BinOp::And, _, rhs) => match rhs.kind {
                    ExprKind::Binary(BinOp::Eq, _, rhs) => match rhs.kind {
                        ExprKind::Binary(BinOp::Lt, _, rhs) => {
                            assert!(matches!(rhs.kind, ExprKind::Binary(BinOp::Add, _, _)))
                        }
                        k => panic!("{:?}", k),
                    },
                    k => panic!("{:?}", k),
                },
                k => panic!("{:?}", k),
            },
            k => panic!("{:?}", k),
        }
    }

    #[test]
    fn slice_and_dotted_call() {
        let e = parse_expr("dram.store(r.address[6 downto 5], r.value)").unwrap();
        match e.kind {
            ExprKind::Call { path, args, .. } => {
                assert_eq!(path.len(), 2);
                assert!(matches!(args[0].kind, ExprKind::Slice { hi: 6, lo: 5, .. }));
                let outer = e.span;
                assert!(outer.contains(&args[0].span));
            }
            k => panic!("{:?}", k),
        }
    }

    #[test]
    fn record_literal_versus_block() {
        let e = parse_expr("{ ok: false, value: any<BitInt(64)> }").unwrap();
        assert!(matches!(e.kind, ExprKind::Record(ref f) if f.len() == 2));
        let b = parse_expr("{ let x = 1u8; x }").unwrap();
        assert!(matches!(b.kind, ExprKind::Block { .. }));
    }

    #[test]
    fn printf_holes_are_expressions() {
        let e = parse_expr(r#"printf("CPU: request is {r}\n")"#).unwrap();
        match e.kind {
            ExprKind::Printf(p) => {
                assert_eq!(p.len(), 3);
                assert_eq!(p[0], FmtPiece::Text("CPU: request is ".into()));
                assert!(matches!(&p[1], FmtPiece::Hole(Expr { kind: ExprKind::Var(_), .. })));
                assert_eq!(p[2], FmtPiece::Text("\n".into()));
            }
            k => panic!("{:?}", k),
        }
    }

    #[test]
    fn generic_builtin_call_and_nested_generics() {
        let e = parse_expr("zero_extend<64>(x)").unwrap();
        assert!(matches!(e.kind, ExprKind::Call { ref generics, .. } if generics == &[64]));
        let a = parse_expr("any<Array<BitInt(4), Bool>>").unwrap();
        assert!(matches!(a.kind, ExprKind::Any(_)));
    }

    #[test]
    fn with_updates() {
        let e = parse_expr("v with [i] = 3u8 with [0 ..] = w").unwrap();
        assert!(matches!(e.kind, ExprKind::SliceUpdate { .. }));
    }
}
