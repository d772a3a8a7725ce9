//! Pretty printer whose output re-parses to the same tree.

use std::fmt::Write;

use crate::ast::*;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for a in &p.aliases {
        let _ = writeln!(out, "type {} = {};", a.name, print_type(&a.ty));
    }
    for e in &p.enums {
        let vs: Vec<_> = e.variants.iter().map(|v| v.name.as_str()).collect();
        let _ = writeln!(out, "enum {} {{ {} }}", e.name, vs.join(", "));
    }
    for m in &p.modules {
        if !out.is_empty() {
            out.push('\n');
        }
        print_module(&mut out, m);
    }
    out
}

fn print_module(out: &mut String, m: &ModuleDecl) {
    let _ = writeln!(out, "module {} {{", m.name);
    for i in &m.instances {
        let kind = match &i.kind {
            InstanceKind::Module(name) => name.name.clone(),
            InstanceKind::State { ty, init } => {
                format!("State<{}>({})", print_type(ty), print_expr(init))
            }
            InstanceKind::Array { key, value } => {
                format!("Array<{}, {}>", print_type(key), print_type(value))
            }
        };
        let _ = writeln!(out, "  instance {}: {};", i.name, kind);
    }
    for c in &m.callees {
        let _ = writeln!(out, "  callee {}: {};", c.name, c.module);
    }
    for w in &m.wirings {
        let target: Vec<_> = w.target.iter().map(|t| t.name.as_str()).collect();
        let _ = writeln!(out, "  {}.{} -> {};", w.child, w.callee, target.join("."));
    }
    for f in &m.functions {
        let params: Vec<_> = f
            .params
            .iter()
            .map(|p| format!("{}: {}", p.name, print_type(&p.ty)))
            .collect();
        let ret = f
            .ret
            .as_ref()
            .map(|t| format!(" -> {}", print_type(t)))
            .unwrap_or_default();
        let _ = write!(
            out,
            "  {}fn {}({}){} ",
            if f.is_mut { "mut " } else { "" },
            f.name,
            params.join(", "),
            ret
        );
        let mut p = Printer { out: String::new(), indent: 1 };
        p.expr(&f.body, 0);
        out.push_str(&p.out);
        out.push('\n');
    }
    out.push_str("}\n");
}

pub fn print_type(t: &TypeExpr) -> String {
    match &t.kind {
        TypeKind::Unit => "()".into(),
        TypeKind::Bool => "Bool".into(),
        TypeKind::Int => "Int".into(),
        TypeKind::BitInt(w) => format!("BitInt({})", w),
        TypeKind::Named(n) => n.clone(),
        TypeKind::Vector(e, n) => format!("[{}; {}]", print_type(e), n),
        TypeKind::Record(fields) => {
            let fs: Vec<_> = fields
                .iter()
                .map(|(n, t)| format!("{}: {}", n, print_type(t)))
                .collect();
            format!("{{ {} }}", fs.join(", "))
        }
        TypeKind::ArrayOf(k, v) => format!("Array<{}, {}>", print_type(k), print_type(v)),
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    p.expr(e, 0);
    p.out
}

struct Printer {
    out: String,
    indent: usize,
}

// Precedence pseudo-levels for non-binary forms.
const WITH_PREC: u8 = 0;
const UNARY_PREC: u8 = 11;
const POSTFIX_PREC: u8 = 12;

fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.precedence(),
        ExprKind::Update { .. } | ExprKind::SliceUpdate { .. } => WITH_PREC,
        ExprKind::Unary(..) => UNARY_PREC,
        // A leading `if` is a complete operand only when parenthesised.
        ExprKind::If { .. } => WITH_PREC,
        _ => POSTFIX_PREC + 1,
    }
}

impl Printer {
    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
    }

    /// Prints `e`, parenthesised if its precedence is below `min`.
    fn expr(&mut self, e: &Expr, min: u8) {
        let needs = expr_prec(e) < min;
        if needs {
            self.out.push('(');
        }
        self.expr_inner(e);
        if needs {
            self.out.push(')');
        }
    }

    fn literal(&mut self, value: u128, width: Option<u32>) {
        if value < 10 {
            let _ = write!(self.out, "{}", value);
        } else {
            let _ = write!(self.out, "0x{:x}", value);
        }
        if let Some(w) = width {
            let _ = write!(self.out, "u{}", w);
        }
    }

    fn expr_inner(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Unit => self.out.push_str("()"),
            ExprKind::Bool(b) => self.out.push_str(if *b { "true" } else { "false" }),
            ExprKind::Int { value, width } => self.literal(*value, *width),
            ExprKind::Var(id) => self.out.push_str(&id.name),
            ExprKind::Variant { enum_name, variant } => {
                let _ = write!(self.out, "{}::{}", enum_name, variant);
            }
            ExprKind::Record(fields) => {
                self.out.push_str("{ ");
                for (i, (n, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    let _ = write!(self.out, "{}: ", n);
                    self.expr(v, 0);
                }
                self.out.push_str(" }");
            }
            ExprKind::Vector(items) => {
                self.out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.expr(v, 0);
                }
                self.out.push(']');
            }
            ExprKind::Repeat(v, n) => {
                self.out.push('[');
                self.expr(v, 0);
                let _ = write!(self.out, "; {}]", n);
            }
            ExprKind::Field(base, f) => {
                self.expr(base, POSTFIX_PREC);
                let _ = write!(self.out, ".{}", f);
            }
            ExprKind::Index(base, i) => {
                self.expr(base, POSTFIX_PREC);
                self.out.push('[');
                self.expr(i, 0);
                self.out.push(']');
            }
            ExprKind::Slice { value, hi, lo } => {
                self.expr(value, POSTFIX_PREC);
                let _ = write!(self.out, "[{} downto {}]", hi, lo);
            }
            ExprKind::Update { base, index, value } => {
                self.expr(base, WITH_PREC);
                self.out.push_str(" with [");
                self.expr(index, 0);
                self.out.push_str("] = ");
                self.expr(value, 1);
            }
            ExprKind::SliceUpdate { base, start, value } => {
                self.expr(base, WITH_PREC);
                self.out.push_str(" with [");
                self.expr(start, 0);
                self.out.push_str(" ..] = ");
                self.expr(value, 1);
            }
            ExprKind::Unary(op, v) => {
                self.out.push(match op {
                    UnOp::Not => '!',
                    UnOp::Neg => '-',
                });
                self.expr(v, UNARY_PREC);
            }
            ExprKind::Binary(op, a, b) => {
                let p = op.precedence();
                self.expr(a, p);
                let _ = write!(self.out, " {} ", op.symbol());
                self.expr(b, p + 1);
            }
            ExprKind::Call { path, generics, args } => {
                let names: Vec<_> = path.iter().map(|p| p.name.as_str()).collect();
                self.out.push_str(&names.join("."));
                for g in generics {
                    let _ = write!(self.out, "<{}>", g);
                }
                self.out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.expr(a, 0);
                }
                self.out.push(')');
            }
            ExprKind::Any(t) => {
                let _ = write!(self.out, "any<{}>", print_type(t));
            }
            ExprKind::Block { stmts, tail } => {
                self.out.push('{');
                self.indent += 1;
                for s in stmts {
                    self.newline();
                    match s {
                        Stmt::Let { name, ty, value } => {
                            let _ = write!(self.out, "let {}", name);
                            if let Some(t) = ty {
                                let _ = write!(self.out, ": {}", print_type(t));
                            }
                            self.out.push_str(" = ");
                            self.expr(value, 0);
                            self.out.push(';');
                        }
                        Stmt::Expr(e) => {
                            self.expr(e, 0);
                            self.out.push(';');
                        }
                    }
                }
                if let Some(t) = tail {
                    self.newline();
                    self.expr(t, 0);
                }
                self.indent -= 1;
                self.newline();
                self.out.push('}');
            }
            ExprKind::If { cond, then, els } => {
                self.out.push_str("if ");
                self.expr(cond, 1);
                self.out.push(' ');
                self.expr(then, 0);
                if let Some(e) = els {
                    self.out.push_str(" else ");
                    self.expr_inner(e);
                }
            }
            ExprKind::Assume(c) => {
                self.out.push_str("assume(");
                self.expr(c, 0);
                self.out.push(')');
            }
            ExprKind::Assert(c) => {
                self.out.push_str("assert(");
                self.expr(c, 0);
                self.out.push(')');
            }
            ExprKind::Printf(pieces) => {
                self.out.push_str("printf(\"");
                for p in pieces {
                    match p {
                        FmtPiece::Text(t) => {
                            for c in t.chars() {
                                match c {
                                    '\n' => self.out.push_str("\\n"),
                                    '\t' => self.out.push_str("\\t"),
                                    '\0' => self.out.push_str("\\0"),
                                    '\\' => self.out.push_str("\\\\"),
                                    '"' => self.out.push_str("\\\""),
                                    '{' => self.out.push_str("{{"),
                                    '}' => self.out.push_str("}}"),
                                    c => self.out.push(c),
                                }
                            }
                        }
                        FmtPiece::Hole(e) => {
                            self.out.push('{');
                            let mut sub = Printer { out: String::new(), indent: 0 };
                            sub.expr(e, 0);
                            // holes live inside a string literal
                            self.out.push_str(&sub.out.replace('\n', " "));
                            self.out.push('}');
                        }
                    }
                }
                self.out.push_str("\")");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, parse_expr};

    fn roundtrip_expr(src: &str) {
        let e = parse_expr(src).unwrap();
        let printed = print_expr(&e);
        let again = parse_expr(&printed).unwrap_or_else(|d| panic!("{}\n{}", printed, d));
        assert_eq!(e, again, "{}", printed);
    }

    #[test]
    fn parenthesisation_is_preserved() {
        roundtrip_expr("(a + b) * c");
        roundtrip_expr("a - (b - c)");
        roundtrip_expr("!(a && b)");
        roundtrip_expr("-(x)[3 downto 1]");
        roundtrip_expr("(v with [0] = 1u8)[0]");
        roundtrip_expr("v with [i] = (w with [j] = x)");
        roundtrip_expr("(if a { 1u8 } else { 2u8 }) + 3u8");
        roundtrip_expr(r#"printf("x={x} {{lit}} \"q\"\n")"#);
    }

    #[test]
    fn program_fixpoint() {
        let src = "type A = BitInt(4);
            enum E { X, Y }
            module Main {
              instance s: State<A>(0);
              mut fn go() { let v = s.get(); if v == 3u4 { s.set(v + 1) } else { }; assert(v < 15u4) }
            }";
        let p = parse(src).unwrap();
        let once = print_program(&p);
        let p2 = parse(&once).unwrap();
        assert_eq!(p, p2);
        assert_eq!(print_program(&p2), once);
    }
}
