//! Tokenizer for `.soc` source files.

use std::fmt;

use crate::ast::{Pos, Span};
use crate::diag::Diagnostic;

/// Widest fixed-width integer the toolchain accepts.
pub const MAX_WIDTH: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Keyword {
    Module,
    Instance,
    Callee,
    Type,
    Enum,
    Fn,
    Mut,
    Let,
    If,
    Else,
    Any,
    Assume,
    Assert,
    Printf,
    Downto,
    True,
    False,
    With,
}

impl Keyword {
    fn from_str(s: &str) -> Option<Keyword> {
        Some(match s {
            "module" => Keyword::Module,
            "instance" => Keyword::Instance,
            "callee" => Keyword::Callee,
            "type" => Keyword::Type,
            "enum" => Keyword::Enum,
            "fn" => Keyword::Fn,
            "mut" => Keyword::Mut,
            "let" => Keyword::Let,
            "if" => Keyword::If,
            "else" => Keyword::Else,
            "any" => Keyword::Any,
            "assume" => Keyword::Assume,
            "assert" => Keyword::Assert,
            "printf" => Keyword::Printf,
            "downto" => Keyword::Downto,
            "true" => Keyword::True,
            "false" => Keyword::False,
            "with" => Keyword::With,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Module => "module",
            Keyword::Instance => "instance",
            Keyword::Callee => "callee",
            Keyword::Type => "type",
            Keyword::Enum => "enum",
            Keyword::Fn => "fn",
            Keyword::Mut => "mut",
            Keyword::Let => "let",
            Keyword::If => "if",
            Keyword::Else => "else",
            Keyword::Any => "any",
            Keyword::Assume => "assume",
            Keyword::Assert => "assert",
            Keyword::Printf => "printf",
            Keyword::Downto => "downto",
            Keyword::True => "true",
            Keyword::False => "false",
            Keyword::With => "with",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Keyword(Keyword),
    Int { value: u128, width: Option<u32> },
    /// String literal; the token span covers the quotes, the contents are
    /// decoded by the parser (they may contain `{expr}` holes).
    Str,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Assign,
    Colon,
    ColonColon,
    Semi,
    Comma,
    Dot,
    DotDot,
    Arrow,
    Plus,
    Minus,
    Star,
    Amp,
    AmpAmp,
    Pipe,
    PipePipe,
    Caret,
    Bang,
    Shl,
    Shr,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(name) => return write!(f, "identifier `{}`", name),
            TokenKind::Keyword(k) => return write!(f, "`{}`", k.as_str()),
            TokenKind::Int { .. } => "integer literal",
            TokenKind::Str => "string literal",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Lt => "`<`",
            TokenKind::Gt => "`>`",
            TokenKind::Le => "`<=`",
            TokenKind::Ge => "`>=`",
            TokenKind::EqEq => "`==`",
            TokenKind::Ne => "`!=`",
            TokenKind::Assign => "`=`",
            TokenKind::Colon => "`:`",
            TokenKind::ColonColon => "`::`",
            TokenKind::Semi => "`;`",
            TokenKind::Comma => "`,`",
            TokenKind::Dot => "`.`",
            TokenKind::DotDot => "`..`",
            TokenKind::Arrow => "`->`",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::Amp => "`&`",
            TokenKind::AmpAmp => "`&&`",
            TokenKind::Pipe => "`|`",
            TokenKind::PipePipe => "`||`",
            TokenKind::Caret => "`^`",
            TokenKind::Bang => "`!`",
            TokenKind::Shl => "`<<`",
            TokenKind::Shr => "`>>`",
            TokenKind::Eof => "end of file",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn lexeme<'s>(&self, src: &'s str) -> &'s str {
        &src[self.span.start..self.span.end]
    }
}

struct Lexer<'s> {
    src: &'s str,
    bytes: &'s [u8],
    pos: usize,
    end: usize,
    line: u32,
    col: u32,
}

/// Tokenizes a whole source file. The returned list always ends in
/// [`TokenKind::Eof`].
pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    tokenize_range(src, 0, src.len())
}

/// Tokenizes `src[start..end]`, keeping positions relative to the whole file.
pub fn tokenize_range(src: &str, start: usize, end: usize) -> Result<Vec<Token>, Diagnostic> {
    let (line, col) = line_col(src, start);
    let mut lx = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: start,
        end,
        line,
        col,
    };
    let mut out = Vec::new();
    loop {
        let tok = lx.next_token()?;
        let eof = tok.kind == TokenKind::Eof;
        out.push(tok);
        if eof {
            return Ok(out);
        }
    }
}

pub(crate) fn line_col(src: &str, offset: usize) -> (u32, u32) {
    let mut line = 1;
    let mut col = 1;
    for c in src[..offset].chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

impl<'s> Lexer<'s> {
    fn here(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<u8> {
        (self.pos < self.end).then(|| self.bytes[self.pos])
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        (self.pos + n < self.end).then(|| self.bytes[self.pos + n])
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src[self.pos..self.end].chars().next()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: usize, lo: Pos) -> Span {
        Span::new(start, self.pos, lo, self.here())
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                (Some(b'/'), Some(b'/')) => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let start = self.pos;
                    let lo = self.here();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek_at(1)) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(Diagnostic::new(
                                    self.span_from(start, lo),
                                    "unterminated block comment",
                                ))
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, Diagnostic> {
        self.skip_trivia()?;
        let start = self.pos;
        let lo = self.here();
        let Some(c) = self.peek() else {
            return Ok(Token {
                kind: TokenKind::Eof,
                span: self.span_from(start, lo),
            });
        };
        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.bump();
            }
            let word = &self.src[start..self.pos];
            match Keyword::from_str(word) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word.to_string()),
            }
        } else if c.is_ascii_digit() {
            self.number(start, lo)?
        } else if c == b'"' {
            self.bump();
            loop {
                match self.peek() {
                    Some(b'"') => {
                        self.bump();
                        break;
                    }
                    Some(b'\\') => {
                        self.bump();
                        if self.bump().is_none() {
                            break;
                        }
                    }
                    Some(_) => {
                        self.bump();
                    }
                    None => {
                        return Err(Diagnostic::new(
                            self.span_from(start, lo),
                            "unterminated string literal",
                        ))
                    }
                }
            }
            TokenKind::Str
        } else {
            self.punct(start, lo)?
        };
        Ok(Token {
            kind,
            span: self.span_from(start, lo),
        })
    }

    fn punct(&mut self, start: usize, lo: Pos) -> Result<TokenKind, Diagnostic> {
        let two = |a: u8, b: u8| (a, b);
        let next = self.peek_at(1).unwrap_or(0);
        let c = self.peek().unwrap_or(0);
        let (kind, len) = match two(c, next) {
            (b'-', b'>') => (TokenKind::Arrow, 2),
            (b'<', b'=') => (TokenKind::Le, 2),
            (b'>', b'=') => (TokenKind::Ge, 2),
            (b'<', b'<') => (TokenKind::Shl, 2),
            (b'>', b'>') => (TokenKind::Shr, 2),
            (b'=', b'=') => (TokenKind::EqEq, 2),
            (b'!', b'=') => (TokenKind::Ne, 2),
            (b':', b':') => (TokenKind::ColonColon, 2),
            (b'.', b'.') => (TokenKind::DotDot, 2),
            (b'&', b'&') => (TokenKind::AmpAmp, 2),
            (b'|', b'|') => (TokenKind::PipePipe, 2),
            (b'(', _) => (TokenKind::LParen, 1),
            (b')', _) => (TokenKind::RParen, 1),
            (b'{', _) => (TokenKind::LBrace, 1),
            (b'}', _) => (TokenKind::RBrace, 1),
            (b'[', _) => (TokenKind::LBracket, 1),
            (b']', _) => (TokenKind::RBracket, 1),
            (b'<', _) => (TokenKind::Lt, 1),
            (b'>', _) => (TokenKind::Gt, 1),
            (b'=', _) => (TokenKind::Assign, 1),
            (b':', _) => (TokenKind::Colon, 1),
            (b';', _) => (TokenKind::Semi, 1),
            (b',', _) => (TokenKind::Comma, 1),
            (b'.', _) => (TokenKind::Dot, 1),
            (b'+', _) => (TokenKind::Plus, 1),
            (b'-', _) => (TokenKind::Minus, 1),
            (b'*', _) => (TokenKind::Star, 1),
            (b'&', _) => (TokenKind::Amp, 1),
            (b'|', _) => (TokenKind::Pipe, 1),
            (b'^', _) => (TokenKind::Caret, 1),
            (b'!', _) => (TokenKind::Bang, 1),
            _ => {
                let ch = self.bump().unwrap_or('?');
                return Err(Diagnostic::new(
                    self.span_from(start, lo),
                    format!("unexpected character `{}`", ch.escape_debug()),
                ));
            }
        };
        for _ in 0..len {
            self.bump();
        }
        Ok(kind)
    }

    fn number(&mut self, start: usize, lo: Pos) -> Result<TokenKind, Diagnostic> {
        let radix = match (self.peek(), self.peek_at(1)) {
            (Some(b'0'), Some(b'x' | b'X')) => 16,
            (Some(b'0'), Some(b'b' | b'B')) => 2,
            _ => 10,
        };
        if radix != 10 {
            self.bump();
            self.bump();
        }
        let mut value: u128 = 0;
        let mut digits = 0;
        let mut overflow = false;
        while let Some(c) = self.peek() {
            if c == b'_' {
                self.bump();
                continue;
            }
            let Some(d) = (c as char).to_digit(radix) else {
                break;
            };
            self.bump();
            digits += 1;
            match value
                .checked_mul(radix as u128)
                .and_then(|v| v.checked_add(d as u128))
            {
                Some(v) => value = v,
                None => overflow = true,
            }
        }
        if digits == 0 {
            return Err(Diagnostic::new(
                self.span_from(start, lo),
                "integer literal has no digits",
            ));
        }
        if overflow {
            return Err(Diagnostic::new(
                self.span_from(start, lo),
                "integer literal does not fit in 128 bits",
            ));
        }
        let mut width = None;
        if self.peek() == Some(b'u') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            self.bump();
            let wstart = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
            let w: u32 = self.src[wstart..self.pos].parse().unwrap_or(u32::MAX);
            if w == 0 || w > MAX_WIDTH {
                return Err(Diagnostic::new(
                    self.span_from(start, lo),
                    format!("literal width must be between 1 and {}", MAX_WIDTH),
                ));
            }
            if w < 128 && value >> w != 0 {
                return Err(Diagnostic::new(
                    self.span_from(start, lo),
                    format!("literal exceeds {} bits", w),
                ));
            }
            width = Some(w);
        }
        if matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.bump();
            }
            return Err(Diagnostic::new(
                self.span_from(start, lo),
                "malformed integer literal",
            ));
        }
        Ok(TokenKind::Int { value, width })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn suffixed_hex_literal_with_separators() {
        assert_eq!(
            kinds("0x1f_ffffu31"),
            vec![
                TokenKind::Int {
                    value: 0x1f_ffff,
                    width: Some(31)
                },
                TokenKind::Eof
            ]
        );
        assert_eq!(
            kinds("0x8000_0000_0070u48")[0],
            TokenKind::Int {
                value: 0x8000_0000_0070,
                width: Some(48)
            }
        );
    }

    #[test]
    fn any_with_type_argument() {
        assert_eq!(
            kinds("any<Bool>"),
            vec![
                TokenKind::Keyword(Keyword::Any),
                TokenKind::Lt,
                TokenKind::Ident("Bool".into()),
                TokenKind::Gt,
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn literal_wider_than_suffix_is_rejected() {
        let err = tokenize("0x1_0000u16").unwrap_err();
        assert!(err.message.contains("exceeds 16 bits"), "{}", err.message);
        assert!(tokenize("0xffffu16").is_ok());
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            kinds("a /* x\n y */ b // tail\n c"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Ident("b".into()),
                TokenKind::Ident("c".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn lexical_errors_carry_spans() {
        let e = tokenize("a\n  /* open").unwrap_err();
        assert_eq!(e.span.lo, Pos { line: 2, col: 3 });
        assert!(tokenize("\"abc").unwrap_err().message.contains("unterminated"));
        assert!(tokenize("a $ b").unwrap_err().message.contains("unexpected character"));
    }

    #[test]
    fn multi_char_operators() {
        assert_eq!(
            kinds("-> <= >> :: .. && ||"),
            vec![
                TokenKind::Arrow,
                TokenKind::Le,
                TokenKind::Shr,
                TokenKind::ColonColon,
                TokenKind::DotDot,
                TokenKind::AmpAmp,
                TokenKind::PipePipe,
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn range_tokenization_keeps_file_positions() {
        let src = "xx\n  foo + 1";
        let toks = tokenize_range(src, 5, src.len()).unwrap();
        assert_eq!(toks[0].span.lo, Pos { line: 2, col: 3 });
        assert_eq!(toks[0].lexeme(src), "foo");
    }
}
