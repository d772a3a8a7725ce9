//! Minimal S-expression reader for solver output.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs) => Some(xs),
            Sexp::Atom(_) => None,
        }
    }

    /// True if this is a list whose first element is the atom `head`.
    pub fn is_app(&self, head: &str) -> bool {
        matches!(self.list(), Some([Sexp::Atom(h), ..]) if h == head)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", x)?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("malformed s-expression at byte {offset}: {msg}")]
pub struct SexpError {
    pub offset: usize,
    pub msg: &'static str,
}

/// Parses every top-level expression in `src`. Comments start with `;`.
pub fn parse_all(src: &str) -> Result<Vec<Sexp>, SexpError> {
    let bytes = src.as_bytes();
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push(Vec::new());
                i += 1;
            }
            b')' => {
                if stack.len() == 1 {
                    return Err(SexpError { offset: i, msg: "unbalanced `)`" });
                }
                let done = stack.pop().expect("nonempty");
                stack.last_mut().expect("nonempty").push(Sexp::List(done));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'|' | b'"' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != c {
                    i += 1;
                }
                if i == bytes.len() {
                    return Err(SexpError { offset: start, msg: "unterminated literal" });
                }
                i += 1;
                stack.last_mut().expect("nonempty").push(Sexp::Atom(src[start..i].to_string()));
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !b"();".contains(&bytes[i]) {
                    i += 1;
                }
                stack.last_mut().expect("nonempty").push(Sexp::Atom(src[start..i].to_string()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SexpError { offset: src.len(), msg: "unbalanced `(`" });
    }
    Ok(stack.pop().expect("top level"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_and_comments() {
        let xs = parse_all("sat ; hi\n((define-fun c0 () (_ BitVec 8) #x18))").unwrap();
        assert_eq!(xs.len(), 2);
        assert_eq!(xs[0], Sexp::Atom("sat".into()));
        assert_eq!(xs[1].to_string(), "((define-fun c0 () (_ BitVec 8) #x18))");
    }

    #[test]
    fn quoted_symbols() {
        let xs = parse_all("(|a b| \"x)y\")").unwrap();
        assert_eq!(xs[0].list().unwrap()[0].atom(), Some("|a b|"));
    }

    #[test]
    fn unbalanced() {
        assert!(parse_all("(a").is_err());
        assert!(parse_all("a)").is_err());
    }
}
