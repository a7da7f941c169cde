//! Arithmetic expressions over named ciphertexts and integer literals.
//!
//! Grammar:
//!   expr   := term (('+' | '-') term)*
//!   term   := factor ('*' factor)*
//!   factor := IDENT | INT | '(' expr ')'
//!
//! There is deliberately no division and no comparison: neither exists
//! homomorphically, so the grammar cannot express them. Chained sums and
//! products parse into n-ary nodes which the evaluator lowers as balanced
//! trees to minimize multiplicative depth.

use hefv::BigInt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ident(String),
    Literal(BigInt),
    /// term₀ ± term₁ ± …; the first sign is always `+`.
    Sum(Vec<(Sign, Expr)>),
    /// factor₀ · factor₁ · …
    Prod(Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// A parse failure, with the byte position where it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "parse error at position {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        bytes: input.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let first = self.term()?;
        let mut terms = vec![(Sign::Plus, first)];
        loop {
            self.skip_ws();
            let sign = match self.peek() {
                Some(b'+') => Sign::Plus,
                Some(b'-') => Sign::Minus,
                _ => break,
            };
            self.pos += 1;
            terms.push((sign, self.term()?));
        }
        if terms.len() == 1 {
            Ok(terms.pop().unwrap().1)
        } else {
            Ok(Expr::Sum(terms))
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                factors.push(self.factor()?);
            } else {
                break;
            }
        }
        if factors.len() == 1 {
            Ok(factors.pop().unwrap())
        } else {
            Ok(Expr::Prod(factors))
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                Ok(Expr::Literal(text.parse().unwrap()))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                Ok(Expr::Ident(name.to_string()))
            }
            Some(_) => Err(self.error("expected identifier, integer, or '('")),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

impl Expr {
    /// Multiplicative depth under balanced-tree lowering: a product of k
    /// factors costs ⌈log₂ k⌉ levels on top of its deepest factor.
    pub fn mult_depth(&self) -> u32 {
        match self {
            Expr::Ident(_) | Expr::Literal(_) => 0,
            Expr::Sum(terms) => terms.iter().map(|(_, t)| t.mult_depth()).max().unwrap_or(0),
            Expr::Prod(factors) => {
                let inner = factors.iter().map(Expr::mult_depth).max().unwrap_or(0);
                inner + (factors.len() as u32).next_power_of_two().trailing_zeros()
            }
        }
    }

    /// All identifiers appearing in the expression.
    pub fn idents(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_idents(&mut out);
        out
    }

    fn collect_idents<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Ident(name) => out.push(name),
            Expr::Literal(_) => {}
            Expr::Sum(terms) => terms.iter().for_each(|(_, t)| t.collect_idents(out)),
            Expr::Prod(factors) => factors.iter().for_each(|f| f.collect_idents(out)),
        }
    }

    pub fn has_literal(&self) -> bool {
        match self {
            Expr::Ident(_) => false,
            Expr::Literal(_) => true,
            Expr::Sum(terms) => terms.iter().any(|(_, t)| t.has_literal()),
            Expr::Prod(factors) => factors.iter().any(Expr::has_literal),
        }
    }

    /// Evaluates over plain integers; the oracle the encrypted evaluator
    /// is tested against.
    pub fn eval_plain<F>(&self, lookup: &F) -> Option<BigInt>
    where
        F: Fn(&str) -> Option<BigInt>,
    {
        match self {
            Expr::Ident(name) => lookup(name),
            Expr::Literal(v) => Some(v.clone()),
            Expr::Sum(terms) => {
                let mut acc = BigInt::from(0);
                for (sign, t) in terms {
                    let v = t.eval_plain(lookup)?;
                    match sign {
                        Sign::Plus => acc += v,
                        Sign::Minus => acc -= v,
                    }
                }
                Some(acc)
            }
            Expr::Prod(factors) => {
                let mut acc = BigInt::from(1);
                for f in factors {
                    acc *= f.eval_plain(lookup)?;
                }
                Some(acc)
            }
        }
    }
}
