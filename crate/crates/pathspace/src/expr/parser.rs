//! Recursive-descent parser for the metric-expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := literal | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `power`'s exponent recursing into `factor` gives `^` right-associativity
//! and lets exponents carry a sign (`x1^-2`), while `-x1^2` still parses as
//! `-(x1^2)` because `factor` is entered before `power`.

use super::{BinOp, Func, MetricExpr, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= self.bytes.len() {
                return Ok(out);
            }
            let start = self.pos;
            let b = self.bytes[self.pos];
            let tok = match b {
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    self.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => self.number(start)?,
                _ if b.is_ascii_alphabetic() => {
                    while self.pos < self.bytes.len()
                        && (self.bytes[self.pos].is_ascii_alphanumeric())
                    {
                        self.pos += 1;
                    }
                    Tok::Ident(self.src[start..self.pos].to_string())
                }
                _ => {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", &self.src[start..start + 1]),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // exponent suffix: e or E, optional sign, digits
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let mut k = self.pos + 1;
            if k < self.bytes.len() && matches!(self.bytes[k], b'+' | b'-') {
                k += 1;
            }
            if k < self.bytes.len() && self.bytes[k].is_ascii_digit() {
                self.pos = k;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.idx += 1;
            Ok(())
        } else {
            Err(ParseError::Syntax {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<MetricExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.idx += 1;
            let rhs = self.term()?;
            lhs = MetricExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<MetricExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.idx += 1;
            let rhs = self.factor()?;
            lhs = MetricExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<MetricExpr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            return Ok(MetricExpr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<MetricExpr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let exponent = self.factor()?;
            return Ok(MetricExpr::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MetricExpr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(MetricExpr::Literal(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(ParseError::ArityMismatch { offset, name });
                    }
                    self.idx += 1;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "closing `)` after function argument")?;
                    return Ok(MetricExpr::Func(f, Box::new(arg)));
                }
                parse_var(&name)
                    .map(MetricExpr::Var)
                    .ok_or(ParseError::UnknownIdentifier { offset, name })
            }
            Some(_) => Err(ParseError::Syntax {
                offset,
                message: "expected a number, variable, function, or `(`".to_string(),
            }),
            None => Err(ParseError::Syntax {
                offset,
                message: "unexpected end of expression".to_string(),
            }),
        }
    }
}

/// `x<k>` with k >= 1 and no leading zeros; returns the 0-based index.
fn parse_var(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<usize>().ok().map(|k| k - 1)
}

/// Parse a metric-expression string into a tree.
pub fn parse_expr(src: &str) -> Result<MetricExpr, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut parser = Parser {
        toks,
        idx: 0,
        end: src.len(),
    };
    let e = parser.expr()?;
    if parser.idx != parser.toks.len() {
        return Err(ParseError::Syntax {
            offset: parser.offset(),
            message: "trailing input after expression".to_string(),
        });
    }
    Ok(e)
}
