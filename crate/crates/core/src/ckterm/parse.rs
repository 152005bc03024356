//! Expression syntax for elements of the algebra:
//!
//! ```text
//! expr    := ('+' | '-')? term (('+' | '-') term)* ;
//! term    := coeff factor* | factor+ ;
//! coeff   := integer ('/' integer)? ;
//! factor  := atom '*'? ;                 // postfix '*' is the adjoint
//! atom    := '1' | 'S' '(' id+ ')' | '(' expr ')' ;
//! ```
//!
//! Juxtaposition is the product, so `S(a1) * S(a2)` reads as
//! `S(a1)^* S(a2)`. `S(a1 a2)` is sugar for `S(a1) S(a2)`. A bare
//! coefficient such as `2` or `0` denotes a multiple of the unit.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Polynomial, Presentation};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CkExpr {
    Unit,
    /// A single generator `S_e`.
    Gen(usize),
    Sum(Vec<CkExpr>),
    Scale(BigRational, Box<CkExpr>),
    Product(Vec<CkExpr>),
    Adjoint(Box<CkExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Slash,
    Star,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '/' => Tok::Slash,
            '*' => Tok::Star,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Int(text[start..i].parse().expect("digits"))));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    alphabet: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<CkExpr> {
        let mut terms = Vec::new();
        let mut negate = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        loop {
            let t = self.term()?;
            terms.push(if negate {
                CkExpr::Scale(-BigRational::one(), Box::new(t))
            } else {
                t
            });
            match self.peek() {
                Some(Tok::Plus) => negate = false,
                Some(Tok::Minus) => negate = true,
                _ => break,
            }
            self.pos += 1;
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            CkExpr::Sum(terms)
        })
    }

    fn starts_factor(&self) -> bool {
        match self.peek() {
            Some(Tok::LParen) => true,
            Some(Tok::Ident(s)) => s == "S",
            Some(Tok::Int(n)) => n.is_one(),
            _ => false,
        }
    }

    fn term(&mut self) -> Result<CkExpr> {
        let unit_literal = matches!(self.peek(), Some(Tok::Int(n)) if n.is_one())
            && self.toks.get(self.pos + 1).map(|(_, t)| t) != Some(&Tok::Slash);
        let coeff = match self.peek() {
            Some(Tok::Int(_)) if !unit_literal => Some(self.coeff()?),
            _ => None,
        };
        let mut factors = Vec::new();
        while self.starts_factor() {
            factors.push(self.factor()?);
        }
        let body = match factors.len() {
            0 if coeff.is_some() => CkExpr::Unit,
            0 => return self.err("expected a term"),
            1 => factors.pop().unwrap(),
            _ => CkExpr::Product(factors),
        };
        Ok(match coeff {
            Some(c) => CkExpr::Scale(c, Box::new(body)),
            None => body,
        })
    }

    fn coeff(&mut self) -> Result<BigRational> {
        let Some(Tok::Int(num)) = self.bump() else {
            unreachable!("caller checked for an integer")
        };
        if self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            match self.bump() {
                Some(Tok::Int(den)) if !den.is_zero() => Ok(BigRational::new(num, den)),
                Some(Tok::Int(_)) => {
                    self.pos -= 1;
                    self.err("zero denominator")
                }
                _ => {
                    self.pos -= 1;
                    self.err("expected a denominator")
                }
            }
        } else {
            Ok(BigRational::from_integer(num))
        }
    }

    fn factor(&mut self) -> Result<CkExpr> {
        let atom = self.atom()?;
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            Ok(CkExpr::Adjoint(Box::new(atom)))
        } else {
            Ok(atom)
        }
    }

    fn atom(&mut self) -> Result<CkExpr> {
        match self.peek() {
            Some(Tok::Int(n)) if n.is_one() => {
                self.pos += 1;
                Ok(CkExpr::Unit)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(s)) if s == "S" => {
                self.pos += 1;
                self.expect(Tok::LParen, "`(` after S")?;
                let mut gens = Vec::new();
                while let Some(Tok::Ident(id)) = self.peek() {
                    let Some(e) = self.alphabet.iter().position(|a| a == id) else {
                        return Err(Error::UnknownGenerator(id.clone()));
                    };
                    gens.push(CkExpr::Gen(e));
                    self.pos += 1;
                }
                if gens.is_empty() {
                    return self.err("expected a generator id");
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(if gens.len() == 1 {
                    gens.pop().unwrap()
                } else {
                    CkExpr::Product(gens)
                })
            }
            _ => self.err("expected `1`, `S(...)` or `(`"),
        }
    }
}

/// Parses an expression whose generator ids are drawn from `alphabet`;
/// `Gen(i)` refers to `alphabet[i]`.
pub fn parse_ck_expr(text: &str, alphabet: &[String]) -> Result<CkExpr> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        end: text.len(),
        alphabet,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Normal form of an expression.
pub fn evaluate(e: &CkExpr, pres: &Arc<Presentation>) -> Result<Polynomial> {
    Ok(match e {
        CkExpr::Unit => Polynomial::one(pres),
        CkExpr::Gen(i) => {
            if *i >= pres.len() {
                return Err(Error::UnknownGenerator(format!("#{i}")));
            }
            Polynomial::generator(pres, *i)
        }
        CkExpr::Sum(ts) => {
            let mut acc = Polynomial::zero(pres);
            for t in ts {
                acc = acc.add(&evaluate(t, pres)?)?;
            }
            acc
        }
        CkExpr::Scale(c, inner) => evaluate(inner, pres)?.scale(c),
        CkExpr::Product(fs) => {
            let mut acc = Polynomial::one(pres);
            for f in fs {
                acc = acc.mul(&evaluate(f, pres)?)?;
            }
            acc
        }
        CkExpr::Adjoint(inner) => evaluate(inner, pres)?.adjoint(),
    })
}
