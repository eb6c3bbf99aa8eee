use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::LaurentPoly;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn err(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        message: message.into(),
    }
}

fn lex(text: &str, dim: usize) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Num(text[start..i].parse().expect("digits"))));
                continue;
            }
            b'X' | b'x' => {
                i += 1;
                let s = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if s == i {
                    return Err(err(start, "variable name needs an index, e.g. X1"));
                }
                let k: usize = text[s..i].parse().map_err(|_| err(start, "variable index too large"))?;
                if k == 0 || k > dim {
                    return Err(err(start, format!("variable X{k} out of range 1..={dim}")));
                }
                out.push((start, Tok::Var(k - 1)));
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(err(start, format!("unexpected character {ch:?}")));
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<LaurentPoly, ParseError> {
        let mut acc = LaurentPoly::zero(self.dim);
        let mut first = true;
        loop {
            let negate = match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    false
                }
                Some(Tok::Minus) => {
                    self.bump();
                    true
                }
                _ if first => false,
                _ => break,
            };
            first = false;
            let t = self.term()?;
            acc = if negate { &acc - &t } else { &acc + &t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<LaurentPoly, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LaurentPoly, ParseError> {
        let at = self.here();
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let neg = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                true
            }
            Some(Tok::Plus) => {
                self.bump();
                false
            }
            _ => false,
        };
        let ep = self.here();
        let n = match self.bump() {
            Some(Tok::Num(n)) => n,
            _ => return Err(err(ep, "expected an integer exponent")),
        };
        let n: u32 = n.try_into().map_err(|_| err(ep, "exponent too large"))?;
        if !neg {
            return Ok(base.pow(n));
        }
        if !base.is_unit() {
            return Err(err(at, "negative powers apply only to monomials"));
        }
        let (e, c) = base.terms().next().expect("unit has one term");
        let inv = LaurentPoly::monomial(self.dim, e.iter().map(|x| -x).collect(), c.recip());
        Ok(inv.pow(n))
    }

    fn atom(&mut self) -> Result<LaurentPoly, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num(n)) => {
                let mut den = BigInt::one();
                if self.peek() == Some(&Tok::Slash) {
                    self.bump();
                    let dp = self.here();
                    match self.bump() {
                        Some(Tok::Num(d)) if !d.is_zero() => den = d,
                        Some(Tok::Num(_)) => return Err(err(dp, "zero denominator")),
                        _ => return Err(err(dp, "expected a denominator")),
                    }
                }
                Ok(LaurentPoly::constant(self.dim, BigRational::new(n, den)))
            }
            Some(Tok::Var(i)) => Ok(LaurentPoly::variable(self.dim, i)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let rp = self.here();
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(rp, "expected ')'")),
                }
            }
            Some(_) => Err(err(at, "expected a number, variable or '('")),
            None => Err(err(at, "unexpected end of input")),
        }
    }
}

pub(super) fn parse(text: &str, dim: usize) -> Result<LaurentPoly, ParseError> {
    let toks = lex(text, dim)?;
    if toks.is_empty() {
        return Err(err(0, "empty polynomial"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        dim,
    };
    let out = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(err(p.here(), "unexpected trailing input"));
    }
    Ok(out)
}
