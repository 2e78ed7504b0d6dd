//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := ["-"] atom ("^" integer)?
//! atom   := integer | "t" | "q" | generator_name | "(" expr ")"
//! ```
//!
//! `q` resolves to the context's root of unity; whitespace is insignificant.
//! Rational literals like `5/3` are ordinary divisions of integer atoms and
//! fold to constants. Unary minus is accepted in factor position so that
//! printed output (which folds signs into leading rationals) stays within
//! the grammar.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exactfield::{FieldElement, FieldTower, Rat};
use crate::qarith::QContext;
use crate::ratfunc::RatFunc;

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
        }
    }
}

struct Symbols<'a> {
    tower: &'a Arc<FieldTower>,
    q: Option<&'a FieldElement>,
}

/// Parses `text` into a normalized rational function over the context's
/// tower. Reports syntax errors with byte positions; a division whose
/// divisor evaluates to zero is [`Error::DivisionByZeroExpr`].
pub fn parse(ctx: &QContext, text: &str) -> Result<RatFunc> {
    parse_in_tower(ctx.tower(), Some(ctx.q()), text)
}

/// Parser entry point without a full context; `q` is only resolvable when
/// supplied. Used for reading constants out of config files.
pub fn parse_in_tower(
    tower: &Arc<FieldTower>,
    q: Option<&FieldElement>,
    text: &str,
) -> Result<RatFunc> {
    let syms = Symbols { tower, q };
    let mut cur = Cursor {
        src: text.as_bytes(),
        pos: 0,
    };
    let value = expr(&syms, &mut cur)?;
    cur.skip_ws();
    if cur.pos != cur.src.len() {
        return cur.err("unexpected trailing input");
    }
    Ok(value)
}

fn expr(syms: &Symbols, cur: &mut Cursor) -> Result<RatFunc> {
    let mut acc = term(syms, cur)?;
    loop {
        match cur.peek() {
            Some(b'+') => {
                cur.bump();
                acc = acc.add(&term(syms, cur)?);
            }
            Some(b'-') => {
                cur.bump();
                acc = acc.sub(&term(syms, cur)?);
            }
            _ => return Ok(acc),
        }
    }
}

fn term(syms: &Symbols, cur: &mut Cursor) -> Result<RatFunc> {
    let mut acc = factor(syms, cur)?;
    loop {
        match cur.peek() {
            Some(b'*') => {
                cur.bump();
                acc = acc.mul(&factor(syms, cur)?);
            }
            Some(b'/') => {
                cur.bump();
                let rhs = factor(syms, cur)?;
                acc = acc.div(&rhs).map_err(|_| Error::DivisionByZeroExpr)?;
            }
            _ => return Ok(acc),
        }
    }
}

fn factor(syms: &Symbols, cur: &mut Cursor) -> Result<RatFunc> {
    let negate = cur.eat(b'-');
    let base = atom(syms, cur)?;
    let value = if cur.eat(b'^') {
        let neg_exp = cur.eat(b'-');
        let e = cur.integer()?;
        let e: i64 = e
            .try_into()
            .map_err(|_| Error::Syntax {
                pos: cur.pos,
                msg: "exponent out of range".into(),
            })?;
        let e = if neg_exp { -e } else { e };
        base.pow(e).map_err(|_| Error::DivisionByZeroExpr)?
    } else {
        base
    };
    Ok(if negate { value.neg() } else { value })
}

fn atom(syms: &Symbols, cur: &mut Cursor) -> Result<RatFunc> {
    match cur.peek() {
        Some(b'(') => {
            cur.bump();
            let inner = expr(syms, cur)?;
            if !cur.eat(b')') {
                return cur.err("expected ')'");
            }
            Ok(inner)
        }
        Some(c) if c.is_ascii_digit() => {
            let n = cur.integer()?;
            let c = syms
                .tower
                .from_rat(&Rat::from(n))
                .map_err(|e| Error::Invalid(e.to_string()))?;
            Ok(RatFunc::constant(c))
        }
        Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
            let start = cur.pos;
            let name = cur.ident().unwrap();
            match name.as_str() {
                "t" => Ok(RatFunc::var(syms.tower)),
                "q" => match syms.q {
                    Some(q) => Ok(RatFunc::constant(q.clone())),
                    None => Err(Error::Syntax {
                        pos: start,
                        msg: "'q' is not available in this position".into(),
                    }),
                },
                other if other == syms.tower.generator_name() => {
                    Ok(RatFunc::constant(syms.tower.generator()))
                }
                other => Err(Error::Syntax {
                    pos: start,
                    msg: format!("unknown symbol '{other}'"),
                }),
            }
        }
        _ => cur.err("expected an atom"),
    }
}
