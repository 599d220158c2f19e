//! Canonical text form of [`DiffPoly`] and a parser accepting it (plus the
//! ordinary arithmetic needed to write fixtures by hand).
//!
//! Grammar: `expr := term (('+'|'-') term)*`, `term := unary (('*'|'/') unary)*`,
//! `unary := '-' unary | power`, `power := atom ('^' int)?`, and atoms are
//! integers, jets `v[<label>]_<k>`, `exp{..}`, `log{..}`, `inv{..}` or `(..)`.

use std::fmt;
use std::str::FromStr;

use num::{One, Signed};

use super::atom::AtomKind;
use super::mono::{Gen, Mono};
use super::poly::{is_negative, DiffPoly};
use super::Rat;
use crate::error::{Error, Result};

fn write_factor(f: &mut fmt::Formatter<'_>, g: &Gen, e: i32) -> fmt::Result {
    let pow = |f: &mut fmt::Formatter<'_>, e: i32| if e == 1 { Ok(()) } else { write!(f, "^{e}") };
    match g {
        Gen::Jet(j) => {
            if e < 0 {
                write!(f, "inv{{v[{}]_{}}}", j.comp + 1, j.order)?;
                pow(f, -e)
            } else {
                write!(f, "v[{}]_{}", j.comp + 1, j.order)?;
                pow(f, e)
            }
        }
        Gen::Atom(a) => {
            let tag = match a.kind() {
                AtomKind::Exp => "exp",
                AtomKind::Log => "log",
                AtomKind::Inv => "inv",
            };
            write!(f, "{tag}{{{}}}", a.key())?;
            pow(f, e)
        }
    }
}

fn write_mono(f: &mut fmt::Formatter<'_>, m: &Mono) -> fmt::Result {
    for (i, (g, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        write_factor(f, g, *e)?;
    }
    Ok(())
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = is_negative(c);
            let a = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                write_mono(f, m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffPoly({self})")
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).expect("ascii"))
    }

    fn expr(&mut self) -> Result<DiffPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc += &self.term()?;
            } else if self.eat(b'-') {
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<DiffPoly> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.eat(b'/') {
                let d = self.unary()?;
                acc = &acc * &d.inverse()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<DiffPoly> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let n: i32 = self.digits()?.parse().map_err(|_| Error::Parse {
                pos: self.pos,
                msg: "exponent out of range".into(),
            })?;
            return base.powi(if neg { -n } else { n });
        }
        Ok(base)
    }

    fn braced(&mut self) -> Result<DiffPoly> {
        self.expect(b'{')?;
        let e = self.expr()?;
        self.expect(b'}')?;
        Ok(e)
    }

    fn atom(&mut self) -> Result<DiffPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits()?;
                let n: num::BigInt = d.parse().expect("digits");
                Ok(DiffPoly::constant(Rat::from_integer(n)))
            }
            _ => {
                if self.keyword("exp") {
                    let a = self.braced()?;
                    Ok(DiffPoly::exp(&a))
                } else if self.keyword("log") {
                    let a = self.braced()?;
                    DiffPoly::log(&a)
                } else if self.keyword("inv") {
                    let a = self.braced()?;
                    a.inverse()
                } else if self.keyword("v[") {
                    let label: u16 = self.digits()?.parse().map_err(|_| Error::Parse {
                        pos: self.pos,
                        msg: "component label out of range".into(),
                    })?;
                    if label == 0 {
                        return self.err("component labels start at 1");
                    }
                    self.expect(b']')?;
                    if self.s.get(self.pos) != Some(&b'_') {
                        return self.err("expected '_' after jet label");
                    }
                    self.pos += 1;
                    let k: u32 = self.digits()?.parse().map_err(|_| Error::Parse {
                        pos: self.pos,
                        msg: "jet order out of range".into(),
                    })?;
                    Ok(DiffPoly::jet(label - 1, k))
                } else {
                    self.err("unexpected input")
                }
            }
        }
    }
}

impl FromStr for DiffPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<DiffPoly> {
        let mut p = Parser { s: s.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }
}

/// Parse, panicking on malformed input. For fixtures written in source.
pub fn dp(s: &str) -> DiffPoly {
    s.parse().unwrap_or_else(|e| panic!("fixture {s:?}: {e}"))
}
