//! Near-identity substitution of eps-series into differential polynomials.

use std::collections::HashMap;

use num::One;

use super::atom::{Atom, AtomKind};
use super::eps::EpsSeries;
use super::mono::{Gen, Jet};
use super::poly::DiffPoly;
use super::Rat;
use crate::error::{Error, Result};

/// Memoizing substitution context for a fixed map and truncation order.
pub struct Substitution<'a> {
    map: &'a [EpsSeries],
    order: u32,
    jets: HashMap<Jet, EpsSeries>,
    atoms: HashMap<Atom, EpsSeries>,
}

impl<'a> Substitution<'a> {
    pub fn new(map: &'a [EpsSeries], order: u32) -> Substitution<'a> {
        let order = map.iter().map(EpsSeries::order).fold(order, u32::min);
        Substitution { map, order, jets: HashMap::new(), atoms: HashMap::new() }
    }

    fn jet(&mut self, j: Jet) -> EpsSeries {
        if let Some(s) = self.jets.get(&j) {
            return s.clone();
        }
        let s = match self.map.get(j.comp as usize) {
            None => EpsSeries::from_poly(DiffPoly::mono(super::mono::Mono::jet(j, 1)), self.order),
            Some(m) if j.order == 0 => m.truncate(self.order),
            Some(_) => self.jet(Jet::new(j.comp, j.order - 1)).dx(),
        };
        self.jets.insert(j, s.clone());
        s
    }

    /// `s^{-m}` about the leading coefficient.
    fn inverse_power(&self, s: &EpsSeries, m: i32, what: &dyn std::fmt::Display) -> Result<EpsSeries> {
        if s.leading().is_zero() {
            return Err(Error::SingularSubstitution(format!("leading part of {what} maps to zero")));
        }
        Ok(s.inverse()?.pow(m as u32))
    }

    fn atom(&mut self, a: &Atom) -> Result<EpsSeries> {
        if let Some(s) = self.atoms.get(a) {
            return Ok(s.clone());
        }
        let arg = self.apply(a.arg())?;
        let mut delta = arg.clone();
        delta.set(0, DiffPoly::zero());
        let n = (self.order / 2) as i64;
        let s = match a.kind() {
            AtomKind::Exp => {
                // exp{s0} * sum delta^j / j!
                let base = DiffPoly::exp(arg.leading());
                let mut acc = EpsSeries::from_poly(DiffPoly::one(), self.order);
                let mut pw = acc.clone();
                let mut fact = Rat::one();
                for j in 1..=n {
                    pw = &pw * &delta;
                    fact *= Rat::from_integer(j.into());
                    acc = &acc + &pw.scale(&fact.recip());
                }
                acc.mul_poly(&base)
            }
            AtomKind::Log => {
                let s0 = arg.leading().clone();
                if s0.is_zero() {
                    return Err(Error::SingularSubstitution(format!("log argument of {a:?} maps to zero")));
                }
                let x = delta.mul_poly(&s0.inverse()?);
                let mut acc = EpsSeries::from_poly(DiffPoly::log(&s0)?, self.order);
                let mut pw = EpsSeries::from_poly(DiffPoly::one(), self.order);
                for j in 1..=n {
                    pw = &pw * &x;
                    let c = Rat::new(if j % 2 == 1 { 1.into() } else { (-1).into() }, j.into());
                    acc = &acc + &pw.scale(&c);
                }
                acc
            }
            AtomKind::Inv => self.inverse_power(&arg, 1, &format!("{a:?}"))?,
        };
        self.atoms.insert(a.clone(), s.clone());
        Ok(s)
    }

    pub fn apply(&mut self, expr: &DiffPoly) -> Result<EpsSeries> {
        let mut out = EpsSeries::zero(self.order);
        for (m, c) in expr.terms() {
            let mut t = EpsSeries::from_poly(DiffPoly::constant(c.clone()), self.order);
            for (g, e) in m.factors() {
                let f = match g {
                    Gen::Jet(j) => {
                        let s = self.jet(*j);
                        if *e >= 0 {
                            s.pow(*e as u32)
                        } else {
                            self.inverse_power(&s, -e, &format!("v[{}]_{}", j.comp + 1, j.order))?
                        }
                    }
                    Gen::Atom(a) => {
                        let s = self.atom(a)?;
                        if *e >= 0 {
                            s.pow(*e as u32)
                        } else {
                            // only exponentials carry negative powers
                            self.inverse_power(&s, -e, &format!("{a:?}"))?
                        }
                    }
                };
                t = &t * &f;
            }
            out = &out + &t;
        }
        Ok(out)
    }
}

/// Replace every jet `v^{a,k}` by `dx^k(map[a])`, expand and truncate at `eps^order`.
/// Components beyond `map.len()` are left untouched.
pub fn substitute(expr: &DiffPoly, map: &[EpsSeries], order: u32) -> Result<EpsSeries> {
    Substitution::new(map, order).apply(expr)
}

/// [`substitute`] applied coefficientwise to a series (the result of substituting into
/// `sum eps^{2g} c_g`).
pub fn substitute_series(expr: &EpsSeries, map: &[EpsSeries], order: u32) -> Result<EpsSeries> {
    let mut sub = Substitution::new(map, order.min(expr.order()));
    let order = sub.order;
    let mut out = EpsSeries::zero(order);
    for (g, c) in expr.coeffs().iter().enumerate() {
        if 2 * g as u32 > order {
            break;
        }
        if c.is_zero() {
            continue;
        }
        out = &out + &sub.apply(c)?.shift(g);
    }
    Ok(out)
}

/// The identity map on `n` fields.
pub fn identity_map(n: u16, order: u32) -> Vec<EpsSeries> {
    (0..n).map(|a| EpsSeries::from_poly(DiffPoly::jet(a, 0), order)).collect()
}
