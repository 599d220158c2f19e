//! Pseudodifferential operators in the symbol `eps*d/dx` over the single-field
//! jet algebra, and the Lax construction of the KdV flows.
//!
//! An operator is `sum_j a_j (eps d_x)^j` with `a_j` a polynomial in `eps`
//! whose coefficients are differential polynomials in `u = v[1]`. Everything
//! below the order `low` is discarded.

use std::collections::BTreeMap;
use std::fmt;

use num::Zero;

use crate::error::{Error, Result};
use crate::jetalg::{binom, double_factorial, rat, DiffPoly, EpsSeries, Rat};

/// Polynomial in eps: index = power of eps.
pub type EpsPoly = Vec<DiffPoly>;

#[derive(Clone, PartialEq)]
pub struct PseudoDiffOp {
    low: i32,
    eps_max: u32,
    coeffs: BTreeMap<i32, EpsPoly>,
}

fn is_zero_poly(p: &EpsPoly) -> bool {
    p.iter().all(DiffPoly::is_zero)
}

impl PseudoDiffOp {
    pub fn zero(low: i32, eps_max: u32) -> PseudoDiffOp {
        PseudoDiffOp { low, eps_max, coeffs: BTreeMap::new() }
    }

    /// `(eps d)^j` times a coefficient with no eps.
    pub fn monomial(j: i32, a: DiffPoly, low: i32, eps_max: u32) -> PseudoDiffOp {
        let mut op = PseudoDiffOp::zero(low, eps_max);
        op.add_at(j, 0, a);
        op
    }

    /// `L = 1/2 (eps d)^2 + u`.
    pub fn lax(low: i32, eps_max: u32) -> PseudoDiffOp {
        let mut op = PseudoDiffOp::monomial(2, DiffPoly::constant(rat(1, 2)), low, eps_max);
        op.add_at(0, 0, DiffPoly::jet(0, 0));
        op
    }

    pub fn low(&self) -> i32 {
        self.low
    }

    pub fn eps_max(&self) -> u32 {
        self.eps_max
    }

    /// Add `eps^e * a * (eps d)^j`.
    pub fn add_at(&mut self, j: i32, e: u32, a: DiffPoly) {
        if j < self.low || e > self.eps_max || a.is_zero() {
            return;
        }
        let slot = self
            .coeffs
            .entry(j)
            .or_insert_with(|| vec![DiffPoly::zero(); self.eps_max as usize + 1]);
        slot[e as usize] += a;
        if is_zero_poly(slot) {
            self.coeffs.remove(&j);
        }
    }

    /// Highest order with a nonzero coefficient.
    pub fn order(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn orders(&self) -> impl Iterator<Item = i32> + '_ {
        self.coeffs.keys().copied()
    }

    /// Coefficient of `eps^e (eps d)^j`.
    pub fn coeff(&self, j: i32, e: u32) -> DiffPoly {
        self.coeffs
            .get(&j)
            .and_then(|p| p.get(e as usize))
            .cloned()
            .unwrap_or_default()
    }

    pub fn coeff_poly(&self, j: i32) -> EpsPoly {
        self.coeffs
            .get(&j)
            .cloned()
            .unwrap_or_else(|| vec![DiffPoly::zero(); self.eps_max as usize + 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &Rat) -> PseudoDiffOp {
        let mut out = PseudoDiffOp::zero(self.low, self.eps_max);
        for (j, p) in &self.coeffs {
            for (e, a) in p.iter().enumerate() {
                out.add_at(*j, e as u32, a.scale(c));
            }
        }
        out
    }

    pub fn add(&self, other: &PseudoDiffOp) -> PseudoDiffOp {
        let mut out = PseudoDiffOp {
            low: self.low.max(other.low),
            eps_max: self.eps_max.min(other.eps_max),
            coeffs: BTreeMap::new(),
        };
        for op in [self, other] {
            for (j, p) in &op.coeffs {
                for (e, a) in p.iter().enumerate() {
                    out.add_at(*j, e as u32, a.clone());
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &PseudoDiffOp) -> PseudoDiffOp {
        self.add(&other.scale(&Rat::from_integer((-1).into())))
    }

    /// Differential part: orders `>= 0`.
    pub fn plus_part(&self) -> PseudoDiffOp {
        let mut out = self.clone();
        out.coeffs.retain(|j, _| *j >= 0);
        out.low = 0;
        out
    }

    /// Composition `self o other`, truncated below order `low`, via
    /// `(eps d)^j o f = sum_s C(j,s) eps^s f^{(s)} (eps d)^{j-s}`.
    pub fn compose(&self, other: &PseudoDiffOp, low: i32) -> PseudoDiffOp {
        let eps_max = self.eps_max.min(other.eps_max);
        let mut out = PseudoDiffOp::zero(low, eps_max);
        for (&j, b) in &other.coeffs {
            // derivatives of b, computed lazily and shared across all a_i
            let mut derivs: Vec<EpsPoly> = vec![b.clone()];
            for (&i, a) in &self.coeffs {
                for s in 0u32.. {
                    let order = i + j - s as i32;
                    if order < low || s > eps_max {
                        break;
                    }
                    let c = binom(i as i64, s);
                    if c.is_zero() {
                        if i >= 0 {
                            break;
                        }
                        continue;
                    }
                    while derivs.len() <= s as usize {
                        let next = derivs.last().unwrap().iter().map(DiffPoly::dx).collect();
                        derivs.push(next);
                    }
                    let db = &derivs[s as usize];
                    for (ea, ca) in a.iter().enumerate() {
                        if ca.is_zero() {
                            continue;
                        }
                        for (eb, cb) in db.iter().enumerate() {
                            let e = ea as u32 + eb as u32 + s;
                            if e > eps_max {
                                break;
                            }
                            if cb.is_zero() {
                                continue;
                            }
                            out.add_at(order, e, (ca * cb).scale(&c));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &PseudoDiffOp, low: i32) -> PseudoDiffOp {
        self.compose(other, low).sub(&other.compose(self, low))
    }

    pub fn pow(&self, n: u32, low: i32) -> PseudoDiffOp {
        let mut out = PseudoDiffOp::monomial(0, DiffPoly::one(), low, self.eps_max);
        for _ in 0..n {
            out = out.compose(self, low);
        }
        out
    }
}

impl fmt::Display for PseudoDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, p) in self.coeffs.iter().rev() {
            for (e, a) in p.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                if !first {
                    f.write_str(" + ")?;
                }
                first = false;
                write!(f, "eps^{e}*({a})*D^{j}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PseudoDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PseudoDiffOp[low={}, eps<={}]({self})", self.low, self.eps_max)
    }
}

/// `R` with `R o R = 2L`, leading symbol `eps d`, retained down to order `-m`.
/// Each new coefficient is read off one order of `2L - R o R`.
pub fn sqrt2l(m: u32, eps_max: u32) -> PseudoDiffOp {
    let low = -(m as i32);
    let two_l = PseudoDiffOp::lax(low, eps_max).scale(&Rat::from_integer(2.into()));
    let mut r = PseudoDiffOp::monomial(1, DiffPoly::one(), low, eps_max);
    for n in 1..=(m as i32 + 1) {
        let target = 2 - n;
        let sq = r.compose(&r, target);
        for e in 0..=eps_max {
            let resid = &two_l.coeff(target, e) - &sq.coeff(target, e);
            r.add_at(1 - n, e, resid.scale(&rat(1, 2)));
        }
    }
    r
}

/// Truncation used for flow `i` at eps-order `e`.
pub fn truncation_for(i: u32, e: u32) -> u32 {
    (e / 2 + 2).max(2 * i + 1)
}

/// `A_i = (2L)^{(2i+1)/2}_+ / (2i+1)!!`.
pub fn a_operator(i: u32, m: u32, eps_max: u32) -> PseudoDiffOp {
    let r = sqrt2l(m, eps_max);
    let p = r.pow(2 * i + 1, -(m as i32));
    p.plus_part().scale(&double_factorial(2 * i as i64 + 1).recip())
}

/// Right-hand side of `u_{t_i}` from `eps u_{t_i} = [A_i, L]`, through `eps^e`.
pub fn kdv_rhs(i: u32, e: u32) -> Result<EpsSeries> {
    if e % 2 != 0 {
        return Err(Error::Precondition(format!("eps order {e} must be even")));
    }
    let eps_max = e + 1;
    let m = truncation_for(i, e);
    let a = a_operator(i, m, eps_max);
    let l = PseudoDiffOp::lax(0, eps_max);
    let c = a.commutator(&l, 0);
    for j in c.orders() {
        if j != 0 {
            return Err(Error::Consistency(format!(
                "[A_{i}, L] has a nonzero symbol at order {j}"
            )));
        }
    }
    let c0 = c.coeff_poly(0);
    for (k, p) in c0.iter().enumerate() {
        if k % 2 == 0 && !p.is_zero() {
            return Err(Error::Consistency(format!(
                "[A_{i}, L] has an even eps power {k}: {p}"
            )));
        }
    }
    let coeffs = (0..=e / 2).map(|g| c0[2 * g as usize + 1].clone()).collect();
    Ok(EpsSeries::from_coeffs(coeffs, e))
}
