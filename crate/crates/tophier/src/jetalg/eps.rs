use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::poly::DiffPoly;
use super::Rat;
use crate::error::Result;

/// Truncated series `sum_{g=0}^{E/2} eps^{2g} c_g` with differential-polynomial
/// coefficients. Only even powers exist; `order` is the largest retained power E.
///
/// A genus expansion `sum_{g>=1} eps^{2g-2} F_g` is stored shifted by `eps^2`:
/// slot 0 holds `F_1`, slot 1 holds `F_2`, and so on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EpsSeries {
    order: u32,
    coeffs: Vec<DiffPoly>,
}

impl EpsSeries {
    pub fn zero(order: u32) -> EpsSeries {
        assert!(order % 2 == 0, "eps order must be even");
        EpsSeries { order, coeffs: vec![DiffPoly::zero(); (order / 2 + 1) as usize] }
    }

    pub fn from_poly(p: DiffPoly, order: u32) -> EpsSeries {
        let mut s = EpsSeries::zero(order);
        s.coeffs[0] = p;
        s
    }

    /// Build from coefficients of eps^0, eps^2, ...; extra entries are dropped.
    pub fn from_coeffs(coeffs: Vec<DiffPoly>, order: u32) -> EpsSeries {
        let mut s = EpsSeries::zero(order);
        for (g, c) in coeffs.into_iter().enumerate() {
            if g < s.coeffs.len() {
                s.coeffs[g] = c;
            }
        }
        s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficient of `eps^{2g}`.
    pub fn coeff(&self, g: usize) -> &DiffPoly {
        &self.coeffs[g]
    }

    pub fn set(&mut self, g: usize, p: DiffPoly) {
        self.coeffs[g] = p;
    }

    pub fn coeffs(&self) -> &[DiffPoly] {
        &self.coeffs
    }

    pub fn leading(&self) -> &DiffPoly {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(DiffPoly::is_zero)
    }

    pub fn truncate(&self, order: u32) -> EpsSeries {
        let order = order.min(self.order);
        EpsSeries::from_coeffs(self.coeffs.clone(), order)
    }

    /// Multiply by `eps^{2k}`, dropping what falls off the end.
    pub fn shift(&self, k: usize) -> EpsSeries {
        let mut s = EpsSeries::zero(self.order);
        for g in 0..self.coeffs.len() {
            if g + k < s.coeffs.len() {
                s.coeffs[g + k] = self.coeffs[g].clone();
            }
        }
        s
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> EpsSeries {
        EpsSeries { order: self.order, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&DiffPoly) -> Result<DiffPoly>) -> Result<EpsSeries> {
        Ok(EpsSeries {
            order: self.order,
            coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn dx(&self) -> EpsSeries {
        self.map(DiffPoly::dx)
    }

    pub fn scale(&self, c: &Rat) -> EpsSeries {
        self.map(|p| p.scale(c))
    }

    pub fn mul_poly(&self, p: &DiffPoly) -> EpsSeries {
        self.map(|c| c * p)
    }

    pub fn pow(&self, n: u32) -> EpsSeries {
        let mut out = EpsSeries::from_poly(DiffPoly::one(), self.order);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Inverse via the geometric series around the leading coefficient.
    pub fn inverse(&self) -> Result<EpsSeries> {
        let c0inv = self.coeffs[0].inverse()?;
        let c0inv_s = EpsSeries::from_poly(c0inv.clone(), self.order);
        let mut delta = self.clone();
        delta.coeffs[0] = DiffPoly::zero();
        let x = -(&delta * &c0inv_s);
        let mut out = EpsSeries::from_poly(DiffPoly::one(), self.order);
        let mut pw = out.clone();
        for _ in 0..self.order / 2 {
            pw = &pw * &x;
            out = &out + &pw;
        }
        Ok(&out * &c0inv_s)
    }

    /// Evolutionary derivative of every coefficient along a series-valued flow.
    pub fn evolve(&self, flow: &[EpsSeries], order: u32) -> EpsSeries {
        let order = order.min(self.order);
        let mut out = EpsSeries::zero(order);
        for (g, c) in self.coeffs.iter().enumerate() {
            if 2 * g as u32 > order {
                break;
            }
            for j in c.jets() {
                let Some(k) = flow.get(j.comp as usize) else { continue };
                let d = c.partial(j);
                if d.is_zero() {
                    continue;
                }
                let dk = k.map(|p| p.dx_n(j.order));
                for h in 0..out.coeffs.len() {
                    if g + h >= out.coeffs.len() || h >= dk.coeffs.len() {
                        break;
                    }
                    let t = &d * &dk.coeffs[h];
                    out.coeffs[g + h] += t;
                }
            }
        }
        out
    }

    /// Coefficientwise semantic equality (see [`DiffPoly::equiv`]) up to the common order.
    pub fn equiv(&self, other: &EpsSeries) -> bool {
        let n = self.coeffs.len().min(other.coeffs.len());
        (0..n).all(|g| self.coeffs[g].equiv(&other.coeffs[g]))
    }
}

impl<'a> Add<&'a EpsSeries> for &'a EpsSeries {
    type Output = EpsSeries;
    fn add(self, rhs: &EpsSeries) -> EpsSeries {
        let order = self.order.min(rhs.order);
        let mut s = EpsSeries::zero(order);
        for g in 0..s.coeffs.len() {
            s.coeffs[g] = &self.coeffs[g] + &rhs.coeffs[g];
        }
        s
    }
}

impl<'a> Sub<&'a EpsSeries> for &'a EpsSeries {
    type Output = EpsSeries;
    fn sub(self, rhs: &EpsSeries) -> EpsSeries {
        let order = self.order.min(rhs.order);
        let mut s = EpsSeries::zero(order);
        for g in 0..s.coeffs.len() {
            s.coeffs[g] = &self.coeffs[g] - &rhs.coeffs[g];
        }
        s
    }
}

impl Neg for &EpsSeries {
    type Output = EpsSeries;
    fn neg(self) -> EpsSeries {
        self.map(|p| -p)
    }
}

impl Neg for EpsSeries {
    type Output = EpsSeries;
    fn neg(self) -> EpsSeries {
        -&self
    }
}

impl<'a> Mul<&'a EpsSeries> for &'a EpsSeries {
    type Output = EpsSeries;
    fn mul(self, rhs: &EpsSeries) -> EpsSeries {
        let order = self.order.min(rhs.order);
        let mut s = EpsSeries::zero(order);
        let n = s.coeffs.len();
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                if rhs.coeffs[j].is_zero() {
                    continue;
                }
                let t = &self.coeffs[i] * &rhs.coeffs[j];
                s.coeffs[i + j] += t;
            }
        }
        s
    }
}

impl fmt::Display for EpsSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (g, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" ; ")?;
            }
            first = false;
            write!(f, "eps^{}: {}", 2 * g, c)?;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " ; O(eps^{})", self.order + 2)
    }
}

impl fmt::Debug for EpsSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EpsSeries({self})")
    }
}
