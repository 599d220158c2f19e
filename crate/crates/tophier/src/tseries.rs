//! Sparse truncated power series in the times `t^a_p`, truncated by total degree.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::jetalg::{factorial, ri, Rat};

/// The time `t^comp_p`; for single-field series `comp = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time {
    pub comp: u16,
    pub p: u16,
}

impl Time {
    pub fn new(comp: u16, p: u16) -> Time {
        Time { comp, p }
    }

    pub fn t(p: u16) -> Time {
        Time { comp: 0, p }
    }
}

/// Sorted `(time, exponent)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TMono(Vec<(Time, u32)>);

impl TMono {
    pub fn one() -> TMono {
        TMono(Vec::new())
    }

    pub fn from_times(times: &[Time]) -> TMono {
        let mut m: BTreeMap<Time, u32> = BTreeMap::new();
        for t in times {
            *m.entry(*t).or_default() += 1;
        }
        TMono(m.into_iter().collect())
    }

    pub fn factors(&self) -> &[(Time, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, t: Time) -> u32 {
        self.0.iter().find(|(s, _)| *s == t).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &TMono) -> TMono {
        let mut m: BTreeMap<Time, u32> = self.0.iter().copied().collect();
        for (t, e) in &other.0 {
            *m.entry(*t).or_default() += e;
        }
        TMono(m.into_iter().collect())
    }

    /// `Π m_t!`, converting a coefficient into a correlator.
    pub fn symmetry_factor(&self) -> Rat {
        self.0.iter().map(|(_, e)| factorial(*e)).fold(Rat::one(), |a, b| a * b)
    }

    fn lower(&self, t: Time) -> Option<(TMono, u32)> {
        let e = self.exponent(t);
        if e == 0 {
            return None;
        }
        let v = self
            .0
            .iter()
            .filter_map(|(s, k)| {
                if *s != t {
                    Some((*s, *k))
                } else if *k > 1 {
                    Some((*s, k - 1))
                } else {
                    None
                }
            })
            .collect();
        Some((TMono(v), e))
    }
}

impl fmt::Display for TMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (t, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "t{}_{}", t.comp + 1, t.p)?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Power series truncated at total degree `max_deg`.
#[derive(Clone, PartialEq)]
pub struct TSeries {
    max_deg: u32,
    terms: BTreeMap<TMono, Rat>,
}

impl TSeries {
    pub fn zero(max_deg: u32) -> TSeries {
        TSeries { max_deg, terms: BTreeMap::new() }
    }

    pub fn constant(c: Rat, max_deg: u32) -> TSeries {
        let mut s = TSeries::zero(max_deg);
        s.add_term(TMono::one(), c);
        s
    }

    pub fn one(max_deg: u32) -> TSeries {
        TSeries::constant(Rat::one(), max_deg)
    }

    pub fn var(t: Time, max_deg: u32) -> TSeries {
        let mut s = TSeries::zero(max_deg);
        s.add_term(TMono::from_times(&[t]), Rat::one());
        s
    }

    pub fn max_deg(&self) -> u32 {
        self.max_deg
    }

    pub fn add_term(&mut self, m: TMono, c: Rat) {
        if m.degree() > self.max_deg || c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TMono, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &TMono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&TMono::one())
    }

    pub fn truncate(&self, max_deg: u32) -> TSeries {
        let mut s = TSeries::zero(max_deg.min(self.max_deg));
        for (m, c) in &self.terms {
            s.add_term(m.clone(), c.clone());
        }
        s
    }

    /// Terms of exactly degree `d`.
    pub fn slice(&self, d: u32) -> TSeries {
        let mut s = TSeries::zero(self.max_deg);
        for (m, c) in &self.terms {
            if m.degree() == d {
                s.add_term(m.clone(), c.clone());
            }
        }
        s
    }

    pub fn plus(&self, other: &TSeries) -> TSeries {
        let mut s = self.truncate(other.max_deg);
        for (m, c) in &other.terms {
            s.add_term(m.clone(), c.clone());
        }
        s
    }

    pub fn scale(&self, c: &Rat) -> TSeries {
        let mut s = TSeries::zero(self.max_deg);
        for (m, v) in &self.terms {
            s.add_term(m.clone(), v * c);
        }
        s
    }

    pub fn minus(&self, other: &TSeries) -> TSeries {
        self.plus(&other.scale(&ri(-1)))
    }

    pub fn mul(&self, other: &TSeries) -> TSeries {
        let max_deg = self.max_deg.min(other.max_deg);
        let mut acc: BTreeMap<TMono, Rat> = BTreeMap::new();
        for (a, ca) in &self.terms {
            let da = a.degree();
            for (b, cb) in &other.terms {
                if da + b.degree() > max_deg {
                    continue;
                }
                *acc.entry(a.mul(b)).or_insert_with(Rat::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        TSeries { max_deg, terms: acc }
    }

    pub fn pow(&self, n: u32) -> TSeries {
        (0..n).fold(TSeries::one(self.max_deg), |acc, _| acc.mul(self))
    }

    /// `d/dt`; the result is exact through degree `max_deg - 1`.
    pub fn deriv(&self, t: Time) -> TSeries {
        let mut s = TSeries::zero(self.max_deg.saturating_sub(1));
        for (m, c) in &self.terms {
            if let Some((low, e)) = m.lower(t) {
                s.add_term(low, c * Rat::from_integer(e.into()));
            }
        }
        s
    }

    /// `1/self` for a series with constant term `c != 0`.
    pub fn inverse(&self) -> Option<TSeries> {
        let c = self.constant_term();
        if c.is_zero() {
            return None;
        }
        let cinv = c.recip();
        let mut x = self.scale(&cinv);
        x.add_term(TMono::one(), -Rat::one());
        // 1/(1+x) = sum (-x)^j, finite since x has no constant term
        let neg = x.scale(&ri(-1));
        let mut out = TSeries::one(self.max_deg);
        let mut pw = out.clone();
        for _ in 0..self.max_deg {
            pw = pw.mul(&neg);
            if pw.is_zero() {
                break;
            }
            out = out.plus(&pw);
        }
        Some(out.scale(&cinv))
    }

    /// `log(self)` for a series with constant term 1.
    pub fn log1(&self) -> Option<TSeries> {
        if self.constant_term() != Rat::one() {
            return None;
        }
        let mut x = self.clone();
        x.add_term(TMono::one(), -Rat::one());
        let mut out = TSeries::zero(self.max_deg);
        let mut pw = TSeries::one(self.max_deg);
        for j in 1..=self.max_deg as i64 {
            pw = pw.mul(&x);
            if pw.is_zero() {
                break;
            }
            let c = Rat::new(if j % 2 == 1 { 1.into() } else { (-1).into() }, j.into());
            out = out.plus(&pw.scale(&c));
        }
        Some(out)
    }

    /// `Π_t t^{m_t}` coefficient times `Π m_t!`.
    pub fn correlator(&self, times: &[Time]) -> Rat {
        let m = TMono::from_times(times);
        self.coeff(&m) * m.symmetry_factor()
    }
}

impl fmt::Display for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(t^{})", self.max_deg + 1);
        }
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then(a.0.cmp(b.0)));
        for (i, (m, c)) in keys.into_iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{m}")?;
        }
        write!(f, " + O(t^{})", self.max_deg + 1)
    }
}

impl fmt::Debug for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TSeries({self})")
    }
}

/// All non-increasing sequences of `n` non-negative integers summing to `s`.
pub fn multisets(n: u32, s: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, s: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            if s == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for p in (0..=cap.min(s)).rev() {
            if p * n < s {
                break;
            }
            cur.push(p);
            go(n - 1, s - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, s, s, &mut Vec::new(), &mut out);
    out
}
