use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num::{One, Signed, Zero};

use super::atom::{Atom, AtomKind};
use super::mono::{Gen, Jet, Mono};
use super::Rat;
use crate::error::{Error, Result};

/// Sparse exact-rational differential polynomial, localized at its inverse atoms.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Mono, Rat>,
}

/// Result of [`DiffPoly::grade`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Grade {
    Zero,
    Homogeneous(i64),
    Mixed(Vec<i64>),
}

impl DiffPoly {
    pub fn zero() -> DiffPoly {
        DiffPoly::default()
    }

    pub fn one() -> DiffPoly {
        DiffPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> DiffPoly {
        DiffPoly::term(Mono::one(), c)
    }

    pub fn int(n: i64) -> DiffPoly {
        DiffPoly::constant(Rat::from_integer(n.into()))
    }

    pub fn term(m: Mono, c: Rat) -> DiffPoly {
        let mut p = DiffPoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn mono(m: Mono) -> DiffPoly {
        DiffPoly::term(m, Rat::one())
    }

    /// The jet `v^{comp, order}` (0-based component).
    pub fn jet(comp: u16, order: u32) -> DiffPoly {
        DiffPoly::mono(Mono::jet(Jet::new(comp, order), 1))
    }

    pub fn exp(arg: &DiffPoly) -> DiffPoly {
        if arg.is_zero() {
            return DiffPoly::one();
        }
        DiffPoly::mono(Mono::atom(Atom::intern(AtomKind::Exp, arg.clone()), 1))
    }

    pub fn log(arg: &DiffPoly) -> Result<DiffPoly> {
        if arg.is_zero() {
            return Err(Error::IllFormed("log of zero".into()));
        }
        if arg.is_constant() {
            if arg.constant_term().is_one() {
                return Ok(DiffPoly::zero());
            }
            return Err(Error::IllFormed(format!("log of constant {arg}")));
        }
        Ok(DiffPoly::mono(Mono::atom(Atom::intern(AtomKind::Log, arg.clone()), 1)))
    }

    pub fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
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

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Mono, Rat)> {
        self.terms.into_iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&Mono::one()).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn as_single_term(&self) -> Option<(&Mono, &Rat)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Rat) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul_term(&self, m: &Mono, c: &Rat) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (n, a) in &self.terms {
            out.add_term(n.mul(m), a * c);
        }
        out
    }

    fn add_scaled_product(&mut self, m: &Mono, c: &Rat, p: &DiffPoly) {
        for (n, a) in &p.terms {
            self.add_term(n.mul(m), a * c);
        }
    }

    pub fn pow(&self, n: u32) -> DiffPoly {
        let mut out = DiffPoly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                out = &out * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        out
    }

    pub fn powi(&self, n: i32) -> Result<DiffPoly> {
        if n >= 0 {
            Ok(self.pow(n as u32))
        } else {
            Ok(self.inverse()?.pow((-n) as u32))
        }
    }

    /// Multiplicative inverse. Monomials invert directly; anything else becomes
    /// a monomial content factor times a (normalized) inverse atom.
    pub fn inverse(&self) -> Result<DiffPoly> {
        if self.is_zero() {
            return Err(Error::SingularSubstitution("inverse of zero".into()));
        }
        if let Some((m, c)) = self.as_single_term() {
            if let Some(mi) = m.inverse() {
                return Ok(DiffPoly::term(mi, c.recip()));
            }
            // An inverse-atom power inverts to a positive power of its argument.
            let mut unit = Vec::new();
            let mut expanded = DiffPoly::one();
            let mut ok = true;
            for (g, e) in m.factors() {
                match g {
                    Gen::Atom(a) if a.kind() == AtomKind::Inv => {
                        expanded = &expanded * &a.arg().pow(*e as u32)
                    }
                    g if g.is_unit() => unit.push((g.clone(), -e)),
                    _ => ok = false,
                }
            }
            if ok {
                return Ok(expanded.mul_term(&Mono::from_factors(unit), &c.recip()));
            }
        }
        // Pull out the monomial content over unit generators.
        let mut content: Option<BTreeMap<Gen, i32>> = None;
        for m in self.terms.keys() {
            let here: BTreeMap<Gen, i32> = m
                .factors()
                .iter()
                .filter(|(g, _)| g.is_unit())
                .cloned()
                .collect();
            content = Some(match content {
                None => here,
                Some(prev) => {
                    let keys: BTreeSet<Gen> = prev.keys().chain(here.keys()).cloned().collect();
                    keys.into_iter()
                        .map(|g| {
                            let a = prev.get(&g).copied().unwrap_or(0);
                            let b = here.get(&g).copied().unwrap_or(0);
                            (g, a.min(b))
                        })
                        .filter(|(_, e)| *e != 0)
                        .collect()
                }
            });
        }
        let content = Mono::from_factors(content.unwrap_or_default().into_iter().collect());
        let content_inv = content.inverse().expect("content is built from unit generators");
        let reduced = self.mul_term(&content_inv, &Rat::one());
        if let Some((m, c)) = reduced.as_single_term() {
            if let Some(mi) = m.inverse() {
                return Ok(DiffPoly::term(mi.mul(&content_inv), c.recip()));
            }
        }
        let (_, lc) = reduced.terms.iter().next().expect("nonzero");
        let lc = lc.clone();
        let normalized = reduced.scale(&lc.recip());
        let atom = Atom::intern(AtomKind::Inv, normalized);
        Ok(DiffPoly::term(Mono::atom(atom, 1).mul(&content_inv), lc.recip()))
    }

    /// Total x-derivative.
    pub fn dx(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (g, e) in m.factors() {
                let e = *e;
                let ce = c * Rat::from_integer(e.into());
                match g {
                    Gen::Jet(j) => {
                        let nm = m.shift(g, -1).shift(&Gen::Jet(j.succ()), 1);
                        out.add_term(nm, ce);
                    }
                    Gen::Atom(a) => match a.kind() {
                        AtomKind::Exp => out.add_scaled_product(m, &ce, a.dx_arg()),
                        AtomKind::Log => {
                            let d = a.dx_arg() * a.inv_arg();
                            out.add_scaled_product(&m.shift(g, -1), &ce, &d)
                        }
                        AtomKind::Inv => out.add_scaled_product(&m.shift(g, 1), &-ce, a.dx_arg()),
                    },
                }
            }
        }
        out
    }

    pub fn dx_n(&self, n: u32) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.dx();
        }
        p
    }

    /// Partial derivative with respect to a jet variable, through all atoms.
    pub fn partial(&self, j: Jet) -> DiffPoly {
        let target = Gen::Jet(j);
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (g, e) in m.factors() {
                let ce = c * Rat::from_integer((*e).into());
                match g {
                    Gen::Jet(k) if *k == j => out.add_term(m.shift(&target, -1), ce),
                    Gen::Jet(_) => {}
                    Gen::Atom(a) => {
                        if !a.depends_on(j) {
                            continue;
                        }
                        let da = a.arg().partial(j);
                        match a.kind() {
                            AtomKind::Exp => out.add_scaled_product(m, &ce, &da),
                            AtomKind::Log => {
                                let d = &da * a.inv_arg();
                                out.add_scaled_product(&m.shift(g, -1), &ce, &d)
                            }
                            AtomKind::Inv => out.add_scaled_product(&m.shift(g, 1), &-ce, &da),
                        }
                    }
                }
            }
        }
        out
    }

    /// All jet variables that occur, including inside atom arguments.
    pub fn jets(&self) -> BTreeSet<Jet> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (g, _) in m.factors() {
                match g {
                    Gen::Jet(j) => {
                        s.insert(*j);
                    }
                    Gen::Atom(a) => s.extend(a.jets().iter().copied()),
                }
            }
        }
        s
    }

    pub fn depends_on(&self, j: Jet) -> bool {
        self.terms.keys().any(|m| {
            m.factors().iter().any(|(g, _)| match g {
                Gen::Jet(k) => *k == j,
                Gen::Atom(a) => a.depends_on(j),
            })
        })
    }

    pub fn max_order(&self, comp: u16) -> Option<u32> {
        self.jets().into_iter().filter(|j| j.comp == comp).map(|j| j.order).max()
    }

    pub fn has_kind(&self, kind: AtomKind) -> bool {
        self.terms.keys().any(|m| m.has_kind(kind))
    }

    pub fn has_log(&self) -> bool {
        self.has_kind(AtomKind::Log)
    }

    pub fn has_inv(&self) -> bool {
        self.has_kind(AtomKind::Inv)
    }

    /// No inverse atoms, no logs, and no negative jet powers.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| {
            m.factors().iter().all(|(g, e)| match g {
                Gen::Jet(_) => *e > 0,
                Gen::Atom(a) => a.kind() == AtomKind::Exp,
            })
        })
    }

    /// Euler-Lagrange operator `sum_k (-dx)^k d/dv^{comp,k}`.
    pub fn var_derivative(&self, comp: u16) -> Result<DiffPoly> {
        if self.has_log() {
            return Err(Error::UnsupportedDensity(format!("log atom in density {self}")));
        }
        let mut out = DiffPoly::zero();
        let Some(top) = self.max_order(comp) else {
            return Ok(out);
        };
        for k in 0..=top {
            let mut p = self.partial(Jet::new(comp, k));
            for _ in 0..k {
                p = -p.dx();
            }
            out += &p;
        }
        Ok(out)
    }

    /// Evolutionary derivative along the flow `v^a_t = flow[a]`.
    pub fn evolve(&self, flow: &[DiffPoly]) -> DiffPoly {
        let mut out = DiffPoly::zero();
        let mut cache: BTreeMap<Jet, DiffPoly> = BTreeMap::new();
        for j in self.jets() {
            let Some(k0) = flow.get(j.comp as usize) else { continue };
            let dk = cache
                .entry(j)
                .or_insert_with(|| k0.dx_n(j.order))
                .clone();
            if dk.is_zero() {
                continue;
            }
            out += &(&self.partial(j) * &dk);
        }
        out
    }

    /// x-grading: a jet of order k has degree k; `inv{D}^m` has degree `-m deg D`;
    /// exponential and log atoms have degree 0.
    pub fn grade(&self) -> Grade {
        let mut degs = BTreeSet::new();
        for m in self.terms.keys() {
            degs.insert(mono_degree(m));
        }
        match degs.len() {
            0 => Grade::Zero,
            1 => Grade::Homogeneous(*degs.iter().next().unwrap()),
            _ => Grade::Mixed(degs.into_iter().collect()),
        }
    }

    /// Rebuild the expression generator by generator.
    pub fn map_gens(&self, f: &mut dyn FnMut(&Gen, i32) -> Result<DiffPoly>) -> Result<DiffPoly> {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut t = DiffPoly::constant(c.clone());
            for (g, e) in m.factors() {
                t = &t * &f(g, *e)?;
                if t.is_zero() {
                    break;
                }
            }
            out += &t;
        }
        Ok(out)
    }

    /// Replace jets by expressions (`None` keeps the jet), rebuilding every atom.
    pub fn substitute_jets(&self, f: &dyn Fn(Jet) -> Option<DiffPoly>) -> Result<DiffPoly> {
        self.map_gens(&mut |g, e| match g {
            Gen::Jet(j) => match f(*j) {
                Some(p) => p.powi(e),
                None => Ok(DiffPoly::mono(Mono::jet(*j, e))),
            },
            Gen::Atom(a) => {
                let arg = a.arg().substitute_jets(f)?;
                match a.kind() {
                    AtomKind::Exp => DiffPoly::exp(&arg).powi(e),
                    AtomKind::Log => Ok(DiffPoly::log(&arg)?.pow(e as u32)),
                    AtomKind::Inv => Ok(arg.inverse()?.pow(e as u32)),
                }
            }
        })
    }

    /// Multiply through by the highest power of every inverse atom and expand,
    /// leaving a Laurent polynomial in jets and exponentials (with logs).
    pub fn clear_denominators(&self) -> DiffPoly {
        let mut p = self.clone();
        loop {
            let mut maxes: BTreeMap<Atom, i32> = BTreeMap::new();
            for m in p.terms.keys() {
                for (a, e) in m.atoms() {
                    if a.kind() == AtomKind::Inv {
                        let slot = maxes.entry(a.clone()).or_insert(0);
                        *slot = (*slot).max(e);
                    }
                }
            }
            let Some((atom, top)) = maxes.into_iter().next() else {
                return p;
            };
            let g = Gen::Atom(atom.clone());
            let mut out = DiffPoly::zero();
            for (m, c) in &p.terms {
                let e = m.exponent(&g);
                let rest = m.shift(&g, -e);
                let factor = atom.arg().pow((top - e) as u32);
                out.add_scaled_product(&rest, c, &factor);
            }
            p = out;
        }
    }

    /// Semantic equality: the difference vanishes after clearing denominators.
    pub fn equiv(&self, other: &DiffPoly) -> bool {
        (self - other).clear_denominators().is_zero()
    }

    /// Exact division by a polynomial without inverse atoms; `None` if not divisible.
    pub fn div_exact(&self, d: &DiffPoly) -> Option<DiffPoly> {
        super::division::div_exact(self, d)
    }

    pub fn remap_components(&self, map: &dyn Fn(u16) -> u16) -> Result<DiffPoly> {
        self.substitute_jets(&|j| Some(DiffPoly::jet(map(j.comp), j.order)))
    }
}

fn mono_degree(m: &Mono) -> i64 {
    let mut d = m.weight();
    for (a, e) in m.atoms() {
        if a.kind() == AtomKind::Inv {
            let ad = match a.arg().grade() {
                Grade::Homogeneous(k) => k,
                Grade::Zero => 0,
                Grade::Mixed(v) => v[0],
            };
            d -= ad * e as i64;
        }
    }
    d
}

impl From<i64> for DiffPoly {
    fn from(n: i64) -> Self {
        DiffPoly::int(n)
    }
}

impl From<Rat> for DiffPoly {
    fn from(c: Rat) -> Self {
        DiffPoly::constant(c)
    }
}

impl<'a> Add<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign for DiffPoly {
    fn add_assign(&mut self, rhs: DiffPoly) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl<'a> Sub<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(mut self, rhs: DiffPoly) -> DiffPoly {
        self -= &rhs;
        self
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -(self.clone())
    }
}

impl<'a> Mul<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let (small, big) = if self.len() <= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = DiffPoly::zero();
        for (m, c) in &small.terms {
            out.add_scaled_product(m, c, big);
        }
        out
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

impl Mul<&Rat> for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &Rat) -> DiffPoly {
        self.scale(rhs)
    }
}

/// Leading-sign helper used by the printer.
pub(crate) fn is_negative(c: &Rat) -> bool {
    c.is_negative()
}
