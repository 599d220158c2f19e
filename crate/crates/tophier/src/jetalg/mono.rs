use std::cmp::Ordering;

use super::atom::{Atom, AtomKind};

/// The jet variable `v^{comp,order}`: the `order`-th x-derivative of field `comp`
/// (0-based internally, printed 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Jet {
    pub comp: u16,
    pub order: u32,
}

impl Jet {
    pub fn new(comp: u16, order: u32) -> Jet {
        Jet { comp, order }
    }

    pub fn succ(self) -> Jet {
        Jet { comp: self.comp, order: self.order + 1 }
    }
}

impl Ord for Jet {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.order, self.comp).cmp(&(other.order, other.comp))
    }
}

impl PartialOrd for Jet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A multiplicative generator. Jets sort before atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Jet(Jet),
    Atom(Atom),
}

impl Gen {
    /// Whether integer powers of either sign are allowed (jets and exponentials).
    pub fn is_unit(&self) -> bool {
        match self {
            Gen::Jet(_) => true,
            Gen::Atom(a) => a.kind() == AtomKind::Exp,
        }
    }
}

/// A monomial: sorted generator powers. Jets and exponentials may carry
/// negative exponents; logs carry positive exponents; an inverse atom with
/// exponent `m > 0` means `D^{-m}`.
///
/// Ordering is graded by total jet order, then lexicographic in the factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mono {
    weight: i64,
    factors: Vec<(Gen, i32)>,
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .cmp(&other.weight)
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn weight_of(g: &Gen, e: i32) -> i64 {
    match g {
        Gen::Jet(j) => j.order as i64 * e as i64,
        Gen::Atom(_) => 0,
    }
}

impl Mono {
    pub fn one() -> Mono {
        Mono::default()
    }

    pub fn gen(g: Gen, e: i32) -> Mono {
        if e == 0 {
            return Mono::one();
        }
        Mono { weight: weight_of(&g, e), factors: vec![(g, e)] }
    }

    pub fn jet(j: Jet, e: i32) -> Mono {
        Mono::gen(Gen::Jet(j), e)
    }

    pub fn atom(a: Atom, e: i32) -> Mono {
        Mono::gen(Gen::Atom(a), e)
    }

    pub fn from_factors(mut factors: Vec<(Gen, i32)>) -> Mono {
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Gen, i32)> = Vec::with_capacity(factors.len());
        for (g, e) in factors {
            match out.last_mut() {
                Some((lg, le)) if *lg == g => *le += e,
                _ => out.push((g, e)),
            }
        }
        out.retain(|(_, e)| *e != 0);
        let weight = out.iter().map(|(g, e)| weight_of(g, *e)).sum();
        Mono { weight, factors: out }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Gen, i32)] {
        &self.factors
    }

    /// Total jet order (the x-grading of the jet part).
    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn exponent(&self, g: &Gen) -> i32 {
        self.factors
            .binary_search_by(|(h, _)| h.cmp(g))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        if other.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return other.clone();
        }
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono { weight: self.weight + other.weight, factors: out }
    }

    /// Multiply by `g^delta`.
    pub fn shift(&self, g: &Gen, delta: i32) -> Mono {
        self.mul(&Mono::gen(g.clone(), delta))
    }

    /// Multiplicative inverse, when every factor is a unit.
    pub fn inverse(&self) -> Option<Mono> {
        if !self.factors.iter().all(|(g, _)| g.is_unit()) {
            return None;
        }
        Some(Mono {
            weight: -self.weight,
            factors: self.factors.iter().map(|(g, e)| (g.clone(), -e)).collect(),
        })
    }

    pub fn pow(&self, n: i32) -> Mono {
        if n == 0 {
            return Mono::one();
        }
        Mono {
            weight: self.weight * n as i64,
            factors: self.factors.iter().map(|(g, e)| (g.clone(), e * n)).collect(),
        }
    }

    pub fn jets(&self) -> impl Iterator<Item = (Jet, i32)> + '_ {
        self.factors.iter().filter_map(|(g, e)| match g {
            Gen::Jet(j) => Some((*j, *e)),
            Gen::Atom(_) => None,
        })
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Atom, i32)> + '_ {
        self.factors.iter().filter_map(|(g, e)| match g {
            Gen::Atom(a) => Some((a, *e)),
            Gen::Jet(_) => None,
        })
    }

    pub fn has_kind(&self, kind: AtomKind) -> bool {
        self.atoms().any(|(a, _)| a.kind() == kind)
    }

    /// Number of jet factors counted with multiplicity (polynomial degree of the jet part).
    pub fn jet_degree(&self) -> i64 {
        self.jets().map(|(_, e)| e as i64).sum()
    }
}
