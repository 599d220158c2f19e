//! Differential polynomials on the jet space of `n` fields.
//!
//! Coefficients are exact rationals. Besides jets `v^{a,k}` the algebra has
//! three kinds of atoms: `exp{f}`, `log{D}` and `inv{D}` (a declared
//! denominator). Single jets and exponentials are invertible directly, so
//! `1/v_x` is just the jet `v_x` with exponent `-1`.

mod atom;
mod division;
mod eps;
mod mono;
mod parse;
mod poly;
mod subst;

pub use atom::{Atom, AtomKind};
pub use eps::EpsSeries;
pub use mono::{Gen, Jet, Mono};
pub use parse::dp;
pub use poly::{DiffPoly, Grade};
pub use subst::{identity_map, substitute, substitute_series, Substitution};

pub type Rat = num::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

pub fn ri(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Binomial coefficient `C(n, k)` for any integer `n` and `k >= 0`.
pub fn binom(n: i64, k: u32) -> Rat {
    let mut num = ri(1);
    for i in 0..k as i64 {
        num *= ri(n - i);
        num /= ri(i + 1);
    }
    num
}

pub fn factorial(n: u32) -> Rat {
    (1..=n as i64).fold(ri(1), |a, k| a * ri(k))
}

/// Double factorial `n!!`, with `(-1)!! = 1`.
pub fn double_factorial(n: i64) -> Rat {
    let mut acc = ri(1);
    let mut k = n;
    while k > 1 {
        acc *= ri(k);
        k -= 2;
    }
    acc
}

#[cfg(test)]
mod tests;
