//! The point target: topological solution, genus 0..2 potentials, intersection
//! numbers and the Virasoro constraints of the Witten-Kontsevich tau-function.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::jetalg::{double_factorial, factorial, rat, ri, AtomKind, DiffPoly, Gen, Rat};
use crate::kdvloop;
use crate::tseries::{multisets, TMono, TSeries, Time};

fn t(p: u32) -> Time {
    Time::t(p as u16)
}

/// `v = t_0 + sum_{p>=1} t_p v^p/p!` by fixed-point iteration, through degree `d`.
pub fn vtop(d: u32) -> TSeries {
    let t0 = TSeries::var(t(0), d);
    let mut v = t0.clone();
    for _ in 0..d {
        let mut next = t0.clone();
        let mut vp = TSeries::one(d);
        for p in 1..d {
            vp = vp.mul(&v);
            next = next.plus(&vp.mul(&TSeries::var(t(p), d)).scale(&factorial(p).recip()));
        }
        v = next;
    }
    v
}

/// Closed-form expansion of the topological solution:
/// `sum_n 1/n sum_{p_1+..+p_n = n-1} prod t_{p_i}/p_i!`.
pub fn vtop_closed_form(d: u32) -> TSeries {
    symmetric_sum(d, 1, |n| ri(n as i64).recip())
}

/// `sum_{n >= 3} 1/(n(n-1)(n-2)) sum_{p_1+..+p_n = n-3} prod t_{p_i}/p_i!`.
pub fn f0(d: u32) -> TSeries {
    symmetric_sum(d, 3, |n| ri((n * (n - 1) * (n - 2)) as i64).recip())
}

/// `sum_{n >= lag} w(n) sum_{p_1+..+p_n = n-lag} prod t_{p_i}/p_i!`, ordered tuples.
fn symmetric_sum(d: u32, lag: u32, w: impl Fn(u32) -> Rat) -> TSeries {
    let mut out = TSeries::zero(d);
    for n in lag.max(1)..=d {
        for ps in multisets(n, n - lag) {
            let times: Vec<Time> = ps.iter().map(|p| t(*p)).collect();
            let m = TMono::from_times(&times);
            // ordered tuples realizing this multiset: n!/prod m_p!
            let arrangements = factorial(n) / m.symmetry_factor();
            let denom = ps.iter().map(|p| factorial(*p)).fold(Rat::one(), |a, b| a * b);
            out.add_term(m, w(n) * arrangements / denom);
        }
    }
    out
}

/// The `x`-jets `v^(k) = d_{t_0}^k v` for `k <= kmax`, each exact through degree `d`.
pub fn jets_of(field: &TSeries, kmax: u32, d: u32) -> Vec<TSeries> {
    let mut out = vec![field.truncate(d)];
    let mut cur = field.clone();
    for _ in 0..kmax {
        cur = cur.deriv(t(0));
        out.push(cur.truncate(d));
    }
    out
}

/// Evaluate a differential polynomial on series-valued jets `jets[comp][k]`.
/// Supports negative jet powers, `log` of a series with constant term 1, and `inv` atoms.
pub fn evaluate(p: &DiffPoly, jets: &[Vec<TSeries>], d: u32) -> Result<TSeries> {
    let mut out = TSeries::zero(d);
    for (m, c) in p.terms() {
        let mut term = TSeries::constant(c.clone(), d);
        for (g, e) in m.factors() {
            let base = match g {
                Gen::Jet(j) => jets
                    .get(j.comp as usize)
                    .and_then(|js| js.get(j.order as usize))
                    .cloned()
                    .ok_or_else(|| Error::Precondition(format!("no series for jet v[{}]_{}", j.comp + 1, j.order)))?,
                Gen::Atom(a) => {
                    let arg = evaluate(a.arg(), jets, d)?;
                    match a.kind() {
                        AtomKind::Log => arg
                            .log1()
                            .ok_or_else(|| Error::SingularSubstitution(format!("log of {} at t = 0", a.arg())))?,
                        AtomKind::Inv => arg
                            .inverse()
                            .ok_or_else(|| Error::SingularSubstitution(format!("{} vanishes at t = 0", a.arg())))?,
                        AtomKind::Exp => {
                            return Err(Error::UnsupportedDensity("exp atom in a series evaluation".into()))
                        }
                    }
                }
            };
            let f = if *e >= 0 {
                base.pow(*e as u32)
            } else {
                base.inverse()
                    .ok_or_else(|| Error::SingularSubstitution(format!("{g:?} vanishes at t = 0")))?
                    .pow((-e) as u32)
            };
            term = term.mul(&f);
        }
        out = out.plus(&term);
    }
    Ok(out)
}

/// Evaluate a single-field jet expression at the topological solution, through degree `d`.
pub fn at_vtop(p: &DiffPoly, d: u32) -> Result<TSeries> {
    let kmax = kdvloop::jet_order(p);
    let v = vtop(d + kmax);
    evaluate(p, &[jets_of(&v, kmax, d)], d)
}

/// `F_1 = 1/24 log v_x` at the topological solution.
pub fn f1(d: u32) -> TSeries {
    at_vtop(&DiffPoly::log(&DiffPoly::jet(0, 1)).expect("jet is a valid log argument").scale(&rat(1, 24)), d)
        .expect("v_x = 1 at t = 0")
}

/// `F_2` from the loop equation, evaluated at the topological solution.
pub fn f2(d: u32) -> Result<TSeries> {
    let fs = kdvloop::solve_through(2)?;
    at_vtop(&fs[1], d)
}

/// Genus 0..2 potentials through degree `d`.
pub fn potentials(d: u32) -> Result<Vec<TSeries>> {
    Ok(vec![f0(d), f1(d), f2(d)?])
}

/// `<tau_{p_1} ... tau_{p_n}>_g`.
pub fn intersect(genus: u32, spec: &[u32]) -> Result<Rat> {
    let n = spec.len() as u32;
    let sum: u32 = spec.iter().sum();
    if genus > 2 {
        return Err(Error::Precondition(format!("genus {genus} is not supported")));
    }
    if sum + 3 != 3 * genus + n || (genus == 0 && n < 3) || n == 0 {
        return Ok(Rat::zero());
    }
    let d = n;
    let series = match genus {
        0 => f0(d),
        1 => f1(d),
        _ => f2(d)?,
    };
    let times: Vec<Time> = spec.iter().map(|p| t(*p)).collect();
    Ok(series.correlator(&times))
}

/// Whether `spec` satisfies the dimension constraint for `genus`.
pub fn dimension_ok(genus: u32, spec: &[u32]) -> bool {
    spec.iter().sum::<u32>() + 3 == 3 * genus + spec.len() as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lambda {
    One,
    Two,
}

/// `1/480 v_xxx/v_x - 11/5760 v_xx^2/v_x^2`, the lambda_1 generating function.
pub fn lambda1_density() -> DiffPoly {
    "1/480*v[1]_3/v[1]_1 - 11/5760*v[1]_2^2/v[1]_1^2".parse().expect("valid")
}

/// `int psi_1^{k_1} ... psi_n^{k_n} lambda_j` over genus-2 moduli.
pub fn genus2_lambda(spec: &[u32], which: Lambda) -> Result<Rat> {
    if spec.is_empty() {
        return Err(Error::Precondition("at least one insertion".into()));
    }
    let n = spec.len() as u32;
    let sum: u32 = spec.iter().sum();
    match which {
        Lambda::One => {
            if sum != n + 2 {
                return Ok(Rat::zero());
            }
            let s = at_vtop(&lambda1_density(), n)?;
            let times: Vec<Time> = spec.iter().map(|p| t(*p)).collect();
            Ok(s.correlator(&times))
        }
        Lambda::Two => {
            if sum != n + 1 {
                return Ok(Rat::zero());
            }
            let den = spec.iter().map(|k| factorial(*k)).fold(Rat::one(), |a, b| a * b);
            Ok(rat(7, 5760) * factorial(n + 1) / den)
        }
    }
}

/// `(2k+1)!! (2l+1)!! / 2^{m+1}`.
fn alpha(k: u32, l: u32, m: i32) -> Rat {
    double_factorial(2 * k as i64 + 1) * double_factorial(2 * l as i64 + 1) / Rat::from_integer(num::BigInt::from(2).pow((m + 1) as u32))
}

/// `(2k+2m+1)!! / (2^{m+1} (2k-1)!!)`.
fn a_coef(k: u32, m: i32) -> Rat {
    double_factorial(2 * k as i64 + 2 * m as i64 + 1)
        / (double_factorial(2 * k as i64 - 1) * Rat::from_integer(num::BigInt::from(2).pow((m + 1) as u32)))
}

/// `(2m+3)!!/2^{m+1}`.
fn b_coef(m: i32) -> Rat {
    double_factorial(2 * m as i64 + 3) / Rat::from_integer(num::BigInt::from(2).pow((m + 1) as u32))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VirasoroRow {
    pub m: i32,
    /// Power of eps: -2, 0 or 2.
    pub eps: i32,
    pub max_degree: u32,
    pub nonzero: Vec<(String, Rat)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VirasoroReport {
    pub rows: Vec<VirasoroRow>,
}

impl VirasoroReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.nonzero.is_empty())
    }
}

/// Residuals of `L_m tau = (2m+3)!!/2^{m+1} d_{m+1} tau` divided by `tau`, for
/// `-1 <= m <= m_max` at eps-powers `-2..=e`, through t-degree `d`.
///
/// The eps^{2h} residual involves only `F_g` with `g <= h + 1`, so with genus
/// capped at 2 every order up to eps^2 is complete; the potentials are computed
/// through degree `d + 2` because the operators lower the degree by at most 2.
pub fn virasoro_check(m_max: i32, d: u32, e: u32) -> Result<VirasoroReport> {
    if m_max > 2 || e > 2 {
        return Err(Error::Precondition(format!("m_max = {m_max}, eps order {e}: only m <= 2, eps^2 are claimed")));
    }
    residuals(&potentials(d + 2)?, m_max, d, e)
}

/// The Virasoro residuals for given `F_0, F_1, F_2`, each exact through degree `d + 2`.
pub fn residuals(f: &[TSeries], m_max: i32, d: u32, e: u32) -> Result<VirasoroReport> {
    if f.len() != 3 {
        return Err(Error::Precondition("need F_0, F_1, F_2".into()));
    }
    let dd = d + 2;
    let max_index = 3 + dd + 2;
    // first derivatives d_k F_g, memoized
    let grads: Vec<Vec<TSeries>> = f.iter().map(|fg| (0..=max_index).map(|k| fg.deriv(t(k))).collect()).collect();
    let mut rows = Vec::new();
    for m in -1..=m_max {
        for h in -1..=(e as i32 / 2) {
            let mut r = TSeries::zero(d);
            let fg = |g: i32| -> Option<usize> { (0..=2).contains(&g).then_some(g as usize) };
            if m >= 1 {
                for k in 0..m as u32 {
                    let l = m as u32 - 1 - k;
                    let half = alpha(k, l, m) * rat(1, 2);
                    if let Some(g) = fg(h) {
                        r = r.plus(&grads[g][k as usize].deriv(t(l)).scale(&half));
                    }
                    for g1 in 0..=2 {
                        if let Some(g2) = fg(h + 1 - g1) {
                            r = r.plus(&grads[g1 as usize][k as usize].mul(&grads[g2][l as usize]).scale(&half));
                        }
                    }
                }
            }
            if let Some(g) = fg(h + 1) {
                for k in 0..=max_index {
                    let target = k as i32 + m;
                    if target < 0 || target as u32 > max_index {
                        continue;
                    }
                    let c = a_coef(k, m);
                    let tk = TSeries::var(t(k), d);
                    r = r.plus(&tk.mul(&grads[g][target as usize]).scale(&c));
                }
                r = r.minus(&grads[g][(m + 1) as usize].scale(&b_coef(m)));
            }
            if m == -1 && h == -1 {
                r = r.plus(&TSeries::var(t(0), d).pow(2).scale(&rat(1, 2)));
            }
            if m == 0 && h == 0 {
                r = r.plus(&TSeries::constant(rat(1, 16), d));
            }
            let r = r.truncate(d);
            rows.push(VirasoroRow {
                m,
                eps: 2 * h,
                max_degree: d,
                nonzero: r.terms().map(|(mono, c)| (mono.to_string(), c.clone())).collect(),
            });
        }
    }
    Ok(VirasoroReport { rows })
}
