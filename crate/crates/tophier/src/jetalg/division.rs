//! Exact multivariate division by a single polynomial (lex order on dense
//! exponent vectors). For one divisor the division remainder is zero exactly
//! when the divisor divides the dividend.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use super::atom::AtomKind;
use super::mono::{Gen, Mono};
use super::poly::DiffPoly;
use super::Rat;

type Dense = BTreeMap<Vec<i32>, Rat>;

fn unit_content(p: &DiffPoly, gens: &[Gen]) -> Vec<i32> {
    let mut mins = vec![i32::MAX; gens.len()];
    for (m, _) in p.terms() {
        for (i, g) in gens.iter().enumerate() {
            mins[i] = mins[i].min(m.exponent(g));
        }
    }
    mins.iter().map(|&e| if e == i32::MAX { 0 } else { e }).collect()
}

fn to_dense(p: &DiffPoly, gens: &[Gen], shift: &[i32]) -> Dense {
    let mut out = Dense::new();
    for (m, c) in p.terms() {
        let v: Vec<i32> = gens.iter().zip(shift).map(|(g, s)| m.exponent(g) - s).collect();
        out.insert(v, c.clone());
    }
    out
}

pub(crate) fn div_exact(n: &DiffPoly, d: &DiffPoly) -> Option<DiffPoly> {
    if d.is_zero() || n.has_inv() || d.has_inv() {
        return None;
    }
    if n.is_zero() {
        return Some(DiffPoly::zero());
    }
    let gens: Vec<Gen> = n
        .terms()
        .chain(d.terms())
        .flat_map(|(m, _)| m.factors().iter().map(|(g, _)| g.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    debug_assert!(gens.iter().all(|g| match g {
        Gen::Atom(a) => a.kind() != AtomKind::Inv,
        Gen::Jet(_) => true,
    }));
    let sn = unit_content(n, &gens);
    let sd = unit_content(d, &gens);
    let mut rem = to_dense(n, &gens, &sn);
    let dd = to_dense(d, &gens, &sd);
    let (dlead, dlc) = dd.iter().next_back().map(|(k, c)| (k.clone(), c.clone()))?;
    let mut q = Dense::new();
    while let Some((lead, lc)) = rem.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) {
        if lead.iter().zip(&dlead).any(|(a, b)| a < b) {
            return None;
        }
        let e: Vec<i32> = lead.iter().zip(&dlead).map(|(a, b)| a - b).collect();
        let c = lc / &dlc;
        for (k, a) in &dd {
            let key: Vec<i32> = k.iter().zip(&e).map(|(x, y)| x + y).collect();
            let slot = rem.entry(key.clone()).or_insert_with(Rat::zero);
            *slot -= a * &c;
            if slot.is_zero() {
                rem.remove(&key);
            }
        }
        q.insert(e, c);
    }
    let mut out = DiffPoly::zero();
    for (e, c) in q {
        let factors = gens
            .iter()
            .zip(e.iter().zip(sn.iter().zip(&sd)))
            .map(|(g, (x, (a, b)))| (g.clone(), x + a - b))
            .collect();
        out.add_term(Mono::from_factors(factors), c);
    }
    Some(out)
}
