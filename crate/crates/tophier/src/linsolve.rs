//! Sparse exact linear systems over the rationals, reduced incrementally to
//! reduced row-echelon form.

use std::collections::BTreeMap;

use num::Zero;

use crate::jetalg::Rat;

pub type Row = BTreeMap<usize, Rat>;

#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Unique(Vec<Rat>),
    /// Free variables were set to zero in `particular`.
    Underdetermined { particular: Vec<Rat>, free: Vec<usize> },
    Inconsistent,
}

#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    n_vars: usize,
    /// pivot variable -> (row without the pivot, rhs); the pivot coefficient is 1.
    pivots: BTreeMap<usize, (Row, Rat)>,
    inconsistent: bool,
    equations: usize,
}

fn axpy(row: &mut Row, rhs: &mut Rat, c: &Rat, other: &Row, orhs: &Rat) {
    for (k, v) in other {
        let slot = row.entry(*k).or_insert_with(Rat::zero);
        *slot += c * v;
        if slot.is_zero() {
            row.remove(k);
        }
    }
    *rhs += c * orhs;
}

impl LinearSystem {
    pub fn new(n_vars: usize) -> LinearSystem {
        LinearSystem { n_vars, ..Default::default() }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn equations(&self) -> usize {
        self.equations
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Add `sum row[k] x_k = rhs`.
    pub fn add(&mut self, mut row: Row, mut rhs: Rat) {
        self.equations += 1;
        row.retain(|_, v| !v.is_zero());
        // eliminate existing pivots
        loop {
            let hit = row.keys().find(|k| self.pivots.contains_key(k)).copied();
            let Some(k) = hit else { break };
            let c = -row.remove(&k).expect("present");
            let (prow, prhs) = &self.pivots[&k];
            axpy(&mut row, &mut rhs, &c, prow, prhs);
        }
        let Some((&p, _)) = row.iter().next() else {
            if !rhs.is_zero() {
                self.inconsistent = true;
            }
            return;
        };
        let inv = row.remove(&p).expect("present").recip();
        for v in row.values_mut() {
            *v *= &inv;
        }
        rhs *= &inv;
        // back-substitute into existing pivot rows
        for (prow, prhs) in self.pivots.values_mut() {
            if let Some(c) = prow.remove(&p) {
                let c = -c;
                axpy(prow, prhs, &c, &row, &rhs);
            }
        }
        self.pivots.insert(p, (row, rhs));
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn solve(&self) -> Solution {
        if self.inconsistent {
            return Solution::Inconsistent;
        }
        let mut x = vec![Rat::zero(); self.n_vars];
        for (p, (_, rhs)) in &self.pivots {
            x[*p] = rhs.clone();
        }
        let free: Vec<usize> = (0..self.n_vars).filter(|k| !self.pivots.contains_key(k)).collect();
        if free.is_empty() {
            Solution::Unique(x)
        } else {
            Solution::Underdetermined { particular: x, free }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetalg::{rat, ri};

    fn row(v: &[(usize, i64)]) -> Row {
        v.iter().map(|(k, c)| (*k, ri(*c))).collect()
    }

    #[test]
    fn solves_small_system() {
        let mut s = LinearSystem::new(2);
        s.add(row(&[(0, 1), (1, 1)]), ri(3));
        s.add(row(&[(0, 1), (1, -1)]), ri(1));
        s.add(row(&[(0, 2), (1, 2)]), ri(6));
        assert_eq!(s.solve(), Solution::Unique(vec![ri(2), ri(1)]));
    }

    #[test]
    fn detects_inconsistency_and_freedom() {
        let mut s = LinearSystem::new(3);
        s.add(row(&[(0, 2), (2, 1)]), ri(1));
        match s.solve() {
            Solution::Underdetermined { particular, free } => {
                assert_eq!(particular[0], rat(1, 2));
                assert_eq!(free, vec![1, 2]);
            }
            other => panic!("{other:?}"),
        }
        s.add(row(&[(0, 4), (2, 2)]), ri(3));
        assert_eq!(s.solve(), Solution::Inconsistent);
    }
}
