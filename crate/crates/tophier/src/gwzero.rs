//! Degree-zero Gromov-Witten theory of a variety given by cohomology-ring data:
//! the principal hierarchy, its transform by the genus-one potential, the
//! transformed bihamiltonian pair and the Chern-number constraint.
//!
//! Basis indices are 1-based in the public API (`γ_1` is the unit); field
//! `v^α` is jet component `α - 1`.

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jetalg::{binom, factorial, rat, ri, DiffPoly, EpsSeries, Rat};
use crate::quasitriv::{
    normalize_delta, transform_bracket, transform_flow, DeltaTerm, DiffOperator, LocalPoissonBracket, QuasiMap,
};
use crate::tseries::{multisets, TMono, TSeries, Time};
use crate::wktau;

/// A rational written as an integer or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatText {
    Int(i64),
    Text(String),
}

impl RatText {
    fn parse(&self, what: &str) -> Result<Rat> {
        match self {
            RatText::Int(n) => Ok(ri(*n)),
            RatText::Text(s) => s
                .trim()
                .parse::<Rat>()
                .map_err(|_| Error::Validation(format!("{what}: cannot read {s:?} as a rational"))),
        }
    }

    fn of(r: &Rat) -> RatText {
        RatText::Text(r.to_string())
    }
}

/// On-disk variety description (TOML).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietyFile {
    pub name: String,
    pub dim: u32,
    pub basis: Vec<String>,
    pub degrees: Vec<u32>,
    pub eta: Vec<Vec<RatText>>,
    /// `[α, β, γ, c]`: `γ_α γ_β` has `c` on `γ_γ`, 1-based.
    pub cup: Vec<(usize, usize, usize, RatText)>,
    pub euler_characteristic: i64,
    pub chern: ChernFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernFile {
    pub c1: Vec<RatText>,
    pub cdm1: Vec<RatText>,
    pub cd: Vec<RatText>,
}

/// A validated graded cohomology ring with Poincare pairing and Chern data.
#[derive(Clone, Debug)]
pub struct CohomologyRing {
    name: String,
    d: u32,
    labels: Vec<String>,
    q: Vec<u32>,
    eta: Vec<Vec<Rat>>,
    eta_inv: Vec<Vec<Rat>>,
    /// `cup[a][b]` lists `(g, c)` with `γ_a γ_b = Σ c γ_g`, 0-based.
    cup: Vec<Vec<Vec<(usize, Rat)>>>,
    c1: Vec<Rat>,
    cdm1: Vec<Rat>,
    cd: Vec<Rat>,
    chi: i64,
}

fn invalid(axiom: &str, detail: String) -> Error {
    Error::Validation(format!("{axiom}: {detail}"))
}

fn invert(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

impl CohomologyRing {
    /// Build and check every axiom; the error names the first one violated.
    pub fn from_file(f: &VarietyFile) -> Result<CohomologyRing> {
        let n = f.basis.len();
        let d = f.dim;
        if n == 0 {
            return Err(invalid("basis", "empty".into()));
        }
        if f.degrees.len() != n {
            return Err(invalid("degrees", format!("{} entries for {n} basis labels", f.degrees.len())));
        }
        let q = f.degrees.clone();
        if q[0] != 0 || q[n - 1] != d {
            return Err(invalid("grading", format!("need q_1 = 0 and q_n = {d}, got {} and {}", q[0], q[n - 1])));
        }
        if let Some(a) = (1..n).find(|&a| q[a] == 0 || q[a] > d) {
            return Err(invalid("grading", format!("q_{} = {} outside 1..={d} (H^0 must be spanned by γ_1)", a + 1, q[a])));
        }
        if f.eta.len() != n || f.eta.iter().any(|r| r.len() != n) {
            return Err(invalid("eta", format!("must be {n}x{n}")));
        }
        let mut eta = vec![vec![Rat::zero(); n]; n];
        for a in 0..n {
            for b in 0..n {
                eta[a][b] = f.eta[a][b].parse(&format!("eta[{}][{}]", a + 1, b + 1))?;
            }
        }
        for a in 0..n {
            for b in 0..n {
                if eta[a][b] != eta[b][a] {
                    return Err(invalid("eta symmetric", format!("eta[{}][{}] != eta[{}][{}]", a + 1, b + 1, b + 1, a + 1)));
                }
                if !eta[a][b].is_zero() && q[a] + q[b] != d {
                    return Err(invalid(
                        "Poincare degree",
                        format!("eta[{}][{}] = {} but q_{} + q_{} != {d}", a + 1, b + 1, eta[a][b], a + 1, b + 1),
                    ));
                }
            }
        }
        let eta_inv = invert(&eta).ok_or_else(|| invalid("eta invertible", "Gram matrix is singular".into()))?;
        if !eta[0][n - 1].is_one() {
            return Err(invalid("volume", format!("∫γ_n = eta[1][n] = {}, expected 1", eta[0][n - 1])));
        }
        let mut cup: Vec<Vec<Vec<(usize, Rat)>>> = vec![vec![Vec::new(); n]; n];
        for (i, (a, b, g, c)) in f.cup.iter().enumerate() {
            if [*a, *b, *g].iter().any(|&k| k == 0 || k > n) {
                return Err(invalid("cup", format!("entry {} has an index outside 1..={n}", i + 1)));
            }
            let (a, b, g) = (a - 1, b - 1, g - 1);
            let c = c.parse(&format!("cup entry {}", i + 1))?;
            if cup[a][b].iter().any(|(h, _)| *h == g) {
                return Err(invalid("cup", format!("duplicate entry for γ_{} γ_{} -> γ_{}", a + 1, b + 1, g + 1)));
            }
            if c.is_zero() {
                continue;
            }
            if q[g] != q[a] + q[b] {
                return Err(invalid("cup graded", format!("γ_{} γ_{} has a component on γ_{}", a + 1, b + 1, g + 1)));
            }
            cup[a][b].push((g, c));
        }
        for row in cup.iter_mut() {
            for list in row.iter_mut() {
                list.sort_by_key(|(g, _)| *g);
            }
        }
        let read = |v: &[RatText], what: &str| -> Result<Vec<Rat>> {
            if v.len() != n {
                return Err(invalid("chern", format!("{what} has {} entries, expected {n}", v.len())));
            }
            v.iter().enumerate().map(|(i, x)| x.parse(&format!("{what}[{}]", i + 1))).collect()
        };
        let c1 = read(&f.chern.c1, "c1")?;
        let cdm1 = read(&f.chern.cdm1, "cdm1")?;
        let cd = read(&f.chern.cd, "cd")?;
        let ring = CohomologyRing {
            name: f.name.clone(),
            d,
            labels: f.basis.clone(),
            q,
            eta,
            eta_inv,
            cup,
            c1,
            cdm1,
            cd,
            chi: f.euler_characteristic,
        };
        ring.check_algebra()?;
        ring.check_chern()?;
        Ok(ring)
    }

    fn check_algebra(&self) -> Result<()> {
        let n = self.n();
        for a in 0..n {
            for b in 0..n {
                if self.cup[a][b] != self.cup[b][a] {
                    return Err(invalid("cup commutative", format!("γ_{} γ_{} != γ_{} γ_{}", a + 1, b + 1, b + 1, a + 1)));
                }
            }
            if self.mul(&self.basis(1), &self.basis(a + 1)) != self.basis(a + 1) {
                return Err(invalid("cup unital", format!("γ_1 γ_{} != γ_{}", a + 1, a + 1)));
            }
        }
        // sparse structure constants: n^3 products instead of dense multiplication
        let prod = |a: usize, b: usize| -> Vec<Rat> {
            let mut v = vec![Rat::zero(); n];
            for (g, k) in &self.cup[a][b] {
                v[*g] += k;
            }
            v
        };
        let times = |v: &[Rat], c: usize| -> Vec<Rat> {
            let mut out = vec![Rat::zero(); n];
            for (e, ve) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                for (g, k) in &self.cup[e][c] {
                    out[*g] += ve * k;
                }
            }
            out
        };
        let lowered = |a: usize, b: usize, c: usize| -> Rat {
            self.cup[a][b].iter().map(|(e, k)| k * &self.eta[*e][c]).fold(Rat::zero(), |x, y| x + y)
        };
        for a in 0..n {
            for b in 0..n {
                let ab = prod(a, b);
                for c in 0..n {
                    // γ_a (γ_b γ_c) = (γ_b γ_c) γ_a by commutativity
                    if times(&ab, c) != times(&prod(b, c), a) {
                        let (a, b, c) = (a + 1, b + 1, c + 1);
                        return Err(invalid("cup associative", format!("(γ_{a} γ_{b}) γ_{c} != γ_{a} (γ_{b} γ_{c})")));
                    }
                    if lowered(a, b, c) != lowered(b, c, a) {
                        let (a, b, c) = (a + 1, b + 1, c + 1);
                        return Err(invalid("Frobenius", format!("<γ_{a} γ_{b}, γ_{c}> != <γ_{a}, γ_{b} γ_{c}>")));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_chern(&self) -> Result<()> {
        let d = self.d as i64;
        for (v, k, name) in [(&self.c1, 1, "c1"), (&self.cdm1, d - 1, "cdm1"), (&self.cd, d, "cd")] {
            if let Some(a) = (0..self.n()).find(|&a| !v[a].is_zero() && self.q[a] as i64 != k) {
                return Err(invalid("chern graded", format!("{name} has a component on γ_{} of degree {}", a + 1, self.q[a])));
            }
            if k == 0 && *v != self.basis(1) {
                return Err(invalid("chern graded", format!("{name} = c_0 must be γ_1")));
            }
        }
        let chi = self.integral(&self.cd);
        if chi != ri(self.chi) {
            return Err(invalid("Euler characteristic", format!("∫c_d = {chi} but euler_characteristic = {}", self.chi)));
        }
        if self.chi != self.n() as i64 {
            return Err(invalid(
                "odd cohomology",
                format!("χ = {} differs from dim H* = {}; only H^odd = 0 is supported", self.chi, self.n()),
            ));
        }
        Ok(())
    }

    pub fn to_file(&self) -> VarietyFile {
        let row = |v: &[Rat]| v.iter().map(RatText::of).collect();
        let mut cup = Vec::new();
        for a in 0..self.n() {
            for b in 0..self.n() {
                for (g, c) in &self.cup[a][b] {
                    cup.push((a + 1, b + 1, g + 1, RatText::of(c)));
                }
            }
        }
        VarietyFile {
            name: self.name.clone(),
            dim: self.d,
            basis: self.labels.clone(),
            degrees: self.q.clone(),
            eta: self.eta.iter().map(|r| row(r)).collect(),
            cup,
            euler_characteristic: self.chi,
            chern: ChernFile { c1: row(&self.c1), cdm1: row(&self.cdm1), cd: row(&self.cd) },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn degrees(&self) -> &[u32] {
        &self.q
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.chi
    }

    pub fn eta(&self) -> &[Vec<Rat>] {
        &self.eta
    }

    pub fn eta_inv(&self) -> &[Vec<Rat>] {
        &self.eta_inv
    }

    pub fn c1(&self) -> &[Rat] {
        &self.c1
    }

    pub fn cdm1(&self) -> &[Rat] {
        &self.cdm1
    }

    pub fn cd(&self) -> &[Rat] {
        &self.cd
    }

    /// Eigenvalue `q_α - d/2` of `μ` on `γ_α`.
    pub fn mu(&self, alpha: usize) -> Rat {
        ri(self.q[alpha - 1] as i64) - rat(self.d as i64, 2)
    }

    /// `γ_α` as a coordinate vector.
    pub fn basis(&self, alpha: usize) -> Vec<Rat> {
        (0..self.n()).map(|b| if b + 1 == alpha { Rat::one() } else { Rat::zero() }).collect()
    }

    /// `γ^α = η^{αβ} γ_β`, so that `<γ^α, v> = v^α`.
    pub fn dual(&self, alpha: usize) -> Vec<Rat> {
        self.eta_inv[alpha - 1].clone()
    }

    pub fn mul(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.n()];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                for (g, c) in &self.cup[i][j] {
                    out[*g] += x * y * c;
                }
            }
        }
        out
    }

    pub fn pair(&self, a: &[Rat], b: &[Rat]) -> Rat {
        let mut s = Rat::zero();
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate() {
                s += x * &self.eta[i][j] * y;
            }
        }
        s
    }

    pub fn integral(&self, a: &[Rat]) -> Rat {
        self.pair(a, &self.basis(1))
    }

    /// Euler vector field components `(1 - q_α) v^α + c_1^α`.
    pub fn euler_field(&self) -> CohPoly {
        (0..self.n())
            .map(|a| {
                DiffPoly::jet(a as u16, 0).scale(&(Rat::one() - ri(self.q[a] as i64))) + DiffPoly::constant(self.c1[a].clone())
            })
            .collect()
    }

    /// The field `v^{(k)}` as an H*-valued jet expression.
    pub fn field(&self, k: u32) -> CohPoly {
        (0..self.n()).map(|a| DiffPoly::jet(a as u16, k)).collect()
    }

    pub fn constant(&self, a: &[Rat]) -> CohPoly {
        a.iter().map(|c| DiffPoly::constant(c.clone())).collect()
    }

    pub fn cup(&self, a: &[DiffPoly], b: &[DiffPoly]) -> CohPoly {
        let mut out = vec![DiffPoly::zero(); self.n()];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                if self.cup[i][j].is_empty() {
                    continue;
                }
                let xy = x * y;
                for (g, c) in &self.cup[i][j] {
                    out[*g] += xy.scale(c);
                }
            }
        }
        out
    }

    pub fn cup_pow(&self, a: &[DiffPoly], k: u32) -> CohPoly {
        let mut out = self.constant(&self.basis(1));
        for _ in 0..k {
            out = self.cup(&out, a);
        }
        out
    }

    /// `<c, a>` for a constant class `c`.
    pub fn pair_poly(&self, c: &[Rat], a: &[DiffPoly]) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (i, x) in c.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in a.iter().enumerate() {
                if !self.eta[i][j].is_zero() {
                    out += y.scale(&(x * &self.eta[i][j]));
                }
            }
        }
        out
    }

    /// `log a = log(a^1) γ_1 + Σ_k (-1)^{k+1} N^k / k` with `N = (a - a^1 γ_1)/a^1`
    /// nilpotent, so the series stops at `k = d`.
    pub fn log(&self, a: &[DiffPoly]) -> Result<CohPoly> {
        let a0 = &a[0];
        let inv = a0.inverse()?;
        let mut nil: CohPoly = a.iter().map(|x| x * &inv).collect();
        nil[0] = DiffPoly::zero();
        let mut out = vec![DiffPoly::zero(); self.n()];
        out[0] = DiffPoly::log(a0)?;
        let mut pw = nil.clone();
        let mut k = 1i64;
        while pw.iter().any(|x| !x.is_zero()) {
            let c = rat(if k % 2 == 1 { 1 } else { -1 }, k);
            out = add(&out, &scale(&pw, &c));
            pw = self.cup(&pw, &nil);
            k += 1;
        }
        Ok(out)
    }
}

/// H*-valued differential polynomial: one entry per basis class.
pub type CohPoly = Vec<DiffPoly>;

pub fn add(a: &[DiffPoly], b: &[DiffPoly]) -> CohPoly {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[DiffPoly], c: &Rat) -> CohPoly {
    a.iter().map(|x| x.scale(c)).collect()
}

pub fn dx(a: &[DiffPoly]) -> CohPoly {
    a.iter().map(DiffPoly::dx).collect()
}

/// Projective space: basis `h^0..h^d`, Chern classes from `(1+h)^{d+1}`.
pub fn projective_space(d: u32) -> VarietyFile {
    let n = d as usize + 1;
    let text = |r: Rat| RatText::of(&r);
    let eta = (0..n)
        .map(|a| (0..n).map(|b| text(if a + b == d as usize { ri(1) } else { ri(0) })).collect())
        .collect();
    let mut cup = Vec::new();
    for a in 0..n {
        for b in 0..n - a {
            cup.push((a + 1, b + 1, a + b + 1, text(ri(1))));
        }
    }
    let chern = |k: i64| -> Vec<RatText> {
        (0..n)
            .map(|a| text(if k >= 0 && a as i64 == k { binom(d as i64 + 1, k as u32) } else { ri(0) }))
            .collect()
    };
    VarietyFile {
        name: format!("P^{d}"),
        dim: d,
        basis: (0..n).map(|k| if k == 0 { "1".to_string() } else { format!("h^{k}") }).collect(),
        degrees: (0..d).chain([d]).collect(),
        eta,
        cup,
        euler_characteristic: n as i64,
        chern: ChernFile { c1: chern(1), cdm1: chern(d as i64 - 1), cd: chern(d as i64) },
    }
}

/// K3 surface: `H^2` of rank 22 with the rational diagonal form of signature (3, 19),
/// `c_1 = 0` and `c_2 = 24 ω`.
pub fn k3() -> VarietyFile {
    let n = 24;
    let text = |k: i64| RatText::of(&ri(k));
    let sign = |i: usize| if i <= 3 { 1 } else { -1 };
    let mut eta = vec![vec![text(0); n]; n];
    eta[0][n - 1] = text(1);
    eta[n - 1][0] = text(1);
    let mut cup = Vec::new();
    for a in 1..=n {
        cup.push((1, a, a, text(1)));
        if a > 1 {
            cup.push((a, 1, a, text(1)));
        }
    }
    for i in 1..=22 {
        eta[i][i] = text(sign(i));
        cup.push((i + 1, i + 1, n, text(sign(i))));
    }
    let zero = vec![text(0); n];
    let mut cd = zero.clone();
    cd[n - 1] = text(24);
    VarietyFile {
        name: "K3".into(),
        dim: 2,
        basis: std::iter::once("1".to_string())
            .chain((1..=22).map(|i| format!("e{i}")))
            .chain(["w".to_string()])
            .collect(),
        degrees: std::iter::once(0).chain(std::iter::repeat(1).take(22)).chain([2]).collect(),
        eta,
        cup,
        euler_characteristic: 24,
        chern: ChernFile { c1: zero.clone(), cdm1: zero, cd },
    }
}

/// `pn:<d>`, `k3`, or a path to a TOML variety file.
pub fn load_variety(source: &str) -> Result<CohomologyRing> {
    let file = if let Some(d) = source.strip_prefix("pn:") {
        let d: u32 = d.parse().map_err(|_| Error::Validation(format!("bad projective-space dimension in {source:?}")))?;
        projective_space(d)
    } else if source == "k3" {
        k3()
    } else {
        let text = std::fs::read_to_string(source).map_err(|e| Error::Validation(format!("{source}: {e}")))?;
        parse_variety(&text)?
    };
    CohomologyRing::from_file(&file)
}

pub fn parse_variety(text: &str) -> Result<VarietyFile> {
    toml::from_str(text).map_err(|e| Error::Validation(e.to_string()))
}

fn check_alpha(ring: &CohomologyRing, alpha: usize) -> Result<()> {
    if alpha == 0 || alpha > ring.n() {
        return Err(Error::Precondition(format!("alpha = {alpha} outside 1..={}", ring.n())));
    }
    Ok(())
}

/// `v_{t^α_p} = dx(γ_α · v^{p+1}/(p+1)!)`.
pub fn phb0_flow(ring: &CohomologyRing, alpha: usize, p: u32) -> Result<CohPoly> {
    check_alpha(ring, alpha)?;
    let vp = scale(&ring.cup_pow(&ring.field(0), p + 1), &factorial(p + 1).recip());
    Ok(dx(&ring.cup(&ring.constant(&ring.basis(alpha)), &vp)))
}

/// `F_1 = 1/24 <c_d, log v_x> - 1/24 <c_{d-1}, v>`.
pub fn deg0_genus1(ring: &CohomologyRing) -> Result<DiffPoly> {
    let lg = ring.log(&ring.field(1))?;
    Ok((ring.pair_poly(ring.cd(), &lg) - ring.pair_poly(ring.cdm1(), &ring.field(0))).scale(&rat(1, 24)))
}

/// `c^α = η^{αβ} dx d_{t^β_0} F`, so that `u = v + eps^2 c`.
pub fn corrections(ring: &CohomologyRing, f: &DiffPoly) -> Result<CohPoly> {
    let n = ring.n();
    let mut low = Vec::with_capacity(n);
    for b in 1..=n {
        low.push(f.evolve(&phb0_flow(ring, b, 0)?).dx());
    }
    Ok((0..n)
        .map(|a| {
            let mut s = DiffPoly::zero();
            for (b, l) in low.iter().enumerate() {
                if !ring.eta_inv[a][b].is_zero() {
                    s += l.scale(&ring.eta_inv[a][b]);
                }
            }
            s
        })
        .collect())
}

/// The vector form `1/24 [c_d · (log v_x)_xx - c_{d-1} · v_xx]` of the genus-one correction.
pub fn vector_corrections(ring: &CohomologyRing) -> Result<CohPoly> {
    let lg = dx(&dx(&ring.log(&ring.field(1))?));
    let a = ring.cup(&ring.constant(ring.cd()), &lg);
    let b = ring.cup(&ring.constant(ring.cdm1()), &ring.field(2));
    Ok(scale(&add(&a, &scale(&b, &ri(-1))), &rat(1, 24)))
}

fn gate(ring: &CohomologyRing, allow_low_dim: bool) -> Result<()> {
    if ring.dim() < 4 && !allow_low_dim {
        return Err(Error::Precondition(format!(
            "{} has dimension {} < 4; genus >= 2 degree-zero terms need not vanish (pass the override to experiment)",
            ring.name(),
            ring.dim()
        )));
    }
    Ok(())
}

/// The principal hierarchy of `ring` together with its genus-one quasitriviality map.
#[derive(Clone, Debug)]
pub struct Deg0Hierarchy {
    ring: CohomologyRing,
    f1: DiffPoly,
    map: QuasiMap,
}

/// Transformed flow against the closed form of the full hierarchy.
#[derive(Clone, Debug)]
pub struct FlowCertificate {
    pub alpha: usize,
    pub p: u32,
    /// In `u`-jets, through the map order.
    pub computed: Vec<EpsSeries>,
    /// Closed form through eps^2.
    pub expected: Vec<EpsSeries>,
    pub matches: bool,
    /// Every coefficient beyond eps^2 vanishes.
    pub higher_vanish: bool,
}

impl FlowCertificate {
    pub fn pass(&self) -> bool {
        self.matches && self.higher_vanish
    }

    pub fn check(&self) -> Result<()> {
        for (a, (c, e)) in self.computed.iter().zip(&self.expected).enumerate() {
            for g in 0..e.coeffs().len() {
                let diff = c.coeff(g) - e.coeff(g);
                if !diff.is_zero() {
                    return Err(Error::Verification(format!(
                        "t^{}_{} flow, component {}, eps^{}: computed - expected = {diff}",
                        self.alpha,
                        self.p,
                        a + 1,
                        2 * g
                    )));
                }
            }
            for g in e.coeffs().len()..c.coeffs().len() {
                if !c.coeff(g).is_zero() {
                    return Err(Error::Verification(format!(
                        "t^{}_{} flow, component {}: eps^{} term {} should vanish",
                        self.alpha,
                        self.p,
                        a + 1,
                        2 * g,
                        c.coeff(g)
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Deg0Hierarchy {
    /// `order` is the eps power kept by the map (2 for the flows, 4 to test that
    /// nothing appears at eps^4).
    pub fn new(ring: &CohomologyRing, order: u32, allow_low_dim: bool) -> Result<Deg0Hierarchy> {
        gate(ring, allow_low_dim)?;
        let f1 = deg0_genus1(ring)?;
        let corr: Vec<EpsSeries> =
            corrections(ring, &f1)?.into_iter().map(|c| EpsSeries::from_poly(c, order)).collect();
        let map = QuasiMap::new(&corr, order)?;
        Ok(Deg0Hierarchy { ring: ring.clone(), f1, map })
    }

    pub fn ring(&self) -> &CohomologyRing {
        &self.ring
    }

    pub fn f1(&self) -> &DiffPoly {
        &self.f1
    }

    pub fn map(&self) -> &QuasiMap {
        &self.map
    }

    pub fn flow(&self, alpha: usize, p: u32) -> Result<FlowCertificate> {
        let computed = transform_flow(&phb0_flow(&self.ring, alpha, p)?, &self.map)?;
        let expected = htt0_display(&self.ring, alpha, p)?;
        let matches = computed.iter().zip(&expected).all(|(c, e)| (0..2).all(|g| (c.coeff(g) - e.coeff(g)).is_zero()));
        let higher_vanish = computed.iter().all(|c| c.coeffs().iter().skip(2).all(DiffPoly::is_zero));
        Ok(FlowCertificate { alpha, p, computed, expected, matches, higher_vanish })
    }
}

/// `htt0_flow` with a fresh eps^2 map.
pub fn htt0_flow(ring: &CohomologyRing, alpha: usize, p: u32, allow_low_dim: bool) -> Result<FlowCertificate> {
    Deg0Hierarchy::new(ring, 2, allow_low_dim)?.flow(alpha, p)
}

fn inv_factorial(k: i64) -> Rat {
    if k < 0 {
        Rat::zero()
    } else {
        factorial(k as u32).recip()
    }
}

/// Closed form of the full flow in `u`-jets:
/// `dx(γ_α·[u^{p+1}/(p+1)! + eps^2/24 c_d·(2u^{p-1}u_xx/(p-1)! + u^{p-2}u_x^2/(p-2)!)
///  - eps^2/24 c_{d-1}·u^{p-1}u_x^2/(p-1)!])`.
pub fn htt0_display(ring: &CohomologyRing, alpha: usize, p: u32) -> Result<Vec<EpsSeries>> {
    check_alpha(ring, alpha)?;
    let p = p as i64;
    let u = ring.field(0);
    let pw = |k: i64| if k < 0 { vec![DiffPoly::zero(); ring.n()] } else { ring.cup_pow(&u, k as u32) };
    let ux2 = ring.cup(&ring.field(1), &ring.field(1));
    let lead = scale(&pw(p + 1), &inv_factorial(p + 1));
    let cd_part = add(
        &scale(&ring.cup(&pw(p - 1), &ring.field(2)), &(ri(2) * inv_factorial(p - 1))),
        &scale(&ring.cup(&pw(p - 2), &ux2), &inv_factorial(p - 2)),
    );
    let cdm1_part = scale(&ring.cup(&pw(p - 1), &ux2), &inv_factorial(p - 1));
    let corr = add(
        &ring.cup(&ring.constant(ring.cd()), &cd_part),
        &scale(&ring.cup(&ring.constant(ring.cdm1()), &cdm1_part), &ri(-1)),
    );
    let g = ring.constant(&ring.basis(alpha));
    let lead = dx(&ring.cup(&g, &lead));
    let corr = scale(&dx(&ring.cup(&g, &corr)), &rat(1, 24));
    Ok(lead.into_iter().zip(corr).map(|(a, b)| EpsSeries::from_coeffs(vec![a, b], 2)).collect())
}

fn eps2(p: DiffPoly, order: u32) -> EpsSeries {
    EpsSeries::from_coeffs(vec![DiffPoly::zero(), p], order)
}

fn coordinate_bracket(
    ring: &CohomologyRing,
    order: u32,
    entry: impl Fn(&[Rat], &[Rat]) -> Vec<DeltaTerm>,
) -> LocalPoissonBracket {
    let n = ring.n();
    let entries = (1..=n)
        .map(|a| (1..=n).map(|b| normalize_delta(&entry(&ring.dual(a), &ring.dual(b)), order)).collect())
        .collect();
    LocalPoissonBracket::new(entries).expect("square entry table")
}

fn half_plus_mu(ring: &CohomologyRing, a: &[Rat]) -> Vec<Rat> {
    a.iter().enumerate().map(|(i, x)| x * (rat(1, 2) + ring.mu(i + 1))).collect()
}

/// The dispersionless pair `<a,b> δ'` and
/// `[<(a/2 + μa)·b, v(x)> + <a·(b/2 + μb), v(y)> + <a·b, c_1>] δ'`, in coordinates.
pub fn dispersionless_brackets(ring: &CohomologyRing, order: u32) -> (LocalPoissonBracket, LocalPoissonBracket) {
    let v = ring.field(0);
    let c = |p: DiffPoly| EpsSeries::from_poly(p, order);
    let one = || c(DiffPoly::one());
    let p1 = coordinate_bracket(ring, order, |a, b| {
        vec![DeltaTerm { at_x: c(DiffPoly::constant(ring.pair(a, b))), at_y: one(), k: 1 }]
    });
    let p2 = coordinate_bracket(ring, order, |a, b| {
        let wx = ring.mul(&half_plus_mu(ring, a), b);
        let wy = ring.mul(a, &half_plus_mu(ring, b));
        let k = ring.pair(&ring.mul(a, b), ring.c1());
        vec![
            DeltaTerm { at_x: c(ring.pair_poly(&wx, &v)), at_y: one(), k: 1 },
            DeltaTerm { at_x: one(), at_y: c(ring.pair_poly(&wy, &v)), k: 1 },
            DeltaTerm { at_x: c(DiffPoly::constant(k)), at_y: one(), k: 1 },
        ]
    });
    (p1, p2)
}

/// Closed form of the transformed pair in `u`-jets, through eps^2.
pub fn brackets_display(ring: &CohomologyRing) -> (LocalPoissonBracket, LocalPoissonBracket) {
    let order = 2;
    let (b1, b2) = dispersionless_brackets(ring, order);
    let n = ring.n();
    let top = ring.basis(n);
    let c = |p: DiffPoly| EpsSeries::from_poly(p, order);
    let one = || c(DiffPoly::one());
    let k = -rat(1, 12);
    let x1 = coordinate_bracket(ring, order, |a, b| {
        let w = ring.pair(a, ring.cdm1()) * ring.pair(b, &top) + ring.pair(b, ring.cdm1()) * ring.pair(a, &top);
        vec![DeltaTerm { at_x: eps2(DiffPoly::constant(&k * w), order), at_y: one(), k: 3 }]
    });
    let u = ring.field(0);
    let w3 = ring.mul(&(ring.cd().iter().map(|x| x * rat(3 - ring.dim() as i64, 2)).collect::<Vec<_>>()), &ring.basis(1));
    let w3: Vec<Rat> = w3.iter().zip(ring.mul(ring.c1(), ring.cdm1())).map(|(x, y)| x - y).collect();
    let x2 = coordinate_bracket(ring, order, |a, b| {
        let big_a = ring.pair_poly(&ring.mul(b, &top), &u).scale(&(ring.pair(a, ring.cdm1()) * &k));
        let big_b = ring.pair_poly(&ring.mul(a, &top), &u).scale(&(ring.pair(b, ring.cdm1()) * &k));
        let konst = ring.pair(&ring.mul(a, b), &w3) * rat(1, 12);
        vec![
            DeltaTerm { at_x: eps2(big_a.dx(), order), at_y: one(), k: 2 },
            DeltaTerm { at_x: eps2(big_a, order), at_y: one(), k: 3 },
            DeltaTerm { at_x: one(), at_y: eps2(-big_b.dx(), order), k: 2 },
            DeltaTerm { at_x: one(), at_y: eps2(big_b, order), k: 3 },
            DeltaTerm { at_x: eps2(DiffPoly::constant(konst), order), at_y: one(), k: 3 },
        ]
    });
    (b1.plus(&x1), b2.plus(&x2))
}

/// First differing coefficient of two brackets, as `(entry, δ-order, eps power, difference)`.
pub fn bracket_mismatch(a: &LocalPoissonBracket, b: &LocalPoissonBracket) -> Option<String> {
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let (p, q) = (a.entry(i, j), b.entry(i, j));
            let top = p.max_derivative().max(q.max_derivative()).unwrap_or(0);
            for s in 0..=top {
                let (x, y) = (p.coeff(s), q.coeff(s));
                let len = x.coeffs().len().max(y.coeffs().len());
                for g in 0..len {
                    let (cx, cy) = (x.coeffs().get(g), y.coeffs().get(g));
                    let diff = cx.cloned().unwrap_or_default() - cy.cloned().unwrap_or_default();
                    if !diff.is_zero() {
                        return Some(format!("entry ({}, {}) δ^({s}) eps^{}: difference {diff}", i + 1, j + 1, 2 * g));
                    }
                }
            }
        }
    }
    None
}

/// `{u_1(x), u_1(y)}_2` for `u_1 = ∫u`.
#[derive(Clone, Debug)]
pub struct ScalarBracketCheck {
    pub computed: DiffOperator,
    pub expected: DiffOperator,
    /// `(1/12)[(3-d)n/2 - <c_1, c_{d-1}>]`.
    pub eps2_coeff: Rat,
    /// The same coefficient with `χ` in place of `n`, as the contraction of the transformed bracket gives it.
    pub eps2_coeff_chi: Rat,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct BracketReport {
    pub before: (LocalPoissonBracket, LocalPoissonBracket),
    pub after: (LocalPoissonBracket, LocalPoissonBracket),
    pub expected: (LocalPoissonBracket, LocalPoissonBracket),
    pub first_mismatch: Option<String>,
    pub second_mismatch: Option<String>,
    pub skew: bool,
    pub scalar: ScalarBracketCheck,
}

impl BracketReport {
    pub fn pass(&self) -> bool {
        self.first_mismatch.is_none() && self.second_mismatch.is_none() && self.skew && self.scalar.pass
    }
}

/// `Σ a_μ b_ν P^{μν}` for covectors `a, b`.
fn contract(b: &LocalPoissonBracket, x: &[Rat], y: &[Rat]) -> DiffOperator {
    let mut out = DiffOperator::zero(b.order());
    for (i, xi) in x.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        for (j, yj) in y.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            out = out.plus(&b.entry(i, j).scale(&(xi * yj)));
        }
    }
    out
}

/// Transform both brackets by the genus-one map (each separately; the map is linear
/// in the bracket) and compare with the closed forms.
pub fn deg0_brackets(ring: &CohomologyRing, allow_low_dim: bool) -> Result<BracketReport> {
    let h = Deg0Hierarchy::new(ring, 2, allow_low_dim)?;
    let before = dispersionless_brackets(ring, 2);
    let after = (transform_bracket(&before.0, h.map())?, transform_bracket(&before.1, h.map())?);
    let expected = brackets_display(ring);
    let first_mismatch = bracket_mismatch(&after.0, &expected.0);
    let second_mismatch = bracket_mismatch(&after.1, &expected.1);
    let skew = after.0.is_skew() && after.1.is_skew();

    let d = ring.dim() as i64;
    let lower: Vec<Rat> = ring.eta()[0].clone();
    let computed = contract(&after.1, &lower, &lower);
    let n_top = (ring.n() - 1) as u16;
    let u1 = EpsSeries::from_poly(DiffPoly::jet(n_top, 0), 2);
    let half = rat(1 - d, 2);
    let c1cdm1 = ring.pair(ring.c1(), ring.cdm1());
    let eps2_coeff = (rat(3 - d, 2) * ri(ring.n() as i64) - &c1cdm1) / ri(12);
    let eps2_coeff_chi = (rat(3 - d, 2) * ri(ring.euler_characteristic()) - &c1cdm1) / ri(12);
    let one = EpsSeries::from_poly(DiffPoly::one(), 2);
    let expected12 = normalize_delta(
        &[
            DeltaTerm { at_x: u1.scale(&half), at_y: one.clone(), k: 1 },
            DeltaTerm { at_x: one.clone(), at_y: u1.scale(&half), k: 1 },
            DeltaTerm { at_x: eps2(DiffPoly::constant(eps2_coeff.clone()), 2), at_y: one, k: 3 },
        ],
        2,
    );
    let pass = computed.minus(&expected12).is_zero();
    Ok(BracketReport {
        before,
        after,
        expected,
        first_mismatch,
        second_mismatch,
        skew,
        scalar: ScalarBracketCheck { computed, expected: expected12, eps2_coeff, eps2_coeff_chi, pass },
    })
}

/// `{lhs, rhs}` of `∫c_1 c_{d-1} = (3/2) tr deg^2 - (χ/2) d (3d+1)`, `deg = 2q` on `H^{2q}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChernReport {
    pub lhs: Rat,
    pub rhs: Rat,
    pub pass: bool,
}

pub fn chern_check(ring: &CohomologyRing) -> ChernReport {
    let lhs = ring.pair(ring.c1(), ring.cdm1());
    let tr: i64 = ring.degrees().iter().map(|&q| (2 * q as i64).pow(2)).sum();
    let d = ring.dim() as i64;
    let rhs = rat(3 * tr, 2) - rat(ring.euler_characteristic() * d * (3 * d + 1), 2);
    let pass = lhs == rhs;
    ChernReport { lhs, rhs, pass }
}

/// `(1/2) tr[1/4 - μ^2]`, the eps^2 coefficient the scalar bracket must have.
pub fn mu_trace_coeff(ring: &CohomologyRing) -> Rat {
    let mut s = Rat::zero();
    for a in 1..=ring.n() {
        let m = ring.mu(a);
        s += rat(1, 4) - &m * &m;
    }
    s / ri(2)
}

/// `t_p = Σ_α t^α_p γ_α`.
fn time_vector(ring: &CohomologyRing, p: u32, d: u32) -> Vec<TSeries> {
    (0..ring.n()).map(|a| TSeries::var(Time::new(a as u16, p as u16), d)).collect()
}

pub fn cup_series(ring: &CohomologyRing, a: &[TSeries], b: &[TSeries]) -> Vec<TSeries> {
    let d = a.first().map(TSeries::max_deg).unwrap_or(0);
    let mut out = vec![TSeries::zero(d); ring.n()];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
            if ring.cup[i][j].is_empty() {
                continue;
            }
            let xy = x.mul(y);
            for (g, c) in &ring.cup[i][j] {
                out[*g] = out[*g].plus(&xy.scale(c));
            }
        }
    }
    out
}

/// H*-valued topological solution `v = Σ_p t_p · v^p/p!` through degree `d`.
pub fn vtop_vector(ring: &CohomologyRing, d: u32) -> Vec<TSeries> {
    let t0 = time_vector(ring, 0, d);
    let mut v = t0.clone();
    for _ in 0..d {
        let mut next = t0.clone();
        let mut vp: Vec<TSeries> = (0..ring.n()).map(|a| if a == 0 { TSeries::one(d) } else { TSeries::zero(d) }).collect();
        for p in 1..d {
            vp = cup_series(ring, &vp, &v);
            let term = cup_series(ring, &time_vector(ring, p, d), &vp);
            next = next.iter().zip(&term).map(|(x, y)| x.plus(&y.scale(&factorial(p).recip()))).collect();
        }
        v = next;
    }
    v
}

/// `eps^2 log τ_0 = Σ_{m>=3} 1/(m(m-1)(m-2)) Σ_{p_1+..+p_m = m-3} ∫ Π t_{p_i}/p_i!`.
pub fn tau0(ring: &CohomologyRing, d: u32) -> TSeries {
    let mut out = TSeries::zero(d);
    for m in 3..=d {
        let w = ri((m * (m - 1) * (m - 2)) as i64).recip();
        for ps in multisets(m, m - 3) {
            let times: Vec<Time> = ps.iter().map(|p| Time::t(*p as u16)).collect();
            let arrangements = factorial(m) / TMono::from_times(&times).symmetry_factor();
            let mut prod: Vec<TSeries> = ring.constant_series(&ring.basis(1), d);
            let mut denom = Rat::one();
            for p in &ps {
                prod = cup_series(ring, &prod, &time_vector(ring, *p, d));
                denom *= factorial(*p);
            }
            let int = integral_series(ring, &prod);
            out = out.plus(&int.scale(&(&w * &arrangements / denom)));
        }
    }
    out
}

fn integral_series(ring: &CohomologyRing, a: &[TSeries]) -> TSeries {
    let d = a.first().map(TSeries::max_deg).unwrap_or(0);
    let mut out = TSeries::zero(d);
    for (j, x) in a.iter().enumerate() {
        if !ring.eta[0][j].is_zero() {
            out = out.plus(&x.scale(&ring.eta[0][j]));
        }
    }
    out
}

impl CohomologyRing {
    fn constant_series(&self, a: &[Rat], d: u32) -> Vec<TSeries> {
        a.iter().map(|c| TSeries::constant(c.clone(), d)).collect()
    }
}

/// `F_1` evaluated at the topological solution, through degree `d`.
pub fn f1_series(ring: &CohomologyRing, d: u32) -> Result<TSeries> {
    let f1 = deg0_genus1(ring)?;
    let v = vtop_vector(ring, d + 1);
    let jets: Vec<Vec<TSeries>> = v.iter().map(|c| wktau::jets_of(c, 1, d)).collect();
    wktau::evaluate(&f1, &jets, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetalg::dp;

    fn pn(d: u32) -> CohomologyRing {
        load_variety(&format!("pn:{d}")).unwrap()
    }

    #[test]
    fn projective_space_chern_data() {
        let r = pn(4);
        assert_eq!(r.n(), 5);
        assert_eq!(r.euler_characteristic(), 5);
        let v = |k: usize, c: i64| {
            let mut x = vec![ri(0); 5];
            x[k] = ri(c);
            x
        };
        assert_eq!(r.c1(), &v(1, 5)[..]);
        assert_eq!(r.cdm1(), &v(3, 10)[..]);
        assert_eq!(r.cd(), &v(4, 5)[..]);
        let p1 = pn(1);
        assert_eq!(p1.labels(), &["1".to_string(), "h^1".to_string()]);
        assert_eq!(p1.cdm1(), &p1.basis(1)[..]);
    }

    #[test]
    fn k3_data() {
        let r = load_variety("k3").unwrap();
        assert_eq!((r.dim(), r.euler_characteristic(), r.n()), (2, 24, 24));
        assert!(r.c1().iter().all(Zero::is_zero));
        assert_eq!(r.degrees().iter().filter(|&&q| q == 1).count(), 22);
    }

    #[test]
    fn file_round_trip() {
        for src in ["pn:3", "k3"] {
            let r = load_variety(src).unwrap();
            let text = toml::to_string(&r.to_file()).unwrap();
            let back = CohomologyRing::from_file(&parse_variety(&text).unwrap()).unwrap();
            assert_eq!(back.to_file(), r.to_file());
        }
    }

    fn expect_axiom(mut f: VarietyFile, edit: impl FnOnce(&mut VarietyFile), axiom: &str) {
        edit(&mut f);
        match CohomologyRing::from_file(&f) {
            Err(Error::Validation(m)) => assert!(m.starts_with(axiom), "{m}"),
            other => panic!("expected {axiom} violation, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_the_axiom() {
        let base = projective_space(2);
        let t = |s: &str| RatText::Text(s.into());
        expect_axiom(base.clone(), |f| f.eta[0][1] = t("1"), "eta symmetric");
        expect_axiom(base.clone(), |f| { f.eta[0][1] = t("1"); f.eta[1][0] = t("1") }, "Poincare degree");
        expect_axiom(base.clone(), |f| { f.eta[0][2] = t("2"); f.eta[2][0] = t("2") }, "volume");
        expect_axiom(base.clone(), |f| f.cup.retain(|c| !(c.0 == 2 && c.1 == 1)), "cup commutative");
        expect_axiom(base.clone(), |f| f.cup.push((2, 2, 2, t("1"))), "cup graded");
        expect_axiom(base.clone(), |f| f.euler_characteristic = 4, "Euler characteristic");
        expect_axiom(base.clone(), |f| f.chern.c1[2] = t("1"), "chern graded");
        expect_axiom(base.clone(), |f| f.cup.push((9, 1, 1, t("1"))), "cup");
        expect_axiom(base, |f| f.degrees[1] = 0, "grading");
        let bad = "name = \"x\"\ndim = 0\nbasis = [\"1\"]\ndegrees = [0]\neta = [[\"1\"]]\ncup = [[1, 1, 1, \"1\"]]\n\
                   euler_characteristic = 1\nextra = 3\n[chern]\nc1 = [\"0\"]\ncdm1 = [\"0\"]\ncd = [\"1\"]\n";
        assert!(matches!(parse_variety(bad), Err(Error::Validation(_))));
        let good = bad.replace("extra = 3\n", "");
        let pt = CohomologyRing::from_file(&parse_variety(&good).unwrap()).unwrap();
        assert_eq!(pt.n(), 1);
    }

    #[test]
    fn broken_products_are_rejected() {
        let two = || RatText::Text("2".into());
        let mut f = projective_space(4);
        f.cup.retain(|c| !(c.0 == 2 && c.1 == 2));
        f.cup.push((2, 2, 3, two()));
        expect_axiom(f, |_| {}, "cup associative");
        let mut f = projective_space(3);
        f.cup.retain(|c| !(c.0 == 2 && c.1 == 3) && !(c.0 == 3 && c.1 == 2));
        f.cup.push((2, 3, 4, two()));
        f.cup.push((3, 2, 4, two()));
        expect_axiom(f, |_| {}, "Frobenius");
    }

    #[test]
    fn phb0_examples() {
        let r = pn(4);
        let f = phb0_flow(&r, 1, 0).unwrap();
        assert_eq!(f, r.field(1));
        let h = phb0_flow(&r, 2, 0).unwrap();
        assert_eq!(h[0], DiffPoly::zero());
        assert_eq!(h[2], DiffPoly::jet(1, 1));
        let f1 = phb0_flow(&r, 1, 1).unwrap();
        // (v^2/2)_x on the h^2 component: v^1 v^3 + (v^2)^2/2
        assert_eq!(f1[2], dp("v[1]_0*v[3]_0 + v[2]_0^2/2").dx());
        assert!(phb0_flow(&r, 6, 0).is_err());
    }

    #[test]
    fn phb0_flows_commute() {
        let r = pn(3);
        for (a, p, b, q) in [(1, 1, 2, 1), (2, 2, 3, 1), (1, 2, 4, 2), (3, 3, 2, 0)] {
            let x = phb0_flow(&r, a, p).unwrap();
            let y = phb0_flow(&r, b, q).unwrap();
            for c in 0..r.n() {
                assert!((x[c].evolve(&y) - y[c].evolve(&x)).is_zero(), "({a},{p}) vs ({b},{q})");
            }
        }
    }

    #[test]
    fn genus_one_reduces_to_the_point() {
        let pt = pn(0);
        assert_eq!(deg0_genus1(&pt).unwrap(), DiffPoly::log(&DiffPoly::jet(0, 1)).unwrap().scale(&rat(1, 24)));
    }

    #[test]
    fn genus_one_numbers() {
        let r = pn(4);
        let f = f1_series(&r, 2).unwrap();
        assert_eq!(f.correlator(&[Time::new(0, 1)]), rat(5, 24));
        // γ = h: -(1/24) ∫ c_3 h = -10/24
        assert_eq!(f.correlator(&[Time::new(1, 0)]), rat(-10, 24));
    }

    #[test]
    fn vector_form_of_the_corrections() {
        for d in [2, 4] {
            let r = pn(d);
            let f1 = deg0_genus1(&r).unwrap();
            let c = corrections(&r, &f1).unwrap();
            let w = vector_corrections(&r).unwrap();
            for a in 0..r.n() {
                assert!(c[a].equiv(&w[a]), "component {}", a + 1);
            }
        }
    }

    #[test]
    fn topological_solution() {
        let pt = pn(0);
        assert_eq!(vtop_vector(&pt, 5)[0], wktau::vtop(5));
        assert_eq!(tau0(&pt, 5), wktau::f0(5));
        let r = pn(2);
        let v = vtop_vector(&r, 3);
        for a in 0..3 {
            assert_eq!(v[a].slice(1), TSeries::var(Time::new(a as u16, 0), 3));
        }
        let t = tau0(&r, 4);
        // <τ_0(h) τ_0(h) τ_0(1)> = ∫h^2 = 1, <τ_0(h)^3> = 0
        assert_eq!(t.correlator(&[Time::new(1, 0), Time::new(1, 0), Time::new(0, 0)]), ri(1));
        assert_eq!(t.correlator(&[Time::new(1, 0); 3]), ri(0));
        // <τ_1(1) τ_0(1) τ_0(h) τ_0(h)>: ψ-integral 1 times ∫h^2
        assert_eq!(t.correlator(&[Time::new(0, 1), Time::new(0, 0), Time::new(1, 0), Time::new(1, 0)]), ri(1));
    }

    #[test]
    fn htt0_small_p() {
        let r = pn(4);
        let h = Deg0Hierarchy::new(&r, 2, false).unwrap();
        for a in 1..=r.n() {
            for p in 0..=2 {
                let c = h.flow(a, p).unwrap();
                c.check().unwrap();
            }
        }
        let e = htt0_display(&r, 2, 0).unwrap();
        assert!(e.iter().all(|s| s.coeff(1).is_zero()));
    }

    #[test]
    fn low_dimension_gate() {
        assert!(matches!(htt0_flow(&pn(2), 1, 1, false), Err(Error::Precondition(_))));
        assert!(htt0_flow(&pn(2), 1, 1, true).is_ok());
    }

    #[test]
    fn chern_examples() {
        assert_eq!(chern_check(&pn(4)), ChernReport { lhs: ri(50), rhs: ri(50), pass: true });
        assert_eq!(chern_check(&pn(1)), ChernReport { lhs: ri(2), rhs: ri(2), pass: true });
        let k = chern_check(&load_variety("k3").unwrap());
        assert_eq!((k.lhs, k.rhs, k.pass), (ri(0), ri(-12), false));
    }

    #[test]
    fn chern_constraint_is_the_scalar_bracket_identity() {
        for src in ["pn:1", "pn:2", "pn:3", "pn:4", "pn:5", "k3"] {
            let r = load_variety(src).unwrap();
            let d = r.dim() as i64;
            let lhs12 = (rat(3 - d, 2) * ri(r.n() as i64) - r.pair(r.c1(), r.cdm1())) / ri(12);
            assert_eq!(lhs12 == mu_trace_coeff(&r), chern_check(&r).pass, "{src}");
        }
    }

    #[test]
    fn htt0_through_p4() {
        for d in [4, 5] {
            let r = pn(d);
            let h = Deg0Hierarchy::new(&r, 2, false).unwrap();
            for a in 1..=r.n() {
                for p in 0..=4 {
                    h.flow(a, p).unwrap().check().unwrap();
                }
            }
        }
    }

    #[test]
    fn nothing_at_eps4() {
        let r = pn(4);
        let h = Deg0Hierarchy::new(&r, 4, false).unwrap();
        for (a, p) in [(1, 1), (2, 2), (1, 3), (3, 1)] {
            let c = h.flow(a, p).unwrap();
            assert!(c.higher_vanish, "t^{a}_{p}");
            assert!(c.matches);
        }
    }

    #[test]
    fn brackets_match_closed_form() {
        let r = pn(4);
        let b = deg0_brackets(&r, false).unwrap();
        assert_eq!(b.first_mismatch, None);
        assert_eq!(b.second_mismatch, None);
        assert!(b.skew);
        assert!(b.scalar.pass, "{} vs {}", b.scalar.computed, b.scalar.expected);
        assert_eq!(b.scalar.eps2_coeff, b.scalar.eps2_coeff_chi);
        // (1/12)[(3-4)5/2 - 50]
        assert_eq!(b.scalar.eps2_coeff, rat(-105, 24));
        for i in 0..r.n() {
            for j in 0..r.n() {
                assert_eq!(b.before.0.entry(i, j).coeff(1).coeff(0).constant_term(), r.eta_inv()[i][j]);
            }
        }
    }
}
