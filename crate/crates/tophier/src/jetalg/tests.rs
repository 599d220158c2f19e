use proptest::prelude::*;

use super::*;

fn v(k: u32) -> DiffPoly {
    DiffPoly::jet(0, k)
}

#[test]
fn dx_examples() {
    assert_eq!(v(0).pow(3).dx(), dp("3*v[1]_0^2*v[1]_1"));
    assert_eq!(DiffPoly::log(&v(1)).unwrap().dx(), dp("v[1]_2/v[1]_1"));
    let q = DiffPoly::exp(&DiffPoly::jet(1, 0));
    assert_eq!(q.dx(), &q * &DiffPoly::jet(1, 1));
}

#[test]
fn inverse_atom_derivative() {
    let d = dp("v[1]_1^2 - exp{v[2]_0}*v[2]_1^2");
    let inv = d.inverse().unwrap();
    // dx(1/D) = -dx(D)/D^2
    let want = -(&d.dx() * &inv.pow(2));
    assert_eq!(inv.dx(), want);
    assert!((&inv * &d).equiv(&DiffPoly::one()));
}

#[test]
fn inverse_pulls_out_monomial_content() {
    let p = dp("v[1]_1^3 - exp{v[2]_0}*v[1]_1*v[2]_1^2");
    let inv = p.inverse().unwrap();
    let want = dp("inv{v[1]_1}*inv{v[1]_1^2 - exp{v[2]_0}*v[2]_1^2}");
    assert_eq!(inv, want);
}

#[test]
fn var_derivative_examples() {
    let h = v(0).pow(3).scale(&rat(1, 6));
    let e = h.var_derivative(0).unwrap();
    assert_eq!(e, dp("1/2*v[1]_0^2"));
    assert_eq!(e.dx(), dp("v[1]_0*v[1]_1"));
    assert_eq!(dp("1/2*v[1]_1^2").var_derivative(0).unwrap(), dp("-v[1]_2"));
    let h = dp("v[1]_0^2*v[1]_3 + v[1]_1/v[1]_2");
    assert!(h.dx().var_derivative(0).unwrap().equiv(&DiffPoly::zero()));
    assert!(matches!(
        DiffPoly::log(&v(1)).unwrap().var_derivative(0),
        Err(crate::Error::UnsupportedDensity(_))
    ));
}

#[test]
fn grade_examples() {
    assert_eq!(v(2).grade(), Grade::Homogeneous(2));
    assert_eq!(v(1).pow(2).grade(), Grade::Homogeneous(2));
    for t in ["v[1]_4/v[1]_1^2", "v[1]_2*v[1]_3/v[1]_1^3", "v[1]_2^3/v[1]_1^4"] {
        assert_eq!(dp(t).grade(), Grade::Homogeneous(2), "{t}");
    }
    assert_eq!(dp("v[1]_1 + v[1]_2").grade(), Grade::Mixed(vec![1, 2]));
    assert_eq!(dp("inv{v[1]_1^2 - exp{v[2]_0}*v[2]_1^2}").grade(), Grade::Homogeneous(-2));
}

#[test]
fn substitution_examples() {
    let f1 = DiffPoly::log(&v(1)).unwrap().scale(&rat(1, 24));
    let map = vec![EpsSeries::from_coeffs(vec![v(0), f1.dx_n(2)], 2)];
    let u = substitute(&v(0), &map, 2).unwrap();
    assert_eq!(u.coeff(0), &v(0));
    assert_eq!(u.coeff(1), &dp("1/24*v[1]_3/v[1]_1 - 1/24*v[1]_2^2/v[1]_1^2"));
    let ux = substitute(&v(1), &map, 2).unwrap();
    assert_eq!(ux.coeff(1), &f1.dx_n(3));
    let id = identity_map(1, 4);
    let p = dp("v[1]_0^2*v[1]_3/v[1]_1 + 3");
    let s = substitute(&p, &id, 4).unwrap();
    assert_eq!(s, EpsSeries::from_poly(p, 4));
}

#[test]
fn singular_substitution_is_reported() {
    let map = vec![EpsSeries::from_coeffs(vec![DiffPoly::int(1), v(0)], 2)];
    // v -> 1 + eps^2 v makes v_x start at eps^2
    let r = substitute(&dp("1/v[1]_1"), &map, 2);
    assert!(matches!(r, Err(crate::Error::SingularSubstitution(_))));
}

#[test]
fn canonical_text_round_trip() {
    let s = "1/24*log{v[1]_1} - 7/1920*v[1]_2*v[1]_3*inv{v[1]_1}^3";
    let p = dp(s);
    assert_eq!(dp(&p.to_string()), p);
    let q = dp("exp{v[2]_0}^-1*v[2]_1 + inv{v[1]_1^2 - exp{v[2]_0}*v[2]_1^2}^2");
    assert_eq!(q.to_string(), dp(&q.to_string()).to_string());
    assert!("v[0]_1".parse::<DiffPoly>().is_err());
    assert!("v[1]_1 +".parse::<DiffPoly>().is_err());
}

#[test]
fn exact_division() {
    let d = dp("v[1]_1^2 - exp{v[2]_0}*v[2]_1^2");
    let q = dp("3*v[1]_2 + exp{v[2]_0}^2*v[2]_1");
    assert_eq!((&d * &q).div_exact(&d), Some(q.clone()));
    assert_eq!((&d * &q + DiffPoly::jet(0, 0)).div_exact(&d), None);
}

#[test]
fn binomials_and_factorials() {
    assert_eq!(binom(5, 2), ri(10));
    assert_eq!(binom(-1, 3), ri(-1));
    assert_eq!(binom(-2, 2), ri(3));
    assert_eq!(double_factorial(7), ri(105));
    assert_eq!(double_factorial(-1), ri(1));
    assert_eq!(factorial(5), ri(120));
}

pub(crate) fn arb_poly(with_atoms: bool) -> impl Strategy<Value = DiffPoly> {
    let factor = (0u16..2, 0u32..4, -2i32..4).prop_map(|(c, k, e)| {
        let e = if k == 1 || e >= 0 { e } else { -e };
        (c, k, e)
    });
    let term = (
        -5i64..6,
        1i64..4,
        prop::collection::vec(factor, 0..3),
        0usize..if with_atoms { 4 } else { 1 },
    );
    prop::collection::vec(term, 1..4).prop_map(|terms| {
        let mut p = DiffPoly::zero();
        for (n, d, fs, atom) in terms {
            let mut t = DiffPoly::constant(rat(n, d));
            for (c, k, e) in fs {
                t = &t * &DiffPoly::jet(c, k).powi(e).unwrap();
            }
            let extra = match atom {
                1 => DiffPoly::exp(&DiffPoly::jet(1, 0)),
                2 => DiffPoly::log(&DiffPoly::jet(0, 1)).unwrap(),
                3 => dp("inv{v[1]_1^2 - exp{v[2]_0}*v[2]_1^2}"),
                _ => DiffPoly::one(),
            };
            p += &t * &extra;
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dx_is_a_derivation(f in arb_poly(true), g in arb_poly(true)) {
        let lhs = (&f * &g).dx();
        let rhs = &(&f.dx() * &g) + &(&f * &g.dx());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn var_derivative_kills_total_derivatives(h in arb_poly(false)) {
        for comp in 0..2 {
            let e = h.dx().var_derivative(comp).unwrap();
            prop_assert!(e.equiv(&DiffPoly::zero()), "component {}: {}", comp, e);
        }
    }

    #[test]
    fn grade_is_additive(f in arb_poly(false), g in arb_poly(false)) {
        if let (Grade::Homogeneous(a), Grade::Homogeneous(b)) = (f.grade(), g.grade()) {
            let fg = &f * &g;
            if !fg.is_zero() {
                prop_assert_eq!(fg.grade(), Grade::Homogeneous(a + b));
            }
        }
    }

    #[test]
    fn substitution_commutes_with_dx(p in arb_poly(true), a in arb_poly(false), b in arb_poly(false)) {
        let map = vec![
            EpsSeries::from_coeffs(vec![DiffPoly::jet(0, 0), a], 4),
            EpsSeries::from_coeffs(vec![DiffPoly::jet(1, 0), DiffPoly::zero(), b], 4),
        ];
        let lhs = substitute(&p.dx(), &map, 4).unwrap();
        let rhs = substitute(&p, &map, 4).unwrap().dx();
        prop_assert!(lhs.equiv(&rhs));
    }

    #[test]
    fn canonical_round_trip(p in arb_poly(true)) {
        let text = p.to_string();
        let back: DiffPoly = text.parse().unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back, p);
    }
}
