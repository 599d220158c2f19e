//! The quasitriviality map takes the dispersionless KdV hierarchy, its Poisson pencil
//! and its densities to the full ones.

use tophier::jetalg::EpsSeries;
use tophier::quasitriv::{self, QuasiMap};
use tophier::{kdvloop, psdo};

fn main() -> tophier::Result<()> {
    let e = 4;
    let df = EpsSeries::from_coeffs(kdvloop::solve_through(2)?, e);
    let map = QuasiMap::kdv(&df, e)?;
    println!("u = {}", map.forward()[0]);

    for i in 0..=2 {
        let t = quasitriv::transform_flow(&[quasitriv::kdv_dispersionless(i)], &map)?;
        println!("t_{i}: {}  (Lax agrees: {})", t[0], t[0].equiv(&psdo::kdv_rhs(i, e)?));
    }

    let (p1, p2) = quasitriv::kdv_brackets(e);
    println!("P1 -> {}", quasitriv::transform_bracket(&p1, &map)?);
    println!("P2 -> {}", quasitriv::transform_bracket(&p2, &map)?);

    for i in -1..=2 {
        println!("h_{i} = {}", quasitriv::tau_density(i, &df, &map)?);
    }
    Ok(())
}
