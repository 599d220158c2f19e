//! Genus-one potential of P^1 from the loop equation, and the small-q limit of the flows.

use tophier::p1sector::{self, Series};

fn main() -> tophier::Result<()> {
    let s = p1sector::genus1_solve()?;
    println!("F_1 = {}", s.f1);
    println!("gradient closed: {}, equals the closed form: {}", s.closed, s.f1 == p1sector::f1_display());
    for (i, t) in p1sector::theta_series(1, 3)?.iter().enumerate() {
        println!("theta_1,{i} = {t}");
    }
    for f in p1sector::p1_flow(Series::T, 1) {
        println!("t1 flow: {f}   at q = 0: {}", p1sector::at_q_zero(&f)?);
    }
    Ok(())
}
