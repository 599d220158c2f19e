//! The eps^2 P^1 flows after the genus-one map: denominators in D cancel.

use tophier::p1sector::{self, Series};

fn main() -> tophier::Result<()> {
    for (series, k) in [(Series::S, 0), (Series::T, 1)] {
        let r = p1sector::poly_probe(series, k)?;
        println!("{}: polynomial = {}", r.flow, r.pass());
        for p in r.reduced.iter().flatten() {
            println!("  {p}");
        }
    }
    println!("trace coefficient: {}", p1sector::trace_coefficient()?);
    Ok(())
}
