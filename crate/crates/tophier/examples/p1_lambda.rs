//! Degree-zero genus-two numbers of P^1 against the lambda classes, and the genus-two
//! fixture comparison.

use tophier::p1sector;

fn main() -> tophier::Result<()> {
    let rep = p1sector::lambda_consistency(6)?;
    let bad = rep.rows.iter().filter(|r| !r.pass).count();
    println!("{} correlators through degree 6, {bad} mismatches", rep.rows.len());
    for r in rep.rows.iter().filter(|r| !num::Zero::is_zero(&r.computed)).take(6) {
        println!("  {:?} {:?}: {}", r.kind, r.spec, r.computed);
    }
    let fx = p1sector::f2_fixture()?;
    println!("q -> 0 limit agrees with the degree-zero part: {}", fx.agrees);
    println!("difference: {}", fx.difference);
    Ok(())
}
