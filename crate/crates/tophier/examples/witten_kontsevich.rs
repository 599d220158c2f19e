//! Witten-Kontsevich potentials in the times, a few intersection numbers and the
//! Virasoro residuals.

use tophier::wktau::{self, Lambda};

fn main() -> tophier::Result<()> {
    println!("v(t) = {}", wktau::vtop(4));
    println!("<t0^3>_0 = {}", wktau::intersect(0, &[0, 0, 0])?);
    println!("<t1>_1 = {}", wktau::intersect(1, &[1])?);
    println!("<t4>_2 = {}", wktau::intersect(2, &[4])?);
    println!("<t3 lambda_1>_2 = {}", wktau::genus2_lambda(&[3], Lambda::One)?);
    println!("<t2 lambda_2>_2 = {}", wktau::genus2_lambda(&[2], Lambda::Two)?);

    let rep = wktau::virasoro_check(2, 5, 2)?;
    println!("Virasoro residuals vanish through degree 5: {}", rep.passed());
    Ok(())
}
