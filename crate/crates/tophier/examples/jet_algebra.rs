//! Differential polynomials: parsing, x-derivatives, variational derivatives and
//! substitution of an eps-series.

use tophier::jetalg::{substitute, EpsSeries};
use tophier::{dp, DiffPoly};

fn main() -> tophier::Result<()> {
    let g: DiffPoly = "log{v[1]_1}".parse()?;
    println!("dx log v_x = {}", g.dx());

    let f: DiffPoly = "v[1]_0*v[1]_2^2 + 1/2*v[1]_0^2*v[1]_1".parse()?;
    println!("f        = {f}");
    println!("dx f     = {}", f.dx());
    println!("dF/dv    = {}", f.var_derivative(0)?);
    println!("dF/dv of dx f = {}", f.dx().var_derivative(0)?);

    // v -> v + eps^2 v_xx, kept through eps^4
    let map = vec![EpsSeries::from_coeffs(vec![dp("v[1]_0"), dp("v[1]_2")], 4)];
    println!("f(v + eps^2 v_xx) = {}", substitute(&dp("v[1]_0^3"), &map, 4)?);
    Ok(())
}
