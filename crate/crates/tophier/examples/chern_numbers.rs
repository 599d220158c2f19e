//! The Chern number constraint on projective spaces and on K3.

use tophier::gwzero;

fn main() -> tophier::Result<()> {
    for src in ["pn:1", "pn:2", "pn:3", "pn:4", "pn:5", "k3"] {
        let ring = gwzero::load_variety(src)?;
        let c = gwzero::chern_check(&ring);
        println!("{src:5} lhs = {:>4}  rhs = {:>4}  {}", c.lhs, c.rhs, if c.pass { "pass" } else { "fail" });
    }
    Ok(())
}
