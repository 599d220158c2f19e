//! Degree-zero Gromov-Witten hierarchy of P^4: transformed flows and brackets.

use tophier::gwzero::{self, Deg0Hierarchy};

fn main() -> tophier::Result<()> {
    let ring = gwzero::load_variety("pn:4")?;
    let h = Deg0Hierarchy::new(&ring, 2, false)?;
    println!("F_1 = {}", h.f1());
    for alpha in 1..=ring.n() {
        let c = h.flow(alpha, 2)?;
        println!("t^{alpha}_2 certificate: {}", if c.pass() { "pass" } else { "fail" });
    }
    let c = h.flow(2, 1)?;
    for (a, comp) in c.computed.iter().enumerate() {
        println!("  d u^{} / d t^2_1 = {comp}", a + 1);
    }

    let b = gwzero::deg0_brackets(&ring, false)?;
    println!("brackets reproduce the closed forms: {}", b.pass());
    println!("{{u_1, u_1}}_2 = {}", b.scalar.computed);
    Ok(())
}
