//! Write a variety file, read it back, and watch validation reject a broken one.

use tophier::gwzero::{self, CohomologyRing};

fn main() -> tophier::Result<()> {
    let text = toml::to_string(&gwzero::projective_space(2)).expect("serializes");
    println!("{text}");
    let ring = CohomologyRing::from_file(&gwzero::parse_variety(&text)?)?;
    println!("{}: n = {}, chi = {}, mu = {:?}", ring.name(), ring.n(), ring.euler_characteristic(),
        (1..=ring.n()).map(|a| ring.mu(a).to_string()).collect::<Vec<_>>());

    let broken = text.replace("euler_characteristic = 3", "euler_characteristic = 4");
    match gwzero::parse_variety(&broken).and_then(|f| CohomologyRing::from_file(&f)) {
        Ok(_) => println!("accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
