//! KdV flows from `L = dx^2 + 2u`, read off `eps u_t = [(L^{(2i+1)/2})_+, L]`.

use tophier::psdo;

fn main() -> tophier::Result<()> {
    for i in 0..=3 {
        println!("t_{i}: {}", psdo::kdv_rhs(i, 4)?);
    }
    Ok(())
}
