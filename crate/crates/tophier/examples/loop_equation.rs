//! Genus corrections of KdV from the loop equation.

use tophier::kdvloop;

fn main() -> tophier::Result<()> {
    for (g, f) in (1..).zip(kdvloop::solve_through(2)?) {
        let shown = kdvloop::genus_display(g).is_some_and(|d| d == f);
        println!("F_{g} = {f}   (closed form: {shown})");
    }
    Ok(())
}
