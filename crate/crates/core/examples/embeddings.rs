//! The norm ladder on random fields: the Riesz proxy sits below X^-1, the
//! gradient sup below X^1, and X^-1 below a lattice constant times H^1.

use std::f64::consts::PI;

use critical_ns::initial_data::random_divfree;
use critical_ns::norms::{lattice_constant, norm_report};
use critical_ns::spectral::make_grid;

fn main() -> critical_ns::Result<()> {
    let grid = make_grid(16, 2.0 * PI)?;
    let c = lattice_constant(&grid);
    println!("lattice constant {c:.6}");
    for seed in 0..5 {
        let v = random_divfree(seed, -1.5, 5, 1.0, &grid)?;
        let r = norm_report(&v, &[1.0])?;
        println!(
            "seed {seed}: riesz {:.4} <= {:.4}, grad {:.4} <= {:.4}, X^-1 {:.4} <= {:.4}",
            r.riesz_linf,
            r.x_minus1,
            r.grad_linf,
            r.x1,
            r.x_minus1,
            c * r.hs["1"]
        );
    }
    Ok(())
}
