//! Oscillating shear layers: X^-1 stays bounded while the higher norms grow.

use std::f64::consts::PI;

use critical_ns::initial_data::chemin_gallagher;
use critical_ns::norms::x_norm;
use critical_ns::spectral::make_grid;

fn main() -> critical_ns::Result<()> {
    let grid = make_grid(64, 2.0 * PI)?;
    println!("{:>4} {:>10} {:>10} {:>10}", "m", "X^-1", "X^0", "X^1");
    for m in [1, 2, 4, 8, 16] {
        let u = chemin_gallagher(m, 1.0, &grid)?;
        println!(
            "{m:4} {:10.6} {:10.4} {:10.2}",
            x_norm(&u, -1.0)?,
            x_norm(&u, 0.0)?,
            x_norm(&u, 1.0)?
        );
    }
    Ok(())
}
