//! The pseudo-spectral nonlinear term against the direct convolution sum,
//! and the product estimate behind the uniform bound.

use std::f64::consts::PI;

use critical_ns::diagnostics::bilinear_chain;
use critical_ns::dynamics::{nonlinear_term, NonlinearMethod};
use critical_ns::initial_data::random_divfree;
use critical_ns::spectral::make_grid;

fn main() -> critical_ns::Result<()> {
    let grid = make_grid(8, 2.0 * PI)?;
    for seed in 0..4 {
        let v = random_divfree(seed, -1.0, 2, 1.0, &grid)?;
        let a = nonlinear_term(&v, NonlinearMethod::PseudoSpectral)?;
        let b = nonlinear_term(&v, NonlinearMethod::DirectConvolution)?;
        let diff = a.difference(&b)?.max_magnitude() / b.max_magnitude().max(f64::MIN_POSITIVE);
        let w = random_divfree(seed + 50, 0.0, 2, 0.5, &grid)?;
        let c = bilinear_chain(&v, &w)?;
        println!(
            "seed {seed}: relative mismatch {diff:.1e}; sum|conv| {:.4} <= X0 X0 {:.4} <= cross {:.4}",
            c.tensor_l1, c.x0_product, c.cross_bound
        );
    }
    Ok(())
}
