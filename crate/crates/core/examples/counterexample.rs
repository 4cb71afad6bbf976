//! A datum in the homogeneous Sobolev space of order 1/2 whose X^-1 norm is
//! infinite: the partial sums follow the harmonic series.

use critical_ns::initial_data::{counterexample_table, RadialProfile};

fn main() -> critical_ns::Result<()> {
    let profile = RadialProfile::bump();
    println!("l1 mass of the profile: {:.12}", profile.l1_mass());
    let rows = counterexample_table(&[1, 2, 4, 8, 16, 64, 100, 200, 1000], &profile)?;
    println!("{:>6} {:>14} {:>14} {:>12} {:>14}", "J", "X^-1 partial", "H^1/2 partial", "residual", "exact weight");
    for r in rows {
        println!(
            "{:6} {:14.8} {:14.10} {:12.1e} {:14.8}",
            r.j, r.x_minus1_partial, r.h_half_partial, r.harmonic_residual, r.x_minus1_exact_partial
        );
    }
    Ok(())
}
