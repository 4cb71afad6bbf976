//! Initial data generators and the mollified approximation family.

mod counterexample;
mod mollifier;

pub use counterexample::{
    counterexample_partial, counterexample_table, CounterexamplePartial, CounterexampleRow,
    ProfileShape, RadialProfile,
};
pub use mollifier::{mollify, MollifierShape, MollifierSpec};

use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::norms::x_norm;
use crate::spectral::{Grid, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Oscillating shear layer `m cos(m x3) (d2 phi, -d1 phi, 0)` with
/// `phi = amplitude cos x1 cos x2` (wavenumbers scaled by `2 pi / L`).
///
/// Its `X^{-1}` norm stays bounded as `m` grows, while `X^0` grows like `m`
/// and `X^1` like `m^2`.
pub fn chemin_gallagher(m: u32, amplitude: f64, grid: &Arc<Grid>) -> Result<SpectralField> {
    if m == 0 {
        return Err(invalid("m", "oscillation index must be positive"));
    }
    if 3 * m as usize >= grid.n() {
        return Err(invalid(
            "m",
            format!(
                "m = {m} is not resolved after dealiasing on n = {} (need 3m < n)",
                grid.n()
            ),
        ));
    }
    let kappa = grid.wavenumber_scale();
    let c = amplitude * kappa * f64::from(m) / 8.0;
    let mut v = SpectralField::zeros(grid);
    for s1 in [-1i32, 1] {
        for s2 in [-1i32, 1] {
            for s3 in [-1i32, 1] {
                let idx = grid.index_of([s1, s2, s3 * m as i32]);
                let u1 = Complex64::new(0.0, c * f64::from(s2));
                let u2 = Complex64::new(0.0, -c * f64::from(s1));
                v.set_mode(idx, [u1, u2, ZERO]);
            }
        }
    }
    v.refresh_solenoidal();
    Ok(v)
}

/// `amplitude cos(2 pi x_vary / L) e_axis`; an exact steady-shape solution
/// whose nonlinear term vanishes identically.
pub fn shear_flow(axis: usize, vary: usize, amplitude: f64, grid: &Arc<Grid>) -> Result<SpectralField> {
    if axis > 2 || vary > 2 {
        return Err(invalid("axis", "axes are 0, 1 or 2"));
    }
    if axis == vary {
        return Err(invalid("vary", "velocity axis and variation axis must differ"));
    }
    let mut v = SpectralField::zeros(grid);
    let mut k = [0i32; 3];
    k[vary] = 1;
    let mut m = [ZERO; 3];
    m[axis] = Complex64::new(0.5 * amplitude, 0.0);
    v.set_mode(grid.index_of(k), m);
    k[vary] = -1;
    v.set_mode(grid.index_of(k), m);
    v.refresh_solenoidal();
    Ok(v)
}

fn mode_rng(seed: u64, idx: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64);
    rng
}

/// Random divergence-free field on the shell `0 < |k| <= k_max` (integer
/// lattice norm) with `|v(k)| ~ |k|^slope`, rescaled to the requested `X^{-1}`
/// norm. Each mode draws from its own ChaCha stream keyed by `(seed, index)`,
/// so the result does not depend on evaluation order.
pub fn random_divfree(
    seed: u64,
    spectrum_slope: f64,
    k_max: u32,
    target_x_minus1: f64,
    grid: &Arc<Grid>,
) -> Result<SpectralField> {
    if k_max == 0 || k_max as i32 > grid.retained_max() {
        return Err(invalid(
            "k_max",
            format!(
                "must lie in 1..={} for n = {} (dealiased band)",
                grid.retained_max(),
                grid.n()
            ),
        ));
    }
    if !(target_x_minus1 >= 0.0 && target_x_minus1.is_finite()) {
        return Err(invalid("target_x_minus1", "must be finite and >= 0"));
    }
    let mut v = SpectralField::zeros(grid);
    if target_x_minus1 == 0.0 {
        return Ok(v);
    }
    let kmax2 = (k_max * k_max) as i32;
    for idx in 1..grid.len() {
        let cj = grid.conjugate(idx);
        if cj < idx {
            continue;
        }
        let kk = grid.wavevector(idx);
        if kk.iter().map(|c| c * c).sum::<i32>() > kmax2 {
            continue;
        }
        let mut rng = mode_rng(seed, idx);
        let amp = grid.magnitude(idx).powf(spectrum_slope) / std::f64::consts::SQRT_2;
        let mut draw = || {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * amp
        };
        let mut m = [draw(), draw(), draw()];
        let k = grid.wavenumber(idx);
        let k2 = grid.magnitude(idx).powi(2);
        let kv = (k[0] * m[0] + k[1] * m[1] + k[2] * m[2]) / k2;
        for c in 0..3 {
            m[c] -= k[c] * kv;
        }
        v.set_mode(idx, m);
        v.set_mode(cj, m.map(|z| z.conj()));
    }
    let current = x_norm(&v, -1.0)?;
    v.scale(target_x_minus1 / current);
    v.refresh_solenoidal();
    Ok(v)
}
