//! Norm functionals on spectral fields: the `X^s` lattice sums, homogeneous
//! Sobolev norms, and grid-maximum norms of `grad v` and `grad Delta^{-1} v`.
//!
//! The `X^s` norm is the bare lattice sum `sum_{k != 0} |k|^s |v(k)|` with
//! physical wavenumbers `|k| = |2 pi k / L|`. With the box-average coefficient
//! convention no measure factor appears, so the smallness condition reads
//! `X^{-1}(v0) < mu` exactly as on the whole space.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::csum;
use crate::spectral::{fft, Grid, SpectralField};

fn require_zero_mean(v: &SpectralField) -> Result<()> {
    let mean = v.mean_magnitude();
    if mean == 0.0 {
        return Ok(());
    }
    let rest = (1..v.grid().len())
        .map(|idx| v.mode_magnitude(idx))
        .fold(0.0, f64::max);
    if mean > 1e-14 * rest {
        return Err(Error::NonzeroMean(mean));
    }
    Ok(())
}

/// `sum_{k != 0} |k|^s |v(k)|`. Fields with a nonzero mean are rejected when `s < 0`.
pub fn x_norm(v: &SpectralField, s: f64) -> Result<f64> {
    if s < 0.0 {
        require_zero_mean(v)?;
    }
    let g = v.grid();
    Ok(csum((1..g.len()).map(|idx| {
        let m = v.mode_magnitude(idx);
        if m == 0.0 {
            0.0
        } else {
            g.magnitude(idx).powf(s) * m
        }
    })))
}

/// Homogeneous Sobolev norm `(sum_{k != 0} |k|^{2s} |v(k)|^2)^{1/2}`.
pub fn hs_norm(v: &SpectralField, s: f64) -> Result<f64> {
    if s < 0.0 {
        require_zero_mean(v)?;
    }
    let g = v.grid();
    let sum = csum((1..g.len()).map(|idx| {
        let m2 = v.mode_magnitude(idx).powi(2);
        if m2 == 0.0 {
            0.0
        } else {
            g.magnitude(idx).powf(2.0 * s) * m2
        }
    }));
    Ok(sum.sqrt())
}

/// Kinetic energy `1/2` box-average of `|v|^2`, i.e. `1/2 sum_k |v(k)|^2`.
pub fn energy(v: &SpectralField) -> f64 {
    0.5 * csum((0..v.grid().len()).map(|idx| v.mode_magnitude(idx).powi(2)))
}

/// Point values of the nine entries `d_m v_j` of a spectral symbol applied
/// component-pair-wise, returning the grid maximum of the Frobenius norm.
fn tensor_linf<F>(v: &SpectralField, symbol: F) -> f64
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    let g = v.grid();
    let spectra: Vec<Vec<Complex64>> = (0..9)
        .map(|e| {
            let (m, j) = (e / 3, e % 3);
            let comp = v.component(j);
            (0..g.len())
                .map(|idx| {
                    if g.is_nyquist(idx) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        symbol(idx, m) * comp[idx]
                    }
                })
                .collect()
        })
        .collect();
    let refs: Vec<&[Complex64]> = spectra.iter().map(Vec::as_slice).collect();
    let phys = fft::inverse_real_many(g, &refs);
    (0..g.len())
        .into_par_iter()
        .map(|p| phys.iter().map(|a| a[p] * a[p]).sum::<f64>().sqrt())
        .reduce(|| 0.0, f64::max)
}

/// Grid maximum of the Frobenius norm of `grad v`.
pub fn grad_linf(v: &SpectralField) -> f64 {
    let g = v.grid();
    tensor_linf(v, |idx, m| Complex64::new(0.0, g.wavenumber(idx)[m]))
}

/// Grid maximum of the Frobenius norm of `grad Delta^{-1} v`, symbol
/// `-i k_m / |k|^2` on each component. Bounded by `X^{-1}(v)`.
pub fn riesz_proxy_linf(v: &SpectralField) -> Result<f64> {
    require_zero_mean(v)?;
    let g = v.grid();
    Ok(tensor_linf(v, |idx, m| {
        if idx == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -g.wavenumber(idx)[m] / g.magnitude(idx).powi(2))
        }
    }))
}

/// Grid maximum of `|v|`.
pub fn velocity_linf(v: &SpectralField) -> f64 {
    let phys = crate::spectral::transform_inverse(v);
    (0..v.grid().len())
        .into_par_iter()
        .map(|p| (phys[0][p].powi(2) + phys[1][p].powi(2) + phys[2][p].powi(2)).sqrt())
        .reduce(|| 0.0, f64::max)
}

/// Cauchy-Schwarz constant `(sum_{k != 0} |k|^{-4})^{1/2}` over every mode of the grid,
/// so that `X^{-1} <= C hs(1)` and `X^1 <= C hs(3)`.
pub fn lattice_constant(grid: &Grid) -> f64 {
    csum((1..grid.len()).map(|idx| grid.magnitude(idx).powi(-4))).sqrt()
}

/// Every norm functional of one field.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NormReport {
    pub x_minus1: f64,
    pub x0: f64,
    pub x1: f64,
    /// `s -> hs_norm(v, s)`, keyed by the exact bit pattern's display string.
    pub hs: BTreeMap<String, f64>,
    pub grad_linf: f64,
    pub riesz_linf: f64,
    pub div_residual: f64,
}

impl NormReport {
    /// Checks both embedding chains with `1e-10` absolute slack.
    pub fn embeddings_hold(&self) -> bool {
        self.riesz_linf <= self.x_minus1 + 1e-10 && self.grad_linf <= self.x1 + 1e-10
    }
}

pub fn norm_report(v: &SpectralField, sobolev_orders: &[f64]) -> Result<NormReport> {
    let mut hs = BTreeMap::new();
    for &s in sobolev_orders {
        hs.insert(format!("{s}"), hs_norm(v, s)?);
    }
    Ok(NormReport {
        x_minus1: x_norm(v, -1.0)?,
        x0: x_norm(v, 0.0)?,
        x1: x_norm(v, 1.0)?,
        hs,
        grad_linf: grad_linf(v),
        riesz_linf: riesz_proxy_linf(v)?,
        div_residual: v.divergence_residual(),
    })
}
