use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Spectral discretization of the periodic box `[0, L)^3` with `n` points per axis.
///
/// Modes are stored row-major over `(i, j, l)`, flat index `i n^2 + j n + l`;
/// the integer wavevector component for array index `i` is `i` for `i < n/2`
/// and `i - n` otherwise. The zero mode is flat index 0.
pub struct Grid {
    n: usize,
    box_size: f64,
    wavevectors: Vec<[i32; 3]>,
    wavenumbers: Vec<[f64; 3]>,
    magnitudes: Vec<f64>,
    conjugates: Vec<usize>,
    dealias: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("box_size", &self.box_size)
            .finish_non_exhaustive()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.box_size.to_bits() == other.box_size.to_bits()
    }
}

/// Builds a shareable grid. `n` must be even and at least 8; `box_size` positive.
pub fn make_grid(n: usize, box_size: f64) -> Result<Arc<Grid>> {
    Grid::new(n, box_size).map(Arc::new)
}

impl Grid {
    pub fn new(n: usize, box_size: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "resolution must be even and >= 8, got {n}"
            )));
        }
        if !(box_size > 0.0 && box_size.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box size must be positive and finite, got {box_size}"
            )));
        }
        let len = n * n * n;
        let scale = 2.0 * std::f64::consts::PI / box_size;
        let comp = |i: usize| -> i32 {
            if i < n / 2 {
                i as i32
            } else {
                i as i32 - n as i32
            }
        };
        let mut wavevectors = Vec::with_capacity(len);
        let mut conjugates = Vec::with_capacity(len);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    wavevectors.push([comp(i), comp(j), comp(l)]);
                    conjugates.push(((n - i) % n) * n * n + ((n - j) % n) * n + (n - l) % n);
                }
            }
        }
        let wavenumbers: Vec<[f64; 3]> = wavevectors
            .iter()
            .map(|k| k.map(|c| f64::from(c) * scale))
            .collect();
        let magnitudes = wavenumbers
            .iter()
            .map(|k| (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt())
            .collect();
        // 2/3 rule: keep |k_i| < n/3 on every axis.
        let dealias = wavevectors
            .iter()
            .map(|k| k.iter().all(|&c| 3 * (c.unsigned_abs() as usize) < n))
            .collect();

        let mut planner = FftPlanner::new();
        Ok(Grid {
            n,
            box_size,
            wavevectors,
            wavenumbers,
            magnitudes,
            conjugates,
            dealias,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_size(&self) -> f64 {
        self.box_size
    }

    /// Number of modes (and of physical grid points), `n^3`.
    pub fn len(&self) -> usize {
        self.wavevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavevectors.is_empty()
    }

    /// Physical spacing `L / n`.
    pub fn spacing(&self) -> f64 {
        self.box_size / self.n as f64
    }

    /// Factor converting integer wavevectors to physical ones, `2 pi / L`.
    pub fn wavenumber_scale(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_size
    }

    pub const fn zero_mode(&self) -> usize {
        0
    }

    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    /// Flat index of the integer wavevector `k`, taken modulo `n` per axis.
    pub fn index_of(&self, k: [i32; 3]) -> usize {
        let n = self.n as i32;
        let w = |c: i32| c.rem_euclid(n) as usize;
        self.index(w(k[0]), w(k[1]), w(k[2]))
    }

    /// Integer wavevector of a mode; components in `[-n/2, n/2)`.
    pub fn wavevector(&self, idx: usize) -> [i32; 3] {
        self.wavevectors[idx]
    }

    /// Whether the integer wavevector `k` lies in the range representable on this grid.
    pub fn contains(&self, k: [i32; 3]) -> bool {
        let half = (self.n / 2) as i32;
        k.iter().all(|&c| (-half..half).contains(&c))
    }

    /// Physical wavevector `2 pi k / L`.
    pub fn wavenumber(&self, idx: usize) -> [f64; 3] {
        self.wavenumbers[idx]
    }

    /// `|2 pi k / L|`.
    pub fn magnitude(&self, idx: usize) -> f64 {
        self.magnitudes[idx]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Flat index of `-k`.
    pub fn conjugate(&self, idx: usize) -> usize {
        self.conjugates[idx]
    }

    /// True iff some component equals `-n/2`; such modes are their own
    /// conjugate along that axis and carry no unambiguous real derivative.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = -((self.n / 2) as i32);
        self.wavevectors[idx].contains(&half)
    }

    /// True iff the mode survives 2/3-rule dealiasing.
    pub fn is_retained(&self, idx: usize) -> bool {
        self.dealias[idx]
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias
    }

    /// Largest retained integer component, `max |k_i|` with `3|k_i| < n`.
    pub fn retained_max(&self) -> i32 {
        ((self.n - 1) / 3) as i32
    }

    /// Physical coordinate of grid point `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inverse
    }

    pub(crate) fn zeros(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn n8_wavevectors_and_mask() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let mut comps: Vec<i32> = g.wavevectors.iter().map(|k| k[0]).collect();
        comps.sort();
        comps.dedup();
        assert_eq!(comps, (-4..=3).collect::<Vec<_>>());
        for idx in 0..g.len() {
            let k = g.wavevector(idx);
            let keep = k.iter().all(|c| c.abs() <= 2);
            assert_eq!(g.is_retained(idx), keep, "k = {k:?}");
        }
        assert_eq!(g.retained_max(), 2);
    }

    #[test]
    fn n32_counts_and_zero_mode() {
        let g = Grid::new(32, 2.0 * PI).unwrap();
        assert_eq!(g.len(), 32768);
        assert_eq!(g.wavevector(g.zero_mode()), [0, 0, 0]);
        assert_eq!(g.index_of([0, 0, 0]), 0);
        let mut seen = vec![false; g.len()];
        for idx in 0..g.len() {
            let j = g.index_of(g.wavevector(idx));
            assert_eq!(j, idx);
            assert!(!seen[j]);
            seen[j] = true;
        }
        assert_eq!(g.retained_max(), 10);
    }

    #[test]
    fn rejects_bad_resolution() {
        assert!(Grid::new(7, 2.0 * PI).is_err());
        assert!(Grid::new(6, 2.0 * PI).is_err());
        assert!(Grid::new(8, 0.0).is_err());
        assert!(Grid::new(8, -1.0).is_err());
    }

    #[test]
    fn mask_is_symmetric_and_conjugate_is_involution() {
        let g = Grid::new(16, 3.0).unwrap();
        for idx in 0..g.len() {
            let c = g.conjugate(idx);
            assert_eq!(g.conjugate(c), idx);
            assert_eq!(g.is_retained(idx), g.is_retained(c));
            if g.is_retained(idx) {
                let k = g.wavevector(idx);
                assert_eq!(g.wavevector(c), [-k[0], -k[1], -k[2]]);
            }
        }
    }

    #[test]
    fn wavenumbers_scale_with_box() {
        let g = Grid::new(8, PI).unwrap();
        let idx = g.index_of([1, -2, 3]);
        let w = g.wavenumber(idx);
        assert!((w[0] - 2.0).abs() < 1e-15);
        assert!((w[1] + 4.0).abs() < 1e-15);
        assert!((w[2] - 6.0).abs() < 1e-15);
    }
}
