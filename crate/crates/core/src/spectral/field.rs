use std::sync::Arc;

use num_complex::Complex64;

use super::{fft, Grid};
use crate::error::{Error, Result};

/// A real vector field on the periodic box, held as three arrays of Fourier
/// coefficients (box-average normalization).
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: [Vec<Complex64>; 3],
    solenoidal: bool,
}

/// Three real component arrays in physical space, indexed like the grid.
pub type PhysicalField = [Vec<f64>; 3];

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coeffs: [grid.zeros(), grid.zeros(), grid.zeros()],
            solenoidal: true,
        }
    }

    /// Wraps raw coefficient arrays. The solenoidal flag is set from the data.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &coeffs {
            if c.len() != grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
        }
        let mut f = SpectralField {
            grid: Arc::clone(grid),
            coeffs,
            solenoidal: false,
        };
        f.solenoidal = f.divergence_residual() <= 1e-12;
        Ok(f)
    }

    pub(crate) fn from_parts(grid: &Arc<Grid>, coeffs: [Vec<Complex64>; 3], solenoidal: bool) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coeffs,
            solenoidal,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>; 3] {
        &self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    /// Mutable access clears the solenoidal flag; callers re-establish it via
    /// [`leray_project`] or [`SpectralField::refresh_solenoidal`].
    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        self.solenoidal = false;
        &mut self.coeffs[c]
    }

    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]]
    }

    pub fn set_mode(&mut self, idx: usize, value: [Complex64; 3]) {
        self.solenoidal = false;
        for c in 0..3 {
            self.coeffs[c][idx] = value[c];
        }
    }

    /// Euclidean magnitude of the complex 3-vector at a mode.
    pub fn mode_magnitude(&self, idx: usize) -> f64 {
        (self.coeffs[0][idx].norm_sqr() + self.coeffs[1][idx].norm_sqr() + self.coeffs[2][idx].norm_sqr())
            .sqrt()
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub fn refresh_solenoidal(&mut self) -> bool {
        self.solenoidal = self.divergence_residual() <= 1e-12;
        self.solenoidal
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.mode_magnitude(i))
            .fold(0.0, f64::max)
    }

    /// Magnitude of the mean (zero) mode.
    pub fn mean_magnitude(&self) -> f64 {
        self.mode_magnitude(self.grid.zero_mode())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// `max_k |v(-k) - conj v(k)|` relative to the largest coefficient magnitude.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_magnitude();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let c = self.grid.conjugate(idx);
            let d: f64 = (0..3)
                .map(|m| (self.coeffs[m][c] - self.coeffs[m][idx].conj()).norm_sqr())
                .sum();
            worst = worst.max(d.sqrt());
        }
        worst / scale
    }

    /// `max_{k != 0} |k . v(k)| / |k|`, relative to the largest coefficient magnitude.
    pub fn divergence_residual(&self) -> f64 {
        let scale = self.max_magnitude();
        if scale == 0.0 {
            return 0.0;
        }
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for idx in 1..g.len() {
            let k = g.wavenumber(idx);
            let d = k[0] * self.coeffs[0][idx] + k[1] * self.coeffs[1][idx] + k[2] * self.coeffs[2][idx];
            worst = worst.max(d.norm() / g.magnitude(idx));
        }
        worst / scale
    }

    /// Replaces each coefficient pair by its Hermitian average, pins the zero
    /// mode to zero and makes self-conjugate modes real.
    pub fn symmetrize(&mut self) {
        let g = Arc::clone(&self.grid);
        for c in 0..3 {
            let a = &mut self.coeffs[c];
            for idx in 0..g.len() {
                let cj = g.conjugate(idx);
                if cj < idx {
                    continue;
                }
                let avg = (a[idx] + a[cj].conj()) * 0.5;
                a[idx] = avg;
                a[cj] = avg.conj();
            }
            a[g.zero_mode()] = Complex64::new(0.0, 0.0);
        }
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn apply_dealias(&mut self) {
        let g = Arc::clone(&self.grid);
        for c in 0..3 {
            for (z, &keep) in self.coeffs[c].iter_mut().zip(g.dealias_mask()) {
                if !keep {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Whether all energy sits inside the dealiased band.
    pub fn is_band_limited(&self) -> bool {
        (0..self.grid.len())
            .all(|idx| self.grid.is_retained(idx) || self.mode_magnitude(idx) == 0.0)
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            for z in c.iter_mut() {
                *z *= factor;
            }
        }
    }

    /// Mode-wise multiplication by a real symbol.
    pub fn apply_symbol<F: Fn(usize) -> f64>(&mut self, symbol: F) {
        for idx in 0..self.grid.len() {
            let s = symbol(idx);
            for c in 0..3 {
                self.coeffs[c][idx] *= s;
            }
        }
    }

    /// `self - other` (same grid required).
    pub fn difference(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        let coeffs = std::array::from_fn(|c| {
            self.coeffs[c]
                .iter()
                .zip(&other.coeffs[c])
                .map(|(a, b)| a - b)
                .collect()
        });
        Ok(SpectralField::from_parts(
            &self.grid,
            coeffs,
            self.solenoidal && other.solenoidal,
        ))
    }

    pub(crate) fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!(
                    "fields live on different grids (n = {} vs {})",
                    self.grid.n(),
                    other.grid.n()
                ),
            });
        }
        Ok(())
    }

    pub(crate) fn into_coeffs(self) -> [Vec<Complex64>; 3] {
        self.coeffs
    }
}

/// Forward transform of a real vector field.
pub fn transform_forward(physical: &PhysicalField, grid: &Arc<Grid>) -> Result<SpectralField> {
    for c in physical {
        if c.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: c.len(),
            });
        }
    }
    let (a, b) = fft::forward_real_pair(grid, &physical[0], &physical[1]);
    let c = fft::forward_real(grid, &physical[2]);
    SpectralField::from_coeffs(grid, [a, b, c])
}

/// Inverse transform to point values on the grid.
pub fn transform_inverse(field: &SpectralField) -> PhysicalField {
    let g = field.grid();
    let (a, b) = fft::inverse_real_pair(g, field.component(0), field.component(1));
    let c = fft::inverse_real(g, field.component(2));
    [a, b, c]
}

/// Mode-wise `(I - k k^T / |k|^2) f(k)`. The zero mode and Nyquist-plane
/// modes are set to zero.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    let g = f.grid();
    let mut out = [g.zeros(), g.zeros(), g.zeros()];
    for idx in 1..g.len() {
        if g.is_nyquist(idx) {
            continue;
        }
        let k = g.wavenumber(idx);
        let k2 = g.magnitude(idx).powi(2);
        let v = f.mode(idx);
        let kv = (k[0] * v[0] + k[1] * v[1] + k[2] * v[2]) / k2;
        for c in 0..3 {
            out[c][idx] = v[c] - k[c] * kv;
        }
    }
    SpectralField::from_parts(g, out, true)
}

/// Vorticity in spectral form, `i k x v(k)` with physical wavevectors
/// (Nyquist-plane modes set to zero).
pub fn curl_hat(v: &SpectralField) -> SpectralField {
    let g = v.grid();
    let mut out = [g.zeros(), g.zeros(), g.zeros()];
    let i = Complex64::new(0.0, 1.0);
    for idx in 0..g.len() {
        if g.is_nyquist(idx) {
            continue;
        }
        let k = g.wavenumber(idx);
        let u = v.mode(idx);
        out[0][idx] = i * (k[1] * u[2] - k[2] * u[1]);
        out[1][idx] = i * (k[2] * u[0] - k[0] * u[2]);
        out[2][idx] = i * (k[0] * u[1] - k[1] * u[0]);
    }
    // A curl is always divergence-free.
    SpectralField::from_parts(g, out, true)
}

/// Divergence-free velocity recovered from vorticity,
/// `v(k) = i k x omega(k) / |k|^2`, i.e. `-Delta^{-1} curl omega`.
pub fn biot_savart(omega: &SpectralField) -> SpectralField {
    let mut v = curl_hat(omega);
    let g = Arc::clone(omega.grid());
    v.apply_symbol(|idx| {
        if idx == 0 {
            0.0
        } else {
            1.0 / g.magnitude(idx).powi(2)
        }
    });
    v.solenoidal = true;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn pseudo_random(grid: &Arc<Grid>, seed: u64) -> PhysicalField {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        std::array::from_fn(|_| (0..grid.len()).map(|_| next()).collect())
    }

    fn shear(grid: &Arc<Grid>) -> PhysicalField {
        let n = grid.n();
        let mut u = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    u[1][grid.index(i, j, l)] = grid.coordinate(i).cos();
                }
            }
        }
        u
    }

    #[test]
    fn cosine_shear_coefficients() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let f = transform_forward(&shear(&g), &g).unwrap();
        for idx in 0..g.len() {
            let k = g.wavevector(idx);
            let m = f.mode(idx);
            let expect = if k == [1, 0, 0] || k == [-1, 0, 0] { 0.5 } else { 0.0 };
            assert!((m[1].re - expect).abs() < 1e-15 && m[1].im.abs() < 1e-15);
            assert!(m[0].norm() < 1e-15 && m[2].norm() < 1e-15);
        }
        assert!(f.is_solenoidal());
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let zero = [vec![0.0; g.len()], vec![0.0; g.len()], vec![0.0; g.len()]];
        let f = transform_forward(&zero, &g).unwrap();
        assert_eq!(f.max_magnitude(), 0.0);
    }

    #[test]
    fn round_trip_random_field() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let u = pseudo_random(&g, 3);
        let f = transform_forward(&u, &g).unwrap();
        assert!(f.hermitian_defect() == 0.0);
        let back = transform_inverse(&f);
        let scale = u.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for c in 0..3 {
            for (a, b) in back[c].iter().zip(&u[c]) {
                assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let bad = [vec![0.0; 10], vec![0.0; g.len()], vec![0.0; g.len()]];
        assert!(matches!(
            transform_forward(&bad, &g),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn parseval_box_average() {
        let g = make_grid(16, 5.0).unwrap();
        let u = pseudo_random(&g, 11);
        let f = transform_forward(&u, &g).unwrap();
        let spectral: f64 = (0..g.len()).map(|i| f.mode_magnitude(i).powi(2)).sum();
        let physical: f64 =
            u.iter().flatten().map(|x| x * x).sum::<f64>() / g.len() as f64;
        assert!((spectral - physical).abs() <= 1e-12 * physical);
    }

    #[test]
    fn projection_cases() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let idx = g.index_of([1, 0, 0]);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);

        let mut grad = SpectralField::zeros(&g);
        grad.set_mode(idx, [one, zero, zero]);
        grad.set_mode(g.conjugate(idx), [one, zero, zero]);
        let p = leray_project(&grad);
        assert_eq!(p.mode_magnitude(idx), 0.0);

        let mut sol = SpectralField::zeros(&g);
        sol.set_mode(idx, [zero, one, zero]);
        sol.set_mode(g.conjugate(idx), [zero, one, zero]);
        let p = leray_project(&sol);
        assert_eq!(p.mode(idx), [zero, one, zero]);
    }

    #[test]
    fn projection_random_is_idempotent_and_orthogonal() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let f = transform_forward(&pseudo_random(&g, 5), &g).unwrap();
        let p = leray_project(&f);
        assert!(p.divergence_residual() < 1e-12);
        let pp = leray_project(&p);
        for idx in 0..g.len() {
            let d: f64 = (0..3).map(|c| (pp.mode(idx)[c] - p.mode(idx)[c]).norm()).sum();
            assert!(d <= 1e-14 * p.max_magnitude().max(1e-300));
            if idx != 0 {
                let total = f.mode_magnitude(idx).powi(2);
                let rest: f64 = (0..3)
                    .map(|c| (f.mode(idx)[c] - p.mode(idx)[c]).norm_sqr())
                    .sum();
                let parts = p.mode_magnitude(idx).powi(2) + rest;
                assert!((parts - total).abs() <= 1e-13 * total.max(1e-300));
            }
        }
        assert!(p.hermitian_defect() < 1e-15);
    }

    #[test]
    fn curl_of_shear_and_gradient() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let v = transform_forward(&shear(&g), &g).unwrap();
        let w = curl_hat(&v);
        let plus = g.index_of([1, 0, 0]);
        // omega_3 = d1 v2 = -sin x1, coefficient i * 1 * 1/2 at k = (1,0,0)
        assert!((w.mode(plus)[2] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        let phys = transform_inverse(&w);
        for i in 0..g.n() {
            let at = g.index(i, 3, 5);
            assert!((phys[2][at] + g.coordinate(i).sin()).abs() < 1e-14);
        }

        // gradient of a scalar has zero curl
        let mut grad = SpectralField::zeros(&g);
        let i = Complex64::new(0.0, 1.0);
        for idx in 0..g.len() {
            if g.is_retained(idx) && idx != 0 && g.conjugate(idx) > idx {
                let k = g.wavenumber(idx);
                let kk = g.wavevector(idx);
                let phi = Complex64::new(f64::from(kk[0] + 2 * kk[1]), f64::from(kk[2]));
                let m = [i * k[0] * phi, i * k[1] * phi, i * k[2] * phi];
                grad.set_mode(idx, m);
                grad.set_mode(g.conjugate(idx), m.map(|z| z.conj()));
            }
        }
        assert!(curl_hat(&grad).max_magnitude() < 1e-14);
    }

    #[test]
    fn curl_curl_is_minus_laplacian_and_biot_savart_inverts() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let v = leray_project(&transform_forward(&pseudo_random(&g, 9), &g).unwrap());
        let cc = curl_hat(&curl_hat(&v));
        let scale = (0..g.len())
            .map(|i| g.magnitude(i).powi(2) * v.mode_magnitude(i))
            .fold(0.0, f64::max);
        for idx in 0..g.len() {
            if g.is_nyquist(idx) {
                continue;
            }
            let k2 = g.magnitude(idx).powi(2);
            for c in 0..3 {
                assert!((cc.mode(idx)[c] - v.mode(idx)[c] * k2).norm() <= 1e-12 * scale);
            }
        }
        let back = biot_savart(&curl_hat(&v));
        for idx in 0..g.len() {
            for c in 0..3 {
                assert!((back.mode(idx)[c] - v.mode(idx)[c]).norm() <= 1e-12 * v.max_magnitude());
            }
        }
    }
}
