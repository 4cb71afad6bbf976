//! Three-dimensional transforms built from 1D `rustfft` passes.
//!
//! Convention: `v(x) = sum_k v_hat(k) exp(i 2 pi k.x / L)`, so the forward
//! transform carries the `1/n^3` factor and the inverse is unnormalized.
//! Each 1D line is transformed independently, so results do not depend on
//! the rayon thread count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::Fft;

use super::Grid;

fn process_lines(buf: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    let scratch_len = plan.get_inplace_scratch_len();
    buf.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, line| plan.process_with_scratch(line, scratch),
    );
}

fn transform_axis(data: &mut [Complex64], n: usize, axis: usize, plan: &Arc<dyn Fft<f64>>) {
    if axis == 2 {
        process_lines(data, n, plan);
        return;
    }
    let (outer_stride, stride) = if axis == 1 { (n * n, n) } else { (n, n * n) };
    // Line `o * n + l` runs along `axis` starting at `o * outer_stride + l`.
    let mut buf = vec![Complex64::new(0.0, 0.0); data.len()];
    {
        let src: &[Complex64] = data;
        buf.par_chunks_mut(n).enumerate().for_each(|(line, chunk)| {
            let base = (line / n) * outer_stride + line % n;
            for (t, c) in chunk.iter_mut().enumerate() {
                *c = src[base + t * stride];
            }
        });
    }
    process_lines(&mut buf, n, plan);
    for (line, chunk) in buf.chunks(n).enumerate() {
        let base = (line / n) * outer_stride + line % n;
        for (t, c) in chunk.iter().enumerate() {
            data[base + t * stride] = *c;
        }
    }
}

/// In-place forward transform (includes the `1/n^3` normalization).
pub fn forward_in_place(grid: &Grid, data: &mut [Complex64]) {
    let n = grid.n();
    for axis in [2, 1, 0] {
        transform_axis(data, n, axis, grid.forward_plan());
    }
    let inv = 1.0 / grid.len() as f64;
    data.par_iter_mut().for_each(|c| *c *= inv);
}

/// In-place inverse transform (spectral coefficients to point values).
pub fn inverse_in_place(grid: &Grid, data: &mut [Complex64]) {
    let n = grid.n();
    for axis in [2, 1, 0] {
        transform_axis(data, n, axis, grid.inverse_plan());
    }
}

/// Forward transform of two real arrays with one complex pass.
///
/// The two spectra are separated as `A(k) = (Z(k) + conj Z(-k)) / 2` and
/// `B(k) = (Z(k) - conj Z(-k)) / 2i`, which makes both exactly Hermitian.
pub fn forward_real_pair(grid: &Grid, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    forward_in_place(grid, &mut z);
    let mut sa = grid.zeros();
    let mut sb = grid.zeros();
    for idx in 0..grid.len() {
        let zk = z[idx];
        let zc = z[grid.conjugate(idx)].conj();
        sa[idx] = (zk + zc) * 0.5;
        let d = zk - zc;
        // d / (2i) = -i d / 2
        sb[idx] = Complex64::new(d.im, -d.re) * 0.5;
    }
    (sa, sb)
}

/// Forward transform of one real array.
pub fn forward_real(grid: &Grid, a: &[f64]) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward_in_place(grid, &mut z);
    // Enforce exact Hermitian symmetry.
    let mut out = grid.zeros();
    for idx in 0..grid.len() {
        out[idx] = (z[idx] + z[grid.conjugate(idx)].conj()) * 0.5;
    }
    out
}

/// Inverse transform of two Hermitian spectra with one complex pass.
pub fn inverse_real_pair(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let mut z: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x + Complex64::new(-y.im, y.re))
        .collect();
    inverse_in_place(grid, &mut z);
    (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
}

/// Inverse transform of a Hermitian spectrum, keeping the real part.
pub fn inverse_real(grid: &Grid, a: &[Complex64]) -> Vec<f64> {
    let mut z = a.to_vec();
    inverse_in_place(grid, &mut z);
    z.iter().map(|c| c.re).collect()
}

/// Inverse transforms of any number of Hermitian spectra, paired two per pass.
pub fn inverse_real_many(grid: &Grid, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(spectra.len());
    for pair in spectra.chunks(2) {
        match pair {
            [a, b] => {
                let (x, y) = inverse_real_pair(grid, a, b);
                out.push(x);
                out.push(y);
            }
            [a] => out.push(inverse_real(grid, a)),
            _ => unreachable!(),
        }
    }
    out
}

/// Forward transforms of any number of real arrays, paired two per pass.
pub fn forward_real_many(grid: &Grid, arrays: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(arrays.len());
    for pair in arrays.chunks(2) {
        match pair {
            [a, b] => {
                let (x, y) = forward_real_pair(grid, a, b);
                out.push(x);
                out.push(y);
            }
            [a] => out.push(forward_real(grid, a)),
            _ => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_cosine_has_two_half_coefficients() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let mut a = vec![0.0; g.len()];
        let n = g.n();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    a[g.index(i, j, l)] = (g.coordinate(j) * 2.0).cos();
                }
            }
        }
        let s = forward_real(&g, &a);
        for idx in 0..g.len() {
            let k = g.wavevector(idx);
            let expect = if k == [0, 2, 0] || k == [0, -2, 0] { 0.5 } else { 0.0 };
            assert!((s[idx].re - expect).abs() < 1e-14 && s[idx].im.abs() < 1e-14);
        }
    }

    #[test]
    fn pair_transforms_match_single() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let a: Vec<f64> = (0..g.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let b: Vec<f64> = (0..g.len()).map(|i| ((i * 13) % 7) as f64 * 0.3).collect();
        let (sa, sb) = forward_real_pair(&g, &a, &b);
        let ra = forward_real(&g, &a);
        let rb = forward_real(&g, &b);
        for idx in 0..g.len() {
            assert!((sa[idx] - ra[idx]).norm() < 1e-13);
            assert!((sb[idx] - rb[idx]).norm() < 1e-13);
        }
        let (xa, xb) = inverse_real_pair(&g, &sa, &sb);
        for idx in 0..g.len() {
            assert!((xa[idx] - a[idx]).abs() < 1e-12);
            assert!((xb[idx] - b[idx]).abs() < 1e-12);
        }
    }
}
