use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{fft, leray_project, Grid, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest grid on which the exact lattice convolution is allowed.
pub const DIRECT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearMethod {
    /// Products in physical space with 2/3-rule truncation.
    #[default]
    PseudoSpectral,
    /// Exact lattice sum over retained modes; `n <= 16` only.
    DirectConvolution,
}

impl fmt::Display for NonlinearMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NonlinearMethod::PseudoSpectral => "pseudo_spectral",
            NonlinearMethod::DirectConvolution => "direct_convolution",
        })
    }
}

impl FromStr for NonlinearMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pseudo_spectral" => Ok(NonlinearMethod::PseudoSpectral),
            "direct_convolution" => Ok(NonlinearMethod::DirectConvolution),
            other => Err(invalid("method", format!("unknown nonlinear method `{other}`"))),
        }
    }
}

fn masked(v: &SpectralField) -> [Vec<Complex64>; 3] {
    let g = v.grid();
    std::array::from_fn(|c| {
        v.component(c)
            .iter()
            .zip(g.dealias_mask())
            .map(|(&z, &keep)| if keep { z } else { ZERO })
            .collect()
    })
}

fn to_physical(g: &Grid, spec: &[Vec<Complex64>; 3]) -> Vec<Vec<f64>> {
    let refs: Vec<&[Complex64]> = spec.iter().map(Vec::as_slice).collect();
    fft::inverse_real_many(g, &refs)
}

/// Spectra of the products `u_m w_j`, indexed `[m][j]`. When `u` and `w` are
/// the same field only the six distinct products are transformed.
fn product_spectra(g: &Grid, u: &[Vec<f64>], w: Option<&[Vec<f64>]>) -> [[Arc<Vec<Complex64>>; 3]; 3] {
    let pairs: Vec<(usize, usize)> = match w {
        None => vec![(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)],
        Some(_) => (0..9).map(|e| (e / 3, e % 3)).collect(),
    };
    let wv = w.unwrap_or(u);
    let products: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(m, j)| {
            u[m].par_iter()
                .zip(wv[j].par_iter())
                .map(|(a, b)| a * b)
                .collect()
        })
        .collect();
    let refs: Vec<&[f64]> = products.iter().map(Vec::as_slice).collect();
    let spectra: Vec<Arc<Vec<Complex64>>> = fft::forward_real_many(g, &refs)
        .into_iter()
        .map(Arc::new)
        .collect();
    let mut out: [[Option<Arc<Vec<Complex64>>>; 3]; 3] = Default::default();
    for (s, &(m, j)) in spectra.into_iter().zip(&pairs) {
        if w.is_none() {
            out[j][m] = Some(Arc::clone(&s));
        }
        out[m][j] = Some(s);
    }
    out.map(|row| row.map(|s| s.expect("every product filled")))
}

/// `i k_m T_mj(k)` on retained modes, zero elsewhere.
fn divergence_of(g: &Grid, t: &[[Arc<Vec<Complex64>>; 3]; 3]) -> [Vec<Complex64>; 3] {
    std::array::from_fn(|j| {
        (0..g.len())
            .into_par_iter()
            .map(|idx| {
                if !g.is_retained(idx) {
                    return ZERO;
                }
                let k = g.wavenumber(idx);
                I * (k[0] * t[0][j][idx] + k[1] * t[1][j][idx] + k[2] * t[2][j][idx])
            })
            .collect()
    })
}

fn direct_sum(u: &SpectralField, w: &SpectralField) -> Result<[Vec<Complex64>; 3]> {
    let g = u.grid();
    if g.n() > DIRECT_LIMIT {
        return Err(Error::CostGuard(g.n()));
    }
    let kmax = g.retained_max();
    let retained: Vec<usize> = (0..g.len()).filter(|&i| g.is_retained(i)).collect();
    let scale = g.wavenumber_scale();
    let values: Vec<(usize, [Complex64; 3])> = retained
        .par_iter()
        .map(|&k_idx| {
            let k = g.wavevector(k_idx);
            let kf = k.map(|c| f64::from(c) * scale);
            let mut acc = [ZERO; 3];
            for &e_idx in &retained {
                let eta = g.wavevector(e_idx);
                let d = [k[0] - eta[0], k[1] - eta[1], k[2] - eta[2]];
                if d.iter().any(|c| c.abs() > kmax) {
                    continue;
                }
                let ue = u.mode(e_idx);
                let kdotu = kf[0] * ue[0] + kf[1] * ue[1] + kf[2] * ue[2];
                let wd = w.mode(g.index_of(d));
                for c in 0..3 {
                    acc[c] += kdotu * wd[c];
                }
            }
            (k_idx, acc.map(|z| I * z))
        })
        .collect();
    let mut out = [g.zeros(), g.zeros(), g.zeros()];
    for (idx, m) in values {
        for c in 0..3 {
            out[c][idx] = m[c];
        }
    }
    Ok(out)
}

/// Convective term `i sum_eta (k . u(eta)) w(k - eta)`, i.e. the transform of
/// `(u . grad) w` for solenoidal `u`, on retained output modes with both
/// inputs truncated to the retained band. Not projected.
pub fn convective_hat(u: &SpectralField, w: &SpectralField, method: NonlinearMethod) -> Result<SpectralField> {
    u.check_same_grid(w)?;
    let g = u.grid();
    let coeffs = match method {
        NonlinearMethod::PseudoSpectral => {
            let up = to_physical(g, &masked(u));
            let wp = to_physical(g, &masked(w));
            let t = product_spectra(g, &up, Some(&wp));
            divergence_of(g, &t)
        }
        NonlinearMethod::DirectConvolution => {
            let mut uu = u.clone();
            uu.apply_dealias();
            let mut ww = w.clone();
            ww.apply_dealias();
            direct_sum(&uu, &ww)?
        }
    };
    let mut out = SpectralField::from_parts(g, coeffs, false);
    out.symmetrize();
    Ok(out)
}

/// `-P[(v . grad v)^]`, the nonlinear part of the evolution on retained modes.
pub fn nonlinear_term(v: &SpectralField, method: NonlinearMethod) -> Result<SpectralField> {
    let conv = match method {
        NonlinearMethod::PseudoSpectral => {
            let g = v.grid();
            let up = to_physical(g, &masked(v));
            let t = product_spectra(g, &up, None);
            SpectralField::from_parts(g, divergence_of(g, &t), false)
        }
        NonlinearMethod::DirectConvolution => convective_hat(v, v, method)?,
    };
    let mut out = leray_project(&conv);
    out.scale(-1.0);
    Ok(out)
}

/// Kinematic pressure `p(k) = -k_j k_m (v_j v_m)^(k) / |k|^2` on retained
/// modes, zero mean.
pub fn pressure_hat(v: &SpectralField) -> Vec<Complex64> {
    let g = v.grid();
    let up = to_physical(g, &masked(v));
    let t = product_spectra(g, &up, None);
    (0..g.len())
        .into_par_iter()
        .map(|idx| {
            if idx == 0 || !g.is_retained(idx) {
                return ZERO;
            }
            let k = g.wavenumber(idx);
            let mut s = ZERO;
            for j in 0..3 {
                for m in 0..3 {
                    s += k[j] * k[m] * t[j][m][idx];
                }
            }
            -s / g.magnitude(idx).powi(2)
        })
        .collect()
}

/// Full right-hand side `N(v) - mu |k|^2 v`.
pub fn rhs(v: &SpectralField, mu: f64) -> Result<SpectralField> {
    let mut n = nonlinear_term(v, NonlinearMethod::PseudoSpectral)?;
    let g = Arc::clone(v.grid());
    for c in 0..3 {
        let src = v.component(c);
        let dst = n.component_mut(c);
        for idx in 0..g.len() {
            dst[idx] -= mu * g.magnitude(idx).powi(2) * src[idx];
        }
    }
    n.refresh_solenoidal();
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{random_divfree, shear_flow};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn max_rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        let scale = a.max_magnitude().max(b.max_magnitude());
        if scale == 0.0 {
            return 0.0;
        }
        a.difference(b).unwrap().max_magnitude() / scale
    }

    #[test]
    fn shear_has_no_nonlinear_term() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let v = shear_flow(1, 0, 1.0, &g).unwrap();
        for m in [NonlinearMethod::PseudoSpectral, NonlinearMethod::DirectConvolution] {
            assert!(nonlinear_term(&v, m).unwrap().max_magnitude() < 1e-14);
        }
        assert!(pressure_hat(&v).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn two_mode_field_matches_hand_convolution() {
        // v = (0, 0, cos x1) + (cos x2, 0, 0) written as modes at +-e1, +-e2.
        let g = make_grid(8, 2.0 * PI).unwrap();
        let mut v = SpectralField::zeros(&g);
        let a = Complex64::new(0.5, 0.0);
        v.set_mode(g.index_of([1, 0, 0]), [ZERO, ZERO, a]);
        v.set_mode(g.index_of([-1, 0, 0]), [ZERO, ZERO, a]);
        v.set_mode(g.index_of([0, 1, 0]), [a, ZERO, ZERO]);
        v.set_mode(g.index_of([0, -1, 0]), [a, ZERO, ZERO]);
        assert!(v.refresh_solenoidal());

        // Only v1 d1 v3 = -sin x1 cos x2 survives, with coefficients i s1 / 4 at (s1, s2, 0).
        let mut hand = [g.zeros(), g.zeros(), g.zeros()];
        for s1 in [-1i32, 1] {
            for s2 in [-1i32, 1] {
                let idx = g.index_of([s1, s2, 0]);
                hand[2][idx] = Complex64::new(0.0, 0.25 * f64::from(s1));
            }
        }
        let conv = convective_hat(&v, &v, NonlinearMethod::DirectConvolution).unwrap();
        let hand = SpectralField::from_parts(&g, hand, false);
        assert!(max_rel_diff(&conv, &hand) < 1e-15);
        for idx in 0..g.len() {
            let k = g.wavevector(idx);
            if conv.mode_magnitude(idx) > 0.0 {
                assert!(k.iter().all(|c| c.abs() <= 2));
            }
        }
        // the product is already solenoidal (k3 = 0 on its support), so N = -conv
        let n = nonlinear_term(&v, NonlinearMethod::PseudoSpectral).unwrap();
        let mut neg = hand.clone();
        neg.scale(-1.0);
        assert!(max_rel_diff(&n, &neg) < 1e-14);
    }

    #[test]
    fn pseudo_spectral_matches_direct_on_random_fields() {
        for n in [8usize, 16] {
            let g = make_grid(n, 2.0 * PI).unwrap();
            let v = random_divfree(11, -1.0, g.retained_max() as u32, 1.0, &g).unwrap();
            let ps = nonlinear_term(&v, NonlinearMethod::PseudoSpectral).unwrap();
            let dc = nonlinear_term(&v, NonlinearMethod::DirectConvolution).unwrap();
            assert!(max_rel_diff(&ps, &dc) < 1e-12, "n = {n}");
            assert!(ps.divergence_residual() < 1e-12);
            assert!(ps.hermitian_defect() < 1e-15);
            assert!(dc.hermitian_defect() < 1e-15);
        }
    }

    #[test]
    fn pair_convolution_methods_agree() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let u = random_divfree(1, -1.0, 2, 1.0, &g).unwrap();
        let w = random_divfree(2, 0.0, 2, 1.0, &g).unwrap();
        let ps = convective_hat(&u, &w, NonlinearMethod::PseudoSpectral).unwrap();
        let dc = convective_hat(&u, &w, NonlinearMethod::DirectConvolution).unwrap();
        assert!(max_rel_diff(&ps, &dc) < 1e-12);
    }

    #[test]
    fn direct_refused_above_limit() {
        let g = make_grid(18, 2.0 * PI).unwrap();
        let v = SpectralField::zeros(&g);
        assert!(matches!(
            nonlinear_term(&v, NonlinearMethod::DirectConvolution),
            Err(Error::CostGuard(18))
        ));
    }

    #[test]
    fn pressure_gradient_is_the_removed_part() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let v = random_divfree(3, -1.0, 5, 1.0, &g).unwrap();
        let conv = convective_hat(&v, &v, NonlinearMethod::PseudoSpectral).unwrap();
        let p = pressure_hat(&v);
        let proj = leray_project(&conv);
        let scale = conv.max_magnitude();
        for idx in 1..g.len() {
            let k = g.wavenumber(idx);
            let c = conv.mode(idx);
            let pc = proj.mode(idx);
            for m in 0..3 {
                // conv - P conv = -i k p
                let gradient_part = c[m] - pc[m];
                let want = -I * k[m] * p[idx];
                assert!((gradient_part - want).norm() <= 1e-12 * scale);
            }
        }
        // momentum balance with pressure is solenoidal
        let n = rhs(&v, 1.0).unwrap();
        assert!(n.divergence_residual() < 1e-12);
        assert!(pressure_hat(&SpectralField::zeros(&g)).iter().all(|z| *z == ZERO));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [NonlinearMethod::PseudoSpectral, NonlinearMethod::DirectConvolution] {
            assert_eq!(m.to_string().parse::<NonlinearMethod>().unwrap(), m);
        }
        assert!("spectral".parse::<NonlinearMethod>().is_err());
    }
}
