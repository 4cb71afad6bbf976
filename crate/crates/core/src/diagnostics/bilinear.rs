use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::x_norm;
use crate::numerics::csum;
use crate::spectral::SpectralField;
use crate::dynamics::{convective_hat, NonlinearMethod, DIRECT_LIMIT};

/// The chain
/// `sum_k |(u (x) w)^(k)| <= X^0(u) X^0(w) <= (X^{-1}(u) X^1(w) + X^1(u) X^{-1}(w)) / 2`,
/// each side from exact lattice sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearChain {
    /// `sum_k |sum_eta u(eta) (x) w(k - eta)|`, Frobenius norm, full output lattice.
    pub tensor_l1: f64,
    /// `sum_{k != 0} |k|^{-1} |i sum_eta (k . u(eta)) w(k - eta)|` on retained output modes.
    pub convective_x_minus1: f64,
    pub x0_product: f64,
    pub young_bound: f64,
    /// `X^{-1}(u) X^1(w) + X^1(u) X^{-1}(w)`.
    pub cross_bound: f64,
}

impl BilinearChain {
    pub fn holds(&self) -> bool {
        self.tensor_l1 <= self.x0_product
            && self.convective_x_minus1 <= self.x0_product
            && self.x0_product <= self.young_bound
            && self.young_bound <= self.cross_bound
    }
}

pub fn bilinear_chain(u: &SpectralField, w: &SpectralField) -> Result<BilinearChain> {
    u.check_same_grid(w)?;
    let g = u.grid();
    if g.n() > DIRECT_LIMIT {
        return Err(Error::CostGuard(g.n()));
    }
    let mut uu = u.clone();
    uu.apply_dealias();
    let mut ww = w.clone();
    ww.apply_dealias();

    let k = g.retained_max();
    let side = (4 * k + 1) as usize;
    let off = 2 * k;
    let support: Vec<usize> = (0..g.len()).filter(|&i| g.is_retained(i)).collect();
    let mut tensor = vec![[num_complex::Complex64::new(0.0, 0.0); 9]; side * side * side];
    for &a in &support {
        let ka = g.wavevector(a);
        let ua = uu.mode(a);
        for &b in &support {
            let kb = g.wavevector(b);
            let wb = ww.mode(b);
            let cell = ((ka[0] + kb[0] + off) as usize * side + (ka[1] + kb[1] + off) as usize) * side
                + (ka[2] + kb[2] + off) as usize;
            for m in 0..3 {
                for j in 0..3 {
                    tensor[cell][3 * m + j] += ua[m] * wb[j];
                }
            }
        }
    }
    let tensor_l1 = csum(
        tensor
            .iter()
            .map(|t| t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()),
    );

    let conv = convective_hat(&uu, &ww, NonlinearMethod::DirectConvolution)?;
    let convective_x_minus1 = x_norm(&conv, -1.0)?;

    let (um1, u0, u1) = (x_norm(&uu, -1.0)?, x_norm(&uu, 0.0)?, x_norm(&uu, 1.0)?);
    let (wm1, w0, w1) = (x_norm(&ww, -1.0)?, x_norm(&ww, 0.0)?, x_norm(&ww, 1.0)?);
    let cross = um1 * w1 + u1 * wm1;
    Ok(BilinearChain {
        tensor_l1,
        convective_x_minus1,
        x0_product: u0 * w0,
        young_bound: 0.5 * cross,
        cross_bound: cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{random_divfree, shear_flow};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn chain_on_random_pairs() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        for seed in 0..5 {
            let u = random_divfree(seed, -1.0, 2, 1.0, &g).unwrap();
            let w = random_divfree(seed + 100, 0.5, 2, 0.3, &g).unwrap();
            let c = bilinear_chain(&u, &w).unwrap();
            assert!(c.holds(), "{c:?}");
            assert!(c.tensor_l1 > 0.0);
        }
    }

    #[test]
    fn single_modes_saturate_young() {
        // |k| = 1 for both: X^{-1} = X^0 = X^1, so the Young step is an equality
        let g = make_grid(8, 2.0 * PI).unwrap();
        let u = shear_flow(1, 0, 1.0, &g).unwrap();
        let w = shear_flow(2, 1, 2.0, &g).unwrap();
        let c = bilinear_chain(&u, &w).unwrap();
        assert!((c.x0_product - c.young_bound).abs() < 1e-14);
        assert!((c.tensor_l1 - c.x0_product).abs() < 1e-14);
    }

    #[test]
    fn refuses_large_grids() {
        let g = make_grid(18, 2.0 * PI).unwrap();
        let z = SpectralField::zeros(&g);
        assert!(bilinear_chain(&z, &z).is_err());
    }
}
