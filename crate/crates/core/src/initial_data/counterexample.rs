//! Radial quadrature for the dyadic superposition
//! `g_hat(xi) = sum_{j >= 1} 2^{-2j} / j f(2^{-j} xi)` built from a radial bump
//! `f` supported in the shell `1 < |xi| < 2`.
//!
//! The summands live on disjoint shells `2^j < |xi| < 2^{j+1}`. With the dyadic
//! weight `2^{-j}` standing in for `|xi|^{-1}` on shell `j`, each shell
//! contributes exactly `||f||_{L^1} / j`, so the partial sums grow like the
//! harmonic series. The exact `|xi|^{-1}` weight differs by at most a factor 2
//! per shell. The `H^{1/2}` contributions scale as `1 / j^2` and converge.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{adaptive_simpson, csum, harmonic};

const QUAD_TOL: f64 = 1e-11;
/// Shells up to this index are integrated in their own coordinates; beyond it
/// powers of two leave the double range and the rescaled form is used.
const DIRECT_SHELLS: u32 = 128;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    /// `exp(-sharpness / ((r - 1)(2 - r)))` on `(1, 2)`.
    Bump { sharpness: f64 },
    /// Piecewise-linear interpolation of nonnegative samples.
    Tabulated { nodes: Vec<f64>, values: Vec<f64> },
}

/// A nonnegative radial density on the shell `1 < r < 2` with its cached
/// `L^1` mass `int 4 pi r^2 f(r) dr`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    shape: ProfileShape,
    l1_mass: f64,
    weighted_mass: f64,
    h_half_base: f64,
}

impl RadialProfile {
    pub fn bump() -> Self {
        Self::new(ProfileShape::Bump { sharpness: 1.0 }).expect("default bump is valid")
    }

    pub fn new(shape: ProfileShape) -> Result<Self> {
        match &shape {
            ProfileShape::Bump { sharpness } => {
                if !(*sharpness > 0.0 && sharpness.is_finite()) {
                    return Err(invalid("sharpness", "must be positive"));
                }
            }
            ProfileShape::Tabulated { nodes, values } => {
                if nodes.len() != values.len() || nodes.len() < 2 {
                    return Err(invalid("profile", "need matching node/value lists of length >= 2"));
                }
                if nodes.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("profile", "nodes must be strictly ascending"));
                }
                if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                    return Err(invalid("profile", "values must be finite and nonnegative"));
                }
                for (r, v) in nodes.iter().zip(values) {
                    if *v != 0.0 && !(*r > 1.0 && *r < 2.0) {
                        return Err(invalid(
                            "profile",
                            format!("support violation: f({r}) = {v} outside (1, 2)"),
                        ));
                    }
                }
                if values.iter().all(|&v| v == 0.0) {
                    return Err(invalid("profile", "profile is identically zero"));
                }
            }
        }
        let mut p = RadialProfile {
            shape,
            l1_mass: 0.0,
            weighted_mass: 0.0,
            h_half_base: 0.0,
        };
        let four_pi = 4.0 * std::f64::consts::PI;
        p.l1_mass = p.integrate(|r, f| four_pi * r * r * f);
        p.weighted_mass = p.integrate(|r, f| four_pi * r * f);
        p.h_half_base = p.integrate(|r, f| four_pi * r * r * r * f * f);
        Ok(p)
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    /// `f(r)`; zero outside `(1, 2)`.
    pub fn value(&self, r: f64) -> f64 {
        if !(r > 1.0 && r < 2.0) {
            return 0.0;
        }
        match &self.shape {
            ProfileShape::Bump { sharpness } => (-sharpness / ((r - 1.0) * (2.0 - r))).exp(),
            ProfileShape::Tabulated { nodes, values } => {
                if r <= nodes[0] || r >= nodes[nodes.len() - 1] {
                    return 0.0;
                }
                let hi = nodes.partition_point(|&x| x < r);
                let (x0, x1) = (nodes[hi - 1], nodes[hi]);
                let t = (r - x0) / (x1 - x0);
                values[hi - 1] * (1.0 - t) + values[hi] * t
            }
        }
    }

    /// `int 4 pi r^2 f(r) dr`.
    pub fn l1_mass(&self) -> f64 {
        self.l1_mass
    }

    /// `int |xi|^{-1} f`, i.e. `int 4 pi r f(r) dr`.
    pub fn weighted_mass(&self) -> f64 {
        self.weighted_mass
    }

    /// `int |xi| f^2`, i.e. `int 4 pi r^3 f(r)^2 dr`.
    pub fn h_half_base(&self) -> f64 {
        self.h_half_base
    }

    /// Sample table `(nodes, values)` on `count` equispaced radii in `[1, 2]`.
    pub fn tabulate(&self, count: usize) -> (Vec<f64>, Vec<f64>) {
        let nodes: Vec<f64> = (0..count)
            .map(|i| 1.0 + i as f64 / (count.max(2) - 1) as f64)
            .collect();
        let values = nodes.iter().map(|&r| self.value(r)).collect();
        (nodes, values)
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            ProfileShape::Bump { .. } => vec![1.0, 1.25, 1.5, 1.75, 2.0],
            ProfileShape::Tabulated { nodes, .. } => {
                let mut b = vec![1.0];
                b.extend(nodes.iter().copied().filter(|&r| r > 1.0 && r < 2.0));
                b.push(2.0);
                b
            }
        }
    }

    /// `int_1^2 h(r, f(r)) dr` over the profile's smooth pieces.
    fn integrate<H: Fn(f64, f64) -> f64>(&self, h: H) -> f64 {
        self.integrate_scaled(0, h)
    }

    /// Integral over the shell `(2^j, 2^{j+1})` of `h(r, f(2^{-j} r))`.
    fn integrate_scaled<H: Fn(f64, f64) -> f64>(&self, j: i32, h: H) -> f64 {
        let s = 2f64.powi(j);
        let inv = 2f64.powi(-j);
        let integrand = |r: f64| h(r, self.value(r * inv));
        let b = self.breakpoints();
        csum(
            b.windows(2)
                .map(|w| adaptive_simpson(&integrand, w[0] * s, w[1] * s, QUAD_TOL)),
        )
    }
}

/// Partial sums over shells `1..=J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexamplePartial {
    pub j: u32,
    /// `sum_j int 2^{-j} |g_hat_j|`, equal to `l1_mass * H_J`.
    pub x_minus1_partial: f64,
    /// `sum_j int |xi|^{-1} |g_hat_j|`, equal to `weighted_mass * H_J`.
    pub x_minus1_exact_partial: f64,
    /// `(sum_j int |xi| |g_hat_j|^2)^{1/2}`.
    pub h_half_partial: f64,
}

/// One shell's contributions `(dyadic X^{-1}, exact X^{-1}, H^{1/2} squared)`.
fn shell_terms(j: u32, profile: &RadialProfile) -> (f64, f64, f64) {
    let jf = f64::from(j);
    if j <= DIRECT_SHELLS {
        let ji = j as i32;
        let amp = 2f64.powi(-2 * ji) / jf;
        let dyadic_w = 2f64.powi(-ji);
        let four_pi = 4.0 * std::f64::consts::PI;
        let a = profile.integrate_scaled(ji, |r, f| four_pi * r * r * dyadic_w * amp * f);
        let b = profile.integrate_scaled(ji, |r, f| four_pi * r * amp * f);
        let c = profile.integrate_scaled(ji, |r, f| {
            let gh = amp * f;
            four_pi * r * r * r * gh * gh
        });
        (a, b, c)
    } else {
        // change of variables r = 2^j rho folds every power of two into 1/j or 1/j^2
        (
            profile.l1_mass() / jf,
            profile.weighted_mass() / jf,
            profile.h_half_base() / (jf * jf),
        )
    }
}

/// Partial sums of the dyadic counterexample up to shell `j_max`.
pub fn counterexample_partial(j_max: u32, profile: &RadialProfile) -> Result<CounterexamplePartial> {
    if j_max == 0 {
        return Err(invalid("J", "need J >= 1"));
    }
    let terms: Vec<(f64, f64, f64)> = (1..=j_max).map(|j| shell_terms(j, profile)).collect();
    // smallest terms first
    Ok(CounterexamplePartial {
        j: j_max,
        x_minus1_partial: csum(terms.iter().rev().map(|t| t.0)),
        x_minus1_exact_partial: csum(terms.iter().rev().map(|t| t.1)),
        h_half_partial: csum(terms.iter().rev().map(|t| t.2)).sqrt(),
    })
}

/// One row of the counterexample table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub j: u32,
    pub x_minus1_partial: f64,
    pub h_half_partial: f64,
    /// `x_minus1_partial - l1_mass * H_J`.
    pub harmonic_residual: f64,
    pub x_minus1_exact_partial: f64,
}

/// Rows for an ascending list of truncation indices.
pub fn counterexample_table(j_list: &[u32], profile: &RadialProfile) -> Result<Vec<CounterexampleRow>> {
    if j_list.is_empty() {
        return Err(invalid("J_list", "empty list"));
    }
    if j_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("J_list", "must be strictly ascending"));
    }
    j_list
        .iter()
        .map(|&j| {
            let p = counterexample_partial(j, profile)?;
            Ok(CounterexampleRow {
                j,
                x_minus1_partial: p.x_minus1_partial,
                h_half_partial: p.h_half_partial,
                harmonic_residual: p.x_minus1_partial - profile.l1_mass() * harmonic(j),
                x_minus1_exact_partial: p.x_minus1_exact_partial,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_mass_matches_independent_midpoint_rule() {
        let p = RadialProfile::bump();
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mid: f64 = (0..n)
            .map(|i| {
                let r = 1.0 + (i as f64 + 0.5) * h;
                4.0 * std::f64::consts::PI * r * r * p.value(r) * h
            })
            .sum();
        assert!((p.l1_mass() - mid).abs() <= 1e-9 * mid);
    }

    #[test]
    fn single_shell_equals_l1_mass() {
        let p = RadialProfile::bump();
        let one = counterexample_partial(1, &p).unwrap();
        assert!((one.x_minus1_partial - p.l1_mass()).abs() <= 1e-12 * p.l1_mass());
        assert!((one.h_half_partial - p.h_half_base().sqrt()).abs() <= 1e-12 * one.h_half_partial);
    }

    #[test]
    fn four_shells_give_25_over_12() {
        let p = RadialProfile::bump();
        let four = counterexample_partial(4, &p).unwrap();
        let want = 25.0 / 12.0 * p.l1_mass();
        assert!((four.x_minus1_partial - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn exact_weight_is_within_factor_two_of_dyadic() {
        let p = RadialProfile::bump();
        let r = counterexample_partial(10, &p).unwrap();
        assert!(r.x_minus1_exact_partial < r.x_minus1_partial);
        assert!(2.0 * r.x_minus1_exact_partial > r.x_minus1_partial);
    }

    #[test]
    fn harmonic_identity_across_direct_and_rescaled_shells() {
        let p = RadialProfile::new(ProfileShape::Bump { sharpness: 0.5 }).unwrap();
        for j in [127u32, 128, 129, 130, 2000] {
            let r = counterexample_partial(j, &p).unwrap();
            let want = p.l1_mass() * harmonic(j);
            assert!((r.x_minus1_partial - want).abs() <= 1e-10 * want, "J = {j}");
        }
    }

    #[test]
    fn tabulated_profile_support_violation_rejected() {
        let bad = ProfileShape::Tabulated {
            nodes: vec![0.5, 1.5, 2.0],
            values: vec![1.0, 1.0, 0.0],
        };
        assert!(RadialProfile::new(bad).is_err());
        let ok = ProfileShape::Tabulated {
            nodes: vec![1.0, 1.5, 2.0],
            values: vec![0.0, 2.0, 0.0],
        };
        let p = RadialProfile::new(ok).unwrap();
        assert!(p.l1_mass() > 0.0);
        assert_eq!(p.value(0.9), 0.0);
        assert!((p.value(1.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_rejects_malformed_lists() {
        let p = RadialProfile::bump();
        assert!(counterexample_table(&[], &p).is_err());
        assert!(counterexample_table(&[4, 2], &p).is_err());
        assert!(counterexample_table(&[0, 2], &p).is_err());
        let rows = counterexample_table(&[1, 2, 4, 8], &p).unwrap();
        for r in rows {
            assert!(r.harmonic_residual.abs() <= 1e-10 * r.x_minus1_partial);
        }
    }
}
