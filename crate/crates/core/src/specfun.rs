//! Principal-branch Lambert W and the two polarization-dependent factors
//! that set the location and height of the projected-evolution QFI peak.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// `-1/e`, the branch point of W.
pub const BRANCH_POINT: f64 = -1.0 / E;

const BRANCH_SNAP: f64 = 1e-12;
const HALLEY_MAX_ITER: usize = 50;
const HALLEY_RESIDUAL: f64 = 1e-14;

/// Magnitude of the initial polarization, `0 <= mu0 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PolarizationMagnitude(f64);

impl PolarizationMagnitude {
    pub fn new(mu0: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&mu0) {
            Ok(Self(mu0))
        } else {
            Err(Error::InvalidParameter(format!(
                "polarization magnitude {mu0} outside [0, 1]"
            )))
        }
    }

    /// Builds the magnitude of a signed polarization (e.g. the negative
    /// thermal polarization of the two-spin cross-polarization setup).
    pub fn from_signed(mu0: f64) -> Result<Self> {
        Self::new(mu0.abs())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PolarizationMagnitude {
    type Error = Error;

    fn try_from(mu0: f64) -> Result<Self> {
        Self::new(mu0)
    }
}

/// Principal branch `W0(x)` of the Lambert W function, `w * exp(w) = x`, `w >= -1`.
///
/// Halley iteration, seeded by the branch-point series for `x < -0.25` and a
/// logarithmic guess elsewhere. Arguments within `1e-12` of `-1/e` return
/// exactly `-1`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT - BRANCH_SNAP {
        return Err(Error::Domain {
            function: "lambert_w0",
            x,
            requirement: "x >= -1/e",
        });
    }
    if (x - BRANCH_POINT).abs() <= BRANCH_SNAP {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(x);
    for _ in 0..HALLEY_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= HALLEY_RESIDUAL * x.abs().max(1.0) {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        // Never step below the branch.
        w = if next < -1.0 { 0.5 * (w - 1.0) } else { next };
        if step.abs() <= 1e-16 * w.abs().max(1e-300) {
            return Ok(w);
        }
    }
    Err(Error::NoConvergence {
        method: "Halley iteration for W0",
        detail: format!("x = {x}, last iterate {w}"),
    })
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        (1.0 + x).ln()
    } else {
        let l1 = x.ln();
        l1 - l1.ln()
    }
}

fn xi_raw(mu0: f64) -> f64 {
    let arg = -2.0 * mu0 * mu0 / (E * E);
    // arg >= -2/e^2 > -1/e, so W0 is always defined here.
    1.0 + 0.5 * lambert_w0(arg).expect("argument inside the W0 domain")
}

/// Peak-time factor `xi(mu0) = 1 + W0(-2 mu0^2 / e^2) / 2`, with `t_max = xi * t_c`.
///
/// Decreases monotonically from 1 at `mu0 = 0` to about 0.797 at `mu0 = 1`.
pub fn xi(mu0: PolarizationMagnitude) -> f64 {
    xi_raw(mu0.value())
}

/// Peak-height factor `phi(mu0) = mu0^2 xi^2 / (exp(2 xi) - mu0^2)`.
pub fn phi(mu0: PolarizationMagnitude) -> f64 {
    let m2 = mu0.value() * mu0.value();
    m2 * phi_over_mu0_sq(mu0)
}

/// `phi(mu0) / mu0^2`, evaluated without the `0/0` at `mu0 = 0` (limit `e^-2`).
pub fn phi_over_mu0_sq(mu0: PolarizationMagnitude) -> f64 {
    let m = mu0.value();
    let x = xi_raw(m);
    x * x / ((2.0 * x).exp() - m * m)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: bisection on `w e^w - x` (monotone for w >= -1).
    fn w_bisect(x: f64) -> f64 {
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64.max(x.ln_1p() + 1.0));
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() - x > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn pm(m: f64) -> PolarizationMagnitude {
        PolarizationMagnitude::new(m).unwrap()
    }

    #[test]
    fn w_at_zero_and_branch_point() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert_eq!(lambert_w0(-1.0 / E).unwrap(), -1.0);
    }

    #[test]
    fn w_at_one_matches_bisection() {
        let oracle = w_bisect(1.0);
        assert!((oracle - 0.567143).abs() < 1e-6);
        let w = lambert_w0(1.0).unwrap();
        assert!((w - oracle).abs() < 1e-12, "{w} vs {oracle}");
        assert!((w * w.exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w_rejects_below_branch() {
        assert!(matches!(lambert_w0(-0.5), Err(Error::Domain { .. })));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn w_near_branch_point_is_residual_certified() {
        for k in 3..14 {
            let x = BRANCH_POINT + 10f64.powi(-k);
            let w = lambert_w0(x).unwrap();
            assert!(w >= -1.0);
            assert!((w * w.exp() - x).abs() < 1e-12, "x = {x}, w = {w}");
        }
    }

    #[test]
    fn w_residual_on_grid() {
        let n = 20_000;
        for i in 0..=n {
            let x = BRANCH_POINT + (10.0 - BRANCH_POINT) * i as f64 / n as f64;
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() < 1e-10, "x = {x}");
        }
        for &x in &[1e3, 1e6, 1e12, 1e100] {
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() / x - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn xi_endpoints() {
        assert_eq!(xi(pm(0.0)), 1.0);
        let x1 = xi(pm(1.0));
        assert!((0.79..=0.80).contains(&x1), "xi(1) = {x1}");
    }

    #[test]
    fn xi_half_matches_oracle() {
        let expected = 1.0 + 0.5 * w_bisect(-0.5 / (E * E));
        assert!((xi(pm(0.5)) - expected).abs() < 1e-12);
    }

    #[test]
    fn xi_monotone_non_increasing() {
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let v = xi(pm(i as f64 / 1000.0));
            assert!(v <= prev + 1e-15);
            assert!((0.79..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(pm(0.0)), 0.0);
        let low = phi(pm(0.01));
        let approx = (-2.0f64).exp() * 1e-4;
        assert!((low / approx - 1.0).abs() < 1e-3);

        let x1 = 1.0 + 0.5 * w_bisect(-2.0 / (E * E));
        let expected = x1 * x1 / ((2.0 * x1).exp() - 1.0);
        assert!((phi(pm(1.0)) - expected).abs() < 1e-12);
    }

    #[test]
    fn phi_low_polarization_ratio() {
        let m = 1e-3;
        let ratio = phi(pm(m)) / (m * m);
        assert!((ratio / (-2.0f64).exp() - 1.0).abs() < 1e-4);
        assert!((phi_over_mu0_sq(pm(0.0)) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn magnitude_validation() {
        assert!(PolarizationMagnitude::new(1.2).is_err());
        assert!(PolarizationMagnitude::new(-0.1).is_err());
        assert_eq!(
            PolarizationMagnitude::from_signed(-0.3).unwrap().value(),
            0.3
        );
    }
}
