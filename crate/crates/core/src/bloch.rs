//! Bloch-vector dynamics of the probe: coherent precession about
//! `omega = (wx, 0, wz)` from `mu0 * z`, and the same precession interrupted
//! every `tau` by a non-selective projection onto the z axis.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::numeric;
use crate::specfun::PolarizationMagnitude;

/// Relative distance to an integer below which `t / tau` is snapped to it.
const SCHEDULE_SNAP: f64 = 1e-9;

/// Precession frequency `(wx, 0, wz)` in rad per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecessionFrequency {
    wx: f64,
    wz: f64,
}

impl PrecessionFrequency {
    pub fn new(wx: f64, wz: f64) -> Result<Self> {
        if !wx.is_finite() || !wz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "precession frequency ({wx}, 0, {wz}) is not finite"
            )));
        }
        if wx == 0.0 {
            return Err(Error::InvalidParameter(
                "coupling wx must be nonzero".to_string(),
            ));
        }
        Ok(Self { wx, wz })
    }

    /// `w * (cos theta, 0, sin theta)`.
    pub fn from_angle(w: f64, theta: f64) -> Result<Self> {
        Self::new(w * theta.cos(), w * theta.sin())
    }

    pub fn wx(&self) -> f64 {
        self.wx
    }

    pub fn wz(&self) -> f64 {
        self.wz
    }

    /// Magnitude `|omega|`.
    pub fn w(&self) -> f64 {
        self.wx.hypot(self.wz)
    }

    /// Angle between `omega` and the x axis, `atan(wz / wx)`.
    pub fn theta(&self) -> f64 {
        (self.wz / self.wx).atan()
    }

    /// Precession period `2 pi / w`.
    pub fn period(&self) -> f64 {
        TAU / self.w()
    }

    pub fn with_wx(&self, wx: f64) -> Result<Self> {
        Self::new(wx, self.wz)
    }

    pub fn with_wz(&self, wz: f64) -> Result<Self> {
        Self::new(self.wx, wz)
    }
}

/// Bloch (polarization) vector of a qubit, `|mu| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationVector {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl PolarizationVector {
    pub fn new(mx: f64, my: f64, mz: f64) -> Result<Self> {
        let v = Self { mx, my, mz };
        if !(v.norm() <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "polarization vector norm {} exceeds 1",
                v.norm()
            )));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.mx * self.mx + self.my * self.my + self.mz * self.mz).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.mx, self.my, self.mz]
    }
}

/// Stroboscopic schedule: projections every `tau`, total time `n * tau + dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSchedule {
    tau: f64,
    total_t: f64,
    n: u64,
    dt: f64,
}

impl MeasurementSchedule {
    /// Splits `total_t` into whole periods and a remainder `dt in [0, tau)`.
    ///
    /// A ratio `total_t / tau` within `1e-9` (relative) of an integer is
    /// snapped to it, so `3.0 * 0.3` counts as three full periods.
    pub fn new(tau: f64, total_t: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "stroboscopic delay tau = {tau} must be positive"
            )));
        }
        if !(total_t >= 0.0) || !total_t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "total time {total_t} must be non-negative"
            )));
        }
        let ratio = total_t / tau;
        let nearest = ratio.round();
        let snapped = (ratio - nearest).abs() <= SCHEDULE_SNAP * nearest.max(1.0);
        let n = if snapped { nearest } else { ratio.floor() };
        let dt = if snapped {
            0.0
        } else {
            (total_t - n * tau).max(0.0)
        };
        let (n, dt) = if dt >= tau { (n + 1.0, 0.0) } else { (n, dt) };
        Ok(Self {
            tau,
            total_t,
            n: n as u64,
            dt,
        })
    }

    /// Schedule with exactly `n` projections followed by `dt` of free evolution.
    pub fn from_counts(tau: f64, n: u64, dt: f64) -> Result<Self> {
        if !(tau > 0.0) || !(0.0..tau).contains(&dt) {
            return Err(Error::InvalidParameter(format!(
                "schedule needs tau > 0 and dt in [0, tau), got tau = {tau}, dt = {dt}"
            )));
        }
        Ok(Self {
            tau,
            total_t: n as f64 * tau + dt,
            n,
            dt,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn total_t(&self) -> f64 {
        self.total_t
    }

    /// Number of projections performed up to `total_t`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Free evolution since the last projection.
    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// `1 - cos(x)` without cancellation for small `x`.
#[inline]
pub(crate) fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Polarization at time `t` of a probe started at `mu0 * z`.
pub fn evolve_coherent(
    omega: &PrecessionFrequency,
    mu0: PolarizationMagnitude,
    t: f64,
) -> PolarizationVector {
    let (wx, wz, w) = (omega.wx, omega.wz, omega.w());
    let m = mu0.value();
    let wt = w * t;
    let omc = one_minus_cos(wt);
    PolarizationVector {
        mx: m * wx * wz / (w * w) * omc,
        my: -m * wx / w * wt.sin(),
        mz: m * alpha(omega, t),
    }
}

/// Analytic derivative `d mu / d wx` of the coherent trajectory for unit
/// initial polarization (scale by `mu0` for a partially polarized probe).
pub fn coherent_derivative_wx(omega: &PrecessionFrequency, t: f64) -> [f64; 3] {
    let (wx, wz, w) = (omega.wx, omega.wz, omega.w());
    let wt = w * t;
    let (s, c) = wt.sin_cos();
    let omc = one_minus_cos(wt);
    let w2 = w * w;
    let a = wx * wx / w2 * t;
    let b = wz / w2;
    [
        a * wz / w * s + b * (wz * wz - wx * wx) / w2 * omc,
        -a * c - b * wz / w * s,
        -a * wx / w * s - b * 2.0 * wx * wz / w2 * omc,
    ]
}

/// Longitudinal contraction factor `alpha(t) = wz^2/w^2 + wx^2/w^2 cos(w t)`.
pub fn alpha(omega: &PrecessionFrequency, t: f64) -> f64 {
    1.0 - alpha_deficit(omega, t)
}

/// `1 - alpha(t)`, computed without cancellation.
pub(crate) fn alpha_deficit(omega: &PrecessionFrequency, t: f64) -> f64 {
    let r = omega.wx / omega.w();
    r * r * one_minus_cos(omega.w() * t)
}

/// `ln |alpha(t)|`, accurate when `alpha` is close to `+-1`.
pub(crate) fn ln_abs_alpha(omega: &PrecessionFrequency, t: f64) -> f64 {
    let d = alpha_deficit(omega, t);
    if d <= 1.0 {
        (-d).ln_1p()
    } else {
        (d - 2.0).ln_1p()
    }
}

/// Longitudinal polarization `mu0 * alpha(tau)^n * alpha(dt)` after the schedule.
pub fn evolve_projected(
    omega: &PrecessionFrequency,
    mu0: PolarizationMagnitude,
    sched: &MeasurementSchedule,
) -> f64 {
    let a = alpha(omega, sched.tau);
    let n = sched.n;
    let an = if n <= i32::MAX as u64 {
        a.powi(n as i32)
    } else {
        a.signum().powf(n as f64) * a.abs().powf(n as f64)
    };
    mu0.value() * an * alpha(omega, sched.dt)
}

/// Decay constant `t_c = -tau / ln|alpha(tau)|` of the stroboscopic envelope.
///
/// Returns `f64::INFINITY` when `|alpha(tau)| = 1` (including the `tau = 0`
/// limit) and `0.0` when `alpha(tau) = 0`.
pub fn characteristic_time(omega: &PrecessionFrequency, tau: f64) -> f64 {
    if tau == 0.0 {
        return f64::INFINITY;
    }
    let l = ln_abs_alpha(omega, tau);
    if l == 0.0 {
        f64::INFINITY
    } else if l == f64::NEG_INFINITY {
        0.0
    } else {
        -tau / l
    }
}

/// Measurement delay that minimises the characteristic time (fastest,
/// anti-Zeno decay). Requires `|wz| > |wx|`, where `alpha` never changes sign.
pub fn anti_zeno_tau(omega: &PrecessionFrequency) -> Result<f64> {
    if !(omega.wz.abs() > omega.wx.abs()) {
        return Err(Error::Precondition(format!(
            "anti-Zeno minimiser needs |wz| > |wx|, got wx = {}, wz = {}",
            omega.wx, omega.wz
        )));
    }
    let period = omega.period();
    let eps = 1e-6 * period;
    let (lo, hi) = (eps, period - eps);
    let tc = |tau: f64| characteristic_time(omega, tau);
    let n = 4001;
    let (a, b, idx) = numeric::bracket_minimum(tc, lo, hi, n);
    if idx == 0 || idx == n - 1 {
        return Err(Error::NoConvergence {
            method: "anti-Zeno minimisation",
            detail: "minimum of t_c sits on the edge of (0, 2 pi / w)".to_string(),
        });
    }
    numeric::golden_section_min(tc, a, b, 1e-10)
}

/// Large-offset approximation `w^2 tau / (2 wx^2 sin^2(w tau / 2))` of `t_c`.
pub fn characteristic_time_large_offset(omega: &PrecessionFrequency, tau: f64) -> f64 {
    let w = omega.w();
    let s = (0.5 * w * tau).sin();
    w * w * tau / (2.0 * omega.wx * omega.wx * s * s)
}

/// Root of `x = tan(x / 2)` in `(2, 2.6)`: the large-offset anti-Zeno `w tau`.
pub fn large_offset_anti_zeno_phase() -> f64 {
    numeric::bisect(|x| x - (0.5 * x).tan(), 2.0, 2.6, 1e-15, "x - tan(x/2)")
        .unwrap_or(2.0 * PI / 2.7)
}
