//! Quantum Fisher information about `wx`, closed forms.
//!
//! For a qubit the QFI splits into a radial part, set by how the length of
//! the polarization vector changes, and a tangential part, set by how its
//! direction turns. Free precession keeps `|mu|` fixed, so only the
//! tangential part contributes and it grows like `t^2`. Under stroboscopic
//! projection only the radial part survives; it peaks at a finite time and
//! then decays with the polarization.

use std::f64::consts::E;

use crate::bloch::{self, MeasurementSchedule, PolarizationVector, PrecessionFrequency};
use crate::error::{Error, Result};
use crate::numeric;
use crate::specfun::{self, PolarizationMagnitude};

/// Radial derivative tolerated on a pure state.
const PURE_RADIAL_TOL: f64 = 1e-10;

/// Read-out protocol an evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    Coherent,
    Projected { tau: f64 },
}

/// Which expression produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Exact,
    LongTimeApprox,
    StroboscopicApprox,
    IntegerCycles,
}

/// The two expressions available for the projected protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectedFormula {
    /// `t / tau` treated as continuous; smooth in `t`.
    Stroboscopic,
    /// Integer number of projections plus the tangential term of the final
    /// partial period.
    Full,
}

impl From<ProjectedFormula> for Formula {
    fn from(f: ProjectedFormula) -> Self {
        match f {
            ProjectedFormula::Stroboscopic => Formula::StroboscopicApprox,
            ProjectedFormula::Full => Formula::IntegerCycles,
        }
    }
}

/// A QFI value together with the protocol, time and formula that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiEvaluation {
    pub protocol: Protocol,
    pub t: f64,
    pub value: f64,
    pub formula: Formula,
}

impl QfiEvaluation {
    pub fn tau(&self) -> Option<f64> {
        match self.protocol {
            Protocol::Coherent => None,
            Protocol::Projected { tau } => Some(tau),
        }
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(d mu_r)^2 / (1 - mu^2) + (d mu_t)^2` for a qubit polarization `mu` and
/// its parameter derivative `dmu`.
///
/// At `mu = 0` the radial direction is undefined and the whole displacement
/// is counted as radial (the factor `1 / (1 - mu^2)` is 1 there anyway). On a
/// pure state a radial derivative above `1e-10` makes the QFI infinite and is
/// reported as [`Error::Divergent`].
pub fn qfi_from_polarization(mu: &PolarizationVector, dmu: [f64; 3]) -> Result<f64> {
    let m = mu.norm();
    let d2 = dot(dmu, dmu);
    if m == 0.0 {
        return Ok(d2);
    }
    let hat = [mu.mx / m, mu.my / m, mu.mz / m];
    let r = dot(hat, dmu);
    let tang = [
        dmu[0] - r * hat[0],
        dmu[1] - r * hat[1],
        dmu[2] - r * hat[2],
    ];
    let t2 = dot(tang, tang);
    let one_minus = (1.0 - m) * (1.0 + m);
    if one_minus <= 1e-14 {
        if r.abs() > PURE_RADIAL_TOL {
            return Err(Error::Divergent { radial: r });
        }
        return Ok(t2);
    }
    Ok(r * r / one_minus + t2)
}

/// Exact QFI of free precession for time `t`.
pub fn qfi_coherent(
    omega: &PrecessionFrequency,
    mu0: PolarizationMagnitude,
    t: f64,
) -> QfiEvaluation {
    let value = if t == 0.0 {
        0.0
    } else {
        let (wx, wz, w) = (omega.wx(), omega.wz(), omega.w());
        let (s, _) = (w * t).sin_cos();
        let omc = bloch::one_minus_cos(w * t);
        let (rx, rz) = (wx / w, wz / w);
        let (rx2, rz2) = (rx * rx, rz * rz);
        let m2 = mu0.value() * mu0.value();
        let v = rx2 * rx2 * t * t
            + 2.0 * rx2 * rz2 * t * s / w
            + rz2 / (w * w) * (omc * omc + rz2 * s * s);
        m2 * v.max(0.0)
    };
    QfiEvaluation {
        protocol: Protocol::Coherent,
        t,
        value,
        formula: Formula::Exact,
    }
}

/// Long-time form `mu0^2 (wx / w)^4 t^2` of the coherent QFI.
pub fn qfi_coherent_longtime(
    omega: &PrecessionFrequency,
    mu0: PolarizationMagnitude,
    t: f64,
) -> QfiEvaluation {
    let r = omega.wx() / omega.w();
    let m = mu0.value();
    QfiEvaluation {
        protocol: Protocol::Coherent,
        t,
        value: m * m * r * r * r * r * t * t,
        formula: Formula::LongTimeApprox,
    }
}

/// Signed derivative `d alpha(tau) / d wx`.
pub fn d_alpha_d_wx(omega: &PrecessionFrequency, tau: f64) -> f64 {
    let (wx, wz, w) = (omega.wx(), omega.wz(), omega.w());
    let wt = w * tau;
    let rx = wx / w;
    let rz2 = (wz / w) * (wz / w);
    -rx * (2.0 * rz2 / w * bloch::one_minus_cos(wt) + rx * rx * tau * wt.sin())
}

fn check_projected(tau: f64, t: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "stroboscopic delay tau = {tau} must be positive"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "total time {t} must be non-negative"
        )));
    }
    Ok(())
}

/// Continuous-`t / tau` projected QFI.
fn stroboscopic_value(omega: &PrecessionFrequency, m: f64, tau: f64, t: f64) -> f64 {
    if t == 0.0 || m == 0.0 {
        return 0.0;
    }
    let la = bloch::ln_abs_alpha(omega, tau);
    let da = d_alpha_d_wx(omega, tau);
    let k = t / tau;
    // 1 - mu0^2 |alpha|^(2k) without cancellation near a pure, barely decayed state
    let denom = -(2.0 * k * la + 2.0 * m.ln()).exp_m1();
    m * m * k * k * (2.0 * (k - 1.0) * la).exp() / denom * da * da
}

/// Integer-`n` projected QFI, radial plus tangential term.
fn full_value(omega: &PrecessionFrequency, m: f64, sched: &MeasurementSchedule) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    let n = sched.n();
    let la = bloch::ln_abs_alpha(omega, sched.tau());
    let a2n = (2.0 * n as f64 * la).exp();
    let radial = if n == 0 {
        0.0
    } else {
        let da = d_alpha_d_wx(omega, sched.tau());
        let nf = n as f64;
        let denom = -(2.0 * nf * la + 2.0 * m.ln()).exp_m1();
        // alpha^(2(n-1)) written as alpha^(2n) / alpha^2 fails at alpha = 0
        let a2nm1 = if n == 1 {
            1.0
        } else {
            (2.0 * (nf - 1.0) * la).exp()
        };
        m * m * nf * nf * a2nm1 / denom * da * da
    };
    let dmu = bloch::coherent_derivative_wx(omega, sched.dt());
    radial + m * m * a2n * dot(dmu, dmu)
}

/// QFI after total time `t` with projections every `tau`.
pub fn qfi_projected(
    omega: &PrecessionFrequency,
    mu0: PolarizationMagnitude,
    tau: f64,
    t: f64,
    formula: ProjectedFormula,
) -> Result<QfiEvaluation> {
    check_projected(tau, t)?;
    let m = mu0.value();
    let value = match formula {
        ProjectedFormula::Stroboscopic => stroboscopic_value(omega, m, tau, t),
        ProjectedFormula::Full => full_value(omega, m, &MeasurementSchedule::new(tau, t)?),
    };
    Ok(QfiEvaluation {
        protocol: Protocol::Projected { tau },
        t,
        value,
        formula: formula.into(),
    })
}

/// Total time `xi(mu0) t_c` at which the stroboscopic QFI peaks.
///
/// Infinite when `|alpha(tau)| = 1`.
pub fn t_max(omega: &PrecessionFrequency, mu0: PolarizationMagnitude, tau: f64) -> Result<f64> {
    check_projected(tau, 0.0)?;
    Ok(specfun::xi(mu0) * bloch::characteristic_time(omega, tau))
}

/// Peak value `phi(mu0) t_c^2 (d alpha / d wx)^2 / (tau alpha)^2` of the
/// stroboscopic QFI.
pub fn qfi_projected_max(
    omega: &PrecessionFrequency,
    mu0: PolarizationMagnitude,
    tau: f64,
) -> Result<f64> {
    check_projected(tau, 0.0)?;
    let phi = specfun::phi(mu0);
    if phi == 0.0 {
        return Ok(0.0);
    }
    let tc = bloch::characteristic_time(omega, tau);
    if tc.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let a = bloch::alpha(omega, tau);
    let q = tc * d_alpha_d_wx(omega, tau) / (tau * a);
    Ok(phi * q * q)
}

/// Ratio of the peak projected QFI to the long-time coherent QFI at time `t`,
/// `(4 phi / mu0^2) (w^4 / wx^6) / t^2`. Meaningful for `wz >> wx` and
/// `t >> wz / wx^2`.
pub fn qfi_ratio_max(
    omega: &PrecessionFrequency,
    mu0: PolarizationMagnitude,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time {t} must be positive"
        )));
    }
    let w2 = omega.w() * omega.w();
    let wx2 = omega.wx() * omega.wx();
    Ok(4.0 * specfun::phi_over_mu0_sq(mu0) * (w2 * w2) / (wx2 * wx2 * wx2) / (t * t))
}

/// Time below which the projected protocol beats coherent precession,
/// `2 sqrt(phi) / (mu0 |wx|) (1 + wz^2 / wx^2)`.
pub fn projective_wins_time_bound(omega: &PrecessionFrequency, mu0: PolarizationMagnitude) -> f64 {
    let wx = omega.wx().abs();
    2.0 * specfun::phi_over_mu0_sq(mu0).sqrt() * omega.w() * omega.w() / (wx * wx * wx)
}

/// Low-polarization limit of [`projective_wins_time_bound`],
/// `2 (wx^2 + wz^2) / (e |wx|^3)`, independent of `mu0`.
pub fn low_polarization_time_bound(omega: &PrecessionFrequency) -> f64 {
    let wx = omega.wx().abs();
    2.0 * omega.w() * omega.w() / (E * wx * wx * wx)
}

/// Offset `wz >= 0` at which [`qfi_ratio_max`] equals 1 for the given
/// coupling and total time.
pub fn boundary_curve(omega_x: f64, t: f64, mu0: PolarizationMagnitude) -> Result<f64> {
    if !(omega_x.abs() * t >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "boundary needs |wx| t >= 1, got {}",
            omega_x.abs() * t
        )));
    }
    let excess = |wz: f64| -> Result<f64> {
        Ok(qfi_ratio_max(&PrecessionFrequency::new(omega_x, wz)?, mu0, t)? - 1.0)
    };
    if excess(0.0)? >= 0.0 {
        return Err(Error::NoRoot("qfi_ratio_max - 1 in wz"));
    }
    let mut hi = omega_x.abs() * (omega_x.abs() * t).sqrt();
    let mut widen = 0;
    while excess(hi)? < 0.0 {
        hi *= 10.0;
        widen += 1;
        if widen > 20 {
            return Err(Error::NoRoot("qfi_ratio_max - 1 in wz"));
        }
    }
    numeric::bisect(
        |wz| excess(wz).unwrap_or(f64::NAN),
        0.0,
        hi,
        1e-14,
        "qfi_ratio_max - 1 in wz",
    )
}
