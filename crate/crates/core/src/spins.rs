//! Spin systems that reduce to the two-level probe.
//!
//! Each mapping comes with a matrix builder so the reduction can be checked
//! against exact dynamics in [`crate::oracle`].

use std::f64::consts::{E, SQRT_2};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::bloch::{MeasurementSchedule, PrecessionFrequency};
use crate::error::{Error, Result};
use crate::oracle::{self, c, Axis, CMatrix, DensityMatrix, HamiltonianMatrix};
use crate::specfun::{self, PolarizationMagnitude};

/// Spin in a static field `B0 z` driven by `2 B1 cos(w t) x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcFieldSpec {
    pub gamma: f64,
    pub b0: f64,
    pub b1: f64,
    pub omega_carrier: f64,
}

/// Rotating-frame precession `(gamma B1, 0, gamma B0 - w)`. Assumes
/// `B0 >> B1` and a carrier close to the Larmor frequency.
pub fn ac_field_effective_omega(spec: &AcFieldSpec) -> Result<PrecessionFrequency> {
    PrecessionFrequency::new(
        spec.gamma * spec.b1,
        spec.gamma * spec.b0 - spec.omega_carrier,
    )
}

/// Time below which projective read-out of `B1` wins at low polarization.
pub fn ac_field_projective_bound(spec: &AcFieldSpec) -> Result<f64> {
    Ok(crate::qfi::low_polarization_time_bound(
        &ac_field_effective_omega(spec)?,
    ))
}

/// Secular dipolar coupling between two spins at separation `r`, with the
/// permeability prefactor set to 1.
pub fn dipolar_coupling(r: [f64; 3], gamma_a: f64, gamma_b: f64) -> Result<f64> {
    dipolar_coupling_scaled(r, gamma_a, gamma_b, 1.0)
}

/// `-(1/2) K gamma_a gamma_b / |r|^3 (3 r_z^2 - r^2) / r^2`.
pub fn dipolar_coupling_scaled(
    r: [f64; 3],
    gamma_a: f64,
    gamma_b: f64,
    prefactor: f64,
) -> Result<f64> {
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if !(r2 > 0.0) || !r2.is_finite() {
        return Err(Error::InvalidParameter(
            "dipolar coupling needs a nonzero, finite separation".to_string(),
        ));
    }
    let rn = r2.sqrt();
    let angular = (3.0 * r[2] * r[2] - r2) / r2;
    Ok(-0.5 * prefactor * gamma_a * gamma_b / (rn * r2) * angular)
}

// Two spins

/// Heteronuclear pair `I`-`S` under cross-polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpinSpec {
    b: f64,
    delta: f64,
    omega0_i: f64,
    kt: f64,
}

impl TwoSpinSpec {
    pub fn new(b: f64, delta: f64, omega0_i: f64, kt: f64) -> Result<Self> {
        if b == 0.0 || !b.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "two-spin coupling b = {b} must be finite and nonzero"
            )));
        }
        if !(kt > 0.0) || !omega0_i.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "thermal energy kT = {kt} must be positive"
            )));
        }
        Ok(Self {
            b,
            delta,
            omega0_i,
            kt,
        })
    }

    /// Spec for dynamics only; the thermal parameters are placeholders.
    pub fn coupling(b: f64, delta: f64) -> Result<Self> {
        Self::new(b, delta, 0.0, 1.0)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Precession of the `{up-down, down-up}` block: `(-b, 0, Delta)`.
pub fn two_spin_effective_omega(spec: &TwoSpinSpec) -> PrecessionFrequency {
    PrecessionFrequency::new(-spec.b, spec.delta).expect("b validated nonzero")
}

/// Initial block polarization from the Boltzmann state of species `I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialPolarization {
    /// `exp(-x) / cosh(x) - 1 = -tanh(x)` with `x = w0I / 2kT`.
    pub exact: f64,
    /// `-x`.
    pub high_temperature: f64,
}

pub fn two_spin_initial_mu0(spec: &TwoSpinSpec) -> InitialPolarization {
    let x = 0.5 * spec.omega0_i / spec.kt;
    InitialPolarization {
        exact: -x.tanh(),
        high_temperature: -x,
    }
}

/// `Tr[rho(t) sigma_z]` on the exchange block,
/// `(mu0 / 2) (Delta^2 + b^2 cos(sqrt(b^2 + Delta^2) t)) / (Delta^2 + b^2)`.
pub fn two_spin_muz(spec: &TwoSpinSpec, mu0: f64, t: f64) -> f64 {
    let (b2, d2) = (spec.b * spec.b, spec.delta * spec.delta);
    0.5 * mu0 * (d2 + b2 * ((b2 + d2).sqrt() * t).cos()) / (d2 + b2)
}

/// Low-polarization crossover time `2 (b^2 + Delta^2) / (e |b|^3)`.
pub fn two_spin_projective_bound(spec: &TwoSpinSpec) -> f64 {
    let b = spec.b.abs();
    2.0 * (b * b + spec.delta * spec.delta) / (E * b * b * b)
}

/// Site of species `I` in the two-spin product basis (`S` is site 1).
pub const TWO_SPIN_I: usize = 0;
pub const TWO_SPIN_S: usize = 1;

/// `-(Delta / 2)(S_z - I_z) + b (S_x I_x + S_y I_y)` on `|I S>`.
pub fn two_spin_hamiltonian(spec: &TwoSpinSpec) -> HamiltonianMatrix {
    let op = |site, ax| oracle::spin_operator(2, site, ax);
    let zeeman = (op(TWO_SPIN_S, Axis::Z) - op(TWO_SPIN_I, Axis::Z)) * c(-0.5 * spec.delta);
    let flip = (op(TWO_SPIN_S, Axis::X) * op(TWO_SPIN_I, Axis::X)
        + op(TWO_SPIN_S, Axis::Y) * op(TWO_SPIN_I, Axis::Y))
        * c(spec.b);
    HamiltonianMatrix::new(zeeman + flip).expect("built Hermitian")
}

/// `(1 + mu0 sigma_z^I) / 4`.
pub fn two_spin_initial_rho(mu0: f64) -> Result<DensityMatrix> {
    DensityMatrix::identity_plus(
        &[(2.0 * mu0, &oracle::spin_operator(2, TWO_SPIN_I, Axis::Z))],
        4,
    )
}

/// `|I-up S-down><.| - |I-down S-up><.|`.
pub fn two_spin_block_sigma_z() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(1, 1)] = c(1.0);
    m[(2, 2)] = c(-1.0);
    m
}

/// Block polarization from exact four-level propagation.
pub fn two_spin_muz_exact(spec: &TwoSpinSpec, mu0: f64, t: f64) -> Result<f64> {
    let rho =
        oracle::propagate_unitary(&two_spin_hamiltonian(spec), &two_spin_initial_rho(mu0)?, t)?;
    Ok(rho.expectation(&two_spin_block_sigma_z()))
}

// Three spins

/// Two protons `I1`, `I2` coupled to one carbon `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeSpinSpec {
    pub b1: f64,
    pub b2: f64,
    pub d: f64,
    pub delta: f64,
    /// Common diagonal shift; drops out of every population.
    pub sigma: f64,
}

/// Which coupling symmetry makes the three-spin problem two-level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeSpinSymmetry {
    /// `b1 = b2`: `|S>|+>` exchanges with `|++>|->` in the `M = 1/2` block.
    Symmetric,
    /// `b1 = -b2`: `|--> |+>` exchanges with `|A>|->` in the `M = -1/2` block.
    Mirror,
}

impl ThreeSpinSpec {
    pub fn symmetric(b: f64, delta: f64, d: f64) -> Self {
        Self {
            b1: b,
            b2: b,
            d,
            delta,
            sigma: 0.0,
        }
    }

    pub fn symmetry(&self) -> Result<ThreeSpinSymmetry> {
        let tol = 1e-12 * self.b1.abs();
        if self.b1 == 0.0 {
            Err(Error::InvalidParameter(
                "three-spin coupling b1 must be nonzero".into(),
            ))
        } else if (self.b1 - self.b2).abs() <= tol {
            Ok(ThreeSpinSymmetry::Symmetric)
        } else if (self.b1 + self.b2).abs() <= tol {
            Ok(ThreeSpinSymmetry::Mirror)
        } else {
            Err(Error::Precondition(format!(
                "three-spin reduction needs b1 = +-b2, got b1 = {}, b2 = {}",
                self.b1, self.b2
            )))
        }
    }
}

/// Sites of the three-spin product basis `|I1 I2 S>`.
pub const THREE_SPIN_I1: usize = 0;
pub const THREE_SPIN_I2: usize = 1;
pub const THREE_SPIN_S: usize = 2;

/// `M = 1/2` block in the basis `{|S>|+>, |++>|->, |A>|+>}` where `|S>`,
/// `|A>` are the symmetric and antisymmetric proton states with `M_I = 0`.
pub fn three_spin_block_hamiltonian(spec: &ThreeSpinSpec) -> HamiltonianMatrix {
    let ThreeSpinSpec {
        b1,
        b2,
        d,
        delta,
        sigma,
    } = *spec;
    let k = SQRT_2 / 8.0;
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[
            c(0.25 * (sigma - delta) + 0.5 * d),
            c(k * (b1 + b2)),
            c(0.0),
            c(k * (b1 + b2)),
            c(0.25 * sigma + 0.75 * delta - 0.25 * d),
            c(k * (b2 - b1)),
            c(0.0),
            c(k * (b2 - b1)),
            c(0.25 * (sigma - delta)),
        ],
    );
    HamiltonianMatrix::new(m).expect("built Hermitian")
}

/// Full eight-level Hamiltonian whose `M = 1/2` block is
/// [`three_spin_block_hamiltonian`]:
/// `(Sigma - Delta)/2 S_z + (Sigma + Delta)/2 (I1_z + I2_z)
///  + sum_k b_k/2 (S_x Ik_x + S_y Ik_y) + d ((I1_x I2_x + I1_y I2_y)/2 - I1_z I2_z)`.
pub fn three_spin_hamiltonian(spec: &ThreeSpinSpec) -> HamiltonianMatrix {
    let op = |site, ax| oracle::spin_operator(3, site, ax);
    let flip = |a, b| op(a, Axis::X) * op(b, Axis::X) + op(a, Axis::Y) * op(b, Axis::Y);
    let h = op(THREE_SPIN_S, Axis::Z) * c(0.5 * (spec.sigma - spec.delta))
        + (op(THREE_SPIN_I1, Axis::Z) + op(THREE_SPIN_I2, Axis::Z))
            * c(0.5 * (spec.sigma + spec.delta))
        + flip(THREE_SPIN_S, THREE_SPIN_I1) * c(0.5 * spec.b1)
        + flip(THREE_SPIN_S, THREE_SPIN_I2) * c(0.5 * spec.b2)
        + flip(THREE_SPIN_I1, THREE_SPIN_I2) * c(0.5 * spec.d)
        - op(THREE_SPIN_I1, Axis::Z) * op(THREE_SPIN_I2, Axis::Z) * c(spec.d);
    HamiltonianMatrix::new(h).expect("built Hermitian")
}

fn ket(bits: [bool; 3]) -> DVector<Complex64> {
    // bit set = spin down; site 0 is the most significant
    let idx = bits
        .iter()
        .fold(0usize, |acc, &down| (acc << 1) | down as usize);
    let mut v = DVector::zeros(8);
    v[idx] = c(1.0);
    v
}

/// Eight-level vectors of the `M = 1/2` block basis.
pub fn three_spin_block_basis() -> [DVector<Complex64>; 3] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (up, dn) = (false, true);
    [
        (ket([up, dn, up]) + ket([dn, up, up])) * c(h),
        ket([up, up, dn]),
        (ket([up, dn, up]) - ket([dn, up, up])) * c(h),
    ]
}

/// Eight-level vectors of the `M = -1/2` block, ordered like
/// [`three_spin_block_basis`]: `{|S>|->, |-->|+>, |A>|->}`.
pub fn three_spin_lower_block_basis() -> [DVector<Complex64>; 3] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (up, dn) = (false, true);
    [
        (ket([up, dn, dn]) + ket([dn, up, dn])) * c(h),
        ket([dn, dn, up]),
        (ket([up, dn, dn]) - ket([dn, up, dn])) * c(h),
    ]
}

/// Effective two-level precession of the exchanging pair.
///
/// Symmetric couplings give `(-sqrt2 b / 2, 0, Delta - 3d/4)`; mirrored ones
/// give `(-sqrt2 b / 2, 0, Delta + d/4)` with `b = b1`. The two agree at
/// `d = 0`. Constant diagonal shifts are dropped.
pub fn three_spin_effective_omega(spec: &ThreeSpinSpec) -> Result<PrecessionFrequency> {
    let wx = -SQRT_2 * spec.b1 / 2.0;
    let wz = match spec.symmetry()? {
        ThreeSpinSymmetry::Symmetric => spec.delta - 0.75 * spec.d,
        ThreeSpinSymmetry::Mirror => spec.delta + 0.25 * spec.d,
    };
    PrecessionFrequency::new(wx, wz)
}

/// Low-polarization crossover time on the effective pair,
/// `2 (b^2/2 + wz^2) / (e (sqrt2/4) |b|^3)`.
pub fn three_spin_projective_bound(spec: &ThreeSpinSpec) -> Result<f64> {
    let wz = three_spin_effective_omega(spec)?.wz();
    let b = spec.b1.abs();
    Ok(2.0 * (0.5 * b * b + wz * wz) / (E * SQRT_2 / 4.0 * b * b * b))
}

// Many spins

/// `N` spins with Zeeman offsets and isotropic couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct ManySpinSpec {
    offsets: Vec<f64>,
    couplings: Vec<Vec<f64>>,
}

impl ManySpinSpec {
    /// `couplings` must be a symmetric `N x N` matrix with zero diagonal,
    /// `2 <= N <= 4`.
    pub fn new(offsets: Vec<f64>, couplings: Vec<Vec<f64>>) -> Result<Self> {
        let n = offsets.len();
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "many-spin model supports 2 to 4 spins, got {n}"
            )));
        }
        if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: couplings.len(),
            });
        }
        for i in 0..n {
            if couplings[i][i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "coupling diagonal b[{i}][{i}] must be zero"
                )));
            }
            for j in 0..i {
                if couplings[i][j] != couplings[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "coupling matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { offsets, couplings })
    }

    pub fn n_spins(&self) -> usize {
        self.offsets.len()
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i][j]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn max_coupling(&self) -> f64 {
        self.couplings
            .iter()
            .flatten()
            .fold(0.0_f64, |m, b| m.max(b.abs()))
    }

    /// Copy with `b_ij = b_ji = value`.
    pub fn with_coupling(&self, i: usize, j: usize, value: f64) -> Self {
        let mut out = self.clone();
        out.couplings[i][j] = value;
        out.couplings[j][i] = value;
        out
    }
}

/// Second-order short-time evolution of `I_i^z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortTimeExpansion {
    /// Coefficient of `I_i^z`.
    pub self_coefficient: f64,
    /// `(j, coefficient of I_j^z)` for every `j != i`.
    pub transfers: Vec<(usize, f64)>,
    /// `max_j max(|b_ij| t, |w_i - w_j| t)`; the expansion needs this << 1.
    pub validity: f64,
}

/// `I_i^z -> I_i^z (1 - sum_j b_ij^2 t^2 / 4) + sum_j I_j^z b_ij^2 t^2 / 4`.
pub fn many_spin_short_time_iz(
    spec: &ManySpinSpec,
    i: usize,
    t: f64,
) -> Result<ShortTimeExpansion> {
    let n = spec.n_spins();
    if i >= n {
        return Err(Error::InvalidParameter(format!(
            "spin index {i} out of range"
        )));
    }
    let mut transfers = Vec::with_capacity(n - 1);
    let mut validity = 0.0_f64;
    for j in (0..n).filter(|&j| j != i) {
        let b = spec.couplings[i][j];
        transfers.push((j, 0.25 * b * b * t * t));
        validity = validity
            .max((b * t).abs())
            .max(((spec.offsets[i] - spec.offsets[j]) * t).abs());
    }
    let lost: f64 = transfers.iter().map(|(_, w)| w).sum();
    Ok(ShortTimeExpansion {
        self_coefficient: 1.0 - lost,
        transfers,
        validity,
    })
}

/// `sum_i w_i I_i^z + sum_{i<j} b_ij I_i . I_j`.
pub fn many_spin_hamiltonian(spec: &ManySpinSpec) -> HamiltonianMatrix {
    let n = spec.n_spins();
    let dim = 1 << n;
    let mut h = CMatrix::zeros(dim, dim);
    for i in 0..n {
        h += oracle::spin_operator(n, i, Axis::Z) * c(spec.offsets[i]);
        for j in i + 1..n {
            h += oracle::spin_dot(n, i, j) * c(spec.couplings[i][j]);
        }
    }
    HamiltonianMatrix::new(h).expect("built Hermitian")
}

/// Exact coefficients `Tr[I_i^z(t) I_j^z] / Tr[(I_j^z)^2]` for all `j`.
pub fn many_spin_exact_coefficients(spec: &ManySpinSpec, i: usize, t: f64) -> Result<Vec<f64>> {
    let n = spec.n_spins();
    if i >= n {
        return Err(Error::InvalidParameter(format!(
            "spin index {i} out of range"
        )));
    }
    let rho = many_spin_initial_rho(spec, i, 1.0)?;
    let rho = oracle::propagate_unitary(&many_spin_hamiltonian(spec), &rho, t)?;
    // rho = (1 + 2 mu0 I_i^z) / dim, so <I_j^z> = mu0 c_ij / 2
    Ok((0..n)
        .map(|j| 2.0 * rho.expectation(&oracle::spin_operator(n, j, Axis::Z)))
        .collect())
}

/// `(1 + 2 mu0 I_i^z) / 2^N`: spin `i` polarized to `mu0`, the rest unpolarized.
pub fn many_spin_initial_rho(spec: &ManySpinSpec, i: usize, mu0: f64) -> Result<DensityMatrix> {
    let n = spec.n_spins();
    DensityMatrix::identity_plus(
        &[(2.0 * mu0, &oracle::spin_operator(n, i, Axis::Z))],
        1 << n,
    )
}

/// Exact state with `I_i^z` measured non-selectively every `tau`.
pub fn many_spin_projected_rho(
    spec: &ManySpinSpec,
    i: usize,
    mu0: f64,
    sched: &MeasurementSchedule,
) -> Result<DensityMatrix> {
    let n = spec.n_spins();
    let h = many_spin_hamiltonian(spec);
    let labels = oracle::site_labels(n, i);
    let mut rho = many_spin_initial_rho(spec, i, mu0)?;
    for _ in 0..sched.n() {
        rho = oracle::dephase(&oracle::propagate_unitary(&h, &rho, sched.tau())?, &labels)?;
    }
    oracle::propagate_unitary(&h, &rho, sched.dt())
}

/// Oracle QFI about `b_ab` for the monitored-spin protocol.
pub fn many_spin_projected_qfi(
    spec: &ManySpinSpec,
    i: usize,
    mu0: f64,
    sched: &MeasurementSchedule,
    pair: (usize, usize),
) -> Result<f64> {
    let (a, b) = pair;
    let b0 = spec.coupling(a, b);
    let build = |v: f64| many_spin_projected_rho(&spec.with_coupling(a, b, v), i, mu0, sched);
    let drho = oracle::finite_diff_drho(build, b0, oracle::default_step(b0))?;
    Ok(oracle::qfi_eigen(&many_spin_projected_rho(spec, i, mu0, sched)?, &drho)?.value)
}

/// `sqrt((1/N) sum_j b_ij^2)` with `N` the number of spins.
pub fn many_spin_effective_coupling(spec: &ManySpinSpec, i: usize) -> Result<f64> {
    let n = spec.n_spins();
    if i >= n {
        return Err(Error::InvalidParameter(format!(
            "spin index {i} out of range"
        )));
    }
    let s: f64 = spec.couplings[i].iter().map(|b| b * b).sum();
    Ok((s / n as f64).sqrt())
}

/// Zeno-regime optimum `(8 xi / (b^2 tau), 32 phi / b^2)` for the monitored spin.
pub fn many_spin_zeno_optimum(
    b_eff: f64,
    mu0: PolarizationMagnitude,
    tau: f64,
) -> Result<(f64, f64)> {
    if b_eff == 0.0 || !b_eff.is_finite() || !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need b_eff != 0 and tau > 0, got b_eff = {b_eff}, tau = {tau}"
        )));
    }
    let b2 = b_eff * b_eff;
    Ok((
        8.0 * specfun::xi(mu0) / (b2 * tau),
        32.0 * specfun::phi(mu0) / b2,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch;
    use crate::qfi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn pm(m: f64) -> PolarizationMagnitude {
        PolarizationMagnitude::new(m).unwrap()
    }

    #[test]
    fn ac_field_mapping() {
        let spec = AcFieldSpec {
            gamma: 1.0,
            b0: 10.0,
            b1: 0.1,
            omega_carrier: 9.0,
        };
        let om = ac_field_effective_omega(&spec).unwrap();
        assert!((om.wx() - 0.1).abs() < 1e-15 && (om.wz() - 1.0).abs() < 1e-15);
        let res = AcFieldSpec {
            omega_carrier: 10.0,
            ..spec
        };
        assert_eq!(ac_field_effective_omega(&res).unwrap().wz(), 0.0);
        let bound = ac_field_projective_bound(&spec).unwrap();
        assert!(rel(bound, 2.0 * (0.01 + 1.0) / (E * 1e-3)) < 1e-12);
    }

    #[test]
    fn dipolar_geometry() {
        let r = 1.3;
        let along_z = dipolar_coupling([0.0, 0.0, r], 1.0, 1.0).unwrap();
        assert!(rel(along_z, -1.0 / r.powi(3)) < 1e-14);
        let in_plane = dipolar_coupling([r, 0.0, 0.0], 1.0, 1.0).unwrap();
        assert!(rel(in_plane, 0.5 / r.powi(3)) < 1e-14);
        let rz = r / 3f64.sqrt();
        let rxy = (r * r - rz * rz).sqrt();
        assert!(dipolar_coupling([rxy, 0.0, rz], 1.0, 1.0).unwrap().abs() < 1e-15);
        assert!(dipolar_coupling([0.0; 3], 1.0, 1.0).is_err());
        let scaled = dipolar_coupling_scaled([0.0, 0.0, r], 2.0, 3.0, 0.5).unwrap();
        assert!(rel(scaled, 3.0 * along_z) < 1e-14);
    }

    #[test]
    fn two_spin_mapping_values() {
        let spec = TwoSpinSpec::coupling(1.0, 2.0).unwrap();
        let om = two_spin_effective_omega(&spec);
        assert_eq!((om.wx(), om.wz()), (-1.0, 2.0));
        let hh = TwoSpinSpec::coupling(1.0, 0.0).unwrap();
        assert_eq!(two_spin_effective_omega(&hh).wz(), 0.0);
        assert!(TwoSpinSpec::coupling(0.0, 1.0).is_err());
        assert!(TwoSpinSpec::new(1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn two_spin_initial_polarization() {
        let hot = TwoSpinSpec::new(1.0, 0.0, 0.02, 1.0).unwrap();
        let p = two_spin_initial_mu0(&hot);
        assert!((p.high_temperature + 0.01).abs() < 1e-15);
        assert!((p.exact - p.high_temperature).abs() < 1e-4);
        let cold = TwoSpinSpec::new(1.0, 0.0, 10.0, 1.0).unwrap();
        let p = two_spin_initial_mu0(&cold);
        assert!(p.exact.abs() < 1.0 && p.exact < -0.99);
        let inf = TwoSpinSpec::new(1.0, 0.0, 1.0, 1e300).unwrap();
        assert!(two_spin_initial_mu0(&inf).exact.abs() < 1e-299);
    }

    #[test]
    fn two_spin_muz_trivial() {
        let spec = TwoSpinSpec::coupling(1.7, 0.0).unwrap();
        assert_eq!(two_spin_muz(&spec, 0.4, 0.0), 0.2);
        assert!((two_spin_muz(&spec, 0.4, PI / 1.7) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn two_spin_muz_matches_four_level_oracle() {
        let spec = TwoSpinSpec::coupling(1.0, 3.0).unwrap();
        let exact = two_spin_muz_exact(&spec, 1.0, 2.0).unwrap();
        assert!((two_spin_muz(&spec, 1.0, 2.0) - exact).abs() < 1e-10);
        // also equals the qubit closed form scaled by the block weight
        let om = two_spin_effective_omega(&spec);
        assert!((0.5 * bloch::alpha(&om, 2.0) - exact).abs() < 1e-10);
    }

    #[test]
    fn two_spin_projected_block_matches_qubit() {
        let spec = TwoSpinSpec::coupling(0.8, 2.5).unwrap();
        let h = two_spin_hamiltonian(&spec);
        let labels = oracle::site_labels(2, TWO_SPIN_I);
        let sched = MeasurementSchedule::new(0.4, 3.1).unwrap();
        let mut rho = two_spin_initial_rho(0.6).unwrap();
        for _ in 0..sched.n() {
            rho = oracle::propagate_unitary(&h, &rho, sched.tau()).unwrap();
            rho = oracle::dephase(&rho, &labels).unwrap();
            rho.check(1e-12).unwrap();
        }
        rho = oracle::propagate_unitary(&h, &rho, sched.dt()).unwrap();
        let block = rho.expectation(&two_spin_block_sigma_z());
        let qubit = bloch::evolve_projected(&two_spin_effective_omega(&spec), pm(0.6), &sched);
        assert!((block - 0.5 * qubit).abs() < 1e-12);
    }

    #[test]
    fn two_spin_bounds() {
        let spec = TwoSpinSpec::coupling(1.0, 0.0).unwrap();
        assert!(rel(two_spin_projective_bound(&spec), 2.0 / E) < 1e-15);
        let spec = TwoSpinSpec::coupling(1.0, 3.0).unwrap();
        assert!(rel(two_spin_projective_bound(&spec), 20.0 / E) < 1e-15);
        let om = two_spin_effective_omega(&spec);
        assert!(
            rel(
                two_spin_projective_bound(&spec),
                qfi::low_polarization_time_bound(&om)
            ) < 1e-14
        );
        let neg = TwoSpinSpec::coupling(-1.0, 3.0).unwrap();
        assert_eq!(
            two_spin_projective_bound(&neg),
            two_spin_projective_bound(&spec)
        );
    }

    #[test]
    fn two_spin_hamiltonian_conserves_magnetization() {
        let h = two_spin_hamiltonian(&TwoSpinSpec::coupling(0.7, -1.2).unwrap());
        let labels = oracle::magnetization_labels(2);
        for i in 0..4 {
            for j in 0..4 {
                if labels[i] != labels[j] {
                    assert!(h.matrix()[(i, j)].norm() < 1e-14);
                }
            }
        }
    }

    fn project(h8: &HamiltonianMatrix, basis: &[DVector<Complex64>; 3]) -> CMatrix {
        CMatrix::from_fn(3, 3, |r, col| {
            (basis[r].adjoint() * h8.matrix() * &basis[col])[(0, 0)]
        })
    }

    fn generic() -> ThreeSpinSpec {
        ThreeSpinSpec {
            b1: 0.9,
            b2: 1.4,
            d: 0.6,
            delta: 1.1,
            sigma: 0.3,
        }
    }

    #[test]
    fn three_spin_block_is_the_full_hamiltonian_restricted() {
        let spec = generic();
        let sub = project(&three_spin_hamiltonian(&spec), &three_spin_block_basis());
        let block = three_spin_block_hamiltonian(&spec);
        assert!((sub - block.matrix()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn three_spin_block_dynamics_match_full_oracle() {
        let spec = generic();
        let h8 = three_spin_hamiltonian(&spec);
        let basis = three_spin_block_basis();
        let ublock = three_spin_block_hamiltonian(&spec).propagator(1.7);
        let ufull = h8.propagator(1.7);
        for col in 0..3 {
            for r in 0..3 {
                let full = (basis[r].adjoint() * &ufull * &basis[col])[(0, 0)];
                assert!((full - ublock[(r, col)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn three_spin_hamiltonian_conserves_magnetization() {
        let h = three_spin_hamiltonian(&generic());
        let labels = oracle::magnetization_labels(3);
        for i in 0..8 {
            for j in 0..8 {
                if labels[i] != labels[j] {
                    assert!(h.matrix()[(i, j)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn three_spin_block_symmetries() {
        let sym = ThreeSpinSpec::symmetric(1.2, 0.4, 0.3);
        assert_eq!(three_spin_block_hamiltonian(&sym).matrix()[(1, 2)], c(0.0));
        let mirror = ThreeSpinSpec { b2: -1.2, ..sym };
        assert_eq!(
            three_spin_block_hamiltonian(&mirror).matrix()[(0, 1)],
            c(0.0)
        );
        assert_eq!(mirror.symmetry().unwrap(), ThreeSpinSymmetry::Mirror);
        assert!(three_spin_effective_omega(&generic()).is_err());
    }

    #[test]
    fn three_spin_effective_values() {
        let om = three_spin_effective_omega(&ThreeSpinSpec::symmetric(1.0, 0.0, 0.0)).unwrap();
        assert!((om.wx() + SQRT_2 / 2.0).abs() < 1e-15);
        assert_eq!(om.wz(), 0.0);
        let delta = 0.9;
        let om =
            three_spin_effective_omega(&ThreeSpinSpec::symmetric(1.0, delta, 4.0 * delta / 3.0))
                .unwrap();
        assert!(om.wz().abs() < 1e-15);
        // mirrored couplings reproduce the symmetric mapping without proton coupling
        let sym = ThreeSpinSpec::symmetric(0.7, 1.3, 0.0);
        let mir = ThreeSpinSpec { b2: -0.7, ..sym };
        assert_eq!(
            three_spin_effective_omega(&sym).unwrap(),
            three_spin_effective_omega(&mir).unwrap()
        );
    }

    /// Populations of the block basis after time `t` from diagonal `p0`.
    fn block_populations(u: &CMatrix, p0: [f64; 3]) -> [f64; 3] {
        let rho0 = CMatrix::from_diagonal(&DVector::from_iterator(3, p0.iter().map(|&p| c(p))));
        let rho = u * rho0 * u.adjoint();
        [rho[(0, 0)].re, rho[(1, 1)].re, rho[(2, 2)].re]
    }

    #[test]
    fn three_spin_symmetric_pair_is_two_level() {
        let spec = ThreeSpinSpec {
            sigma: 0.8,
            ..ThreeSpinSpec::symmetric(1.1, 1.9, 0.7)
        };
        let om = three_spin_effective_omega(&spec).unwrap();
        let h = three_spin_block_hamiltonian(&spec);
        // proton polarization mu0: |++> carries (1 + mu0), M_I = 0 states carry 1
        let mu0 = 0.3;
        let p0 = [1.0, 1.0 + mu0, 1.0];
        for k in 0..40 {
            let t = 0.37 * k as f64;
            let p = block_populations(&h.propagator(t), p0);
            let pair = p[0] - p[1];
            assert!((pair - (p0[0] - p0[1]) * bloch::alpha(&om, t)).abs() < 1e-10);
            assert!((p[2] - p0[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn three_spin_mirror_pair_is_two_level() {
        let spec = ThreeSpinSpec {
            b1: 1.1,
            b2: -1.1,
            d: 0.7,
            delta: 1.9,
            sigma: 0.8,
        };
        let om = three_spin_effective_omega(&spec).unwrap();
        let h = HamiltonianMatrix::new(project(
            &three_spin_hamiltonian(&spec),
            &three_spin_lower_block_basis(),
        ))
        .unwrap();
        let p0 = [1.0, 1.0 - 0.3, 1.0];
        for k in 0..40 {
            let t = 0.37 * k as f64;
            let p = block_populations(&h.propagator(t), p0);
            assert!((p[2] - p[1] - (p0[2] - p0[1]) * bloch::alpha(&om, t)).abs() < 1e-10);
            assert!((p[0] - p0[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn three_spin_bound_matches_effective_omega() {
        let spec = ThreeSpinSpec::symmetric(0.8, 2.0, 0.5);
        let om = three_spin_effective_omega(&spec).unwrap();
        let b = three_spin_projective_bound(&spec).unwrap();
        assert!(rel(b, qfi::low_polarization_time_bound(&om)) < 1e-8);
        let tiny = qfi::projective_wins_time_bound(&om, pm(1e-6));
        assert!(rel(b, tiny) < 1e-6);
        let res = ThreeSpinSpec::symmetric(0.8, 1.5, 2.0);
        let flat = ThreeSpinSpec::symmetric(0.8, 0.0, 0.0);
        assert!(
            rel(
                three_spin_projective_bound(&res).unwrap(),
                three_spin_projective_bound(&flat).unwrap()
            ) < 1e-12
        );
        let neg = ThreeSpinSpec::symmetric(-0.8, 2.0, 0.5);
        assert_eq!(three_spin_projective_bound(&neg).unwrap(), b);
    }

    fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> ManySpinSpec {
        let mut b = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let v = rng.random_range(0.5..2.0);
                b[i][j] = v;
                b[j][i] = v;
            }
        }
        let offsets = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        ManySpinSpec::new(offsets, b).unwrap()
    }

    #[test]
    fn many_spin_spec_validation() {
        assert!(ManySpinSpec::new(vec![0.0], vec![vec![0.0]]).is_err());
        assert!(ManySpinSpec::new(vec![0.0; 2], vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(ManySpinSpec::new(vec![0.0; 2], vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn short_time_trivial() {
        let spec = ManySpinSpec::new(vec![0.0; 2], vec![vec![0.0, 1.5], vec![1.5, 0.0]]).unwrap();
        let e = many_spin_short_time_iz(&spec, 0, 0.0).unwrap();
        assert_eq!(e.self_coefficient, 1.0);
        assert_eq!(e.transfers, vec![(1, 0.0)]);
        let e = many_spin_short_time_iz(&spec, 0, 0.1).unwrap();
        assert!((e.self_coefficient - (1.0 - 1.5f64.powi(2) * 0.01 / 4.0)).abs() < 1e-15);
        assert!((e.validity - 0.15).abs() < 1e-15);
    }

    #[test]
    fn short_time_matches_exact_dynamics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = random_spec(&mut rng, 4);
        let bmax = spec.max_coupling();
        let t = 0.02 / bmax;
        let exact = many_spin_exact_coefficients(&spec, 1, t).unwrap();
        let e = many_spin_short_time_iz(&spec, 1, t).unwrap();
        assert!(rel(e.self_coefficient, exact[1]) < 0.01);
        for (j, w) in e.transfers {
            assert!(
                rel(w, exact[j]) < 0.01,
                "transfer to {j}: {w} vs {}",
                exact[j]
            );
        }
    }

    #[test]
    fn short_time_residual_is_higher_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = random_spec(&mut rng, 4);
        let bmax = spec.max_coupling();
        let residual = |t: f64| {
            let exact = many_spin_exact_coefficients(&spec, 0, t).unwrap();
            (many_spin_short_time_iz(&spec, 0, t)
                .unwrap()
                .self_coefficient
                - exact[0])
                .abs()
        };
        let (t0, t1) = (0.005 / bmax, 0.04 / bmax);
        let slope = (residual(t1) / residual(t0)).ln() / (t1 / t0).ln();
        assert!(slope >= 2.7, "residual exponent {slope}");
        assert!(residual(0.02 / bmax) / residual(0.01 / bmax) >= 7.0);
    }

    #[test]
    fn effective_coupling_values() {
        let b0 = 1.3;
        let spec = ManySpinSpec::new(
            vec![0.0; 4],
            (0..4)
                .map(|i| (0..4).map(|j| if i == j { 0.0 } else { b0 }).collect())
                .collect(),
        )
        .unwrap();
        let b = many_spin_effective_coupling(&spec, 2).unwrap();
        assert!(rel(b, b0 * (3.0f64 / 4.0).sqrt()) < 1e-15);
        let pair = ManySpinSpec::new(vec![0.0; 2], vec![vec![0.0, b0], vec![b0, 0.0]]).unwrap();
        assert!(rel(many_spin_effective_coupling(&pair, 0).unwrap(), b0 / SQRT_2) < 1e-15);
    }

    #[test]
    fn effective_coupling_sets_the_early_decay() {
        // sum of transfers equals the self-coefficient loss, and b_eff^2 N / 4
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = random_spec(&mut rng, 4);
        let t = 0.01 / spec.max_coupling();
        let e = many_spin_short_time_iz(&spec, 2, t).unwrap();
        let b = many_spin_effective_coupling(&spec, 2).unwrap();
        let loss = 1.0 - e.self_coefficient;
        assert!(rel(loss, e.transfers.iter().map(|x| x.1).sum()) < 1e-12);
        assert!(rel(loss, 4.0 * b * b * t * t / 4.0) < 1e-12);
        let exact = many_spin_exact_coefficients(&spec, 2, t).unwrap();
        assert!(rel(1.0 - exact[2], loss) < 0.05);
    }

    #[test]
    fn zeno_optimum_identities() {
        let (tm, f) = many_spin_zeno_optimum(2.0, pm(1.0), 0.01).unwrap();
        assert!(rel(tm, 8.0 * specfun::xi(pm(1.0)) / (4.0 * 0.01)) < 1e-15);
        assert!(rel(f, 8.0 * specfun::phi(pm(1.0))) < 1e-15);
        // coupling b/(2 sqrt2) in the qubit Zeno value 4 phi / wx^2
        let b = 1.7;
        let wx = b / (2.0 * SQRT_2);
        let (_, f) = many_spin_zeno_optimum(b, pm(0.5), 0.01).unwrap();
        assert!(rel(f, 4.0 * specfun::phi(pm(0.5)) / (wx * wx)) < 1e-14);
        let m = 1e-4;
        let (_, f) = many_spin_zeno_optimum(1.0, pm(m), 0.01).unwrap();
        assert!(rel(f, 32.0 * (-2.0f64).exp() * m * m) < 1e-3);
        assert!(many_spin_zeno_optimum(0.0, pm(0.5), 0.01).is_err());
    }

    #[test]
    fn monitored_pair_is_half_the_qubit_qfi() {
        // two spins, spin 0 monitored: the exchange block carries half the
        // trace and evolves as the probe with w = (b, 0, w0 - w1)
        let b = 1.0;
        let spec = ManySpinSpec::new(vec![0.3, -0.2], vec![vec![0.0, b], vec![b, 0.0]]).unwrap();
        let om = PrecessionFrequency::new(b, 0.5).unwrap();
        let mu0 = 0.9;
        for &(tau, t) in &[(0.1, 3.0), (0.3, 2.4), (0.05, 4.0)] {
            let sched = MeasurementSchedule::new(tau, t).unwrap();
            let oracle_qfi = many_spin_projected_qfi(&spec, 0, mu0, &sched, (0, 1)).unwrap();
            let probe = qfi::qfi_projected(&om, pm(mu0), tau, t, qfi::ProjectedFormula::Full)
                .unwrap()
                .value;
            assert!(
                rel(oracle_qfi, 0.5 * probe) < 1e-4,
                "{oracle_qfi} vs {probe}"
            );
        }
    }
}
