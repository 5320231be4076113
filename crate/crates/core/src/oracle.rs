//! Brute-force reference: exact density-matrix propagation for up to four
//! spin-1/2 particles, the non-selective dephasing channel that models a
//! z-projection, and the eigen-decomposition form of the QFI.
//!
//! Nothing here touches the closed forms in [`crate::bloch`] or
//! [`crate::qfi`]; it exists to check them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bloch::{MeasurementSchedule, PrecessionFrequency};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest supported Hilbert-space dimension (four spins).
pub const MAX_DIM: usize = 16;

/// Eigenvalue floor below which QFI terms are skipped.
pub const EIGEN_FLOOR: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Hermitian Hamiltonian in angular-frequency units.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix(CMatrix);

impl HamiltonianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let scale = m.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
        let dev = hermitian_deviation(&m);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    /// Probe Hamiltonian `(wx sigma_x + wz sigma_z) / 2`.
    pub fn qubit(omega: &PrecessionFrequency) -> Self {
        let (wx, wz) = (omega.wx(), omega.wz());
        Self(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.5 * wz), c(0.5 * wx), c(0.5 * wx), c(-0.5 * wz)],
        ))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `exp(-i H t)` via the Hermitian eigendecomposition.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let eig = SymmetricEigen::new(self.0.clone());
        let v = &eig.eigenvectors;
        let phases =
            DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
        v * phases * v.adjoint()
    }
}

/// Density matrix on `2^k` levels, `1 <= k <= 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all to `1e-12`).
    pub fn new(m: CMatrix) -> Result<Self> {
        let rho = Self::from_raw(m)?;
        rho.check(1e-12)?;
        Ok(rho)
    }

    fn from_raw(m: CMatrix) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.ncols(),
            });
        }
        if !n.is_power_of_two() || !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "density matrix dimension {n} is not a power of two in [2, {MAX_DIM}]"
            )));
        }
        Ok(Self(m))
    }

    /// Checks the density-matrix invariants at tolerance `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let dev = hermitian_deviation(&self.0);
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidParameter(format!("trace {tr} is not 1")));
        }
        let min_eig = self
            .eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tol {
            return Err(Error::InvalidParameter(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    /// Qubit state `(I + mu . sigma) / 2`.
    pub fn from_bloch(mu: [f64; 3]) -> Result<Self> {
        let [x, y, z] = mu;
        Self::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.5 * (1.0 + z)),
                Complex64::new(0.5 * x, -0.5 * y),
                Complex64::new(0.5 * x, 0.5 * y),
                c(0.5 * (1.0 - z)),
            ],
        ))
    }

    /// `(I + sum_k c_k O_k) / dim`.
    pub fn identity_plus(terms: &[(f64, &CMatrix)], dim: usize) -> Result<Self> {
        let mut m = CMatrix::identity(dim, dim);
        for (coef, op) in terms {
            if op.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.nrows(),
                });
            }
            m += *op * c(*coef);
        }
        Self::new(m * c(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Re Tr[rho O]`.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (&self.0 * op).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(hermitize(&self.0))
            .eigenvalues
            .iter()
            .cloned()
            .collect()
    }
}

/// `U rho U^dagger` with `U = exp(-i H t)`.
pub fn propagate_unitary(
    h: &HamiltonianMatrix,
    rho: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: h.dim(),
        });
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    Ok(conjugate(&h.propagator(t), rho))
}

fn conjugate(u: &CMatrix, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix(hermitize(&(u * &rho.0 * u.adjoint())))
}

/// Non-selective measurement of the observable whose eigenvalue on basis
/// state `k` is `labels[k]`: coherences between different labels vanish.
pub fn dephase(rho: &DensityMatrix, labels: &[i64]) -> Result<DensityMatrix> {
    let n = rho.dim();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    let mut m = rho.0.clone();
    for i in 0..n {
        for j in 0..n {
            if labels[i] != labels[j] {
                m[(i, j)] = c(0.0);
            }
        }
    }
    Ok(DensityMatrix(m))
}

/// Result of the eigen-decomposition QFI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenQfi {
    pub value: f64,
    /// Pairs of (near-)degenerate eigenvalues that `drho` couples. The
    /// eigenvector-derivative form is ambiguous there; the value reported is
    /// the basis-independent symmetric-logarithmic-derivative sum.
    pub degenerate_couplings: usize,
}

/// QFI from the spectral decomposition of `rho` and its parameter derivative.
///
/// With `D = V^dagger drho V` in the eigenbasis of `rho` this is
/// `sum_n D_nn^2 / l_n + 2 sum_{n != m} |D_nm|^2 / (l_n + l_m)`, which equals
/// the eigenvalue-derivative plus eigenvector-derivative form. Terms whose
/// eigenvalue (sum) is below [`EIGEN_FLOOR`] are skipped.
pub fn qfi_eigen(rho: &DensityMatrix, drho: &CMatrix) -> Result<EigenQfi> {
    let n = rho.dim();
    if drho.nrows() != n || drho.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: drho.nrows(),
        });
    }
    let scale = drho.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    let dev = hermitian_deviation(drho);
    if dev > 1e-8 * scale {
        return Err(Error::NotHermitian(dev));
    }
    let eig = SymmetricEigen::new(hermitize(&rho.0));
    let v = &eig.eigenvectors;
    let lam = &eig.eigenvalues;
    let d = v.adjoint() * hermitize(drho) * v;

    let mut value = 0.0;
    let mut degenerate = 0;
    for i in 0..n {
        if lam[i] > EIGEN_FLOOR {
            value += d[(i, i)].re * d[(i, i)].re / lam[i];
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let coupling = d[(j, i)].norm_sqr();
            if i < j && (lam[i] - lam[j]).abs() < DEGENERACY_TOL && coupling > 1e-24 {
                degenerate += 1;
            }
            let s = lam[i] + lam[j];
            if s > EIGEN_FLOOR {
                value += 2.0 * coupling / s;
            }
        }
    }
    Ok(EigenQfi {
        value: value.max(0.0),
        degenerate_couplings: degenerate,
    })
}

/// Central difference `(rho(wx + h) - rho(wx - h)) / 2h`.
pub fn finite_diff_drho<F>(builder: F, wx: f64, h: f64) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step h = {h} must be positive"
        )));
    }
    let plus = builder(wx + h)?;
    let minus = builder(wx - h)?;
    Ok((plus.0 - minus.0) * c(0.5 / h))
}

/// Default finite-difference step `1e-6 |wx|`.
pub fn default_step(wx: f64) -> f64 {
    1e-6 * wx.abs()
}

// Spin operators

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Single spin-1/2 operator `sigma / 2`.
pub fn spin_half(axis: Axis) -> CMatrix {
    let z = c(0.0);
    let h = 0.5;
    match axis {
        Axis::X => DMatrix::from_row_slice(2, 2, &[z, c(h), c(h), z]),
        Axis::Y => DMatrix::from_row_slice(
            2,
            2,
            &[z, Complex64::new(0.0, -h), Complex64::new(0.0, h), z],
        ),
        Axis::Z => DMatrix::from_row_slice(2, 2, &[c(h), z, z, c(-h)]),
    }
}

/// `v . sigma / 2`: the qubit operator whose Bloch vector is `v`, e.g. the
/// density-matrix derivative for a Bloch-vector derivative `v`.
pub fn qubit_operator(v: [f64; 3]) -> CMatrix {
    spin_half(Axis::X) * c(v[0]) + spin_half(Axis::Y) * c(v[1]) + spin_half(Axis::Z) * c(v[2])
}

/// `I_site^axis` on `n_spins` spins. Site 0 is the leftmost Kronecker factor,
/// so basis state `k` has site `s` up when bit `n_spins - 1 - s` of `k` is 0.
pub fn spin_operator(n_spins: usize, site: usize, axis: Axis) -> CMatrix {
    assert!(
        site < n_spins,
        "site {site} out of range for {n_spins} spins"
    );
    let id = CMatrix::identity(2, 2);
    let mut out = CMatrix::identity(1, 1);
    for s in 0..n_spins {
        let f = if s == site {
            spin_half(axis)
        } else {
            id.clone()
        };
        out = kron(&out, &f);
    }
    out
}

/// `I_a . I_b`.
pub fn spin_dot(n_spins: usize, a: usize, b: usize) -> CMatrix {
    let dim = 1 << n_spins;
    [Axis::X, Axis::Y, Axis::Z]
        .iter()
        .map(|&ax| spin_operator(n_spins, a, ax) * spin_operator(n_spins, b, ax))
        .fold(CMatrix::zeros(dim, dim), |acc, m| acc + m)
}

pub fn is_up(n_spins: usize, site: usize, k: usize) -> bool {
    (k >> (n_spins - 1 - site)) & 1 == 0
}

/// Dephasing labels for monitoring `I_site^z`.
pub fn site_labels(n_spins: usize, site: usize) -> Vec<i64> {
    (0..1usize << n_spins)
        .map(|k| if is_up(n_spins, site, k) { 1 } else { -1 })
        .collect()
}

/// Twice the total z-magnetization of each product-basis state.
pub fn magnetization_labels(n_spins: usize) -> Vec<i64> {
    (0..1usize << n_spins)
        .map(|k| {
            (0..n_spins)
                .map(|s| if is_up(n_spins, s, k) { 1 } else { -1 })
                .sum()
        })
        .collect()
}

pub fn total_sz(n_spins: usize) -> CMatrix {
    let dim = 1 << n_spins;
    (0..n_spins).fold(CMatrix::zeros(dim, dim), |acc, s| {
        acc + spin_operator(n_spins, s, Axis::Z)
    })
}

// Qubit probe built purely from matrices

/// Pauli expectation values `(Tr rho sigma_x, Tr rho sigma_y, Tr rho sigma_z)`.
pub fn bloch_from_qubit_rho(rho: &DensityMatrix) -> [f64; 3] {
    let m = rho.matrix();
    [
        2.0 * m[(1, 0)].re,
        2.0 * m[(1, 0)].im,
        (m[(0, 0)] - m[(1, 1)]).re,
    ]
}

/// Probe state after coherent evolution for time `t` from `mu0 z`.
pub fn qubit_coherent_rho(omega: &PrecessionFrequency, mu0: f64, t: f64) -> Result<DensityMatrix> {
    let rho0 = DensityMatrix::from_bloch([0.0, 0.0, mu0])?;
    propagate_unitary(&HamiltonianMatrix::qubit(omega), &rho0, t)
}

pub fn qubit_coherent_bloch(omega: &PrecessionFrequency, mu0: f64, t: f64) -> Result<[f64; 3]> {
    Ok(bloch_from_qubit_rho(&qubit_coherent_rho(omega, mu0, t)?))
}

/// Probe state after `n` cycles of (evolve `tau`, dephase in z) followed by
/// `dt` of free evolution, by explicit iteration.
pub fn qubit_projected_rho(
    omega: &PrecessionFrequency,
    mu0: f64,
    sched: &MeasurementSchedule,
) -> Result<DensityMatrix> {
    let h = HamiltonianMatrix::qubit(omega);
    let u = h.propagator(sched.tau());
    let mut rho = DensityMatrix::from_bloch([0.0, 0.0, mu0])?;
    for _ in 0..sched.n() {
        rho = dephase(&conjugate(&u, &rho), &[0, 1])?;
    }
    propagate_unitary(&h, &rho, sched.dt())
}

/// Oracle QFI about `wx` for free precession.
pub fn qubit_coherent_qfi(omega: &PrecessionFrequency, mu0: f64, t: f64) -> Result<f64> {
    let wz = omega.wz();
    let build = |wx: f64| qubit_coherent_rho(&PrecessionFrequency::new(wx, wz)?, mu0, t);
    let drho = finite_diff_drho(build, omega.wx(), default_step(omega.wx()))?;
    Ok(qfi_eigen(&qubit_coherent_rho(omega, mu0, t)?, &drho)?.value)
}

/// Oracle QFI about `wx` under stroboscopic projection.
pub fn qubit_projected_qfi(
    omega: &PrecessionFrequency,
    mu0: f64,
    sched: &MeasurementSchedule,
) -> Result<f64> {
    let wz = omega.wz();
    let build = |wx: f64| qubit_projected_rho(&PrecessionFrequency::new(wx, wz)?, mu0, sched);
    let drho = finite_diff_drho(build, omega.wx(), default_step(omega.wx()))?;
    Ok(qfi_eigen(&qubit_projected_rho(omega, mu0, sched)?, &drho)?.value)
}
