//! Closed form against oracle, check by check.
//!
//! Every check reduces to one observed number and a bound on it. Random
//! inputs come from fixed seeds, so a report is reproducible bit for bit.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bloch::{self, MeasurementSchedule, PolarizationVector, PrecessionFrequency};
use crate::error::Result;
use crate::numeric;
use crate::oracle::{self, Axis, DensityMatrix};
use crate::qfi::{self, ProjectedFormula};
use crate::specfun::{self, PolarizationMagnitude};
use crate::spins;

/// Pieces of the closed-form model a check may swap out. The harness tests
/// itself by injecting a deliberately wrong one.
#[derive(Debug, Clone, Copy)]
pub struct Model {
    pub d_alpha: fn(&PrecessionFrequency, f64) -> f64,
}

impl Default for Model {
    fn default() -> Self {
        Self {
            d_alpha: qfi::d_alpha_d_wx,
        }
    }
}

/// Direction of the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub observed: f64,
    pub bound: f64,
    pub kind: Bound,
    pub detail: String,
}

impl Check {
    fn at_most(name: &'static str, observed: f64, bound: f64) -> Self {
        Self {
            name,
            observed,
            bound,
            kind: Bound::AtMost,
            detail: String::new(),
        }
    }

    fn at_least(name: &'static str, observed: f64, bound: f64) -> Self {
        Self {
            kind: Bound::AtLeast,
            ..Self::at_most(name, observed, bound)
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }

    fn failed(name: &'static str, err: crate::Error) -> Self {
        Self::at_most(name, f64::NAN, 0.0).with_detail(format!("error: {err}"))
    }

    pub fn passed(&self) -> bool {
        match self.kind {
            Bound::AtMost => self.observed <= self.bound,
            Bound::AtLeast => self.observed >= self.bound,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.kind {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{:<4} {:<34} {:>12.4e} {} {:<10.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            op,
            self.bound
        )?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

fn guard(name: &'static str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, e))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} checks, {} passed, {} failed",
            self.checks.len(),
            self.checks.len() - failed,
            failed
        )
    }
}

/// Default probe: `w = 2 pi`, `theta = 0.9 pi / 2`.
pub fn figure_omega() -> PrecessionFrequency {
    PrecessionFrequency::from_angle(2.0 * PI, 0.9 * PI / 2.0).expect("valid angle")
}

fn pm(m: f64) -> PolarizationMagnitude {
    PolarizationMagnitude::new(m).expect("magnitude in range")
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Runs every check.
pub fn run_all(model: &Model) -> ValidationReport {
    let mut checks = vec![
        polarization_eigen_equivalence(10_000, 1),
        coherent_vs_finite_difference(100, 2),
        coherent_long_time(),
        d_alpha_sign(model),
    ];
    checks.extend(projected_vs_oracle(50, 3));
    checks.push(xi_endpoints());
    checks.extend(zeno_plateau());
    checks.extend(anti_zeno());
    checks.extend(peak_identity());
    checks.extend(crossover());
    checks.push(two_spin_mapping());
    checks.extend(three_spin_reduction());
    checks.extend(trotter_short_time(4));
    checks.extend(propagation_invariants(6));
    ValidationReport { checks }
}

fn random_bloch(rng: &mut ChaCha8Rng, rmax: f64) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    let r = rmax * rng.random::<f64>().cbrt();
    [r * s * phi.cos(), r * s * phi.sin(), r * z]
}

/// Polarization-vector QFI against the eigen-decomposition QFI on random
/// qubit states with `|mu| <= 0.999`.
pub fn polarization_eigen_equivalence(samples: usize, seed: u64) -> Check {
    const NAME: &str = "polarization_eigen_equivalence";
    guard(NAME, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut worst, mut sum) = (0.0_f64, 0.0);
        for _ in 0..samples {
            let mu = random_bloch(&mut rng, 0.999);
            let dmu = [0; 3].map(|_| rng.random_range(-1.0..1.0));
            let closed =
                qfi::qfi_from_polarization(&PolarizationVector::new(mu[0], mu[1], mu[2])?, dmu)?;
            let drho = oracle::qubit_operator(dmu);
            let eig = oracle::qfi_eigen(&DensityMatrix::from_bloch(mu)?, &drho)?.value;
            let d = rel(closed, eig);
            worst = worst.max(d);
            sum += d;
        }
        Ok(Check::at_most(NAME, worst, 1e-9).with_detail(format!(
            "n = {samples}, mean rel dev {:.3e}",
            sum / samples as f64
        )))
    })
}

/// Closed-form coherent QFI against central differences of the trajectory.
pub fn coherent_vs_finite_difference(samples: usize, seed: u64) -> Check {
    const NAME: &str = "coherent_vs_finite_difference";
    guard(NAME, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = pm(1.0 - 1e-6);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let theta = rng.random_range(1e-3..0.49 * PI);
            let t = rng.random_range(1e-2..50.0);
            let om = PrecessionFrequency::from_angle(2.0 * PI, theta)?;
            let h = oracle::default_step(om.wx());
            let p = bloch::evolve_coherent(&om.with_wx(om.wx() + h)?, m, t).to_array();
            let q = bloch::evolve_coherent(&om.with_wx(om.wx() - h)?, m, t).to_array();
            let d = [0, 1, 2].map(|k| (p[k] - q[k]) / (2.0 * h));
            let fd = qfi::qfi_from_polarization(&bloch::evolve_coherent(&om, m, t), d)?;
            worst = worst.max(rel(qfi::qfi_coherent(&om, m, t).value, fd));
        }
        Ok(Check::at_most(NAME, worst, 1e-5).with_detail(format!("n = {samples}")))
    })
}

/// Long-time approximation at `t = 100 wz / wx^2`.
pub fn coherent_long_time() -> Check {
    let om = figure_omega();
    let t = 100.0 * om.wz() / (om.wx() * om.wx());
    let exact = qfi::qfi_coherent(&om, pm(1.0), t).value;
    let approx = qfi::qfi_coherent_longtime(&om, pm(1.0), t).value;
    Check::at_most("coherent_long_time", rel(approx, exact), 0.05)
}

/// Signed `d alpha / d wx` against central differences of `alpha`.
pub fn d_alpha_sign(model: &Model) -> Check {
    const NAME: &str = "d_alpha_vs_finite_difference";
    guard(NAME, || {
        let mut worst = 0.0_f64;
        for &theta in &[0.2, 0.9 * PI / 2.0, 1.5] {
            let om = PrecessionFrequency::from_angle(2.0 * PI, theta)?;
            let h = 1e-5 * om.wx().abs();
            for k in 1..=12 {
                let tau = 0.05 * k as f64;
                let fd = (bloch::alpha(&om.with_wx(om.wx() + h)?, tau)
                    - bloch::alpha(&om.with_wx(om.wx() - h)?, tau))
                    / (2.0 * h);
                worst = worst.max(((model.d_alpha)(&om, tau) - fd).abs());
            }
        }
        Ok(Check::at_most(NAME, worst, 1e-8))
    })
}

/// Both projected formulas against the dephasing oracle at `t = n tau`.
pub fn projected_vs_oracle(samples: usize, seed: u64) -> Vec<Check> {
    let run = |formula: ProjectedFormula, name: &'static str| {
        guard(name, || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let om = figure_omega();
            let mut worst = 0.0_f64;
            for _ in 0..samples {
                let tau = rng.random_range(0.05..0.6);
                let n: u32 = rng.random_range(1..=20);
                let m = rng.random_range(0.3..1.0 - 1e-6);
                let t = n as f64 * tau;
                let sched = MeasurementSchedule::new(tau, t)?;
                let o = oracle::qubit_projected_qfi(&om, m, &sched)?;
                let v = qfi::qfi_projected(&om, pm(m), tau, t, formula)?.value;
                worst = worst.max(rel(v, o));
            }
            Ok(Check::at_most(name, worst, 1e-4).with_detail(format!("n = {samples}")))
        })
    };
    vec![
        run(
            ProjectedFormula::Stroboscopic,
            "projected_stroboscopic_vs_oracle",
        ),
        run(ProjectedFormula::Full, "projected_full_vs_oracle"),
    ]
}

/// Distance of `xi(1)` from `[0.79, 0.80]` plus `|xi(0) - 1|`.
pub fn xi_endpoints() -> Check {
    let x1 = specfun::xi(pm(1.0));
    let x0 = specfun::xi(pm(0.0));
    let outside = (0.79 - x1).max(x1 - 0.80).max(0.0);
    Check::at_most("xi_endpoints", outside + (x0 - 1.0).abs(), 0.0)
        .with_detail(format!("xi(1) = {x1:.6}, xi(0) = {x0}"))
}

/// Zeno-limit peak value and its offset independence.
pub fn zeno_plateau() -> Vec<Check> {
    let om = figure_omega();
    let tau = 1e-3 * om.period();
    let mut out = Vec::new();
    let mut limit = 0.0_f64;
    let mut offset = 0.0_f64;
    for &m in &[0.1, 0.5, 1.0] {
        let mu0 = pm(m);
        let (Ok(max), Ok(doubled)) = (
            qfi::qfi_projected_max(&om, mu0, tau),
            qfi::qfi_projected_max(&om.with_wz(2.0 * om.wz()).expect("finite"), mu0, tau),
        ) else {
            continue;
        };
        limit = limit.max(rel(max, 4.0 * specfun::phi(mu0) / (om.wx() * om.wx())));
        offset = offset.max(rel(doubled, max));
    }
    out.push(Check::at_most("zeno_limit_value", limit, 0.02));
    out.push(Check::at_most("zeno_offset_independence", offset, 0.01));
    out
}

/// Location of the anti-Zeno minimum.
pub fn anti_zeno() -> Vec<Check> {
    let fig = guard("anti_zeno_tau_window", || {
        let tau = bloch::anti_zeno_tau(&figure_omega())?;
        let outside = (0.36 - tau).max(tau - 0.39).max(0.0);
        Ok(Check::at_most("anti_zeno_tau_window", outside, 0.0)
            .with_detail(format!("tau* = {tau:.6}")))
    });
    let far = guard("anti_zeno_large_offset", || {
        let om = PrecessionFrequency::new(1.0, 100.0)?;
        let x = om.w() * bloch::anti_zeno_tau(&om)?;
        Ok(
            Check::at_most("anti_zeno_large_offset", (x - (0.5 * x).tan()).abs(), 1e-3)
                .with_detail(format!("w tau* = {x:.6}")),
        )
    });
    vec![fig, far]
}

/// `t_max = xi t_c` and agreement with a numeric maximizer.
pub fn peak_identity() -> Vec<Check> {
    let om = figure_omega();
    let identity = guard("peak_time_identity", || {
        let mut worst = 0.0_f64;
        for &m in &[0.0, 0.3, 1.0] {
            for &tau in &[0.1, 0.3, 0.5] {
                let tm = qfi::t_max(&om, pm(m), tau)?;
                worst = worst.max(rel(
                    tm,
                    specfun::xi(pm(m)) * bloch::characteristic_time(&om, tau),
                ));
            }
        }
        Ok(Check::at_most("peak_time_identity", worst, 1e-10))
    });
    let numeric = guard("peak_time_vs_maximizer", || {
        let mut worst = 0.0_f64;
        for &tau in &[0.1, 0.3, 0.5] {
            let tm = qfi::t_max(&om, pm(1.0), tau)?;
            let f = |t: f64| {
                qfi::qfi_projected(&om, pm(1.0), tau, t, ProjectedFormula::Stroboscopic)
                    .map(|q| q.value)
                    .unwrap_or(f64::NAN)
            };
            let found = numeric::golden_section_max(f, 0.1 * tm, 10.0 * tm, 1e-10)?;
            worst = worst.max(rel(found, tm));
        }
        Ok(Check::at_most("peak_time_vs_maximizer", worst, 1e-3))
    });
    vec![identity, numeric]
}

/// Least-squares constant `c` in `y = c f` and the worst relative misfit.
pub fn fit_proportional(points: &[(f64, f64)]) -> (f64, f64) {
    let (num, den) = points
        .iter()
        .fold((0.0, 0.0), |(n, d), &(f, y)| (n + f * y, d + f * f));
    let c = num / den;
    let worst = points
        .iter()
        .map(|&(f, y)| rel(c * f, y))
        .fold(0.0_f64, f64::max);
    (c, worst)
}

/// Crossover time consistency and the square-root boundary law.
pub fn crossover() -> Vec<Check> {
    let ratio = guard("crossover_ratio_at_bound", || {
        let om = figure_omega();
        let mut worst = 0.0_f64;
        for &m in &[1e-3, 0.1, 0.5, 1.0] {
            let t = qfi::projective_wins_time_bound(&om, pm(m));
            worst = worst.max((qfi::qfi_ratio_max(&om, pm(m), t)? - 1.0).abs());
        }
        Ok(Check::at_most("crossover_ratio_at_bound", worst, 1e-6))
    });
    let fit = guard("boundary_sqrt_fit", || {
        let wx = 1.0;
        let mut pts = Vec::new();
        for k in 0..=20 {
            let t = 10.0 * 10f64.powf(k as f64 / 20.0);
            let wz = qfi::boundary_curve(wx, t, pm(1.0))?;
            pts.push((wx * (wx * t - 1.0).sqrt(), wz));
        }
        let (c, worst) = fit_proportional(&pts);
        Ok(Check::at_most("boundary_sqrt_fit", worst, 0.1)
            .with_detail(format!("c = {c:.5} over wx t in [10, 100]")))
    });
    vec![ratio, fit]
}

/// Two-spin closed form against four-level propagation on a 10^3 grid.
pub fn two_spin_mapping() -> Check {
    const NAME: &str = "two_spin_mapping";
    guard(NAME, || {
        let mut worst = 0.0_f64;
        for ib in 0..10 {
            let b = -2.0 + 4.0 * (ib as f64 + 0.5) / 10.0;
            for id in 0..10 {
                let delta = -3.0 + 6.0 * id as f64 / 9.0;
                let spec = spins::TwoSpinSpec::coupling(b, delta)?;
                for it in 0..10 {
                    let t = 1.1 * it as f64;
                    let exact = spins::two_spin_muz_exact(&spec, 1.0, t)?;
                    worst = worst.max((spins::two_spin_muz(&spec, 1.0, t) - exact).abs());
                }
            }
        }
        Ok(Check::at_most(NAME, worst, 1e-10).with_detail("1000 grid points".into()))
    })
}

/// Three-level block against the effective two-level model.
pub fn three_spin_reduction() -> Vec<Check> {
    let mut pair = 0.0_f64;
    let mut frozen = 0.0_f64;
    let specs = [
        spins::ThreeSpinSpec::symmetric(1.0, 0.0, 0.0),
        spins::ThreeSpinSpec::symmetric(0.7, 2.0, 0.4),
        spins::ThreeSpinSpec {
            sigma: 1.3,
            ..spins::ThreeSpinSpec::symmetric(-1.2, 0.5, 1.8)
        },
    ];
    for spec in &specs {
        let Ok(om) = spins::three_spin_effective_omega(spec) else {
            pair = f64::NAN;
            continue;
        };
        let h = spins::three_spin_block_hamiltonian(spec);
        let p0 = [0.25, 0.45, 0.3];
        for k in 0..50 {
            let t = 0.29 * k as f64;
            let u = h.propagator(t);
            let pop = |i: usize| (0..3).map(|j| u[(i, j)].norm_sqr() * p0[j]).sum::<f64>();
            let want = (p0[0] - p0[1]) * bloch::alpha(&om, t);
            pair = pair.max((pop(0) - pop(1) - want).abs());
            frozen = frozen.max((pop(2) - p0[2]).abs());
        }
    }
    vec![
        Check::at_most("three_spin_pair_dynamics", pair, 1e-10),
        Check::at_most("three_spin_antisymmetric_frozen", frozen, 1e-12),
    ]
}

/// Short-time expansion of `I_i^z` against exact dynamics on `n_spins` spins
/// with random couplings in `[0.5, 2)`.
pub fn trotter_short_time(n_spins: usize) -> Vec<Check> {
    match trotter_measures(n_spins) {
        Ok((slope, worst)) => vec![
            Check::at_least("trotter_residual_exponent", slope, 2.7)
                .with_detail("t in [0.005, 0.04] / max|b|".into()),
            Check::at_most("trotter_relative_error", worst, 0.01)
                .with_detail("t = 0.02 / max|b|".into()),
        ],
        Err(e) => vec![
            Check::failed("trotter_residual_exponent", e.clone()),
            Check::failed("trotter_relative_error", e),
        ],
    }
}

/// Log-log slope of the worst coefficient residual, and the worst relative
/// coefficient error at `t = 0.02 / max|b|`.
fn trotter_measures(n_spins: usize) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut b = vec![vec![0.0; n_spins]; n_spins];
    for i in 0..n_spins {
        for j in 0..i {
            let v = rng.random_range(0.5..2.0);
            b[i][j] = v;
            b[j][i] = v;
        }
    }
    let offsets = (0..n_spins).map(|_| rng.random_range(-0.5..0.5)).collect();
    let spec = spins::ManySpinSpec::new(offsets, b)?;
    let bmax = spec.max_coupling();
    let compare = |t: f64, measure: fn(f64, f64) -> f64| -> Result<f64> {
        let exact = spins::many_spin_exact_coefficients(&spec, 0, t)?;
        let e = spins::many_spin_short_time_iz(&spec, 0, t)?;
        Ok(e.transfers
            .iter()
            .map(|&(j, w)| measure(w, exact[j]))
            .fold(measure(e.self_coefficient, exact[0]), f64::max))
    };
    let mut pts = Vec::new();
    for k in 0..8 {
        let t = 0.005 / bmax * 8f64.powf(k as f64 / 7.0);
        pts.push((t.ln(), compare(t, |a, b| (a - b).abs())?.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok((sxy / sxx, compare(0.02 / bmax, rel)?))
}

/// Trace, Hermiticity and positivity through long propagate / dephase
/// sequences, dephasing idempotence, and conservation of total `M_z`.
pub fn propagation_invariants(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violation = 0.0_f64;
    let mut idempotence = 0.0_f64;
    let mut conservation = 0.0_f64;
    for n in 1..=4usize {
        let dim = 1 << n;
        let mut h = oracle::CMatrix::zeros(dim, dim);
        for i in 0..n {
            h += oracle::spin_operator(n, i, Axis::Z) * oracle::c(rng.random_range(-1.0..1.0));
            for j in i + 1..n {
                h += oracle::spin_dot(n, i, j) * oracle::c(rng.random_range(-1.0..1.0));
            }
        }
        let h = oracle::HamiltonianMatrix::new(h).expect("Hermitian by construction");
        let mut terms: Vec<(f64, oracle::CMatrix)> = Vec::new();
        for i in 0..n {
            for ax in [Axis::Z, Axis::X] {
                let coef = rng.random_range(-0.4..0.4) / n as f64;
                terms.push((coef, oracle::spin_operator(n, i, ax)));
            }
        }
        let refs: Vec<(f64, &oracle::CMatrix)> = terms.iter().map(|(c, m)| (*c, m)).collect();
        let Ok(mut rho) = DensityMatrix::identity_plus(&refs, dim) else {
            violation = f64::NAN;
            continue;
        };
        let mz = oracle::total_sz(n);
        let m0 = rho.expectation(&mz);
        let labels = oracle::site_labels(n, 0);
        for step in 0..30 {
            rho = oracle::propagate_unitary(&h, &rho, rng.random_range(0.0..2.0))
                .expect("dims match");
            conservation = conservation.max((rho.expectation(&mz) - m0).abs());
            if step % 3 == 2 {
                let once = oracle::dephase(&rho, &labels).expect("dims match");
                let twice = oracle::dephase(&once, &labels).expect("dims match");
                idempotence = idempotence.max(
                    (once.matrix() - twice.matrix())
                        .iter()
                        .fold(0.0_f64, |a, z| a.max(z.norm())),
                );
                rho = once;
            }
            violation = violation.max(invariant_violation(&rho));
        }
    }
    vec![
        Check::at_most("density_matrix_invariants", violation, 1e-12),
        Check::at_most("dephase_idempotent", idempotence, 0.0),
        Check::at_most("magnetization_conserved", conservation, 1e-12),
    ]
}

fn invariant_violation(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let herm = (m - m.adjoint())
        .iter()
        .fold(0.0_f64, |a, z| a.max(z.norm()));
    let tr = (rho.trace() - oracle::c(1.0)).norm();
    let neg = rho.eigenvalues().iter().fold(0.0_f64, |a, &l| a.max(-l));
    herm.max(tr).max(neg)
}
