//! Re-evaluation of random figure cells with the density-matrix oracle.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeno_sense_core::qfi::{self, ProjectedFormula};
use zeno_sense_core::{bloch, oracle, MeasurementSchedule, PrecessionFrequency};

use crate::config::Params;
use crate::figures::{self, FigureOutput};
use crate::CliError;

/// Worst deviation over the checked cells against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotReport {
    pub checked: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub measure: &'static str,
}

impl SpotReport {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

impl fmt::Display for SpotReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "spotcheck {}: {} cells, worst {} deviation {:.3e} (tolerance {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checked,
            self.measure,
            self.worst,
            self.tolerance
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn pick(rng: &mut ChaCha8Rng, len: usize, k: usize) -> Vec<usize> {
    (0..k).map(|_| rng.random_range(0..len)).collect()
}

/// Below this polarization the oracle's finite difference of a nearly
/// maximally mixed state loses all significant digits.
const RESOLVABLE_POLARIZATION: f64 = 1e-3;

/// `n tau` nearest to `t`, at least one period of measurement.
fn snapped(tau: f64, t: f64) -> Result<MeasurementSchedule, CliError> {
    let n = (t / tau).round().max(1.0) as u64;
    Ok(MeasurementSchedule::from_counts(tau, n, 0.0)?)
}

/// Dispatches on the figure name.
pub fn run(figure: &str, p: &Params, out: &FigureOutput, k: usize) -> Result<SpotReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.u64_or("spotcheck_seed", 0)?);
    match figure {
        "fig2" => fig2(p, out, k, &mut rng),
        "fig3" => fig3(p, out, k, &mut rng),
        "fig4" => fig4(p, out, k, &mut rng),
        "fig5" => fig5(p, out, k, &mut rng),
        other => Err(CliError::Config(format!("no spot-check for {other}"))),
    }
}

fn fig2(
    p: &Params,
    out: &FigureOutput,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SpotReport, CliError> {
    let (omega, mu0) = (p.omega()?, p.mu0()?.value());
    let mut worst = 0.0_f64;
    for i in pick(rng, out.main.rows.len(), k) {
        let row = &out.main.rows[i];
        let om = PrecessionFrequency::from_angle(omega, row[0])?;
        worst = worst.max(rel(row[2], oracle::qubit_coherent_qfi(&om, mu0, row[1])?));
    }
    Ok(SpotReport {
        checked: k,
        worst,
        tolerance: 1e-5,
        measure: "relative",
    })
}

fn fig3(
    p: &Params,
    out: &FigureOutput,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SpotReport, CliError> {
    let om = p.probe()?;
    let mu0 = p.mu0()?.value();
    let s = out.summary.clone();
    let taus = [s.get_f64("zeno_tau"), s.get_f64("anti_zeno_tau")];
    let [Some(zeno), Some(anti)] = taus else {
        return Err(CliError::Failed("fig3 summary lacks trace times".into()));
    };
    let traces = out
        .sidecar("_traces")
        .ok_or_else(|| CliError::Failed("fig3 output lacks traces".into()))?;
    let mut worst = 0.0_f64;
    for i in pick(rng, traces.rows.len(), k) {
        let row = &traces.rows[i];
        let t = row[0];
        let coh = oracle::qubit_coherent_bloch(&om, mu0, t)?[2];
        let z = oracle::bloch_from_qubit_rho(&oracle::qubit_projected_rho(
            &om,
            mu0,
            &MeasurementSchedule::new(zeno, t)?,
        )?)[2];
        let a = oracle::bloch_from_qubit_rho(&oracle::qubit_projected_rho(
            &om,
            mu0,
            &MeasurementSchedule::new(anti, t)?,
        )?)[2];
        for (mine, theirs) in [(row[1], coh), (row[2], z), (row[3], a)] {
            worst = worst.max((mine - theirs).abs());
        }
    }
    Ok(SpotReport {
        checked: k,
        worst,
        tolerance: 1e-10,
        measure: "absolute",
    })
}

fn fig4(
    p: &Params,
    out: &FigureOutput,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SpotReport, CliError> {
    let om = p.probe()?;
    let mu0 = p.mu0()?;
    let formula = figures::projected_formula(p)?;
    // The stroboscopic form is exact only at whole cycles.
    let schedule = |tau: f64, t: f64| match formula {
        ProjectedFormula::Stroboscopic => snapped(tau, t),
        ProjectedFormula::Full => Ok(MeasurementSchedule::new(tau, t)?),
    };
    let mut eligible = Vec::new();
    for (i, row) in out.main.rows.iter().enumerate() {
        let s = schedule(row[0], row[1])?;
        if bloch::evolve_projected(&om, mu0, &s).abs() >= RESOLVABLE_POLARIZATION * mu0.value() {
            eligible.push(i);
        }
    }
    let mut worst = 0.0_f64;
    let picked = if eligible.is_empty() {
        Vec::new()
    } else {
        pick(rng, eligible.len(), k)
    };
    for &j in &picked {
        let row = &out.main.rows[eligible[j]];
        let s = schedule(row[0], row[1])?;
        let mine = qfi::qfi_projected(&om, mu0, row[0], s.total_t(), formula)?.value;
        worst = worst.max(rel(
            mine,
            oracle::qubit_projected_qfi(&om, mu0.value(), &s)?,
        ));
    }
    Ok(SpotReport {
        checked: picked.len(),
        worst,
        tolerance: 1e-4,
        measure: "relative",
    })
}

/// The ratio is a quotient of asymptotic forms, so its exact ingredients are
/// checked per cell: the coherent QFI at `t` and the stroboscopic QFI at the
/// whole cycle of `tau = period / 10` nearest its peak.
fn fig5(
    p: &Params,
    out: &FigureOutput,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SpotReport, CliError> {
    let omega = p.omega()?;
    let mu0 = p.mu0()?;
    let mut worst = 0.0_f64;
    for i in pick(rng, out.main.rows.len(), k) {
        let row = &out.main.rows[i];
        let om = PrecessionFrequency::from_angle(omega, row[0])?;
        let t = row[1];
        let coh = qfi::qfi_coherent(&om, mu0, t).value;
        worst = worst.max(rel(coh, oracle::qubit_coherent_qfi(&om, mu0.value(), t)?));
        let tau = 0.1 * om.period();
        if bloch::alpha(&om, tau).abs() < 1.0 {
            let s = snapped(tau, qfi::t_max(&om, mu0, tau)?)?;
            let strob =
                qfi::qfi_projected(&om, mu0, tau, s.total_t(), ProjectedFormula::Stroboscopic)?
                    .value;
            worst = worst.max(rel(
                strob,
                oracle::qubit_projected_qfi(&om, mu0.value(), &s)?,
            ));
        }
    }
    Ok(SpotReport {
        checked: k,
        worst,
        tolerance: 1e-4,
        measure: "relative",
    })
}
