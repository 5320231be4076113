//! Calculators for the spin systems that reduce to a two-level probe.

use zeno_sense_core::spins::{self, ManySpinSpec, ThreeSpinSpec, TwoSpinSpec};
use zeno_sense_core::{bloch, qfi, specfun, PolarizationMagnitude, PrecessionFrequency};

use crate::config::Params;
use crate::{CliError, Summary};

pub const TWO_KEYS: &[&str] = &["b", "delta", "omega0_i", "kt", "mu0"];
pub const THREE_KEYS: &[&str] = &["b", "b1", "b2", "delta", "d", "sigma", "mu0"];
pub const MANY_KEYS: &[&str] = &[
    "offsets", "b01", "b02", "b03", "b12", "b13", "b23", "spin", "mu0", "tau",
];

/// Fraction of the precession period used as the Zeno read-out interval.
const ZENO_FRACTION: f64 = 0.01;

/// Crossover time, recommended intervals and the peak QFI at each.
fn probe_summary(
    s: &mut Summary,
    om: &PrecessionFrequency,
    mu0: PolarizationMagnitude,
) -> Result<(), CliError> {
    s.num("wx", om.wx());
    s.num("wz", om.wz());
    s.num("w", om.w());
    s.num("mu0", mu0.value());
    if mu0.value() > 0.0 {
        s.num(
            "crossover_time_bound_mu0",
            qfi::projective_wins_time_bound(om, mu0),
        );
    }
    let zeno = ZENO_FRACTION * om.period();
    s.num("tau_zeno", zeno);
    s.num("t_max_zeno", qfi::t_max(om, mu0, zeno)?);
    s.num("qfi_max_zeno", qfi::qfi_projected_max(om, mu0, zeno)?);
    match bloch::anti_zeno_tau(om) {
        Ok(tau) => {
            s.num("tau_anti_zeno", tau);
            s.num("t_max_anti_zeno", qfi::t_max(om, mu0, tau)?);
            s.num("qfi_max_anti_zeno", qfi::qfi_projected_max(om, mu0, tau)?);
        }
        Err(e) => s.push("tau_anti_zeno", format!("none ({e})")),
    }
    Ok(())
}

pub fn two(p: &Params) -> Result<Summary, CliError> {
    let b = p.f64_required("b")?;
    let delta = p.f64_or("delta", 0.0)?;
    let spec = TwoSpinSpec::new(b, delta, p.f64_or("omega0_i", 0.0)?, p.f64_or("kt", 1.0)?)?;
    let om = spins::two_spin_effective_omega(&spec);
    let mut s = Summary::default();
    s.push("system", "two");
    s.push(
        "hartmann_hahn",
        if delta == 0.0 {
            "on-resonance"
        } else {
            "off-resonance"
        },
    );
    if p.has("omega0_i") {
        let init = spins::two_spin_initial_mu0(&spec);
        s.num("mu0_thermal_exact", init.exact);
        s.num("mu0_thermal_high_temperature", init.high_temperature);
    }
    s.num(
        "crossover_time_bound",
        spins::two_spin_projective_bound(&spec),
    );
    probe_summary(&mut s, &om, p.mu0()?)?;
    Ok(s)
}

pub fn three(p: &Params) -> Result<Summary, CliError> {
    let b1 = match (p.f64_opt("b")?, p.f64_opt("b1")?) {
        (Some(_), Some(_)) => return Err(CliError::Config("give b or b1, not both".into())),
        (Some(b), None) | (None, Some(b)) => b,
        (None, None) => return Err(CliError::Config("missing required parameter b".into())),
    };
    let spec = ThreeSpinSpec {
        b1,
        b2: p.f64_or("b2", b1)?,
        d: p.f64_or("d", 0.0)?,
        delta: p.f64_or("delta", 0.0)?,
        sigma: p.f64_or("sigma", 0.0)?,
    };
    let symmetry = spec
        .symmetry()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let om = spins::three_spin_effective_omega(&spec)?;
    let mut s = Summary::default();
    s.push("system", "three");
    s.push("symmetry", format!("{symmetry:?}").to_lowercase());
    s.num(
        "crossover_time_bound",
        spins::three_spin_projective_bound(&spec)?,
    );
    probe_summary(&mut s, &om, p.mu0()?)?;
    Ok(s)
}

pub fn many(p: &Params) -> Result<Summary, CliError> {
    let offsets = p
        .list_f64("offsets")?
        .ok_or_else(|| CliError::Config("missing required parameter offsets".into()))?;
    let n = offsets.len();
    if !(2..=4).contains(&n) {
        return Err(CliError::Config(format!(
            "offsets must list 2 to 4 spins, got {n}"
        )));
    }
    let mut b = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = p.f64_or(&format!("b{i}{j}"), 0.0)?;
            b[i][j] = v;
            b[j][i] = v;
        }
    }
    for key in ["b02", "b03", "b12", "b13", "b23"] {
        let (i, j) = (key.as_bytes()[1] - b'0', key.as_bytes()[2] - b'0');
        if p.has(key) && (i as usize >= n || j as usize >= n) {
            return Err(CliError::Config(format!(
                "{key} refers to a spin beyond N = {n}"
            )));
        }
    }
    let spec = ManySpinSpec::new(offsets, b)?;
    let spin = p.usize_or("spin", 0)?;
    let mu0 = p.mu0()?;
    let tau = p.f64_or("tau", 0.01)?;
    let b_eff = spins::many_spin_effective_coupling(&spec, spin)?;
    let (t_max, peak) = spins::many_spin_zeno_optimum(b_eff, mu0, tau)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let short = spins::many_spin_short_time_iz(&spec, spin, tau)?;

    let mut s = Summary::default();
    s.push("system", "many");
    s.push("n_spins", n);
    s.push("spin", spin);
    s.num("b_eff", b_eff);
    s.num("mu0", mu0.value());
    s.num("xi", specfun::xi(mu0));
    s.num("phi", specfun::phi(mu0));
    s.num("tau", tau);
    s.num("short_time_validity", short.validity);
    s.num("t_max_zeno", t_max);
    s.num("qfi_max_zeno", peak);
    Ok(s)
}
