//! Parameter sweeps behind `fig2` to `fig5`.
//!
//! Cells are evaluated in parallel and collected in grid order, so the
//! emitted rows never depend on scheduling.

use std::f64::consts::PI;

use rayon::prelude::*;
use zeno_sense_core::qfi::{self, ProjectedFormula};
use zeno_sense_core::validation::fit_proportional;
use zeno_sense_core::{bloch, specfun, MeasurementSchedule, PrecessionFrequency};

use crate::config::{Axis, Params};
use crate::table::Table;
use crate::{CliError, Summary};

/// Main table, named sidecar tables and the printed summary.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub main: Table,
    pub sidecars: Vec<(&'static str, Table)>,
    pub summary: Summary,
}

impl FigureOutput {
    pub fn sidecar(&self, suffix: &str) -> Option<&Table> {
        self.sidecars
            .iter()
            .find(|(s, _)| *s == suffix)
            .map(|(_, t)| t)
    }
}

pub const FIG2_KEYS: &[&str] = &[
    "omega",
    "mu0",
    "theta_min",
    "theta_max",
    "theta_count",
    "theta_scale",
    "t_min",
    "t_max",
    "t_count",
    "t_scale",
    "contour_level",
    "fit_theta_min",
    "fit_theta_max",
    "spotcheck_seed",
];
pub const FIG3_KEYS: &[&str] = &[
    "omega",
    "theta",
    "wx",
    "wz",
    "mu0",
    "tau_min",
    "tau_max",
    "tau_count",
    "tau_scale",
    "zeno_tau",
    "anti_zeno_tau",
    "trace_t_max",
    "trace_count",
    "spotcheck_seed",
];
pub const FIG4_KEYS: &[&str] = &[
    "omega",
    "theta",
    "wx",
    "wz",
    "mu0",
    "tau_min",
    "tau_max",
    "tau_count",
    "tau_scale",
    "t_min",
    "t_max",
    "t_count",
    "t_scale",
    "formula",
    "spotcheck_seed",
];
pub const FIG5_KEYS: &[&str] = &[
    "omega",
    "theta",
    "mu0",
    "theta_min",
    "theta_max",
    "theta_count",
    "theta_scale",
    "t_min",
    "t_max",
    "t_count",
    "t_scale",
    "fit_min_wxt",
    "spotcheck_seed",
];

fn grid(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (x, y)))
        .collect()
}

fn probe_at(omega: f64, theta: f64) -> Result<PrecessionFrequency, CliError> {
    Ok(PrecessionFrequency::from_angle(omega, theta)?)
}

/// Linear interpolation of the abscissa where `y` crosses `level`.
fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        x0
    } else {
        x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    }
}

pub fn projected_formula(p: &Params) -> Result<ProjectedFormula, CliError> {
    match p.raw("formula").unwrap_or("stroboscopic") {
        "stroboscopic" => Ok(ProjectedFormula::Stroboscopic),
        "full" => Ok(ProjectedFormula::Full),
        other => Err(CliError::Config(format!(
            "formula = {other:?}; expected stroboscopic or full"
        ))),
    }
}

/// Coherent QFI over `(theta, t)` and the `t cos^2 theta` contour law.
pub fn fig2(p: &Params) -> Result<FigureOutput, CliError> {
    let omega = p.omega()?;
    let mu0 = p.mu0()?;
    let thetas = p.axis("theta", Axis::linear(0.02, 1.54, 77))?;
    thetas.require_within("theta", 0.0, PI / 2.0)?;
    let ts = p.axis("t", Axis::linear(0.2, 200.0, 1000))?;
    ts.require_within("t", f64::MIN_POSITIVE, f64::INFINITY)?;
    let (thetas, ts) = (thetas.points(), ts.points());

    let cells = grid(&thetas, &ts);
    let values = cells
        .par_iter()
        .map(|&(theta, t)| Ok(qfi::qfi_coherent(&probe_at(omega, theta)?, mu0, t).value))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let mut main = Table::new(vec!["theta", "t", "qfi_coh"]);
    main.rows = cells
        .iter()
        .zip(&values)
        .map(|(&(theta, t), &q)| vec![theta, t, q])
        .collect();

    let fit_lo = p.f64_or("fit_theta_min", 0.1)?;
    let fit_hi = p.f64_or("fit_theta_max", 1.4)?;
    let t_top = *ts.last().expect("axis has points");
    let c_default = 0.8 * t_top * fit_hi.cos().powi(2) * mu0.value();
    let level = p.f64_or("contour_level", c_default * c_default)?;

    let mut contour = Table::new(vec!["theta", "t", "t_cos2_theta"]);
    let mut pts = Vec::new();
    for (i, &theta) in thetas.iter().enumerate() {
        if theta < fit_lo || theta > fit_hi {
            continue;
        }
        let col = &values[i * ts.len()..(i + 1) * ts.len()];
        let Some(k) = col.iter().position(|&q| q >= level) else {
            continue;
        };
        let t = if k == 0 {
            ts[0]
        } else {
            crossing(ts[k - 1], col[k - 1], ts[k], col[k], level)
        };
        let c2 = theta.cos().powi(2);
        contour.rows.push(vec![theta, t, t * c2]);
        pts.push((1.0 / c2, t));
    }

    let mut summary = Summary::default();
    summary.push("rows", main.rows.len());
    summary.num("contour_level", level);
    summary.push("contour_points", pts.len());
    if pts.len() >= 2 {
        let (c, worst) = fit_proportional(&pts);
        summary.num("contour_t_cos2_theta", c);
        summary.num("contour_fit_residual", worst);
    }
    Ok(FigureOutput {
        main,
        sidecars: vec![("_contour", contour)],
        summary,
    })
}

/// Characteristic decay time over `tau` plus polarization traces.
pub fn fig3(p: &Params) -> Result<FigureOutput, CliError> {
    let om = p.probe()?;
    let mu0 = p.mu0()?;
    let taus = p.axis("tau", Axis::linear(0.0, om.period(), 1001))?;
    taus.require_within("tau", 0.0, f64::INFINITY)?;
    let taus = taus.points();

    let tcs: Vec<f64> = taus
        .par_iter()
        .map(|&tau| bloch::characteristic_time(&om, tau))
        .collect();
    let mut main = Table::new(vec!["tau", "t_c"]);
    main.rows = taus.iter().zip(&tcs).map(|(&a, &b)| vec![a, b]).collect();

    let zeno_tau = p.f64_or("zeno_tau", 0.1)?;
    let anti_tau = match p.f64_opt("anti_zeno_tau")? {
        Some(v) => v,
        None => bloch::anti_zeno_tau(&om)?,
    };
    if !(zeno_tau > 0.0 && anti_tau > 0.0) {
        return Err(CliError::Config(
            "trace stroboscopic times must be positive".into(),
        ));
    }
    let trace_ts = Axis::linear(
        0.0,
        p.f64_or("trace_t_max", 10.0)?,
        p.usize_or("trace_count", 1001)?,
    );
    trace_ts.validate("trace_t")?;
    let traces = trace_ts
        .points()
        .par_iter()
        .map(|&t| {
            let coh = bloch::evolve_coherent(&om, mu0, t).mz;
            let z = bloch::evolve_projected(&om, mu0, &MeasurementSchedule::new(zeno_tau, t)?);
            let a = bloch::evolve_projected(&om, mu0, &MeasurementSchedule::new(anti_tau, t)?);
            Ok(vec![t, coh, z, a])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut trace_table = Table::new(vec!["t", "mu_z_coherent", "mu_z_zeno", "mu_z_anti_zeno"]);
    trace_table.rows = traces;

    let (k_min, tc_min) =
        tcs.iter().enumerate().fold(
            (0, f64::INFINITY),
            |(k, m), (i, &v)| if v < m { (i, v) } else { (k, m) },
        );
    let mut summary = Summary::default();
    summary.push("rows", main.rows.len());
    summary.push("inf_rows", tcs.iter().filter(|v| v.is_infinite()).count());
    summary.num("tau_at_min_t_c", taus[k_min]);
    summary.num("min_t_c", tc_min);
    summary.num("anti_zeno_tau", anti_tau);
    summary.num("zeno_tau", zeno_tau);
    Ok(FigureOutput {
        main,
        sidecars: vec![("_traces", trace_table)],
        summary,
    })
}

/// Projected QFI over `(tau, t)` and the closed-form ridge.
pub fn fig4(p: &Params) -> Result<FigureOutput, CliError> {
    let om = p.probe()?;
    let mu0 = p.mu0()?;
    let formula = projected_formula(p)?;
    let taus = p.axis("tau", Axis::linear(0.01, 0.99, 99))?;
    taus.require_within("tau", f64::MIN_POSITIVE, f64::INFINITY)?;
    let ts = p.axis("t", Axis::linear(0.5, 200.0, 400))?;
    ts.require_within("t", 0.0, f64::INFINITY)?;
    let (taus, ts) = (taus.points(), ts.points());

    let cells = grid(&taus, &ts);
    let values = cells
        .par_iter()
        .map(|&(tau, t)| Ok(qfi::qfi_projected(&om, mu0, tau, t, formula)?.value))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let mut main = Table::new(vec!["tau", "t", "qfi_proj"]);
    main.rows = cells
        .iter()
        .zip(&values)
        .map(|(&(tau, t), &q)| vec![tau, t, q])
        .collect();

    let xi = specfun::xi(mu0);
    let mut ridge = Table::new(vec!["tau", "t_max", "qfi_proj_max", "t_c"]);
    let mut xi_dev = 0.0_f64;
    let mut cells_off = 0usize;
    let mut compared = 0usize;
    for (i, &tau) in taus.iter().enumerate() {
        let tm = qfi::t_max(&om, mu0, tau)?;
        let fm = qfi::qfi_projected_max(&om, mu0, tau)?;
        let tc = bloch::characteristic_time(&om, tau);
        ridge.rows.push(vec![tau, tm, fm, tc]);
        if tc.is_finite() && tc > 0.0 {
            xi_dev = xi_dev.max((tm / tc - xi).abs());
        }
        let (lo, hi) = (ts[0], ts[ts.len() - 1]);
        if tm.is_finite() && tm > lo && tm < hi {
            let row = &values[i * ts.len()..(i + 1) * ts.len()];
            let arg = (0..row.len()).fold(0, |k, j| if row[j] > row[k] { j } else { k });
            let near = (0..ts.len())
                .min_by(|&a, &b| (ts[a] - tm).abs().total_cmp(&(ts[b] - tm).abs()))
                .expect("axis has points");
            cells_off = cells_off.max(arg.abs_diff(near));
            compared += 1;
        }
    }

    let zeno = taus[0];
    let zeno_peak = qfi::qfi_projected_max(&om, mu0, zeno)?;
    let zeno_limit = 4.0 * specfun::phi(mu0) / (om.wx() * om.wx());
    let mut summary = Summary::default();
    summary.push("rows", main.rows.len());
    summary.num("xi", xi);
    summary.num("ridge_xi_max_dev", xi_dev);
    summary.push("ridge_rows_in_grid", compared);
    summary.push("ridge_argmax_max_cells", cells_off);
    summary.num("zeno_tau", zeno);
    summary.num("zeno_peak", zeno_peak);
    summary.num("zeno_limit", zeno_limit);
    summary.num(
        "zeno_rel_dev",
        ((zeno_peak - zeno_limit) / zeno_limit).abs(),
    );
    Ok(FigureOutput {
        main,
        sidecars: vec![("_ridge", ridge)],
        summary,
    })
}

/// Ratio of peak projected to long-time coherent QFI over `(theta, t)`,
/// its unit level set, and the crossover at the fixed angle.
pub fn fig5(p: &Params) -> Result<FigureOutput, CliError> {
    let omega = p.omega()?;
    let mu0 = p.mu0()?;
    if mu0.value() == 0.0 {
        return Err(CliError::Config("fig5 needs mu0 > 0".into()));
    }
    let thetas = p.axis("theta", Axis::linear(0.3, 1.55, 126))?;
    thetas.require_within("theta", 0.0, PI / 2.0 - 1e-9)?;
    let ts = p.axis("t", Axis::linear(0.5, 100.0, 200))?;
    ts.require_within("t", f64::MIN_POSITIVE, f64::INFINITY)?;
    let (thetas, ts) = (thetas.points(), ts.points());

    let cells = grid(&thetas, &ts);
    let values = cells
        .par_iter()
        .map(|&(theta, t)| Ok(qfi::qfi_ratio_max(&probe_at(omega, theta)?, mu0, t)?))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let mut main = Table::new(vec!["theta", "t", "ratio"]);
    main.rows = cells
        .iter()
        .zip(&values)
        .map(|(&(theta, t), &r)| vec![theta, t, r])
        .collect();

    // The ratio grows with theta at fixed t.
    let min_wxt = p.f64_or("fit_min_wxt", 10.0)?;
    let mut boundary = Table::new(vec!["t", "theta", "wx", "wz", "c_local"]);
    let mut pts = Vec::new();
    let at = |i: usize, j: usize| values[i * ts.len() + j];
    for (j, &t) in ts.iter().enumerate() {
        let Some(i) = (1..thetas.len()).find(|&i| at(i - 1, j) < 1.0 && at(i, j) >= 1.0) else {
            continue;
        };
        let theta = crossing(
            thetas[i - 1],
            at(i - 1, j).ln(),
            thetas[i],
            at(i, j).ln(),
            0.0,
        );
        let (wx, wz) = (omega * theta.cos(), omega * theta.sin());
        let c_local = if wx * t > 1.0 {
            wz / (wx * (wx * t - 1.0).sqrt())
        } else {
            f64::NAN
        };
        boundary.rows.push(vec![t, theta, wx, wz, c_local]);
        if wx * t >= min_wxt.max(1.0) {
            pts.push((wx * (wx * t - 1.0).sqrt(), wz));
        }
    }

    let theta0 = p.f64_or("theta", 0.9 * PI / 2.0)?;
    let om0 = probe_at(omega, theta0)?;
    let bound = qfi::projective_wins_time_bound(&om0, mu0);
    let row = ts
        .iter()
        .map(|&t| qfi::qfi_ratio_max(&om0, mu0, t))
        .collect::<Result<Vec<f64>, _>>()?;

    let mut summary = Summary::default();
    summary.push("rows", main.rows.len());
    summary.push("boundary_points", boundary.rows.len());
    summary.push("boundary_fit_points", pts.len());
    if pts.len() >= 2 {
        let (c, worst) = fit_proportional(&pts);
        summary.num("boundary_c", c);
        summary.num("boundary_fit_residual", worst);
    }
    summary.num("crossover_theta", theta0);
    summary.num("crossover_t_bound", bound);
    summary.num(
        "crossover_t_low_polarization",
        qfi::low_polarization_time_bound(&om0),
    );
    if let Some(k) = (1..ts.len()).find(|&k| row[k - 1] > 1.0 && row[k] <= 1.0) {
        let near = (0..ts.len())
            .min_by(|&a, &b| (ts[a] - bound).abs().total_cmp(&(ts[b] - bound).abs()))
            .expect("axis has points");
        summary.num("crossover_t_grid", ts[k]);
        summary.push("crossover_cells", k.abs_diff(near));
    }
    Ok(FigureOutput {
        main,
        sidecars: vec![("_boundary", boundary)],
        summary,
    })
}
