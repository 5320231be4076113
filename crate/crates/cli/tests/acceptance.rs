//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p zeno-sense --test acceptance -- --nocapture` to see
//! the lines.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use zeno_sense::config::Params;
use zeno_sense::figures;
use zeno_sense_core::validation::{self, Check};

struct Ledger {
    failed: Vec<String>,
}

impl Ledger {
    fn record(&mut self, id: u32, title: &str, passed: bool, detail: String) {
        println!(
            "criterion {id:>2} {} {title}: {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
        if !passed {
            self.failed.push(format!("{id} {title}"));
        }
    }

    fn record_checks(
        &mut self,
        id: u32,
        title: &str,
        checks: &[Check],
        extra: Option<(bool, String)>,
    ) {
        let mut passed = checks.iter().all(Check::passed);
        let mut parts: Vec<String> = checks
            .iter()
            .map(|c| format!("{} {:.3e} (bound {:.1e})", c.name, c.observed, c.bound))
            .collect();
        if let Some((ok, text)) = extra {
            passed &= ok;
            parts.push(text);
        }
        self.record(id, title, passed, parts.join("; "));
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn figure(name: &str, keys: &'static [&'static str], pairs: &[&str]) -> figures::FigureOutput {
    let mut p = Params::new(name, keys);
    for kv in pairs {
        p.apply_pair(kv).unwrap();
    }
    let compute = match name {
        "fig2" => figures::fig2,
        "fig3" => figures::fig3,
        "fig4" => figures::fig4,
        _ => figures::fig5,
    };
    compute(&p).unwrap()
}

fn run_twice(cmd: &str, dir: &Path) -> Result<(), String> {
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("{cmd}_{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_zeno-sense"))
            .arg(cmd)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{cmd} exited with {}", status.status));
        }
        let mut files = Vec::new();
        for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            if name.starts_with(&format!("{cmd}_{run}")) {
                files.push((
                    name.replacen(&format!("_{run}"), "", 1),
                    fs::read(&path).unwrap(),
                ));
            }
        }
        files.sort();
        outputs.push(files);
    }
    if outputs[0].is_empty() {
        return Err(format!("{cmd} wrote no files"));
    }
    if outputs[0] != outputs[1] {
        return Err(format!("{cmd} output differs between runs"));
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let mut ledger = Ledger { failed: Vec::new() };

    let (c, dt) = timed(|| validation::polarization_eigen_equivalence(10_000, 1));
    ledger.record_checks(
        1,
        "polarization QFI equals eigen QFI",
        &[c],
        Some((
            dt < Duration::from_secs(5),
            format!("runtime {:.2} s (< 5 s)", dt.as_secs_f64()),
        )),
    );

    ledger.record_checks(
        2,
        "coherent closed form",
        &[
            validation::coherent_vs_finite_difference(100, 2),
            validation::coherent_long_time(),
        ],
        None,
    );

    ledger.record_checks(
        3,
        "projected closed forms",
        &validation::projected_vs_oracle(50, 3),
        None,
    );

    ledger.record_checks(4, "xi endpoints", &[validation::xi_endpoints()], None);

    ledger.record_checks(5, "Zeno plateau", &validation::zeno_plateau(), None);

    ledger.record_checks(6, "anti-Zeno minimizer", &validation::anti_zeno(), None);

    ledger.record_checks(7, "peak identity", &validation::peak_identity(), None);

    let fig5 = figure("fig5", figures::FIG5_KEYS, &[]);
    let resid = fig5
        .summary
        .get_f64("boundary_fit_residual")
        .unwrap_or(f64::NAN);
    ledger.record_checks(
        8,
        "crossover consistency",
        &validation::crossover(),
        Some((
            resid < 0.1,
            format!("fig5 grid boundary residual {resid:.3e} (bound 1.0e-1)"),
        )),
    );

    let (c, dt) = timed(validation::two_spin_mapping);
    ledger.record_checks(
        9,
        "two-spin mapping",
        &[c],
        Some((
            dt < Duration::from_secs(10),
            format!("runtime {:.2} s (< 10 s)", dt.as_secs_f64()),
        )),
    );

    ledger.record_checks(
        10,
        "three-spin reduction",
        &validation::three_spin_reduction(),
        None,
    );

    ledger.record_checks(
        11,
        "short-time expansion",
        &validation::trotter_short_time(4),
        None,
    );

    let dir = tempfile::tempdir().unwrap();
    let mut problems = Vec::new();
    for cmd in ["fig2", "fig3", "fig4", "fig5"] {
        if let Err(e) = run_twice(cmd, dir.path()) {
            problems.push(e);
        }
    }
    let detail = if problems.is_empty() {
        "fig2..fig5 byte-identical across two runs".to_string()
    } else {
        problems.join("; ")
    };
    ledger.record(12, "determinism", problems.is_empty(), detail);

    assert!(
        ledger.failed.is_empty(),
        "failed criteria: {:?}",
        ledger.failed
    );
}
