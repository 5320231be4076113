use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zeno_sense::config::Params;
use zeno_sense::figures::{self, FigureOutput};
use zeno_sense::table::sidecar;
use zeno_sense::{spins, spotcheck, CliError, Summary};
use zeno_sense_core::validation::{self, Model};

#[derive(Parser)]
#[command(
    name = "zeno-sense",
    version,
    about = "Coupling estimation with a stroboscopically measured qubit probe"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherent QFI over (theta, t)
    Fig2(FigureArgs),
    /// Characteristic decay time over tau, plus polarization traces
    Fig3(FigureArgs),
    /// Projected QFI over (tau, t), plus the peak ridge
    Fig4(FigureArgs),
    /// Ratio of projected to coherent peak QFI over (theta, t)
    Fig5(FigureArgs),
    /// Run every closed-form against oracle check
    Validate,
    /// Spin-system calculators
    Spins {
        #[command(subcommand)]
        system: SpinSystem,
    },
}

#[derive(Args)]
struct FigureArgs {
    /// Config file of key = value lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; sidecar tables are written next to it
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-check K random cells against the density-matrix oracle
    #[arg(long, value_name = "K", default_value_t = 0)]
    oracle_spotcheck: usize,
    /// Parameter override, e.g. --param tau_count=50
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum SpinSystem {
    /// Heteronuclear pair under cross-polarization
    Two { params: Vec<String> },
    /// Two protons coupled to one carbon
    Three { params: Vec<String> },
    /// Up to four coupled spins in the Zeno regime
    Many { params: Vec<String> },
}

fn load(name: &str, keys: &'static [&'static str], args: &FigureArgs) -> Result<Params, CliError> {
    let mut p = Params::new(name, keys);
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|_| CliError::Config(format!("cannot read config file {}", path.display())))?;
        p.apply_file(&text)?;
    }
    for kv in &args.params {
        p.apply_pair(kv)?;
    }
    Ok(p)
}

fn run_figure(
    name: &str,
    keys: &'static [&'static str],
    compute: fn(&Params) -> Result<FigureOutput, CliError>,
    args: &FigureArgs,
) -> Result<(), CliError> {
    let p = load(name, keys, args)?;
    let out = compute(&p)?;
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    out.main.write(&path)?;
    for (suffix, table) in &out.sidecars {
        table.write(&sidecar(&path, suffix))?;
    }
    print!("{}", out.summary);
    if args.oracle_spotcheck > 0 {
        let report = spotcheck::run(name, &p, &out, args.oracle_spotcheck)?;
        println!("{report}");
        if !report.passed() {
            return Err(CliError::Failed(format!(
                "{name}: oracle spot-check above tolerance"
            )));
        }
    }
    Ok(())
}

fn run_spins(
    keys: &'static [&'static str],
    compute: fn(&Params) -> Result<Summary, CliError>,
    pairs: &[String],
) -> Result<(), CliError> {
    let mut p = Params::new("spins", keys);
    for kv in pairs {
        p.apply_pair(kv)?;
    }
    print!("{}", compute(&p)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fig2(a) => run_figure("fig2", figures::FIG2_KEYS, figures::fig2, &a),
        Command::Fig3(a) => run_figure("fig3", figures::FIG3_KEYS, figures::fig3, &a),
        Command::Fig4(a) => run_figure("fig4", figures::FIG4_KEYS, figures::fig4, &a),
        Command::Fig5(a) => run_figure("fig5", figures::FIG5_KEYS, figures::fig5, &a),
        Command::Validate => {
            let report = validation::run_all(&Model::default());
            println!("{report}");
            if report.all_passed() {
                Ok(())
            } else {
                let names: Vec<&str> = report.failures().map(|c| c.name).collect();
                Err(CliError::Failed(format!(
                    "failed checks: {}",
                    names.join(", ")
                )))
            }
        }
        Command::Spins { system } => match system {
            SpinSystem::Two { params } => run_spins(spins::TWO_KEYS, spins::two, &params),
            SpinSystem::Three { params } => run_spins(spins::THREE_KEYS, spins::three, &params),
            SpinSystem::Many { params } => run_spins(spins::MANY_KEYS, spins::many, &params),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zeno-sense: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
