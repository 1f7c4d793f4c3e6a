//! `cocycle`: runs scenario files of cocycle checks and exposes a few direct computations.
//!
//! Exit status: 0 when every check passes, 1 when a check fails or errors, 2 for unreadable
//! or invalid input.

mod checks;
mod error;
mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use cocycle_core::bm_kernel::{b_n, classical_prefactor, dbar_closed_check, reproducing_integral, sphere_probes};
use cocycle_core::cocycle::cf_map;
use cocycle_core::forms::complex_json;
use cocycle_core::invariant_poly::{Basis, SymFun};
use cocycle_core::{parallel, Complex64};
use serde_json::json;

use crate::error::CliError;
use crate::report::Report;
use crate::scenario::{CheckKind, InvariantFile, InvariantKind, Scenario};

#[derive(Parser)]
#[command(name = "cocycle", version, about = "Cocycle-level characteristic class checks")]
struct Cli {
    /// Worker threads for sample evaluation.
    #[arg(long, global = true, env = "COCYCLE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymfunKind {
    Todd,
    Chern,
    /// Newton conversion of the power sum `T_k` to elementary symmetric polynomials.
    Convert,
}

#[derive(Clone, Copy, ValueEnum)]
enum InvariantArg {
    Todd,
    Chern,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    scenario: PathBuf,
    /// Report path; defaults to the scenario's `output`, else `cocycle-report.json`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Suppress the per-check summary on stdout.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a scenario.
    Run(ScenarioArgs),
    /// Exact expansion of a Todd or Chern character component in both bases.
    Symfun {
        kind: SymfunKind,
        k: usize,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Bochner-Martinelli kernel checks; prints a JSON report.
    BmCheck {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        probes: usize,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 32)]
        quad_order: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Print the Dold-Kan labels of the Chern-Weil cocycle on a chart simplex of a scenario.
    ToddCocycle {
        scenario: PathBuf,
        #[arg(long)]
        simplex: String,
        #[arg(long, value_enum, default_value = "todd")]
        kind: InvariantArg,
        #[arg(long)]
        k: usize,
    },
    /// Run only the telescoping checks of a scenario.
    VerifyCocycle(ScenarioArgs),
    /// Run only the group-invariant checks of a scenario.
    GroupInvariant(ScenarioArgs),
    /// Run only the witness checks of a scenario.
    Witness(ScenarioArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        parallel::set_threads(t);
    }
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run(args) => run_scenario(&args, |_| true),
        Command::VerifyCocycle(args) => run_scenario(&args, |k| matches!(k, CheckKind::Telescoping { .. })),
        Command::GroupInvariant(args) => run_scenario(&args, |k| matches!(k, CheckKind::GroupInvariant { .. })),
        Command::Witness(args) => run_scenario(&args, |k| matches!(k, CheckKind::Witness { .. })),
        Command::Symfun { kind, k, json } => {
            let f = match kind {
                SymfunKind::Todd => checks::invariant_symfun(InvariantKind::Todd, k)?,
                SymfunKind::Chern => checks::invariant_symfun(InvariantKind::Chern, k)?,
                SymfunKind::Convert if k == 0 => return Err(CliError::Validation("degree k must be at least 1".into())),
                SymfunKind::Convert => SymFun::generator(Basis::PowerSum, k),
            };
            let (e, p) = (f.convert(Basis::Elementary), f.convert(Basis::PowerSum));
            if json {
                let out = json!({ "elementary": e.to_json(), "power_sum": p.to_json(), "text": format!("{e} = {p}") });
                println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
            } else {
                println!("{e} = {p}");
            }
            Ok(0)
        }
        Command::BmCheck { n, probes, step, quad_order, radius } => {
            let z: Vec<Complex64> = (0..n).map(|j| Complex64::new(0.1 * (j as f64 + 1.0), -0.05 * j as f64)).collect();
            let report = dbar_closed_check(n, &z, &sphere_probes(&z, radius, probes), step)?;
            let mut pass = report.pass;
            let reproducing = if n == 2 {
                let value = reproducing_integral(&z, radius, quad_order, classical_prefactor(2))?;
                let error = (value - 1.0).norm();
                pass &= error <= 1e-3;
                json!({
                    "radius": radius,
                    "order": quad_order,
                    "integral": complex_json(value),
                    "error": error,
                    "integral_b2": complex_json(reproducing_integral(&z, radius, quad_order, b_n(2))?),
                })
            } else {
                serde_json::Value::Null
            };
            let out = json!({
                "n": n,
                "b_n": complex_json(b_n(n)),
                "classical_prefactor": complex_json(classical_prefactor(n)),
                "dbar": report.to_json(),
                "reproducing": reproducing,
                "pass": pass,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
            Ok(if pass { 0 } else { 1 })
        }
        Command::ToddCocycle { scenario, simplex, kind, k } => {
            let scn = Scenario::load(&scenario)?;
            let s = scn.simplices.get(&simplex).ok_or_else(|| CliError::Validation(format!("undefined simplex `{simplex}`")))?;
            let kind = match kind {
                InvariantArg::Todd => InvariantKind::Todd,
                InvariantArg::Chern => InvariantKind::Chern,
            };
            let t = scenario::invariant(&InvariantFile { kind, k })?;
            let dk = cf_map(s, &t)?;
            let out = json!({ "simplex": simplex, "dim": s.level(), "invariant": t.to_json(), "labels": dk.to_json() });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
            Ok(0)
        }
    }
}

fn run_scenario(args: &ScenarioArgs, select: impl Fn(&CheckKind) -> bool) -> Result<u8, CliError> {
    let start = Instant::now();
    let scn = Scenario::load(&args.scenario)?;
    let selected: Vec<_> = scn.file.checks.iter().filter(|c| select(&c.kind)).collect();
    if selected.is_empty() {
        return Err(CliError::Validation(format!("{} has no checks of the requested kind", args.scenario.display())));
    }
    let mut report = Report {
        scenario: scn.file.name.clone(),
        sha256: scn.sha256.clone(),
        threads: parallel::threads(),
        checks: Vec::new(),
        total_seconds: 0.0,
    };
    let output = args
        .output
        .clone()
        .or_else(|| scn.file.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cocycle-report.json"));
    for check in selected {
        report.checks.push(checks::run_check(&scn, check));
        report.total_seconds = start.elapsed().as_secs_f64();
        // partial report after every check, so an interrupted run leaves something behind
        report.write(Path::new(&output))?;
    }
    if !args.quiet {
        print!("{}", report.summary());
        println!("report: {}", output.display());
    }
    Ok(if report.passed() { 0 } else { 1 })
}
