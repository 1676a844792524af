use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mastr::{MultilevelSolver, Problem64, ProblemKind};
use mastr_bench::{oracle_projected_gradient, run, verify, BenchError, ConfigArgs, RunConfig};

/// Multilevel trust-region benchmarks for bound-constrained problems.
#[derive(Parser)]
#[command(name = "mastr-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one benchmark and write the `its,g_trun,g_loc` trace CSV
    Run(ConfigArgs),
    /// Run the sampled property suites and report pass/fail per property
    Verify(ConfigArgs),
    /// Compare solver solutions with the projected-gradient oracle (small instances)
    Oracle(ConfigArgs),
}

const EXIT_USAGE: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_PROPERTY: u8 = 3;
const ORACLE_MAX_ITS: usize = 1_000_000;
const ORACLE_AGREEMENT: f64 = 1e-6;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, BenchError> {
    match command {
        Command::Run(args) => cmd_run(&RunConfig::resolve(&args, RunConfig::default())?),
        Command::Verify(args) => cmd_verify(&RunConfig::resolve(&args, RunConfig::default())?),
        Command::Oracle(args) => {
            let base = RunConfig { problem: Some(ProblemKind::Membrane), levels: 2, ..RunConfig::default() };
            cmd_oracle(&RunConfig::resolve(&args, base)?)
        }
    }
}

fn cmd_run(cfg: &RunConfig) -> Result<u8, BenchError> {
    let out = run(cfg)?;
    for (name, result) in [("rmtr", &out.rmtr), ("mastr", &out.mastr)] {
        if let Some(r) = result {
            println!(
                "{name}: converged={} vcycles={} E0={:.3e} E={:.3e}",
                r.converged,
                r.vcycles,
                r.initial_criticality,
                r.final_criticality()
            );
        }
    }
    println!("trace written to {}", out.csv.display());
    Ok(if out.converged() { 0 } else { EXIT_NOT_CONVERGED })
}

fn cmd_verify(cfg: &RunConfig) -> Result<u8, BenchError> {
    let report = verify(cfg)?;
    print!("{report}");
    Ok(if report.all_passed() { 0 } else { EXIT_PROPERTY })
}

fn cmd_oracle(cfg: &RunConfig) -> Result<u8, BenchError> {
    let mut code = 0;
    for kind in cfg.problems() {
        let problem = Problem64::build(kind, cfg.levels, cfg.coarse_cells)?;
        let oracle = oracle_projected_gradient(&problem, cfg.solve.tol, ORACLE_MAX_ITS)?;
        println!(
            "{kind}: oracle converged={} iterations={} E={:.3e}",
            oracle.converged, oracle.iterations, oracle.criticality
        );
        if !oracle.converged {
            code = code.max(EXIT_NOT_CONVERGED);
        }
        for variant in cfg.variant.variants() {
            let result = MultilevelSolver::new(&problem, variant, cfg.solve)?.solve()?;
            let gap = result.x_final.iter().zip(&oracle.x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let agrees = gap <= ORACLE_AGREEMENT;
            println!(
                "{kind}/{variant}: converged={} vcycles={} max|x - x_oracle|={gap:.3e} {}",
                result.converged,
                result.vcycles,
                if agrees { "PASS" } else { "FAIL" }
            );
            if !result.converged {
                code = code.max(EXIT_NOT_CONVERGED);
            }
            if !agrees && kind == ProblemKind::Membrane {
                code = EXIT_PROPERTY;
            }
        }
    }
    Ok(code)
}
