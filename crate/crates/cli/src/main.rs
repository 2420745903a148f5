use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polplace_cli::commands::{
    compare, intended_spectrum, parse_gain, place, render_compare_table, render_verify, verify, write_compare_csv,
    MethodArg,
};
use polplace_cli::files::{load_system, parse_pole_list, PlanFile, SystemFile};
use polplace_cli::generate::{generate, Family};
use polplace_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "polplace", version, about = "Single-input pole placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a feedback gain and print a JSON report
    Place {
        /// System file (JSON), or - for stdin
        #[arg(long)]
        system: String,
        /// Plan file with "poles" or "groups", or - for stdin
        #[arg(long)]
        plan: String,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Pulled subset for the general method, e.g. "-1+1i,-1-1i"
        #[arg(long, allow_hyphen_values = true)]
        pulled: Option<String>,
    },
    /// Check a gain against the plan's eigenvalues; exits 1 if it misses
    Verify {
        #[arg(long)]
        system: String,
        #[arg(long)]
        plan: String,
        /// Inline list ("-2,-3"), or a path (or -) to a JSON list or place report
        #[arg(long, allow_hyphen_values = true)]
        gain: String,
    },
    /// Print a seeded random system file
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Family::Dense)]
        family: Family,
    },
    /// Conditioning study: Ackermann, Bass-Gura and sequential side by side
    Compare {
        /// Comma-separated state dimensions
        #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Family::Dense)]
        family: Family,
    },
}

fn stdin_once(paths: &[&str]) -> CliResult<()> {
    if paths.iter().filter(|p| **p == "-").count() > 1 {
        return Err(CliError::Input("only one input can come from stdin".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<u8> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Place {
            system,
            plan,
            method,
            pulled,
        } => {
            stdin_once(&[&system, &plan])?;
            let sys = load_system(&system)?;
            let plan = PlanFile::load(&plan)?;
            let pulled = pulled.as_deref().map(parse_pole_list).transpose()?;
            let report = place(&sys, &plan, method, pulled.as_ref())?;
            for w in &report.diagnostics.warnings {
                eprintln!("warning: {}", w.message);
            }
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| CliError::Output(e.to_string()))?;
            writeln!(out)?;
            Ok(0)
        }
        Command::Verify { system, plan, gain } => {
            stdin_once(&[&system, &plan, &gain])?;
            let sys = load_system(&system)?;
            let targets = intended_spectrum(&sys, &PlanFile::load(&plan)?)?;
            let report = verify(&sys, &parse_gain(&gain)?, &targets)?;
            write!(out, "{}", render_verify(&report))?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Gen { n, seed, family } => {
            let sys = generate(n, seed, family)?;
            let file = SystemFile::from_system(&sys, Some(format!("{} seed={seed}", family.name())));
            serde_json::to_writer_pretty(&mut out, &file).map_err(|e| CliError::Output(e.to_string()))?;
            writeln!(out)?;
            Ok(0)
        }
        Command::Compare {
            n,
            trials,
            seed,
            family,
        } => {
            let rows = compare(&n, trials, seed, family);
            write!(out, "{}", render_compare_table(&rows))?;
            writeln!(out)?;
            write_compare_csv(&rows, &mut out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
