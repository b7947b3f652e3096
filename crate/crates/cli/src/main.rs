//! `nctorus`: command-line driver for the nctorus-core routines.
//!
//! Exit status is 0 on success, 2 on invalid input and 3 on numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;
use output::Format;

pub const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "nctorus", version, about = "Poisson summation on lattices and noncommutative tori")]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads for parallel kernels.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Report format; `mu` defaults to text, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run the invariant suite of the subcommand's module instead.
    #[arg(long, global = true)]
    selftest: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Poisson summation for an even Gaussian on the line.
    #[command(args_override_self = true)]
    Poisson1d(Poisson1dArgs),
    /// Poisson summation on the lattice Z + τZ.
    #[command(args_override_self = true)]
    Poisson2d(Poisson2dArgs),
    /// Number of (m, n) with m² + n² = r.
    #[command(args_override_self = true)]
    Mu(MuArgs),
    /// Continued fraction and convergents of θ.
    #[command(args_override_self = true)]
    Cf(CfArgs),
    /// Effros–Shen Bratteli levels of θ.
    #[command(args_override_self = true)]
    Bratteli(BratteliArgs),
    /// Rieffel projection defects at convergents of θ.
    #[command(args_override_self = true)]
    Rieffel(RieffelArgs),
    /// Lattice sum against the trace of the assembled operator A_f.
    #[command(args_override_self = true)]
    Theorem1(Theorem1Args),
    /// Lattice-point counts in ellipses and the circle-problem error term.
    #[command(args_override_self = true)]
    Circle(CircleArgs),
    /// Spectrum of the truncated Gauss–Kuzmin–Wirsing operator.
    #[command(args_override_self = true)]
    GkwSpectrum(SpectrumArgs),
    /// det(1 − L_s²) from the truncated spectrum.
    #[command(args_override_self = true)]
    ZetaDet(ZetaArgs),
    /// Exploratory spectra of exp(−Ĥ_D(s)) against L_s. No verdict.
    #[command(args_override_self = true)]
    Conjecture(ConjectureArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Poisson1d(_) => "poisson1d",
            Command::Poisson2d(_) => "poisson2d",
            Command::Mu(_) => "mu",
            Command::Cf(_) => "cf",
            Command::Bratteli(_) => "bratteli",
            Command::Rieffel(_) => "rieffel",
            Command::Theorem1(_) => "theorem1",
            Command::Circle(_) => "circle",
            Command::GkwSpectrum(_) => "gkw-spectrum",
            Command::ZetaDet(_) => "zeta-det",
            Command::Conjecture(_) => "conjecture",
        }
    }

    fn run(&self) -> Result<output::Outcome, Failure> {
        match self {
            Command::Poisson1d(a) => poisson1d(a),
            Command::Poisson2d(a) => poisson2d(a),
            Command::Mu(a) => mu(a),
            Command::Cf(a) => cf(a),
            Command::Bratteli(a) => bratteli(a),
            Command::Rieffel(a) => rieffel(a),
            Command::Theorem1(a) => theorem1(a),
            Command::Circle(a) => circle(a),
            Command::GkwSpectrum(a) => gkw_spectrum(a),
            Command::ZetaDet(a) => zeta_det(a),
            Command::Conjecture(a) => conjecture(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Validation = 2,
    Numeric = 3,
}

fn execute(argv: Vec<String>) -> Status {
    let argv = match config::expand(argv, &nctorus_core::selftest::SUITES) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return Status::Validation;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let status = if e.use_stderr() { Status::Validation } else { Status::Ok };
            let _ = e.print();
            return status;
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return Status::Validation;
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: cannot start thread pool: {e}");
        return Status::Numeric;
    }
    let name = cli.command.name();
    let outcome = if cli.selftest {
        output::selftest(name)
    } else {
        cli.command.run()
    };
    let result = outcome.and_then(|o| {
        let format = cli.format.unwrap_or(if name == "mu" { Format::Text } else { Format::Json });
        let passed = o.passed;
        output::emit(name, &o, format, cli.output.as_deref())?;
        Ok(passed)
    });
    match result {
        Ok(true) => Status::Ok,
        Ok(false) => Status::Numeric,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.status
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(execute(std::env::args().collect()) as u8)
}
