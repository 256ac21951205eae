//! `hydrocs`: density grids, verification suites, semiclassical diagnostics
//! and saddle-point demos.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage error, 3 numerical failure.

mod diagnose;
mod density;
mod saddle_demo;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hydrocs::verify::{run_suite, Suite, Thresholds};
use hydrocs::{Complex64, Error};

#[derive(Parser, Debug)]
#[command(name = "hydrocs", version, about = "Hydrogenic coherent-state wave packets")]
struct Cli {
    /// Worker threads for grid sampling (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample a packet on a grid and write CSV plus a JSON sidecar.
    Density(density::Args),
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Semiclassical diagnostics of coherent-state families.
    Diagnose(diagnose::Args),
    /// Saddle-point benchmarks against exact values.
    SaddleDemo(saddle_demo::Args),
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file replacing the built-in thresholds.
    #[arg(long)]
    thresholds: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SuiteArg {
    All,
    Specfun,
    Hydrogenic,
    Packet,
    Saddle,
    Cs,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Specfun => Suite::Specfun,
            SuiteArg::Hydrogenic => Suite::Hydrogenic,
            SuiteArg::Packet => Suite::Packet,
            SuiteArg::Saddle => Suite::Saddle,
            SuiteArg::Cs => Suite::Cs,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    Verify,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

/// Bad parameters are usage errors, everything else is numerical.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Grid(_) | Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

pub fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

/// `"4"`, `"4@0.3"` (modulus@phase in radians).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}' in '{s}'"));
    match s.split_once('@') {
        Some((m, p)) => Ok(Complex64::from_polar(num(m)?, num(p)?)),
        None => Ok(Complex64::new(num(s)?, 0.0)),
    }
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let t = match &a.thresholds {
        Some(p) => Thresholds::load(p)?,
        None => Thresholds::default(),
    };
    let report = run_suite(a.suite.into(), &t);
    for c in &report.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        match &c.error {
            Some(e) => println!("{status} {}: {e}", c.name),
            None => println!("{status} {}: {:.4e} ({})", c.name, c.measured, c.threshold),
        }
    }
    println!(
        "suite {}: {} ({} checks, {:.1} s)",
        report.suite.name(),
        if report.pass { "pass" } else { "FAIL" },
        report.checks.len(),
        report.wall_time_s
    );
    if let Some(p) = &a.out {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Numeric(e.to_string()))?;
        std::fs::write(p, text).map_err(|e| io_err(p, e))?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.cmd {
        Cmd::Density(a) => density::run(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Diagnose(a) => diagnose::run(a),
        Cmd::SaddleDemo(a) => saddle_demo::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Numeric(m) => eprintln!("numerical failure: {m}"),
                Failure::Verify => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_flags() {
        assert_eq!(parse_complex("4").unwrap(), Complex64::new(4.0, 0.0));
        let z = parse_complex("2@1.5707963267948966").unwrap();
        assert!((z - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(parse_complex("2@x").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(Failure::from(Error::Domain("x".into())).code(), 2);
        assert_eq!(Failure::from(Error::NonFinite("x")).code(), 3);
        assert_eq!(Failure::Verify.code(), 1);
    }
}
