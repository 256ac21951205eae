use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use hydrocs::saddlepoint::{bessel_benchmark, circular_packet_prediction, stirling_benchmark};

use crate::{io_err, Failure};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Benchmark {
    /// Γ(λ+1) from exp{λ(ln t - t)}.
    Stirling,
    /// I0(λ) from exp{λ cos t}.
    Bessel,
    /// Circular AR packet: peak radius and density widths at |ω| = λ.
    Circular,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = Benchmark::Stirling)]
    benchmark: Benchmark,
    /// Comma-separated values of the large parameter.
    #[arg(long, default_value = "20,40,80,160")]
    lambda: String,
    /// CSV output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(a: Args) -> Result<(), Failure> {
    let lambdas: Vec<f64> = a
        .lambda
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad lambda '{t}'"))))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<[String; 5]> = Vec::new();
    let header = match a.benchmark {
        Benchmark::Stirling | Benchmark::Bessel => ["lambda", "log_estimate", "log_exact", "rel_error", "rel_error_x_lambda"],
        Benchmark::Circular => ["lambda", "rho_peak", "sigma_rho", "sigma_phi", "sigma_z"],
    };
    for lam in lambdas {
        let row = match a.benchmark {
            Benchmark::Stirling | Benchmark::Bessel => {
                let b = if a.benchmark == Benchmark::Stirling {
                    stirling_benchmark(lam)?
                } else {
                    bessel_benchmark(lam)?
                };
                [lam, b.estimate, b.exact, b.rel_error, b.rel_error * lam]
            }
            Benchmark::Circular => {
                let p = circular_packet_prediction(lam)?;
                [lam, p.rho_peak, p.sigma_rho, p.sigma_phi, p.sigma_z]
            }
        };
        rows.push(row.map(|v| format!("{v:.12e}")));
    }
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| io_err(p, e))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let werr = |e: csv::Error| Failure::Usage(format!("writing output: {e}"));
    w.write_record(header).map_err(werr)?;
    for r in &rows {
        w.write_record(r).map_err(werr)?;
    }
    w.flush().map_err(|e| Failure::Usage(format!("writing output: {e}")))?;
    Ok(())
}
