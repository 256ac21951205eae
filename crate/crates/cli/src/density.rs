use std::path::{Path, PathBuf};

use clap::ValueEnum;
use hydrocs::grid::{locate_and_fit, FieldGrid, GridSpec};
use hydrocs::hydrogenic::{Point3, Rep};
use hydrocs::specfun::SeriesControl;
use hydrocs::wavepacket::{
    elliptic_model, gaussian_circular, orbit_params, packet_closed_ar, packet_series, PacketParams,
};
use hydrocs::{Complex64, Error};
use serde_json::json;

use crate::{io_err, parse_complex, Failure};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluator {
    Series,
    Closed,
    Gaussian,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepArg {
    Ar,
    Pr,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// ω as modulus@phase (radians), or a plain real number.
    #[arg(long, value_parser = parse_complex, default_value = "4")]
    omega: Complex64,
    /// η as modulus@phase, |η| < 1.
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    eta: Complex64,
    #[arg(long, value_enum, default_value_t = RepArg::Ar)]
    rep: RepArg,
    /// Three axes, e.g. "rho:0:200:400,phi:0:6.2832:256,z:-20:20:80" or "x:..,y:..,z:..".
    #[arg(long)]
    grid: String,
    #[arg(long, value_enum, default_value_t = Evaluator::Series)]
    evaluator: Evaluator,
    /// Also sample this evaluator and report the relative L² mismatch of the densities.
    #[arg(long, value_enum)]
    reference: Option<Evaluator>,
    /// Eccentric anomaly of the elliptic Gaussian (default: arg η).
    #[arg(long)]
    theta: Option<f64>,
    /// CSV output; the JSON sidecar goes next to it with extension .json.
    #[arg(long)]
    out: PathBuf,
    /// Relative tolerance of the series truncation.
    #[arg(long, default_value_t = 1e-16)]
    tol: f64,
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Evaluator of ψ at a point, or a usage error for unsupported combinations.
fn evaluator(
    p: PacketParams,
    which: Evaluator,
    theta: Option<f64>,
    ctl: SeriesControl,
) -> Result<Box<dyn Fn(Point3) -> hydrocs::Result<Complex64> + Sync>, Failure> {
    match which {
        Evaluator::Series => Ok(Box::new(move |pt| packet_series(&p, pt, ctl))),
        Evaluator::Closed => {
            if p.rep != Rep::Ar {
                return Err(Failure::Usage("the closed form exists for --rep ar only".into()));
            }
            Ok(Box::new(move |pt| Ok(packet_closed_ar(&p, pt))))
        }
        Evaluator::Gaussian => {
            if p.eta.norm() == 0.0 {
                // surfaces |ω| < 1 as a usage error before sampling
                gaussian_circular(&p, Point3::new(1.0, 0.0, 0.0))?;
                Ok(Box::new(move |pt| gaussian_circular(&p, pt)))
            } else if p.rep == Rep::Ar {
                let th = theta.unwrap_or_else(|| orbit_params(&p).predicted_anomaly);
                let m = elliptic_model(&p, th)?;
                // the elliptic estimate is a density; its amplitude is reported as real
                Ok(Box::new(move |pt| Ok(Complex64::new(m.density(pt).sqrt(), 0.0))))
            } else {
                Err(Failure::Usage("no Gaussian estimate for --rep pr with eta != 0".into()))
            }
        }
    }
}

fn name(e: Evaluator) -> &'static str {
    match e {
        Evaluator::Series => "series",
        Evaluator::Closed => "closed",
        Evaluator::Gaussian => "gaussian",
    }
}

pub fn run(a: Args) -> Result<(), Failure> {
    let rep = match a.rep {
        RepArg::Ar => Rep::Ar,
        RepArg::Pr => Rep::Pr,
    };
    let p = PacketParams::new(a.omega, a.eta, rep)?;
    let spec: GridSpec = a.grid.parse()?;
    let ctl = SeriesControl::new(a.tol, SeriesControl::default().max_terms, SeriesControl::default().consecutive_small)?;
    if a.out.extension().is_some_and(|e| e == "json") {
        return Err(Failure::Usage("--out must not end in .json; that name is used by the sidecar".into()));
    }

    let f = evaluator(p, a.evaluator, a.theta, ctl)?;
    let reference = match a.reference {
        Some(r) => Some(evaluator(p, r, a.theta, ctl)?),
        None => None,
    };
    let field = FieldGrid::sample(spec, f)?;
    let density = field.density();

    let mut w = csv::Writer::from_path(&a.out).map_err(|e| io_err(&a.out, e))?;
    w.write_record(["x1", "x2", "x3", "re", "im", "density"]).map_err(|e| io_err(&a.out, e))?;
    for (i, (z, d)) in field.values.iter().zip(&density.values).enumerate() {
        let c = spec.coords(spec.unindex(i));
        w.write_record([c[0], c[1], c[2], z.re, z.im, *d].map(|v| format!("{v:e}")))
            .map_err(|e| io_err(&a.out, e))?;
    }
    w.flush().map_err(|e| io_err(&a.out, e))?;

    let imax = density.argmax();
    let peak_sample = spec.coords(spec.unindex(imax));
    let names = spec.frame.axis_names();
    println!(
        "max density {:.6e} at {}={:.6}, {}={:.6}, {}={:.6}",
        density.values[imax], names[0], peak_sample[0], names[1], peak_sample[1], names[2], peak_sample[2]
    );
    let fit = match locate_and_fit(&density) {
        Ok(r) => {
            let s = r.sigmas();
            println!(
                "fit: peak ({:.6}, {:.6}, {:.6}), center ({:.6}, {:.6}, {:.6}), sigma ({:.6}, {:.6}, {:.6}), residual {:.3e}",
                r.peak[0], r.peak[1], r.peak[2], r.center[0], r.center[1], r.center[2], s[0], s[1], s[2], r.residual
            );
            json!({ "report": r, "sigmas": s })
        }
        // a peak on the grid edge (the vacuum at rho = 0, say) is a fact, not a failure
        Err(e @ Error::Grid(_)) => {
            println!("fit skipped: {e}");
            json!({ "error": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    let mismatch = match reference {
        Some(g) => {
            let d_ref = FieldGrid::sample(spec, g)?.density();
            let l2 = density.relative_l2(&d_ref)?;
            println!("relative L2 density mismatch vs {}: {:.4e}", name(a.reference.unwrap()), l2);
            Some(l2)
        }
        None => None,
    };

    let side = json!({
        "omega": { "re": p.omega.re, "im": p.omega.im, "modulus": p.omega.norm(), "phase": p.omega.arg() },
        "eta": { "re": p.eta.re, "im": p.eta.im, "modulus": p.eta.norm(), "phase": p.eta.arg() },
        "rep": match rep { Rep::Ar => "ar", Rep::Pr => "pr" },
        "grid": spec.to_string(),
        "frame": spec.frame,
        "points": spec.len(),
        "evaluator": name(a.evaluator),
        "tol": a.tol,
        "threads": rayon::current_num_threads(),
        "csv": a.out.file_name().map(|s| s.to_string_lossy().into_owned()),
        "summary": {
            "max_density": density.values[imax],
            "peak_sample": peak_sample,
            "fit": fit,
            "reference": a.reference.map(name),
            "reference_l2": mismatch,
        },
    });
    let sp = sidecar_path(&a.out);
    let text = serde_json::to_string_pretty(&side).map_err(|e| Failure::Numeric(e.to_string()))?;
    std::fs::write(&sp, text).map_err(|e| io_err(&sp, e))?;
    Ok(())
}
