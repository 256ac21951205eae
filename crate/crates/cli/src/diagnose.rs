use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use hydrocs::cs::{
    brif_eigenstates, build_ladder_rep, ghcs_coefficients, ghcs_overlap, semiclassical_ratio, CsCoefficients,
    Group, HypergeometricSpec, LadderRep,
};
use hydrocs::specfun::SeriesControl;
use hydrocs::Complex64;

use crate::{io_err, parse_complex, Failure};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyArg {
    PerelomovO3,
    PerelomovO21,
    Bg,
    Ghcs,
    Brif,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Sweep values: "10,20,50" or "start:end:count" (geometric). Values are S
    /// for the Perelomov and Brif families and |ξ| for bg and ghcs.
    #[arg(long, default_value = "10:1000:5")]
    sweep: String,
    #[arg(long, value_parser = parse_complex, default_value = "0.5")]
    xi: Complex64,
    /// Second state of the overlap. For bg and ghcs it is scaled along with ξ.
    #[arg(long, value_parser = parse_complex, default_value = "0.7")]
    zeta: Complex64,
    /// Representation label S for bg and ghcs.
    #[arg(long, default_value_t = 1)]
    s: u32,
    /// Integer upper parameters of a general family, comma separated.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    alphas: String,
    /// Lower parameters of a general family, comma separated.
    #[arg(long, default_value = "")]
    rhos: String,
    /// β for the Brif family: three complex entries, e.g. "1,0,0.5@0.3".
    #[arg(long, default_value = "0.3,0.2,1", allow_hyphen_values = true)]
    beta: String,
    /// CSV output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Failure::Usage(format!("bad {what} entry '{t}'"))))
        .collect()
}

pub fn parse_sweep(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("bad sweep '{s}'"));
    let v: Vec<f64> = if let [a, b, n] = s.split(':').collect::<Vec<_>>()[..] {
        let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        let n: usize = n.parse().map_err(|_| bad())?;
        if !(a > 0.0 && b > a) || n < 2 {
            return Err(bad());
        }
        (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
    } else {
        list(s, "sweep")?
    };
    if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(bad());
    }
    Ok(v)
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.10e}")
    }
}

/// `⟨E_α²⟩/⟨E_α⟩² - 1` for α = 3, 1, 2; NaN where ⟨E_α⟩ vanishes.
fn ratios(cs: &CsCoefficients, rep: &LadderRep) -> Result<[f64; 3], Failure> {
    let mut out = [f64::NAN; 3];
    for (slot, alpha) in [3usize, 1, 2].into_iter().enumerate() {
        match semiclassical_ratio(cs, rep, alpha) {
            Ok(r) => out[slot] = r - 1.0,
            Err(hydrocs::Error::DegenerateExpectation(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

fn o21_rep(s: u32, cs: &CsCoefficients) -> Result<LadderRep, Failure> {
    Ok(build_ladder_rep(Group::O21, s, (cs.coeffs.len() + 2).max(4))?)
}

fn as_label(v: f64) -> Result<u32, Failure> {
    let s = v.round();
    if s < 1.0 || s > 1e6 {
        return Err(Failure::Usage(format!("S = {v} out of range")));
    }
    Ok(s as u32)
}

pub fn run(a: Args) -> Result<(), Failure> {
    let ctl = SeriesControl::default();
    let sweep = parse_sweep(&a.sweep)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let header: Vec<&str> = match a.family {
        FamilyArg::PerelomovO3 | FamilyArg::PerelomovO21 => {
            vec!["S", "overlap_sq", "ratio3_minus_1", "ratio1_minus_1", "ratio2_minus_1"]
        }
        FamilyArg::Bg => vec!["abs_xi", "overlap_sq", "ratio3_minus_1", "ratio1_minus_1", "ratio2_minus_1"],
        FamilyArg::Ghcs => vec!["abs_xi", "overlap_sq"],
        FamilyArg::Brif => vec!["S", "b_re", "b_im", "max_eigen_deviation", "degenerate"],
    };
    let mut last_s = None;
    for v in sweep {
        match a.family {
            FamilyArg::PerelomovO3 | FamilyArg::PerelomovO21 => {
                let s = as_label(v)?;
                if last_s == Some(s) {
                    continue;
                }
                last_s = Some(s);
                let (spec, rep) = if a.family == FamilyArg::PerelomovO3 {
                    (HypergeometricSpec::perelomov_o3(s)?, None)
                } else {
                    (HypergeometricSpec::perelomov_o21(s)?, Some(()))
                };
                let cs = ghcs_coefficients(&spec, a.xi, ctl)?;
                let rep = match rep {
                    None => build_ladder_rep(Group::O3, s, 0)?,
                    Some(()) => o21_rep(s, &cs)?,
                };
                let ov = ghcs_overlap(&spec, a.xi, a.zeta, ctl)?.norm_sqr();
                let r = ratios(&cs, &rep)?;
                rows.push(vec![s.to_string(), fmt(ov), fmt(r[0]), fmt(r[1]), fmt(r[2])]);
            }
            FamilyArg::Bg | FamilyArg::Ghcs => {
                if a.xi.norm() == 0.0 {
                    return Err(Failure::Usage("--xi must be nonzero for a |xi| sweep".into()));
                }
                let k = v / a.xi.norm();
                let (xi, zeta) = (a.xi * k, a.zeta * k);
                let spec = if a.family == FamilyArg::Bg {
                    HypergeometricSpec::barut_girardello(a.s)?
                } else {
                    HypergeometricSpec::new(list(&a.alphas, "alphas")?, list(&a.rhos, "rhos")?)?
                };
                let ov = ghcs_overlap(&spec, xi, zeta, ctl)?.norm_sqr();
                if a.family == FamilyArg::Bg {
                    let cs = ghcs_coefficients(&spec, xi, ctl)?;
                    let r = ratios(&cs, &o21_rep(a.s, &cs)?)?;
                    rows.push(vec![fmt(v), fmt(ov), fmt(r[0]), fmt(r[1]), fmt(r[2])]);
                } else {
                    rows.push(vec![fmt(v), fmt(ov)]);
                }
            }
            FamilyArg::Brif => {
                let s = as_label(v)?;
                if last_s == Some(s) {
                    continue;
                }
                last_s = Some(s);
                let beta: Vec<Complex64> = a
                    .beta
                    .split(',')
                    .map(|t| parse_complex(t).map_err(Failure::Usage))
                    .collect::<Result<_, _>>()?;
                let beta: [Complex64; 3] = beta
                    .try_into()
                    .map_err(|_| Failure::Usage("--beta needs three entries".into()))?;
                let sp = brif_eigenstates(&build_ladder_rep(Group::O3, s, 0)?, beta)?;
                let ev = sp.eigenvalues();
                let dev = (0..=s)
                    .map(|l| {
                        let want = sp.b * (l as f64 - s as f64 / 2.0);
                        ev.iter().map(|z| (z - want).norm()).fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max);
                rows.push(vec![
                    s.to_string(),
                    fmt(sp.b.re),
                    fmt(sp.b.im),
                    if sp.degenerate { String::new() } else { fmt(dev) },
                    sp.degenerate.to_string(),
                ]);
            }
        }
    }

    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| io_err(p, e))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let werr = |e: csv::Error| Failure::Usage(format!("writing output: {e}"));
    w.write_record(&header).map_err(werr)?;
    for r in &rows {
        w.write_record(r).map_err(werr)?;
    }
    w.flush().map_err(|e| Failure::Usage(format!("writing output: {e}")))?;
    Ok(())
}
