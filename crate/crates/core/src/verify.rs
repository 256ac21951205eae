//! Verification suites.
//!
//! Each acceptance criterion is one function returning an [`Outcome`]: a list
//! of gated checks plus informational numbers. Thresholds are read from a
//! versioned TOML file (the defaults are compiled in from `thresholds.toml`)
//! and can be replaced wholesale by another file.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::cs::{
    brif_eigenstates, build_ladder_rep, ghcs_coefficients, ghcs_overlap, overlap_concentration,
    semiclassical_ratio, Family, Group, HypergeometricSpec,
};
use crate::error::{Error, Result};
use crate::grid::{locate_and_fit, Axis, DensityGrid, FieldGrid, Frame, GridSpec};
use crate::hydrogenic::{
    gram_matrix, identity_deviation, Measure, RadialConvention, Rep,
};
use crate::saddlepoint::{bessel_benchmark, circular_packet_prediction, stirling_benchmark};
use crate::specfun::{bessel_i0_scaled, kummer_1f1, laguerre_sequence, log_gamma, SeriesControl};
use crate::wavepacket::{
    circular_model, circular_peak_phi, elliptic_model, log_density_closed_ar, norm_ar_closed, norm_pr_series,
    orbit_params, packet_closed_ar, packet_series, packet_series_ar, KernelMap, NormQuadrature, PacketParams,
};

pub const DEFAULT_THRESHOLDS: &str = include_str!("../thresholds.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub version: u32,
    pub series_closed: SeriesClosed,
    pub eigenfunctions: Eigenfunctions,
    pub circular_ar: CircularAr,
    pub circular_pr: CircularPr,
    pub elliptic: Elliptic,
    pub semiclassical: Semiclassical,
    pub saddle: Saddle,
    pub kernel: Kernel,
    pub brif: Brif,
    pub norm: Norm,
    pub specfun: Specfun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesClosed {
    pub pointwise_rel: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunctions {
    pub gram: f64,
    pub control_min: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularAr {
    pub peak_abs: f64,
    pub sigma_rho_min: f64,
    pub sigma_rho_max: f64,
    pub sigma_phi_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularPr {
    pub peak_rel: f64,
    pub width_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elliptic {
    pub ellipse_residual: f64,
    pub density_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Semiclassical {
    pub o3_ratio_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Saddle {
    pub stirling_scale: f64,
    pub stirling_spread: f64,
    pub bessel_rel: f64,
    pub circular_width_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub l2: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Brif {
    pub eigen_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Norm {
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Specfun {
    pub i0_crossover: f64,
    pub kummer_laguerre: f64,
    pub log_gamma: f64,
}

impl Thresholds {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self::parse(DEFAULT_THRESHOLDS).expect("built-in thresholds parse")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Below(f64),
    Within(f64, f64),
}

impl Bound {
    fn holds(self, v: f64) -> bool {
        match self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
            Bound::Below(t) => v < t,
            Bound::Within(lo, hi) => v >= lo && v <= hi,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Bound::AtMost(t) => write!(f, "<= {t:e}"),
            Bound::AtLeast(t) => write!(f, ">= {t:e}"),
            Bound::Below(t) => write!(f, "< {t:e}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// NaN (null in JSON) when the computation itself failed.
    pub measured: f64,
    pub threshold: Bound,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, threshold: Bound) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold,
            pass: threshold.holds(measured),
            error: None,
        }
    }

    pub fn failed(name: impl Into<String>, threshold: Bound, err: &Error) -> Self {
        Check {
            name: name.into(),
            measured: f64::NAN,
            threshold,
            pass: false,
            error: Some(err.to_string()),
        }
    }
}

/// Checks of one criterion plus numbers reported without a gate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub info: Vec<(String, f64)>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    fn check(&mut self, name: impl Into<String>, measured: f64, threshold: Bound) {
        self.checks.push(Check::new(name, measured, threshold));
    }

    fn note(&mut self, name: impl Into<String>, v: f64) {
        self.info.push((name.into(), v));
    }

    /// Runs `f`; an error becomes a single failed check named `name`.
    fn guarded(name: &str, threshold: Bound, f: impl FnOnce(&mut Outcome) -> Result<()>) -> Outcome {
        let mut out = Outcome::default();
        if let Err(e) = f(&mut out) {
            out.checks.push(Check::failed(name, threshold, &e));
        }
        out
    }

    fn extend(&mut self, other: Outcome) {
        self.checks.extend(other.checks);
        self.info.extend(other.info);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Specfun,
    Hydrogenic,
    Packet,
    Saddle,
    Cs,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "specfun" => Suite::Specfun,
            "hydrogenic" => Suite::Hydrogenic,
            "packet" => Suite::Packet,
            "saddle" => Suite::Saddle,
            "cs" => Suite::Cs,
            _ => return Err(Error::Config(format!("unknown suite '{s}'"))),
        })
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Specfun => "specfun",
            Suite::Hydrogenic => "hydrogenic",
            Suite::Packet => "packet",
            Suite::Saddle => "saddle",
            Suite::Cs => "cs",
        }
    }

    /// Acceptance criteria run by the suite, in order.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::All => &[2, 1, 3, 4, 5, 8, 10, 7, 6, 9],
            Suite::Specfun => &[],
            Suite::Hydrogenic => &[2],
            Suite::Packet => &[1, 3, 4, 5, 8, 10],
            Suite::Saddle => &[7],
            Suite::Cs => &[6, 9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub suite: Suite,
    pub thresholds_version: u32,
    pub checks: Vec<Check>,
    pub info: Vec<(String, f64)>,
    pub wall_time_s: f64,
    pub pass: bool,
}

pub fn run_suite(suite: Suite, t: &Thresholds) -> RunReport {
    let start = Instant::now();
    let mut all = Outcome::default();
    if matches!(suite, Suite::All | Suite::Specfun) {
        all.extend(specfun_checks(t));
    }
    for &k in suite.criteria() {
        let o = criterion(k, t);
        for mut c in o.checks {
            c.name = format!("c{k}: {}", c.name);
            all.checks.push(c);
        }
        all.info.extend(o.info.into_iter().map(|(n, v)| (format!("c{k}: {n}"), v)));
    }
    if matches!(suite, Suite::All | Suite::Saddle) {
        all.extend(saddle_extra(t));
    }
    let pass = all.checks.iter().all(|c| c.pass);
    RunReport {
        suite,
        thresholds_version: t.version,
        checks: all.checks,
        info: all.info,
        wall_time_s: start.elapsed().as_secs_f64(),
        pass,
    }
}

/// Acceptance criterion `k` (1 to 10).
pub fn criterion(k: u8, t: &Thresholds) -> Outcome {
    match k {
        1 => series_vs_closed(t),
        2 => eigenfunction_convention(t),
        3 => circular_localization(t),
        4 => physical_localization(t),
        5 => elliptic_geometry(t),
        6 => semiclassical_limits(t),
        7 => saddle_engine(t),
        8 => kernel_relation(t),
        9 => brif_spectrum(t),
        10 => normalization(t),
        _ => {
            let mut o = Outcome::default();
            o.checks.push(Check::failed(
                format!("criterion {k}"),
                Bound::AtMost(0.0),
                &Error::Config(format!("no criterion {k}")),
            ));
            o
        }
    }
}

pub const CRITERION_TITLES: [&str; 10] = [
    "series/closed-form identity",
    "eigenfunction convention",
    "circular localization (AR)",
    "physical-representation localization",
    "elliptic geometry",
    "semiclassical limits",
    "saddle-point engine",
    "kernel relation",
    "Brif spectrum",
    "normalization",
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The 18 parameter combinations of the series/closed comparison.
pub fn series_closed_cases() -> Vec<PacketParams> {
    let mut out = Vec::new();
    for w in [1.0, 4.0, 10.0] {
        for ph in [0.0, PI / 4.0] {
            for eta in [c(0.0, 0.0), c(0.3, 0.0), Complex64::from_polar(0.5, PI / 4.0)] {
                out.push(PacketParams::new(Complex64::from_polar(w, ph), eta, Rep::Ar).unwrap());
            }
        }
    }
    out
}

/// 40×32×20 cylindrical grid covering the whole packet.
pub fn full_packet_grid(p: &PacketParams) -> Result<GridSpec> {
    let o = orbit_params(p);
    let n = o.n_inf;
    let rho_max = n * (1.0 + o.ecc) + 6.0 * n.sqrt() + 6.0;
    let z_max = 3.0 * n.sqrt() + 3.0;
    Ok(GridSpec::new(
        Frame::Cylindrical,
        [
            Axis::new(0.0, rho_max, 40)?,
            Axis::new(0.0, 2.0 * PI * 31.0 / 32.0, 32)?,
            Axis::new(-z_max, z_max, 20)?,
        ],
    ))
}

fn series_vs_closed(t: &Thresholds) -> Outcome {
    let tol = t.series_closed.pointwise_rel;
    let start = Instant::now();
    let mut out = Outcome::guarded("pointwise relative deviation", Bound::AtMost(tol), |out| {
        let ctl = SeriesControl::default();
        let (mut worst, mut worst_peak, mut worst_bulk) = (0.0f64, 0.0f64, 0.0f64);
        for p in series_closed_cases() {
            let spec = full_packet_grid(&p)?;
            let closed = FieldGrid::sample(spec, |pt| Ok(packet_closed_ar(&p, pt)))?;
            let series = FieldGrid::sample(spec, |pt| packet_series_ar(&p, pt, ctl))?;
            let peak = closed.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let (mut w, mut wp, mut wb) = (0.0f64, 0.0f64, 0.0f64);
            for (s, cl) in series.values.iter().zip(&closed.values) {
                let d = (s - cl).norm();
                let rel = if cl.norm() > 0.0 {
                    d / cl.norm()
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                w = w.max(rel);
                wp = wp.max(d / peak);
                if cl.norm() >= 1e-4 * peak {
                    wb = wb.max(rel);
                }
            }
            out.note(
                format!("|w|={:.0} arg w={:.3} eta={:.2}@{:.3} pointwise", p.omega.norm(), p.omega.arg(), p.eta.norm(), p.eta.arg()),
                w,
            );
            worst = worst.max(w);
            worst_peak = worst_peak.max(wp);
            worst_bulk = worst_bulk.max(wb);
        }
        out.check("max pointwise relative deviation", worst, Bound::AtMost(tol));
        out.note("max deviation / max |closed|", worst_peak);
        out.note("max pointwise deviation where |closed| >= 1e-4 max", worst_bulk);
        Ok(())
    });
    out.check("runtime [s]", start.elapsed().as_secs_f64(), Bound::AtMost(t.series_closed.runtime_s));
    out
}

fn eigenfunction_convention(t: &Thresholds) -> Outcome {
    let e = &t.eigenfunctions;
    let start = Instant::now();
    let mut out = Outcome::guarded("Gram matrices", Bound::AtMost(e.gram), |out| {
        let ar = gram_matrix(Rep::Ar, Measure::InverseR, 10, RadialConvention::Laguerre)?;
        let pr = gram_matrix(Rep::Pr, Measure::Plain, 10, RadialConvention::Laguerre)?;
        out.check("AR Gram |G - I| (b = 2l+2)", identity_deviation(&ar), Bound::AtMost(e.gram));
        out.check("PR Gram |G - I| (b = 2l+2)", identity_deviation(&pr), Bound::AtMost(e.gram));
        let ar = gram_matrix(Rep::Ar, Measure::InverseR, 10, RadialConvention::Shifted)?;
        let pr = gram_matrix(Rep::Pr, Measure::Plain, 10, RadialConvention::Shifted)?;
        out.check("AR Gram |G - I| (b = 2l+1, must fail)", identity_deviation(&ar), Bound::AtLeast(e.control_min));
        out.check("PR Gram |G - I| (b = 2l+1, must fail)", identity_deviation(&pr), Bound::AtLeast(e.control_min));
        Ok(())
    });
    out.check("runtime [s]", start.elapsed().as_secs_f64(), Bound::AtMost(e.runtime_s));
    out
}

fn circular_localization(t: &Thresholds) -> Outcome {
    let th = &t.circular_ar;
    Outcome::guarded("fit", Bound::AtMost(th.peak_abs), |out| {
        let p = PacketParams::new(c(100.0, 0.0), c(0.0, 0.0), Rep::Ar)?;
        let phi0 = circular_peak_phi(p.omega);
        let spec = GridSpec::new(
            Frame::Cylindrical,
            [Axis::centered(100.0, 1.5, 61)?, Axis::centered(phi0, 0.015, 61)?, Axis::centered(0.0, 1.5, 41)?],
        );
        let d = DensityGrid::sample(spec, |pt| Ok(log_density_closed_ar(&p, pt).exp()))?;
        let rep = locate_and_fit(&d)?;
        let s = rep.sigmas();
        out.check("|peak rho - 100|", (rep.peak[0] - 100.0).abs(), Bound::AtMost(th.peak_abs));
        out.check("sigma_rho", s[0], Bound::Within(th.sigma_rho_min, th.sigma_rho_max));
        out.check("|sigma_phi sqrt|w| - 1|", (s[1] * 10.0 - 1.0).abs(), Bound::AtMost(th.sigma_phi_rel));
        out.note("fitted center rho", rep.center[0]);
        out.note("sigma_z", s[2]);
        out.note("fit residual", rep.residual);
        Ok(())
    })
}

fn physical_localization(t: &Thresholds) -> Outcome {
    let th = &t.circular_pr;
    Outcome::guarded("fit", Bound::AtMost(th.peak_rel), |out| {
        let p = PacketParams::new(c(6.0, 0.0), c(0.0, 0.0), Rep::Pr)?;
        let phi0 = circular_peak_phi(p.omega);
        let spec = GridSpec::new(
            Frame::Cylindrical,
            [Axis::new(0.5, 80.0, 80)?, Axis::centered(phi0, 0.04, 61)?, Axis::centered(0.0, 1.0, 61)?],
        );
        let ctl = SeriesControl::default();
        let d = DensityGrid::sample(spec, |pt| Ok(packet_series(&p, pt, ctl)?.norm_sqr()))?;
        let rep = locate_and_fit(&d)?;
        let s = rep.sigmas();
        let pred = circular_model(&p)?.sigmas();
        out.check("|peak rho / 36 - 1|", (rep.peak[0] / 36.0 - 1.0).abs(), Bound::AtMost(th.peak_rel));
        for (i, name) in ["rho", "phi", "z"].iter().enumerate() {
            out.check(
                format!("|sigma_{name} / predicted - 1|"),
                (s[i] / pred[i] - 1.0).abs(),
                Bound::AtMost(th.width_rel),
            );
        }
        out.note("peak rho", rep.peak[0]);
        out.note("fitted center rho", rep.center[0]);
        out.note("fit residual", rep.residual);
        Ok(())
    })
}

fn elliptic_geometry(t: &Thresholds) -> Outcome {
    let th = &t.elliptic;
    Outcome::guarded("fit", Bound::AtMost(th.ellipse_residual), |out| {
        for eta in [0.2, 0.4] {
            let p = PacketParams::new(Complex64::from_polar(100.0, 0.3), c(eta, 0.0), Rep::Ar)?;
            let o = orbit_params(&p);
            // grid built around the predicted position, the fit does the rest
            let guess = elliptic_model(&p, o.predicted_anomaly)?;
            let (s, c0) = (guess.sigmas(), guess.center);
            let spec = GridSpec::new(
                Frame::Cartesian,
                [
                    Axis::centered(c0[0], s[0] / 6.0, 81)?,
                    Axis::centered(c0[1], s[1] / 6.0, 81)?,
                    Axis::centered(0.0, s[2] / 6.0, 61)?,
                ],
            );
            let d = DensityGrid::sample(spec, |pt| Ok(log_density_closed_ar(&p, pt).exp()))?;
            let rep = locate_and_fit(&d)?;
            let theta = o.fit_anomaly(rep.peak[0], rep.peak[1]);
            let model = elliptic_model(&p, theta)?;
            let g = DensityGrid::sample(spec, |pt| Ok(model.density(pt)))?;
            out.check(
                format!("eta={eta}: ellipse residual"),
                o.ellipse_residual(rep.peak[0], rep.peak[1]),
                Bound::AtMost(th.ellipse_residual),
            );
            out.check(format!("eta={eta}: density L2"), g.relative_l2(&d)?, Bound::AtMost(th.density_l2));
            out.note(format!("eta={eta}: fitted anomaly"), theta);
        }
        Ok(())
    })
}

fn semiclassical_limits(t: &Thresholds) -> Outcome {
    Outcome::guarded("diagnostics", Bound::AtLeast(t.semiclassical.o3_ratio_factor), |out| {
        let ctl = SeriesControl::default();
        let xi = c(0.5, 0.0);
        let mut dev = Vec::new();
        for s in [20u32, 200] {
            let cs = ghcs_coefficients(&HypergeometricSpec::perelomov_o3(s)?, xi, ctl)?;
            let rep = build_ladder_rep(Group::O3, s, 0)?;
            let r = semiclassical_ratio(&cs, &rep, 3)? - 1.0;
            out.note(format!("O3 S={s} alpha=3 ratio-1"), r);
            for alpha in [1, 2] {
                if let Ok(v) = semiclassical_ratio(&cs, &rep, alpha) {
                    out.note(format!("O3 S={s} alpha={alpha} ratio-1"), v - 1.0);
                }
            }
            dev.push(r.abs());
        }
        out.check("O3 (ratio-1) S=20 / S=200", dev[0] / dev[1], Bound::AtLeast(t.semiclassical.o3_ratio_factor));

        // largest ratio of successive overlaps; below 1 means strictly decreasing
        let worst_step = |v: &[f64]| v.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        let s_list = [5, 10, 20, 50, 100];
        let (a, b) = (c(0.3, 0.0), c(0.5, 0.0));
        let v = overlap_concentration(Family::NonCompact { q: 0 }, a, b, &s_list, ctl)?;
        out.check("case (i) overlap step ratio", worst_step(&v), Bound::Below(1.0));
        let v = overlap_concentration(Family::Compact { p: 1, q: 0 }, a, b, &s_list, ctl)?;
        out.check("case (ii) overlap step ratio", worst_step(&v), Bound::Below(1.0));
        let spec = HypergeometricSpec::barut_girardello(1)?;
        let v: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 20.0]
            .iter()
            .map(|&k| Ok(ghcs_overlap(&spec, a * k, b * k, ctl)?.norm_sqr()))
            .collect::<Result<_>>()?;
        out.check("case (iii) overlap step ratio", worst_step(&v), Bound::Below(1.0));
        Ok(())
    })
}

fn saddle_engine(t: &Thresholds) -> Outcome {
    let th = &t.saddle;
    Outcome::guarded("benchmarks", Bound::AtMost(th.bessel_rel), |out| {
        let mut scaled = Vec::new();
        for lam in [20.0, 40.0, 80.0, 160.0] {
            let b = stirling_benchmark(lam)?;
            out.check(
                format!("Stirling lambda={lam}: error * lambda"),
                b.rel_error * lam,
                Bound::AtMost(th.stirling_scale),
            );
            scaled.push(b.rel_error * lam);
        }
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        out.check("Stirling max/min of error * lambda", hi / lo, Bound::AtMost(th.stirling_spread));
        let b = bessel_benchmark(50.0)?;
        out.check("I0(50) relative error", b.rel_error, Bound::AtMost(th.bessel_rel));
        Ok(())
    })
}

fn saddle_extra(t: &Thresholds) -> Outcome {
    let tol = t.saddle.circular_width_rel;
    Outcome::guarded("circular family", Bound::AtMost(tol), |out| {
        let pred = circular_packet_prediction(100.0)?;
        out.check("circular family |sigma_rho / 10 - 1|", (pred.sigma_rho / 10.0 - 1.0).abs(), Bound::AtMost(tol));
        out.check("circular family |rho_peak / 100 - 1|", (pred.rho_peak / 100.0 - 1.0).abs(), Bound::AtMost(tol));
        Ok(())
    })
}

/// Peak-centered cylindrical grid for the kernel comparison at `|ω| = 8`.
pub fn kernel_grid(p: &PacketParams) -> Result<GridSpec> {
    let m = circular_model(&p.with_rep(Rep::Pr))?;
    let (s, c0) = (m.sigmas(), m.center);
    Ok(GridSpec::new(
        Frame::Cylindrical,
        [
            Axis::new((c0[0] - 2.0 * s[0]).max(1.0), c0[0] + 2.0 * s[0], 24)?,
            Axis::centered(c0[1], s[1] / 6.0, 25)?,
            Axis::centered(0.0, s[2] / 4.0, 17)?,
        ],
    ))
}

fn kernel_relation(t: &Thresholds) -> Outcome {
    let th = &t.kernel;
    let start = Instant::now();
    let mut out = Outcome::guarded("kernel map", Bound::AtMost(th.l2), |out| {
        let p = PacketParams::new(c(8.0, 0.0), c(0.0, 0.0), Rep::Pr)?;
        let spec = kernel_grid(&p)?;
        let map = KernelMap::new(&p, 6.0, [32, 32, 32])?;
        let ctl = SeriesControl::default();
        let mapped = FieldGrid::sample(spec, |pt| map.apply(pt))?;
        let exact = FieldGrid::sample(spec, |pt| packet_series(&p, pt, ctl))?;
        // d³r weights: uniform steps, so rho alone
        let w: Vec<f64> = (0..spec.len()).map(|i| spec.coords(spec.unindex(i))[0]).collect();
        let (mut num, mut den) = (0.0, 0.0);
        let (mut cross, mut mm) = (c(0.0, 0.0), 0.0);
        for ((a, b), wi) in mapped.values.iter().zip(&exact.values).zip(&w) {
            num += wi * (a - b).norm_sqr();
            den += wi * b.norm_sqr();
            cross += wi * a.conj() * b;
            mm += wi * a.norm_sqr();
        }
        out.check("relative L2 error", (num / den).sqrt(), Bound::AtMost(th.l2));
        // best complex multiple of the mapped field; separates shape from scale and phase
        let k = cross / mm;
        let mut best = 0.0;
        for ((a, b), wi) in mapped.values.iter().zip(&exact.values).zip(&w) {
            best += wi * (a * k - b).norm_sqr();
        }
        out.note("relative L2 error after best complex rescaling", (best / den).sqrt());
        out.note("|best scale|", k.norm());
        out.note("arg best scale", k.arg());
        Ok(())
    });
    out.check("runtime [s]", start.elapsed().as_secs_f64(), Bound::AtMost(th.runtime_s));
    out
}

fn brif_spectrum(t: &Thresholds) -> Outcome {
    let tol = t.brif.eigen_abs;
    Outcome::guarded("spectra", Bound::AtMost(tol), |out| {
        let mut rng = StdRng::seed_from_u64(9);
        let mut worst = 0.0f64;
        let mut missed_flag = 0usize;
        for s in 1..=6u32 {
            let rep = build_ladder_rep(Group::O3, s, 0)?;
            for _ in 0..5 {
                let beta = [0; 3].map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                let sp = brif_eigenstates(&rep, beta)?;
                if sp.degenerate {
                    missed_flag += 1;
                    continue;
                }
                let ev = sp.eigenvalues();
                if ev.len() != s as usize + 1 {
                    return Err(Error::Domain(format!("expected {} eigenvalues, got {}", s + 1, ev.len())));
                }
                // match each predicted value to its nearest computed one
                for l in 0..=s {
                    let want = sp.b * (l as f64 - s as f64 / 2.0);
                    let d = ev.iter().map(|z| (z - want).norm()).fold(f64::INFINITY, f64::min);
                    worst = worst.max(d);
                }
            }
        }
        out.check("max |eigenvalue - (l - S/2) b|", worst, Bound::AtMost(tol));
        out.check("random beta wrongly flagged degenerate", missed_flag as f64, Bound::AtMost(0.0));
        let rep = build_ladder_rep(Group::O3, 2, 0)?;
        let sp = brif_eigenstates(&rep, [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)])?;
        out.check("b = 0 flagged (1 = yes)", if sp.degenerate { 1.0 } else { 0.0 }, Bound::AtLeast(1.0));
        Ok(())
    })
}

pub fn normalization_cases() -> Vec<PacketParams> {
    let mut out = Vec::new();
    for w in [1.0, 4.0, 10.0] {
        for eta in [c(0.0, 0.0), c(0.3, 0.0), Complex64::from_polar(0.5, PI / 4.0)] {
            out.push(PacketParams::new(Complex64::from_polar(w, 0.4), eta, Rep::Ar).unwrap());
        }
    }
    out
}

fn normalization(t: &Thresholds) -> Outcome {
    let tol = t.norm.abs;
    Outcome::guarded("norms", Bound::AtMost(tol), |out| {
        let ctl = SeriesControl::default();
        let (mut ar, mut pr) = (0.0f64, 0.0f64);
        for p in normalization_cases() {
            let a = norm_ar_closed(&p, NormQuadrature::default());
            let b = norm_pr_series(&p.with_rep(Rep::Pr), ctl)?;
            out.note(format!("|w|={} eta={:.2}: AR norm - 1", p.omega.norm(), p.eta.norm()), a - 1.0);
            out.note(format!("|w|={} eta={:.2}: PR norm - 1", p.omega.norm(), p.eta.norm()), b - 1.0);
            ar = ar.max((a - 1.0).abs());
            pr = pr.max((b - 1.0).abs());
        }
        out.check("AR max |norm - 1|", ar, Bound::AtMost(tol));
        out.check("PR max |norm - 1|", pr, Bound::AtMost(tol));
        Ok(())
    })
}

/// Special-function checks that back the suites.
pub fn specfun_checks(t: &Thresholds) -> Outcome {
    let th = &t.specfun;
    Outcome::guarded("specfun", Bound::AtMost(th.kummer_laguerre), |out| {
        let mut worst = 0.0f64;
        for k in 0..16 {
            let ang = k as f64 * PI / 30.0;
            let a = bessel_i0_scaled(Complex64::from_polar(30.0 - 1e-13, ang));
            let b = bessel_i0_scaled(Complex64::from_polar(30.0 + 1e-13, ang));
            worst = worst.max((a - b).norm() / a.norm());
        }
        out.check("I0 crossover jump (relative)", worst, Bound::AtMost(th.i0_crossover));

        // L_k^a(x) = C(k+a, k) 1F1(-k; a+1; x)
        let mut worst = 0.0f64;
        for (k, a, x) in [(5usize, 1.0, 0.7), (8, 3.0, 2.5), (12, 0.0, 4.0), (3, 5.0, 10.0)] {
            let lag = laguerre_sequence(k, a, x)[k];
            let binom = (log_gamma(k as f64 + a + 1.0)? - log_gamma(k as f64 + 1.0)? - log_gamma(a + 1.0)?).exp();
            let f = kummer_1f1(-(k as f64), a + 1.0, c(x, 0.0), SeriesControl::default())?.re;
            worst = worst.max((lag - binom * f).abs() / lag.abs().max(1.0));
        }
        out.check("Laguerre vs 1F1 relative", worst, Bound::AtMost(th.kummer_laguerre));

        let v = (log_gamma(0.5)? - 0.5 * PI.ln()).abs();
        out.check("ln Gamma(1/2) - ln sqrt(pi)", v, Bound::AtMost(th.log_gamma));
        Ok(())
    })
}

/// One-line human summary of an outcome.
pub fn outcome_line(k: u8, o: &Outcome) -> String {
    let title = CRITERION_TITLES.get(k as usize - 1).copied().unwrap_or("?");
    let status = if o.pass() { "PASS" } else { "FAIL" };
    let detail: Vec<String> = o
        .checks
        .iter()
        .map(|c| match &c.error {
            Some(e) => format!("{}: error: {e}", c.name),
            None => format!("{} = {:.4e} ({})", c.name, c.measured, c.threshold),
        })
        .collect();
    format!("{status} criterion {k:>2} [{title}] {}", detail.join("; "))
}
