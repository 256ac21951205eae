//! Laplace / saddle-point estimates of parameter integrals
//!
//! ```text
//! F(λ, x) = ∫ exp{λ f(x, t)} φ(x, t) dt,   x ∈ Rⁿ, t ∈ Cᵐ,
//! F ≈ (2π/λ)^{m/2} exp{λ f(x, t₀)} φ(x, t₀) / sqrt(det[-μ(x, t₀)]),
//! ```
//!
//! with `∂f/∂t = 0` at `t₀` and `μ = ∂²f/∂t²`. Near the real point `x₀₀`
//! where `Re f(x, t₀(x))` is stationary, the estimate becomes a Gaussian
//! packet with linear phase `λ hᵀδx` and quadratic form `σ - γᵀ μ⁻¹ γ`.
//!
//! Derivatives are supplied by the caller and audited against central
//! differences when the problem is built.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

type CVec = DVector<Complex64>;
type CMat = DMatrix<Complex64>;

/// Exponent `f(x, t)`, holomorphic in `t`, with its derivatives.
///
/// `x` has `n` real entries (possibly none), `t` has `m` complex entries.
pub trait Phase: Sync {
    fn dims(&self) -> (usize, usize);
    fn f(&self, x: &[f64], t: &[Complex64]) -> Complex64;
    /// `∂f/∂t`, length `m`.
    fn grad_t(&self, x: &[f64], t: &[Complex64]) -> CVec;
    /// `∂f/∂x`, length `n`.
    fn grad_x(&self, x: &[f64], t: &[Complex64]) -> CVec;
    /// `μ = ∂²f/∂t∂t`, `m × m`.
    fn hess_tt(&self, x: &[f64], t: &[Complex64]) -> CMat;
    /// `σ = ∂²f/∂x∂x`, `n × n`.
    fn hess_xx(&self, x: &[f64], t: &[Complex64]) -> CMat;
    /// `γ = ∂²f/∂t∂x`, `m × n`.
    fn hess_tx(&self, x: &[f64], t: &[Complex64]) -> CMat;
    /// Slowly varying amplitude `φ(x, t)`.
    fn amplitude(&self, x: &[f64], t: &[Complex64]) -> Complex64;
    /// Region for the derivative audit: a point drawn from it must lie where
    /// the callbacks are smooth. Defaults to the unit box around the origin.
    fn probe(&self, rng: &mut StdRng) -> (Vec<f64>, Vec<Complex64>) {
        let (n, m) = self.dims();
        let x = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = (0..m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        (x, t)
    }
}

/// Settings of the construction-time derivative audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub probes: usize,
    pub step: f64,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings {
            probes: 20,
            step: 1e-5,
            rel_tol: 1e-6,
            seed: 0x5eed,
        }
    }
}

/// Largest audit discrepancy found, for reporting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub worst_relative: f64,
    pub worst_what: String,
}

/// An audited integral with large parameter `lambda`.
pub struct SaddleProblem<P: Phase> {
    pub lambda: f64,
    phase: P,
    audit: AuditReport,
}

fn close(a: Complex64, b: Complex64, tol: f64) -> (bool, f64) {
    let scale = a.norm().max(b.norm()).max(1.0);
    let rel = (a - b).norm() / scale;
    (rel <= tol, rel)
}

impl<P: Phase> SaddleProblem<P> {
    pub fn new(lambda: f64, phase: P) -> Result<Self> {
        Self::with_audit(lambda, phase, AuditSettings::default())
    }

    pub fn with_audit(lambda: f64, phase: P, settings: AuditSettings) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain(format!("lambda must be positive, got {lambda}")));
        }
        let (_, m) = phase.dims();
        if m == 0 {
            return Err(domain("at least one integration variable is needed"));
        }
        let audit = audit(&phase, settings)?;
        Ok(SaddleProblem { lambda, phase, audit })
    }

    pub fn phase(&self) -> &P {
        &self.phase
    }

    pub fn audit_report(&self) -> &AuditReport {
        &self.audit
    }

    pub fn dims(&self) -> (usize, usize) {
        self.phase.dims()
    }
}

/// Checks every derivative callback against central differences at seeded
/// probe points. Derivatives in `t` are checked along both the real and the
/// imaginary direction, which also checks that `f` is holomorphic in `t`.
fn audit<P: Phase>(p: &P, s: AuditSettings) -> Result<AuditReport> {
    let (n, m) = p.dims();
    let h = s.step;
    let mut rng = StdRng::seed_from_u64(s.seed);
    let mut report = AuditReport::default();
    let mut check = |what: String, a: Complex64, num: Complex64| -> Result<()> {
        let (ok, rel) = close(a, num, s.rel_tol);
        if rel > report.worst_relative {
            report.worst_relative = rel;
            report.worst_what = what.clone();
        }
        if ok {
            Ok(())
        } else {
            Err(Error::DerivativeAudit {
                what,
                analytic: a.norm(),
                numeric: num.norm(),
            })
        }
    };
    let i = Complex64::new(0.0, 1.0);
    for _ in 0..s.probes {
        let (x, t) = p.probe(&mut rng);
        let gt = p.grad_t(&x, &t);
        let gx = p.grad_x(&x, &t);
        let mu = p.hess_tt(&x, &t);
        let sg = p.hess_xx(&x, &t);
        let ga = p.hess_tx(&x, &t);
        for j in 0..m {
            for dir in [Complex64::new(1.0, 0.0), i] {
                let mut tp = t.clone();
                let mut tm = t.clone();
                tp[j] += dir * h;
                tm[j] -= dir * h;
                let d = dir * (2.0 * h);
                check(format!("df/dt{j}"), gt[j], (p.f(&x, &tp) - p.f(&x, &tm)) / d)?;
                let dg = (p.grad_t(&x, &tp) - p.grad_t(&x, &tm)) / d;
                for k in 0..m {
                    check(format!("d2f/dt{k}dt{j}"), mu[(k, j)], dg[k])?;
                }
                let dgx = (p.grad_x(&x, &tp) - p.grad_x(&x, &tm)) / d;
                for k in 0..n {
                    check(format!("d2f/dx{k}dt{j}"), ga[(j, k)], dgx[k])?;
                }
            }
        }
        for k in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            check(format!("df/dx{k}"), gx[k], (p.f(&xp, &t) - p.f(&xm, &t)) / (2.0 * h))?;
            let dgx = (p.grad_x(&xp, &t) - p.grad_x(&xm, &t)) / Complex64::new(2.0 * h, 0.0);
            for q in 0..n {
                check(format!("d2f/dx{q}dx{k}"), sg[(q, k)], dgx[q])?;
            }
            let dgt = (p.grad_t(&xp, &t) - p.grad_t(&xm, &t)) / Complex64::new(2.0 * h, 0.0);
            for j in 0..m {
                check(format!("d2f/dt{j}dx{k}"), ga[(j, k)], dgt[j])?;
            }
        }
    }
    Ok(report)
}

/// Newton settings for the inner and outer solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub max_iter: usize,
    pub grad_tol: f64,
    /// `|det μ|` below this times `max|μ|^m` counts as singular.
    pub singular_tol: f64,
    pub starts: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            max_iter: 100,
            grad_tol: 1e-12,
            singular_tol: 1e-13,
            starts: 8,
        }
    }
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_nonsingular(mu: &CMat, tol: f64) -> Result<Complex64> {
    let det = mu.clone().lu().determinant();
    let scale = max_abs(mu).powi(mu.nrows() as i32);
    if !(det.norm() > tol * scale) || !det.norm().is_finite() {
        return Err(Error::DegenerateSaddle(det.norm()));
    }
    Ok(det)
}

/// Stationary point of `t ↦ f(x, t)`, by damped Newton with `t` treated as
/// holomorphic variables.
pub fn solve_stationary<P: Phase>(
    problem: &SaddleProblem<P>,
    x: &[f64],
    t_guess: &[Complex64],
    settings: NewtonSettings,
) -> Result<Vec<Complex64>> {
    let p = &problem.phase;
    let mut t = t_guess.to_vec();
    let mut g = p.grad_t(x, &t);
    for _ in 0..settings.max_iter {
        if g.norm() <= settings.grad_tol {
            check_nonsingular(&p.hess_tt(x, &t), settings.singular_tol)?;
            return Ok(t);
        }
        let mu = p.hess_tt(x, &t);
        let step = mu
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::NoSaddle("singular Hessian during Newton iteration".into()))?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<Complex64> = t.iter().zip(step.iter()).map(|(a, d)| a - d * scale).collect();
            let gt = p.grad_t(x, &trial);
            if gt.norm().is_finite() && gt.norm() < g.norm() {
                t = trial;
                g = gt;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if g.norm() <= settings.grad_tol {
        check_nonsingular(&p.hess_tt(x, &t), settings.singular_tol)?;
        return Ok(t);
    }
    Err(Error::NoSaddle(format!("Newton stalled at |grad| = {:e}", g.norm())))
}

/// All saddles found by a multi-start search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleSearch {
    /// Converged saddle nearest to the guess.
    pub chosen: Vec<Complex64>,
    /// Other distinct saddles found.
    pub others: Vec<Vec<Complex64>>,
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Newton from the guess; if that fails, from `settings.starts` guesses
/// spread on a circle of radius `0.5 (1 + |guess|)` around it.
pub fn solve_stationary_multi<P: Phase>(
    problem: &SaddleProblem<P>,
    x: &[f64],
    t_guess: &[Complex64],
    settings: NewtonSettings,
) -> Result<SaddleSearch> {
    let first = solve_stationary(problem, x, t_guess, settings);
    let mut found: Vec<Vec<Complex64>> = Vec::new();
    let mut last_err = match first {
        Ok(t) => {
            return Ok(SaddleSearch {
                chosen: t,
                others: Vec::new(),
            })
        }
        Err(e) => e,
    };
    let radius = 0.5 * (1.0 + t_guess.iter().map(|z| z.norm()).fold(0.0, f64::max));
    for k in 0..settings.starts {
        let ang = 2.0 * PI * (k as f64 + 0.5) / settings.starts as f64;
        let guess: Vec<Complex64> = t_guess
            .iter()
            .enumerate()
            .map(|(j, z)| z + Complex64::from_polar(radius, ang + j as f64))
            .collect();
        match solve_stationary(problem, x, &guess, settings) {
            Ok(t) => {
                if !found.iter().any(|s| distance(s, &t) < 1e-8 * (1.0 + radius)) {
                    found.push(t);
                }
            }
            Err(e) => last_err = e,
        }
    }
    if found.is_empty() {
        return Err(last_err);
    }
    found.sort_by(|a, b| distance(a, t_guess).partial_cmp(&distance(b, t_guess)).unwrap());
    let chosen = found.remove(0);
    Ok(SaddleSearch { chosen, others: found })
}

/// Square root of `det[-μ]` continued along a path of problems: each new root
/// takes the sign closest to the previous one. The first root is the
/// principal one, which is the positive root for a real positive-definite
/// `-μ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BranchTracker {
    prev: Option<Complex64>,
}

impl BranchTracker {
    pub fn new() -> Self {
        BranchTracker { prev: None }
    }

    pub fn sqrt(&mut self, d: Complex64) -> Complex64 {
        let mut s = d.sqrt();
        if let Some(p) = self.prev {
            if (s - p).norm() > (s + p).norm() {
                s = -s;
            }
        }
        self.prev = Some(s);
        s
    }
}

/// `ln F` of the saddle-point estimate; the branch of `sqrt(det[-μ])` comes
/// from `tracker` when given, otherwise the principal root is used.
pub fn log_estimate<P: Phase>(
    problem: &SaddleProblem<P>,
    x: &[f64],
    t0: &[Complex64],
    tracker: Option<&mut BranchTracker>,
) -> Result<Complex64> {
    let p = &problem.phase;
    let (_, m) = p.dims();
    let mu = p.hess_tt(x, t0);
    let det_neg = check_nonsingular(&(-mu), NewtonSettings::default().singular_tol)?;
    let root = match tracker {
        Some(tr) => tr.sqrt(det_neg),
        None => det_neg.sqrt(),
    };
    let lam = problem.lambda;
    let v = 0.5 * m as f64 * (2.0 * PI / lam).ln() + lam * p.f(x, t0) + p.amplitude(x, t0).ln() - root.ln();
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite("log_estimate"));
    }
    Ok(v)
}

/// The saddle-point estimate itself.
pub fn estimate<P: Phase>(problem: &SaddleProblem<P>, x: &[f64], t0: &[Complex64]) -> Result<Complex64> {
    Ok(log_estimate(problem, x, t0, None)?.exp())
}

/// Real point where `Re f(x, t₀(x))` is stationary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakLocation {
    pub x00: Vec<f64>,
    pub t00: Vec<Complex64>,
    pub iterations: usize,
}

/// Outer Newton on `Re ∂f/∂x (x, t₀(x)) = 0`, re-solving the inner saddle at
/// every iterate (continued from the previous one). Since `∂f/∂t = 0` at the
/// saddle, the total Hessian is the effective form `σ - γᵀ μ⁻¹ γ`.
pub fn locate_peak<P: Phase>(
    problem: &SaddleProblem<P>,
    x_guess: &[f64],
    t_guess: &[Complex64],
    settings: NewtonSettings,
) -> Result<PeakLocation> {
    let p = &problem.phase;
    let mut x = x_guess.to_vec();
    let mut t = solve_stationary_multi(problem, &x, t_guess, settings)
        .map_err(|e| Error::NoPeak(format!("inner saddle: {e}")))?
        .chosen;
    let grad = |x: &[f64], t: &[Complex64]| -> DVector<f64> { p.grad_x(x, t).map(|z| z.re) };
    let mut g = grad(&x, &t);
    for it in 0..settings.max_iter {
        if g.norm() <= 1e-10 {
            return Ok(PeakLocation {
                x00: x,
                t00: t,
                iterations: it,
            });
        }
        let eff = effective_form(p, &x, &t)?.map(|z| z.re);
        let step = eff
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::NoPeak("singular effective form".into()))?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let xt: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a - d * scale).collect();
            if let Ok(tt) = solve_stationary(problem, &xt, &t, settings) {
                let gt = grad(&xt, &tt);
                if gt.norm() < g.norm() {
                    x = xt;
                    t = tt;
                    g = gt;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if g.norm() <= 1e-10 {
        return Ok(PeakLocation {
            x00: x,
            t00: t,
            iterations: settings.max_iter,
        });
    }
    Err(Error::NoPeak(format!("outer Newton stalled at |grad| = {:e}", g.norm())))
}

fn effective_form<P: Phase>(p: &P, x: &[f64], t: &[Complex64]) -> Result<CMat> {
    let mu = p.hess_tt(x, t);
    let gamma = p.hess_tx(x, t);
    let sol = mu
        .lu()
        .solve(&gamma)
        .ok_or(Error::DegenerateSaddle(0.0))?;
    Ok(p.hess_xx(x, t) - gamma.transpose() * sol)
}

/// Local Gaussian model of `F` around `x₀₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub lambda: f64,
    pub x00: Vec<f64>,
    pub t00: Vec<Complex64>,
    pub f00: Complex64,
    pub phi00: Complex64,
    pub mu00: CMat,
    pub sigma00: CMat,
    pub gamma00: CMat,
    pub h: Vec<f64>,
    pub effective_form: CMat,
}

impl GaussianPacket {
    /// `(2π/λ)^{m/2} det[-μ₀₀]^{-1/2} φ₀₀ exp{λ f₀₀ + iλ hᵀδx + (λ/2) δxᵀ E δx}`.
    pub fn reconstruct(&self, dx: &[f64]) -> Complex64 {
        self.log_reconstruct(dx).exp()
    }

    pub fn log_reconstruct(&self, dx: &[f64]) -> Complex64 {
        let m = self.mu00.nrows();
        let lam = self.lambda;
        let d = DVector::from_iterator(dx.len(), dx.iter().map(|v| Complex64::new(*v, 0.0)));
        let quad = (d.transpose() * &self.effective_form * &d)[(0, 0)];
        let lin: f64 = self.h.iter().zip(dx).map(|(a, b)| a * b).sum();
        let det = (-self.mu00.clone()).lu().determinant();
        0.5 * m as f64 * (2.0 * PI / lam).ln() - 0.5 * det.ln() + self.phi00.ln()
            + lam * self.f00
            + Complex64::new(0.0, lam * lin)
            + 0.5 * lam * quad
    }

    /// Covariance of `|F|² ∝ exp{λ δxᵀ Re(E) δx}`, i.e. `(-2λ Re E)⁻¹`.
    pub fn density_covariance(&self) -> Option<DMatrix<f64>> {
        (self.effective_form.map(|z| z.re) * (-2.0 * self.lambda)).try_inverse()
    }

    pub fn density_sigmas(&self) -> Option<Vec<f64>> {
        let c = self.density_covariance()?;
        Some((0..c.nrows()).map(|i| c[(i, i)].sqrt()).collect())
    }
}

/// Second-order blocks at a located peak.
pub fn gaussian_expansion<P: Phase>(problem: &SaddleProblem<P>, peak: &PeakLocation) -> Result<GaussianPacket> {
    let p = &problem.phase;
    let (x, t) = (&peak.x00, &peak.t00);
    let mu = p.hess_tt(x, t);
    check_nonsingular(&mu, NewtonSettings::default().singular_tol)?;
    Ok(GaussianPacket {
        lambda: problem.lambda,
        x00: x.clone(),
        t00: t.clone(),
        f00: p.f(x, t),
        phi00: p.amplitude(x, t),
        mu00: mu,
        sigma00: p.hess_xx(x, t),
        gamma00: p.hess_tx(x, t),
        h: p.grad_x(x, t).iter().map(|z| z.im).collect(),
        effective_form: effective_form(p, x, t)?,
    })
}

pub mod families {
    //! Phases with known answers, used as benchmarks and in the demos.

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn v1(z: Complex64) -> CVec {
        DVector::from_element(1, z)
    }

    fn m1(z: Complex64) -> CMat {
        DMatrix::from_element(1, 1, z)
    }

    /// `∫ exp{-λ t²} dt = sqrt(π/λ)`.
    pub struct Gaussian;

    impl Phase for Gaussian {
        fn dims(&self) -> (usize, usize) {
            (0, 1)
        }
        fn f(&self, _: &[f64], t: &[Complex64]) -> Complex64 {
            -t[0] * t[0]
        }
        fn grad_t(&self, _: &[f64], t: &[Complex64]) -> CVec {
            v1(-2.0 * t[0])
        }
        fn grad_x(&self, _: &[f64], _: &[Complex64]) -> CVec {
            DVector::zeros(0)
        }
        fn hess_tt(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(-2.0, 0.0))
        }
        fn hess_xx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            DMatrix::zeros(0, 0)
        }
        fn hess_tx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            DMatrix::zeros(1, 0)
        }
        fn amplitude(&self, _: &[f64], _: &[Complex64]) -> Complex64 {
            c(1.0, 0.0)
        }
    }

    /// `f(x, t) = -t² + 2ixt`, so that `f(x, t₀) = -x²`.
    pub struct GaussianShift;

    impl Phase for GaussianShift {
        fn dims(&self) -> (usize, usize) {
            (1, 1)
        }
        fn f(&self, x: &[f64], t: &[Complex64]) -> Complex64 {
            -t[0] * t[0] + c(0.0, 2.0 * x[0]) * t[0]
        }
        fn grad_t(&self, x: &[f64], t: &[Complex64]) -> CVec {
            v1(-2.0 * t[0] + c(0.0, 2.0 * x[0]))
        }
        fn grad_x(&self, _: &[f64], t: &[Complex64]) -> CVec {
            v1(c(0.0, 2.0) * t[0])
        }
        fn hess_tt(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(-2.0, 0.0))
        }
        fn hess_xx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(0.0, 0.0))
        }
        fn hess_tx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(0.0, 2.0))
        }
        fn amplitude(&self, _: &[f64], _: &[Complex64]) -> Complex64 {
            c(1.0, 0.0)
        }
    }

    /// `f(x, t) = -(t - x)² - x²`.
    pub struct Separable;

    impl Phase for Separable {
        fn dims(&self) -> (usize, usize) {
            (1, 1)
        }
        fn f(&self, x: &[f64], t: &[Complex64]) -> Complex64 {
            let d = t[0] - x[0];
            -d * d - x[0] * x[0]
        }
        fn grad_t(&self, x: &[f64], t: &[Complex64]) -> CVec {
            v1(-2.0 * (t[0] - x[0]))
        }
        fn grad_x(&self, x: &[f64], t: &[Complex64]) -> CVec {
            v1(2.0 * (t[0] - x[0]) - 2.0 * x[0])
        }
        fn hess_tt(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(-2.0, 0.0))
        }
        fn hess_xx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(-4.0, 0.0))
        }
        fn hess_tx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(2.0, 0.0))
        }
        fn amplitude(&self, _: &[f64], _: &[Complex64]) -> Complex64 {
            c(1.0, 0.0)
        }
    }

    /// Stirling phase `f(x, t) = ln t - t (1 - i x)`. With `x = 0`,
    /// `Γ(λ+1) = λ^{λ+1} ∫₀^∞ exp{λ(ln t - t)} dt`.
    pub struct Stirling;

    impl Phase for Stirling {
        fn dims(&self) -> (usize, usize) {
            (1, 1)
        }
        fn f(&self, x: &[f64], t: &[Complex64]) -> Complex64 {
            t[0].ln() - t[0] * c(1.0, -x[0])
        }
        fn grad_t(&self, x: &[f64], t: &[Complex64]) -> CVec {
            v1(1.0 / t[0] - c(1.0, -x[0]))
        }
        fn grad_x(&self, _: &[f64], t: &[Complex64]) -> CVec {
            v1(c(0.0, 1.0) * t[0])
        }
        fn hess_tt(&self, _: &[f64], t: &[Complex64]) -> CMat {
            m1(-1.0 / (t[0] * t[0]))
        }
        fn hess_xx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(0.0, 0.0))
        }
        fn hess_tx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            m1(c(0.0, 1.0))
        }
        fn amplitude(&self, _: &[f64], _: &[Complex64]) -> Complex64 {
            c(1.0, 0.0)
        }
        fn probe(&self, rng: &mut StdRng) -> (Vec<f64>, Vec<Complex64>) {
            (
                vec![rng.random_range(-0.5..0.5)],
                vec![c(rng.random_range(0.5..1.5), rng.random_range(-0.3..0.3))],
            )
        }
    }

    /// `I0(λ) = (2π)⁻¹ ∫_{-π}^{π} exp{λ cos t} dt`.
    pub struct BesselI0;

    impl Phase for BesselI0 {
        fn dims(&self) -> (usize, usize) {
            (0, 1)
        }
        fn f(&self, _: &[f64], t: &[Complex64]) -> Complex64 {
            t[0].cos()
        }
        fn grad_t(&self, _: &[f64], t: &[Complex64]) -> CVec {
            v1(-t[0].sin())
        }
        fn grad_x(&self, _: &[f64], _: &[Complex64]) -> CVec {
            DVector::zeros(0)
        }
        fn hess_tt(&self, _: &[f64], t: &[Complex64]) -> CMat {
            m1(-t[0].cos())
        }
        fn hess_xx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            DMatrix::zeros(0, 0)
        }
        fn hess_tx(&self, _: &[f64], _: &[Complex64]) -> CMat {
            DMatrix::zeros(1, 0)
        }
        fn amplitude(&self, _: &[f64], _: &[Complex64]) -> Complex64 {
            c(1.0 / (2.0 * PI), 0.0)
        }
    }

    /// Circular AR packet as an integral over the `I0` period.
    ///
    /// With `λ = |ω|`, `u = ρ/λ`, `v = φ - φ₀`, `w = z/λ`, the `η = 0` closed
    /// form is `C e^{-r} I0(2 sqrt(-ω r₊))` and `-ω r₊ = λ² u e^{iv}`, so
    ///
    /// ```text
    /// ψ̄ = C (2π)⁻¹ ∫ exp{λ (-R + g cos t)} dt,  R = sqrt(u² + w²),  g = 2 sqrt(u) e^{iv/2}.
    /// ```
    pub struct CircularPacket;

    impl CircularPacket {
        fn g(x: &[f64]) -> Complex64 {
            Complex64::from_polar(2.0 * x[0].sqrt(), 0.5 * x[1])
        }
    }

    impl Phase for CircularPacket {
        fn dims(&self) -> (usize, usize) {
            (3, 1)
        }
        fn f(&self, x: &[f64], t: &[Complex64]) -> Complex64 {
            let r = x[0].hypot(x[2]);
            -r + Self::g(x) * t[0].cos()
        }
        fn grad_t(&self, x: &[f64], t: &[Complex64]) -> CVec {
            v1(-Self::g(x) * t[0].sin())
        }
        fn grad_x(&self, x: &[f64], t: &[Complex64]) -> CVec {
            let (u, w) = (x[0], x[2]);
            let r = u.hypot(w);
            let g = Self::g(x);
            let ct = t[0].cos();
            DVector::from_vec(vec![
                -u / r + g / (2.0 * u) * ct,
                c(0.0, 0.5) * g * ct,
                c(-w / r, 0.0),
            ])
        }
        fn hess_tt(&self, x: &[f64], t: &[Complex64]) -> CMat {
            m1(-Self::g(x) * t[0].cos())
        }
        fn hess_xx(&self, x: &[f64], t: &[Complex64]) -> CMat {
            let (u, w) = (x[0], x[2]);
            let r = u.hypot(w);
            let r3 = r * r * r;
            let g = Self::g(x) * t[0].cos();
            let uu = -w * w / r3 - g / (4.0 * u * u);
            let uv = c(0.0, 0.25) * g / u;
            let vv = -g / 4.0;
            let uw = c(u * w / r3, 0.0);
            let ww = c(-u * u / r3, 0.0);
            let z = c(0.0, 0.0);
            DMatrix::from_row_slice(3, 3, &[uu, uv, uw, uv, vv, z, uw, z, ww])
        }
        fn hess_tx(&self, x: &[f64], t: &[Complex64]) -> CMat {
            let u = x[0];
            let gs = -Self::g(x) * t[0].sin();
            DMatrix::from_row_slice(1, 3, &[gs / (2.0 * u), c(0.0, 0.5) * gs, c(0.0, 0.0)])
        }
        fn amplitude(&self, _: &[f64], _: &[Complex64]) -> Complex64 {
            c(1.0 / (2.0 * PI), 0.0)
        }
        fn probe(&self, rng: &mut StdRng) -> (Vec<f64>, Vec<Complex64>) {
            (
                vec![
                    rng.random_range(0.5..1.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.3..0.3),
                ],
                vec![c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))],
            )
        }
    }
}

/// Outcome of one benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPoint {
    pub lambda: f64,
    pub estimate: f64,
    pub exact: f64,
    pub rel_error: f64,
}

/// `Γ(λ+1)` from the Stirling phase, compared in log space with `ln Γ`.
pub fn stirling_benchmark(lambda: f64) -> Result<BenchmarkPoint> {
    let prob = SaddleProblem::new(lambda, families::Stirling)?;
    let x = [0.0];
    let t0 = solve_stationary(&prob, &x, &[Complex64::new(1.5, 0.0)], NewtonSettings::default())?;
    let log_f = log_estimate(&prob, &x, &t0, None)?.re + (lambda + 1.0) * lambda.ln();
    let exact = crate::specfun::log_gamma(lambda + 1.0)?;
    Ok(BenchmarkPoint {
        lambda,
        estimate: log_f,
        exact,
        rel_error: ((log_f - exact).exp() - 1.0).abs(),
    })
}

/// `I0(λ)` from the full-period integral, against `specfun`.
pub fn bessel_benchmark(lambda: f64) -> Result<BenchmarkPoint> {
    let prob = SaddleProblem::new(lambda, families::BesselI0)?;
    let t0 = solve_stationary(&prob, &[], &[Complex64::new(0.2, 0.0)], NewtonSettings::default())?;
    let log_f = log_estimate(&prob, &[], &t0, None)?.re;
    let exact = crate::specfun::log_bessel_i0(lambda);
    Ok(BenchmarkPoint {
        lambda,
        estimate: log_f,
        exact,
        rel_error: ((log_f - exact).exp() - 1.0).abs(),
    })
}

/// Density widths `(σ_ρ, σ_φ, σ_z)` and peak radius of the circular packet
/// family at `|ω| = lambda`, in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularPrediction {
    pub rho_peak: f64,
    pub sigma_rho: f64,
    pub sigma_phi: f64,
    pub sigma_z: f64,
    pub phase_gradient: f64,
}

pub fn circular_packet_prediction(lambda: f64) -> Result<CircularPrediction> {
    let prob = SaddleProblem::new(lambda, families::CircularPacket)?;
    let peak = locate_peak(
        &prob,
        &[0.8, 0.0, 0.0],
        &[Complex64::new(0.2, 0.0)],
        NewtonSettings::default(),
    )?;
    let gp = gaussian_expansion(&prob, &peak)?;
    let s = gp
        .density_sigmas()
        .ok_or_else(|| Error::NoPeak("effective form is singular".into()))?;
    Ok(CircularPrediction {
        rho_peak: lambda * gp.x00[0],
        sigma_rho: lambda * s[0],
        sigma_phi: s[1],
        sigma_z: lambda * s[2],
        // λ h_v: phase advance per radian of azimuth
        phase_gradient: lambda * gp.h[1],
    })
}
