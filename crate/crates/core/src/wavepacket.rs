//! Composite coherent-state packets `|ω, 0, η⟩` on the circular-orbit subspace.
//!
//! The packet expands over hydrogen states `|n, l, l⟩` with coefficients
//!
//! ```text
//! c_{l,k} = I0(2|ω|)^{-1/2} · ω^l/l! · (1-|η|²)^{l+1}/sqrt((2l+1)!) · sqrt((k+2l+1)!/k!) · η^k,
//! n = k + l + 1.
//! ```
//!
//! Only `m = l` states enter, which is what lets the `l` sum close into a
//! Bessel function of `r₊ = x + i y`. The AR packet has the closed form
//!
//! ```text
//! ψ̄(r) = (π I0(2|ω|))^{-1/2} (1-|η|²)/(1-η)² · exp(-r(1+η)/(1-η))
//!         · I0(2 sqrt(-ω r₊ (1-|η|²)) / (1-η)).
//! ```
//!
//! Multiplying a series term by its AR state collapses the radial and angular
//! normalizations to
//!
//! ```text
//! c_{l,k} ψ̄_{n,l,l} = I0^{-1/2} π^{-1/2} · (-ω)^l (1-|η|²)^{l+1}/(l!)² · η^k L_k^{2l+1}(2r) e^{-r} r₊^l,
//! ```
//!
//! which is how both series evaluators sum it, with `r → r/n` and an extra
//! `n⁻²` per term in the physical representation.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::Frame;
use crate::hydrogenic::{Point3, Rep};
use crate::quadrature::{periodic_nodes, GaussLegendreRule, GaussLaguerreRule};
use crate::specfun::{bessel_i0_scaled, log_bessel_i0, log_factorial, SeriesControl, Stopper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketParams {
    pub omega: Complex64,
    pub eta: Complex64,
    pub rep: Rep,
}

impl PacketParams {
    pub fn new(omega: Complex64, eta: Complex64, rep: Rep) -> Result<Self> {
        if !(omega.re.is_finite() && omega.im.is_finite()) {
            return Err(domain("omega must be finite"));
        }
        if !(eta.norm() < 1.0) {
            return Err(domain(format!("|eta| must be below 1, got {}", eta.norm())));
        }
        Ok(PacketParams { omega, eta, rep })
    }

    pub fn with_rep(&self, rep: Rep) -> Self {
        PacketParams { rep, ..*self }
    }

    fn abs_eta_sq(&self) -> f64 {
        self.eta.norm_sqr()
    }
}

/// Half-width of the `l` window centred on `|ω|`.
pub fn l_window(abs_omega: f64) -> (u32, u32) {
    let hw = 10f64.max(6.0 * abs_omega.sqrt());
    let lo = (abs_omega - hw).floor().max(0.0) as u32;
    let hi = (abs_omega + hw).ceil() as u32;
    (lo, hi)
}

/// Log of the `l`-dependent prefactor `|ω|^l (1-|η|²)^{l+1} / (l!)²`
/// together with `-½ ln I0(2|ω|) - ½ ln π`.
fn log_block_prefactor(p: &PacketParams, l: u32, log_i0: f64) -> f64 {
    let lf = l as f64;
    let lw = if l == 0 { 0.0 } else { lf * p.omega.norm().ln() };
    lw + (lf + 1.0) * (1.0 - p.abs_eta_sq()).ln() - 2.0 * log_factorial(l as u64)
        - 0.5 * log_i0
        - 0.5 * PI.ln()
}

/// Coefficient table `c_{l,k}` of a packet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PacketExpansion {
    /// `(l, [c_{l,0}, c_{l,1}, ...])`.
    pub blocks: Vec<(u32, Vec<Complex64>)>,
}

impl PacketExpansion {
    pub fn weight(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|(_, c)| c.iter())
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// Coefficient-weighted mean principal quantum number.
    pub fn mean_n(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (l, cs) in &self.blocks {
            for (k, c) in cs.iter().enumerate() {
                let w = c.norm_sqr();
                num += w * (k as u32 + l + 1) as f64;
                den += w;
            }
        }
        num / den
    }
}

/// Builds the coefficient table. The `l` range starts from the window around
/// `|ω|` and is widened until the per-`l` weight `|ω|^{2l}/(l!)² / I0(2|ω|)`
/// is negligible; each `k` sum runs past the mode of its negative-binomial
/// weight until successive terms fall below `rel_tol` of the largest.
pub fn packet_coefficients(p: &PacketParams, ctl: SeriesControl) -> Result<PacketExpansion> {
    let w = p.omega.norm();
    let log_i0 = log_bessel_i0(2.0 * w);
    let (mut lo, mut hi) = l_window(w);
    let lw = |l: u32| -> f64 {
        let lf = l as f64;
        let a = if l == 0 { 0.0 } else { 2.0 * lf * w.ln() };
        a - 2.0 * log_factorial(l as u64) - log_i0
    };
    // weights are squared amplitudes
    let tol = 2.0 * ctl.rel_tol.ln();
    while lo > 0 && lw(lo - 1) > tol {
        lo -= 1;
    }
    while lw(hi + 1) > tol {
        hi += 1;
        if (hi - lo) as usize > ctl.max_terms {
            return Err(Error::Convergence {
                what: "packet_coefficients",
                terms: ctl.max_terms,
            });
        }
    }
    let a = p.abs_eta_sq();
    let eta_phase = p.eta.arg();
    let mut blocks = Vec::with_capacity((hi - lo + 1) as usize);
    for l in lo..=hi {
        let lf = l as f64;
        // log|c_{l,0}|²
        let base = lw(l) + 2.0 * (lf + 1.0) * (1.0 - a).ln();
        let phase0 = lf * p.omega.arg();
        let mut cs = vec![Complex64::from_polar((0.5 * base).exp(), phase0)];
        if a > 0.0 {
            let mut logk = base;
            let mut stop = Stopper::new(ctl);
            let mut peak = base;
            let mut k = 0usize;
            loop {
                let kf = k as f64;
                let step = ((kf + 2.0 * lf + 2.0) / (kf + 1.0)).ln() + a.ln();
                logk += step;
                k += 1;
                peak = peak.max(logk);
                cs.push(Complex64::from_polar(
                    (0.5 * logk).exp(),
                    phase0 + k as f64 * eta_phase,
                ));
                if step < 0.0 && stop.done((0.5 * (logk - peak)).exp(), 1.0) {
                    break;
                }
                if k >= ctl.max_terms {
                    return Err(Error::Convergence {
                        what: "packet_coefficients",
                        terms: ctl.max_terms,
                    });
                }
            }
        }
        blocks.push((l, cs));
    }
    Ok(PacketExpansion { blocks })
}

/// `(L_k^α(x), log_scale)` for a single degree.
fn laguerre_scaled(k: usize, alpha: f64, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    let mut log_scale = 0.0;
    for j in 0..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (cur, log_scale)
}

/// Stopping rule shared by both series evaluators.
///
/// The double series cancels heavily away from the packet, so its absolute
/// error is set by the largest term, not by the sum. Truncation therefore
/// aims at `rel_tol` times the largest term seen at this point. Inner `k`
/// sums stop on a rigorous bound (`|L_k^α(x)| e^{-x/2} ≤ C(k+α, k)`) once the
/// bound is decreasing; the `l` sum stops once it is past both the window and
/// the mode of the block bound and the block maxima have been negligible and
/// decreasing for `consecutive_small` blocks.
struct Truncation {
    ctl: SeriesControl,
    l_min_stop: u32,
    largest: f64,
    l_stop: Stopper,
    last_block: f64,
}

impl Truncation {
    fn new(p: &PacketParams, rho_eff: f64, ctl: SeriesControl) -> Self {
        let w = p.omega.norm();
        let ae = p.eta.norm();
        let mode = (w * rho_eff * (1.0 - ae * ae)).sqrt() / (1.0 - ae);
        Truncation {
            ctl,
            l_min_stop: l_window(w).1.max(mode.ceil() as u32),
            largest: 0.0,
            l_stop: Stopper::new(ctl),
            last_block: f64::INFINITY,
        }
    }

    fn see(&mut self, term: f64) {
        if term > self.largest {
            self.largest = term;
        }
    }

    fn k_stopper(&self) -> Stopper {
        Stopper::new(self.ctl)
    }

    fn l_done(&mut self, l: u32, block_max: f64) -> bool {
        let decreasing = block_max <= self.last_block;
        self.last_block = block_max;
        let small = self.l_stop.done(block_max, self.largest);
        l >= self.l_min_stop && decreasing && small
    }
}

/// AR packet amplitude by direct summation of the double series.
pub fn packet_series_ar(p: &PacketParams, pt: Point3, ctl: SeriesControl) -> Result<Complex64> {
    let w = p.omega.norm();
    let log_i0 = log_bessel_i0(2.0 * w);
    let r = pt.r();
    let rho = pt.rho();
    let phi = pt.phi();
    let ae = p.eta.norm();
    let x = 2.0 * r;
    let mut total = Complex64::new(0.0, 0.0);
    let mut trunc = Truncation::new(p, rho, ctl);
    for l in 0..=ctl.max_terms as u32 {
        if l > 0 && rho == 0.0 {
            // on the axis only l = 0 survives
            return finite(total);
        }
        let lf = l as f64;
        let alpha = 2.0 * lf + 1.0;
        let log_rho_l = if l == 0 { 0.0 } else { lf * rho.ln() };
        // log of |P_l| ρ^l e^{-r}; `cur` carries η^k L_k^α(2r) / e^{log_scale}
        let mut log_pref = log_block_prefactor(p, l, log_i0) + log_rho_l - r;
        let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let mut sum = cur;
        let mut block_max = log_pref.exp();
        trunc.see(block_max);
        if ae > 0.0 {
            let mut env = log_pref + r;
            let mut stop = trunc.k_stopper();
            let mut k = 0usize;
            loop {
                let kf = k as f64;
                let next = p.eta * ((2.0 * kf + 1.0 + alpha - x) * cur - p.eta * (kf + alpha) * prev)
                    / (kf + 1.0);
                prev = cur;
                cur = next;
                sum += cur;
                let step = ((kf + 1.0 + alpha) / (kf + 1.0)).ln() + ae.ln();
                env += step;
                let t = cur.norm() * log_pref.exp();
                block_max = block_max.max(t);
                trunc.see(t);
                if cur.norm() > 1e150 {
                    prev *= 1e-150;
                    cur *= 1e-150;
                    sum *= 1e-150;
                    log_pref += 150.0 * std::f64::consts::LN_10;
                }
                k += 1;
                if step < 0.0 && stop.done(env.exp(), trunc.largest) {
                    break;
                }
                if k >= ctl.max_terms {
                    return Err(Error::Convergence {
                        what: "packet_series_ar",
                        terms: ctl.max_terms,
                    });
                }
            }
        }
        let phase = lf * (p.omega.arg() + phi + PI);
        total += sum * Complex64::from_polar(log_pref.exp(), phase);
        if trunc.l_done(l, block_max) {
            return finite(total);
        }
    }
    Err(Error::Convergence {
        what: "packet_series_ar",
        terms: ctl.max_terms,
    })
}

/// PR packet amplitude: the same coefficients on physical states, each term
/// evaluated at `r/n` with weight `n⁻²`.
pub fn packet_series_pr(p: &PacketParams, pt: Point3, ctl: SeriesControl) -> Result<Complex64> {
    let w = p.omega.norm();
    let log_i0 = log_bessel_i0(2.0 * w);
    let r = pt.r();
    let rho = pt.rho();
    let phi = pt.phi();
    let ae = p.eta.norm();
    let log_ae = ae.ln();
    let mut total = Complex64::new(0.0, 0.0);
    // the physical packet sits at ρ ~ n², so the block mode uses ρ/n
    let n_typ = orbit_params(p).n_inf.max(1.0);
    let mut trunc = Truncation::new(p, rho / n_typ, ctl);
    for l in 0..=ctl.max_terms as u32 {
        if l > 0 && rho == 0.0 {
            return finite(total);
        }
        let lf = l as f64;
        let alpha = 2.0 * lf + 1.0;
        let log_pref = log_block_prefactor(p, l, log_i0);
        let phase_l = lf * (p.omega.arg() + phi + PI);
        let mut block = Complex64::new(0.0, 0.0);
        let mut block_max = 0.0f64;
        let mut stop = trunc.k_stopper();
        // log of |η|^k C(k+α, k)
        let mut env = 0.0f64;
        let mut k = 0usize;
        loop {
            let n = (k as u32 + l + 1) as f64;
            let log_rho_l = if l == 0 { 0.0 } else { lf * (rho / n).ln() };
            let common = log_pref + log_rho_l - 2.0 * n.ln();
            let (lag, scale) = laguerre_scaled(k, alpha, 2.0 * r / n);
            let log_eta_k = if k == 0 { 0.0 } else { k as f64 * log_ae };
            let mag = (common + log_eta_k - r / n + scale).exp() * lag;
            let term = Complex64::from_polar(mag, phase_l + k as f64 * p.eta.arg());
            block += term;
            block_max = block_max.max(mag.abs());
            trunc.see(mag.abs());
            if ae == 0.0 {
                break;
            }
            // |L_k^α(x)| e^{-x/2} ≤ C(k+α, k), and the bound on later terms
            // only shrinks further through (ρ/n)^l n⁻²
            let bound = (common + env).exp();
            let step = ((k as f64 + 1.0 + alpha) / (k as f64 + 1.0)).ln() + log_ae;
            if step < 0.0 && stop.done(bound, trunc.largest) {
                break;
            }
            env += step;
            k += 1;
            if k >= ctl.max_terms {
                return Err(Error::Convergence {
                    what: "packet_series_pr",
                    terms: ctl.max_terms,
                });
            }
        }
        total += block;
        if trunc.l_done(l, block_max) {
            return finite(total);
        }
    }
    Err(Error::Convergence {
        what: "packet_series_pr",
        terms: ctl.max_terms,
    })
}

pub fn packet_series(p: &PacketParams, pt: Point3, ctl: SeriesControl) -> Result<Complex64> {
    match p.rep {
        Rep::Ar => packet_series_ar(p, pt, ctl),
        Rep::Pr => packet_series_pr(p, pt, ctl),
    }
}

fn finite(z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite("packet amplitude"))
    }
}

/// Closed-form AR amplitude. All large exponentials are combined in log space
/// before exponentiation, so `|ω|` in the hundreds is fine.
pub fn packet_closed_ar(p: &PacketParams, pt: Point3) -> Complex64 {
    let (mantissa, log_mag) = packet_closed_ar_parts(p, pt);
    mantissa * log_mag.exp()
}

/// `ln |ψ̄|²` of the closed form; finite far into the tails.
pub fn log_density_closed_ar(p: &PacketParams, pt: Point3) -> f64 {
    let (mantissa, log_mag) = packet_closed_ar_parts(p, pt);
    2.0 * (mantissa.norm().ln() + log_mag)
}

fn packet_closed_ar_parts(p: &PacketParams, pt: Point3) -> (Complex64, f64) {
    let one = Complex64::new(1.0, 0.0);
    let a = 1.0 - p.abs_eta_sq();
    let om = one - p.eta;
    let arg = 2.0 * (-p.omega * pt.r_plus() * a).sqrt() / om;
    let decay = pt.r() * (one + p.eta) / om;
    let log_mag = -0.5 * PI.ln() - 0.5 * log_bessel_i0(2.0 * p.omega.norm()) + arg.re.abs()
        - decay.re;
    let mantissa = a / (om * om) * Complex64::from_polar(1.0, -decay.im) * bessel_i0_scaled(arg);
    (mantissa, log_mag)
}

/// Center-orbit geometry of an AR packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitGeometry {
    pub n_inf: f64,
    pub ecc: f64,
    /// Rotation of the orbit frame against the lab `x` axis.
    pub orientation: f64,
    /// Eccentric anomaly at which the packet is centred.
    pub predicted_anomaly: f64,
}

impl OrbitGeometry {
    /// `(x₀, y₀)` in the orbit frame.
    pub fn center_orbit_frame(&self, theta: f64) -> (f64, f64) {
        (
            self.n_inf * (self.ecc - theta.cos()),
            self.n_inf * (1.0 - self.ecc * self.ecc).sqrt() * theta.sin(),
        )
    }

    /// `(x₀, y₀)` rotated into the lab frame.
    pub fn center(&self, theta: f64) -> (f64, f64) {
        let (x, y) = self.center_orbit_frame(theta);
        let (s, c) = self.orientation.sin_cos();
        (c * x - s * y, s * x + c * y)
    }

    /// `|((x - n e)/a')² + (y/b')² - 1|` for a lab-frame point, with
    /// `a' = n_inf` and `b' = n_inf sqrt(1-e²)`.
    pub fn ellipse_residual(&self, x: f64, y: f64) -> f64 {
        let (s, c) = self.orientation.sin_cos();
        let (u, v) = (c * x + s * y, -s * x + c * y);
        let a = self.n_inf;
        let b = self.n_inf * (1.0 - self.ecc * self.ecc).sqrt();
        (((u - self.n_inf * self.ecc) / a).powi(2) + (v / b).powi(2) - 1.0).abs()
    }

    /// Anomaly whose center lies closest to a lab-frame point.
    pub fn fit_anomaly(&self, x: f64, y: f64) -> f64 {
        let dist = |t: f64| {
            let (cx, cy) = self.center(t);
            (cx - x).powi(2) + (cy - y).powi(2)
        };
        let coarse = (0..720)
            .map(|i| -PI + 2.0 * PI * i as f64 / 720.0)
            .min_by(|a, b| dist(*a).partial_cmp(&dist(*b)).unwrap())
            .unwrap();
        // golden-section refinement on one coarse cell
        let (mut lo, mut hi) = (coarse - 2.0 * PI / 720.0, coarse + 2.0 * PI / 720.0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if dist(m1) < dist(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        0.5 * (lo + hi)
    }
}

pub fn orbit_params(p: &PacketParams) -> OrbitGeometry {
    let a = p.abs_eta_sq();
    let ae = p.eta.norm();
    let theta = if ae > 0.0 { p.eta.arg() } else { 0.0 };
    OrbitGeometry {
        n_inf: p.omega.norm() * (1.0 + a) / (1.0 - a),
        ecc: 2.0 * ae / (1.0 + a),
        orientation: theta - p.omega.arg(),
        predicted_anomaly: theta,
    }
}

/// `(1-|η|²)² / |1-η|⁴`.
pub fn elliptic_width_factor(eta: Complex64) -> f64 {
    (1.0 - eta.norm_sqr()).powi(2) / (Complex64::new(1.0, 0.0) - eta).norm_sqr().powi(2)
}

/// Gaussian model of a packet density, `prefactor · exp(-dᵀ Q d)` with
/// `d` the displacement from `center` in the coordinates of `frame`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDensityModel {
    pub frame: Frame,
    pub prefactor: f64,
    pub center: [f64; 3],
    pub quadratic_form: Matrix3<f64>,
    /// Phase advance per unit azimuth of the amplitude; zero when the model
    /// carries no phase.
    pub phase_gradient: f64,
}

impl GaussianDensityModel {
    pub fn displacement(&self, pt: Point3) -> [f64; 3] {
        let c = self.center;
        match self.frame {
            Frame::Cartesian => [pt.x - c[0], pt.y - c[1], pt.z - c[2]],
            Frame::Cylindrical => [pt.rho() - c[0], wrap_angle(pt.phi() - c[1]), pt.z - c[2]],
        }
    }

    pub fn density(&self, pt: Point3) -> f64 {
        let d = nalgebra::Vector3::from(self.displacement(pt));
        self.prefactor * (-(d.transpose() * self.quadratic_form * d)[(0, 0)]).exp()
    }

    /// Standard deviations along the axes, read from the diagonal of `Q`
    /// (the model's density is `∝ exp(-d²/(2σ²))` along each axis).
    pub fn sigmas(&self) -> [f64; 3] {
        let q = &self.quadratic_form;
        [0, 1, 2].map(|i| 1.0 / (2.0 * q[(i, i)]).sqrt())
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Azimuth of the packet peak for `η = 0`.
pub fn circular_peak_phi(omega: Complex64) -> f64 {
    wrap_angle(PI - omega.arg())
}

/// Circular-orbit Gaussian density models in cylindrical coordinates.
pub fn circular_model(p: &PacketParams) -> Result<GaussianDensityModel> {
    if p.eta.norm() != 0.0 {
        return Err(domain("the circular estimate needs eta = 0"));
    }
    let w = p.omega.norm();
    if w < 1.0 {
        return Err(domain("the circular estimate needs |omega| >= 1"));
    }
    let phi0 = circular_peak_phi(p.omega);
    let (prefactor, center, diag) = match p.rep {
        Rep::Ar => (
            1.0 / (2.0 * PI.powf(1.5) * w.sqrt()),
            [w, phi0, 0.0],
            [1.0 / (2.0 * w), w / 2.0, 1.0 / w],
        ),
        Rep::Pr => (
            1.0 / (5.0 * PI.powf(1.5) * w.powf(4.5)),
            [w * w, phi0, 0.0],
            [1.0 / (5.0 * w.powi(3)), w / 5.0, 1.0 / w.powi(3)],
        ),
    };
    Ok(GaussianDensityModel {
        frame: Frame::Cylindrical,
        prefactor,
        center,
        quadratic_form: Matrix3::from_diagonal(&nalgebra::Vector3::from(diag)),
        phase_gradient: w,
    })
}

/// Circular-orbit Gaussian amplitude, including its phase.
pub fn gaussian_circular(p: &PacketParams, pt: Point3) -> Result<Complex64> {
    let model = circular_model(p)?;
    let w = p.omega.norm();
    let [dr, dp, z] = model.displacement(pt);
    let expo = match p.rep {
        Rep::Ar => Complex64::new(
            -z * z / (2.0 * w) - w * dp * dp / 4.0 - dr * dr / (4.0 * w),
            w * dp + dr * dp / 2.0,
        ),
        Rep::Pr => Complex64::new(
            -z * z / (2.0 * w.powi(3)) - w * dp * dp / 10.0 - dr * dr / (10.0 * w.powi(3)),
            w * dp + 2.0 * dr * dp / (5.0 * w),
        ),
    };
    Ok(expo.exp() * model.prefactor.sqrt())
}

/// Elliptic-orbit Gaussian density model in lab Cartesian coordinates,
/// centred on the orbit point with eccentric anomaly `theta`.
pub fn elliptic_model(p: &PacketParams, theta: f64) -> Result<GaussianDensityModel> {
    if p.rep != Rep::Ar {
        return Err(domain("the elliptic estimate exists for the auxiliary representation only"));
    }
    let w = p.omega.norm();
    if w <= 0.0 {
        return Err(domain("the elliptic estimate needs omega != 0"));
    }
    let c2 = elliptic_width_factor(p.eta);
    let (x0, y0) = orbit_params(p).center(theta);
    let q = c2 / (2.0 * w);
    Ok(GaussianDensityModel {
        frame: Frame::Cartesian,
        prefactor: c2 / (2.0 * PI.powf(1.5) * w.sqrt()),
        center: [x0, y0, 0.0],
        quadratic_form: Matrix3::from_diagonal(&nalgebra::Vector3::new(q, q, 2.0 * q)),
        phase_gradient: 0.0,
    })
}

pub fn gaussian_elliptic_density(p: &PacketParams, theta: f64, pt: Point3) -> Result<f64> {
    Ok(elliptic_model(p, theta)?.density(pt))
}

/// Approximate kernel mapping AR packets to PR packets.
pub fn kernel_k(pt1: Point3, pt2: Point3) -> Result<Complex64> {
    let rho2 = pt2.rho();
    if !(rho2 > 0.0) {
        return Err(domain("kernel_k needs rho2 > 0"));
    }
    let dphi = wrap_angle(pt1.phi() - pt2.phi());
    let drho = pt1.rho() - rho2 * rho2;
    let (z1, z2) = (pt1.z, pt2.z);
    let r3 = rho2.powi(3);
    let expo = Complex64::new(
        -z2 * z2 / (2.0 * rho2) - z1 * z1 / (2.0 * r3) - rho2 * dphi * dphi / 10.0
            - drho * drho / (10.0 * r3),
        rho2 * dphi + 2.0 * drho * dphi / (5.0 * rho2),
    );
    Ok(expo.exp() / (10.0 * PI.powi(3) * rho2.powi(5)).sqrt())
}

/// Pre-sampled source packet for repeated kernel integrals:
/// `∫ d³r₂/r₂ K(r₁, r₂) ψ̄(r₂)` on a cylindrical product rule.
#[derive(Debug, Clone)]
pub struct KernelMap {
    /// `(point, weight · ψ̄(point))`, with the `1/r₂` measure folded in.
    samples: Vec<(Point3, Complex64)>,
}

impl KernelMap {
    /// Gauss–Legendre in `ρ₂` and `z₂` and in `φ₂`, each over `±half_width`
    /// predicted standard deviations of the circular AR packet.
    pub fn new(p: &PacketParams, half_width: f64, nodes: [usize; 3]) -> Result<Self> {
        let model = circular_model(&p.with_rep(Rep::Ar))?;
        let s = model.sigmas();
        let c = model.center;
        let rules = nodes.map(GaussLegendreRule::new);
        let rho: Vec<_> = rules[0]
            .nodes_on((c[0] - half_width * s[0]).max(1e-3), c[0] + half_width * s[0])
            .collect();
        let phi: Vec<_> = rules[1]
            .nodes_on(c[1] - half_width * s[1], c[1] + half_width * s[1])
            .collect();
        let z: Vec<_> = rules[2].nodes_on(-half_width * s[2], half_width * s[2]).collect();
        let src = p.with_rep(Rep::Ar);
        let mut samples = Vec::with_capacity(rho.len() * phi.len() * z.len());
        for &(r, wr) in &rho {
            for &(f, wf) in &phi {
                for &(zz, wz) in &z {
                    let pt = Point3::from_cylindrical(r, f, zz);
                    let w = wr * wf * wz * r / pt.r();
                    samples.push((pt, packet_closed_ar(&src, pt) * w));
                }
            }
        }
        Ok(KernelMap { samples })
    }

    pub fn apply(&self, pt1: Point3) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (pt2, v) in &self.samples {
            acc += kernel_k(pt1, *pt2)? * v;
        }
        Ok(acc)
    }
}

/// Quadrature settings for the AR normalization integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormQuadrature {
    pub radial_panels: usize,
    pub radial_nodes: usize,
    pub polar_nodes: usize,
    pub azimuth_nodes: usize,
}

impl Default for NormQuadrature {
    fn default() -> Self {
        NormQuadrature {
            radial_panels: 16,
            radial_nodes: 24,
            polar_nodes: 64,
            azimuth_nodes: 96,
        }
    }
}

/// Radius beyond which an AR packet carries no weight at double precision.
fn ar_radial_extent(p: &PacketParams) -> f64 {
    let w = p.omega.norm();
    let ae = p.eta.norm();
    let stretch = (1.0 + ae) / (1.0 - ae);
    w * stretch + 14.0 * (w + 1.0).sqrt() * stretch + 25.0 / (1.0 - ae)
}

/// `∫ |ψ̄|² d³r / r` of the closed form on a spherical product rule:
/// composite Gauss–Legendre in `r`, Gauss–Legendre in `cos θ`, periodic
/// trapezoid in `φ`.
pub fn norm_ar_closed(p: &PacketParams, q: NormQuadrature) -> f64 {
    let rmax = ar_radial_extent(p);
    let rrule = GaussLegendreRule::new(q.radial_nodes);
    let rnodes = rrule.composite_nodes(0.0, rmax, q.radial_panels);
    let trule = GaussLegendreRule::new(q.polar_nodes);
    let tnodes: Vec<_> = trule.nodes_on(-1.0, 1.0).collect();
    let pnodes: Vec<_> = periodic_nodes(q.azimuth_nodes).collect();
    let src = p.with_rep(Rep::Ar);
    rnodes
        .par_iter()
        .map(|&(r, wr)| {
            let mut acc = 0.0;
            for &(ct, wt) in &tnodes {
                let th = ct.acos();
                for &(ph, wp) in &pnodes {
                    let pt = Point3::from_spherical(r, th, ph);
                    acc += wt * wp * packet_closed_ar(&src, pt).norm_sqr();
                }
            }
            // d³r / r = r dr dΩ
            acc * wr * r
        })
        .sum()
}

/// Physical radial function `R_{n,l}(r)` with `n = k + l + 1`, as
/// `(mantissa, log_scale)`:
/// `2 sqrt(k!/(n+l)!) (2r/n)^l e^{-r/n} L_k^{2l+1}(2r/n) / n²`.
fn radial_pr_scaled(k: usize, l: u32, r: f64) -> (f64, f64) {
    let n = (k as u32 + l + 1) as f64;
    let x = 2.0 * r / n;
    let (lag, scale) = laguerre_scaled(k, 2.0 * l as f64 + 1.0, x);
    let log_pow = if l == 0 { 0.0 } else { l as f64 * x.ln() };
    let log_norm = 2f64.ln() + 0.5 * (log_factorial(k as u64) - log_factorial(k as u64 + 2 * l as u64 + 1));
    (lag, log_norm + log_pow + scale - r / n - 2.0 * n.ln())
}

/// `∫ |ψ|² d³r` of the PR series.
///
/// Different `l` carry different `m = l` and are orthogonal in `φ`, and
/// `|Y_ll|²` integrates to one over the sphere, so the integral splits into
/// one radial integral per `l` of `|Σ_k c_{l,k} R_{n,l}(r)|² r²`, done by
/// Gauss–Laguerre with exponent 2 matched to the slowest decay `e^{-2r/n}`.
pub fn norm_pr_series(p: &PacketParams, ctl: SeriesControl) -> Result<f64> {
    let exp = packet_coefficients(p, ctl)?;
    let n_max = exp.blocks.iter().map(|(l, cs)| *l as usize + cs.len()).max().unwrap_or(1);
    // one rule for every block; terms with n well below the block's largest
    // decay much faster than the weight, which costs nodes
    let rule = GaussLaguerreRule::new(4 * n_max + 80, 2.0)?;
    let parts: Vec<f64> = exp
        .blocks
        .par_iter()
        .map(|(l, cs)| {
            let l = *l;
            let n_top = l as usize + cs.len();
            let scale = n_top as f64 / 2.0;
            let tilt = 1.0 / scale;
            // ∫ r² e^{-r/scale} g(r) dr with g = |Σ|² e^{r/scale}; the node weight
            // is folded into each term in log form so far nodes cannot overflow
            let jac = scale.powi(3);
            let mut total = 0.0;
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                if w <= 0.0 {
                    continue;
                }
                let r = scale * u;
                let shift = 0.5 * (tilt * r + w.ln());
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, c) in cs.iter().enumerate() {
                    let (m, log_mag) = radial_pr_scaled(k, l, r);
                    acc += c * m * (log_mag + shift).exp();
                }
                total += acc.norm_sqr();
            }
            jac * total
        })
        .collect();
    Ok(parts.iter().sum())
}
