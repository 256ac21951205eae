//! Bound hydrogen eigenfunctions in atomic units.
//!
//! The auxiliary representation (AR) uses the scale-free radial functions
//!
//! ```text
//! ⟨r|n,l,m⟩‾ = 2/(2l+1)! · sqrt((n+l)!/(n-l-1)!) · (2r)^l e^{-r} · 1F1(l+1-n; b; 2r) · Y_lm
//! ```
//!
//! with `b = 2l+2`. AR states are orthonormal under the weighted measure
//! `d³r / r`. The physical representation (PR) follows by the dilation
//! `⟨r|n,l,m⟩ = n⁻² ⟨r/n|n,l,m⟩‾` and is orthonormal under plain `d³r`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::GaussLaguerreRule;
use crate::specfun::{kummer_terminating, log_factorial, sph_harm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitalLabel {
    n: u32,
    l: u32,
    m: i32,
}

impl OrbitalLabel {
    pub fn new(n: u32, l: u32, m: i32) -> Result<Self> {
        if n == 0 {
            return Err(domain("principal quantum number must be positive"));
        }
        if l >= n {
            return Err(domain(format!("l = {l} must be below n = {n}")));
        }
        if m.unsigned_abs() > l {
            return Err(domain(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(OrbitalLabel { n, l, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// Every label with `n ≤ n_max`, ordered by `n`, then `l`, then `m`.
    pub fn all_up_to(n_max: u32) -> Vec<OrbitalLabel> {
        let mut out = vec![];
        for n in 1..=n_max {
            for l in 0..n {
                for m in -(l as i32)..=(l as i32) {
                    out.push(OrbitalLabel { n, l, m });
                }
            }
        }
        out
    }
}

/// A point in Bohr radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn from_cylindrical(rho: f64, phi: f64, z: f64) -> Self {
        Point3::new(rho * phi.cos(), rho * phi.sin(), z)
    }

    pub fn from_spherical(r: f64, theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        Point3::new(r * s * phi.cos(), r * s * phi.sin(), r * theta.cos())
    }

    pub fn r(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Polar angle, `0` at the origin.
    pub fn theta(&self) -> f64 {
        self.rho().atan2(self.z)
    }

    pub fn phi(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// `x + i y`.
    pub fn r_plus(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn scaled(&self, f: f64) -> Self {
        Point3::new(self.x * f, self.y * f, self.z * f)
    }
}

/// Second parameter of the confluent factor in the AR radial function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RadialConvention {
    /// `b = 2l + 2`, the Laguerre correspondence `L^{2l+1}_{n-l-1}(2r)`.
    #[default]
    Laguerre,
    /// `b = 2l + 1`, kept as a negative control; not orthonormal.
    Shifted,
}

impl RadialConvention {
    pub fn b(self, l: u32) -> f64 {
        match self {
            RadialConvention::Laguerre => 2.0 * l as f64 + 2.0,
            RadialConvention::Shifted => 2.0 * l as f64 + 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rep {
    Ar,
    Pr,
}

/// `R(r) e^{r}`: the AR radial function without its exponential.
pub fn radial_ar_poly(n: u32, l: u32, r: f64, conv: RadialConvention) -> f64 {
    let k = (n - l - 1) as u64;
    let log_pref = std::f64::consts::LN_2 - log_factorial(2 * l as u64 + 1)
        + 0.5 * (log_factorial((n + l) as u64) - log_factorial(k));
    let power = if l == 0 { 1.0 } else { (2.0 * r).powi(l as i32) };
    log_pref.exp() * power * kummer_terminating(k as usize, conv.b(l), 2.0 * r)
}

pub fn radial_ar(n: u32, l: u32, r: f64, conv: RadialConvention) -> f64 {
    radial_ar_poly(n, l, r, conv) * (-r).exp()
}

pub fn psi_ar(label: OrbitalLabel, pt: Point3) -> Complex64 {
    psi_ar_with(label, pt, RadialConvention::Laguerre)
}

pub fn psi_ar_with(label: OrbitalLabel, pt: Point3, conv: RadialConvention) -> Complex64 {
    let radial = radial_ar(label.n, label.l, pt.r(), conv);
    // |m| ≤ l is guaranteed by the label
    radial * sph_harm(label.l, label.m, pt.theta(), pt.phi()).unwrap()
}

pub fn psi_pr(label: OrbitalLabel, pt: Point3) -> Complex64 {
    psi_pr_with(label, pt, RadialConvention::Laguerre)
}

pub fn psi_pr_with(label: OrbitalLabel, pt: Point3, conv: RadialConvention) -> Complex64 {
    let n = label.n as f64;
    psi_ar_with(label, pt.scaled(1.0 / n), conv) / (n * n)
}

pub fn psi(rep: Rep, label: OrbitalLabel, pt: Point3) -> Complex64 {
    match rep {
        Rep::Ar => psi_ar(label, pt),
        Rep::Pr => psi_pr(label, pt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    /// `d³r`
    Plain,
    /// `d³r / r`
    InverseR,
}

/// Largest `n` accepted by the Gram-matrix routines.
pub const GRAM_N_MAX: u32 = 15;

/// Gram matrix `⟨a|w|b⟩` over every label with `n ≤ n_max`.
///
/// Angular integrals are taken from the orthonormality of `Y_lm`; the radial
/// integral is done by generalized Gauss–Laguerre quadrature matched to the
/// pair's combined exponential, and repeated with ten more nodes as a
/// convergence check.
pub fn gram_matrix(
    rep: Rep,
    measure: Measure,
    n_max: u32,
    conv: RadialConvention,
) -> Result<DMatrix<f64>> {
    if n_max == 0 || n_max > GRAM_N_MAX {
        return Err(domain(format!("n_max must lie in 1..={GRAM_N_MAX}, got {n_max}")));
    }
    let labels = OrbitalLabel::all_up_to(n_max);
    let nodes = 2 * n_max as usize + 10;
    let alpha = match measure {
        Measure::Plain => 2.0,
        Measure::InverseR => 1.0,
    };
    let coarse = GaussLaguerreRule::new(nodes, alpha)?;
    let fine = GaussLaguerreRule::new(nodes + 10, alpha)?;
    let dim = labels.len();
    let mut g = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let (a, b) = (labels[i], labels[j]);
            if a.l != b.l || a.m != b.m {
                continue;
            }
            let v1 = radial_overlap(rep, a, b, &coarse, conv);
            let v2 = radial_overlap(rep, a, b, &fine, conv);
            if (v1 - v2).abs() > 1e-12 * v1.abs().max(1.0) {
                return Err(Error::Accuracy(format!(
                    "radial quadrature for {a:?}, {b:?} not converged: {v1} vs {v2}"
                )));
            }
            g[(i, j)] = v2;
            g[(j, i)] = v2;
        }
    }
    Ok(g)
}

fn radial_overlap(
    rep: Rep,
    a: OrbitalLabel,
    b: OrbitalLabel,
    rule: &GaussLaguerreRule,
    conv: RadialConvention,
) -> f64 {
    match rep {
        Rep::Ar => rule.integrate_scaled(0.5, |r| {
            radial_ar_poly(a.n, a.l, r, conv) * radial_ar_poly(b.n, b.l, r, conv)
        }),
        Rep::Pr => {
            let (na, nb) = (a.n as f64, b.n as f64);
            let scale = 1.0 / (1.0 / na + 1.0 / nb);
            rule.integrate_scaled(scale, |r| {
                radial_ar_poly(a.n, a.l, r / na, conv) * radial_ar_poly(b.n, b.l, r / nb, conv)
                    / (na * na * nb * nb)
            })
        }
    }
}

/// AR Gram matrix under `d³r / r`.
pub fn ar_norm_matrix(n_max: u32) -> Result<DMatrix<f64>> {
    gram_matrix(Rep::Ar, Measure::InverseR, n_max, RadialConvention::Laguerre)
}

/// PR Gram matrix under `d³r`.
pub fn pr_norm_matrix(n_max: u32) -> Result<DMatrix<f64>> {
    gram_matrix(Rep::Pr, Measure::Plain, n_max, RadialConvention::Laguerre)
}

/// Largest entry of `|G - I|`.
pub fn identity_deviation(g: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - want).abs());
        }
    }
    worst
}
