//! Quadrature rules for the normalization and kernel integrals.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::specfun::log_gamma;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendreRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendreRule {
    /// # Panics
    /// If `degree` is zero.
    pub fn new(degree: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(degree).expect("degree must be nonzero"));
        let (nodes, weights) = rule.as_node_weight_pairs().iter().cloned().unzip();
        GaussLegendreRule { nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn nodes_on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (h, m) = (0.5 * (b - a), 0.5 * (a + b));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (m + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.nodes_on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Nodes of the composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite_nodes(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        (0..panels)
            .flat_map(|p| {
                let lo = a + p as f64 * h;
                self.nodes_on(lo, lo + h).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Generalized Gauss–Laguerre rule for `∫_0^∞ x^α e^{-x} f(x) dx`.
///
/// Nodes start from the eigenvalues of the Jacobi matrix and are polished by
/// Newton steps on `L_n^α`; weights come from the recurrence evaluated at the
/// polished nodes, in log space. The closed-form weights keep full relative
/// accuracy at several hundred nodes, where eigenvector-based weights lose
/// the tiny trailing ones.
#[derive(Debug, Clone)]
pub struct GaussLaguerreRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerreRule {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("Gauss-Laguerre needs at least one node"));
        }
        if !(alpha > -1.0) {
            return Err(domain(format!("Laguerre weight exponent must exceed -1, got {alpha}")));
        }
        let nf = n as f64;
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            let fi = i.max(j) as f64;
            if i == j {
                2.0 * i as f64 + alpha + 1.0
            } else if i.abs_diff(j) == 1 {
                (fi * (fi + alpha)).sqrt()
            } else {
                0.0
            }
        });
        let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().cloned().collect();
        guesses.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let log_norm = log_gamma(alpha + nf)? - log_gamma(nf)?;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for mut z in guesses {
            let mut state = laguerre_pair(n, alpha, z);
            for _ in 0..8 {
                let step = state.0 / state.2;
                if !step.is_finite() {
                    break;
                }
                z -= step;
                state = laguerre_pair(n, alpha, z);
                if step.abs() <= 4.0 * f64::EPSILON * z.abs() {
                    break;
                }
            }
            if !(z > 0.0) {
                return Err(Error::NonFinite("gauss_laguerre_nodes"));
            }
            let (_, p_prev, deriv, log_scale) = state;
            // w = -Γ(n+α)/Γ(n) / (L'_n(z) · n · L_{n-1}(z))
            let denom = deriv * nf * p_prev;
            let w = -(log_norm - denom.abs().ln() - 2.0 * log_scale).exp() * denom.signum();
            nodes.push(z);
            weights.push(w);
        }
        Ok(GaussLaguerreRule {
            alpha,
            nodes,
            weights,
        })
    }

    /// `∫_0^∞ x^α e^{-x/scale} f(x) dx` by substitution `x = scale·u`.
    pub fn integrate_scaled<F: FnMut(f64) -> f64>(&self, scale: f64, mut f: F) -> f64 {
        let jac = scale.powf(self.alpha + 1.0);
        jac * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * f(scale * u))
            .sum::<f64>()
    }
}

/// `(L_n^α(z), L_{n-1}^α(z), d/dz L_n^α(z))`, all divided by `exp(log_scale)`,
/// returned as the fourth entry so large degrees cannot overflow.
fn laguerre_pair(n: usize, alpha: f64, z: f64) -> (f64, f64, f64, f64) {
    let (mut p1, mut p2) = (1.0f64, 0.0f64);
    let mut log_scale = 0.0;
    for j in 0..n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = ((2.0 * jf + 1.0 + alpha - z) * p2 - (jf + alpha) * p3) / (jf + 1.0);
        if p1.abs() > 1e100 {
            p1 *= 1e-100;
            p2 *= 1e-100;
            log_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
    let nf = n as f64;
    (p1, p2, (nf * p1 - (nf + alpha) * p2) / z, log_scale)
}

/// Periodic trapezoid nodes `2πk/n` on `[0, 2π)` with equal weights.
pub fn periodic_nodes(n: usize) -> impl Iterator<Item = (f64, f64)> {
    let w = 2.0 * PI / n as f64;
    (0..n).map(move |k| (k as f64 * w, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::log_factorial;

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = GaussLegendreRule::new(6);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-11);
    }

    #[test]
    fn legendre_composite_matches_single() {
        let rule = GaussLegendreRule::new(20);
        let nodes = rule.composite_nodes(0.0, PI, 4);
        let v: f64 = nodes.iter().map(|(x, w)| w * x.sin()).sum();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_moments_high_degree() {
        for &alpha in &[0.0, 1.0, 2.5, 7.0] {
            for &n in &[5usize, 40, 150, 400] {
                let rule = GaussLaguerreRule::new(n, alpha).unwrap();
                for k in [0u32, 1, 5, 12] {
                    let got: f64 = rule
                        .nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(x, w)| w * x.powi(k as i32))
                        .sum();
                    let want = (log_gamma(alpha + k as f64 + 1.0).unwrap()).exp();
                    if (k as usize) < n {
                        assert!(
                            (got / want - 1.0).abs() < 1e-11,
                            "alpha={alpha} n={n} k={k}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn laguerre_scaled_exponential() {
        let rule = GaussLaguerreRule::new(30, 2.0).unwrap();
        // ∫ x² e^{-x/3} dx = 2·27
        let v = rule.integrate_scaled(3.0, |_| 1.0);
        assert!((v - 54.0).abs() < 1e-11);
        let v = rule.integrate_scaled(0.5, |x| x.powi(3));
        let want = (log_factorial(5) + 6.0 * 0.5f64.ln()).exp();
        assert!((v / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laguerre_rejects_bad_alpha() {
        assert!(GaussLaguerreRule::new(10, -1.5).is_err());
        assert!(GaussLaguerreRule::new(0, 0.0).is_err());
    }

    #[test]
    fn periodic_rule_is_exact_for_trig() {
        let v: f64 = periodic_nodes(16).map(|(p, w)| w * (3.0 * p).cos().powi(2)).sum();
        assert!((v - PI).abs() < 1e-14);
    }
}
