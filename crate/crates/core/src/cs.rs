//! Generalized hypergeometric coherent states and the `O(3)` / `O(2,1)`
//! ladder algebras they live in.
//!
//! A family is fixed by integer upper parameters `α` (negative ones first)
//! and positive lower parameters `ρ`. Its coherent state has coefficients
//!
//! ```text
//! c_n = N⁻¹ sqrt(|Π(α_i)_n| / Π(ρ_j)_n) ξⁿ / sqrt(n!),   N² = pFq(α; ρ; (-1)^l |ξ|²)
//! ```
//!
//! Generator conventions. Both algebras are written with three hermitian
//! generators obeying
//!
//! ```text
//! [E1, E2] = -i ε E3,   [E2, E3] = -i E1,   [E3, E1] = -i E2
//! ```
//!
//! with `ε = +1` for `O(3)` and `ε = -1` for `O(2,1)`, so that the weight
//! basis `|K⟩` satisfies `E3 |K⟩ = (S/2 - ε K) |K⟩`. With these commutators
//! the Casimir `E1² + E2² + ε E3²` equals `S/2 + ε S²/4` on every basis state:
//! `j(j+1)` with `j = S/2` for `O(3)` and `k(1-k)` with `k = S/2` for `O(2,1)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::specfun::{log_sum_exp, pfq_scaled, SeriesControl, Stopper};

/// Parameter signature `(p, q, α, ρ)` of a hypergeometric coherent-state family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricSpec {
    alphas: Vec<i64>,
    rhos: Vec<f64>,
    l_neg: usize,
}

/// Which of the three classical-limit regimes a signature falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// `p = q + 1`, all `α` positive: the disk-type families.
    NonCompact,
    /// At least one negative `α`: finite expansions.
    Compact,
    /// `q ≥ p`, all `α` positive: entire normalization.
    Entire,
}

impl HypergeometricSpec {
    /// Negative `α` are moved to the front, keeping their relative order.
    pub fn new(alphas: Vec<i64>, rhos: Vec<f64>) -> Result<Self> {
        if alphas.contains(&0) {
            return Err(domain("upper parameters must be nonzero integers"));
        }
        if let Some(r) = rhos.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(domain(format!("lower parameters must be positive, got {r}")));
        }
        let (mut neg, pos): (Vec<i64>, Vec<i64>) = alphas.into_iter().partition(|&a| a < 0);
        let l_neg = neg.len();
        neg.extend(pos);
        Ok(HypergeometricSpec {
            alphas: neg,
            rhos,
            l_neg,
        })
    }

    /// Harmonic-oscillator states, `p = q = 0`.
    pub fn oscillator() -> Self {
        HypergeometricSpec::new(vec![], vec![]).unwrap()
    }

    /// Perelomov `O(2,1)` states, `p = 1, q = 0, α = S`.
    pub fn perelomov_o21(s: u32) -> Result<Self> {
        positive_s(s)?;
        HypergeometricSpec::new(vec![s as i64], vec![])
    }

    /// Perelomov `O(3)` states, `p = 1, q = 0, α = -S`.
    pub fn perelomov_o3(s: u32) -> Result<Self> {
        positive_s(s)?;
        HypergeometricSpec::new(vec![-(s as i64)], vec![])
    }

    /// Barut–Girardello states, `p = 0, q = 1, ρ = S`.
    pub fn barut_girardello(s: u32) -> Result<Self> {
        positive_s(s)?;
        HypergeometricSpec::new(vec![], vec![s as f64])
    }

    pub fn p(&self) -> usize {
        self.alphas.len()
    }

    pub fn q(&self) -> usize {
        self.rhos.len()
    }

    pub fn alphas(&self) -> &[i64] {
        &self.alphas
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn l_neg(&self) -> usize {
        self.l_neg
    }

    /// `(-1)^l` with `l` the number of negative upper parameters.
    pub fn sign(&self) -> f64 {
        if self.l_neg % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Highest surviving power when a negative `α` truncates the series.
    pub fn terminates_at(&self) -> Option<u64> {
        self.alphas[..self.l_neg].iter().map(|a| a.unsigned_abs()).min()
    }

    pub fn case(&self) -> Case {
        if self.l_neg > 0 {
            Case::Compact
        } else if self.p() == self.q() + 1 {
            Case::NonCompact
        } else {
            Case::Entire
        }
    }

    /// Checks that the normalization series converges at `|ξ|²`.
    fn check_radius(&self, abs_sq: f64) -> Result<()> {
        if self.terminates_at().is_some() || self.p() <= self.q() {
            return Ok(());
        }
        if self.p() > self.q() + 1 {
            return Err(domain(format!(
                "{}F{} normalization diverges for every nonzero argument",
                self.p(),
                self.q()
            )));
        }
        if abs_sq >= 1.0 {
            return Err(domain(format!(
                "normalization needs |xi| < 1 for this family, got |xi|^2 = {abs_sq}"
            )));
        }
        Ok(())
    }
}

fn positive_s(s: u32) -> Result<()> {
    if s == 0 {
        Err(domain("S must be a positive integer"))
    } else {
        Ok(())
    }
}

/// One-parameter families indexed by the representation label `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `p = q + 1`, `α_j = S`, `ρ_j = 1`.
    NonCompact { q: usize },
    /// `α_j = -S` (`p` of them), `ρ_j = 1`.
    Compact { p: usize, q: usize },
    /// `p = 0, q = 1, ρ = S`.
    BarutGirardello,
}

impl Family {
    pub fn spec(&self, s: u32) -> Result<HypergeometricSpec> {
        positive_s(s)?;
        match *self {
            Family::NonCompact { q } => {
                HypergeometricSpec::new(vec![s as i64; q + 1], vec![1.0; q])
            }
            Family::Compact { p, q } => {
                if p == 0 {
                    return Err(domain("compact family needs at least one upper parameter"));
                }
                HypergeometricSpec::new(vec![-(s as i64); p], vec![1.0; q])
            }
            Family::BarutGirardello => HypergeometricSpec::barut_girardello(s),
        }
    }
}

/// Truncated, normalized coefficient vector of a coherent state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsCoefficients {
    pub coeffs: Vec<Complex64>,
    /// `N²`; may be `inf` when only `log_norm_sq` is representable.
    pub norm_sq: f64,
    pub log_norm_sq: f64,
    /// Index of the last retained coefficient.
    pub truncation_index: usize,
}

impl CsCoefficients {
    pub fn weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `ln |Π(α_i)_n| - ln Π(ρ_j)_n - ln n!` built incrementally.
fn log_weights(
    spec: &HypergeometricSpec,
    abs_sq: f64,
    ctl: SeriesControl,
    what: &'static str,
) -> Result<Vec<f64>> {
    let log_x = abs_sq.ln();
    let mut logs = vec![0.0];
    if abs_sq == 0.0 {
        return Ok(logs);
    }
    let last = spec.terminates_at();
    let mut cur = 0.0;
    let mut running = 0.0f64;
    let mut stop = Stopper::new(ctl);
    let mut past_mode = false;
    for n in 0..ctl.max_terms as u64 {
        if let Some(s) = last {
            if n >= s {
                return Ok(logs);
            }
        }
        let nf = n as f64;
        let num: f64 = spec.alphas.iter().map(|&a| (a as f64 + nf).abs().ln()).sum();
        let den: f64 = spec.rhos.iter().map(|&r| (r + nf).ln()).sum();
        let step = num - den - (nf + 1.0).ln() + log_x;
        cur += step;
        logs.push(cur);
        running = running.max(cur);
        if step < 0.0 {
            past_mode = true;
        }
        // compare magnitudes relative to the largest term seen; once past the
        // mode the remaining sum is dominated by this one
        let rel = (cur - running).exp();
        if past_mode && stop.done(rel, 1.0) {
            return Ok(logs);
        }
    }
    Err(Error::Convergence {
        what,
        terms: ctl.max_terms,
    })
}

/// Coefficients `c_n` of the normalized coherent state `|ξ⟩`.
pub fn ghcs_coefficients(
    spec: &HypergeometricSpec,
    xi: Complex64,
    ctl: SeriesControl,
) -> Result<CsCoefficients> {
    let abs_sq = xi.norm_sqr();
    spec.check_radius(abs_sq)?;
    let logs = log_weights(spec, abs_sq, ctl, "ghcs_coefficients")?;
    let log_norm_sq = log_sum_exp(&logs);
    let phase = xi.arg();
    let coeffs: Vec<Complex64> = logs
        .iter()
        .enumerate()
        .map(|(n, &lw)| Complex64::from_polar((0.5 * (lw - log_norm_sq)).exp(), n as f64 * phase))
        .collect();
    Ok(CsCoefficients {
        truncation_index: coeffs.len() - 1,
        coeffs,
        norm_sq: log_norm_sq.exp(),
        log_norm_sq,
    })
}

/// `ln N²(ξ) = ln pFq(α; ρ; (-1)^l |ξ|²)` evaluated through the hypergeometric series.
pub fn log_norm_sq(spec: &HypergeometricSpec, xi: Complex64, ctl: SeriesControl) -> Result<f64> {
    let abs_sq = xi.norm_sqr();
    spec.check_radius(abs_sq)?;
    let (m, s) = pfq_scaled(spec, Complex64::new(spec.sign() * abs_sq, 0.0), ctl)?;
    if !(m.re > 0.0) {
        return Err(Error::NonFinite("coherent-state normalization"));
    }
    Ok(m.re.ln() + s)
}

/// Overlap `⟨ξ|ζ⟩ = N_ξ⁻¹ N_ζ⁻¹ pFq(α; ρ; (-1)^l ξ* ζ)`.
pub fn ghcs_overlap(
    spec: &HypergeometricSpec,
    xi: Complex64,
    zeta: Complex64,
    ctl: SeriesControl,
) -> Result<Complex64> {
    let lx = log_norm_sq(spec, xi, ctl)?;
    let lz = log_norm_sq(spec, zeta, ctl)?;
    let (m, s) = pfq_scaled(spec, xi.conj() * zeta * spec.sign(), ctl)?;
    let v = m * (s - 0.5 * (lx + lz)).exp();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("ghcs_overlap"))
    }
}

/// `|⟨ξ|η⟩|²` along a sequence of representation labels.
pub fn overlap_concentration(
    family: Family,
    xi: Complex64,
    eta: Complex64,
    s_list: &[u32],
    ctl: SeriesControl,
) -> Result<Vec<f64>> {
    s_list
        .iter()
        .map(|&s| Ok(ghcs_overlap(&family.spec(s)?, xi, eta, ctl)?.norm_sqr()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    O3,
    O21,
}

impl Group {
    pub fn epsilon(self) -> f64 {
        match self {
            Group::O3 => 1.0,
            Group::O21 => -1.0,
        }
    }
}

/// Matrix realization of one irreducible representation, truncated for `O(2,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRep {
    pub group: Group,
    pub s: u32,
    pub dim: usize,
    /// Leading block on which all algebra relations hold exactly.
    pub exact_dim: usize,
    pub e1: DMatrix<Complex64>,
    pub e2: DMatrix<Complex64>,
    pub e3: DMatrix<Complex64>,
}

/// `S/2 + ε S²/4`.
pub fn casimir_value(group: Group, s: u32) -> f64 {
    let s = s as f64;
    s / 2.0 + group.epsilon() * s * s / 4.0
}

/// Builds `E1, E2, E3`. `truncation` is ignored for `O(3)` (dimension `S+1`)
/// and must be at least 4 for `O(2,1)`.
pub fn build_ladder_rep(group: Group, s: u32, truncation: usize) -> Result<LadderRep> {
    positive_s(s)?;
    let sf = s as f64;
    let dim = match group {
        Group::O3 => s as usize + 1,
        Group::O21 => {
            if truncation < 4 {
                return Err(domain("O(2,1) truncation must be at least 4"));
            }
            truncation
        }
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut raise = DMatrix::from_element(dim, dim, zero);
    let mut e3 = DMatrix::from_element(dim, dim, zero);
    for k in 0..dim {
        let kf = k as f64;
        e3[(k, k)] = Complex64::new(sf / 2.0 - group.epsilon() * kf, 0.0);
        if k + 1 < dim {
            let amp = match group {
                // J+ in the m = K - S/2 basis
                Group::O3 => ((sf - kf) * (kf + 1.0)).sqrt(),
                Group::O21 => ((kf + 1.0) * (kf + sf)).sqrt(),
            };
            raise[(k + 1, k)] = Complex64::new(amp, 0.0);
        }
    }
    let lower = raise.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, -0.5);
    let x = (&raise + &lower) * half;
    let y = (&raise - &lower) * half_i;
    let (e1, e2) = match group {
        Group::O3 => (-x, -y),
        Group::O21 => (x, -y),
    };
    Ok(LadderRep {
        group,
        s,
        dim,
        exact_dim: match group {
            Group::O3 => dim,
            Group::O21 => dim - 1,
        },
        e1,
        e2,
        e3,
    })
}

impl LadderRep {
    pub fn generator(&self, alpha: usize) -> Result<&DMatrix<Complex64>> {
        match alpha {
            1 => Ok(&self.e1),
            2 => Ok(&self.e2),
            3 => Ok(&self.e3),
            _ => Err(domain(format!("generator index must be 1, 2 or 3, got {alpha}"))),
        }
    }

    pub fn casimir(&self) -> DMatrix<Complex64> {
        &self.e1 * &self.e1 + &self.e2 * &self.e2 + &self.e3 * &self.e3 * Complex64::new(self.group.epsilon(), 0.0)
    }
}

/// `⟨E_α²⟩ / ⟨E_α⟩²` in the state with the given coefficients.
pub fn semiclassical_ratio(coeffs: &CsCoefficients, rep: &LadderRep, alpha: usize) -> Result<f64> {
    let e = rep.generator(alpha)?;
    let keep = rep.exact_dim;
    let tail: f64 = coeffs.coeffs.iter().skip(keep).map(|c| c.norm_sqr()).sum();
    if tail > 1e-10 {
        return Err(domain(format!(
            "coefficient tail {tail:e} lies outside the {keep}-state block"
        )));
    }
    let mut v = DVector::from_element(rep.dim, Complex64::new(0.0, 0.0));
    for (i, c) in coeffs.coeffs.iter().take(keep).enumerate() {
        v[i] = *c;
    }
    let ev = e * &v;
    let mean = v.dotc(&ev).re;
    let second = ev.norm_squared();
    if mean.abs() <= 1e-12 * second.sqrt().max(1e-300) {
        return Err(Error::DegenerateExpectation(alpha));
    }
    Ok(second / (mean * mean))
}

/// Eigenpairs of `β·E` together with the invariant `b`.
#[derive(Debug, Clone)]
pub struct BrifSpectrum {
    /// Sorted by real part, then imaginary part.
    pub pairs: Vec<(Complex64, DVector<Complex64>)>,
    /// `(β1² + β2² + ε β3²)^{1/2}`.
    pub b: Complex64,
    pub degenerate: bool,
    /// True when computed on a truncated `O(2,1)` block.
    pub truncated: bool,
}

impl BrifSpectrum {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|(l, _)| *l).collect()
    }
}

pub fn brif_eigenstates(rep: &LadderRep, beta: [Complex64; 3]) -> Result<BrifSpectrum> {
    let m = &rep.e1 * beta[0] + &rep.e2 * beta[1] + &rep.e3 * beta[2];
    let b = (beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2] * rep.group.epsilon())
        .sqrt();
    let scale = beta.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut pairs = linalg::eigenpairs(&m)?;
    pairs.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap()
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    Ok(BrifSpectrum {
        pairs,
        b,
        // b is a square root, so round-off in b² of order ε shows up as √ε in b
        degenerate: b.norm_sqr() <= 1e-12 * scale.max(1e-300).powi(2),
        truncated: rep.group == Group::O21,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_i0, log_factorial, pfq};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a * b - b * a
    }

    fn block_err(m: &DMatrix<Complex64>, k: usize) -> f64 {
        m.view((0, 0), (k, k)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn spec_orders_negatives_first() {
        let s = HypergeometricSpec::new(vec![3, -2, 5, -4], vec![1.5]).unwrap();
        assert_eq!(s.alphas(), &[-2, -4, 3, 5]);
        assert_eq!(s.l_neg(), 2);
        assert_eq!(s.terminates_at(), Some(2));
        assert_eq!(s.case(), Case::Compact);
        assert!(HypergeometricSpec::new(vec![0], vec![]).is_err());
        assert!(HypergeometricSpec::new(vec![], vec![-1.0]).is_err());
    }

    #[test]
    fn oscillator_coefficients() {
        let cs = ghcs_coefficients(&HypergeometricSpec::oscillator(), c(1.0, 0.0), ctl()).unwrap();
        assert!((cs.coeffs[0].re - 0.6065306597126334).abs() < 1e-15);
        for (n, cn) in cs.coeffs.iter().enumerate().take(15) {
            let want = (-0.5 - 0.5 * log_factorial(n as u64)).exp();
            assert!((cn.re - want).abs() < 1e-15);
        }
        assert!((cs.norm_sq - std::f64::consts::E).abs() < 1e-13);
    }

    #[test]
    fn zero_argument_is_reference_state() {
        let spec = HypergeometricSpec::perelomov_o3(4).unwrap();
        let cs = ghcs_coefficients(&spec, c(0.0, 0.0), ctl()).unwrap();
        assert_eq!(cs.coeffs, vec![c(1.0, 0.0)]);
    }

    #[test]
    fn barut_girardello_normalization_is_bessel() {
        let spec = HypergeometricSpec::barut_girardello(1).unwrap();
        for &w in &[0.5, 2.0, 7.5] {
            let cs = ghcs_coefficients(&spec, c(w, 0.0), ctl()).unwrap();
            let i0 = bessel_i0(c(2.0 * w, 0.0)).re;
            assert!((cs.norm_sq / i0 - 1.0).abs() < 1e-13, "w={w}");
        }
    }

    #[test]
    fn normalization_matches_pfq() {
        let spec = HypergeometricSpec::new(vec![-6, 2], vec![1.5]).unwrap();
        let xi = c(0.7, -1.1);
        let cs = ghcs_coefficients(&spec, xi, ctl()).unwrap();
        let direct = pfq(&spec, c(-xi.norm_sqr(), 0.0), ctl()).unwrap();
        assert!((cs.norm_sq / direct.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn divergent_normalization_is_rejected() {
        let spec = HypergeometricSpec::perelomov_o21(3).unwrap();
        assert!(matches!(ghcs_coefficients(&spec, c(1.0, 0.0), ctl()), Err(Error::Domain(_))));
        let spec = HypergeometricSpec::new(vec![1, 2], vec![]).unwrap();
        assert!(matches!(ghcs_coefficients(&spec, c(0.1, 0.0), ctl()), Err(Error::Domain(_))));
    }

    #[test]
    fn perelomov_match_binomial_oracles() {
        let xi = c(0.4, 0.3);
        let x = xi.norm_sqr();
        for s in 1..=10u32 {
            let o3 = ghcs_coefficients(&HypergeometricSpec::perelomov_o3(s).unwrap(), xi, ctl())
                .unwrap();
            assert_eq!(o3.coeffs.len(), s as usize + 1);
            let o21 = ghcs_coefficients(&HypergeometricSpec::perelomov_o21(s).unwrap(), xi, ctl())
                .unwrap();
            for n in 0..=s as u64 {
                let binom = log_factorial(s as u64) - log_factorial(n) - log_factorial(s as u64 - n);
                let want = (binom + n as f64 * x.ln() - s as f64 * (1.0 + x).ln()).exp();
                assert!((o3.coeffs[n as usize].norm_sqr() - want).abs() < 1e-13);
            }
            for n in 0..o21.coeffs.len() as u64 {
                let nb = log_factorial(s as u64 + n - 1) - log_factorial(n) - log_factorial(s as u64 - 1);
                let want = (nb + n as f64 * x.ln() + s as f64 * (1.0 - x).ln()).exp();
                assert!((o21.coeffs[n as usize].norm_sqr() - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn overlap_examples() {
        let osc = HypergeometricSpec::oscillator();
        let v = ghcs_overlap(&osc, c(1.0, 0.0), c(0.0, 0.0), ctl()).unwrap();
        assert!((v - c(0.6065306597126334, 0.0)).norm() < 1e-15);
        let (a, b) = (c(0.8, -1.2), c(-0.3, 0.9));
        let v = ghcs_overlap(&osc, a, b, ctl()).unwrap();
        assert!((v.norm() - (-(a - b).norm_sqr() / 2.0).exp()).abs() < 1e-14);
    }

    fn arb_spec() -> impl Strategy<Value = HypergeometricSpec> {
        prop_oneof![
            Just(HypergeometricSpec::oscillator()),
            (1u32..=20).prop_map(|s| HypergeometricSpec::perelomov_o3(s).unwrap()),
            (1u32..=20).prop_map(|s| HypergeometricSpec::barut_girardello(s).unwrap()),
            (1u32..=20, 1u32..=20)
                .prop_map(|(a, b)| HypergeometricSpec::new(vec![-(a as i64), b as i64], vec![1.0, 2.5]).unwrap()),
            (1u32..=5).prop_map(|s| HypergeometricSpec::new(vec![], vec![s as f64, 0.5]).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn coefficients_are_normalized(spec in arb_spec(), r in 0.0f64..5.0, ph in 0.0f64..6.28) {
            let cs = ghcs_coefficients(&spec, Complex64::from_polar(r, ph), ctl()).unwrap();
            prop_assert!((cs.weight() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn overlap_equals_coefficient_inner_product(
            spec in arb_spec(), r1 in 0.0f64..4.0, p1 in 0.0f64..6.28, r2 in 0.0f64..4.0, p2 in 0.0f64..6.28
        ) {
            let (a, b) = (Complex64::from_polar(r1, p1), Complex64::from_polar(r2, p2));
            let ca = ghcs_coefficients(&spec, a, ctl()).unwrap();
            let cb = ghcs_coefficients(&spec, b, ctl()).unwrap();
            let direct: Complex64 = ca.coeffs.iter().zip(&cb.coeffs).map(|(x, y)| x.conj() * y).sum();
            let v = ghcs_overlap(&spec, a, b, ctl()).unwrap();
            prop_assert!((v - direct).norm() < 1e-10, "{} vs {}", v, direct);
        }

        #[test]
        fn self_overlap_is_one(spec in arb_spec(), r in 0.0f64..5.0, ph in 0.0f64..6.28) {
            let xi = Complex64::from_polar(r, ph);
            let v = ghcs_overlap(&spec, xi, xi, ctl()).unwrap();
            prop_assert!((v - 1.0).norm() < 1e-10);
        }

        #[test]
        fn noncompact_disk_states_normalized(q in 0usize..=1, s in 1u32..=20, r in 0.0f64..0.8, ph in 0.0f64..6.28) {
            let spec = Family::NonCompact { q }.spec(s).unwrap();
            let cs = ghcs_coefficients(&spec, Complex64::from_polar(r, ph), ctl()).unwrap();
            prop_assert!((cs.weight() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ladder_commutators_and_casimir() {
        for group in [Group::O3, Group::O21] {
            for s in 1..=6u32 {
                let rep = build_ladder_rep(group, s, 12).unwrap();
                let k = rep.exact_dim;
                let eps = group.epsilon();
                let i = c(0.0, 1.0);
                let r12 = commutator(&rep.e1, &rep.e2) + &rep.e3 * (i * eps);
                let r23 = commutator(&rep.e2, &rep.e3) + &rep.e1 * i;
                let r31 = commutator(&rep.e3, &rep.e1) + &rep.e2 * i;
                for r in [&r12, &r23, &r31] {
                    assert!(block_err(r, k) < 1e-12, "{group:?} S={s}");
                }
                let cas = rep.casimir();
                let want = casimir_value(group, s);
                for j in 0..k {
                    assert!((cas[(j, j)] - want).norm() < 1e-12);
                }
                let off = cas.clone() - DMatrix::from_diagonal(&cas.diagonal());
                assert!(block_err(&off, k) < 1e-12);
            }
        }
    }

    #[test]
    fn ladder_examples() {
        let rep = build_ladder_rep(Group::O3, 2, 0).unwrap();
        let d: Vec<f64> = rep.e3.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, 0.0, -1.0]);
        // j(j+1) at j = 1/2
        assert_eq!(casimir_value(Group::O3, 1), 0.75);
        let rep = build_ladder_rep(Group::O21, 1, 10).unwrap();
        let d: Vec<f64> = rep.e3.diagonal().iter().map(|z| z.re).collect();
        let want: Vec<f64> = (0..10).map(|k| 0.5 + k as f64).collect();
        assert_eq!(d, want);
        assert!(build_ladder_rep(Group::O21, 1, 3).is_err());
    }

    #[test]
    fn ratio_is_one_on_weight_state() {
        let rep = build_ladder_rep(Group::O3, 2, 0).unwrap();
        let cs = ghcs_coefficients(&HypergeometricSpec::perelomov_o3(2).unwrap(), c(0.0, 0.0), ctl())
            .unwrap();
        assert!((semiclassical_ratio(&cs, &rep, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            semiclassical_ratio(&cs, &rep, 1),
            Err(Error::DegenerateExpectation(1))
        ));
    }

    #[test]
    fn ratio_decays_like_inverse_s() {
        let xi = c(0.5, 0.0);
        let mut prev = None;
        for s in [10u32, 100] {
            let cs = ghcs_coefficients(&HypergeometricSpec::perelomov_o21(s).unwrap(), xi, ctl())
                .unwrap();
            let rep = build_ladder_rep(Group::O21, s, cs.coeffs.len() + 2).unwrap();
            let r = semiclassical_ratio(&cs, &rep, 3).unwrap() - 1.0;
            if let Some(p) = prev {
                let f: f64 = p / r;
                assert!(f > 8.0 && f < 12.0, "factor {f}");
            }
            prev = Some(r);
        }
        let mut prev = f64::INFINITY;
        for w in [5.0, 50.0] {
            let cs = ghcs_coefficients(&HypergeometricSpec::barut_girardello(1).unwrap(), c(w, 0.0), ctl())
                .unwrap();
            let rep = build_ladder_rep(Group::O21, 1, cs.coeffs.len() + 2).unwrap();
            let r = semiclassical_ratio(&cs, &rep, 3).unwrap() - 1.0;
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn truncated_tail_is_rejected() {
        let cs = ghcs_coefficients(&HypergeometricSpec::perelomov_o21(5).unwrap(), c(0.9, 0.0), ctl())
            .unwrap();
        let rep = build_ladder_rep(Group::O21, 5, 8).unwrap();
        assert!(matches!(semiclassical_ratio(&cs, &rep, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn overlap_concentrates() {
        let (xi, eta) = (c(0.3, 0.0), c(0.5, 0.0));
        for fam in [Family::NonCompact { q: 0 }, Family::Compact { p: 1, q: 0 }] {
            let v = overlap_concentration(fam, xi, eta, &[5, 10, 20, 50, 100], ctl()).unwrap();
            assert!(v.windows(2).all(|w| w[1] < w[0]), "{fam:?}: {v:?}");
            let same = overlap_concentration(fam, xi, xi, &[5, 50], ctl()).unwrap();
            assert!(same.iter().all(|x| (x - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn brif_axis_spectra() {
        let rep = build_ladder_rep(Group::O3, 2, 0).unwrap();
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        for beta in [[zero, zero, one], [one, zero, zero]] {
            let sp = brif_eigenstates(&rep, beta).unwrap();
            let ev = sp.eigenvalues();
            for (got, want) in ev.iter().zip([-1.0, 0.0, 1.0]) {
                assert!((got - want).norm() < 1e-12);
            }
            assert!(!sp.degenerate && !sp.truncated);
        }
    }

    #[test]
    fn brif_degenerate_is_flagged() {
        let rep = build_ladder_rep(Group::O3, 2, 0).unwrap();
        let sp = brif_eigenstates(&rep, [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        assert!(sp.degenerate);
        assert!(sp.eigenvalues().iter().all(|l| l.norm() < 1e-6));
    }

    #[test]
    fn brif_eigenvectors_solve_the_eigenproblem() {
        let rep = build_ladder_rep(Group::O21, 2, 30).unwrap();
        let beta = [c(0.2, 0.1), c(-0.3, 0.0), c(1.0, 0.0)];
        let sp = brif_eigenstates(&rep, beta).unwrap();
        assert!(sp.truncated);
        let m = &rep.e1 * beta[0] + &rep.e2 * beta[1] + &rep.e3 * beta[2];
        for (lam, v) in &sp.pairs {
            assert!((&m * v - v * *lam).norm() < 1e-8);
        }
    }
}
