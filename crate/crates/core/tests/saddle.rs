use std::f64::consts::PI;

use hydrocs::saddlepoint::{
    estimate, gaussian_expansion, locate_peak, solve_stationary, BranchTracker, NewtonSettings, Phase,
    SaddleProblem,
};
use hydrocs::{Complex64, Error};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

type CVec = DVector<Complex64>;
type CMat = DMatrix<Complex64>;

/// `f(x, t) = -tᵀ A t / 2 + i x (t₁ + t₂)` with complex symmetric `A`,
/// `Re A` positive definite. Exact: `∫ e^{λ f} d²t = (2π/λ) det(A)^{-1/2} e^{-λ x² sᵀA⁻¹s/2}`.
struct Quadratic2 {
    a: CMat,
}

impl Quadratic2 {
    fn s() -> CVec {
        DVector::from_element(2, Complex64::new(1.0, 0.0))
    }
}

impl Phase for Quadratic2 {
    fn dims(&self) -> (usize, usize) {
        (1, 2)
    }
    fn f(&self, x: &[f64], t: &[Complex64]) -> Complex64 {
        let tv = DVector::from_column_slice(t);
        -(tv.transpose() * &self.a * &tv)[(0, 0)] * 0.5 + Complex64::new(0.0, x[0]) * (t[0] + t[1])
    }
    fn grad_t(&self, x: &[f64], t: &[Complex64]) -> CVec {
        let tv = DVector::from_column_slice(t);
        -(&self.a * tv) + Self::s() * Complex64::new(0.0, x[0])
    }
    fn grad_x(&self, _: &[f64], t: &[Complex64]) -> CVec {
        DVector::from_element(1, Complex64::new(0.0, 1.0) * (t[0] + t[1]))
    }
    fn hess_tt(&self, _: &[f64], _: &[Complex64]) -> CMat {
        -self.a.clone()
    }
    fn hess_xx(&self, _: &[f64], _: &[Complex64]) -> CMat {
        DMatrix::zeros(1, 1)
    }
    fn hess_tx(&self, _: &[f64], _: &[Complex64]) -> CMat {
        DMatrix::from_element(2, 1, Complex64::new(0.0, 1.0))
    }
    fn amplitude(&self, _: &[f64], _: &[Complex64]) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn two_dimensional_gaussian_is_exact() {
    let a = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.5), c(0.3, -0.2), c(0.3, -0.2), c(1.5, 0.1)]);
    let det = a.clone().lu().determinant();
    let ainv = a.clone().try_inverse().unwrap();
    let q = (Quadratic2::s().transpose() * &ainv * Quadratic2::s())[(0, 0)];
    let lam = 7.0;
    let prob = SaddleProblem::new(lam, Quadratic2 { a }).unwrap();
    let s = NewtonSettings::default();
    for x in [0.0, 0.3, -0.8] {
        let t0 = solve_stationary(&prob, &[x], &[c(0.0, 0.0), c(0.0, 0.0)], s).unwrap();
        let got = estimate(&prob, &[x], &t0).unwrap();
        let want = 2.0 * PI / lam / det.sqrt() * (-lam * x * x * q / 2.0).exp();
        assert!((got - want).norm() < 1e-13 * want.norm(), "{got} vs {want}");
    }
    // Re f(x, t₀) = -x² Re(q)/2 peaks at 0, and the effective form is -q
    let pk = locate_peak(&prob, &[0.5], &[c(0.1, 0.0), c(0.0, 0.0)], s).unwrap();
    assert!(pk.x00[0].abs() < 1e-12);
    let gp = gaussian_expansion(&prob, &pk).unwrap();
    assert!((gp.effective_form[(0, 0)] + q).norm() < 1e-13);
    let dx = [0.05];
    let t = solve_stationary(&prob, &dx, &pk.t00, s).unwrap();
    let direct = estimate(&prob, &dx, &t).unwrap();
    // quadratic in x, so the expansion is exact
    assert!((gp.reconstruct(&dx) - direct).norm() < 1e-12 * direct.norm());
}

#[test]
fn construction_rejects_bad_lambda() {
    let a = DMatrix::from_diagonal_element(2, 2, c(1.0, 0.0));
    assert!(matches!(SaddleProblem::new(0.0, Quadratic2 { a: a.clone() }), Err(Error::Domain(_))));
    assert!(matches!(SaddleProblem::new(f64::NAN, Quadratic2 { a }), Err(Error::Domain(_))));
}

/// det[-μ] = a(s)² winds twice around the origin along the path; the tracked
/// root follows a(s) itself instead of jumping at the principal-branch cut.
#[test]
fn branch_follows_a_winding_determinant() {
    let mut tr = BranchTracker::new();
    let steps = 600;
    for k in 0..=steps {
        let s = k as f64 / steps as f64;
        let a = Complex64::from_polar(1.0 + s, 2.0 * PI * s);
        let r = tr.sqrt(a * a);
        assert!((r - a).norm() < 1e-12, "s = {s}: {r} vs {a}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadratic_estimates_are_exact(
        a11 in 0.5f64..3.0, a22 in 0.5f64..3.0, a12 in -0.4f64..0.4,
        i11 in -1.0f64..1.0, i22 in -1.0f64..1.0, i12 in -0.3f64..0.3,
        lam in 1.0f64..200.0, x in -1.0f64..1.0,
    ) {
        let a = DMatrix::from_row_slice(2, 2, &[c(a11, i11), c(a12, i12), c(a12, i12), c(a22, i22)]);
        let det = a.clone().lu().determinant();
        let q = (Quadratic2::s().transpose() * a.clone().try_inverse().unwrap() * Quadratic2::s())[(0, 0)];
        let prob = SaddleProblem::new(lam, Quadratic2 { a }).unwrap();
        let t0 = solve_stationary(&prob, &[x], &[c(0.0, 0.0), c(0.0, 0.0)], NewtonSettings::default()).unwrap();
        let got = estimate(&prob, &[x], &t0).unwrap();
        let want = 2.0 * PI / lam / det.sqrt() * (-lam * x * x * q / 2.0).exp();
        prop_assert!((got - want).norm() <= 1e-11 * want.norm());
    }
}
