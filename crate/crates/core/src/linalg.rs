//! Dense complex eigenpairs for the small ladder matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex Schur decomposition `A = Q T Q†` with `T` upper triangular.
///
/// Householder reduction to Hessenberg form followed by single-shift QR
/// sweeps with Wilkinson shifts. Written out because the real double-shift
/// scheme in nalgebra does not converge reliably on complex input.
pub fn complex_schur(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Domain("Schur decomposition needs a square matrix".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut t = a.clone();
    let mut q = DMatrix::<Complex64>::identity(n, n);
    if n <= 1 {
        return Ok((q, t));
    }
    hessenberg(&mut t, &mut q);
    let anorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            if sub <= eps * (t[(l, l)].norm() + t[(l - 1, l - 1)].norm()) || sub <= eps * eps * anorm {
                t[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(Error::Convergence { what: "complex_schur", terms: total });
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift to break cycles
            t[(hi, hi)] + Complex64::new(t[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };
        for k in l..=hi {
            t[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (x, y) = (t[(k, k)], t[(k + 1, k)]);
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (Complex64::new(1.0, 0.0), zero)
            } else {
                (x / r, y / r)
            };
            for j in k..n {
                let (u, v) = (t[(k, j)], t[(k + 1, j)]);
                t[(k, j)] = c.conj() * u + s.conj() * v;
                t[(k + 1, j)] = -s * u + c * v;
            }
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let rows = (k + 2).min(hi) + 1;
            for i in 0..rows {
                let (u, v) = (t[(i, k)], t[(i, k + 1)]);
                t[(i, k)] = u * c + v * s;
                t[(i, k + 1)] = -u * s.conj() + v * c.conj();
            }
            for i in 0..n {
                let (u, v) = (q[(i, k)], q[(i, k + 1)]);
                q[(i, k)] = u * c + v * s;
                q[(i, k + 1)] = -u * s.conj() + v * c.conj();
            }
        }
        for k in l..=hi {
            t[(k, k)] += mu;
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = zero;
        }
    }
    Ok((q, t))
}

fn hessenberg(t: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>) {
    let n = t.nrows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| t[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let mut v = x;
        v[0] += phase * xnorm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= vnorm);
        // T <- P T with P = I - 2 v v†
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * t[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                t[(k + 1 + i, j)] -= *vi * dot * 2.0;
            }
        }
        // T <- T P and Q <- Q P
        for m in [&mut *t, &mut *q] {
            for i in 0..n {
                let dot: Complex64 = v.iter().enumerate().map(|(j, vj)| m[(i, k + 1 + j)] * vj).sum();
                for (j, vj) in v.iter().enumerate() {
                    m[(i, k + 1 + j)] -= dot * vj.conj() * 2.0;
                }
            }
        }
    }
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m = (a + d) * 0.5;
    let (l1, l2) = (m + disc, m - disc);
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues and unit eigenvectors of a general complex matrix.
///
/// Eigenvectors come from back substitution in the Schur factor `T`, rotated
/// back with `Q`. For defective matrices the vectors of a repeated eigenvalue
/// come out (nearly) parallel, which is the honest answer.
pub fn eigenpairs(a: &DMatrix<Complex64>) -> Result<Vec<(Complex64, DVector<Complex64>)>> {
    let n = a.nrows();
    let (q, t) = complex_schur(a)?;
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let tiny = 1e-14 * scale;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lam = t[(i, i)];
        let mut y = DVector::<Complex64>::zeros(n);
        y[i] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (j + 1)..=i {
                acc += t[(j, k)] * y[k];
            }
            let mut d = t[(j, j)] - lam;
            if d.norm() < tiny {
                d = Complex64::new(tiny, 0.0);
            }
            y[j] = -acc / d;
        }
        let mut v = &q * y;
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        out.push((lam, v));
    }
    Ok(out)
}
