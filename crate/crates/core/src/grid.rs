//! Sampled fields on product grids, and peak/width measurement.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::hydrogenic::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// `(x, y, z)`
    Cartesian,
    /// `(ρ, φ, z)`
    Cylindrical,
}

impl Frame {
    pub fn axis_names(self) -> [&'static str; 3] {
        match self {
            Frame::Cartesian => ["x", "y", "z"],
            Frame::Cylindrical => ["rho", "phi", "z"],
        }
    }

    pub fn point(self, c: [f64; 3]) -> Point3 {
        match self {
            Frame::Cartesian => Point3::new(c[0], c[1], c[2]),
            Frame::Cylindrical => Point3::from_cylindrical(c[0], c[1], c[2]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Grid(format!("axis needs at least 2 points, got {count}")));
        }
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Grid(format!("axis needs finite min < max, got {min}..{max}")));
        }
        Ok(Axis { min, max, count })
    }

    /// Axis of `count` points centred on `c` with spacing `h`.
    pub fn centered(c: f64, h: f64, count: usize) -> Result<Self> {
        let half = 0.5 * h * (count - 1) as f64;
        Axis::new(c - half, c + half, count)
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub frame: Frame,
    pub axes: [Axis; 3],
}

impl GridSpec {
    pub fn new(frame: Frame, axes: [Axis; 3]) -> Self {
        GridSpec { frame, axes }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> [usize; 3] {
        self.axes.map(|a| a.count)
    }

    /// Row-major index with the first axis slowest.
    pub fn index(&self, i: [usize; 3]) -> usize {
        let s = self.shape();
        (i[0] * s[1] + i[1]) * s[2] + i[2]
    }

    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let s = self.shape();
        [idx / (s[1] * s[2]), (idx / s[2]) % s[1], idx % s[2]]
    }

    pub fn coords(&self, i: [usize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.axes[a].value(i[a]))
    }

    pub fn point(&self, i: [usize; 3]) -> Point3 {
        self.frame.point(self.coords(i))
    }
}

/// Parses `"rho:0:200:400,phi:0:6.2832:256,z:-20:20:80"` or the same with
/// `x`, `y`, `z`.
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Grid(format!("expected three axes, got {}", parts.len())));
        }
        let mut names = Vec::with_capacity(3);
        let mut axes = Vec::with_capacity(3);
        for p in parts {
            let f: Vec<&str> = p.split(':').collect();
            if f.len() != 4 {
                return Err(Error::Grid(format!("axis '{p}' is not name:min:max:count")));
            }
            let num = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| Error::Grid(format!("bad number '{t}' in axis '{p}'")))
            };
            let count = f[3]
                .parse::<usize>()
                .map_err(|_| Error::Grid(format!("bad count '{}' in axis '{p}'", f[3])))?;
            names.push(f[0].to_ascii_lowercase());
            axes.push(Axis::new(num(f[1])?, num(f[2])?, count)?);
        }
        let frame = if names == ["x", "y", "z"] {
            Frame::Cartesian
        } else if names == ["rho", "phi", "z"] {
            Frame::Cylindrical
        } else {
            return Err(Error::Grid(format!(
                "axes must be x,y,z or rho,phi,z in that order, got {}",
                names.join(",")
            )));
        };
        Ok(GridSpec {
            frame,
            axes: [axes[0], axes[1], axes[2]],
        })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.frame.axis_names();
        for (i, (n, a)) in names.iter().zip(&self.axes).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}:{}:{}:{}", a.min, a.max, a.count)?;
        }
        Ok(())
    }
}

/// Complex amplitudes on a grid, stored in [`GridSpec::index`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

impl FieldGrid {
    /// Samples `f` with one task per slab of the first axis.
    pub fn sample<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(Point3) -> Result<Complex64> + Sync,
    {
        let [n0, n1, n2] = spec.shape();
        let rows: Result<Vec<Vec<Complex64>>> = (0..n0)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(n1 * n2);
                for j in 0..n1 {
                    for k in 0..n2 {
                        row.push(f(spec.point([i, j, k]))?);
                    }
                }
                Ok(row)
            })
            .collect();
        let values = rows?.concat();
        Ok(FieldGrid { spec, values })
    }

    pub fn density(&self) -> DensityGrid {
        DensityGrid {
            spec: self.spec,
            values: self.values.iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn sample<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(Point3) -> Result<f64> + Sync,
    {
        let [n0, n1, n2] = spec.shape();
        let rows: Result<Vec<Vec<f64>>> = (0..n0)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(n1 * n2);
                for j in 0..n1 {
                    for k in 0..n2 {
                        row.push(f(spec.point([i, j, k]))?);
                    }
                }
                Ok(row)
            })
            .collect();
        Ok(DensityGrid {
            spec,
            values: rows?.concat(),
        })
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Relative L² distance `‖a − b‖ / ‖b‖` against a reference on the same grid.
    pub fn relative_l2(&self, reference: &DensityGrid) -> Result<f64> {
        if self.spec != reference.spec {
            return Err(Error::Grid("grids differ".into()));
        }
        let (mut num, mut den) = (0.0, 0.0);
        for (a, b) in self.values.iter().zip(&reference.values) {
            num += (a - b).powi(2);
            den += b * b;
        }
        Ok((num / den).sqrt())
    }
}

/// Result of [`locate_and_fit`]. Coordinates are in the grid's own frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    /// Grid sample with the largest density.
    pub peak_sample: [f64; 3],
    /// Peak refined by a parabola through the log-density on each axis.
    pub peak: [f64; 3],
    /// Mean of the Gaussian matched to the density near the peak.
    pub center: [f64; 3],
    pub covariance: Matrix3<f64>,
    /// Relative L² error of the best-amplitude fitted Gaussian over the window.
    pub residual: f64,
    pub window_points: usize,
}

impl LocalizationReport {
    pub fn sigmas(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.covariance[(i, i)].max(0.0).sqrt())
    }
}

/// Mahalanobis radius of the fit window.
pub const FIT_WINDOW: f64 = 4.0;

/// Peak position and Gaussian shape of a sampled density.
///
/// The covariance starts from the log-density curvature at the peak. It is
/// then refined from second moments over the points within `FIT_WINDOW`
/// standard deviations: first with the closed-form correction for a Gaussian
/// truncated to an ellipsoid, then, with the window frozen, by matching the
/// discrete moments of the model Gaussian on exactly the same points, which
/// removes the sampling bias of the window edge.
pub fn locate_and_fit(grid: &DensityGrid) -> Result<LocalizationReport> {
    let spec = grid.spec;
    let shape = spec.shape();
    let imax = spec.unindex(grid.argmax());
    let peak_val = grid.values[spec.index(imax)];
    if !(peak_val > 0.0) {
        return Err(Error::Grid("density has no positive sample".into()));
    }
    for a in 0..3 {
        if imax[a] == 0 || imax[a] + 1 == shape[a] {
            return Err(Error::Grid(format!(
                "peak lies on the boundary of axis {}",
                spec.frame.axis_names()[a]
            )));
        }
    }
    let peak_sample = spec.coords(imax);
    let mut peak = peak_sample;
    let mut var = [0.0; 3];
    for a in 0..3 {
        let h = spec.axes[a].step();
        let at = |d: isize| {
            let mut i = imax;
            i[a] = (i[a] as isize + d) as usize;
            grid.values[spec.index(i)].max(f64::MIN_POSITIVE).ln()
        };
        let (lm, l0, lp) = (at(-1), at(0), at(1));
        let curv = (lp - 2.0 * l0 + lm) / (h * h);
        if !(curv < 0.0) {
            return Err(Error::Grid("density is not peaked at its maximum".into()));
        }
        peak[a] += -(lp - lm) / (2.0 * h) / curv;
        var[a] = -1.0 / curv;
    }

    let coords: Vec<[f64; 3]> = (0..grid.values.len()).map(|i| spec.coords(spec.unindex(i))).collect();
    let mut center = Vector3::from(peak);
    let mut cov = Matrix3::from_diagonal(&Vector3::from(var));
    let a2 = FIT_WINDOW * FIT_WINDOW;
    let chi_d = ChiSquared::new(3.0).unwrap().cdf(a2);
    let chi_d2 = ChiSquared::new(5.0).unwrap().cdf(a2);

    let window = |center: &Vector3<f64>, cov: &Matrix3<f64>| -> Result<Vec<usize>> {
        let inv = cov
            .try_inverse()
            .ok_or_else(|| Error::Grid("singular covariance during fit".into()))?;
        Ok((0..coords.len())
            .filter(|&i| {
                let d = Vector3::from(coords[i]) - center;
                (d.transpose() * inv * d)[(0, 0)] <= a2
            })
            .collect())
    };
    let moments = |idx: &[usize], w: &dyn Fn(usize) -> f64| -> (Vector3<f64>, Matrix3<f64>) {
        let mut m0 = 0.0;
        let mut m1 = Vector3::zeros();
        for &i in idx {
            let v = w(i);
            m0 += v;
            m1 += Vector3::from(coords[i]) * v;
        }
        let mean = m1 / m0;
        let mut m2 = Matrix3::zeros();
        for &i in idx {
            let d = Vector3::from(coords[i]) - mean;
            m2 += d * d.transpose() * w(i);
        }
        (mean, m2 / m0)
    };
    let data = |i: usize| grid.values[i];

    for _ in 0..4 {
        let idx = window(&center, &cov)?;
        if idx.len() < 10 {
            return Err(Error::Grid("too few points inside the fit window".into()));
        }
        let (mean, m2) = moments(&idx, &data);
        center = mean;
        cov = m2 * (chi_d / chi_d2);
    }

    let idx = window(&center, &cov)?;
    let (obs_mean, obs_cov) = moments(&idx, &data);
    for _ in 0..200 {
        let inv = cov
            .try_inverse()
            .ok_or_else(|| Error::Grid("singular covariance during fit".into()))?;
        let c = center;
        let model = |i: usize| {
            let d = Vector3::from(coords[i]) - c;
            (-0.5 * (d.transpose() * inv * d)[(0, 0)]).exp()
        };
        let (m_mean, m_cov) = moments(&idx, &model);
        let dc = obs_mean - m_mean;
        let ds = obs_cov - m_cov;
        center += dc;
        cov += ds;
        cov = 0.5 * (cov + cov.transpose());
        let scale = cov.diagonal().map(f64::sqrt);
        let rel = (0..3)
            .map(|i| dc[i].abs() / scale[i])
            .chain((0..9).map(|k| ds[k].abs() / (scale[k % 3] * scale[k / 3])))
            .fold(0.0, f64::max);
        if rel < 1e-13 {
            break;
        }
    }

    let inv = cov
        .try_inverse()
        .ok_or_else(|| Error::Grid("singular covariance after fit".into()))?;
    let g: Vec<f64> = idx
        .iter()
        .map(|&i| {
            let d = Vector3::from(coords[i]) - center;
            (-0.5 * (d.transpose() * inv * d)[(0, 0)]).exp()
        })
        .collect();
    let (mut dg, mut gg, mut dd) = (0.0, 0.0, 0.0);
    for (k, &i) in idx.iter().enumerate() {
        dg += grid.values[i] * g[k];
        gg += g[k] * g[k];
        dd += grid.values[i] * grid.values[i];
    }
    let amp = dg / gg;
    let res2: f64 = idx
        .iter()
        .zip(&g)
        .map(|(&i, gk)| (grid.values[i] - amp * gk).powi(2))
        .sum();

    Ok(LocalizationReport {
        peak_sample,
        peak,
        center: center.into(),
        covariance: cov,
        residual: (res2 / dd).sqrt(),
        window_points: idx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let g: GridSpec = "rho:0:200:400,phi:0:6.2832:256,z:-20:20:80".parse().unwrap();
        assert_eq!(g.frame, Frame::Cylindrical);
        assert_eq!(g.shape(), [400, 256, 80]);
        let back: GridSpec = g.to_string().parse().unwrap();
        assert_eq!(back, g);
        assert!("x:0:1:4,y:0:1:4".parse::<GridSpec>().is_err());
        assert!("x:0:1:1,y:0:1:4,z:0:1:4".parse::<GridSpec>().is_err());
        assert!("x:1:0:4,y:0:1:4,z:0:1:4".parse::<GridSpec>().is_err());
        assert!("rho:0:1:4,y:0:1:4,z:0:1:4".parse::<GridSpec>().is_err());
    }

    #[test]
    fn index_round_trip() {
        let g: GridSpec = "x:0:1:3,y:0:1:5,z:0:1:7".parse().unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(g.unindex(i)), i);
        }
        assert_eq!(g.coords([2, 4, 6]), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn recovers_synthetic_gaussian() {
        let c = Vector3::new(0.31, -0.22, 0.15);
        let cov = Matrix3::new(1.0, 0.3, 0.1, 0.3, 0.8, -0.2, 0.1, -0.2, 0.5);
        let inv = cov.try_inverse().unwrap();
        let spec: GridSpec = "x:-6:6:61,y:-6:6:61,z:-4:4:41".parse().unwrap();
        let d = DensityGrid::sample(spec, |p| {
            let v = Vector3::new(p.x, p.y, p.z) - c;
            Ok(3.0 * (-0.5 * (v.transpose() * inv * v)[(0, 0)]).exp())
        })
        .unwrap();
        let rep = locate_and_fit(&d).unwrap();
        for i in 0..3 {
            assert!((rep.center[i] - c[i]).abs() < 1e-6, "{:?}", rep.center);
            for j in 0..3 {
                assert!((rep.covariance[(i, j)] - cov[(i, j)]).abs() < 1e-6, "{}", rep.covariance);
            }
        }
        assert!(rep.residual < 1e-8);
    }

    #[test]
    fn boundary_peak_is_an_error() {
        let spec: GridSpec = "x:0:1:11,y:-1:1:11,z:-1:1:11".parse().unwrap();
        let d = DensityGrid::sample(spec, |p| Ok((-p.x - p.y * p.y - p.z * p.z).exp())).unwrap();
        assert!(matches!(locate_and_fit(&d), Err(Error::Grid(_))));
    }
}
