//! Gaussian Wigner function of the two teeth and its two-quadrature marginals.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::CovarianceMatrix;
use crate::model::Mode;

pub const DEFAULT_POINTS: usize = 201;
pub const DEFAULT_EXTENT_SIGMAS: f64 = 6.0;
/// Vacuum variance of a single quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// One of the four fluctuation quadratures, in `(X_p, Y_p, X_q, Y_q)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Quadrature {
    #[serde(rename = "X_p")]
    Xp,
    #[serde(rename = "Y_p")]
    Yp,
    #[serde(rename = "X_q")]
    Xq,
    #[serde(rename = "Y_q")]
    Yq,
}

impl Quadrature {
    pub const ALL: [Quadrature; 4] = [Quadrature::Xp, Quadrature::Yp, Quadrature::Xq, Quadrature::Yq];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Quadrature::Xp => "X_p",
            Quadrature::Yp => "Y_p",
            Quadrature::Xq => "X_q",
            Quadrature::Yq => "Y_q",
        }
    }

    pub fn parse(s: &str) -> Option<Quadrature> {
        Quadrature::ALL.into_iter().find(|q| q.label().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// All six unordered quadrature pairs.
pub const ALL_PAIRS: [(Quadrature, Quadrature); 6] = [
    (Quadrature::Xp, Quadrature::Yp),
    (Quadrature::Xq, Quadrature::Yq),
    (Quadrature::Xp, Quadrature::Xq),
    (Quadrature::Yp, Quadrature::Yq),
    (Quadrature::Xp, Quadrature::Yq),
    (Quadrature::Yp, Quadrature::Xq),
];

pub fn pq_block(v: &CovarianceMatrix) -> Result<Matrix4<f64>> {
    let pq = v.select(&[Mode::P, Mode::Q])?;
    Ok(Matrix4::from_iterator(pq.matrix.iter().copied()))
}

/// `exp(−μᵀV⁻¹μ/2) / (π² √det V)`.
///
/// This weight integrates to 4 over the four quadratures; divide by 4 (or use
/// [`wigner_density`]) for a probability density.
pub fn wigner_value(v_pq: &Matrix4<f64>, point: &Vector4<f64>) -> Result<f64> {
    let chol = v_pq
        .cholesky()
        .ok_or_else(|| Error::Domain("Wigner function needs a positive-definite covariance".into()))?;
    let det = chol.determinant();
    let form = point.dot(&chol.solve(point));
    Ok((-0.5 * form).exp() / (PI * PI * det.sqrt()))
}

/// Normalized four-dimensional Gaussian density with covariance `V`.
pub fn wigner_density(v_pq: &Matrix4<f64>, point: &Vector4<f64>) -> Result<f64> {
    Ok(wigner_value(v_pq, point)? / 4.0)
}

/// The 1/e contour `μᵀΣ⁻¹μ = 2` of a centered bivariate normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Angle of the major axis from the first axis, in degrees within `[0, 180)`.
    pub orientation_deg: f64,
    pub major_variance: f64,
    pub minor_variance: f64,
}

impl Ellipse {
    pub fn from_covariance(sigma: &Matrix2<f64>) -> Result<Self> {
        let eig = SymmetricEigen::new(*sigma);
        let (hi, lo) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
        let (major_variance, minor_variance) = (eig.eigenvalues[hi], eig.eigenvalues[lo]);
        if !(minor_variance > 0.0) {
            return Err(Error::Domain("marginal covariance is not positive definite".into()));
        }
        let axis = eig.eigenvectors.column(hi);
        let mut angle = axis[1].atan2(axis[0]).to_degrees();
        angle = angle.rem_euclid(180.0);
        if angle >= 180.0 {
            angle -= 180.0;
        }
        Ok(Ellipse {
            center: [0.0, 0.0],
            semi_major: (2.0 * major_variance).sqrt(),
            semi_minor: (2.0 * minor_variance).sqrt(),
            orientation_deg: angle,
            major_variance,
            minor_variance,
        })
    }

    /// Points on the contour at `n` equally spaced parametric angles.
    pub fn points(&self, n: usize) -> Vec<[f64; 2]> {
        let (s, c) = self.orientation_deg.to_radians().sin_cos();
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let (u, w) = (self.semi_major * t.cos(), self.semi_minor * t.sin());
                [self.center[0] + c * u - s * w, self.center[1] + s * u + c * w]
            })
            .collect()
    }

    /// Variance below the vacuum level along the minor axis.
    pub fn is_squeezed(&self) -> bool {
        self.minor_variance < VACUUM_VARIANCE
    }

    /// Within `tol_deg` of 45° or 135°.
    pub fn is_diagonal(&self, tol_deg: f64) -> bool {
        (self.orientation_deg - 45.0).abs() <= tol_deg || (self.orientation_deg - 135.0).abs() <= tol_deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    /// Half-width of each axis in units of that axis's standard deviation.
    pub extent_sigmas: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: DEFAULT_POINTS, extent_sigmas: DEFAULT_EXTENT_SIGMAS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub axes: (Quadrature, Quadrature),
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    /// `values[i][j]` is the density at `(axis1[i], axis2[j])`.
    pub values: Vec<Vec<f64>>,
    #[serde(serialize_with = "crate::report::serialize_rows")]
    pub covariance: Matrix2<f64>,
    pub contour_1e: Ellipse,
    pub vacuum_radius: f64,
    pub squeezed: bool,
}

impl WignerGrid {
    pub fn cell_area(&self) -> f64 {
        (self.axis1[1] - self.axis1[0]) * (self.axis2[1] - self.axis2[0])
    }

    /// Riemann sum of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().flatten().sum::<f64>() * self.cell_area()
    }
}

pub fn marginal_covariance(v_pq: &Matrix4<f64>, axes: (Quadrature, Quadrature)) -> Result<Matrix2<f64>> {
    let (a, b) = (axes.0.index(), axes.1.index());
    if a == b {
        return Err(Error::Domain(format!("marginal needs two distinct quadratures, got {}", axes.0)));
    }
    Ok(Matrix2::new(v_pq[(a, a)], v_pq[(a, b)], v_pq[(b, a)], v_pq[(b, b)]))
}

pub fn bivariate_density(sigma: &Matrix2<f64>, x: f64, y: f64) -> Result<f64> {
    let det = sigma[(0, 0)] * sigma[(1, 1)] - sigma[(0, 1)] * sigma[(1, 0)];
    let inv = sigma
        .try_inverse()
        .filter(|_| det > 0.0 && sigma[(0, 0)] > 0.0)
        .ok_or_else(|| Error::Domain("degenerate marginal covariance".into()))?;
    let mu = Vector2::new(x, y);
    Ok((-0.5 * mu.dot(&(inv * mu))).exp() / (2.0 * PI * det.sqrt()))
}

pub fn marginal_pair(v_pq: &Matrix4<f64>, axes: (Quadrature, Quadrature), grid: GridSpec) -> Result<WignerGrid> {
    if grid.points < 2 || !(grid.extent_sigmas > 0.0) {
        return Err(Error::Domain("grid needs at least two points and a positive extent".into()));
    }
    let sigma = marginal_covariance(v_pq, axes)?;
    let contour_1e = Ellipse::from_covariance(&sigma)?;
    let axis = |var: f64| -> Vec<f64> {
        let half = grid.extent_sigmas * var.sqrt();
        let step = 2.0 * half / (grid.points - 1) as f64;
        (0..grid.points).map(|k| -half + step * k as f64).collect()
    };
    let axis1 = axis(sigma[(0, 0)]);
    let axis2 = axis(sigma[(1, 1)]);
    bivariate_density(&sigma, 0.0, 0.0)?;
    let values = axis1
        .par_iter()
        .map(|&x| axis2.iter().map(|&y| bivariate_density(&sigma, x, y).expect("checked above")).collect())
        .collect();
    Ok(WignerGrid {
        axes,
        axis1,
        axis2,
        values,
        covariance: sigma,
        squeezed: contour_1e.is_squeezed(),
        contour_1e,
        vacuum_radius: 1.0,
    })
}

pub fn all_marginals(v_pq: &Matrix4<f64>, grid: GridSpec) -> Result<Vec<WignerGrid>> {
    ALL_PAIRS.iter().map(|&axes| marginal_pair(v_pq, axes, grid)).collect()
}
