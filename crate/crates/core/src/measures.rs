//! Bipartite Gaussian measures: logarithmic negativity, Gaussian EPR steering
//! and effective occupations.

use nalgebra::{Complex, Matrix2, Matrix4};
use serde::Serialize;

use crate::bogoliubov::{bogoliubov_frame, BogoliubovFrame};
use crate::error::{Error, Result};
use crate::linear::{CovarianceMatrix, PHYSICALITY_TOL};
use crate::model::{EffectiveCouplings, Mode};

/// Negative radicands within this (relative) band are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// Two-mode covariance `[[V1, V12], [V12ᵀ, V2]]` extracted from a parent matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCm {
    pub v1: Matrix2<f64>,
    pub v2: Matrix2<f64>,
    pub v12: Matrix2<f64>,
    pub modes: (Mode, Mode),
}

impl ReducedCm {
    pub fn from_blocks(v1: Matrix2<f64>, v2: Matrix2<f64>, v12: Matrix2<f64>, modes: (Mode, Mode)) -> Self {
        ReducedCm { v1, v2, v12, modes }
    }

    pub fn from_matrix(m: &Matrix4<f64>, modes: (Mode, Mode)) -> Self {
        ReducedCm {
            v1: m.fixed_view::<2, 2>(0, 0).into_owned(),
            v2: m.fixed_view::<2, 2>(2, 2).into_owned(),
            v12: m.fixed_view::<2, 2>(0, 2).into_owned(),
            modes,
        }
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.v1);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.v2);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.v12);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.v12.transpose());
        m
    }

    /// Same state with the two modes exchanged.
    pub fn swapped(&self) -> Self {
        ReducedCm {
            v1: self.v2,
            v2: self.v1,
            v12: self.v12.transpose(),
            modes: (self.modes.1, self.modes.0),
        }
    }
}

pub fn reduce_cm(v: &CovarianceMatrix, pair: (Mode, Mode)) -> Result<ReducedCm> {
    if pair.0 == pair.1 {
        return Err(Error::Domain(format!("pair needs two distinct modes, got {}{}", pair.0, pair.1)));
    }
    Ok(ReducedCm {
        v1: v.block(pair.0, pair.0)?,
        v2: v.block(pair.1, pair.1)?,
        v12: v.block(pair.0, pair.1)?,
        modes: pair,
    })
}

fn det2(m: &Matrix2<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Exact cofactor expansion along the first row.
pub fn det4(m: &Matrix4<f64>) -> f64 {
    let minor = |skip_col: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip_col).collect();
        let a = |r: usize, c: usize| m[(r, cols[c])];
        a(1, 0) * (a(2, 1) * a(3, 2) - a(2, 2) * a(3, 1)) - a(1, 1) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0))
            + a(1, 2) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0))
    };
    (0..4)
        .map(|c| {
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[(0, c)] * minor(c)
        })
        .sum()
}

fn clamp_nonnegative(x: f64, scale: f64, what: &str) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else if x >= -CLAMP_TOL * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!("{what} is negative ({x:e}); the covariance is unphysical")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Negativity {
    pub log_negativity: f64,
    /// Smallest symplectic eigenvalue of the partially transposed state.
    pub nu: f64,
}

impl Negativity {
    fn from_nu(nu: f64) -> Self {
        Negativity { log_negativity: (-(2.0 * nu).ln()).max(0.0), nu }
    }
}

/// Closed-form logarithmic negativity from the 2×2 block invariants.
pub fn log_negativity(rcm: &ReducedCm) -> Result<Negativity> {
    let sigma = det2(&rcm.v1) + det2(&rcm.v2) - 2.0 * det2(&rcm.v12);
    let det = det4(&rcm.matrix());
    let disc = clamp_nonnegative(sigma * sigma - 4.0 * det, sigma * sigma, "symplectic discriminant")?;
    // ν₋² = (Σ − √disc)/2, written as 2 det/(Σ + √disc) to avoid cancellation.
    let denom = sigma + disc.sqrt();
    if !(denom > 0.0) {
        return Err(Error::Domain("partially transposed state has a degenerate spectrum".into()));
    }
    let nu_sq = clamp_nonnegative(2.0 * det / denom, sigma.abs(), "squared symplectic eigenvalue")?;
    Ok(Negativity::from_nu(nu_sq.sqrt()))
}

/// Same quantity through the spectrum of `Ω P Ṽ P`, with `P` flipping the
/// second mode's momentum.
pub fn log_negativity_symplectic(rcm: &ReducedCm) -> Result<Negativity> {
    let flip = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    let pt = flip * rcm.matrix() * flip;
    if pt.cholesky().is_none() {
        return Err(Error::Domain("reduced covariance is not positive definite".into()));
    }
    let omega = Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    );
    let ev = (omega * pt).complex_eigenvalues();
    let nu = ev.iter().map(|z: &Complex<f64>| z.im.abs()).fold(f64::INFINITY, f64::min);
    Ok(Negativity::from_nu(nu))
}

/// Gaussian steerability `(S_12, S_21)` with `S(σ) = ln det σ / 2`.
pub fn gaussian_steering(rcm: &ReducedCm) -> Result<(f64, f64)> {
    let det_total = 16.0 * det4(&rcm.matrix());
    let det_1 = 4.0 * det2(&rcm.v1);
    let det_2 = 4.0 * det2(&rcm.v2);
    if !(det_total > 0.0 && det_1 > 0.0 && det_2 > 0.0) {
        return Err(Error::Domain("steering needs positive determinants".into()));
    }
    let s_total = det_total.ln() / 2.0;
    let s12 = (det_1.ln() / 2.0 - s_total).max(0.0);
    let s21 = (det_2.ln() / 2.0 - s_total).max(0.0);
    Ok((s12, s21))
}

/// `N_j = (⟨δX²⟩ + ⟨δY²⟩ − 1)/2`, clamped at zero within round-off.
pub fn effective_number(v: &CovarianceMatrix, mode: Mode) -> Result<f64> {
    let b = v.block(mode, mode)?;
    let n = (b[(0, 0)] + b[(1, 1)] - 1.0) / 2.0;
    if n < -PHYSICALITY_TOL {
        return Err(Error::Domain(format!("mode {mode} has sub-vacuum total variance (N = {n:e})")));
    }
    Ok(n.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairValues {
    pub rp: f64,
    pub rq: f64,
    pub pq: f64,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteeringValues {
    pub S_rp: f64,
    pub S_pr: f64,
    pub S_rq: f64,
    pub S_qr: f64,
    pub S_pq: f64,
    pub S_qp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Occupations {
    pub r: f64,
    pub p: f64,
    pub q: f64,
}

/// All bipartite measures of the skyrmion/teeth subsystem at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub log_negativity: PairValues,
    pub nu: PairValues,
    pub steering: SteeringValues,
    pub occupation: Occupations,
    pub stable: bool,
    pub physical: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bogoliubov: Option<BogoliubovFrame>,
}

pub const PAIRS: [(Mode, Mode); 3] = [(Mode::R, Mode::P), (Mode::R, Mode::Q), (Mode::P, Mode::Q)];

pub fn correlation_report(
    v: &CovarianceMatrix,
    eff: Option<&EffectiveCouplings>,
    stable: bool,
    physical: bool,
) -> Result<CorrelationReport> {
    let mut en = [0.0; 3];
    let mut nu = [0.0; 3];
    let mut steer = [(0.0, 0.0); 3];
    for (slot, &pair) in PAIRS.iter().enumerate() {
        let rcm = reduce_cm(v, pair)?;
        let neg = log_negativity(&rcm)?;
        en[slot] = neg.log_negativity;
        nu[slot] = neg.nu;
        steer[slot] = gaussian_steering(&rcm)?;
    }
    let bogoliubov = match eff {
        Some(eff) if eff.g_q < eff.g_p => Some(bogoliubov_frame(v, eff)?),
        _ => None,
    };
    Ok(CorrelationReport {
        log_negativity: PairValues { rp: en[0], rq: en[1], pq: en[2] },
        nu: PairValues { rp: nu[0], rq: nu[1], pq: nu[2] },
        steering: SteeringValues {
            S_rp: steer[0].0,
            S_pr: steer[0].1,
            S_rq: steer[1].0,
            S_qr: steer[1].1,
            S_pq: steer[2].0,
            S_qp: steer[2].1,
        },
        occupation: Occupations {
            r: effective_number(v, Mode::R)?,
            p: effective_number(v, Mode::P)?,
            q: effective_number(v, Mode::Q)?,
        },
        stable,
        physical,
        bogoliubov,
    })
}
