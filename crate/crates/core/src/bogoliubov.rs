//! Delocalized Bogoliubov modes of the two comb teeth.
//!
//! With `c = cosh ξ`, `s = sinh ξ` the modes are `β₁ = c a_q + s a_p†` and
//! `β₂ = c a_p + s a_q†`, where `tanh ξ = G_q/G_p`. In this frame the teeth
//! couple to the skyrmion through a beam splitter of strength
//! `G̃ = √(G_p² − G_q²)`.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::CovarianceMatrix;
use crate::model::{EffectiveCouplings, Mode};

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BogoliubovFrame {
    pub xi: f64,
    pub G_tilde: f64,
    pub occupancy_beta1: f64,
    pub occupancy_beta2: f64,
}

pub fn squeeze_parameter(eff: &EffectiveCouplings) -> Result<f64> {
    if !(eff.g_q >= 0.0) || !(eff.g_q < eff.g_p) {
        return Err(Error::Domain(format!(
            "Bogoliubov frame needs 0 <= G_q < G_p (G_p = {:e}, G_q = {:e})",
            eff.g_p, eff.g_q
        )));
    }
    Ok((eff.g_q / eff.g_p).atanh())
}

pub fn effective_beam_splitter(eff: &EffectiveCouplings) -> Result<f64> {
    squeeze_parameter(eff)?;
    Ok(((eff.g_p - eff.g_q) * (eff.g_p + eff.g_q)).sqrt())
}

/// Normally ordered moments of the teeth read off the symmetrized covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeethMoments {
    /// `⟨a_p†a_p⟩`
    pub n_p: f64,
    /// `⟨a_q†a_q⟩`
    pub n_q: f64,
    /// `⟨a_q†a_p† + a_q a_p⟩ = 2 Re⟨a_q a_p⟩`
    pub pair: f64,
}

pub fn teeth_moments(v: &CovarianceMatrix) -> Result<TeethMoments> {
    let bp = v.block(Mode::P, Mode::P)?;
    let bq = v.block(Mode::Q, Mode::Q)?;
    let cross = v.block(Mode::Q, Mode::P)?;
    // a = (X + iY)/√2, so ⟨a†a⟩ = (⟨X²⟩ + ⟨Y²⟩ − 1)/2 and
    // 2 Re⟨a_q a_p⟩ = ⟨X_q X_p⟩ − ⟨Y_q Y_p⟩.
    Ok(TeethMoments {
        n_p: (bp[(0, 0)] + bp[(1, 1)] - 1.0) / 2.0,
        n_q: (bq[(0, 0)] + bq[(1, 1)] - 1.0) / 2.0,
        pair: cross[(0, 0)] - cross[(1, 1)],
    })
}

/// `(⟨β₁†β₁⟩, ⟨β₂†β₂⟩)` from the closed-form occupancy expression, including
/// the `sinh²ξ` normal-ordering contribution.
pub fn bogoliubov_occupations(v: &CovarianceMatrix, eff: &EffectiveCouplings) -> Result<(f64, f64)> {
    occupations_at(v, squeeze_parameter(eff)?)
}

pub fn occupations_at(v: &CovarianceMatrix, xi: f64) -> Result<(f64, f64)> {
    let m = teeth_moments(v)?;
    let (c, s) = (xi.cosh(), xi.sinh());
    let beta1 = c * c * m.n_q + s * s * (m.n_p + 1.0) + c * s * m.pair;
    let beta2 = c * c * m.n_p + s * s * (m.n_q + 1.0) + c * s * m.pair;
    Ok((beta1, beta2))
}

/// Symplectic map from `(X_p, Y_p, X_q, Y_q)` to `(X_β₁, Y_β₁, X_β₂, Y_β₂)`.
pub fn bogoliubov_symplectic(xi: f64) -> Matrix4<f64> {
    let (c, s) = (xi.cosh(), xi.sinh());
    Matrix4::new(
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c, //
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s,
    )
}

/// Covariance of the Bogoliubov pair, ordered `(β₁, β₂)`.
pub fn to_bogoliubov_basis(v: &CovarianceMatrix, xi: f64) -> Result<Matrix4<f64>> {
    let pq = v.select(&[Mode::P, Mode::Q])?;
    let m = Matrix4::from_iterator(pq.matrix.iter().copied());
    let t = bogoliubov_symplectic(xi);
    Ok(t * m * t.transpose())
}

pub fn bogoliubov_frame(v: &CovarianceMatrix, eff: &EffectiveCouplings) -> Result<BogoliubovFrame> {
    let xi = squeeze_parameter(eff)?;
    let (occupancy_beta1, occupancy_beta2) = occupations_at(v, xi)?;
    Ok(BogoliubovFrame {
        xi,
        G_tilde: effective_beam_splitter(eff)?,
        occupancy_beta1,
        occupancy_beta2,
    })
}

/// `(p, q)` covariance of the joint Bogoliubov vacuum with squeezing `ξ`.
pub fn bogoliubov_vacuum(xi: f64) -> CovarianceMatrix {
    let c = (2.0 * xi).cosh() / 2.0;
    let s = (2.0 * xi).sinh() / 2.0;
    let mut m = Matrix4::<f64>::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(Matrix2::identity() * c));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(Matrix2::identity() * c));
    let cross = Matrix2::new(-s, 0.0, 0.0, s);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&cross);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&cross);
    CovarianceMatrix::new(DMatrix::from_iterator(4, 4, m.iter().copied()), vec![Mode::P, Mode::Q])
        .expect("valid 4x4 covariance")
}
