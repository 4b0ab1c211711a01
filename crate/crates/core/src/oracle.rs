//! Monte Carlo estimate of the stationary covariance from the linear Langevin
//! equations `du = M u dt + dW`, `⟨dW dWᵀ⟩ = D dt`.
//!
//! Each step applies the exact transition of the linear SDE over `dt`: the
//! propagator `e^{M dt}` and a Gaussian kick with covariance
//! `Q(dt) = ∫₀^dt e^{Ms} D e^{Mᵀs} ds` (Van Loan). Plain Euler–Maruyama is
//! unusable here because the free rotation at `ω_r` is many orders of
//! magnitude faster than the damping that sets `dt`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::{is_stable, CovarianceMatrix, DriftDiffusion};

pub const MIN_TRAJECTORIES: usize = 1000;
/// Upper bound on `dt·|abscissa|`.
pub const MAX_STEP_RATIO: f64 = 0.05;
/// Lower bound on `t_end·|abscissa|`.
pub const MIN_DURATION_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub n_trajectories: usize,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    /// Fraction of `t_end` discarded before averaging.
    pub burn_in: f64,
}

impl EnsembleSpec {
    /// Step `0.04/|a|`, duration `16/|a|`, half of it burn-in, with `a` the
    /// spectral abscissa of the drift.
    pub fn for_drift(dd: &DriftDiffusion, n_trajectories: usize, seed: u64) -> Result<Self> {
        let verdict = is_stable(dd);
        if !verdict.stable {
            return Err(Error::NoSteadyState { abscissa: verdict.abscissa });
        }
        let rate = verdict.abscissa.abs();
        Ok(EnsembleSpec { n_trajectories, dt: 0.04 / rate, t_end: 16.0 / rate, seed, burn_in: 0.5 })
    }

    pub fn validate(&self, dd: &DriftDiffusion) -> Result<()> {
        let verdict = is_stable(dd);
        if !verdict.stable {
            return Err(Error::NoSteadyState { abscissa: verdict.abscissa });
        }
        let rate = verdict.abscissa.abs();
        if self.n_trajectories < MIN_TRAJECTORIES {
            return Err(Error::InvalidSpec(format!("need at least {MIN_TRAJECTORIES} trajectories")));
        }
        if !(self.dt > 0.0) || self.dt * rate >= MAX_STEP_RATIO {
            return Err(Error::InvalidSpec(format!("dt·|abscissa| = {:.3e} must be in (0, {MAX_STEP_RATIO})", self.dt * rate)));
        }
        if !(self.t_end * rate >= MIN_DURATION_RATIO) {
            return Err(Error::InvalidSpec(format!("t_end·|abscissa| must be at least {MIN_DURATION_RATIO}")));
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::InvalidSpec("burn_in must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleEstimate {
    pub covariance: CovarianceMatrix,
    #[serde(serialize_with = "crate::report::serialize_matrix")]
    pub standard_error: DMatrix<f64>,
    pub n_trajectories: usize,
    pub steps: usize,
    pub seed: u64,
}

impl EnsembleEstimate {
    pub fn mean_standard_error(&self) -> f64 {
        self.standard_error.mean()
    }
}

/// Exact one-step propagator and the Cholesky factor of its noise covariance.
pub fn discretize(dd: &DriftDiffusion, dt: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = dd.dim();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(-&dd.drift * dt));
    block.view_mut((0, n), (n, n)).copy_from(&(&dd.diffusion * dt));
    block.view_mut((n, n), (n, n)).copy_from(&(dd.drift.transpose() * dt));
    let f = block.exp();
    let phi = f.view((n, n), (n, n)).transpose();
    let q = &phi * f.view((0, n), (n, n));
    let q = (&q + q.transpose()) * 0.5;
    let chol = q
        .cholesky()
        .ok_or_else(|| Error::Solve("step noise covariance is not positive definite".into()))?;
    Ok((phi, chol.l()))
}

fn trajectory_moments(
    phi: &DMatrix<f64>,
    kick: &DMatrix<f64>,
    spec: &EnsembleSpec,
    index: u64,
) -> Result<DMatrix<f64>> {
    let n = phi.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    let steps = spec.steps();
    let first_kept = ((spec.burn_in * steps as f64).ceil() as usize).min(steps - 1);
    let mut u = DVector::<f64>::zeros(n);
    let mut next = DVector::<f64>::zeros(n);
    let mut z = DVector::<f64>::zeros(n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for step in 1..=steps {
        z.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
        next.gemv(1.0, phi, &u, 0.0);
        next.gemv(1.0, kick, &z, 1.0);
        std::mem::swap(&mut u, &mut next);
        if step > first_kept {
            acc.ger(1.0, &u, &u, 1.0);
        }
    }
    if acc.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteTrajectory { seed: spec.seed, index });
    }
    Ok(acc / (steps - first_kept) as f64)
}

/// Time-averaged second moments per trajectory, then mean and standard error
/// across trajectories. Reduction runs in trajectory order, so the result
/// does not depend on the thread count.
pub fn simulate_ensemble(dd: &DriftDiffusion, spec: &EnsembleSpec) -> Result<EnsembleEstimate> {
    spec.validate(dd)?;
    let (phi, kick) = discretize(dd, spec.dt)?;
    let per_trajectory: Vec<DMatrix<f64>> = (0..spec.n_trajectories as u64)
        .into_par_iter()
        .map(|index| trajectory_moments(&phi, &kick, spec, index))
        .collect::<Result<_>>()?;

    let n = dd.dim();
    let count = per_trajectory.len() as f64;
    let mut mean = DMatrix::<f64>::zeros(n, n);
    for m in &per_trajectory {
        mean += m;
    }
    mean /= count;
    let mut spread = DMatrix::<f64>::zeros(n, n);
    for m in &per_trajectory {
        spread += (m - &mean).map(|x| x * x);
    }
    let standard_error = (spread / (count - 1.0)).map(|x| (x / count).sqrt());
    let mean = (&mean + mean.transpose()) * 0.5;
    Ok(EnsembleEstimate {
        covariance: CovarianceMatrix { matrix: mean, mode_order: dd.mode_order.clone() },
        standard_error,
        n_trajectories: spec.n_trajectories,
        steps: spec.steps(),
        seed: spec.seed,
    })
}

/// `‖A − B‖_F / ‖B‖_F`.
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
