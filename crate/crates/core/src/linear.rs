//! Linearized fluctuation dynamics: drift/diffusion construction, stability,
//! the steady-state Lyapunov solve and direct covariance evolution.
//!
//! Quadratures follow `X = (a + a†)/√2`, `Y = i(a† − a)/√2`, so the vacuum
//! covariance is `I/2` and the uncertainty relation reads `V + iΩ/2 ≥ 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EffectiveCouplings, Mode, PhysicalParams};
use crate::semiclassical::SemiclassicalState;

/// Stability margin as a fraction of the largest damping rate.
pub const STABILITY_TOL_REL: f64 = 1e-6;
/// Tolerance on the smallest eigenvalue of `V + iΩ/2`.
pub const PHYSICALITY_TOL: f64 = 1e-10;
/// Condition estimates above this attach a warning to the Lyapunov solution.
pub const CONDITION_WARN: f64 = 1e12;

/// Mode order of the reduced (skyrmion + first-order teeth) dynamics.
pub const REDUCED_ORDER: [Mode; 3] = [Mode::R, Mode::P, Mode::Q];
pub const FULL_ORDER: [Mode; 4] = [Mode::K, Mode::R, Mode::P, Mode::Q];

#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    pub mode_order: Vec<Mode>,
}

impl DriftDiffusion {
    pub fn n_modes(&self) -> usize {
        self.mode_order.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes()
    }

    /// Largest damping rate on the diagonal of the drift.
    pub fn max_damping(&self) -> f64 {
        (0..self.dim()).map(|i| self.drift[(i, i)].abs()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut ev: Vec<Complex64> = self.drift.complex_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
        ev
    }
}

/// `Ω_n = ⊕ iσ_y`, i.e. blocks `[[0, 1], [−1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for j in 0..n_modes {
        omega[(2 * j, 2 * j + 1)] = 1.0;
        omega[(2 * j + 1, 2 * j)] = -1.0;
    }
    omega
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceMatrix {
    #[serde(serialize_with = "crate::report::serialize_matrix")]
    pub matrix: DMatrix<f64>,
    pub mode_order: Vec<Mode>,
}

impl CovarianceMatrix {
    pub fn new(matrix: DMatrix<f64>, mode_order: Vec<Mode>) -> Result<Self> {
        let dim = 2 * mode_order.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Domain(format!(
                "covariance is {}x{} but {} modes need {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols(),
                mode_order.len()
            )));
        }
        Ok(CovarianceMatrix { matrix, mode_order })
    }

    pub fn vacuum(mode_order: Vec<Mode>) -> Self {
        let dim = 2 * mode_order.len();
        CovarianceMatrix { matrix: DMatrix::identity(dim, dim) * 0.5, mode_order }
    }

    pub fn index_of(&self, mode: Mode) -> Result<usize> {
        self.mode_order.iter().position(|&m| m == mode).ok_or(Error::UnknownMode(mode))
    }

    /// 2×2 block `(row_mode, col_mode)`.
    pub fn block(&self, row_mode: Mode, col_mode: Mode) -> Result<nalgebra::Matrix2<f64>> {
        let (i, j) = (2 * self.index_of(row_mode)?, 2 * self.index_of(col_mode)?);
        Ok(self.matrix.fixed_view::<2, 2>(i, j).into_owned())
    }

    /// Sub-covariance over the selected modes, in the given order.
    pub fn select(&self, modes: &[Mode]) -> Result<CovarianceMatrix> {
        let idx: Vec<usize> = modes
            .iter()
            .map(|&m| self.index_of(m).map(|i| [2 * i, 2 * i + 1]))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let dim = idx.len();
        let matrix = DMatrix::from_fn(dim, dim, |a, b| self.matrix[(idx[a], idx[b])]);
        Ok(CovarianceMatrix { matrix, mode_order: modes.to_vec() })
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).abs().max()
    }

    /// Eigenvalues of the Hermitian matrix `V + iΩ/2`, ascending.
    pub fn physicality_spectrum(&self) -> Vec<f64> {
        let n = self.mode_order.len();
        let dim = 2 * n;
        let half_omega = symplectic_form(n) * 0.5;
        // Real embedding [[A, −B], [B, A]] of A + iB doubles every eigenvalue.
        let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
        embed.view_mut((0, 0), (dim, dim)).copy_from(&self.matrix);
        embed.view_mut((dim, dim), (dim, dim)).copy_from(&self.matrix);
        embed.view_mut((0, dim), (dim, dim)).copy_from(&(-&half_omega));
        embed.view_mut((dim, 0), (dim, dim)).copy_from(&half_omega);
        let sym = (&embed + embed.transpose()) * 0.5;
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.into_iter().step_by(2).collect()
    }

    pub fn is_physical(&self) -> bool {
        self.physicality_spectrum().first().is_some_and(|&m| m >= -PHYSICALITY_TOL)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.matrix.clone().cholesky().is_some()
    }
}

fn require_trivial(state_regime: crate::semiclassical::Regime) -> Result<()> {
    if !state_regime.is_trivial() {
        return Err(Error::UnsupportedRegime(
            "fluctuations are only linearized around the below-threshold state".into(),
        ));
    }
    Ok(())
}

fn diffusion_for(params: &PhysicalParams, modes: &[Mode]) -> Result<DMatrix<f64>> {
    let baths = params.bath_occupations()?;
    let diag: Vec<f64> = modes
        .iter()
        .flat_map(|&m| {
            let d = params.kappa(m) * (2.0 * baths.get(m) + 1.0);
            [d, d]
        })
        .collect();
    Ok(DMatrix::from_diagonal(&DVector::from_vec(diag)))
}

/// The 6×6 drift of the skyrmion and the two first-order teeth at resonant
/// drive, rows/columns `[X_r, Y_r, X_p, Y_p, X_q, Y_q]`.
pub fn build_reduced_drift(eff: &EffectiveCouplings, params: &PhysicalParams) -> Result<DriftDiffusion> {
    params.validate()?;
    let delta_k = params.detunings().k;
    if delta_k != 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "reduced drift assumes a resonant drive (delta_k = {delta_k:e}); use build_full_drift"
        )));
    }
    if eff.threshold_margin(params) <= 0.0 {
        return Err(Error::UnsupportedRegime(
            "effective couplings place the drive above threshold".into(),
        ));
    }
    Ok(DriftDiffusion {
        drift: reduced_drift_matrix(eff, params),
        diffusion: diffusion_for(params, &REDUCED_ORDER)?,
        mode_order: REDUCED_ORDER.to_vec(),
    })
}

/// The reduced drift matrix without any regime checks.
pub fn reduced_drift_matrix(eff: &EffectiveCouplings, params: &PhysicalParams) -> DMatrix<f64> {
    let (kr, kp, kq, wr) = (params.kappa_r, params.kappa_p, params.kappa_q, params.omega_r);
    let (gp, gq) = (eff.g_p, eff.g_q);
    #[rustfmt::skip]
    let drift = DMatrix::from_row_slice(6, 6, &[
        -kr,  wr,  0.0,  gp,  0.0, -gq,
        -wr, -kr,  -gp, 0.0,  -gq, 0.0,
        0.0,  gp,  -kp,  wr,  0.0, 0.0,
        -gp, 0.0,  -wr, -kp,  0.0, 0.0,
        0.0, -gq,  0.0, 0.0,  -kq, -wr,
        -gq, 0.0,  0.0, 0.0,   wr, -kq,
    ]);
    drift
}

/// Real quadrature drift for `δȧ_i = Σ_j (A_ij δa_j + B_ij δa_j†)`.
pub fn quadrature_drift(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> DMatrix<f64> {
    let n = a.len();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (aij, bij) = (a[i][j], b[i][j]);
            m[(2 * i, 2 * j)] = aij.re + bij.re;
            m[(2 * i, 2 * j + 1)] = -aij.im + bij.im;
            m[(2 * i + 1, 2 * j)] = aij.im + bij.im;
            m[(2 * i + 1, 2 * j + 1)] = aij.re - bij.re;
        }
    }
    m
}

/// The 8×8 drift including the driven mode, linearized around a
/// below-threshold state, for arbitrary drive detuning.
pub fn build_full_drift(params: &PhysicalParams, state: &SemiclassicalState) -> Result<DriftDiffusion> {
    params.validate()?;
    require_trivial(state.regime)?;
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let d = params.detunings();
    let ak = state.mean_k;
    let (gp, gq) = (params.g_p, params.g_q);

    // Order k, r, p, q. With ⟨a_r⟩ = ⟨a_p⟩ = ⟨a_q⟩ = 0 every k cross term vanishes.
    let mut a = vec![vec![zero; 4]; 4];
    let mut b = vec![vec![zero; 4]; 4];
    a[0][0] = -(i * d.k + params.kappa_k);
    a[1][1] = -(i * params.omega_r + params.kappa_r);
    a[1][2] = -i * gp * ak.conj();
    b[1][3] = -i * gq * ak;
    a[2][2] = -(i * d.p + params.kappa_p);
    a[2][1] = -i * gp * ak;
    a[3][3] = -(i * d.q + params.kappa_q);
    b[3][1] = -i * gq * ak;

    Ok(DriftDiffusion {
        drift: quadrature_drift(&a, &b),
        diffusion: diffusion_for(params, &FULL_ORDER)?,
        mode_order: FULL_ORDER.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// Within the tolerance band around zero abscissa.
    pub marginal: bool,
    /// `max Re λ(M)` in rad/s.
    pub abscissa: f64,
    pub tolerance: f64,
}

pub fn is_stable(dd: &DriftDiffusion) -> StabilityVerdict {
    let abscissa = dd.eigenvalues().first().map_or(f64::NEG_INFINITY, |l| l.re);
    let tolerance = STABILITY_TOL_REL * dd.max_damping();
    StabilityVerdict {
        stable: abscissa < -tolerance,
        marginal: abscissa.abs() <= tolerance,
        abscissa,
        tolerance,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSolution {
    pub covariance: CovarianceMatrix,
    /// `‖MV + VMᵀ + D‖_F / ‖D‖_F`.
    pub residual: f64,
    /// 2-norm condition number of the vectorized operator.
    pub condition: f64,
    pub physicality_min: f64,
    pub physical: bool,
    pub warnings: Vec<String>,
}

pub fn lyapunov_residual(dd: &DriftDiffusion, v: &DMatrix<f64>) -> f64 {
    let r = &dd.drift * v + v * dd.drift.transpose() + &dd.diffusion;
    r.norm() / dd.diffusion.norm()
}

/// Solve `MV + VMᵀ = −D` through the vectorized system
/// `(I ⊗ M + M ⊗ I) vec V = −vec D`, with one step of iterative refinement.
pub fn solve_lyapunov(dd: &DriftDiffusion) -> Result<LyapunovSolution> {
    let verdict = is_stable(dd);
    if !verdict.stable {
        return Err(Error::NoSteadyState { abscissa: verdict.abscissa });
    }
    let n = dd.dim();
    // The equation is homogeneous in the rates; rescale to O(1) entries.
    let scale = dd.drift.abs().max().max(f64::MIN_POSITIVE);
    let m = &dd.drift / scale;
    let d = &dd.diffusion / scale;

    let eye = DMatrix::<f64>::identity(n, n);
    let op = eye.kronecker(&m) + m.kronecker(&eye);
    let rhs = DVector::from_column_slice((-&d).as_slice());
    let lu = op.clone().lu();
    let mut x = lu.solve(&rhs).ok_or_else(|| Error::Solve("singular Lyapunov operator".into()))?;
    let correction = lu
        .solve(&(&rhs - &op * &x))
        .ok_or_else(|| Error::Solve("singular Lyapunov operator".into()))?;
    x += correction;

    let v = DMatrix::from_column_slice(n, n, x.as_slice());
    let v = (&v + v.transpose()) * 0.5;

    let sv = op.singular_values();
    let condition = sv.max() / sv.min();
    let covariance = CovarianceMatrix { matrix: v, mode_order: dd.mode_order.clone() };
    let residual = lyapunov_residual(dd, &covariance.matrix);
    let physicality_min = covariance.physicality_spectrum()[0];

    let mut warnings = Vec::new();
    if condition > CONDITION_WARN {
        warnings.push(format!("ill-conditioned Lyapunov operator (condition {condition:.3e})"));
    }
    if verdict.marginal {
        warnings.push("drift is marginally stable".into());
    }
    let physical = physicality_min >= -PHYSICALITY_TOL;
    if !physical {
        warnings.push(format!("covariance violates the uncertainty relation (min eigenvalue {physicality_min:.3e})"));
    }
    Ok(LyapunovSolution { covariance, residual, condition, physicality_min, physical, warnings })
}

/// RK4 integration of `V̇ = MV + VMᵀ + D` from `v0` to `t_end`.
pub fn evolve_covariance(
    dd: &DriftDiffusion,
    v0: &CovarianceMatrix,
    t_end: f64,
    dt: f64,
) -> Result<CovarianceMatrix> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::Domain(format!("need dt > 0 and t_end >= 0 (dt = {dt}, t_end = {t_end})")));
    }
    let verdict = is_stable(dd);
    if !verdict.stable {
        return Err(Error::NoSteadyState { abscissa: verdict.abscissa });
    }
    if v0.mode_order != dd.mode_order {
        return Err(Error::Domain("initial covariance mode order differs from the drift".into()));
    }
    let m = &dd.drift;
    let mt = m.transpose();
    let rhs = |v: &DMatrix<f64>| m * v + v * &mt + &dd.diffusion;

    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let mut v = v0.matrix.clone();
    for n in 0..steps {
        let k1 = rhs(&v);
        let k2 = rhs(&(&v + &k1 * (h / 2.0)));
        let k3 = rhs(&(&v + &k2 * (h / 2.0)));
        let k4 = rhs(&(&v + &k3 * h));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { time: (n + 1) as f64 * h });
        }
    }
    Ok(CovarianceMatrix { matrix: v, mode_order: v0.mode_order.clone() })
}

/// Time step for [`evolve_covariance`]: RK4 needs `h·ρ(M)` well inside its
/// stability region, including the free rotation.
pub fn suggested_covariance_step(dd: &DriftDiffusion) -> f64 {
    let rho = dd.eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max);
    0.2 / rho
}
