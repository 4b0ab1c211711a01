//! Mean-field steady states, threshold classification and RK4 integration of
//! the nonlinear mean-field equations.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::PhysicalParams;

/// Relative distance to threshold inside which a drive is reported as
/// above threshold with `near_threshold` set.
pub const NEAR_THRESHOLD_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "below")]
    BelowThreshold,
    #[serde(rename = "above")]
    AboveThreshold,
    #[serde(rename = "divergent")]
    DivergentThreshold,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::BelowThreshold => "below",
            Regime::AboveThreshold => "above",
            Regime::DivergentThreshold => "divergent",
        }
    }

    /// Only the trivial solution (teeth and skyrmion unoccupied) admits the
    /// linearized fluctuation analysis.
    pub fn is_trivial(self) -> bool {
        !matches!(self, Regime::AboveThreshold)
    }
}

/// Phase relations that fix the above-threshold solution up to the free
/// skyrmion phase `φ_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseConstraints {
    /// `φ_p + φ_q − 2φ_k` (≡ π mod 2π).
    pub sum_offset: f64,
    /// `φ_p − φ_q − 2φ_r` (≡ 0 mod 2π).
    pub difference_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalState {
    pub mean_k: Complex64,
    pub mean_r: Complex64,
    pub mean_p: Complex64,
    pub mean_q: Complex64,
    pub regime: Regime,
    /// `ε_th` in rad/s; `+∞` on the divergent branch.
    pub threshold: f64,
    /// Set when the drive sits within [`NEAR_THRESHOLD_REL`] of the threshold.
    pub near_threshold: bool,
    /// Above threshold only `φ_k` is fixed by the drive; the other phases
    /// follow from the chosen `φ_r`.
    pub phases_undetermined: bool,
}

impl SemiclassicalState {
    pub fn zero() -> Self {
        SemiclassicalState {
            mean_k: Complex64::new(0.0, 0.0),
            mean_r: Complex64::new(0.0, 0.0),
            mean_p: Complex64::new(0.0, 0.0),
            mean_q: Complex64::new(0.0, 0.0),
            regime: Regime::BelowThreshold,
            threshold: f64::INFINITY,
            near_threshold: false,
            phases_undetermined: false,
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.mean_k, self.mean_r, self.mean_p, self.mean_q]
    }

    fn with_amplitudes(&self, a: [Complex64; 4]) -> Self {
        SemiclassicalState {
            mean_k: a[0],
            mean_r: a[1],
            mean_p: a[2],
            mean_q: a[3],
            ..*self
        }
    }

    pub fn phase_constraints(&self) -> PhaseConstraints {
        let (pk, pr, pp, pq) = (self.mean_k.arg(), self.mean_r.arg(), self.mean_p.arg(), self.mean_q.arg());
        PhaseConstraints {
            sum_offset: wrap_angle(pp + pq - 2.0 * pk),
            difference_offset: wrap_angle(pp - pq - 2.0 * pr),
        }
    }
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Angular distance between two phases modulo 2π.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[derive(Serialize)]
struct PolarAmplitude {
    modulus: f64,
    phase: f64,
}

impl Serialize for SemiclassicalState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let polar = |z: Complex64| PolarAmplitude { modulus: z.norm(), phase: z.arg() };
        let mut s = serializer.serialize_struct("SemiclassicalState", 8)?;
        s.serialize_field("regime", self.regime.tag())?;
        // JSON has no infinity; a divergent threshold is emitted as null.
        s.serialize_field("threshold", &self.threshold.is_finite().then_some(self.threshold))?;
        s.serialize_field("near_threshold", &self.near_threshold)?;
        s.serialize_field("phases_undetermined", &self.phases_undetermined)?;
        s.serialize_field("k", &polar(self.mean_k))?;
        s.serialize_field("r", &polar(self.mean_r))?;
        s.serialize_field("p", &polar(self.mean_p))?;
        s.serialize_field("q", &polar(self.mean_q))?;
        s.end()
    }
}

fn require_resonant(params: &PhysicalParams) -> Result<()> {
    let delta_k = params.detunings().k;
    if delta_k != 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "closed-form threshold requires a resonant drive (delta_k = {delta_k:e} rad/s)"
        )));
    }
    Ok(())
}

/// `g_q² κ_p − g_p² κ_q`; the threshold is finite only when this is positive.
fn threshold_denominator(params: &PhysicalParams) -> f64 {
    params.g_q * params.g_q * params.kappa_p - params.g_p * params.g_p * params.kappa_q
}

/// Drive amplitude `ε_th = κ_k √(κ_r κ_p κ_q / (g_q² κ_p − g_p² κ_q))`, or `+∞`.
pub fn threshold_amplitude(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    require_resonant(params)?;
    let den = threshold_denominator(params);
    if den <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(params.kappa_k * (params.kappa_r * params.kappa_p * params.kappa_q / den).sqrt())
}

/// Analytic steady state. Above threshold the free skyrmion phase defaults to 0;
/// use [`steady_state_with_phase`] to pick another member of the family.
pub fn steady_state(params: &PhysicalParams) -> Result<SemiclassicalState> {
    steady_state_with_phase(params, 0.0)
}

pub fn steady_state_with_phase(params: &PhysicalParams, phi_r: f64) -> Result<SemiclassicalState> {
    let threshold = threshold_amplitude(params)?;
    let eps = params.drive_amplitude;
    let near = threshold.is_finite() && (eps - threshold).abs() < NEAR_THRESHOLD_REL * threshold;

    let trivial = |regime| SemiclassicalState {
        mean_k: params.drive() / params.kappa_k,
        regime,
        threshold,
        ..SemiclassicalState::zero()
    };

    if threshold.is_infinite() {
        return Ok(trivial(Regime::DivergentThreshold));
    }
    if eps < threshold && !near {
        return Ok(trivial(Regime::BelowThreshold));
    }

    let (kk, kr, kp, kq) = (params.kappa_k, params.kappa_r, params.kappa_p, params.kappa_q);
    let (gp, gq) = (params.g_p, params.g_q);
    let den = threshold_denominator(params);
    // Clamp so a drive marginally below the threshold (but inside the
    // near-threshold band) yields the zero-amplitude limit of the branch.
    let excess = ((eps - threshold) / threshold).max(0.0);
    let a_k = (kr * kp * kq / den).sqrt();
    let a_r = (excess * kk * kp * kq / (gq * gq * kp + gp * gp * kq)).sqrt();
    let tooth = (excess * kk * kr / (gq.powi(4) * kp * kp - gp.powi(4) * kq * kq)).sqrt();
    let a_p = gp * kq * tooth;
    let a_q = gq * kp * tooth;

    let phi_k = params.drive_phase;
    let phi_p = phi_k + FRAC_PI_2 + phi_r;
    let phi_q = phi_k + FRAC_PI_2 - phi_r;

    Ok(SemiclassicalState {
        mean_k: Complex64::from_polar(a_k, phi_k),
        mean_r: Complex64::from_polar(a_r, phi_r),
        mean_p: Complex64::from_polar(a_p, phi_p),
        mean_q: Complex64::from_polar(a_q, phi_q),
        regime: Regime::AboveThreshold,
        threshold,
        near_threshold: near,
        phases_undetermined: true,
    })
}

/// Right-hand side of the four coupled mean-field equations in the frame
/// rotating at the drive frequency.
pub fn meanfield_rhs(params: &PhysicalParams, a: &[Complex64; 4]) -> [Complex64; 4] {
    let i = Complex64::i();
    let d = params.detunings();
    let [ak, ar, ap, aq] = *a;
    let (gp, gq) = (params.g_p, params.g_q);
    [
        -(i * d.k + params.kappa_k) * ak - i * gp * ar.conj() * ap - i * gq * ar * aq + params.drive(),
        -(i * params.omega_r + params.kappa_r) * ar - i * gp * ak.conj() * ap - i * gq * ak * aq.conj(),
        -(i * d.p + params.kappa_p) * ap - i * gp * ak * ar,
        -(i * d.q + params.kappa_q) * aq - i * gq * ak * ar.conj(),
    ]
}

/// Step size `0.01 / max(|ω_r|, |Δ|'s, κ's)` for [`integrate_meanfield`].
pub fn suggested_meanfield_step(params: &PhysicalParams) -> f64 {
    let d = params.detunings();
    let fastest = [
        params.omega_r,
        d.k.abs(),
        d.p.abs(),
        d.q.abs(),
        params.kappa_k,
        params.kappa_r,
        params.kappa_p,
        params.kappa_q,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    0.01 / fastest
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SemiclassicalState>,
}

impl Trajectory {
    pub fn last(&self) -> &SemiclassicalState {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

const MAX_SAMPLES: usize = 1024;

/// Fixed-step classical RK4 over `[0, t_end]`. At most ~1024 evenly spaced
/// samples are kept; the final state is always included.
pub fn integrate_meanfield(
    params: &PhysicalParams,
    initial: &SemiclassicalState,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    params.validate()?;
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::Domain(format!("need dt > 0 and t_end > 0 (dt = {dt}, t_end = {t_end})")));
    }
    let steps = (t_end / dt).ceil() as usize;
    let h = t_end / steps as f64;
    let stride = steps.div_ceil(MAX_SAMPLES).max(1);

    let mut a = initial.amplitudes();
    let mut traj = Trajectory { times: vec![0.0], states: vec![*initial] };

    let axpy = |x: &[Complex64; 4], k: &[Complex64; 4], s: f64| -> [Complex64; 4] {
        std::array::from_fn(|j| x[j] + k[j] * s)
    };

    for n in 1..=steps {
        let k1 = meanfield_rhs(params, &a);
        let k2 = meanfield_rhs(params, &axpy(&a, &k1, h / 2.0));
        let k3 = meanfield_rhs(params, &axpy(&a, &k2, h / 2.0));
        let k4 = meanfield_rhs(params, &axpy(&a, &k3, h));
        for j in 0..4 {
            a[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
        let t = n as f64 * h;
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Divergence { time: t });
        }
        if n % stride == 0 || n == steps {
            traj.times.push(t);
            traj.states.push(initial.with_amplitudes(a));
        }
    }
    Ok(traj)
}
