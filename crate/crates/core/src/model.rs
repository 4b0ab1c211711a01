//! Physical scenario, mode labels, thermal baths and effective couplings.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};

/// The four bosonic modes of the comb: the driven whispering-gallery mode `k`,
/// the skyrmion mode `r`, and the sum/difference-frequency teeth `p` and `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    K,
    R,
    P,
    Q,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::K, Mode::R, Mode::P, Mode::Q];

    pub fn label(self) -> &'static str {
        match self {
            Mode::K => "k",
            Mode::R => "r",
            Mode::P => "p",
            Mode::Q => "q",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "k" => Some(Mode::K),
            "r" => Some(Mode::R),
            "p" => Some(Mode::P),
            "q" => Some(Mode::Q),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A complete physical scenario. All rates and frequencies are angular (rad/s).
///
/// The comb teeth frequencies are never stored: `ω_p = ω_k + ω_r` and
/// `ω_q = ω_k − ω_r` are derived, as are the detunings from the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_k: f64,
    pub omega_r: f64,
    pub omega_0: f64,
    pub kappa_k: f64,
    pub kappa_r: f64,
    pub kappa_p: f64,
    pub kappa_q: f64,
    pub g_p: f64,
    pub g_q: f64,
    pub drive_amplitude: f64,
    pub drive_phase: f64,
    /// Bath temperature in kelvin.
    pub temperature: f64,
}

/// Drive detunings `Δ_j = ω_j − ω_0` for the driven mode and both teeth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detunings {
    pub k: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathOccupations {
    pub k: f64,
    pub r: f64,
    pub p: f64,
    pub q: f64,
}

impl BathOccupations {
    pub fn get(&self, mode: Mode) -> f64 {
        match mode {
            Mode::K => self.k,
            Mode::R => self.r,
            Mode::P => self.p,
            Mode::Q => self.q,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("omega_k", self.omega_k),
            ("omega_r", self.omega_r),
            ("omega_0", self.omega_0),
            ("kappa_k", self.kappa_k),
            ("kappa_r", self.kappa_r),
            ("kappa_p", self.kappa_p),
            ("kappa_q", self.kappa_q),
            ("g_p", self.g_p),
            ("g_q", self.g_q),
            ("drive_amplitude", self.drive_amplitude),
            ("temperature", self.temperature),
        ];
        for (name, value) in named {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and nonnegative, got {value}")));
            }
        }
        if !self.drive_phase.is_finite() {
            return Err(Error::Domain("drive_phase must be finite".into()));
        }
        for mode in Mode::ALL {
            if self.kappa(mode) <= 0.0 {
                return Err(Error::Domain(format!("kappa_{mode} must be positive")));
            }
        }
        if self.omega_q() <= 0.0 {
            return Err(Error::Domain("omega_q = omega_k - omega_r must be positive".into()));
        }
        Ok(())
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_k + self.omega_r
    }

    pub fn omega_q(&self) -> f64 {
        self.omega_k - self.omega_r
    }

    pub fn omega(&self, mode: Mode) -> f64 {
        match mode {
            Mode::K => self.omega_k,
            Mode::R => self.omega_r,
            Mode::P => self.omega_p(),
            Mode::Q => self.omega_q(),
        }
    }

    pub fn kappa(&self, mode: Mode) -> f64 {
        match mode {
            Mode::K => self.kappa_k,
            Mode::R => self.kappa_r,
            Mode::P => self.kappa_p,
            Mode::Q => self.kappa_q,
        }
    }

    /// Complex drive `E = ε e^{iφ_l}`.
    pub fn drive(&self) -> Complex64 {
        Complex64::from_polar(self.drive_amplitude, self.drive_phase)
    }

    pub fn detunings(&self) -> Detunings {
        derived_detunings(self)
    }

    pub fn bath_occupations(&self) -> Result<BathOccupations> {
        let n = |mode| thermal_occupation(self.omega(mode), self.temperature);
        Ok(BathOccupations {
            k: n(Mode::K)?,
            r: n(Mode::R)?,
            p: n(Mode::P)?,
            q: n(Mode::Q)?,
        })
    }
}

/// Bose–Einstein occupation `[exp(ħω/k_B T) − 1]^{-1}`; exactly zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!("thermal occupation needs omega > 0, got {omega}")));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (BOLTZMANN * temperature);
    Ok(1.0 / x.exp_m1())
}

pub fn derived_detunings(params: &PhysicalParams) -> Detunings {
    Detunings {
        k: params.omega_k - params.omega_0,
        p: params.omega_p() - params.omega_0,
        q: params.omega_q() - params.omega_0,
    }
}

/// Effective three-magnon couplings `G_j = g_j |⟨a_k⟩|`.
///
/// `mean_k` keeps the phase of the pumped amplitude; it is `None` when the
/// couplings were set directly (figure-style sweeps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    pub g_p: f64,
    pub g_q: f64,
    pub mean_k: Option<Complex64>,
}

impl EffectiveCouplings {
    pub fn direct(g_p: f64, g_q: f64) -> Self {
        EffectiveCouplings { g_p, g_q, mean_k: None }
    }

    /// `κ_r κ_p κ_q − G_q² κ_p + G_p² κ_q`, positive inside the threshold.
    pub fn threshold_margin(&self, params: &PhysicalParams) -> f64 {
        params.kappa_r * params.kappa_p * params.kappa_q - self.g_q * self.g_q * params.kappa_p
            + self.g_p * self.g_p * params.kappa_q
    }
}

pub fn effective_couplings(params: &PhysicalParams, mean_k: Complex64) -> EffectiveCouplings {
    let amplitude = mean_k.norm();
    EffectiveCouplings {
        g_p: params.g_p * amplitude,
        g_q: params.g_q * amplitude,
        mean_k: Some(mean_k),
    }
}
