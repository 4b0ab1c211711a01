//! Physical constants (CODATA 2018 exact/recommended values) and unit helpers.
//!
//! Everything inside the crate works in angular frequency (rad/s). Scenario
//! files and CLI output quote ordinary frequencies `ν = ω/2π` in MHz or GHz.

use std::f64::consts::TAU;

/// Reduced Planck constant ħ in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant k_B in J/K (exact since the 2019 SI redefinition).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reference effective coupling G_0/2π = 15 MHz used by the figure presets.
pub const G0_MHZ: f64 = 15.0;

/// Default dissipation of the driven whispering-gallery mode, κ_k/2π in MHz.
/// Only the threshold and the normalization of ⟨a_k⟩ depend on it.
pub const DEFAULT_KAPPA_K_MHZ: f64 = 10.0;

/// Bath assignment for the skyrmion quadratures: the diffusion entries of the
/// skyrmion mode use n̄_r evaluated at ω_r.
pub const SKYRMION_BATH_AT_OMEGA_R: bool = true;

pub fn mhz(nu: f64) -> f64 {
    TAU * nu * 1e6
}

pub fn ghz(nu: f64) -> f64 {
    TAU * nu * 1e9
}

pub fn khz(nu: f64) -> f64 {
    TAU * nu * 1e3
}

pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU / 1e6
}

pub fn to_ghz(omega: f64) -> f64 {
    omega / TAU / 1e9
}
