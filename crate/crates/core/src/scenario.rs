//! TOML scenario files. Frequencies are quoted as `ν = ω/2π`: GHz for mode
//! and drive frequencies, MHz for rates and couplings; temperature in kelvin.
//!
//! ```toml
//! [modes]
//! nu_k_ghz = 80.0
//! nu_r_ghz = 8.0
//!
//! [dissipation]
//! kappa_k_mhz = 10.0
//! kappa_r_mhz = 1.0
//! kappa_p_mhz = 10.0
//! kappa_q_mhz = 10.0
//!
//! [coupling]
//! g_p_mhz = 0.0            # bare three-magnon couplings
//! g_q_mhz = 0.0
//! G_p_mhz = 15.0           # optional: effective couplings set directly
//! G_q_mhz = 7.5
//!
//! [drive]
//! nu_0_ghz = 80.0
//! amplitude_mhz = 0.0
//! phase_rad = 0.0
//!
//! [bath]
//! temperature_k = 0.02
//!
//! [readout]                # optional, used by `point --readout`
//! g_mhz = 1.0
//! kappa_c_mhz = 20.0
//! n_c = 0.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::{ghz, mhz, to_ghz, to_mhz, DEFAULT_KAPPA_K_MHZ};
use crate::error::{Error, Result};
use crate::model::{EffectiveCouplings, PhysicalParams};
use crate::readout::ReadoutChannel;

pub const PAPER_DEFAULTS_TOML: &str = include_str!("../scenarios/paper-defaults.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    pub nu_k_ghz: f64,
    pub nu_r_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSection {
    #[serde(default = "default_kappa_k")]
    pub kappa_k_mhz: f64,
    pub kappa_r_mhz: f64,
    pub kappa_p_mhz: f64,
    pub kappa_q_mhz: f64,
}

fn default_kappa_k() -> f64 {
    DEFAULT_KAPPA_K_MHZ
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(default)]
    pub g_p_mhz: f64,
    #[serde(default)]
    pub g_q_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub G_p_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub G_q_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Defaults to the driven mode frequency (resonant drive).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_0_ghz: Option<f64>,
    #[serde(default)]
    pub amplitude_mhz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub temperature_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    pub g_mhz: f64,
    pub kappa_c_mhz: f64,
    #[serde(default)]
    pub n_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_ratio: Option<f64>,
}

impl ReadoutSection {
    pub fn channel(&self) -> ReadoutChannel {
        let mut ch = ReadoutChannel::new(mhz(self.g_mhz), mhz(self.kappa_c_mhz));
        ch.input_occupation = self.n_c;
        if let Some(r) = self.min_ratio {
            ch.min_ratio = r;
        }
        ch
    }
}

impl Default for ReadoutSection {
    fn default() -> Self {
        ReadoutSection { g_mhz: 1.0, kappa_c_mhz: 20.0, n_c: 0.0, min_ratio: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub modes: ModesSection,
    pub dissipation: DissipationSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    pub drive: DriveSection,
    pub bath: BathSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutSection>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn paper_defaults() -> Self {
        Self::from_toml_str(PAPER_DEFAULTS_TOML).expect("bundled scenario is valid")
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.coupling;
        if c.G_p_mhz.is_some() != c.G_q_mhz.is_some() {
            return Err(Error::InvalidSpec("G_p_mhz and G_q_mhz must be given together".into()));
        }
        for (name, value) in [("G_p_mhz", c.G_p_mhz), ("G_q_mhz", c.G_q_mhz)] {
            if let Some(v) = value {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidSpec(format!("{name} must be finite and nonnegative")));
                }
            }
        }
        self.params().validate().map_err(|e| Error::InvalidSpec(e.to_string()))?;
        if let Some(r) = &self.readout {
            r.channel().check().map_err(|e| Error::InvalidSpec(e.to_string()))?;
        }
        Ok(())
    }

    pub fn params(&self) -> PhysicalParams {
        let omega_k = ghz(self.modes.nu_k_ghz);
        PhysicalParams {
            omega_k,
            omega_r: ghz(self.modes.nu_r_ghz),
            omega_0: self.drive.nu_0_ghz.map_or(omega_k, ghz),
            kappa_k: mhz(self.dissipation.kappa_k_mhz),
            kappa_r: mhz(self.dissipation.kappa_r_mhz),
            kappa_p: mhz(self.dissipation.kappa_p_mhz),
            kappa_q: mhz(self.dissipation.kappa_q_mhz),
            g_p: mhz(self.coupling.g_p_mhz),
            g_q: mhz(self.coupling.g_q_mhz),
            drive_amplitude: mhz(self.drive.amplitude_mhz),
            drive_phase: self.drive.phase_rad,
            temperature: self.bath.temperature_k,
        }
    }

    pub fn direct_couplings(&self) -> Option<EffectiveCouplings> {
        match (self.coupling.G_p_mhz, self.coupling.G_q_mhz) {
            (Some(gp), Some(gq)) => Some(EffectiveCouplings::direct(mhz(gp), mhz(gq))),
            _ => None,
        }
    }

    pub fn set_direct_couplings(&mut self, g_p: f64, g_q: f64) {
        self.coupling.G_p_mhz = Some(to_mhz(g_p));
        self.coupling.G_q_mhz = Some(to_mhz(g_q));
    }

    pub fn from_params(params: &PhysicalParams, direct: Option<&EffectiveCouplings>) -> Self {
        Scenario {
            modes: ModesSection { nu_k_ghz: to_ghz(params.omega_k), nu_r_ghz: to_ghz(params.omega_r) },
            dissipation: DissipationSection {
                kappa_k_mhz: to_mhz(params.kappa_k),
                kappa_r_mhz: to_mhz(params.kappa_r),
                kappa_p_mhz: to_mhz(params.kappa_p),
                kappa_q_mhz: to_mhz(params.kappa_q),
            },
            coupling: CouplingSection {
                g_p_mhz: to_mhz(params.g_p),
                g_q_mhz: to_mhz(params.g_q),
                G_p_mhz: direct.map(|e| to_mhz(e.g_p)),
                G_q_mhz: direct.map(|e| to_mhz(e.g_q)),
            },
            drive: DriveSection {
                nu_0_ghz: Some(to_ghz(params.omega_0)),
                amplitude_mhz: to_mhz(params.drive_amplitude),
                phase_rad: params.drive_phase,
            },
            bath: BathSection { temperature_k: params.temperature },
            readout: None,
        }
    }
}
