//! Figure presets: sweeps over the reference scenario with the caption
//! parameters, plus the Wigner job for the two-tooth marginals.

use serde::Serialize;

use crate::constants::G0_MHZ;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sweep::{OutputGroup, SweepAxis, SweepParam, SweepSpec};
use crate::wigner::GridSpec;

pub const PRESET_NAMES: [&str; 12] = [
    "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6a", "fig6b", "fig7",
];

/// Suggested skyrmion-damping range for `fig4`, in MHz.
pub const FIG4_SUGGESTED_KAPPA_R_MHZ: (f64, f64) = (1.0, 60.0);
/// Skyrmion-damping range of the `fig3` sweeps, in MHz.
pub const FIG3_KAPPA_R_MHZ: (f64, f64) = (1.0, 60.0);

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PresetOptions {
    /// Required by `fig4`.
    pub kappa_r_range_mhz: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerJob {
    pub name: String,
    pub scenario: Scenario,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PresetJob {
    Sweep(SweepSpec),
    Wigner(WignerJob),
}

/// Reference scenario with `G_p = mult·G_0` and `G_q = ratio·G_p`.
fn anchored(gp_mult: f64, ratio: f64, kappa_r_mhz: f64) -> Scenario {
    let mut s = Scenario::paper_defaults();
    s.coupling.G_p_mhz = Some(gp_mult * G0_MHZ);
    s.coupling.G_q_mhz = Some(ratio * gp_mult * G0_MHZ);
    s.dissipation.kappa_r_mhz = kappa_r_mhz;
    s
}

/// Presets always emit every output group so all figure CSVs share one schema.
fn sweep(name: &str, base: Scenario, axes: Vec<SweepAxis>) -> PresetJob {
    PresetJob::Sweep(SweepSpec { name: Some(name.to_string()), base, axes, outputs: OutputGroup::ALL.to_vec() })
}

pub fn figure_preset(name: &str, opts: &PresetOptions) -> Result<PresetJob> {
    let ratio_axis = SweepAxis::new(SweepParam::RatioGqGp, 0.0, 1.0, 101);
    let fig3_axis = SweepAxis::new(SweepParam::KappaRMhz, FIG3_KAPPA_R_MHZ.0, FIG3_KAPPA_R_MHZ.1, 60);
    let fig5_axis = SweepAxis::new(SweepParam::KappaRatioQp, 0.8, 3.0, 221);
    let fig2 = |mult: f64| sweep(name, anchored(mult, 0.0, 1.0), vec![ratio_axis]);
    let job = match name {
        "fig2a" => fig2(0.2),
        "fig2b" => fig2(1.0),
        "fig2c" => fig2(2.0),
        "fig2d" => fig2(10.0),
        "fig3a" => sweep(name, anchored(1.0, 0.5, 1.0), vec![fig3_axis]),
        "fig3b" => sweep(name, anchored(10.0, 0.85, 1.0), vec![fig3_axis]),
        "fig4" => {
            let (lo, hi) = opts.kappa_r_range_mhz.ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "fig4 needs a kappa_r range (suggested {}:{} MHz)",
                    FIG4_SUGGESTED_KAPPA_R_MHZ.0, FIG4_SUGGESTED_KAPPA_R_MHZ.1
                ))
            })?;
            let kr_axis = SweepAxis::new(SweepParam::KappaRMhz, lo, hi, 60);
            sweep(name, anchored(10.0, 0.0, 40.0), vec![ratio_axis, kr_axis])
        }
        "fig5a" => sweep(name, anchored(10.0, 0.85, 40.0), vec![fig5_axis]),
        "fig5b" => sweep(name, anchored(10.0, 0.85, 40.0), vec![fig5_axis]),
        "fig6a" => sweep(
            name,
            anchored(10.0, 0.85, 40.0),
            vec![SweepAxis::new(SweepParam::TemperatureK, 0.02, 3.0, 299)],
        ),
        "fig6b" => sweep(
            name,
            anchored(40.0, 0.95, 60.0),
            vec![SweepAxis::new(SweepParam::TemperatureK, 0.02, 6.0, 599)],
        ),
        "fig7" => PresetJob::Wigner(WignerJob {
            name: name.to_string(),
            scenario: anchored(10.0, 0.85, 40.0),
            grid: GridSpec::default(),
        }),
        other => {
            return Err(Error::InvalidSpec(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    if let PresetJob::Sweep(spec) = &job {
        spec.validate()?;
    }
    Ok(job)
}

fn multiple(x: f64, unit: &str) -> String {
    if x == 1.0 {
        unit.to_string()
    } else {
        format!("{x}{unit}")
    }
}

fn axis_label(p: SweepParam) -> &'static str {
    match p {
        SweepParam::RatioGqGp => "G_q/G_p",
        SweepParam::KappaRatioQp => "κ_q/κ_p",
        SweepParam::KappaRMhz => "κ_r",
        SweepParam::KappaQMhz => "κ_q",
        SweepParam::GpMhz => "G_p",
        SweepParam::TemperatureK => "T",
    }
}

/// Renders a scenario's fixed coupling and damping parameters in caption
/// notation, e.g. `G_p=10G_0, G_q=0.85G_p, κ_r/2π=40 MHz`.
pub fn render_caption(base: &Scenario, swept: &[SweepParam]) -> String {
    let mut parts = Vec::new();
    let gp = base.coupling.G_p_mhz.unwrap_or(0.0);
    if !swept.contains(&SweepParam::GpMhz) {
        parts.push(format!("G_p={}", multiple(round6(gp / G0_MHZ), "G_0")));
    }
    if !swept.contains(&SweepParam::RatioGqGp) && gp > 0.0 {
        let ratio = round6(base.coupling.G_q_mhz.unwrap_or(0.0) / gp);
        parts.push(format!("G_q={}", multiple(ratio, "G_p")));
    }
    if swept.contains(&SweepParam::KappaRatioQp) {
        parts.push(format!("κ_p/2π={} MHz", base.dissipation.kappa_p_mhz));
    }
    if !swept.contains(&SweepParam::KappaRMhz) {
        parts.push(format!("κ_r/2π={} MHz", base.dissipation.kappa_r_mhz));
    }
    let mut text = parts.join(", ");
    if !swept.is_empty() {
        let labels: Vec<&str> = swept.iter().map(|&p| axis_label(p)).collect();
        text.push_str(&format!("; versus {}", labels.join(" and ")));
    }
    text.push_str(&format!("; G_0/2π={G0_MHZ} MHz"));
    text
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub fn preset_caption(job: &PresetJob) -> String {
    match job {
        PresetJob::Sweep(spec) => {
            let swept: Vec<SweepParam> = spec.axes.iter().map(|a| a.param).collect();
            render_caption(&spec.base, &swept)
        }
        PresetJob::Wigner(w) => render_caption(&w.scenario, &[]),
    }
}
