//! Shared inputs for the benchmarks.

use combtangle::constants::{mhz, G0_MHZ};
use combtangle::linear::build_reduced_drift;
use combtangle::{DriftDiffusion, EffectiveCouplings, Scenario};

/// The two-tooth operating point: `G_p = 10 G_0`, `G_q = 0.85 G_p`, `κ_r = 40 MHz`.
pub fn operating_scenario() -> Scenario {
    let mut s = Scenario::paper_defaults();
    s.coupling.G_p_mhz = Some(10.0 * G0_MHZ);
    s.coupling.G_q_mhz = Some(8.5 * G0_MHZ);
    s.dissipation.kappa_r_mhz = 40.0;
    s
}

pub fn operating_drift() -> DriftDiffusion {
    let s = operating_scenario();
    let gp = mhz(10.0 * G0_MHZ);
    build_reduced_drift(&EffectiveCouplings::direct(gp, 0.85 * gp), &s.params()).expect("stable operating point")
}
