//! Steady-state quantum correlations of a driven magnon–skyrmion frequency
//! comb: mean-field steady states, linearized fluctuations, Gaussian
//! entanglement and steering measures, Wigner marginals, homodyne readout,
//! a Monte Carlo oracle and figure-style parameter sweeps.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod constants;
pub mod error;
pub mod linear;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod presets;
pub mod readout;
pub mod report;
pub mod scenario;
pub mod semiclassical;
pub mod sweep;
pub mod wigner;

pub use bogoliubov::BogoliubovFrame;
pub use error::{Error, Result};
pub use linear::{CovarianceMatrix, DriftDiffusion, LyapunovSolution, StabilityVerdict};
pub use measures::{CorrelationReport, ReducedCm};
pub use model::{BathOccupations, EffectiveCouplings, Mode, PhysicalParams};
pub use oracle::{EnsembleEstimate, EnsembleSpec};
pub use presets::{figure_preset, PresetJob, PresetOptions};
pub use readout::ReadoutChannel;
pub use scenario::Scenario;
pub use semiclassical::{Regime, SemiclassicalState};
pub use sweep::{PointResult, SweepAxis, SweepParam, SweepResult, SweepSpec};
pub use wigner::{GridSpec, Quadrature, WignerGrid};
