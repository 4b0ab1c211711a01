//! Adiabatic transfer of a magnon mode onto a strongly damped microwave probe.
//!
//! Eliminating the probe gives `c_out = −iη a + c_in`. The factor `−i` turns
//! `(X, Y)` into `(Y, −X)`, so a single-mode block maps to
//! `η² R V Rᵀ + (n̄_c + 1/2) I` with `R = [[0, 1], [−1, 0]]`.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum `κ_c/g` accepted by default.
pub const DEFAULT_MIN_RATIO: f64 = 10.0;
/// Ratios at or above this are considered safely adiabatic.
pub const RECOMMENDED_RATIO: f64 = 10.0;
/// Lowest ratio a channel may be configured to accept.
pub const HARD_MIN_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutChannel {
    /// Magnon–microwave coupling (rad/s).
    pub g: f64,
    /// Microwave amplitude damping (rad/s).
    pub kappa_c: f64,
    /// Thermal occupation of the probe input.
    pub input_occupation: f64,
    /// Smallest `κ_c/g` this channel accepts.
    pub min_ratio: f64,
}

impl ReadoutChannel {
    pub fn new(g: f64, kappa_c: f64) -> Self {
        ReadoutChannel { g, kappa_c, input_occupation: 0.0, min_ratio: DEFAULT_MIN_RATIO }
    }

    pub fn ratio(&self) -> f64 {
        if self.g == 0.0 {
            f64::INFINITY
        } else {
            self.kappa_c / self.g
        }
    }

    /// Transfer gain `η = √2 g/κ_c`.
    ///
    /// The output field is referred to the probe linewidth, which keeps `η`
    /// dimensionless and bounded by `√2/min_ratio`.
    pub fn gain(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.g / self.kappa_c
    }

    /// Checks adiabaticity; returns a warning when the ratio is accepted but
    /// below the recommended value.
    pub fn check(&self) -> Result<Option<String>> {
        if !(self.g >= 0.0) || !(self.kappa_c > 0.0) || !(self.input_occupation >= 0.0) {
            return Err(Error::Domain("readout needs g >= 0, kappa_c > 0 and n_c >= 0".into()));
        }
        if !(self.min_ratio >= HARD_MIN_RATIO) {
            return Err(Error::Domain(format!("min_ratio must be at least {HARD_MIN_RATIO}")));
        }
        let ratio = self.ratio();
        if ratio < self.min_ratio {
            return Err(Error::Adiabaticity { ratio, required: self.min_ratio });
        }
        if ratio < RECOMMENDED_RATIO {
            return Ok(Some(format!("kappa_c/g = {ratio:.3} is below the recommended {RECOMMENDED_RATIO}")));
        }
        Ok(None)
    }
}

fn quarter_turn() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

fn probe_noise(n_c: f64) -> Matrix2<f64> {
    Matrix2::identity() * (n_c + 0.5)
}

/// Single-mode map at a given gain, without any adiabaticity check.
pub fn map_with_gain(v_mode: &Matrix2<f64>, eta: f64, n_c: f64) -> Matrix2<f64> {
    let r = quarter_turn();
    r * v_mode * r.transpose() * (eta * eta) + probe_noise(n_c)
}

pub fn output_covariance(v_mode: &Matrix2<f64>, ch: &ReadoutChannel) -> Result<Matrix2<f64>> {
    ch.check()?;
    Ok(map_with_gain(v_mode, ch.gain(), ch.input_occupation))
}

/// Two-mode map with independent probes, at given gains.
pub fn joint_map_with_gain(v_pq: &Matrix4<f64>, gains: (f64, f64), occupations: (f64, f64)) -> Matrix4<f64> {
    let r = quarter_turn();
    let mut t = Matrix4::zeros();
    t.fixed_view_mut::<2, 2>(0, 0).copy_from(&(r * gains.0));
    t.fixed_view_mut::<2, 2>(2, 2).copy_from(&(r * gains.1));
    let mut noise = Matrix4::zeros();
    noise.fixed_view_mut::<2, 2>(0, 0).copy_from(&probe_noise(occupations.0));
    noise.fixed_view_mut::<2, 2>(2, 2).copy_from(&probe_noise(occupations.1));
    t * v_pq * t.transpose() + noise
}

pub fn joint_output_covariance(v_pq: &Matrix4<f64>, ch_p: &ReadoutChannel, ch_q: &ReadoutChannel) -> Result<Matrix4<f64>> {
    ch_p.check()?;
    ch_q.check()?;
    Ok(joint_map_with_gain(
        v_pq,
        (ch_p.gain(), ch_q.gain()),
        (ch_p.input_occupation, ch_q.input_occupation),
    ))
}

/// Inverse of [`joint_map_with_gain`] for known, nonzero gains.
pub fn reconstruct_with_gain(out: &Matrix4<f64>, gains: (f64, f64), occupations: (f64, f64)) -> Result<Matrix4<f64>> {
    if !(gains.0 > 0.0 && gains.1 > 0.0) {
        return Err(Error::Domain("reconstruction needs nonzero transfer gains".into()));
    }
    let r = quarter_turn();
    let mut noise = Matrix4::zeros();
    noise.fixed_view_mut::<2, 2>(0, 0).copy_from(&probe_noise(occupations.0));
    noise.fixed_view_mut::<2, 2>(2, 2).copy_from(&probe_noise(occupations.1));
    let mut t_inv = Matrix4::zeros();
    t_inv.fixed_view_mut::<2, 2>(0, 0).copy_from(&(r.transpose() / gains.0));
    t_inv.fixed_view_mut::<2, 2>(2, 2).copy_from(&(r.transpose() / gains.1));
    Ok(t_inv * (out - noise) * t_inv.transpose())
}

pub fn reconstruct_covariance(out: &Matrix4<f64>, ch_p: &ReadoutChannel, ch_q: &ReadoutChannel) -> Result<Matrix4<f64>> {
    reconstruct_with_gain(out, (ch_p.gain(), ch_q.gain()), (ch_p.input_occupation, ch_q.input_occupation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::mhz;
    use crate::linear::CovarianceMatrix;
    use crate::measures::fixtures::{random_physical_cm, tmsv};
    use crate::measures::{log_negativity, ReducedCm};
    use crate::model::Mode;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn physical(m: &Matrix4<f64>) -> bool {
        let v = CovarianceMatrix::new(DMatrix::from_iterator(4, 4, m.iter().copied()), vec![Mode::P, Mode::Q]).unwrap();
        v.is_physical()
    }

    #[test]
    fn zero_coupling_gives_probe_vacuum() {
        let ch = ReadoutChannel::new(0.0, mhz(20.0));
        let v = Matrix2::new(3.0, 0.4, 0.4, 2.0);
        assert_eq!(output_covariance(&v, &ch).unwrap(), Matrix2::identity() * 0.5);
        let out = joint_output_covariance(&tmsv(0.5, 1.0).matrix(), &ch, &ch).unwrap();
        assert_eq!(out, Matrix4::identity() * 0.5);
    }

    #[test]
    fn unit_gain_on_vacuum() {
        let out = map_with_gain(&(Matrix2::identity() * 0.5), 1.0, 0.0);
        assert_eq!(out, Matrix2::identity());
    }

    #[test]
    fn quarter_turn_swaps_variances() {
        let v = Matrix2::new(3.0, 0.7, 0.7, 1.5);
        let out = map_with_gain(&v, 1.0, 0.0);
        assert_eq!(out[(0, 0)], 2.0);
        assert_eq!(out[(1, 1)], 3.5);
        assert_eq!(out[(0, 1)], -0.7);
    }

    #[test]
    fn adiabaticity_is_enforced() {
        let ch = ReadoutChannel::new(mhz(1.0), mhz(8.0));
        assert!(matches!(ch.check(), Err(Error::Adiabaticity { .. })));
        let relaxed = ReadoutChannel { min_ratio: 5.0, ..ch };
        assert!(relaxed.check().unwrap().is_some());
        assert!(ReadoutChannel::new(mhz(1.0), mhz(12.0)).check().unwrap().is_none());
        let loose = ReadoutChannel { min_ratio: 2.0, ..ch };
        assert!(loose.check().is_err());
    }

    #[test]
    fn unit_gain_with_vacuum_probes_breaks_two_mode_squeezing() {
        // The added half unit per mode lifts the smallest partially transposed
        // eigenvalue to (e^{-2r} + 1)/2, which never drops below 1/2.
        for r in [0.1, 0.8, 1.2, 3.0] {
            let out = joint_map_with_gain(&tmsv(r, 1.0).matrix(), (1.0, 1.0), (0.0, 0.0));
            let n = log_negativity(&ReducedCm::from_matrix(&out, (Mode::P, Mode::Q))).unwrap();
            assert_eq!(n.log_negativity, 0.0);
            assert!((n.nu - 0.5 * ((-2.0 * r).exp() + 1.0)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn valid_channels_are_physical_and_invertible(
            seed in any::<u64>(),
            gp in 0.01f64..1.0,
            gq in 0.01f64..1.0,
            ratio_p in 10.0f64..100.0,
            ratio_q in 10.0f64..100.0,
            np in 0.0f64..0.5,
            nq in 0.0f64..0.5,
        ) {
            let v = random_physical_cm(&mut ChaCha8Rng::seed_from_u64(seed)).matrix();
            let ch_p = ReadoutChannel { input_occupation: np, ..ReadoutChannel::new(mhz(gp), mhz(gp * ratio_p)) };
            let ch_q = ReadoutChannel { input_occupation: nq, ..ReadoutChannel::new(mhz(gq), mhz(gq * ratio_q)) };
            let out = joint_output_covariance(&v, &ch_p, &ch_q).unwrap();
            prop_assert!(physical(&out));
            let back = reconstruct_covariance(&out, &ch_p, &ch_q).unwrap();
            prop_assert!((back - v).norm() < 1e-10 * v.norm().max(1.0));
            let e0 = log_negativity(&ReducedCm::from_matrix(&v, (Mode::P, Mode::Q))).unwrap().log_negativity;
            let e1 = log_negativity(&ReducedCm::from_matrix(&back, (Mode::P, Mode::Q))).unwrap().log_negativity;
            prop_assert!((e0 - e1).abs() < 1e-10);
        }
    }
}
