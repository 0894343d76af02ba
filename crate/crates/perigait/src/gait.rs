use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{wrap_angle, TAU};

/// Wave parameters shared by the vertical (pitch) and peristaltic (length)
/// waves. Angles are stored in radians; CLI and config layers convert from
/// degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaitParams {
    /// Vertical wave amplitude in radians.
    pub a_vert: f64,
    /// Spatial frequency: number of wave periods along the body.
    pub k: f64,
    /// Temporal frequency in rad/s. The cycle period is `2π/omega`.
    pub omega: f64,
    /// Compression amplitude in meters.
    pub delta_l: f64,
    /// Joint length at the relaxed state, in meters.
    pub l_ext: f64,
    /// Phase offset of the peristaltic wave relative to the vertical wave,
    /// in radians.
    pub phi: f64,
    /// Number of joints.
    pub n: usize,
}

impl Default for GaitParams {
    fn default() -> Self {
        GaitParams {
            a_vert: 35.0_f64.to_radians(),
            k: 1.0,
            omega: 1.0,
            delta_l: 0.01,
            l_ext: 0.01,
            phi: 3.0 * std::f64::consts::FRAC_PI_2,
            n: 4,
        }
    }
}

impl GaitParams {
    /// Check the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.a_vert) {
            return Err(Error::InvalidParameter(format!(
                "a_vert = {} rad outside [0, pi/2]",
                self.a_vert
            )));
        }
        if !(self.delta_l >= 0.0 && self.delta_l <= self.l_ext) {
            return Err(Error::InvalidParameter(format!(
                "delta_l = {} m outside [0, l_ext = {} m]",
                self.delta_l, self.l_ext
            )));
        }
        if self.n < 1 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(self.k > 0.0) {
            return Err(Error::InvalidParameter(format!("k = {} must be > 0", self.k)));
        }
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega = {} must be > 0",
                self.omega
            )));
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidParameter("phi must be finite".into()));
        }
        Ok(())
    }

    /// Copy with `phi` wrapped into `[0, 2π)`.
    pub fn normalized(mut self) -> Self {
        self.phi = wrap_angle(self.phi);
        self
    }

    /// Cycle period in seconds.
    pub fn cycle_period(&self) -> f64 {
        TAU / self.omega
    }

    /// Copy with both wave amplitudes scaled by `s` (used for ramp-in).
    pub fn scaled(mut self, s: f64) -> Self {
        self.a_vert *= s;
        self.delta_l *= s;
        self
    }

    fn spatial_phase(&self, i: usize) -> f64 {
        TAU * self.k * i as f64 / self.n as f64
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::JointIndex {
                index: i,
                joints: self.n,
            });
        }
        Ok(())
    }
}

/// Target pitch angle and peristaltic length for one joint at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointCommand {
    pub joint_index: usize,
    /// Target pitch angle in radians.
    pub alpha: f64,
    /// Target joint length in meters.
    pub l: f64,
}

/// Pitch target for joint `i` at time `t`:
/// `a_vert * sin(2π k i / n - omega t)`.
pub fn vertical_wave_angle(p: &GaitParams, t: f64, i: usize) -> Result<f64> {
    p.check_index(i)?;
    Ok(p.a_vert * (p.spatial_phase(i) - p.omega * t).sin())
}

/// Length target for joint `i` at time `t`:
/// `l_ext - delta_l * sin(2π k i / n - omega t - phi)`.
pub fn peristaltic_length(p: &GaitParams, t: f64, i: usize) -> Result<f64> {
    p.check_index(i)?;
    Ok(p.l_ext - p.delta_l * (p.spatial_phase(i) - p.omega * t - p.phi).sin())
}

/// Evaluate both waves for every joint at time `t`.
pub fn gait_frame(p: &GaitParams, t: f64) -> Vec<JointCommand> {
    (0..p.n)
        .map(|i| {
            let arg = p.spatial_phase(i) - p.omega * t;
            JointCommand {
                joint_index: i,
                alpha: p.a_vert * arg.sin(),
                l: p.l_ext - p.delta_l * (arg - p.phi).sin(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn params(a_vert_deg: f64, k: f64, n: usize, delta_l: f64, l_ext: f64, phi: f64) -> GaitParams {
        GaitParams {
            a_vert: a_vert_deg.to_radians(),
            k,
            omega: 1.0,
            delta_l,
            l_ext,
            phi,
            n,
        }
    }

    #[test]
    fn vertical_wave_zero_crossings() {
        let p = params(35.0, 1.0, 4, 0.0, 0.01, 0.0);
        assert_abs_diff_eq!(vertical_wave_angle(&p, 0.0, 0).unwrap(), 0.0);
        // i = 2 puts the spatial phase at exactly pi.
        assert_abs_diff_eq!(vertical_wave_angle(&p, 0.0, 2).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn vertical_wave_quarter_cycle() {
        let p = params(35.0, 1.0, 4, 0.0, 0.01, 0.0);
        // omega t = pi/2 at joint 0 gives sin(-pi/2) = -1.
        let t = std::f64::consts::FRAC_PI_2 / p.omega;
        assert_relative_eq!(
            vertical_wave_angle(&p, t, 0).unwrap(),
            -35.0_f64.to_radians(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn vertical_wave_index_error() {
        let p = params(35.0, 1.0, 4, 0.0, 0.01, 0.0);
        assert!(matches!(
            vertical_wave_angle(&p, 0.0, 4),
            Err(Error::JointIndex { index: 4, joints: 4 })
        ));
    }

    #[test]
    fn peristaltic_zero_amplitude_returns_l_ext() {
        let p = params(35.0, 1.0, 4, 0.0, 0.01, 0.0);
        for i in 0..4 {
            for &t in &[0.0, 0.37, 12.9] {
                assert_eq!(peristaltic_length(&p, t, i).unwrap(), 0.01);
            }
        }
    }

    #[test]
    fn peristaltic_full_compression_at_three_half_pi() {
        // sin(-3pi/2) = 1 forces l_ext - delta_l.
        let p = params(35.0, 1.0, 4, 0.01, 0.01, 3.0 * std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(peristaltic_length(&p, 0.0, 0).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn peristaltic_neutral_at_pi() {
        // sin(-pi) = 0 leaves l = l_ext.
        let p = params(35.0, 1.0, 4, 0.01, 0.01, std::f64::consts::PI);
        assert_abs_diff_eq!(peristaltic_length(&p, 0.0, 0).unwrap(), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn frame_zero_amplitude_all_l_ext() {
        let p = params(35.0, 1.0, 4, 0.0, 0.01, 0.0);
        let frame = gait_frame(&p, 0.0);
        assert_eq!(frame.len(), 4);
        for cmd in &frame {
            assert_eq!(cmd.l, 0.01);
        }
    }

    #[test]
    fn frame_matches_scalar_ops() {
        let p = params(35.0, 1.0, 4, 0.01, 0.01, 3.0 * std::f64::consts::FRAC_PI_2);
        for &t in &[0.0, 0.71, 3.3] {
            let frame = gait_frame(&p, t);
            for (i, cmd) in frame.iter().enumerate() {
                assert_eq!(cmd.joint_index, i);
                assert_eq!(cmd.alpha, vertical_wave_angle(&p, t, i).unwrap());
                assert_eq!(cmd.l, peristaltic_length(&p, t, i).unwrap());
            }
        }
    }

    #[test]
    fn frame_periodicity() {
        let p = params(35.0, 1.0, 4, 0.01, 0.01, 1.1);
        let period = p.cycle_period();
        let a = gait_frame(&p, 0.25);
        let b = gait_frame(&p, 0.25 + period);
        for (ca, cb) in a.iter().zip(&b) {
            assert_abs_diff_eq!(ca.alpha, cb.alpha, epsilon = 1e-12);
            assert_abs_diff_eq!(ca.l, cb.l, epsilon = 1e-12);
        }
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut p = GaitParams::default();
        p.a_vert = 2.0;
        assert!(p.validate().is_err());
        let mut p = GaitParams::default();
        p.delta_l = 0.02;
        assert!(p.validate().is_err());
        let mut p = GaitParams::default();
        p.n = 0;
        assert!(p.validate().is_err());
        assert!(GaitParams::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn waves_stay_in_bounds(
            a_deg in 0.0..90.0f64,
            k in 0.1..3.0f64,
            omega in 0.05..5.0f64,
            delta_frac in 0.0..1.0f64,
            l_ext in 1e-4..0.05f64,
            phi in -10.0..10.0f64,
            n in 1usize..12,
            t in 0.0..100.0f64,
        ) {
            let p = GaitParams {
                a_vert: a_deg.to_radians(),
                k,
                omega,
                delta_l: delta_frac * l_ext,
                l_ext,
                phi,
                n,
            };
            for i in 0..n {
                let alpha = vertical_wave_angle(&p, t, i).unwrap();
                let l = peristaltic_length(&p, t, i).unwrap();
                prop_assert!(alpha.abs() <= p.a_vert + 1e-12);
                prop_assert!(l >= p.l_ext - p.delta_l - 1e-12);
                prop_assert!(l <= p.l_ext + p.delta_l + 1e-12);
            }
        }

        #[test]
        fn phase_shift_equivalence(
            phi in 0.0..(2.0 * std::f64::consts::PI),
            omega in 0.1..4.0f64,
            t in 0.0..50.0f64,
            i in 0usize..4,
        ) {
            // A peristaltic wave with phase phi at time t equals the
            // zero-phase wave at time t + phi/omega.
            let p = GaitParams { phi, omega, ..GaitParams::default() };
            let p0 = GaitParams { phi: 0.0, omega, ..GaitParams::default() };
            let a = peristaltic_length(&p, t, i).unwrap();
            let b = peristaltic_length(&p0, t + phi / omega, i).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn antiphase_across_half_body(
            a_deg in 1.0..90.0f64,
            half in 1usize..6,
            t in 0.0..50.0f64,
        ) {
            // With k = 1 and even N, joints i and i + N/2 are antiphase.
            let n = 2 * half;
            let p = params(a_deg, 1.0, n, 0.0, 0.01, 0.0);
            for i in 0..half {
                let a = vertical_wave_angle(&p, t, i).unwrap();
                let b = vertical_wave_angle(&p, t, i + half).unwrap();
                prop_assert!((a + b).abs() < 1e-12 * (1.0 + a.abs()));
            }
        }
    }
}
