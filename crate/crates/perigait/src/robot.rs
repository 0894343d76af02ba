use serde::{Deserialize, Serialize};

use crate::cable::JointGeometry;
use crate::error::{Error, Result};
use crate::math::Vec2;
use crate::terrain::Terrain;

/// Number of base coordinates (head x, head z, head pitch) ahead of the
/// per-joint pairs in the generalized coordinate vector.
pub const BASE_DOF: usize = 3;

/// Index of joint `j`'s pitch angle in the coordinate vector.
pub fn idx_pitch(j: usize) -> usize {
    BASE_DOF + 2 * j
}

/// Index of joint `j`'s gap length in the coordinate vector.
pub fn idx_gap(j: usize) -> usize {
    BASE_DOF + 2 * j + 1
}

/// Construction of the hinges between adjacent modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    /// Slotted hinge whose pin slides along the joint axis, so the gap
    /// length is a cable-driven degree of freedom.
    TwoDof,
    /// Plain hinge with a fixed-length connection in place of the slot;
    /// the joint can only pitch.
    PitchOnly,
}

/// Physical description of the segmented robot: a chain of identical rigid
/// modules, each carrying a rigid leg pair, coupled by joints that both
/// pitch and extend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotSpec {
    pub n_modules: usize,
    /// Length of one module shell along its axis in meters.
    pub module_length: f64,
    /// Height of the module shell in the sagittal plane in meters.
    pub module_diameter: f64,
    /// Nose-to-tail length at nominal gap extension in meters, used as the
    /// body-length unit for speed normalization.
    pub total_length: f64,
    /// Gap between adjacent modules at nominal extension in meters.
    pub nominal_gap: f64,
    /// Mass of one module including its legs in kilograms.
    pub module_mass: f64,
    pub leg_upper_length: f64,
    pub leg_lower_length: f64,
    /// Backward rake of the leg strut from vertical in radians.
    pub leg_tilt: f64,
    /// Leg mount point along the module axis, relative to the module
    /// center, in meters. Negative places the legs toward the rear edge.
    pub leg_mount_x: f64,
    /// Coulomb coefficient at the leg tips.
    pub leg_tip_friction: f64,
    /// Coulomb coefficient of the module shell.
    pub body_friction: f64,
    /// Mechanical pitch stop, symmetric about zero, in radians.
    pub pitch_limit: f64,
    pub pitch_kp: f64,
    pub pitch_kd: f64,
    pub pitch_torque_max: f64,
    pub gap_kp: f64,
    pub gap_kd: f64,
    /// Largest closing force the joint cable can exert, in newtons. The
    /// cable pulls only; it never pushes the joint open.
    pub gap_force_max: f64,
    /// Stiffness of the leaf spring that pushes each gap open, in newtons
    /// per meter.
    pub leaf_spring_stiffness: f64,
    /// Gap opening at which the leaf spring would be relaxed, in meters.
    /// Set beyond the slot travel so the spring stays preloaded over the
    /// whole stroke and the cables stay taut against it.
    pub leaf_spring_rest: f64,
    /// Passive viscous damping of the sliding joint, in newton-seconds
    /// per meter.
    pub gap_joint_damping: f64,
    /// Hinge construction used for every joint in the chain.
    pub joint_kind: JointKind,
    pub joint_geometry: JointGeometry,
}

impl Default for RobotSpec {
    fn default() -> Self {
        RobotSpec {
            n_modules: 5,
            module_length: 0.142,
            module_diameter: 0.065,
            total_length: 0.75,
            nominal_gap: 0.01,
            module_mass: 0.2,
            leg_upper_length: 0.029,
            leg_lower_length: 0.015,
            leg_tilt: 15f64.to_radians(),
            leg_mount_x: 0.05,
            leg_tip_friction: 1.2,
            body_friction: 0.3,
            pitch_limit: std::f64::consts::FRAC_PI_2,
            pitch_kp: 20.0,
            pitch_kd: 0.8,
            pitch_torque_max: 1.5,
            gap_kp: 20000.0,
            gap_kd: 200.0,
            gap_force_max: 60.0,
            leaf_spring_stiffness: 1500.0,
            leaf_spring_rest: 0.025,
            gap_joint_damping: 5.0,
            joint_kind: JointKind::TwoDof,
            joint_geometry: JointGeometry::default(),
        }
    }
}

impl RobotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_modules < 2 {
            return Err(Error::Configuration(format!(
                "n_modules = {} but the chain needs at least 2 modules",
                self.n_modules
            )));
        }
        let positive = [
            ("module_length", self.module_length),
            ("module_diameter", self.module_diameter),
            ("total_length", self.total_length),
            ("module_mass", self.module_mass),
            ("leg_upper_length", self.leg_upper_length),
            ("leg_lower_length", self.leg_lower_length),
            ("pitch_torque_max", self.pitch_torque_max),
            ("gap_force_max", self.gap_force_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Configuration(format!("{name} = {v} must be positive")));
            }
        }
        let non_negative = [
            ("nominal_gap", self.nominal_gap),
            ("leg_tip_friction", self.leg_tip_friction),
            ("body_friction", self.body_friction),
            ("pitch_kp", self.pitch_kp),
            ("pitch_kd", self.pitch_kd),
            ("gap_kp", self.gap_kp),
            ("gap_kd", self.gap_kd),
            ("gap_joint_damping", self.gap_joint_damping),
            ("leaf_spring_stiffness", self.leaf_spring_stiffness),
            ("leaf_spring_rest", self.leaf_spring_rest),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Configuration(format!(
                    "{name} = {v} must be non-negative"
                )));
            }
        }
        if !(self.pitch_limit > 0.0 && self.pitch_limit <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Configuration(format!(
                "pitch_limit = {} rad must lie in (0, pi/2]",
                self.pitch_limit
            )));
        }
        if self.leg_tilt.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Configuration(format!(
                "leg_tilt = {} rad must be shallower than pi/2",
                self.leg_tilt
            )));
        }
        if self.leg_mount_x.abs() > self.module_length / 2.0 {
            return Err(Error::Configuration(format!(
                "leg_mount_x = {} m falls outside the module shell",
                self.leg_mount_x
            )));
        }
        let chain = self.n_modules as f64 * self.module_length
            + (self.n_modules - 1) as f64 * self.nominal_gap;
        if (chain - self.total_length).abs() > 0.1 * self.total_length {
            return Err(Error::Configuration(format!(
                "modules plus gaps span {chain:.4} m, more than 10% away from total_length {} m",
                self.total_length
            )));
        }
        self.joint_geometry.validate()?;
        Ok(())
    }

    pub fn n_joints(&self) -> usize {
        self.n_modules - 1
    }

    /// Dimension of the generalized coordinate vector.
    pub fn n_q(&self) -> usize {
        BASE_DOF + 2 * self.n_joints()
    }

    pub fn leg_reach(&self) -> f64 {
        self.leg_upper_length + self.leg_lower_length
    }

    /// Leg tip position in the module frame: below the shell, raked
    /// backward by `leg_tilt`.
    pub fn leg_tip_offset(&self) -> Vec2 {
        let reach = self.leg_reach();
        Vec2::new(
            self.leg_mount_x - reach * self.leg_tilt.sin(),
            -(self.module_diameter / 2.0 + reach * self.leg_tilt.cos()),
        )
    }

    /// Length of the slot along the joint axis, in meters. The pin parks
    /// against the far end when the cables go slack, so this is also the
    /// largest opening the joint can reach.
    pub fn gap_travel(&self) -> f64 {
        2.0 * self.nominal_gap
    }

    /// Ground-to-shell-top height when standing on straight legs.
    pub fn standing_height(&self) -> f64 {
        self.module_diameter + self.leg_reach() * self.leg_tilt.cos()
    }

    pub fn body_inertia(&self) -> f64 {
        self.module_mass * (self.module_length.powi(2) + self.module_diameter.powi(2)) / 12.0
    }

    pub fn total_mass(&self) -> f64 {
        self.module_mass * self.n_modules as f64
    }

    /// Place the robot on the terrain facing `+x`, straight chain, all
    /// pitches zero, every gap at `gap_init`, with the lowest probe point
    /// just touching the ground. `nose_x` is the head's front face.
    pub fn assemble(&self, nose_x: f64, gap_init: f64, terrain: &Terrain) -> Result<MultibodyState> {
        self.validate()?;
        if !(gap_init >= 0.0 && gap_init.is_finite()) {
            return Err(Error::Configuration(format!(
                "gap_init = {gap_init} must be a non-negative length"
            )));
        }
        let m = self.n_joints();
        let mut q = vec![0.0; self.n_q()];
        q[0] = nose_x - self.module_length / 2.0;
        for j in 0..m {
            q[idx_gap(j)] = gap_init;
        }

        let mut clearance: f64 = f64::NEG_INFINITY;
        let pitch = self.module_length + gap_init;
        let tip_off = self.leg_tip_offset();
        for b in 0..self.n_modules {
            let com_x = q[0] - b as f64 * pitch;
            let tip_ground = terrain.elevation(com_x + tip_off.x)?;
            clearance = clearance.max(tip_ground - tip_off.z);
            for corner_x in [com_x - self.module_length / 2.0, com_x + self.module_length / 2.0] {
                let ground = terrain.elevation(corner_x)?;
                clearance = clearance.max(ground + self.module_diameter / 2.0);
            }
        }
        q[1] = clearance;
        Ok(MultibodyState {
            v: vec![0.0; q.len()],
            q,
        })
    }

    /// Chain poses for a coordinate vector: the head pose is read directly,
    /// each following module hangs off the previous one across its joint
    /// gap.
    pub fn forward_kinematics(&self, q: &[f64]) -> Vec<BodyPose> {
        let half = self.module_length / 2.0;
        let mut poses = Vec::with_capacity(self.n_modules);
        let mut com = Vec2::new(q[0], q[1]);
        let mut theta = q[2];
        poses.push(BodyPose { com, theta });
        for j in 0..self.n_joints() {
            let axis_front = Vec2::from_angle(theta);
            theta += q[idx_pitch(j)];
            let axis_rear = Vec2::from_angle(theta);
            com = com - axis_front * (half + q[idx_gap(j)]) - axis_rear * half;
            poses.push(BodyPose { com, theta });
        }
        poses
    }

    pub fn leg_tip(&self, pose: &BodyPose) -> Vec2 {
        pose.com + self.leg_tip_offset().rotated(pose.theta)
    }

    /// Shell corner positions of a module: front-bottom, front-top,
    /// rear-bottom, rear-top.
    pub fn body_corners(&self, pose: &BodyPose) -> [Vec2; 4] {
        let hx = self.module_length / 2.0;
        let hz = self.module_diameter / 2.0;
        [
            pose.com + Vec2::new(hx, -hz).rotated(pose.theta),
            pose.com + Vec2::new(hx, hz).rotated(pose.theta),
            pose.com + Vec2::new(-hx, -hz).rotated(pose.theta),
            pose.com + Vec2::new(-hx, hz).rotated(pose.theta),
        ]
    }

    /// Nose point: center of the head's front face.
    pub fn nose(&self, head: &BodyPose) -> Vec2 {
        head.com + Vec2::new(self.module_length / 2.0, 0.0).rotated(head.theta)
    }
}

/// Pose of one module in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyPose {
    pub com: Vec2,
    pub theta: f64,
}

/// Instantaneous state of one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub pitch: f64,
    pub gap: f64,
    pub pitch_rate: f64,
    pub gap_rate: f64,
}

/// Generalized coordinates and velocities of the whole chain. Layout:
/// head x, head z, head pitch, then (pitch, gap) per joint from the head
/// backward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultibodyState {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl MultibodyState {
    pub fn n_joints(&self) -> usize {
        (self.q.len() - BASE_DOF) / 2
    }

    pub fn joint(&self, j: usize) -> JointState {
        JointState {
            pitch: self.q[idx_pitch(j)],
            gap: self.q[idx_gap(j)],
            pitch_rate: self.v[idx_pitch(j)],
            gap_rate: self.v[idx_gap(j)],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_are_consistent() {
        let spec = RobotSpec::default();
        spec.validate().unwrap();
        let chain = spec.n_modules as f64 * spec.module_length
            + (spec.n_modules - 1) as f64 * spec.nominal_gap;
        assert_relative_eq!(chain, spec.total_length, max_relative = 1e-12);
    }

    #[test]
    fn standing_height_matches_scale() {
        let spec = RobotSpec::default();
        let h = spec.standing_height();
        assert!(h >= 0.10 && h <= 0.15, "standing height {h}");
    }

    #[test]
    fn straight_chain_geometry() {
        let spec = RobotSpec::default();
        let terrain = Terrain::flat();
        let state = spec.assemble(0.0, spec.nominal_gap, &terrain).unwrap();
        let poses = spec.forward_kinematics(&state.q);
        assert_eq!(poses.len(), 5);
        assert_relative_eq!(spec.nose(&poses[0]).x, 0.0, epsilon = 1e-12);
        let pitch = spec.module_length + spec.nominal_gap;
        for w in poses.windows(2) {
            assert_relative_eq!(w[0].com.x - w[1].com.x, pitch, epsilon = 1e-12);
            assert_relative_eq!(w[0].com.z, w[1].com.z, epsilon = 1e-12);
            assert_eq!(w[1].theta, 0.0);
        }
        let tail = spec.forward_kinematics(&state.q).last().unwrap().com;
        let nose = spec.nose(&poses[0]);
        let span = nose.x - (tail.x - spec.module_length / 2.0);
        assert_relative_eq!(span, spec.total_length, max_relative = 1e-12);
    }

    #[test]
    fn assembled_tips_touch_flat_ground() {
        let spec = RobotSpec::default();
        let terrain = Terrain::flat();
        let state = spec.assemble(-0.3, spec.nominal_gap, &terrain).unwrap();
        let poses = spec.forward_kinematics(&state.q);
        for pose in &poses {
            let tip = spec.leg_tip(pose);
            assert!(tip.z.abs() < 1e-9, "tip height {}", tip.z);
            for corner in spec.body_corners(pose) {
                assert!(corner.z > -1e-9);
            }
        }
        assert!(state.v.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bent_joint_rotates_rear_module() {
        let spec = RobotSpec::default();
        let mut q = vec![0.0; spec.n_q()];
        for j in 0..spec.n_joints() {
            q[idx_gap(j)] = spec.nominal_gap;
        }
        q[idx_pitch(0)] = std::f64::consts::FRAC_PI_2;
        let poses = spec.forward_kinematics(&q);
        let half = spec.module_length / 2.0;
        assert_relative_eq!(poses[1].theta, std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(
            poses[1].com.x,
            -(half + spec.nominal_gap),
            epsilon = 1e-12
        );
        assert_relative_eq!(poses[1].com.z, -half, epsilon = 1e-12);
    }

    #[test]
    fn rejects_inconsistent_dimensions() {
        let spec = RobotSpec {
            total_length: 1.0,
            ..RobotSpec::default()
        };
        assert!(matches!(spec.validate(), Err(Error::Configuration(_))));
        let single = RobotSpec {
            n_modules: 1,
            ..RobotSpec::default()
        };
        assert!(matches!(single.validate(), Err(Error::Configuration(_))));
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let spec = RobotSpec::default();
        let text = serde_json::to_string(&spec).unwrap();
        let back: RobotSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let spec: RobotSpec = serde_json::from_str(r#"{"module_mass": 0.25}"#).unwrap();
        assert_eq!(spec.module_mass, 0.25);
        assert_eq!(spec.n_modules, 5);
    }
}
