mod contact;
mod dynamics;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gait::{gait_frame, GaitParams, JointCommand};
use crate::math::{SymMatrix, Vec2};
use crate::robot::{idx_gap, idx_pitch, BodyPose, JointKind, JointState, MultibodyState, RobotSpec};
use crate::terrain::Terrain;

use contact::ContactParams;
use dynamics::Frame;

/// Integrator and contact settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Requested physics step in seconds. The effective step is nudged so a
    /// whole number of steps fits in one control tick.
    pub dt: f64,
    pub gravity: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    /// Slip speed at which contact friction saturates, in meters per second.
    pub friction_regularization_velocity: f64,
    /// Cap on friction force per unit slip speed, in newton-seconds per
    /// meter.
    pub friction_max_slope: f64,
    pub joint_limit_stiffness: f64,
    pub joint_limit_damping: f64,
    pub gap_stop_stiffness: f64,
    pub gap_stop_damping: f64,
    /// Time to let the assembled robot relax onto the ground before the
    /// gait starts, in seconds.
    pub settle_time: f64,
    /// Fraction of one cycle over which command amplitudes ramp from zero.
    pub ramp_cycles: f64,
    /// Zero-order-hold command updates per gait cycle.
    pub control_ticks_per_cycle: u32,
    /// Divergence guard: any module moving faster than this fails the run.
    pub speed_cap: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-4,
            gravity: 9.81,
            contact_stiffness: 3e4,
            contact_damping: 150.0,
            friction_regularization_velocity: 1e-5,
            friction_max_slope: 1e6,
            joint_limit_stiffness: 50.0,
            joint_limit_damping: 0.5,
            gap_stop_stiffness: 2e4,
            gap_stop_damping: 120.0,
            settle_time: 1.0,
            ramp_cycles: 0.5,
            control_ticks_per_cycle: 100,
            speed_cap: 20.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt = {} must be a positive time step",
                self.dt
            )));
        }
        let non_negative = [
            ("gravity", self.gravity),
            ("contact_stiffness", self.contact_stiffness),
            ("contact_damping", self.contact_damping),
            ("joint_limit_stiffness", self.joint_limit_stiffness),
            ("joint_limit_damping", self.joint_limit_damping),
            ("gap_stop_stiffness", self.gap_stop_stiffness),
            ("gap_stop_damping", self.gap_stop_damping),
            ("settle_time", self.settle_time),
            ("ramp_cycles", self.ramp_cycles),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be non-negative"
                )));
            }
        }
        let positive = [
            ("friction_regularization_velocity", self.friction_regularization_velocity),
            ("friction_max_slope", self.friction_max_slope),
            ("speed_cap", self.speed_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if self.control_ticks_per_cycle == 0 {
            return Err(Error::InvalidParameter(
                "control_ticks_per_cycle must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn contact_params(&self) -> ContactParams {
        ContactParams {
            stiffness: self.contact_stiffness,
            damping: self.contact_damping,
            regularization_velocity: self.friction_regularization_velocity,
            max_slope: self.friction_max_slope,
        }
    }
}

/// Snapshot of the robot at one control tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    /// Gait time in seconds, measured from the end of the settle phase.
    pub t: f64,
    pub poses: Vec<BodyPose>,
    pub joints: Vec<JointState>,
    pub tips: Vec<Vec2>,
    pub tip_contact: Vec<bool>,
    pub nose: Vec2,
}

impl TrajectorySample {
    pub fn mean_com_x(&self) -> f64 {
        self.poses.iter().map(|p| p.com.x).sum::<f64>() / self.poses.len() as f64
    }
}

/// Tick-rate record of a driven run: `cycles * ticks_per_cycle + 1` samples
/// covering the gait phase, settle excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub tick_duration: f64,
    /// Effective physics step used between ticks.
    pub dt: f64,
    pub cycles: u32,
    pub ticks_per_cycle: u32,
}

impl Trajectory {
    pub fn displacement_x(&self) -> f64 {
        let first = self.samples.first().map_or(0.0, |s| s.mean_com_x());
        let last = self.samples.last().map_or(0.0, |s| s.mean_com_x());
        last - first
    }
}

/// A robot coupled to a terrain through an integrator, stepped under joint
/// commands.
pub struct World<'a> {
    spec: &'a RobotSpec,
    sim: &'a SimConfig,
    terrain: &'a Terrain,
    pub state: MultibodyState,
    step_count: u64,
    frame: Frame,
    mass: SymMatrix,
    qf: Vec<f64>,
    /// Friction operating points gathered while forces are accumulated,
    /// folded into the mass matrix before the solve: (body, point, tangent,
    /// damping coefficient).
    sticks: Vec<(usize, Vec2, Vec2, f64)>,
    jac: Vec<f64>,
}

impl<'a> World<'a> {
    pub fn new(
        spec: &'a RobotSpec,
        sim: &'a SimConfig,
        terrain: &'a Terrain,
        state: MultibodyState,
    ) -> Result<World<'a>> {
        spec.validate()?;
        sim.validate()?;
        if state.q.len() != spec.n_q() || state.v.len() != spec.n_q() {
            return Err(Error::Configuration(format!(
                "state has {} coordinates but the robot needs {}",
                state.q.len(),
                spec.n_q()
            )));
        }
        Ok(World {
            spec,
            sim,
            terrain,
            state,
            step_count: 0,
            frame: Frame::default(),
            mass: SymMatrix::zeros(spec.n_q()),
            qf: vec![0.0; spec.n_q()],
            sticks: Vec::with_capacity(5 * spec.n_modules),
            jac: vec![0.0; spec.n_q()],
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Advance one physics step under held joint commands.
    pub fn step(&mut self, commands: &[JointCommand], dt: f64) -> Result<()> {
        let spec = self.spec;
        debug_assert_eq!(commands.len(), spec.n_joints());
        self.frame.update(spec, &self.state);
        self.check_divergence()?;

        let qf = &mut self.qf;
        qf.fill(0.0);

        let weight = Vec2::new(0.0, -spec.module_mass * self.sim.gravity);
        for b in 0..spec.n_modules {
            self.frame
                .apply_point_force(b, self.frame.poses[b].com, weight, qf);
        }

        for (j, cmd) in commands.iter().enumerate() {
            let ip = idx_pitch(j);
            let ig = idx_gap(j);
            let pitch = self.state.q[ip];
            let pitch_rate = self.state.v[ip];
            let mut tau = (spec.pitch_kp * (cmd.alpha - pitch) - spec.pitch_kd * pitch_rate)
                .clamp(-spec.pitch_torque_max, spec.pitch_torque_max);
            if pitch > spec.pitch_limit {
                tau += self.sim.joint_limit_stiffness * (spec.pitch_limit - pitch)
                    - self.sim.joint_limit_damping * pitch_rate;
            } else if pitch < -spec.pitch_limit {
                tau += self.sim.joint_limit_stiffness * (-spec.pitch_limit - pitch)
                    - self.sim.joint_limit_damping * pitch_rate;
            }
            qf[ip] += tau;

            let gap = self.state.q[ig];
            let gap_rate = self.state.v[ig];
            let mut force = match spec.joint_kind {
                JointKind::TwoDof => {
                    // The cable can only pull the slot closed; opening is
                    // left to the leaf spring, so commands past the spring
                    // equilibrium just leave the cable slack.
                    let cable = (spec.gap_kp * (cmd.l - gap) - spec.gap_kd * gap_rate)
                        .clamp(-spec.gap_force_max, 0.0);
                    cable + spec.leaf_spring_stiffness * (spec.leaf_spring_rest - gap)
                        - spec.gap_joint_damping * gap_rate
                }
                // The fixed-length connection is structure, not an
                // actuator: stiff, bilateral, and unbounded.
                JointKind::PitchOnly => {
                    self.sim.gap_stop_stiffness * (spec.nominal_gap - gap)
                        - self.sim.gap_stop_damping * gap_rate
                }
            };
            let travel = spec.gap_travel();
            if gap < 0.0 {
                force += (-self.sim.gap_stop_stiffness * gap
                    - self.sim.gap_stop_damping * gap_rate)
                    .max(0.0);
            } else if gap > travel {
                force -= (self.sim.gap_stop_stiffness * (gap - travel)
                    + self.sim.gap_stop_damping * gap_rate)
                    .max(0.0);
            }
            qf[ig] += force;
        }

        let cp = self.sim.contact_params();
        self.sticks.clear();
        for b in 0..spec.n_modules {
            let pose = self.frame.poses[b];
            let tip = spec.leg_tip(&pose);
            let vel = self.frame.point_velocity(b, tip);
            if let Some(c) = contact::probe_contact(self.terrain, tip, vel, spec.leg_tip_friction, &cp)? {
                self.frame.apply_point_force(b, tip, c.force, qf);
                self.sticks.push((b, tip, c.tangent, c.stick_damping));
            }
            for corner in spec.body_corners(&pose) {
                let vel = self.frame.point_velocity(b, corner);
                if let Some(c) =
                    contact::probe_contact(self.terrain, corner, vel, spec.body_friction, &cp)?
                {
                    self.frame.apply_point_force(b, corner, c.force, qf);
                    self.sticks.push((b, corner, c.tangent, c.stick_damping));
                }
            }
        }

        dynamics::subtract_bias_forces(spec, &self.frame, &self.state, qf);
        dynamics::mass_matrix(spec, &self.frame, &mut self.mass);
        // Backward-Euler treatment of the friction forces: each contact
        // applied -c*v_t above, so its velocity derivative joins the mass
        // matrix and stiction stays stable at any coefficient.
        for &(b, p, t, c) in &self.sticks {
            let len = self.frame.direction_jacobian(b, p, t, &mut self.jac);
            let w = c * dt;
            for i in 0..len {
                let gi = self.jac[i];
                if gi == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    self.mass.add(i, j, w * gi * self.jac[j]);
                }
            }
        }
        if !self.mass.cholesky_solve_in_place(qf) {
            return Err(Error::Configuration(format!(
                "mass matrix factorization failed at step {}",
                self.step_count
            )));
        }
        for k in 0..self.state.q.len() {
            self.state.v[k] += dt * qf[k];
            self.state.q[k] += dt * self.state.v[k];
        }
        self.step_count += 1;
        Ok(())
    }

    fn check_divergence(&self) -> Result<()> {
        let half = self.spec.module_length / 2.0;
        for b in 0..self.spec.n_modules {
            let speed = self.frame.vcoms[b].norm() + self.frame.omegas[b].abs() * half;
            if !(speed <= self.sim.speed_cap) {
                return Err(Error::Divergence {
                    step: self.step_count,
                    body: b,
                    speed,
                    cap: self.sim.speed_cap,
                });
            }
        }
        Ok(())
    }

    /// Snapshot the current state, evaluating leg tip contact afresh.
    pub fn sample(&self, t: f64) -> Result<TrajectorySample> {
        let spec = self.spec;
        let mut frame = Frame::default();
        frame.update(spec, &self.state);
        let cp = self.sim.contact_params();
        let mut tips = Vec::with_capacity(spec.n_modules);
        let mut tip_contact = Vec::with_capacity(spec.n_modules);
        for b in 0..spec.n_modules {
            let tip = spec.leg_tip(&frame.poses[b]);
            let vel = frame.point_velocity(b, tip);
            let touch =
                contact::probe_contact(self.terrain, tip, vel, spec.leg_tip_friction, &cp)?
                    .is_some();
            tips.push(tip);
            tip_contact.push(touch);
        }
        let joints = (0..spec.n_joints()).map(|j| self.state.joint(j)).collect();
        let nose = spec.nose(&frame.poses[0]);
        Ok(TrajectorySample {
            t,
            poses: frame.poses,
            joints,
            tips,
            tip_contact,
            nose,
        })
    }
}

/// Commands for one control tick. The wave is laid onto the chain in
/// reverse so its crests travel from tail to nose; a crest moving against
/// the travel direction is what pushes the body forward.
fn driven_commands(spec: &RobotSpec, gait: &GaitParams, scale: f64, t: f64) -> Vec<JointCommand> {
    let wave = gait_frame(&gait.scaled(scale), t);
    let n = wave.len();
    (0..n)
        .map(|j| JointCommand {
            joint_index: j,
            alpha: wave[n - 1 - j]
                .alpha
                .clamp(-spec.pitch_limit, spec.pitch_limit),
            l: wave[n - 1 - j].l,
        })
        .collect()
}

/// Settle the assembled robot, ramp the gait in over `ramp_cycles`, and
/// drive it for `cycles` full cycles, sampling once per control tick.
pub fn run_gait(
    spec: &RobotSpec,
    gait: &GaitParams,
    sim: &SimConfig,
    terrain: &Terrain,
    nose_x: f64,
    cycles: u32,
) -> Result<Trajectory> {
    gait.validate()?;
    if gait.n != spec.n_joints() {
        return Err(Error::Configuration(format!(
            "gait drives {} joints but the robot has {}",
            gait.n,
            spec.n_joints()
        )));
    }
    let state = spec.assemble(nose_x, gait.l_ext, terrain)?;
    let mut world = World::new(spec, sim, terrain, state)?;

    let period = gait.cycle_period();
    let ticks_per_cycle = sim.control_ticks_per_cycle;
    let tick_duration = period / ticks_per_cycle as f64;
    let steps_per_tick = (tick_duration / sim.dt).round().max(1.0) as usize;
    let dt = tick_duration / steps_per_tick as f64;

    let hold = gait_frame(&gait.scaled(0.0), 0.0);
    let settle_ticks = (sim.settle_time / tick_duration).ceil() as usize;
    for _ in 0..settle_ticks * steps_per_tick {
        world.step(&hold, dt)?;
    }

    let total_ticks = cycles as usize * ticks_per_cycle as usize;
    let ramp_time = sim.ramp_cycles * period;
    let mut samples = Vec::with_capacity(total_ticks + 1);
    for tick in 0..total_ticks {
        let t = tick as f64 * tick_duration;
        samples.push(world.sample(t)?);
        let scale = if ramp_time > 0.0 {
            (t / ramp_time).min(1.0)
        } else {
            1.0
        };
        let commands = driven_commands(spec, gait, scale, t);
        for _ in 0..steps_per_tick {
            world.step(&commands, dt)?;
        }
    }
    samples.push(world.sample(total_ticks as f64 * tick_duration)?);

    Ok(Trajectory {
        samples,
        tick_duration,
        dt,
        cycles,
        ticks_per_cycle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hold_commands(spec: &RobotSpec) -> Vec<JointCommand> {
        (0..spec.n_joints())
            .map(|j| JointCommand {
                joint_index: j,
                alpha: 0.0,
                l: spec.nominal_gap,
            })
            .collect()
    }

    #[test]
    fn assembled_robot_settles_to_rest() {
        let spec = RobotSpec::default();
        let sim = SimConfig::default();
        let terrain = Terrain::flat();
        let state = spec.assemble(0.0, spec.nominal_gap, &terrain).unwrap();
        let start_x = state.q[0];
        let mut world = World::new(&spec, &sim, &terrain, state).unwrap();
        let cmds = hold_commands(&spec);
        for _ in 0..10_000 {
            world.step(&cmds, sim.dt).unwrap();
        }
        let speed: f64 = world.state.v.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(speed < 1e-3, "residual speed {speed}");
        // The leaf springs hold a preload at the assembled gap, so the chain
        // lengthens a few millimeters while relaxing; the nose may shift by
        // about half that but must not walk away.
        assert!(
            (world.state.q[0] - start_x).abs() < 5e-3,
            "drifted {} m",
            world.state.q[0] - start_x
        );
        let poses = spec.forward_kinematics(&world.state.q);
        for pose in &poses {
            let tip = spec.leg_tip(pose);
            assert!(tip.z > -1e-3, "tip sank to {}", tip.z);
            assert!(tip.z < 1e-4, "tip floated to {}", tip.z);
        }
    }

    #[test]
    fn free_flight_conserves_energy_and_momentum() {
        let mut spec = RobotSpec::default();
        spec.pitch_kp = 0.0;
        spec.pitch_kd = 0.0;
        spec.gap_kp = 0.0;
        spec.gap_kd = 0.0;
        spec.leaf_spring_stiffness = 0.0;
        let sim = SimConfig::default();
        let terrain = Terrain::flat();
        let mut state = spec.assemble(0.0, spec.nominal_gap, &terrain).unwrap();
        state.q[1] += 5.0;
        state.v = vec![0.1, 0.2, 0.4, 0.3, 0.02, -0.5, -0.01, 0.2, 0.015, -0.3, -0.02];

        let measure = |spec: &RobotSpec, state: &MultibodyState, g: f64| {
            let mut frame = Frame::default();
            frame.update(spec, state);
            let kinetic = dynamics::kinetic_energy(spec, &frame);
            let potential: f64 = frame
                .poses
                .iter()
                .map(|p| spec.module_mass * g * p.com.z)
                .sum();
            let mass_total = spec.total_mass();
            let com: Vec2 = frame
                .poses
                .iter()
                .fold(Vec2::ZERO, |acc, p| acc + p.com * (1.0 / spec.n_modules as f64));
            let vcom: Vec2 = frame
                .vcoms
                .iter()
                .fold(Vec2::ZERO, |acc, v| acc + *v * (1.0 / spec.n_modules as f64));
            let ang: f64 = (0..spec.n_modules)
                .map(|b| {
                    spec.module_mass
                        * (frame.poses[b].com - com).cross(frame.vcoms[b] - vcom)
                        + spec.body_inertia() * frame.omegas[b]
                })
                .sum();
            (kinetic + potential, mass_total * vcom.x, ang)
        };

        let (e0, px0, l0) = measure(&spec, &state, sim.gravity);
        let mut world = World::new(&spec, &sim, &terrain, state).unwrap();
        let cmds = hold_commands(&spec);
        let steps = 3000;
        for _ in 0..steps {
            world.step(&cmds, sim.dt).unwrap();
        }
        let (e1, px1, l1) = measure(&spec, &world.state, sim.gravity);
        assert!((e1 - e0).abs() < 0.01 * e0.abs().max(1.0), "energy {e0} -> {e1}");
        assert!((px1 - px0).abs() < 1e-6, "x momentum {px0} -> {px1}");
        assert!((l1 - l0).abs() < 0.01 * l0.abs().max(0.01), "spin {l0} -> {l1}");
    }

    #[test]
    fn gait_run_is_deterministic() {
        let spec = RobotSpec::default();
        let gait = GaitParams::default();
        let mut sim = SimConfig::default();
        sim.settle_time = 0.2;
        let terrain = Terrain::flat();
        let a = run_gait(&spec, &gait, &sim, &terrain, 0.0, 1).unwrap();
        let b = run_gait(&spec, &gait, &sim, &terrain, 0.0, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trajectory_has_tick_samples() {
        let spec = RobotSpec::default();
        let gait = GaitParams::default();
        let mut sim = SimConfig::default();
        sim.settle_time = 0.1;
        let terrain = Terrain::flat();
        let traj = run_gait(&spec, &gait, &sim, &terrain, 0.0, 1).unwrap();
        assert_eq!(traj.samples.len(), 101);
        assert_eq!(traj.samples[0].t, 0.0);
        let period = gait.cycle_period();
        assert_relative_eq!(
            traj.samples.last().unwrap().t,
            period,
            max_relative = 1e-9
        );
        for s in &traj.samples {
            assert_eq!(s.poses.len(), 5);
            assert_eq!(s.joints.len(), 4);
            assert_eq!(s.tips.len(), 5);
        }
    }

    #[test]
    fn dt_rounding_fits_ticks() {
        let gait = GaitParams::default();
        let sim = SimConfig::default();
        let tick = gait.cycle_period() / sim.control_ticks_per_cycle as f64;
        let steps = (tick / sim.dt).round();
        assert_relative_eq!(steps * (tick / steps), tick, max_relative = 1e-15);
    }

    #[test]
    fn joint_mismatch_is_rejected() {
        let spec = RobotSpec::default();
        let gait = GaitParams {
            n: 7,
            ..GaitParams::default()
        };
        let err = run_gait(
            &spec,
            &gait,
            &SimConfig::default(),
            &Terrain::flat(),
            0.0,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }
}
