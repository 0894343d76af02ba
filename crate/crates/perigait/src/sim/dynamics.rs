//! Reduced-coordinate dynamics of the module chain: kinematic frame data,
//! the joint-space mass matrix, and the velocity-product bias forces.

use crate::math::{SymMatrix, Vec2};
use crate::robot::{idx_gap, idx_pitch, BodyPose, MultibodyState, RobotSpec};

/// Per-step kinematic quantities shared by force mapping, the mass matrix,
/// and the bias terms.
#[derive(Debug, Default)]
pub(crate) struct Frame {
    pub poses: Vec<BodyPose>,
    /// Forward axis of each module.
    pub axes: Vec<Vec2>,
    /// World position of each joint's hinge point (on the front module's
    /// axis, one gap behind its rear face center).
    pub pivots: Vec<Vec2>,
    pub omegas: Vec<f64>,
    pub vcoms: Vec<Vec2>,
}

impl Frame {
    pub fn update(&mut self, spec: &RobotSpec, state: &MultibodyState) {
        let half = spec.module_length / 2.0;
        let q = &state.q;
        let v = &state.v;

        self.poses.clear();
        self.poses.extend(spec.forward_kinematics(q));
        self.axes.clear();
        self.axes
            .extend(self.poses.iter().map(|p| Vec2::from_angle(p.theta)));
        self.pivots.clear();
        for j in 0..spec.n_joints() {
            self.pivots
                .push(self.poses[j].com - self.axes[j] * (half + q[idx_gap(j)]));
        }

        self.omegas.clear();
        self.omegas.push(v[2]);
        self.vcoms.clear();
        self.vcoms.push(Vec2::new(v[0], v[1]));
        for j in 0..spec.n_joints() {
            let w_front = self.omegas[j];
            let w_rear = w_front + v[idx_pitch(j)];
            self.omegas.push(w_rear);
            let vel = self.vcoms[j]
                - self.axes[j] * v[idx_gap(j)]
                - self.axes[j].perp() * ((half + q[idx_gap(j)]) * w_front)
                - self.axes[j + 1].perp() * (half * w_rear);
            self.vcoms.push(vel);
        }
    }

    /// Velocity of a world point rigidly attached to module `b`.
    pub fn point_velocity(&self, b: usize, p: Vec2) -> Vec2 {
        self.vcoms[b] + (p - self.poses[b].com).perp() * self.omegas[b]
    }

    /// Write the generalized-velocity influence row of direction `t` at
    /// world point `p` on module `b` into `g`, returning the number of
    /// leading entries that are populated. The point's velocity component
    /// along `t` is the dot product of this row with the velocity vector.
    pub fn direction_jacobian(&self, b: usize, p: Vec2, t: Vec2, g: &mut [f64]) -> usize {
        g[0] = t.x;
        g[1] = t.z;
        g[2] = (p - self.poses[0].com).cross(t);
        for j in 0..b {
            g[idx_pitch(j)] = (p - self.pivots[j]).cross(t);
            g[idx_gap(j)] = -self.axes[j].dot(t);
        }
        3 + 2 * b
    }

    /// Accumulate the generalized force of a pure force `f` acting at world
    /// point `p` on module `b`.
    pub fn apply_point_force(&self, b: usize, p: Vec2, f: Vec2, qf: &mut [f64]) {
        qf[0] += f.x;
        qf[1] += f.z;
        qf[2] += (p - self.poses[0].com).cross(f);
        for j in 0..b {
            qf[idx_pitch(j)] += (p - self.pivots[j]).cross(f);
            qf[idx_gap(j)] -= self.axes[j].dot(f);
        }
    }
}

/// Assemble the joint-space mass matrix into `m` (lower triangle).
pub(crate) fn mass_matrix(spec: &RobotSpec, frame: &Frame, m: &mut SymMatrix) {
    m.reset();
    let mass = spec.module_mass;
    let inertia = spec.body_inertia();
    let mut cols: Vec<(usize, Vec2)> = Vec::with_capacity(spec.n_q());
    for b in 0..spec.n_modules {
        let com = frame.poses[b].com;
        cols.clear();
        cols.push((0, Vec2::new(1.0, 0.0)));
        cols.push((1, Vec2::new(0.0, 1.0)));
        cols.push((2, (com - frame.poses[0].com).perp()));
        for j in 0..b {
            cols.push((idx_pitch(j), (com - frame.pivots[j]).perp()));
            cols.push((idx_gap(j), -frame.axes[j]));
        }
        for ii in 0..cols.len() {
            for jj in 0..=ii {
                m.add(cols[ii].0, cols[jj].0, mass * cols[ii].1.dot(cols[jj].1));
            }
        }
        // Angular rows: the body spins with the head pitch plus every joint
        // pitch ahead of it, with unit gearing throughout.
        for ii in 0..=b {
            let ki = if ii == 0 { 2 } else { idx_pitch(ii - 1) };
            for jj in 0..=ii {
                let kj = if jj == 0 { 2 } else { idx_pitch(jj - 1) };
                m.add(ki, kj, inertia);
            }
        }
    }
}

/// Subtract the velocity-product (centripetal and Coriolis) generalized
/// forces from `qf`. Computed by propagating the acceleration each module
/// center would have if all generalized accelerations were zero.
pub(crate) fn subtract_bias_forces(
    spec: &RobotSpec,
    frame: &Frame,
    state: &MultibodyState,
    qf: &mut [f64],
) {
    let half = spec.module_length / 2.0;
    let mass = spec.module_mass;
    let mut acc = Vec2::ZERO;
    for j in 0..spec.n_joints() {
        let w_front = frame.omegas[j];
        let w_rear = frame.omegas[j + 1];
        let gap = state.q[idx_gap(j)];
        let gap_rate = state.v[idx_gap(j)];
        acc += frame.axes[j] * ((half + gap) * w_front * w_front)
            + frame.axes[j + 1] * (half * w_rear * w_rear)
            - frame.axes[j].perp() * (2.0 * gap_rate * w_front);
        frame.apply_point_force(j + 1, frame.poses[j + 1].com, acc * (-mass), qf);
    }
}

#[cfg(test)]
pub(crate) fn kinetic_energy(spec: &RobotSpec, frame: &Frame) -> f64 {
    let inertia = spec.body_inertia();
    (0..spec.n_modules)
        .map(|b| {
            0.5 * spec.module_mass * frame.vcoms[b].norm_squared()
                + 0.5 * inertia * frame.omegas[b] * frame.omegas[b]
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SymMatrix;
    use proptest::prelude::*;

    fn random_state(spec: &RobotSpec, vals: &[f64]) -> MultibodyState {
        let n_q = spec.n_q();
        let mut q = vec![0.0; n_q];
        let mut v = vec![0.0; n_q];
        for k in 0..n_q {
            q[k] = vals[k];
            v[k] = vals[n_q + k];
        }
        // Keep gaps in a physical range.
        for j in 0..spec.n_joints() {
            q[idx_gap(j)] = 0.005 + 0.01 * q[idx_gap(j)].abs().fract();
        }
        MultibodyState { q, v }
    }

    fn quadratic_form(m: &SymMatrix, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..m.n() {
            s += m.get(i, i) * v[i] * v[i];
            for j in 0..i {
                s += 2.0 * m.get(i, j) * v[i] * v[j];
            }
        }
        0.5 * s
    }

    proptest! {
        #[test]
        fn mass_matrix_reproduces_kinetic_energy(
            vals in prop::collection::vec(-1.5f64..1.5, 22)
        ) {
            let spec = RobotSpec::default();
            let state = random_state(&spec, &vals);
            let mut frame = Frame::default();
            frame.update(&spec, &state);
            let mut m = SymMatrix::zeros(spec.n_q());
            mass_matrix(&spec, &frame, &mut m);
            let from_matrix = quadratic_form(&m, &state.v);
            let from_recurrence = kinetic_energy(&spec, &frame);
            prop_assert!(
                (from_matrix - from_recurrence).abs()
                    <= 1e-9 * (1.0 + from_recurrence.abs()),
                "matrix {from_matrix} vs recurrence {from_recurrence}"
            );
        }

        #[test]
        fn point_force_mapping_matches_finite_differences(
            vals in prop::collection::vec(-1.0f64..1.0, 22),
            body in 0usize..5,
            local_x in -0.1f64..0.1,
            local_z in -0.1f64..0.1,
            fx in -2.0f64..2.0,
            fz in -2.0f64..2.0,
        ) {
            let spec = RobotSpec::default();
            let state = random_state(&spec, &vals);
            let local = Vec2::new(local_x, local_z);
            let force = Vec2::new(fx, fz);

            let point_of = |q: &[f64]| {
                let pose = spec.forward_kinematics(q)[body];
                pose.com + local.rotated(pose.theta)
            };

            let mut frame = Frame::default();
            frame.update(&spec, &state);
            let mut qf = vec![0.0; spec.n_q()];
            frame.apply_point_force(body, point_of(&state.q), force, &mut qf);

            let eps = 1e-6;
            for k in 0..spec.n_q() {
                let mut qp = state.q.clone();
                let mut qm = state.q.clone();
                qp[k] += eps;
                qm[k] -= eps;
                let dp = (point_of(&qp) - point_of(&qm)) * (0.5 / eps);
                let expected = dp.dot(force);
                prop_assert!(
                    (qf[k] - expected).abs() <= 1e-5 * (1.0 + expected.abs()),
                    "coord {k}: mapped {} vs finite difference {expected}",
                    qf[k]
                );
            }
        }
    }
}
