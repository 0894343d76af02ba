//! Penalty contact between probe points and the terrain heightfield,
//! including the vertical riser faces between cells.

use crate::error::Result;
use crate::math::Vec2;
use crate::terrain::Terrain;

#[derive(Debug, Clone, Copy)]
pub(crate) struct ContactParams {
    pub stiffness: f64,
    pub damping: f64,
    /// Slip speed at which friction saturates to the full Coulomb value.
    pub regularization_velocity: f64,
    /// Upper bound on the friction force per unit slip speed, which keeps
    /// the near-stick regime stable at the integration step size.
    pub max_slope: f64,
}

/// Resolved contact on a probe point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Contact {
    pub force: Vec2,
    /// Surface tangent direction.
    pub tangent: Vec2,
    /// Friction force per unit slip speed at the current operating point,
    /// in newton-seconds per meter. The force on the probe is exactly
    /// `-stick_damping * v_t`, so integrating this coefficient implicitly
    /// keeps hard stiction stable at any step size.
    pub stick_damping: f64,
}

/// Contact on a probe point, or `None` when the probe is free.
///
/// A penetrating probe is resolved against whichever surface is closest:
/// the top of its own cell, or a riser face shared with a lower neighboring
/// cell. Resolving against a riser produces a horizontal normal, which is
/// what lets terrain edges block or jam the robot instead of popping it
/// upward.
pub(crate) fn probe_contact(
    terrain: &Terrain,
    p: Vec2,
    velocity: Vec2,
    mu: f64,
    cp: &ContactParams,
) -> Result<Option<Contact>> {
    let cell = terrain.cell_at(p.x)?;
    let top = terrain.cell_height(cell);
    if p.z >= top {
        return Ok(None);
    }
    let (x0, x1) = terrain.cell_span(cell);
    let mut depth = top - p.z;
    let mut normal = Vec2::new(0.0, 1.0);
    if cell > 0 && terrain.cell_height(cell - 1) <= p.z {
        let d = p.x - x0;
        if d < depth {
            depth = d;
            normal = Vec2::new(-1.0, 0.0);
        }
    }
    if cell + 1 < terrain.num_cells() && terrain.cell_height(cell + 1) <= p.z {
        let d = x1 - p.x;
        if d < depth {
            depth = d;
            normal = Vec2::new(1.0, 0.0);
        }
    }

    let v_n = velocity.dot(normal);
    let f_n = cp.stiffness * depth - cp.damping * v_n;
    if f_n <= 0.0 {
        return Ok(None);
    }
    let tangent = normal.perp();
    let v_t = velocity.dot(tangent);
    let c = (mu * f_n / v_t.abs().max(cp.regularization_velocity)).min(cp.max_slope);
    Ok(Some(Contact {
        force: normal * f_n - tangent * (c * v_t),
        tangent,
        stick_damping: c,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> ContactParams {
        ContactParams {
            stiffness: 1000.0,
            damping: 10.0,
            regularization_velocity: 1e-3,
            max_slope: 1e9,
        }
    }

    #[test]
    fn free_probe_has_no_force() {
        let t = Terrain::flat();
        let f = probe_contact(&t, Vec2::new(0.0, 0.1), Vec2::ZERO, 1.0, &params()).unwrap();
        assert!(f.is_none());
    }

    #[test]
    fn resting_penetration_pushes_up() {
        let t = Terrain::flat();
        let c = probe_contact(&t, Vec2::new(0.0, -0.001), Vec2::ZERO, 1.0, &params())
            .unwrap()
            .unwrap();
        assert_relative_eq!(c.force.z, 1.0, max_relative = 1e-12);
        assert_eq!(c.force.x, 0.0);
    }

    #[test]
    fn separating_contact_releases() {
        let t = Terrain::flat();
        // Moving up fast enough that damping cancels the spring force.
        let f = probe_contact(&t, Vec2::new(0.0, -0.001), Vec2::new(0.0, 1.0), 1.0, &params())
            .unwrap();
        assert!(f.is_none());
    }

    #[test]
    fn sliding_friction_opposes_motion() {
        let t = Terrain::flat();
        let c = probe_contact(&t, Vec2::new(0.0, -0.001), Vec2::new(0.5, 0.0), 0.8, &params())
            .unwrap()
            .unwrap();
        assert_relative_eq!(c.force.x, -0.8 * c.force.z, max_relative = 1e-12);
        assert!(c.force.z > 0.0);
        assert_relative_eq!(c.stick_damping * 0.5, 0.8 * c.force.z, max_relative = 1e-12);
    }

    #[test]
    fn near_stick_force_stays_proportional_to_slip() {
        let t = Terrain::flat();
        let v = 1e-4;
        let c = probe_contact(&t, Vec2::new(0.0, -0.001), Vec2::new(v, 0.0), 1.0, &params())
            .unwrap()
            .unwrap();
        // Inside the regularization band the coefficient is pinned at
        // mu*f_n/v_reg, so the force scales linearly with slip speed.
        assert_relative_eq!(c.force.x, -c.force.z / 1e-3 * v, max_relative = 1e-12);
        assert_relative_eq!(c.stick_damping, c.force.z / 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn friction_slope_cap_limits_near_stick_force() {
        let t = Terrain::flat();
        let cp = ContactParams {
            max_slope: 100.0,
            ..params()
        };
        let v = 1e-4;
        let c = probe_contact(&t, Vec2::new(0.0, -0.001), Vec2::new(v, 0.0), 1.0, &cp)
            .unwrap()
            .unwrap();
        assert_relative_eq!(c.force.x, -100.0 * v, max_relative = 1e-12);
        assert_eq!(c.stick_damping, 100.0);
    }

    #[test]
    fn riser_face_pushes_back_horizontally() {
        let t = Terrain::step(0.125);
        // Probe slightly past the riser, well below the upper cell top: the
        // nearest exit is back through the face it came from.
        let c = probe_contact(&t, Vec2::new(0.002, 0.05), Vec2::ZERO, 0.3, &params())
            .unwrap()
            .unwrap();
        assert_relative_eq!(c.force.x, -1000.0 * 0.002, max_relative = 1e-12);
        assert_eq!(c.force.z, 0.0);
        assert_eq!(c.tangent, Vec2::new(-1.0, 0.0).perp());
    }

    #[test]
    fn shallow_top_penetration_beats_riser() {
        let t = Terrain::step(0.125);
        // Probe far past the riser and barely under the upper cell top.
        let c = probe_contact(&t, Vec2::new(0.2, 0.1245), Vec2::ZERO, 0.3, &params())
            .unwrap()
            .unwrap();
        assert!(c.force.z > 0.0);
        assert_eq!(c.force.x, 0.0);
    }

    #[test]
    fn out_of_extent_propagates() {
        let t = Terrain::step(0.125);
        assert!(probe_contact(&t, Vec2::new(1e4, -0.1), Vec2::ZERO, 0.3, &params()).is_err());
    }
}
