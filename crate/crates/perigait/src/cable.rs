use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec2;

/// Dimensional constants of one joint's cable routing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JointGeometry {
    /// Axial offset constant in meters.
    pub d: f64,
    /// Radial offset constant in meters.
    pub l_c: f64,
}

impl Default for JointGeometry {
    fn default() -> Self {
        JointGeometry {
            d: 0.0475,
            l_c: 0.0285,
        }
    }
}

impl JointGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.l_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "joint geometry requires d > 0 and l_c > 0 (got d = {}, l_c = {})",
                self.d, self.l_c
            )));
        }
        Ok(())
    }
}

/// Upper and lower cable lengths for one joint, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CablePair {
    pub upper: f64,
    pub lower: f64,
}

/// Closed-form cable lengths for a joint at pitch `alpha` (radians) and
/// peristaltic length `l` (meters).
///
/// Both lengths share the radicand `2·l_c² + d² + l² + 2(d·l − l_c²)·cos α`;
/// the term `2(d − l)·l_c·sin α` is subtracted for the upper cable and added
/// for the lower one, so a positive pitch shortens the upper cable.
pub fn cable_lengths(g: &JointGeometry, alpha: f64, l: f64) -> Result<CablePair> {
    let (sin_a, cos_a) = alpha.sin_cos();
    let base = 2.0 * g.l_c * g.l_c + g.d * g.d + l * l + 2.0 * (g.d * l - g.l_c * g.l_c) * cos_a;
    let tilt = 2.0 * (g.d - l) * g.l_c * sin_a;
    let upper_sq = base - tilt;
    let lower_sq = base + tilt;
    if upper_sq < 0.0 || lower_sq < 0.0 {
        return Err(Error::Geometry {
            radicand: upper_sq.min(lower_sq),
            alpha,
            l,
        });
    }
    Ok(CablePair {
        upper: upper_sq.sqrt(),
        lower: lower_sq.sqrt(),
    })
}

/// Independent geometric check of [`cable_lengths`]: place the four cable
/// anchor points in the plane and measure Euclidean distances.
///
/// The anchor layout is derived once, symbolically, from the closed form.
/// A squared anchor distance expands to
/// `|v|² + |w|² + 2(v·w)·cos α + 2(v∧w)·sin α`, where `v` runs from the
/// fixed anchor to the hinge and `w` from the hinge to the moving anchor
/// (in the rotated frame). Matching coefficients against the closed form
/// with fixed anchors `(-m, ±h)` and moving anchors `(g, ±h)` gives
///
/// ```text
/// m + g = d + l                      (constant term)
/// h     = (d - l)·l_c / (d + l)      (sin coefficient)
/// m·g   = d·l - l_c² + h²            (cos coefficient)
/// ```
///
/// so `m` and `g` are the roots of `ξ² - (d + l)·ξ + (d·l - l_c² + h²)`.
/// At `l = 0` this reduces to the plain picture: anchors on the hinge plane
/// at `(0, ±l_c)` facing anchors at `(d, ±l_c)` on the rotated face.
pub fn cable_lengths_oracle(geom: &JointGeometry, alpha: f64, l: f64) -> CablePair {
    let s = geom.d + l;
    let h = (geom.d - l) * geom.l_c / s;
    let prod = geom.d * l - geom.l_c * geom.l_c + h * h;
    let disc = (s * s - 4.0 * prod).max(0.0).sqrt();
    let g_off = 0.5 * (s + disc);
    let m_off = s - g_off;

    let fixed_upper = Vec2::new(-m_off, h);
    let fixed_lower = Vec2::new(-m_off, -h);
    let moving_upper = Vec2::new(g_off, h).rotated(alpha);
    let moving_lower = Vec2::new(g_off, -h).rotated(alpha);

    CablePair {
        upper: (moving_upper - fixed_upper).norm(),
        lower: (moving_lower - fixed_lower).norm(),
    }
}
