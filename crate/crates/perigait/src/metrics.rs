//! Locomotion measurements: forward speed normalized by body length, the
//! peristalsis ratio between paired runs, climbing success and probability,
//! and nose-path extraction for gait diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec2;
use crate::sim::Trajectory;
use crate::terrain::Terrain;

/// Climbing attempts are judged over at most this many gait cycles.
pub const CLIMB_WINDOW_CYCLES: u32 = 5;

/// A leg tip counts as standing on a surface when it sits within this depth
/// of the surface plane, in meters.
pub const TOP_CONTACT_TOLERANCE: f64 = 0.002;

/// Fraction of a cycle a top contact must persist before it counts as a
/// climb, rejecting grazing touches.
pub const SUSTAIN_FRACTION: f64 = 0.1;

/// Net forward progress normalized by body length and cycle count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedMeasure {
    /// Net x-displacement of the geometric center over the measured span,
    /// in meters.
    pub displacement: f64,
    /// Cycles the displacement was accumulated over.
    pub cycles: u32,
    /// Body length used for normalization, in meters.
    pub body_length: f64,
    /// Body lengths per cycle: `displacement / (body_length * cycles)`.
    pub bl_per_cyc: f64,
}

/// Speed gain attributable to the peristaltic wave, per meter of
/// compression amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeristalsisRatio {
    /// Per-cycle displacement with peristalsis, in meters per cycle.
    pub d_p: f64,
    /// Per-cycle displacement without peristalsis, in meters per cycle.
    pub d_np: f64,
    /// Compression amplitude, in meters.
    pub delta_l: f64,
    /// `(d_p - d_np) / delta_l`, dimensionless.
    pub ratio: f64,
}

/// Verdict of one climbing trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClimbOutcome {
    pub success: bool,
    /// Cycles elapsed when success was confirmed, or the full judged window
    /// on failure.
    pub cycles_used: u32,
    /// Gait time at which the confirming top contact began, in seconds.
    pub first_leg_pair_top_time: Option<f64>,
}

/// Speed in body lengths per cycle over the whole recorded trajectory.
pub fn speed_bl_per_cyc(traj: &Trajectory, body_length: f64) -> Result<SpeedMeasure> {
    speed_over(traj, body_length, 0)
}

/// Speed in body lengths per cycle excluding the first recorded cycle,
/// which carries the amplitude ramp.
pub fn steady_speed_bl_per_cyc(traj: &Trajectory, body_length: f64) -> Result<SpeedMeasure> {
    speed_over(traj, body_length, 1)
}

fn speed_over(traj: &Trajectory, body_length: f64, skip_cycles: u32) -> Result<SpeedMeasure> {
    if !(body_length > 0.0) || !body_length.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "body_length = {body_length} m must be positive"
        )));
    }
    if traj.cycles <= skip_cycles {
        return Err(Error::Measurement(format!(
            "speed needs more than {skip_cycles} recorded cycle(s); trajectory has {}",
            traj.cycles
        )));
    }
    let ticks = traj.ticks_per_cycle as usize;
    let expected = traj.cycles as usize * ticks + 1;
    if traj.samples.len() != expected {
        return Err(Error::Measurement(format!(
            "trajectory has {} samples but {} cycles at {} ticks/cycle need {expected}",
            traj.samples.len(),
            traj.cycles,
            traj.ticks_per_cycle
        )));
    }
    let cycles = traj.cycles - skip_cycles;
    let first = traj.samples[skip_cycles as usize * ticks].mean_com_x();
    let last = traj.samples[traj.samples.len() - 1].mean_com_x();
    let displacement = last - first;
    Ok(SpeedMeasure {
        displacement,
        cycles,
        body_length,
        bl_per_cyc: displacement / (body_length * cycles as f64),
    })
}

/// Difference between two per-cycle displacements, normalized by the
/// compression amplitude that separates them. Both measures must share a
/// body length; the result is negative when peristalsis hurts.
pub fn peristalsis_ratio(
    d_p: &SpeedMeasure,
    d_np: &SpeedMeasure,
    delta_l: f64,
) -> Result<PeristalsisRatio> {
    if delta_l == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    if !(delta_l > 0.0) || !delta_l.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta_l = {delta_l} m must be positive"
        )));
    }
    if d_p.body_length != d_np.body_length {
        return Err(Error::Measurement(format!(
            "peristalsis ratio needs a shared body length, got {} m and {} m",
            d_p.body_length, d_np.body_length
        )));
    }
    let dp = d_p.bl_per_cyc * d_p.body_length;
    let dnp = d_np.bl_per_cyc * d_np.body_length;
    Ok(PeristalsisRatio {
        d_p: dp,
        d_np: dnp,
        delta_l,
        ratio: (dp - dnp) / delta_l,
    })
}

/// Judge a climbing trial: success means some leg tip stands on a terrain
/// cell at the entry-edge height or above, sustained for at least
/// [`SUSTAIN_FRACTION`] of a cycle, within [`CLIMB_WINDOW_CYCLES`] cycles.
///
/// A tip counts as standing on top only when it is within
/// [`TOP_CONTACT_TOLERANCE`] of the top surface and farther past the riser
/// plane than it has sunk, which excludes tips jammed against the riser
/// face or grazing the lip corner.
pub fn climb_outcome(traj: &Trajectory, terrain: &Terrain) -> Result<ClimbOutcome> {
    let top = terrain.edge_height().ok_or_else(|| {
        Error::InapplicableMetric("climb success needs a terrain with an entry edge".into())
    })?;
    let ticks = traj.ticks_per_cycle as usize;
    let period = traj.tick_duration * ticks as f64;
    let window = CLIMB_WINDOW_CYCLES.min(traj.cycles);
    let last = (window as usize * ticks).min(traj.samples.len().saturating_sub(1));
    let need = (SUSTAIN_FRACTION * ticks as f64).ceil().max(1.0) as usize;

    let mut run = 0usize;
    for s in &traj.samples[..=last] {
        let mut on_top = false;
        for (tip, touch) in s.tips.iter().zip(&s.tip_contact) {
            if !*touch {
                continue;
            }
            let Ok(i) = terrain.cell_at(tip.x) else {
                continue;
            };
            let sink = top - tip.z;
            if terrain.cell_height(i) >= top - 1e-9
                && sink <= TOP_CONTACT_TOLERANCE
                && tip.x > sink
            {
                on_top = true;
                break;
            }
        }
        if on_top {
            run += 1;
            if run >= need {
                let start = s.t - (need - 1) as f64 * traj.tick_duration;
                return Ok(ClimbOutcome {
                    success: true,
                    cycles_used: (s.t / period).ceil().max(1.0) as u32,
                    first_leg_pair_top_time: Some(start),
                });
            }
        } else {
            run = 0;
        }
    }
    Ok(ClimbOutcome {
        success: false,
        cycles_used: window,
        first_leg_pair_top_time: None,
    })
}

/// Fraction of successful trials.
pub fn climb_probability(outcomes: &[ClimbOutcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::Measurement(
            "climb probability of zero trials".into(),
        ));
    }
    let successes = outcomes.iter().filter(|o| o.success).count();
    Ok(successes as f64 / outcomes.len() as f64)
}

/// Per-tick position of the head module's nose point.
pub fn head_trajectory(traj: &Trajectory) -> Vec<Vec2> {
    traj.samples.iter().map(|s| s.nose).collect()
}

/// Mean forward drift of the nose per cycle, counted only over ticks where
/// the nose is rising.
///
/// The tally covers whole cycles after the first recorded one (the ramp
/// cycle) and stops at the last whole cycle before the nose first reaches
/// `x_stop`, so approach runs toward an obstacle are compared over their
/// steady portion only.
pub fn rising_nose_drift(traj: &Trajectory, x_stop: f64) -> Result<f64> {
    let ticks = traj.ticks_per_cycle as usize;
    if ticks == 0 || traj.samples.is_empty() {
        return Err(Error::Measurement("rising-drift of an empty trajectory".into()));
    }
    let hit = traj
        .samples
        .iter()
        .position(|s| s.nose.x >= x_stop)
        .unwrap_or(traj.samples.len());
    let whole = hit / ticks;
    if whole < 2 {
        return Err(Error::Measurement(format!(
            "rising-drift needs two whole cycles before x = {x_stop} m; trajectory has {whole}"
        )));
    }
    let mut dx = 0.0;
    for w in traj.samples[ticks..whole * ticks].windows(2) {
        if w[1].nose.z > w[0].nose.z {
            dx += w[1].nose.x - w[0].nose.x;
        }
    }
    Ok(dx / (whole - 1) as f64)
}
