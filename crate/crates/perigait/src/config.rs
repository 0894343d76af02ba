//! Run configuration loading: a JSON file overriding any subset of the
//! robot, gait, and integrator defaults. Gait angles are written in
//! degrees here and converted to radians at the boundary.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gait::GaitParams;
use crate::robot::RobotSpec;
use crate::sim::SimConfig;

/// Gait parameters as they appear in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaitConfig {
    /// Vertical wave amplitude in degrees.
    pub a_vert_deg: f64,
    pub k: f64,
    pub omega: f64,
    /// Compression amplitude in meters.
    pub delta_l: f64,
    /// Relaxed joint length in meters.
    pub l_ext: f64,
    /// Peristaltic phase offset in degrees.
    pub phi_deg: f64,
    pub n: usize,
}

impl Default for GaitConfig {
    fn default() -> Self {
        GaitConfig::from_params(&GaitParams::default())
    }
}

impl GaitConfig {
    pub fn from_params(p: &GaitParams) -> GaitConfig {
        GaitConfig {
            a_vert_deg: p.a_vert.to_degrees(),
            k: p.k,
            omega: p.omega,
            delta_l: p.delta_l,
            l_ext: p.l_ext,
            phi_deg: p.phi.to_degrees(),
            n: p.n,
        }
    }

    pub fn to_params(&self) -> GaitParams {
        GaitParams {
            a_vert: self.a_vert_deg.to_radians(),
            k: self.k,
            omega: self.omega,
            delta_l: self.delta_l,
            l_ext: self.l_ext,
            phi: self.phi_deg.to_radians(),
            n: self.n,
        }
    }
}

/// Everything a run needs besides the experiment protocol. Absent fields
/// keep their defaults, so a file may override a single value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub robot: RobotSpec,
    pub gait: GaitConfig,
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        self.sim.validate()?;
        self.gait.to_params().validate()
    }
}

/// Load and validate a [`RunConfig`] from a JSON file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;

    #[test]
    fn default_config_matches_library_defaults() {
        let config = RunConfig::default();
        assert_eq!(config.robot, RobotSpec::default());
        assert_eq!(config.sim, SimConfig::default());
        assert_eq!(config.gait.to_params(), GaitParams::default());
    }

    #[test]
    fn gait_angles_convert_between_degrees_and_radians() {
        let config = GaitConfig::default();
        assert_relative_eq!(config.a_vert_deg, 35.0, max_relative = 1e-12);
        assert_relative_eq!(config.phi_deg, 270.0, max_relative = 1e-12);
        let params = GaitConfig {
            a_vert_deg: 50.0,
            ..GaitConfig::default()
        }
        .to_params();
        assert_relative_eq!(params.a_vert, 50f64.to_radians(), max_relative = 1e-15);
    }

    #[test]
    fn partial_file_overrides_only_named_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let mut file = std::fs::File::create(&path).unwrap();
        write!(
            file,
            "{{\"sim\": {{\"dt\": 5e-5}}, \"gait\": {{\"a_vert_deg\": 50.0}}}}"
        )
        .unwrap();
        drop(file);
        let config = load_config(&path).unwrap();
        assert_eq!(config.sim.dt, 5e-5);
        assert_eq!(config.sim.gravity, SimConfig::default().gravity);
        assert_relative_eq!(config.gait.a_vert_deg, 50.0);
        assert_eq!(config.gait.n, 4);
        assert_eq!(config.robot, RobotSpec::default());
    }

    #[test]
    fn invalid_values_are_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"gait\": {\"a_vert_deg\": 120.0}}").unwrap();
        assert!(matches!(
            load_config(&path),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn malformed_json_reports_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{not json").unwrap();
        let err = load_config(&path).unwrap_err();
        assert!(err.to_string().contains("broken.json"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = RunConfig::default();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, config);
    }
}
