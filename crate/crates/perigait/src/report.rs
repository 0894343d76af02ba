//! Result tables: flat CSV rows for plotting and a JSON mirror carrying
//! the full plan echo, both byte-stable for identical inputs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::ExperimentOutput;
use crate::robot::JointKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<OutputFormat> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown output format {other:?}, expected csv or json"
            ))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

fn joint_name(kind: JointKind) -> &'static str {
    match kind {
        JointKind::TwoDof => "two_dof",
        JointKind::PitchOnly => "pitch_only",
    }
}

const CSV_HEADER: [&str; 9] = [
    "scenario",
    "sweep_param",
    "sweep_value",
    "joint_type",
    "trial",
    "seed",
    "scalar",
    "mean",
    "stddev",
];

/// Flatten an experiment into CSV rows: per sweep point, one row per trial
/// followed by one aggregate row; ratio rows (joint_type `ratio`) follow at
/// the end for paired protocols.
pub fn csv_string(output: &ExperimentOutput) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let ctx = |e: csv::Error| Error::Csv {
        path: "<buffer>".into(),
        source: e,
    };
    writer.write_record(CSV_HEADER).map_err(ctx)?;
    for result in &output.results {
        let scenario = result.scenario.name();
        let joint = joint_name(result.joint_type);
        for point in &result.points {
            let value = point.sweep_value.to_string();
            for trial in &point.trials {
                writer
                    .write_record([
                        scenario,
                        &result.sweep_param,
                        &value,
                        joint,
                        &trial.trial.to_string(),
                        &trial.seed.to_string(),
                        &trial.scalar.map(|s| s.to_string()).unwrap_or_default(),
                        "",
                        "",
                    ])
                    .map_err(ctx)?;
            }
            writer
                .write_record([
                    scenario,
                    &result.sweep_param,
                    &value,
                    joint,
                    "",
                    "",
                    "",
                    &point.mean.to_string(),
                    &point.stddev.to_string(),
                ])
                .map_err(ctx)?;
        }
    }
    for ratio in &output.ratios {
        writer
            .write_record([
                output.plan.scenario.name(),
                &output.results[0].sweep_param,
                &ratio.sweep_value.to_string(),
                "ratio",
                "",
                "",
                "",
                &ratio.ratio.ratio.to_string(),
                "",
            ])
            .map_err(ctx)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Csv {
            path: "<buffer>".into(),
            source: e.into_error().into(),
        })?;
    String::from_utf8(bytes)
        .map_err(|e| Error::InvalidParameter(format!("csv produced non-utf8 bytes: {e}")))
}

/// Pretty JSON mirror of the whole output, plan echo included.
pub fn json_string(output: &ExperimentOutput) -> Result<String> {
    let mut text = serde_json::to_string_pretty(output).map_err(|e| Error::Json {
        path: "<buffer>".into(),
        source: e,
    })?;
    text.push('\n');
    Ok(text)
}

/// Parse an output previously emitted as JSON.
pub fn parse_json(text: &str) -> Result<ExperimentOutput> {
    serde_json::from_str(text).map_err(|e| Error::Json {
        path: "<buffer>".into(),
        source: e,
    })
}

/// Read an output back from a JSON file.
pub fn read_json(path: &Path) -> Result<ExperimentOutput> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })
}

/// Write the experiment to `path` in the requested format.
pub fn emit_results(
    output: &ExperimentOutput,
    format: OutputFormat,
    path: &Path,
) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => csv_string(output)?,
        OutputFormat::Json => json_string(output)?,
    };
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
