//! TOML run configuration and the sweep axis mini-language.

use fluxsim::{MismatchParam, Scenario, SweepAxis};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::CliError;

/// Everything a command needs from disk: the scenario itself plus I/O
/// settings. Command-line flags override `seed` and `out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for the measurement-noise generator.
    #[serde(default)]
    pub seed: u64,
    /// Default output path; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub scenario: Scenario,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parses an axis spec of the form `<quantity>=v1,v2,...`.
///
/// Quantities: `freq` (excitation frequency, Hz), `r_se`/`r_re`/`l_me`/`l_le`
/// (mismatch factors on the corresponding estimator parameter), `offset`
/// (x-axis current measurement offset, A).
pub fn parse_axis(spec: &str) -> Result<SweepAxis, CliError> {
    let (key, rest) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("axis spec `{spec}` is not of the form name=v1,v2,...")))?;
    let values = rest
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("axis value `{v}` is not a number")))
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    if values.is_empty() {
        return Err(CliError::Config(format!("axis spec `{spec}` has no values")));
    }
    let mismatch = |param| SweepAxis::Mismatch { param, factors: values.clone() };
    match key.trim() {
        "freq" => Ok(SweepAxis::Frequency { values }),
        "r_se" => Ok(mismatch(MismatchParam::RS)),
        "r_re" => Ok(mismatch(MismatchParam::RR)),
        "l_me" => Ok(mismatch(MismatchParam::LM)),
        "l_le" => Ok(mismatch(MismatchParam::LL)),
        "offset" => Ok(SweepAxis::CurrentOffset { values }),
        other => Err(CliError::Config(format!(
            "unknown sweep quantity `{other}`; expected freq, r_se, r_re, l_me, l_le, or offset"
        ))),
    }
}
