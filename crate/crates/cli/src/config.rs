//! Experiment configuration files.

use std::fmt;
use std::path::Path;

use anyhow::Context;
use az_core::studies::{check_guards, Limits, Study};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// `{"schema": 1, "experiment": "<tag>", ...params}`. Parameters left out
/// take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(flatten)]
    pub study: Study,
}

impl ExperimentConfig {
    pub fn new(study: Study) -> Self {
        ExperimentConfig { schema: SCHEMA_VERSION, study }
    }

    pub fn from_json(text: &str) -> Result<Self, Refusal> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Refusal::new(format!("invalid configuration: {e}")))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Refusal::new(format!(
                "unsupported schema version {} (this build reads {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Self::from_json(&text)?)
    }

    pub fn check(&self, profile: Profile) -> Result<(), Refusal> {
        check_guards(&self.study, &profile.limits()).map_err(|g| Refusal::new(g.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Quick,
    Full,
}

impl Profile {
    pub fn limits(self) -> Limits {
        match self {
            Profile::Quick => Limits::quick(),
            Profile::Full => Limits::full(),
        }
    }
}

/// A configuration the runner declines to execute. Maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Refusal(pub String);

impl Refusal {
    pub fn new(msg: impl Into<String>) -> Self {
        Refusal(msg.into())
    }
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Refusal {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_params() {
        let cfg = ExperimentConfig::from_json(r#"{"schema": 1, "experiment": "fl_accuracy_oversampled", "k": 3}"#).unwrap();
        let Study::FlAccuracyOversampled(p) = &cfg.study else { panic!("wrong study") };
        assert_eq!(p.k, 3);
        assert_eq!(p.n_list, vec![17, 33, 65, 129, 257]);
    }

    #[test]
    fn round_trips() {
        for tag in ["svd_profile", "fl_timing", "greens_errormap", "esg_poisson"] {
            let cfg = ExperimentConfig::new(Study::default_for(tag).unwrap());
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn rejects_bad_schema_and_tag() {
        assert!(ExperimentConfig::from_json(r#"{"schema": 2, "experiment": "svd_profile"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"schema": 1, "experiment": "nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "svd_profile"}"#).is_err());
    }

    #[test]
    fn guard_refusal_suggests_smaller_sweep() {
        let cfg = ExperimentConfig::from_json(
            r#"{"schema": 1, "experiment": "fl_timing", "n_list": [257, 8193]}"#,
        )
        .unwrap();
        let err = cfg.check(Profile::Quick).unwrap_err();
        assert!(err.0.contains("try"), "{err}");
        assert!(cfg.check(Profile::Full).is_ok());
    }
}
