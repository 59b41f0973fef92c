//! TOML run configuration.
//!
//! Every section is optional; missing keys take their defaults. The digest
//! is the SHA-256 of the canonical JSON form, so two files that differ only
//! in layout or comments share a digest.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use visuomotor_core::curriculum::CurriculumConfig;
use visuomotor_core::datagen::BabbleConfig;
use visuomotor_core::KinematicModel;

use crate::{sha256_hex, FormatError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Iterations {
    pub gaze: usize,
    pub arm: usize,
    pub eyehand: usize,
    pub envchange: usize,
}

impl Default for Iterations {
    fn default() -> Self {
        Self { gaze: 1000, arm: 1000, eyehand: 1000, envchange: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub trials: usize,
    pub repeats: usize,
    /// Trials per repeat of the locked-joint comparison.
    pub compare_trials: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self { trials: 1000, repeats: 5, compare_trials: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub iterations: Iterations,
    pub eval: EvalSettings,
    pub robot: KinematicModel,
    pub babble: BabbleConfig,
    pub curriculum: CurriculumConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, FormatError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String, FormatError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        self.robot.validate()?;
        let c = &self.curriculum;
        for p in [&c.gaze_sensory, &c.gaze_motor, &c.arm_sensory, &c.arm_motor, &c.head_motor] {
            p.validate()?;
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        sha256_hex(&json)
    }

    /// First 16 hex digits of the digest, used in file names.
    pub fn short_digest(&self) -> String {
        self.digest()[..16].to_string()
    }
}
