//! Model bundle directories.
//!
//! A bundle holds `manifest.json`, the `config.toml` it was trained with and
//! three files per trained stage: `<stage>-sensory.gwr`, `<stage>-motor.gwr`
//! and `<stage>-table.hebb`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use visuomotor_core::curriculum::{Connectivity, Provenance, Stage, StageModel};
use visuomotor_core::eval::ModelSet;

use crate::binfmt::{load_network, load_table, save_network, save_table};
use crate::config::RunConfig;
use crate::FormatError;

pub const SCHEMA: &str = "visuomotor-bundle/1";
pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.toml";

pub const STAGES: [Stage; 3] = [Stage::Gaze, Stage::Arm, Stage::EyeHand];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub stage: Stage,
    pub provenance: Provenance,
    pub connectivity: Connectivity,
    pub sha256: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub seed: u64,
    pub config_digest: String,
    /// Dataset file name to SHA-256, for every dataset that fed this bundle.
    pub datasets: BTreeMap<String, String>,
    pub stages: Vec<StageEntry>,
    /// Digest of the bundle manifest this one was adapted from.
    pub adapted_from: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub config: RunConfig,
    pub models: ModelSet,
    pub datasets: BTreeMap<String, String>,
    pub adapted_from: Option<String>,
}

fn stage_slot(models: &ModelSet, stage: Stage) -> Option<&StageModel> {
    match stage {
        Stage::Gaze => models.gaze.as_ref(),
        Stage::Arm => models.arm.as_ref(),
        Stage::EyeHand => models.eyehand.as_ref(),
    }
}

pub fn set_stage(models: &mut ModelSet, model: StageModel) {
    match model.stage {
        Stage::Gaze => models.gaze = Some(model),
        Stage::Arm => models.arm = Some(model),
        Stage::EyeHand => models.eyehand = Some(model),
    }
}

fn file_names(stage: Stage) -> [String; 3] {
    let s = stage.name();
    [format!("{s}-sensory.gwr"), format!("{s}-motor.gwr"), format!("{s}-table.hebb")]
}

impl ModelBundle {
    pub fn new(config: RunConfig) -> Self {
        Self { config, models: ModelSet::default(), datasets: BTreeMap::new(), adapted_from: None }
    }

    pub fn exists(dir: &Path) -> bool {
        dir.join(MANIFEST).is_file()
    }

    pub fn save(&self, dir: &Path) -> Result<Manifest, FormatError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(CONFIG), self.config.to_toml()?)?;
        let mut stages = Vec::new();
        for stage in STAGES {
            let Some(m) = stage_slot(&self.models, stage) else { continue };
            let [s, mo, t] = file_names(stage);
            save_network(&m.sensory, &dir.join(&s))?;
            save_network(&m.motor, &dir.join(&mo))?;
            save_table(&m.table, &dir.join(&t))?;
            let mut sha256 = BTreeMap::new();
            for name in [s, mo, t] {
                let digest = crate::sha256_hex(&fs::read(dir.join(&name))?);
                sha256.insert(name, digest);
            }
            stages.push(StageEntry { stage, provenance: m.provenance.clone(), connectivity: m.connectivity(), sha256 });
        }
        let manifest = Manifest {
            schema: SCHEMA.to_string(),
            seed: self.config.seed,
            config_digest: self.config.digest(),
            datasets: self.datasets.clone(),
            stages,
            adapted_from: self.adapted_from.clone(),
        };
        fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(manifest)
    }

    pub fn load(dir: &Path) -> Result<Self, FormatError> {
        let text = fs::read_to_string(dir.join(MANIFEST))
            .map_err(|_| visuomotor_core::Error::MissingModel("bundle manifest"))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.schema != SCHEMA {
            return Err(FormatError::Schema(manifest.schema));
        }
        let config = RunConfig::load(&dir.join(CONFIG))?;
        let mut models = ModelSet::default();
        for entry in &manifest.stages {
            let [s, mo, t] = file_names(entry.stage);
            for name in [&s, &mo, &t] {
                let want = entry.sha256.get(name).ok_or(FormatError::Corrupt("manifest lacks a file hash"))?;
                if &crate::sha256_hex(&fs::read(dir.join(name))?) != want {
                    return Err(FormatError::Corrupt("model file does not match its manifest hash"));
                }
            }
            let model = StageModel::assemble(
                entry.stage,
                load_network(&dir.join(&s))?,
                load_network(&dir.join(&mo))?,
                load_table(&dir.join(&t))?,
                entry.provenance.clone(),
            )?;
            set_stage(&mut models, model);
        }
        Ok(Self { config, models, datasets: manifest.datasets, adapted_from: manifest.adapted_from })
    }

    /// Loads the bundle at `dir`, or starts an empty one if there is none.
    pub fn open_or_new(dir: &Path, config: &RunConfig) -> Result<Self, FormatError> {
        if Self::exists(dir) {
            let b = Self::load(dir)?;
            if b.config.robot != config.robot {
                return Err(FormatError::RobotMismatch);
            }
            Ok(Self { config: config.clone(), ..b })
        } else {
            Ok(Self::new(config.clone()))
        }
    }
}
