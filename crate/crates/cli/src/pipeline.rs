//! Dataset generation, training and adaptation over files.
//!
//! Datasets live in a data directory under fixed names; models live in
//! bundle directories. Every random choice is seeded from the run seed.

use std::path::Path;

use visuomotor_core::curriculum::{adapt, train_arm, train_eyehand, train_gaze, PriorExperience, Stage};
use visuomotor_core::datagen::{
    gen_arm_dataset, gen_envchange_dataset, gen_eyehand_dataset, gen_gaze_dataset, ArmSample, EyeHandTriplet,
    GazeSample,
};
use visuomotor_core::Error as CoreError;

use crate::bundle::{set_stage, ModelBundle};
use crate::config::RunConfig;
use crate::dataset::{read_dataset, write_dataset, Record};
use crate::{sha256_hex, sub_seed, FormatError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Gaze,
    Arm,
    EyeHand,
    EnvChange,
}

impl DataKind {
    pub const ALL: [DataKind; 4] = [DataKind::Gaze, DataKind::Arm, DataKind::EyeHand, DataKind::EnvChange];

    pub fn name(self) -> &'static str {
        match self {
            DataKind::Gaze => "gaze",
            DataKind::Arm => "arm",
            DataKind::EyeHand => "eyehand",
            DataKind::EnvChange => "envchange",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.jsonl", self.name())
    }

    /// Whether generating this dataset needs a trained gaze model.
    pub fn needs_gaze_model(self) -> bool {
        matches!(self, DataKind::EyeHand | DataKind::EnvChange)
    }
}

fn gaze_model(models: &Path) -> Result<visuomotor_core::curriculum::StageModel, FormatError> {
    if !ModelBundle::exists(models) {
        return Err(CoreError::MissingModel("gaze").into());
    }
    ModelBundle::load(models)?.models.gaze.ok_or_else(|| CoreError::MissingModel("gaze").into())
}

/// Generates one dataset into `data_dir` and returns `(record count, sha256)`.
pub fn generate(kind: DataKind, config: &RunConfig, data_dir: &Path, models: Option<&Path>) -> Result<(usize, String), FormatError> {
    std::fs::create_dir_all(data_dir)?;
    let path = data_dir.join(kind.file_name());
    let seed = sub_seed(config.seed, &format!("data:{}", kind.name()));
    let (kin, bc, it) = (&config.robot, &config.babble, &config.iterations);
    let gaze = match (kind.needs_gaze_model(), models) {
        (true, Some(dir)) => Some(gaze_model(dir)?),
        (true, None) => return Err(CoreError::MissingModel("gaze").into()),
        (false, _) => None,
    };
    let (count, hash) = match kind {
        DataKind::Gaze => {
            let d = gen_gaze_dataset(kin, it.gaze, seed, bc)?;
            (d.len(), write_dataset(&path, &d, seed, it.gaze)?)
        }
        DataKind::Arm => {
            let d = gen_arm_dataset(kin, it.arm, seed, bc)?;
            (d.len(), write_dataset(&path, &d, seed, it.arm)?)
        }
        DataKind::EyeHand => {
            let d = gen_eyehand_dataset(kin, it.eyehand, gaze.as_ref().expect("checked"), seed, bc)?;
            (d.len(), write_dataset(&path, &d, seed, it.eyehand)?)
        }
        DataKind::EnvChange => {
            let d = gen_envchange_dataset(kin, it.envchange, gaze.as_ref().expect("checked"), seed, bc)?;
            (d.len(), write_dataset(&path, &d, seed, it.envchange)?)
        }
    };
    Ok((count, hash))
}

/// Reads a dataset and its file hash.
pub fn load<T: Record>(data_dir: &Path, kind: DataKind) -> Result<(Vec<T>, String), FormatError> {
    let path = data_dir.join(kind.file_name());
    if !path.is_file() {
        return Err(FormatError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("missing dataset {}", path.display()),
        )));
    }
    let hash = sha256_hex(&std::fs::read(&path)?);
    let (_, records) = read_dataset::<T>(&path)?;
    Ok((records, hash))
}

/// Trains `stage` from the datasets in `data_dir` and stores it in the bundle at `models`.
pub fn train(stage: Stage, config: &RunConfig, data_dir: &Path, models: &Path) -> Result<ModelBundle, FormatError> {
    let mut bundle = ModelBundle::open_or_new(models, config)?;
    let seed = sub_seed(config.seed, &format!("train:{}", stage.name()));
    let cfg = &config.curriculum;
    match stage {
        Stage::Gaze => {
            let (d, h) = load::<GazeSample>(data_dir, DataKind::Gaze)?;
            set_stage(&mut bundle.models, train_gaze(&d, cfg, seed)?);
            bundle.datasets.insert(DataKind::Gaze.file_name(), h);
        }
        Stage::Arm => {
            let (d, h) = load::<ArmSample>(data_dir, DataKind::Arm)?;
            set_stage(&mut bundle.models, train_arm(&d, cfg, seed)?);
            bundle.datasets.insert(DataKind::Arm.file_name(), h);
        }
        Stage::EyeHand => {
            let arm = bundle.models.arm.clone().ok_or(CoreError::MissingModel("arm"))?;
            let (triplets, th) = load::<EyeHandTriplet>(data_dir, DataKind::EyeHand)?;
            let (arm_data, ah) = load::<ArmSample>(data_dir, DataKind::Arm)?;
            let (arm, eyehand) = train_eyehand(&triplets, &arm, &arm_data, cfg, seed)?;
            set_stage(&mut bundle.models, arm);
            set_stage(&mut bundle.models, eyehand);
            bundle.datasets.insert(DataKind::EyeHand.file_name(), th);
            bundle.datasets.insert(DataKind::Arm.file_name(), ah);
        }
    }
    bundle.save(models)?;
    Ok(bundle)
}

/// Adapts the bundle at `models` to the envchange dataset and saves the result at `out`.
pub fn adapt_bundle(config: &RunConfig, data_dir: &Path, models: &Path, out: &Path) -> Result<ModelBundle, FormatError> {
    if !ModelBundle::exists(models) {
        return Err(CoreError::MissingModel("eyehand").into());
    }
    let original = ModelBundle::load(models)?;
    if original.config.robot != config.robot {
        return Err(FormatError::RobotMismatch);
    }
    let eyehand = original.models.eyehand.as_ref().ok_or(CoreError::MissingModel("eyehand"))?;
    let arm = original.models.arm.as_ref().ok_or(CoreError::MissingModel("arm"))?;
    let (new, nh) = load::<EyeHandTriplet>(data_dir, DataKind::EnvChange)?;
    let (prev_arm, prev_triplets) = if config.curriculum.adapt_retain_previous {
        (load::<ArmSample>(data_dir, DataKind::Arm)?.0, load::<EyeHandTriplet>(data_dir, DataKind::EyeHand)?.0)
    } else {
        (Vec::new(), Vec::new())
    };
    let prior = PriorExperience { arm: &prev_arm, triplets: &prev_triplets };
    let (arm, eyehand) = adapt(eyehand, arm, &new, &prior, &config.curriculum)?;

    let mut bundle = ModelBundle::new(config.clone());
    bundle.models.gaze = original.models.gaze.clone();
    set_stage(&mut bundle.models, arm);
    set_stage(&mut bundle.models, eyehand);
    bundle.datasets = original.datasets.clone();
    bundle.datasets.insert(DataKind::EnvChange.file_name(), nh);
    let manifest_bytes = std::fs::read(models.join(crate::bundle::MANIFEST))?;
    bundle.adapted_from = Some(sha256_hex(&manifest_bytes));
    bundle.save(out)?;
    Ok(bundle)
}
