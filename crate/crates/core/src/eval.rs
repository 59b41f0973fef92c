//! Trial sampling and error statistics.
//!
//! Each repeat draws its own trial set from a ChaCha stream selected by the
//! repeat index, so repeats are independent and can run in any order.
//! Statistics are computed per repeat and then averaged across repeats.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curriculum::{gaze_control, point_reach, reach, CurriculumConfig, Stage, StageModel};
use crate::error::{Error, Result};
use crate::sim::{
    perceive_target, KinematicModel, RobotState, Target, Vec3, ARM_JOINTS, IMAGE_HEIGHT, IMAGE_WIDTH,
    SHOULDER_ROTATION_JOINT,
};

/// Margin kept from the image border when placing gaze test targets, pixels.
const GAZE_TARGET_MARGIN_PX: f64 = 4.0;
const GAZE_TARGET_DEPTH_CM: [f64; 2] = [25.0, 60.0];

/// Trained models available to an evaluation.
#[derive(Debug, Clone, Default)]
pub struct ModelSet {
    pub gaze: Option<StageModel>,
    pub arm: Option<StageModel>,
    pub eyehand: Option<StageModel>,
}

impl ModelSet {
    fn need(&self, stage: Stage) -> Result<&StageModel> {
        match stage {
            Stage::Gaze => self.gaze.as_ref().ok_or(Error::MissingModel("gaze")),
            Stage::Arm => self.arm.as_ref().ok_or(Error::MissingModel("arm")),
            Stage::EyeHand => self.eyehand.as_ref().ok_or(Error::MissingModel("eyehand")),
        }
    }
}

/// One evaluation trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trial {
    /// Start pose and a target somewhere in its view.
    Gaze { state: RobotState, target: Target },
    /// A reachable hand position.
    Point { point: Vec3 },
    /// A ball at a reachable grasp point.
    Reach { target: Target },
}

pub fn repeat_rng(seed: u64, repeat: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat);
    rng
}

fn random_arm_config<R: Rng>(kin: &KinematicModel, rng: &mut R) -> [f64; ARM_JOINTS] {
    core::array::from_fn(|j| rng.random_range(kin.arm_limits[j].min..=kin.arm_limits[j].max))
}

/// Draws `trials` trials for `stage`. Reach targets come from the unlocked
/// workspace even when the robot under test is locked.
pub fn sample_trials<R: Rng>(stage: Stage, kin: &KinematicModel, trials: usize, rng: &mut R) -> Result<Vec<Trial>> {
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let trial = match stage {
            Stage::Gaze => {
                let head = [
                    rng.random_range(kin.head_limits[0].min..=kin.head_limits[0].max),
                    rng.random_range(kin.head_limits[1].min..=kin.head_limits[1].max),
                ];
                let m = GAZE_TARGET_MARGIN_PX;
                let pixel = [
                    rng.random_range(m..=IMAGE_WIDTH as f64 - m),
                    rng.random_range(m..=IMAGE_HEIGHT as f64 - m),
                ];
                let depth = rng.random_range(GAZE_TARGET_DEPTH_CM[0]..=GAZE_TARGET_DEPTH_CM[1]);
                let state = RobotState::default().with_head(head);
                Trial::Gaze { state, target: Target::at(kin.back_project(&head, pixel, depth)) }
            }
            Stage::Arm => Trial::Point { point: kin.forward_kinematics(&random_arm_config(kin, rng))? },
            Stage::EyeHand => Trial::Reach { target: Target::at(kin.grasp_point(&random_arm_config(kin, rng))?) },
        };
        out.push(trial);
    }
    Ok(out)
}

/// Result of one trial: error in pixels (gaze) or centimetres, and success.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub error: f64,
    pub success: bool,
}

/// Runs one trial. `locked` locks the shoulder rotation joint at zero.
pub fn run_trial(
    trial: &Trial,
    models: &ModelSet,
    kin: &KinematicModel,
    cfg: &CurriculumConfig,
    locked: bool,
) -> Result<TrialResult> {
    let mut start = RobotState::default();
    if locked {
        start = start.lock_arm_joint(SHOULDER_ROTATION_JOINT, 0.0);
    }
    match trial {
        Trial::Gaze { state, target } => {
            let gaze = models.need(Stage::Gaze)?;
            if perceive_target(kin, state, target).is_none() {
                return Err(Error::NotInView);
            }
            let out = gaze_control(gaze, kin, state, target, &cfg.gaze)?;
            Ok(TrialResult { error: out.error_px, success: out.centered() })
        }
        Trial::Point { point } => {
            let arm = models.need(Stage::Arm)?;
            let (_, error) = point_reach(arm, kin, &start, point)?;
            Ok(TrialResult { error, success: error <= cfg.success_tolerance_cm })
        }
        Trial::Reach { target } => {
            let gaze = models.need(Stage::Gaze)?;
            let arm = models.need(Stage::Arm)?;
            let eyehand = models.need(Stage::EyeHand)?;
            let out = reach(gaze, eyehand, arm, kin, &start, target, cfg)?;
            Ok(TrialResult { error: out.error_cm, success: out.success() })
        }
    }
}

/// All trials of one repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatResult {
    pub repeat: u64,
    pub results: Vec<TrialResult>,
}

impl RepeatResult {
    pub fn errors(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.error).collect()
    }

    pub fn successes(&self) -> usize {
        self.results.iter().filter(|r| r.success).count()
    }

    pub fn summary(&self) -> Option<ErrorSummary> {
        summarize(&self.errors())
    }
}

/// Samples and runs one repeat.
#[allow(clippy::too_many_arguments)]
pub fn run_repeat(
    stage: Stage,
    models: &ModelSet,
    kin: &KinematicModel,
    cfg: &CurriculumConfig,
    trials: usize,
    seed: u64,
    repeat: u64,
    locked: bool,
) -> Result<RepeatResult> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1"));
    }
    let set = sample_trials(stage, kin, trials, &mut repeat_rng(seed, repeat))?;
    let results = set.iter().map(|t| run_trial(t, models, kin, cfg, locked)).collect::<Result<Vec<_>>>()?;
    Ok(RepeatResult { repeat, results })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

/// Median of the values; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

pub fn summarize(values: &[f64]) -> Option<ErrorSummary> {
    let median = median(values)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Some(ErrorSummary { median, min, max, mean, count: values.len() })
}

/// Mean and sample standard deviation (zero for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len();
    if n == 0 {
        return MeanStd::default();
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
    } else {
        0.0
    };
    MeanStd { mean, std }
}

/// Stage statistics aggregated over repeats.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub stage: Stage,
    pub locked: bool,
    pub trials: usize,
    pub repeats: usize,
    /// `"px"` for gaze, `"cm"` otherwise.
    pub unit: String,
    pub median: MeanStd,
    pub min: MeanStd,
    pub max: MeanStd,
    pub successes: MeanStd,
    pub success_rate: MeanStd,
    pub config_digest: String,
}

impl EvalReport {
    pub fn from_repeats(
        stage: Stage,
        locked: bool,
        trials: usize,
        repeats: &[RepeatResult],
        config_digest: String,
    ) -> Result<Self> {
        let summaries: Vec<ErrorSummary> = repeats.iter().filter_map(RepeatResult::summary).collect();
        if summaries.is_empty() || summaries.len() != repeats.len() {
            return Err(Error::EmptyDataset);
        }
        let pick = |f: fn(&ErrorSummary) -> f64| mean_std(&summaries.iter().map(f).collect::<Vec<_>>());
        let successes: Vec<f64> = repeats.iter().map(|r| r.successes() as f64).collect();
        let rates: Vec<f64> = successes.iter().map(|s| s / trials as f64).collect();
        Ok(Self {
            stage,
            locked,
            trials,
            repeats: repeats.len(),
            unit: String::from(if stage == Stage::Gaze { "px" } else { "cm" }),
            median: pick(|s| s.median),
            min: pick(|s| s.min),
            max: pick(|s| s.max),
            successes: mean_std(&successes),
            success_rate: mean_std(&rates),
            config_digest,
        })
    }
}
