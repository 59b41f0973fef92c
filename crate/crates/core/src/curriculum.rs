//! Learning stages and the behaviours composed from them.
//!
//! Each stage trains one map per modality and links them with a Hebbian
//! table. Gaze maps image centroids to corrective head deltas; arm maps hand
//! positions to joint angles; eye-hand maps absolute head angles to hand
//! positions and reuses (after further training) the arm maps. Reaching runs
//! the chain backwards: look at the target, read the head pose, recall where
//! the hand was when the gaze looked there, recall the joint angles for
//! that hand position.

use alloc::string::String;
use alloc::vec::Vec;

use crate::assoc::{AssociationTable, MapSide, Side, DEFAULT_ALPHA};
use crate::datagen::{ArmSample, EyeHandTriplet, GazeSample};
use crate::error::{Error, Result};
use crate::gwr::{GwrNetwork, GwrParams};
use crate::sim::{
    apply_motor, centering_error, perceive_target, scan_for_target, CommandMode, JointGroup, KinematicModel,
    RobotState, Target, Vec3,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Stage {
    Gaze,
    Arm,
    EyeHand,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Gaze => "gaze",
            Stage::Arm => "arm",
            Stage::EyeHand => "eyehand",
        }
    }
}

/// Closed-loop gaze settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GazeSettings {
    pub tolerance_px: f64,
    pub max_steps: usize,
}

impl Default for GazeSettings {
    fn default() -> Self {
        Self { tolerance_px: 3.0, max_steps: 10 }
    }
}

/// Hyperparameters of the whole curriculum.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurriculumConfig {
    pub gaze_sensory: GwrParams,
    pub gaze_motor: GwrParams,
    pub arm_sensory: GwrParams,
    pub arm_motor: GwrParams,
    pub head_motor: GwrParams,
    pub alpha: f64,
    pub gaze: GazeSettings,
    /// Hand-to-target distance that counts as a successful reach.
    pub success_tolerance_cm: f64,
    /// Rebuild the arm table from the arm dataset as well as the eye-hand triplets.
    pub transfer_retain_arm_data: bool,
    /// When a recall winner has no associations during a reach, use the
    /// nearest neuron that has instead of giving up.
    pub connected_fallback: bool,
    /// Let adaptation rebuild the association tables from the pre-change data as well.
    pub adapt_retain_previous: bool,
    /// Multiplier on `alpha` for pairs recorded after a body change.
    pub adapt_rate_gain: f64,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            gaze_sensory: GwrParams::with_thresholds(0.5, 0.7),
            gaze_motor: GwrParams::with_thresholds(0.9, 0.3),
            arm_sensory: GwrParams::with_thresholds(0.5, 0.7),
            arm_motor: GwrParams::with_thresholds(0.1, 0.5),
            head_motor: GwrParams::with_thresholds(0.5, 0.9).max_neurons(1000),
            alpha: DEFAULT_ALPHA,
            gaze: GazeSettings::default(),
            success_tolerance_cm: 3.0,
            transfer_retain_arm_data: true,
            connected_fallback: true,
            adapt_retain_previous: true,
            adapt_rate_gain: 4.0,
        }
    }
}

/// Where a stage model came from.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub seed: u64,
    /// Samples used per training call, oldest first.
    pub samples: Vec<usize>,
    /// Free-form lineage notes, e.g. `"transfer:eyehand"`.
    pub lineage: Vec<String>,
}

/// Neuron counts and how many of them carry an association.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Connectivity {
    pub sensory_neurons: usize,
    pub sensory_connected: usize,
    pub motor_neurons: usize,
    pub motor_connected: usize,
}

/// Two trained maps and the table linking them. Side A of the table is
/// always the sensory map.
#[derive(Debug, Clone, PartialEq)]
pub struct StageModel {
    pub stage: Stage,
    pub sensory: GwrNetwork,
    pub motor: GwrNetwork,
    pub table: AssociationTable,
    pub provenance: Provenance,
}

impl StageModel {
    /// Bundles maps with a table built over them, checking consistency.
    pub fn assemble(
        stage: Stage,
        sensory: GwrNetwork,
        motor: GwrNetwork,
        table: AssociationTable,
        provenance: Provenance,
    ) -> Result<Self> {
        table.check_network(Side::A, &sensory)?;
        table.check_network(Side::B, &motor)?;
        Ok(Self { stage, sensory, motor, table, provenance })
    }

    pub fn connectivity(&self) -> Connectivity {
        Connectivity {
            sensory_neurons: self.sensory.len(),
            sensory_connected: self.table.connected(Side::A),
            motor_neurons: self.motor.len(),
            motor_connected: self.table.connected(Side::B),
        }
    }

    /// Motor vector recalled for sensory input `x`.
    pub fn sensory_to_motor(&self, x: &[f64]) -> Result<&[f64]> {
        self.table.recall(Side::A, &self.sensory, &self.motor, x)
    }

    /// Sensory vector recalled for motor input `x`.
    pub fn motor_to_sensory(&self, x: &[f64]) -> Result<&[f64]> {
        self.table.recall(Side::B, &self.motor, &self.sensory, x)
    }

    /// Recall from `from` with an optional nearest-connected fallback.
    /// Returns the recalled weight vector and whether the fallback was used.
    pub fn recall_from(&self, from: Side, x: &[f64], fallback: bool) -> Result<(&[f64], bool)> {
        let (from_net, to_net) = match from {
            Side::A => (&self.sensory, &self.motor),
            Side::B => (&self.motor, &self.sensory),
        };
        if !fallback {
            return Ok((self.table.recall(from, from_net, to_net, x)?, false));
        }
        let (j, used) = self.table.recall_index_connected(from, from_net, x)?;
        Ok((to_net.weight(j), used))
    }
}

/// Per-role seeds so that the maps of one stage do not share a shuffle stream.
fn role_seed(seed: u64, stage: Stage, role: u64) -> u64 {
    seed ^ ((stage as u64 + 1) << 40) ^ (role << 32)
}

/// Grows a fresh map on `data`.
pub fn fit_map<V: AsRef<[f64]>>(label: &str, dim: usize, params: GwrParams, seed: u64, data: &[V]) -> Result<GwrNetwork> {
    let mut net = GwrNetwork::seeded_from(dim, params, seed, data)?.with_label(label);
    net.train(data)?;
    Ok(net)
}

fn pairs_of<T, const A: usize, const B: usize>(
    items: &[T],
    f: impl Fn(&T) -> ([f64; A], [f64; B]),
) -> Vec<([f64; A], [f64; B])> {
    items.iter().map(f).collect()
}

/// Gaze stage: image centroids against the head deltas that undo them.
pub fn train_gaze(dataset: &[GazeSample], cfg: &CurriculumConfig, seed: u64) -> Result<StageModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pairs = pairs_of(dataset, |s| (s.centroid, s.inverse_delta));
    let s_data: Vec<[f64; 2]> = pairs.iter().map(|p| p.0).collect();
    let m_data: Vec<[f64; 2]> = pairs.iter().map(|p| p.1).collect();
    let sensory = fit_map("gaze-sensory", 2, cfg.gaze_sensory, role_seed(seed, Stage::Gaze, 0), &s_data)?;
    let motor = fit_map("gaze-motor", 2, cfg.gaze_motor, role_seed(seed, Stage::Gaze, 1), &m_data)?;
    let table = AssociationTable::build(&sensory, &motor, &pairs, cfg.alpha)?;
    let provenance = Provenance { seed, samples: alloc::vec![dataset.len()], lineage: Vec::new() };
    StageModel::assemble(Stage::Gaze, sensory, motor, table, provenance)
}

/// Arm stage: hand positions against joint angles.
pub fn train_arm(dataset: &[ArmSample], cfg: &CurriculumConfig, seed: u64) -> Result<StageModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pairs = pairs_of(dataset, |s| (s.position, s.angles));
    let s_data: Vec<[f64; 3]> = pairs.iter().map(|p| p.0).collect();
    let m_data: Vec<[f64; 4]> = pairs.iter().map(|p| p.1).collect();
    let sensory = fit_map("arm-sensory", 3, cfg.arm_sensory, role_seed(seed, Stage::Arm, 0), &s_data)?;
    let motor = fit_map("arm-motor", 4, cfg.arm_motor, role_seed(seed, Stage::Arm, 1), &m_data)?;
    let table = AssociationTable::build(&sensory, &motor, &pairs, cfg.alpha)?;
    let provenance = Provenance { seed, samples: alloc::vec![dataset.len()], lineage: Vec::new() };
    StageModel::assemble(Stage::Arm, sensory, motor, table, provenance)
}

/// Eye-hand stage.
///
/// Continues training the arm maps on the triplets (transfer learning),
/// rebuilds the arm table over the changed maps, then grows an absolute
/// head-pose map and links it to the hand-position map. Returns the updated
/// arm model and the eye-hand model.
pub fn train_eyehand(
    triplets: &[EyeHandTriplet],
    arm: &StageModel,
    arm_dataset: &[ArmSample],
    cfg: &CurriculumConfig,
    seed: u64,
) -> Result<(StageModel, StageModel)> {
    if arm.stage != Stage::Arm {
        return Err(Error::MissingModel("arm"));
    }
    if triplets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let retained: &[ArmSample] = if cfg.transfer_retain_arm_data { arm_dataset } else { &[] };
    let arm = continue_arm(arm, triplets, retained, cfg, "transfer:eyehand")?;
    let head_data: Vec<[f64; 2]> = triplets.iter().map(|t| t.head).collect();
    let head = fit_map("head-motor", 2, cfg.head_motor, role_seed(seed, Stage::EyeHand, 1), &head_data)?;
    let eyehand = link_eyehand(arm.sensory.clone(), head, triplets, cfg, seed)?;
    Ok((arm, eyehand))
}

/// Trains the arm maps further on `triplets` and rebuilds the arm table
/// from `retained` plus the triplets.
fn continue_arm(
    arm: &StageModel,
    triplets: &[EyeHandTriplet],
    retained: &[ArmSample],
    cfg: &CurriculumConfig,
    note: &str,
) -> Result<StageModel> {
    let s_data: Vec<[f64; 3]> = triplets.iter().map(|t| t.position).collect();
    let m_data: Vec<[f64; 4]> = triplets.iter().map(|t| t.arm).collect();
    let mut sensory = arm.sensory.clone();
    let mut motor = arm.motor.clone();
    sensory.train(&s_data)?;
    motor.train(&m_data)?;
    let pairs: Vec<([f64; 3], [f64; 4])> = retained
        .iter()
        .map(|s| (s.position, s.angles))
        .chain(triplets.iter().map(|t| (t.position, t.arm)))
        .collect();
    let table = AssociationTable::build(&sensory, &motor, &pairs, cfg.alpha)?;
    let mut provenance = arm.provenance.clone();
    provenance.samples.push(triplets.len());
    provenance.lineage.push(String::from(note));
    StageModel::assemble(Stage::Arm, sensory, motor, table, provenance)
}

fn link_eyehand(
    cartesian: GwrNetwork,
    head: GwrNetwork,
    triplets: &[EyeHandTriplet],
    cfg: &CurriculumConfig,
    seed: u64,
) -> Result<StageModel> {
    let pairs: Vec<([f64; 3], [f64; 2])> = triplets.iter().map(|t| (t.position, t.head)).collect();
    let table = AssociationTable::build(&cartesian, &head, &pairs, cfg.alpha)?;
    let provenance = Provenance { seed, samples: alloc::vec![triplets.len()], lineage: Vec::new() };
    StageModel::assemble(Stage::EyeHand, cartesian, head, table, provenance)
}

/// Experience gathered before a body change.
#[derive(Debug, Clone, Copy, Default)]
pub struct PriorExperience<'a> {
    pub arm: &'a [ArmSample],
    pub triplets: &'a [EyeHandTriplet],
}

/// Adapts trained eye-hand and arm models to data recorded after a body change.
///
/// The maps continue training on the new triplets only. With
/// `adapt_retain_previous` the association tables are rebuilt from the prior
/// experience first and the new pairs are added on top at
/// `alpha * adapt_rate_gain`; otherwise the tables hold the new pairs alone.
/// The inputs are left untouched; updated copies are returned as `(arm, eyehand)`.
pub fn adapt(
    eyehand: &StageModel,
    arm: &StageModel,
    triplets: &[EyeHandTriplet],
    previous: &PriorExperience<'_>,
    cfg: &CurriculumConfig,
) -> Result<(StageModel, StageModel)> {
    if eyehand.stage != Stage::EyeHand {
        return Err(Error::MissingModel("eyehand"));
    }
    if arm.stage != Stage::Arm {
        return Err(Error::MissingModel("arm"));
    }
    if triplets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(cfg.adapt_rate_gain.is_finite() && cfg.adapt_rate_gain > 0.0) {
        return Err(Error::InvalidParams("adapt_rate_gain must be positive"));
    }
    let (mut sensory, mut motor, mut head) = (arm.sensory.clone(), arm.motor.clone(), eyehand.motor.clone());
    sensory.train(&triplets.iter().map(|t| t.position).collect::<Vec<_>>())?;
    motor.train(&triplets.iter().map(|t| t.arm).collect::<Vec<_>>())?;
    head.train(&triplets.iter().map(|t| t.head).collect::<Vec<_>>())?;

    let new_arm: Vec<([f64; 3], [f64; 4])> = triplets.iter().map(|t| (t.position, t.arm)).collect();
    let new_head: Vec<([f64; 3], [f64; 2])> = triplets.iter().map(|t| (t.position, t.head)).collect();
    let rate = cfg.alpha * cfg.adapt_rate_gain;
    let (arm_table, head_table) = if cfg.adapt_retain_previous && !(previous.arm.is_empty() && previous.triplets.is_empty()) {
        let old_arm: Vec<([f64; 3], [f64; 4])> = previous
            .arm
            .iter()
            .map(|s| (s.position, s.angles))
            .chain(previous.triplets.iter().map(|t| (t.position, t.arm)))
            .collect();
        let mut arm_table = AssociationTable::build(&sensory, &motor, &old_arm, cfg.alpha)?;
        arm_table.accumulate(&sensory, &motor, &new_arm, rate)?;
        let mut head_table = AssociationTable::new(MapSide::of(&sensory), MapSide::of(&head), cfg.alpha)?;
        let old_head: Vec<([f64; 3], [f64; 2])> = previous.triplets.iter().map(|t| (t.position, t.head)).collect();
        head_table.accumulate(&sensory, &head, &old_head, cfg.alpha)?;
        head_table.accumulate(&sensory, &head, &new_head, rate)?;
        (arm_table, head_table)
    } else {
        (
            AssociationTable::build(&sensory, &motor, &new_arm, cfg.alpha)?,
            AssociationTable::build(&sensory, &head, &new_head, cfg.alpha)?,
        )
    };

    let mut arm_prov = arm.provenance.clone();
    arm_prov.samples.push(triplets.len());
    arm_prov.lineage.push(String::from("adapt"));
    let mut eh_prov = eyehand.provenance.clone();
    eh_prov.samples.push(triplets.len());
    eh_prov.lineage.push(String::from("adapt"));
    let arm = StageModel::assemble(Stage::Arm, sensory.clone(), motor, arm_table, arm_prov)?;
    let eyehand = StageModel::assemble(Stage::EyeHand, sensory, head, head_table, eh_prov)?;
    Ok((arm, eyehand))
}

/// Chooses a head command from the current view.
pub trait GazePolicy {
    fn head_command(&self, kin: &KinematicModel, state: &RobotState, centroid: [f64; 2], target: &Target)
        -> Result<[f64; 2]>;
}

/// Learned gaze: recall the inverse delta associated with the centroid.
impl GazePolicy for StageModel {
    fn head_command(&self, _: &KinematicModel, _: &RobotState, centroid: [f64; 2], _: &Target) -> Result<[f64; 2]> {
        let m = self.sensory_to_motor(&centroid)?;
        Ok([m[0], m[1]])
    }
}

/// Reference controller that knows where the target is.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticGaze;

impl GazePolicy for AnalyticGaze {
    fn head_command(&self, kin: &KinematicModel, state: &RobotState, _: [f64; 2], target: &Target) -> Result<[f64; 2]> {
        let want = kin.centering_angles(&target.position).ok_or(Error::NoAssociation(0))?;
        Ok([want[0] - state.head[0], want[1] - state.head[1]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GazeStop {
    Centered,
    StepCap,
    LostTarget,
    NoAssociation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeOutcome {
    pub state: RobotState,
    pub centroid: Option<[f64; 2]>,
    /// Distance of the ball from the image centre. When the ball left the
    /// frame this is measured on the analytic projection of its centre.
    pub error_px: f64,
    pub steps: usize,
    pub stop: GazeStop,
}

impl GazeOutcome {
    pub fn centered(&self) -> bool {
        self.stop == GazeStop::Centered
    }
}

/// Applies gaze commands until the ball is within tolerance of the image
/// centre or the step budget runs out. Fails if the ball is not in view.
pub fn gaze_control<P: GazePolicy + ?Sized>(
    policy: &P,
    kin: &KinematicModel,
    state: &RobotState,
    target: &Target,
    settings: &GazeSettings,
) -> Result<GazeOutcome> {
    let mut state = *state;
    let mut centroid = perceive_target(kin, &state, target).ok_or(Error::NotInView)?;
    let mut steps = 0;
    loop {
        let error_px = centering_error(centroid);
        let outcome = |stop| GazeOutcome { state, centroid: Some(centroid), error_px, steps, stop };
        if error_px <= settings.tolerance_px {
            return Ok(outcome(GazeStop::Centered));
        }
        if steps >= settings.max_steps {
            return Ok(outcome(GazeStop::StepCap));
        }
        let cmd = match policy.head_command(kin, &state, centroid, target) {
            Ok(c) => c,
            Err(Error::NoAssociation(_)) => return Ok(outcome(GazeStop::NoAssociation)),
            Err(e) => return Err(e),
        };
        state = apply_motor(kin, &state, JointGroup::Head, &cmd, CommandMode::Delta)?.state;
        steps += 1;
        match perceive_target(kin, &state, target) {
            Some(c) => centroid = c,
            None => {
                let error_px = kin
                    .project(&state.head, &target.position)
                    .map(centering_error)
                    .unwrap_or(f64::INFINITY);
                return Ok(GazeOutcome { state, centroid: None, error_px, steps, stop: GazeStop::LostTarget });
            }
        }
    }
}

/// Finds the ball (searching if needed) and centres it.
pub fn look_at<P: GazePolicy + ?Sized>(
    policy: &P,
    kin: &KinematicModel,
    state: &RobotState,
    target: &Target,
    settings: &GazeSettings,
) -> Result<Option<GazeOutcome>> {
    let Some(hit) = scan_for_target(kin, state, target) else {
        return Ok(None);
    };
    let out = gaze_control(policy, kin, &hit.state, target, settings)?;
    if out.stop == GazeStop::LostTarget {
        if let Some(hit) = scan_for_target(kin, &out.state, target) {
            return gaze_control(policy, kin, &hit.state, target, settings).map(Some);
        }
    }
    Ok(Some(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachStatus {
    Success,
    /// The arm moved but ended outside the tolerance.
    Missed,
    /// The ball was never seen.
    NotFound,
    /// A recall step hit a neuron without associations; the arm did not move.
    NoAssociation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachOutcome {
    pub state: RobotState,
    /// Ball position in the open grasp after the movement.
    pub grasp: Vec3,
    pub error_cm: f64,
    pub gaze_error_px: Option<f64>,
    /// A recall step fell back to the nearest connected neuron.
    pub fallback: bool,
    pub status: ReachStatus,
}

impl ReachOutcome {
    pub fn success(&self) -> bool {
        self.status == ReachStatus::Success
    }
}

/// Looks at the target, maps the head pose to a hand position and that to
/// joint angles, then moves the arm.
pub fn reach(
    gaze: &StageModel,
    eyehand: &StageModel,
    arm: &StageModel,
    kin: &KinematicModel,
    state: &RobotState,
    target: &Target,
    cfg: &CurriculumConfig,
) -> Result<ReachOutcome> {
    let finish = |state: RobotState, gaze_error_px, fallback, status| -> Result<ReachOutcome> {
        let grasp = kin.grasp_point(&state.arm)?;
        let error_cm = (grasp - target.position).norm();
        let status = match status {
            ReachStatus::Success if error_cm > cfg.success_tolerance_cm => ReachStatus::Missed,
            s => s,
        };
        Ok(ReachOutcome { state, grasp, error_cm, gaze_error_px, fallback, status })
    };

    let Some(looked) = look_at(gaze, kin, state, target, &cfg.gaze)? else {
        return finish(*state, None, false, ReachStatus::NotFound);
    };
    let gaze_error = Some(looked.error_px);
    arm.table.check_network(Side::A, &eyehand.sensory)?;
    let (hand, used_a) = match eyehand.recall_from(Side::B, &looked.state.head, cfg.connected_fallback) {
        Ok(r) => r,
        Err(Error::NoAssociation(_)) => return finish(looked.state, gaze_error, false, ReachStatus::NoAssociation),
        Err(e) => return Err(e),
    };
    let (angles, used_b) = match arm.recall_from(Side::A, hand, cfg.connected_fallback) {
        Ok(r) => r,
        Err(Error::NoAssociation(_)) => return finish(looked.state, gaze_error, used_a, ReachStatus::NoAssociation),
        Err(e) => return Err(e),
    };
    let moved = apply_motor(kin, &looked.state, JointGroup::Arm, angles, CommandMode::Absolute)?.state;
    finish(moved, gaze_error, used_a || used_b, ReachStatus::Success)
}

/// Moves the hand toward a Cartesian point with the arm model alone.
pub fn point_reach(arm: &StageModel, kin: &KinematicModel, state: &RobotState, point: &Vec3) -> Result<(RobotState, f64)> {
    let angles = match arm.sensory_to_motor(point.as_slice()) {
        Ok(a) => a,
        Err(Error::NoAssociation(_)) => return Ok((*state, (kin.forward_kinematics(&state.arm)? - point).norm())),
        Err(e) => return Err(e),
    };
    let moved = apply_motor(kin, state, JointGroup::Arm, angles, CommandMode::Absolute)?.state;
    let hand = kin.forward_kinematics(&moved.arm)?;
    Ok((moved, (hand - point).norm()))
}
