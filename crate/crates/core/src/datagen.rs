//! Motor babbling and dataset assembly.
//!
//! Augmentation interpolates between consecutive babbling commands and runs
//! every interpolated command through the simulator, so sensory values are
//! always measured, never interpolated.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curriculum::{look_at, GazePolicy, GazeSettings};
use crate::error::Result;
use crate::sim::{
    apply_motor, apply_motor_noisy, perceive_target, place_ball_in_hand, CommandMode, JointGroup, KinematicModel,
    RobotState, Target, ARM_JOINTS, SHOULDER_ROTATION_JOINT,
};

/// Image centroid and the head delta that re-centres it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GazeSample {
    /// Pixels.
    pub centroid: [f64; 2],
    /// Degrees; the additive inverse of the executed head delta.
    pub inverse_delta: [f64; 2],
}

/// Hand position and the joint angles producing it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArmSample {
    /// Centimetres, torso frame.
    pub position: [f64; 3],
    /// Degrees.
    pub angles: [f64; 4],
}

/// Hand position, arm angles and the head pose that centred the hand.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EyeHandTriplet {
    pub position: [f64; 3],
    pub arm: [f64; 4],
    pub head: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BabbleConfig {
    /// Head deltas are uniform in `[-a, a]` per joint, degrees.
    pub head_amplitude_deg: f64,
    /// Range of distances at which the gaze target is placed on the optical axis.
    pub gaze_depth_cm: [f64; 2],
    /// Spacing of interpolated gaze commands, degrees (infinity norm).
    pub gaze_interp_spacing_deg: f64,
    /// Interpolated arm configurations between consecutive babbles.
    pub arm_interp_points: usize,
    /// Joint noise added on execution; zero disables it.
    pub noise_std_deg: f64,
    pub gaze: GazeSettings,
}

impl Default for BabbleConfig {
    fn default() -> Self {
        Self {
            head_amplitude_deg: 15.0,
            gaze_depth_cm: [25.0, 60.0],
            gaze_interp_spacing_deg: 2.4,
            arm_interp_points: 14,
            noise_std_deg: 0.0,
            gaze: GazeSettings::default(),
        }
    }
}

fn lerp<const N: usize>(a: &[f64; N], b: &[f64; N], t: f64) -> [f64; N] {
    core::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
}

/// Executes a head delta from `state` and perceives the ball.
fn gaze_probe(
    kin: &KinematicModel,
    state: &RobotState,
    target: &Target,
    delta: [f64; 2],
    cfg: &BabbleConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(RobotState, Option<GazeSample>)> {
    let moved =
        apply_motor_noisy(kin, state, JointGroup::Head, &delta, CommandMode::Delta, cfg.noise_std_deg, rng)?.state;
    let executed = [moved.head[0] - state.head[0], moved.head[1] - state.head[1]];
    let sample = perceive_target(kin, &moved, target)
        .map(|centroid| GazeSample { centroid, inverse_delta: [-executed[0], -executed[1]] });
    Ok((moved, sample))
}

/// Gaze babbling: centre the ball, make a random head move, record where
/// the ball went together with the inverse of the executed move.
pub fn gen_gaze_dataset(kin: &KinematicModel, iterations: usize, seed: u64, cfg: &BabbleConfig) -> Result<Vec<GazeSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = RobotState::default();
    // (start state, target, commanded delta) per babble
    let mut babbles: Vec<(RobotState, Target, [f64; 2])> = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let depth = rng.random_range(cfg.gaze_depth_cm[0]..=cfg.gaze_depth_cm[1]);
        let target = Target::at(kin.point_on_axis(&state.head, depth));
        let a = cfg.head_amplitude_deg;
        let delta = [rng.random_range(-a..=a), rng.random_range(-a..=a)];
        babbles.push((state, target, delta));
        state = apply_motor(kin, &state, JointGroup::Head, &delta, CommandMode::Delta)?.state;
    }

    let mut out = Vec::new();
    for (i, (start, target, delta)) in babbles.iter().enumerate() {
        let (_, sample) = gaze_probe(kin, start, target, *delta, cfg, &mut rng)?;
        out.extend(sample);
        let Some((_, _, next)) = babbles.get(i + 1) else { continue };
        let span = (next[0] - delta[0]).abs().max((next[1] - delta[1]).abs());
        let n = libm::floor(span / cfg.gaze_interp_spacing_deg) as usize;
        for k in 1..=n {
            let cmd = lerp(delta, next, k as f64 / (n + 1) as f64);
            let (_, sample) = gaze_probe(kin, start, target, cmd, cfg, &mut rng)?;
            out.extend(sample);
        }
    }
    Ok(out)
}

fn random_arm<R: Rng>(kin: &KinematicModel, state: &RobotState, rng: &mut R) -> [f64; ARM_JOINTS] {
    core::array::from_fn(|j| match state.arm_locks[j] {
        Some(v) => v,
        None => rng.random_range(kin.arm_limits[j].min..=kin.arm_limits[j].max),
    })
}

fn arm_sample(
    kin: &KinematicModel,
    state: &RobotState,
    cmd: &[f64; ARM_JOINTS],
    cfg: &BabbleConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ArmSample> {
    let moved = apply_motor_noisy(kin, state, JointGroup::Arm, cmd, CommandMode::Absolute, cfg.noise_std_deg, rng)?;
    let hand = kin.forward_kinematics(&moved.state.arm)?;
    let angles = if cfg.noise_std_deg > 0.0 { *cmd } else { moved.state.arm };
    Ok(ArmSample { position: [hand.x, hand.y, hand.z], angles })
}

/// Arm babbling: random in-limit configurations and their hand positions,
/// with `arm_interp_points` joint-space interpolations between neighbours.
pub fn gen_arm_dataset(kin: &KinematicModel, iterations: usize, seed: u64, cfg: &BabbleConfig) -> Result<Vec<ArmSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = RobotState::default();
    let commands: Vec<[f64; ARM_JOINTS]> = (0..iterations).map(|_| random_arm(kin, &state, &mut rng)).collect();
    let mut out = Vec::with_capacity(iterations * (cfg.arm_interp_points + 1));
    for (i, cmd) in commands.iter().enumerate() {
        out.push(arm_sample(kin, &state, cmd, cfg, &mut rng)?);
        let Some(next) = commands.get(i + 1) else { continue };
        let k = cfg.arm_interp_points;
        for j in 1..=k {
            let mid = lerp(cmd, next, j as f64 / (k + 1) as f64);
            out.push(arm_sample(kin, &state, &mid, cfg, &mut rng)?);
        }
    }
    Ok(out)
}

/// Eye-hand babbling: random arm pose, ball in the grasp, gaze brings the
/// ball to the image centre. Iterations where the ball cannot be centred are
/// cancelled. Locks in `start` stay in force.
pub fn gen_eyehand_from<P: GazePolicy + ?Sized>(
    kin: &KinematicModel,
    start: RobotState,
    iterations: usize,
    gaze: &P,
    seed: u64,
    cfg: &BabbleConfig,
) -> Result<Vec<EyeHandTriplet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = start;
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let cmd = random_arm(kin, &state, &mut rng);
        state = apply_motor_noisy(kin, &state, JointGroup::Arm, &cmd, CommandMode::Absolute, cfg.noise_std_deg, &mut rng)?
            .state;
        let ball = place_ball_in_hand(kin, &state)?;
        let Some(looked) = look_at(gaze, kin, &state, &ball, &cfg.gaze)? else {
            continue;
        };
        state = looked.state;
        if !looked.centered() {
            continue;
        }
        let hand = kin.forward_kinematics(&state.arm)?;
        out.push(EyeHandTriplet { position: [hand.x, hand.y, hand.z], arm: state.arm, head: state.head });
    }
    Ok(out)
}

pub fn gen_eyehand_dataset<P: GazePolicy + ?Sized>(
    kin: &KinematicModel,
    iterations: usize,
    gaze: &P,
    seed: u64,
    cfg: &BabbleConfig,
) -> Result<Vec<EyeHandTriplet>> {
    gen_eyehand_from(kin, RobotState::default(), iterations, gaze, seed, cfg)
}

/// Eye-hand babbling with the shoulder rotation joint locked at zero.
pub fn gen_envchange_dataset<P: GazePolicy + ?Sized>(
    kin: &KinematicModel,
    iterations: usize,
    gaze: &P,
    seed: u64,
    cfg: &BabbleConfig,
) -> Result<Vec<EyeHandTriplet>> {
    let start = RobotState::default().lock_arm_joint(SHOULDER_ROTATION_JOINT, 0.0);
    gen_eyehand_from(kin, start, iterations, gaze, seed, cfg)
}
