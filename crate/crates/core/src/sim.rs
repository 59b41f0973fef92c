//! Analytic humanoid stand-in: a pan/tilt head carrying a single pinhole
//! camera and a four-joint right arm (three shoulder joints and an elbow).
//!
//! Frames: the torso frame has `x` forward, `y` to the robot's left and `z`
//! up, in centimetres. Joint angles are in degrees. The camera looks along
//! its local `x`; image `u` grows to the right and `v` grows downward.

use alloc::vec::Vec;

use nalgebra::{Rotation3, Unit, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

pub const IMAGE_WIDTH: usize = 80;
pub const IMAGE_HEIGHT: usize = 60;
pub const IMAGE_CENTER: [f64; 2] = [IMAGE_WIDTH as f64 / 2.0, IMAGE_HEIGHT as f64 / 2.0];
pub const BALL_RADIUS_CM: f64 = 2.5;
pub const HEAD_JOINTS: usize = 2;
pub const ARM_JOINTS: usize = 4;
/// Arm joint rotating the upper arm inward and outward.
pub const SHOULDER_ROTATION_JOINT: usize = 2;

/// Sub-samples per pixel side when rasterizing the ball.
const SUPERSAMPLE: usize = 4;
/// Minimum forward distance of the ball centre from the camera.
const NEAR_PLANE_CM: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointLimit {
    pub min: f64,
    pub max: f64,
}

impl JointLimit {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, angle: f64) -> bool {
        angle >= self.min && angle <= self.max
    }

    pub fn clamp(&self, angle: f64) -> f64 {
        angle.clamp(self.min, self.max)
    }
}

/// Link table, joint limits and camera intrinsics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KinematicModel {
    /// Origin of the neck yaw axis (vertical) in the torso frame.
    pub neck_yaw_origin: [f64; 3],
    /// Pitch axis origin relative to the yaw frame.
    pub neck_pitch_offset: [f64; 3],
    /// Camera centre relative to the pitch frame.
    pub camera_offset: [f64; 3],
    /// Right shoulder joint centre in the torso frame.
    pub shoulder: [f64; 3],
    /// Rotation axes of the four arm joints, each in its parent frame.
    pub arm_axes: [[f64; 3]; ARM_JOINTS],
    pub upper_arm_cm: f64,
    pub forearm_cm: f64,
    /// Ball centre in the open grasp, relative to the hand in the forearm frame.
    pub grasp_offset: [f64; 3],
    pub focal_px: f64,
    pub principal_point: [f64; 2],
    pub head_limits: [JointLimit; HEAD_JOINTS],
    pub arm_limits: [JointLimit; ARM_JOINTS],
}

impl Default for KinematicModel {
    /// Child-sized humanoid: camera 20 cm above and 12 cm inboard of the
    /// right shoulder, 15 cm upper arm and forearm, arm pointing forward at
    /// zero angles.
    fn default() -> Self {
        Self {
            neck_yaw_origin: [0.0, 0.0, 14.0],
            neck_pitch_offset: [0.0, 0.0, 4.0],
            camera_offset: [5.0, -3.0, 2.0],
            shoulder: [0.0, -12.0, 0.0],
            // flexion (raise forward), abduction (swing outward), upper-arm
            // rotation, elbow flexion
            arm_axes: [[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]],
            upper_arm_cm: 15.0,
            forearm_cm: 15.0,
            grasp_offset: [3.0, 0.0, 0.0],
            focal_px: 60.0,
            principal_point: IMAGE_CENTER,
            head_limits: [JointLimit::new(-60.0, 60.0), JointLimit::new(-45.0, 45.0)],
            arm_limits: [
                JointLimit::new(0.0, 60.0),
                JointLimit::new(-45.0, 15.0),
                JointLimit::new(-30.0, 30.0),
                JointLimit::new(0.0, 60.0),
            ],
        }
    }
}

fn v(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn rot(axis: [f64; 3], deg: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(v(axis)), deg.to_radians())
}

/// Camera placement in the torso frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub position: Vec3,
    pub rotation: Rotation3<f64>,
}

impl CameraPose {
    /// Point expressed in the camera frame.
    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        self.rotation.inverse() * (p - self.position)
    }
}

/// Arm frames produced by forward kinematics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPose {
    pub elbow: Vec3,
    pub hand: Vec3,
    /// Orientation of the forearm frame.
    pub forearm: Rotation3<f64>,
}

impl KinematicModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.upper_arm_cm > 0.0 && self.forearm_cm > 0.0) {
            return Err(Error::InvalidModel("link lengths must be positive"));
        }
        if self.focal_px.is_nan() || self.focal_px <= 0.0 {
            return Err(Error::InvalidModel("focal length must be positive"));
        }
        let [cx, cy] = self.principal_point;
        if !(cx > 0.0 && cx < IMAGE_WIDTH as f64 && cy > 0.0 && cy < IMAGE_HEIGHT as f64) {
            return Err(Error::InvalidModel("principal point outside the image"));
        }
        if self.arm_axes.iter().any(|a| v(*a).norm() < 1e-12) {
            return Err(Error::InvalidModel("zero joint axis"));
        }
        if self.head_limits.iter().chain(&self.arm_limits).any(|l| l.min.is_nan() || l.max.is_nan() || l.min > l.max) {
            return Err(Error::InvalidModel("joint limit min exceeds max"));
        }
        Ok(())
    }

    /// Upper bound on hand speed per radian of joint motion.
    pub fn total_reach_cm(&self) -> f64 {
        self.upper_arm_cm + self.forearm_cm + v(self.grasp_offset).norm()
    }

    fn check_arm(&self, arm: &[f64; ARM_JOINTS]) -> Result<()> {
        for (joint, (&angle, lim)) in arm.iter().zip(&self.arm_limits).enumerate() {
            if !lim.contains(angle) {
                return Err(Error::JointOutOfLimits { joint, angle, min: lim.min, max: lim.max });
            }
        }
        Ok(())
    }

    /// Elbow, hand and forearm orientation, without limit checks.
    pub fn arm_pose_unchecked(&self, arm: &[f64; ARM_JOINTS]) -> ArmPose {
        let upper = rot(self.arm_axes[0], arm[0]) * rot(self.arm_axes[1], arm[1]) * rot(self.arm_axes[2], arm[2]);
        let elbow = v(self.shoulder) + upper * Vec3::new(self.upper_arm_cm, 0.0, 0.0);
        let forearm = upper * rot(self.arm_axes[3], arm[3]);
        let hand = elbow + forearm * Vec3::new(self.forearm_cm, 0.0, 0.0);
        ArmPose { elbow, hand, forearm }
    }

    /// Hand position in the torso frame.
    pub fn forward_kinematics(&self, arm: &[f64; ARM_JOINTS]) -> Result<Vec3> {
        self.check_arm(arm)?;
        Ok(self.arm_pose_unchecked(arm).hand)
    }

    /// Ball centre when held in the open grasp.
    pub fn grasp_point(&self, arm: &[f64; ARM_JOINTS]) -> Result<Vec3> {
        self.check_arm(arm)?;
        let pose = self.arm_pose_unchecked(arm);
        Ok(pose.hand + pose.forearm * v(self.grasp_offset))
    }

    pub fn camera_pose(&self, head: &[f64; HEAD_JOINTS]) -> CameraPose {
        let yaw = rot([0.0, 0.0, 1.0], head[0]);
        let rotation = yaw * rot([0.0, 1.0, 0.0], head[1]);
        let position = v(self.neck_yaw_origin) + yaw * v(self.neck_pitch_offset) + rotation * v(self.camera_offset);
        CameraPose { position, rotation }
    }

    /// Pinhole projection of `p`, or `None` when it is not in front of the camera.
    pub fn project(&self, head: &[f64; HEAD_JOINTS], p: &Vec3) -> Option<[f64; 2]> {
        let c = self.camera_pose(head).to_camera(p);
        if c.x <= NEAR_PLANE_CM {
            return None;
        }
        let [cx, cy] = self.principal_point;
        Some([cx - self.focal_px * c.y / c.x, cy - self.focal_px * c.z / c.x])
    }

    /// Point on the optical axis `depth_cm` in front of the camera.
    pub fn point_on_axis(&self, head: &[f64; HEAD_JOINTS], depth_cm: f64) -> Vec3 {
        let pose = self.camera_pose(head);
        pose.position + pose.rotation * Vec3::new(depth_cm, 0.0, 0.0)
    }

    /// Point seen at pixel `(u, v)` at forward distance `depth_cm`.
    pub fn back_project(&self, head: &[f64; HEAD_JOINTS], pixel: [f64; 2], depth_cm: f64) -> Vec3 {
        let pose = self.camera_pose(head);
        let [cx, cy] = self.principal_point;
        let y = -(pixel[0] - cx) * depth_cm / self.focal_px;
        let z = -(pixel[1] - cy) * depth_cm / self.focal_px;
        pose.position + pose.rotation * Vec3::new(depth_cm, y, z)
    }

    /// Head angles that put `p` on the optical axis, ignoring joint limits.
    ///
    /// Solved by fixed-point iteration, since the camera sits off both axes.
    pub fn centering_angles(&self, p: &Vec3) -> Option<[f64; 2]> {
        let mut head = [0.0, 0.0];
        for _ in 0..64 {
            let c = self.camera_pose(&head).to_camera(p);
            if c.x <= NEAR_PLANE_CM {
                return None;
            }
            let dyaw = libm::atan2(c.y, c.x).to_degrees();
            let dpitch = libm::atan2(-c.z, libm::hypot(c.x, c.y)).to_degrees();
            head[0] += dyaw;
            head[1] += dpitch;
            if dyaw.abs() < 1e-10 && dpitch.abs() < 1e-10 {
                return Some(head);
            }
        }
        None
    }

    /// Projected disk of the ball: centre and radius in pixels.
    pub fn ball_disk(&self, head: &[f64; HEAD_JOINTS], target: &Target) -> Option<([f64; 2], f64)> {
        let c = self.camera_pose(head).to_camera(&target.position);
        if c.x <= NEAR_PLANE_CM || c.norm() <= target.radius {
            return None;
        }
        let [cx, cy] = self.principal_point;
        let center = [cx - self.focal_px * c.y / c.x, cy - self.focal_px * c.z / c.x];
        let radius = self.focal_px * target.radius / libm::sqrt(c.norm_squared() - target.radius * target.radius);
        Some((center, radius))
    }
}

/// The red ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub position: Vec3,
    pub radius: f64,
}

impl Target {
    pub fn at(position: Vec3) -> Self {
        Self { position, radius: BALL_RADIUS_CM }
    }
}

/// Centroid of the detected ball in the image, if any pixel passed the threshold.
pub type Percept = Option<[f64; 2]>;

/// Single-channel 80x60 image; each pixel holds the ball's area coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub data: Vec<f32>,
}

impl Frame {
    pub fn get(&self, u: usize, v: usize) -> f32 {
        self.data[v * IMAGE_WIDTH + u]
    }

    /// Mass centroid of pixels whose coverage is at least `threshold`.
    pub fn threshold_centroid(&self, threshold: f32) -> Percept {
        let (mut su, mut sv, mut n) = (0.0, 0.0, 0usize);
        for (i, &c) in self.data.iter().enumerate() {
            if c >= threshold {
                su += (i % IMAGE_WIDTH) as f64 + 0.5;
                sv += (i / IMAGE_WIDTH) as f64 + 0.5;
                n += 1;
            }
        }
        (n > 0).then(|| [su / n as f64, sv / n as f64])
    }
}

fn pixel_coverage(center: [f64; 2], radius: f64, u: usize, v: usize) -> f32 {
    let step = 1.0 / SUPERSAMPLE as f64;
    let r2 = radius * radius;
    let mut hits = 0;
    for i in 0..SUPERSAMPLE {
        for j in 0..SUPERSAMPLE {
            let x = u as f64 + (i as f64 + 0.5) * step - center[0];
            let y = v as f64 + (j as f64 + 0.5) * step - center[1];
            if x * x + y * y <= r2 {
                hits += 1;
            }
        }
    }
    hits as f32 / (SUPERSAMPLE * SUPERSAMPLE) as f32
}

/// Pixel window touched by a disk, clipped to the image.
fn disk_window(center: [f64; 2], radius: f64) -> Option<(usize, usize, usize, usize)> {
    let u0 = libm::floor(center[0] - radius).max(0.0);
    let u1 = libm::ceil(center[0] + radius).min(IMAGE_WIDTH as f64);
    let v0 = libm::floor(center[1] - radius).max(0.0);
    let v1 = libm::ceil(center[1] + radius).min(IMAGE_HEIGHT as f64);
    (u0 < u1 && v0 < v1).then_some((u0 as usize, u1 as usize, v0 as usize, v1 as usize))
}

/// Coverage threshold of the colour segmentation.
pub const SEGMENTATION_THRESHOLD: f32 = 0.5;

/// Renders the ball into an 80x60 coverage frame.
pub fn render_frame(model: &KinematicModel, head: &[f64; HEAD_JOINTS], target: &Target) -> Frame {
    let mut data = alloc::vec![0.0f32; IMAGE_WIDTH * IMAGE_HEIGHT];
    if let Some((center, radius)) = model.ball_disk(head, target) {
        if let Some((u0, u1, v0, v1)) = disk_window(center, radius) {
            for vv in v0..v1 {
                for uu in u0..u1 {
                    data[vv * IMAGE_WIDTH + uu] = pixel_coverage(center, radius, uu, vv);
                }
            }
        }
    }
    Frame { data }
}

/// Rasterizes the ball, thresholds it and returns the blob centroid.
///
/// Equivalent to `render_frame(..).threshold_centroid(SEGMENTATION_THRESHOLD)`
/// but only visits the pixels the disk can touch.
pub fn perceive_target(model: &KinematicModel, state: &RobotState, target: &Target) -> Percept {
    let (center, radius) = model.ball_disk(&state.head, target)?;
    let (u0, u1, v0, v1) = disk_window(center, radius)?;
    let (mut su, mut sv, mut n) = (0.0, 0.0, 0usize);
    for vv in v0..v1 {
        for uu in u0..u1 {
            if pixel_coverage(center, radius, uu, vv) >= SEGMENTATION_THRESHOLD {
                su += uu as f64 + 0.5;
                sv += vv as f64 + 0.5;
                n += 1;
            }
        }
    }
    (n > 0).then(|| [su / n as f64, sv / n as f64])
}

/// Pixel distance of a centroid from the image centre.
pub fn centering_error(centroid: [f64; 2]) -> f64 {
    libm::hypot(centroid[0] - IMAGE_CENTER[0], centroid[1] - IMAGE_CENTER[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointGroup {
    Head,
    Arm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandMode {
    Delta,
    Absolute,
}

/// Joint angles plus a per-joint lock mask. Locked joints hold their lock value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub head: [f64; HEAD_JOINTS],
    pub arm: [f64; ARM_JOINTS],
    pub head_locks: [Option<f64>; HEAD_JOINTS],
    pub arm_locks: [Option<f64>; ARM_JOINTS],
}

impl Default for RobotState {
    fn default() -> Self {
        Self { head: [0.0; HEAD_JOINTS], arm: [0.0; ARM_JOINTS], head_locks: [None; HEAD_JOINTS], arm_locks: [None; ARM_JOINTS] }
    }
}

/// Result of executing a motor command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorOutcome {
    pub state: RobotState,
    /// Some commanded angle fell outside its limit and was clamped.
    pub clamped: bool,
}

impl RobotState {
    /// Locks arm joint `joint` at `angle` and moves it there.
    pub fn lock_arm_joint(mut self, joint: usize, angle: f64) -> Self {
        self.arm_locks[joint] = Some(angle);
        self.arm[joint] = angle;
        self
    }

    pub fn with_head(mut self, head: [f64; HEAD_JOINTS]) -> Self {
        self.head = head;
        self
    }

    pub fn with_arm(mut self, arm: [f64; ARM_JOINTS]) -> Self {
        self.arm = arm;
        self
    }
}

/// Executes a head or arm command. Locked joints ignore it; results are
/// clamped to the joint limits.
pub fn apply_motor(
    model: &KinematicModel,
    state: &RobotState,
    group: JointGroup,
    command: &[f64],
    mode: CommandMode,
) -> Result<MotorOutcome> {
    let mut next = *state;
    let (angles, locks, limits): (&mut [f64], &[Option<f64>], &[JointLimit]) = match group {
        JointGroup::Head => (&mut next.head, &state.head_locks, &model.head_limits),
        JointGroup::Arm => (&mut next.arm, &state.arm_locks, &model.arm_limits),
    };
    if command.len() != angles.len() {
        return Err(Error::DimensionMismatch { expected: angles.len(), got: command.len() });
    }
    let mut clamped = false;
    for (((angle, lock), lim), &cmd) in angles.iter_mut().zip(locks).zip(limits).zip(command) {
        if let Some(value) = lock {
            *angle = *value;
            continue;
        }
        let wanted = match mode {
            CommandMode::Delta => *angle + cmd,
            CommandMode::Absolute => cmd,
        };
        let got = lim.clamp(wanted);
        clamped |= got != wanted;
        *angle = got;
    }
    Ok(MotorOutcome { state: next, clamped })
}

/// `apply_motor` followed by zero-mean Gaussian joint noise of `std_deg`.
pub fn apply_motor_noisy<R: Rng + ?Sized>(
    model: &KinematicModel,
    state: &RobotState,
    group: JointGroup,
    command: &[f64],
    mode: CommandMode,
    std_deg: f64,
    rng: &mut R,
) -> Result<MotorOutcome> {
    let mut out = apply_motor(model, state, group, command, mode)?;
    if std_deg <= 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, std_deg).map_err(|_| Error::InvalidParams("noise std must be finite"))?;
    let (angles, locks, limits): (&mut [f64], &[Option<f64>], &[JointLimit]) = match group {
        JointGroup::Head => (&mut out.state.head, &state.head_locks, &model.head_limits),
        JointGroup::Arm => (&mut out.state.arm, &state.arm_locks, &model.arm_limits),
    };
    for ((angle, lock), lim) in angles.iter_mut().zip(locks).zip(limits) {
        if lock.is_none() {
            *angle = lim.clamp(*angle + normal.sample(rng));
        }
    }
    Ok(out)
}

/// Puts the ball in the open grasp of the current arm pose.
pub fn place_ball_in_hand(model: &KinematicModel, state: &RobotState) -> Result<Target> {
    Ok(Target::at(model.grasp_point(&state.arm)?))
}

/// Head poses visited by the search sweep, nearest to straight ahead first.
pub fn scan_poses(model: &KinematicModel) -> Vec<[f64; 2]> {
    const YAW_STEP: f64 = 20.0;
    const PITCH_STEP: f64 = 15.0;
    let grid = |lim: &JointLimit, step: f64| -> Vec<f64> {
        let n = libm::ceil((lim.max - lim.min) / step).max(1.0) as usize;
        (0..=n).map(|i| lim.min + (lim.max - lim.min) * i as f64 / n as f64).collect()
    };
    let yaws = grid(&model.head_limits[0], YAW_STEP);
    let pitches = grid(&model.head_limits[1], PITCH_STEP);
    let mut poses: Vec<[f64; 2]> = yaws.iter().flat_map(|&y| pitches.iter().map(move |&p| [y, p])).collect();
    poses.sort_by(|a, b| {
        let ka = a[0] * a[0] + a[1] * a[1];
        let kb = b[0] * b[0] + b[1] * b[1];
        ka.total_cmp(&kb).then(a[0].total_cmp(&b[0])).then(a[1].total_cmp(&b[1]))
    });
    poses
}

/// Outcome of a successful search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanHit {
    pub state: RobotState,
    pub centroid: [f64; 2],
    pub head_moves: usize,
}

/// Sweeps the head over a fixed grid until the ball is in view.
pub fn scan_for_target(model: &KinematicModel, state: &RobotState, target: &Target) -> Option<ScanHit> {
    if let Some(centroid) = perceive_target(model, state, target) {
        return Some(ScanHit { state: *state, centroid, head_moves: 0 });
    }
    for (i, pose) in scan_poses(model).iter().enumerate() {
        let moved = apply_motor(model, state, JointGroup::Head, pose, CommandMode::Absolute).ok()?.state;
        if let Some(centroid) = perceive_target(model, &moved, target) {
            return Some(ScanHit { state: moved, centroid, head_moves: i + 1 });
        }
    }
    None
}
