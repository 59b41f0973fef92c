use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visuomotor_core::sim::{
    apply_motor, perceive_target, render_frame, scan_for_target, CommandMode, JointGroup, Vec3, ARM_JOINTS,
    SEGMENTATION_THRESHOLD, SHOULDER_ROTATION_JOINT,
};
use visuomotor_core::{KinematicModel, RobotState, Target};

type M4 = [[f64; 4]; 4];

fn mul(a: &M4, b: &M4) -> M4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn translation(t: [f64; 3]) -> M4 {
    [[1.0, 0.0, 0.0, t[0]], [0.0, 1.0, 0.0, t[1]], [0.0, 0.0, 1.0, t[2]], [0.0, 0.0, 0.0, 1.0]]
}

/// Rodrigues rotation about a unit axis, as a homogeneous matrix.
fn rotation(axis: [f64; 3], deg: f64) -> M4 {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = deg.to_radians().sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y, 0.0],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x, 0.0],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

fn oracle_hand(m: &KinematicModel, q: &[f64; ARM_JOINTS]) -> [f64; 3] {
    let mut t = translation(m.shoulder);
    for (axis, angle) in m.arm_axes.iter().zip(q).take(3) {
        t = mul(&t, &rotation(*axis, *angle));
    }
    t = mul(&t, &translation([m.upper_arm_cm, 0.0, 0.0]));
    t = mul(&t, &rotation(m.arm_axes[3], q[3]));
    t = mul(&t, &translation([m.forearm_cm, 0.0, 0.0]));
    [t[0][3], t[1][3], t[2][3]]
}

fn random_config<R: Rng>(m: &KinematicModel, rng: &mut R) -> [f64; ARM_JOINTS] {
    std::array::from_fn(|j| rng.random_range(m.arm_limits[j].min..=m.arm_limits[j].max))
}

#[test]
fn forward_kinematics_matches_homogeneous_oracle() {
    let m = KinematicModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let q = random_config(&m, &mut rng);
        let p = m.forward_kinematics(&q).unwrap();
        let o = oracle_hand(&m, &q);
        for k in 0..3 {
            assert!((p[k] - o[k]).abs() < 1e-9, "{q:?}: {p:?} vs {o:?}");
        }
    }
}

#[test]
fn link_lengths_are_preserved() {
    let m = KinematicModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let q = random_config(&m, &mut rng);
        let pose = m.arm_pose_unchecked(&q);
        let shoulder = Vec3::new(m.shoulder[0], m.shoulder[1], m.shoulder[2]);
        assert!(((pose.elbow - shoulder).norm() - m.upper_arm_cm).abs() < 1e-9);
        assert!(((pose.hand - pose.elbow).norm() - m.forearm_cm).abs() < 1e-9);
    }
}

#[test]
fn elbow_sweep_traces_a_circle_arc() {
    let m = KinematicModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut q = random_config(&m, &mut rng);
    let elbow = m.arm_pose_unchecked(&q).elbow;
    let mut pts = Vec::new();
    for e in [0.0, 15.0, 30.0, 45.0, 60.0] {
        q[3] = e;
        let h = m.forward_kinematics(&q).unwrap();
        assert!(((h - elbow).norm() - m.forearm_cm).abs() < 1e-9);
        pts.push(h);
    }
    // coplanar: the sweep stays in the plane normal to the elbow axis
    let n = (pts[1] - pts[0]).cross(&(pts[2] - pts[0])).normalize();
    for p in &pts[3..] {
        assert!((p - pts[0]).dot(&n).abs() < 1e-9);
    }
}

#[test]
fn projection_round_trips_through_back_projection() {
    let m = KinematicModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let head = [rng.random_range(-60.0..60.0), rng.random_range(-45.0..45.0)];
        let px = [rng.random_range(0.0..80.0), rng.random_range(0.0..60.0)];
        let depth = rng.random_range(10.0..100.0);
        let p = m.back_project(&head, px, depth);
        let back = m.project(&head, &p).unwrap();
        assert!((back[0] - px[0]).abs() < 1e-9 && (back[1] - px[1]).abs() < 1e-9);
    }
}

#[test]
fn perceived_centroid_is_near_analytic_projection() {
    let m = KinematicModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    while checked < 500 {
        let head = [rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)];
        let px = [rng.random_range(8.0..72.0), rng.random_range(8.0..52.0)];
        let target = Target::at(m.back_project(&head, px, rng.random_range(25.0..60.0)));
        let state = RobotState::default().with_head(head);
        let Some(c) = perceive_target(&m, &state, &target) else { continue };
        let (center, _) = m.ball_disk(&head, &target).unwrap();
        assert!(((c[0] - center[0]).powi(2) + (c[1] - center[1]).powi(2)).sqrt() <= 1.0);
        assert_eq!(Some(c), render_frame(&m, &head, &target).threshold_centroid(SEGMENTATION_THRESHOLD));
        checked += 1;
    }
}

#[test]
fn scan_finds_reachable_targets() {
    let m = KinematicModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut found = 0;
    for _ in 0..500 {
        let target = Target::at(m.grasp_point(&random_config(&m, &mut rng)).unwrap());
        if let Some(hit) = scan_for_target(&m, &RobotState::default(), &target) {
            assert_eq!(perceive_target(&m, &hit.state, &target), Some(hit.centroid));
            found += 1;
        }
    }
    assert!(found >= 490, "found {found} of 500");
}

#[test]
fn locked_workspace_is_a_subset() {
    let m = KinematicModel::default();
    let locked = RobotState::default().lock_arm_joint(SHOULDER_ROTATION_JOINT, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let cmd = random_config(&m, &mut rng);
        let out = apply_motor(&m, &locked, JointGroup::Arm, &cmd, CommandMode::Absolute).unwrap();
        assert_eq!(out.state.arm[SHOULDER_ROTATION_JOINT], 0.0);
        let mut free = cmd;
        free[SHOULDER_ROTATION_JOINT] = 0.0;
        assert_eq!(m.forward_kinematics(&out.state.arm).unwrap(), m.forward_kinematics(&free).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hand_motion_is_lipschitz(seed in 0u64..10_000, scale in 0.0f64..5.0) {
        let m = KinematicModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_config(&m, &mut rng);
        let b: [f64; 4] = std::array::from_fn(|j| m.arm_limits[j].clamp(a[j] + rng.random_range(-scale..=scale)));
        let dq: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs().to_radians()).sum();
        let dp = (m.forward_kinematics(&a).unwrap() - m.forward_kinematics(&b).unwrap()).norm();
        prop_assert!(dp <= (m.upper_arm_cm + m.forearm_cm) * dq + 1e-9);
    }

    #[test]
    fn commands_respect_limits(cmd in prop::array::uniform4(-500.0f64..500.0), delta in any::<bool>()) {
        let m = KinematicModel::default();
        let mode = if delta { CommandMode::Delta } else { CommandMode::Absolute };
        let s = RobotState::default().with_arm([10.0, -5.0, 0.0, 20.0]);
        let out = apply_motor(&m, &s, JointGroup::Arm, &cmd, mode).unwrap();
        for (a, l) in out.state.arm.iter().zip(&m.arm_limits) {
            prop_assert!(l.contains(*a));
        }
        let head = apply_motor(&m, &s, JointGroup::Head, &cmd[..2], mode).unwrap().state.head;
        for (a, l) in head.iter().zip(&m.head_limits) {
            prop_assert!(l.contains(*a));
        }
    }
}
