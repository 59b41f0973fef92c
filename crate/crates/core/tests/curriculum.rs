use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visuomotor_core::curriculum::{
    adapt, gaze_control, reach, train_arm, train_eyehand, train_gaze, CurriculumConfig, PriorExperience, Stage,
    StageModel,
};
use visuomotor_core::datagen::{
    gen_arm_dataset, gen_envchange_dataset, gen_eyehand_dataset, gen_gaze_dataset, ArmSample, BabbleConfig,
    EyeHandTriplet,
};
use visuomotor_core::eval::{run_repeat, ModelSet};
use visuomotor_core::sim::{apply_motor, centering_error, perceive_target, CommandMode, JointGroup};
use visuomotor_core::{Error, KinematicModel, RobotState, Target};

struct Trained {
    gaze: StageModel,
    arm_data: Vec<ArmSample>,
    triplets: Vec<EyeHandTriplet>,
    arm: StageModel,
    eyehand: StageModel,
}

fn trained() -> &'static Trained {
    static CELL: OnceLock<Trained> = OnceLock::new();
    CELL.get_or_init(|| {
        let kin = KinematicModel::default();
        let bc = BabbleConfig::default();
        let cfg = CurriculumConfig::default();
        let gaze = train_gaze(&gen_gaze_dataset(&kin, 1000, 0, &bc).unwrap(), &cfg, 0).unwrap();
        let arm_data = gen_arm_dataset(&kin, 1000, 0, &bc).unwrap();
        let arm = train_arm(&arm_data, &cfg, 0).unwrap();
        let triplets = gen_eyehand_dataset(&kin, 1000, &gaze, 0, &bc).unwrap();
        let (arm, eyehand) = train_eyehand(&triplets, &arm, &arm_data, &cfg, 0).unwrap();
        Trained { gaze, arm_data, triplets, arm, eyehand }
    })
}

#[test]
fn inverse_delta_restores_centering() {
    let kin = KinematicModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 300 {
        let start = RobotState::default().with_head([rng.random_range(-40.0..40.0), rng.random_range(-25.0..25.0)]);
        let target = Target::at(kin.point_on_axis(&start.head, rng.random_range(25.0..60.0)));
        let delta = [rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0)];
        let moved = apply_motor(&kin, &start, JointGroup::Head, &delta, CommandMode::Delta).unwrap().state;
        if perceive_target(&kin, &moved, &target).is_none() {
            continue;
        }
        let inverse = [start.head[0] - moved.head[0], start.head[1] - moved.head[1]];
        let back = apply_motor(&kin, &moved, JointGroup::Head, &inverse, CommandMode::Delta).unwrap().state;
        let c = perceive_target(&kin, &back, &target).unwrap();
        assert!(centering_error(c) <= 2.0, "{c:?}");
        checked += 1;
    }
}

#[test]
fn dataset_sizes_match_the_reported_scale() {
    let kin = KinematicModel::default();
    let bc = BabbleConfig::default();
    let gaze = gen_gaze_dataset(&kin, 1000, 0, &bc).unwrap();
    assert!((6000..=6800).contains(&gaze.len()), "gaze {}", gaze.len());
    let arm = &trained().arm_data;
    assert!((14_000..=15_500).contains(&arm.len()), "arm {}", arm.len());
    let n = trained().triplets.len();
    assert!((900..=1000).contains(&n), "triplets {n}");
    let env = gen_envchange_dataset(&kin, 500, &trained().gaze, 1, &bc).unwrap();
    assert!(env.len() <= 500 && !env.is_empty());
}

#[test]
fn eyehand_triplets_are_consistent() {
    let kin = KinematicModel::default();
    for t in trained().triplets.iter().take(200) {
        let hand = kin.forward_kinematics(&t.arm).unwrap();
        assert_eq!([hand.x, hand.y, hand.z], t.position);
        let state = RobotState::default().with_arm(t.arm).with_head(t.head);
        let ball = Target::at(kin.grasp_point(&t.arm).unwrap());
        let c = perceive_target(&kin, &state, &ball).unwrap();
        assert!(centering_error(c) <= 3.0);
    }
}

#[test]
fn learned_gaze_centres_most_targets() {
    let kin = KinematicModel::default();
    let cfg = CurriculumConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut errors = Vec::new();
    while errors.len() < 200 {
        let head = [rng.random_range(-50.0..50.0), rng.random_range(-35.0..35.0)];
        let px = [rng.random_range(4.0..76.0), rng.random_range(4.0..56.0)];
        let target = Target::at(kin.back_project(&head, px, 40.0));
        let s = RobotState::default().with_head(head);
        if perceive_target(&kin, &s, &target).is_none() {
            continue;
        }
        errors.push(gaze_control(&trained().gaze, &kin, &s, &target, &cfg.gaze).unwrap().error_px);
    }
    errors.sort_by(f64::total_cmp);
    assert!(errors[100] <= 4.0, "median {}", errors[100]);
}

#[test]
fn reach_is_pure() {
    let kin = KinematicModel::default();
    let cfg = CurriculumConfig::default();
    let t = trained();
    let target = Target::at(kin.grasp_point(&[30.0, -10.0, 5.0, 40.0]).unwrap());
    let a = reach(&t.gaze, &t.eyehand, &t.arm, &kin, &RobotState::default(), &target, &cfg).unwrap();
    let b = reach(&t.gaze, &t.eyehand, &t.arm, &kin, &RobotState::default(), &target, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn transfer_keeps_tables_in_step_with_maps() {
    let t = trained();
    assert_eq!(t.arm.sensory, t.eyehand.sensory);
    assert!(t.eyehand.motor.len() <= 1000);
    let c = t.eyehand.connectivity();
    assert!(c.motor_connected > 0 && c.motor_connected <= c.motor_neurons);
    assert_eq!(t.arm.provenance.lineage, vec!["transfer:eyehand".to_string()]);
}

#[test]
fn adapt_rejects_empty_data_and_leaves_inputs_alone() {
    let t = trained();
    let cfg = CurriculumConfig::default();
    let (eh0, arm0) = (t.eyehand.clone(), t.arm.clone());
    let prior = PriorExperience { arm: &t.arm_data, triplets: &t.triplets };
    assert_eq!(adapt(&t.eyehand, &t.arm, &[], &prior, &cfg), Err(Error::EmptyDataset));
    let kin = KinematicModel::default();
    let env = gen_envchange_dataset(&kin, 100, &t.gaze, 2, &BabbleConfig::default()).unwrap();
    let (arm, eh) = adapt(&t.eyehand, &t.arm, &env, &prior, &cfg).unwrap();
    assert_eq!((&t.eyehand, &t.arm), (&eh0, &arm0));
    assert_eq!(arm.sensory, eh.sensory);
    assert_eq!(eh.stage, Stage::EyeHand);
    assert!(adapt(&t.arm, &t.arm, &env, &prior, &cfg).is_err());
}

#[test]
fn repeats_are_reproducible() {
    let t = trained();
    let models = ModelSet { gaze: Some(t.gaze.clone()), arm: Some(t.arm.clone()), eyehand: Some(t.eyehand.clone()) };
    let kin = KinematicModel::default();
    let cfg = CurriculumConfig::default();
    let a = run_repeat(Stage::EyeHand, &models, &kin, &cfg, 50, 9, 1, false).unwrap();
    let b = run_repeat(Stage::EyeHand, &models, &kin, &cfg, 50, 9, 1, false).unwrap();
    assert_eq!(a, b);
    let one = run_repeat(Stage::Arm, &models, &kin, &cfg, 1, 9, 0, false).unwrap().summary().unwrap();
    assert_eq!((one.min, one.median), (one.median, one.max));
}
