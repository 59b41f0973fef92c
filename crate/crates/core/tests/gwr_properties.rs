use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use visuomotor_core::gwr::{activity_at, habituation_step, HABITUATION_FIXED_POINT};
use visuomotor_core::{GwrNetwork, GwrParams};

fn params() -> GwrParams {
    GwrParams::with_thresholds(0.5, 0.7)
}

fn random_net(rng: &mut ChaCha8Rng, dim: usize, steps: usize) -> GwrNetwork {
    let a: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
    let b: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut net = GwrNetwork::new(dim, params(), rng.random(), [&a, &b]).unwrap();
    for _ in 0..steps {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        net.train_step(&x).unwrap();
    }
    net
}

fn brute_force_bmus(net: &GwrNetwork, x: &[f64]) -> (usize, usize) {
    let d: Vec<f64> = (0..net.len())
        .map(|i| net.weight(i).iter().zip(x).map(|(w, v)| (w - v) * (w - v)).sum())
        .collect();
    let mut idx: Vec<usize> = (0..net.len()).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    (idx[0], idx[1])
}

#[test]
fn bmu_search_agrees_with_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 0..100 {
        let dim = 1 + n % 4;
        let net = random_net(&mut rng, dim, 60);
        for _ in 0..100 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-6.0..6.0)).collect();
            assert_eq!(net.find_bmus(&x).unwrap(), brute_force_bmus(&net, &x));
        }
    }
}

#[test]
fn habituation_converges_to_fixed_point() {
    for tau in [0.1, 0.3] {
        let mut h = 1.0;
        let mut steps = 0;
        while (h - HABITUATION_FIXED_POINT).abs() > 1e-9 {
            let next = habituation_step(h, tau);
            assert!(next < h && (0.0..=1.0).contains(&next));
            h = next;
            steps += 1;
            assert!(steps < 10_000);
        }
    }
    assert!((HABITUATION_FIXED_POINT - (1.0 - 1.0 / 1.05)).abs() < 1e-15);
}

#[test]
fn repeated_bmu_habituation_reaches_fixed_point() {
    let mut net = GwrNetwork::new(1, params(), 0, [&[0.0], &[1.0]]).unwrap();
    for _ in 0..400 {
        net.habituate(0).unwrap();
    }
    assert!((net.habituations()[0] - HABITUATION_FIXED_POINT).abs() < 1e-9);
}

#[test]
fn neuron_cap_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = params().max_neurons(12);
    let mut net = GwrNetwork::new(2, p, 1, [&[0.0, 0.0], &[1.0, 1.0]]).unwrap();
    for _ in 0..3000 {
        let x = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
        net.train_step(&x).unwrap();
        assert!(net.len() <= 12);
    }
}

#[test]
fn identical_runs_are_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data: Vec<[f64; 3]> = (0..300).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    let p = params().epochs(10);
    let mut a = GwrNetwork::seeded_from(3, p, 77, &data).unwrap();
    let mut b = GwrNetwork::seeded_from(3, p, 77, &data).unwrap();
    let ta = a.train(&data).unwrap();
    let tb = b.train(&data).unwrap();
    assert_eq!(ta.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), tb.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_eq!(a, b);
}

/// Lloyd's algorithm with two centres, used as an independent reference.
fn kmeans2(data: &[[f64; 2]]) -> [[f64; 2]; 2] {
    let mut c = [data[0], data[data.len() - 1]];
    for _ in 0..100 {
        let mut sum = [[0.0; 2]; 2];
        let mut n = [0usize; 2];
        for p in data {
            let d = |c: [f64; 2]| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
            let k = usize::from(d(c[1]) < d(c[0]));
            sum[k][0] += p[0];
            sum[k][1] += p[1];
            n[k] += 1;
        }
        for k in 0..2 {
            c[k] = [sum[k][0] / n[k] as f64, sum[k][1] / n[k] as f64];
        }
    }
    c
}

#[test]
fn two_clusters_are_quantized() {
    let sigma = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut data = Vec::new();
    for centre in [[-3.0, 0.0], [3.0, 1.0]] {
        for _ in 0..200 {
            data.push([centre[0] + noise.sample(&mut rng), centre[1] + noise.sample(&mut rng)]);
        }
    }
    let mut net = GwrNetwork::seeded_from(2, params(), 1, &data).unwrap();
    let trace = net.train(&data).unwrap();
    assert_eq!(trace.len(), 40);
    let qe = net.quantization_error(&data).unwrap();
    assert!(qe <= 3.0 * sigma, "quantization error {qe}");
    assert!(qe <= trace[0]);
    for c in kmeans2(&data) {
        let (b, _) = net.query_nearest(&c).unwrap();
        let w = net.weight(b);
        assert!(((w[0] - c[0]).powi(2) + (w[1] - c[1]).powi(2)).sqrt() < 3.0 * sigma);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn habituation_stays_in_unit_interval(h in 0.0f64..=1.0, tau in 0.01f64..1.0) {
        let next = habituation_step(h, tau);
        prop_assert!((0.0..=1.0).contains(&next));
        if h > HABITUATION_FIXED_POINT + 1e-12 {
            prop_assert!(next < h);
        }
    }

    #[test]
    fn activity_is_monotone(d1 in 0.0f64..50.0, d2 in 0.0f64..50.0) {
        let (a1, a2) = (activity_at(d1), activity_at(d2));
        prop_assert!(a1 > 0.0 && a1 <= 1.0);
        if d1 < d2 { prop_assert!(a1 >= a2); }
    }

    #[test]
    fn growth_gate_is_exact(seed in 0u64..1000, steps in 0usize..40, x in -8.0f64..8.0, y in -8.0f64..8.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = random_net(&mut rng, 2, steps);
        let p = *net.params();
        let (b, _) = net.find_bmus(&[x, y]).unwrap();
        let a = net.activity(b, &[x, y]).unwrap();
        let h = net.habituations()[b];
        let n = net.len();
        let wb = net.weight(b).to_vec();
        let expect = a < p.activity_threshold && h < p.habituation_threshold && n < p.max_neurons;
        let r = net.train_step(&[x, y]).unwrap();
        prop_assert_eq!(r.inserted, expect);
        if r.inserted && net.len() == n + 1 {
            prop_assert_eq!(net.weight(n), &[0.5 * (wb[0] + x), 0.5 * (wb[1] + y)][..]);
            prop_assert_eq!(net.habituations()[n], 1.0);
            prop_assert!(net.edge_age(n, r.bmu).is_some() && net.edge_age(n, r.second).is_some());
            prop_assert!(net.edge_age(r.bmu, r.second).is_none());
        }
    }

    #[test]
    fn edge_ages_stay_bounded(seed in 0u64..1000, steps in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_net(&mut rng, 2, steps);
        let max_age = net.params().max_age;
        for e in net.edges() {
            prop_assert!(e.age <= max_age);
            prop_assert!(e.a < e.b && e.b < net.len());
        }
        for i in 0..net.len() {
            prop_assert!(net.degree(i) > 0 || net.len() <= 2);
        }
    }

    #[test]
    fn winner_update_contracts(seed in 0u64..1000, x in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = random_net(&mut rng, 1, 20);
        let (b, _) = net.find_bmus(&[x]).unwrap();
        let before = (net.weight(b)[0] - x).abs();
        let len = net.len();
        let r = net.train_step(&[x]).unwrap();
        if !r.inserted && net.len() == len && before > 0.0 {
            prop_assert!((net.weight(b)[0] - x).abs() < before);
        }
    }
}
