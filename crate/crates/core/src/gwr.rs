//! Grow-When-Required network.
//!
//! An online, topology-learning vector quantizer. Every input selects a best
//! matching unit `b` and runner-up `s`; the pair is linked by a lateral edge.
//! A new neuron is grown between `b` and the input when `b` matches poorly
//! (low activity) *and* has already been trained (low habituation).
//! Otherwise `b` and its lateral neighbours move toward the input and
//! habituate. Edges age each time their endpoint wins; stale edges and the
//! neurons they leave isolated are removed.
//!
//! Neuron indices are dense. Removing an isolated neuron moves the last
//! neuron into the freed slot, so indices are only stable between steps.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Gain applied to the recovery term of the habituation update.
pub const HABITUATION_GAIN: f64 = 1.05;

/// Habituation value that the update maps onto itself, `1 - 1/1.05`.
pub const HABITUATION_FIXED_POINT: f64 = 1.0 - 1.0 / HABITUATION_GAIN;

/// One habituation update with rate `tau`, clamped to `[0, 1]`.
#[inline]
pub fn habituation_step(h: f64, tau: f64) -> f64 {
    (h + tau * (HABITUATION_GAIN * (1.0 - h) - 1.0)).clamp(0.0, 1.0)
}

/// Match quality of a neuron at Euclidean distance `distance` from the input.
#[inline]
pub fn activity_at(distance: f64) -> f64 {
    libm::exp(-distance)
}

/// Training hyperparameters for a single network.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GwrParams {
    pub epochs: u32,
    pub max_age: u32,
    pub max_neurons: usize,
    /// Learning rate of the best matching unit.
    pub eps_b: f64,
    /// Learning rate of its lateral neighbours.
    pub eps_n: f64,
    pub tau_b: f64,
    pub tau_n: f64,
    /// Activity threshold `a_T`.
    pub activity_threshold: f64,
    /// Habituation threshold `h_T`.
    pub habituation_threshold: f64,
}

impl GwrParams {
    /// Shared defaults (40 epochs, max age 5, 6000 neurons, `eps_b = 0.5`,
    /// `eps_n = 0.01`, `tau_b = 0.3`, `tau_n = 0.1`) with per-network thresholds.
    pub fn with_thresholds(activity_threshold: f64, habituation_threshold: f64) -> Self {
        Self {
            epochs: 40,
            max_age: 5,
            max_neurons: 6000,
            eps_b: 0.5,
            eps_n: 0.01,
            tau_b: 0.3,
            tau_n: 0.1,
            activity_threshold,
            habituation_threshold,
        }
    }

    pub fn max_neurons(mut self, max_neurons: usize) -> Self {
        self.max_neurons = max_neurons;
        self
    }

    pub fn epochs(mut self, epochs: u32) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eps_n && self.eps_n < self.eps_b && self.eps_b < 1.0) {
            return Err(Error::InvalidParams("require 0 < eps_n < eps_b < 1"));
        }
        if !(0.0 < self.tau_n && self.tau_n < self.tau_b && self.tau_b <= 1.0) {
            return Err(Error::InvalidParams("require 0 < tau_n < tau_b <= 1"));
        }
        if !(self.activity_threshold > 0.0 && self.activity_threshold <= 0.9) {
            return Err(Error::InvalidParams("activity threshold must lie in (0, 0.9]"));
        }
        if !(self.habituation_threshold > 0.0 && self.habituation_threshold <= 0.9) {
            return Err(Error::InvalidParams("habituation threshold must lie in (0, 0.9]"));
        }
        if self.max_neurons < 2 {
            return Err(Error::InvalidParams("max_neurons must be at least 2"));
        }
        Ok(())
    }
}

/// Read-only view of one neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neuron<'a> {
    pub weight: &'a [f64],
    pub habituation: f64,
}

/// Lateral connection between two neurons, reported with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub age: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Link {
    to: usize,
    age: u32,
}

/// Outcome of a single training step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub inserted: bool,
    /// Index of the winner at the start of the step. It may have moved if
    /// pruning removed a neuron during the same step.
    pub bmu: usize,
    pub second: usize,
    pub distance: f64,
    pub activity: f64,
}

/// Equality ignores the order of adjacency lists, which depends on history
/// but never affects training.
#[derive(Debug, Clone)]
pub struct GwrNetwork {
    label: String,
    dim: usize,
    params: GwrParams,
    seed: u64,
    /// Total epochs trained so far; selects the shuffle stream of the next one.
    epochs_done: u64,
    /// Bumped on every mutation so association tables can detect staleness.
    revision: u64,
    weights: Vec<f64>,
    habituation: Vec<f64>,
    links: Vec<Vec<Link>>,
}

impl PartialEq for GwrNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.dim == other.dim
            && self.params == other.params
            && self.seed == other.seed
            && self.epochs_done == other.epochs_done
            && self.revision == other.revision
            && self.weights == other.weights
            && self.habituation == other.habituation
            && self.edges() == other.edges()
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl GwrNetwork {
    /// Seeds a network with two neurons placed at `init_samples`.
    pub fn new(dim: usize, params: GwrParams, seed: u64, init_samples: [&[f64]; 2]) -> Result<Self> {
        params.validate()?;
        if dim == 0 {
            return Err(Error::InvalidParams("input dimension must be positive"));
        }
        for s in init_samples {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: s.len() });
            }
        }
        if init_samples[0] == init_samples[1] {
            return Err(Error::IdenticalInitSamples);
        }
        let mut weights = Vec::with_capacity(dim * 2);
        weights.extend_from_slice(init_samples[0]);
        weights.extend_from_slice(init_samples[1]);
        Ok(Self {
            label: String::from("gwr"),
            dim,
            params,
            seed,
            epochs_done: 0,
            revision: 0,
            weights,
            habituation: alloc::vec![1.0, 1.0],
            links: alloc::vec![Vec::new(), Vec::new()],
        })
    }

    /// Seeds a network from the first two distinct vectors of `data`.
    pub fn seeded_from<V: AsRef<[f64]>>(dim: usize, params: GwrParams, seed: u64, data: &[V]) -> Result<Self> {
        let first = data.first().ok_or(Error::EmptyDataset)?.as_ref();
        let second = data
            .iter()
            .map(AsRef::as_ref)
            .find(|v| *v != first)
            .ok_or(Error::IdenticalInitSamples)?;
        Self::new(dim, params, seed, [first, second])
    }

    /// Rebuilds a network from its serialized parts, checking every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        label: String,
        dim: usize,
        params: GwrParams,
        seed: u64,
        epochs_done: u64,
        revision: u64,
        weights: Vec<f64>,
        habituation: Vec<f64>,
        edges: &[Edge],
    ) -> Result<Self> {
        params.validate()?;
        let n = habituation.len();
        if dim == 0 || weights.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, got: weights.len() });
        }
        if n > params.max_neurons {
            return Err(Error::InvalidParams("neuron count exceeds max_neurons"));
        }
        if habituation.iter().any(|h| !(0.0..=1.0).contains(h)) {
            return Err(Error::InvalidParams("habituation outside [0, 1]"));
        }
        let mut links = alloc::vec![Vec::new(); n];
        for e in edges {
            if e.a >= n || e.b >= n {
                return Err(Error::IndexOutOfRange { index: e.a.max(e.b), len: n });
            }
            if e.a == e.b {
                return Err(Error::InvalidParams("self-loop edge"));
            }
            if links[e.a].iter().any(|l: &Link| l.to == e.b) {
                return Err(Error::InvalidParams("duplicate edge"));
            }
            links[e.a].push(Link { to: e.b, age: e.age });
            links[e.b].push(Link { to: e.a, age: e.age });
        }
        Ok(Self { label, dim, params, seed, epochs_done, revision, weights, habituation, links })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &GwrParams {
        &self.params
    }

    /// Replaces the hyperparameters used by subsequent training.
    pub fn set_params(&mut self, params: GwrParams) -> Result<()> {
        params.validate()?;
        if params.max_neurons < self.len() {
            return Err(Error::InvalidParams("max_neurons below current neuron count"));
        }
        self.params = params;
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn epochs_done(&self) -> u64 {
        self.epochs_done
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn len(&self) -> usize {
        self.habituation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.habituation.is_empty()
    }

    pub fn weight(&self, i: usize) -> &[f64] {
        &self.weights[i * self.dim..(i + 1) * self.dim]
    }

    /// All weights, row-major, `len() * dim()` values.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn habituations(&self) -> &[f64] {
        &self.habituation
    }

    pub fn neuron(&self, i: usize) -> Neuron<'_> {
        Neuron { weight: self.weight(i), habituation: self.habituation[i] }
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.links[i].iter().map(|l| l.to)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.links[i].len()
    }

    /// Every edge once, sorted by endpoints.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .links
            .iter()
            .enumerate()
            .flat_map(|(a, ls)| ls.iter().filter(move |l| a < l.to).map(move |l| Edge { a, b: l.to, age: l.age }))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn edge_age(&self, a: usize, b: usize) -> Option<u32> {
        self.links.get(a)?.iter().find(|l| l.to == b).map(|l| l.age)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        Ok(())
    }

    /// Squared distances of the winner and runner-up. Ties go to the lower index.
    fn bmus_sq(&self, x: &[f64]) -> (usize, f64, usize, f64) {
        let (mut b, mut db) = (usize::MAX, f64::INFINITY);
        let (mut s, mut ds) = (usize::MAX, f64::INFINITY);
        for (i, w) in self.weights.chunks_exact(self.dim).enumerate() {
            let d = sq_dist(x, w);
            if d < db {
                s = b;
                ds = db;
                b = i;
                db = d;
            } else if d < ds {
                s = i;
                ds = d;
            }
        }
        (b, db, s, ds)
    }

    /// Best and second-best matching units for `x`.
    pub fn find_bmus(&self, x: &[f64]) -> Result<(usize, usize)> {
        self.check_dim(x)?;
        if self.len() < 2 {
            return Err(Error::TooFewNeurons { needed: 2, have: self.len() });
        }
        let (b, _, s, _) = self.bmus_sq(x);
        Ok((b, s))
    }

    /// Best matching unit and its activity.
    pub fn query_nearest(&self, x: &[f64]) -> Result<(usize, f64)> {
        self.check_dim(x)?;
        if self.is_empty() {
            return Err(Error::TooFewNeurons { needed: 1, have: 0 });
        }
        let (b, db, _, _) = self.bmus_sq(x);
        Ok((b, activity_at(libm::sqrt(db))))
    }

    /// Nearest neuron among those accepted by `keep`; lowest index on ties.
    pub fn query_nearest_where(&self, x: &[f64], keep: impl Fn(usize) -> bool) -> Result<Option<usize>> {
        self.check_dim(x)?;
        let mut best: Option<(usize, f64)> = None;
        for i in (0..self.len()).filter(|&i| keep(i)) {
            let d = sq_dist(x, self.weight(i));
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        Ok(best.map(|(i, _)| i))
    }

    pub fn activity(&self, b: usize, x: &[f64]) -> Result<f64> {
        self.check_index(b)?;
        self.check_dim(x)?;
        Ok(activity_at(libm::sqrt(sq_dist(x, self.weight(b)))))
    }

    /// Habituates `b` with `tau_b` and each of its neighbours with `tau_n`.
    pub fn habituate(&mut self, b: usize) -> Result<()> {
        self.check_index(b)?;
        self.habituate_unchecked(b);
        self.revision += 1;
        Ok(())
    }

    fn habituate_unchecked(&mut self, b: usize) {
        let (tau_b, tau_n) = (self.params.tau_b, self.params.tau_n);
        self.habituation[b] = habituation_step(self.habituation[b], tau_b);
        for l in &self.links[b] {
            self.habituation[l.to] = habituation_step(self.habituation[l.to], tau_n);
        }
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        if let Some(l) = self.links[a].iter_mut().find(|l| l.to == b) {
            l.age = 0;
            if let Some(r) = self.links[b].iter_mut().find(|l| l.to == a) {
                r.age = 0;
            }
            return;
        }
        self.links[a].push(Link { to: b, age: 0 });
        self.links[b].push(Link { to: a, age: 0 });
    }

    fn remove_edge(&mut self, a: usize, b: usize) {
        self.links[a].retain(|l| l.to != b);
        self.links[b].retain(|l| l.to != a);
    }

    /// Ages every edge at `b` except the one to `keep`.
    fn age_edges(&mut self, b: usize, keep: usize) {
        let targets: Vec<usize> = self.links[b].iter().filter(|l| l.to != keep).map(|l| l.to).collect();
        for l in self.links[b].iter_mut().filter(|l| l.to != keep) {
            l.age += 1;
        }
        for t in targets {
            if let Some(r) = self.links[t].iter_mut().find(|l| l.to == b) {
                r.age += 1;
            }
        }
    }

    /// Drops over-age edges at `b`, then any neuron they left isolated.
    fn prune(&mut self, b: usize) {
        let max_age = self.params.max_age;
        let stale: Vec<usize> = self.links[b].iter().filter(|l| l.age > max_age).map(|l| l.to).collect();
        if stale.is_empty() {
            return;
        }
        let mut candidates = alloc::vec![b];
        for t in stale {
            self.remove_edge(b, t);
            candidates.push(t);
        }
        candidates.sort_unstable_by(|a, b| b.cmp(a));
        candidates.dedup();
        for i in candidates {
            if self.len() > 2 && self.links[i].is_empty() {
                self.remove_neuron(i);
            }
        }
    }

    /// Removes isolated neuron `i`, moving the last neuron into its slot.
    fn remove_neuron(&mut self, i: usize) {
        debug_assert!(self.links[i].is_empty());
        let last = self.len() - 1;
        if i != last {
            let moved: Vec<usize> = self.links[last].iter().map(|l| l.to).collect();
            for t in moved {
                for l in self.links[t].iter_mut().filter(|l| l.to == last) {
                    l.to = i;
                }
            }
            let (head, tail) = self.weights.split_at_mut(last * self.dim);
            head[i * self.dim..(i + 1) * self.dim].copy_from_slice(&tail[..self.dim]);
        }
        self.weights.truncate(last * self.dim);
        self.habituation.swap_remove(i);
        self.links.swap_remove(i);
    }

    /// Presents one input to the network.
    pub fn train_step(&mut self, x: &[f64]) -> Result<StepReport> {
        self.check_dim(x)?;
        if self.len() < 2 {
            return Err(Error::TooFewNeurons { needed: 2, have: self.len() });
        }
        let (b, db, s, _) = self.bmus_sq(x);
        self.add_edge(b, s);

        let distance = libm::sqrt(db);
        let activity = activity_at(distance);
        let h_b = self.habituation[b];
        let inserted = activity < self.params.activity_threshold
            && h_b < self.params.habituation_threshold
            && self.len() < self.params.max_neurons;

        if inserted {
            let r = self.len();
            for (k, &xk) in x.iter().enumerate() {
                let mid = 0.5 * (self.weights[b * self.dim + k] + xk);
                self.weights.push(mid);
            }
            self.habituation.push(1.0);
            self.links.push(Vec::new());
            self.remove_edge(b, s);
            self.add_edge(r, b);
            self.add_edge(r, s);
            self.age_edges(b, r);
        } else {
            let dim = self.dim;
            let rate_b = self.params.eps_b * h_b;
            for (w, xi) in self.weights[b * dim..(b + 1) * dim].iter_mut().zip(x) {
                *w += rate_b * (xi - *w);
            }
            let eps_n = self.params.eps_n;
            for l in &self.links[b] {
                let n = l.to;
                let rate_n = eps_n * self.habituation[n];
                for (w, xi) in self.weights[n * dim..(n + 1) * dim].iter_mut().zip(x) {
                    *w += rate_n * (xi - *w);
                }
            }
            self.habituate_unchecked(b);
            self.age_edges(b, s);
        }
        self.prune(b);
        self.revision += 1;
        Ok(StepReport { inserted, bmu: b, second: s, distance, activity })
    }

    /// Trains for `params.epochs` shuffled passes over `data`.
    ///
    /// Returns the mean winner distance of each epoch, measured as each
    /// input is presented.
    pub fn train<V: AsRef<[f64]>>(&mut self, data: &[V]) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for v in data {
            self.check_dim(v.as_ref())?;
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut trace = Vec::with_capacity(self.params.epochs as usize);
        for _ in 0..self.params.epochs {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(self.epochs_done);
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for &i in &order {
                total += self.train_step(data[i].as_ref())?.distance;
            }
            trace.push(total / data.len() as f64);
            self.epochs_done += 1;
        }
        Ok(trace)
    }

    /// Mean distance from each vector to its nearest neuron.
    pub fn quantization_error<V: AsRef<[f64]>>(&self, data: &[V]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut total = 0.0;
        for v in data {
            let v = v.as_ref();
            self.check_dim(v)?;
            let (_, db, _, _) = self.bmus_sq(v);
            total += libm::sqrt(db);
        }
        Ok(total / data.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params() -> GwrParams {
        GwrParams::with_thresholds(0.5, 0.7)
    }

    fn net2(a: &[f64], b: &[f64]) -> GwrNetwork {
        GwrNetwork::new(a.len(), params(), 7, [a, b]).unwrap()
    }

    #[test]
    fn constructor_contract() {
        let net = net2(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(net.len(), 2);
        assert!(net.edges().is_empty());
        assert_eq!(net.habituations(), &[1.0, 1.0]);
        assert_eq!(net.weight(1), &[1.0, 1.0]);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert_eq!(
            GwrNetwork::new(2, params(), 0, [&[0.0, 0.0], &[0.0, 0.0]]),
            Err(Error::IdenticalInitSamples)
        );
        assert_eq!(
            GwrNetwork::new(3, params(), 0, [&[0.0, 0.0], &[1.0, 0.0]]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn params_validation() {
        assert!(params().validate().is_ok());
        let mut p = params();
        p.eps_n = 0.6;
        assert!(p.validate().is_err());
        let mut p = params();
        p.tau_n = 0.3;
        assert!(p.validate().is_err());
        assert!(GwrParams::with_thresholds(0.95, 0.5).validate().is_err());
        assert!(GwrParams::with_thresholds(0.5, 0.0).validate().is_err());
    }

    #[test]
    fn bmus_by_inspection() {
        let net = net2(&[0.0, 0.0], &[10.0, 10.0]);
        assert_eq!(net.find_bmus(&[1.0, 1.0]).unwrap(), (0, 1));
        assert_eq!(net.find_bmus(&[10.0, 10.0]).unwrap(), (1, 0));
    }

    #[test]
    fn bmu_ties_prefer_lower_index() {
        let net = net2(&[-1.0, 0.0], &[1.0, 0.0]);
        assert_eq!(net.find_bmus(&[0.0, 0.0]).unwrap(), (0, 1));
    }

    #[test]
    fn activity_values() {
        let net = net2(&[0.0, 0.0], &[10.0, 10.0]);
        assert_eq!(net.activity(0, &[0.0, 0.0]).unwrap(), 1.0);
        assert!((net.activity(0, &[1.0, 0.0]).unwrap() - libm::exp(-1.0)).abs() < 1e-15);
        assert!((net.activity(0, &[core::f64::consts::LN_2, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(net.activity(5, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn habituation_hand_values() {
        assert!((habituation_step(1.0, 0.3) - 0.7).abs() < 1e-15);
        assert!((habituation_step(1.0, 0.1) - 0.9).abs() < 1e-15);
        let h = HABITUATION_FIXED_POINT;
        assert!((habituation_step(h, 0.3) - h).abs() < 1e-15);
        assert!((h - 0.047_619_047_619_047_6).abs() < 1e-15);
    }

    #[test]
    fn habituate_hits_winner_and_neighbours() {
        let mut net = net2(&[0.0, 0.0], &[1.0, 0.0]);
        net.train_step(&[0.0, 0.0]).unwrap();
        // step above habituated 0 (tau_b) and 1 (tau_n) once already
        let before = net.habituations().to_vec();
        net.habituate(0).unwrap();
        assert!((net.habituations()[0] - habituation_step(before[0], 0.3)).abs() < 1e-15);
        assert!((net.habituations()[1] - habituation_step(before[1], 0.1)).abs() < 1e-15);
    }

    #[test]
    fn zero_error_input_leaves_weights() {
        let mut net = net2(&[0.0, 0.0], &[1.0, 0.0]);
        let r = net.train_step(&[0.0, 0.0]).unwrap();
        assert!(!r.inserted);
        assert_eq!(r.activity, 1.0);
        assert_eq!(net.weight(0), &[0.0, 0.0]);
        assert_eq!(net.edge_age(0, 1), Some(0));
    }

    #[test]
    fn fresh_winner_does_not_grow() {
        let mut net = net2(&[0.0, 0.0], &[1.0, 0.0]);
        let r = net.train_step(&[50.0, 0.0]).unwrap();
        assert!(r.activity < 0.5);
        assert!(!r.inserted);
        assert_eq!(net.len(), 2);
    }

    #[test]
    fn insertion_places_midpoint() {
        // Hand trace: step 1 adapts b=1 (h=1 -> 0.7, w -> 5.5), step 2
        // adapts again (h=0.7 < h_T fails: 0.7 is not < 0.7), step 3 grows.
        let mut net = net2(&[0.0, 0.0], &[1.0, 0.0]);
        let x = [10.0, 0.0];
        let r1 = net.train_step(&x).unwrap();
        assert!(!r1.inserted);
        assert_eq!(net.weight(1), &[5.5, 0.0]);
        assert!((net.habituations()[1] - 0.7).abs() < 1e-15);
        let r2 = net.train_step(&x).unwrap();
        assert!(!r2.inserted);
        // w += 0.5 * 0.7 * (10 - 5.5)
        assert!((net.weight(1)[0] - (5.5 + 0.35 * 4.5)).abs() < 1e-12);
        let w_b = net.weight(1)[0];
        let r3 = net.train_step(&x).unwrap();
        assert!(r3.inserted);
        assert_eq!(net.len(), 3);
        assert!((net.weight(2)[0] - 0.5 * (w_b + 10.0)).abs() < 1e-12);
        assert_eq!(net.habituations()[2], 1.0);
        assert!(net.edge_age(2, 1).is_some());
        assert!(net.edge_age(2, 0).is_some());
        assert!(net.edge_age(0, 1).is_none());
    }

    #[test]
    fn cap_suppresses_growth() {
        let p = params().max_neurons(2);
        let mut net = GwrNetwork::new(1, p, 1, [&[0.0], &[1.0]]).unwrap();
        for _ in 0..20 {
            assert!(!net.train_step(&[100.0]).unwrap().inserted);
        }
        assert_eq!(net.len(), 2);
    }

    #[test]
    fn old_edges_and_isolated_neurons_are_pruned() {
        // Neuron 2 hangs off 0; repeatedly winning with 0 and runner-up 1 ages (0,2) out.
        let edges = [Edge { a: 0, b: 1, age: 0 }, Edge { a: 0, b: 2, age: 4 }];
        let mut net = GwrNetwork::from_parts(
            "t".into(),
            1,
            params(),
            0,
            0,
            0,
            vec![0.0, 1.0, 100.0],
            vec![1.0, 1.0, 1.0],
            &edges,
        )
        .unwrap();
        net.train_step(&[0.0]).unwrap();
        assert_eq!(net.edge_age(0, 2), Some(5));
        net.train_step(&[0.0]).unwrap();
        assert_eq!(net.len(), 2);
        assert!(net.edges().iter().all(|e| e.age <= 5));
        assert_eq!(net.weight(0), &[0.0]);
        assert!(net.weight(1)[0] < 1.0);
    }

    #[test]
    fn train_rejects_empty_and_mismatched() {
        let mut net = net2(&[0.0], &[1.0]);
        let empty: [[f64; 1]; 0] = [];
        assert_eq!(net.train(&empty), Err(Error::EmptyDataset));
        assert!(net.train(&[[0.0, 1.0]]).is_err());
    }

    #[test]
    fn repeated_point_attracts_winner() {
        let mut net = net2(&[0.0, 0.0], &[3.0, 1.0]);
        let data = [[2.0, -1.0]; 50];
        net.train(&data).unwrap();
        let (b, _) = net.query_nearest(&data[0]).unwrap();
        let w = net.weight(b);
        assert!(libm::sqrt(sq_dist(w, &data[0])) < 1e-6);
    }

    #[test]
    fn query_nearest_on_single_neuron() {
        let net = GwrNetwork::from_parts("one".into(), 1, params(), 0, 0, 0, vec![2.0], vec![1.0], &[]).unwrap();
        assert_eq!(net.query_nearest(&[2.0]).unwrap(), (0, 1.0));
        assert!(net.find_bmus(&[2.0]).is_err());
    }
}
