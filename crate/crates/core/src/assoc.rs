//! Hebbian associations between the neurons of two trained maps.
//!
//! Each co-activation of neuron `a` in map A and neuron `b` in map B adds
//! `alpha * act_a * act_b` to the weight linking them. Weights are undirected,
//! so a table can be queried from either side.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gwr::GwrNetwork;

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Identity of the network on one side of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSide {
    pub label: String,
    pub len: usize,
    pub revision: u64,
}

impl MapSide {
    pub fn of(net: &GwrNetwork) -> Self {
        Self { label: String::from(net.label()), len: net.len(), revision: net.revision() }
    }

    fn matches(&self, net: &GwrNetwork) -> bool {
        self.label == net.label() && self.len == net.len() && self.revision == net.revision()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationTable {
    side_a: MapSide,
    side_b: MapSide,
    alpha: f64,
    a_to_b: BTreeMap<(usize, usize), f64>,
    b_to_a: BTreeMap<(usize, usize), f64>,
}

impl AssociationTable {
    pub fn new(side_a: MapSide, side_b: MapSide, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParams("alpha must be positive"));
        }
        Ok(Self { side_a, side_b, alpha, a_to_b: BTreeMap::new(), b_to_a: BTreeMap::new() })
    }

    /// Restores a table from stored triplets.
    pub fn from_entries(side_a: MapSide, side_b: MapSide, alpha: f64, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut t = Self::new(side_a, side_b, alpha)?;
        for &(a, b, w) in entries {
            t.check(a, b)?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParams("association weights must be positive"));
            }
            t.a_to_b.insert((a, b), w);
            t.b_to_a.insert((b, a), w);
        }
        Ok(t)
    }

    /// One pass over `pairs`, strengthening the link between the winners of
    /// each pair. Neither network is modified.
    pub fn build<A, B>(net_a: &GwrNetwork, net_b: &GwrNetwork, pairs: &[(A, B)], alpha: f64) -> Result<Self>
    where
        A: AsRef<[f64]>,
        B: AsRef<[f64]>,
    {
        if pairs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut t = Self::new(MapSide::of(net_a), MapSide::of(net_b), alpha)?;
        t.accumulate(net_a, net_b, pairs, alpha)?;
        Ok(t)
    }

    /// Strengthens the table with further pairs at learning rate `rate`.
    pub fn accumulate<A, B>(&mut self, net_a: &GwrNetwork, net_b: &GwrNetwork, pairs: &[(A, B)], rate: f64) -> Result<()>
    where
        A: AsRef<[f64]>,
        B: AsRef<[f64]>,
    {
        self.check_network(Side::A, net_a)?;
        self.check_network(Side::B, net_b)?;
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParams("learning rate must be positive"));
        }
        for (xa, xb) in pairs {
            let (a, act_a) = net_a.query_nearest(xa.as_ref())?;
            let (b, act_b) = net_b.query_nearest(xb.as_ref())?;
            self.add(a, b, rate * act_a * act_b);
        }
        Ok(())
    }

    pub fn side(&self, side: Side) -> &MapSide {
        match side {
            Side::A => &self.side_a,
            Side::B => &self.side_b,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check(&self, a: usize, b: usize) -> Result<()> {
        if a >= self.side_a.len {
            return Err(Error::IndexOutOfRange { index: a, len: self.side_a.len });
        }
        if b >= self.side_b.len {
            return Err(Error::IndexOutOfRange { index: b, len: self.side_b.len });
        }
        Ok(())
    }

    /// Hebbian update `w_ab += alpha * act_a * act_b`.
    pub fn strengthen(&mut self, a: usize, b: usize, act_a: f64, act_b: f64) -> Result<()> {
        self.check(a, b)?;
        for act in [act_a, act_b] {
            if !(act > 0.0 && act <= 1.0) {
                return Err(Error::InvalidActivity(act));
            }
        }
        self.add(a, b, self.alpha * act_a * act_b);
        Ok(())
    }

    fn add(&mut self, a: usize, b: usize, delta: f64) {
        let w = self.a_to_b.entry((a, b)).or_insert(0.0);
        *w += delta;
        self.b_to_a.insert((b, a), *w);
    }

    /// Weight between `a` and `b`; zero when absent.
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.a_to_b.get(&(a, b)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.a_to_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_to_b.is_empty()
    }

    /// `(a, b, weight)` triplets in ascending `(a, b)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.a_to_b.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    /// Associations of neuron `i` on side `from`, ascending by partner index.
    pub fn row(&self, from: Side, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let map = match from {
            Side::A => &self.a_to_b,
            Side::B => &self.b_to_a,
        };
        map.range((i, 0)..=(i, usize::MAX)).map(|(&(_, j), &w)| (j, w))
    }

    /// Number of neurons on `side` with at least one association.
    pub fn connected(&self, side: Side) -> usize {
        let map = match side {
            Side::A => &self.a_to_b,
            Side::B => &self.b_to_a,
        };
        let mut count = 0;
        let mut last = None;
        for &(i, _) in map.keys() {
            if last != Some(i) {
                count += 1;
                last = Some(i);
            }
        }
        count
    }

    /// Strongest partner of neuron `i`; ties go to the lowest index.
    pub fn strongest(&self, from: Side, i: usize) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, w) in self.row(from, i) {
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((j, w));
            }
        }
        best.map(|(j, _)| j).ok_or(Error::NoAssociation(i))
    }

    /// Verifies that `net` is the network recorded on `side`.
    pub fn check_network(&self, side: Side, net: &GwrNetwork) -> Result<()> {
        if self.side(side).matches(net) {
            Ok(())
        } else {
            Err(Error::StaleTable(String::from(net.label())))
        }
    }

    /// Index of the neuron in the opposite map co-activated most strongly
    /// with the winner for `x` in `from_net`.
    pub fn recall_index(&self, from: Side, from_net: &GwrNetwork, x: &[f64]) -> Result<usize> {
        self.check_network(from, from_net)?;
        let (i, _) = from_net.query_nearest(x)?;
        self.strongest(from, i)
    }

    /// Weight vector of the recalled neuron in `to_net`.
    pub fn recall<'n>(&self, from: Side, from_net: &GwrNetwork, to_net: &'n GwrNetwork, x: &[f64]) -> Result<&'n [f64]> {
        let to = match from {
            Side::A => Side::B,
            Side::B => Side::A,
        };
        self.check_network(to, to_net)?;
        let j = self.recall_index(from, from_net, x)?;
        Ok(to_net.weight(j))
    }

    /// Like [`recall_index`](Self::recall_index), but when the winner has no
    /// associations falls back to the nearest neuron that has. The flag
    /// reports whether the fallback was taken.
    pub fn recall_index_connected(&self, from: Side, from_net: &GwrNetwork, x: &[f64]) -> Result<(usize, bool)> {
        match self.recall_index(from, from_net, x) {
            Ok(j) => Ok((j, false)),
            Err(Error::NoAssociation(i)) => {
                let near = from_net.query_nearest_where(x, |k| self.row(from, k).next().is_some())?;
                let k = near.ok_or(Error::NoAssociation(i))?;
                Ok((self.strongest(from, k)?, true))
            }
            Err(e) => Err(e),
        }
    }

    pub fn entries_vec(&self) -> Vec<(usize, usize, f64)> {
        self.entries().collect()
    }
}
