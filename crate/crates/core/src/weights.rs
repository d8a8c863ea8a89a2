//! Node weightings, moving cuts and demands.

use std::collections::BTreeMap;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sssp, EdgeId, Graph, Vertex};
use crate::rational::{self, Q};

/// A : V → ℚ≥0, stored densely.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NodeWeighting {
    w: Vec<Q>,
}

impl NodeWeighting {
    pub fn zero(n: usize) -> Self {
        NodeWeighting { w: vec![Q::zero(); n] }
    }

    pub fn from_values(w: Vec<Q>) -> Result<Self> {
        if w.iter().any(|x| x.is_negative()) {
            return Err(Error::InvalidArgument("negative node weight".into()));
        }
        Ok(NodeWeighting { w })
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn get(&self, v: Vertex) -> &Q {
        &self.w[v as usize]
    }

    pub fn values(&self) -> &[Q] {
        &self.w
    }

    pub fn set(&mut self, v: Vertex, x: Q) {
        assert!(!x.is_negative(), "negative node weight");
        self.w[v as usize] = x;
    }

    pub fn add_at(&mut self, v: Vertex, x: &Q) {
        self.w[v as usize] += x;
    }

    pub fn total(&self) -> Q {
        self.w.iter().fold(Q::zero(), |a, x| a + x)
    }

    pub fn sum_over(&self, vs: impl IntoIterator<Item = Vertex>) -> Q {
        vs.into_iter().fold(Q::zero(), |a, v| a + &self.w[v as usize])
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().all(Zero::is_zero)
    }

    /// Pointwise A ⪯ B.
    pub fn le(&self, other: &NodeWeighting) -> bool {
        self.w.len() == other.w.len() && self.w.iter().zip(&other.w).all(|(a, b)| a <= b)
    }

    pub fn plus(&self, other: &NodeWeighting) -> NodeWeighting {
        NodeWeighting { w: self.w.iter().zip(&other.w).map(|(a, b)| a + b).collect() }
    }

    /// Pointwise difference; errors if it would go negative.
    pub fn minus(&self, other: &NodeWeighting) -> Result<NodeWeighting> {
        let w: Vec<Q> = self.w.iter().zip(&other.w).map(|(a, b)| a - b).collect();
        NodeWeighting::from_values(w)
    }
}

/// A moving cut with values `units/h` in {0, 1/h, …, 1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MovingCut {
    h: u64,
    units: BTreeMap<EdgeId, u64>,
}

impl MovingCut {
    pub fn zero(h: u64) -> Self {
        assert!(h >= 1, "cut grid must be positive");
        MovingCut { h, units: BTreeMap::new() }
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn units(&self) -> &BTreeMap<EdgeId, u64> {
        &self.units
    }

    pub fn units_of(&self, e: EdgeId) -> u64 {
        self.units.get(&e).copied().unwrap_or(0)
    }

    pub fn value(&self, e: EdgeId) -> Q {
        Q::new(self.units_of(e).into(), self.h.into())
    }

    /// Sets C(e) = units/h, clamped to 1.
    pub fn set_units(&mut self, e: EdgeId, units: u64) {
        let u = units.min(self.h);
        if u == 0 {
            self.units.remove(&e);
        } else {
            self.units.insert(e, u);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.units.is_empty()
    }

    /// |C| = Σ C(e)·u(e).
    pub fn size(&self, g: &Graph) -> Q {
        self.units.iter().fold(Q::zero(), |acc, (&e, _)| acc + self.value(e) * &g.edge(e).expect("cut edge in graph").capacity)
    }

    /// deg_C(v) = Σ_{e ∋ v} u(e)·C(e).
    pub fn degree(&self, g: &Graph) -> NodeWeighting {
        let mut w = NodeWeighting::zero(g.n());
        for &e in self.units.keys() {
            let edge = g.edge(e).expect("cut edge in graph");
            let x = self.value(e) * &edge.capacity;
            w.add_at(edge.u, &x);
            w.add_at(edge.v, &x);
        }
        w
    }

    /// C + other on the same grid, each value capped at 1. Returns the increment
    /// actually applied (which differs from `other` only where the cap binds).
    pub fn add_capped(&mut self, other: &MovingCut) -> MovingCut {
        assert_eq!(self.h, other.h, "cuts on different grids");
        let mut applied = MovingCut::zero(self.h);
        for (&e, &u) in &other.units {
            let cur = self.units_of(e);
            let new = (cur + u).min(self.h);
            applied.set_units(e, new - cur);
            self.set_units(e, new);
        }
        applied
    }

    pub fn check_edges(&self, g: &Graph) -> Result<()> {
        for &e in self.units.keys() {
            g.edge(e).ok_or(Error::UnknownEdge(e))?;
        }
        Ok(())
    }
}

/// D : V × V → ℚ≥0 with an optional claimed length bound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Demand {
    values: BTreeMap<(Vertex, Vertex), Q>,
    pub length_bound: Option<u64>,
}

impl Demand {
    pub fn new() -> Self {
        Demand::default()
    }

    pub fn add(&mut self, u: Vertex, v: Vertex, x: Q) {
        if x.is_zero() {
            return;
        }
        *self.values.entry((u, v)).or_insert_with(Q::zero) += x;
    }

    pub fn get(&self, u: Vertex, v: Vertex) -> Q {
        self.values.get(&(u, v)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(Vertex, Vertex), &Q)> {
        self.values.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> Q {
        self.values.values().fold(Q::zero(), |a, x| a + x)
    }

    /// load(D)(v) = Σ_u D(u,v) + D(v,u).
    pub fn load(&self, n: usize) -> NodeWeighting {
        let mut w = NodeWeighting::zero(n);
        for (&(u, v), x) in &self.values {
            w.add_at(u, x);
            w.add_at(v, x);
        }
        w
    }

    pub fn respects(&self, a: &NodeWeighting) -> bool {
        self.load(a.n()).le(a)
    }

    /// True iff every support pair is within distance `h` in `g`.
    pub fn is_h_length(&self, g: &Graph, h: u64) -> bool {
        let mut cache: BTreeMap<Vertex, Vec<Option<u64>>> = BTreeMap::new();
        self.values.keys().all(|&(u, v)| {
            let d = cache.entry(u).or_insert_with(|| sssp(g, u));
            d[v as usize].is_some_and(|x| x <= h)
        })
    }

    /// Unordered pair totals D(u,v) + D(v,u) for u ≠ v, keyed with u < v.
    pub fn symmetric(&self) -> BTreeMap<(Vertex, Vertex), Q> {
        let mut out: BTreeMap<(Vertex, Vertex), Q> = BTreeMap::new();
        for (&(u, v), x) in &self.values {
            if u != v {
                *out.entry((u.min(v), u.max(v))).or_insert_with(Q::zero) += x;
            }
        }
        out
    }

    pub fn restricted(&self, mut keep: impl FnMut(Vertex, Vertex) -> bool) -> Demand {
        Demand { values: self.values.iter().filter(|(k, _)| keep(k.0, k.1)).map(|(k, x)| (*k, x.clone())).collect(), length_bound: self.length_bound }
    }
}

/// Separated demand and sparsity of a cut: `sep = Σ D(u,v)` over pairs with
/// `dist_{G−C}(u,v) > h`, sparsity `|C| / sep` (`None` means infinite).
pub fn demand_stats(c: &MovingCut, d: &Demand, g: &Graph, h: u64) -> Result<(Q, Option<Q>)> {
    c.check_edges(g)?;
    let gc = g.apply_cut(c, h)?;
    let mut cache: BTreeMap<Vertex, Vec<Option<u64>>> = BTreeMap::new();
    let mut sep = Q::zero();
    for (&(u, v), x) in d.pairs() {
        let dist = cache.entry(u).or_insert_with(|| sssp(&gc, u));
        if dist[v as usize].is_none_or(|dd| dd > h) {
            sep += x;
        }
    }
    let sparsity = if sep.is_zero() { None } else { Some(c.size(g) / &sep) };
    Ok((sep, sparsity))
}

pub fn show_weighting(a: &NodeWeighting) -> Vec<String> {
    a.values().iter().map(rational::show).collect()
}
