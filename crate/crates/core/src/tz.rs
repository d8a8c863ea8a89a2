//! Thorup–Zwick landmark hierarchy: sets, pivots, bunches, clusters and cluster trees.
//!
//! Landmark sets are picked greedily (no sampling): A_{i+1} ⊆ A_i hits, for every
//! vertex with enough A_i-vertices in reach, its ⌈n^{1/k}·ln n⌉ nearest ones.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{all_pairs, sssp_tree, Dist, Graph, Vertex};
use crate::tree::EulerTour;

/// Constant in the bunch-size cap c_B·k·n^{1/k}·ln n.
pub const C_BUNCH: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BunchEntry {
    /// Level i with w ∈ A_i ∖ A_{i+1}.
    pub level: u32,
    pub dist: u64,
    /// Tour interval of the owning vertex in T_w.
    pub start: u32,
    pub end: u32,
}

/// TZ part of a vertex label: pivot array plus the bunch map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TzLabel {
    pub vertex: Vertex,
    /// pivot_i(v) and dist(v, A_i); `None` when A_i is out of reach.
    pub pivots: Vec<Option<(Vertex, u64)>>,
    pub bunch: BTreeMap<Vertex, BunchEntry>,
}

impl TzLabel {
    pub fn bunch_size(&self) -> usize {
        self.bunch.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterTreeW {
    pub root: Vertex,
    pub members: Vec<Vertex>,
    pub tour: EulerTour,
    pub parent: BTreeMap<Vertex, Vertex>,
    pub depth: BTreeMap<Vertex, u64>,
}

#[derive(Clone, Debug)]
pub struct TzStructure {
    pub k: usize,
    /// A_0 ⊇ A_1 ⊇ … ⊇ A_{k−1}; A_k = ∅ is implicit.
    pub sets: Vec<Vec<Vertex>>,
    pub labels: Vec<Arc<TzLabel>>,
    /// Keyed by landmark w.
    pub trees: BTreeMap<Vertex, ClusterTreeW>,
    pub bunch_cap: usize,
}

pub fn bunch_cap(n: usize, k: usize) -> usize {
    let n = n.max(1) as f64;
    ((C_BUNCH * k as f64 * n.powf(1.0 / k as f64) * n.ln()).ceil() as usize).max(1)
}

fn sample_size(n: usize, k: usize) -> usize {
    let nf = n.max(1) as f64;
    ((nf.powf(1.0 / k as f64) * nf.ln()).ceil() as usize).max(1)
}

fn lt(a: Dist, b: Dist) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Nearest member of `set` from `u`, ties to the lower id.
fn nearest(dist: &[Dist], set: &[Vertex]) -> Option<(Vertex, u64)> {
    set.iter().filter_map(|&w| dist[w as usize].map(|d| (d, w))).min().map(|(d, w)| (w, d))
}

/// Greedy hitting set for the `size` nearest A_i-vertices of every vertex.
fn next_level(apsp: &[Vec<Dist>], a_i: &[Vertex], size: usize) -> Vec<Vertex> {
    let mut sets: Vec<BTreeSet<Vertex>> = Vec::new();
    for row in apsp {
        let mut near: Vec<(u64, Vertex)> = a_i.iter().filter_map(|&w| row[w as usize].map(|d| (d, w))).collect();
        if near.len() < size {
            continue;
        }
        near.sort_unstable();
        sets.push(near[..size].iter().map(|x| x.1).collect());
    }
    let mut chosen = BTreeSet::new();
    while !sets.is_empty() {
        let mut best: Option<(usize, Vertex)> = None;
        for &w in a_i {
            let c = sets.iter().filter(|s| s.contains(&w)).count();
            if c > 0 && best.is_none_or(|(bc, _)| c > bc) {
                best = Some((c, w));
            }
        }
        let (_, w) = best.expect("non-empty set has an element");
        chosen.insert(w);
        sets.retain(|s| !s.contains(&w));
    }
    chosen.into_iter().collect()
}

/// Builds the structure on the failure-free graph.
pub fn tz_build(g: &Graph, k: usize) -> Result<TzStructure> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let n = g.n();
    let apsp = all_pairs(g);
    let size = sample_size(n, k);
    let mut sets: Vec<Vec<Vertex>> = vec![(0..n as Vertex).collect()];
    for _ in 1..k {
        let next = next_level(&apsp, sets.last().unwrap(), size);
        sets.push(next);
    }
    let cap = bunch_cap(n, k);

    // pivots with the tie rule pivot_i = pivot_{i+1} when dist(v, A_i) = dist(v, A_{i+1})
    let mut pivots: Vec<Vec<Option<(Vertex, u64)>>> = vec![vec![None; k]; n];
    for v in 0..n {
        for i in (0..k).rev() {
            let mut p = nearest(&apsp[v], &sets[i]);
            if i + 1 < k {
                if let (Some((_, d)), Some((w1, d1))) = (p, pivots[v][i + 1]) {
                    if d == d1 {
                        p = Some((w1, d1));
                    }
                }
            }
            pivots[v][i] = p;
        }
    }

    // bunches
    let mut levels_of = vec![0u32; n];
    for (i, s) in sets.iter().enumerate() {
        for &w in s {
            levels_of[w as usize] = i as u32;
        }
    }
    let mut bunch_raw: Vec<BTreeMap<Vertex, (u32, u64)>> = vec![BTreeMap::new(); n];
    for v in 0..n {
        for i in 0..k {
            let bound = if i + 1 < k { pivots[v][i + 1].map(|x| x.1) } else { None };
            for &w in &sets[i] {
                if levels_of[w as usize] != i as u32 {
                    continue;
                }
                let d = apsp[v][w as usize];
                if let Some(x) = d.filter(|_| lt(d, bound)) {
                    bunch_raw[v].insert(w, (i as u32, x));
                }
            }
        }
        if bunch_raw[v].len() > cap {
            return Err(Error::Construction(format!("bunch of vertex {v} has {} entries, cap {cap}", bunch_raw[v].len())));
        }
    }

    // clusters and their shortest-path trees rooted at the landmark
    let mut clusters: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    for (v, b) in bunch_raw.iter().enumerate() {
        for &w in b.keys() {
            clusters.entry(w).or_default().push(v as Vertex);
        }
    }
    let mut trees = BTreeMap::new();
    for (&w, members) in &clusters {
        let mut allowed = vec![false; n];
        for &v in members {
            allowed[v as usize] = true;
        }
        let (dist, parent_rank) = sssp_tree(g, w, Some(&allowed));
        let mut children: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        let mut parent = BTreeMap::new();
        let mut depth = BTreeMap::new();
        for &v in members {
            let d = dist[v as usize].ok_or_else(|| Error::Construction(format!("cluster of {w} is not shortest-path closed at {v}")))?;
            if Some(d) != apsp[w as usize][v as usize] {
                return Err(Error::Construction(format!("cluster of {w} is not shortest-path closed at {v}")));
            }
            depth.insert(v, d);
            if v != w {
                let p = g.edge_at(parent_rank[v as usize].unwrap()).other(v);
                children.entry(p).or_default().push(v);
                parent.insert(v, p);
            }
        }
        for kids in children.values_mut() {
            kids.sort_unstable();
        }
        let tour = EulerTour::from_children(w, &children);
        trees.insert(w, ClusterTreeW { root: w, members: members.clone(), tour, parent, depth });
    }

    let labels = (0..n)
        .map(|v| {
            let bunch = bunch_raw[v]
                .iter()
                .map(|(&w, &(level, dist))| {
                    let t = &trees[&w].tour;
                    let (start, end) = (t.start(v as Vertex).unwrap(), t.end(v as Vertex).unwrap());
                    (w, BunchEntry { level, dist, start, end })
                })
                .collect();
            Arc::new(TzLabel { vertex: v as Vertex, pivots: pivots[v].clone(), bunch })
        })
        .collect();
    Ok(TzStructure { k, sets, labels, trees, bunch_cap: cap })
}

/// Landmark chosen for (p, q): the least level i where pivot_i(p) ∈ Bunch(q) or
/// pivot_i(q) ∈ Bunch(p), preferring p's pivot.
pub fn tz_landmark(lp: &TzLabel, lq: &TzLabel) -> Option<Vertex> {
    for i in 0..lp.pivots.len() {
        if let Some((w, _)) = lp.pivots[i] {
            if lq.bunch.contains_key(&w) {
                return Some(w);
            }
        }
        if let Some((w, _)) = lq.pivots[i] {
            if lp.bunch.contains_key(&w) {
                return Some(w);
            }
        }
    }
    None
}

/// dist(p,w) + dist(w,q) through the chosen landmark; `None` when p and q are disconnected.
pub fn tz_query(lp: &TzLabel, lq: &TzLabel) -> Option<u64> {
    if lp.vertex == lq.vertex {
        return Some(0);
    }
    let w = tz_landmark(lp, lq)?;
    Some(lp.bunch[&w].dist + lq.bunch[&w].dist)
}
