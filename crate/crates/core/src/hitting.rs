//! Deterministic hitting sets by the method of conditional expectations.
//!
//! Each edge e is "sampled" with probability ρ_e = min(1, β·w(e)). The estimator
//! E[X_fail] sums the probabilities that a P-set is missed and that a Q-set receives more
//! than α edges; edges are fixed in ascending id, each time to the value that does not
//! increase the estimator. Everything is exact rational arithmetic.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{lexmax_paths_from, EdgeId, Graph, Vertex};
use crate::rational::{self, Q};
use crate::tree::{maximal_interval, ClusterTree};
use crate::weights::{MovingCut, NodeWeighting};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    /// Ground set in fixing order.
    pub elements: Vec<EdgeId>,
    pub weight: BTreeMap<EdgeId, Q>,
    /// Sets that must be hit.
    pub p_sets: Vec<Vec<EdgeId>>,
    /// Sets that may receive at most α elements. Deduplicated.
    pub q_sets: Vec<Vec<EdgeId>>,
    pub tau_low: Q,
    pub tau_high: Q,
}

fn canonical(mut s: Vec<EdgeId>) -> Vec<EdgeId> {
    s.sort_unstable();
    s.dedup();
    s
}

impl ConstraintSystem {
    /// Validates weights in [0,1], w(P) ≥ τ_low, w(Q) ≤ τ_high, τ_low ∈ (0,1], τ_high ≥ 1.
    pub fn new(
        elements: Vec<EdgeId>,
        weight: BTreeMap<EdgeId, Q>,
        p_sets: Vec<Vec<EdgeId>>,
        q_sets: Vec<Vec<EdgeId>>,
        tau_low: Q,
        tau_high: Q,
    ) -> Result<ConstraintSystem> {
        let elements = canonical(elements);
        if tau_low <= Q::zero() || tau_low > Q::one() {
            return Err(Error::InvalidArgument(format!("τ_low = {} outside (0, 1]", rational::show(&tau_low))));
        }
        if tau_high < Q::one() {
            return Err(Error::InvalidArgument(format!("τ_high = {} below 1", rational::show(&tau_high))));
        }
        for &e in &elements {
            let w = weight.get(&e).cloned().unwrap_or_else(Q::zero);
            if w < Q::zero() || w > Q::one() {
                return Err(Error::InvalidArgument(format!("weight of {e} outside [0, 1]")));
            }
        }
        let known: BTreeSet<EdgeId> = elements.iter().copied().collect();
        let w_of = |s: &[EdgeId]| -> Result<Q> {
            let mut t = Q::zero();
            for e in s {
                if !known.contains(e) {
                    return Err(Error::UnknownEdge(*e));
                }
                if let Some(x) = weight.get(e) {
                    t += x;
                }
            }
            Ok(t)
        };
        let p_sets: Vec<Vec<EdgeId>> = p_sets.into_iter().map(canonical).collect();
        for p in &p_sets {
            if w_of(p)? < tau_low {
                return Err(Error::InvalidArgument(format!("P-set {p:?} lighter than τ_low")));
            }
        }
        let q_sets: Vec<Vec<EdgeId>> = q_sets.into_iter().map(canonical).collect::<BTreeSet<_>>().into_iter().collect();
        for q in &q_sets {
            if w_of(q)? > tau_high {
                return Err(Error::InvalidArgument(format!("Q-set {q:?} heavier than τ_high")));
            }
        }
        Ok(ConstraintSystem { elements, weight, p_sets, q_sets, tau_low, tau_high })
    }

    pub fn m(&self) -> usize {
        self.p_sets.len() + self.q_sets.len()
    }

    /// β = ⌈100·ln(max(m,2))·2³²⌉/2³² / τ_low.
    pub fn beta(&self) -> Q {
        let ln = (self.m().max(2) as f64).ln();
        rational::ceil_f64_grid(100.0 * ln, 32) / &self.tau_low
    }

    /// α = 2·β·τ_high.
    pub fn alpha(&self) -> Q {
        Q::from_integer(2.into()) * self.beta() * &self.tau_high
    }

    /// A Q-set is violated when it receives at least ⌊α⌋ + 1 elements.
    pub fn violation_threshold(&self) -> usize {
        let a = self.alpha().floor().to_integer();
        usize::try_from(a).unwrap_or(usize::MAX - 1) + 1
    }

    pub fn rho(&self, beta: &Q) -> BTreeMap<EdgeId, Q> {
        self.elements
            .iter()
            .map(|&e| {
                let w = self.weight.get(&e).cloned().unwrap_or_else(Q::zero);
                let r = w * beta;
                (e, if r > Q::one() { Q::one() } else { r })
            })
            .collect()
    }
}

/// P[at least c of independent Bernoulli(probs) succeed], by the DP
/// f_{r,c} = ρ_r·f_{r−1,c−1} + (1−ρ_r)·f_{r−1,c}.
pub fn at_least_probability(probs: &[Q], c: usize) -> Q {
    if c == 0 {
        return Q::one();
    }
    if c > probs.len() {
        return Q::zero();
    }
    // f[k] = P[at least k successes so far], k = 0..=c
    let mut f = vec![Q::zero(); c + 1];
    f[0] = Q::one();
    for p in probs {
        for k in (1..=c).rev() {
            let v = p * &f[k - 1] + (Q::one() - p) * &f[k];
            f[k] = v;
        }
    }
    f[c].clone()
}

/// E[X_fail | fixed]: unfixed elements keep their sampling probabilities.
pub fn expected_failures(cs: &ConstraintSystem, rho: &BTreeMap<EdgeId, Q>, fixed: &BTreeMap<EdgeId, bool>) -> Q {
    let threshold = cs.violation_threshold();
    let mut total = Q::zero();
    for p in &cs.p_sets {
        let mut miss = Q::one();
        for e in p {
            match fixed.get(e) {
                Some(true) => {
                    miss = Q::zero();
                    break;
                }
                Some(false) => {}
                None => miss *= Q::one() - &rho[e],
            }
        }
        total += miss;
    }
    for q in &cs.q_sets {
        let mut have = 0usize;
        let mut probs = Vec::new();
        for e in q {
            match fixed.get(e) {
                Some(true) => have += 1,
                Some(false) => {}
                None => probs.push(rho[e].clone()),
            }
        }
        total += at_least_probability(&probs, threshold.saturating_sub(have));
    }
    total
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub chosen: BTreeSet<EdgeId>,
    /// E[X_fail | prefix] before any fixing and after each step.
    pub trace: Vec<Q>,
    pub beta: Q,
    pub alpha: Q,
}

pub fn derandomized_select(cs: &ConstraintSystem) -> Result<Selection> {
    let beta = cs.beta();
    let alpha = cs.alpha();
    if cs.m() == 0 {
        return Ok(Selection { chosen: BTreeSet::new(), trace: vec![Q::zero()], beta, alpha });
    }
    let rho = cs.rho(&beta);
    let half = Q::new(1.into(), 2.into());
    let mut fixed = BTreeMap::new();
    let mut trace = vec![expected_failures(cs, &rho, &fixed)];
    for &e in &cs.elements {
        fixed.insert(e, false);
        let e0 = expected_failures(cs, &rho, &fixed);
        fixed.insert(e, true);
        let e1 = expected_failures(cs, &rho, &fixed);
        let take = e1 < e0 || (e1 == e0 && rho[&e] >= half);
        fixed.insert(e, take);
        trace.push(if take { e1 } else { e0 });
    }
    let chosen: BTreeSet<EdgeId> = fixed.iter().filter(|(_, &x)| x).map(|(&e, _)| e).collect();
    let check = check_selection(cs, &chosen);
    if !check.all_hit || check.max_q >= cs.violation_threshold() {
        return Err(Error::Construction(format!("hitting-set selection failed (estimator started at {})", rational::show(&trace[0]))));
    }
    Ok(Selection { chosen, trace, beta, alpha })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionCheck {
    pub all_hit: bool,
    pub max_q: usize,
}

/// Direct set arithmetic: every P-set intersects S, and the largest |Q ∩ S|.
pub fn check_selection(cs: &ConstraintSystem, s: &BTreeSet<EdgeId>) -> SelectionCheck {
    let all_hit = cs.p_sets.iter().all(|p| p.iter().any(|e| s.contains(e)));
    let max_q = cs.q_sets.iter().map(|q| q.iter().filter(|e| s.contains(e)).count()).max().unwrap_or(0);
    SelectionCheck { all_hit, max_q }
}

/// Edges with at least one endpoint in `vs`.
pub fn incident_edges(g: &Graph, vs: &[Vertex]) -> Vec<EdgeId> {
    let mut out: Vec<EdgeId> = vs.iter().flat_map(|&v| g.incident(v).iter().map(|&r| g.edge_at(r).id)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// C(P) for a set of edges.
pub fn cut_weight(c: &MovingCut, edges: &[EdgeId]) -> Q {
    edges.iter().map(|&e| c.value(e)).fold(Q::zero(), |a, b| a + b)
}

/// Constraints for L_j (j ≥ 1) with w = C_j:
/// P = single edges and lex-max shortest paths of `g` with C_j(P) ≥ τ_hit;
/// Q = incident edges of every cluster S with A_j(S) ≤ τ_heavy, and of every maximal
/// interval T_S[t, t') at threshold τ_heavy for A_j, both orientations of each tree edge.
pub fn build_constraints(
    g: &Graph,
    cut: &MovingCut,
    a_j: &NodeWeighting,
    trees: &[&ClusterTree],
    tau_hit: &Q,
    tau_heavy: &Q,
) -> Result<ConstraintSystem> {
    let weight: BTreeMap<EdgeId, Q> = g.edges().iter().map(|e| (e.id, cut.value(e.id))).collect();
    let mut p_sets: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
    for e in g.edges() {
        if weight[&e.id] >= *tau_hit {
            p_sets.insert(vec![e.id]);
        }
    }
    for u in 0..g.n() as Vertex {
        for path in lexmax_paths_from(g, u).into_iter().flatten() {
            if path.to <= u || path.edges.is_empty() {
                continue;
            }
            if cut_weight(cut, &path.edges) >= *tau_hit {
                p_sets.insert(canonical(path.edges));
            }
        }
    }
    let mut q_sets: Vec<Vec<EdgeId>> = Vec::new();
    for t in trees {
        if a_j.sum_over(t.vertices.iter().copied()) <= *tau_heavy {
            q_sets.push(incident_edges(g, &t.vertices));
        }
        for te in &t.edges {
            for (x, y) in [(te.parent, te.child), (te.child, te.parent)] {
                let pos = tour_pos(t, x, y) as usize;
                let t_end = maximal_interval(&t.tour, pos, a_j, tau_heavy);
                let vs = t.tour.interval_vertices(pos, t_end);
                q_sets.push(incident_edges(g, &vs));
            }
        }
    }
    let tau_high = if *tau_heavy < Q::one() { Q::one() } else { tau_heavy.clone() };
    ConstraintSystem::new(g.edges().iter().map(|e| e.id).collect(), weight, p_sets.into_iter().collect(), q_sets, tau_hit.clone(), tau_high)
}

/// pos(parent, child) = start(child); pos(child, parent) = end(child) + 1.
pub fn tour_pos(t: &ClusterTree, x: Vertex, y: Vertex) -> u32 {
    let is_parent_child = t.edges.iter().any(|e| e.parent == x && e.child == y);
    if is_parent_child {
        t.tour.start(y).expect("child on tour")
    } else {
        t.tour.end(x).expect("child on tour") + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn brute_at_least(probs: &[Q], c: usize) -> Q {
        let r = probs.len();
        let mut total = Q::zero();
        for mask in 0u32..(1 << r) {
            if (mask.count_ones() as usize) < c {
                continue;
            }
            let mut p = Q::one();
            for (i, x) in probs.iter().enumerate() {
                p *= if mask >> i & 1 == 1 { x.clone() } else { Q::one() - x };
            }
            total += p;
        }
        total
    }

    #[test]
    fn dp_matches_enumeration() {
        let probs: Vec<Q> = (1..=9).map(|i| qf(i, 11)).collect();
        for c in 0..=10 {
            assert_eq!(at_least_probability(&probs, c), brute_at_least(&probs, c));
        }
    }

    #[test]
    fn forced_single_pick() {
        let cs = ConstraintSystem::new(
            vec![0, 1, 2],
            [(0, qf(1, 2)), (1, Q::zero()), (2, Q::zero())].into_iter().collect(),
            vec![vec![0]],
            vec![],
            qf(1, 2),
            Q::one(),
        )
        .unwrap();
        let s = derandomized_select(&cs).unwrap();
        assert!(s.chosen.contains(&0));
    }

    #[test]
    fn empty_system_selects_nothing() {
        let cs = ConstraintSystem::new(vec![0, 1], BTreeMap::new(), vec![], vec![], Q::one(), Q::one()).unwrap();
        assert!(derandomized_select(&cs).unwrap().chosen.is_empty());
    }

    #[test]
    fn q_sets_are_deduplicated() {
        let cs = ConstraintSystem::new(vec![0, 1], BTreeMap::new(), vec![], vec![vec![1, 0], vec![0, 1]], Q::one(), Q::one()).unwrap();
        assert_eq!(cs.q_sets, vec![vec![0, 1]]);
    }
}
