use std::collections::{BTreeMap, BTreeSet};

use ftlabels::graph::{all_pairs, simple_paths, EdgeId, Graph};
use ftlabels::harness::generate_graph;
use ftlabels::hitting::{at_least_probability, build_constraints, check_selection, derandomized_select, expected_failures, ConstraintSystem};
use ftlabels::rational::{q, qf, Q};
use ftlabels::tree::build_cluster_tree;
use ftlabels::weights::{MovingCut, NodeWeighting};
use num::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn weights(ws: &[(EdgeId, Q)]) -> BTreeMap<EdgeId, Q> {
    ws.iter().cloned().collect()
}

/// E[X_fail] by summing over every outcome of the unfixed elements.
fn brute_expectation(cs: &ConstraintSystem, rho: &BTreeMap<EdgeId, Q>, fixed: &BTreeMap<EdgeId, bool>) -> Q {
    let free: Vec<EdgeId> = cs.elements.iter().copied().filter(|e| !fixed.contains_key(e)).collect();
    let thr = cs.violation_threshold();
    let mut total = Q::zero();
    for mask in 0u32..(1 << free.len()) {
        let mut pr = Q::one();
        let mut s: BTreeSet<EdgeId> = fixed.iter().filter(|(_, &x)| x).map(|(&e, _)| e).collect();
        for (i, e) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                pr *= &rho[e];
                s.insert(*e);
            } else {
                pr *= Q::one() - &rho[e];
            }
        }
        let missed = cs.p_sets.iter().filter(|p| !p.iter().any(|e| s.contains(e))).count();
        let over = cs.q_sets.iter().filter(|qs| qs.iter().filter(|e| s.contains(e)).count() >= thr).count();
        total += pr * Q::from_integer(((missed + over) as i64).into());
    }
    total
}

fn random_system(seed: u64, m: usize, np: usize, nq: usize) -> ConstraintSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: BTreeMap<EdgeId, Q> = (0..m as EdgeId).map(|e| (e, qf(rng.gen_range(1..=4), 2000))).collect();
    let mut pick = |k: usize| -> Vec<EdgeId> {
        let mut s: Vec<EdgeId> = (0..k).map(|_| rng.gen_range(0..m as EdgeId)).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let p: Vec<Vec<EdgeId>> = (0..np).map(|_| pick(4)).collect();
    let qs: Vec<Vec<EdgeId>> = (0..nq).map(|_| pick(6)).collect();
    let tau_low = p.iter().map(|s| s.iter().map(|e| w[e].clone()).sum::<Q>()).min().unwrap_or_else(Q::one);
    ConstraintSystem::new((0..m as EdgeId).collect(), w, p, qs, tau_low, q(1)).unwrap()
}

#[test]
fn single_forced_element_is_picked() {
    let cs = ConstraintSystem::new(vec![0, 1], weights(&[(0, q(1))]), vec![vec![0]], vec![], q(1), q(1)).unwrap();
    let s = derandomized_select(&cs).unwrap();
    assert!(s.chosen.contains(&0));
    assert!(!s.chosen.contains(&1), "a weight-zero element is never sampled");
}

#[test]
fn saturated_probabilities_take_everything() {
    let cs =
        ConstraintSystem::new(vec![0, 1, 2], weights(&[(0, q(1)), (1, q(1)), (2, q(1))]), vec![vec![0, 1], vec![2]], vec![], q(1), q(1)).unwrap();
    let rho = cs.rho(&cs.beta());
    assert!(rho.values().all(|r| r.is_one()));
    assert_eq!(derandomized_select(&cs).unwrap().chosen, BTreeSet::from([0, 1, 2]));
}

#[test]
fn no_constraints_selects_nothing() {
    let cs = ConstraintSystem::new(vec![0, 1], BTreeMap::new(), vec![], vec![], q(1), q(1)).unwrap();
    let s = derandomized_select(&cs).unwrap();
    assert!(s.chosen.is_empty());
}

#[test]
fn constructor_rejects_bad_systems() {
    let w = weights(&[(0, qf(1, 2)), (1, qf(1, 2))]);
    assert!(ConstraintSystem::new(vec![0, 1], w.clone(), vec![], vec![], q(0), q(1)).is_err());
    assert!(ConstraintSystem::new(vec![0, 1], w.clone(), vec![], vec![], q(1), qf(1, 2)).is_err());
    assert!(ConstraintSystem::new(vec![0, 1], w.clone(), vec![vec![0]], vec![], q(1), q(1)).is_err(), "P lighter than τ_low");
    assert!(ConstraintSystem::new(vec![0, 1], w.clone(), vec![], vec![vec![0, 1]], qf(1, 2), qf(1, 1)).is_ok());
    assert!(ConstraintSystem::new(vec![0], w.clone(), vec![vec![1]], vec![], qf(1, 4), q(1)).is_err(), "unknown element");
    assert!(ConstraintSystem::new(vec![0], weights(&[(0, q(2))]), vec![], vec![], q(1), q(1)).is_err());
}

#[test]
fn random_systems_are_hit_and_bounded() {
    for seed in 0..20 {
        let cs = random_system(seed, 20, 10, 10);
        let s = derandomized_select(&cs).unwrap();
        let chk = check_selection(&cs, &s.chosen);
        assert!(chk.all_hit, "seed {seed}");
        assert!(Q::from_integer((chk.max_q as i64).into()) <= s.alpha, "seed {seed}");
        assert!(s.trace[0] <= qf(1, 2), "seed {seed}: estimator starts at {}", s.trace[0]);
        assert!(s.trace.windows(2).all(|w| w[1] <= w[0]), "seed {seed}");
    }
}

#[test]
fn estimator_matches_enumeration() {
    for seed in 0..10 {
        let cs = random_system(100 + seed, 10, 4, 4);
        let rho = cs.rho(&(cs.beta() / q(400)));
        let mut fixed = BTreeMap::new();
        assert_eq!(expected_failures(&cs, &rho, &fixed), brute_expectation(&cs, &rho, &fixed));
        fixed.insert(0, true);
        fixed.insert(3, false);
        assert_eq!(expected_failures(&cs, &rho, &fixed), brute_expectation(&cs, &rho, &fixed));
    }
}

/// P-sets recomputed from scratch: single edges and lex-max shortest paths over enumeration.
fn brute_p_sets(g: &Graph, c: &MovingCut, tau: &Q) -> BTreeSet<Vec<EdgeId>> {
    let mut out = BTreeSet::new();
    let cw = |es: &[EdgeId]| es.iter().map(|&e| c.value(e)).sum::<Q>();
    for e in g.edges() {
        if c.value(e.id) >= *tau {
            out.insert(vec![e.id]);
        }
    }
    let apsp = all_pairs(g);
    for u in 0..g.n() as u32 {
        for v in u + 1..g.n() as u32 {
            let Some(d) = apsp[u as usize][v as usize] else { continue };
            let paths = simple_paths(g, u, v, d, 100_000).unwrap();
            let ind = |p: &ftlabels::graph::Path| g.edges().iter().map(|e| p.edges.contains(&e.id)).collect::<Vec<bool>>();
            let best = paths.iter().filter(|p| p.length(g) == d).max_by_key(|p| ind(p)).unwrap();
            if cw(&best.edges) >= *tau {
                let mut s = best.edges.clone();
                s.sort_unstable();
                out.insert(s);
            }
        }
    }
    out
}

#[test]
fn p_sets_match_brute_force_on_small_graphs() {
    let g = Graph::from_triples(6, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (5, 0, 1), (0, 3, 3), (1, 4, 2)]).unwrap();
    let mut c = MovingCut::zero(4);
    c.set_units(1, 1);
    c.set_units(3, 2);
    c.set_units(6, 1);
    let a = NodeWeighting::zero(6);
    for tau in [qf(1, 4), qf(1, 2), qf(3, 4)] {
        let cs = build_constraints(&g, &c, &a, &[], &tau, &q(1)).unwrap();
        let got: BTreeSet<Vec<EdgeId>> = cs.p_sets.iter().cloned().collect();
        assert_eq!(got, brute_p_sets(&g, &c, &tau), "τ = {tau}");
    }
}

#[test]
fn zero_cut_gives_no_p_sets() {
    let g = generate_graph(4, 10, 16, 4);
    let cs = build_constraints(&g, &MovingCut::zero(4), &g.degree(), &[], &qf(1, 100), &q(2)).unwrap();
    assert!(cs.p_sets.is_empty());
}

#[test]
fn light_cluster_contributes_its_incident_edges() {
    let g = Graph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
    let t = build_cluster_tree(&g, &[0, 1]).unwrap();
    let a = NodeWeighting::from_values(vec![qf(1, 4), qf(1, 4), q(0), q(0)]).unwrap();
    let cs = build_constraints(&g, &MovingCut::zero(1), &a, &[&t], &q(1), &q(1)).unwrap();
    assert!(cs.q_sets.contains(&vec![0, 1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_matches_enumeration(nums in proptest::collection::vec(0i64..=8, 0..9), c in 0usize..10) {
        let probs: Vec<Q> = nums.iter().map(|&x| qf(x, 8)).collect();
        let mut want = Q::zero();
        for mask in 0u32..(1 << probs.len()) {
            if (mask.count_ones() as usize) < c {
                continue;
            }
            let mut pr = Q::one();
            for (i, p) in probs.iter().enumerate() {
                pr *= if mask >> i & 1 == 1 { p.clone() } else { Q::one() - p };
            }
            want += pr;
        }
        prop_assert_eq!(at_least_probability(&probs, c), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_never_increases(seed in 0u64..100_000) {
        let cs = random_system(seed, 14, 6, 6);
        let s = derandomized_select(&cs).unwrap();
        prop_assert!(s.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(s.trace[0] <= qf(1, 2));
        let chk = check_selection(&cs, &s.chosen);
        prop_assert!(chk.all_hit && chk.max_q < cs.violation_threshold());
    }
}
