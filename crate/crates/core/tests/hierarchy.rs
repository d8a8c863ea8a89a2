use ftlabels::cuts::{CutConfig, Mode};
use ftlabels::graph::Graph;
use ftlabels::harness::generate_graph;
use ftlabels::hierarchy::{build_hierarchy, default_phi, validate_hierarchy, Hierarchy, HierarchyParams};
use ftlabels::rational::{q, qf, Q};
use ftlabels::weights::NodeWeighting;
use proptest::prelude::*;

fn complete(n: u32) -> Graph {
    let mut t = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            t.push((u, v, 1));
        }
    }
    Graph::from_triples(n as usize, &t).unwrap()
}

fn two_triangles() -> Graph {
    Graph::from_triples(6, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1), (2, 3, 1)]).unwrap()
}

fn barbell() -> Graph {
    // two K4s joined by a path of three edges
    let mut t = Vec::new();
    for base in [0u32, 6] {
        for u in 0..4 {
            for v in u + 1..4 {
                t.push((base + u, base + v, 1));
            }
        }
    }
    t.extend([(3, 4, 1), (4, 5, 1), (5, 6, 1)]);
    Graph::from_triples(10, &t).unwrap()
}

/// A_0 = A + A_1 and A_j = deg(C_j) + A_{j+1}, recomputed from the cuts alone.
fn expected_levels(h: &Hierarchy, g: &Graph) -> Vec<NodeWeighting> {
    let d = h.d();
    let mut out = vec![NodeWeighting::zero(g.n()); d + 1];
    for j in (1..=d).rev() {
        let below = if j < d { out[j + 1].clone() } else { NodeWeighting::zero(g.n()) };
        out[j] = h.cuts[j].degree(g).plus(&below);
    }
    out[0] = h.a.plus(&out[1]);
    out
}

fn params(phi: Q, d: usize) -> HierarchyParams {
    HierarchyParams { h: 2, s_ed: 100, d, phi, mode: Mode::Poly }
}

#[test]
fn zero_weighting_gives_empty_hierarchy() {
    let g = two_triangles();
    let cfg = CutConfig::default();
    let h = build_hierarchy(&g, &NodeWeighting::zero(6), 2, 100, 2, None, 1.0, &cfg).unwrap();
    assert!(h.levels.iter().all(|a| a.is_zero()));
    assert!(h.cuts.iter().all(|c| c.is_zero()));
    assert!(validate_hierarchy(&h, &g, &cfg).unwrap().pass);
}

#[test]
fn expander_needs_no_cuts() {
    let g = complete(5);
    let cfg = CutConfig::default();
    let h = build_hierarchy(&g, &g.degree(), 2, 100, 2, None, 1.0, &cfg).unwrap();
    assert!(h.cuts.iter().all(|c| c.is_zero()));
    assert_eq!(h.levels[0], g.degree());
    assert!(h.levels[1].is_zero());
    assert!(validate_hierarchy(&h, &g, &cfg).unwrap().pass);
}

#[test]
fn bridge_under_tight_phi_keeps_books() {
    let g = two_triangles();
    let cfg = CutConfig::default();
    let mut h = Hierarchy::empty(6, params(q(1), 2)).unwrap();
    h.update(&g, &g.degree(), &cfg).unwrap();
    assert!(!h.cuts[1].is_zero(), "φ = 1 must cut the bridge");
    assert!(h.cuts[1].units_of(6) > 0);
    assert_eq!(h.levels, expected_levels(&h, &g));
    let rep = validate_hierarchy(&h, &g, &cfg).unwrap();
    assert!(rep.levels.iter().all(|l| l.nested && l.bookkeeping), "{rep:?}");
    assert!(rep.a0_dominates_a);
}

#[test]
fn barbell_depth_one_validates() {
    let g = barbell();
    let cfg = CutConfig::default();
    let h = build_hierarchy(&g, &g.degree(), 2, 100, 1, None, 1.0, &cfg).unwrap();
    let rep = validate_hierarchy(&h, &g, &cfg).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(h.shrink() <= qf(1, 2));
}

#[test]
fn corrupted_level_fails_validation() {
    let g = two_triangles();
    let cfg = CutConfig::default();
    let mut h = Hierarchy::empty(6, params(q(1), 2)).unwrap();
    h.update(&g, &g.degree(), &cfg).unwrap();
    h.levels[1].add_at(0, &q(1));
    let rep = validate_hierarchy(&h, &g, &cfg).unwrap();
    assert!(!rep.pass);
    assert!(!rep.levels[0].bookkeeping || !rep.levels[1].bookkeeping);
}

#[test]
fn preconditions() {
    let g = two_triangles();
    let cfg = CutConfig::default();
    assert!(Hierarchy::empty(6, params(q(1), 0)).is_err());
    assert!(build_hierarchy(&g, &g.degree(), 2, 99, 2, None, 1.0, &cfg).is_err());
    let mut h = Hierarchy::empty(6, params(q(1), 1)).unwrap();
    h.update(&g, &g.degree(), &cfg).unwrap();
    assert!(h.update(&g, &NodeWeighting::zero(6), &cfg).is_err(), "updates must not shrink A");
}

#[test]
fn incremental_updates_match_books() {
    let g = barbell();
    let cfg = CutConfig::default();
    let full = g.degree();
    let half = NodeWeighting::from_values(full.values().iter().map(|x| x / q(2)).collect()).unwrap();
    let mut h = Hierarchy::empty(10, params(default_phi(&full, 2, 1.0), 2)).unwrap();
    h.update(&g, &half, &cfg).unwrap();
    h.update(&g, &full, &cfg).unwrap();
    assert_eq!(h.a, full);
    assert_eq!(h.levels, expected_levels(&h, &g));
}

#[test]
fn default_phi_is_positive_and_shrinks_with_mass() {
    let small = NodeWeighting::from_values(vec![q(1); 4]).unwrap();
    let big = NodeWeighting::from_values(vec![q(100); 4]).unwrap();
    let (a, b) = (default_phi(&small, 2, 1.0), default_phi(&big, 2, 1.0));
    assert!(a > q(0) && b > q(0) && b < a);
}

#[test]
fn twenty_seeded_builds_validate() {
    let cfg = CutConfig::default();
    for seed in 0..20 {
        let g = generate_graph(seed, 10, 16, 4);
        let h = build_hierarchy(&g, &g.degree(), 2, 100, 2, None, 1.0, &cfg).unwrap();
        let rep = validate_hierarchy(&h, &g, &cfg).unwrap();
        assert!(rep.pass, "seed {seed}: {rep:?}");
        let n = g.n();
        assert!(h.nonzero_increments.iter().sum::<usize>() <= n * (n - 1) / 2, "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn levels_nest_and_books_balance(seed in 0u64..10_000, d in 1usize..=3) {
        let g = generate_graph(seed, 9, 14, 3);
        let cfg = CutConfig::default();
        let h = build_hierarchy(&g, &g.degree(), 2, 100, d, None, 1.0, &cfg).unwrap();
        prop_assert_eq!(&h.levels, &expected_levels(&h, &g));
        for j in 1..=d {
            prop_assert!(h.levels[j].le(&h.levels[j - 1]));
            prop_assert!(h.cuts[j].degree(&g).le(&h.levels[j]));
        }
        prop_assert!(h.shrink() <= qf(1, 2));
    }
}
