use ftlabels::cover::NeighborhoodCover;
use ftlabels::cuts::{cut_or_certify, cut_until_certify, ldd_demand, union_cut_diagnostic, CutCertificate, CutConfig, Mode};
use ftlabels::flow::{route_lp, Backend, RoutingConfig};
use ftlabels::graph::{sssp, Graph};
use ftlabels::harness::generate_graph;
use ftlabels::rational::{q, qf, Q};
use ftlabels::weights::{demand_stats, Demand, MovingCut, NodeWeighting};
use num::Zero;
use proptest::prelude::*;

fn two_triangles() -> Graph {
    Graph::from_triples(6, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1), (2, 3, 1)]).unwrap()
}

fn complete(n: u32) -> Graph {
    let mut t = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            t.push((u, v, 1));
        }
    }
    Graph::from_triples(n as usize, &t).unwrap()
}

fn unit_demand(u: u32, v: u32) -> Demand {
    let mut d = Demand::new();
    d.add(u, v, q(1));
    d
}

#[test]
fn single_edge_routes_with_congestion_one() {
    let g = Graph::from_triples(2, &[(0, 1, 1)]).unwrap();
    let r = route_lp(&g, &unit_demand(0, 1), 1, &RoutingConfig::default()).unwrap();
    assert!(r.feasible);
    assert_eq!(r.congestion, q(1));
}

#[test]
fn zero_length_bound_is_infeasible() {
    let g = Graph::from_triples(2, &[(0, 1, 1)]).unwrap();
    let r = route_lp(&g, &unit_demand(0, 1), 0, &RoutingConfig::default()).unwrap();
    assert!(!r.feasible);
}

#[test]
fn four_cycle_splits_over_both_sides() {
    // two disjoint paths of capacity 1 each: the optimum sends 1/2 on each
    let g = Graph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap();
    for backend in [Backend::Enumerate, Backend::Generate] {
        let cfg = RoutingConfig { backend, ..RoutingConfig::default() };
        let r = route_lp(&g, &unit_demand(0, 2), 4, &cfg).unwrap();
        assert!(r.feasible);
        assert_eq!(r.congestion, qf(1, 2), "{backend:?}");
        assert_eq!(r.routed()[&(0, 2)], q(1));
    }
}

#[test]
fn ldd_demand_of_a_pair() {
    let cover = NeighborhoodCover { clusterings: vec![vec![vec![0, 1]]], h_cov: 1, h_diam: 1 };
    let a = NodeWeighting::from_values(vec![q(1), q(1)]).unwrap();
    let d = ldd_demand(&a, &cover);
    assert_eq!(d.get(0, 1), qf(1, 4));
    assert_eq!(d.get(1, 0), qf(1, 4));
}

#[test]
fn ldd_demand_of_zero_weighting_is_empty() {
    let cover = NeighborhoodCover { clusterings: vec![vec![vec![0, 1, 2]]], h_cov: 1, h_diam: 2 };
    assert!(ldd_demand(&NodeWeighting::zero(3), &cover).is_empty());
}

#[test]
fn ldd_demand_respects_weighting_with_two_clusterings() {
    let cover = NeighborhoodCover { clusterings: vec![vec![vec![0, 1], vec![2, 3]], vec![vec![1, 2, 3]]], h_cov: 1, h_diam: 2 };
    let a = NodeWeighting::from_values(vec![q(2), q(1), qf(1, 2), q(3)]).unwrap();
    let d = ldd_demand(&a, &cover);
    let mut load = vec![Q::zero(); 4];
    for ((u, v), x) in d.pairs() {
        load[*u as usize] += x;
        load[*v as usize] += x;
    }
    for (v, l) in load.iter().enumerate() {
        assert!(l <= a.get(v as u32), "vertex {v}");
    }
}

#[test]
fn complete_graph_is_certified() {
    let g = complete(4);
    let a = g.degree();
    match cut_or_certify(&g, &a, 1, 32, 4, &qf(1, 64), &CutConfig::default()).unwrap() {
        CutCertificate::Expanding(chk) => {
            assert!(chk.congestion <= chk.budget);
            if let Some(r) = &chk.routing {
                assert!(r.feasible);
            }
        }
        CutCertificate::Cut { .. } => panic!("K4 should certify"),
    }
}

#[test]
fn zero_weighting_is_certified() {
    let g = two_triangles();
    let c = cut_or_certify(&g, &NodeWeighting::zero(6), 1, 32, 4, &q(1), &CutConfig::default()).unwrap();
    assert!(!c.is_cut());
}

#[test]
fn bridge_is_cut_under_tight_phi() {
    let g = two_triangles();
    let a = g.degree();
    let cert = cut_or_certify(&g, &a, 1, 32, 4, &q(1), &CutConfig::default()).unwrap();
    let CutCertificate::Cut { cut, witness, sparsity, .. } = cert else { panic!("expected a cut") };
    // the bridge carries the largest cut value
    let bridge = cut.units_of(6);
    assert!(bridge > 0);
    assert!(cut.units().values().all(|&u| u <= bridge));
    assert!(witness.respects(&a));
    let (sep, sp) = demand_stats(&cut, &witness, &g, 32).unwrap();
    assert!(sep > Q::zero());
    assert_eq!(sp.unwrap(), sparsity);
}

#[test]
fn cut_until_certify_on_expanding_input_is_empty() {
    let g = complete(5);
    let out = cut_until_certify(&g, &g.degree(), 1, 64, &qf(1, 64), Mode::Poly, &CutConfig::default()).unwrap();
    assert!(out.cut.is_zero());
    assert!(out.steps.is_empty());
}

#[test]
fn cut_until_certify_on_bridge_then_recheck() {
    let g = two_triangles();
    let a = g.degree();
    let cfg = CutConfig::default();
    let out = cut_until_certify(&g, &a, 1, 64, &q(1), Mode::Poly, &cfg).unwrap();
    assert!(!out.cut.is_zero());
    assert!(out.steps.len() <= 15);
    let gc = g.apply_cut(&out.cut, 64).unwrap();
    assert!(!cut_or_certify(&gc, &a, 1, 64, 8, &q(1), &cfg).unwrap().is_cut());
}

#[test]
fn slack_preconditions_enforced() {
    let g = complete(3);
    assert!(cut_or_certify(&g, &g.degree(), 1, 16, 4, &q(1), &CutConfig::default()).is_err());
    assert!(cut_or_certify(&g, &g.degree(), 1, 32, 3, &q(1), &CutConfig::default()).is_err());
}

#[test]
fn union_cut_empty_sequence() {
    let g = two_triangles();
    let r = union_cut_diagnostic(&g, &g.degree(), &[], 1, 32).unwrap();
    assert_eq!(r.sum_size_over_phi, "0");
    assert_eq!(r.potentials.len(), 1);
    assert!(r.monotone);
}

/// Potential recomputed from scratch: Σ_v A(v)·ln Σ_{u: dist ≤ hs/2} n^{−2·dist/(hs)}.
fn potential(g: &Graph, a: &NodeWeighting, hs: u64) -> f64 {
    let n = g.n() as f64;
    let mut p = 0.0;
    for v in 0..g.n() as u32 {
        let av = ftlabels::rational::to_f64(a.get(v));
        if av == 0.0 {
            continue;
        }
        let s: f64 = sssp(g, v).into_iter().flatten().filter(|&d| 2 * d <= hs).map(|d| n.powf(-2.0 * d as f64 / hs as f64)).sum();
        p += av * s.ln();
    }
    p
}

#[test]
fn union_cut_one_nonzero_cut() {
    let g = two_triangles();
    let a = g.degree();
    let mut c = MovingCut::zero(32);
    c.set_units(6, 16);
    let r = union_cut_diagnostic(&g, &a, &[(c.clone(), qf(1, 2))], 1, 32).unwrap();
    let p0 = potential(&g, &a, 32);
    let p1 = potential(&g.apply_cut(&c, 32).unwrap(), &a, 32);
    assert!(p0 >= p1);
    assert!((r.potentials[0] - p0).abs() < 1e-9 && (r.potentials[1] - p1).abs() < 1e-9);
    assert_eq!(r.sum_size_over_phi, "1");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routing_respects_length_and_congestion(seed in 0u64..5_000, h in 2u64..12) {
        let g = generate_graph(seed, 7, 10, 3);
        let mut d = Demand::new();
        let dist = sssp(&g, 0);
        for v in 1..g.n() as u32 {
            if dist[v as usize].is_some_and(|x| x <= h) {
                d.add(0, v, qf(1, v as i64 + 1));
            }
        }
        let r = route_lp(&g, &d, h, &RoutingConfig::default()).unwrap();
        prop_assert!(r.feasible);
        for p in &r.flow {
            prop_assert!(p.length <= h);
            let len: u64 = p.edges.iter().map(|&e| g.edge(e).unwrap().length).sum();
            prop_assert_eq!(len, p.length);
        }
        for c in r.edge_congestion(&g) {
            prop_assert!(c <= r.congestion);
        }
        let routed = r.routed();
        for ((u, v), x) in d.symmetric() {
            prop_assert_eq!(routed.get(&(u, v)).cloned().unwrap_or_else(Q::zero), x);
        }
    }
}
