use ftlabels::graph::{all_pairs, lexmax_shortest_path, simple_paths, sssp, Graph, Path};
use ftlabels::harness::generate_graph;
use ftlabels::rational::{q, qf};
use ftlabels::weights::{demand_stats, Demand, MovingCut, NodeWeighting};
use ftlabels::Error;
use proptest::prelude::*;

fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<u64>>> {
    let n = g.n();
    let mut d = vec![vec![None; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = Some(0);
    }
    for e in g.edges() {
        let (u, v) = (e.u as usize, e.v as usize);
        let best = d[u][v].map_or(e.length, |x: u64| x.min(e.length));
        d[u][v] = Some(best);
        d[v][u] = Some(best);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|x| a + b < x) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

fn indicator(g: &Graph, p: &Path) -> Vec<bool> {
    g.edges().iter().map(|e| p.edges.contains(&e.id)).collect()
}

#[test]
fn unit_path_distances() {
    let g = Graph::from_triples(3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
    assert_eq!(sssp(&g, 0), vec![Some(0), Some(1), Some(2)]);
}

#[test]
fn single_vertex_distance() {
    let g = Graph::from_triples(1, &[]).unwrap();
    assert_eq!(sssp(&g, 0), vec![Some(0)]);
}

#[test]
fn unreachable_is_flagged() {
    let g = Graph::from_triples(3, &[(0, 1, 2)]).unwrap();
    assert_eq!(sssp(&g, 0), vec![Some(0), Some(2), None]);
}

#[test]
fn dijkstra_matches_floyd_warshall_on_500_graphs() {
    for seed in 0..500 {
        let g = generate_graph(seed, 12, 20, 8);
        assert_eq!(all_pairs(&g), floyd_warshall(&g), "seed {seed}");
    }
}

#[test]
fn invalid_graphs_rejected() {
    assert!(matches!(Graph::from_triples(2, &[(0, 2, 1)]), Err(Error::InvalidGraph(_))));
    assert!(matches!(Graph::from_triples(2, &[(0, 1, 0)]), Err(Error::InvalidGraph(_))));
}

#[test]
fn text_roundtrip() {
    let g = generate_graph(3, 12, 20, 8);
    assert_eq!(Graph::from_text(&g.to_text()).unwrap(), g);
    assert!(Graph::from_text("2 1 1\n0 0 1 5 1 1\n").is_err(), "length above L");
}

#[test]
fn zero_cut_keeps_lengths() {
    let g = generate_graph(5, 12, 20, 8);
    assert_eq!(g.apply_cut(&MovingCut::zero(4), 4).unwrap(), g);
}

#[test]
fn full_cut_adds_scale() {
    let g = Graph::from_triples(2, &[(0, 1, 1)]).unwrap();
    let mut c = MovingCut::zero(4);
    c.set_units(0, 4);
    assert_eq!(g.apply_cut(&c, 4).unwrap().edges()[0].length, 5);
}

#[test]
fn half_cut_adds_half_scale() {
    let g = Graph::from_triples(2, &[(0, 1, 3)]).unwrap();
    let mut c = MovingCut::zero(4);
    c.set_units(0, 2);
    assert_eq!(c.value(0), qf(1, 2));
    assert_eq!(g.apply_cut(&c, 4).unwrap().edges()[0].length, 5);
}

#[test]
fn cut_on_unknown_edge_errors() {
    let g = Graph::from_triples(2, &[(0, 1, 3)]).unwrap();
    let mut c = MovingCut::zero(1);
    c.set_units(9, 1);
    assert_eq!(g.apply_cut(&c, 1), Err(Error::UnknownEdge(9)));
}

#[test]
fn lexmax_unique_path() {
    let g = Graph::from_triples(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 5)]).unwrap();
    assert_eq!(lexmax_shortest_path(&g, 0, 2).unwrap().edges, vec![0, 1]);
}

#[test]
fn lexmax_on_four_cycle() {
    // 0-1-2 via edges {0, 1}, 0-3-2 via edges {2, 3}; the first has the larger indicator
    let g = Graph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap();
    let p = lexmax_shortest_path(&g, 0, 2).unwrap();
    let both = simple_paths(&g, 0, 2, 2, 100).unwrap();
    assert_eq!(both.len(), 2);
    let best = both.iter().max_by_key(|x| indicator(&g, x)).unwrap();
    assert_eq!(p.edges, best.edges);
    assert_eq!(p.edges, vec![0, 1]);
}

#[test]
fn lexmax_trivial_path() {
    let g = Graph::from_triples(2, &[(0, 1, 1)]).unwrap();
    assert!(lexmax_shortest_path(&g, 1, 1).unwrap().edges.is_empty());
}

#[test]
fn empty_cut_separates_nothing() {
    let g = generate_graph(2, 8, 12, 4);
    let mut d = Demand::new();
    d.add(0, 1, q(1));
    let (sep, spars) = demand_stats(&MovingCut::zero(1), &d, &g, 100).unwrap();
    assert_eq!(sep, q(0));
    assert_eq!(spars, None);
}

#[test]
fn single_edge_cut_stats() {
    let g = Graph::from_triples(2, &[(0, 1, 1)]).unwrap();
    let mut c = MovingCut::zero(1);
    c.set_units(0, 1);
    let mut d = Demand::new();
    d.add(0, 1, q(1));
    assert_eq!(demand_stats(&c, &d, &g, 1).unwrap(), (q(1), Some(q(1))));
}

#[test]
fn separation_matches_pair_check() {
    let g = Graph::from_triples(5, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (0, 4, 3)]).unwrap();
    let mut c = MovingCut::zero(2);
    c.set_units(1, 1);
    c.set_units(4, 2);
    let h = 2;
    let mut d = Demand::new();
    for u in 0..5 {
        for v in 0..5 {
            if u != v {
                d.add(u, v, qf((u + 1) as i64, (v + 2) as i64));
            }
        }
    }
    let gc = g.apply_cut(&c, h).unwrap();
    let mut expect = q(0);
    for ((u, v), x) in d.pairs() {
        if sssp(&gc, *u)[*v as usize].is_none_or(|x| x > h) {
            expect += x;
        }
    }
    assert_eq!(demand_stats(&c, &d, &g, h).unwrap().0, expect);
}

#[test]
fn weighting_order_and_sums() {
    let a = NodeWeighting::from_values(vec![q(1), q(2), q(0)]).unwrap();
    let b = NodeWeighting::from_values(vec![q(1), q(3), q(0)]).unwrap();
    assert!(a.le(&b) && !b.le(&a));
    assert_eq!(b.minus(&a).unwrap().total(), q(1));
    assert!(a.minus(&b).is_err());
    assert!(NodeWeighting::from_values(vec![q(-1)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cut_degree_identities(seed in 0u64..10_000, units in proptest::collection::vec(0u64..=4, 20)) {
        let g = generate_graph(seed, 12, 20, 8);
        let mut c = MovingCut::zero(4);
        for (e, &u) in g.edges().iter().zip(&units) {
            c.set_units(e.id, u);
        }
        let deg = c.degree(&g);
        prop_assert!(deg.le(&g.degree()));
        prop_assert_eq!(deg.total(), q(2) * c.size(&g));
    }

    #[test]
    fn cuts_compose_additively(seed in 0u64..10_000, a in proptest::collection::vec(0u64..=2, 20), b in proptest::collection::vec(0u64..=2, 20)) {
        let g = generate_graph(seed, 12, 20, 8);
        let (mut c1, mut c2, mut sum) = (MovingCut::zero(4), MovingCut::zero(4), MovingCut::zero(4));
        for (i, e) in g.edges().iter().enumerate() {
            c1.set_units(e.id, a[i]);
            c2.set_units(e.id, b[i]);
            sum.set_units(e.id, a[i] + b[i]);
        }
        let twice = g.apply_cut(&c1, 8).unwrap().apply_cut(&c2, 8).unwrap();
        prop_assert_eq!(twice, g.apply_cut(&sum, 8).unwrap());
    }

    #[test]
    fn lexmax_is_shortest_and_subpath_closed(seed in 0u64..10_000) {
        let g = generate_graph(seed, 8, 12, 3);
        let apsp = all_pairs(&g);
        for u in 0..g.n() as u32 {
            for v in 0..g.n() as u32 {
                let Some(p) = lexmax_shortest_path(&g, u, v) else {
                    prop_assert!(apsp[u as usize][v as usize].is_none());
                    continue;
                };
                let d = apsp[u as usize][v as usize].unwrap();
                prop_assert_eq!(p.length(&g), d);
                // against enumeration of all shortest paths
                let all = simple_paths(&g, u, v, d, 100_000).unwrap();
                let best = all.iter().filter(|x| x.length(&g) == d).max_by_key(|x| indicator(&g, x)).unwrap();
                prop_assert_eq!(&p.edges, &best.edges);
                // every prefix and suffix is itself lex-max
                let vs = p.vertices(&g);
                for k in 0..vs.len() {
                    let pre = lexmax_shortest_path(&g, u, vs[k]).unwrap();
                    prop_assert_eq!(&pre.edges[..], &p.edges[..k]);
                    let suf = lexmax_shortest_path(&g, vs[k], v).unwrap();
                    prop_assert_eq!(&suf.edges[..], &p.edges[k..]);
                }
            }
        }
    }
}
