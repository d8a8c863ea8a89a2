use ftlabels::graph::{simple_paths, Graph};
use ftlabels::harness::{brute_distance, failure_sets, generate_graph, validate_suite, vertex_pairs, Profile, SuiteOptions};
use proptest::prelude::*;

fn tiny(corrupt: bool) -> SuiteOptions {
    SuiteOptions { graphs: 2, euler: 10, dp: 5, tz_graphs: 2, tz_max_n: 20, pack: 2, determinism: 1, corrupt, ..SuiteOptions::default() }
}

#[test]
fn every_edge_failed_leaves_only_trivial_pairs() {
    let g = generate_graph(3, 8, 12, 5);
    let all: Vec<u32> = g.edges().iter().map(|e| e.id).collect();
    for p in 0..g.n() as u32 {
        for q in 0..g.n() as u32 {
            assert_eq!(brute_distance(&g, &all, p, q), (p == q).then_some(0));
        }
    }
}

#[test]
fn failure_set_enumeration() {
    let g = Graph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap();
    let sets = failure_sets(&g, 2);
    assert_eq!(sets.len(), 1 + 4 + 6);
    assert_eq!(sets[0], Vec::<u32>::new());
    assert!(sets.windows(2).all(|w| w[0] < w[1] || w[0].len() < w[1].len()));
    assert_eq!(vertex_pairs(4).len(), 6);
    assert!(vertex_pairs(4).iter().all(|&(p, q)| p < q));
}

#[test]
fn tiny_suite_passes() {
    let r = validate_suite(&Profile::default(), &tiny(false));
    assert!(r.pass, "{:?}", r.checks);
    assert_eq!(r.checks.len(), 10);
}

#[test]
fn empty_suite_passes_trivially() {
    let opts = SuiteOptions { graphs: 0, euler: 0, dp: 0, tz_graphs: 0, pack: 0, determinism: 0, ..SuiteOptions::default() };
    let r = validate_suite(&Profile::default(), &opts);
    assert!(r.pass, "{:?}", r.checks);
    assert_eq!(r.sweep.queries, 0);
}

#[test]
fn injected_corruption_fails_the_suite() {
    let r = validate_suite(&Profile::default(), &tiny(true));
    assert!(!r.pass);
    assert!(r.checks.iter().any(|c| !c.pass));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn brute_distance_matches_path_enumeration(seed in 0u64..100_000, cut in 0usize..3) {
        let g = generate_graph(seed, 7, 10, 4);
        let failed: Vec<u32> = g.edges().iter().map(|e| e.id).take(cut).collect();
        let bound: u64 = g.edges().iter().map(|e| e.length).sum();
        for p in 0..g.n() as u32 {
            for q in 0..g.n() as u32 {
                let best = simple_paths(&g, p, q, bound, 1_000_000)
                    .unwrap()
                    .into_iter()
                    .filter(|x| x.edges.iter().all(|e| !failed.contains(e)))
                    .map(|x| x.length(&g))
                    .min();
                prop_assert_eq!(brute_distance(&g, &failed, p, q), best);
            }
        }
    }
}
