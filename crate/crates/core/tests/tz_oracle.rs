use std::collections::BTreeSet;

use ftlabels::codec::{decode_store, encode_store};
use ftlabels::decoder::{query, Answer};
use ftlabels::graph::{all_pairs, sssp, EdgeId, Graph, Vertex};
use ftlabels::harness::{failure_sets, generate_graph};
use ftlabels::labels::{build_labels, ELabel, LabelStore, SchemeParams};
use ftlabels::oracle::{compile, decode_oracle, encode_oracle, extend_elabel, fast_query, oracle_store, scan, Laminar, ORACLE_VERSION};
use ftlabels::tz::{bunch_cap, tz_build, tz_query, TzStructure};
use ftlabels::Error;
use proptest::prelude::*;

fn params() -> SchemeParams {
    SchemeParams { f: 2, d: 2, ..SchemeParams::default() }
}

fn setup(seed: u64, k: usize) -> (Graph, LabelStore, TzStructure) {
    let g = generate_graph(seed, 10, 16, 6);
    let (store, _) = build_labels(&g, &params()).unwrap();
    let tz = tz_build(&g, k).unwrap();
    (g, store, tz)
}

fn surviving(g: &Graph, failed: &[EdgeId]) -> Vec<Vec<Option<u64>>> {
    let keep: Vec<(u32, u32, u64)> = g.edges().iter().filter(|e| !failed.contains(&e.id)).map(|e| (e.u, e.v, e.length)).collect();
    all_pairs(&Graph::from_triples(g.n(), &keep).unwrap())
}

/// Bunches straight from the definition, using only the level sets and distances.
fn brute_bunches(g: &Graph, sets: &[Vec<Vertex>]) -> Vec<BTreeSet<Vertex>> {
    let apsp = all_pairs(g);
    let k = sets.len();
    (0..g.n())
        .map(|v| {
            let mut b = BTreeSet::new();
            for i in 0..k {
                let next: BTreeSet<Vertex> = sets.get(i + 1).map(|s| s.iter().copied().collect()).unwrap_or_default();
                let bound = next.iter().filter_map(|&w| apsp[v][w as usize]).min();
                for &w in &sets[i] {
                    if next.contains(&w) {
                        continue;
                    }
                    if let Some(d) = apsp[v][w as usize] {
                        if bound.is_none_or(|x| d < x) {
                            b.insert(w);
                        }
                    }
                }
            }
            b
        })
        .collect()
}

#[test]
fn bunch_cap_values() {
    assert_eq!(bunch_cap(1, 1), 1);
    // 8·2·√100·ln 100
    assert_eq!(bunch_cap(100, 2), (8.0 * 2.0 * 10.0 * (100f64).ln()).ceil() as usize);
}

#[test]
fn zero_levels_rejected() {
    let g = generate_graph(0, 6, 8, 3);
    assert!(matches!(tz_build(&g, 0), Err(Error::InvalidArgument(_))));
}

#[test]
fn structure_matches_definitions() {
    for seed in 0..30 {
        let g = generate_graph(seed, 30, 70, 9);
        let apsp = all_pairs(&g);
        for k in 1..=4 {
            let tz = tz_build(&g, k).unwrap();
            assert_eq!(tz.sets.len(), k);
            assert_eq!(tz.sets[0].len(), g.n());
            for w in tz.sets.windows(2) {
                assert!(w[1].iter().all(|x| w[0].contains(x)), "levels must nest");
            }
            let brute = brute_bunches(&g, &tz.sets);
            for (v, l) in tz.labels.iter().enumerate() {
                assert_eq!(l.pivots[0], Some((v as Vertex, 0)));
                let got: BTreeSet<Vertex> = l.bunch.keys().copied().collect();
                assert_eq!(got, brute[v], "seed {seed} k {k} v {v}");
                assert!(l.bunch_size() <= tz.bunch_cap);
                for (&w, e) in &l.bunch {
                    assert_eq!(Some(e.dist), apsp[v][w as usize]);
                    assert_eq!(tz.trees[&w].depth[&(v as Vertex)], e.dist);
                }
                for (i, p) in l.pivots.iter().enumerate() {
                    let best = tz.sets[i].iter().filter_map(|&w| apsp[v][w as usize]).min();
                    assert_eq!(p.map(|x| x.1), best);
                }
            }
        }
    }
}

#[test]
fn stretch_is_at_most_2k_minus_1() {
    for seed in 0..20 {
        let g = generate_graph(seed, 40, 100, 9);
        let apsp = all_pairs(&g);
        for k in 1..=4 {
            let tz = tz_build(&g, k).unwrap();
            for p in 0..g.n() {
                for q in 0..g.n() {
                    let est = tz_query(&tz.labels[p], &tz.labels[q]);
                    match (apsp[p][q], est) {
                        (None, None) => {}
                        (Some(d), Some(x)) => assert!(d <= x && x <= (2 * k as u64 - 1) * d, "seed {seed} k {k}: {p}→{q} {x} vs {d}"),
                        (d, x) => panic!("seed {seed} k {k}: {p}→{q} {x:?} vs {d:?}"),
                    }
                }
            }
        }
    }
}

#[test]
fn no_failures_is_the_plain_tz_estimate() {
    let (_, store, tz) = setup(3, 2);
    let d = compile(&store.header, &[]).unwrap();
    assert!(d.table.is_empty() && d.laminar.is_empty());
    for p in 0..tz.labels.len() {
        for q in 0..tz.labels.len() {
            let want = tz_query(&tz.labels[p], &tz.labels[q]).map_or(Answer::Unreachable, Answer::Estimate);
            assert_eq!(fast_query(&d, &[], &tz.labels[p], &tz.labels[q]).unwrap(), want);
        }
    }
}

#[test]
fn one_failure_table_is_the_decoder_answer() {
    let (g, store, tz) = setup(4, 2);
    let e = g.edges().iter().find(|e| e.u != e.v).unwrap();
    let ext = extend_elabel(&g, &store, &tz, e.id).unwrap();
    let d = compile(&store.header, &[ext]).unwrap();
    assert_eq!(d.table.len(), 1);
    let fl: Vec<&ELabel> = vec![store.elabel(e.id).unwrap()];
    let direct = query(&store.header, store.vlabel(e.u).unwrap(), store.vlabel(e.v).unwrap(), &fl).unwrap();
    assert_eq!(d.estimate(e.u, e.v), Some(direct));
    assert_eq!(d.estimate(e.v, e.u), Some(direct));
}

#[test]
fn fast_query_sandwich() {
    let s = params().stretch();
    for seed in 0..5 {
        let (g, store, _) = setup(seed, 1);
        for k in 1..=3u64 {
            let tz = tz_build(&g, k as usize).unwrap();
            let bound = 2 * s * k + 2 * k - 1;
            for fs in failure_sets(&g, 2).iter().step_by(5) {
                let ext: Vec<_> = fs.iter().map(|&e| extend_elabel(&g, &store, &tz, e).unwrap()).collect();
                let d = compile(&store.header, &ext).unwrap();
                let truth = surviving(&g, fs);
                for p in 0..g.n() {
                    for q in 0..g.n() {
                        let a = fast_query(&d, fs, &tz.labels[p], &tz.labels[q]).unwrap();
                        match (truth[p][q], a) {
                            (None, Answer::Unreachable) => {}
                            (Some(t), Answer::Estimate(x)) => assert!(t <= x && x <= bound * t, "seed {seed} F {fs:?}: {p}→{q} {x} vs {t}"),
                            (t, a) => panic!("seed {seed} F {fs:?}: {p}→{q} {a:?} vs {t:?}"),
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn compiled_oracle_is_deterministic_and_roundtrips() {
    let (g, store, tz) = setup(6, 2);
    let fs: Vec<EdgeId> = g.edges().iter().take(2).map(|e| e.id).collect();
    let mk = || {
        let ext: Vec<_> = fs.iter().map(|&e| extend_elabel(&g, &store, &tz, e).unwrap()).collect();
        compile(&store.header, &ext).unwrap()
    };
    let (a, b) = (mk(), mk());
    let bytes = encode_oracle(&a);
    assert_eq!(bytes, encode_oracle(&b));
    assert_eq!(decode_oracle(&bytes).unwrap(), a);
    assert!(matches!(decode_oracle(&bytes[..bytes.len() - 1]), Err(Error::Parse { .. })));
    let mut v = bytes.clone();
    v[4..6].copy_from_slice(&(ORACLE_VERSION + 1).to_le_bytes());
    assert!(matches!(decode_oracle(&v), Err(Error::Version { .. })));
}

#[test]
fn stale_failure_set_is_rejected() {
    let (g, store, tz) = setup(6, 2);
    let e = g.edges()[0].id;
    let d = compile(&store.header, &[extend_elabel(&g, &store, &tz, e).unwrap()]).unwrap();
    assert!(matches!(fast_query(&d, &[], &tz.labels[0], &tz.labels[1]), Err(Error::Stale(_))));
    let so = oracle_store(&g, &store, Some(&tz));
    assert!(matches!(so.distance_query(0, 1), Err(Error::Stale(_))));
}

#[test]
fn duplicate_failures_rejected_by_compile() {
    let (g, store, tz) = setup(6, 2);
    let e = g.edges()[0].id;
    let x = extend_elabel(&g, &store, &tz, e).unwrap();
    assert!(compile(&store.header, &[x.clone(), x]).is_err());
}

#[test]
fn sensitivity_oracle_paths_agree() {
    let (g, store, tz) = setup(8, 2);
    let mut so = oracle_store(&g, &store, Some(&tz));
    assert_eq!(so.stored_elabels(), store.nontrivial_count());
    assert!(matches!(so.query(0, 1, &[999]), Err(Error::UnknownEdge(999))));
    for fs in failure_sets(&g, 2).iter().step_by(7) {
        let fl: Vec<&ELabel> = fs.iter().map(|&e| store.elabel(e).unwrap().as_ref()).collect();
        for p in 0..g.n() as Vertex {
            for q in 0..g.n() as Vertex {
                let direct = query(&store.header, store.vlabel(p).unwrap(), store.vlabel(q).unwrap(), &fl).unwrap();
                assert_eq!(so.query(p, q, fs).unwrap(), direct);
            }
        }
        let installed = so.change_failures(fs).unwrap().clone();
        let ext: Vec<_> = fs.iter().map(|&e| extend_elabel(&g, &store, &tz, e).unwrap()).collect();
        assert_eq!(installed, compile(&store.header, &ext).unwrap());
        for p in 0..g.n() as Vertex {
            for q in 0..g.n() as Vertex {
                let want = fast_query(&installed, fs, &tz.labels[p as usize], &tz.labels[q as usize]).unwrap();
                assert_eq!(so.distance_query(p, q).unwrap(), want);
            }
        }
    }
}

#[test]
fn oracle_from_decoded_store() {
    let (g, store, tz) = setup(9, 2);
    let back = decode_store(&encode_store(&store)).unwrap();
    let fs: Vec<EdgeId> = g.edges().iter().rev().take(2).map(|e| e.id).collect();
    let a: Vec<_> = fs.iter().map(|&e| extend_elabel(&g, &store, &tz, e).unwrap()).collect();
    let b: Vec<_> = fs.iter().map(|&e| extend_elabel(&g, &back, &tz, e).unwrap()).collect();
    assert_eq!(encode_oracle(&compile(&store.header, &a).unwrap()), encode_oracle(&compile(&back.header, &b).unwrap()));
}

#[test]
fn crossing_intervals_are_corrupt() {
    assert!(matches!(Laminar::new(vec![(0, 4, 1), (2, 6, 2)]), Err(Error::CorruptLabel(_))));
}

/// A random laminar family: split [lo, hi] into disjoint children and recurse.
fn laminar_family(seed: &[u8]) -> Vec<(u32, u32, Vertex)> {
    let mut out = Vec::new();
    let mut it = seed.iter().copied().cycle();
    let mut stack = vec![(0u32, 200u32, 0u32)];
    let mut owner = 0;
    while let Some((lo, hi, depth)) = stack.pop() {
        if out.len() >= seed.len() || depth > 5 {
            continue;
        }
        out.push((lo, hi, owner));
        owner += 1;
        let mut at = lo;
        while at < hi {
            let step = it.next().unwrap() as u32 % 40 + 1;
            let b = (at + step).min(hi);
            if it.next().unwrap() % 3 != 0 && (b - at) < (hi - lo) {
                stack.push((at, b, depth + 1));
            }
            at = b + 1;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn laminar_lookup_matches_scan(seed in proptest::collection::vec(any::<u8>(), 1..40)) {
        let fam = laminar_family(&seed);
        let lam = Laminar::new(fam.clone()).unwrap();
        for x in 0..=202 {
            prop_assert_eq!(lam.shortest(x), scan(&fam, x, false), "shortest at {}", x);
            prop_assert_eq!(lam.longest(x), scan(&fam, x, true), "longest at {}", x);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tz_stretch_random(seed in 0u64..1_000_000, k in 1usize..=4) {
        let g = generate_graph(seed, 50, 150, 9);
        let tz = tz_build(&g, k).unwrap();
        for p in 0..g.n() {
            let d = sssp(&g, p as Vertex);
            for q in 0..g.n() {
                let est = tz_query(&tz.labels[p], &tz.labels[q]);
                prop_assert_eq!(est.is_some(), d[q].is_some());
                if let (Some(x), Some(t)) = (est, d[q]) {
                    prop_assert!(t <= x && x <= (2 * k as u64 - 1) * t);
                }
            }
        }
    }
}
