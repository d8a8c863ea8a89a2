use std::time::Instant;

use ftlabels::decoder::{query, Answer};
use ftlabels::harness::{brute_distance, failure_sets, generate_graph, vertex_pairs};
use ftlabels::labels::{build_labels, SchemeParams};

fn main() {
    let seeds: Vec<u64> = std::env::args().skip(1).map(|s| s.parse().unwrap()).collect();
    for seed in seeds {
        let g = generate_graph(seed, 12, 20, 8);
        let t = Instant::now();
        let (store, bundles) = build_labels(&g, &SchemeParams::default()).unwrap();
        let build = t.elapsed();
        let t = Instant::now();
        let mut n = 0;
        let mut worst = 0f64;
        for fs in failure_sets(&g, 2) {
            let fl: Vec<_> = fs.iter().map(|&e| store.elabel(e).unwrap().as_ref()).collect();
            for (p, q) in vertex_pairs(g.n()) {
                let a = query(&store.header, store.vlabel(p).unwrap(), store.vlabel(q).unwrap(), &fl).unwrap();
                let b = brute_distance(&g, &fs, p, q);
                match (a, b) {
                    (Answer::Unreachable, None) => {}
                    (Answer::Estimate(d), Some(x)) => {
                        assert!(d >= x, "seed {seed} F {fs:?} {p} {q}: {d} < {x}");
                        worst = worst.max(d as f64 / x as f64);
                    }
                    _ => panic!("seed {seed} F {fs:?} {p} {q}: {a:?} vs {b:?}"),
                }
                n += 1;
            }
        }
        println!(
            "seed {seed} n={} m={} scales={} build={:?} queries={} in {:?} worst={worst:.1} phi={:?} tau={:?}",
            g.n(),
            g.m(),
            bundles.len(),
            build,
            n,
            t.elapsed(),
            bundles.iter().map(|b| ftlabels::rational::show(&b.hierarchy.params.phi)).collect::<Vec<_>>(),
            bundles.iter().map(|b| ftlabels::rational::show(&b.tau_heavy)).collect::<Vec<_>>()
        );
    }
}
