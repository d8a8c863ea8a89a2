//! Seeded instance generation and brute-force ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codec::{decode_store, encode_store};
use crate::cuts::union_cut_diagnostic;
use crate::decoder::{discovered_graph, query, Answer, Node};
use crate::error::{Error, Result};
use crate::graph::{all_pairs, sssp, EdgeId, Graph, Vertex};
use crate::hitting::{at_least_probability, check_selection};
use crate::labels::{build_labels, size_report, ELabel, SchemeParams, SizeReport};
use crate::oracle::{build_laminars, compile, decode_oracle, encode_oracle, extend_elabel, fast_query, pair_table, CompiledOracle, ExtELabel};
use crate::par;
use crate::rational::Q;
use crate::tree::{maximal_interval, recover_components, EulerTour, SubtreeRecord};
use crate::tz::{tz_build, tz_query, TzStructure};
use crate::weights::{MovingCut, NodeWeighting};

/// Parameter profile for generated instances.
#[derive(Clone, Debug, Serialize)]
pub struct Profile {
    pub max_n: usize,
    pub max_m: usize,
    pub max_len: u64,
    pub f: usize,
    pub s_nc: u64,
    pub s_ed: u64,
    pub d: usize,
    pub ks: Vec<usize>,
}

impl Default for Profile {
    fn default() -> Self {
        Profile { max_n: 12, max_m: 20, max_len: 8, f: 2, s_nc: 2, s_ed: 100, d: 2, ks: vec![1, 2, 3] }
    }
}

/// Random multigraph: n ∈ [2, max_n], m ≤ max_m, lengths in 1..=max_len. Even seeds start
/// from a random spanning tree (connected), odd seeds place edges freely.
pub fn generate_graph(seed: u64, max_n: usize, max_m: usize, max_len: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n.max(2));
    let mut triples: Vec<(Vertex, Vertex, u64)> = Vec::new();
    let m_cap = max_m.min(2 * n * (n - 1) / 2);
    if seed.is_multiple_of(2) && n - 1 <= max_m {
        for v in 1..n {
            let u = rng.gen_range(0..v);
            triples.push((u as Vertex, v as Vertex, rng.gen_range(1..=max_len)));
        }
    }
    let target = rng.gen_range(triples.len()..=m_cap.max(triples.len()));
    while triples.len() < target {
        let u = rng.gen_range(0..n) as Vertex;
        let v = rng.gen_range(0..n) as Vertex;
        if u != v {
            triples.push((u.min(v), u.max(v), rng.gen_range(1..=max_len)));
        }
    }
    Graph::from_triples(n, &triples).expect("generated graph is valid")
}

/// Exact dist_{G∖F}(p, q) by Dijkstra.
pub fn brute_distance(g: &Graph, failed: &[EdgeId], p: Vertex, q: Vertex) -> Option<u64> {
    let h = g.without_edges(failed);
    sssp(&h, p)[q as usize]
}

/// Every set of at most `f` distinct edge ids, in lexicographic order.
pub fn failure_sets(g: &Graph, f: usize) -> Vec<Vec<EdgeId>> {
    let ids: Vec<EdgeId> = g.edges().iter().map(|e| e.id).collect();
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<EdgeId>> = vec![Vec::new()];
    for _ in 0..f {
        let mut next = Vec::new();
        for s in &frontier {
            let from = s.last().map(|&x| ids.iter().position(|&y| y == x).unwrap() + 1).unwrap_or(0);
            for &e in &ids[from..] {
                let mut t = s.clone();
                t.push(e);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Unordered pairs p < q.
pub fn vertex_pairs(n: usize) -> Vec<(Vertex, Vertex)> {
    let mut out = Vec::new();
    for p in 0..n as Vertex {
        for q in p + 1..n as Vertex {
            out.push((p, q));
        }
    }
    out
}

impl Profile {
    pub fn scheme(&self) -> SchemeParams {
        SchemeParams { f: self.f, s_nc: self.s_nc, s_ed: self.s_ed, d: self.d, ..SchemeParams::default() }
    }

    pub fn stretch(&self) -> u64 {
        self.scheme().stretch()
    }
}

/// A seeded instance: graph, failure sets, query pairs and parameters.
#[derive(Clone, Debug)]
pub struct TestInstance {
    pub seed: u64,
    pub graph: Graph,
    pub failures: Vec<Vec<EdgeId>>,
    pub pairs: Vec<(Vertex, Vertex)>,
    pub profile: Profile,
}

pub fn instance(seed: u64, profile: &Profile) -> TestInstance {
    let graph = generate_graph(seed, profile.max_n, profile.max_m, profile.max_len);
    TestInstance { seed, failures: failure_sets(&graph, profile.f), pairs: vertex_pairs(graph.n()), graph, profile: profile.clone() }
}

/// Outcome of the end-to-end sweep on one instance.
#[derive(Clone, Debug, Default, Serialize)]
pub struct InstanceStats {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub queries: usize,
    /// UNREACHABLE disagrees with brute force.
    pub iff_violations: usize,
    /// D < dist.
    pub lower_violations: usize,
    /// D > s·dist.
    pub upper_violations: usize,
    pub max_ratio: f64,
    /// Per k: (k, violations of the fast-query sandwich, max ratio).
    pub fast: Vec<(usize, usize, f64)>,
    pub hierarchies: usize,
    pub hierarchy_failures: usize,
    pub max_nonzero_increments: usize,
    pub increment_bound: usize,
    pub hitting_systems: usize,
    pub hitting_failures: usize,
    pub scales_with_cuts: usize,
    pub p_constraints: usize,
    pub q_constraints: usize,
    pub nontrivial_elabels: usize,
    pub nontrivial_bound: usize,
    pub potential_monotone: bool,
    /// Per scale: (Σ|C_i|/φ_i, |A|·ln n).
    pub union_cut: Vec<(f64, f64)>,
    pub sizes: Option<SizeReport>,
    pub build_ms: u128,
    pub query_ms: u128,
    pub first_failure: Option<String>,
    pub error: Option<String>,
}

impl InstanceStats {
    pub fn sound(&self) -> bool {
        self.error.is_none() && self.iff_violations == 0 && self.lower_violations == 0 && self.upper_violations == 0
    }

    fn note(&mut self, msg: impl FnOnce() -> String) {
        if self.first_failure.is_none() {
            self.first_failure = Some(msg());
        }
    }
}

/// Builds labels and TZ structures for one instance and checks every (p, q, F).
pub fn sweep_instance(inst: &TestInstance) -> InstanceStats {
    let mut st = InstanceStats { seed: inst.seed, n: inst.graph.n(), m: inst.graph.m(), ..Default::default() };
    if let Err(e) = sweep_into(inst, &mut st) {
        st.error = Some(e.to_string());
    }
    st
}

fn sweep_into(inst: &TestInstance, st: &mut InstanceStats) -> Result<()> {
    let g = &inst.graph;
    let params = inst.profile.scheme();
    let s = params.stretch();
    let t0 = Instant::now();
    let (store, bundles) = build_labels(g, &params)?;
    let tzs: Vec<TzStructure> = inst.profile.ks.iter().map(|&k| tz_build(g, k)).collect::<Result<_>>()?;
    st.build_ms = t0.elapsed().as_millis();

    // structure checks
    let n = g.n();
    st.increment_bound = n * n.saturating_sub(1) / 2;
    st.potential_monotone = true;
    let a = g.uncapacitated().degree();
    for b in &bundles {
        st.hierarchies += 1;
        if !b.report.pass {
            st.hierarchy_failures += 1;
        }
        let inc: usize = b.hierarchy.nonzero_increments.iter().sum();
        st.scales_with_cuts += b.hierarchy.cuts.iter().any(|c| !c.is_zero()) as usize;
        st.max_nonzero_increments = st.max_nonzero_increments.max(inc);
        for (cs, sel) in b.constraints.iter().zip(&b.selections) {
            if let (Some(cs), Some(sel)) = (cs, sel) {
                st.hitting_systems += 1;
                st.p_constraints += cs.p_sets.len();
                st.q_constraints += cs.q_sets.len();
                let chk = check_selection(cs, &sel.chosen);
                if !chk.all_hit || Q::from_integer((chk.max_q as i64).into()) > cs.alpha() {
                    st.hitting_failures += 1;
                }
            }
        }
        let cuts: Vec<(MovingCut, Q)> = b.hierarchy.cut_log.iter().map(|(_, c, phi)| (c.clone(), phi.clone())).collect();
        let u = union_cut_diagnostic(&g.uncapacitated(), &a, &cuts, b.h_ed, b.hierarchy.params.s_ed)?;
        st.potential_monotone &= u.monotone;
        st.union_cut.push((u.sum_size_over_phi_f64, u.a_ln_n));
    }
    let sizes = size_report(&store, &bundles);
    st.nontrivial_elabels = sizes.nontrivial_elabels;
    st.nontrivial_bound = sizes.nontrivial_bound;
    st.sizes = Some(sizes);

    // queries
    let t1 = Instant::now();
    let fast_bound = |k: usize| 2 * s * k as u64 + 2 * k as u64 - 1;
    st.fast = inst.profile.ks.iter().map(|&k| (k, 0, 0.0)).collect();
    for fs in &inst.failures {
        let ext = fs.iter().map(|&e| extend_elabel(g, &store, &tzs[0], e)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&ELabel> = ext.iter().map(|x| x.elabel.as_ref()).collect();
        let table = pair_table(&store.header, &ext)?;
        let mut compiled = Vec::new();
        for tz in &tzs {
            let ext_k: Vec<ExtELabel> = ext
                .iter()
                .map(|x| ExtELabel { tz: [tz.labels[x.ends[0] as usize].clone(), tz.labels[x.ends[1] as usize].clone()], ..x.clone() })
                .collect();
            let endpoints: BTreeSet<Vertex> = ext.iter().flat_map(|x| x.ends).collect();
            compiled.push(CompiledOracle {
                failed: {
                    let mut f = fs.clone();
                    f.sort_unstable();
                    f
                },
                endpoints: endpoints.into_iter().collect(),
                table: table.clone(),
                laminar: build_laminars(&ext_k)?,
            });
        }
        let h = g.without_edges(fs);
        let apsp: Vec<Vec<Option<u64>>> = (0..n as Vertex).map(|v| sssp(&h, v)).collect();
        for &(p, q) in &inst.pairs {
            let truth = apsp[p as usize][q as usize];
            let ans = query(&store.header, store.vlabel(p)?, store.vlabel(q)?, &refs)?;
            st.queries += 1;
            match (ans, truth) {
                (Answer::Unreachable, None) => {}
                (Answer::Estimate(d), Some(x)) => {
                    if d < x {
                        st.lower_violations += 1;
                        st.note(|| format!("F={fs:?} ({p},{q}): D={d} < dist={x}"));
                    }
                    if d > s * x {
                        st.upper_violations += 1;
                        st.note(|| format!("F={fs:?} ({p},{q}): D={d} > s·dist={}", s * x));
                    }
                    st.max_ratio = st.max_ratio.max(d as f64 / x as f64);
                }
                _ => {
                    st.iff_violations += 1;
                    st.note(|| format!("F={fs:?} ({p},{q}): decoder {ans:?}, brute force {truth:?}"));
                }
            }
            for (ki, tz) in tzs.iter().enumerate() {
                let k = tz.k;
                let r = fast_query(&compiled[ki], fs, &tz.labels[p as usize], &tz.labels[q as usize])?;
                let ok = match (r, truth) {
                    (Answer::Unreachable, None) => true,
                    (Answer::Estimate(d), Some(x)) => {
                        st.fast[ki].2 = st.fast[ki].2.max(d as f64 / x as f64);
                        x <= d && d <= fast_bound(k) * x
                    }
                    _ => false,
                };
                if !ok {
                    st.fast[ki].1 += 1;
                    st.note(|| format!("k={k} F={fs:?} ({p},{q}): fast query {r:?}, brute force {truth:?}"));
                }
            }
        }
    }
    st.query_ms = t1.elapsed().as_millis();
    Ok(())
}

/// Criterion-style aggregate over many instances.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepSummary {
    pub instances: usize,
    pub queries: usize,
    pub errors: usize,
    pub iff_violations: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub max_ratio: f64,
    pub fast_violations: usize,
    pub fast_max_ratio: Vec<(usize, f64)>,
    pub hierarchies: usize,
    pub hierarchy_failures: usize,
    pub increment_violations: usize,
    pub hitting_systems: usize,
    pub hitting_failures: usize,
    pub nontrivial_violations: usize,
    pub potential_violations: usize,
    /// Scales whose hierarchy holds a nonzero cut.
    pub scales_with_cuts: usize,
    pub p_constraints: usize,
    pub q_constraints: usize,
    /// Worst (Σ|C_i|/φ_i) / (|A|·ln n) over scales with cuts.
    pub max_union_cut_ratio: f64,
    pub max_vlabel_bytes: usize,
    pub max_elabel_bytes: usize,
    pub nontrivial_elabels: usize,
    pub nontrivial_bound: usize,
    pub first_failure: Option<String>,
}

pub fn summarize(stats: &[InstanceStats]) -> SweepSummary {
    let mut s = SweepSummary { instances: stats.len(), ..Default::default() };
    for st in stats {
        s.queries += st.queries;
        s.errors += st.error.is_some() as usize;
        s.iff_violations += st.iff_violations;
        s.lower_violations += st.lower_violations;
        s.upper_violations += st.upper_violations;
        s.max_ratio = s.max_ratio.max(st.max_ratio);
        for &(k, v, r) in &st.fast {
            s.fast_violations += v;
            match s.fast_max_ratio.iter_mut().find(|x| x.0 == k) {
                Some(x) => x.1 = x.1.max(r),
                None => s.fast_max_ratio.push((k, r)),
            }
        }
        s.hierarchies += st.hierarchies;
        s.hierarchy_failures += st.hierarchy_failures;
        s.increment_violations += (st.max_nonzero_increments > st.increment_bound) as usize;
        s.hitting_systems += st.hitting_systems;
        s.hitting_failures += st.hitting_failures;
        s.nontrivial_violations += (st.nontrivial_elabels > st.nontrivial_bound) as usize;
        s.potential_violations += (!st.potential_monotone) as usize;
        s.scales_with_cuts += st.scales_with_cuts;
        s.p_constraints += st.p_constraints;
        s.q_constraints += st.q_constraints;
        for &(sum, bound) in &st.union_cut {
            if sum > 0.0 && bound > 0.0 {
                s.max_union_cut_ratio = s.max_union_cut_ratio.max(sum / bound);
            }
        }
        if let Some(z) = &st.sizes {
            s.max_vlabel_bytes = s.max_vlabel_bytes.max(z.vlabel_bytes_max);
            s.max_elabel_bytes = s.max_elabel_bytes.max(z.elabel_bytes_max);
        }
        s.nontrivial_elabels += st.nontrivial_elabels;
        s.nontrivial_bound += st.nontrivial_bound;
        if s.first_failure.is_none() {
            s.first_failure = st
                .error
                .as_ref()
                .map(|e| format!("seed {}: {e}", st.seed))
                .or_else(|| st.first_failure.as_ref().map(|f| format!("seed {}: {f}", st.seed)));
        }
    }
    s
}

pub fn run_sweep(seeds: impl IntoIterator<Item = u64>, profile: &Profile) -> Vec<InstanceStats> {
    let insts: Vec<TestInstance> = seeds.into_iter().map(|s| instance(s, profile)).collect();
    par::map(&insts, sweep_instance)
}

// ---------------------------------------------------------------------------
// Euler-tour coverage and component recovery

#[derive(Clone, Debug, Default, Serialize)]
pub struct EulerStats {
    pub instances: usize,
    pub components_checked: usize,
    pub coverage_failures: usize,
    pub recovery_failures: usize,
    pub first_failure: Option<String>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Random rooted tree on 0..n with vertex 0 as root; children lists sorted.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Option<Vertex>>, EulerTour) {
    let mut parent = vec![None; n];
    let mut children: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    for v in 1..n {
        let p = rng.gen_range(0..v) as Vertex;
        parent[v] = Some(p);
        children.entry(p).or_default().push(v as Vertex);
    }
    (parent, EulerTour::from_children(0, &children))
}

/// One random (tree, A, τ, F) instance: checks recover_components against union-find and
/// that every light component is covered by the maximal intervals entering it.
pub fn euler_instance(seed: u64, stats: &mut EulerStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=40usize);
    let (parent, tour) = random_tree(&mut rng, n);
    let a = NodeWeighting::from_values((0..n).map(|_| Q::from_integer(rng.gen_range(0..6i64).into())).collect()).expect("nonnegative weights");
    let tau = Q::from_integer(rng.gen_range(0..=(4 * n as i64)).into());
    let failed: Vec<Vertex> = (1..n as Vertex).filter(|_| rng.gen_bool(0.2)).collect();
    let failed_set: BTreeSet<Vertex> = failed.iter().copied().collect();
    stats.instances += 1;

    let mut uf: Vec<usize> = (0..n).collect();
    for v in 1..n {
        if !failed_set.contains(&(v as Vertex)) {
            let (x, y) = (find(&mut uf, v), find(&mut uf, parent[v].unwrap() as usize));
            uf[x] = y;
        }
    }
    let roots: Vec<usize> = (0..n).map(|v| find(&mut uf, v)).collect();

    // subtree weights by descending start
    let mut sub: Vec<Q> = (0..n as Vertex).map(|v| a.get(v).clone()).collect();
    let mut order: Vec<usize> = (1..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(tour.start(v as Vertex).unwrap()));
    for v in order {
        let p = parent[v].unwrap() as usize;
        let c = sub[v].clone();
        sub[p] += c;
    }
    let records: Vec<SubtreeRecord> = failed
        .iter()
        .map(|&c| SubtreeRecord { start: tour.start(c).unwrap(), end: tour.end(c).unwrap(), weights: vec![sub[c as usize].clone()] })
        .collect();
    match recover_components(n, &[sub[0].clone()], &records) {
        Ok(map) => {
            let mut comp_of = BTreeMap::new();
            let mut ok = map.components.len() == roots.iter().collect::<BTreeSet<_>>().len();
            for v in 0..n {
                let c = map.locate(tour.start(v as Vertex).unwrap());
                match c {
                    Some(c) => {
                        if *comp_of.entry(roots[v]).or_insert(c) != c {
                            ok = false;
                        }
                    }
                    None => ok = false,
                }
            }
            if ok {
                let mut sums: BTreeMap<usize, Q> = BTreeMap::new();
                for v in 0..n {
                    *sums.entry(roots[v]).or_insert_with(Q::zero) += a.get(v as Vertex);
                }
                for (r, c) in &comp_of {
                    ok &= map.components[*c].weights[0] == sums[r];
                }
            }
            if !ok {
                stats.recovery_failures += 1;
                if stats.first_failure.is_none() {
                    stats.first_failure = Some(format!("seed {seed}: recovered components differ from union-find"));
                }
            }
        }
        Err(e) => {
            stats.recovery_failures += 1;
            if stats.first_failure.is_none() {
                stats.first_failure = Some(format!("seed {seed}: {e}"));
            }
        }
    }

    // coverage
    let mut members: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
    for v in 0..n {
        members.entry(roots[v]).or_default().push(v as Vertex);
    }
    for comp in members.values() {
        let weight = comp.iter().fold(Q::zero(), |acc, &v| acc + a.get(v));
        let inside: BTreeSet<Vertex> = comp.iter().copied().collect();
        let mut covered = BTreeSet::new();
        let mut entering = 0;
        for &c in &failed {
            let p = parent[c as usize].unwrap();
            let orient = if inside.contains(&c) {
                Some((p, c))
            } else if inside.contains(&p) {
                Some((c, p))
            } else {
                None
            };
            if let Some((x, y)) = orient {
                entering += 1;
                let t = tour.pos(x, y).unwrap() as usize;
                let t_end = maximal_interval(&tour, t, &a, &tau);
                covered.extend(tour.interval_vertices(t, t_end));
            }
        }
        if weight > tau || entering == 0 {
            continue;
        }
        stats.components_checked += 1;
        if !inside.is_subset(&covered) {
            stats.coverage_failures += 1;
            if stats.first_failure.is_none() {
                stats.first_failure = Some(format!("seed {seed}: component {comp:?} not covered"));
            }
        }
    }
}

pub fn euler_suite(count: usize, seed: u64) -> EulerStats {
    let mut st = EulerStats::default();
    for i in 0..count as u64 {
        euler_instance(seed.wrapping_mul(1_000_003).wrapping_add(i), &mut st);
    }
    st
}

// ---------------------------------------------------------------------------
// hitting-set probabilities

#[derive(Clone, Debug, Default, Serialize)]
pub struct DpStats {
    pub systems: usize,
    pub mismatches: usize,
}

/// P[at least c successes] by enumerating all 2^k outcomes.
pub fn enumerate_at_least(probs: &[Q], c: usize) -> Q {
    let k = probs.len();
    let mut total = Q::zero();
    for mask in 0u32..(1u32 << k) {
        if (mask.count_ones() as usize) < c {
            continue;
        }
        let mut pr = Q::one();
        for (i, p) in probs.iter().enumerate() {
            pr *= if mask >> i & 1 == 1 { p.clone() } else { Q::one() - p };
        }
        total += pr;
    }
    total
}

pub fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<Q> {
    (0..k)
        .map(|_| {
            let den = rng.gen_range(1..=16i64);
            Q::new(rng.gen_range(0..=den).into(), den.into())
        })
        .collect()
}

pub fn dp_suite(count: usize, seed: u64) -> DpStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = DpStats::default();
    for _ in 0..count {
        let k = rng.gen_range(0..=12usize);
        let probs = random_probs(&mut rng, k);
        let c = rng.gen_range(0..=k + 1);
        st.systems += 1;
        if at_least_probability(&probs, c) != enumerate_at_least(&probs, c) {
            st.mismatches += 1;
        }
    }
    st
}

// ---------------------------------------------------------------------------
// TZ stretch

#[derive(Clone, Debug, Default, Serialize)]
pub struct TzStats {
    pub graphs: usize,
    pub pairs: usize,
    pub violations: usize,
    /// Per k: worst observed estimate/dist.
    pub max_ratio: Vec<(usize, f64)>,
    pub max_bunch: usize,
    pub first_failure: Option<String>,
}

pub fn tz_suite(graphs: usize, seed: u64, ks: &[usize], max_n: usize) -> Result<TzStats> {
    let mut st = TzStats { max_ratio: ks.iter().map(|&k| (k, 0.0)).collect(), ..Default::default() };
    for i in 0..graphs as u64 {
        let g = generate_graph(seed.wrapping_add(i), max_n, 3 * max_n, 8);
        let apsp = all_pairs(&g);
        st.graphs += 1;
        for (ki, &k) in ks.iter().enumerate() {
            let tz = tz_build(&g, k)?;
            st.max_bunch = st.max_bunch.max(tz.labels.iter().map(|l| l.bunch_size()).max().unwrap_or(0));
            for p in 0..g.n() {
                for q in 0..g.n() {
                    st.pairs += 1;
                    let est = tz_query(&tz.labels[p], &tz.labels[q]);
                    let ok = match (est, apsp[p][q]) {
                        (None, None) => true,
                        (Some(e), Some(d)) => {
                            if d > 0 {
                                st.max_ratio[ki].1 = st.max_ratio[ki].1.max(e as f64 / d as f64);
                            }
                            d <= e && e <= (2 * k as u64 - 1) * d
                        }
                        _ => false,
                    };
                    if !ok {
                        st.violations += 1;
                        if st.first_failure.is_none() {
                            st.first_failure = Some(format!("graph {i} k={k} ({p},{q}): {est:?} vs {:?}", apsp[p][q]));
                        }
                    }
                }
            }
        }
    }
    Ok(st)
}

// ---------------------------------------------------------------------------
// packed vs unpacked discovered graphs

#[derive(Clone, Debug, Default, Serialize)]
pub struct PackStats {
    pub queries: usize,
    pub mismatches: usize,
    pub type3_edges: usize,
    pub type4_edges: usize,
    pub first_failure: Option<String>,
}

/// Samples (p, q, F) on seeded instances, half of them with a small τ_heavy so that heavy
/// components actually occur, and compares all original-vertex distances.
pub fn pack_suite(samples: usize, seed: u64, profile: &Profile) -> Result<PackStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = PackStats::default();
    let per_graph = 5;
    let mut gi = 0u64;
    while st.queries < samples {
        let g = generate_graph(seed.wrapping_add(gi), profile.max_n, profile.max_m, profile.max_len);
        let mut params = profile.scheme();
        if gi.is_multiple_of(2) {
            params.tau_heavy_override = Some(Q::from_integer(rng.gen_range(1..=4i64).into()));
        }
        gi += 1;
        let (store, _) = build_labels(&g, &params)?;
        let sets = failure_sets(&g, profile.f);
        for _ in 0..per_graph {
            if st.queries >= samples {
                break;
            }
            let fs = &sets[rng.gen_range(0..sets.len())];
            let p = rng.gen_range(0..g.n()) as Vertex;
            let q = rng.gen_range(0..g.n()) as Vertex;
            let labels: Vec<&ELabel> = fs.iter().map(|&e| store.elabel(e).map(|l| l.as_ref())).collect::<Result<_>>()?;
            let packed = discovered_graph(&store.header, store.vlabel(p)?, store.vlabel(q)?, &labels, true)?;
            let unpacked = discovered_graph(&store.header, store.vlabel(p)?, store.vlabel(q)?, &labels, false)?;
            st.queries += 1;
            st.type3_edges += packed.counts.type3;
            st.type4_edges += packed.counts.type4;
            let origs = packed.originals();
            let same_nodes = origs == unpacked.originals();
            let mut equal = same_nodes;
            if same_nodes {
                'outer: for &x in &origs {
                    let ix = packed.lookup(&Node::Orig(x)).unwrap();
                    let jx = unpacked.lookup(&Node::Orig(x)).unwrap();
                    let (dp, du) = (packed.dijkstra(ix), unpacked.dijkstra(jx));
                    for &y in &origs {
                        let iy = packed.lookup(&Node::Orig(y)).unwrap();
                        let jy = unpacked.lookup(&Node::Orig(y)).unwrap();
                        if dp[iy] != du[jy] {
                            equal = false;
                            break 'outer;
                        }
                    }
                }
            }
            if !equal {
                st.mismatches += 1;
                if st.first_failure.is_none() {
                    st.first_failure = Some(format!("graph seed {} F={fs:?} ({p},{q})", seed.wrapping_add(gi - 1)));
                }
            }
        }
    }
    Ok(st)
}

// ---------------------------------------------------------------------------
// determinism

#[derive(Clone, Debug, Default, Serialize)]
pub struct DeterminismStats {
    pub runs: usize,
    pub store_mismatches: usize,
    pub oracle_mismatches: usize,
    /// Stores or oracles whose decoded form differs from what was encoded.
    pub roundtrip_failures: usize,
    pub store_bytes: usize,
}

/// Everything a seeded pipeline run persists: label store bytes and one compiled oracle
/// per failure set of size f (first few) for k = 2. The flag reports whether every
/// artifact decodes back to the in-memory value.
pub fn pipeline_bytes(seed: u64, profile: &Profile) -> Result<(Vec<u8>, Vec<Vec<u8>>, bool)> {
    let g = generate_graph(seed, profile.max_n, profile.max_m, profile.max_len);
    let (store, _) = build_labels(&g, &profile.scheme())?;
    let tz = tz_build(&g, 2)?;
    let bytes = encode_store(&store);
    let mut roundtrip = decode_store(&bytes)? == store;
    let mut oracles = Vec::new();
    for fs in failure_sets(&g, profile.f).iter().rev().take(4) {
        let ext = fs.iter().map(|&e| extend_elabel(&g, &store, &tz, e)).collect::<Result<Vec<_>>>()?;
        let d = compile(&store.header, &ext)?;
        let ob = encode_oracle(&d);
        roundtrip &= decode_oracle(&ob)? == d;
        oracles.push(ob);
    }
    Ok((bytes, oracles, roundtrip))
}

pub fn determinism_suite(seeds: &[u64], profile: &Profile) -> Result<DeterminismStats> {
    let mut st = DeterminismStats::default();
    for &s in seeds {
        let a = pipeline_bytes(s, profile)?;
        let b = pipeline_bytes(s, profile)?;
        st.runs += 1;
        st.store_bytes += a.0.len();
        st.store_mismatches += (a.0 != b.0) as usize;
        st.oracle_mismatches += (a.1 != b.1) as usize;
        st.roundtrip_failures += !a.2 as usize;
    }
    Ok(st)
}

// ---------------------------------------------------------------------------
// full suite

/// Sizes of the individual suites; the defaults are the acceptance settings.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub graphs: usize,
    pub euler: usize,
    pub dp: usize,
    pub tz_graphs: usize,
    pub tz_max_n: usize,
    pub pack: usize,
    pub determinism: usize,
    /// Fault injection: corrupt one vertex label before a query.
    pub corrupt: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 0, graphs: 200, euler: 1000, dp: 200, tz_graphs: 20, tz_max_n: 50, pack: 50, determinism: 3, corrupt: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub pass: bool,
    pub profile: Profile,
    pub options: SuiteOptions,
    pub checks: Vec<Check>,
    pub sweep: SweepSummary,
    pub euler: EulerStats,
    pub dp: DpStats,
    pub tz: Option<TzStats>,
    pub pack: Option<PackStats>,
    pub determinism: Option<DeterminismStats>,
    pub errors: Vec<String>,
}

/// Replaces one vertex label's fingerprint with another vertex's and queries through it;
/// returns the error the decoder raised, if any.
pub fn corrupted_query(seed: u64, profile: &Profile) -> Result<Option<Error>> {
    let g = generate_graph(seed, profile.max_n, profile.max_m, profile.max_len);
    let (store, _) = build_labels(&g, &profile.scheme())?;
    let mut bad = (**store.vlabel(1)?).clone();
    bad.scales[0].own = store.vlabel(0)?.scales[0].own.clone();
    let bad = std::sync::Arc::new(bad);
    Ok(query(&store.header, store.vlabel(0)?, &bad, &[]).err())
}

fn keep<T>(errors: &mut Vec<String>, r: Result<T>) -> Option<T> {
    r.map_err(|e| errors.push(e.to_string())).ok()
}

fn check(id: u32, name: &str, pass: bool, detail: String) -> Check {
    Check { id, name: name.into(), pass, detail }
}

pub fn validate_suite(profile: &Profile, opts: &SuiteOptions) -> SuiteReport {
    let mut errors = Vec::new();
    let stats = run_sweep(opts.seed..opts.seed + opts.graphs as u64, profile);
    let sweep = summarize(&stats);
    let euler = euler_suite(opts.euler, opts.seed);
    let dp = dp_suite(opts.dp, opts.seed);
    let tz = if opts.tz_graphs > 0 { keep(&mut errors, tz_suite(opts.tz_graphs, opts.seed, &profile.ks, opts.tz_max_n)) } else { None };
    let pack = if opts.pack > 0 { keep(&mut errors, pack_suite(opts.pack, opts.seed, profile)) } else { None };
    let seeds: Vec<u64> = (opts.seed..opts.seed + opts.determinism as u64).collect();
    let determinism = if opts.determinism > 0 { keep(&mut errors, determinism_suite(&seeds, profile)) } else { None };
    let corrupt = if opts.corrupt { keep(&mut errors, corrupted_query(opts.seed, profile)) } else { None };

    let s = &sweep;
    let mut checks = vec![
        check(1, "soundness and stretch", s.errors == 0 && s.iff_violations + s.lower_violations + s.upper_violations == 0,
            format!("{} queries, iff {} lower {} upper {}, max D/dist {:.3}", s.queries, s.iff_violations, s.lower_violations, s.upper_violations, s.max_ratio)),
        check(2, "lower bound", s.errors == 0 && s.lower_violations == 0, format!("{} queries, {} below dist", s.queries, s.lower_violations)),
        check(3, "euler recovery", euler.coverage_failures == 0 && euler.recovery_failures == 0,
            format!("{} instances, {} light components, coverage failures {}, recovery failures {}", euler.instances, euler.components_checked, euler.coverage_failures, euler.recovery_failures)),
        check(4, "hierarchy validation", s.errors == 0 && s.hierarchy_failures == 0 && s.increment_violations == 0,
            format!("{} hierarchies, {} failed, {} over the increment bound", s.hierarchies, s.hierarchy_failures, s.increment_violations)),
        check(5, "hitting sets", s.hitting_failures == 0 && dp.mismatches == 0,
            format!("{} selections, {} failed; {} DP systems, {} mismatches", s.hitting_systems, s.hitting_failures, dp.systems, dp.mismatches)),
        check(6, "tz stretch", tz.as_ref().is_none_or(|t| t.violations == 0),
            tz.as_ref().map_or("not run".into(), |t| format!("{} graphs, {} pairs, {} violations, ratios {:?}", t.graphs, t.pairs, t.violations, t.max_ratio))),
        check(7, "fast-query sandwich", s.errors == 0 && s.fast_violations == 0, format!("{} violations, ratios {:?}", s.fast_violations, s.fast_max_ratio)),
        check(8, "pack/unpack", pack.as_ref().is_none_or(|p| p.mismatches == 0),
            pack.as_ref().map_or("not run".into(), |p| format!("{} queries, {} mismatches, {} type-3 arcs", p.queries, p.mismatches, p.type3_edges))),
        check(9, "diagnostics", s.nontrivial_violations == 0 && s.potential_violations == 0,
            format!(
                "non-trivial label bound violations {}, potential increases {}; logged: non-trivial labels {} of bound {}, worst Σ|C|/φ over |A|·ln n {:.3} on {} cut scales, max label bytes {} (vertex) {} (edge)",
                s.nontrivial_violations, s.potential_violations, s.nontrivial_elabels, s.nontrivial_bound, s.max_union_cut_ratio,
                s.scales_with_cuts, s.max_vlabel_bytes, s.max_elabel_bytes
            )),
        check(10, "determinism", determinism.as_ref().is_none_or(|d| d.store_mismatches + d.oracle_mismatches + d.roundtrip_failures == 0),
            determinism.as_ref().map_or("not run".into(), |d| format!("{} runs, store mismatches {}, oracle mismatches {}, roundtrip failures {}", d.runs, d.store_mismatches, d.oracle_mismatches, d.roundtrip_failures))),
    ];
    if opts.corrupt {
        let surfaced = matches!(corrupt, Some(Some(Error::CorruptLabel(_))));
        // the injected fault must be caught, and the suite reports it as a failure
        checks.push(check(11, "fault injection", false, format!("corrupt label surfaced: {surfaced}")));
    }
    let pass = checks.iter().all(|c| c.pass) && errors.is_empty();
    SuiteReport { pass, profile: profile.clone(), options: opts.clone(), checks, sweep, euler, dp, tz, pack, determinism, errors }
}
