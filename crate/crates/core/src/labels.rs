//! Per-scale structures and the vertex/edge labels built from them.
//!
//! Labels share sub-structures through `Arc` in memory; the codec writes every label in
//! expanded form, so byte sizes count what a standalone label would carry.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::One;
use serde::Serialize;

use crate::cover::{build_cover, NeighborhoodCover, DEFAULT_C_OMEGA};
use crate::cuts::CutConfig;
use crate::error::{Error, Result};
use crate::flow::RoutingConfig;
use crate::graph::{EdgeId, Graph, Vertex};
use crate::hierarchy::{build_hierarchy, validate_hierarchy, Hierarchy, HierarchyReport};
use crate::hitting::{build_constraints, derandomized_select, incident_edges, tour_pos, ConstraintSystem, Selection};
use crate::par;
use crate::rational::{self, Q};
use crate::tree::{build_cluster_tree, maximal_interval, ClusterTree};

#[derive(Clone, Debug)]
pub struct SchemeParams {
    /// Maximum number of failures the labels support.
    pub f: usize,
    pub s_nc: u64,
    pub s_ed: u64,
    pub d: usize,
    pub c_tau: f64,
    pub c_omega: f64,
    pub kappa: f64,
    /// Fixed φ for every scale; `None` searches from the default recipe.
    pub phi: Option<Q>,
    /// Replaces the computed τ_heavy. Only for exercising heavy components in tests: it
    /// voids the routing guarantee behind portal edges.
    pub tau_heavy_override: Option<Q>,
    pub routing: RoutingConfig,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            f: 2,
            s_nc: 2,
            s_ed: 100,
            d: 2,
            c_tau: 4.0,
            c_omega: DEFAULT_C_OMEGA,
            kappa: 1.0,
            phi: None,
            tau_heavy_override: None,
            routing: RoutingConfig::default(),
        }
    }
}

impl SchemeParams {
    /// s = 50·s_nc·s_ed·d.
    pub fn stretch(&self) -> u64 {
        50 * self.s_nc * self.s_ed * self.d as u64
    }

    pub fn cut_config(&self) -> CutConfig {
        CutConfig { c_omega: self.c_omega, routing: self.routing }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_nc < 2 || !self.s_nc.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("s_nc = {} must be even and at least 2", self.s_nc)));
        }
        if self.s_ed < 100 {
            return Err(Error::InvalidArgument(format!("s_ed = {} must be at least 100", self.s_ed)));
        }
        if self.d < 1 || self.d > 16 {
            return Err(Error::InvalidArgument(format!("d = {} must lie in 1..=16", self.d)));
        }
        Ok(())
    }
}

/// i_max = ⌈log₂(n·L)⌉.
pub fn i_max(g: &Graph) -> u32 {
    let nl = (g.n().max(1) as u64) * g.max_length().max(1);
    64 - (nl - 1).leading_zeros()
}

#[derive(Clone, Debug)]
pub struct RegisteredCluster {
    pub vertices: Vec<Vertex>,
    /// Bit j set when the cluster belongs to N_j.
    pub levels: u32,
    pub min_level: usize,
    /// Spanning tree in G_{min_level}.
    pub tree: ClusterTree,
    /// A_j(S) for j = 0..=d.
    pub weights: Vec<Q>,
    /// A_j(subtree of v) for j = 0..=d.
    pub subtree: BTreeMap<Vertex, Vec<Q>>,
}

impl RegisteredCluster {
    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Everything one scale h = 2^i contributes.
#[derive(Clone, Debug)]
pub struct ScaleBundle {
    pub i: u32,
    pub h: u64,
    pub h_cov: u64,
    pub h_diam: u64,
    pub h_ed: u64,
    pub hierarchy: Hierarchy,
    pub report: HierarchyReport,
    /// min(φ, certified φ of every level).
    pub phi_eff: Q,
    pub tau_heavy: Q,
    pub tau_hit: Q,
    /// G_0..G_d.
    pub derived: Vec<Graph>,
    /// N_0..N_d.
    pub covers: Vec<NeighborhoodCover>,
    /// Distinct clusters over all covers, sorted by vertex set; the index is the id.
    pub clusters: Vec<RegisteredCluster>,
    /// L_0..L_d.
    pub l_sets: Vec<BTreeSet<EdgeId>>,
    /// Constraint systems and selections behind L_1..L_d (index 0 unused).
    pub constraints: Vec<Option<ConstraintSystem>>,
    pub selections: Vec<Option<Selection>>,
}

impl ScaleBundle {
    pub fn d(&self) -> usize {
        self.hierarchy.d()
    }

    /// A_j.
    pub fn level_weight(&self, j: usize) -> &crate::weights::NodeWeighting {
        &self.hierarchy.levels[j]
    }

    /// Clusters containing v, by id.
    pub fn clusters_of(&self, v: Vertex) -> Vec<u32> {
        (0..self.clusters.len() as u32).filter(|&c| self.clusters[c as usize].contains(v)).collect()
    }

    /// Σ_j Σ_{S∈N_j} |S|.
    pub fn cover_mass(&self) -> usize {
        self.covers.iter().map(|c| c.clusters().map(Vec::len).sum::<usize>()).sum()
    }
}

/// τ_heavy = f·max(⌈c_τ·ln n/φ⌉, ⌈1/(2φ)⌉) with f counted as at least 1.
pub fn tau_heavy_for(n: usize, f: usize, c_tau: f64, phi: &Q) -> Q {
    let inv = rational::to_f64(&(Q::one() / phi));
    let a = (c_tau * (n.max(1) as f64).ln() * inv).ceil();
    let b = (Q::one() / (Q::from_integer(2.into()) * phi)).ceil();
    let a = Q::from_integer(num::BigInt::from(a as u128));
    let base = if a > b { a } else { b };
    base * Q::from_integer(f.max(1).into())
}

/// τ_hit = 1/((2f+1)·4·s_nc·s_ed·d).
pub fn tau_hit_for(params: &SchemeParams) -> Q {
    let den = (2 * params.f as u64 + 1) * 4 * params.s_nc * params.s_ed * params.d as u64;
    Q::new(1.into(), den.into())
}

pub fn build_scale_structures(g: &Graph, i: u32, params: &SchemeParams) -> Result<ScaleBundle> {
    params.validate()?;
    let h = 1u64 << i;
    let h_cov = 2 * h;
    let h_diam = h_cov * params.s_nc;
    let h_ed = 2 * h_diam;
    let d = params.d;
    let cfg = params.cut_config();
    let gu = g.uncapacitated();
    let a = gu.degree();
    let hierarchy = build_hierarchy(&gu, &a, h_ed, params.s_ed, d, params.phi.clone(), params.kappa, &cfg)?;
    let report = validate_hierarchy(&hierarchy, &gu, &cfg)?;
    if !report.pass {
        return Err(Error::Construction(format!("scale {i}: hierarchy failed validation")));
    }
    let phi_eff = match &report.phi_certified_min {
        Some(p) if *p < hierarchy.params.phi => p.clone(),
        _ => hierarchy.params.phi.clone(),
    };
    let tau_heavy = match &params.tau_heavy_override {
        Some(t) => t.clone(),
        None => tau_heavy_for(g.n(), params.f, params.c_tau, &phi_eff),
    };
    let tau_hit = tau_hit_for(params);
    let derived: Vec<Graph> = (0..=d).map(|j| hierarchy.derived(g, j)).collect::<Result<_>>()?;
    let covers: Vec<NeighborhoodCover> = derived.iter().map(|gj| build_cover(gj, h_cov, params.s_nc, params.c_omega)).collect::<Result<_>>()?;

    let mut registry: BTreeMap<Vec<Vertex>, u32> = BTreeMap::new();
    for (j, cover) in covers.iter().enumerate() {
        for s in cover.clusters() {
            *registry.entry(s.clone()).or_insert(0) |= 1 << j;
        }
    }
    let mut clusters = Vec::with_capacity(registry.len());
    for (vertices, levels) in registry {
        let min_level = levels.trailing_zeros() as usize;
        let tree = build_cluster_tree(&derived[min_level], &vertices)?;
        let weights: Vec<Q> = (0..=d).map(|j| hierarchy.levels[j].sum_over(vertices.iter().copied())).collect();
        let sums: Vec<BTreeMap<Vertex, Q>> = (0..=d).map(|j| tree.subtree_sums(&hierarchy.levels[j])).collect();
        let subtree = vertices.iter().map(|&v| (v, sums.iter().map(|s| s[&v].clone()).collect())).collect();
        clusters.push(RegisteredCluster { vertices, levels, min_level, tree, weights, subtree });
    }

    let mut l_sets = vec![g.edges().iter().map(|e| e.id).collect::<BTreeSet<_>>()];
    let mut constraints = vec![None];
    let mut selections = vec![None];
    let trees: Vec<&ClusterTree> = clusters.iter().map(|c| &c.tree).collect();
    for j in 1..=d {
        let cs = build_constraints(g, &hierarchy.cuts[j], &hierarchy.levels[j], &trees, &tau_hit, &tau_heavy)?;
        let sel = derandomized_select(&cs)?;
        l_sets.push(sel.chosen.clone());
        constraints.push(Some(cs));
        selections.push(Some(sel));
    }
    Ok(ScaleBundle {
        i,
        h,
        h_cov,
        h_diam,
        h_ed,
        hierarchy,
        report,
        phi_eff,
        tau_heavy,
        tau_hit,
        derived,
        covers,
        clusters,
        l_sets,
        constraints,
        selections,
    })
}

// ---------------------------------------------------------------------------
// label types

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterEntry {
    pub cluster: u32,
    /// Bit j set when the cluster belongs to N_j.
    pub levels: u32,
    pub size: u32,
    pub start: u32,
    pub end: u32,
    /// A_j(S), j = 0..=d.
    #[serde(skip)]
    pub cluster_weights: Vec<Q>,
    /// A_j(subtree of the vertex in T_S), j = 0..=d.
    #[serde(skip)]
    pub subtree_weights: Vec<Q>,
}

impl ClusterEntry {
    pub fn min_level(&self) -> usize {
        self.levels.trailing_zeros() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexFingerprint {
    pub vertex: Vertex,
    /// Sorted by cluster id.
    pub entries: Vec<ClusterEntry>,
}

impl VertexFingerprint {
    pub fn entry(&self, cluster: u32) -> Option<&ClusterEntry> {
        self.entries.binary_search_by_key(&cluster, |e| e.cluster).ok().map(|i| &self.entries[i])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeFingerprint {
    pub edge: EdgeId,
    pub length: u64,
    /// Fingerprints of (u, v) in the edge's stored orientation.
    pub ends: [Arc<VertexFingerprint>; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleVLabel {
    pub tau_heavy: Q,
    pub own: Arc<VertexFingerprint>,
    /// Fingerprints of L_j edges around light clusters containing the vertex, by edge id.
    pub edges: Vec<Arc<EdgeFingerprint>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VLabel {
    pub vertex: Vertex,
    pub scales: Vec<ScaleVLabel>,
}

/// One maximal interval T_S[t, t_end) recorded in an edge label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StoredInterval {
    pub cluster: u32,
    pub level: u32,
    /// Orientation (from, to) of the tree edge.
    pub from: Vertex,
    pub to: Vertex,
    pub t: u32,
    pub t_end: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleELabel {
    pub edge_fp: Arc<EdgeFingerprint>,
    /// Clusters S with e ∈ T_S, ascending.
    pub clusters: Vec<u32>,
    pub intervals: Vec<StoredInterval>,
    /// Fingerprints of L_j edges incident to the intervals, by edge id.
    pub edges: Vec<Arc<EdgeFingerprint>>,
    /// Endpoints of those edges; their full vertex labels travel with the edge label.
    pub waypoints: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ELabel {
    pub edge: EdgeId,
    /// One slot per scale; `None` where e is in no cluster tree.
    pub scales: Vec<Option<ScaleELabel>>,
    /// Full vertex labels of every waypoint named in any scale, by vertex.
    pub vlabels: Vec<Arc<VLabel>>,
}

impl ELabel {
    pub fn trivial(edge: EdgeId, scales: usize) -> ELabel {
        ELabel { edge, scales: vec![None; scales], vlabels: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.scales.iter().all(Option::is_none)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabelHeader {
    pub n: u32,
    pub m: u32,
    pub f: u32,
    pub s_nc: u64,
    pub s_ed: u64,
    pub d: u32,
    pub i_max: u32,
}

impl LabelHeader {
    pub fn scales(&self) -> usize {
        self.i_max as usize + 1
    }

    pub fn stretch(&self) -> u64 {
        50 * self.s_nc * self.s_ed * self.d as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelStore {
    pub header: LabelHeader,
    /// Indexed by vertex.
    pub vlabels: Vec<Arc<VLabel>>,
    /// Sorted by edge id.
    pub elabels: Vec<Arc<ELabel>>,
}

impl LabelStore {
    pub fn vlabel(&self, v: Vertex) -> Result<&Arc<VLabel>> {
        self.vlabels.get(v as usize).ok_or_else(|| Error::InvalidArgument(format!("vertex {v} out of range")))
    }

    pub fn elabel(&self, e: EdgeId) -> Result<&Arc<ELabel>> {
        self.elabels.binary_search_by_key(&e, |l| l.edge).map(|i| &self.elabels[i]).map_err(|_| Error::UnknownEdge(e))
    }

    pub fn nontrivial_count(&self) -> usize {
        self.elabels.iter().filter(|l| !l.is_trivial()).count()
    }
}

// ---------------------------------------------------------------------------
// assembly

struct ScaleFingerprints {
    vertex: Vec<Arc<VertexFingerprint>>,
    /// By edge rank.
    edge: Vec<Arc<EdgeFingerprint>>,
}

fn fingerprints(g: &Graph, b: &ScaleBundle) -> ScaleFingerprints {
    let mut entries: Vec<Vec<ClusterEntry>> = vec![Vec::new(); g.n()];
    for (id, c) in b.clusters.iter().enumerate() {
        for &v in &c.vertices {
            entries[v as usize].push(ClusterEntry {
                cluster: id as u32,
                levels: c.levels,
                size: c.vertices.len() as u32,
                start: c.tree.tour.start(v).expect("cluster vertex on tour"),
                end: c.tree.tour.end(v).expect("cluster vertex on tour"),
                cluster_weights: c.weights.clone(),
                subtree_weights: c.subtree[&v].clone(),
            });
        }
    }
    let vertex: Vec<Arc<VertexFingerprint>> =
        entries.into_iter().enumerate().map(|(v, entries)| Arc::new(VertexFingerprint { vertex: v as Vertex, entries })).collect();
    let edge = g
        .edges()
        .iter()
        .map(|e| Arc::new(EdgeFingerprint { edge: e.id, length: e.length, ends: [vertex[e.u as usize].clone(), vertex[e.v as usize].clone()] }))
        .collect();
    ScaleFingerprints { vertex, edge }
}

fn edge_fps(g: &Graph, fps: &ScaleFingerprints, ids: &BTreeSet<EdgeId>) -> Vec<Arc<EdgeFingerprint>> {
    ids.iter().map(|&id| fps.edge[g.rank(id).expect("edge id")].clone()).collect()
}

fn scale_vlabels(g: &Graph, b: &ScaleBundle, fps: &ScaleFingerprints) -> Vec<ScaleVLabel> {
    // per cluster: L_j edges incident to S for every j where S is A_j-light
    let light_edges: Vec<BTreeSet<EdgeId>> = b
        .clusters
        .iter()
        .map(|c| {
            let incident = incident_edges(g, &c.vertices);
            let mut out = BTreeSet::new();
            for j in 0..=b.d() {
                if c.weights[j] <= b.tau_heavy {
                    out.extend(incident.iter().filter(|e| b.l_sets[j].contains(e)));
                }
            }
            out
        })
        .collect();
    (0..g.n() as Vertex)
        .map(|v| {
            let mut ids = BTreeSet::new();
            for c in b.clusters_of(v) {
                ids.extend(light_edges[c as usize].iter().copied());
            }
            ScaleVLabel { tau_heavy: b.tau_heavy.clone(), own: fps.vertex[v as usize].clone(), edges: edge_fps(g, fps, &ids) }
        })
        .collect()
}

/// Scale part of ELabel(e) with the waypoint vertices it names, or `None`.
fn scale_elabel(g: &Graph, b: &ScaleBundle, fps: &ScaleFingerprints, rank: usize) -> Option<ScaleELabel> {
    let e = g.edge_at(rank);
    let mut clusters = Vec::new();
    let mut intervals = Vec::new();
    let mut stored = BTreeSet::new();
    for (id, c) in b.clusters.iter().enumerate() {
        if e.u == e.v || !c.tree.has_pair(e.u, e.v) {
            continue;
        }
        clusters.push(id as u32);
        for (x, y) in [(e.u, e.v), (e.v, e.u)] {
            let t = tour_pos(&c.tree, x, y) as usize;
            for j in 0..=b.d() {
                let t_end = maximal_interval(&c.tree.tour, t, b.level_weight(j), &b.tau_heavy);
                let vs = c.tree.tour.interval_vertices(t, t_end);
                for id2 in incident_edges(g, &vs) {
                    if b.l_sets[j].contains(&id2) {
                        stored.insert(id2);
                    }
                }
                intervals.push(StoredInterval { cluster: id as u32, level: j as u32, from: x, to: y, t: t as u32, t_end: t_end as u32 });
            }
        }
    }
    if clusters.is_empty() {
        return None;
    }
    let edges = edge_fps(g, fps, &stored);
    let mut waypoints: Vec<Vertex> = edges.iter().flat_map(|f| [f.ends[0].vertex, f.ends[1].vertex]).collect();
    waypoints.sort_unstable();
    waypoints.dedup();
    Some(ScaleELabel { edge_fp: fps.edge[rank].clone(), clusters, intervals, edges, waypoints })
}

pub fn header_for(g: &Graph, params: &SchemeParams) -> LabelHeader {
    LabelHeader { n: g.n() as u32, m: g.m() as u32, f: params.f as u32, s_nc: params.s_nc, s_ed: params.s_ed, d: params.d as u32, i_max: i_max(g) }
}

/// Merges all scales into VLabel/ELabel per the template.
pub fn assemble_labels(g: &Graph, bundles: &[ScaleBundle], params: &SchemeParams) -> LabelStore {
    let header = header_for(g, params);
    let fps: Vec<ScaleFingerprints> = bundles.iter().map(|b| fingerprints(g, b)).collect();
    let per_scale: Vec<Vec<ScaleVLabel>> = bundles.iter().zip(&fps).map(|(b, f)| scale_vlabels(g, b, f)).collect();
    let vlabels: Vec<Arc<VLabel>> =
        (0..g.n()).map(|v| Arc::new(VLabel { vertex: v as Vertex, scales: per_scale.iter().map(|s| s[v].clone()).collect() })).collect();
    let elabels = (0..g.m())
        .map(|r| {
            let scales: Vec<Option<ScaleELabel>> = bundles.iter().zip(&fps).map(|(b, f)| scale_elabel(g, b, f, r)).collect();
            let named: BTreeSet<Vertex> = scales.iter().flatten().flat_map(|s| s.waypoints.iter().copied()).collect();
            let vl = named.into_iter().map(|v| vlabels[v as usize].clone()).collect();
            Arc::new(ELabel { edge: g.edge_at(r).id, scales, vlabels: vl })
        })
        .collect();
    LabelStore { header, vlabels, elabels }
}

/// Builds every scale (in parallel when enabled) and assembles the labels.
pub fn build_labels(g: &Graph, params: &SchemeParams) -> Result<(LabelStore, Vec<ScaleBundle>)> {
    params.validate()?;
    let scales: Vec<u32> = (0..=i_max(g)).collect();
    let bundles: Vec<ScaleBundle> = par::map(&scales, |&i| build_scale_structures(g, i, params)).into_iter().collect::<Result<_>>()?;
    let store = assemble_labels(g, &bundles, params);
    Ok((store, bundles))
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeReport {
    pub vlabel_bytes_max: usize,
    pub vlabel_bytes_mean: f64,
    pub elabel_bytes_max: usize,
    pub nontrivial_elabels: usize,
    /// Σ_i Σ_j Σ_{S∈N_j} |S|.
    pub nontrivial_bound: usize,
    pub store_bytes: usize,
    /// Cover width ω per scale and level.
    pub widths: Vec<Vec<usize>>,
    /// Monitors: d·ω·(d+1) fingerprint entries, max edge fingerprints in a vertex label.
    pub max_fingerprint_entries: usize,
    pub max_vlabel_edges: usize,
}

pub fn size_report(store: &LabelStore, bundles: &[ScaleBundle]) -> SizeReport {
    let vb: Vec<usize> = store.vlabels.iter().map(|l| crate::codec::encode_vlabel(l).len()).collect();
    let eb: Vec<usize> = store.elabels.iter().map(|l| crate::codec::encode_elabel(l).len()).collect();
    SizeReport {
        vlabel_bytes_max: vb.iter().copied().max().unwrap_or(0),
        vlabel_bytes_mean: if vb.is_empty() { 0.0 } else { vb.iter().sum::<usize>() as f64 / vb.len() as f64 },
        elabel_bytes_max: eb.iter().copied().max().unwrap_or(0),
        nontrivial_elabels: store.nontrivial_count(),
        nontrivial_bound: bundles.iter().map(ScaleBundle::cover_mass).sum(),
        store_bytes: crate::codec::encode_store(store).len(),
        widths: bundles.iter().map(|b| b.covers.iter().map(NeighborhoodCover::width).collect()).collect(),
        max_fingerprint_entries: store.vlabels.iter().flat_map(|l| l.scales.iter().map(|s| s.own.entries.len())).max().unwrap_or(0),
        max_vlabel_edges: store.vlabels.iter().flat_map(|l| l.scales.iter().map(|s| s.edges.len())).max().unwrap_or(0),
    }
}
