//! Label-only distance queries.
//!
//! From the labels of p, q and the failed edges we rebuild, per scale, the graph of
//! fingerprinted vertices, tree components and portal vertices, glue the scales on
//! shared original vertices, and run Dijkstra. The value returned is an overestimate D
//! with dist_{G∖F}(p,q) ≤ D ≤ s·dist_{G∖F}(p,q).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::sync::Arc;

use num::Zero;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex};
use crate::labels::{ClusterEntry, ELabel, LabelHeader, VLabel, VertexFingerprint};
use crate::rational::Q;
use crate::tree::{recover_components, ComponentMap, SubtreeRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Answer {
    Unreachable,
    /// Upper estimate D of the post-failure distance.
    Estimate(u64),
}

impl Answer {
    pub fn value(self) -> Option<u64> {
        match self {
            Answer::Unreachable => None,
            Answer::Estimate(d) => Some(d),
        }
    }

    /// The two-sided form ĥ = D/s, so that ĥ ≤ dist ≤ ĥ·s.
    pub fn scaled(self, s: u64) -> Option<Q> {
        self.value().map(|d| Q::new(d.into(), s.into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Orig(Vertex),
    Comp { scale: u32, cluster: u32, comp: u32 },
    Out { scale: u32, cluster: u32, level: u32 },
    In { scale: u32, cluster: u32, level: u32 },
    Way { scale: u32, vertex: Vertex, level: u32 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeCounts {
    pub type1: usize,
    pub type2: usize,
    pub type3: usize,
    pub type4: usize,
}

/// Directed weighted graph on [`Node`]s; undirected edges are stored as two arcs.
#[derive(Clone, Debug, Default)]
pub struct DiscGraph {
    pub nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    adj: Vec<Vec<(usize, u64)>>,
    pub counts: EdgeCounts,
}

impl DiscGraph {
    pub fn node(&mut self, n: Node) -> usize {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(n);
        self.index.insert(n, i);
        self.adj.push(Vec::new());
        i
    }

    pub fn lookup(&self, n: &Node) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn arc(&mut self, a: Node, b: Node, len: u64) {
        let (x, y) = (self.node(a), self.node(b));
        self.adj[x].push((y, len));
    }

    pub fn edge(&mut self, a: Node, b: Node, len: u64) {
        self.arc(a, b, len);
        self.arc(b, a, len);
    }

    pub fn arc_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn dijkstra(&self, src: usize) -> Vec<Option<u64>> {
        let mut dist: Vec<Option<u64>> = vec![None; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[src] = Some(0);
        heap.push(Reverse((0u64, src)));
        while let Some(Reverse((d, x))) = heap.pop() {
            if dist[x].is_some_and(|b| b < d) {
                continue;
            }
            for &(y, l) in &self.adj[x] {
                let nd = d + l;
                if dist[y].is_none_or(|b| nd < b) {
                    dist[y] = Some(nd);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        dist
    }

    pub fn dist(&self, a: &Node, b: &Node) -> Option<u64> {
        let (x, y) = (self.lookup(a)?, self.lookup(b)?);
        self.dijkstra(x)[y]
    }

    /// Original vertices present in the graph, ascending.
    pub fn originals(&self) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Orig(v) => Some(*v),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v
    }
}

/// W = {p, q} plus every vertex whose full label travels inside a failed edge's label.
pub fn extract_waypoints(p: &Arc<VLabel>, q: &Arc<VLabel>, failed: &[&ELabel]) -> Result<BTreeMap<Vertex, Arc<VLabel>>> {
    let mut w: BTreeMap<Vertex, Arc<VLabel>> = BTreeMap::new();
    let mut add = |l: &Arc<VLabel>| -> Result<()> {
        match w.get(&l.vertex) {
            Some(old) if !Arc::ptr_eq(old, l) && **old != **l => Err(Error::CorruptLabel(format!("two different labels for vertex {}", l.vertex))),
            Some(_) => Ok(()),
            None => {
                w.insert(l.vertex, l.clone());
                Ok(())
            }
        }
    };
    add(p)?;
    add(q)?;
    for e in failed {
        for l in &e.vlabels {
            add(l)?;
        }
    }
    Ok(w)
}

/// Recovered view of one scale: fingerprinted vertices and edges, clusters and their
/// components.
pub struct ScaleView {
    pub scale: u32,
    pub h_diam: u64,
    /// (h_ed·s_ed + 2·h_diam)/4.
    pub quarter: u64,
    pub tau_heavy: Q,
    pub vertices: BTreeMap<Vertex, Arc<VertexFingerprint>>,
    /// Non-failed fingerprinted edges: id → (u, v, length).
    pub edges: BTreeMap<EdgeId, (Vertex, Vertex, u64)>,
    pub clusters: BTreeMap<u32, (ClusterEntry, ComponentMap)>,
    /// (cluster, waypoint) pairs.
    pub waypoint_clusters: BTreeMap<u32, Vec<Vertex>>,
}

fn note_vertex(map: &mut BTreeMap<Vertex, Arc<VertexFingerprint>>, fp: &Arc<VertexFingerprint>) -> Result<()> {
    match map.get(&fp.vertex) {
        Some(old) if !Arc::ptr_eq(old, fp) && **old != **fp => Err(Error::CorruptLabel(format!("conflicting fingerprints for vertex {}", fp.vertex))),
        Some(_) => Ok(()),
        None => {
            map.insert(fp.vertex, fp.clone());
            Ok(())
        }
    }
}

pub fn scale_view(header: &LabelHeader, waypoints: &BTreeMap<Vertex, Arc<VLabel>>, failed: &[&ELabel], scale: usize) -> Result<ScaleView> {
    let h = 1u64 << scale;
    let h_diam = 2 * h * header.s_nc;
    let quarter = h * header.s_nc * (header.s_ed + 1);
    let failed_ids: BTreeSet<EdgeId> = failed.iter().map(|e| e.edge).collect();
    let mut vertices = BTreeMap::new();
    let mut all_edges: BTreeMap<EdgeId, (Vertex, Vertex, u64)> = BTreeMap::new();
    let mut note_edge = |vertices: &mut BTreeMap<Vertex, Arc<VertexFingerprint>>, e: &crate::labels::EdgeFingerprint| -> Result<()> {
        note_vertex(vertices, &e.ends[0])?;
        note_vertex(vertices, &e.ends[1])?;
        let rec = (e.ends[0].vertex, e.ends[1].vertex, e.length);
        match all_edges.insert(e.edge, rec) {
            Some(old) if old != rec => Err(Error::CorruptLabel(format!("conflicting fingerprints for edge {}", e.edge))),
            _ => Ok(()),
        }
    };
    let mut tau_heavy: Option<Q> = None;
    for l in waypoints.values() {
        let s = l.scales.get(scale).ok_or_else(|| Error::CorruptLabel(format!("vertex label lacks scale {scale}")))?;
        if s.own.vertex != l.vertex {
            return Err(Error::CorruptLabel(format!("label of {} carries fingerprint of {}", l.vertex, s.own.vertex)));
        }
        match &tau_heavy {
            Some(t) if *t != s.tau_heavy => return Err(Error::CorruptLabel("labels disagree on τ_heavy".into())),
            Some(_) => {}
            None => tau_heavy = Some(s.tau_heavy.clone()),
        }
        note_vertex(&mut vertices, &s.own)?;
        for e in &s.edges {
            note_edge(&mut vertices, e)?;
        }
    }
    for l in failed {
        let s = l.scales.get(scale).ok_or_else(|| Error::CorruptLabel(format!("edge label lacks scale {scale}")))?;
        if let Some(s) = s {
            if s.edge_fp.edge != l.edge {
                return Err(Error::CorruptLabel(format!("label of edge {} carries fingerprint of {}", l.edge, s.edge_fp.edge)));
            }
            note_edge(&mut vertices, &s.edge_fp)?;
            for e in &s.edges {
                note_edge(&mut vertices, e)?;
            }
        }
    }
    let tau_heavy = tau_heavy.unwrap_or_else(Q::zero);

    // clusters seen through fingerprinted vertices
    let mut entries: BTreeMap<u32, ClusterEntry> = BTreeMap::new();
    for fp in vertices.values() {
        for e in &fp.entries {
            match entries.get(&e.cluster) {
                Some(old) => {
                    if old.size != e.size || old.levels != e.levels || old.cluster_weights != e.cluster_weights {
                        return Err(Error::CorruptLabel(format!("inconsistent data for cluster {}", e.cluster)));
                    }
                }
                None => {
                    entries.insert(e.cluster, e.clone());
                }
            }
        }
    }
    // failed tree edges, as the child's subtree record
    let mut records: BTreeMap<u32, Vec<SubtreeRecord>> = BTreeMap::new();
    for l in failed {
        let Some(s) = &l.scales[scale] else { continue };
        for &c in &s.clusters {
            let (a, b) = (s.edge_fp.ends[0].entry(c), s.edge_fp.ends[1].entry(c));
            let (Some(a), Some(b)) = (a, b) else {
                return Err(Error::CorruptLabel(format!("edge {} names cluster {c} its endpoints are not in", l.edge)));
            };
            let child = if a.start <= b.start && b.end <= a.end {
                b
            } else if b.start <= a.start && a.end <= b.end {
                a
            } else {
                return Err(Error::CorruptLabel(format!("edge {} is not a tree edge of cluster {c}", l.edge)));
            };
            records.entry(c).or_default().push(SubtreeRecord { start: child.start, end: child.end, weights: child.subtree_weights.clone() });
        }
    }
    let mut clusters = BTreeMap::new();
    for (c, e) in entries {
        let recs = records.remove(&c).unwrap_or_default();
        let map = recover_components(e.size as usize, &e.cluster_weights, &recs)?;
        clusters.insert(c, (e, map));
    }
    let mut waypoint_clusters: BTreeMap<u32, Vec<Vertex>> = BTreeMap::new();
    for &w in waypoints.keys() {
        for e in &vertices[&w].entries {
            waypoint_clusters.entry(e.cluster).or_default().push(w);
        }
    }
    let edges = all_edges.into_iter().filter(|(id, _)| !failed_ids.contains(id)).collect();
    Ok(ScaleView { scale: scale as u32, h_diam, quarter, tau_heavy, vertices, edges, clusters, waypoint_clusters })
}

fn heavy_components(map: &ComponentMap, level: usize, tau: &Q) -> Vec<u32> {
    (0..map.components.len() as u32).filter(|&c| map.components[c as usize].weights[level] > *tau).collect()
}

/// Adds one scale's edges. `packed` chooses portal vertices over explicit pairwise
/// heavy-component edges.
pub fn add_scale(g: &mut DiscGraph, view: &ScaleView, levels: usize, packed: bool) -> Result<()> {
    let sc = view.scale;
    for &(u, v, len) in view.edges.values() {
        g.edge(Node::Orig(u), Node::Orig(v), len);
        g.counts.type1 += 1;
    }
    for (&v, fp) in &view.vertices {
        g.node(Node::Orig(v));
        for e in &fp.entries {
            let (_, map) = &view.clusters[&e.cluster];
            let comp = map.locate(e.start).ok_or_else(|| Error::CorruptLabel(format!("vertex {v} outside the tour of cluster {}", e.cluster)))?;
            g.edge(Node::Orig(v), Node::Comp { scale: sc, cluster: e.cluster, comp: comp as u32 }, view.h_diam);
            g.counts.type2 += 1;
        }
    }
    // every component is a vertex, even when nothing attaches to it
    for (cluster, (_, map)) in &view.clusters {
        for c in 0..map.components.len() as u32 {
            g.node(Node::Comp { scale: sc, cluster: *cluster, comp: c });
        }
    }
    if packed {
        for (&cluster, ws) in &view.waypoint_clusters {
            let (entry, map) = &view.clusters[&cluster];
            for j in entry.min_level()..levels {
                let lv = j as u32;
                let out = Node::Out { scale: sc, cluster, level: lv };
                let inn = Node::In { scale: sc, cluster, level: lv };
                for &w in ws {
                    let way = Node::Way { scale: sc, vertex: w, level: lv };
                    g.arc(out, way, view.quarter);
                    g.arc(way, inn, view.quarter);
                    g.counts.type3 += 2;
                }
                for c in heavy_components(map, j, &view.tau_heavy) {
                    let comp = Node::Comp { scale: sc, cluster, comp: c };
                    g.arc(comp, out, view.quarter);
                    g.arc(inn, comp, view.quarter);
                    g.counts.type4 += 2;
                }
            }
        }
    } else {
        let full = 4 * view.quarter;
        let mut seen: BTreeSet<(Node, Node)> = BTreeSet::new();
        for (&cluster, ws) in &view.waypoint_clusters {
            for &w in ws {
                for e2 in &view.vertices[&w].entries {
                    let (e1, m1) = &view.clusters[&cluster];
                    let (e2, m2) = &view.clusters[&e2.cluster];
                    let j = e1.min_level().max(e2.min_level());
                    if j >= levels {
                        continue;
                    }
                    for c1 in heavy_components(m1, j, &view.tau_heavy) {
                        for c2 in heavy_components(m2, j, &view.tau_heavy) {
                            let a = Node::Comp { scale: sc, cluster, comp: c1 };
                            let b = Node::Comp { scale: sc, cluster: e2.cluster, comp: c2 };
                            let key = if a <= b { (a, b) } else { (b, a) };
                            if a != b && seen.insert(key) {
                                g.edge(a, b, full);
                                g.counts.type3 += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_failures(header: &LabelHeader, failed: &[&ELabel]) -> Result<()> {
    if failed.len() > header.f as usize {
        return Err(Error::InvalidArgument(format!("{} failures exceed the supported f = {}", failed.len(), header.f)));
    }
    for (i, l) in failed.iter().enumerate() {
        if failed[..i].iter().any(|o| o.edge == l.edge) {
            return Err(Error::InvalidArgument(format!("edge {} listed twice in the failure set", l.edge)));
        }
        if l.scales.len() != header.scales() {
            return Err(Error::CorruptLabel(format!("edge label {} has {} scales", l.edge, l.scales.len())));
        }
    }
    Ok(())
}

/// The union over scales of the discovered graphs, packed or explicit.
pub fn discovered_graph(header: &LabelHeader, p: &Arc<VLabel>, q: &Arc<VLabel>, failed: &[&ELabel], packed: bool) -> Result<DiscGraph> {
    check_failures(header, failed)?;
    let w = extract_waypoints(p, q, failed)?;
    let mut g = DiscGraph::default();
    g.node(Node::Orig(p.vertex));
    g.node(Node::Orig(q.vertex));
    for i in 0..header.scales() {
        let view = scale_view(header, &w, failed, i)?;
        add_scale(&mut g, &view, header.d as usize + 1, packed)?;
    }
    Ok(g)
}

/// One scale's discovered graph on its own.
pub fn scale_graph(header: &LabelHeader, p: &Arc<VLabel>, q: &Arc<VLabel>, failed: &[&ELabel], scale: usize, packed: bool) -> Result<DiscGraph> {
    check_failures(header, failed)?;
    let w = extract_waypoints(p, q, failed)?;
    let mut g = DiscGraph::default();
    let view = scale_view(header, &w, failed, scale)?;
    add_scale(&mut g, &view, header.d as usize + 1, packed)?;
    Ok(g)
}

pub fn query(header: &LabelHeader, p: &Arc<VLabel>, q: &Arc<VLabel>, failed: &[&ELabel]) -> Result<Answer> {
    if p.vertex == q.vertex {
        check_failures(header, failed)?;
        return Ok(Answer::Estimate(0));
    }
    let g = discovered_graph(header, p, q, failed, true)?;
    Ok(match g.dist(&Node::Orig(p.vertex), &Node::Orig(q.vertex)) {
        Some(d) => Answer::Estimate(d),
        None => Answer::Unreachable,
    })
}
