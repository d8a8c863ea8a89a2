//! Cluster shortest-path trees, Euler tours, and component recovery from tour intervals.

use std::collections::BTreeMap;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{sssp_tree, EdgeId, Graph, Vertex};
use crate::rational::Q;
use crate::weights::NodeWeighting;

/// Euler tour of a rooted tree: root, then the tour of each child subtree followed by the
/// root again. Length 2|S|−1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerTour {
    pub seq: Vec<Vertex>,
    start: BTreeMap<Vertex, u32>,
    end: BTreeMap<Vertex, u32>,
}

impl EulerTour {
    /// Builds the tour from a root and ordered child lists.
    pub fn from_children(root: Vertex, children: &BTreeMap<Vertex, Vec<Vertex>>) -> EulerTour {
        let mut seq = Vec::new();
        let mut stack: Vec<(Vertex, usize)> = vec![(root, 0)];
        seq.push(root);
        while let Some((x, i)) = stack.pop() {
            let kids = children.get(&x).map(Vec::as_slice).unwrap_or(&[]);
            if i < kids.len() {
                stack.push((x, i + 1));
                stack.push((kids[i], 0));
                seq.push(kids[i]);
            } else if let Some(&(p, _)) = stack.last() {
                seq.push(p);
            }
        }
        EulerTour::from_sequence(seq)
    }

    pub fn from_sequence(seq: Vec<Vertex>) -> EulerTour {
        let mut start = BTreeMap::new();
        let mut end = BTreeMap::new();
        for (t, &v) in seq.iter().enumerate() {
            start.entry(v).or_insert(t as u32);
            end.insert(v, t as u32);
        }
        EulerTour { seq, start, end }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Number of tree vertices.
    pub fn size(&self) -> usize {
        self.start.len()
    }

    /// Period of the cyclic tour, 2(|S|−1).
    pub fn period(&self) -> usize {
        self.seq.len() - 1
    }

    pub fn at(&self, t: usize) -> Vertex {
        let p = self.period();
        if p == 0 {
            self.seq[0]
        } else {
            self.seq[t % p]
        }
    }

    pub fn start(&self, v: Vertex) -> Option<u32> {
        self.start.get(&v).copied()
    }

    pub fn end(&self, v: Vertex) -> Option<u32> {
        self.end.get(&v).copied()
    }

    /// pos(u,v): the index t ∈ 1..=2(|S|−1) with T[t−1] = u and T[t] = v.
    pub fn pos(&self, u: Vertex, v: Vertex) -> Option<u32> {
        (1..self.seq.len()).find(|&t| self.seq[t - 1] == u && self.seq[t] == v).map(|t| t as u32)
    }

    /// Distinct vertices of the cyclic interval T[t, t').
    pub fn interval_vertices(&self, t: usize, t_end: usize) -> Vec<Vertex> {
        let mut vs: Vec<Vertex> = (t..t_end).map(|x| self.at(x)).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Recovers parent links from the tour sequence.
    pub fn parents(&self) -> BTreeMap<Vertex, Vertex> {
        let mut parent = BTreeMap::new();
        for t in 1..self.seq.len() {
            let (a, b) = (self.seq[t - 1], self.seq[t]);
            if self.start[&b] == t as u32 {
                parent.insert(b, a);
            }
        }
        parent
    }
}

/// Largest t' ∈ [t, t + 2(|S|−1)] such that the vertices of T[t, t') weigh at most τ in
/// total (each vertex counted once).
pub fn maximal_interval(tour: &EulerTour, t: usize, a: &NodeWeighting, tau: &Q) -> usize {
    let mut seen = std::collections::BTreeSet::new();
    let mut sum = Q::zero();
    let limit = t + tour.period();
    let mut t_end = t;
    while t_end < limit {
        let v = tour.at(t_end);
        if !seen.contains(&v) {
            let next = &sum + a.get(v);
            if next > *tau {
                break;
            }
            sum = next;
            seen.insert(v);
        }
        t_end += 1;
    }
    t_end
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeEdge {
    pub parent: Vertex,
    pub child: Vertex,
    pub edge: EdgeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterTree {
    pub root: Vertex,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<TreeEdge>,
    pub tour: EulerTour,
    /// Tree distance from the root, per cluster vertex.
    pub depth: BTreeMap<Vertex, u64>,
}

impl ClusterTree {
    pub fn radius(&self) -> u64 {
        self.depth.values().copied().max().unwrap_or(0)
    }

    /// True when {u, v} is a tree edge (as a vertex pair).
    pub fn has_pair(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.iter().any(|e| (e.parent == u && e.child == v) || (e.parent == v && e.child == u))
    }

    /// Subtree weight A(subtree of v) for every tree vertex.
    pub fn subtree_sums(&self, a: &NodeWeighting) -> BTreeMap<Vertex, Q> {
        let mut sums: BTreeMap<Vertex, Q> = self.vertices.iter().map(|&v| (v, a.get(v).clone())).collect();
        // descendants start later in the tour, so they are folded in before their ancestors
        let mut by_start: Vec<&TreeEdge> = self.edges.iter().collect();
        by_start.sort_by_key(|e| std::cmp::Reverse(self.tour.start(e.child).unwrap()));
        for e in by_start {
            let c = sums[&e.child].clone();
            *sums.get_mut(&e.parent).unwrap() += c;
        }
        sums
    }
}

/// Shortest-path tree of the induced subgraph on `cluster`, rooted at its lowest-id vertex.
pub fn build_cluster_tree(g: &Graph, cluster: &[Vertex]) -> Result<ClusterTree> {
    let mut vertices = cluster.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    let root = *vertices.first().ok_or_else(|| Error::InvalidArgument("empty cluster".into()))?;
    let mut allowed = vec![false; g.n()];
    for &v in &vertices {
        allowed[v as usize] = true;
    }
    let (dist, parent) = sssp_tree(g, root, Some(&allowed));
    let mut edges = Vec::new();
    let mut children: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    let mut depth = BTreeMap::new();
    for &v in &vertices {
        let d = dist[v as usize].ok_or_else(|| Error::Construction(format!("cluster disconnected at vertex {v}")))?;
        depth.insert(v, d);
        if v != root {
            let r = parent[v as usize].expect("parent of reached vertex");
            let e = g.edge_at(r);
            let p = e.other(v);
            edges.push(TreeEdge { parent: p, child: v, edge: e.id });
            children.entry(p).or_default().push(v);
        }
    }
    for kids in children.values_mut() {
        kids.sort_unstable();
    }
    let tour = EulerTour::from_children(root, &children);
    Ok(ClusterTree { root, vertices, edges, tour, depth })
}

/// What the labels store about a subtree hanging off a failed tree edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtreeRecord {
    pub start: u32,
    pub end: u32,
    /// A_{j'}(subtree) for every level j'.
    pub weights: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Start index of the component's top vertex.
    pub top: u32,
    /// Disjoint inclusive tour intervals, ascending.
    pub intervals: Vec<(u32, u32)>,
    /// A_{j'}(component) for every level j'.
    pub weights: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentMap {
    pub components: Vec<Component>,
    /// (first, last, component) covering 0..=2(|S|−1), ascending and disjoint.
    segments: Vec<(u32, u32, usize)>,
}

impl ComponentMap {
    /// Component containing the tour position `point` (a vertex's start index).
    pub fn locate(&self, point: u32) -> Option<usize> {
        let i = self.segments.partition_point(|s| s.0 <= point);
        if i == 0 {
            return None;
        }
        let s = self.segments[i - 1];
        (point <= s.1).then_some(s.2)
    }
}

/// Components of T_S ∖ F from interval records: each failed edge contributes the child
/// subtree's interval and weights, and a component is its subtree minus the nested
/// failed subtrees directly below it.
pub fn recover_components(size: usize, root_weights: &[Q], cuts: &[SubtreeRecord]) -> Result<ComponentMap> {
    if size == 0 {
        return Err(Error::CorruptLabel("empty cluster".into()));
    }
    let last = 2 * (size as u32 - 1);
    let mut nodes: Vec<SubtreeRecord> = vec![SubtreeRecord { start: 0, end: last, weights: root_weights.to_vec() }];
    let mut sorted = cuts.to_vec();
    sorted.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
    for c in sorted {
        if c.start == 0 || c.end > last || c.start > c.end || c.weights.len() != root_weights.len() {
            return Err(Error::CorruptLabel(format!("subtree interval [{}, {}] outside tour", c.start, c.end)));
        }
        match nodes.last() {
            Some(p) if p.start == c.start && p.end == c.end => {
                if p.weights != c.weights {
                    return Err(Error::CorruptLabel("conflicting subtree records".into()));
                }
            }
            _ => nodes.push(c),
        }
    }
    let k = nodes.len();
    let mut parent = vec![usize::MAX; k];
    let mut stack: Vec<usize> = vec![0];
    for i in 1..k {
        while let Some(&top) = stack.last() {
            if nodes[top].end < nodes[i].start {
                stack.pop();
            } else {
                break;
            }
        }
        let top = *stack.last().ok_or_else(|| Error::CorruptLabel("interval outside root".into()))?;
        if nodes[i].end > nodes[top].end {
            return Err(Error::CorruptLabel(format!(
                "intervals [{}, {}] and [{}, {}] cross",
                nodes[top].start, nodes[top].end, nodes[i].start, nodes[i].end
            )));
        }
        parent[i] = top;
        stack.push(i);
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 1..k {
        children[parent[i]].push(i);
    }
    let mut components = Vec::with_capacity(k);
    let mut segments = Vec::new();
    for i in 0..k {
        let mut weights = nodes[i].weights.clone();
        let mut intervals = Vec::new();
        let mut cur = nodes[i].start;
        for &c in &children[i] {
            for (w, cw) in weights.iter_mut().zip(&nodes[c].weights) {
                *w -= cw;
            }
            if nodes[c].start > cur {
                intervals.push((cur, nodes[c].start - 1));
            }
            cur = nodes[c].end + 1;
        }
        if cur <= nodes[i].end {
            intervals.push((cur, nodes[i].end));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::CorruptLabel("subtree weights exceed their parent's".into()));
        }
        for &(a, b) in &intervals {
            segments.push((a, b, i));
        }
        components.push(Component { top: nodes[i].start, intervals, weights });
    }
    segments.sort_unstable();
    Ok(ComponentMap { components, segments })
}
