//! Undirected multigraph with integer lengths and rational capacities.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use num::{One, Signed};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

pub type Vertex = u32;
pub type EdgeId = u32;
pub type Dist = Option<u64>;

/// Default cap on the number of edges, as a multiple of n².
pub const EDGE_CAP_FACTOR: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub u: Vertex,
    pub v: Vertex,
    pub length: u64,
    pub capacity: Q,
}

impl Edge {
    pub fn other(&self, x: Vertex) -> Vertex {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Edges are kept sorted by id; the position of an edge in that order is its rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    rank_of: HashMap<EdgeId, usize>,
}

impl Graph {
    pub fn new(n: usize, mut edges: Vec<Edge>) -> Result<Graph> {
        edges.sort_by_key(|e| e.id);
        let mut rank_of = HashMap::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); n];
        for (r, e) in edges.iter().enumerate() {
            if rank_of.insert(e.id, r).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge id {}", e.id)));
            }
            if e.u as usize >= n || e.v as usize >= n {
                return Err(Error::InvalidGraph(format!("edge {} has an endpoint outside 0..{}", e.id, n)));
            }
            if e.length == 0 {
                return Err(Error::InvalidGraph(format!("edge {} has length 0", e.id)));
            }
            if e.capacity < Q::one() {
                return Err(Error::InvalidGraph(format!("edge {} has capacity below 1", e.id)));
            }
            adj[e.u as usize].push(r);
            if e.v != e.u {
                adj[e.v as usize].push(r);
            }
        }
        if n > 0 && edges.len() > EDGE_CAP_FACTOR * n * n {
            return Err(Error::InvalidGraph(format!("{} edges exceed the cap of 10·n²", edges.len())));
        }
        Ok(Graph { n, edges, adj, rank_of })
    }

    /// Unit-capacity graph from `(u, v, length)` triples; edge ids are positions.
    pub fn from_triples(n: usize, triples: &[(Vertex, Vertex, u64)]) -> Result<Graph> {
        let edges = triples.iter().enumerate().map(|(i, &(u, v, length))| Edge { id: i as EdgeId, u, v, length, capacity: Q::one() }).collect();
        Graph::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_at(&self, rank: usize) -> &Edge {
        &self.edges[rank]
    }

    pub fn rank(&self, id: EdgeId) -> Option<usize> {
        self.rank_of.get(&id).copied()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.rank(id).map(|r| &self.edges[r])
    }

    /// Ranks of edges incident to `v`.
    pub fn incident(&self, v: Vertex) -> &[usize] {
        &self.adj[v as usize]
    }

    pub fn max_length(&self) -> u64 {
        self.edges.iter().map(|e| e.length).max().unwrap_or(1)
    }

    /// Copy with every capacity set to 1.
    pub fn uncapacitated(&self) -> Graph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.capacity = Q::one();
        }
        g
    }

    /// Copy with the given lengths, indexed by rank.
    pub fn with_lengths(&self, lengths: &[u64]) -> Graph {
        let mut g = self.clone();
        for (e, &l) in g.edges.iter_mut().zip(lengths) {
            e.length = l;
        }
        g
    }

    /// Copy without the listed edge ids.
    pub fn without_edges(&self, removed: &[EdgeId]) -> Graph {
        let edges = self.edges.iter().filter(|e| !removed.contains(&e.id)).cloned().collect();
        Graph::new(self.n, edges).expect("subgraph of a valid graph")
    }

    /// Lengths of G − C where C is a moving cut: `l(e) + scale_h · C(e)`.
    pub fn apply_cut(&self, c: &crate::weights::MovingCut, scale_h: u64) -> Result<Graph> {
        let mut g = self.clone();
        for (&id, &units) in c.units() {
            let r = self.rank(id).ok_or(Error::UnknownEdge(id))?;
            let add = scale_h as u128 * units as u128;
            if !add.is_multiple_of(c.h() as u128) {
                return Err(Error::InvalidArgument(format!("cut on a 1/{} grid does not give integer lengths at scale {}", c.h(), scale_h)));
            }
            g.edges[r].length += (add / c.h() as u128) as u64;
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.n, self.m(), self.max_length());
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {} {} {} {}", e.id, e.u, e.v, e.length, e.capacity.numer(), e.capacity.denom());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let head = lines.next().ok_or_else(|| Error::InvalidGraph("empty input".into()))?;
        let nums: Vec<u64> =
            head.split_whitespace().map(|t| t.parse().map_err(|_| Error::InvalidGraph(format!("bad header token {t:?}")))).collect::<Result<_>>()?;
        if nums.len() != 3 {
            return Err(Error::InvalidGraph("header must be `n m L`".into()));
        }
        let (n, m, cap_l) = (nums[0] as usize, nums[1] as usize, nums[2]);
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 6 {
                return Err(Error::InvalidGraph(format!("edge line needs 6 fields: {line:?}")));
            }
            let p = |s: &str| s.parse::<u64>().map_err(|_| Error::InvalidGraph(format!("bad number {s:?}")));
            let cap = rational::parse(&format!("{}/{}", t[4], t[5])).ok_or_else(|| Error::InvalidGraph(format!("bad capacity in {line:?}")))?;
            let length = p(t[3])?;
            if length > cap_l {
                return Err(Error::InvalidGraph(format!("edge length {length} exceeds L = {cap_l}")));
            }
            edges.push(Edge { id: p(t[0])? as EdgeId, u: p(t[1])? as Vertex, v: p(t[2])? as Vertex, length, capacity: cap });
        }
        if edges.len() != m {
            return Err(Error::InvalidGraph(format!("header says {m} edges, found {}", edges.len())));
        }
        Graph::new(n, edges)
    }

    /// Degree weighting deg_G(v) = Σ u(e) over incident edges (loops count twice).
    pub fn degree(&self) -> crate::weights::NodeWeighting {
        let mut w = crate::weights::NodeWeighting::zero(self.n);
        for e in &self.edges {
            w.add_at(e.u, &e.capacity);
            w.add_at(e.v, &e.capacity);
        }
        w
    }

    pub fn components(&self) -> Vec<u32> {
        let mut comp = vec![u32::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if comp[s] != u32::MAX {
                continue;
            }
            let mut stack = vec![s as Vertex];
            comp[s] = next;
            while let Some(x) = stack.pop() {
                for &r in self.incident(x) {
                    let y = self.edges[r].other(x);
                    if comp[y as usize] == u32::MAX {
                        comp[y as usize] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// Shortest-path distances from `source`; `None` marks unreachable vertices.
pub fn sssp(g: &Graph, source: Vertex) -> Vec<Dist> {
    sssp_tree(g, source, None).0
}

/// Dijkstra restricted to `allowed` (if given). Returns distances and the parent edge rank.
/// Among equal-distance parents the first one relaxed is kept, so the tree is deterministic.
pub fn sssp_tree(g: &Graph, source: Vertex, allowed: Option<&[bool]>) -> (Vec<Dist>, Vec<Option<usize>>) {
    let n = g.n();
    let mut dist: Vec<Dist> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = Some(0);
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((d, x))) = heap.pop() {
        if done[x as usize] {
            continue;
        }
        done[x as usize] = true;
        for &r in g.incident(x) {
            let e = g.edge_at(r);
            let y = e.other(x);
            if allowed.is_some_and(|a| !a[y as usize]) || done[y as usize] {
                continue;
            }
            let nd = d + e.length;
            let better = match dist[y as usize] {
                None => true,
                Some(old) => nd < old,
            };
            if better {
                heap.push(Reverse((nd, y)));
                dist[y as usize] = Some(nd);
                parent[y as usize] = Some(r);
            }
        }
    }
    (dist, parent)
}

/// All-pairs distances by repeated Dijkstra.
pub fn all_pairs(g: &Graph) -> Vec<Vec<Dist>> {
    (0..g.n() as Vertex).map(|s| sssp(g, s)).collect()
}

/// A path given as its ordered edge ids, from `from` to `to`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub from: Vertex,
    pub to: Vertex,
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn length(&self, g: &Graph) -> u64 {
        self.edges.iter().map(|&id| g.edge(id).expect("path edge").length).sum()
    }

    /// Vertex sequence of the path.
    pub fn vertices(&self, g: &Graph) -> Vec<Vertex> {
        let mut out = vec![self.from];
        let mut cur = self.from;
        for &id in &self.edges {
            cur = g.edge(id).expect("path edge").other(cur);
            out.push(cur);
        }
        out
    }
}

/// Indicator bitset over edge ranks: rank 0 is the most significant bit, so comparing
/// the word vectors lexicographically compares indicator vectors lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Indicator(Vec<u64>);

impl Indicator {
    fn empty(m: usize) -> Self {
        Indicator(vec![0; m.div_ceil(64).max(1)])
    }
    fn with(&self, rank: usize) -> Self {
        let mut w = self.0.clone();
        w[rank / 64] |= 1u64 << (63 - rank % 64);
        Indicator(w)
    }
}

/// Label for lex-max Dijkstra: shorter is better, then larger indicator is better.
#[derive(Clone, PartialEq, Eq)]
struct LexLabel(u64, Indicator);

impl Ord for LexLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}
impl PartialOrd for LexLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Tree of lex-max shortest paths from `source`: parent edge rank per vertex.
pub fn lexmax_tree(g: &Graph, source: Vertex) -> Vec<Option<(u64, Option<usize>)>> {
    let n = g.n();
    let mut best: Vec<Option<LexLabel>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[source as usize] = Some(LexLabel(0, Indicator::empty(g.m())));
    heap.push(Reverse((best[source as usize].clone().unwrap(), source)));
    while let Some(Reverse((lab, x))) = heap.pop() {
        if done[x as usize] {
            continue;
        }
        done[x as usize] = true;
        for &r in g.incident(x) {
            let e = g.edge_at(r);
            let y = e.other(x);
            if done[y as usize] {
                continue;
            }
            let cand = LexLabel(lab.0 + e.length, lab.1.with(r));
            if best[y as usize].as_ref().is_none_or(|b| cand < *b) {
                best[y as usize] = Some(cand.clone());
                parent[y as usize] = Some(r);
                heap.push(Reverse((cand, y)));
            }
        }
    }
    (0..n).map(|v| best[v].as_ref().map(|b| (b.0, parent[v]))).collect()
}

fn path_from_tree(g: &Graph, tree: &[Option<(u64, Option<usize>)>], source: Vertex, target: Vertex) -> Option<Path> {
    tree[target as usize]?;
    let mut edges = Vec::new();
    let mut cur = target;
    while cur != source {
        let r = tree[cur as usize].and_then(|t| t.1).expect("tree parent");
        let e = g.edge_at(r);
        edges.push(e.id);
        cur = e.other(cur);
    }
    edges.reverse();
    Some(Path { from: source, to: target, edges })
}

/// The shortest (u,v)-path with lexicographically maximum edge indicator vector
/// (edges ordered by ascending id), or `None` when v is unreachable.
pub fn lexmax_shortest_path(g: &Graph, u: Vertex, v: Vertex) -> Option<Path> {
    let tree = lexmax_tree(g, u);
    path_from_tree(g, &tree, u, v)
}

/// Lex-max shortest paths from `u` to every reachable vertex.
pub fn lexmax_paths_from(g: &Graph, u: Vertex) -> Vec<Option<Path>> {
    let tree = lexmax_tree(g, u);
    (0..g.n() as Vertex).map(|v| path_from_tree(g, &tree, u, v)).collect()
}

/// Enumerates all simple (u,v)-paths with length ≤ `bound`; errors past `cap` paths.
pub fn simple_paths(g: &Graph, u: Vertex, v: Vertex, bound: u64, cap: usize) -> Result<Vec<Path>> {
    let mut out = Vec::new();
    if u == v {
        out.push(Path { from: u, to: v, edges: vec![] });
        return Ok(out);
    }
    let mut on_path = vec![false; g.n()];
    let mut stack: Vec<EdgeId> = Vec::new();
    fn rec(
        g: &Graph,
        x: Vertex,
        target: Vertex,
        left: u64,
        on_path: &mut [bool],
        stack: &mut Vec<EdgeId>,
        out: &mut Vec<Path>,
        cap: usize,
        from: Vertex,
    ) -> Result<()> {
        if x == target {
            if out.len() >= cap {
                return Err(Error::Resource(format!("more than {cap} simple paths")));
            }
            out.push(Path { from, to: target, edges: stack.clone() });
            return Ok(());
        }
        on_path[x as usize] = true;
        for &r in g.incident(x) {
            let e = g.edge_at(r);
            let y = e.other(x);
            if on_path[y as usize] || e.length > left {
                continue;
            }
            stack.push(e.id);
            rec(g, y, target, left - e.length, on_path, stack, out, cap, from)?;
            stack.pop();
        }
        on_path[x as usize] = false;
        Ok(())
    }
    rec(g, u, v, bound, &mut on_path, &mut stack, &mut out, cap, u)?;
    Ok(out)
}

/// Sum of capacities as a sanity helper for cut sizes.
pub fn total_capacity(g: &Graph) -> Q {
    g.edges().iter().fold(rational::zero(), |acc, e| acc + &e.capacity)
}

pub fn check_positive(x: &Q) -> bool {
    x.is_positive()
}
