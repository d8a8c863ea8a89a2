//! Length-constrained minimum-congestion routing.
//!
//! The LP is solved in floating point; the returned flow is then rescaled into exact
//! rationals so that it routes the demand exactly, and its congestion is recomputed
//! exactly. Nothing downstream trusts a float.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};
use num::Zero;

use crate::error::{Error, Result};
use crate::graph::{lexmax_shortest_path, simple_paths, sssp, EdgeId, Graph, Vertex};
use crate::rational::{self, Q};
use crate::weights::Demand;

pub const DEFAULT_PATH_CAP: usize = 200_000;

/// How admissible paths reach the LP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Every simple path of length ≤ h is a column up front.
    Enumerate,
    /// Columns are priced in lazily with a length-bounded shortest-path oracle.
    Generate,
}

#[derive(Clone, Copy, Debug)]
pub struct RoutingConfig {
    pub backend: Backend,
    pub path_cap: usize,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        RoutingConfig { backend: Backend::Generate, path_cap: DEFAULT_PATH_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowPath {
    pub from: Vertex,
    pub to: Vertex,
    pub edges: Vec<EdgeId>,
    pub length: u64,
    pub amount: Q,
}

#[derive(Clone, Debug)]
pub struct RoutingResult {
    pub feasible: bool,
    /// Exact congestion max_e Σ_{P∋e} F(P)/u(e) of `flow`.
    pub congestion: Q,
    pub flow: Vec<FlowPath>,
    pub max_length: u64,
    /// Optimal value reported by the LP solver.
    pub lp_congestion: f64,
    /// Optimal dual edge lengths (by edge rank), normalized so Σ u(e)ℓ(e) = 1.
    pub dual_lengths: Vec<f64>,
    /// Per unordered commodity (u < v): dual distance under `dual_lengths`.
    pub dual_distance: BTreeMap<(Vertex, Vertex), f64>,
}

impl RoutingResult {
    fn empty(m: usize, feasible: bool) -> Self {
        RoutingResult {
            feasible,
            congestion: Q::zero(),
            flow: Vec::new(),
            max_length: 0,
            lp_congestion: 0.0,
            dual_lengths: vec![0.0; m],
            dual_distance: BTreeMap::new(),
        }
    }

    /// Exact per-edge congestion of the flow, by edge rank.
    pub fn edge_congestion(&self, g: &Graph) -> Vec<Q> {
        edge_loads(g, &self.flow).into_iter().enumerate().map(|(r, l)| l / &g.edge_at(r).capacity).collect()
    }

    /// Routed amount per ordered pair as it appears in the flow.
    pub fn routed(&self) -> BTreeMap<(Vertex, Vertex), Q> {
        let mut out: BTreeMap<(Vertex, Vertex), Q> = BTreeMap::new();
        for p in &self.flow {
            *out.entry((p.from, p.to)).or_insert_with(Q::zero) += &p.amount;
        }
        out
    }
}

fn edge_loads(g: &Graph, flow: &[FlowPath]) -> Vec<Q> {
    let mut load = vec![Q::zero(); g.m()];
    for p in flow {
        for &e in &p.edges {
            load[g.rank(e).expect("flow edge")] += &p.amount;
        }
    }
    load
}

struct Commodity {
    u: Vertex,
    v: Vertex,
    demand: Q,
    demand_f: f64,
}

/// Minimum-congestion routing of `d` over paths of length ≤ `h`. Self pairs are routed
/// on the empty path and never congest anything. Demands are treated as undirected:
/// D(u,v) and D(v,u) form one commodity.
pub fn route_lp(g: &Graph, d: &Demand, h: u64, cfg: &RoutingConfig) -> Result<RoutingResult> {
    let sym = d.symmetric();
    if sym.is_empty() {
        return Ok(RoutingResult::empty(g.m(), true));
    }
    let commodities: Vec<Commodity> = sym.into_iter().map(|((u, v), x)| Commodity { u, v, demand_f: rational::to_f64(&x), demand: x }).collect();
    let mut dist_cache: BTreeMap<Vertex, Vec<Option<u64>>> = BTreeMap::new();
    for c in &commodities {
        let dist = dist_cache.entry(c.u).or_insert_with(|| sssp(g, c.u));
        if dist[c.v as usize].is_none_or(|x| x > h) {
            return Ok(RoutingResult::empty(g.m(), false));
        }
    }
    let paths = match cfg.backend {
        Backend::Enumerate => {
            let mut all = Vec::with_capacity(commodities.len());
            let mut total = 0usize;
            for c in &commodities {
                let ps = simple_paths(g, c.u, c.v, h, cfg.path_cap.saturating_sub(total))?;
                total += ps.len();
                all.push(ps.into_iter().map(|p| ranks_of(g, &p.edges)).collect::<Vec<_>>());
            }
            all
        }
        Backend::Generate => generate_columns(g, &commodities, h, cfg.path_cap)?,
    };
    let (dual_lengths, _) = solve_dual(g, &commodities, &paths)?;
    let (lp_value, x) = solve_primal(g, &commodities, &paths)?;
    let flow = exact_flow(g, &commodities, &paths, &x);
    let load = edge_loads(g, &flow);
    let congestion = load.iter().enumerate().map(|(r, l)| l / &g.edge_at(r).capacity).max().unwrap_or_else(Q::zero);
    let max_length = flow.iter().map(|p| p.length).max().unwrap_or(0);
    let mut dual_distance = BTreeMap::new();
    for (k, c) in commodities.iter().enumerate() {
        let best = paths[k].iter().map(|p| p.iter().map(|&r| dual_lengths[r]).sum::<f64>()).fold(f64::INFINITY, f64::min);
        dual_distance.insert((c.u, c.v), best);
    }
    Ok(RoutingResult { feasible: true, congestion, flow, max_length, lp_congestion: lp_value, dual_lengths, dual_distance })
}

fn ranks_of(g: &Graph, edges: &[EdgeId]) -> Vec<usize> {
    edges.iter().map(|&e| g.rank(e).expect("path edge")).collect()
}

fn lp_err(e: minilp::Error) -> Error {
    Error::Lp(e.to_string())
}

/// max Σ D_k z_k  s.t.  Σ u(e)ℓ(e) = 1,  z_k ≤ ℓ(P) for every listed path P of k.
fn solve_dual(g: &Graph, cs: &[Commodity], paths: &[Vec<Vec<usize>>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut pb = Problem::new(OptimizationDirection::Maximize);
    let ell: Vec<Variable> = (0..g.m()).map(|_| pb.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let z: Vec<Variable> = cs.iter().map(|c| pb.add_var(c.demand_f, (0.0, f64::INFINITY))).collect();
    let mut norm = LinearExpr::empty();
    for (r, &v) in ell.iter().enumerate() {
        norm.add(v, rational::to_f64(&g.edge_at(r).capacity));
    }
    pb.add_constraint(norm, ComparisonOp::Eq, 1.0);
    for (k, ps) in paths.iter().enumerate() {
        for p in ps {
            let mut e = LinearExpr::empty();
            e.add(z[k], 1.0);
            for &r in p {
                e.add(ell[r], -1.0);
            }
            pb.add_constraint(e, ComparisonOp::Le, 0.0);
        }
    }
    let sol = pb.solve().map_err(lp_err)?;
    Ok((ell.iter().map(|&v| sol[v].max(0.0)).collect(), z.iter().map(|&v| sol[v]).collect()))
}

/// min λ  s.t.  Σ_P x_P = D_k,  Σ_{P∋e} x_P ≤ λ·u(e),  x ≥ 0.
fn solve_primal(g: &Graph, cs: &[Commodity], paths: &[Vec<Vec<usize>>]) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut pb = Problem::new(OptimizationDirection::Minimize);
    let lambda = pb.add_var(1.0, (0.0, f64::INFINITY));
    let mut on_edge: Vec<LinearExpr> = (0..g.m()).map(|_| LinearExpr::empty()).collect();
    let mut vars = Vec::with_capacity(cs.len());
    for (k, ps) in paths.iter().enumerate() {
        let mut sum = LinearExpr::empty();
        let mut vs = Vec::with_capacity(ps.len());
        for p in ps {
            let x = pb.add_var(0.0, (0.0, f64::INFINITY));
            sum.add(x, 1.0);
            for &r in p {
                on_edge[r].add(x, 1.0);
            }
            vs.push(x);
        }
        pb.add_constraint(sum, ComparisonOp::Eq, cs[k].demand_f);
        vars.push(vs);
    }
    for (r, mut e) in on_edge.into_iter().enumerate() {
        e.add(lambda, -rational::to_f64(&g.edge_at(r).capacity));
        pb.add_constraint(e, ComparisonOp::Le, 0.0);
    }
    let sol = pb.solve().map_err(lp_err)?;
    let x = vars.iter().map(|vs| vs.iter().map(|&v| sol[v]).collect()).collect();
    Ok((sol[lambda], x))
}

/// Rounds the float path flow to a 2⁻³⁰ grid and rescales each commodity so the
/// routed amount equals its demand exactly.
fn exact_flow(g: &Graph, cs: &[Commodity], paths: &[Vec<Vec<usize>>], x: &[Vec<f64>]) -> Vec<FlowPath> {
    let mut out = Vec::new();
    for (k, c) in cs.iter().enumerate() {
        let mut weights: Vec<Q> = x[k].iter().map(|&v| rational::from_f64_grid(v, 30)).collect();
        let mut total = weights.iter().fold(Q::zero(), |a, w| a + w);
        if total.is_zero() {
            let best = x[k].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
            weights = vec![Q::zero(); x[k].len()];
            weights[best] = rational::one();
            total = rational::one();
        }
        for (p, w) in paths[k].iter().zip(weights) {
            if w.is_zero() {
                continue;
            }
            let edges: Vec<EdgeId> = p.iter().map(|&r| g.edge_at(r).id).collect();
            let length = p.iter().map(|&r| g.edge_at(r).length).sum();
            out.push(FlowPath { from: c.u, to: c.v, edges, length, amount: &c.demand * w / &total });
        }
    }
    out
}

fn generate_columns(g: &Graph, cs: &[Commodity], h: u64, cap: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    let mut paths: Vec<Vec<Vec<usize>>> = cs
        .iter()
        .map(|c| {
            let p = lexmax_shortest_path(g, c.u, c.v).expect("reachable commodity");
            vec![ranks_of(g, &p.edges)]
        })
        .collect();
    let mut count = paths.len();
    loop {
        let (ell, z) = solve_dual(g, cs, &paths)?;
        let mut added = false;
        for (k, c) in cs.iter().enumerate() {
            let Some((w, p)) = bounded_lightest_path(g, &ell, c.u, c.v, h) else { continue };
            let slack = 1e-9 * z[k].abs().max(1e-9);
            if w < z[k] - slack && !paths[k].contains(&p) {
                paths[k].push(p);
                count += 1;
                added = true;
            }
        }
        if count > cap {
            return Err(Error::Resource(format!("more than {cap} generated paths")));
        }
        if !added {
            return Ok(paths);
        }
    }
}

#[derive(Clone, Copy)]
struct Label {
    w: f64,
    len: u64,
    at: Vertex,
    parent: usize,
    via: usize,
    dead: bool,
}

#[derive(PartialEq)]
struct HeapItem(f64, u64, usize);
impl Eq for HeapItem {}
impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1)).then(o.2.cmp(&self.2))
    }
}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Minimum ℓ-weight (u,v)-path among paths of length ≤ `bound` (Pareto label setting),
/// returned as simple path edge ranks.
pub fn bounded_lightest_path(g: &Graph, ell: &[f64], u: Vertex, v: Vertex, bound: u64) -> Option<(f64, Vec<usize>)> {
    let mut labels = vec![Label { w: 0.0, len: 0, at: u, parent: usize::MAX, via: usize::MAX, dead: false }];
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    at[u as usize].push(0);
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem(0.0, 0, 0));
    while let Some(HeapItem(_, _, id)) = heap.pop() {
        let lab = labels[id];
        if lab.dead {
            continue;
        }
        if lab.at == v {
            let mut walk = Vec::new();
            let mut cur = id;
            while labels[cur].parent != usize::MAX {
                walk.push(labels[cur].via);
                cur = labels[cur].parent;
            }
            walk.reverse();
            let simple = shortcut(g, u, &walk);
            let w = simple.iter().map(|&r| ell[r]).sum();
            return Some((w, simple));
        }
        for &r in g.incident(lab.at) {
            let e = g.edge_at(r);
            let y = e.other(lab.at);
            let nl = lab.len + e.length;
            if nl > bound {
                continue;
            }
            let nw = lab.w + ell[r];
            if at[y as usize].iter().any(|&o| !labels[o].dead && labels[o].w <= nw && labels[o].len <= nl) {
                continue;
            }
            for &o in &at[y as usize] {
                if labels[o].w >= nw && labels[o].len >= nl {
                    labels[o].dead = true;
                }
            }
            labels.push(Label { w: nw, len: nl, at: y, parent: id, via: r, dead: false });
            let nid = labels.len() - 1;
            at[y as usize].retain(|&o| !labels[o].dead);
            at[y as usize].push(nid);
            heap.push(HeapItem(nw, nl, nid));
        }
    }
    None
}

/// Removes cycles from a walk given as edge ranks starting at `u`.
fn shortcut(g: &Graph, u: Vertex, walk: &[usize]) -> Vec<usize> {
    let mut verts = vec![u];
    let mut edges: Vec<usize> = Vec::new();
    let mut cur = u;
    for &r in walk {
        cur = g.edge_at(r).other(cur);
        if let Some(pos) = verts.iter().position(|&x| x == cur) {
            verts.truncate(pos + 1);
            edges.truncate(pos);
        } else {
            verts.push(cur);
            edges.push(r);
        }
    }
    edges
}
