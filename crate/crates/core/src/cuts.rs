//! LDD demands, cut-or-certify, cut-until-certify, and the union-of-cuts diagnostic.

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::cover::{build_cover, NeighborhoodCover, DEFAULT_C_OMEGA};
use crate::error::{Error, Result};
use crate::flow::{route_lp, FlowPath, RoutingConfig, RoutingResult};
use crate::graph::{lexmax_shortest_path, sssp, Graph, Vertex};
use crate::rational::{self, Q};
use crate::weights::{demand_stats, Demand, MovingCut, NodeWeighting};

#[derive(Clone, Copy, Debug)]
pub struct CutConfig {
    pub c_omega: f64,
    pub routing: RoutingConfig,
}

impl Default for CutConfig {
    fn default() -> Self {
        CutConfig { c_omega: DEFAULT_C_OMEGA, routing: RoutingConfig::default() }
    }
}

/// D_{A,N} = (1/ω) Σ_S D_{A,S} with D_{A,S}(u,v) = A(u)A(v) / (2·A(S)) for u, v ∈ S.
pub fn ldd_demand(a: &NodeWeighting, cover: &NeighborhoodCover) -> Demand {
    let mut d = Demand::new();
    d.length_bound = Some(cover.h_diam);
    let omega = Q::from_integer(cover.width().into());
    for s in cover.clusters() {
        let total = a.sum_over(s.iter().copied());
        if total.is_zero() {
            continue;
        }
        let denom = Q::from_integer(2.into()) * &total * &omega;
        for &u in s {
            if a.get(u).is_zero() {
                continue;
            }
            for &v in s {
                if !a.get(v).is_zero() {
                    d.add(u, v, a.get(u) * a.get(v) / &denom);
                }
            }
        }
    }
    d
}

/// Outcome of routing the LDD demand of `a` at the certification budget.
#[derive(Clone, Debug)]
pub struct ExpansionCheck {
    pub omega: usize,
    /// Exact congestion of the flow found.
    pub congestion: Q,
    /// Budget γ = 1/(4ωφ).
    pub budget: Q,
    /// Length bound (s/4)·h used for the routing.
    pub route_length: u64,
    pub certified: bool,
    /// Largest φ this flow certifies, 1/(4ω·congestion); `None` when the congestion is 0.
    pub phi_certified: Option<Q>,
    pub demand: Demand,
    pub routing: Option<RoutingResult>,
}

/// Routes the LDD demand of a fresh cover with h_cov = h, h_diam = h·s2, at length (s/4)·h.
/// A cheap shortest-path routing is tried first; the LP runs only if that misses the budget.
pub fn check_expansion(g: &Graph, a: &NodeWeighting, h: u64, s: u64, s2: u64, phi: &Q, cfg: &CutConfig) -> Result<ExpansionCheck> {
    let route_length = s * h / 4;
    if a.is_zero() {
        return Ok(ExpansionCheck {
            omega: 0,
            congestion: Q::zero(),
            budget: Q::zero(),
            route_length,
            certified: true,
            phi_certified: None,
            demand: Demand::new(),
            routing: None,
        });
    }
    let cover = build_cover(g, h, s2, cfg.c_omega)?;
    let omega = cover.width();
    let demand = ldd_demand(a, &cover);
    let budget = (Q::from_integer((4 * omega).into()) * phi).recip();
    let phi_of = |c: &Q| (!c.is_zero()).then(|| (Q::from_integer((4 * omega).into()) * c).recip());
    if let Some(c) = shortest_path_congestion(g, &demand, route_length) {
        if c <= budget {
            return Ok(ExpansionCheck {
                omega,
                phi_certified: phi_of(&c),
                congestion: c,
                budget,
                route_length,
                certified: true,
                demand,
                routing: None,
            });
        }
    }
    let res = route_lp(g, &demand, route_length, &cfg.routing)?;
    if !res.feasible {
        return Err(Error::Construction("LDD demand has a pair beyond the routing length".into()));
    }
    let c = res.congestion.clone();
    Ok(ExpansionCheck { omega, phi_certified: phi_of(&c), certified: c <= budget, congestion: c, budget, route_length, demand, routing: Some(res) })
}

/// Congestion of routing every pair on its lex-max shortest path, if all fit within `bound`.
fn shortest_path_congestion(g: &Graph, d: &Demand, bound: u64) -> Option<Q> {
    let mut load = vec![Q::zero(); g.m()];
    for ((u, v), x) in d.symmetric() {
        let p = lexmax_shortest_path(g, u, v)?;
        if p.length(g) > bound {
            return None;
        }
        for e in p.edges {
            load[g.rank(e).unwrap()] += &x;
        }
    }
    load.into_iter().enumerate().map(|(r, l)| l / &g.edge_at(r).capacity).max().or_else(|| Some(Q::zero()))
}

#[derive(Clone, Debug)]
pub enum CutCertificate {
    Expanding(ExpansionCheck),
    Cut {
        /// Cut on the 1/(hs) grid.
        cut: MovingCut,
        /// LDD pairs separated by the cut (A-respecting, h·s'-length).
        witness: Demand,
        /// spars_{hs}(cut, witness), the φ′ of this certificate.
        sparsity: Q,
        check: ExpansionCheck,
    },
}

impl CutCertificate {
    pub fn is_cut(&self) -> bool {
        matches!(self, CutCertificate::Cut { .. })
    }
}

fn check_slack(s: u64, s2: u64) -> Result<()> {
    if s2 < 4 || s < 8 * s2 {
        return Err(Error::InvalidArgument(format!("need s' ≥ 4 and s ≥ 8s' (s = {s}, s' = {s2})")));
    }
    Ok(())
}

/// Either certifies that the LDD demand of `a` routes within γ = 1/(4ωφ) at length
/// (s/4)·h, or returns a nonempty hs-length cut with the LDD pairs it separates.
pub fn cut_or_certify(g: &Graph, a: &NodeWeighting, h: u64, s: u64, s2: u64, phi: &Q, cfg: &CutConfig) -> Result<CutCertificate> {
    check_slack(s, s2)?;
    let check = check_expansion(g, a, h, s, s2, phi, cfg)?;
    if check.certified {
        return Ok(CutCertificate::Expanding(check));
    }
    let routing = check.routing.as_ref().expect("uncertified checks come from the LP");
    let grid = h * s;
    let mut candidates: Vec<MovingCut> = Vec::new();
    for &delta in routing.dual_distance.values() {
        if !(delta > 0.0 && delta.is_finite()) {
            continue;
        }
        for factor in [1.0, 2.0, 4.0] {
            let t = factor / delta;
            let mut c = MovingCut::zero(grid);
            for (r, &l) in routing.dual_lengths.iter().enumerate() {
                let units = (t * l * grid as f64 - 1e-9).ceil();
                if units > 0.0 {
                    c.set_units(g.edge_at(r).id, units.min(grid as f64) as u64);
                }
            }
            if !c.is_zero() && !candidates.contains(&c) {
                candidates.push(c);
            }
        }
    }
    let mut full = MovingCut::zero(grid);
    for e in g.edges() {
        full.set_units(e.id, grid);
    }
    candidates.push(full);
    let mut best: Option<(Q, Q, MovingCut)> = None;
    for c in candidates {
        let (sep, sparsity) = demand_stats(&c, &check.demand, g, grid)?;
        let Some(sp) = sparsity else { continue };
        let size = c.size(g);
        let better = match &best {
            None => true,
            Some((bs, bsize, _)) => sp < *bs || (sp == *bs && size < *bsize),
        };
        if better && sep.is_positive() {
            best = Some((sp, size, c));
        }
    }
    let (sparsity, _, cut) = best.ok_or_else(|| Error::Construction("no separating cut candidate".into()))?;
    let witness = separated(&check.demand, g, &cut, grid)?;
    Ok(CutCertificate::Cut { cut, witness, sparsity, check })
}

/// The part of `d` whose pairs are farther than `h` apart in G − C.
pub fn separated(d: &Demand, g: &Graph, c: &MovingCut, h: u64) -> Result<Demand> {
    let gc = g.apply_cut(c, h)?;
    let mut cache: std::collections::BTreeMap<Vertex, Vec<Option<u64>>> = Default::default();
    let mut out = d.restricted(|u, v| {
        let dist = cache.entry(u).or_insert_with(|| sssp(&gc, u));
        dist[v as usize].is_none_or(|x| x > h)
    });
    out.length_bound = d.length_bound;
    Ok(out)
}

/// How the slack is split between cover diameter and routing length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// s' = ⌊√s⌋.
    Poly,
    /// s' = ⌊s/8⌋, the largest split the certification allows.
    Exist,
}

pub fn slack_split(s: u64, mode: Mode) -> u64 {
    match mode {
        Mode::Poly => (s as f64).sqrt().floor() as u64,
        Mode::Exist => s / 8,
    }
}

#[derive(Clone, Debug)]
pub struct CutUntilOutcome {
    /// Accumulated cut on the 1/(hs) grid.
    pub cut: MovingCut,
    /// Nonzero cuts returned by cut-or-certify along the way, with their sparsities.
    pub steps: Vec<(MovingCut, Q)>,
    pub certificate: ExpansionCheck,
}

/// Repeats cut-or-certify on G − C, adding each returned cut to C, until certified.
pub fn cut_until_certify(g: &Graph, a: &NodeWeighting, h: u64, s: u64, phi: &Q, mode: Mode, cfg: &CutConfig) -> Result<CutUntilOutcome> {
    let s2 = slack_split(s, mode);
    let grid = h * s;
    let mut cut = MovingCut::zero(grid);
    let mut steps = Vec::new();
    let limit = g.n() * g.n().saturating_sub(1) / 2 + 1;
    loop {
        let gc = g.apply_cut(&cut, grid)?;
        match cut_or_certify(&gc, a, h, s, s2, phi, cfg)? {
            CutCertificate::Expanding(check) => return Ok(CutUntilOutcome { cut, steps, certificate: check }),
            CutCertificate::Cut { cut: c, sparsity, .. } => {
                let applied = cut.add_capped(&c);
                steps.push((applied, sparsity));
                if steps.len() > limit {
                    return Err(Error::Construction("more nonzero cuts than vertex pairs".into()));
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionCutReport {
    pub steps: Vec<UnionCutStep>,
    /// Σ_i |C_i| / φ_i, exact, rendered as a fraction.
    pub sum_size_over_phi: String,
    pub sum_size_over_phi_f64: f64,
    pub a_ln_n: f64,
    /// P_0, P_1, …: potential before any cut and after each cut.
    pub potentials: Vec<f64>,
    pub monotone: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionCutStep {
    pub size: String,
    pub phi: String,
}

/// Applies the cuts in sequence at scale hs and reports Σ|C_i|/φ_i against |A|·ln n, along
/// with the potential P = Σ_v A(v)·ln Σ_u n^{−2·dist(v,u)/(hs)} (terms beyond hs/2 dropped).
pub fn union_cut_diagnostic(g0: &Graph, a: &NodeWeighting, cuts: &[(MovingCut, Q)], h: u64, s: u64) -> Result<UnionCutReport> {
    let grid = h * s;
    let mut total = MovingCut::zero(grid);
    let mut g = g0.clone();
    let mut potentials = vec![potential(&g, a, grid)];
    let mut sum = Q::zero();
    let mut steps = Vec::new();
    for (c, phi) in cuts {
        if phi.is_zero() {
            return Err(Error::InvalidArgument("φ_i must be positive".into()));
        }
        let size = c.size(g0);
        sum += &size / phi;
        steps.push(UnionCutStep { size: rational::show(&size), phi: rational::show(phi) });
        total.add_capped(c);
        g = g0.apply_cut(&total, grid)?;
        potentials.push(potential(&g, a, grid));
    }
    let monotone = potentials.windows(2).all(|w| w[1] <= w[0]);
    let n = g0.n().max(1) as f64;
    Ok(UnionCutReport {
        steps,
        sum_size_over_phi: rational::show(&sum),
        sum_size_over_phi_f64: rational::to_f64(&sum),
        a_ln_n: rational::to_f64(&a.total()) * n.ln(),
        potentials,
        monotone,
    })
}

fn potential(g: &Graph, a: &NodeWeighting, hs: u64) -> f64 {
    let n = g.n().max(1) as f64;
    let mut p = 0.0;
    for v in 0..g.n() as Vertex {
        let av = rational::to_f64(a.get(v));
        if av == 0.0 {
            continue;
        }
        let dist = sssp(g, v);
        let mut w = 0.0;
        for d in dist.into_iter().flatten() {
            if 2 * d <= hs {
                w += n.powf(-2.0 * d as f64 / hs as f64);
            }
        }
        p += av * w.ln();
    }
    p
}

/// Sum of flow over a path list, for checks.
pub fn flow_value(flow: &[FlowPath]) -> Q {
    flow.iter().fold(Q::zero(), |acc, p| acc + &p.amount)
}

pub fn unit() -> Q {
    Q::one()
}
