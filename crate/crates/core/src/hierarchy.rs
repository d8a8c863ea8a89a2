//! Nested length-constrained expander hierarchies (A_0..A_d, C_1..C_d).

use num::{One, Zero};
use serde::Serialize;

use crate::cuts::{check_expansion, cut_until_certify, slack_split, CutConfig, Mode};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::{self, Q};
use crate::weights::{MovingCut, NodeWeighting};

#[derive(Clone, Debug)]
pub struct HierarchyParams {
    pub h: u64,
    pub s_ed: u64,
    pub d: usize,
    pub phi: Q,
    pub mode: Mode,
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub params: HierarchyParams,
    /// The weighting the hierarchy is maintained for.
    pub a: NodeWeighting,
    /// A_0..A_d.
    pub levels: Vec<NodeWeighting>,
    /// C_1..C_d stored at index 1..=d; index 0 is an unused zero cut.
    pub cuts: Vec<MovingCut>,
    /// Nonzero increments applied to C_j, per j (index 0 unused).
    pub nonzero_increments: Vec<usize>,
    /// Nonzero cut-or-certify cuts behind those increments, per j.
    pub inner_cuts: Vec<usize>,
    /// Every inner cut with its sparsity, tagged with its level.
    pub cut_log: Vec<(usize, MovingCut, Q)>,
}

impl Hierarchy {
    pub fn empty(n: usize, params: HierarchyParams) -> Result<Hierarchy> {
        if params.d < 1 {
            return Err(Error::InvalidArgument("depth d must be at least 1".into()));
        }
        let grid = params.h * params.s_ed;
        let d = params.d;
        Ok(Hierarchy {
            params,
            a: NodeWeighting::zero(n),
            levels: vec![NodeWeighting::zero(n); d + 1],
            cuts: vec![MovingCut::zero(grid); d + 1],
            nonzero_increments: vec![0; d + 1],
            inner_cuts: vec![0; d + 1],
            cut_log: Vec::new(),
        })
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn grid(&self) -> u64 {
        self.params.h * self.params.s_ed
    }

    /// G − C_j (C_{d+1} = 0).
    pub fn minus_cut(&self, g: &Graph, j: usize) -> Result<Graph> {
        if j > self.d() {
            return Ok(g.clone());
        }
        g.apply_cut(&self.cuts[j], self.grid())
    }

    /// G_j with lengths l + Σ_{j' > j} h·s_ed·C_{j'}.
    pub fn derived(&self, g: &Graph, j: usize) -> Result<Graph> {
        let mut out = g.clone();
        for jp in (j + 1)..=self.d() {
            out = out.apply_cut(&self.cuts[jp], self.grid())?;
        }
        Ok(out)
    }

    /// Measured shrink max_j |A_{j+1}| / |A_j| (0 when A_j is zero).
    pub fn shrink(&self) -> Q {
        (0..self.d())
            .filter_map(|j| {
                let a = self.levels[j].total();
                (!a.is_zero()).then(|| self.levels[j + 1].total() / a)
            })
            .max()
            .unwrap_or_else(Q::zero)
    }

    /// Alg. 2: Update(A′).
    pub fn update(&mut self, g: &Graph, a_new: &NodeWeighting, cfg: &CutConfig) -> Result<()> {
        if !self.a.le(a_new) {
            return Err(Error::InvalidArgument("hierarchy updates must be incremental".into()));
        }
        let delta = a_new.minus(&self.a)?;
        self.a = a_new.clone();
        self.rec_update(g, delta, 0, cfg)?;
        Ok(())
    }

    fn rec_update(&mut self, g: &Graph, mut delta: NodeWeighting, j: usize, cfg: &CutConfig) -> Result<NodeWeighting> {
        if j < self.d() {
            loop {
                let gj = self.minus_cut(g, j + 1)?;
                let target = self.levels[j].plus(&delta);
                let p = &self.params;
                let out = cut_until_certify(&gj, &target, p.h, p.s_ed, &p.phi, p.mode, cfg)?;
                if out.cut.is_zero() {
                    break;
                }
                let applied = self.cuts[j + 1].add_capped(&out.cut);
                self.nonzero_increments[j + 1] += 1;
                self.inner_cuts[j + 1] += out.steps.len();
                self.cut_log.extend(out.steps.into_iter().map(|(c, sp)| (j + 1, c, sp)));
                let deeper = self.rec_update(g, applied.degree(g), j + 1, cfg)?;
                delta = delta.plus(&deeper);
            }
        }
        self.levels[j] = self.levels[j].plus(&delta);
        Ok(delta)
    }
}

/// Default φ: ½·|A|^{−1/d}/κ, rounded down to a 2⁻²⁰ grid.
pub fn default_phi(a: &NodeWeighting, d: usize, kappa: f64) -> Q {
    let total = rational::to_f64(&a.total()).max(1.0);
    let x = 0.5 * total.powf(-1.0 / d as f64) / kappa;
    let q = rational::floor_f64_grid(x, 20);
    if q.is_zero() {
        Q::new(1.into(), (1u64 << 20).into())
    } else {
        q
    }
}

/// One update from zero. With `phi = None` the default φ is halved until the measured
/// shrink is at most 1/2 and A_d certifies in G; an explicit φ that misses either
/// condition is an error.
pub fn build_hierarchy(g: &Graph, a: &NodeWeighting, h: u64, s_ed: u64, d: usize, phi: Option<Q>, kappa: f64, cfg: &CutConfig) -> Result<Hierarchy> {
    if s_ed < 100 {
        return Err(Error::InvalidArgument(format!("s_ed = {s_ed} must be at least 100")));
    }
    let explicit = phi.is_some();
    let mut phi = phi.unwrap_or_else(|| default_phi(a, d, kappa));
    let half = Q::new(1.into(), 2.into());
    for _ in 0..64 {
        let params = HierarchyParams { h, s_ed, d, phi: phi.clone(), mode: Mode::Poly };
        let mut hier = Hierarchy::empty(g.n(), params)?;
        hier.update(g, a, cfg)?;
        let shrink_ok = hier.shrink() <= half;
        let top = check_expansion(g, &hier.levels[d], h, s_ed, slack_split(s_ed, Mode::Poly), &phi, cfg)?;
        if shrink_ok && top.certified {
            return Ok(hier);
        }
        if explicit {
            return Err(Error::Construction(format!(
                "φ = {} gives shrink {} (need ≤ 1/2) and top-level certification {}",
                rational::show(&phi),
                rational::show(&hier.shrink()),
                top.certified
            )));
        }
        phi *= &half;
    }
    Err(Error::Construction("no φ on the halving schedule produced a valid hierarchy".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    /// i ∈ 1..=d checks A_{i−1} in G − C_i; i = d+1 checks A_d in G.
    pub level: usize,
    pub nested: bool,
    pub bookkeeping: bool,
    pub expanding: bool,
    pub omega: usize,
    pub congestion: String,
    pub budget: String,
    /// 1/(4ω·congestion), or null when nothing needs routing.
    pub phi_certified: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    pub levels: Vec<LevelReport>,
    pub a0_dominates_a: bool,
    pub shrink: String,
    pub pass: bool,
    /// min over levels of the certified φ, when any level routes something.
    #[serde(skip)]
    pub phi_certified_min: Option<Q>,
}

/// Def. 4.1: exact checks of nesting and bookkeeping, and a fresh LDD routing per level.
pub fn validate_hierarchy(hier: &Hierarchy, g: &Graph, cfg: &CutConfig) -> Result<HierarchyReport> {
    let d = hier.d();
    let p = &hier.params;
    let s2 = slack_split(p.s_ed, p.mode);
    let mut levels = Vec::new();
    let mut min_phi: Option<Q> = None;
    for i in 1..=d + 1 {
        let (nested, bookkeeping) = if i <= d {
            let deg = hier.cuts[i].degree(g);
            let nested = deg.le(&hier.levels[i]) && hier.levels[i].le(&hier.levels[i - 1]);
            let expected_prev = if i == 1 { hier.levels[1].plus(&hier.a) } else { hier.levels[i].plus(&hier.cuts[i - 1].degree(g)) };
            (nested, hier.levels[i - 1] == expected_prev)
        } else {
            (true, hier.levels[d] == hier.cuts[d].degree(g))
        };
        let gi = hier.minus_cut(g, i)?;
        let weighting = &hier.levels[i - 1];
        let check = check_expansion(&gi, weighting, p.h, p.s_ed, s2, &p.phi, cfg)?;
        if let Some(pc) = &check.phi_certified {
            min_phi = Some(match min_phi {
                Some(m) if m <= *pc => m,
                _ => pc.clone(),
            });
        }
        levels.push(LevelReport {
            level: i,
            nested,
            bookkeeping,
            expanding: check.certified,
            omega: check.omega,
            congestion: rational::show(&check.congestion),
            budget: rational::show(&check.budget),
            phi_certified: check.phi_certified.as_ref().map(rational::show),
        });
    }
    let a0_dominates_a = hier.a.le(&hier.levels[0]);
    let pass = a0_dominates_a && levels.iter().all(|l| l.nested && l.bookkeeping && l.expanding);
    Ok(HierarchyReport { levels, a0_dominates_a, shrink: rational::show(&hier.shrink()), pass, phi_certified_min: min_phi })
}

/// JSON dump: per level |A_i|, |C_i| and the sparse entries.
pub fn dump(hier: &Hierarchy, g: &Graph) -> serde_json::Value {
    let levels: Vec<serde_json::Value> = (0..=hier.d())
        .map(|j| {
            let a = &hier.levels[j];
            let weights: Vec<serde_json::Value> =
                a.values().iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(v, x)| serde_json::json!([v, rational::show(x)])).collect();
            let cut: Vec<serde_json::Value> = if j == 0 {
                Vec::new()
            } else {
                hier.cuts[j].units().iter().map(|(&e, &u)| serde_json::json!([e, rational::show(&hier.cuts[j].value(e)), u])).collect()
            };
            serde_json::json!({
                "level": j,
                "a_total": rational::show(&a.total()),
                "cut_size": if j == 0 { "0".to_string() } else { rational::show(&hier.cuts[j].size(g)) },
                "a": weights,
                "cut": cut,
            })
        })
        .collect();
    serde_json::json!({
        "h": hier.params.h,
        "s_ed": hier.params.s_ed,
        "d": hier.d(),
        "phi": rational::show(&hier.params.phi),
        "shrink": rational::show(&hier.shrink()),
        "levels": levels,
    })
}

pub fn one_half() -> Q {
    Q::one() / Q::from_integer(2.into())
}
