//! Compiled per-failure-set oracle on top of the TZ structure, and the centralized
//! sensitivity oracle that stores only vertex labels and non-trivial edge labels.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::codec::{Reader, Writer};
use crate::decoder::{self, Answer};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Vertex};
use crate::labels::{ELabel, LabelHeader, LabelStore, VLabel};
use crate::tz::{tz_landmark, TzLabel, TzStructure};

const MAGIC: &[u8; 4] = b"FTCO";
pub const ORACLE_VERSION: u16 = 1;

/// Edge label extended with both endpoints' decoder and TZ vertex labels.
#[derive(Clone, Debug)]
pub struct ExtELabel {
    pub elabel: Arc<ELabel>,
    pub ends: [Vertex; 2],
    pub vlabels: [Arc<VLabel>; 2],
    pub tz: [Arc<TzLabel>; 2],
}

pub fn extend_elabel(g: &Graph, store: &LabelStore, tz: &TzStructure, e: EdgeId) -> Result<ExtELabel> {
    let edge = g.edge(e).ok_or(Error::UnknownEdge(e))?;
    let (u, v) = (edge.u, edge.v);
    Ok(ExtELabel {
        elabel: store.elabel(e)?.clone(),
        ends: [u, v],
        vlabels: [store.vlabel(u)?.clone(), store.vlabel(v)?.clone()],
        tz: [tz.labels[u as usize].clone(), tz.labels[v as usize].clone()],
    })
}

/// Laminar family of tour intervals with answers precomputed at each a−1, a, b, b+1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laminar {
    /// (a, b, owner), sorted.
    pub intervals: Vec<(u32, u32, Vertex)>,
    /// (point, shortest containing, longest containing), ascending by point.
    points: Vec<(u32, Option<Vertex>, Option<Vertex>)>,
}

impl Laminar {
    pub fn new(mut intervals: Vec<(u32, u32, Vertex)>) -> Result<Laminar> {
        intervals.sort_unstable();
        intervals.dedup();
        for (i, x) in intervals.iter().enumerate() {
            if x.0 > x.1 {
                return Err(Error::CorruptLabel(format!("empty interval [{}, {}]", x.0, x.1)));
            }
            for y in &intervals[i + 1..] {
                let disjoint = x.1 < y.0 || y.1 < x.0;
                let nested = (x.0 <= y.0 && y.1 <= x.1) || (y.0 <= x.0 && x.1 <= y.1);
                if !disjoint && !nested {
                    return Err(Error::CorruptLabel(format!("intervals [{}, {}] and [{}, {}] cross", x.0, x.1, y.0, y.1)));
                }
            }
        }
        let mut pts = BTreeSet::new();
        for &(a, b, _) in &intervals {
            if a > 0 {
                pts.insert(a - 1);
            }
            pts.insert(a);
            pts.insert(b);
            pts.insert(b + 1);
        }
        let points = pts.into_iter().map(|x| (x, scan(&intervals, x, false), scan(&intervals, x, true))).collect();
        Ok(Laminar { intervals, points })
    }

    fn at(&self, x: u32) -> Option<&(u32, Option<Vertex>, Option<Vertex>)> {
        let i = self.points.partition_point(|p| p.0 <= x);
        (i > 0).then(|| &self.points[i - 1])
    }

    pub fn shortest(&self, x: u32) -> Option<Vertex> {
        self.at(x).and_then(|p| p.1)
    }

    pub fn longest(&self, x: u32) -> Option<Vertex> {
        self.at(x).and_then(|p| p.2)
    }
}

/// Linear-scan reference: the shortest (or longest) interval containing x.
pub fn scan(intervals: &[(u32, u32, Vertex)], x: u32, longest: bool) -> Option<Vertex> {
    let hits = intervals.iter().filter(|i| i.0 <= x && x <= i.1);
    if longest {
        hits.max_by_key(|i| (i.1 - i.0, std::cmp::Reverse(i.2))).map(|i| i.2)
    } else {
        hits.min_by_key(|i| (i.1 - i.0, i.2)).map(|i| i.2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledOracle {
    pub failed: Vec<EdgeId>,
    /// Failed-edge endpoints.
    pub endpoints: Vec<Vertex>,
    /// Decoder estimates for s < s′.
    pub table: BTreeMap<(Vertex, Vertex), Answer>,
    pub laminar: BTreeMap<Vertex, Laminar>,
}

impl CompiledOracle {
    pub fn estimate(&self, s: Vertex, t: Vertex) -> Option<Answer> {
        if s == t {
            return Some(Answer::Estimate(0));
        }
        self.table.get(&(s.min(t), s.max(t))).copied()
    }
}

/// Pairwise decoder estimates over the failed-edge endpoints.
pub fn pair_table(header: &LabelHeader, failed: &[ExtELabel]) -> Result<BTreeMap<(Vertex, Vertex), Answer>> {
    let labels: Vec<&ELabel> = failed.iter().map(|x| x.elabel.as_ref()).collect();
    let mut ends: BTreeMap<Vertex, &Arc<VLabel>> = BTreeMap::new();
    for x in failed {
        for i in 0..2 {
            ends.insert(x.ends[i], &x.vlabels[i]);
        }
    }
    let ends: Vec<_> = ends.into_iter().collect();
    let mut table = BTreeMap::new();
    for (i, &(s, ls)) in ends.iter().enumerate() {
        for &(t, lt) in &ends[i + 1..] {
            table.insert((s, t), decoder::query(header, ls, lt, &labels)?);
        }
    }
    Ok(table)
}

/// Per-landmark laminar structures over the endpoints' tour intervals.
pub fn build_laminars(failed: &[ExtELabel]) -> Result<BTreeMap<Vertex, Laminar>> {
    let mut per: BTreeMap<Vertex, BTreeSet<(u32, u32, Vertex)>> = BTreeMap::new();
    for x in failed {
        for tz in &x.tz {
            for (&w, e) in &tz.bunch {
                per.entry(w).or_default().insert((e.start, e.end, tz.vertex));
            }
        }
    }
    per.into_iter().map(|(w, s)| Ok((w, Laminar::new(s.into_iter().collect())?))).collect()
}

fn failed_ids(failed: &[ExtELabel]) -> Result<Vec<EdgeId>> {
    let mut ids: Vec<EdgeId> = failed.iter().map(|x| x.elabel.edge).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("failed edge listed twice".into()));
    }
    Ok(ids)
}

pub fn compile(header: &LabelHeader, failed: &[ExtELabel]) -> Result<CompiledOracle> {
    let ids = failed_ids(failed)?;
    let table = pair_table(header, failed)?;
    let laminar = build_laminars(failed)?;
    let endpoints: BTreeSet<Vertex> = failed.iter().flat_map(|x| x.ends).collect();
    Ok(CompiledOracle { failed: ids, endpoints: endpoints.into_iter().collect(), table, laminar })
}

/// Estimate for dist_{G∖F}(p, q) from the compiled oracle and the TZ labels of p and q.
pub fn fast_query(d: &CompiledOracle, failed: &[EdgeId], lp: &TzLabel, lq: &TzLabel) -> Result<Answer> {
    let mut ids = failed.to_vec();
    ids.sort_unstable();
    if ids != d.failed {
        return Err(Error::Stale(format!("compiled for {:?}, queried with {:?}", d.failed, ids)));
    }
    if lp.vertex == lq.vertex {
        return Ok(Answer::Estimate(0));
    }
    let Some(w) = tz_landmark(lp, lq) else {
        return Ok(Answer::Unreachable);
    };
    let (ep, eq) = (&lp.bunch[&w], &lq.bunch[&w]);
    let base = ep.dist + eq.dist;
    let Some(lam) = d.laminar.get(&w) else {
        return Ok(Answer::Estimate(base));
    };
    let s_p = lam.shortest(ep.start).or_else(|| lam.longest(eq.start));
    let s_q = lam.shortest(eq.start).or_else(|| lam.longest(ep.start));
    match (s_p, s_q) {
        (Some(a), Some(b)) => match d.estimate(a, b) {
            Some(Answer::Estimate(h)) => Ok(Answer::Estimate(base + h)),
            Some(Answer::Unreachable) => Ok(Answer::Unreachable),
            None => Err(Error::CorruptLabel(format!("no table entry for ({a}, {b})"))),
        },
        _ => Ok(Answer::Estimate(base)),
    }
}

fn put_answer(w: &mut Writer, a: Answer) {
    match a {
        Answer::Unreachable => w.var(0),
        Answer::Estimate(d) => w.var(d + 1),
    }
}

fn put_opt(w: &mut Writer, v: Option<Vertex>) {
    w.var(v.map_or(0, |x| x as u64 + 1));
}

fn get_opt(r: &mut Reader) -> Result<Option<Vertex>> {
    let x = r.var32()?;
    Ok(x.checked_sub(1))
}

pub fn encode_oracle(d: &CompiledOracle) -> Vec<u8> {
    let mut w = Writer::default();
    for &b in MAGIC {
        w.u8(b);
    }
    for b in ORACLE_VERSION.to_le_bytes() {
        w.u8(b);
    }
    w.var(d.failed.len() as u64);
    d.failed.iter().for_each(|&e| w.var(e as u64));
    w.var(d.endpoints.len() as u64);
    d.endpoints.iter().for_each(|&v| w.var(v as u64));
    w.var(d.table.len() as u64);
    for (&(s, t), &a) in &d.table {
        w.var(s as u64);
        w.var(t as u64);
        put_answer(&mut w, a);
    }
    w.var(d.laminar.len() as u64);
    for (&lw, lam) in &d.laminar {
        w.var(lw as u64);
        w.var(lam.intervals.len() as u64);
        for &(a, b, s) in &lam.intervals {
            w.var(a as u64);
            w.var(b as u64);
            w.var(s as u64);
        }
        w.var(lam.points.len() as u64);
        for &(x, s, l) in &lam.points {
            w.var(x as u64);
            put_opt(&mut w, s);
            put_opt(&mut w, l);
        }
    }
    w.buf
}

pub fn decode_oracle(data: &[u8]) -> Result<CompiledOracle> {
    let mut r = Reader::new(data);
    for &b in MAGIC {
        if r.u8()? != b {
            return r.err("bad magic");
        }
    }
    let version = u16::from_le_bytes([r.u8()?, r.u8()?]);
    if version != ORACLE_VERSION {
        return Err(Error::Version { found: version, expected: ORACLE_VERSION });
    }
    let nf = r.var()?;
    let failed = (0..nf).map(|_| r.var32()).collect::<Result<Vec<_>>>()?;
    let ne = r.var()?;
    let endpoints = (0..ne).map(|_| r.var32()).collect::<Result<Vec<_>>>()?;
    let nt = r.var()?;
    let mut table = BTreeMap::new();
    for _ in 0..nt {
        let (s, t) = (r.var32()?, r.var32()?);
        let a = match r.var()? {
            0 => Answer::Unreachable,
            x => Answer::Estimate(x - 1),
        };
        table.insert((s, t), a);
    }
    let nl = r.var()?;
    let mut laminar = BTreeMap::new();
    for _ in 0..nl {
        let lw = r.var32()?;
        let ni = r.var()?;
        let intervals = (0..ni).map(|_| Ok((r.var32()?, r.var32()?, r.var32()?))).collect::<Result<Vec<_>>>()?;
        let np = r.var()?;
        let points = (0..np).map(|_| Ok((r.var32()?, get_opt(&mut r)?, get_opt(&mut r)?))).collect::<Result<Vec<_>>>()?;
        laminar.insert(lw, Laminar { intervals, points });
    }
    if !r.at_end() {
        return r.err("trailing bytes");
    }
    Ok(CompiledOracle { failed, endpoints, table, laminar })
}

/// Centralized oracle: all vertex labels, the non-trivial edge labels, and the edge
/// endpoints needed to extend labels for the compiled path.
#[derive(Clone, Debug)]
pub struct SensitivityOracle {
    pub header: LabelHeader,
    pub vlabels: Vec<Arc<VLabel>>,
    pub nontrivial: BTreeMap<EdgeId, Arc<ELabel>>,
    pub endpoints: BTreeMap<EdgeId, [Vertex; 2]>,
    pub tz: Option<Vec<Arc<TzLabel>>>,
    current: Option<CompiledOracle>,
}

pub fn oracle_store(g: &Graph, store: &LabelStore, tz: Option<&TzStructure>) -> SensitivityOracle {
    SensitivityOracle {
        header: store.header.clone(),
        vlabels: store.vlabels.clone(),
        nontrivial: store.elabels.iter().filter(|l| !l.is_trivial()).map(|l| (l.edge, l.clone())).collect(),
        endpoints: g.edges().iter().map(|e| (e.id, [e.u, e.v])).collect(),
        tz: tz.map(|t| t.labels.clone()),
        current: None,
    }
}

impl SensitivityOracle {
    fn elabel(&self, e: EdgeId) -> Result<Arc<ELabel>> {
        if !self.endpoints.contains_key(&e) {
            return Err(Error::UnknownEdge(e));
        }
        Ok(self.nontrivial.get(&e).cloned().unwrap_or_else(|| Arc::new(ELabel::trivial(e, self.header.scales()))))
    }

    fn vlabel(&self, v: Vertex) -> Result<&Arc<VLabel>> {
        self.vlabels.get(v as usize).ok_or_else(|| Error::InvalidArgument(format!("vertex {v} out of range")))
    }

    fn tz_label(&self, v: Vertex) -> Result<&Arc<TzLabel>> {
        let tz = self.tz.as_ref().ok_or_else(|| Error::InvalidArgument("oracle built without TZ labels".into()))?;
        tz.get(v as usize).ok_or_else(|| Error::InvalidArgument(format!("vertex {v} out of range")))
    }

    /// Direct path: rebuild edge labels from ids and run the decoder.
    pub fn query(&self, p: Vertex, q: Vertex, failed: &[EdgeId]) -> Result<Answer> {
        let labels = failed.iter().map(|&e| self.elabel(e)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&ELabel> = labels.iter().map(|l| l.as_ref()).collect();
        decoder::query(&self.header, self.vlabel(p)?, self.vlabel(q)?, &refs)
    }

    /// Compiled path, first half: installs F.
    pub fn change_failures(&mut self, failed: &[EdgeId]) -> Result<&CompiledOracle> {
        let ext = failed
            .iter()
            .map(|&e| {
                let elabel = self.elabel(e)?;
                let ends = self.endpoints[&e];
                Ok(ExtELabel {
                    elabel,
                    ends,
                    vlabels: [self.vlabel(ends[0])?.clone(), self.vlabel(ends[1])?.clone()],
                    tz: [self.tz_label(ends[0])?.clone(), self.tz_label(ends[1])?.clone()],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.current = Some(compile(&self.header, &ext)?);
        Ok(self.current.as_ref().unwrap())
    }

    /// Compiled path, second half: answers against the installed F.
    pub fn distance_query(&self, p: Vertex, q: Vertex) -> Result<Answer> {
        let d = self.current.as_ref().ok_or_else(|| Error::Stale("no failure set installed".into()))?;
        fast_query(d, &d.failed, self.tz_label(p)?, self.tz_label(q)?)
    }

    pub fn stored_elabels(&self) -> usize {
        self.nontrivial.len()
    }
}
