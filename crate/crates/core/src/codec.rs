//! Canonical binary encoding of labels and label stores.
//!
//! Integers are LEB128 varints, rationals are a pair of sign-magnitude big integers.
//! Each label carries its own table of vertex fingerprints, referenced by index, so a
//! label decodes on its own. A store is `FTLB`, a version, the header, then one
//! length-prefixed record per vertex and per edge; trivial edge labels are a single
//! marker byte.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::bigint::{BigInt, Sign};
use num::Zero;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Vertex};
use crate::labels::{
    ClusterEntry, ELabel, EdgeFingerprint, LabelHeader, LabelStore, ScaleELabel, ScaleVLabel, StoredInterval, VLabel, VertexFingerprint,
};
use crate::rational::Q;

pub const STORE_MAGIC: &[u8; 4] = b"FTLB";
pub const STORE_VERSION: u16 = 1;

const TRIVIAL: u8 = 0;
const NONTRIVIAL: u8 = 1;

#[derive(Default)]
pub struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }

    pub fn var(&mut self, mut x: u64) {
        loop {
            let b = (x & 0x7f) as u8;
            x >>= 7;
            if x == 0 {
                self.buf.push(b);
                return;
            }
            self.buf.push(b | 0x80);
        }
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.var(b.len() as u64);
        self.buf.extend_from_slice(b);
    }

    pub fn int(&mut self, x: &BigInt) {
        let (sign, mag) = x.to_bytes_le();
        self.u8(match sign {
            Sign::Minus => 1,
            _ => 0,
        });
        self.bytes(if x.is_zero() { &[] } else { &mag });
    }

    pub fn q(&mut self, x: &Q) {
        self.int(x.numer());
        self.int(x.denom());
    }
}

pub struct Reader<'a> {
    data: &'a [u8],
    pub pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    pub fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.pos, msg: msg.into() })
    }

    pub fn at_end(&self) -> bool {
        self.pos == self.data.len()
    }

    pub fn u8(&mut self) -> Result<u8> {
        match self.data.get(self.pos) {
            Some(&b) => {
                self.pos += 1;
                Ok(b)
            }
            None => self.err("unexpected end of input"),
        }
    }

    pub fn var(&mut self) -> Result<u64> {
        let start = self.pos;
        let mut x: u64 = 0;
        for shift in (0..64).step_by(7) {
            let b = self.u8()?;
            x |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
        }
        self.pos = start;
        self.err("varint too long")
    }

    pub fn var32(&mut self) -> Result<u32> {
        let x = self.var()?;
        u32::try_from(x).or_else(|_| self.err(format!("value {x} exceeds 32 bits")))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let len = self.var()? as usize;
        if self.data.len() - self.pos < len {
            return self.err(format!("need {len} bytes, {} left", self.data.len() - self.pos));
        }
        let out = &self.data[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub fn int(&mut self) -> Result<BigInt> {
        let sign = self.u8()?;
        let mag = self.bytes()?;
        let x = BigInt::from_bytes_le(Sign::Plus, mag);
        match sign {
            0 => Ok(x),
            1 => Ok(-x),
            _ => self.err("bad sign byte"),
        }
    }

    pub fn q(&mut self) -> Result<Q> {
        let n = self.int()?;
        let d = self.int()?;
        if d.is_zero() {
            return self.err("zero denominator");
        }
        Ok(Q::new(n, d))
    }
}

// ---------------------------------------------------------------------------
// fingerprint tables

/// Fingerprints differ between scales, so entries are keyed by (scale, vertex).
#[derive(Default)]
struct FpTable {
    index: BTreeMap<(usize, Vertex), usize>,
    fps: Vec<Arc<VertexFingerprint>>,
}

impl FpTable {
    fn add(&mut self, scale: usize, fp: &Arc<VertexFingerprint>) {
        if let std::collections::btree_map::Entry::Vacant(slot) = self.index.entry((scale, fp.vertex)) {
            slot.insert(self.fps.len());
            self.fps.push(fp.clone());
        }
    }

    fn add_edge(&mut self, scale: usize, e: &EdgeFingerprint) {
        self.add(scale, &e.ends[0]);
        self.add(scale, &e.ends[1]);
    }

    fn write(&self, w: &mut Writer) {
        w.var(self.fps.len() as u64);
        for fp in &self.fps {
            write_vertex_fp(w, fp);
        }
    }

    fn refer(&self, w: &mut Writer, scale: usize, v: Vertex) {
        w.var(self.index[&(scale, v)] as u64);
    }
}

fn write_vertex_fp(w: &mut Writer, fp: &VertexFingerprint) {
    w.var(fp.vertex as u64);
    w.var(fp.entries.len() as u64);
    for e in &fp.entries {
        w.var(e.cluster as u64);
        w.var(e.levels as u64);
        w.var(e.size as u64);
        w.var(e.start as u64);
        w.var(e.end as u64);
        w.var(e.cluster_weights.len() as u64);
        for x in &e.cluster_weights {
            w.q(x);
        }
        for x in &e.subtree_weights {
            w.q(x);
        }
    }
}

fn read_vertex_fp(r: &mut Reader) -> Result<VertexFingerprint> {
    let vertex = r.var32()?;
    let k = r.var()? as usize;
    let mut entries = Vec::with_capacity(k.min(1024));
    for _ in 0..k {
        let cluster = r.var32()?;
        let levels = r.var32()?;
        let size = r.var32()?;
        let start = r.var32()?;
        let end = r.var32()?;
        let levels_n = r.var()? as usize;
        if levels_n > 64 {
            return r.err("too many hierarchy levels");
        }
        let cluster_weights = (0..levels_n).map(|_| r.q()).collect::<Result<Vec<_>>>()?;
        let subtree_weights = (0..levels_n).map(|_| r.q()).collect::<Result<Vec<_>>>()?;
        if let Some(prev) = entries.last().map(|e: &ClusterEntry| e.cluster) {
            if prev >= cluster {
                return r.err("fingerprint entries out of order");
            }
        }
        entries.push(ClusterEntry { cluster, levels, size, start, end, cluster_weights, subtree_weights });
    }
    Ok(VertexFingerprint { vertex, entries })
}

fn read_table(r: &mut Reader) -> Result<Vec<Arc<VertexFingerprint>>> {
    let k = r.var()? as usize;
    let mut out = Vec::with_capacity(k.min(1024));
    for _ in 0..k {
        out.push(Arc::new(read_vertex_fp(r)?));
    }
    Ok(out)
}

fn lookup(r: &mut Reader, table: &[Arc<VertexFingerprint>]) -> Result<Arc<VertexFingerprint>> {
    let i = r.var()? as usize;
    match table.get(i) {
        Some(fp) => Ok(fp.clone()),
        None => r.err(format!("fingerprint index {i} outside table of {}", table.len())),
    }
}

fn write_edge_fp(w: &mut Writer, t: &FpTable, scale: usize, e: &EdgeFingerprint) {
    w.var(e.edge as u64);
    w.var(e.length);
    t.refer(w, scale, e.ends[0].vertex);
    t.refer(w, scale, e.ends[1].vertex);
}

fn read_edge_fp(r: &mut Reader, table: &[Arc<VertexFingerprint>]) -> Result<Arc<EdgeFingerprint>> {
    let edge = r.var32()?;
    let length = r.var()?;
    let a = lookup(r, table)?;
    let b = lookup(r, table)?;
    Ok(Arc::new(EdgeFingerprint { edge, length, ends: [a, b] }))
}

fn read_edge_list(r: &mut Reader, table: &[Arc<VertexFingerprint>]) -> Result<Vec<Arc<EdgeFingerprint>>> {
    let k = r.var()? as usize;
    let mut out: Vec<Arc<EdgeFingerprint>> = Vec::with_capacity(k.min(1024));
    for _ in 0..k {
        let e = read_edge_fp(r, table)?;
        if out.last().is_some_and(|p| p.edge >= e.edge) {
            return r.err("edge fingerprints out of order");
        }
        out.push(e);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// vertex labels

fn write_vlabel(w: &mut Writer, l: &VLabel) {
    let mut t = FpTable::default();
    for (i, s) in l.scales.iter().enumerate() {
        t.add(i, &s.own);
        for e in &s.edges {
            t.add_edge(i, e);
        }
    }
    w.var(l.vertex as u64);
    t.write(w);
    w.var(l.scales.len() as u64);
    for (i, s) in l.scales.iter().enumerate() {
        w.q(&s.tau_heavy);
        t.refer(w, i, s.own.vertex);
        w.var(s.edges.len() as u64);
        for e in &s.edges {
            write_edge_fp(w, &t, i, e);
        }
    }
}

fn read_vlabel(r: &mut Reader) -> Result<VLabel> {
    let vertex = r.var32()?;
    let table = read_table(r)?;
    let k = r.var()? as usize;
    if k > 64 {
        return r.err("too many scales");
    }
    let mut scales = Vec::with_capacity(k);
    for _ in 0..k {
        let tau_heavy = r.q()?;
        let own = lookup(r, &table)?;
        let edges = read_edge_list(r, &table)?;
        scales.push(ScaleVLabel { tau_heavy, own, edges });
    }
    Ok(VLabel { vertex, scales })
}

pub fn encode_vlabel(l: &VLabel) -> Vec<u8> {
    let mut w = Writer::default();
    write_vlabel(&mut w, l);
    w.buf
}

pub fn decode_vlabel(data: &[u8]) -> Result<VLabel> {
    let mut r = Reader::new(data);
    let l = read_vlabel(&mut r)?;
    if !r.at_end() {
        return r.err("trailing bytes after vertex label");
    }
    Ok(l)
}

// ---------------------------------------------------------------------------
// edge labels

fn write_elabel(w: &mut Writer, l: &ELabel) {
    w.var(l.edge as u64);
    if l.is_trivial() {
        w.u8(TRIVIAL);
        return;
    }
    w.u8(NONTRIVIAL);
    let mut t = FpTable::default();
    for (i, s) in l.scales.iter().enumerate() {
        if let Some(s) = s {
            t.add_edge(i, &s.edge_fp);
            for e in &s.edges {
                t.add_edge(i, e);
            }
        }
    }
    t.write(w);
    w.var(l.scales.len() as u64);
    for (i, s) in l.scales.iter().enumerate() {
        match s {
            None => w.u8(0),
            Some(s) => {
                w.u8(1);
                write_edge_fp(w, &t, i, &s.edge_fp);
                w.var(s.clusters.len() as u64);
                for &c in &s.clusters {
                    w.var(c as u64);
                }
                w.var(s.intervals.len() as u64);
                for iv in &s.intervals {
                    for x in [iv.cluster, iv.level, iv.from, iv.to, iv.t, iv.t_end] {
                        w.var(x as u64);
                    }
                }
                w.var(s.edges.len() as u64);
                for e in &s.edges {
                    write_edge_fp(w, &t, i, e);
                }
                w.var(s.waypoints.len() as u64);
                for &v in &s.waypoints {
                    w.var(v as u64);
                }
            }
        }
    }
    w.var(l.vlabels.len() as u64);
    for v in &l.vlabels {
        let mut inner = Writer::default();
        write_vlabel(&mut inner, v);
        w.bytes(&inner.buf);
    }
}

fn read_elabel(r: &mut Reader, scales_expected: Option<usize>) -> Result<ELabel> {
    let edge: EdgeId = r.var32()?;
    match r.u8()? {
        TRIVIAL => {
            return match scales_expected {
                Some(k) => Ok(ELabel::trivial(edge, k)),
                None => r.err("trivial edge label outside a store needs the scale count"),
            };
        }
        NONTRIVIAL => {}
        b => return r.err(format!("bad edge label marker {b}")),
    }
    let table = read_table(r)?;
    let k = r.var()? as usize;
    if k > 64 || scales_expected.is_some_and(|e| e != k) {
        return r.err(format!("edge label has {k} scales"));
    }
    let mut scales = Vec::with_capacity(k);
    for _ in 0..k {
        match r.u8()? {
            0 => scales.push(None),
            1 => {
                let edge_fp = read_edge_fp(r, &table)?;
                let nc = r.var()? as usize;
                let clusters = (0..nc).map(|_| r.var32()).collect::<Result<Vec<_>>>()?;
                let ni = r.var()? as usize;
                let mut intervals = Vec::with_capacity(ni.min(1024));
                for _ in 0..ni {
                    let x: Vec<u32> = (0..6).map(|_| r.var32()).collect::<Result<_>>()?;
                    intervals.push(StoredInterval { cluster: x[0], level: x[1], from: x[2], to: x[3], t: x[4], t_end: x[5] });
                }
                let edges = read_edge_list(r, &table)?;
                let nw = r.var()? as usize;
                let waypoints = (0..nw).map(|_| r.var32()).collect::<Result<Vec<_>>>()?;
                scales.push(Some(ScaleELabel { edge_fp, clusters, intervals, edges, waypoints }));
            }
            b => return r.err(format!("bad scale marker {b}")),
        }
    }
    let nv = r.var()? as usize;
    let mut vlabels = Vec::with_capacity(nv.min(1024));
    for _ in 0..nv {
        let raw = r.bytes()?;
        let base = r.pos - raw.len();
        let v = decode_vlabel(raw).map_err(|e| match e {
            Error::Parse { offset, msg } => Error::Parse { offset: base + offset, msg },
            other => other,
        })?;
        vlabels.push(Arc::new(v));
    }
    Ok(ELabel { edge, scales, vlabels })
}

/// Encodes a standalone edge label. A trivial label is the id and a marker byte.
pub fn encode_elabel(l: &ELabel) -> Vec<u8> {
    let mut w = Writer::default();
    write_elabel(&mut w, l);
    w.buf
}

/// Decodes a standalone edge label; trivial labels get `scales` empty scale slots.
pub fn decode_elabel(data: &[u8], scales: usize) -> Result<ELabel> {
    let mut r = Reader::new(data);
    let l = read_elabel(&mut r, Some(scales))?;
    if !r.at_end() {
        return r.err("trailing bytes after edge label");
    }
    Ok(l)
}

// ---------------------------------------------------------------------------
// stores

pub fn encode_store(s: &LabelStore) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(STORE_MAGIC);
    w.buf.extend_from_slice(&STORE_VERSION.to_le_bytes());
    let h = &s.header;
    for x in [h.n as u64, h.m as u64, h.f as u64, h.s_nc, h.s_ed, h.d as u64, h.i_max as u64] {
        w.var(x);
    }
    for l in &s.vlabels {
        let mut inner = Writer::default();
        write_vlabel(&mut inner, l);
        w.bytes(&inner.buf);
    }
    for l in &s.elabels {
        let mut inner = Writer::default();
        write_elabel(&mut inner, l);
        w.bytes(&inner.buf);
    }
    w.buf
}

pub fn decode_store(data: &[u8]) -> Result<LabelStore> {
    let mut r = Reader::new(data);
    if data.len() < 6 {
        return Err(Error::Parse { offset: data.len(), msg: "truncated store header".into() });
    }
    if &data[..4] != STORE_MAGIC {
        return Err(Error::Parse { offset: 0, msg: "bad magic".into() });
    }
    let version = u16::from_le_bytes([data[4], data[5]]);
    if version != STORE_VERSION {
        return Err(Error::Version { found: version, expected: STORE_VERSION });
    }
    r.pos = 6;
    let n = r.var32()?;
    let m = r.var32()?;
    let f = r.var32()?;
    let s_nc = r.var()?;
    let s_ed = r.var()?;
    let d = r.var32()?;
    let i_max = r.var32()?;
    if i_max >= 64 {
        return r.err("i_max out of range");
    }
    let header = LabelHeader { n, m, f, s_nc, s_ed, d, i_max };
    let mut vlabels = Vec::with_capacity((n as usize).min(1 << 16));
    for v in 0..n {
        let raw = r.bytes()?;
        let base = r.pos - raw.len();
        let mut inner = Reader::new(raw);
        let l = read_vlabel(&mut inner).map_err(|e| shift(e, base))?;
        if !inner.at_end() || l.vertex != v || l.scales.len() != header.scales() {
            return Err(Error::Parse { offset: base, msg: format!("malformed label for vertex {v}") });
        }
        vlabels.push(Arc::new(l));
    }
    let mut elabels: Vec<Arc<ELabel>> = Vec::with_capacity((m as usize).min(1 << 16));
    for _ in 0..m {
        let raw = r.bytes()?;
        let base = r.pos - raw.len();
        let mut inner = Reader::new(raw);
        let l = read_elabel(&mut inner, Some(header.scales())).map_err(|e| shift(e, base))?;
        if !inner.at_end() {
            return Err(Error::Parse { offset: base + inner.pos, msg: "trailing bytes in edge label".into() });
        }
        if elabels.last().is_some_and(|p| p.edge >= l.edge) {
            return Err(Error::Parse { offset: base, msg: "edge labels out of order".into() });
        }
        elabels.push(Arc::new(l));
    }
    if !r.at_end() {
        return r.err("trailing bytes after store");
    }
    Ok(LabelStore { header, vlabels, elabels })
}

fn shift(e: Error, base: usize) -> Error {
    match e {
        Error::Parse { offset, msg } => Error::Parse { offset: base + offset, msg },
        other => other,
    }
}
