//! Sparse neighborhood covers by deterministic region growing.
//!
//! Clusters are balls `B(c, R)` of the host graph, so they have strong diameter at most
//! `2R`. Centers are taken in ascending id among vertices whose `h_cov`-ball is not yet
//! inside a cluster; the radius grows in steps of `h_cov` while the ball keeps growing by
//! more than a factor `n^{2/s_nc}`, up to `R = (s_nc/2)·h_cov`. Clusters are packed into
//! clusterings first-fit.

use crate::error::{Error, Result};
use crate::graph::{all_pairs, Dist, Graph, Vertex};

pub const DEFAULT_C_OMEGA: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodCover {
    /// Each clustering is a list of disjoint clusters; each cluster is a sorted vertex list.
    pub clusterings: Vec<Vec<Vec<Vertex>>>,
    pub h_cov: u64,
    pub h_diam: u64,
}

impl NeighborhoodCover {
    pub fn width(&self) -> usize {
        self.clusterings.len()
    }

    pub fn clusters(&self) -> impl Iterator<Item = &Vec<Vertex>> {
        self.clusterings.iter().flatten()
    }

    /// Checks disjointness, diameter and covering radius exhaustively; returns the first problem.
    pub fn validate(&self, g: &Graph) -> std::result::Result<(), String> {
        let dist = all_pairs(g);
        validate_with(self, g, &dist)
    }
}

fn validate_with(c: &NeighborhoodCover, g: &Graph, dist: &[Vec<Dist>]) -> std::result::Result<(), String> {
    for (ci, clustering) in c.clusterings.iter().enumerate() {
        let mut seen = vec![false; g.n()];
        for s in clustering {
            for &v in s {
                if seen[v as usize] {
                    return Err(format!("clustering {ci} is not disjoint at vertex {v}"));
                }
                seen[v as usize] = true;
            }
            for &a in s {
                for &b in s {
                    if dist[a as usize][b as usize].is_none_or(|x| x > c.h_diam) {
                        return Err(format!("cluster {s:?} has diameter above {}", c.h_diam));
                    }
                }
            }
        }
    }
    for v in 0..g.n() {
        let ball: Vec<Vertex> = (0..g.n() as Vertex).filter(|&u| dist[v][u as usize].is_some_and(|x| x <= c.h_cov)).collect();
        let inside = c.clusters().any(|s| ball.iter().all(|u| s.binary_search(u).is_ok()));
        if !inside {
            return Err(format!("Ball({v}, {}) is not inside any cluster", c.h_cov));
        }
    }
    Ok(())
}

pub fn width_cap(n: usize, s_nc: u64, c_omega: f64) -> f64 {
    c_omega * s_nc as f64 * (n.max(1) as f64).powf(1.0 / s_nc as f64)
}

pub fn build_cover(g: &Graph, h_cov: u64, s_nc: u64, c_omega: f64) -> Result<NeighborhoodCover> {
    let dist = all_pairs(g);
    build_cover_with(g, &dist, h_cov, s_nc, c_omega)
}

/// As [`build_cover`] with precomputed all-pairs distances of `g`.
pub fn build_cover_with(g: &Graph, dist: &[Vec<Dist>], h_cov: u64, s_nc: u64, c_omega: f64) -> Result<NeighborhoodCover> {
    if s_nc < 2 {
        return Err(Error::InvalidArgument(format!("s_nc = {s_nc} must be at least 2")));
    }
    let n = g.n();
    let ball = |c: usize, r: u64| -> Vec<Vertex> { (0..n as Vertex).filter(|&u| dist[c][u as usize].is_some_and(|x| x <= r)).collect() };
    let balls: Vec<Vec<Vertex>> = (0..n).map(|v| ball(v, h_cov)).collect();
    let growth = (n.max(1) as f64).powf(2.0 / s_nc as f64);
    let max_steps = s_nc / 2 - 1;
    let mut covered = vec![false; n];
    let mut clusters: Vec<Vec<Vertex>> = Vec::new();
    while let Some(c) = (0..n).find(|&v| !covered[v]) {
        let mut k = 0;
        while k < max_steps {
            let inner = ball(c, k * h_cov + h_cov);
            let outer = ball(c, (k + 1) * h_cov + h_cov);
            if outer.len() as f64 <= growth * inner.len() as f64 {
                break;
            }
            k += 1;
        }
        let z = ball(c, (k + 1) * h_cov);
        for u in 0..n {
            if !covered[u] && balls[u].iter().all(|x| z.binary_search(x).is_ok()) {
                covered[u] = true;
            }
        }
        clusters.push(z);
    }
    let mut clusterings: Vec<Vec<Vec<Vertex>>> = Vec::new();
    let mut used: Vec<Vec<bool>> = Vec::new();
    for z in clusters {
        let slot = (0..clusterings.len()).find(|&i| z.iter().all(|&v| !used[i][v as usize]));
        let i = match slot {
            Some(i) => i,
            None => {
                clusterings.push(Vec::new());
                used.push(vec![false; n]);
                clusterings.len() - 1
            }
        };
        for &v in &z {
            used[i][v as usize] = true;
        }
        clusterings[i].push(z);
    }
    let cap = width_cap(n, s_nc, c_omega);
    if clusterings.len() as f64 > cap {
        return Err(Error::Construction(format!("cover width {} exceeds cap {cap:.2}", clusterings.len())));
    }
    Ok(NeighborhoodCover { clusterings, h_cov, h_diam: s_nc * h_cov })
}
