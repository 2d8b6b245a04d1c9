use super::horospheres::HorosphereSystem;
use crate::cayley::{CayleyBall, DistanceCache};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};
use std::io::Write;
use std::sync::Arc;

/// An edge of the relative graph: a Cayley edge or a horospherical edge of
/// the given horosphere. Pairs that are both count as Cayley edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelEdge {
    Graph,
    Horospherical(u32),
}

/// The coned-off graph: the ball plus a clique on every horosphere. Cliques
/// are never materialized; BFS visits a horosphere's members all at once.
pub struct RelativeGraph<'a> {
    ball: &'a CayleyBall,
    system: HorosphereSystem,
    cache: DistanceCache,
}

pub fn build_relative_graph<'a>(ball: &'a CayleyBall, system: HorosphereSystem) -> RelativeGraph<'a> {
    let capacity = ((1usize << 25) / ball.vertex_count().max(1)).max(1);
    RelativeGraph {
        ball,
        system,
        cache: DistanceCache::new(capacity),
    }
}

/// A path in the relative graph with its classified edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelPath {
    pub vertices: Vec<u32>,
    pub edges: Vec<RelEdge>,
}

impl RelPath {
    pub fn new(g: &RelativeGraph, vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Structural("empty relative path".into()));
        }
        let mut edges = Vec::with_capacity(vertices.len() - 1);
        for (i, w) in vertices.windows(2).enumerate() {
            edges.push(g.edge_kind(w[0], w[1]).ok_or_else(|| {
                Error::Structural(format!(
                    "relative path vertices {} and {} are not adjacent",
                    i,
                    i + 1
                ))
            })?);
        }
        Ok(RelPath { vertices, edges })
    }

    pub fn length(&self) -> usize {
        self.edges.len()
    }
}

impl<'a> RelativeGraph<'a> {
    pub fn ball(&self) -> &'a CayleyBall {
        self.ball
    }

    pub fn system(&self) -> &HorosphereSystem {
        &self.system
    }

    pub fn edge_kind(&self, u: u32, v: u32) -> Option<RelEdge> {
        if u == v {
            return None;
        }
        if self.ball.are_adjacent(u, v) {
            return Some(RelEdge::Graph);
        }
        self.system.common(u, v).map(RelEdge::Horospherical)
    }

    fn bfs(&self, sources: &[u32]) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.ball.vertex_count()];
        let mut expanded = vec![false; self.system.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] == u32::MAX {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for (w, _) in self.ball.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
            for &p in self.system.containing(u) {
                if std::mem::replace(&mut expanded[p as usize], true) {
                    continue;
                }
                for &w in &self.system.entry(p).members {
                    if dist[w as usize] == u32::MAX {
                        dist[w as usize] = du + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        dist
    }

    /// `d-bar` from `v` to every vertex.
    pub fn rel_distances_from(&self, v: u32) -> Arc<[u32]> {
        self.cache.get_or_insert_with(v, || self.bfs(&[v]))
    }

    pub fn rel_distance(&self, u: u32, v: u32) -> u32 {
        if u == v {
            return 0;
        }
        self.rel_distances_from(u)[v as usize]
    }

    pub fn rel_distances_to_set(&self, set: &[u32]) -> Vec<u32> {
        self.bfs(set)
    }

    /// The representative relative geodesic: each step goes to the least
    /// index Cayley neighbour closer to `y`, falling back to the least index
    /// horospherical neighbour.
    pub fn rel_geodesic(&self, x: u32, y: u32) -> RelPath {
        let dy = self.rel_distances_from(y);
        let mut vertices = vec![x];
        let mut edges = Vec::new();
        let mut cur = x;
        while cur != y {
            let d = dy[cur as usize];
            let step = self
                .ball
                .neighbors(cur)
                .filter(|&(w, _)| dy[w as usize] + 1 == d)
                .map(|(w, _)| (w, RelEdge::Graph))
                .min_by_key(|&(w, _)| w)
                .or_else(|| {
                    self.system
                        .containing(cur)
                        .iter()
                        .flat_map(|&p| self.system.entry(p).members.iter().copied())
                        .filter(|&w| dy[w as usize] + 1 == d)
                        .min()
                        .map(|w| {
                            let p = self.system.common(cur, w).expect("shared horosphere");
                            (w, RelEdge::Horospherical(p))
                        })
                })
                .expect("relative graph is connected");
            vertices.push(step.0);
            edges.push(step.1);
            cur = step.0;
        }
        RelPath { vertices, edges }
    }

    /// `H_rel F`: vertices on some relative geodesic between points of `set`.
    pub fn rel_hull_mask(&self, set: &[u32]) -> Vec<bool> {
        let n = self.ball.vertex_count();
        let mut in_set = vec![false; n];
        for &x in set {
            in_set[x as usize] = true;
        }
        let masks: Vec<Vec<bool>> = set
            .par_iter()
            .map(|&x| {
                let dx = self.rel_distances_from(x);
                let maxd = set.iter().map(|&y| dx[y as usize]).max().unwrap_or(0) as usize;
                let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); maxd + 1];
                for v in 0..n as u32 {
                    if (dx[v as usize] as usize) <= maxd {
                        buckets[dx[v as usize] as usize].push(v);
                    }
                }
                let mut good = in_set.clone();
                for (v, g) in good.iter_mut().enumerate() {
                    *g &= (dx[v] as usize) <= maxd;
                }
                let mut expanded = vec![false; self.system.len()];
                for level in (1..=maxd).rev() {
                    for &w in &buckets[level] {
                        if !good[w as usize] {
                            continue;
                        }
                        for (u, _) in self.ball.neighbors(w) {
                            if dx[u as usize] as usize + 1 == level {
                                good[u as usize] = true;
                            }
                        }
                        for &p in self.system.containing(w) {
                            if std::mem::replace(&mut expanded[p as usize], true) {
                                continue;
                            }
                            for &u in &self.system.entry(p).members {
                                if dx[u as usize] as usize + 1 == level {
                                    good[u as usize] = true;
                                }
                            }
                        }
                    }
                }
                good
            })
            .collect();
        let mut out = vec![false; n];
        for m in masks {
            for (o, g) in out.iter_mut().zip(m) {
                *o |= g;
            }
        }
        out
    }

    pub fn rel_hull(&self, set: &[u32]) -> Vec<u32> {
        crate::paths::mask_to_list(&self.rel_hull_mask(set))
    }

    /// Edge list with one row per Cayley edge and one per clique pair.
    pub fn write_edges_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u_index,v_index,horospherical,coset_id")?;
        let mut rows: Vec<(u32, u32, bool, u32)> = Vec::new();
        for u in 0..self.ball.vertex_count() as u32 {
            for (v, _) in self.ball.neighbors(u) {
                if u < v {
                    rows.push((u, v, false, u32::MAX));
                }
            }
        }
        for (p, h) in self.system.entries().iter().enumerate() {
            for (i, &u) in h.members.iter().enumerate() {
                for &v in &h.members[i + 1..] {
                    rows.push((u, v, true, p as u32));
                }
            }
        }
        rows.sort_unstable();
        for (u, v, horo, p) in rows {
            let id = if horo { self.system.entry(p).id.as_str() } else { "none" };
            writeln!(w, "{u},{v},{horo},{id}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThinnessReport {
    pub triangles: usize,
    pub constant: u32,
    pub witness: Option<[u32; 3]>,
}

/// Largest distance from a point of one side of a representative geodesic
/// triangle to the union of the other two sides.
pub fn thinness_constant(g: &RelativeGraph, triples: &[[u32; 3]]) -> ThinnessReport {
    let mut pairs: HashSet<(u32, u32)> = HashSet::new();
    for t in triples {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let mut pairs: Vec<(u32, u32)> = pairs.into_iter().collect();
    pairs.sort_unstable();
    let sides: HashMap<(u32, u32), Vec<u32>> = pairs
        .par_iter()
        .map(|&(a, b)| ((a, b), g.rel_geodesic(a, b).vertices))
        .collect();
    let side = |a: u32, b: u32| &sides[&(a.min(b), a.max(b))];
    let defects: Vec<u32> = triples
        .par_iter()
        .map(|t| {
            let s = [side(t[0], t[1]), side(t[1], t[2]), side(t[2], t[0])];
            let mut worst = 0;
            for i in 0..3 {
                let (o1, o2) = (s[(i + 1) % 3], s[(i + 2) % 3]);
                for &w in s[i] {
                    let dw = g.rel_distances_from(w);
                    let near = o1.iter().chain(o2.iter()).map(|&z| dw[z as usize]).min().unwrap_or(0);
                    worst = worst.max(near);
                }
            }
            worst
        })
        .collect();
    let mut report = ThinnessReport {
        triangles: triples.len(),
        constant: 0,
        witness: None,
    };
    for (t, d) in triples.iter().zip(defects) {
        if d > report.constant {
            report.constant = d;
            report.witness = Some(*t);
        }
    }
    report
}

/// All unordered triples of trusted vertices.
pub fn trusted_triples(ball: &CayleyBall) -> Vec<[u32; 3]> {
    let t: Vec<u32> = ball.trusted_vertices().collect();
    let mut out = Vec::new();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            for k in j + 1..t.len() {
                out.push([t[i], t[j], t[k]]);
            }
        }
    }
    out
}
