use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::floyd::{format_rational, int, FloydScale, FloydTable, Karlsson, UNREACHED};
use crate::relative::{set_diameter, tie_set};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::Arc;

/// `Pr_E a`, the full tie set.
pub fn project(ball: &CayleyBall, set: &[u32], a: u32) -> Result<Vec<u32>> {
    if set.is_empty() {
        return Err(Error::Input("projection onto an empty set".into()));
    }
    Ok(tie_set(ball, set, a))
}

/// `diam Pr_E B`.
pub fn projection_diameter(ball: &CayleyBall, set: &[u32], from: &[u32]) -> Result<u32> {
    if set.is_empty() || from.is_empty() {
        return Err(Error::Input("projection diameter needs nonempty sets".into()));
    }
    let all: BTreeSet<u32> = from.iter().flat_map(|&b| tie_set(ball, set, b)).collect();
    Ok(set_diameter(ball, &all.into_iter().collect::<Vec<_>>()))
}

/// Stand-in for the boundary of a set: its points in the shell
/// `inner <= |v| <= outer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrontierProxy {
    pub inner: u32,
    pub outer: u32,
}

impl FrontierProxy {
    pub fn new(ball: &CayleyBall, inner: u32, outer: u32) -> Result<Self> {
        if inner >= outer || outer > ball.radius() {
            return Err(Error::Config(format!(
                "frontier proxy needs inner < outer <= {}, got {inner}, {outer}",
                ball.radius()
            )));
        }
        Ok(FrontierProxy { inner, outer })
    }

    /// `inner = R - 2`, `outer = R`.
    pub fn default_for(ball: &CayleyBall) -> Self {
        let outer = ball.radius().max(1);
        FrontierProxy {
            inner: outer.saturating_sub(2),
            outer,
        }
    }

    pub fn boundary(&self, ball: &CayleyBall, set: &[u32]) -> Vec<u32> {
        set.iter()
            .copied()
            .filter(|&v| (self.inner..=self.outer).contains(&ball.dist0(v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "kebab-case")]
pub enum Convergence {
    Value(u32),
    /// The set does not reach the proxy shell.
    Inconclusive,
}

/// Finite-scale surrogate of `C_{E,a}(eps)`: the least `r` such that every
/// point of `E` beyond `N_r a` is Floyd-`eps`-close to the proxy boundary.
pub fn convergence_function(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    set: &[u32],
    a: u32,
    eps: &BigRational,
    proxy: &FrontierProxy,
) -> Convergence {
    convergence_table(ball, scale, set, a, std::slice::from_ref(eps), proxy)
        .pop()
        .expect("one entry")
}

/// `C_{E,a}` over a grid of `eps`, from one Dijkstra run.
pub fn convergence_table(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    set: &[u32],
    a: u32,
    eps: &[BigRational],
    proxy: &FrontierProxy,
) -> Vec<Convergence> {
    let frontier = proxy.boundary(ball, set);
    if frontier.is_empty() {
        return vec![Convergence::Inconclusive; eps.len()];
    }
    let table = FloydTable::with_scale(ball, scale.clone(), a);
    let to_frontier = table.distances_from_set(&frontier);
    let da = ball.distances_from(a);
    eps.iter()
        .map(|e| {
            let r = set
                .iter()
                .filter(|&&v| scale.cmp(to_frontier[v as usize], e) == std::cmp::Ordering::Greater)
                .map(|&v| da[v as usize])
                .max()
                .unwrap_or(0);
            Convergence::Value(r)
        })
        .collect()
}

/// `C_E(eps) = max_a C_{E,a}(eps)` over trusted `a` in `E`.
pub fn convergence_sup(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    set: &[u32],
    eps: &BigRational,
    proxy: &FrontierProxy,
) -> Convergence {
    let mut best = None;
    for &a in set.iter().filter(|&&a| ball.is_trusted(a)) {
        match convergence_function(ball, scale, set, a, eps, proxy) {
            Convergence::Inconclusive => return Convergence::Inconclusive,
            Convergence::Value(r) => best = Some(best.map_or(r, |b: u32| b.max(r))),
        }
    }
    best.map_or(Convergence::Inconclusive, Convergence::Value)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionBound {
    pub diameter: u32,
    /// `rho = max_v delta_v(proxy E, B)` over trusted `v` in `E`.
    pub rho: String,
    pub convergence: Convergence,
    pub karlsson: Option<u64>,
    pub bound: Option<u64>,
    pub holds: Option<bool>,
    pub proxy: FrontierProxy,
}

/// Evaluates `diam Pr_E B <= 2 max(C_E(rho / 4), K(rho / 4))`.
pub fn projection_bound_check(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    k: &Karlsson,
    set: &[u32],
    from: &[u32],
    proxy: &FrontierProxy,
) -> Result<ProjectionBound> {
    let diameter = projection_diameter(ball, set, from)?;
    let frontier = proxy.boundary(ball, set);
    let mut rho = 0u128;
    if !frontier.is_empty() {
        for &v in set.iter().filter(|&&v| ball.is_trusted(v)) {
            let t = FloydTable::with_scale(ball, scale.clone(), v);
            let d = t.distances_from_set(&frontier);
            let m = from.iter().map(|&b| d[b as usize]).min().unwrap_or(UNREACHED);
            if m != UNREACHED {
                rho = rho.max(m);
            }
        }
    }
    let rho_q = scale.to_rational(rho);
    let mut out = ProjectionBound {
        diameter,
        rho: format_rational(&rho_q),
        convergence: Convergence::Inconclusive,
        karlsson: None,
        bound: None,
        holds: None,
        proxy: *proxy,
    };
    if rho == 0 {
        return Ok(out);
    }
    let quarter = &rho_q / int(4);
    out.convergence = convergence_sup(ball, scale, set, &quarter, proxy);
    let kv = k.eval(&quarter)?;
    out.karlsson = Some(kv);
    if let Convergence::Value(c) = out.convergence {
        let bound = 2 * (c as u64).max(kv);
        out.bound = Some(bound);
        out.holds = Some(diameter as u64 <= bound);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QisoReport {
    pub edges: usize,
    /// `max diam(Pr_E u cup Pr_E w)` over sampled edges.
    pub constant: u32,
    pub witness: Option<(u32, u32)>,
}

/// Trusted edges, or a seeded sample of `limit` of them.
pub fn sample_trusted_edges(ball: &CayleyBall, limit: usize, seed: u64) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for u in ball.trusted_vertices() {
        for (w, _) in ball.neighbors(u) {
            if w > u && ball.is_trusted(w) {
                edges.push((u, w));
            }
        }
    }
    if edges.len() > limit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        edges.shuffle(&mut rng);
        edges.truncate(limit);
        edges.sort_unstable();
    }
    edges
}

pub fn projection_qiso_check(ball: &CayleyBall, set: &[u32], edges: &[(u32, u32)]) -> Result<QisoReport> {
    if set.is_empty() {
        return Err(Error::Input("projection onto an empty set".into()));
    }
    let mut report = QisoReport {
        edges: edges.len(),
        constant: 0,
        witness: None,
    };
    for &(u, w) in edges {
        let d = projection_diameter(ball, set, &[u, w])?;
        if d > report.constant || report.witness.is_none() {
            if d >= report.constant {
                report.constant = d;
                report.witness = Some((u, w));
            }
        }
    }
    Ok(report)
}
