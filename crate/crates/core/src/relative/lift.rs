use super::graph::{RelEdge, RelPath, RelativeGraph};
use super::horospheres::{horosphere_axioms_report, HorosphereAxioms, HorosphereSystem};
use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::floyd::{int, DistortionFunction};
use crate::paths::{DistortionChecker, PathRecord};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// A relative geodesic with every horospherical edge replaced by the
/// lex geodesic between its endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct Lift {
    pub source: RelPath,
    #[serde(serialize_with = "ser_path")]
    pub path: PathRecord,
    /// `pieces[i]` is the index range in `path` covering edge `i` of `source`.
    pub pieces: Vec<(usize, usize)>,
}

fn ser_path<S: serde::Serializer>(p: &PathRecord, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    p.vertices().serialize(s)
}

pub fn lift(g: &RelativeGraph, delta: &RelPath) -> Result<Lift> {
    let ball = g.ball();
    let (&x, &y) = (
        delta.vertices.first().expect("nonempty"),
        delta.vertices.last().expect("nonempty"),
    );
    let d = g.rel_distance(x, y) as usize;
    if delta.length() != d {
        return Err(Error::Contract(format!(
            "relative path of length {} from {} to {} is not geodesic (distance {d})",
            delta.length(),
            ball.format_vertex(x),
            ball.format_vertex(y)
        )));
    }
    let mut path = vec![x];
    let mut pieces = Vec::with_capacity(delta.length());
    for (i, e) in delta.edges.iter().enumerate() {
        let (u, w) = (delta.vertices[i], delta.vertices[i + 1]);
        let start = path.len() - 1;
        match e {
            RelEdge::Graph => path.push(w),
            RelEdge::Horospherical(_) => path.extend(&ball.lex_geodesic(u, w)[1..]),
        }
        pieces.push((start, path.len() - 1));
    }
    Ok(Lift {
        source: delta.clone(),
        path: PathRecord::new(ball, path)?,
        pieces,
    })
}

/// `alpha_n = C (n + 2r + 2)(2n + 2r + 1)`, expanded as
/// `2C n^2 + C(6r + 5) n + C(2r + 2)(2r + 1)`. With `C = 0` every lift is a
/// geodesic, so the identity is returned.
pub fn lift_distortion_bound(r: u32, c: u32) -> DistortionFunction {
    if c == 0 {
        return DistortionFunction::Identity;
    }
    let (r, c) = (r as i64, c as i64);
    DistortionFunction::quadratic(int(2 * c), int(c * (6 * r + 5)), int(c * (2 * r + 2) * (2 * r + 1)))
        .expect("positive coefficients dominate n")
}

/// Measured inputs of the lift bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftConstants {
    /// Horosphere quasiconvexity: least `r` with `H_id(S_p) within N_r S_p`.
    pub r: u32,
    /// `max(edge projection, horosphere-to-horosphere projection)`.
    pub c: u32,
    pub axioms: HorosphereAxioms,
}

impl LiftConstants {
    pub fn bound(&self) -> DistortionFunction {
        lift_distortion_bound(self.r, self.c)
    }

    /// Default critical depth `h = C + 1`.
    pub fn critical_depth(&self) -> u32 {
        self.c + 1
    }
}

pub fn horosphere_quasiconvexity(ball: &CayleyBall, system: &HorosphereSystem) -> u32 {
    system
        .relevant(ball)
        .par_iter()
        .map(|&p| {
            let members = &system.entry(p).members;
            let trusted: Vec<u32> = members.iter().copied().filter(|&v| ball.is_trusted(v)).collect();
            if trusted.len() < 2 {
                return 0;
            }
            let to_s = ball.distances_to_set(members);
            crate::paths::id_hull(ball, &trusted)
                .iter()
                .map(|&w| to_s[w as usize])
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

pub fn measure_lift_constants(g: &RelativeGraph) -> LiftConstants {
    let axioms = horosphere_axioms_report(g.ball(), g.system());
    LiftConstants {
        r: horosphere_quasiconvexity(g.ball(), g.system()),
        c: axioms.max_edge_projection.max(axioms.max_projection_diameter),
        axioms,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftViolation {
    pub from: u32,
    pub to: u32,
    pub lift: Vec<u32>,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftCertificate {
    pub alpha: DistortionFunction,
    pub pairs: usize,
    pub horospherical_lifts: usize,
    pub max_lift_length: usize,
    pub violations: Vec<LiftViolation>,
    /// Longest lifted subpath per endpoint distance.
    pub envelope: BTreeMap<u32, u32>,
    /// `max envelope(n) / alpha_n` over the table.
    pub envelope_ratio: f64,
}

/// Lifts the representative relative geodesic of every pair and checks it
/// against `alpha`.
pub fn certify_lifts(g: &RelativeGraph, pairs: &[(u32, u32)], alpha: &DistortionFunction) -> Result<LiftCertificate> {
    let ball = g.ball();
    let checker = DistortionChecker::for_ball(alpha, ball);
    let results: Vec<Result<(Lift, Option<(usize, usize)>, BTreeMap<u32, u32>)>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let l = lift(g, &g.rel_geodesic(x, y))?;
            let fail = match checker.check(ball, l.path.vertices()) {
                crate::paths::DistortionCertificate::Pass => None,
                crate::paths::DistortionCertificate::Fail { start, end, .. } => Some((start, end)),
            };
            let mut env = BTreeMap::new();
            let vs = l.path.vertices();
            for i in 0..vs.len() {
                let d = ball.distances_from(vs[i]);
                for j in i + 1..vs.len() {
                    let e = env.entry(d[vs[j] as usize]).or_insert(0u32);
                    *e = (*e).max((j - i) as u32);
                }
            }
            Ok((l, fail, env))
        })
        .collect();
    let mut cert = LiftCertificate {
        alpha: alpha.clone(),
        pairs: pairs.len(),
        horospherical_lifts: 0,
        max_lift_length: 0,
        violations: Vec::new(),
        envelope: BTreeMap::new(),
        envelope_ratio: 0.0,
    };
    for r in results {
        let (l, fail, env) = r?;
        if l.source.edges.iter().any(|e| matches!(e, RelEdge::Horospherical(_))) {
            cert.horospherical_lifts += 1;
        }
        cert.max_lift_length = cert.max_lift_length.max(l.path.length());
        if let Some((start, end)) = fail {
            cert.violations.push(LiftViolation {
                from: l.source.vertices[0],
                to: *l.source.vertices.last().expect("nonempty"),
                lift: l.path.vertices().to_vec(),
                start,
                end,
            });
        }
        for (d, len) in env {
            let e = cert.envelope.entry(d).or_insert(0);
            *e = (*e).max(len);
        }
    }
    for (&d, &len) in &cert.envelope {
        let a = crate::floyd::to_f64(&alpha.eval(d as u64));
        if a > 0.0 {
            cert.envelope_ratio = cert.envelope_ratio.max(len as f64 / a);
        }
    }
    Ok(cert)
}

fn near(ball: &CayleyBall, members: &[u32], v: u32, s: u32) -> bool {
    if s == 0 {
        return members.binary_search(&v).is_ok();
    }
    let d = ball.distances_from(v);
    members.iter().any(|&m| d[m as usize] <= s)
}

/// Surrogate horospherical depth of index `i` on `path`: the largest `r` with
/// `[i - r, i + r]` inside the path and mapped into `N_s S_p` for one `p`.
pub fn depth(ball: &CayleyBall, path: &PathRecord, i: usize, system: &HorosphereSystem, s: u32) -> Result<u32> {
    let vs = path.vertices();
    if i >= vs.len() {
        return Err(Error::Input(format!("index {i} outside a path with {} vertices", vs.len())));
    }
    let mut candidates: Vec<u32> = ball
        .neighborhood(&[vs[i]], s)
        .into_iter()
        .flat_map(|v| system.containing(v).to_vec())
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    let mut best = 0;
    for p in candidates {
        let members = &system.entry(p).members;
        if !near(ball, members, vs[i], s) {
            continue;
        }
        let mut r = 0usize;
        while r < i && i + r + 1 < vs.len() && near(ball, members, vs[i - r - 1], s) && near(ball, members, vs[i + r + 1], s) {
            r += 1;
        }
        best = best.max(r as u32);
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopReport {
    pub max_len: u32,
    pub edge: (u32, u32),
    pub loops: usize,
    pub max_lift_length: u64,
    /// `C n (n - 1)` for the configured `n`.
    pub bound: u64,
    pub holds: bool,
    /// Longest loop found, as ball vertices with cone passages implicit.
    pub longest: Option<Vec<u32>>,
}

/// Enumerates simple loops through the Cayley edge `edge` in the cone-vertex
/// model of the relative graph and lifts them.
///
/// Cone vertices sit at distance 1/2 from each horosphere member; lengths are
/// doubled to stay integral. A cone passage between two Cayley-adjacent
/// vertices is skipped: it would double an existing edge.
pub fn simple_loop_lift_report(
    g: &RelativeGraph,
    max_len: u32,
    edge: (u32, u32),
    c: u32,
    budget: usize,
) -> Result<LoopReport> {
    let ball = g.ball();
    let (u, w) = edge;
    if !ball.are_adjacent(u, w) {
        return Err(Error::Input("loop edge must be a Cayley edge".into()));
    }
    let n = ball.vertex_count();
    let mut report = LoopReport {
        max_len,
        edge,
        loops: 0,
        max_lift_length: 0,
        bound: c as u64 * max_len as u64 * (max_len as u64).saturating_sub(1),
        holds: true,
        longest: None,
    };
    let mut st = LoopSearch {
        g,
        limit: 2 * max_len,
        budget,
        steps: 0,
        on_path: vec![false; n],
        cone_used: vec![false; g.system().len()],
        path: vec![u, w],
        target: u,
        report: &mut report,
    };
    st.on_path[u as usize] = true;
    st.on_path[w as usize] = true;
    st.search(w, 2, 1)?;
    report.holds = report.max_lift_length <= report.bound || report.loops == 0;
    Ok(report)
}

struct LoopSearch<'g, 'a, 'r> {
    g: &'g RelativeGraph<'a>,
    limit: u32,
    budget: usize,
    steps: usize,
    on_path: Vec<bool>,
    cone_used: Vec<bool>,
    path: Vec<u32>,
    target: u32,
    report: &'r mut LoopReport,
}

impl LoopSearch<'_, '_, '_> {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Error::resource(
                "loop-enumeration",
                format!("more than {} search steps", self.budget),
            ));
        }
        Ok(())
    }

    fn close(&mut self, lift_len: u64) {
        self.report.loops += 1;
        if lift_len > self.report.max_lift_length {
            self.report.max_lift_length = lift_len;
            let mut p = self.path.clone();
            p.push(self.target);
            self.report.longest = Some(p);
        }
    }

    /// `len` is the doubled relative length so far, `lift_len` the lifted one.
    fn search(&mut self, cur: u32, len: u32, lift_len: u64) -> Result<()> {
        self.tick()?;
        let ball = self.g.ball();
        if len + 2 <= self.limit {
            for (x, _) in ball.neighbors(cur) {
                if x == self.target && self.path.len() >= 3 {
                    self.close(lift_len + 1);
                } else if !self.on_path[x as usize] {
                    self.on_path[x as usize] = true;
                    self.path.push(x);
                    self.search(x, len + 2, lift_len + 1)?;
                    self.path.pop();
                    self.on_path[x as usize] = false;
                }
            }
            let system = self.g.system();
            for &p in system.containing(cur) {
                if self.cone_used[p as usize] {
                    continue;
                }
                self.cone_used[p as usize] = true;
                for &y in &system.entry(p).members {
                    if y == cur || ball.are_adjacent(cur, y) {
                        continue;
                    }
                    let step = ball.distance(cur, y) as u64;
                    if y == self.target {
                        self.close(lift_len + step);
                    } else if !self.on_path[y as usize] {
                        self.on_path[y as usize] = true;
                        self.path.push(y);
                        self.search(y, len + 2, lift_len + step)?;
                        self.path.pop();
                        self.on_path[y as usize] = false;
                    }
                }
                self.cone_used[p as usize] = false;
            }
        }
        Ok(())
    }
}

/// Largest surrogate depth over the vertices of `rel_hull(set)`, measured on
/// the lifts of representative relative geodesics between points of `set`.
pub fn rel_hull_depth(g: &RelativeGraph, set: &[u32], s: u32) -> Result<u32> {
    let mut pairs = Vec::new();
    for (i, &x) in set.iter().enumerate() {
        for &y in &set[i + 1..] {
            pairs.push((x, y));
        }
    }
    let depths: Vec<Result<u32>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let l = lift(g, &g.rel_geodesic(x, y))?;
            let mut best = 0;
            for (k, _) in l.pieces.iter().enumerate() {
                let i = l.pieces[k].0;
                best = best.max(depth(g.ball(), &l.path, i, g.system(), s)?);
            }
            if let Some(&(_, last)) = l.pieces.last() {
                best = best.max(depth(g.ball(), &l.path, last, g.system(), s)?);
            }
            Ok(best)
        })
        .collect();
    depths.into_iter().try_fold(0, |m, d| Ok(m.max(d?)))
}
