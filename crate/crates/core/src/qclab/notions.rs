use super::visible::{visible_table, VisibleMode};
use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::floyd::{DistortionFunction, FloydScale};
use crate::paths::{alpha_hull_approx_within, constrained_path_with, DistortionChecker, SOUND_SUBSET};
use crate::relative::RelativeGraph;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Notion {
    Relative,
    Visible,
    Alpha,
    WeakAlpha,
    Dynamical,
}

impl Notion {
    pub const ALL: [Notion; 5] = [
        Notion::Relative,
        Notion::Visible,
        Notion::Alpha,
        Notion::WeakAlpha,
        Notion::Dynamical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Notion::Relative => "relative",
            Notion::Visible => "visible",
            Notion::Alpha => "alpha",
            Notion::WeakAlpha => "weak-alpha",
            Notion::Dynamical => "dynamical",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Notion::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown notion '{s}'")))
    }
}

impl std::fmt::Display for Notion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct BatteryParams {
    pub eps: Vec<BigRational>,
    pub alpha: DistortionFunction,
    /// Cap on visible-hull work, in vertex relaxations.
    pub visible_budget: u64,
}

/// One ball radius worth of inputs. `subject` must lie in the trusted region.
pub struct Level<'g, 'a> {
    pub graph: &'g RelativeGraph<'a>,
    pub scale: Arc<FloydScale>,
    pub subject: Vec<u32>,
}

impl Level<'_, '_> {
    pub fn ball(&self) -> &CayleyBall {
        self.graph.ball()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Measurement {
    pub radius: u32,
    pub param: String,
    /// Least `r` with the hull inside `N_r F` on trusted vertices.
    pub constant: Option<u32>,
    /// `max d(w, F)` over trusted `w`; a constant equal to it is saturated.
    pub max_possible: u32,
    pub exhaustive: bool,
    pub witness: Option<String>,
    pub witness_distance: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Stable,
    Saturated,
    Growing,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamStatus {
    pub param: String,
    pub status: Status,
    pub constants: Vec<Option<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedPositive,
    GrowthNegative,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::CertifiedPositive => "certified-positive",
            Verdict::GrowthNegative => "growth-negative",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stabilized {
    pub radii: (u32, u32),
    pub constants: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainLink {
    pub radius: u32,
    pub vertex: String,
    pub distance: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QCBody {
    pub radii: Vec<u32>,
    pub params: Vec<String>,
    pub measurements: Vec<Measurement>,
    pub statuses: Vec<ParamStatus>,
    pub verdict: Verdict,
    pub stabilized: Option<Stabilized>,
    /// Param whose growth certifies the negative verdict.
    pub growing_param: Option<String>,
    pub witness_chain: Vec<ChainLink>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QCReport {
    pub notion: Notion,
    pub note: Option<String>,
    pub body: QCBody,
}

fn max_possible(ball: &CayleyBall, df: &[u32]) -> u32 {
    ball.trusted_vertices().map(|v| df[v as usize]).max().unwrap_or(0)
}

/// `max d(w, F)` over trusted members of `mask`, with the least index argmax.
fn spread(ball: &CayleyBall, df: &[u32], members: impl Iterator<Item = u32>) -> (u32, Option<u32>) {
    let mut best = (0, None);
    for w in members.filter(|&w| ball.is_trusted(w)) {
        let d = df[w as usize];
        if best.1.is_none() || d > best.0 {
            best = (d, Some(w));
        }
    }
    best
}

fn measurement(ball: &CayleyBall, param: String, df: &[u32], found: (u32, Option<u32>), exhaustive: bool) -> Measurement {
    Measurement {
        radius: ball.radius(),
        param,
        constant: Some(found.0),
        max_possible: max_possible(ball, df),
        exhaustive,
        witness: found.1.map(|w| ball.format_vertex(w)),
        witness_distance: found.1.map(|w| df[w as usize]),
    }
}

pub fn measure_relative(level: &Level) -> Measurement {
    let ball = level.ball();
    let df = ball.distances_to_set(&level.subject);
    let mask = level.graph.rel_hull_mask(&level.subject);
    let found = spread(ball, &df, (0..mask.len() as u32).filter(|&v| mask[v as usize]));
    measurement(ball, "r".into(), &df, found, true)
}

pub fn measure_visible(level: &Level, params: &BatteryParams) -> Result<Vec<Measurement>> {
    let ball = level.ball();
    let df = ball.distances_to_set(&level.subject);
    let table = visible_table(ball, &level.scale, &level.subject, &params.eps, params.visible_budget)?;
    let top = max_possible(ball, &df);
    Ok(table
        .entries
        .into_iter()
        .map(|e| Measurement {
            radius: ball.radius(),
            param: e.eps,
            constant: Some(e.constant),
            max_possible: top,
            exhaustive: table.mode == VisibleMode::Exhaustive,
            witness: e.witness.map(|w| ball.format_vertex(w)),
            witness_distance: e.witness.map(|w| df[w as usize]),
        })
        .collect())
}

pub fn measure_alpha(level: &Level, alpha: &DistortionFunction) -> Measurement {
    let ball = level.ball();
    let df = ball.distances_to_set(&level.subject);
    let trusted: Vec<u32> = ball.trusted_vertices().collect();
    let hull = alpha_hull_approx_within(ball, &level.subject, alpha, &trusted);
    let found = spread(ball, &df, hull.members.into_iter());
    measurement(ball, alpha.to_string(), &df, found, true)
}

/// Least `q` such that every pair of `F` is joined by an `alpha`-distorted
/// path inside `N_q F`.
pub fn measure_weak_alpha(level: &Level, alpha: &DistortionFunction) -> Measurement {
    let ball = level.ball();
    let f = &level.subject;
    let df = ball.distances_to_set(f);
    let top = max_possible(ball, &df);
    let checker = DistortionChecker::for_ball(alpha, ball);
    let pairs: Vec<(u32, u32)> = f
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| f[i + 1..].iter().map(move |&y| (x, y)))
        .collect();
    let mut out = Measurement {
        radius: ball.radius(),
        param: alpha.to_string(),
        constant: None,
        max_possible: top,
        exhaustive: true,
        witness: None,
        witness_distance: None,
    };
    for q in 0..=top {
        let allowed: Vec<bool> = df.iter().map(|&d| d <= q).collect();
        let paths: Option<Vec<Vec<u32>>> = pairs
            .par_iter()
            .map(|&(x, y)| constrained_path_with(ball, x, y, &allowed, &checker).map(|p| p.vertices().to_vec()))
            .collect();
        if let Some(paths) = paths {
            let found = spread(ball, &df, paths.into_iter().flatten());
            out.constant = Some(q);
            out.witness = found.1.map(|w| ball.format_vertex(w));
            out.witness_distance = found.1.map(|w| df[w as usize]);
            break;
        }
    }
    out
}

fn measure(level: &Level, notion: Notion, params: &BatteryParams) -> Result<Vec<Measurement>> {
    Ok(match notion {
        Notion::Relative => vec![measure_relative(level)],
        Notion::Visible | Notion::Dynamical => measure_visible(level, params)?,
        Notion::Alpha => vec![measure_alpha(level, &params.alpha)],
        Notion::WeakAlpha => vec![measure_weak_alpha(level, &params.alpha)],
    })
}

fn status(ms: &[&Measurement]) -> Status {
    let n = ms.len();
    if n < 2 || ms.iter().any(|m| m.constant.is_none()) {
        return Status::Unknown;
    }
    let c = |i: usize| ms[i].constant.expect("checked");
    let (prev, last) = (ms[n - 2], ms[n - 1]);
    if c(n - 2) == c(n - 1) && prev.exhaustive && last.exhaustive {
        return Status::Stable;
    }
    if c(n - 2) == prev.max_possible && c(n - 1) >= c(n - 2) {
        return Status::Saturated;
    }
    let increasing = (1..n).all(|i| c(i) > c(i - 1));
    let unsaturated = (0..n - 1).all(|i| c(i) < ms[i].max_possible);
    if increasing && unsaturated && ms.iter().all(|m| m.witness_distance == m.constant) {
        return Status::Growing;
    }
    Status::Unknown
}

/// Combines per-radius measurements (ascending radii) into a report.
pub fn combine(levels: &[Vec<Measurement>]) -> QCBody {
    let radii: Vec<u32> = levels.iter().map(|l| l.first().map_or(0, |m| m.radius)).collect();
    let params: Vec<String> = levels.first().map(|l| l.iter().map(|m| m.param.clone()).collect()).unwrap_or_default();
    let mut statuses = Vec::new();
    for (j, p) in params.iter().enumerate() {
        let ms: Vec<&Measurement> = levels.iter().map(|l| &l[j]).collect();
        statuses.push(ParamStatus {
            param: p.clone(),
            status: status(&ms),
            constants: ms.iter().map(|m| m.constant).collect(),
        });
    }
    let growing = statuses.iter().position(|s| s.status == Status::Growing);
    let all_settled = statuses.iter().all(|s| matches!(s.status, Status::Stable | Status::Saturated));
    let any_stable = statuses.iter().any(|s| s.status == Status::Stable);
    let verdict = if growing.is_some() {
        Verdict::GrowthNegative
    } else if all_settled && any_stable {
        Verdict::CertifiedPositive
    } else {
        Verdict::Inconclusive
    };
    let n = radii.len();
    let stabilized = (verdict == Verdict::CertifiedPositive).then(|| Stabilized {
        radii: (radii[n - 2], radii[n - 1]),
        constants: statuses
            .iter()
            .filter(|s| s.status == Status::Stable)
            .map(|s| (s.param.clone(), s.constants[n - 1].expect("stable")))
            .collect(),
    });
    let witness_chain = growing
        .map(|j| {
            levels
                .iter()
                .map(|l| ChainLink {
                    radius: l[j].radius,
                    vertex: l[j].witness.clone().expect("growing params carry witnesses"),
                    distance: l[j].witness_distance.expect("growing params carry witnesses"),
                })
                .collect()
        })
        .unwrap_or_default();
    let mut measurements: Vec<Measurement> = levels.iter().flatten().cloned().collect();
    let order = |m: &Measurement| (m.radius, params.iter().position(|p| *p == m.param));
    measurements.sort_by_key(order);
    let growing_param = growing.map(|j| params[j].clone());
    QCBody {
        radii,
        params,
        measurements,
        statuses,
        verdict,
        stabilized,
        growing_param,
        witness_chain,
    }
}

pub const DYNAMICAL_NOTE: &str =
    "dynamical quasiconvexity of an orbit is equivalent to visible quasiconvexity; computed by the visible tester";

fn note(notion: Notion) -> Option<String> {
    match notion {
        Notion::Alpha => Some(format!("{SOUND_SUBSET}: alpha hull is an inner approximation")),
        Notion::Dynamical => Some(DYNAMICAL_NOTE.into()),
        Notion::Visible => Some("ball-scale constants; verdicts compare the last two radii".into()),
        _ => None,
    }
}

fn check_subject(level: &Level) -> Result<()> {
    let ball = level.ball();
    if level.subject.is_empty() {
        return Err(Error::Input("empty subject set".into()));
    }
    if let Some(&v) = level.subject.iter().find(|&&v| !ball.is_trusted(v)) {
        return Err(Error::Input(format!(
            "subject vertex {} lies outside the trusted radius {}",
            ball.format_vertex(v),
            ball.trust_radius()
        )));
    }
    Ok(())
}

/// Re-derives every chain distance with a fresh BFS.
fn verify_chain(levels: &[Level], body: &QCBody) -> Result<()> {
    for (link, level) in body.witness_chain.iter().zip(levels) {
        let ball = level.ball();
        let v = ball.vertex_of_word(&link.vertex)?;
        let d = ball.distances_to_set(&level.subject)[v as usize];
        if d != link.distance {
            return Err(Error::Invariant(format!(
                "witness {} at radius {}: recorded distance {} but exact distance {d}",
                link.vertex, link.radius, link.distance
            )));
        }
    }
    if body.witness_chain.windows(2).any(|w| w[1].distance <= w[0].distance) {
        return Err(Error::Invariant("witness chain distances are not strictly increasing".into()));
    }
    Ok(())
}

/// Runs one notion at every level (ascending radii).
pub fn test_quasiconvexity(levels: &[Level], notion: Notion, params: &BatteryParams) -> Result<QCReport> {
    levels.iter().try_for_each(check_subject)?;
    let measured = levels.iter().map(|l| measure(l, notion, params)).collect::<Result<Vec<_>>>()?;
    let body = combine(&measured);
    verify_chain(levels, &body)?;
    Ok(QCReport {
        notion,
        note: note(notion),
        body,
    })
}

/// Runs several notions; reports come back sorted by notion. A dynamical
/// report reuses the visible body when both are requested.
pub fn run_battery(levels: &[Level], notions: &[Notion], params: &BatteryParams) -> Result<Vec<QCReport>> {
    let mut wanted: Vec<Notion> = notions.to_vec();
    wanted.sort();
    wanted.dedup();
    let compute: Vec<Notion> = wanted
        .iter()
        .copied()
        .filter(|&n| !(n == Notion::Dynamical && wanted.contains(&Notion::Visible)))
        .collect();
    let mut reports = compute
        .par_iter()
        .map(|&n| test_quasiconvexity(levels, n, params))
        .collect::<Result<Vec<_>>>()?;
    if compute.len() < wanted.len() {
        let visible = reports.iter().find(|r| r.notion == Notion::Visible).expect("visible computed").clone();
        reports.push(QCReport {
            notion: Notion::Dynamical,
            note: note(Notion::Dynamical),
            body: visible.body,
        });
    }
    reports.sort_by_key(|r| r.notion);
    Ok(reports)
}

/// The notions are equivalent, so a certified-positive notion next to a
/// growth-negative one is an inconsistency.
pub fn consistency_check(reports: &[QCReport]) -> Result<()> {
    let pos = reports.iter().find(|r| r.body.verdict == Verdict::CertifiedPositive);
    let neg = reports.iter().find(|r| r.body.verdict == Verdict::GrowthNegative);
    if let (Some(p), Some(n)) = (pos, neg) {
        return Err(Error::Invariant(format!(
            "notion {} is certified-positive while {} is growth-negative",
            p.notion, n.notion
        )));
    }
    Ok(())
}
