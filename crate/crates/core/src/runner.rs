//! Executes a scenario: balls, Floyd scales, horospheres, relative graphs,
//! the quasiconvexity battery and the configured checks, then assembles a
//! deterministic report.

use crate::cayley::{BallConfig, CayleyBall};
use crate::error::{Error, Result};
use crate::floyd::{
    base_change, format_rational, verify_karlsson, DistortionFunction, FloydScale, Karlsson, KarlssonReport,
    KarlssonSample,
};
use crate::paths::{alpha_hull_approx_within, check_hull_locality, HullLocalityViolation};
use crate::qclab::{
    check_fundamental, check_star_convex, consistency_check, dirichlet, dirichlet_projection_bound, ehull_check,
    orbit_in_ball, parabolic_intersection_report, projection_bound_check, projection_qiso_check, run_battery,
    sample_trusted_edges, BatteryParams, CoveringReport, DirichletProjection, EHullReport, FrontierProxy,
    Intersection, Level, ParabolicReport, ProjectionBound, QCReport, QisoReport, StarConvexity, Verdict,
};
use crate::relative::{
    build_horospheres, build_relative_graph, certify_lifts, horosphere_axioms_report, measure_lift_constants,
    thinness_constant, trusted_triples, HorosphereAxioms, LiftCertificate, LiftConstants, RelativeGraph,
    ThinnessReport,
};
use crate::scenario::{Expectation, Resolved, Scenario, Subject, SCHEMA_VERSION};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

/// Exit code for an error: 2 for schema problems, 3 for budgets, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Resource { .. } => 3,
        _ => 1,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BallSummary {
    pub radius: u32,
    pub trust_radius: u32,
    pub vertices: usize,
    pub trusted: usize,
    pub horospheres: usize,
    pub subject: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaReport {
    pub source: &'static str,
    pub function: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lift_constants: Option<LiftSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftSummary {
    pub radius: u32,
    pub r: u32,
    pub c: u32,
    pub critical_depth: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct KarlssonRow {
    pub eps: String,
    pub identity: u64,
    pub alpha: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerRadius<T> {
    pub radius: u32,
    pub report: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct KarlssonCheck {
    pub radius: u32,
    pub report: KarlssonReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaseChangeCheck {
    pub radius: u32,
    pub samples: usize,
    pub violations: usize,
    pub first: Option<[String; 4]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HullLocalityCheck {
    pub basepoints: Vec<String>,
    pub hull_size: usize,
    pub violations: usize,
    pub first: Vec<HullLocalityViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirichletCheck {
    pub exact: bool,
    pub members: usize,
    pub star: StarConvexity,
    pub covering: CoveringReport,
    pub projection: DirichletProjection,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionBoundCheck {
    #[serde(flatten)]
    pub main: ProjectionBound,
    /// The same check with the frontier shell widened and narrowed by one.
    pub sensitivity: Vec<ProjectionBound>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stability<T> {
    pub per_radius: Vec<PerRadius<T>>,
    /// The tracked maxima agree at the last two radii.
    pub stable: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckReports {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub karlsson: Option<KarlssonCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_change: Option<BaseChangeCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ehull: Option<Vec<PerRadius<EHullReport>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hull_locality: Option<Vec<PerRadius<HullLocalityCheck>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horosphere_axioms: Option<Stability<HorosphereAxioms>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thinness: Option<Stability<ThinnessReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifts: Option<PerRadius<LiftCertificate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<Stability<DirichletCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parabolic: Option<PerRadius<ParabolicReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_qiso: Option<Stability<QisoReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_bound: Option<Vec<PerRadius<ProjectionBoundCheck>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub check: String,
    pub radius: Option<u32>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub verdicts: BTreeMap<String, String>,
    pub expectation: Expectation,
    pub expectation_met: bool,
    pub violations: Vec<Violation>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub versions: BTreeMap<String, String>,
    pub scenario: Scenario,
    pub eps: Vec<String>,
    pub balls: Vec<BallSummary>,
    pub alpha: AlphaReport,
    pub karlsson: Vec<KarlssonRow>,
    pub battery: Vec<QCReport>,
    pub checks: CheckReports,
    pub summary: Summary,
    #[serde(skip)]
    pub eps_exact: Vec<num_rational::BigRational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub scenario: String,
    pub workers: usize,
    pub total_seconds: f64,
    pub stages: Vec<(String, f64)>,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub timing: Timing,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.summary.exit_code
    }

    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

struct Clock {
    start: Instant,
    last: Instant,
    budget: u64,
    stages: Vec<(String, f64)>,
}

impl Clock {
    fn new(budget: u64) -> Self {
        let now = Instant::now();
        Clock {
            start: now,
            last: now,
            budget,
            stages: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) -> Result<()> {
        let now = Instant::now();
        self.stages.push((stage.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
        let total = (now - self.start).as_secs();
        if total > self.budget {
            return Err(Error::resource(
                "seconds",
                format!("{total} s elapsed after stage {stage}, budget {} s", self.budget),
            ));
        }
        log::info!("stage {stage} done");
        Ok(())
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn subject(res: &Resolved, ball: &CayleyBall) -> Result<Vec<u32>> {
    if let Some(h) = &res.subgroup {
        return Ok(orbit_in_ball(ball, h, 0).into_iter().filter(|&v| ball.is_trusted(v)).collect());
    }
    let fam = res.family.as_ref().expect("subject is a subgroup or a family");
    let n = match &res.scenario.subject {
        Subject::Family { n_max: Some(n), .. } => *n,
        _ => ball.radius() / 2,
    };
    let mut out = Vec::new();
    for e in fam.members(&res.group, n) {
        let v = ball.index_of(&e).filter(|&v| ball.is_trusted(v)).ok_or_else(|| {
            Error::Config(format!(
                "family member {} lies outside the trusted region at radius {}",
                res.group.format_element(&e),
                ball.radius()
            ))
        })?;
        out.push(v);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn karlsson(f: &crate::floyd::ScalingFunction, alpha: &DistortionFunction) -> Result<Karlsson> {
    Karlsson::new(f, alpha).map_err(|e| Error::Config(format!("scaling {f} with distortion {alpha}: {e}")))
}

/// Runs a scenario on a pool of `workers` threads.
pub fn run(scenario: &Scenario, workers: usize) -> Result<RunOutcome> {
    let res = scenario.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::resource("workers", e.to_string()))?;
    pool.install(|| run_resolved(&res, workers.max(1)))
}

fn run_resolved(res: &Resolved, workers: usize) -> Result<RunOutcome> {
    let sc = &res.scenario;
    let mut clock = Clock::new(sc.budgets.seconds);
    let mut violations: Vec<Violation> = Vec::new();

    let mut balls = Vec::new();
    for &r in &sc.radii {
        let cfg = BallConfig::new(r).margin(sc.margin).vertex_budget(sc.budgets.vertices);
        balls.push(CayleyBall::build(&res.group, &cfg)?);
    }
    clock.lap("balls")?;
    let graphs: Vec<RelativeGraph> = balls
        .iter()
        .map(|b| build_horospheres(b, &res.peripheral, sc.thickening).map(|s| build_relative_graph(b, s)))
        .collect::<Result<_>>()?;
    let scales: Vec<Arc<FloydScale>> = balls
        .iter()
        .map(|b| FloydScale::for_ball(b, &res.scaling).map(Arc::new))
        .collect::<Result<_>>()?;
    let subjects: Vec<Vec<u32>> = balls.iter().map(|b| subject(res, b)).collect::<Result<_>>()?;
    clock.lap("horospheres")?;

    let last = graphs.last().expect("radii nonempty");
    let mut lift_constants: Option<LiftConstants> = None;
    let alpha = match &res.distortion {
        Some(a) => AlphaReport {
            source: "scenario",
            function: a.to_string(),
            lift_constants: None,
        },
        None => {
            let lc = measure_lift_constants(last);
            let report = AlphaReport {
                source: "lift-bound",
                function: lc.bound().to_string(),
                lift_constants: Some(LiftSummary {
                    radius: last.ball().radius(),
                    r: lc.r,
                    c: lc.c,
                    critical_depth: lc.critical_depth(),
                }),
            };
            lift_constants = Some(lc);
            report
        }
    };
    let alpha_fn = match &res.distortion {
        Some(a) => a.clone(),
        None => lift_constants.as_ref().expect("measured").bound(),
    };
    let k_id = karlsson(&res.scaling, &DistortionFunction::Identity)?;
    let k_alpha = karlsson(&res.scaling, &alpha_fn)?;
    let karlsson_rows = res
        .eps
        .iter()
        .map(|e| {
            Ok(KarlssonRow {
                eps: format_rational(e),
                identity: k_id.eval(e)?,
                alpha: k_alpha.eval(e)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    clock.lap("karlsson")?;

    let levels: Vec<Level> = graphs
        .iter()
        .zip(&scales)
        .zip(&subjects)
        .map(|((g, s), f)| Level {
            graph: g,
            scale: s.clone(),
            subject: f.clone(),
        })
        .collect();
    let params = BatteryParams {
        eps: res.eps.clone(),
        alpha: alpha_fn.clone(),
        visible_budget: sc.budgets.visible_work,
    };
    let battery = run_battery(&levels, &res.notions, &params)?;
    if let Err(e) = consistency_check(&battery) {
        violations.push(Violation {
            check: "notion-consistency".into(),
            radius: None,
            detail: e.to_string(),
        });
    }
    clock.lap("battery")?;

    let mut checks = CheckReports::default();
    let ck = &sc.checks;

    if let Some(c) = &ck.karlsson {
        let ball = CayleyBall::build(&res.group, &BallConfig::new(c.radius).vertex_budget(sc.budgets.vertices))?;
        let scale = Arc::new(FloydScale::for_ball(&ball, &res.scaling)?);
        let mut r = rng(sc.seed, 1);
        let n = ball.vertex_count() as u32;
        let samples: Vec<KarlssonSample> = (0..c.samples)
            .map(|_| {
                let (v, x, y) = (r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..n));
                KarlssonSample {
                    basepoint: v,
                    path: ball.lex_geodesic(x, y),
                }
            })
            .collect();
        let report = verify_karlsson(&ball, &scale, &k_id, &samples)?;
        if let Some(v) = report.violations.first() {
            violations.push(Violation {
                check: "karlsson".into(),
                radius: Some(c.radius),
                detail: format!(
                    "{} violations; first at basepoint {} with distance {} > K = {}",
                    report.violations.len(),
                    ball.format_vertex(v.basepoint),
                    v.distance,
                    v.karlsson
                ),
            });
        }
        checks.karlsson = Some(KarlssonCheck {
            radius: c.radius,
            report,
        });
        clock.lap("karlsson-check")?;
    }

    if let Some(c) = &ck.base_change {
        let ball = CayleyBall::build(&res.group, &BallConfig::new(c.radius).vertex_budget(sc.budgets.vertices))?;
        let scale = Arc::new(FloydScale::for_ball(&ball, &res.scaling)?);
        let mut r = rng(sc.seed, 2);
        let n = ball.vertex_count() as u32;
        let quads: Vec<[u32; 4]> = (0..c.samples)
            .map(|_| [r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..n)])
            .collect();
        let failed: Vec<[u32; 4]> = quads
            .iter()
            .filter(|q| !base_change(&ball, &scale, q[0], q[1], q[2], q[3]).holds)
            .copied()
            .collect();
        if !failed.is_empty() {
            violations.push(Violation {
                check: "base-change".into(),
                radius: Some(c.radius),
                detail: format!("{} of {} quadruples", failed.len(), c.samples),
            });
        }
        checks.base_change = Some(BaseChangeCheck {
            radius: c.radius,
            samples: c.samples,
            violations: failed.len(),
            first: failed.first().map(|q| q.map(|v| ball.format_vertex(v))),
        });
        clock.lap("base-change")?;
    }

    if ck.ehull {
        let mut out = Vec::new();
        for l in &levels {
            let rep = ehull_check(l.ball(), &l.scale, &k_id, &l.subject, &res.eps)?;
            if let Some(v) = rep.violations.first() {
                violations.push(Violation {
                    check: "ehull".into(),
                    radius: Some(l.ball().radius()),
                    detail: format!(
                        "{} violations; first {} at eps {}",
                        rep.violations.len(),
                        l.ball().format_vertex(v.vertex),
                        v.eps
                    ),
                });
            }
            out.push(PerRadius {
                radius: l.ball().radius(),
                report: rep,
            });
        }
        checks.ehull = Some(out);
        clock.lap("ehull")?;
    }

    if let Some(count) = ck.hull_locality {
        let mut out = Vec::new();
        for (i, l) in levels.iter().enumerate() {
            let ball = l.ball();
            let trusted: Vec<u32> = ball.trusted_vertices().collect();
            let hull = alpha_hull_approx_within(ball, &l.subject, &alpha_fn, &trusted);
            let mut r = rng(sc.seed, 3 + i as u64);
            let basepoints: Vec<u32> = trusted.choose_multiple(&mut r, count.min(trusted.len())).copied().collect();
            let mut found = Vec::new();
            for &a in &basepoints {
                found.extend(check_hull_locality(ball, &l.scale, &k_alpha, &l.subject, &hull.members, a, &res.eps)?);
            }
            if !found.is_empty() {
                violations.push(Violation {
                    check: "hull-locality".into(),
                    radius: Some(ball.radius()),
                    detail: format!("{} violations", found.len()),
                });
            }
            out.push(PerRadius {
                radius: ball.radius(),
                report: HullLocalityCheck {
                    basepoints: basepoints.iter().map(|&a| ball.format_vertex(a)).collect(),
                    hull_size: hull.members.len(),
                    violations: found.len(),
                    first: found.into_iter().take(8).collect(),
                },
            });
        }
        checks.hull_locality = Some(out);
        clock.lap("hull-locality")?;
    }

    if ck.horosphere_axioms {
        let per: Vec<PerRadius<HorosphereAxioms>> = graphs
            .iter()
            .enumerate()
            .map(|(i, g)| PerRadius {
                radius: g.ball().radius(),
                report: match &lift_constants {
                    Some(lc) if i + 1 == graphs.len() => lc.axioms.clone(),
                    _ => horosphere_axioms_report(g.ball(), g.system()),
                },
            })
            .collect();
        let key = |a: &HorosphereAxioms| {
            (
                a.max_multiplicity,
                a.max_intersection_diameter,
                a.max_projection_diameter,
                a.max_edge_projection,
            )
        };
        let stable = per.len() < 2 || key(&per[per.len() - 2].report) == key(&per[per.len() - 1].report);
        checks.horosphere_axioms = Some(Stability { per_radius: per, stable });
        clock.lap("horosphere-axioms")?;
    }

    if ck.thinness {
        let per: Vec<PerRadius<ThinnessReport>> = graphs
            .iter()
            .map(|g| PerRadius {
                radius: g.ball().radius(),
                report: thinness_constant(g, &trusted_triples(g.ball())),
            })
            .collect();
        let n = per.len();
        let stable = n < 2 || per[n - 1].report.constant <= per[n - 2].report.constant;
        if !stable {
            violations.push(Violation {
                check: "thinness".into(),
                radius: Some(per[n - 1].radius),
                detail: format!(
                    "thinness constant grew from {} to {}",
                    per[n - 2].report.constant,
                    per[n - 1].report.constant
                ),
            });
        }
        checks.thinness = Some(Stability { per_radius: per, stable });
        clock.lap("thinness")?;
    }

    if ck.lifts {
        let lc = lift_constants.clone().unwrap_or_else(|| measure_lift_constants(last));
        let t: Vec<u32> = last.ball().trusted_vertices().collect();
        let pairs: Vec<(u32, u32)> = t
            .iter()
            .enumerate()
            .flat_map(|(i, &x)| t[i + 1..].iter().map(move |&y| (x, y)))
            .collect();
        let cert = certify_lifts(last, &pairs, &lc.bound())?;
        if !cert.violations.is_empty() {
            violations.push(Violation {
                check: "lifts".into(),
                radius: Some(last.ball().radius()),
                detail: format!("{} lifts are not {}-distorted", cert.violations.len(), cert.alpha),
            });
        }
        checks.lifts = Some(PerRadius {
            radius: last.ball().radius(),
            report: cert,
        });
        clock.lap("lifts")?;
    }

    if ck.dirichlet {
        let h = res.subgroup.as_ref().expect("validated");
        let mut per = Vec::new();
        for g in &graphs {
            let ball = g.ball();
            let d = dirichlet(ball, &orbit_in_ball(ball, h, 0), 0)?;
            let star = check_star_convex(ball, &d);
            let covering = check_fundamental(ball, &d, h);
            let projection = dirichlet_projection_bound(ball, &d, g.system());
            for (ok, what) in [(d.exact, "inexact"), (star.holds, "not star-convex"), (covering.complete, "covering incomplete")] {
                if !ok {
                    violations.push(Violation {
                        check: "dirichlet".into(),
                        radius: Some(ball.radius()),
                        detail: what.into(),
                    });
                }
            }
            per.push(PerRadius {
                radius: ball.radius(),
                report: DirichletCheck {
                    exact: d.exact,
                    members: d.members.len(),
                    star,
                    covering,
                    projection,
                },
            });
        }
        let n = per.len();
        let stable = n < 2 || per[n - 1].report.projection.constant == per[n - 2].report.projection.constant;
        if !stable {
            violations.push(Violation {
                check: "dirichlet-projection".into(),
                radius: Some(per[n - 1].radius),
                detail: "projection constant changed between the last two radii".into(),
            });
        }
        checks.dirichlet = Some(Stability { per_radius: per, stable });
        clock.lap("dirichlet")?;
    }

    if let Some(p) = &ck.parabolic {
        let h = res.subgroup.as_ref().expect("validated");
        let rep = parabolic_intersection_report(last.ball(), h, last.system(), p.q, p.finite_index_ratio);
        if let Some(want) = &p.expect {
            let got = match rep.overall {
                Intersection::Finite => "finite",
                Intersection::FiniteIndex => "finite-index",
                Intersection::Intermediate => "intermediate",
            };
            if got != want {
                violations.push(Violation {
                    check: "parabolic".into(),
                    radius: Some(last.ball().radius()),
                    detail: format!("expected {want}, classified {got}"),
                });
            }
        }
        checks.parabolic = Some(PerRadius {
            radius: last.ball().radius(),
            report: rep,
        });
        clock.lap("parabolic")?;
    }

    if let Some(limit) = ck.projection_qiso {
        let per = levels
            .iter()
            .map(|l| {
                let edges = sample_trusted_edges(l.ball(), limit, sc.seed);
                Ok(PerRadius {
                    radius: l.ball().radius(),
                    report: projection_qiso_check(l.ball(), &l.subject, &edges)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = per.len();
        let stable = n < 2 || per[n - 1].report.constant == per[n - 2].report.constant;
        checks.projection_qiso = Some(Stability { per_radius: per, stable });
        clock.lap("projection-qiso")?;
    }

    if let Some(word) = &ck.projection_bound {
        let g = res.group.word_to_element(word)?;
        let mut per = Vec::new();
        for l in &levels {
            let ball = l.ball();
            let e = match &res.subgroup {
                Some(h) => orbit_in_ball(ball, h, 0),
                None => l.subject.clone(),
            };
            let mut target: Vec<u32> = l
                .subject
                .iter()
                .filter_map(|&x| ball.index_of(&res.group.multiply(&g, ball.element(x))))
                .filter(|&x| ball.is_trusted(x))
                .collect();
            target.sort_unstable();
            if target.is_empty() {
                return Err(Error::Config(format!("projection target {word} F misses the trusted region")));
            }
            let proxy = FrontierProxy::default_for(ball);
            let rep = projection_bound_check(ball, &l.scale, &k_id, &e, &target, &proxy)?;
            let mut sensitivity = Vec::new();
            for inner in [proxy.inner.checked_sub(1), Some(proxy.inner + 1)].into_iter().flatten() {
                if let Ok(alt) = FrontierProxy::new(ball, inner, proxy.outer) {
                    sensitivity.push(projection_bound_check(ball, &l.scale, &k_id, &e, &target, &alt)?);
                }
            }
            if rep.holds == Some(false) {
                violations.push(Violation {
                    check: "projection-bound".into(),
                    radius: Some(ball.radius()),
                    detail: format!("diameter {} exceeds bound {:?}", rep.diameter, rep.bound),
                });
            }
            per.push(PerRadius {
                radius: ball.radius(),
                report: ProjectionBoundCheck { main: rep, sensitivity },
            });
        }
        checks.projection_bound = Some(per);
        clock.lap("projection-bound")?;
    }

    let verdicts: BTreeMap<String, String> = battery
        .iter()
        .map(|r| (r.notion.name().to_string(), r.body.verdict.name().to_string()))
        .collect();
    let any = |v: Verdict| battery.iter().any(|r| r.body.verdict == v);
    let expectation_met = match sc.expectation {
        Expectation::Positive => !any(Verdict::GrowthNegative),
        Expectation::Negative => !any(Verdict::CertifiedPositive),
        Expectation::None => true,
    };
    let exit_code = if violations.is_empty() && expectation_met { 0 } else { 1 };

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        versions: BTreeMap::from([("rhg-core".to_string(), env!("CARGO_PKG_VERSION").to_string())]),
        scenario: sc.clone(),
        eps: res.eps.iter().map(format_rational).collect(),
        balls: balls
            .iter()
            .zip(&graphs)
            .zip(&subjects)
            .map(|((b, g), f)| BallSummary {
                radius: b.radius(),
                trust_radius: b.trust_radius(),
                vertices: b.vertex_count(),
                trusted: b.trusted_vertices().count(),
                horospheres: g.system().len(),
                subject: f.len(),
            })
            .collect(),
        alpha,
        karlsson: karlsson_rows,
        battery,
        checks,
        summary: Summary {
            verdicts,
            expectation: sc.expectation,
            expectation_met,
            violations,
            exit_code,
        },
        eps_exact: res.eps.clone(),
    };
    let total = clock.start.elapsed().as_secs_f64();
    Ok(RunOutcome {
        report,
        timing: Timing {
            scenario: sc.name.clone(),
            workers,
            total_seconds: total,
            stages: clock.stages,
        },
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Writes `report.json`, `timing.json` and `tables/*.csv` under `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir.join("tables"))?;
    write_file(&dir.join("report.json"), &outcome.report_json())?;
    let mut timing = serde_json::to_string_pretty(&outcome.timing).expect("timing serializes");
    timing.push('\n');
    write_file(&dir.join("timing.json"), &timing)?;
    for (name, text) in tables(&outcome.report) {
        write_file(&dir.join("tables").join(name), &text)?;
    }
    Ok(())
}

/// CSV form of a rational: `n` for integers, `p/q` otherwise.
pub fn csv_rational(q: &num_rational::BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format_rational(q)
    }
}

/// Plot-ready CSV tables derived from a report.
pub fn tables(report: &RunReport) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    let mut s = String::from("notion,param,radius,constant,max_possible,exhaustive\n");
    for r in &report.battery {
        for m in &r.body.measurements {
            let c = m.constant.map_or("none".to_string(), |c| c.to_string());
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.notion, m.param, m.radius, c, m.max_possible, m.exhaustive
            ));
        }
    }
    out.push(("qc_constants.csv", s));

    let mut s = String::from("eps,k_identity,k_alpha\n");
    for (row, e) in report.karlsson.iter().zip(&report.eps_exact) {
        s.push_str(&format!("{},{},{}\n", csv_rational(e), row.identity, row.alpha));
    }
    out.push(("karlsson.csv", s));

    if let Some(eh) = &report.checks.ehull {
        let mut s = String::from("radius,checked,exact,violations\n");
        for p in eh {
            s.push_str(&format!(
                "{},{},{},{}\n",
                p.radius,
                p.report.checked,
                p.report.exact,
                p.report.violations.len()
            ));
        }
        out.push(("ehull.csv", s));
    }
    if let Some(p) = &report.checks.parabolic {
        let mut s = String::from("coset,rho,intersection,horosphere,class\n");
        for row in &p.report.rows {
            for (rho, c, t) in &row.counts {
                let class = serde_json::to_value(row.class).expect("class serializes");
                s.push_str(&format!("{},{},{},{},{}\n", row.coset, rho, c, t, class.as_str().unwrap_or("")));
            }
        }
        out.push(("parabolic.csv", s));
    }
    if let Some(q) = &report.checks.projection_qiso {
        let mut s = String::from("radius,edges,constant\n");
        for p in &q.per_radius {
            s.push_str(&format!("{},{},{}\n", p.radius, p.report.edges, p.report.constant));
        }
        out.push(("projection_qiso.csv", s));
    }
    out
}
