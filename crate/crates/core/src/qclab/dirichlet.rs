use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::groups::SubgroupSpec;
use crate::relative::{set_diameter, tie_set, HorosphereSystem};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

/// `H . v` inside the ball, by BFS over the symmetric generators of `H`
/// without leaving the ball. Sorted.
pub fn orbit_in_ball(ball: &CayleyBall, h: &SubgroupSpec, v: u32) -> Vec<u32> {
    let spec = ball.spec();
    let mut seen = BTreeSet::from([v]);
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        for g in h.symmetric_generators() {
            let e = spec.multiply(g, ball.element(u));
            if let Some(w) = ball.index_of(&e) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
    }
    seen.into_iter().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DirichletSet {
    pub center: u32,
    pub orbit: Vec<u32>,
    /// Trusted vertices with `d(x, O) = d(x, v)`.
    pub members: Vec<u32>,
    /// The same rule over the whole ball.
    #[serde(skip)]
    pub mask: Vec<bool>,
    /// Nearest orbit points of trusted vertices all lie in the ball.
    pub exact: bool,
}

impl DirichletSet {
    pub fn contains(&self, x: u32) -> bool {
        self.mask[x as usize]
    }
}

pub fn dirichlet(ball: &CayleyBall, orbit: &[u32], v: u32) -> Result<DirichletSet> {
    if !orbit.contains(&v) {
        return Err(Error::Input(format!("center {} is not in the orbit", ball.format_vertex(v))));
    }
    let dorb = ball.distances_to_set(orbit);
    let dv = ball.distances_from(v);
    let mask: Vec<bool> = dorb.iter().zip(dv.iter()).map(|(a, b)| a == b).collect();
    let members = ball.trusted_vertices().filter(|&x| mask[x as usize]).collect();
    let mut orbit = orbit.to_vec();
    orbit.sort_unstable();
    Ok(DirichletSet {
        center: v,
        orbit,
        members,
        mask,
        exact: ball.radius() >= 2 * ball.trust_radius() + ball.dist0(v),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarConvexity {
    pub holds: bool,
    pub checked: usize,
    /// `(w, t)` with `t` on a geodesic from `w` to the center but outside the set.
    pub witness: Option<(String, String)>,
}

/// Every vertex of every geodesic from a member to the center is a member.
pub fn check_star_convex(ball: &CayleyBall, d: &DirichletSet) -> StarConvexity {
    let dv = ball.distances_from(d.center);
    let mut out = StarConvexity {
        holds: true,
        checked: d.members.len(),
        witness: None,
    };
    for &w in &d.members {
        let mut seen = HashSet::from([w]);
        let mut stack = vec![w];
        while let Some(u) = stack.pop() {
            if !d.contains(u) {
                out.holds = false;
                out.witness = Some((ball.format_vertex(w), ball.format_vertex(u)));
                return out;
            }
            for (t, _) in ball.neighbors(u) {
                if dv[t as usize] + 1 == dv[u as usize] && seen.insert(t) {
                    stack.push(t);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoveringReport {
    pub inner_radius: u32,
    pub translates: usize,
    pub checked: usize,
    pub complete: bool,
    pub uncovered: Vec<String>,
    /// Number of translates containing a vertex, histogrammed.
    pub multiplicity: BTreeMap<usize, usize>,
}

/// Checks that the inner ball is covered by `h . F_v` for `h in H` with
/// `h v` in the ball. `x` is in `h F_v` iff `h^-1 x` is a member.
pub fn check_fundamental(ball: &CayleyBall, d: &DirichletSet, h: &SubgroupSpec) -> CoveringReport {
    let spec = ball.spec();
    let vinv = spec.invert(ball.element(d.center));
    let orbit = orbit_in_ball(ball, h, d.center);
    let inverses: Vec<_> = orbit
        .iter()
        .map(|&o| spec.invert(&spec.multiply(ball.element(o), &vinv)))
        .collect();
    let inner = ball.trust_radius();
    let mut report = CoveringReport {
        inner_radius: inner,
        translates: orbit.len(),
        checked: 0,
        complete: true,
        uncovered: Vec::new(),
        multiplicity: BTreeMap::new(),
    };
    for x in ball.trusted_vertices().filter(|&x| ball.dist0(x) <= inner) {
        report.checked += 1;
        let count = inverses
            .iter()
            .filter(|hinv| {
                ball.index_of(&spec.multiply(hinv, ball.element(x)))
                    .is_some_and(|y| d.contains(y) && ball.is_trusted(y))
            })
            .count();
        *report.multiplicity.entry(count).or_default() += 1;
        if count == 0 {
            report.complete = false;
            if report.uncovered.len() < 16 {
                report.uncovered.push(ball.format_vertex(x));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirichletProjection {
    /// Cosets whose horosphere holds at least two orbit points.
    pub parabolic: usize,
    pub constant: u32,
    pub witness: Option<String>,
    /// The same maximum over every horosphere meeting the trusted region.
    pub relevant: usize,
    pub relevant_max: u32,
}

/// `max diam Pr_{S_p} F_v`.
pub fn dirichlet_projection_bound(ball: &CayleyBall, d: &DirichletSet, system: &HorosphereSystem) -> DirichletProjection {
    let orbit: HashSet<u32> = d.orbit.iter().copied().collect();
    let mut out = DirichletProjection {
        parabolic: 0,
        constant: 0,
        witness: None,
        relevant: 0,
        relevant_max: 0,
    };
    for p in system.relevant(ball) {
        let h = system.entry(p);
        let all: BTreeSet<u32> = d.members.iter().flat_map(|&x| tie_set(ball, &h.members, x)).collect();
        let diam = set_diameter(ball, &all.into_iter().collect::<Vec<_>>());
        out.relevant += 1;
        out.relevant_max = out.relevant_max.max(diam);
        if h.members.iter().filter(|v| orbit.contains(v)).count() >= 2 {
            out.parabolic += 1;
            if diam > out.constant || out.witness.is_none() {
                out.constant = out.constant.max(diam);
                out.witness = Some(h.id.clone());
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Intersection {
    Finite,
    FiniteIndex,
    /// Neither bounded nor proportional to the horosphere.
    Intermediate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParabolicRow {
    pub coset: String,
    /// `(rho, |S_p ∩ N_q O ∩ B_rho|, |S_p ∩ B_rho|)` at `rho = R - 1, R`.
    pub counts: Vec<(u32, usize, usize)>,
    pub ratio: f64,
    pub class: Intersection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParabolicReport {
    pub q: u32,
    pub finite_index_ratio: f64,
    pub rows: Vec<ParabolicRow>,
    pub overall: Intersection,
    /// Every row is finite or finite-index.
    pub satisfies_condition: bool,
}

/// Classifies `H ∩ St p` per coset from the growth of the intersection
/// counts between radii `R - 1` and `R`: constant counts are finite, a
/// density ratio of at least `finite_index_ratio` is finite index.
pub fn parabolic_intersection_report(
    ball: &CayleyBall,
    h: &SubgroupSpec,
    system: &HorosphereSystem,
    q: u32,
    finite_index_ratio: f64,
) -> ParabolicReport {
    let orbit = orbit_in_ball(ball, h, 0);
    let near: Vec<bool> = ball.distances_to_set(&orbit).iter().map(|&d| d <= q).collect();
    let r = ball.radius();
    let mut rows = Vec::new();
    for s in system.entries() {
        let counts: Vec<(u32, usize, usize)> = [r.saturating_sub(1), r]
            .iter()
            .map(|&rho| {
                let inside: Vec<u32> = s.members.iter().copied().filter(|&v| ball.dist0(v) <= rho).collect();
                (rho, inside.iter().filter(|&&v| near[v as usize]).count(), inside.len())
            })
            .collect();
        let (c0, s0, c1, s1) = (counts[0].1, counts[0].2, counts[1].1, counts[1].2);
        if c0 == 0 {
            continue;
        }
        let ratio = (c1 as f64 / s1 as f64) / (c0 as f64 / s0 as f64);
        let class = if c0 == c1 {
            Intersection::Finite
        } else if ratio >= finite_index_ratio {
            Intersection::FiniteIndex
        } else {
            Intersection::Intermediate
        };
        rows.push(ParabolicRow {
            coset: s.id.clone(),
            counts,
            ratio,
            class,
        });
    }
    let overall = rows.iter().map(|r| r.class).max_by_key(|c| match c {
        Intersection::Finite => 0,
        Intersection::FiniteIndex => 1,
        Intersection::Intermediate => 2,
    });
    let overall = overall.unwrap_or(Intersection::Finite);
    ParabolicReport {
        q,
        finite_index_ratio,
        rows,
        satisfies_condition: overall != Intersection::Intermediate,
        overall,
    }
}
