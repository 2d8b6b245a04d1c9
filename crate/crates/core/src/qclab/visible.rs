use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::floyd::{format_rational, FloydScale, FloydTable, Karlsson};
use crate::paths::id_hull_mask;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::sync::Arc;

/// Exact `diam_{delta_a} F`, one uncached Dijkstra per point of `F` but the
/// last.
pub fn floyd_set_diameter(ball: &CayleyBall, scale: &Arc<FloydScale>, a: u32, set: &[u32]) -> u128 {
    let table = FloydTable::with_scale(ball, scale.clone(), a);
    let mut best = 0;
    for (i, &x) in set.iter().enumerate().take(set.len().saturating_sub(1)) {
        let d = table.distances_from_set(&[x]);
        for &y in &set[i + 1..] {
            best = best.max(d[y as usize]);
        }
    }
    best
}

/// `V_eps F`: trusted `a` with `diam_{delta_a} F >= eps`.
pub fn visible_hull(ball: &CayleyBall, scale: &Arc<FloydScale>, set: &[u32], eps: &BigRational) -> Result<Vec<u32>> {
    if set.is_empty() {
        return Err(Error::Input("visible hull of an empty set".into()));
    }
    let trusted: Vec<u32> = ball.trusted_vertices().collect();
    let keep: Vec<bool> = trusted
        .par_iter()
        .map(|&a| scale.cmp(floyd_set_diameter(ball, scale, a, set), eps) != Ordering::Less)
        .collect();
    Ok(trusted.into_iter().zip(keep).filter(|(_, k)| *k).map(|(a, _)| a).collect())
}

/// Upper bounds on `diam_{delta_a} F` from the geometry of `id_hull F`.
///
/// Every pair of `F` is joined by a geodesic of length at most `L` inside the
/// hull. If `a` is at distance `h` from the hull and `i0` is the index of a
/// nearest vertex of that geodesic, the vertex at index `i` is at distance at
/// least `max(h, ceil(|i - i0| / 2))` from `a`, so the Floyd length is at
/// most `bound[h]`.
pub struct HullBound {
    pub hull_distance: Vec<u32>,
    pub span: u32,
    bound: Vec<u128>,
}

impl HullBound {
    pub fn new(ball: &CayleyBall, scale: &FloydScale, set: &[u32]) -> Self {
        let hull: Vec<u32> = crate::paths::mask_to_list(&id_hull_mask(ball, set));
        let hull_distance = ball.distances_to_set(&hull);
        let span = crate::relative::set_diameter(ball, set);
        let top = 2 * ball.radius();
        let w = |n: u32| scale.weight(n.min(top));
        let bound = (0..=top)
            .map(|h| {
                (0..=span)
                    .map(|i0| {
                        (0..span)
                            .map(|i| {
                                let t = (i.abs_diff(i0)).min((i + 1).abs_diff(i0));
                                w(h.max(t.div_ceil(2)))
                            })
                            .sum::<u128>()
                    })
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        HullBound {
            hull_distance,
            span,
            bound,
        }
    }

    pub fn at(&self, a: u32) -> u128 {
        let h = self.hull_distance[a as usize] as usize;
        self.bound[h.min(self.bound.len() - 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisibleMode {
    /// Every trusted vertex is a candidate; constants are exact.
    Exhaustive,
    /// Only hull members are candidates; constants are lower bounds.
    LowerBound,
}

/// Per-`eps` result: the largest `d(a, F)` over `a` found in `V_eps F`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VisibleEntry {
    pub eps: String,
    pub constant: u32,
    pub witness: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VisibleTable {
    pub mode: VisibleMode,
    pub evaluated: usize,
    pub skipped: usize,
    pub entries: Vec<VisibleEntry>,
}

/// Walks candidates by decreasing `d(a, F)` and settles each `eps` at the
/// first candidate whose Floyd diameter reaches it. `work_budget` caps
/// `candidates * (|F| - 1) * |ball|`; over budget the walk is restricted to
/// hull members.
pub fn visible_table(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    set: &[u32],
    eps: &[BigRational],
    work_budget: u64,
) -> Result<VisibleTable> {
    if set.is_empty() {
        return Err(Error::Input("visible hull of an empty set".into()));
    }
    let bounds = HullBound::new(ball, scale, set);
    let df = ball.distances_to_set(set);
    let min_eps = eps.iter().min().cloned();
    let trusted: Vec<u32> = ball.trusted_vertices().collect();
    let passing = |a: &u32| min_eps.as_ref().is_some_and(|e| scale.cmp(bounds.at(*a), e) != Ordering::Less);
    let work = trusted.iter().filter(|a| passing(a)).count() as u64
        * set.len().saturating_sub(1) as u64
        * ball.vertex_count() as u64;
    let mode = if work <= work_budget {
        VisibleMode::Exhaustive
    } else {
        VisibleMode::LowerBound
    };
    let mut candidates: Vec<u32> = match mode {
        VisibleMode::Exhaustive => trusted,
        VisibleMode::LowerBound => trusted.into_iter().filter(|&a| bounds.hull_distance[a as usize] == 0).collect(),
    };
    candidates.sort_by_key(|&a| (std::cmp::Reverse(df[a as usize]), a));

    let mut settled: Vec<Option<(u32, u32)>> = vec![None; eps.len()];
    let mut table = VisibleTable {
        mode,
        evaluated: 0,
        skipped: 0,
        entries: Vec::new(),
    };
    let mut spent = 0u64;
    let per_eval = set.len().saturating_sub(1) as u64 * ball.vertex_count() as u64;
    for &a in &candidates {
        let open: Vec<usize> = (0..eps.len()).filter(|&i| settled[i].is_none()).collect();
        if open.is_empty() {
            break;
        }
        let ub = bounds.at(a);
        if open.iter().all(|&i| scale.cmp(ub, &eps[i]) == Ordering::Less) {
            table.skipped += 1;
            continue;
        }
        if mode == VisibleMode::LowerBound && spent > work_budget {
            break;
        }
        spent += per_eval;
        table.evaluated += 1;
        let diam = floyd_set_diameter(ball, scale, a, set);
        for i in open {
            if scale.cmp(diam, &eps[i]) != Ordering::Less {
                settled[i] = Some((df[a as usize], a));
            }
        }
    }
    table.entries = eps
        .iter()
        .zip(settled)
        .map(|(e, s)| VisibleEntry {
            eps: format_rational(e),
            constant: s.map_or(0, |(d, _)| d),
            witness: s.map(|(_, a)| a),
        })
        .collect();
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EHullViolation {
    pub eps: String,
    pub vertex: u32,
    pub hull_distance: u32,
    pub karlsson: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EHullReport {
    pub checked: usize,
    /// Vertices whose Floyd diameter had to be computed exactly.
    pub exact: usize,
    pub violations: Vec<EHullViolation>,
}

/// `V_eps F ⊆ N_{K(eps)}(id_hull F)` on trusted vertices for every `eps`.
pub fn ehull_check(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    k: &Karlsson,
    set: &[u32],
    eps: &[BigRational],
) -> Result<EHullReport> {
    if set.is_empty() {
        return Err(Error::Input("visible hull of an empty set".into()));
    }
    let bounds = HullBound::new(ball, scale, set);
    let radii: Vec<u64> = eps.iter().map(|e| k.eval(e)).collect::<Result<_>>()?;
    let trusted: Vec<u32> = ball.trusted_vertices().collect();
    let suspects: Vec<(u32, Vec<usize>)> = trusted
        .iter()
        .filter_map(|&a| {
            let h = bounds.hull_distance[a as usize];
            let ub = bounds.at(a);
            let idx: Vec<usize> = (0..eps.len())
                .filter(|&i| h as u64 > radii[i] && scale.cmp(ub, &eps[i]) != Ordering::Less)
                .collect();
            (!idx.is_empty()).then_some((a, idx))
        })
        .collect();
    let found: Vec<Vec<EHullViolation>> = suspects
        .par_iter()
        .map(|(a, idx)| {
            let diam = floyd_set_diameter(ball, scale, *a, set);
            idx.iter()
                .filter(|&&i| scale.cmp(diam, &eps[i]) != Ordering::Less)
                .map(|&i| EHullViolation {
                    eps: format_rational(&eps[i]),
                    vertex: *a,
                    hull_distance: bounds.hull_distance[*a as usize],
                    karlsson: radii[i],
                })
                .collect()
        })
        .collect();
    Ok(EHullReport {
        checked: trusted.len(),
        exact: suspects.len(),
        violations: found.into_iter().flatten().collect(),
    })
}
