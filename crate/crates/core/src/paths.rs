//! Paths, distortion certificates and hulls in a Cayley ball.
//!
//! A path is `alpha`-distorted when every subpath `J` satisfies
//! `diam J <= alpha(d(endpoints of J))`. Hulls collect the vertices on such
//! paths joining points of a set.

use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::floyd::{DistortionFunction, FloydScale, FloydTable, Karlsson};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

/// A vertex sequence with consecutive vertices adjacent in the ball.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathRecord {
    vertices: Vec<u32>,
}

impl PathRecord {
    pub fn new(ball: &CayleyBall, vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Structural("empty path".into()));
        }
        for (i, w) in vertices.windows(2).enumerate() {
            if !ball.are_adjacent(w[0], w[1]) {
                return Err(Error::Structural(format!(
                    "path vertices {} and {} are not adjacent",
                    i,
                    i + 1
                )));
            }
        }
        Ok(PathRecord { vertices })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    /// Number of edges.
    pub fn length(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Normal forms, for JSON output.
    pub fn to_words(&self, ball: &CayleyBall) -> Vec<String> {
        self.vertices.iter().map(|&v| ball.format_vertex(v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum DistortionCertificate {
    Pass,
    /// The lexicographically least failing subinterval `[start, end]`.
    Fail {
        start: usize,
        end: usize,
        diam_interval: u64,
        diam_boundary: u32,
    },
}

impl DistortionCertificate {
    pub fn passed(&self) -> bool {
        matches!(self, DistortionCertificate::Pass)
    }
}

/// Cached `floor(alpha_n)` for the distances a ball can produce.
pub struct DistortionChecker {
    alpha: DistortionFunction,
    floor: Vec<u64>,
}

impl DistortionChecker {
    pub fn new(alpha: &DistortionFunction, max_distance: u32) -> Self {
        DistortionChecker {
            alpha: alpha.clone(),
            floor: alpha.floor_table(max_distance as u64),
        }
    }

    pub fn for_ball(alpha: &DistortionFunction, ball: &CayleyBall) -> Self {
        DistortionChecker::new(alpha, 2 * ball.radius())
    }

    pub fn alpha(&self) -> &DistortionFunction {
        &self.alpha
    }

    pub fn floor(&self, n: u32) -> u64 {
        match self.floor.get(n as usize) {
            Some(&x) => x,
            None => self.alpha.floor_at(n as u64),
        }
    }

    pub fn check(&self, ball: &CayleyBall, path: &[u32]) -> DistortionCertificate {
        // Lengths up to the path length can only fail if alpha is below them.
        let len = path.len() as u64;
        for i in 0..path.len() {
            let t = ball.distances_from(path[i]);
            for j in i + 1..path.len() {
                let span = (j - i) as u64;
                let d = t[path[j] as usize];
                if span > self.floor(d) {
                    return DistortionCertificate::Fail {
                        start: i,
                        end: j,
                        diam_interval: span,
                        diam_boundary: d,
                    };
                }
            }
            if len - i as u64 <= self.floor(0) {
                break;
            }
        }
        DistortionCertificate::Pass
    }
}

pub fn is_alpha_distorted(
    ball: &CayleyBall,
    path: &PathRecord,
    alpha: &DistortionFunction,
) -> DistortionCertificate {
    DistortionChecker::for_ball(alpha, ball).check(ball, path.vertices())
}

/// Union of all geodesic intervals `[x, y]` with `x, y` in `set`, as a
/// membership vector.
pub fn id_hull_mask(ball: &CayleyBall, set: &[u32]) -> Vec<bool> {
    let n = ball.vertex_count();
    let mut in_set = vec![false; n];
    for &x in set {
        in_set[x as usize] = true;
    }
    let masks: Vec<Vec<bool>> = set
        .par_iter()
        .map(|&x| {
            let dx = ball.distances_from(x);
            let maxd = dx.iter().copied().max().unwrap_or(0) as usize;
            let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); maxd + 1];
            for v in 0..n as u32 {
                buckets[dx[v as usize] as usize].push(v);
            }
            // good[w]: some geodesic from x through w ends in the set.
            let mut good = vec![false; n];
            for layer in buckets.iter().rev() {
                for &w in layer {
                    good[w as usize] = in_set[w as usize]
                        || ball.neighbors(w).any(|(u, _)| {
                            dx[u as usize] == dx[w as usize] + 1 && good[u as usize]
                        });
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

/// Sorted vertex list of the geodesic hull of `set`.
pub fn id_hull(ball: &CayleyBall, set: &[u32]) -> Vec<u32> {
    mask_to_list(&id_hull_mask(ball, set))
}

pub fn mask_to_list(mask: &[bool]) -> Vec<u32> {
    mask.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(v, _)| v as u32)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct HullWitness {
    pub from: u32,
    pub to: u32,
    pub path: Vec<u32>,
}

/// Inner approximation of the `alpha`-hull: each member comes with an
/// `alpha`-distorted witness path through it.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaHull {
    pub soundness: &'static str,
    pub members: Vec<u32>,
    pub witnesses: BTreeMap<u32, HullWitness>,
}

pub const SOUND_SUBSET: &str = "SOUND-SUBSET";

/// `w` is included iff for some `x, y` in `set` the concatenation
/// `lex_geodesic(x, w) . lex_geodesic(w, y)` is `alpha`-distorted.
pub fn alpha_hull_approx(ball: &CayleyBall, set: &[u32], alpha: &DistortionFunction) -> AlphaHull {
    let candidates: Vec<u32> = (0..ball.vertex_count() as u32).collect();
    alpha_hull_approx_within(ball, set, alpha, &candidates)
}

pub fn alpha_hull_approx_within(
    ball: &CayleyBall,
    set: &[u32],
    alpha: &DistortionFunction,
    candidates: &[u32],
) -> AlphaHull {
    let checker = DistortionChecker::for_ball(alpha, ball);
    let tables: Vec<Arc<[u32]>> = set.iter().map(|&x| ball.distances_from(x)).collect();
    let found: Vec<Option<HullWitness>> = candidates
        .par_iter()
        .map(|&w| {
            for (i, &x) in set.iter().enumerate() {
                for (j, &y) in set.iter().enumerate() {
                    let dxw = tables[i][w as usize];
                    let dwy = tables[j][w as usize];
                    let dxy = tables[i][y as usize];
                    if (dxw + dwy) as u64 > checker.floor(dxy) {
                        continue;
                    }
                    let mut path = ball.lex_geodesic(x, w);
                    path.extend(&ball.lex_geodesic(w, y)[1..]);
                    if checker.check(ball, &path).passed() {
                        return Some(HullWitness { from: x, to: y, path });
                    }
                }
            }
            None
        })
        .collect();
    let mut members = Vec::new();
    let mut witnesses = BTreeMap::new();
    for (&w, h) in candidates.iter().zip(found) {
        if let Some(h) = h {
            members.push(w);
            witnesses.insert(w, h);
        }
    }
    AlphaHull {
        soundness: SOUND_SUBSET,
        members,
        witnesses,
    }
}

/// Shortest path from `x` to `y` inside `allowed`, returned only if it is
/// `alpha`-distorted. Ties go to least-index steps.
pub fn constrained_alpha_path(
    ball: &CayleyBall,
    x: u32,
    y: u32,
    allowed: &[bool],
    alpha: &DistortionFunction,
) -> Option<PathRecord> {
    constrained_path_with(ball, x, y, allowed, &DistortionChecker::for_ball(alpha, ball))
}

pub fn constrained_path_with(
    ball: &CayleyBall,
    x: u32,
    y: u32,
    allowed: &[bool],
    checker: &DistortionChecker,
) -> Option<PathRecord> {
    if !allowed[x as usize] || !allowed[y as usize] {
        return None;
    }
    let n = ball.vertex_count();
    let mut dist = vec![u32::MAX; n];
    dist[y as usize] = 0;
    let mut q = VecDeque::from([y]);
    while let Some(u) = q.pop_front() {
        if u == x {
            break;
        }
        for (w, _) in ball.neighbors(u) {
            if allowed[w as usize] && dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[u as usize] + 1;
                q.push_back(w);
            }
        }
    }
    if dist[x as usize] == u32::MAX {
        return None;
    }
    let mut path = vec![x];
    let mut cur = x;
    while cur != y {
        let d = dist[cur as usize];
        cur = ball
            .neighbors(cur)
            .filter(|&(w, _)| allowed[w as usize] && dist[w as usize] != u32::MAX && dist[w as usize] + 1 == d)
            .map(|(w, _)| w)
            .min()
            .expect("BFS predecessor exists");
        path.push(cur);
    }
    if checker.check(ball, &path).passed() {
        Some(PathRecord { vertices: path })
    } else {
        None
    }
}

/// Radii `(r, s)` for hull locality: `r = K_alpha(eps)` and
/// `s = r + alpha(2r) / 2`.
pub fn hull_locality_radii(
    k: &Karlsson,
    eps: &BigRational,
) -> Result<(u64, BigRational)> {
    let r = k.eval(eps)?;
    let s = BigRational::from_integer(r.into()) + k.distortion().eval(2 * r) / BigRational::from_integer(2.into());
    Ok((r, s))
}

#[derive(Debug, Clone, Serialize)]
pub struct HullLocalityViolation {
    pub eps: String,
    pub basepoint: u32,
    pub vertex: u32,
    pub floyd_distance: String,
    pub distance: u32,
}

/// Checks that every `w` in `hull` satisfies `delta_a(w, set) <= eps` or
/// `d(a, w) <= s(eps)` for each `eps`, from one Dijkstra run at `a`.
pub fn check_hull_locality(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    k: &Karlsson,
    set: &[u32],
    hull: &[u32],
    basepoint: u32,
    eps: &[BigRational],
) -> Result<Vec<HullLocalityViolation>> {
    let radii = eps.iter().map(|e| hull_locality_radii(k, e)).collect::<Result<Vec<_>>>()?;
    let table = FloydTable::with_scale(ball, scale.clone(), basepoint);
    let to_set = table.distances_from_set(set);
    let da = ball.distances_from(basepoint);
    let mut out = Vec::new();
    for (e, (_, s)) in eps.iter().zip(&radii) {
        for &w in hull {
            let near = scale.cmp(to_set[w as usize], e) != std::cmp::Ordering::Greater;
            let close = BigRational::from_integer(da[w as usize].into()) <= *s;
            if !near && !close {
                out.push(HullLocalityViolation {
                    eps: crate::floyd::format_rational(e),
                    basepoint,
                    vertex: w,
                    floyd_distance: crate::floyd::format_rational(&scale.to_rational(to_set[w as usize])),
                    distance: da[w as usize],
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::BallConfig;
    use crate::groups::GroupSpec;
    use proptest::prelude::*;

    fn ball(spec: &str, r: u32) -> CayleyBall {
        CayleyBall::build(&GroupSpec::parse(spec).unwrap(), &BallConfig::new(r).margin(0)).unwrap()
    }

    fn words(b: &CayleyBall, ws: &[&str]) -> Vec<u32> {
        ws.iter().map(|w| b.vertex_of_word(w).unwrap()).collect()
    }

    #[test]
    fn backtrack_fails_with_whole_interval() {
        let b = ball("free(2)", 2);
        let p = PathRecord::new(&b, words(&b, &["1", "a", "1"])).unwrap();
        let c = is_alpha_distorted(&b, &p, &DistortionFunction::Identity);
        assert_eq!(
            c,
            DistortionCertificate::Fail { start: 0, end: 2, diam_interval: 2, diam_boundary: 0 }
        );
    }

    #[test]
    fn geodesics_are_identity_distorted() {
        let b = ball("abelian(2)", 3);
        let y = b.vertex_of_word("a^2 b").unwrap();
        let p = PathRecord::new(&b, b.lex_geodesic(0, y)).unwrap();
        assert!(is_alpha_distorted(&b, &p, &DistortionFunction::Identity).passed());
    }

    #[test]
    fn non_adjacent_steps_are_structural_errors() {
        let b = ball("free(2)", 2);
        let err = PathRecord::new(&b, words(&b, &["1", "a^2"])).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn z2_hull_of_corners_is_rectangle() {
        let b = ball("abelian(2)", 4);
        let h = id_hull(&b, &words(&b, &["1", "a^2 b^2"]));
        assert_eq!(h.len(), 9);
    }

    #[test]
    fn alpha_hull_picks_up_short_detours() {
        let b = ball("free(2)", 4);
        let set = words(&b, &["1", "b^2"]);
        let alpha = DistortionFunction::parse("affine(2,2)").unwrap();
        let h = alpha_hull_approx(&b, &set, &alpha);
        let a = b.vertex_of_word("a").unwrap();
        assert!(h.members.contains(&a));
        let w = &h.witnesses[&a];
        assert!(is_alpha_distorted(&b, &PathRecord::new(&b, w.path.clone()).unwrap(), &alpha).passed());
        assert_eq!(h.soundness, SOUND_SUBSET);
    }

    #[test]
    fn alpha_hull_with_identity_equals_geodesic_hull() {
        let b = ball("product(abelian(a,b),free(c))", 3);
        let set = words(&b, &["1", "a b", "c a", "b^-1 c^-1"]);
        let h = alpha_hull_approx(&b, &set, &DistortionFunction::Identity);
        assert_eq!(h.members, id_hull(&b, &set));
    }

    #[test]
    fn constrained_path_respects_allowed_set() {
        let b = ball("abelian(2)", 3);
        let x = b.vertex_of_word("1").unwrap();
        let y = b.vertex_of_word("a^2").unwrap();
        let mut allowed = vec![false; b.vertex_count()];
        for w in words(&b, &["1", "b", "a b", "a^2 b", "a^2"]) {
            allowed[w as usize] = true;
        }
        let id = DistortionFunction::Identity;
        assert!(constrained_alpha_path(&b, x, y, &allowed, &id).is_none());
        let p = constrained_alpha_path(&b, x, y, &allowed, &DistortionFunction::parse("affine(2,0)").unwrap()).unwrap();
        assert_eq!(p.length(), 4);
        allowed[b.vertex_of_word("a").unwrap() as usize] = true;
        assert_eq!(constrained_alpha_path(&b, x, y, &allowed, &id).unwrap().length(), 2);
    }

    /// Exhaustive check over all O(n^2) subintervals without early exits.
    #[test]
    fn hull_locality_holds_over_the_grid() {
        use crate::floyd::{eps_grid, rational, ScalingFunction};
        let b = ball("free(2)", 6);
        let f = ScalingFunction::exponential(rational(1, 2)).unwrap();
        let alpha = DistortionFunction::parse("affine(2,2)").unwrap();
        let k = Karlsson::new(&f, &alpha).unwrap();
        let scale = Arc::new(FloydScale::for_ball(&b, &f).unwrap());
        let set = words(&b, &["1", "a b", "a^2 b^2"]);
        let hull = alpha_hull_approx(&b, &set, &alpha);
        let grid = eps_grid(&f, -2, 6);
        for w in ["1", "a", "b^-2", "a^2 b^-1", "b a^3"] {
            let a = b.vertex_of_word(w).unwrap();
            let v = check_hull_locality(&b, &scale, &k, &set, &hull.members, a, &grid).unwrap();
            assert!(v.is_empty(), "{v:?}");
        }
        let (r, s) = hull_locality_radii(&k, &grid[0]).unwrap();
        assert!(BigRational::from_integer(r.into()) <= s);
    }

    fn oracle_certificate(b: &CayleyBall, p: &[u32], alpha: &DistortionFunction) -> DistortionCertificate {
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let d = b.distance(p[i], p[j]);
                if BigRational::from_integer(((j - i) as i64).into()) > alpha.eval(d as u64) {
                    return DistortionCertificate::Fail { start: i, end: j, diam_interval: (j - i) as u64, diam_boundary: d };
                }
            }
        }
        DistortionCertificate::Pass
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn certificate_matches_oracle(steps in prop::collection::vec(0u32..4, 0..12), which in 0usize..3) {
            let b = ball("free(2)", 6);
            let alphas = ["id", "affine(2,1)", "quadratic(1,1,0)"];
            let alpha = DistortionFunction::parse(alphas[which]).unwrap();
            let mut p = vec![0u32];
            for s in steps {
                let cur = *p.last().unwrap();
                let nb: Vec<u32> = b.neighbors(cur).map(|x| x.0).collect();
                p.push(nb[s as usize % nb.len()]);
            }
            let rec = PathRecord::new(&b, p.clone()).unwrap();
            prop_assert_eq!(is_alpha_distorted(&b, &rec, &alpha), oracle_certificate(&b, &p, &alpha));
        }

        #[test]
        fn subpaths_inherit_distortion(steps in prop::collection::vec(0u32..4, 1..10), cut in 0usize..10) {
            let b = ball("free(2)", 5);
            let alpha = DistortionFunction::parse("affine(2,2)").unwrap();
            let mut p = vec![0u32];
            for s in steps {
                let cur = *p.last().unwrap();
                let nb: Vec<u32> = b.neighbors(cur).map(|x| x.0).collect();
                p.push(nb[s as usize % nb.len()]);
            }
            if is_alpha_distorted(&b, &PathRecord::new(&b, p.clone()).unwrap(), &alpha).passed() {
                let c = cut % p.len();
                let sub = PathRecord::new(&b, p[c..].to_vec()).unwrap();
                prop_assert!(is_alpha_distorted(&b, &sub, &alpha).passed());
            }
        }

        #[test]
        fn id_hull_matches_pairwise_definition(picks in prop::collection::vec(0u32..200, 1..5)) {
            let b = ball("product(abelian(a,b),free(c))", 3);
            let n = b.vertex_count() as u32;
            let mut set: Vec<u32> = picks.into_iter().map(|v| v % n).collect();
            set.sort();
            set.dedup();
            let h = id_hull(&b, &set);
            let mut expect = Vec::new();
            for w in 0..n {
                if set.iter().any(|&x| set.iter().any(|&y| b.on_geodesic(x, w, y))) {
                    expect.push(w);
                }
            }
            prop_assert_eq!(h, expect);
        }
    }
}
