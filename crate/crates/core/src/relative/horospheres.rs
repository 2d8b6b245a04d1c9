use crate::cayley::{BallConfig, CayleyBall};
use crate::error::{Error, Result};
use crate::groups::{Element, GroupSpec, PeripheralSpec};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// One peripheral coset `rep * P` seen inside the ball.
#[derive(Debug, Clone)]
pub struct Horosphere {
    /// `rep<labels>`, with `rep` the shortlex-least element of the coset.
    pub id: String,
    /// Index into the peripheral leaves.
    pub factor: usize,
    pub representative: Element,
    pub rep_vertex: u32,
    /// `rep * P` intersected with the ball.
    pub core: Vec<u32>,
    /// `N_r(core)` for the system's thickening `r`; sorted.
    pub members: Vec<u32>,
}

/// Horospheres indexed by coset, plus the inverse vertex map.
#[derive(Debug, Clone)]
pub struct HorosphereSystem {
    peripheral: PeripheralSpec,
    thickening: u32,
    entries: Vec<Horosphere>,
    by_vertex: Vec<Vec<u32>>,
}

pub fn build_horospheres(
    ball: &CayleyBall,
    peripheral: &PeripheralSpec,
    thickening: u32,
) -> Result<HorosphereSystem> {
    let leaves = ball.spec().leaves();
    for leaf in peripheral.leaves() {
        if leaf.path.is_empty() || !leaves.contains(leaf) {
            return Err(Error::Config(format!(
                "peripheral factor `{}` is not a free-product leaf of {}",
                leaf.labels.join(","),
                ball.spec()
            )));
        }
    }
    let spec = ball.spec();
    let mut cosets: BTreeMap<(u32, usize), Vec<u32>> = BTreeMap::new();
    for (fi, leaf) in peripheral.leaves().iter().enumerate() {
        for v in 0..ball.vertex_count() as u32 {
            let (rep, _) = spec.split_leaf_suffix(ball.element(v), leaf);
            let rv = ball
                .index_of(&rep)
                .expect("coset representative is no longer than the element");
            cosets.entry((rv, fi)).or_default().push(v);
        }
    }
    let mut entries = Vec::with_capacity(cosets.len());
    let mut by_vertex = vec![Vec::new(); ball.vertex_count()];
    for ((rv, fi), core) in cosets {
        let leaf = &peripheral.leaves()[fi];
        let members = if thickening == 0 {
            core.clone()
        } else {
            ball.neighborhood(&core, thickening)
        };
        let idx = entries.len() as u32;
        for &m in &members {
            by_vertex[m as usize].push(idx);
        }
        entries.push(Horosphere {
            id: format!("{}<{}>", ball.format_vertex(rv), leaf.labels.join(";")),
            factor: fi,
            representative: ball.element(rv).clone(),
            rep_vertex: rv,
            core,
            members,
        });
    }
    Ok(HorosphereSystem {
        peripheral: peripheral.clone(),
        thickening,
        entries,
        by_vertex,
    })
}

impl HorosphereSystem {
    pub fn empty(ball: &CayleyBall) -> Self {
        HorosphereSystem {
            peripheral: PeripheralSpec::empty(),
            thickening: 0,
            entries: Vec::new(),
            by_vertex: vec![Vec::new(); ball.vertex_count()],
        }
    }

    pub fn peripheral(&self) -> &PeripheralSpec {
        &self.peripheral
    }

    pub fn thickening(&self) -> u32 {
        self.thickening
    }

    pub fn entries(&self) -> &[Horosphere] {
        &self.entries
    }

    pub fn entry(&self, p: u32) -> &Horosphere {
        &self.entries[p as usize]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Horospheres containing `v`, in id order.
    pub fn containing(&self, v: u32) -> &[u32] {
        &self.by_vertex[v as usize]
    }

    pub fn find(&self, id: &str) -> Option<u32> {
        self.entries.iter().position(|h| h.id == id).map(|p| p as u32)
    }

    /// The least horosphere containing both vertices.
    pub fn common(&self, u: u32, v: u32) -> Option<u32> {
        let (a, b) = (self.containing(u), self.containing(v));
        a.iter().copied().find(|p| b.binary_search(p).is_ok())
    }

    /// Horospheres meeting the trusted region.
    pub fn relevant(&self, ball: &CayleyBall) -> Vec<u32> {
        (0..self.entries.len() as u32)
            .filter(|&p| self.entries[p as usize].members.iter().any(|&v| ball.is_trusted(v)))
            .collect()
    }
}

/// `Pr_set(b)`: all points of `set` nearest to `b`.
/// Small sets read distances from their own cached tables.
pub fn tie_set(ball: &CayleyBall, set: &[u32], b: u32) -> Vec<u32> {
    let d: Vec<u32> = if set.len() <= 16 {
        set.iter().map(|&v| ball.distance(v, b)).collect()
    } else {
        let t = ball.distances_from(b);
        set.iter().map(|&v| t[v as usize]).collect()
    };
    let m = d.iter().copied().min().unwrap_or(u32::MAX);
    set.iter().zip(&d).filter(|(_, &x)| x == m).map(|(&v, _)| v).collect()
}

pub fn set_diameter(ball: &CayleyBall, set: &[u32]) -> u32 {
    let mut best = 0;
    for (i, &x) in set.iter().enumerate() {
        if i + 1 == set.len() {
            break;
        }
        let d = ball.distances_from(x);
        for &y in &set[i + 1..] {
            best = best.max(d[y as usize]);
        }
    }
    best
}

fn union_diameter(ball: &CayleyBall, parts: impl IntoIterator<Item = Vec<u32>>) -> u32 {
    let all: BTreeSet<u32> = parts.into_iter().flatten().collect();
    set_diameter(ball, &all.into_iter().collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub first: String,
    pub second: String,
    pub value: u32,
}

/// Finite-scale horosphere axioms. Maxima range over horospheres meeting the
/// trusted region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorosphereAxioms {
    pub radius: u32,
    pub thickening: u32,
    pub horospheres: usize,
    pub relevant: usize,
    /// Most horospheres through one trusted vertex.
    pub max_multiplicity: usize,
    /// `max diam(S_p cap S_q)` over distinct pairs.
    pub max_intersection_diameter: u32,
    /// `max diam Pr_{S_p} S_q` over distinct pairs.
    pub max_projection_diameter: u32,
    /// `max diam Pr_{S_p}{u, w}` over trusted edges.
    pub max_edge_projection: u32,
    /// Distinct pairs at distance at most 1, per trusted vertex.
    pub near_pairs: usize,
    pub near_pairs_per_vertex: f64,
    pub projection_witness: Option<Witness>,
}

pub fn horosphere_axioms_report(ball: &CayleyBall, system: &HorosphereSystem) -> HorosphereAxioms {
    use rayon::prelude::*;
    let relevant = system.relevant(ball);
    let is_rel: BTreeSet<u32> = relevant.iter().copied().collect();
    let max_multiplicity = ball
        .trusted_vertices()
        .map(|v| system.containing(v).len())
        .max()
        .unwrap_or(0);

    let mut max_intersection_diameter = 0;
    let mut shared: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
    for v in 0..ball.vertex_count() as u32 {
        let c = system.containing(v);
        for (i, &p) in c.iter().enumerate() {
            for &q in &c[i + 1..] {
                if is_rel.contains(&p) && is_rel.contains(&q) {
                    shared.entry((p, q)).or_default().push(v);
                }
            }
        }
    }
    for set in shared.values() {
        max_intersection_diameter = max_intersection_diameter.max(set_diameter(ball, set));
    }

    let per_p: Vec<(Option<Witness>, u32, usize)> = relevant
        .par_iter()
        .map(|&p| {
            let sp = &system.entry(p).members;
            let mut witness: Option<Witness> = None;
            for &q in &relevant {
                if q == p {
                    continue;
                }
                let sq = &system.entry(q).members;
                let d = union_diameter(ball, sq.iter().map(|&b| tie_set(ball, sp, b)));
                if witness.as_ref().map_or(true, |w| d > w.value) {
                    witness = Some(Witness {
                        first: system.entry(p).id.clone(),
                        second: system.entry(q).id.clone(),
                        value: d,
                    });
                }
            }
            let mut edge = 0;
            for u in ball.trusted_vertices() {
                for (w, _) in ball.neighbors(u) {
                    if w > u && ball.is_trusted(w) {
                        edge = edge.max(union_diameter(ball, [tie_set(ball, sp, u), tie_set(ball, sp, w)]));
                    }
                }
            }
            let mut near = BTreeSet::new();
            for v in ball.neighborhood(sp, 1) {
                for &q in system.containing(v) {
                    if q > p && is_rel.contains(&q) {
                        near.insert(q);
                    }
                }
            }
            (witness, edge, near.len())
        })
        .collect();

    let mut max_projection_diameter = 0;
    let mut projection_witness: Option<Witness> = None;
    let mut max_edge_projection = 0;
    let mut near_pairs = 0;
    for (w, edge, near) in per_p {
        if let Some(w) = w {
            if projection_witness.as_ref().map_or(true, |b| w.value > b.value) {
                max_projection_diameter = w.value;
                projection_witness = Some(w);
            }
        }
        max_edge_projection = max_edge_projection.max(edge);
        near_pairs += near;
    }
    let trusted = ball.trusted_vertices().len().max(1);
    HorosphereAxioms {
        radius: ball.radius(),
        thickening: system.thickening(),
        horospheres: system.len(),
        relevant: relevant.len(),
        max_multiplicity,
        max_intersection_diameter,
        max_projection_diameter,
        max_edge_projection,
        near_pairs,
        near_pairs_per_vertex: near_pairs as f64 / trusted as f64,
        projection_witness,
    }
}

/// Axioms at radii `R - 1` and `R`.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomStability {
    pub lower: HorosphereAxioms,
    pub upper: HorosphereAxioms,
    pub stable: bool,
}

pub fn horosphere_axioms_stability(
    spec: &GroupSpec,
    peripheral: &PeripheralSpec,
    thickening: u32,
    config: &BallConfig,
) -> Result<AxiomStability> {
    if config.radius == 0 {
        return Err(Error::Config("stability needs radius at least 1".into()));
    }
    let mut lower_cfg = config.clone();
    lower_cfg.radius -= 1;
    lower_cfg.margin = lower_cfg.margin.min(lower_cfg.radius);
    let at = |cfg: &BallConfig| -> Result<HorosphereAxioms> {
        let ball = CayleyBall::build(spec, cfg)?;
        let system = build_horospheres(&ball, peripheral, thickening)?;
        Ok(horosphere_axioms_report(&ball, &system))
    };
    let lower = at(&lower_cfg)?;
    let upper = at(config)?;
    let stable = lower.max_multiplicity == upper.max_multiplicity
        && lower.max_intersection_diameter == upper.max_intersection_diameter
        && lower.max_projection_diameter == upper.max_projection_diameter;
    Ok(AxiomStability { lower, upper, stable })
}
