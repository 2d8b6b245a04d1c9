//! Floyd metrics on Cayley balls, appropriateness of scaling/distortion
//! pairs and Karlsson functions.
//!
//! The Floyd length of an edge `{u, w}` based at `a` is
//! `f(min(d(a, u), d(a, w)))` and the Floyd distance is the least length of
//! a joining path. All metric values are exact rationals; floats appear only
//! in reports.

mod functions;
mod karlsson;
mod metric;

pub use functions::{
    format_rational, int, parse_rational, rational, to_f64, DistortionFunction, ScalingFunction,
};
pub use karlsson::{
    is_appropriate, karlsson, karlsson_table, lambda0, AppropriatenessCertificate,
    AppropriatenessTest, Karlsson, Tail,
};
pub use metric::{
    base_change, floyd_diameter, floyd_distance, write_floyd_csv, BaseChange, FloydScale,
    FloydTable, UNREACHED,
};

use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::paths::DistortionChecker;
use num_rational::BigRational;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A sampled pair: basepoint and an `alpha`-distorted path.
#[derive(Debug, Clone)]
pub struct KarlssonSample {
    pub basepoint: u32,
    pub path: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KarlssonViolation {
    pub basepoint: u32,
    pub path: Vec<u32>,
    pub distance: u32,
    pub karlsson: u64,
    pub floyd_length: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct KarlssonReport {
    pub samples: usize,
    /// Degenerate single-vertex paths, which hold trivially.
    pub trivial: usize,
    pub violations: Vec<KarlssonViolation>,
    /// Samples whose Floyd length exceeds twice the tail at `d(v, Im path)`.
    pub tail_violations: usize,
    /// `K(length) - d(v, Im path)` histogram.
    pub slack: BTreeMap<i64, usize>,
}

/// Checks `d(v, Im path) <= K(length_v(path))` on every sample.
pub fn verify_karlsson(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    k: &Karlsson,
    samples: &[KarlssonSample],
) -> Result<KarlssonReport> {
    let checker = DistortionChecker::for_ball(k.distortion(), ball);
    let mut report = KarlssonReport {
        samples: samples.len(),
        ..Default::default()
    };
    for s in samples {
        crate::paths::PathRecord::new(ball, s.path.clone())?;
        if !checker.check(ball, &s.path).passed() {
            return Err(Error::Contract(format!(
                "sample path from {} is not {}-distorted",
                ball.format_vertex(s.path[0]),
                k.distortion()
            )));
        }
        let table = FloydTable::with_scale(ball, scale.clone(), s.basepoint);
        let len = table.path_length(&s.path);
        if len == 0 {
            report.trivial += 1;
            continue;
        }
        let dv = ball.distances_from(s.basepoint);
        let dist = s.path.iter().map(|&v| dv[v as usize]).min().expect("nonempty path");
        let length = scale.to_rational(len);
        let kv = k.eval(&length)?;
        *report.slack.entry(kv as i64 - dist as i64).or_default() += 1;
        if dist as u64 > kv {
            report.violations.push(KarlssonViolation {
                basepoint: s.basepoint,
                path: s.path.clone(),
                distance: dist,
                karlsson: kv,
                floyd_length: format_rational(&length),
            });
        }
        let tail = k.tail(dist as u64);
        let bound_ok = match &tail {
            Tail::Exact(t) => length <= t * int(2),
            Tail::UpperBound(u) => to_f64(&length) <= 2.0 * u,
        };
        if !bound_ok {
            report.tail_violations += 1;
        }
    }
    Ok(report)
}

/// The default grid `eps = 2^-k f(1)` for `k = k_min..=k_max`.
pub fn eps_grid(f: &ScalingFunction, k_min: i32, k_max: i32) -> Vec<BigRational> {
    let f1 = f.eval(1);
    (k_min..=k_max)
        .map(|k| {
            if k >= 0 {
                &f1 / int(1i64 << k)
            } else {
                &f1 * int(1i64 << (-k))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
