use super::functions::{format_rational, ScalingFunction};
use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::io::Write;
use std::sync::{Arc, Mutex};

pub const UNREACHED: u128 = u128::MAX;

/// Exact Floyd weights for one ball: `f_n = weights[n] / denom` for every
/// index a ball edge can see. Every Floyd length on the ball is an integer
/// multiple of `1 / denom`.
#[derive(Debug, Clone)]
pub struct FloydScale {
    f: ScalingFunction,
    denom: u128,
    weights: Vec<u128>,
}

impl FloydScale {
    pub fn for_ball(ball: &CayleyBall, f: &ScalingFunction) -> Result<Self> {
        FloydScale::new(f, 2 * ball.radius() as u64, ball.vertex_count() as u128)
    }

    /// Weights for indices `0..=max_index`; `headroom` bounds the number of
    /// edges a summed length may contain.
    pub fn new(f: &ScalingFunction, max_index: u64, headroom: u128) -> Result<Self> {
        let values: Vec<BigRational> = (0..=max_index).map(|n| f.eval(n)).collect();
        let mut lcm = BigInt::one();
        for v in &values {
            lcm = lcm.lcm(v.denom());
        }
        let overflow = || {
            Error::resource(
                "floyd-scale",
                format!("common denominator of {f} up to index {max_index} does not fit in 128 bits"),
            )
        };
        let denom = lcm.to_u128().ok_or_else(overflow)?;
        denom.checked_mul(headroom.max(1)).ok_or_else(overflow)?;
        let weights = values
            .iter()
            .map(|v| (v.numer() * (&lcm / v.denom())).to_u128().ok_or_else(overflow))
            .collect::<Result<Vec<_>>>()?;
        Ok(FloydScale {
            f: f.clone(),
            denom,
            weights,
        })
    }

    pub fn scaling(&self) -> &ScalingFunction {
        &self.f
    }

    pub fn denom(&self) -> u128 {
        self.denom
    }

    pub fn weight(&self, n: u32) -> u128 {
        self.weights[n as usize]
    }

    pub fn to_rational(&self, x: u128) -> BigRational {
        BigRational::new(BigInt::from(x), BigInt::from(self.denom))
    }

    /// Compares `x / denom` with `r`.
    pub fn cmp(&self, x: u128, r: &BigRational) -> Ordering {
        (BigInt::from(x) * r.denom()).cmp(&(r.numer() * BigInt::from(self.denom)))
    }
}

/// Floyd metric based at one vertex, with per-source Dijkstra tables filled
/// on demand.
pub struct FloydTable<'a> {
    ball: &'a CayleyBall,
    scale: Arc<FloydScale>,
    base: u32,
    dbase: Arc<[u32]>,
    capacity: usize,
    tables: Mutex<HashMap<u32, Arc<[u128]>>>,
}

impl<'a> FloydTable<'a> {
    pub fn new(ball: &'a CayleyBall, f: &ScalingFunction, base: u32) -> Result<Self> {
        Ok(FloydTable::with_scale(ball, Arc::new(FloydScale::for_ball(ball, f)?), base))
    }

    pub fn with_scale(ball: &'a CayleyBall, scale: Arc<FloydScale>, base: u32) -> Self {
        let capacity = ((1usize << 24) / ball.vertex_count().max(1)).max(1);
        FloydTable {
            ball,
            dbase: ball.distances_from(base),
            scale,
            base,
            capacity,
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn scale(&self) -> &FloydScale {
        &self.scale
    }

    /// Weight of the edge `{u, w}`: `f(min(d(base, u), d(base, w)))`.
    pub fn edge_weight(&self, u: u32, w: u32) -> u128 {
        let n = self.dbase[u as usize].min(self.dbase[w as usize]);
        self.scale.weight(n)
    }

    pub fn path_length(&self, path: &[u32]) -> u128 {
        path.windows(2).map(|e| self.edge_weight(e[0], e[1])).sum()
    }

    /// Multi-source Dijkstra over the whole ball.
    pub fn distances_from_set(&self, sources: &[u32]) -> Vec<u128> {
        let mut dist = vec![UNREACHED; self.ball.vertex_count()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s as usize] = 0;
            heap.push(Reverse((0u128, s)));
        }
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            let du = self.dbase[u as usize];
            for (w, _) in self.ball.neighbors(u) {
                let nd = d + self.scale.weight(du.min(self.dbase[w as usize]));
                if nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        dist
    }

    pub fn distances_from(&self, x: u32) -> Arc<[u128]> {
        if let Some(t) = self.tables.lock().expect("floyd cache poisoned").get(&x) {
            return t.clone();
        }
        let t: Arc<[u128]> = self.distances_from_set(&[x]).into();
        let mut g = self.tables.lock().expect("floyd cache poisoned");
        if g.len() >= self.capacity {
            g.clear();
        }
        g.insert(x, t.clone());
        t
    }

    pub fn distance(&self, x: u32, y: u32) -> u128 {
        if x == y {
            return 0;
        }
        self.distances_from(x)[y as usize]
    }

    pub fn diameter(&self, set: &[u32]) -> Result<u128> {
        if set.is_empty() {
            return Err(Error::Input("Floyd diameter of an empty set".into()));
        }
        let mut best = 0u128;
        for (i, &x) in set.iter().enumerate() {
            if i + 1 == set.len() {
                break;
            }
            let t = self.distances_from(x);
            for &y in &set[i + 1..] {
                best = best.max(t[y as usize]);
            }
        }
        Ok(best)
    }
}

pub fn floyd_distance(
    ball: &CayleyBall,
    a: u32,
    x: u32,
    y: u32,
    f: &ScalingFunction,
) -> Result<BigRational> {
    let t = FloydTable::new(ball, f, a)?;
    Ok(t.scale().to_rational(t.distance(x, y)))
}

pub fn floyd_diameter(
    ball: &CayleyBall,
    a: u32,
    set: &[u32],
    f: &ScalingFunction,
) -> Result<BigRational> {
    let t = FloydTable::new(ball, f, a)?;
    Ok(t.scale().to_rational(t.diameter(set)?))
}

/// Outcome of comparing `delta_u(x, y)` with `lambda^d(u, v) delta_v(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseChange {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub holds: bool,
}

pub fn base_change(
    ball: &CayleyBall,
    scale: &Arc<FloydScale>,
    u: u32,
    v: u32,
    x: u32,
    y: u32,
) -> BaseChange {
    let du = FloydTable::with_scale(ball, scale.clone(), u).distance(x, y);
    let dv = FloydTable::with_scale(ball, scale.clone(), v).distance(x, y);
    let factor = num_traits::pow(scale.scaling().decay(), ball.distance(u, v) as usize);
    let lhs = scale.to_rational(du);
    let rhs = factor * scale.to_rational(dv);
    BaseChange {
        holds: lhs >= rhs,
        lhs,
        rhs,
    }
}

pub fn write_floyd_csv<W: Write>(
    mut w: W,
    ball: &CayleyBall,
    rows: &[(u32, u32, u32, BigRational)],
) -> Result<()> {
    writeln!(w, "basepoint,x,y,delta")?;
    for (a, x, y, d) in rows {
        writeln!(
            w,
            "{},{},{},{}",
            ball.format_vertex(*a),
            ball.format_vertex(*x),
            ball.format_vertex(*y),
            format_rational(d)
        )?;
    }
    Ok(())
}
