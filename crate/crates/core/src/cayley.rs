//! Finite balls in Cayley graphs.
//!
//! Vertices are listed shell by shell, each shell sorted by canonical word,
//! so vertex indices follow shortlex order and vertex 0 is the identity.
//! All distances are measured inside the ball. Vertices within
//! `radius - margin` of the identity are *trusted*; only those feed reported
//! constants.

use crate::error::{Error, Result};
use crate::groups::{Element, GroupSpec, Symbol};
use std::collections::{HashMap, VecDeque};
use std::io::Write;
use std::sync::{Arc, Mutex};

pub const NONE: u32 = u32::MAX;
pub const ALL_PAIRS_LIMIT: usize = 5000;

#[derive(Clone, Debug)]
pub struct BallConfig {
    pub radius: u32,
    pub margin: u32,
    pub vertex_budget: usize,
    /// Total number of cached distance entries across all basepoints.
    pub cache_entries: usize,
}

impl BallConfig {
    pub fn new(radius: u32) -> Self {
        BallConfig {
            radius,
            margin: 2,
            vertex_budget: 4_000_000,
            cache_entries: 1 << 25,
        }
    }

    pub fn margin(mut self, margin: u32) -> Self {
        self.margin = margin;
        self
    }

    pub fn vertex_budget(mut self, budget: usize) -> Self {
        self.vertex_budget = budget;
        self
    }
}

/// Single-source BFS tables with least-recently-used eviction.
pub struct DistanceCache {
    capacity: usize,
    inner: Mutex<CacheInner>,
}

struct CacheInner {
    tables: HashMap<u32, (Arc<[u32]>, u64)>,
    tick: u64,
}

impl DistanceCache {
    pub fn new(capacity: usize) -> Self {
        DistanceCache {
            capacity: capacity.max(1),
            inner: Mutex::new(CacheInner {
                tables: HashMap::new(),
                tick: 0,
            }),
        }
    }

    pub fn get_or_insert_with(&self, key: u32, compute: impl FnOnce() -> Vec<u32>) -> Arc<[u32]> {
        {
            let mut g = self.inner.lock().expect("cache poisoned");
            g.tick += 1;
            let t = g.tick;
            if let Some(entry) = g.tables.get_mut(&key) {
                entry.1 = t;
                return entry.0.clone();
            }
        }
        let table: Arc<[u32]> = compute().into();
        let mut g = self.inner.lock().expect("cache poisoned");
        g.tick += 1;
        let t = g.tick;
        if g.tables.len() >= self.capacity && !g.tables.contains_key(&key) {
            if let Some(&old) = g.tables.iter().min_by_key(|(_, (_, used))| *used).map(|(k, _)| k) {
                g.tables.remove(&old);
            }
        }
        g.tables.insert(key, (table.clone(), t));
        table
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache poisoned").tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

pub struct CayleyBall {
    spec: GroupSpec,
    radius: u32,
    margin: u32,
    elements: Vec<Element>,
    index: HashMap<Element, u32>,
    dist0: Vec<u32>,
    degree: usize,
    adjacency: Vec<u32>,
    cache: DistanceCache,
}

impl CayleyBall {
    pub fn build(spec: &GroupSpec, config: &BallConfig) -> Result<Self> {
        if config.margin > config.radius {
            return Err(Error::Config(format!(
                "trust margin {} exceeds radius {}",
                config.margin, config.radius
            )));
        }
        let symbols = spec.symbols();
        let identity = spec.identity();
        let mut elements = vec![identity.clone()];
        let mut index = HashMap::new();
        index.insert(identity, 0u32);
        let mut dist0 = vec![0u32];
        let mut shell_start = 0usize;
        for k in 1..=config.radius {
            let shell_end = elements.len();
            let mut shell: Vec<Element> = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for u in shell_start..shell_end {
                for &s in &symbols {
                    let x = spec.mul_symbol(&elements[u], s);
                    if !index.contains_key(&x) && seen.insert(x.clone()) {
                        shell.push(x);
                    }
                }
            }
            if elements.len() + shell.len() > config.vertex_budget {
                return Err(Error::resource(
                    "vertices",
                    format!(
                        "ball of radius {} exceeds {} vertices",
                        config.radius, config.vertex_budget
                    ),
                ));
            }
            let mut keyed: Vec<(Vec<Symbol>, Element)> =
                shell.into_iter().map(|e| (spec.canonical_word(&e), e)).collect();
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            for (_, e) in keyed {
                index.insert(e.clone(), elements.len() as u32);
                elements.push(e);
                dist0.push(k);
            }
            shell_start = shell_end;
        }
        let degree = symbols.len();
        let mut adjacency = vec![NONE; elements.len() * degree];
        for (v, e) in elements.iter().enumerate() {
            for &s in &symbols {
                if let Some(&w) = index.get(&spec.mul_symbol(e, s)) {
                    adjacency[v * degree + s.index()] = w;
                }
            }
        }
        let n = elements.len();
        Ok(CayleyBall {
            spec: spec.clone(),
            radius: config.radius,
            margin: config.margin,
            elements,
            index,
            dist0,
            degree,
            adjacency,
            cache: DistanceCache::new(config.cache_entries / n.max(1)),
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn margin(&self) -> u32 {
        self.margin
    }

    pub fn trust_radius(&self) -> u32 {
        self.radius - self.margin
    }

    pub fn vertex_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, v: u32) -> &Element {
        &self.elements[v as usize]
    }

    pub fn index_of(&self, e: &Element) -> Option<u32> {
        self.index.get(e).copied()
    }

    pub fn vertex_of_word(&self, word: &str) -> Result<u32> {
        let e = self.spec.word_to_element(word)?;
        self.index_of(&e)
            .ok_or_else(|| Error::Input(format!("`{word}` lies outside the ball")))
    }

    pub fn format_vertex(&self, v: u32) -> String {
        self.spec.format_element(self.element(v))
    }

    pub fn dist0(&self, v: u32) -> u32 {
        self.dist0[v as usize]
    }

    pub fn is_shell(&self, v: u32) -> bool {
        self.dist0(v) == self.radius
    }

    pub fn is_trusted(&self, v: u32) -> bool {
        self.dist0(v) <= self.trust_radius()
    }

    /// Vertices within the trust radius; a prefix of the vertex order.
    pub fn trusted_vertices(&self) -> std::ops::Range<u32> {
        let t = self.trust_radius();
        0..self.dist0.partition_point(|&d| d <= t) as u32
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn neighbor(&self, v: u32, s: Symbol) -> Option<u32> {
        match self.adjacency[v as usize * self.degree + s.index()] {
            NONE => None,
            w => Some(w),
        }
    }

    /// In-ball neighbours in symbol order.
    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = (u32, Symbol)> + '_ {
        let row = &self.adjacency[v as usize * self.degree..(v as usize + 1) * self.degree];
        row.iter()
            .enumerate()
            .filter(|(_, &w)| w != NONE)
            .map(|(i, &w)| (w, Symbol(i as u32)))
    }

    pub fn are_adjacent(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).any(|(w, _)| w == v)
    }

    /// True when some edge at `v` leaves the ball.
    pub fn has_exterior_edge(&self, v: u32) -> bool {
        let row = &self.adjacency[v as usize * self.degree..(v as usize + 1) * self.degree];
        row.contains(&NONE)
    }

    fn bfs(&self, sources: &[u32], limit: u32) -> Vec<u32> {
        let mut dist = vec![NONE; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] == NONE {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if du >= limit {
                continue;
            }
            let row = &self.adjacency[u as usize * self.degree..(u as usize + 1) * self.degree];
            for &w in row {
                if w != NONE && dist[w as usize] == NONE {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// In-ball distances from `v`, served from the basepoint cache.
    pub fn distances_from(&self, v: u32) -> Arc<[u32]> {
        self.cache.get_or_insert_with(v, || self.bfs(&[v], u32::MAX))
    }

    pub fn distance(&self, u: u32, v: u32) -> u32 {
        if u == v {
            return 0;
        }
        self.distances_from(u)[v as usize]
    }

    /// Multi-source distances to a vertex set.
    pub fn distances_to_set(&self, set: &[u32]) -> Vec<u32> {
        self.bfs(set, u32::MAX)
    }

    /// `N_r(set)` as a sorted vertex list.
    pub fn neighborhood(&self, set: &[u32], r: u32) -> Vec<u32> {
        self.bfs(set, r)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= r)
            .map(|(v, _)| v as u32)
            .collect()
    }

    pub fn on_geodesic(&self, x: u32, w: u32, y: u32) -> bool {
        let dx = self.distances_from(x);
        let dy = self.distances_from(y);
        dx[w as usize] as u64 + dy[w as usize] as u64 == dx[y as usize] as u64
    }

    /// The geodesic from `x` to `y` that always steps to the least-index
    /// neighbour closer to `y`.
    pub fn lex_geodesic(&self, x: u32, y: u32) -> Vec<u32> {
        let dy = self.distances_from(y);
        let mut path = vec![x];
        let mut cur = x;
        while cur != y {
            let d = dy[cur as usize];
            let next = self
                .neighbors(cur)
                .filter(|&(w, _)| dy[w as usize] + 1 == d)
                .map(|(w, _)| w)
                .min()
                .expect("ball is connected");
            path.push(next);
            cur = next;
        }
        path
    }

    pub fn cache(&self) -> &DistanceCache {
        &self.cache
    }

    /// Full distance matrix; refused above [`ALL_PAIRS_LIMIT`] vertices.
    pub fn all_pairs(&self) -> Result<Vec<Arc<[u32]>>> {
        if self.vertex_count() > ALL_PAIRS_LIMIT {
            return Err(Error::resource(
                "all-pairs",
                format!("{} vertices exceed {}", self.vertex_count(), ALL_PAIRS_LIMIT),
            ));
        }
        Ok((0..self.vertex_count() as u32).map(|v| self.distances_from(v)).collect())
    }

    pub fn write_vertices_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,normal_form,dist0")?;
        for v in 0..self.vertex_count() as u32 {
            writeln!(w, "{},{},{}", v, self.format_vertex(v), self.dist0(v))?;
        }
        Ok(())
    }

    /// Each undirected edge once, from its lower endpoint.
    pub fn write_edges_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u_index,v_index,generator_label")?;
        for u in 0..self.vertex_count() as u32 {
            for (v, s) in self.neighbors(u) {
                if u < v {
                    writeln!(w, "{},{},{}", u, v, self.spec.symbol_label(s))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ball(spec: &str, r: u32) -> CayleyBall {
        CayleyBall::build(&GroupSpec::parse(spec).unwrap(), &BallConfig::new(r).margin(0)).unwrap()
    }

    #[test]
    fn free_group_ball_sizes() {
        assert_eq!(ball("free(2)", 0).vertex_count(), 1);
        assert_eq!(ball("free(2)", 3).vertex_count(), 53);
        // Z * Z spells the same Cayley graph as F2.
        assert_eq!(ball("product(free(a),free(b))", 3).vertex_count(), 53);
    }

    #[test]
    fn z2_ball_and_geodesic_interval() {
        let b = ball("abelian(2)", 2);
        assert_eq!(b.vertex_count(), 13);
        let b = ball("abelian(2)", 4);
        let x = 0;
        let y = b.vertex_of_word("a^2 b^2").unwrap();
        let count = (0..b.vertex_count() as u32).filter(|&w| b.on_geodesic(x, w, y)).count();
        assert_eq!(count, 9);
    }

    #[test]
    fn identity_first_and_shortlex_order() {
        let b = ball("free(2)", 2);
        assert_eq!(b.format_vertex(0), "1");
        let names: Vec<_> = (1..5).map(|v| b.format_vertex(v)).collect();
        assert_eq!(names, vec!["a", "a^-1", "b", "b^-1"]);
        for v in 1..b.vertex_count() as u32 {
            assert!(b.dist0(v - 1) <= b.dist0(v));
        }
    }

    #[test]
    fn shell_flags_and_exterior_edges() {
        let b = ball("free(2)", 2);
        for v in 0..b.vertex_count() as u32 {
            assert_eq!(b.is_shell(v), b.dist0(v) == 2);
            assert_eq!(b.has_exterior_edge(v), b.is_shell(v));
        }
    }

    #[test]
    fn vertex_budget_is_a_resource_error() {
        let g = GroupSpec::parse("free(2)").unwrap();
        let err = CayleyBall::build(&g, &BallConfig::new(5).vertex_budget(100)).err().unwrap();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn all_pairs_refused_on_large_balls() {
        assert!(ball("free(2)", 8).all_pairs().is_err());
        assert!(ball("free(2)", 3).all_pairs().is_ok());
    }

    #[test]
    fn lex_geodesic_prefers_low_indices() {
        let b = ball("abelian(2)", 3);
        let y = b.vertex_of_word("a b").unwrap();
        let p: Vec<_> = b.lex_geodesic(0, y).iter().map(|&v| b.format_vertex(v)).collect();
        assert_eq!(p, vec!["1", "a", "a b"]);
    }

    #[test]
    fn lru_cache_evicts_oldest() {
        let c = DistanceCache::new(2);
        c.get_or_insert_with(1, || vec![1]);
        c.get_or_insert_with(2, || vec![2]);
        c.get_or_insert_with(1, || unreachable!());
        c.get_or_insert_with(3, || vec![3]);
        assert_eq!(c.len(), 2);
        assert_eq!(&*c.get_or_insert_with(1, || unreachable!()), &[1]);
        assert_eq!(&*c.get_or_insert_with(2, || vec![22]), &[22]);
    }

    #[test]
    fn csv_dumps_have_headers_and_rows() {
        let b = ball("free(2)", 1);
        let mut v = Vec::new();
        b.write_vertices_csv(&mut v).unwrap();
        let v = String::from_utf8(v).unwrap();
        assert_eq!(v, "index,normal_form,dist0\n0,1,0\n1,a,1\n2,a^-1,1\n3,b,1\n4,b^-1,1\n");
        let mut e = Vec::new();
        b.write_edges_csv(&mut e).unwrap();
        let e = String::from_utf8(e).unwrap();
        assert_eq!(e.lines().count(), 5);
        assert!(e.contains("0,1,a\n"));
    }

    /// Plain BFS over an explicitly stored adjacency list.
    fn oracle_distances(b: &CayleyBall, s: u32) -> Vec<u32> {
        let n = b.vertex_count();
        let adj: Vec<Vec<u32>> = (0..n as u32).map(|v| b.neighbors(v).map(|x| x.0).collect()).collect();
        let mut d = vec![u32::MAX; n];
        d[s as usize] = 0;
        let mut frontier = vec![s];
        let mut k = 0;
        while !frontier.is_empty() {
            k += 1;
            let mut next = Vec::new();
            for u in frontier {
                for &w in &adj[u as usize] {
                    if d[w as usize] == u32::MAX {
                        d[w as usize] = k;
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        d
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metric_axioms_in_ball(which in 0usize..3, x in 0u32..400, y in 0u32..400, z in 0u32..400) {
            let specs = ["free(2)", "abelian(2)", "product(abelian(a,b),free(c))"];
            let b = ball(specs[which], 4);
            let n = b.vertex_count() as u32;
            let (x, y, z) = (x % n, y % n, z % n);
            prop_assert_eq!(b.distance(x, y), b.distance(y, x));
            prop_assert_eq!(b.distance(x, x), 0);
            prop_assert!(b.distance(x, z) <= b.distance(x, y) + b.distance(y, z));
            prop_assert_eq!(b.distances_from(x).to_vec(), oracle_distances(&b, x));
            let p = b.lex_geodesic(x, y);
            prop_assert_eq!(p.len() as u32, b.distance(x, y) + 1);
            for w in p.windows(2) { prop_assert!(b.are_adjacent(w[0], w[1])); }
        }

        #[test]
        fn adjacency_is_symmetric_and_labelled(which in 0usize..3) {
            let specs = ["free(2)", "abelian(2)", "product(abelian(a,b),free(c))"];
            let b = ball(specs[which], 3);
            for v in 0..b.vertex_count() as u32 {
                for (w, s) in b.neighbors(v) {
                    prop_assert_eq!(b.neighbor(w, s.inverse()), Some(v));
                    prop_assert_eq!(b.spec().mul_symbol(b.element(v), s), b.element(w).clone());
                    prop_assert!(b.dist0(w).abs_diff(b.dist0(v)) <= 1);
                }
            }
        }
    }
}
