use super::*;
use crate::cayley::{BallConfig, CayleyBall};
use crate::error::Error;
use crate::floyd::{int, DistortionFunction};
use crate::groups::{GroupSpec, PeripheralSpec};
use crate::paths::{id_hull, PathRecord};
use std::collections::{BTreeSet, VecDeque};

fn ball(spec: &str, r: u32, margin: u32) -> CayleyBall {
    CayleyBall::build(&GroupSpec::parse(spec).unwrap(), &BallConfig::new(r).margin(margin)).unwrap()
}

fn system(b: &CayleyBall, labels: &[&str], r: u32) -> HorosphereSystem {
    let p = PeripheralSpec::new(b.spec(), labels).unwrap();
    build_horospheres(b, &p, r).unwrap()
}

/// Free group of rank 2 split as a free product, so `a` names a factor.
const F2: &str = "product(free(a),free(b))";

fn v(b: &CayleyBall, w: &str) -> u32 {
    b.vertex_of_word(w).unwrap()
}

/// Plain BFS over an explicit adjacency list with all clique edges present.
fn oracle_rel_distances(b: &CayleyBall, s: &HorosphereSystem) -> Vec<Vec<u32>> {
    let n = b.vertex_count();
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for u in 0..n as u32 {
        for (w, _) in b.neighbors(u) {
            adj[u as usize].insert(w);
        }
    }
    for h in s.entries() {
        for &x in &h.members {
            for &y in &h.members {
                if x != y {
                    adj[x as usize].insert(y);
                }
            }
        }
    }
    (0..n)
        .map(|src| {
            let mut d = vec![u32::MAX; n];
            d[src] = 0;
            let mut q = VecDeque::from([src as u32]);
            while let Some(u) = q.pop_front() {
                for &w in &adj[u as usize] {
                    if d[w as usize] == u32::MAX {
                        d[w as usize] = d[u as usize] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}

#[test]
fn empty_peripheral_gives_empty_system() {
    let b = ball(F2, 3, 0);
    let s = build_horospheres(&b, &PeripheralSpec::empty(), 0).unwrap();
    assert!(s.is_empty());
    let g = build_relative_graph(&b, s);
    for x in 0..b.vertex_count() as u32 {
        assert_eq!(&*g.rel_distances_from(x), &*b.distances_from(x));
    }
    let rep = horosphere_axioms_report(&b, g.system());
    assert_eq!((rep.max_multiplicity, rep.max_intersection_diameter, rep.max_projection_diameter), (0, 0, 0));
}

#[test]
fn free_cosets_match_enumeration_oracle() {
    let b = ball(F2, 3, 0);
    let s = system(&b, &["a"], 0);
    let spec = b.spec();
    // x ~ y iff x^-1 y is a power of a.
    let a_power = |e: &crate::groups::Element| spec.format_element(e).split(' ').all(|t| t == "1" || t.starts_with('a'));
    let n = b.vertex_count() as u32;
    let mut classes: Vec<Vec<u32>> = Vec::new();
    for x in 0..n {
        if let Some(c) = classes.iter_mut().find(|c| a_power(&spec.multiply(&spec.invert(b.element(c[0])), b.element(x)))) {
            c.push(x);
        } else {
            classes.push(vec![x]);
        }
    }
    let got: BTreeSet<Vec<u32>> = s.entries().iter().map(|h| h.core.clone()).collect();
    let want: BTreeSet<Vec<u32>> = classes.into_iter().collect();
    assert_eq!(got, want);
    let ids: Vec<&str> = s.entries().iter().take(4).map(|h| h.id.as_str()).collect();
    assert_eq!(ids, ["1<a>", "b<a>", "b^-1<a>", "a b<a>"]);
    for h in s.entries() {
        assert_eq!(h.rep_vertex, *h.core.iter().min().unwrap());
    }
}

#[test]
fn thickening_is_a_neighborhood() {
    let b = ball("product(abelian(a,b),free(c))", 3, 0);
    let thin = system(&b, &["a"], 0);
    let thick = system(&b, &["a"], 1);
    assert_eq!(thin.len(), thick.len());
    for (h0, h1) in thin.entries().iter().zip(thick.entries()) {
        assert_eq!(h1.members, b.neighborhood(&h0.core, 1));
        assert_eq!(h0.id, h1.id);
    }
}

#[test]
fn foreign_peripheral_is_a_config_error() {
    let b = ball("free(2)", 2, 0);
    let other = GroupSpec::parse("product(free(a),free(b))").unwrap();
    let p = PeripheralSpec::new(&other, &["a"]).unwrap();
    assert!(matches!(build_horospheres(&b, &p, 0), Err(Error::Config(_))));
}

#[test]
fn horospheres_are_equivariant() {
    let b = ball("product(abelian(a,b),free(c))", 4, 0);
    let s = system(&b, &["a"], 0);
    let spec = b.spec();
    for sym in spec.symbols() {
        let g = spec.symbol_element(sym);
        for h in s.entries() {
            let moved: BTreeSet<u32> = h
                .core
                .iter()
                .filter_map(|&x| b.index_of(&spec.multiply(&g, b.element(x))))
                .collect();
            let Some(&x0) = moved.iter().next() else { continue };
            let target = s.entries().iter().find(|k| k.core.binary_search(&x0).is_ok()).unwrap();
            // The translate restricted to the ball is exactly the target's
            // points whose preimage lies in the ball.
            let back: BTreeSet<u32> = target
                .core
                .iter()
                .copied()
                .filter(|&y| b.index_of(&spec.multiply(&spec.invert(&g), b.element(y))).is_some())
                .collect();
            assert_eq!(moved, back);
        }
    }
}

#[test]
fn relative_distance_examples() {
    let b = ball(F2, 7, 0);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    for k in 1..=3 {
        let x = v(&b, &format!("a^-{k}"));
        let y = v(&b, &format!("a^{k}"));
        assert_eq!(g.rel_distance(x, y), 1);
    }
    assert_eq!(g.rel_distance(0, v(&b, "b a^5 b")), 3);
}

#[test]
fn cone_bfs_matches_materialized_cliques() {
    for (spec, labels, r, radius) in [
        (F2, vec!["a"], 0, 4),
        ("product(abelian(a,b),free(c))", vec!["a"], 1, 3),
        ("product(free(a),product(free(b),abelian(c,d)))", vec!["a", "c"], 0, 3),
    ] {
        let b = ball(spec, radius, 0);
        let s = system(&b, &labels, r);
        let oracle = oracle_rel_distances(&b, &s);
        let g = build_relative_graph(&b, s);
        for x in 0..b.vertex_count() as u32 {
            let d = g.rel_distances_from(x);
            assert_eq!(&*d, &oracle[x as usize][..], "{spec}");
            let plain = b.distances_from(x);
            assert!(d.iter().zip(plain.iter()).all(|(a, p)| a <= p));
        }
    }
}

#[test]
fn rel_geodesics_are_geodesic_and_prefer_cayley_edges() {
    let b = ball(F2, 5, 0);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    for x in (0..b.vertex_count() as u32).step_by(7) {
        for y in (0..b.vertex_count() as u32).step_by(11) {
            let p = g.rel_geodesic(x, y);
            assert_eq!(p.length() as u32, g.rel_distance(x, y));
            assert_eq!(RelPath::new(&g, p.vertices.clone()).unwrap(), p);
        }
    }
    let p = g.rel_geodesic(0, v(&b, "a"));
    assert_eq!(p.edges, vec![RelEdge::Graph]);
}

#[test]
fn rel_hull_basics() {
    let b = ball(F2, 4, 0);
    let plain = build_relative_graph(&b, HorosphereSystem::empty(&b));
    let set = vec![v(&b, "a b"), v(&b, "b^-1 a"), v(&b, "a^-2")];
    assert_eq!(plain.rel_hull(&set), id_hull(&b, &set));
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    assert_eq!(g.rel_hull(&[5]), vec![5]);
    let small = g.rel_hull(&set[..2]);
    let big = g.rel_hull(&set);
    assert!(set.iter().all(|x| big.contains(x)));
    assert!(small.iter().all(|x| big.contains(x)));
}

#[test]
fn rel_hull_matches_pairwise_definition() {
    let b = ball("product(abelian(a,b),free(c))", 3, 0);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    let n = b.vertex_count() as u32;
    for seed in 0..20u32 {
        let set: Vec<u32> = (0..3).map(|i| (seed * 37 + i * 101) % n).collect::<BTreeSet<_>>().into_iter().collect();
        let want: Vec<u32> = (0..n)
            .filter(|&w| {
                set.iter().any(|&x| {
                    set.iter().any(|&y| g.rel_distance(x, w) + g.rel_distance(w, y) == g.rel_distance(x, y))
                })
            })
            .collect();
        assert_eq!(g.rel_hull(&set), want);
    }
}

#[test]
fn b_orbit_is_relatively_quasiconvex() {
    let b = ball(F2, 6, 2);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    let f: Vec<u32> = (-4i32..=4).map(|k| v(&b, &format!("b^{k}"))).collect();
    let hull = g.rel_hull(&f);
    let to_f = b.distances_to_set(&f);
    let r = hull.iter().filter(|&&w| b.is_trusted(w)).map(|&w| to_f[w as usize]).max().unwrap();
    // Cones never shortcut the b-line, so the hull is the orbit itself.
    assert_eq!(r, 0);
}

#[test]
fn lift_examples() {
    let b = ball(F2, 6, 0);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    let a5 = v(&b, "a^5");
    let delta = RelPath::new(&g, vec![0, a5]).unwrap();
    let l = lift(&g, &delta).unwrap();
    let want: Vec<u32> = (0..=5).map(|k| v(&b, &format!("a^{k}"))).collect();
    assert_eq!(l.path.vertices(), &want[..]);
    assert_eq!(l.pieces, vec![(0, 5)]);

    let plain = g.rel_geodesic(0, v(&b, "b^2 a"));
    assert!(plain.edges.iter().all(|e| *e == RelEdge::Graph));
    assert_eq!(lift(&g, &plain).unwrap().path.vertices(), &plain.vertices[..]);

    let detour = RelPath::new(&g, vec![0, v(&b, "a"), v(&b, "a^2")]).unwrap();
    assert!(matches!(lift(&g, &detour), Err(Error::Contract(_))));
}

#[test]
fn lift_bound_formula() {
    let alpha = lift_distortion_bound(0, 1);
    for n in 0..50u64 {
        assert_eq!(alpha.eval(n), int(((n + 2) * (2 * n + 1)) as i64));
        assert!(alpha.eval(n) >= int(n as i64));
        assert!(alpha.eval(n + 1) >= alpha.eval(n));
    }
    assert_eq!(lift_distortion_bound(3, 0), DistortionFunction::Identity);
    let a = lift_distortion_bound(2, 3);
    assert_eq!(a.eval(4), int(3 * (4 + 6) * (8 + 5)));
}

#[test]
fn measured_constants_and_lift_certificate() {
    let b = ball(F2, 5, 2);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    let k = measure_lift_constants(&g);
    assert_eq!((k.r, k.c), (0, 1));
    assert_eq!(k.critical_depth(), 2);
    let t: Vec<u32> = b.trusted_vertices().collect();
    let pairs: Vec<(u32, u32)> = t.iter().flat_map(|&x| t.iter().map(move |&y| (x, y))).collect();
    let cert = certify_lifts(&g, &pairs, &k.bound()).unwrap();
    assert!(cert.violations.is_empty());
    assert!(cert.horospherical_lifts > 0);
    assert!(cert.envelope_ratio <= 1.0);

    let plain = build_relative_graph(&b, HorosphereSystem::empty(&b));
    let cert = certify_lifts(&plain, &pairs, &DistortionFunction::Identity).unwrap();
    assert!(cert.violations.is_empty());
}

#[test]
fn depth_examples() {
    let b = ball(F2, 6, 0);
    let s = system(&b, &["a"], 0);
    let line: Vec<u32> = (-3i32..=3).map(|k| v(&b, &format!("a^{k}"))).collect();
    let p = PathRecord::new(&b, line).unwrap();
    assert_eq!(depth(&b, &p, 3, &s, 0).unwrap(), 3);
    assert_eq!(depth(&b, &p, 0, &s, 0).unwrap(), 0);
    assert_eq!(depth(&b, &p, 1, &s, 0).unwrap(), 1);
    assert!(matches!(depth(&b, &p, 7, &s, 0), Err(Error::Input(_))));
    let zig = PathRecord::new(&b, vec![0, v(&b, "b"), v(&b, "b a"), v(&b, "b a b")]).unwrap();
    assert_eq!(depth(&b, &zig, 1, &s, 0).unwrap(), 0);
}

#[test]
fn b_orbit_hull_is_shallow() {
    let b = ball(F2, 6, 2);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    let f: Vec<u32> = (-4i32..=4).map(|k| v(&b, &format!("b^{k}"))).collect();
    assert_eq!(rel_hull_depth(&g, &f, 0).unwrap(), 0);
}

#[test]
fn thinness_examples() {
    let b = ball(F2, 4, 1);
    let plain = build_relative_graph(&b, HorosphereSystem::empty(&b));
    let tri = trusted_triples(&b);
    assert_eq!(thinness_constant(&plain, &tri).constant, 0);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    let line = [0, v(&b, "b"), v(&b, "b^2")];
    assert_eq!(thinness_constant(&g, &[line]).constant, 0);
}

#[test]
fn simple_loops() {
    let b = ball(F2, 5, 0);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    let e = (0, v(&b, "a"));
    let r2 = simple_loop_lift_report(&g, 2, e, 1, 1 << 20).unwrap();
    assert_eq!(r2.loops, 0);
    let r4 = simple_loop_lift_report(&g, 4, e, 1, 1 << 20).unwrap();
    assert!(r4.loops > 0);
    assert!(r4.holds);
    assert!(r4.max_lift_length <= 12);
    let plain = build_relative_graph(&b, HorosphereSystem::empty(&b));
    assert_eq!(simple_loop_lift_report(&plain, 6, e, 1, 1 << 20).unwrap().loops, 0);
    assert!(matches!(
        simple_loop_lift_report(&g, 6, e, 1, 10),
        Err(Error::Resource { .. })
    ));
}

#[test]
fn free_group_horospheres_are_disjoint_lines() {
    let b = ball(F2, 5, 2);
    let s = system(&b, &["a"], 0);
    let rep = horosphere_axioms_report(&b, &s);
    assert_eq!(rep.max_multiplicity, 1);
    assert_eq!(rep.max_intersection_diameter, 0);
    assert_eq!(rep.max_projection_diameter, 0);
    assert_eq!(rep.max_edge_projection, 1);
}

#[test]
fn relgraph_csv() {
    let b = ball("free(1)", 1, 0);
    let p = PeripheralSpec::empty();
    let g = build_relative_graph(&b, build_horospheres(&b, &p, 0).unwrap());
    let mut out = Vec::new();
    g.write_edges_csv(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "u_index,v_index,horospherical,coset_id\n0,1,false,none\n0,2,false,none\n");
    let b = ball("product(free(a),free(b))", 1, 0);
    let g = build_relative_graph(&b, system(&b, &["a"], 0));
    let mut out = Vec::new();
    g.write_edges_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("1,2,true,1<a>\n"));
}
