use super::*;
use crate::cayley::BallConfig;
use crate::groups::GroupSpec;
use proptest::prelude::*;

fn ball(spec: &str, r: u32) -> CayleyBall {
    CayleyBall::build(&GroupSpec::parse(spec).unwrap(), &BallConfig::new(r).margin(0)).unwrap()
}

fn half() -> ScalingFunction {
    ScalingFunction::parse("exp(1/2)").unwrap()
}

/// Floyd-Warshall over exact rationals, independent of the Dijkstra kernel.
fn oracle_floyd(b: &CayleyBall, f: &ScalingFunction, base: u32) -> Vec<Vec<Option<BigRational>>> {
    let n = b.vertex_count();
    let db = b.distances_from(base);
    let mut d: Vec<Vec<Option<BigRational>>> = vec![vec![None; n]; n];
    for u in 0..n {
        d[u][u] = Some(int(0));
        for (w, _) in b.neighbors(u as u32) {
            let m = db[u].min(db[w as usize]);
            d[u][w as usize] = Some(f.eval(m as u64));
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i][k].clone() else { continue };
            for j in 0..n {
                if let Some(dkj) = &d[k][j] {
                    let c = &dik + dkj;
                    if d[i][j].as_ref().map_or(true, |x| c < *x) {
                        d[i][j] = Some(c);
                    }
                }
            }
        }
    }
    d
}

#[test]
fn path_graph_distance() {
    let b = ball("free(1)", 3);
    let y = b.vertex_of_word("a^2").unwrap();
    assert_eq!(floyd_distance(&b, 0, 0, y, &half()).unwrap(), rational(3, 2));
}

#[test]
fn free_group_edge_away_from_base() {
    let b = ball("free(2)", 3);
    let a = b.vertex_of_word("a").unwrap();
    let a2 = b.vertex_of_word("a^2").unwrap();
    assert_eq!(floyd_distance(&b, 0, a, a2, &half()).unwrap(), rational(1, 2));
}

#[test]
fn dijkstra_matches_floyd_warshall() {
    for (spec, r) in [("free(2)", 3), ("abelian(2)", 3), ("product(free(a),abelian(b,c))", 2)] {
        let b = ball(spec, r);
        for f in [half(), ScalingFunction::parse("exp(2/3)").unwrap(), ScalingFunction::parse("poly(4)").unwrap()] {
            for base in [0u32, 3, (b.vertex_count() - 1) as u32] {
                let oracle = oracle_floyd(&b, &f, base);
                let t = FloydTable::new(&b, &f, base).unwrap();
                for x in 0..b.vertex_count() as u32 {
                    let row = t.distances_from(x);
                    for y in 0..b.vertex_count() as u32 {
                        assert_eq!(Some(t.scale().to_rational(row[y as usize])), oracle[x as usize][y as usize]);
                    }
                }
            }
        }
    }
}

#[test]
fn empty_diameter_is_an_error() {
    let b = ball("free(2)", 2);
    assert!(matches!(floyd_diameter(&b, 0, &[], &half()), Err(Error::Input(_))));
    assert_eq!(floyd_diameter(&b, 0, &[3], &half()).unwrap(), int(0));
}

#[test]
fn floyd_csv_uses_fractions() {
    let b = ball("free(1)", 2);
    let y = b.vertex_of_word("a^2").unwrap();
    let d = floyd_distance(&b, 0, 0, y, &half()).unwrap();
    let mut out = Vec::new();
    write_floyd_csv(&mut out, &b, &[(0, 0, y, d)]).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "basepoint,x,y,delta\n1,1,a^2,3/2\n");
}

#[test]
fn karlsson_value_and_tail_formula() {
    let k = Karlsson::new(&half(), &DistortionFunction::Identity).unwrap();
    assert_eq!(k.eval(&int(1)).unwrap(), 6);
    for r in 0..20u64 {
        // (2r + 3) 2^(1 - r)
        let expect = int(2 * r as i64 + 3) * int(2) / int(1i64 << r);
        assert_eq!(k.tail(r), Tail::Exact(expect));
    }
    assert_eq!(k.total(), Tail::Exact(int(6)));
    assert_eq!(k.eval(&int(12)).unwrap(), 0);
    assert_eq!(k.eval(&int(100)).unwrap(), 0);
    assert!(k.eval(&rational(239, 20)).unwrap() > 0);
    assert!(k.eval(&int(0)).is_err());
}

/// Plain floating summation of the series, far past the point of interest.
fn numeric_karlsson(f: &ScalingFunction, alpha: &DistortionFunction, eps: f64) -> u64 {
    let terms: Vec<f64> = (0..600u64)
        .map(|s| to_f64(&alpha.eval(2 * s + 1)) * to_f64(&f.eval(s)))
        .collect();
    let mut tail: f64 = terms.iter().rev().sum();
    let mut r = 0u64;
    while tail > eps / 2.0 {
        tail -= terms[r as usize];
        r += 1;
    }
    r
}

#[test]
fn karlsson_table_matches_numeric_summation() {
    for (f, a) in [
        ("exp(1/2)", "id"),
        ("exp(1/2)", "affine(3,1)"),
        ("exp(1/3)", "quadratic(2,5,2)"),
        ("exp(1/4)", "exp(3/2)"),
        ("exp(2/3)", "id"),
    ] {
        let f = ScalingFunction::parse(f).unwrap();
        let a = DistortionFunction::parse(a).unwrap();
        for (eps, k) in karlsson_table(&f, &a, -2..=6).unwrap() {
            assert_eq!(k, numeric_karlsson(&f, &a, to_f64(&eps)), "{f} {a} {eps}");
        }
    }
}

#[test]
fn certified_polynomial_karlsson_is_near_minimal() {
    let f = ScalingFunction::parse("poly(4)").unwrap();
    for a in ["id", "quadratic(1,1,0)"] {
        let a = DistortionFunction::parse(a).unwrap();
        let k = Karlsson::new(&f, &a).unwrap();
        for j in 0..6 {
            let eps = rational(1, 1 << j);
            let got = k.eval(&eps).unwrap();
            // Exact partial sums plus a generous float tail give the true minimum
            // up to rounding at the boundary.
            let truth = {
                let terms: Vec<f64> = (0..200_000u64)
                    .map(|s| to_f64(&a.eval(2 * s + 1)) / ((s + 1) as f64).powi(4))
                    .collect();
                let mut tail: f64 = terms.iter().rev().sum();
                let mut r = 0u64;
                while tail > to_f64(&eps) / 2.0 {
                    tail -= terms[r as usize];
                    r += 1;
                }
                r
            };
            assert!(got >= truth, "{a} eps={eps}: {got} < {truth}");
            assert!(got <= truth + 2, "{a} eps={eps}: {got} vs {truth}");
        }
    }
}

#[test]
fn lambda0_and_strict_flip() {
    let quarter = ScalingFunction::parse("exp(1/4)").unwrap();
    assert_eq!(lambda0(&quarter).unwrap(), 2.0);
    assert!((lambda0(&half()).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert!(lambda0(&ScalingFunction::parse("poly(4)").unwrap()).is_err());
    let at = DistortionFunction::parse("exp(2)").unwrap();
    assert!(!is_appropriate(&quarter, &at).appropriate);
    for below in ["exp(1999/1000)", "exp(3/2)", "exp(19/10)"] {
        let a = DistortionFunction::parse(below).unwrap();
        assert!(is_appropriate(&quarter, &a).appropriate, "{below}");
    }
    assert!(!is_appropriate(&quarter, &DistortionFunction::parse("exp(2001/1000)").unwrap()).appropriate);
}

#[test]
fn appropriateness_families() {
    let poly = ScalingFunction::parse("poly(4)").unwrap();
    for a in ["id", "affine(2,3)", "quadratic(2,5,2)"] {
        let a = DistortionFunction::parse(a).unwrap();
        assert!(is_appropriate(&poly, &a).appropriate);
        assert!(is_appropriate(&half(), &a).appropriate);
    }
    let c = is_appropriate(&poly, &DistortionFunction::parse("exp(2)").unwrap());
    assert!(!c.appropriate);
    assert_eq!(c.test, AppropriatenessTest::ExponentialDominates);
    assert!(Karlsson::new(&poly, &DistortionFunction::parse("exp(2)").unwrap()).is_err());
}

#[test]
fn karlsson_holds_on_sampled_geodesics() {
    let b = ball("free(2)", 6);
    let scale = Arc::new(FloydScale::for_ball(&b, &half()).unwrap());
    let k = Karlsson::new(&half(), &DistortionFunction::Identity).unwrap();
    let n = b.vertex_count() as u32;
    let samples: Vec<KarlssonSample> = (0..300u32)
        .map(|i| KarlssonSample {
            basepoint: (i * 7919) % n,
            path: b.lex_geodesic((i * 104_729) % n, (i * 1_299_709 + 17) % n),
        })
        .collect();
    let rep = verify_karlsson(&b, &scale, &k, &samples).unwrap();
    assert!(rep.violations.is_empty());
    assert_eq!(rep.tail_violations, 0);
}

#[test]
fn karlsson_rejects_non_distorted_samples() {
    let b = ball("free(2)", 3);
    let scale = Arc::new(FloydScale::for_ball(&b, &half()).unwrap());
    let k = Karlsson::new(&half(), &DistortionFunction::Identity).unwrap();
    let a = b.vertex_of_word("a").unwrap();
    let s = KarlssonSample { basepoint: 0, path: vec![0, a, 0] };
    assert!(matches!(verify_karlsson(&b, &scale, &k, &[s]), Err(Error::Contract(_))));
}

#[test]
fn eps_grid_is_powers_of_two_times_f1() {
    let g = eps_grid(&half(), -2, 1);
    assert_eq!(g, vec![int(2), int(1), rational(1, 2), rational(1, 4)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn floyd_metric_axioms(base in 0u32..161, x in 0u32..161, y in 0u32..161, z in 0u32..161) {
        let b = ball("free(2)", 4);
        let t = FloydTable::new(&b, &half(), base).unwrap();
        prop_assert_eq!(t.distance(x, y), t.distance(y, x));
        prop_assert_eq!(t.distance(x, x), 0);
        prop_assert!(x == y || t.distance(x, y) > 0);
        prop_assert!(t.distance(x, z) <= t.distance(x, y) + t.distance(y, z));
        // Floyd length never exceeds graph length.
        prop_assert!(t.distance(x, y) <= t.scale().denom() * b.distance(x, y) as u128);
    }

    #[test]
    fn base_change_inequality(u in 0u32..485, v in 0u32..485, x in 0u32..485, y in 0u32..485, mu in 1i64..8) {
        let b = ball("product(abelian(a,b),free(c))", 3);
        let n = b.vertex_count() as u32;
        let f = ScalingFunction::exponential(rational(mu, 8)).unwrap();
        let scale = Arc::new(FloydScale::for_ball(&b, &f).unwrap());
        let c = base_change(&b, &scale, u % n, v % n, x % n, y % n);
        prop_assert!(c.holds, "{} < {}", c.lhs, c.rhs);
    }

    #[test]
    fn karlsson_is_nonincreasing(p in 1i64..1000, q in 1i64..1000, which in 0usize..4) {
        let pairs = [("exp(1/2)", "id"), ("exp(1/3)", "quadratic(2,5,2)"), ("exp(1/4)", "exp(3/2)"), ("poly(5)", "affine(2,1)")];
        let (f, a) = pairs[which];
        let k = Karlsson::new(&ScalingFunction::parse(f).unwrap(), &DistortionFunction::parse(a).unwrap()).unwrap();
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(k.eval(&rational(lo, 64)).unwrap() >= k.eval(&rational(hi, 64)).unwrap());
    }
}
