use drumshape_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn norm_strategy() -> impl Strategy<Value = Norm> {
    let leaf = prop_oneof![
        Just(Norm::l1()),
        Just(Norm::euclidean()),
        Just(Norm::linf()),
        (1.1f64..8.0).prop_map(|p| Norm::p(p).unwrap()),
        (0.2f64..5.0, 0.2f64..5.0).prop_map(|(a, b)| Norm::weighted_l1(a, b).unwrap()),
        Just(Norm::polygonal(&[
            Vec2::new(1.0, 0.0),
            Vec2::new(0.3, 1.0),
            Vec2::new(-0.8, 0.6),
            Vec2::new(-1.0, 0.0),
            Vec2::new(-0.3, -1.0),
            Vec2::new(0.8, -0.6),
        ])
        .unwrap()),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (0.0f64..PI, inner.clone()).prop_map(|(a, n)| Norm::rotated(a, n).unwrap()),
            (0.1f64..3.0, inner.clone(), 0.1f64..3.0, inner)
                .prop_map(|(w1, a, w2, b)| Norm::sum(vec![(w1, a), (w2, b)]).unwrap()),
        ]
    })
}

fn vec_strategy() -> impl Strategy<Value = Vec2> {
    (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| Vec2::new(x, y))
}

fn polygon_strategy() -> impl Strategy<Value = ConvexPolygon> {
    (any::<u64>(), 3usize..14).prop_map(|(seed, n)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ConvexPolygon::random(&mut rng, n, 1.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn norm_is_homogeneous_and_subadditive(n in norm_strategy(), x in vec_strategy(), y in vec_strategy(), t in -5.0f64..5.0) {
        let scale = n.eval(x) + n.eval(y) + 1e-300;
        prop_assert!((n.eval(x * t) - t.abs() * n.eval(x)).abs() <= 1e-12 * scale * t.abs().max(1.0));
        prop_assert!(n.eval(x + y) <= n.eval(x) + n.eval(y) + 1e-12 * scale);
        prop_assert!((n.eval(-x) - n.eval(x)).abs() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probe_ordering_on_360_directions(n in norm_strategy()) {
        for i in 0..360 {
            let e = Vec2::from_angle(i as f64 * PI / 180.0 + 1e-3);
            let p = n.one_sided_derivatives(e);
            let bound = n.eval(p.e_perp) * (1.0 + 1e-12);
            prop_assert!(-bound <= p.theta_minus);
            prop_assert!(p.theta_minus <= p.theta_plus + 1e-12);
            prop_assert!(p.theta_plus <= bound);
        }
    }

    #[test]
    fn gap_survives_flips(n in norm_strategy(), a in 0.0f64..(2.0 * PI)) {
        let e = Vec2::from_angle(a);
        let g = n.one_sided_derivatives(e).gap();
        // Flipping e or flipping e' (by using the opposite rotation) leaves the gap alone.
        let flipped_e = n.one_sided_derivatives(-e).gap();
        let flipped_perp = {
            let ep = -e.perp();
            let plus = n.directional_derivative(e, ep);
            let minus = -n.directional_derivative(e, -ep);
            plus - minus
        };
        prop_assert!((g - flipped_e).abs() <= 1e-9 * (1.0 + g));
        prop_assert!((g - flipped_perp).abs() <= 1e-9 * (1.0 + g));
    }

    #[test]
    fn additivity_at_one_one_extends_to_the_cone(n in norm_strategy(), a in 0.0f64..(2.0 * PI), w in 0.01f64..3.0) {
        let v = Vec2::from_angle(a);
        let u = Vec2::from_angle(a + w);
        if n.additivity_on_pair(v, u, 1e-12) {
            for i in 0..10 {
                for j in 0..10 {
                    let (s, t) = (2.0 * i as f64 / 9.0, 2.0 * j as f64 / 9.0);
                    let lhs = n.eval(v * s + u * t);
                    let rhs = s * n.eval(v) + t * n.eval(u);
                    prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
                }
            }
        }
    }

    #[test]
    fn wulff_shape_rotates_with_the_norm(alpha in 0.0f64..(2.0 * PI), which in 0usize..4) {
        let base = [Norm::l1(), Norm::p(3.0).unwrap(), Norm::weighted_l1(1.0 / 3.0, 3.0).unwrap(), Norm::linf()][which].clone();
        let w = base.wulff_shape(256).unwrap();
        let wr = Norm::rotated(alpha, base).unwrap().wulff_shape(256).unwrap().rotate(-alpha);
        prop_assert!(hausdorff_distance(&w, &wr) < 1e-3 * w.diameter());
    }

    #[test]
    fn perimeter_is_additive_under_minkowski_sums(n in norm_strategy(), p in polygon_strategy(), q in polygon_strategy()) {
        let lhs = p.minkowski_sum(&q).perimeter(&n);
        let rhs = p.perimeter(&n) + q.perimeter(&n);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn hull_never_lengthens_a_closed_polyline(n in norm_strategy(), seed in any::<u64>(), m in 3usize..20) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec2> = (0..m).map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let length: f64 = (0..m).map(|i| n.eval(pts[(i + 1) % m] - pts[i])).sum();
        if let Ok(hull) = ConvexPolygon::convex_hull(&pts) {
            prop_assert!(hull.perimeter(&n) <= length * (1.0 + 1e-12));
        }
    }

    #[test]
    fn hausdorff_is_a_metric(p in polygon_strategy(), q in polygon_strategy(), r in polygon_strategy()) {
        let (p, q, r) = (p.translate(-p.centroid()), q.translate(-q.centroid()), r.translate(-r.centroid()));
        prop_assert_eq!(hausdorff_distance(&p, &q), hausdorff_distance(&q, &p));
        prop_assert_eq!(hausdorff_distance(&p, &p), 0.0);
        prop_assert!(hausdorff_distance(&p, &r) <= hausdorff_distance(&p, &q) + hausdorff_distance(&q, &r) + 1e-12);
    }

    #[test]
    fn support_round_trip_converges(p in polygon_strategy()) {
        // Support coordinates need the origin inside.
        let p = p.translate(-p.centroid());
        let k = 512;
        let back = SupportVector::from_polygon(&p, k).unwrap().to_polygon().unwrap();
        // Between two samples Δ apart the sampled polygon adds a vertex X over the
        // boundary chain from A to C, seen from X at angle π − Δ. Its height over
        // the chord is at most |AC|·tan(Δ/2)/2, so the rate is first order.
        let step = 2.0 * PI / k as f64;
        prop_assert!(p.contains(Vec2::ZERO));
        prop_assert!(hausdorff_distance(&p, &back) <= 0.5 * p.diameter() * (0.5 * step).tan() + 1e-12);
        // The sampled polygon is circumscribed.
        for v in p.vertices() {
            prop_assert!(back.depth(*v) >= -1e-12);
        }
    }

    #[test]
    fn area_and_perimeter_scale(n in norm_strategy(), p in polygon_strategy(), t in 0.1f64..10.0) {
        let q = p.scale(t);
        prop_assert!((q.area() - t * t * p.area()).abs() <= 1e-12 * t * t * p.area());
        prop_assert!((q.perimeter(&n) - t * p.perimeter(&n)).abs() <= 1e-12 * t * p.perimeter(&n));
    }
}

#[test]
fn support_round_trip_is_second_order_on_smooth_shapes() {
    // A fine regular polygon stands in for a smooth body: edges are short, so
    // the bound 2·diam·(π/K)² holds.
    let disc = ConvexPolygon::regular(4096, 1.0, 0.1).unwrap();
    for k in [64, 128, 512] {
        let back = SupportVector::from_polygon(&disc, k).unwrap().to_polygon().unwrap();
        let bound = (2.0 * disc.diameter() * (PI / k as f64).powi(2)).max(1e-6);
        assert!(hausdorff_distance(&disc, &back) < bound, "k = {k}");
    }
}
