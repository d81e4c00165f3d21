use drumshape_core::features::*;
use drumshape_core::*;
use std::f64::consts::PI;

fn square(side: f64) -> ConvexPolygon {
    ConvexPolygon::rectangle(-side / 2.0, -side / 2.0, side / 2.0, side / 2.0).unwrap()
}

#[test]
fn homothetic_pair_has_zero_slack() {
    // λ(αU ⊕ (1−α)2U) = λ((2−α)U): convexity in α is strict only through the scaling,
    // so the slack is αλ + (1−α)λ/4 − λ/(2−α)², positive but tiny next to a generic pair.
    let r = minkowski_check(0, &square(1.0), &square(2.0), 3).unwrap();
    let lam = 2.0 * PI * PI;
    for (i, a) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let exact = a * lam + (1.0 - a) * lam / 4.0 - lam / (2.0 - a).powi(2);
        assert!((r.convexity_slack[i] - exact).abs() <= r.tolerance.max(1e-6 * lam), "{r:?}");
    }
    // Brunn–Minkowski is an equality for homothetic bodies.
    assert!(r.brunn_minkowski_margin.abs() < 0.01, "{r:?}");
    assert!(r.perimeter_affinity_error < 1e-12);
}

#[test]
fn square_and_disc_are_strict() {
    let disc = ConvexPolygon::regular(128, 0.6, 0.0).unwrap();
    let r = minkowski_check(0, &square(1.0), &disc, 3).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.convexity_slack.iter().all(|&s| s > 10.0 * r.tolerance));
    assert!(r.brunn_minkowski_margin > 0.0);
}

#[test]
fn suite_is_seeded() {
    let a = minkowski_suite(3, 4, 2).unwrap();
    let b = minkowski_suite(3, 4, 2).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.n_passed, 4);
}

#[test]
fn wl1_facet_bump_costs_three_times_variation() {
    let norm = Norm::weighted_l1(1.0 / 3.0, 3.0).unwrap();
    let rect = ConvexPolygon::rectangle(0.0, 0.0, 3.0, 1.0 / 3.0).unwrap();
    let facets = detect_facets(&rect, FACET_TOL);
    let bottom = facets.iter().find(|f| f.direction.x > 0.5).unwrap();
    let side = facets.iter().find(|f| f.direction.y > 0.5).unwrap();
    let bump = [(0.0, 0.0), (0.3, 0.2), (0.5, -0.1), (0.7, 0.1), (1.0, 0.0)];
    // Along e1 the normal direction costs 3, so θ⁺ − θ⁻ = 6; along e2 it costs 1/3.
    let r = perimeter_derivative_check(&norm, bottom, &bump).unwrap();
    assert!((r.gap - 6.0).abs() < 1e-9);
    assert!((r.predicted - 3.0 * r.total_variation).abs() < 1e-9);
    assert!(r.relative_error < 1e-6, "{r:?}");
    let r = perimeter_derivative_check(&norm, side, &bump).unwrap();
    assert!((r.gap - 2.0 / 3.0).abs() < 1e-9);
    assert!(r.relative_error < 1e-6, "{r:?}");
}

#[test]
fn bump_must_vanish_at_the_ends() {
    let facets = detect_facets(&square(1.0), FACET_TOL);
    assert!(perimeter_derivative_check(&Norm::l1(), &facets[0], &[(0.0, 0.0), (1.0, 0.5)]).is_err());
}

#[test]
fn sum_norm_wulff_octagon_satisfies_both_theorems() {
    let norm = parse_norm("sum:1*(p:1)+1*(rot:pi/4:(p:1))").unwrap();
    let w = norm.wulff_shape(256).unwrap();
    let r = analyze(&norm, &w);
    assert_eq!(r.facets.len(), 8);
    assert_eq!(r.corners.len(), 8);
    assert_eq!(r.degenerate_dirs.len(), 4);
    assert_eq!(r.additivity_cones.len(), 8);
    assert!(r.passed(), "{:?}", r.violations().collect::<Vec<_>>());
    assert!(corner_symmetry_violations(&w).is_empty());
}

#[test]
fn facets_without_degenerate_direction_are_flagged() {
    let r = analyze(&Norm::euclidean(), &square(1.0));
    assert_eq!(r.facet_violations.len(), 4);
    assert_eq!(r.corner_violations.len(), 4);
    let r = analyze(&Norm::l1(), &ConvexPolygon::regular(64, 1.0, 0.1).unwrap());
    // ℓ¹ predicts facets along both axes and corners for each quadrant.
    assert!(!r.facet_violations.is_empty());
    assert!(!r.corner_violations.is_empty());
}

#[test]
fn rectangle_family_minimum_moves_off_the_square() {
    let grid = parse_grid("0.5:0.25:4").unwrap();
    let r = counterexample_rectangles(3.0, &grid, None).unwrap();
    assert_eq!(r.argmin_a, 2.0);
    // n = 1 is the ordinary square family: the minimum sits at a = 1.
    let r = counterexample_rectangles(1.0, &grid, None).unwrap();
    assert_eq!(r.argmin_a, 1.0);
    assert!(counterexample_rectangles(0.5, &grid, None).is_err());
    assert!(parse_grid("1:0:2").is_err());
}

#[test]
fn stability_gap_grows_for_l1_square() {
    let side = PI.powf(2.0 / 3.0);
    let r = stability_trend(&Norm::l1(), &square(side), 1, 5, 10, 3).unwrap();
    assert_eq!(r.samples.len(), 50);
    assert!(r.positive && r.nondecreasing, "{:?}", r.decile_min_gaps);
    assert!(r.samples.iter().all(|s| (0.04..0.31).contains(&s.distance)));
}
