mod common;

use agpf_core::geom::{Point, PolygonWithHoles};
use agpf_core::visibility::{sees, visibility_overlay, visibility_polygon};
use agpf_core::Rational;
use common::{boundary_dist, sees_by_sampling, seg_dist, star, star_params};
use proptest::prelude::*;

/// Grid points inside `poly`, away from its boundary.
fn interior_grid(poly: &PolygonWithHoles<f64>, k: usize) -> Vec<Point<f64>> {
    let b = poly.bbox();
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let p = Point::new(
                b[0] + (b[1] - b[0]) * (i as f64 + 0.5) / k as f64,
                b[2] + (b[3] - b[2]) * (j as f64 + 0.5) / k as f64,
            );
            if poly.contains(&p) && boundary_dist(poly, &p) > 1e-6 {
                out.push(p);
            }
        }
    }
    out
}

#[test]
fn convex_guard_sees_everything() {
    let sq = common::square::<f64>(3.0);
    let vp = visibility_polygon(&sq, &Point::new(0.0, 0.0)).unwrap();
    assert!((vp.area() - 9.0).abs() < 1e-12);
}

#[test]
fn hole_casts_a_shadow() {
    let p = |x: f64, y: f64| Point::new(x, y);
    let poly = PolygonWithHoles::new(
        vec![p(0.0, 0.0), p(6.0, 0.0), p(6.0, 6.0), p(0.0, 6.0)],
        vec![vec![p(2.0, 2.0), p(2.0, 4.0), p(4.0, 4.0), p(4.0, 2.0)]],
    )
    .unwrap();
    let g = p(0.0, 3.0);
    let vp = visibility_polygon(&poly, &g).unwrap();
    assert!(!vp.contains(&p(5.0, 3.0)));
    assert!(vp.contains(&p(1.0, 3.0)));
    assert!(vp.contains(&p(5.0, 0.5)));
    // Two slivers beside the hole plus the trapezoid behind it between the
    // rays through the hole's near corners.
    let shadow = 2.0 * 1.0 + 0.5 * (4.0 + 6.0) * 2.0;
    assert!((vp.area() - (36.0 - 4.0 - shadow)).abs() < 1e-9, "area {}", vp.area());
}

#[test]
fn exact_and_float_visibility_agree_on_a_comb() {
    let inst = agpf_core::instances::generate_comb(3).unwrap();
    let pq = inst.polygon.clone();
    let pf: PolygonWithHoles<f64> = pq.cast();
    for g in pq.vertices() {
        let vq = visibility_polygon(&pq, g).unwrap();
        let vf = visibility_polygon(&pf, &g.to_f64()).unwrap();
        let aq: f64 = agpf_core::scalar::rational_to_f64(&vq.area());
        assert!((aq - vf.area()).abs() < 1e-9 * aq.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn visibility_polygon_matches_segment_sampling((radii, jitter, hole) in star_params(5, 12), gi in any::<prop::sample::Index>()) {
        let poly = star::<f64>(&radii, &jitter, hole);
        let verts: Vec<_> = poly.vertices().cloned().collect();
        let g = verts[gi.index(verts.len())];
        let vp = visibility_polygon(&poly, &g).unwrap();
        prop_assert!(vp.area() <= poly.area() + 1e-9);
        for q in interior_grid(&poly, 24) {
            // Sampling cannot resolve segments that graze a corner.
            let grazes = poly.vertices().any(|v| !v.coincides(&g) && seg_dist(v, &g, &q) < 1e-2);
            if grazes {
                continue;
            }
            let truth = sees_by_sampling(&poly, &g, &q);
            prop_assert_eq!(vp.contains(&q), truth, "polygon test at {:?}", q);
            prop_assert_eq!(sees(&poly, &g, &q), truth, "segment test at {:?}", q);
        }
    }

    #[test]
    fn kernel_point_sees_all_without_hole((radii, jitter, _h) in star_params(5, 12)) {
        let poly = star::<f64>(&radii, &jitter, false);
        let vp = visibility_polygon(&poly, &Point::new(0.0, 0.0)).unwrap();
        prop_assert!((vp.area() - poly.area()).abs() < 1e-9 * poly.area());
    }

    #[test]
    fn rational_visibility_area_is_bounded((radii, jitter, hole) in star_params(5, 8), gi in any::<prop::sample::Index>()) {
        let poly = star::<Rational>(&radii, &jitter, hole);
        let verts: Vec<_> = poly.vertices().cloned().collect();
        let g = &verts[gi.index(verts.len())];
        let vp = visibility_polygon(&poly, g).unwrap();
        prop_assert!(vp.area() <= poly.area());
        prop_assert!(vp.contains(g));
    }

    #[test]
    fn overlay_labels_match_visibility((radii, jitter, hole) in star_params(5, 9), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4)) {
        let poly = star::<f64>(&radii, &jitter, hole);
        let verts: Vec<_> = poly.vertices().cloned().collect();
        let guards: Vec<_> = picks.iter().map(|i| verts[i.index(verts.len())]).collect();
        let ov = visibility_overlay(&poly, &guards).unwrap();
        let total: f64 = ov.subdivision.faces.iter().map(|f| f.area).sum();
        prop_assert!((total - poly.area()).abs() < 1e-7 * poly.area());
        for (i, f) in ov.subdivision.faces.iter().enumerate() {
            let p = &f.interior;
            for (gi, g) in guards.iter().enumerate() {
                prop_assert_eq!(ov.label(i).contains(&gi), sees(&poly, g, p));
            }
        }
    }
}
