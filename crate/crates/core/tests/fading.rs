use agpf_core::fading::{
    band_index, band_index_exact, hyperfloor, hyperfloor_exponent, octagon_gauge, octagon_gauge_exact, octagon_radius,
    ring_radii, ring_radius, rho, tau, tau_exact, FadingSpec, RingMode, StepFadingSpec,
};
use agpf_core::geom::Point;
use agpf_core::PointQ;
use proptest::prelude::*;

fn fading(alpha: f64) -> FadingSpec {
    FadingSpec::new(alpha).unwrap()
}

#[test]
fn rejects_bad_parameters() {
    assert!(FadingSpec::new(-1.0).is_err());
    assert!(FadingSpec::new(f64::NAN).is_err());
    assert!(StepFadingSpec::circle(0.0).is_err());
    assert!(StepFadingSpec::circle(-0.5).is_err());
    assert!(hyperfloor(0.0, 2.0).is_err());
    assert!(hyperfloor(1.0, 1.0).is_err());
}

#[test]
fn hyperfloor_hits_exact_powers() {
    assert_eq!(hyperfloor(8.0, 2.0).unwrap(), 8.0);
    assert_eq!(hyperfloor(7.999, 2.0).unwrap(), 4.0);
    assert_eq!(hyperfloor(0.25, 2.0).unwrap(), 0.25);
    assert_eq!(hyperfloor_exponent(0.3, 2.0).unwrap(), -2);
    // Powers of an irrational base still land on themselves.
    let b = 1.2f64;
    for z in -30..30 {
        assert_eq!(hyperfloor_exponent(b.powi(z), b).unwrap(), z as i64);
    }
}

#[test]
fn alpha_zero_is_constant() {
    let f = fading(0.0);
    let st = StepFadingSpec::circle(0.5).unwrap();
    let g = Point::new(0.0, 0.0);
    assert_eq!(rho(&g, &Point::new(100.0, 0.0), &f), 1.0);
    assert_eq!(tau(&g, &Point::new(100.0, 0.0), &f, &st), 1.0);
    assert_eq!(ring_radii(&f, &st, 50.0), vec![1.0]);
}

#[test]
fn octagon_is_inscribed_in_the_unit_circle() {
    for k in 0..720 {
        let a = k as f64 * std::f64::consts::TAU / 720.0;
        let v = Point::new(a.cos(), a.sin());
        let g = octagon_gauge(&v);
        assert!(g >= 1.0 - 1e-12, "gauge {g} at angle {a}");
        assert!(g <= 1.0 / (std::f64::consts::PI / 8.0).cos() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn circle_step_is_sandwiched(x in -60.0f64..60.0, y in -60.0f64..60.0, ai in 0usize..3, ei in 0usize..3) {
        let f = fading(ai as f64);
        let eps = [0.2, 0.6, 1.0][ei];
        let st = StepFadingSpec::new(eps, RingMode::Circle, &f).unwrap();
        let (g, w) = (Point::new(0.0, 0.0), Point::new(x, y));
        let (r, t) = (rho(&g, &w, &f), tau(&g, &w, &f, &st));
        prop_assert!(t <= r && r / (1.0 + eps) < t, "rho {} tau {}", r, t);
    }

    #[test]
    fn octagon_step_is_sandwiched(x in -40.0f64..40.0, y in -40.0f64..40.0, ai in 1usize..3, ei in 0usize..3) {
        let f = fading(ai as f64);
        let eps = [0.2, 0.6, 1.0][ei];
        let st = StepFadingSpec::new(eps, RingMode::Octagon, &f).unwrap();
        let g = Point::new(0.0, 0.0);
        let w = Point::new(x, y);
        let (r, t) = (rho(&g, &w, &f), tau(&g, &w, &f, &st));
        prop_assert!(t <= r * (1.0 + 1e-12), "rho {} tau {}", r, t);
        prop_assert!(r / st.declared_factor() < t, "rho {} tau {}", r, t);
    }

    #[test]
    fn exact_and_float_bands_agree(nx in -40_000i64..40_000, ny in -40_000i64..40_000, ai in 1usize..3, ei in 0usize..3) {
        let f = fading(ai as f64);
        let eps = [0.2, 0.6, 1.0][ei];
        let st = StepFadingSpec::new(eps, RingMode::Octagon, &f).unwrap();
        let (x, y) = (nx as f64 / 1024.0, ny as f64 / 1024.0);
        let g: PointQ = Point::from_f64(0.0, 0.0);
        let w: PointQ = Point::from_f64(x, y);
        let zf = band_index(&Point::new(0.0, 0.0), &Point::new(x, y), &f, &st);
        prop_assert_eq!(zf, band_index_exact(&g, &w, &f, &st));
        prop_assert_eq!(tau_exact(&g, &w, &f, &st), tau(&Point::new(0.0, 0.0), &Point::new(x, y), &f, &st));
        let gq = agpf_core::scalar::rational_to_f64(&octagon_gauge_exact(&w));
        prop_assert!((gq - octagon_gauge(&Point::new(x, y))).abs() <= 1e-12 * gq.max(1.0));
    }

    #[test]
    fn step_is_monotone_along_rays(angle in 0.0f64..std::f64::consts::TAU, d1 in 0.0f64..30.0, d2 in 0.0f64..30.0, mi in 0usize..2) {
        let f = fading(2.0);
        let mode = [RingMode::Circle, RingMode::Octagon][mi];
        let st = StepFadingSpec::new(0.3, mode, &f).unwrap();
        let (a, b) = (d1.min(d2), d1.max(d2));
        let g = Point::new(0.0, 0.0);
        let u = Point::new(angle.cos(), angle.sin());
        let ta = tau(&g, &Point::new(a * u.x, a * u.y), &f, &st);
        let tb = tau(&g, &Point::new(b * u.x, b * u.y), &f, &st);
        prop_assert!(tb <= ta);
    }

    #[test]
    fn ring_radii_bracket_bands(eps in 0.05f64..1.5, alpha in 0.5f64..3.0, d in 1.0f64..50.0) {
        let f = fading(alpha);
        let st = StepFadingSpec::circle(eps).unwrap();
        let radii = ring_radii(&f, &st, d);
        prop_assert!(radii.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(*radii.last().unwrap() <= d * (1.0 + 1e-12));
        // Every radius drops rho by exactly one band.
        for (z, r) in radii.iter().enumerate().skip(1) {
            prop_assert!((r.powf(-alpha) * st.base().powi(z as i32) - 1.0).abs() < 1e-9);
            prop_assert!((ring_radius(z as i64, &f, &st) - r).abs() < 1e-12 * r);
            prop_assert!(octagon_radius(z as i64, &f, &st) <= *r);
        }
    }
}
