use num_complex::Complex64;
use proptest::prelude::*;

use squeeze::convex::{convex_bound, envelope_rows, stretch_map};
use squeeze::frame::build_frame;
use squeeze::image::RadiusOptions;
use squeeze::linalg::hermitian_eigen;
use squeeze::maps::{AffineMap, MapAtom, MapChain};
use squeeze::strict::{centering_map, contact_data, hermitian_form_at, strict_bound};
use squeeze::{CMatrix, CPoint, ConvexDomainSpec};

fn point(n: usize, r: f64) -> impl Strategy<Value = CPoint> {
    prop::collection::vec((-r..r, -r..r), n).prop_map(|v| CPoint::from_pairs(&v))
}

fn unit_direction(n: usize) -> impl Strategy<Value = CPoint> {
    point(n, 1.0).prop_filter_map("nonzero", |p| p.normalized())
}

fn light() -> RadiusOptions {
    RadiusOptions {
        directions: Some(512),
        boundary_samples: 2000,
        ..RadiusOptions::default()
    }
}

fn ellipsoid() -> ConvexDomainSpec {
    ConvexDomainSpec::axis_ellipsoid(CPoint::zeros(2), &[1.0, 2.0]).unwrap()
}

proptest! {
    #[test]
    fn cayley_is_an_involution(z in point(3, 3.0)) {
        prop_assume!((Complex64::new(1.0, 0.0) + z[0]).norm() > 1e-2);
        let k = MapAtom::Cayley { dim: 3 };
        let back = k.apply(&k.apply(&z).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&z) < 1e-9 * (1.0 + z.norm_sqr()));
    }

    #[test]
    fn ball_automorphisms_are_involutions_preserving_the_sphere(
        a in point(2, 0.6), z in point(2, 0.7), s in unit_direction(2)
    ) {
        prop_assume!(a.norm() < 0.95);
        let phi = MapAtom::BallAutomorphism { center: a.clone() };
        let back = phi.apply(&phi.apply(&z).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&z) < 1e-11);
        prop_assert!(phi.apply(&a).unwrap().norm() < 1e-12);
        prop_assert!((phi.apply(&s).unwrap().norm() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn chains_round_trip(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        shift in point(2, 1.0),
        centers in prop::collection::vec(0.5f64..3.0, 2),
        lambda in 0.01f64..10.0,
        z in point(2, 0.5),
    ) {
        let m = CMatrix::from_fn(2, 2, |i, j| {
            let (re, im) = entries[2 * i + j];
            Complex64::new(re + if i == j { 2.5 } else { 0.0 }, im)
        });
        let chain = MapChain::new(2, vec![
            MapAtom::Affine(AffineMap::new(m, shift).unwrap()),
            MapAtom::Stretch { lambda },
            MapAtom::Scale { factor: 0.3 },
            MapAtom::CoordMoebius { centers },
        ]).unwrap();
        let w = match chain.apply(&z) {
            Ok(w) => w,
            Err(_) => return Ok(()),
        };
        let back = chain.invert(&w).unwrap();
        prop_assert!(back.max_abs_diff(&z) < 1e-9 * chain.condition_estimate());
    }

    #[test]
    fn points_print_and_parse_exactly(z in point(4, 1e3)) {
        let parsed: CPoint = z.to_string().parse().unwrap();
        prop_assert_eq!(parsed, z);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frames_and_envelopes_are_valid_inside_the_ellipsoid(d in unit_direction(2), frac in 0.0f64..0.999) {
        let e = ellipsoid();
        let t = e.ray_exit(&e.witness, &d).unwrap();
        let q = e.witness.along(&d, frac * t);
        let frame = build_frame(&e, &q).unwrap();
        prop_assert!(frame.invariant_violations(&e).is_empty());
        let rows = envelope_rows(&e, &frame, &stretch_map(&frame)).unwrap();
        prop_assert!(rows.invariant_violations().is_empty());
    }

    #[test]
    fn frames_are_valid_inside_the_cube(q in point(2, 0.99)) {
        let cube = ConvexDomainSpec::unit_cube(2);
        let frame = build_frame(&cube, &q).unwrap();
        prop_assert!(frame.invariant_violations(&cube).is_empty());
    }

    #[test]
    fn curvature_spectrum_is_rotation_invariant(phase in 0.0f64..6.2, mix in 0.0f64..1.5, d in unit_direction(2)) {
        // the Hermitian form depends on the unitary completion only up to
        // conjugation, so its eigenvalues are intrinsic
        let m = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(1.0, 0.0),
            (1, 1) => Complex64::new(0.4, 0.0),
            (0, 1) => Complex64::new(0.1, 0.15),
            _ => Complex64::new(0.1, -0.15),
        });
        let (c, s) = (mix.cos(), mix.sin());
        let u = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(c, 0.0),
            (0, 1) => -Complex64::from_polar(s, -phase),
            (1, 0) => Complex64::from_polar(s, phase),
            _ => Complex64::new(c, 0.0),
        });
        let base = ConvexDomainSpec::hermitian_ellipsoid(CPoint::zeros(2), m.clone()).unwrap();
        let t = base.ray_exit(&base.witness, &d).unwrap();
        let q = base.witness.along(&d, 0.9 * t);
        let rotated = ConvexDomainSpec::hermitian_ellipsoid(CPoint::zeros(2), &u * m * u.adjoint()).unwrap();
        let uq = squeeze::point::mat_vec(&u, &q);
        let spectrum = |dom: &ConvexDomainSpec, p: &CPoint| {
            let contact = contact_data(dom, p, 500, 0).unwrap();
            let a = centering_map(&contact).unwrap();
            hermitian_eigen(&hermitian_form_at(dom, &contact, &a).unwrap().matrix).0
        };
        let (e1, e2) = (spectrum(&base, &q), spectrum(&rotated, &uq));
        for (x, y) in e1.iter().zip(&e2) {
            prop_assert!((x - y).abs() < 1e-9, "{:?} vs {:?}", e1, e2);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn convex_bounds_are_positive_and_at_most_one(d in unit_direction(2), frac in 0.0f64..0.999) {
        let e = ellipsoid();
        let t = e.ray_exit(&e.witness, &d).unwrap();
        let cert = convex_bound(&e, &e.witness.along(&d, frac * t), &light()).unwrap();
        prop_assert!(cert.bound > 0.05 && cert.bound <= 1.0);
        prop_assert!(cert.r_in <= cert.r_out + 1e-9);
    }

    #[test]
    fn strict_inner_radius_never_exceeds_outer(d in unit_direction(2), gap in 0.001f64..0.2) {
        let e = ellipsoid();
        let t = e.ray_exit(&e.witness, &d).unwrap();
        let q = e.witness.along(&d, t - gap);
        match strict_bound(&e, &q, &light()) {
            Ok(cert) => prop_assert!(cert.r_in <= cert.r_out + 1e-9),
            Err(squeeze::SqueezeError::NonUniqueNearestPoint) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
