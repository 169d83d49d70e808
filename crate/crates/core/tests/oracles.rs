//! Pipeline outputs against independent brute-force or closed-form oracles.

use num_complex::Complex64;
use squeeze::convex::convex_bound;
use squeeze::convex::stretch_map;
use squeeze::frame::build_frame;
use squeeze::image::{inner_radius, outer_radius, RadiusOptions};
use squeeze::maps::{MapAtom, MapChain};
use squeeze::sampling::{random_direction, rng};
use squeeze::strict::{envelope_radius, nearest_boundary, strict_bound, ENVELOPE_INFLATION};
use squeeze::{CPoint, ConvexDomainSpec};

use std::f64::consts::PI;

fn opts() -> RadiusOptions {
    RadiusOptions {
        boundary_samples: 20_000,
        ..RadiusOptions::default()
    }
}

#[test]
fn moebius_disc_image_inner_radius() {
    // z ↦ z/(2 − z) maps the unit disc onto {|w − 1/3| < 2/3}
    let disc = ConvexDomainSpec::unit_ball(1);
    let chain = MapChain::new(1, vec![MapAtom::CoordMoebius { centers: vec![1.0] }]).unwrap();
    let r = inner_radius(&chain, &disc, &opts()).unwrap();
    assert!((r.value - 1.0 / 3.0).abs() < 1e-4, "{}", r.value);
}

#[test]
fn convex_ball_bound_matches_forward_boundary_distance() {
    // the inner radius is dist(0, F(∂𝔹)); sample ∂𝔹 forward
    let ball = ConvexDomainSpec::unit_ball(2);
    let cert = convex_bound(&ball, &CPoint::zeros(2), &opts()).unwrap();
    let mut r = rng(21);
    let mut best = f64::INFINITY;
    for _ in 0..100_000 {
        let s = random_direction(2, &mut r);
        let w: Vec<Complex64> = s
            .coords()
            .iter()
            .map(|z| z / (Complex64::new(2.0, 0.0) - z) / 2f64.sqrt())
            .collect();
        best = best.min(CPoint::new(w).norm());
    }
    let exact = (1.0 / 3.0) / 2f64.sqrt();
    assert!(best >= exact - 1e-12);
    assert!((cert.bound - exact).abs() < 1e-4, "{}", cert.bound);
    assert!(cert.bound <= best + 1e-9);
}

#[test]
fn nearest_boundary_matches_grid_search() {
    // ∂E = {(cos a·e^{iθ}, 2 sin a·e^{iφ})}; coarse 100³ grid, then a zoomed 100³ grid
    let e = ConvexDomainSpec::axis_ellipsoid(CPoint::zeros(2), &[1.0, 2.0]).unwrap();
    let q = CPoint::from_pairs(&[(0.9, 0.0), (0.1, 0.0)]);
    let at = |a: f64, t: f64, f: f64| {
        CPoint::new(vec![
            Complex64::from_polar(a.cos(), t),
            Complex64::from_polar(2.0 * a.sin(), f),
        ])
    };
    let search = |c: (f64, f64, f64), h: (f64, f64, f64)| {
        let mut best = (f64::INFINITY, c);
        for i in 0..100 {
            for j in 0..100 {
                for k in 0..100 {
                    let a = c.0 + h.0 * (i as f64 / 99.0 - 0.5);
                    let t = c.1 + h.1 * (j as f64 / 99.0 - 0.5);
                    let f = c.2 + h.2 * (k as f64 / 99.0 - 0.5);
                    let d = at(a, t, f).distance(&q);
                    if d < best.0 {
                        best = (d, (a, t, f));
                    }
                }
            }
        }
        best
    };
    let (_, c) = search((PI / 4.0, 0.0, 0.0), (PI / 2.0, 2.0 * PI, 2.0 * PI));
    let step = (PI / 2.0 / 99.0 * 4.0, 2.0 * PI / 99.0 * 4.0, 2.0 * PI / 99.0 * 4.0);
    let (dist, c) = search(c, step);
    let oracle = at(c.0, c.1, c.2);

    let (b, _) = nearest_boundary(&e, &q).unwrap();
    assert!((b.distance(&q) - dist).abs() < 1e-6, "{} vs {dist}", b.distance(&q));
    assert!(b.distance(&q) <= dist + 1e-12);
    assert!(b.max_abs_diff(&oracle) < 1e-3, "{b} vs {oracle}");
}

#[test]
fn envelope_radius_matches_closed_form_ratio() {
    // with z = (r·e^{iθ}, 2√(1−r²)·e^{iφ}) and b = (1, 0):
    // ‖z − b‖²/(2 Re⟨b − z, ν⟩) = (1 − 2r cos θ + r² + 4(1 − r²)) / (2(1 − r cos θ))
    let e = ConvexDomainSpec::axis_ellipsoid(CPoint::zeros(2), &[1.0, 2.0]).unwrap();
    let b = CPoint::from_pairs(&[(1.0, 0.0), (0.0, 0.0)]);
    let mut sup = 0.0f64;
    // the sup is approached as r → 1, so the grid is refined there
    let rs = (0..2000)
        .map(|i| -1.0 + 2.0 * i as f64 / 1999.0)
        .chain((1..=8).map(|k| 1.0 - 10f64.powi(-k)));
    for r in rs {
        for j in 0..200 {
            let c = (PI * j as f64 / 199.0).cos();
            let den = 2.0 * (1.0 - r * c);
            if den > 1e-9 {
                sup = sup.max((1.0 - 2.0 * r * c + r * r + 4.0 * (1.0 - r * r)) / den);
            }
        }
    }
    let got = envelope_radius(&e, &b, &b, 20_000, 0).unwrap() / (1.0 + ENVELOPE_INFLATION);
    assert!((got - sup).abs() < 1e-6, "{got} vs {sup}");
    assert!((got - 4.0).abs() < 1e-6);
}

#[test]
fn strict_ball_bound_matches_explicit_image() {
    // G(𝔹) = {1 − ‖w‖² > (λ/2)|1 − w₁|²}; along w = r·d the boundary radius
    // is the positive root of (1 + λ|d₁|²/2) r² − λ Re(d₁) r − (1 − λ/2) = 0
    let lambda: f64 = 0.1;
    let ball = ConvexDomainSpec::unit_ball(2);
    let cert = strict_bound(&ball, &CPoint::from_pairs(&[(0.9, 0.0), (0.0, 0.0)]), &opts()).unwrap();
    let radius = |re: f64, abs2: f64| {
        let a = 1.0 + lambda * abs2 / 2.0;
        let b = -lambda * re;
        let c = -(1.0 - lambda / 2.0);
        (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
    };
    let mut oracle = f64::INFINITY;
    for i in 0..=400 {
        let m = i as f64 / 400.0;
        for j in 0..=400 {
            oracle = oracle.min(radius(m * (PI * j as f64 / 400.0).cos(), m * m));
        }
    }
    assert!((cert.r_out - 1.0).abs() < 1e-6, "{}", cert.r_out);
    assert!((cert.bound - oracle).abs() < 1e-4, "{} vs {oracle}", cert.bound);

    // exact membership of the certified sphere in the closed-form image
    let mut r = rng(4);
    for _ in 0..100_000 {
        let w = random_direction(2, &mut r).scale(cert.bound * (1.0 - 1e-6));
        let one = Complex64::new(1.0, 0.0);
        assert!(1.0 - w.norm_sqr() > 0.5 * lambda * (one - w[0]).norm_sqr(), "{w}");
    }
}

#[test]
fn stretch_map_sends_an_ellipsoid_onto_the_ball() {
    let e = ConvexDomainSpec::axis_ellipsoid(CPoint::zeros(2), &[1.0, 2.0]).unwrap();
    let frame = build_frame(&e, &CPoint::zeros(2)).unwrap();
    let chain = MapChain::new(2, vec![MapAtom::Affine(stretch_map(&frame))]).unwrap();
    let inner = inner_radius(&chain, &e, &opts()).unwrap();
    let outer = outer_radius(&chain, &e, &opts()).unwrap();
    assert!((inner.value - 1.0).abs() < 1e-6, "{}", inner.value);
    assert!((outer.value - 1.0).abs() < 1e-6, "{}", outer.value);
}
