use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chart::{self, IvpSettings};
use super::sphere::chart0::SphereChart;
use super::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn all_manifolds() -> Vec<Manifold> {
    vec![
        Manifold::plane(),
        Manifold::sphere(1.0),
        Manifold::unit_torus(),
        Manifold::revolution(Profile::SechBulge),
        Manifold::revolution(Profile::Hyperbola),
        Manifold::revolution(Profile::Paraboloid),
        Manifold::revolution(Profile::Catenoid),
    ]
}

fn random_point(m: &Manifold, rng: &mut impl Rng) -> Point {
    let coords = match (m.kind, m.working_region) {
        (ManifoldKind::RoundSphere { .. }, _) => {
            [rng.gen_range(0.05..PI - 0.05), rng.gen_range(0.0..TAU)]
        }
        (ManifoldKind::FlatTorus { .. }, _) => [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
        (_, WorkingRegion::Band { u_min, u_max }) => {
            let pad = 0.2 * (u_max - u_min);
            [
                rng.gen_range(u_min + pad..u_max - pad),
                rng.gen_range(0.0..TAU),
            ]
        }
        _ => [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)],
    };
    m.point(coords).unwrap()
}

/// Random tangent vector at `p` with metric norm `len`.
fn random_vector(m: &Manifold, p: &Point, len: f64, rng: &mut impl Rng) -> [f64; 2] {
    let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0f64)];
    let n = m.norm(p, v).max(1e-12);
    [v[0] * len / n, v[1] * len / n]
}

#[test]
fn metric_examples() {
    let plane = Manifold::plane();
    let g = plane.metric_at(&Point::new([3.0, -2.0])).unwrap();
    assert_eq!(g, [[1.0, 0.0], [0.0, 1.0]]);

    let s = Manifold::sphere(1.0);
    let th = 0.7;
    let g = s.metric_at(&Point::new([th, 1.3])).unwrap();
    assert!(close(g[0][0], 1.0, 1e-15) && close(g[1][1], th.sin().powi(2), 1e-15));
    assert_eq!(g[0][1], 0.0);

    let m = Manifold::revolution(Profile::SechBulge);
    let u0: f64 = 0.8;
    let g = m.metric_at(&Point::new([u0, 2.0])).unwrap();
    let rho = 1.0 / u0.cosh();
    let drho = -rho * u0.tanh();
    assert!(close(g[0][0], 1.0 + drho * drho, 1e-14));
    assert!(close(g[1][1], rho * rho, 1e-14));
}

#[test]
fn metric_errors_outside_domain() {
    let m = Manifold::revolution(Profile::SechBulge);
    assert!(matches!(
        m.metric_at(&Point::new([10.0, 0.0])),
        Err(Error::Domain(_))
    ));
    let s = Manifold::sphere(1.0);
    assert!(matches!(
        s.metric_at(&Point::new([0.0, 0.0])),
        Err(Error::Domain(_))
    ));
    assert!(s.metric_at(&Point::new([4.0, 0.0])).is_err());
}

#[test]
fn metric_is_positive_definite_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in all_manifolds() {
        for _ in 0..1000 {
            let p = random_point(&m, &mut rng);
            let g = m.metric_at(&p).unwrap();
            assert_eq!(g[0][1], g[1][0]);
            let tr = g[0][0] + g[1][1];
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            assert!(tr / 2.0 - disc > 0.0, "{} at {p:?}", m.id);
        }
    }
}

#[test]
fn shoot_examples() {
    let plane = Manifold::plane();
    let p = plane.point([0.0, 0.0]).unwrap();
    let (q, v) = plane
        .geodesic_shoot(&p, &TangentVector::new(p, [1.0, 0.0]), 2.0)
        .unwrap();
    assert_eq!(q.coords, [2.0, 0.0]);
    assert_eq!(v.components, [1.0, 0.0]);

    let s = Manifold::sphere(1.0);
    let p = s.point([FRAC_PI_2, 0.0]).unwrap();
    let (q, _) = s
        .geodesic_shoot(&p, &TangentVector::new(p, [0.0, 1.0]), PI)
        .unwrap();
    let e = s.embed(&q);
    assert!(close(e[0], -1.0, 1e-12) && e[1].abs() < 1e-12 && e[2].abs() < 1e-12);

    let m = Manifold::revolution(Profile::SechBulge);
    let p = m.point([0.0, 0.3]).unwrap();
    let (q, v) = m
        .geodesic_shoot(&p, &TangentVector::new(p, [0.0, 1.0]), TAU)
        .unwrap();
    assert!(q.coords[0].abs() < 1e-9, "{q:?}");
    assert!(close(q.coords[1], 0.3, 1e-9), "{q:?}");
    assert!(close(m.norm(&q, v.components), 1.0, 1e-9));
}

#[test]
fn shooting_out_of_the_band_is_an_escape_event() {
    let m = Manifold::revolution(Profile::SechBulge);
    let p = m.point([2.0, 0.0]).unwrap();
    let r = m.geodesic_shoot(&p, &TangentVector::new(p, [1.0, 0.0]), 3.0);
    assert!(matches!(r, Err(Error::LeftWorkingRegion { .. })), "{r:?}");
}

#[test]
fn minimizing_geodesic_examples() {
    let plane = Manifold::plane();
    let seg = plane
        .minimizing_geodesic(&Point::new([0.0, 0.0]), &Point::new([3.0, 4.0]))
        .unwrap();
    assert!(close(seg.length, 5.0, 1e-14));
    assert_eq!(seg.samples.first().unwrap().coords, [0.0, 0.0]);
    assert!(close(seg.samples.last().unwrap().coords[1], 4.0, 1e-14));

    let s = Manifold::sphere(1.0);
    let seg = s
        .minimizing_geodesic(&Point::new([FRAC_PI_2, 0.1]), &Point::new([FRAC_PI_2, 0.5]))
        .unwrap();
    assert!(close(seg.length, 0.4, 1e-12));

    let t = Manifold::unit_torus();
    let seg = t
        .minimizing_geodesic(&Point::new([0.1, 0.1]), &Point::new([0.9, 0.1]))
        .unwrap();
    assert!(close(seg.length, 0.2, 1e-12));
    assert!(close(seg.initial_velocity.components[0], -1.0, 1e-12));
}

#[test]
fn minimizing_geodesic_rejects_far_points() {
    let s = Manifold::sphere(1.0);
    let r = s.minimizing_geodesic(&Point::new([FRAC_PI_2, 0.0]), &Point::new([FRAC_PI_2, 2.0]));
    assert!(matches!(r, Err(Error::OutsideUniqueness { .. })));
}

#[test]
fn bvp_and_ivp_agree_on_revolution_surfaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in all_manifolds() {
        for _ in 0..40 {
            let p = random_point(&m, &mut rng);
            let v = random_vector(&m, &p, 0.2 * m.injectivity_floor.min(1.0), &mut rng);
            let Ok((q, _)) = m.exp(&p, v, 1.0) else {
                continue;
            };
            let seg = m.minimizing_geodesic(&p, &q).unwrap();
            let (back, _) = m
                .geodesic_shoot(&p, &seg.initial_velocity, seg.length)
                .unwrap();
            let d = m.chart_delta(&back, &q);
            assert!(d[0].hypot(d[1]) < 1e-6, "{}: {back:?} vs {q:?}", m.id);
            assert!(close(seg.length, m.norm(&p, v), 1e-8), "{}", m.id);
        }
    }
}

#[test]
fn geodesic_speed_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for m in all_manifolds() {
        for _ in 0..30 {
            let p = random_point(&m, &mut rng);
            let v = random_vector(&m, &p, 1.0, &mut rng);
            for k in 1..=5 {
                let t = 0.1 * k as f64 * m.injectivity_floor.min(2.0);
                let Ok((q, w)) = m.exp(&p, v, t) else { break };
                assert!((m.norm(&q, w) - 1.0).abs() <= 1e-6, "{} t={t}", m.id);
            }
        }
    }
}

fn octant_holonomy(m: &Manifold) -> f64 {
    // N -> A -> B -> N, each side split in two halves
    let corners = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let mut path = Vec::new();
    for k in 0..3 {
        let a = corners[k];
        let b = corners[(k + 1) % 3];
        let mid = [
            (a[0] + b[0]) / 2f64.sqrt(),
            (a[1] + b[1]) / 2f64.sqrt(),
            (a[2] + b[2]) / 2f64.sqrt(),
        ];
        path.push(sphere::from_embedding(1.0, a));
        path.push(sphere::from_embedding(1.0, mid));
    }
    path.push(path[0]);
    // unit vector at N pointing toward A, expressed via the ambient frame
    let start = path[0];
    let v0 = sphere::tangent_from_ambient(1.0, &start, [1.0, 0.0, 0.0]);
    let mut v = TangentVector::new(start, v0);
    for w in path.windows(2) {
        let seg = m.minimizing_geodesic(&w[0], &w[1]).unwrap();
        v = m.parallel_transport(&v, &seg).unwrap();
    }
    let amb = sphere::tangent_to_ambient(1.0, &v.base, v.components);
    // angle in the tangent plane at N (x-y plane)
    amb[1].atan2(amb[0]).abs()
}

#[test]
fn holonomy_of_octant_triangle_equals_its_area() {
    let m = Manifold::sphere(1.0);
    let angle = octant_holonomy(&m);
    assert!(close(angle, FRAC_PI_2, 1e-10), "holonomy {angle}");
}

#[test]
fn transport_examples() {
    let plane = Manifold::plane();
    let seg = plane
        .minimizing_geodesic(&Point::new([0.0, 0.0]), &Point::new([1.0, 2.0]))
        .unwrap();
    let v = TangentVector::new(seg.start, [0.3, -0.7]);
    assert_eq!(
        plane.parallel_transport(&v, &seg).unwrap().components,
        [0.3, -0.7]
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in all_manifolds() {
        let p = random_point(&m, &mut rng);
        let v = random_vector(&m, &p, 0.1 * m.injectivity_floor.min(1.0), &mut rng);
        let (q, _) = m.exp(&p, v, 1.0).unwrap();
        let seg = m.minimizing_geodesic(&p, &q).unwrap();
        let moved = m.parallel_transport(&seg.initial_velocity, &seg).unwrap();
        for k in 0..2 {
            assert!(
                close(
                    moved.components[k],
                    seg.terminal_velocity.components[k],
                    1e-7
                ),
                "{}: {moved:?} vs {:?}",
                m.id,
                seg.terminal_velocity
            );
        }
    }
}

#[test]
fn transport_rejects_mismatched_base() {
    let plane = Manifold::plane();
    let seg = plane
        .minimizing_geodesic(&Point::new([0.0, 0.0]), &Point::new([1.0, 0.0]))
        .unwrap();
    let v = TangentVector::new(Point::new([5.0, 5.0]), [1.0, 0.0]);
    assert!(matches!(
        plane.parallel_transport(&v, &seg),
        Err(Error::Domain(_))
    ));
}

#[test]
fn distance_examples() {
    let plane = Manifold::plane();
    assert_eq!(
        plane
            .distance(&Point::new([0.0, 0.0]), &Point::new([3.0, 4.0]))
            .unwrap()
            .value,
        5.0
    );
    let p = Point::new([1.0, 1.0]);
    assert_eq!(plane.distance(&p, &p).unwrap().value, 0.0);
    let s = Manifold::sphere(1.0);
    let d = s
        .distance(&Point::new([0.0, 0.0]), &Point::new([FRAC_PI_2, 1.0]))
        .unwrap();
    assert!(close(d.value, FRAC_PI_2, 1e-14) && !d.upper_bound_only);
    let h = Manifold::revolution(Profile::SechBulge);
    let far = h
        .distance(&Point::new([-2.0, 0.0]), &Point::new([2.0, 3.0]))
        .unwrap();
    assert!(far.upper_bound_only);
    assert!(far.value > 4.0);
}

#[test]
fn chart_integrator_matches_closed_form_on_the_sphere() {
    // independent route: generic Christoffel integration in chart 0
    let chart = SphereChart { r: 1.0 };
    let ivp = IvpSettings {
        max_step: 0.01,
        tol: 1e-12,
        max_doublings: 10,
    };
    let s = Manifold::sphere(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let p = s
            .point_in_chart([rng.gen_range(1.0..2.1), rng.gen_range(0.5..5.5)], 0)
            .unwrap();
        if p.chart != 0 {
            continue;
        }
        let v = random_vector(&s, &p, 0.3, &mut rng);
        let w = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let end = chart::integrate(&chart, p.coords, v, Some(w), 1.0, &ivp).unwrap();
        let (q, vq) = s.exp(&p, v, 1.0).unwrap();
        let conn = s.connect(&p, &q).unwrap();
        let wq = s.transport(&conn, w).unwrap();
        // bring the closed-form results to chart 0 for comparison
        let q0 = Point {
            coords: end.x,
            chart: 0,
        };
        let e_num = sphere::embed(1.0, &q0);
        let e_cf = s.embed(&q);
        for k in 0..3 {
            assert!(close(e_num[k], e_cf[k], 1e-9));
        }
        let a = sphere::tangent_to_ambient(1.0, &q0, end.v);
        let b = sphere::tangent_to_ambient(1.0, &q, vq);
        let c = sphere::tangent_to_ambient(1.0, &q0, end.w);
        let d = sphere::tangent_to_ambient(1.0, &q, wq);
        for k in 0..3 {
            assert!(close(a[k], b[k], 1e-8));
            assert!(close(c[k], d[k], 1e-8));
        }
    }
}

#[test]
fn registry_and_json_round_trip() {
    let m = Manifold::from_json(
        &serde_json::json!({"kind":"surface_of_revolution","profile":"sech_bulge"}),
    )
    .unwrap();
    assert_eq!(
        m.kind,
        ManifoldKind::SurfaceOfRevolution {
            profile: Profile::SechBulge
        }
    );
    let again = Manifold::from_json(&m.to_json()).unwrap();
    assert_eq!(again, m);
    assert!(Manifold::from_json(&serde_json::json!("unit_sphere")).is_ok());
    assert!(Manifold::from_json(&serde_json::json!("klein_bottle")).is_err());
    let bad = Manifold::from_json(&serde_json::json!({"kind":"round_sphere","radius":-1.0}));
    assert!(matches!(bad, Err(Error::Invalid { .. })));
}

#[test]
fn sphere_points_near_poles_switch_chart() {
    let s = Manifold::sphere(1.0);
    let p = s.point([0.0, 0.0]).unwrap();
    assert_eq!(p.chart, 1);
    assert!(s.metric_at(&p).is_ok());
    let q = s.point([FRAC_PI_4, 0.0]).unwrap();
    assert_eq!(q.chart, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_is_an_isometry(u in -1.5f64..1.5, phi in 0.0f64..TAU, a in 0.0f64..TAU, b in 0.0f64..TAU, len in 0.01f64..0.2) {
        let m = Manifold::revolution(Profile::SechBulge);
        let p = m.point([u, phi]).unwrap();
        let g = m.metric_at(&p).unwrap();
        let v = [len * a.cos() / g[0][0].sqrt(), len * a.sin() / g[1][1].sqrt()];
        let w = [b.cos() / g[0][0].sqrt(), b.sin() / g[1][1].sqrt()];
        let (q, _) = m.exp(&p, v, 1.0).unwrap();
        let conn = m.connect(&p, &q).unwrap();
        let moved = m.transport(&conn, w).unwrap();
        prop_assert!((m.norm(&q, moved) - m.norm(&p, w)).abs() <= 1e-8 * m.norm(&p, w));
        // angle with the geodesic tangent is preserved too
        let before = m.inner(&p, w, conn.velocity);
        let after = m.inner(&q, moved, conn.terminal);
        prop_assert!((before - after).abs() <= 1e-8);
    }

    #[test]
    fn triangle_inequality_on_close_triples(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in [Manifold::sphere(1.0), Manifold::revolution(Profile::Hyperbola), Manifold::unit_torus()] {
            let p = random_point(&m, &mut rng);
            let step = 0.1 * m.injectivity_floor.min(1.0);
            let v = random_vector(&m, &p, step, &mut rng);
            let (q, _) = m.exp(&p, v, 1.0).unwrap();
            let w = random_vector(&m, &q, step, &mut rng);
            let (r, _) = m.exp(&q, w, 1.0).unwrap();
            let pr = m.distance(&p, &r).unwrap().value;
            let pq = m.distance(&p, &q).unwrap().value;
            let qr = m.distance(&q, &r).unwrap().value;
            prop_assert!(pr <= pq + qr + 1e-6);
            prop_assert!((m.distance(&r, &p).unwrap().value - pr).abs() <= 1e-8);
        }
    }
}
