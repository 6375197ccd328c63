use std::f64::consts::{FRAC_PI_2, TAU};

use proptest::prelude::*;

use super::*;
use crate::manifold::{Manifold, Point};
use crate::nets::{chain_connections, equator_petal, round_loop, Cage, PiecewiseGeodesicFlower};

fn plane_config(l: f64, delta: f64) -> FlowConfig {
    FlowConfig::new(&Manifold::plane(), l, delta).unwrap()
}

fn conns_of(m: &Manifold, f: &PiecewiseGeodesicFlower) -> Vec<Vec<crate::manifold::Connection>> {
    (0..f.petals.len())
        .map(|j| chain_connections(m, &f.chain(j)).unwrap())
        .collect()
}

fn flower(m: &Manifold, base: [f64; 2], petals: &[&[[f64; 2]]]) -> PiecewiseGeodesicFlower {
    let petals = petals
        .iter()
        .map(|p| p.iter().map(|c| Point::new(*c)).collect())
        .collect();
    PiecewiseGeodesicFlower::new(m, Point::new(base), petals).unwrap()
}

#[test]
fn equilateral_corner_has_speed_root_three() {
    let m = Manifold::plane();
    let f = flower(&m, [0.0, 0.0], &[&[[1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]]]);
    let v = vector_field(&m, &f, &conns_of(&m, &f), &plane_config(3.0, 2.0)).unwrap();
    assert_eq!(v.weights, vec![0.0]);
    assert!((m.norm(&f.base, v.base) - 3f64.sqrt()).abs() < 1e-14);
}

#[test]
fn equator_field_vanishes() {
    let m = Manifold::sphere(1.0);
    let f = equator_petal(&m, 11, 0.0).unwrap();
    let c = FlowConfig::new(&m, 6.5, 1.0).unwrap();
    let v = vector_field(&m, &f, &conns_of(&m, &f), &c).unwrap();
    assert!(m.norm(&f.base, v.base) < 1e-8);
    assert!(v.max_residual < 1e-8);
    assert!(v.petals[0]
        .iter()
        .zip(&f.petals[0].points)
        .all(|(v, p)| m.norm(p, *v) < 1e-8));
}

#[test]
fn short_petal_follows_the_base() {
    let m = Manifold::plane();
    let h = 3f64.sqrt() / 2.0;
    let s = 0.05;
    let f = flower(
        &m,
        [0.0, 0.0],
        &[&[[1.0, 0.0], [0.5, h]], &[[-s, 0.0], [-0.5 * s, -h * s]]],
    );
    let c = plane_config(3.2, 2.0);
    let v = vector_field(&m, &f, &conns_of(&m, &f), &c).unwrap();
    assert_eq!(v.weights, vec![0.0, 1.0]);
    assert!(!v.blending && !v.all_short);
    // the base only feels the large petal
    assert!((v.base[0] - 1.5).abs() < 1e-14 && (v.base[1] - h).abs() < 1e-14);
    for (p, got) in f.petals[1].points.iter().zip(&v.petals[1]) {
        let r = p.coords[0].hypot(p.coords[1]);
        let want = [v.base[0] - p.coords[0] / r, v.base[1] - p.coords[1] / r];
        assert!((got[0] - want[0]).abs() < 1e-14 && (got[1] - want[1]).abs() < 1e-14);
    }
}

#[test]
fn blending_weight_is_a_smoothstep() {
    let a = 0.2;
    assert_eq!(short_weight(0.05, a), 1.0);
    assert_eq!(short_weight(0.1, a), 1.0);
    assert_eq!(short_weight(0.2, a), 0.0);
    assert!((short_weight(0.15, a) - 0.5).abs() < 1e-15);
    let mut prev = 1.0;
    for k in 0..=100 {
        let w = short_weight(0.1 + 0.1 * k as f64 / 100.0, a);
        assert!(w <= prev);
        prev = w;
    }
}

/// Regular 12-gon with a wobble, as a single petal.
fn wobbly_polygon(m: &Manifold, center: [f64; 2], r: f64, wobble: f64) -> PiecewiseGeodesicFlower {
    let at = |k: usize| {
        let phi = TAU * k as f64 / 12.0;
        let rr = r * (1.0 + wobble * (3.0 * phi).cos());
        [center[0] + rr * phi.cos(), center[1] + rr * phi.sin()]
    };
    let base = at(0);
    let pts: Vec<[f64; 2]> = (1..12).map(at).collect();
    flower(m, base, &[&pts])
}

#[test]
fn first_variation_matches_finite_differences() {
    for m in [Manifold::plane(), Manifold::sphere(1.0)] {
        let center = if m.id == "euclidean_plane" {
            [0.0, 0.0]
        } else {
            [FRAC_PI_2, 1.0]
        };
        let f = wobbly_polygon(&m, center, 0.5, 0.1);
        let c = FlowConfig {
            points_per_petal: 11,
            ..FlowConfig::new(&m, 4.0, 1.0).unwrap()
        };
        let state = FlowState::new(&m, &f, &c).unwrap();
        let field = state.field(&m, &c).unwrap();
        let fv = first_variation(&m, &f, &c).unwrap();
        assert!(!fv.blending);
        assert!((fv.rate + fv.energy).abs() < 1e-12 * fv.energy);
        let h = 1e-5;
        let moved = advance(&m, &state.flower, &field, h).unwrap();
        let fd = (moved.length(&m).unwrap() - state.length()) / h;
        assert!(
            (fd + fv.energy).abs() <= (0.05 * fv.energy).max(1e-6),
            "{} vs {}",
            fd,
            -fv.energy
        );
    }
}

#[test]
fn stationary_flower_is_a_fixed_point() {
    let m = Manifold::sphere(1.0);
    let c = FlowConfig::new(&m, 6.5, 1.0).unwrap();
    let f = equator_petal(&m, c.points_per_petal, 0.0).unwrap();
    let mut state = FlowState::new(&m, &f, &c).unwrap();
    let before = state.flower.clone();
    let field = state.field(&m, &c).unwrap();
    step(&m, &mut state, &field, &c).unwrap();
    for (p, q) in before.points().zip(state.flower.points()) {
        assert!(m.distance(p, q).unwrap().value < 1e-10);
    }
}

#[test]
fn tiny_loop_contracts_near_its_center() {
    let m = Manifold::plane();
    let c = FlowConfig {
        max_steps: 10_000,
        ..plane_config(1.0, 0.05)
    };
    let f = round_loop(&m, [0.3, -0.2], 0.01, 12).unwrap();
    let out = run_flow(&m, &f, &c, &RunOptions::default()).unwrap();
    let OutcomeKind::ContractedToPoint { point } = out.kind else {
        panic!("{:?}", out.kind.name())
    };
    assert!(out.steps < 500, "{}", out.steps);
    assert!((point.coords[0] - 0.3).hypot(point.coords[1] + 0.2) < 0.02);
    assert_eq!(out.final_length, 0.0);
    assert!(check_flow_properties(&out.trace, &c).all_pass());
}

#[test]
fn constant_cage_contracts_immediately() {
    let m = Manifold::unit_torus();
    let p = Point::new([0.25, 0.5]);
    let edges = [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .map(|k| (k, vec![p, p]))
        .collect();
    let cage = Cage::new(&m, vec![p; 3], edges).unwrap();
    let c = FlowConfig::new(&m, 1.0, 0.25).unwrap();
    let out = run_cage_flow(&m, &cage, &c, &RunOptions::default()).unwrap();
    assert_eq!(out.steps, 0);
    assert!(matches!(out.kind, OutcomeKind::ContractedToPoint { point } if point == p));
}

#[test]
fn perturbed_equator_settles_on_a_great_circle() {
    let m = Manifold::sphere(1.0);
    let c = FlowConfig::new(&m, 6.5, 1.0).unwrap();
    let f = equator_petal(&m, c.points_per_petal, 0.05).unwrap();
    let opts = RunOptions::default();
    let out = run_flow(&m, &f, &c, &opts).unwrap();
    let OutcomeKind::StationaryFlower { measurement } = &out.kind else {
        panic!("{}", out.kind.name())
    };
    // segments are arcs of one great circle
    assert!(
        (measurement.total_length - TAU).abs() < 1e-6,
        "{}",
        measurement.total_length
    );
    assert!(out.steps > 0);
    assert!(measurement.max_residual <= c.tol_stat);
    let report = audit_flow(&m, &out, &c, &opts).unwrap();
    assert!(report.all_pass(), "{report:?}");
}

#[test]
fn corrupted_trace_is_flagged_at_the_right_step() {
    let m = Manifold::plane();
    let c = plane_config(2.0, 0.5);
    let f = wobbly_polygon(&m, [0.0, 0.0], 0.2, 0.2);
    let out = run_flow(
        &m,
        &f,
        &FlowConfig {
            max_steps: 40,
            ..c.clone()
        },
        &RunOptions::default(),
    )
    .unwrap();
    assert!(check_flow_properties(&out.trace, &c).all_pass());
    let mut bad = out.trace.clone();
    bad[17].length = bad[16].length + 1e-6;
    let report = check_flow_properties(&bad, &c);
    let mono = report.get("monotone_length").unwrap();
    assert!(!mono.pass);
    assert_eq!(mono.first_violation, Some(17));
}

#[test]
fn flow_stays_in_a_convex_ball() {
    let m = Manifold::sphere(1.0);
    let center = m.point([FRAC_PI_2, 0.0]).unwrap();
    let f = wobbly_polygon(&m, [FRAC_PI_2, 0.0], 0.3, 0.3);
    let c = FlowConfig {
        max_steps: 300,
        ..FlowConfig::new(&m, 2.5, 0.4).unwrap()
    };
    let opts = RunOptions {
        ends: None,
        convex_balls: vec![ConvexBall {
            center,
            radius: 0.45,
        }],
    };
    let out = run_flow(&m, &f, &c, &opts).unwrap();
    assert!(out.trace[0].ball_excess[0] <= 0.0);
    let report = audit_flow(&m, &out, &c, &opts).unwrap();
    assert!(
        report.get("convex_ball_containment").unwrap().pass,
        "{report:?}"
    );
}

#[test]
fn config_json_overrides() {
    let m = Manifold::sphere(1.0);
    let c = FlowConfig::from_json(&m, &serde_json::json!({"L": 6.5, "delta": 1.0})).unwrap();
    assert_eq!(
        (c.segment_bound, c.points_per_petal, c.dt, c.short_radius),
        (0.5, 13, 0.025, 0.125)
    );
    let o = FlowConfig::from_json(
        &m,
        &serde_json::json!({"L": 6.5, "delta": 1.0, "I": 0.25, "max_steps": 7}),
    )
    .unwrap();
    assert_eq!((o.points_per_petal, o.max_steps), (26, 7));
    let bad = FlowConfig::from_json(&m, &serde_json::json!({"L": 6.5, "delta": 1.0, "bogus": 1}));
    assert!(matches!(bad, Err(crate::Error::Invalid { path, .. }) if path == "flow_config.bogus"));
    assert!(
        FlowConfig::from_json(&m, &serde_json::json!({"L": 6.5, "delta": 1.0, "I": 2.0})).is_err()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generic_first_variation_is_minus_the_energy(
        radii in proptest::collection::vec(0.3f64..0.6, 9),
    ) {
        let m = Manifold::plane();
        let pts: Vec<[f64; 2]> = radii
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let phi = TAU * (k + 1) as f64 / 10.0;
                [r * phi.cos() - 0.45, r * phi.sin()]
            })
            .collect();
        let f = flower(&m, [0.0, 0.0], &[&pts]);
        let c = FlowConfig { points_per_petal: 9, ..plane_config(5.0, 1.5) };
        let fv = first_variation(&m, &f, &c).unwrap();
        prop_assert!(!fv.blending);
        prop_assert!(fv.rate <= 0.0);
        prop_assert!((fv.rate + fv.energy).abs() <= 1e-12 * fv.energy.max(1.0));
    }

    #[test]
    fn steps_never_lengthen(wobble in 0.0f64..0.3, r in 0.2f64..0.5) {
        let m = Manifold::plane();
        let c = plane_config(4.0, 0.6);
        let f = wobbly_polygon(&m, [0.1, 0.0], r, wobble);
        let mut state = FlowState::new(&m, &f, &c).unwrap();
        for _ in 0..20 {
            let before = state.length();
            let field = state.field(&m, &c).unwrap();
            step(&m, &mut state, &field, &c).unwrap();
            prop_assert!(state.length() <= before + 1e-8);
        }
    }
}
