use serde_json::json;

use super::*;

fn equator() -> serde_json::Value {
    json!({
        "name": "eq",
        "manifold": "sphere",
        "initial_net": {"generator": "equator_petal", "offset": 0.05},
        "flow_config": {"L": 6.5, "delta": 1.0},
        "checks": ["flow_properties", "net"],
        "outputs": ["summary", "json_trace", "csv_trace", "svg"],
        "expect": {"kind": "StationaryFlower", "length": std::f64::consts::TAU, "length_tol": 1e-3}
    })
}

fn invalid_path(v: serde_json::Value) -> String {
    match Scenario::from_json(&v, None) {
        Err(Error::Invalid { path, .. }) => path,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn validation_errors_name_the_field() {
    let mut v = equator();
    v["bogus"] = json!(1);
    assert_eq!(invalid_path(v), "bogus");

    let mut v = equator();
    v["initial_net"]["generator"] = json!("nope");
    assert_eq!(invalid_path(v), "initial_net.generator");

    let mut v = equator();
    v["initial_net"]["radius"] = json!(1.0);
    assert_eq!(invalid_path(v), "initial_net.radius");

    let mut v = equator();
    v["flow_config"]["tol_stat"] = json!(-1.0);
    assert_eq!(invalid_path(v), "flow_config.tol_stat");

    let mut v = equator();
    v["manifold"] = json!({"kind": "round_sphere", "radius": -2.0});
    assert_eq!(invalid_path(v), "manifold.radius");

    let mut v = equator();
    v["checks"] = json!(["ends_convexity"]);
    assert_eq!(invalid_path(v), "checks[0]");

    let mut v = equator();
    v["outputs"] = json!(["png"]);
    assert_eq!(invalid_path(v), "outputs[0]");

    let mut v = equator();
    v["expect"]["colour"] = json!("red");
    assert_eq!(invalid_path(v), "expect.colour");

    let mut v = equator();
    v["name"] = json!("a/b");
    assert_eq!(invalid_path(v), "name");

    let mut v = equator();
    v["initial_net"] = json!({"base": [1.0, 0.0], "petals": [[[1.0, 1.0], "x"]]});
    assert_eq!(invalid_path(v), "initial_net.petals[0][1]");
}

#[test]
fn seed_override_replaces_the_file_seed() {
    let mut v = equator();
    v["seed"] = json!(3);
    assert_eq!(Scenario::from_json(&v, None).unwrap().seed, 3);
    assert_eq!(Scenario::from_json(&v, Some(11)).unwrap().seed, 11);
}

#[test]
fn random_loops_follow_the_seed() {
    let v = |seed| {
        json!({
            "name": "r", "seed": seed, "manifold": "plane",
            "initial_net": {"generator": "random_loop", "radius": 0.5, "jitter": 0.3},
            "flow_config": {"L": 4.0, "delta": 0.5}
        })
    };
    let pts = |s: Scenario| match s.initial {
        NetDocument::Flower(f) => f.petals[0].points.clone(),
        _ => unreachable!(),
    };
    let a = pts(Scenario::from_json(&v(1), None).unwrap());
    let b = pts(Scenario::from_json(&v(1), None).unwrap());
    let c = pts(Scenario::from_json(&v(2), None).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn summaries_are_byte_identical_across_runs() {
    let s = Scenario::from_json(&equator(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let r1 = s.run(Some(dir.path())).unwrap();
    let first = std::fs::read(dir.path().join("eq.summary.json")).unwrap();
    let trace = std::fs::read(dir.path().join("eq.trace.jsonl")).unwrap();
    let r2 = s.run(Some(dir.path())).unwrap();
    assert_eq!(
        first,
        std::fs::read(dir.path().join("eq.summary.json")).unwrap()
    );
    assert_eq!(
        trace,
        std::fs::read(dir.path().join("eq.trace.jsonl")).unwrap()
    );
    assert_eq!(r1.summary, r2.summary);
    assert_eq!(r1.status, Status::Pass);
    for f in ["eq.trace.csv", "eq.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    // every trace line carries the petal chains
    let line: serde_json::Value =
        serde_json::from_slice(trace.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(
        line["points"][0].as_array().unwrap().len(),
        s.config.unwrap().points_per_petal + 2
    );
}

#[test]
fn failed_expectations_fail_the_scenario() {
    let mut v = equator();
    v["expect"]["kind"] = json!("ContractedToPoint");
    let r = Scenario::from_json(&v, None).unwrap().run(None).unwrap();
    assert_eq!(r.status, Status::CheckFailed);
    assert_eq!(r.status.exit_code(), 1);
    assert_eq!(r.summary["pass"], json!(false));
}

#[test]
fn budget_violations_are_reported_as_input_errors() {
    let mut v = equator();
    v["flow_config"]["L"] = json!(3.0);
    v["flow_config"]["delta"] = json!(0.5);
    let r = Scenario::from_json(&v, None).unwrap().run(None).unwrap();
    assert_eq!(r.status, Status::Invalid);
    assert!(r.summary["error"].as_str().unwrap().contains("budget"));
}

#[test]
fn check_mode_measures_without_flowing() {
    let v = json!({
        "name": "theta", "mode": "check", "manifold": "sphere",
        "initial_net": {"generator": "theta_net"},
        "checks": ["net"],
        "expect": {"max_residual": 1e-8, "length": 3.0 * std::f64::consts::PI, "length_tol": 1e-9}
    });
    let r = Scenario::from_json(&v, None).unwrap().run(None).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.summary);
    assert_eq!(r.outcome, "Checked");
}

#[test]
fn cages_flow_through_their_retraction() {
    let v = json!({
        "name": "c", "manifold": "torus",
        "initial_net": {"generator": "constant_cage", "point": [0.3, 0.3]},
        "flow_config": {"L": 1.0, "delta": 0.25},
        "expect": {"kind": "ContractedToPoint"}
    });
    let r = Scenario::from_json(&v, None).unwrap().run(None).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.summary);
    assert_eq!(r.flow.unwrap().steps, 0);
}

#[test]
fn batch_records_parse_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let empty = run_batch(dir.path(), 2, Some(out.path())).unwrap();
    assert!(empty.rows.is_empty());
    assert_eq!(empty.exit_code(), 0);

    std::fs::write(
        dir.path().join("a.json"),
        serde_json::to_string(&equator()).unwrap(),
    )
    .unwrap();
    std::fs::write(dir.path().join("b.json"), "{ not json").unwrap();
    let mut dup = equator();
    dup["initial_net"]["offset"] = json!(0.0);
    std::fs::write(
        dir.path().join("c.json"),
        serde_json::to_string(&dup).unwrap(),
    )
    .unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let report = run_batch(dir.path(), 2, Some(out.path())).unwrap();
    let labels: Vec<_> = report
        .rows
        .iter()
        .map(|r| (r.name.as_str(), r.status.label()))
        .collect();
    assert_eq!(
        labels,
        [
            ("eq", "FAIL(parse)"),
            ("b", "FAIL(parse)"),
            ("eq", "FAIL(parse)")
        ]
    );
    assert_eq!(report.exit_code(), 2);

    std::fs::remove_file(dir.path().join("c.json")).unwrap();
    let report = run_batch(dir.path(), 1, Some(out.path())).unwrap();
    assert_eq!(report.rows[0].status, Status::Pass);
    assert_eq!(report.rows[1].status, Status::Invalid);
    let table = std::fs::read_to_string(out.path().join("batch.tsv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("eq\tPASS\tStationaryFlower\t6.283185"));
}

#[test]
fn batch_rows_match_single_runs_for_any_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let loops = [0.01, 0.02, 0.03];
    for (k, r) in loops.iter().enumerate() {
        let v = json!({
            "name": format!("loop{k}"), "manifold": "plane",
            "initial_net": {"generator": "round_loop", "radius": r},
            "flow_config": {"L": 0.4, "delta": 0.05}
        });
        std::fs::write(dir.path().join(format!("{k}.json")), v.to_string()).unwrap();
    }
    let one = run_batch(dir.path(), 1, None).unwrap();
    let three = run_batch(dir.path(), 3, None).unwrap();
    for (a, b) in one.rows.iter().zip(&three.rows) {
        assert_eq!(
            (&a.name, a.status, &a.outcome, a.final_length),
            (&b.name, b.status, &b.outcome, b.final_length)
        );
        let single = Scenario::load(&a.file).unwrap().run(None).unwrap();
        assert_eq!(single.final_length, a.final_length);
    }
}
