//! Executing a scenario and writing its artifacts.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use super::{CheckSuite, Mode, Output, Scenario, NET_TOL_GEO, NET_TOL_STAT};
use crate::ends::check_local_convexity;
use crate::error::{Error, Result};
use crate::fill::{fill_2cage, Apex, DiskFilling, FillError};
use crate::flow::{
    audit_flow, run_flow_observed, FlowConfig, FlowOutcome, RunOptions, TraceRecord,
};
use crate::manifold::{Manifold, Point};
use crate::nets::{cage_to_flower, point_to_json, Net, NetDocument, PiecewiseGeodesicFlower};
use crate::svg::{Figure, Projection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Status {
    Pass,
    /// The run finished but a check or expectation did not hold.
    CheckFailed,
    /// The flow or a measurement stopped on a numerical error.
    NumericalFailure,
    /// The scenario could not be read or validated.
    Invalid,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
            Status::Invalid => 2,
            Status::NumericalFailure => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::CheckFailed => "FAIL(check)",
            Status::NumericalFailure => "FAIL(numerical)",
            Status::Invalid => "FAIL(parse)",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub name: String,
    pub status: Status,
    /// Deterministic summary; also written as `<name>.summary.json`.
    pub summary: Value,
    /// Outcome kind, `Checked` for check-only scenarios, or the error class.
    pub outcome: String,
    pub final_length: Option<f64>,
    pub wall_time: f64,
    /// The flow run behind the report, when there was one.
    pub flow: Option<FlowOutcome>,
}

#[derive(Clone, Debug, serde::Serialize)]
struct CheckResult {
    name: String,
    pass: bool,
    expected: bool,
    detail: String,
}

impl CheckResult {
    fn satisfied(&self) -> bool {
        self.pass == self.expected
    }
}

/// Trace records and flower snapshots kept at the requested strides.
struct Recorder {
    every: usize,
    svg_every: Option<usize>,
    rows: Vec<(TraceRecord, Option<Vec<Vec<Point>>>)>,
    snapshots: Vec<Vec<Vec<Point>>>,
}

fn chains(f: &PiecewiseGeodesicFlower) -> Vec<Vec<Point>> {
    (0..f.petals.len()).map(|j| f.chain(j)).collect()
}

impl Recorder {
    fn new(every: usize, svg_every: Option<usize>) -> Self {
        Recorder {
            every,
            svg_every,
            rows: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    fn observe(&mut self, record: &TraceRecord, flower: &PiecewiseGeodesicFlower) {
        if record.step % self.every == 0 {
            self.rows.push((record.clone(), Some(chains(flower))));
        }
        if self.svg_every.is_some_and(|k| record.step % k == 0) {
            self.snapshots.push(chains(flower));
        }
    }

    /// Makes the terminal state the last row.
    fn finish(&mut self, record: Option<&TraceRecord>, flower: &PiecewiseGeodesicFlower) {
        let Some(r) = record else { return };
        if self
            .rows
            .last()
            .is_some_and(|(last, _)| last.step == r.step)
        {
            self.rows.pop();
        }
        self.rows.push((r.clone(), Some(chains(flower))));
    }

    fn from_trace(trace: &[TraceRecord], every: usize) -> Self {
        let mut r = Recorder::new(every, None);
        for (k, rec) in trace.iter().enumerate() {
            if rec.step % every == 0 || k + 1 == trace.len() {
                r.rows.push((rec.clone(), None));
            }
        }
        r
    }

    fn jsonl(&self) -> String {
        let mut out = String::new();
        for (r, pts) in &self.rows {
            let mut line = json!({
                "step": r.step,
                "t": r.time,
                "dt": r.dt,
                "length": r.length,
                "max_residual": r.max_residual,
                "energy": r.energy,
            });
            if let Some(pts) = pts {
                line["points"] = pts
                    .iter()
                    .map(|c| c.iter().map(point_to_json).collect::<Vec<_>>())
                    .collect();
            }
            let _ = writeln!(out, "{line}");
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("step,t,dt,length,max_residual,energy,length_rate,max_speed\n");
        for (r, _) in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.step,
                r.time,
                r.dt,
                r.length,
                r.max_residual,
                r.energy,
                r.length_rate,
                r.max_speed
            );
        }
        out
    }
}

fn flower_svg(
    m: &Manifold,
    initial: &[Vec<Point>],
    snapshots: &[Vec<Vec<Point>>],
    last: &[Vec<Point>],
) -> String {
    let mut fig = Figure::new(Projection::for_manifold(m));
    for c in initial {
        fig.polyline(m, c, "#999999", 1.5);
    }
    for snap in snapshots {
        for c in snap {
            fig.polyline(m, c, "#8fb3d9", 0.8);
        }
    }
    for c in last {
        fig.polyline(m, c, "crimson", 2.0);
    }
    if let Some(p) = last.first().and_then(|c| c.first()) {
        fig.dot(m, p, "black");
    }
    let mut s = fig.render();
    s.push('\n');
    s
}

fn net_chains(doc: &NetDocument) -> Vec<Vec<Point>> {
    let net = doc.as_net();
    (0..net.edges.len()).map(|k| net.chain(k)).collect()
}

/// Artifacts of one run, written only when an output directory is given.
#[derive(Default)]
struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    fn add(&mut self, suffix: &str, body: String) {
        self.files.push((suffix.into(), body));
    }

    fn write(&self, dir: &Path, name: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (suffix, body) in &self.files {
            std::fs::write(dir.join(format!("{name}.{suffix}")), body)?;
        }
        Ok(())
    }
}

struct Verdict {
    status: Status,
    outcome: String,
    final_length: Option<f64>,
    fields: Vec<(&'static str, Value)>,
    checks: Vec<CheckResult>,
    flow: Option<FlowOutcome>,
}

impl Scenario {
    fn options(&self) -> RunOptions<'_> {
        RunOptions {
            ends: self.ends.as_ref(),
            convex_balls: self.convex_balls.clone(),
        }
    }

    fn expected(&self, name: &str) -> bool {
        self.expect.checks.get(name).copied().unwrap_or(true)
    }

    fn check(&self, name: impl Into<String>, pass: bool, detail: impl Into<String>) -> CheckResult {
        let name = name.into();
        CheckResult {
            expected: self.expected(&name),
            name,
            pass,
            detail: detail.into(),
        }
    }

    fn convexity_checks(&self) -> Result<Vec<CheckResult>> {
        let Some(d) = &self.ends else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, s) in d.sigmas.iter().enumerate() {
            let r = check_local_convexity(&self.manifold, d, i, self.convexity_samples, self.seed)?;
            out.push(self.check(
                format!("ends_convexity.{}", s.name),
                r.pass && r.valid,
                format!(
                    "{} pairs, {} solver failures, worst penetration {:.3e}",
                    r.pairs, r.solver_failures, r.worst_penetration
                ),
            ));
        }
        Ok(out)
    }

    /// Runs the scenario and writes the requested artifacts into `out`.
    /// Only I/O errors are returned; everything else ends up in the report.
    pub fn run(&self, out: Option<&Path>) -> Result<ScenarioReport> {
        let started = Instant::now();
        let mut artifacts = Artifacts::default();
        let verdict = match self.mode {
            Mode::Flow => self.run_flow(&mut artifacts),
            Mode::Check => self.run_check(&mut artifacts),
            Mode::Fill => self.run_fill(&mut artifacts),
        };
        let mut summary = serde_json::Map::new();
        summary.insert("name".into(), json!(self.name));
        summary.insert("seed".into(), json!(self.seed));
        summary.insert(
            "mode".into(),
            json!(match self.mode {
                Mode::Flow => "flow",
                Mode::Check => "check",
                Mode::Fill => "fill",
            }),
        );
        for (k, v) in verdict.fields {
            summary.insert(k.into(), v);
        }
        let mut expectations = Vec::new();
        if verdict.status != Status::NumericalFailure || self.mode != Mode::Check {
            let e = &self.expect;
            if let Some(kind) = &e.kind {
                expectations.push(json!({"what": "kind", "expected": kind, "actual": verdict.outcome, "pass": *kind == verdict.outcome}));
            }
            if let Some(end) = &e.end {
                let actual = summary
                    .get("outcome")
                    .and_then(|o| o.get("end"))
                    .cloned()
                    .unwrap_or(Value::Null);
                expectations.push(json!({"what": "end", "expected": end, "actual": actual, "pass": actual == json!(end)}));
            }
            if let Some(l) = e.length {
                let pass = verdict
                    .final_length
                    .is_some_and(|x| (x - l).abs() <= e.length_tol);
                expectations.push(json!({"what": "length", "expected": l, "tolerance": e.length_tol, "actual": verdict.final_length, "pass": pass}));
            }
            if let Some(r) = e.max_residual {
                let actual = summary.get("max_residual").and_then(Value::as_f64);
                let pass = actual.is_some_and(|x| x <= r);
                expectations.push(json!({"what": "max_residual", "expected_at_most": r, "actual": actual, "pass": pass}));
            }
        }
        let expectations_hold = expectations.iter().all(|x| x["pass"] == json!(true));
        let checks_hold = verdict.checks.iter().all(CheckResult::satisfied);
        let status = match verdict.status {
            Status::Pass if !(expectations_hold && checks_hold) => Status::CheckFailed,
            s => s,
        };
        summary.insert("checks".into(), serde_json::to_value(&verdict.checks)?);
        summary.insert("expectations".into(), Value::Array(expectations));
        summary.insert("status".into(), json!(status.label()));
        summary.insert("pass".into(), json!(status == Status::Pass));
        let summary = Value::Object(summary);
        if self.outputs.contains(&Output::Summary) {
            artifacts.add(
                "summary.json",
                format!("{}\n", serde_json::to_string_pretty(&summary)?),
            );
        }
        if let Some(dir) = out {
            artifacts.write(dir, &self.name)?;
        }
        Ok(ScenarioReport {
            name: self.name.clone(),
            status,
            summary,
            outcome: verdict.outcome,
            final_length: verdict.final_length,
            wall_time: started.elapsed().as_secs_f64(),
            flow: verdict.flow,
        })
    }

    fn flow_failure(
        &self,
        e: &Error,
        display: &dyn std::fmt::Display,
        fields: Vec<(&'static str, Value)>,
    ) -> Verdict {
        let class = if e.is_numerical() {
            "NumericalFailure"
        } else {
            "Invalid"
        };
        self.failure(class, display, fields)
    }

    fn failure(
        &self,
        class: &str,
        e: &dyn std::fmt::Display,
        fields: Vec<(&'static str, Value)>,
    ) -> Verdict {
        let mut fields = fields;
        fields.push(("error", json!(e.to_string())));
        Verdict {
            status: if class == "Invalid" {
                Status::Invalid
            } else {
                Status::NumericalFailure
            },
            outcome: class.into(),
            final_length: None,
            fields,
            checks: Vec::new(),
            flow: None,
        }
    }

    fn trace_artifacts(&self, rec: &Recorder, artifacts: &mut Artifacts) {
        if self.outputs.contains(&Output::JsonTrace) {
            artifacts.add("trace.jsonl", rec.jsonl());
        }
        if self.outputs.contains(&Output::CsvTrace) {
            artifacts.add("trace.csv", rec.csv());
        }
    }

    fn initial_flower(&self) -> Result<PiecewiseGeodesicFlower> {
        let m = &self.manifold;
        match &self.initial {
            NetDocument::Flower(f) => Ok(f.clone()),
            NetDocument::Cage(c) => cage_to_flower(m, c, 1.0)?.to_flower(m),
            NetDocument::Net(_) => Err(Error::invalid(
                "initial_net",
                "only flowers and cages can be flowed",
            )),
        }
    }

    fn run_flow(&self, artifacts: &mut Artifacts) -> Verdict {
        let m = &self.manifold;
        let config = self.config.as_ref().expect("flow scenarios carry a config");
        let flower = match self.initial_flower() {
            Ok(f) => f,
            Err(e) => return self.flow_failure(&e, &e, Vec::new()),
        };
        let options = self.options();
        let mut rec = Recorder::new(self.trace_every, self.svg_every);
        let result = run_flow_observed(m, &flower, config, &options, &mut |v| {
            rec.observe(v.record, &v.state.flower)
        });
        let outcome = match result {
            Ok(o) => o,
            Err(fe) => {
                rec.finish(fe.trace.last(), &fe.last_flower);
                self.trace_artifacts(&rec, artifacts);
                let fields = vec![
                    ("steps", json!(fe.steps)),
                    (
                        "max_residual",
                        json!(fe.trace.last().map(|r| r.max_residual)),
                    ),
                ];
                return self.flow_failure(&fe.error, &fe, fields);
            }
        };
        rec.finish(outcome.trace.last(), &outcome.final_flower);
        self.trace_artifacts(&rec, artifacts);
        if self.outputs.contains(&Output::Svg) {
            artifacts.add(
                "svg",
                flower_svg(
                    m,
                    &net_chains(&self.initial),
                    &rec.snapshots,
                    &chains(&outcome.final_flower),
                ),
            );
        }

        let mut checks = Vec::new();
        let mut status = Status::Pass;
        for suite in &self.checks {
            match suite {
                CheckSuite::FlowProperties => match audit_flow(m, &outcome, config, &options) {
                    Ok(report) => checks.extend(
                        report
                            .checks
                            .iter()
                            .map(|c| self.check(c.name, c.pass, c.detail.clone())),
                    ),
                    Err(e) => {
                        status = Status::NumericalFailure;
                        checks.push(self.check("flow_properties", false, e.to_string()));
                    }
                },
                CheckSuite::Net => {
                    checks.push(self.net_check(m, &outcome.final_flower.to_net(), Some(config)))
                }
                CheckSuite::EndsConvexity => match self.convexity_checks() {
                    Ok(c) => checks.extend(c),
                    Err(e) => {
                        status = Status::NumericalFailure;
                        checks.push(self.check("ends_convexity", false, e.to_string()));
                    }
                },
                CheckSuite::Filling => {}
            }
        }
        let petal_lengths = outcome
            .final_flower
            .measure(m)
            .map(|x| x.per_petal_lengths)
            .unwrap_or_default();
        let fields = vec![
            (
                "outcome",
                serde_json::to_value(&outcome.kind).unwrap_or(Value::Null),
            ),
            ("steps", json!(outcome.steps)),
            ("time", json!(outcome.time)),
            ("initial_length", json!(outcome.initial_length)),
            ("final_length", json!(outcome.final_length)),
            (
                "max_residual",
                json!(outcome.trace.last().map(|r| r.max_residual)),
            ),
            ("petal_lengths", json!(petal_lengths)),
        ];
        Verdict {
            status,
            outcome: outcome.kind.name().into(),
            final_length: Some(outcome.final_length),
            fields,
            checks,
            flow: Some(outcome),
        }
    }

    fn net_check(&self, m: &Manifold, net: &Net, config: Option<&FlowConfig>) -> CheckResult {
        let (ts, tg) = config.map_or((NET_TOL_STAT, NET_TOL_GEO), |c| (c.tol_stat, c.tol_geo));
        match net.measure(m) {
            Ok(x) => self.check(
                "net",
                x.is_geodesic_net(ts, tg),
                format!(
                    "residual {:.3e}, deviation {:.3e}",
                    x.max_residual, x.geodesic_deviation
                ),
            ),
            Err(e) => self.check("net", false, e.to_string()),
        }
    }

    fn run_check(&self, artifacts: &mut Artifacts) -> Verdict {
        let m = &self.manifold;
        let measurement = match self.initial.measure(m) {
            Ok(x) => x,
            Err(e) => return self.failure("NumericalFailure", &e, Vec::new()),
        };
        let mut status = Status::Pass;
        let mut checks = Vec::new();
        for suite in &self.checks {
            match suite {
                CheckSuite::Net => {
                    checks.push(self.net_check(m, &self.initial.as_net(), self.config.as_ref()))
                }
                CheckSuite::EndsConvexity => match self.convexity_checks() {
                    Ok(c) => checks.extend(c),
                    Err(e) => {
                        status = Status::NumericalFailure;
                        checks.push(self.check("ends_convexity", false, e.to_string()));
                    }
                },
                _ => {}
            }
        }
        if self.outputs.contains(&Output::Svg) {
            artifacts.add("svg", flower_svg(m, &[], &[], &net_chains(&self.initial)));
        }
        let fields = vec![
            ("max_residual", json!(measurement.max_residual)),
            ("final_length", json!(measurement.total_length)),
            (
                "measurement",
                serde_json::to_value(&measurement).unwrap_or(Value::Null),
            ),
        ];
        Verdict {
            status,
            outcome: "Checked".into(),
            final_length: Some(measurement.total_length),
            fields,
            checks,
            flow: None,
        }
    }

    /// Fills the scenario's closed curve; the filling is returned alongside
    /// the verdict so callers can inspect the sheets.
    pub fn fill(&self) -> std::result::Result<DiskFilling, FillError> {
        let config = self
            .config
            .as_ref()
            .ok_or_else(|| FillError::Input(Error::invalid("flow_config", "missing")))?;
        let curve = self.initial_flower()?.chain(0);
        fill_2cage(&self.manifold, &curve, config, &self.options())
    }

    fn run_fill(&self, artifacts: &mut Artifacts) -> Verdict {
        let m = &self.manifold;
        let config = self.config.as_ref().expect("fill scenarios carry a config");
        let filling = match self.fill() {
            Ok(f) => f,
            Err(FillError::Unfilled(o)) => {
                let rec = Recorder::from_trace(&o.trace, self.trace_every);
                self.trace_artifacts(&rec, artifacts);
                let fields = vec![
                    (
                        "outcome",
                        serde_json::to_value(&o.kind).unwrap_or(Value::Null),
                    ),
                    ("steps", json!(o.steps)),
                    ("final_length", json!(o.final_length)),
                ];
                let mut v = self.failure("Unfilled", &FillError::Unfilled(o.clone()), fields);
                v.flow = Some(*o);
                return v;
            }
            Err(FillError::Flow(fe)) => {
                let rec = Recorder::from_trace(&fe.trace, self.trace_every);
                self.trace_artifacts(&rec, artifacts);
                return self.flow_failure(&fe.error, &fe, vec![("steps", json!(fe.steps))]);
            }
            Err(FillError::Input(e)) => {
                return self.flow_failure(&e, &e, Vec::new());
            }
        };
        let rec = Recorder::from_trace(&filling.flow.trace, self.trace_every);
        self.trace_artifacts(&rec, artifacts);
        artifacts.add("fill.json", format!("{}\n", filling.to_json(m)));
        if self.outputs.contains(&Output::Svg) {
            artifacts.add("svg", filling.to_svg(m));
        }
        let mut checks = Vec::new();
        let mut status = Status::Pass;
        for suite in &self.checks {
            match suite {
                CheckSuite::Filling => checks.extend(self.filling_checks(m, config, &filling)),
                CheckSuite::FlowProperties => {
                    match audit_flow(m, &filling.flow, config, &self.options()) {
                        Ok(report) => checks.extend(
                            report
                                .checks
                                .iter()
                                .map(|c| self.check(c.name, c.pass, c.detail.clone())),
                        ),
                        Err(e) => {
                            status = Status::NumericalFailure;
                            checks.push(self.check("flow_properties", false, e.to_string()));
                        }
                    }
                }
                CheckSuite::EndsConvexity => match self.convexity_checks() {
                    Ok(c) => checks.extend(c),
                    Err(e) => {
                        status = Status::NumericalFailure;
                        checks.push(self.check("ends_convexity", false, e.to_string()));
                    }
                },
                CheckSuite::Net => {}
            }
        }
        let apex = match &filling.apex {
            Apex::Point(p) => json!({"point": point_to_json(p)}),
            Apex::End(e) => json!({"end": e}),
        };
        let o = &filling.flow;
        let fields = vec![
            (
                "outcome",
                serde_json::to_value(&o.kind).unwrap_or(Value::Null),
            ),
            ("apex", apex),
            ("sheets", json!(filling.sheets.len())),
            ("steps", json!(o.steps)),
            ("initial_length", json!(o.initial_length)),
            ("final_length", json!(o.final_length)),
            (
                "max_residual",
                json!(o.trace.last().map(|r| r.max_residual)),
            ),
        ];
        Verdict {
            status,
            outcome: o.kind.name().into(),
            final_length: Some(o.final_length),
            fields,
            checks,
            flow: Some(filling.flow),
        }
    }

    fn filling_checks(
        &self,
        m: &Manifold,
        config: &FlowConfig,
        f: &DiskFilling,
    ) -> Vec<CheckResult> {
        let mut out = vec![
            self.check(
                "filling.monotone",
                f.lengths_monotone(1e-8),
                "sheet lengths non-increasing",
            ),
            self.check(
                "filling.boundary",
                f.sheets.first().is_some_and(|s| s.points == f.boundary),
                "first sheet is the boundary",
            ),
        ];
        match &f.apex {
            Apex::Point(_) => {
                let last = f.sheets.last().map(|s| s.points.as_slice()).unwrap_or(&[]);
                let mut diameter: f64 = 0.0;
                for (i, p) in last.iter().enumerate() {
                    for q in &last[i + 1..] {
                        diameter =
                            diameter.max(m.distance(p, q).map_or(f64::INFINITY, |d| d.value));
                    }
                }
                out.push(self.check(
                    "filling.apex",
                    diameter < config.segment_bound / 100.0,
                    format!("last sheet diameter {diameter:.3e}"),
                ));
            }
            Apex::End(name) => {
                let onset = self.ends.as_ref().and_then(|d| {
                    f.escape_onset(m, d)
                        .map(|(k, i)| (k, d.sigmas[i].name.clone()))
                });
                let pass = onset
                    .as_ref()
                    .is_some_and(|(k, end)| end == name && f.sheets[*k].s < 1.0);
                let detail = match onset {
                    Some((k, end)) => {
                        format!("sheets from {k} (s = {:.4}) lie in {end}", f.sheets[k].s)
                    }
                    None => "late sheets are not inside one end".into(),
                };
                out.push(self.check("filling.escape", pass, detail));
            }
        }
        for (b, ball) in self.convex_balls.iter().enumerate() {
            let within = |pts: &[Point]| {
                pts.iter().all(|p| {
                    m.distance(&ball.center, p)
                        .is_ok_and(|d| d.value <= ball.radius + 1e-9)
                })
            };
            if within(&f.boundary) {
                let pass = f.sheets.iter().all(|s| within(&s.points));
                out.push(self.check(
                    format!("filling.locality[{b}]"),
                    pass,
                    "sheets stay in the ball",
                ));
            }
        }
        out
    }
}
