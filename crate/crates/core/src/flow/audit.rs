//! Post-hoc checks of the structural guarantees of a run.

use serde::Serialize;

use super::run::{step, FlowOutcome, FlowState, OutcomeKind, RunOptions, TraceRecord};
use super::FlowConfig;
use crate::ends::{classify_points, min_core_distance, EndsDecomposition, Position};
use crate::error::Result;
use crate::manifold::Manifold;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub pass: bool,
    /// Step index of the first violation.
    pub first_violation: Option<usize>,
    pub detail: String,
}

impl PropertyCheck {
    fn ok(name: &'static str, detail: impl Into<String>) -> Self {
        PropertyCheck {
            name,
            pass: true,
            first_violation: None,
            detail: detail.into(),
        }
    }

    fn violated(name: &'static str, step: usize, detail: impl Into<String>) -> Self {
        PropertyCheck {
            name,
            pass: false,
            first_violation: Some(step),
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Length increases tolerated as round-off.
const MONOTONE_SLACK: f64 = 1e-8;
/// Steps per window of the sufficient-decrease check.
const WINDOW: usize = 10;

fn step_slack(trace: &[TraceRecord]) -> f64 {
    trace
        .windows(2)
        .map(|w| w[1].dt * w[0].max_speed)
        .fold(0.0, f64::max)
}

/// Checks that need only the trace: monotone length, sufficient decrease
/// over windows of ten steps away from stationarity, containment in declared
/// convex balls, and preservation of the end the run started in.
pub fn check_flow_properties(trace: &[TraceRecord], config: &FlowConfig) -> PropertyReport {
    let mut checks = Vec::new();

    checks.push(
        match trace
            .windows(2)
            .find(|w| w[1].length > w[0].length + MONOTONE_SLACK)
        {
            Some(w) => PropertyCheck::violated(
                "monotone_length",
                w[1].step,
                format!("length rose from {} to {}", w[0].length, w[1].length),
            ),
            None => PropertyCheck::ok("monotone_length", format!("{} records", trace.len())),
        },
    );

    // the first variation predicts a decrease of Σ dt·(-dL/dt); demand a
    // quarter of it over every window that stays away from stationarity
    let mut window = PropertyCheck::ok("window_decrease", "no window left the stationary regime");
    let mut checked = 0;
    for w in trace.windows(WINDOW + 1) {
        if w[..WINDOW]
            .iter()
            .any(|r| r.max_residual <= config.tol_stat)
        {
            continue;
        }
        checked += 1;
        let predicted: f64 = w
            .windows(2)
            .map(|p| p[1].dt * (-p[0].length_rate).max(0.0))
            .sum();
        let drop = w[0].length - w[WINDOW].length;
        if drop + MONOTONE_SLACK < 0.25 * predicted {
            window = PropertyCheck::violated(
                "window_decrease",
                w[0].step,
                format!(
                    "dropped {drop:.3e}, expected at least {:.3e}",
                    0.25 * predicted
                ),
            );
            break;
        }
    }
    if window.pass {
        window.detail = format!("{checked} windows");
    }
    checks.push(window);

    let slack = step_slack(trace);
    if let Some(first) = trace.first() {
        for (b, &e0) in first.ball_excess.iter().enumerate() {
            if e0 > 0.0 {
                continue;
            }
            let name = "convex_ball_containment";
            checks.push(match trace.iter().find(|r| r.ball_excess[b] > slack) {
                Some(r) => PropertyCheck::violated(
                    name,
                    r.step,
                    format!("ball {b}: left by {:.3e}", r.ball_excess[b]),
                ),
                None => PropertyCheck::ok(name, format!("ball {b}: contained")),
            });
        }
        if let Some(g0) = first.end_gap {
            if g0 > 0.0 {
                let name = "end_preservation";
                checks.push(
                    match trace.iter().find(|r| r.end_gap.is_some_and(|g| g < -slack)) {
                        Some(r) => PropertyCheck::violated(
                            name,
                            r.step,
                            format!("entered the core by {:.3e}", -r.end_gap.unwrap()),
                        ),
                        None => PropertyCheck::ok(name, "never entered the core"),
                    },
                );
            }
        }
    }
    PropertyReport { checks }
}

/// One more step from a stationary flower moves no point by more than
/// `dt·tol_stat` (plus round-off).
pub fn check_fixed_point(
    m: &Manifold,
    outcome: &FlowOutcome,
    config: &FlowConfig,
) -> Result<PropertyCheck> {
    let name = "stationary_fixed_point";
    if !matches!(outcome.kind, OutcomeKind::StationaryFlower { .. }) {
        return Ok(PropertyCheck::ok(name, "not stationary"));
    }
    let mut state = FlowState::new(m, &outcome.final_flower, config)?;
    let before = state.flower.clone();
    let field = state.field(m, config)?;
    step(m, &mut state, &field, config)?;
    let mut moved: f64 = 0.0;
    for (p, q) in before.points().zip(state.flower.points()) {
        moved = moved.max(m.distance(p, q)?.value);
    }
    let allowed = config.dt * config.tol_stat + 1e-10;
    Ok(if moved <= allowed {
        PropertyCheck::ok(name, format!("moved {moved:.3e} <= {allowed:.3e}"))
    } else {
        PropertyCheck::violated(
            name,
            outcome.steps + 1,
            format!("moved {moved:.3e} > {allowed:.3e}"),
        )
    })
}

/// From an escaped flower, `extra` further steps never come back within the
/// escape radius of the core (up to one step of slack) nor leave the end.
pub fn check_absorbing_escape(
    m: &Manifold,
    outcome: &FlowOutcome,
    config: &FlowConfig,
    ends: &EndsDecomposition,
    extra: usize,
) -> Result<PropertyCheck> {
    let name = "absorbing_escape";
    let OutcomeKind::EscapedToEnd { end } = &outcome.kind else {
        return Ok(PropertyCheck::ok(name, "did not escape"));
    };
    let i = ends.end_index(end).unwrap_or(usize::MAX);
    let mut state = FlowState::new(m, &outcome.final_flower, config)?;
    state.steps = outcome.steps;
    for _ in 0..extra {
        let field = state.field(m, config)?;
        let dt = step(m, &mut state, &field, config)?;
        let slack = dt * field.max_speed;
        let nearest = min_core_distance(m, ends, state.flower.points());
        let inside = classify_points(m, ends, state.flower.points()) == Position::InEnd(i);
        if !inside || nearest < config.escape_radius - slack {
            return Ok(PropertyCheck::violated(
                name,
                state.steps,
                format!("core distance fell to {nearest:.6}"),
            ));
        }
    }
    Ok(PropertyCheck::ok(
        name,
        format!("{extra} further steps stayed in {end}"),
    ))
}

/// All checks applicable to the outcome.
pub fn audit_flow(
    m: &Manifold,
    outcome: &FlowOutcome,
    config: &FlowConfig,
    options: &RunOptions,
) -> Result<PropertyReport> {
    let mut report = check_flow_properties(&outcome.trace, config);
    if matches!(outcome.kind, OutcomeKind::StationaryFlower { .. }) {
        report.checks.push(check_fixed_point(m, outcome, config)?);
    }
    if let (OutcomeKind::EscapedToEnd { .. }, Some(d)) = (&outcome.kind, options.ends) {
        report
            .checks
            .push(check_absorbing_escape(m, outcome, config, d, 100)?);
    }
    Ok(report)
}
