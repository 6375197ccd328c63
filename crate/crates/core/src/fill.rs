//! Disk fillings of closed curves, built from the snapshots of their flow.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::ends::{classify_points, EndsDecomposition, Position};
use crate::error::{Error, Result};
use crate::flow::{run_flow_observed, FlowConfig, FlowError, FlowOutcome, OutcomeKind, RunOptions};
use crate::manifold::{Manifold, Point};
use crate::nets::{point_to_json, PiecewiseGeodesicFlower};
use crate::svg::{Figure, Projection};

/// Where the filling ends: a point, or the point at infinity of an end.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Apex {
    Point(Point),
    End(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sheet {
    /// Homotopy parameter in `[0, 1]`: the fraction of the total length drop.
    pub s: f64,
    pub time: f64,
    pub length: f64,
    /// Closed polyline; the first point is repeated at the end.
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiskFilling {
    pub boundary: Vec<Point>,
    pub sheets: Vec<Sheet>,
    pub apex: Apex,
    /// The flow run the sheets were taken from.
    #[serde(skip)]
    pub flow: FlowOutcome,
}

/// Why no filling could be produced.
#[derive(Debug, thiserror::Error)]
pub enum FillError {
    #[error("{0}")]
    Input(#[from] Error),
    #[error(transparent)]
    Flow(#[from] FlowError),
    /// The flow neither contracted nor escaped; the run is returned.
    #[error("the flow ended in {} after {} steps; no filling", .0.kind.name(), .0.steps)]
    Unfilled(Box<FlowOutcome>),
}

/// Relative length drop between consecutive recorded sheets.
pub const SHEET_DROP: f64 = 0.02;

fn closed(points: &[Point]) -> Vec<Point> {
    let mut out = points.to_vec();
    if let Some(first) = points.first() {
        if out.last() != Some(first) {
            out.push(*first);
        }
    }
    out
}

/// The curve as a one-petal flower based at its first vertex. A repeated
/// closing vertex is dropped.
pub fn curve_to_flower(m: &Manifold, curve: &[Point]) -> Result<PiecewiseGeodesicFlower> {
    let Some(base) = curve.first() else {
        return Err(Error::invalid("curve", "empty curve"));
    };
    let mut interior = curve[1..].to_vec();
    if interior.last().is_some_and(|p| m.coincident(p, base)) {
        interior.pop();
    }
    if interior.is_empty() {
        interior.push(*base);
    }
    PiecewiseGeodesicFlower::new(m, *base, vec![interior])
}

fn sheet_points(f: &PiecewiseGeodesicFlower) -> Vec<Point> {
    closed(&f.chain(0))
}

/// Flows the closed curve and keeps a sheet every time the length has
/// dropped by 2% since the last one, plus the terminal state.
pub fn fill_2cage(
    m: &Manifold,
    curve: &[Point],
    config: &FlowConfig,
    options: &RunOptions,
) -> std::result::Result<DiskFilling, FillError> {
    let flower = curve_to_flower(m, curve)?;
    let boundary = closed(curve);
    let l0 = flower.length(m)?;
    let mut raw: Vec<(f64, f64, Vec<Point>)> = vec![(0.0, l0, boundary.clone())];
    let mut last = l0;
    let outcome = run_flow_observed(m, &flower, config, options, &mut |v| {
        let l = v.record.length;
        if v.record.step > 0 && l <= (1.0 - SHEET_DROP) * last {
            last = l;
            raw.push((v.record.time, l, sheet_points(&v.state.flower)));
        }
    })?;
    let apex = match &outcome.kind {
        OutcomeKind::ContractedToPoint { point } => Apex::Point(*point),
        OutcomeKind::EscapedToEnd { end } => Apex::End(end.clone()),
        _ => return Err(FillError::Unfilled(Box::new(outcome))),
    };
    if outcome.steps > 0 || outcome.final_length < l0 {
        raw.push((
            outcome.time,
            outcome.final_length,
            sheet_points(&outcome.final_flower),
        ));
    }
    let drop = l0 - outcome.final_length;
    let n = raw.len();
    let sheets = raw
        .into_iter()
        .enumerate()
        .map(|(k, (time, length, points))| Sheet {
            s: if k + 1 == n && n > 1 {
                1.0
            } else if drop > 0.0 {
                ((l0 - length) / drop).clamp(0.0, 1.0)
            } else {
                0.0
            },
            time,
            length,
            points,
        })
        .collect();
    Ok(DiskFilling {
        boundary,
        sheets,
        apex,
        flow: outcome,
    })
}

impl DiskFilling {
    /// Sheet lengths never grow by more than `slack`.
    pub fn lengths_monotone(&self, slack: f64) -> bool {
        self.sheets
            .windows(2)
            .all(|w| w[1].length <= w[0].length + slack)
    }

    /// First sheet index from which every sheet lies strictly inside one end,
    /// together with that end.
    pub fn escape_onset(&self, m: &Manifold, ends: &EndsDecomposition) -> Option<(usize, usize)> {
        let positions: Vec<Position> = self
            .sheets
            .iter()
            .map(|s| classify_points(m, ends, &s.points))
            .collect();
        let Some(Position::InEnd(end)) = positions.last().cloned() else {
            return None;
        };
        let mut k = positions.len();
        while k > 0 && positions[k - 1] == Position::InEnd(end) {
            k -= 1;
        }
        Some((k, end))
    }

    pub fn to_json(&self, m: &Manifold) -> Value {
        let pts = |v: &[Point]| v.iter().map(|p| point_to_json(p)).collect::<Vec<_>>();
        json!({
            "manifold": m.to_json(),
            "boundary": pts(&self.boundary),
            "sheets": self.sheets.iter().map(|s| json!({
                "s": s.s, "time": s.time, "length": s.length, "points": pts(&s.points),
            })).collect::<Vec<_>>(),
            "apex": match &self.apex {
                Apex::Point(p) => json!({"point": point_to_json(p)}),
                Apex::End(e) => json!({"end": e}),
            },
        })
    }

    /// Sheets drawn on top of each other, shaded from the boundary (dark) to
    /// the apex (light).
    pub fn to_svg(&self, m: &Manifold) -> String {
        let proj = Projection::for_manifold(m);
        let mut fig = Figure::new(proj);
        let n = self.sheets.len().max(1);
        for (k, s) in self.sheets.iter().enumerate() {
            let shade = (40.0 + 180.0 * k as f64 / n as f64) as u8;
            fig.polyline(
                m,
                &s.points,
                &format!("rgb({shade},{shade},{})", 255 - shade / 2),
                1.0,
            );
        }
        fig.polyline(m, &self.boundary, "black", 2.0);
        if let Apex::Point(p) = &self.apex {
            fig.dot(m, p, "crimson");
        }
        let mut out = fig.render();
        let _ = writeln!(out);
        out
    }
}
