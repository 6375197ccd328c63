use serde::Serialize;

use super::field::{vector_field, FieldSample};
use super::FlowConfig;
use crate::ends::{
    classify_points, min_core_distance, min_signed_gap, EndsDecomposition, Position,
};
use crate::error::{Error, Result};
use crate::manifold::{Connection, Manifold, Point};
use crate::nets::{
    cage_to_flower, chain_connections, rebalance_chain, Cage, NetMeasurement, Petal,
    PiecewiseGeodesicFlower,
};

/// A geodesic ball declared convex; the flow is audited for staying inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexBall {
    pub center: Point,
    pub radius: f64,
}

/// Optional context for a run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions<'a> {
    pub ends: Option<&'a EndsDecomposition>,
    pub convex_balls: Vec<ConvexBall>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub step: usize,
    pub time: f64,
    /// Step size used to reach this state (zero for the initial record).
    pub dt: f64,
    pub length: f64,
    pub max_residual: f64,
    /// `Σ |V|²` at this state.
    pub energy: f64,
    /// First variation `dL/dt` of the length along the field.
    pub length_rate: f64,
    pub max_speed: f64,
    pub blending: bool,
    /// Smallest core distance over the flower's points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_distance: Option<f64>,
    /// Smallest signed gap to the curve of the end the run started in.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_gap: Option<f64>,
    /// Per declared convex ball: farthest point distance minus the radius.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ball_excess: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum OutcomeKind {
    ContractedToPoint { point: Point },
    StationaryFlower { measurement: NetMeasurement },
    EscapedToEnd { end: String },
    BudgetExhausted,
}

impl OutcomeKind {
    pub fn name(&self) -> &'static str {
        match self {
            OutcomeKind::ContractedToPoint { .. } => "ContractedToPoint",
            OutcomeKind::StationaryFlower { .. } => "StationaryFlower",
            OutcomeKind::EscapedToEnd { .. } => "EscapedToEnd",
            OutcomeKind::BudgetExhausted => "BudgetExhausted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowOutcome {
    pub kind: OutcomeKind,
    pub final_flower: PiecewiseGeodesicFlower,
    pub steps: usize,
    pub time: f64,
    pub initial_length: f64,
    pub final_length: f64,
    pub trace: Vec<TraceRecord>,
    /// Index of the end the initial flower lay in, if any.
    #[serde(skip)]
    pub started_in_end: Option<usize>,
}

/// A run that stopped on a numerical error, with everything recorded so far.
#[derive(Debug)]
pub struct FlowError {
    pub error: Error,
    pub steps: usize,
    pub last_flower: PiecewiseGeodesicFlower,
    pub trace: Vec<TraceRecord>,
}

impl std::fmt::Display for FlowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "flow stopped after {} steps: {}", self.steps, self.error)
    }
}

impl std::error::Error for FlowError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// A flower together with the connections of every petal chain.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub flower: PiecewiseGeodesicFlower,
    pub conns: Vec<Vec<Connection>>,
    pub time: f64,
    pub steps: usize,
}

fn rebalance_failure(petal: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::OutsideUniqueness { distance, bound } => Error::Rebalance {
            petal,
            reason: format!(
                "segment of length {distance:.6} exceeds the uniqueness bound {bound:.6}"
            ),
        },
        other => other,
    }
}

fn constant_conns(m: &Manifold, base: &Point, n: usize) -> Result<Vec<Connection>> {
    Ok(vec![m.connect(base, base)?; n + 1])
}

impl FlowState {
    /// Resamples every petal to `N` equally spaced interior points.
    pub fn new(
        m: &Manifold,
        flower: &PiecewiseGeodesicFlower,
        config: &FlowConfig,
    ) -> Result<Self> {
        let n = config.points_per_petal;
        let base = flower.base;
        let mut petals = Vec::with_capacity(flower.petals.len());
        let mut all = Vec::with_capacity(flower.petals.len());
        for (j, p) in flower.petals.iter().enumerate() {
            if p.constant {
                petals.push(Petal {
                    points: vec![base; n],
                    constant: true,
                });
                all.push(constant_conns(m, &base, n)?);
                continue;
            }
            let conns = chain_connections(m, &flower.chain(j)).map_err(rebalance_failure(j))?;
            let (pts, conns) = balanced(m, j, &conns, n, config)?;
            petals.push(Petal {
                points: pts,
                constant: false,
            });
            all.push(conns);
        }
        Ok(FlowState {
            flower: PiecewiseGeodesicFlower { base, petals },
            conns: all,
            time: 0.0,
            steps: 0,
        })
    }

    pub fn length(&self) -> f64 {
        self.conns.iter().flatten().map(|c| c.length).sum()
    }

    pub fn field(&self, m: &Manifold, config: &FlowConfig) -> Result<FieldSample> {
        vector_field(m, &self.flower, &self.conns, config)
    }

    fn petal_lengths(&self) -> Vec<f64> {
        self.conns
            .iter()
            .map(|c| c.iter().map(|s| s.length).sum())
            .collect()
    }
}

fn balanced(
    m: &Manifold,
    j: usize,
    conns: &[Connection],
    n: usize,
    config: &FlowConfig,
) -> Result<(Vec<Point>, Vec<Connection>)> {
    let (pts, conns, spread) = rebalance_chain(m, j, conns, n, &config.rebalance)?;
    if spread > config.rebalance.tol {
        return Err(Error::Rebalance {
            petal: j,
            reason: format!("segment lengths still differ by {spread:.3e} relative"),
        });
    }
    Ok((pts, conns))
}

/// Moves every point along its field vector for time `h`, without
/// rebalancing. Constant petals follow the base.
pub fn advance(
    m: &Manifold,
    flower: &PiecewiseGeodesicFlower,
    field: &FieldSample,
    h: f64,
) -> Result<PiecewiseGeodesicFlower> {
    let mv = |p: &Point, v: [f64; 2]| -> Result<Point> {
        if v == [0.0, 0.0] || h == 0.0 {
            Ok(*p)
        } else {
            Ok(m.exp(p, v, h)?.0)
        }
    };
    let base = mv(&flower.base, field.base)?;
    let mut petals = Vec::with_capacity(flower.petals.len());
    for (j, p) in flower.petals.iter().enumerate() {
        let points = if p.constant {
            vec![base; p.points.len()]
        } else {
            p.points
                .iter()
                .zip(&field.petals[j])
                .map(|(q, v)| mv(q, *v))
                .collect::<Result<Vec<_>>>()?
        };
        petals.push(Petal {
            points,
            constant: p.constant,
        });
    }
    Ok(PiecewiseGeodesicFlower { base, petals })
}

/// Step size actually taken for a field: the configured `dt`, reduced so no
/// point travels more than a quarter of the shortest live segment.
pub fn effective_dt(state: &FlowState, field: &FieldSample, config: &FlowConfig) -> f64 {
    if !config.adaptive_dt || field.max_speed <= 0.0 {
        return config.dt;
    }
    let mut h_min = config.segment_bound;
    for (j, p) in state.flower.petals.iter().enumerate() {
        if !p.constant {
            for c in &state.conns[j] {
                h_min = h_min.min(c.length);
            }
        }
    }
    config.dt.min(0.25 * h_min / field.max_speed)
}

/// One step: move along the field, rebalance every petal, and collapse
/// petals that have become negligibly short. Returns the step size used.
pub fn step(
    m: &Manifold,
    state: &mut FlowState,
    field: &FieldSample,
    config: &FlowConfig,
) -> Result<f64> {
    let h = effective_dt(state, field, config);
    let moved = advance(m, &state.flower, field, h)?;
    let n = config.points_per_petal;
    let base = moved.base;
    let mut petals = Vec::with_capacity(moved.petals.len());
    let mut all = Vec::with_capacity(moved.petals.len());
    for (j, p) in moved.petals.iter().enumerate() {
        let mut conns = if p.constant {
            constant_conns(m, &base, n)?
        } else {
            chain_connections(m, &moved.chain(j)).map_err(rebalance_failure(j))?
        };
        let mut points = p.points.clone();
        let mut constant = p.constant;
        if !constant {
            let len: f64 = conns.iter().map(|c| c.length).sum();
            if len < config.contraction_threshold {
                constant = true;
                points = vec![base; n];
                conns = constant_conns(m, &base, n)?;
            } else {
                (points, conns) = balanced(m, j, &conns, n, config)?;
            }
        }
        petals.push(Petal { points, constant });
        all.push(conns);
    }
    state.flower = PiecewiseGeodesicFlower { base, petals };
    state.conns = all;
    state.time += h;
    state.steps += 1;
    Ok(h)
}

/// Per-step instrumentation shared by the run loop and the observers.
pub struct StepView<'a> {
    pub state: &'a FlowState,
    pub record: &'a TraceRecord,
}

fn record(
    m: &Manifold,
    state: &FlowState,
    field: &FieldSample,
    dt: f64,
    options: &RunOptions,
    started_in_end: Option<usize>,
) -> Result<TraceRecord> {
    let core = options
        .ends
        .map(|d| min_core_distance(m, d, state.flower.points()));
    let end_gap = match (options.ends, started_in_end) {
        (Some(d), Some(i)) => Some(min_signed_gap(m, d, i, state.flower.points())),
        _ => None,
    };
    let mut ball_excess = Vec::with_capacity(options.convex_balls.len());
    for b in &options.convex_balls {
        let mut far: f64 = 0.0;
        for p in state.flower.points() {
            far = far.max(m.distance(&b.center, p)?.value);
        }
        ball_excess.push(far - b.radius);
    }
    Ok(TraceRecord {
        step: state.steps,
        time: state.time,
        dt,
        length: state.length(),
        max_residual: field.max_residual,
        energy: field.energy,
        length_rate: field.length_rate,
        max_speed: field.max_speed,
        blending: field.blending,
        core_distance: core,
        end_gap,
        ball_excess,
    })
}

enum Verdict {
    Continue,
    Done(OutcomeKind, Option<PiecewiseGeodesicFlower>),
}

fn classify(
    m: &Manifold,
    state: &FlowState,
    field: &FieldSample,
    config: &FlowConfig,
    options: &RunOptions,
) -> Result<Verdict> {
    let lengths = state.petal_lengths();
    let widest = lengths.iter().cloned().fold(0.0, f64::max);
    if field.all_short || widest < config.contraction_threshold {
        let n = config.points_per_petal;
        let point = state.flower.base;
        let collapsed = PiecewiseGeodesicFlower::constant(point, state.flower.petals.len(), n);
        return Ok(Verdict::Done(
            OutcomeKind::ContractedToPoint { point },
            Some(collapsed),
        ));
    }
    if field.max_residual <= config.tol_stat {
        let measurement = state.flower.to_net().measure_with(m, &state.conns)?;
        if measurement.geodesic_deviation <= config.tol_geo {
            return Ok(Verdict::Done(
                OutcomeKind::StationaryFlower { measurement },
                None,
            ));
        }
    }
    if let Some(d) = options.ends {
        if let Position::InEnd(i) = classify_points(m, d, state.flower.points()) {
            if min_core_distance(m, d, state.flower.points()) > config.escape_radius {
                return Ok(Verdict::Done(
                    OutcomeKind::EscapedToEnd {
                        end: d.sigmas[i].name.clone(),
                    },
                    None,
                ));
            }
        }
    }
    if state.steps >= config.max_steps {
        return Ok(Verdict::Done(OutcomeKind::BudgetExhausted, None));
    }
    Ok(Verdict::Continue)
}

/// Runs the flow until the flower contracts, becomes stationary, escapes
/// into an end, or the step budget runs out.
pub fn run_flow(
    m: &Manifold,
    flower: &PiecewiseGeodesicFlower,
    config: &FlowConfig,
    options: &RunOptions,
) -> std::result::Result<FlowOutcome, FlowError> {
    run_flow_observed(m, flower, config, options, &mut |_| {})
}

/// [`run_flow`] calling `observer` on the initial state and after every step.
pub fn run_flow_observed(
    m: &Manifold,
    flower: &PiecewiseGeodesicFlower,
    config: &FlowConfig,
    options: &RunOptions,
    observer: &mut dyn FnMut(&StepView),
) -> std::result::Result<FlowOutcome, FlowError> {
    let fail = |error: Error, state: Option<&FlowState>, trace: Vec<TraceRecord>| FlowError {
        error,
        steps: state.map_or(0, |s| s.steps),
        last_flower: state.map_or_else(|| flower.clone(), |s| s.flower.clone()),
        trace,
    };
    let initial_length = match flower.length(m) {
        Ok(l) => l,
        Err(e) => return Err(fail(e, None, Vec::new())),
    };
    if initial_length > config.length_budget * (1.0 + 1e-12) {
        let e = Error::Precondition(format!(
            "flower length {initial_length} exceeds the budget {}",
            config.length_budget
        ));
        return Err(fail(e, None, Vec::new()));
    }
    let mut state = match FlowState::new(m, flower, config) {
        Ok(s) => s,
        Err(e) => return Err(fail(e, None, Vec::new())),
    };
    let started_in_end =
        options
            .ends
            .and_then(|d| match classify_points(m, d, state.flower.points()) {
                Position::InEnd(i) => Some(i),
                _ => None,
            });
    let mut trace = Vec::new();
    let mut dt = 0.0;
    loop {
        let field = match state.field(m, config) {
            Ok(f) => f,
            Err(e) => return Err(fail(e, Some(&state), trace)),
        };
        let rec = match record(m, &state, &field, dt, options, started_in_end) {
            Ok(r) => r,
            Err(e) => return Err(fail(e, Some(&state), trace)),
        };
        observer(&StepView {
            state: &state,
            record: &rec,
        });
        trace.push(rec);
        match classify(m, &state, &field, config, options) {
            Err(e) => return Err(fail(e, Some(&state), trace)),
            Ok(Verdict::Done(kind, replaced)) => {
                let final_flower = replaced.unwrap_or_else(|| state.flower.clone());
                let final_length = match final_flower.length(m) {
                    Ok(l) => l,
                    Err(e) => return Err(fail(e, Some(&state), trace)),
                };
                return Ok(FlowOutcome {
                    kind,
                    final_flower,
                    steps: state.steps,
                    time: state.time,
                    initial_length,
                    final_length,
                    trace,
                    started_in_end,
                });
            }
            Ok(Verdict::Continue) => {}
        }
        dt = match step(m, &mut state, &field, config) {
            Ok(h) => h,
            Err(e) => return Err(fail(e, Some(&state), trace)),
        };
    }
}

/// Retracts the cage onto a flower at its top vertex and flows that flower.
pub fn run_cage_flow(
    m: &Manifold,
    cage: &Cage,
    config: &FlowConfig,
    options: &RunOptions,
) -> std::result::Result<FlowOutcome, FlowError> {
    let flower = cage_to_flower(m, cage, 1.0)
        .and_then(|c| c.to_flower(m))
        .map_err(|error| FlowError {
            error,
            steps: 0,
            last_flower: PiecewiseGeodesicFlower::constant(
                cage.vertices[cage.vertices.len() - 1],
                0,
                0,
            ),
            trace: Vec::new(),
        })?;
    run_flow(m, &flower, config, options)
}
