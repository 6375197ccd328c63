//! Scenario files: a manifold, an initial net, a flow configuration and the
//! checks and artifacts wanted from a run.
//!
//! ```json
//! {
//!   "name": "sphere_equator",
//!   "manifold": "sphere",
//!   "initial_net": {"generator": "equator_petal", "offset": 0.05},
//!   "flow_config": {"L": 6.5, "delta": 1.0},
//!   "checks": ["flow_properties"],
//!   "outputs": ["summary", "json_trace"],
//!   "expect": {"kind": "StationaryFlower", "length": 6.283185307179586, "length_tol": 1e-3}
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{Map, Value};

use crate::ends::EndsDecomposition;
use crate::error::{Error, Result};
use crate::flow::{ConvexBall, FlowConfig};
use crate::manifold::Manifold;
use crate::nets::{point_from_json, NetDocument};

mod batch;
mod generate;
mod run;

pub use batch::{run_batch, BatchReport, BatchRow};
pub use generate::{generate, random_loop, GENERATORS};
pub use run::{ScenarioReport, Status};

/// Environment variable that replaces every scenario's seed.
pub const SEED_VAR: &str = "FLOWERFLOW_SEED";

/// Residual and deviation bounds for `check` scenarios without a flow config.
pub const NET_TOL_STAT: f64 = 1e-8;
pub const NET_TOL_GEO: f64 = 1e-6;
/// Pairs sampled per separating curve by the convexity check.
pub const DEFAULT_CONVEXITY_SAMPLES: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Flow the initial net (a flower, or a cage through its retraction).
    Flow,
    /// Measure the initial net only.
    Check,
    /// Fill a closed curve by its flow.
    Fill,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    Summary,
    JsonTrace,
    CsvTrace,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckSuite {
    /// Trace audit plus fixed-point or absorbing-escape checks.
    FlowProperties,
    /// Balancing and geodesic deviation of the final (or, in check mode, initial) net.
    Net,
    /// Local convexity of every separating curve.
    EndsConvexity,
    /// Structural invariants of a disk filling.
    Filling,
}

impl CheckSuite {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "flow_properties" => CheckSuite::FlowProperties,
            "net" => CheckSuite::Net,
            "ends_convexity" => CheckSuite::EndsConvexity,
            "filling" => CheckSuite::Filling,
            _ => return None,
        })
    }
}

/// What the run must produce for the scenario to pass.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expectation {
    pub kind: Option<String>,
    pub end: Option<String>,
    pub length: Option<f64>,
    pub length_tol: f64,
    pub max_residual: Option<f64>,
    /// Expected verdict per named check; unnamed checks must pass.
    pub checks: BTreeMap<String, bool>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub mode: Mode,
    pub manifold: Manifold,
    pub initial: NetDocument,
    pub config: Option<FlowConfig>,
    pub ends: Option<EndsDecomposition>,
    pub convex_balls: Vec<ConvexBall>,
    pub checks: Vec<CheckSuite>,
    pub outputs: Vec<Output>,
    /// Stride of the trace files, in steps; the final state is always written.
    pub trace_every: usize,
    /// Stride of the snapshots drawn in the figure; none when absent.
    pub svg_every: Option<usize>,
    pub convexity_samples: usize,
    pub expect: Expectation,
}

const KEYS: &[&str] = &[
    "name",
    "seed",
    "mode",
    "manifold",
    "initial_net",
    "flow_config",
    "ends",
    "convex_balls",
    "checks",
    "outputs",
    "trace_every",
    "svg_every",
    "convexity_samples",
    "expect",
    "description",
];

fn nested(prefix: &str, e: Error) -> Error {
    match e {
        Error::Invalid { path, message } if path.is_empty() => Error::Invalid {
            path: prefix.into(),
            message,
        },
        Error::Invalid { path, message } if !path.starts_with(prefix) => Error::Invalid {
            path: format!("{prefix}.{path}"),
            message,
        },
        other => other,
    }
}

fn count(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>> {
    obj.get(key)
        .map(|v| {
            v.as_u64()
                .filter(|&n| n > 0)
                .map(|n| n as usize)
                .ok_or_else(|| Error::invalid(key, "expected a positive integer"))
        })
        .transpose()
}

fn string_list(obj: &Map<String, Value>, key: &str) -> Result<Vec<String>> {
    let Some(v) = obj.get(key) else {
        return Ok(Vec::new());
    };
    let arr = v
        .as_array()
        .ok_or_else(|| Error::invalid(key, "expected an array of names"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::invalid(format!("{key}[{i}]"), "expected a name"))
        })
        .collect()
}

/// Reads the seed override, if set.
pub fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid(SEED_VAR, "expected an unsigned integer")),
        Err(_) => Ok(None),
    }
}

impl Scenario {
    /// Reads and validates a scenario file, applying the seed override.
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::invalid("", format!("malformed JSON: {e}")))?;
        Scenario::from_json(&v, seed_override()?)
    }

    pub fn from_json(v: &Value, seed_override: Option<u64>) -> Result<Scenario> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::invalid("", "expected a JSON object"))?;
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::invalid(k.as_str(), "unknown field"));
        }
        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::invalid("name", "expected a string"))?
            .to_owned();
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c))
        {
            return Err(Error::invalid(
                "name",
                "use letters, digits, '_', '-' or '.'",
            ));
        }
        let seed = match obj.get("seed") {
            None => 0,
            Some(s) => s
                .as_u64()
                .ok_or_else(|| Error::invalid("seed", "expected an unsigned integer"))?,
        };
        let seed = seed_override.unwrap_or(seed);
        let mode = match obj.get("mode").map(|m| m.as_str()) {
            None | Some(Some("flow")) => Mode::Flow,
            Some(Some("check")) => Mode::Check,
            Some(Some("fill")) => Mode::Fill,
            _ => {
                return Err(Error::invalid(
                    "mode",
                    "expected \"flow\", \"check\" or \"fill\"",
                ))
            }
        };
        let manifold = Manifold::from_json(
            obj.get("manifold")
                .ok_or_else(|| Error::invalid("manifold", "missing"))?,
        )
        .map_err(|e| nested("manifold", e))?;
        let m = &manifold;
        let config = match obj.get("flow_config") {
            Some(c) => Some(FlowConfig::from_json(m, c).map_err(|e| nested("flow_config", e))?),
            None if mode == Mode::Check => None,
            None => return Err(Error::invalid("flow_config", "missing")),
        };
        let ends = obj
            .get("ends")
            .map(|e| EndsDecomposition::from_json(m, e))
            .transpose()
            .map_err(|e| nested("ends", e))?;

        let net = obj
            .get("initial_net")
            .ok_or_else(|| Error::invalid("initial_net", "missing"))?;
        let default_count = config.as_ref().map_or(16, |c| c.points_per_petal);
        let initial = match net.as_object() {
            Some(o) if o.contains_key("generator") => {
                generate(m, o, "initial_net", default_count, seed)?
            }
            Some(_) => NetDocument::from_json(m, net).map_err(|e| nested("initial_net", e))?,
            None => {
                return Err(Error::invalid(
                    "initial_net",
                    "expected a net object or a generator",
                ))
            }
        };
        match (mode, &initial) {
            (Mode::Flow, NetDocument::Net(_)) => {
                return Err(Error::invalid(
                    "initial_net",
                    "only flowers and cages can be flowed",
                ))
            }
            (Mode::Fill, NetDocument::Flower(f)) if f.petals.len() != 1 => {
                return Err(Error::invalid(
                    "initial_net",
                    "a filling needs a closed curve (one petal)",
                ))
            }
            (Mode::Fill, NetDocument::Cage(_) | NetDocument::Net(_)) => {
                return Err(Error::invalid(
                    "initial_net",
                    "a filling needs a closed curve (one petal)",
                ))
            }
            _ => {}
        }

        let mut convex_balls = Vec::new();
        if let Some(bs) = obj.get("convex_balls") {
            let arr = bs
                .as_array()
                .ok_or_else(|| Error::invalid("convex_balls", "expected an array"))?;
            for (i, b) in arr.iter().enumerate() {
                let path = format!("convex_balls[{i}]");
                let center = point_from_json(
                    b.get("center")
                        .ok_or_else(|| Error::invalid(format!("{path}.center"), "missing"))?,
                    &format!("{path}.center"),
                )?;
                m.check_point(&center)
                    .map_err(|e| Error::invalid(format!("{path}.center"), e.to_string()))?;
                let radius = b
                    .get("radius")
                    .and_then(Value::as_f64)
                    .filter(|r| *r > 0.0)
                    .ok_or_else(|| {
                        Error::invalid(format!("{path}.radius"), "expected a positive number")
                    })?;
                convex_balls.push(ConvexBall {
                    center: m.canonical(&center),
                    radius,
                });
            }
        }

        let mut checks = Vec::new();
        for (i, c) in string_list(obj, "checks")?.iter().enumerate() {
            let suite = CheckSuite::parse(c).ok_or_else(|| {
                Error::invalid(
                    format!("checks[{i}]"),
                    "expected one of flow_properties, net, ends_convexity, filling",
                )
            })?;
            let fits = match suite {
                CheckSuite::FlowProperties => mode != Mode::Check,
                CheckSuite::Net => mode != Mode::Fill,
                CheckSuite::EndsConvexity => ends.is_some(),
                CheckSuite::Filling => mode == Mode::Fill,
            };
            if !fits {
                return Err(Error::invalid(
                    format!("checks[{i}]"),
                    "does not apply to this scenario",
                ));
            }
            if !checks.contains(&suite) {
                checks.push(suite);
            }
        }

        let mut outputs = Vec::new();
        let names = string_list(obj, "outputs")?;
        for (i, o) in names.iter().enumerate() {
            outputs.push(match o.as_str() {
                "summary" => Output::Summary,
                "json_trace" => Output::JsonTrace,
                "csv_trace" => Output::CsvTrace,
                "svg" => Output::Svg,
                _ => {
                    return Err(Error::invalid(
                        format!("outputs[{i}]"),
                        "expected one of summary, json_trace, csv_trace, svg",
                    ))
                }
            });
        }
        if !obj.contains_key("outputs") {
            outputs.push(Output::Summary);
        }
        outputs.sort();
        outputs.dedup();

        let expect = match obj.get("expect") {
            None => Expectation::default(),
            Some(e) => parse_expectation(e)?,
        };
        Ok(Scenario {
            name,
            seed,
            mode,
            initial,
            config,
            ends,
            convex_balls,
            checks,
            outputs,
            trace_every: count(obj, "trace_every")?.unwrap_or(1),
            svg_every: count(obj, "svg_every")?,
            convexity_samples: count(obj, "convexity_samples")?
                .unwrap_or(DEFAULT_CONVEXITY_SAMPLES),
            expect,
            manifold,
        })
    }
}

fn parse_expectation(v: &Value) -> Result<Expectation> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::invalid("expect", "expected an object"))?;
    let mut e = Expectation {
        length_tol: 1e-3,
        ..Expectation::default()
    };
    for (k, val) in obj {
        let path = format!("expect.{k}");
        let num = || {
            val.as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::invalid(&path, "expected a number"))
        };
        let text = || {
            val.as_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::invalid(&path, "expected a string"))
        };
        match k.as_str() {
            "kind" => e.kind = Some(text()?),
            "end" => e.end = Some(text()?),
            "length" => e.length = Some(num()?),
            "length_tol" => e.length_tol = num()?,
            "max_residual" => e.max_residual = Some(num()?),
            "checks" => {
                let o = val
                    .as_object()
                    .ok_or_else(|| Error::invalid(&path, "expected an object of booleans"))?;
                for (name, b) in o {
                    let b = b.as_bool().ok_or_else(|| {
                        Error::invalid(format!("{path}.{name}"), "expected a boolean")
                    })?;
                    e.checks.insert(name.clone(), b);
                }
            }
            _ => return Err(Error::invalid(path, "unknown field")),
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests;
