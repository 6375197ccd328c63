//! Core/end decompositions and the numerical local-convexity check.
//!
//! Separating curves are level sets of [`Manifold::level`]: parallels
//! `u = c` on surfaces of revolution and circles `r = c` on the plane. An end
//! with side `+` is the region beyond the curve in the direction of growing
//! level, `-` the other way; the core is what remains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldKind, Point, Profile, WorkingRegion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Side::Plus => "+",
            Side::Minus => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sigma {
    pub level: f64,
    pub end_side: Side,
    pub name: String,
}

impl Sigma {
    /// Signed distance-like coordinate: positive inside the end.
    fn signed(&self, level: f64) -> f64 {
        self.end_side.sign() * (level - self.level)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndsDecomposition {
    pub sigmas: Vec<Sigma>,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "end", rename_all = "snake_case")]
pub enum Position {
    InCoreClosure,
    InEnd(usize),
    Straddling(usize),
}

/// Tolerance band around a separating curve, in the level coordinate.
const BAND: f64 = 1e-6;

impl EndsDecomposition {
    /// Validates the decomposition against the manifold: at most one curve per
    /// side, curves inside the working region, and a bounded core.
    pub fn new(m: &Manifold, sigmas: Vec<Sigma>, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid("ends.delta", "must be positive"));
        }
        if sigmas.len() > 8 {
            return Err(Error::invalid("ends.sigma", "at most 8 ends are supported"));
        }
        if !sigmas.is_empty() && m.level(&Point::new([1.0, 0.0])).is_none() {
            return Err(Error::invalid(
                "ends.sigma",
                format!("{} has no level curves to cut along", m.id),
            ));
        }
        for side in [Side::Plus, Side::Minus] {
            if sigmas.iter().filter(|s| s.end_side == side).count() > 1 {
                return Err(Error::invalid(
                    "ends.sigma",
                    format!("two ends on side {} would overlap", side.symbol()),
                ));
            }
        }
        for (i, s) in sigmas.iter().enumerate() {
            let inside = match m.working_region {
                WorkingRegion::Band { u_min, u_max } => s.level > u_min && s.level < u_max,
                WorkingRegion::Disk { radius } => s.level > 0.0 && s.level < radius,
                WorkingRegion::Whole => true,
            };
            if !inside {
                return Err(Error::invalid(
                    format!("ends.sigma[{i}]"),
                    "curve outside the working region",
                ));
            }
        }
        let d = EndsDecomposition { sigmas, delta };
        let (lo, hi) = d.core_interval();
        if lo > hi {
            return Err(Error::invalid(
                "ends.sigma",
                "the ends overlap; the core is empty",
            ));
        }
        // unbounded directions of the surface must be cut off
        let (needs_minus, needs_plus) = match m.kind {
            ManifoldKind::SurfaceOfRevolution { profile } => match profile {
                Profile::Paraboloid => (false, true),
                _ => (true, true),
            },
            ManifoldKind::EuclideanPlane => (false, true),
            _ => (false, false),
        };
        if (needs_minus && lo == f64::NEG_INFINITY) || (needs_plus && hi == f64::INFINITY) {
            return Err(Error::invalid("ends.sigma", "the core is unbounded"));
        }
        Ok(d)
    }

    /// Parses `{"sigma": [{"u": 1.0, "end_side": "+", "name": "narrow"}], "delta": 0.05}`.
    /// Plane decompositions use `"r"` in place of `"u"`.
    pub fn from_json(m: &Manifold, v: &Value) -> Result<Self> {
        let delta = v
            .get("delta")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::invalid("ends.delta", "expected a number"))?;
        let arr = match v.get("sigma") {
            Some(Value::Array(a)) => a.clone(),
            None => Vec::new(),
            Some(_) => return Err(Error::invalid("ends.sigma", "expected an array")),
        };
        let mut sigmas = Vec::with_capacity(arr.len());
        for (i, s) in arr.iter().enumerate() {
            let path = format!("ends.sigma[{i}]");
            let level = s
                .get("u")
                .or_else(|| s.get("r"))
                .or_else(|| s.get("level"))
                .and_then(Value::as_f64)
                .ok_or_else(|| {
                    Error::invalid(&path, "expected a level \"u\" (or \"r\" on the plane)")
                })?;
            let end_side: Side = serde_json::from_value(
                s.get("end_side").cloned().unwrap_or(Value::Null),
            )
            .map_err(|_| Error::invalid(format!("{path}.end_side"), "expected \"+\" or \"-\""))?;
            let name = s
                .get("name")
                .and_then(Value::as_str)
                .map(str::to_owned)
                .unwrap_or_else(|| end_side.symbol().to_owned());
            sigmas.push(Sigma {
                level,
                end_side,
                name,
            });
        }
        EndsDecomposition::new(m, sigmas, delta)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "sigma": self.sigmas.iter().map(|s| serde_json::json!({
                "u": s.level, "end_side": s.end_side.symbol(), "name": s.name
            })).collect::<Vec<_>>(),
            "delta": self.delta,
        })
    }

    /// Closed level interval of the core.
    pub fn core_interval(&self) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for s in &self.sigmas {
            match s.end_side {
                Side::Plus => hi = hi.min(s.level),
                Side::Minus => lo = lo.max(s.level),
            }
        }
        (lo, hi)
    }

    pub fn end_index(&self, name: &str) -> Option<usize> {
        self.sigmas.iter().position(|s| s.name == name)
    }

    /// The end strictly containing `p`, if any.
    pub fn end_of(&self, m: &Manifold, p: &Point) -> Option<usize> {
        let level = m.level(p)?;
        self.sigmas.iter().position(|s| s.signed(level) > 0.0)
    }

    /// Signed meridian distance from the curve of end `i`, positive inside it.
    pub fn signed_gap(&self, m: &Manifold, i: usize, p: &Point) -> f64 {
        let s = &self.sigmas[i];
        let Some(level) = m.level(p) else { return 0.0 };
        let gap = m.level_gap(level, s.level).unwrap_or(0.0);
        if s.signed(level) >= 0.0 {
            gap
        } else {
            -gap
        }
    }
}

/// Distance from `p` to the closure of the core, measured along the meridian
/// (exact on surfaces of revolution) or the radius (plane).
pub fn core_distance(m: &Manifold, d: &EndsDecomposition, p: &Point) -> f64 {
    match d.end_of(m, p) {
        Some(i) => d.signed_gap(m, i, p),
        None => 0.0,
    }
}

/// Smallest core distance over a set of points. Only the deepest point of
/// each end needs a meridian integral.
pub fn min_core_distance<'a>(
    m: &Manifold,
    d: &EndsDecomposition,
    points: impl IntoIterator<Item = &'a Point>,
) -> f64 {
    let mut shallowest: Vec<Option<&Point>> = vec![None; d.sigmas.len()];
    let mut key = vec![f64::INFINITY; d.sigmas.len()];
    for p in points {
        let Some(level) = m.level(p) else { return 0.0 };
        match d.sigmas.iter().position(|s| s.signed(level) > 0.0) {
            None => return 0.0,
            Some(i) => {
                let k = d.sigmas[i].signed(level);
                if k < key[i] {
                    key[i] = k;
                    shallowest[i] = Some(p);
                }
            }
        }
    }
    shallowest
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|p| d.signed_gap(m, i, p)))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest signed gap to the curve of end `i` over a set of points.
pub fn min_signed_gap<'a>(
    m: &Manifold,
    d: &EndsDecomposition,
    i: usize,
    points: impl IntoIterator<Item = &'a Point>,
) -> f64 {
    let s = &d.sigmas[i];
    let mut worst: Option<(&Point, f64)> = None;
    for p in points {
        let k = m.level(p).map_or(0.0, |l| s.signed(l));
        if worst.is_none_or(|(_, w)| k < w) {
            worst = Some((p, k));
        }
    }
    worst.map_or(f64::INFINITY, |(p, _)| d.signed_gap(m, i, p))
}

/// Where a set of sampled net points sits relative to the decomposition.
pub fn classify_points<'a>(
    m: &Manifold,
    d: &EndsDecomposition,
    points: impl IntoIterator<Item = &'a Point>,
) -> Position {
    let mut first_end: Option<usize> = None;
    let mut any_core = false;
    let mut mixed = false;
    for p in points {
        match d.end_of(m, p) {
            None => any_core = true,
            Some(i) => match first_end {
                None => first_end = Some(i),
                Some(j) if j != i => mixed = true,
                _ => {}
            },
        }
    }
    match first_end {
        None => Position::InCoreClosure,
        Some(i) if !any_core && !mixed => Position::InEnd(i),
        Some(i) => Position::Straddling(i),
    }
}

/// Classification of a net, sampled at its points and at the midpoints of
/// its segments.
pub fn classify_position(
    m: &Manifold,
    d: &EndsDecomposition,
    net: &crate::nets::Net,
) -> Result<Position> {
    let mut pts: Vec<Point> = Vec::new();
    for (k, conns) in net.connections(m)?.iter().enumerate() {
        pts.extend(net.chain(k));
        for c in conns {
            pts.push(m.along(c, 0.5)?);
        }
    }
    pts.extend(net.vertices.iter().copied());
    Ok(classify_points(m, d, &pts))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub sigma: usize,
    pub pass: bool,
    /// False when more than 1% of the geodesic solves failed.
    pub valid: bool,
    pub pairs: usize,
    pub solver_failures: usize,
    /// Deepest excursion into the core, in the level coordinate.
    pub worst_penetration: f64,
    pub witness: Option<(Point, Point)>,
}

/// Samples `sample_count` pairs of `δ`-close points on curve `i` and checks
/// that the minimizing geodesic between them stays on the end side (within a
/// band of `1e-6` in the level coordinate).
pub fn check_local_convexity(
    m: &Manifold,
    d: &EndsDecomposition,
    i: usize,
    sample_count: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    let s = d
        .sigmas
        .get(i)
        .ok_or_else(|| Error::Domain(format!("no separating curve with index {i}")))?;
    if d.delta >= 0.5 * m.injectivity_floor {
        return Err(Error::Precondition(format!(
            "delta {} is not below half the injectivity floor {}",
            d.delta, m.injectivity_floor
        )));
    }
    let (point_at, radius): (Box<dyn Fn(f64) -> [f64; 2] + Sync>, f64) = match m.kind {
        ManifoldKind::SurfaceOfRevolution { profile } => {
            let c = s.level;
            (Box::new(move |phi| [c, phi]), profile.radius(c).0)
        }
        ManifoldKind::EuclideanPlane => {
            let c = s.level;
            (Box::new(move |phi: f64| [c * phi.cos(), c * phi.sin()]), c)
        }
        _ => {
            return Err(Error::Precondition(format!(
                "{} has no separating curves",
                m.id
            )))
        }
    };
    // stratified start angles, uniform angular gaps up to δ along the curve
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_gap = d.delta / radius;
    let pairs: Vec<(f64, f64)> = (0..sample_count)
        .map(|k| {
            let phi = std::f64::consts::TAU * (k as f64 + rng.gen::<f64>()) / sample_count as f64;
            let gap = max_gap * (1.0 - rng.gen::<f64>());
            (phi, phi + gap)
        })
        .collect();
    let samples = 16;
    let results: Vec<Option<(f64, Point, Point)>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let p = m.point(point_at(a)).ok()?;
            let q = m.point(point_at(b)).ok()?;
            let c = m.connect(&p, &q).ok()?;
            let mut worst: f64 = 0.0;
            for j in 1..samples {
                let x = m.along(&c, j as f64 / samples as f64).ok()?;
                let level = m.level(&x)?;
                worst = worst.max(-s.signed(level));
            }
            Some((worst, p, q))
        })
        .collect();
    let failures = results.iter().filter(|r| r.is_none()).count();
    let mut worst = 0.0;
    let mut witness = None;
    for (pen, p, q) in results.into_iter().flatten() {
        if pen > worst {
            worst = pen;
            witness = Some((p, q));
        }
    }
    let valid = (failures as f64) <= 0.01 * sample_count as f64;
    Ok(ConvexityReport {
        sigma: i,
        pass: valid && worst <= BAND,
        valid,
        pairs: sample_count,
        solver_failures: failures,
        worst_penetration: worst,
        witness: if worst > BAND { witness } else { None },
    })
}
