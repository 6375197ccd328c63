//! Named generators for initial nets.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::nets::{
    equator_petal, linear_cage, parallel_circle, round_loop, theta_net, NetDocument,
    PiecewiseGeodesicFlower,
};

pub const GENERATORS: &[&str] = &[
    "parallel_circle",
    "equator_petal",
    "round_loop",
    "random_loop",
    "theta_net",
    "triangle_cage",
    "linear_cage",
    "constant_cage",
];

/// A generator's parameter block with field-path errors and a whitelist of
/// keys.
struct Params<'a> {
    obj: &'a Map<String, Value>,
    path: &'a str,
}

impl<'a> Params<'a> {
    fn new(obj: &'a Map<String, Value>, path: &'a str, allowed: &[&str]) -> Result<Self> {
        for k in obj.keys() {
            if k != "generator" && !allowed.contains(&k.as_str()) {
                return Err(Error::invalid(
                    format!("{path}.{k}"),
                    "unknown generator parameter",
                ));
            }
        }
        Ok(Params { obj, path })
    }

    fn err(&self, k: &str, msg: &str) -> Error {
        Error::invalid(format!("{}.{k}", self.path), msg)
    }

    fn f64(&self, k: &str) -> Result<Option<f64>> {
        match self.obj.get(k) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| self.err(k, "expected a number")),
        }
    }

    fn req_f64(&self, k: &str) -> Result<f64> {
        self.f64(k)?.ok_or_else(|| self.err(k, "missing"))
    }

    fn usize(&self, k: &str) -> Result<Option<usize>> {
        match self.obj.get(k) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .filter(|&n| n > 0)
                .map(|n| Some(n as usize))
                .ok_or_else(|| self.err(k, "expected a positive integer")),
        }
    }

    fn pair_of(&self, v: &Value, path: &str) -> Result<[f64; 2]> {
        match v.as_array().map(|a| a.as_slice()) {
            Some([a, b]) => match (a.as_f64(), b.as_f64()) {
                (Some(a), Some(b)) => Ok([a, b]),
                _ => Err(Error::invalid(path, "expected two numbers")),
            },
            _ => Err(Error::invalid(path, "expected two numbers")),
        }
    }

    fn pair(&self, k: &str) -> Result<Option<[f64; 2]>> {
        self.obj
            .get(k)
            .map(|v| self.pair_of(v, &format!("{}.{k}", self.path)))
            .transpose()
    }

    fn pairs(&self, k: &str) -> Result<Option<Vec<[f64; 2]>>> {
        let Some(v) = self.obj.get(k) else {
            return Ok(None);
        };
        let arr = v
            .as_array()
            .ok_or_else(|| self.err(k, "expected an array of pairs"))?;
        arr.iter()
            .enumerate()
            .map(|(i, x)| self.pair_of(x, &format!("{}.{k}[{i}]", self.path)))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// `{"0-2": [-1, 0]}` keyed lattice shifts.
    fn shifts(&self, k: &str) -> Result<BTreeMap<(usize, usize), [f64; 2]>> {
        let mut out = BTreeMap::new();
        let Some(v) = self.obj.get(k) else {
            return Ok(out);
        };
        let obj = v
            .as_object()
            .ok_or_else(|| self.err(k, "expected an object keyed by \"a-b\""))?;
        for (key, val) in obj {
            let path = format!("{}.{k}.{key}", self.path);
            let (a, b) = key
                .split_once('-')
                .and_then(|(a, b)| {
                    Some((
                        a.trim().parse::<usize>().ok()?,
                        b.trim().parse::<usize>().ok()?,
                    ))
                })
                .filter(|(a, b)| a < b)
                .ok_or_else(|| Error::invalid(&path, "key must look like \"0-1\" with a < b"))?;
            out.insert((a, b), self.pair_of(val, &path)?);
        }
        Ok(out)
    }
}

/// Builds the net named by `obj["generator"]`. Flowers default to
/// `default_count` interior points; `seed` drives the random generators.
pub fn generate(
    m: &Manifold,
    obj: &Map<String, Value>,
    path: &str,
    default_count: usize,
    seed: u64,
) -> Result<NetDocument> {
    let name = obj
        .get("generator")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::invalid(format!("{path}.generator"), "expected a generator name"))?;
    let at = |e: Error| match e {
        Error::Invalid { .. } => e,
        other => Error::invalid(path, other.to_string()),
    };
    let doc = match name {
        "parallel_circle" => {
            let p = Params::new(obj, path, &["level", "count", "offset"])?;
            let count = p.usize("count")?.unwrap_or(default_count);
            let f = parallel_circle(
                m,
                p.req_f64("level")?,
                count,
                p.f64("offset")?.unwrap_or(0.0),
            )
            .map_err(at)?;
            NetDocument::Flower(f)
        }
        "equator_petal" => {
            let p = Params::new(obj, path, &["count", "offset"])?;
            let count = p.usize("count")?.unwrap_or(default_count);
            NetDocument::Flower(
                equator_petal(m, count, p.f64("offset")?.unwrap_or(0.0)).map_err(at)?,
            )
        }
        "round_loop" => {
            let p = Params::new(obj, path, &["center", "radius", "count"])?;
            let center = p.pair("center")?.unwrap_or([0.0; 2]);
            let count = p.usize("count")?.unwrap_or(default_count);
            NetDocument::Flower(round_loop(m, center, p.req_f64("radius")?, count).map_err(at)?)
        }
        "random_loop" => {
            let p = Params::new(obj, path, &["center", "radius", "jitter", "count"])?;
            let center = p.pair("center")?.unwrap_or([0.0; 2]);
            let radius = p.req_f64("radius")?;
            let jitter = p.f64("jitter")?.unwrap_or(0.2);
            if !(0.0..1.0).contains(&jitter) {
                return Err(p.err("jitter", "must lie in [0, 1)"));
            }
            let count = p.usize("count")?.unwrap_or(default_count);
            NetDocument::Flower(random_loop(m, center, radius, jitter, count, seed).map_err(at)?)
        }
        "theta_net" => {
            let p = Params::new(obj, path, &["segments"])?;
            NetDocument::Net(theta_net(m, p.usize("segments")?.unwrap_or(8)).map_err(at)?)
        }
        "triangle_cage" | "linear_cage" => {
            let p = Params::new(obj, path, &["vertices", "segments", "shifts"])?;
            let vs = p
                .pairs("vertices")?
                .ok_or_else(|| p.err("vertices", "missing"))?;
            if name == "triangle_cage" && vs.len() != 3 {
                return Err(p.err("vertices", "a triangle cage has three vertices"));
            }
            let cage = linear_cage(
                m,
                &vs,
                p.usize("segments")?.unwrap_or(4),
                &p.shifts("shifts")?,
            )
            .map_err(at)?;
            NetDocument::Cage(cage)
        }
        "constant_cage" => {
            let p = Params::new(obj, path, &["point", "order", "segments"])?;
            let c = p.pair("point")?.ok_or_else(|| p.err("point", "missing"))?;
            let order = p.usize("order")?.unwrap_or(2);
            let vs = vec![c; order + 1];
            let cage = linear_cage(m, &vs, p.usize("segments")?.unwrap_or(2), &BTreeMap::new())
                .map_err(at)?;
            NetDocument::Cage(cage)
        }
        other => {
            return Err(Error::invalid(
                format!("{path}.generator"),
                format!(
                    "unknown generator `{other}`; known: {}",
                    GENERATORS.join(", ")
                ),
            ))
        }
    };
    Ok(doc)
}

/// Chart loop about `center` whose radius at each vertex is drawn uniformly
/// from `radius · [1 - jitter, 1 + jitter]`.
pub fn random_loop(
    m: &Manifold,
    center: [f64; 2],
    radius: f64,
    jitter: f64,
    count: usize,
    seed: u64,
) -> Result<PiecewiseGeodesicFlower> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut at = |phi: f64| {
        let r = radius * (1.0 + jitter * rng.gen_range(-1.0..=1.0));
        [center[0] + r * phi.cos(), center[1] + r * phi.sin()]
    };
    let base = m.point(at(0.0))?;
    let pts = (1..=count)
        .map(|k| m.point(at(TAU * k as f64 / (count + 1) as f64)))
        .collect::<Result<Vec<_>>>()?;
    PiecewiseGeodesicFlower::new(m, base, vec![pts])
}
