//! JSON forms of nets. Points are chart-coordinate arrays `[a, b]`, with an
//! optional third entry naming the chart.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{Cage, Net, NetEdge, NetMeasurement, PiecewiseGeodesicFlower};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point};

pub fn point_from_json(v: &Value, path: &str) -> Result<Point> {
    let bad = || Error::invalid(path, "expected a point [a, b] or [a, b, chart]");
    let arr = match v {
        Value::Array(a) => a,
        Value::Object(o) => {
            let coords = o.get("coords").and_then(Value::as_array).ok_or_else(bad)?;
            let chart = o.get("chart").and_then(Value::as_u64).unwrap_or(0);
            let mut a = coords.clone();
            a.push(Value::from(chart));
            return point_from_json(&Value::Array(a), path);
        }
        _ => return Err(bad()),
    };
    if arr.len() != 2 && arr.len() != 3 {
        return Err(bad());
    }
    let a = arr[0].as_f64().ok_or_else(bad)?;
    let b = arr[1].as_f64().ok_or_else(bad)?;
    let chart = match arr.get(2) {
        Some(c) => u8::try_from(c.as_u64().ok_or_else(bad)?).map_err(|_| bad())?,
        None => 0,
    };
    Ok(Point {
        coords: [a, b],
        chart,
    })
}

pub fn point_to_json(p: &Point) -> Value {
    if p.chart == 0 {
        json!([p.coords[0], p.coords[1]])
    } else {
        json!([p.coords[0], p.coords[1], p.chart])
    }
}

fn points_from_json(v: &Value, path: &str) -> Result<Vec<Point>> {
    v.as_array()
        .ok_or_else(|| Error::invalid(path, "expected an array of points"))?
        .iter()
        .enumerate()
        .map(|(i, p)| point_from_json(p, &format!("{path}[{i}]")))
        .collect()
}

fn points_to_json(ps: &[Point]) -> Value {
    Value::Array(ps.iter().map(point_to_json).collect())
}

/// A net file: flower, cage, or general net.
#[derive(Clone, Debug, PartialEq)]
pub enum NetDocument {
    Flower(PiecewiseGeodesicFlower),
    Cage(Cage),
    Net(Net),
}

impl NetDocument {
    /// The manifold named inside the document, if any.
    pub fn manifold_of(v: &Value) -> Result<Option<Manifold>> {
        v.get("manifold").map(Manifold::from_json).transpose()
    }

    pub fn from_json(m: &Manifold, v: &Value) -> Result<NetDocument> {
        if let Some(c) = v.get("cage") {
            let vertices = points_from_json(
                c.get("vertices")
                    .ok_or_else(|| Error::invalid("cage.vertices", "missing"))?,
                "cage.vertices",
            )?;
            let obj = c.get("edges").and_then(Value::as_object).ok_or_else(|| {
                Error::invalid("cage.edges", "expected an object keyed by \"a-b\"")
            })?;
            let mut edges = BTreeMap::new();
            for (key, pts) in obj {
                let path = format!("cage.edges.{key}");
                let (a, b) = key
                    .split_once('-')
                    .and_then(|(a, b)| {
                        Some((
                            a.trim().parse::<usize>().ok()?,
                            b.trim().parse::<usize>().ok()?,
                        ))
                    })
                    .ok_or_else(|| Error::invalid(&path, "edge key must look like \"0-1\""))?;
                let (a, b, mut pts) = (a, b, points_from_json(pts, &path)?);
                if a > b {
                    pts.reverse();
                }
                edges.insert((a.min(b), a.max(b)), pts);
            }
            return Ok(NetDocument::Cage(Cage::new(m, vertices, edges)?));
        }
        if let Some(petals) = v.get("petals") {
            let base = point_from_json(
                v.get("base")
                    .ok_or_else(|| Error::invalid("base", "missing"))?,
                "base",
            )?;
            let arr = petals
                .as_array()
                .ok_or_else(|| Error::invalid("petals", "expected an array of petals"))?;
            let ps = arr
                .iter()
                .enumerate()
                .map(|(j, p)| points_from_json(p, &format!("petals[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            return Ok(NetDocument::Flower(PiecewiseGeodesicFlower::new(
                m, base, ps,
            )?));
        }
        if let Some(es) = v.get("edges") {
            let vertices = points_from_json(
                v.get("vertices")
                    .ok_or_else(|| Error::invalid("vertices", "missing"))?,
                "vertices",
            )?;
            let arr = es
                .as_array()
                .ok_or_else(|| Error::invalid("edges", "expected an array"))?;
            let mut edges = Vec::with_capacity(arr.len());
            for (k, e) in arr.iter().enumerate() {
                let idx = |key: &str| {
                    e.get(key)
                        .and_then(Value::as_u64)
                        .map(|x| x as usize)
                        .ok_or_else(|| {
                            Error::invalid(format!("edges[{k}].{key}"), "expected a vertex index")
                        })
                };
                let points = match e.get("points") {
                    Some(p) => points_from_json(p, &format!("edges[{k}].points"))?,
                    None => Vec::new(),
                };
                edges.push(NetEdge {
                    from: idx("from")?,
                    to: idx("to")?,
                    points,
                });
            }
            return Ok(NetDocument::Net(Net::new(m, vertices, edges)?));
        }
        Err(Error::invalid(
            "",
            "expected a flower (base, petals), a cage, or a net (vertices, edges)",
        ))
    }

    pub fn to_json(&self, m: &Manifold) -> Value {
        let mut o = Map::new();
        o.insert("manifold".into(), m.to_json());
        match self {
            NetDocument::Flower(f) => {
                o.insert("base".into(), point_to_json(&f.base));
                o.insert(
                    "petals".into(),
                    Value::Array(f.petals.iter().map(|p| points_to_json(&p.points)).collect()),
                );
            }
            NetDocument::Cage(c) => {
                let edges: Map<String, Value> = c
                    .edges
                    .iter()
                    .map(|((a, b), pts)| (format!("{a}-{b}"), points_to_json(pts)))
                    .collect();
                o.insert(
                    "cage".into(),
                    json!({"vertices": points_to_json(&c.vertices), "edges": edges}),
                );
            }
            NetDocument::Net(n) => {
                o.insert("vertices".into(), points_to_json(&n.vertices));
                o.insert(
                    "edges".into(),
                    Value::Array(
                        n.edges
                            .iter()
                            .map(|e| json!({"from": e.from, "to": e.to, "points": points_to_json(&e.points)}))
                            .collect(),
                    ),
                );
            }
        }
        Value::Object(o)
    }

    pub fn as_net(&self) -> Net {
        match self {
            NetDocument::Flower(f) => f.to_net(),
            NetDocument::Cage(c) => c.to_net(),
            NetDocument::Net(n) => n.clone(),
        }
    }

    pub fn measure(&self, m: &Manifold) -> Result<NetMeasurement> {
        self.as_net().measure(m)
    }
}
