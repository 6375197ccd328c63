//! Cages, flowers and general nets of broken geodesics.
//!
//! Every net is stored as a list of points per edge; consecutive points are
//! joined by the unique minimizing geodesic, so all segment lengths must stay
//! below half the injectivity floor. Measurements (length, balancing
//! residuals, geodesic deviation) go through the general [`Net`] form.

mod generators;
mod json;
mod rebalance;
mod retract;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{Connection, Manifold, Point, TangentVector};

pub use generators::{
    equator_petal, linear_cage, parallel_circle, round_loop, theta_net, triangle_cage,
};
pub use json::{point_from_json, point_to_json, NetDocument};
pub use rebalance::{birkhoff_rebalance, RebalanceSettings};
pub(crate) use rebalance::{chain_connections, rebalance_chain};
pub use retract::{cage_to_flower, hausdorff_distance};

/// One loop of a flower: the interior points between two visits of the base.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Petal {
    pub points: Vec<Point>,
    /// All points sit at the base.
    pub constant: bool,
}

/// Base point plus petals, each a closed chain of short geodesic segments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseGeodesicFlower {
    pub base: Point,
    pub petals: Vec<Petal>,
}

/// Ordered-vertex 1-skeleton of a simplex. `edges[(a, b)]`, `a < b`, is the
/// full polyline from `vertices[a]` to `vertices[b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cage {
    pub vertices: Vec<Point>,
    pub edges: BTreeMap<(usize, usize), Vec<Point>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetEdge {
    pub from: usize,
    pub to: usize,
    /// Subdivision points strictly between the end vertices.
    pub points: Vec<Point>,
}

/// A map of a multigraph with broken-geodesic edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Net {
    pub vertices: Vec<Point>,
    pub edges: Vec<NetEdge>,
}

/// Identifies a point of a [`Net`]: a graph vertex or a subdivision point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    Vertex(usize),
    Interior { edge: usize, index: usize },
}

impl NodeId {
    pub fn label(&self) -> String {
        match self {
            NodeId::Vertex(v) => format!("v{v}"),
            NodeId::Interior { edge, index } => format!("e{edge}.{index}"),
        }
    }

    pub fn parse(s: &str) -> Option<NodeId> {
        if let Some(rest) = s.strip_prefix('v') {
            return rest.parse().ok().map(NodeId::Vertex);
        }
        let rest = s.strip_prefix('e')?;
        let (e, i) = rest.split_once('.')?;
        Some(NodeId::Interior {
            edge: e.parse().ok()?,
            index: i.parse().ok()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexResidual {
    pub vertex: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetMeasurement {
    pub total_length: f64,
    /// Per edge, or per petal for flowers.
    pub per_petal_lengths: Vec<f64>,
    pub balancing_residuals: Vec<VertexResidual>,
    pub max_residual: f64,
    pub geodesic_deviation: f64,
}

impl NetMeasurement {
    pub fn is_geodesic_net(&self, tol_stat: f64, tol_geo: f64) -> bool {
        self.max_residual <= tol_stat && self.geodesic_deviation <= tol_geo
    }
}

fn unit(c: [f64; 2], len: f64) -> [f64; 2] {
    [c[0] / len, c[1] / len]
}

impl Net {
    /// Validates and canonicalizes all points.
    pub fn new(m: &Manifold, vertices: Vec<Point>, edges: Vec<NetEdge>) -> Result<Net> {
        let canon = |p: &Point, path: String| -> Result<Point> {
            m.check_point(p)
                .map_err(|e| Error::invalid(path, e.to_string()))?;
            Ok(m.canonical(p))
        };
        let vertices = vertices
            .iter()
            .enumerate()
            .map(|(i, p)| canon(p, format!("vertices[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(edges.len());
        for (k, e) in edges.into_iter().enumerate() {
            if e.from >= vertices.len() || e.to >= vertices.len() {
                return Err(Error::invalid(format!("edges[{k}]"), "unknown end vertex"));
            }
            let points = e
                .points
                .iter()
                .enumerate()
                .map(|(j, p)| canon(p, format!("edges[{k}].points[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            out.push(NetEdge {
                from: e.from,
                to: e.to,
                points,
            });
        }
        Ok(Net {
            vertices,
            edges: out,
        })
    }

    /// Full point chain of edge `k`, end vertices included.
    pub fn chain(&self, k: usize) -> Vec<Point> {
        let e = &self.edges[k];
        let mut c = Vec::with_capacity(e.points.len() + 2);
        c.push(self.vertices[e.from]);
        c.extend_from_slice(&e.points);
        c.push(self.vertices[e.to]);
        c
    }

    pub fn connections(&self, m: &Manifold) -> Result<Vec<Vec<Connection>>> {
        (0..self.edges.len())
            .map(|k| chain_connections(m, &self.chain(k)))
            .collect()
    }

    pub fn length(&self, m: &Manifold) -> Result<f64> {
        Ok(self
            .connections(m)?
            .iter()
            .flat_map(|c| c.iter().map(|s| s.length))
            .sum())
    }

    /// Summed outward unit tangents at every vertex and subdivision point.
    /// Segments shorter than the degeneracy threshold contribute nothing.
    pub(crate) fn tangent_sums(
        &self,
        m: &Manifold,
        conns: &[Vec<Connection>],
    ) -> (Vec<[f64; 2]>, Vec<Vec<[f64; 2]>>) {
        let eps = m.segment_epsilon();
        let mut at_vertex = vec![[0.0; 2]; self.vertices.len()];
        let mut interior: Vec<Vec<[f64; 2]>> = self
            .edges
            .iter()
            .map(|e| vec![[0.0; 2]; e.points.len()])
            .collect();
        for (k, e) in self.edges.iter().enumerate() {
            let segs = &conns[k];
            let last = segs.len() - 1;
            for (i, s) in segs.iter().enumerate() {
                if s.length <= eps {
                    continue;
                }
                let out = unit(s.velocity, s.length);
                let back = unit(s.terminal, -s.length);
                let start = if i == 0 {
                    &mut at_vertex[e.from]
                } else {
                    &mut interior[k][i - 1]
                };
                start[0] += out[0];
                start[1] += out[1];
                let end = if i == last {
                    &mut at_vertex[e.to]
                } else {
                    &mut interior[k][i]
                };
                end[0] += back[0];
                end[1] += back[1];
            }
        }
        (at_vertex, interior)
    }

    pub fn node(&self, id: NodeId) -> Result<Point> {
        match id {
            NodeId::Vertex(v) => self.vertices.get(v).copied(),
            NodeId::Interior { edge, index } => self
                .edges
                .get(edge)
                .and_then(|e| e.points.get(index))
                .copied(),
        }
        .ok_or_else(|| Error::Domain(format!("unknown vertex {}", id.label())))
    }

    pub fn balancing_residual(&self, m: &Manifold, at: NodeId) -> Result<TangentVector> {
        let p = self.node(at)?;
        let conns = self.connections(m)?;
        let (v, inner) = self.tangent_sums(m, &conns);
        let c = match at {
            NodeId::Vertex(i) => v[i],
            NodeId::Interior { edge, index } => inner[edge][index],
        };
        Ok(TangentVector::new(p, c))
    }

    pub fn measure(&self, m: &Manifold) -> Result<NetMeasurement> {
        let conns = self.connections(m)?;
        self.measure_with(m, &conns)
    }

    pub(crate) fn measure_with(
        &self,
        m: &Manifold,
        conns: &[Vec<Connection>],
    ) -> Result<NetMeasurement> {
        let per: Vec<f64> = conns
            .iter()
            .map(|c| c.iter().map(|s| s.length).sum())
            .collect();
        let (v, inner) = self.tangent_sums(m, conns);
        let mut residuals = Vec::new();
        for (i, c) in v.iter().enumerate() {
            residuals.push(VertexResidual {
                vertex: NodeId::Vertex(i).label(),
                residual: m.norm(&self.vertices[i], *c),
            });
        }
        for (k, e) in self.edges.iter().enumerate() {
            for (j, c) in inner[k].iter().enumerate() {
                residuals.push(VertexResidual {
                    vertex: NodeId::Interior { edge: k, index: j }.label(),
                    residual: m.norm(&e.points[j], *c),
                });
            }
        }
        let mut deviation: f64 = 0.0;
        for s in conns.iter().flatten() {
            deviation = deviation.max(m.geodesic_deviation(s)?);
        }
        Ok(NetMeasurement {
            total_length: per.iter().sum(),
            max_residual: residuals.iter().map(|r| r.residual).fold(0.0, f64::max),
            per_petal_lengths: per,
            balancing_residuals: residuals,
            geodesic_deviation: deviation,
        })
    }
}

impl PiecewiseGeodesicFlower {
    /// Validates and canonicalizes the points; petals whose points all sit at
    /// the base are flagged constant.
    pub fn new(m: &Manifold, base: Point, petals: Vec<Vec<Point>>) -> Result<Self> {
        m.check_point(&base)
            .map_err(|e| Error::invalid("base", e.to_string()))?;
        let base = m.canonical(&base);
        let mut out = Vec::with_capacity(petals.len());
        for (j, pts) in petals.into_iter().enumerate() {
            let mut canon = Vec::with_capacity(pts.len());
            for (k, p) in pts.iter().enumerate() {
                m.check_point(p)
                    .map_err(|e| Error::invalid(format!("petals[{j}][{k}]"), e.to_string()))?;
                canon.push(m.canonical(p));
            }
            let constant = canon.iter().all(|p| m.coincident(p, &base));
            out.push(Petal {
                points: canon,
                constant,
            });
        }
        Ok(PiecewiseGeodesicFlower { base, petals: out })
    }

    /// The flower with every petal collapsed to the base.
    pub fn constant(base: Point, petals: usize, n: usize) -> Self {
        PiecewiseGeodesicFlower {
            base,
            petals: (0..petals)
                .map(|_| Petal {
                    points: vec![base; n],
                    constant: true,
                })
                .collect(),
        }
    }

    /// `[base, p_1, …, p_N, base]` for petal `j`.
    pub fn chain(&self, j: usize) -> Vec<Point> {
        let p = &self.petals[j];
        let mut c = Vec::with_capacity(p.points.len() + 2);
        c.push(self.base);
        c.extend_from_slice(&p.points);
        c.push(self.base);
        c
    }

    /// Total number of points K (the base counted once).
    pub fn point_count(&self) -> usize {
        1 + self.petals.iter().map(|p| p.points.len()).sum::<usize>()
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        std::iter::once(&self.base).chain(self.petals.iter().flat_map(|p| p.points.iter()))
    }

    pub fn to_net(&self) -> Net {
        Net {
            vertices: vec![self.base],
            edges: self
                .petals
                .iter()
                .map(|p| NetEdge {
                    from: 0,
                    to: 0,
                    points: p.points.clone(),
                })
                .collect(),
        }
    }

    pub fn length(&self, m: &Manifold) -> Result<f64> {
        self.to_net().length(m)
    }

    pub fn measure(&self, m: &Manifold) -> Result<NetMeasurement> {
        self.to_net().measure(m)
    }

    /// Largest distance estimate between the base and any point.
    pub fn radius_about_base(&self, m: &Manifold) -> Result<f64> {
        let mut r: f64 = 0.0;
        for p in self.points() {
            r = r.max(m.distance(&self.base, p)?.value);
        }
        Ok(r)
    }
}

impl Cage {
    /// Validates the simplex structure and snaps polyline ends onto the
    /// vertices they are meant to join.
    pub fn new(
        m: &Manifold,
        vertices: Vec<Point>,
        edges: BTreeMap<(usize, usize), Vec<Point>>,
    ) -> Result<Cage> {
        let k = vertices.len();
        if k < 3 {
            return Err(Error::invalid(
                "cage.vertices",
                "a cage needs at least three vertices",
            ));
        }
        let mut vs = Vec::with_capacity(k);
        for (i, p) in vertices.iter().enumerate() {
            m.check_point(p)
                .map_err(|e| Error::invalid(format!("cage.vertices[{i}]"), e.to_string()))?;
            vs.push(m.canonical(p));
        }
        let mut out = BTreeMap::new();
        for a in 0..k {
            for b in a + 1..k {
                let path = format!("cage.edges.{a}-{b}");
                let poly = edges
                    .get(&(a, b))
                    .ok_or_else(|| Error::invalid(&path, "missing edge"))?;
                let mut pts = Vec::with_capacity(poly.len() + 2);
                for (j, p) in poly.iter().enumerate() {
                    m.check_point(p)
                        .map_err(|e| Error::invalid(format!("{path}[{j}]"), e.to_string()))?;
                    pts.push(m.canonical(p));
                }
                // accept either full polylines or interior points only
                let full = pts.len() >= 2
                    && m.coincident(&pts[0], &vs[a])
                    && m.coincident(&pts[pts.len() - 1], &vs[b]);
                if full {
                    pts[0] = vs[a];
                    let last = pts.len() - 1;
                    pts[last] = vs[b];
                } else {
                    pts.insert(0, vs[a]);
                    pts.push(vs[b]);
                }
                out.insert((a, b), pts);
            }
        }
        if edges.keys().any(|&(a, b)| a >= b || b >= k) {
            return Err(Error::invalid(
                "cage.edges",
                "edge keys must be pairs a-b with a < b < vertex count",
            ));
        }
        Ok(Cage {
            vertices: vs,
            edges: out,
        })
    }

    /// Simplex dimension i (the cage has i + 1 vertices).
    pub fn order(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Polyline from `vertices[a]` to `vertices[b]` for any `a != b`.
    pub fn edge(&self, a: usize, b: usize) -> Vec<Point> {
        if a < b {
            self.edges[&(a, b)].clone()
        } else {
            let mut e = self.edges[&(b, a)].clone();
            e.reverse();
            e
        }
    }

    pub fn constant_flags(&self, m: &Manifold) -> BTreeMap<(usize, usize), bool> {
        self.edges
            .iter()
            .map(|(k, pts)| (*k, pts.iter().all(|p| m.coincident(p, &pts[0]))))
            .collect()
    }

    pub fn to_net(&self) -> Net {
        Net {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|(&(a, b), pts)| NetEdge {
                    from: a,
                    to: b,
                    points: pts[1..pts.len() - 1].to_vec(),
                })
                .collect(),
        }
    }

    pub fn length(&self, m: &Manifold) -> Result<f64> {
        self.to_net().length(m)
    }

    pub fn edge_lengths(&self, m: &Manifold) -> Result<BTreeMap<(usize, usize), f64>> {
        self.edges
            .iter()
            .map(|(k, pts)| {
                Ok((
                    *k,
                    chain_connections(m, pts)?.iter().map(|c| c.length).sum(),
                ))
            })
            .collect()
    }

    pub fn measure(&self, m: &Manifold) -> Result<NetMeasurement> {
        self.to_net().measure(m)
    }

    /// Reads a cage whose vertices all coincide as a flower with one petal
    /// per edge, in key order.
    pub fn to_flower(&self, m: &Manifold) -> Result<PiecewiseGeodesicFlower> {
        let base = *self.vertices.last().expect("cage has vertices");
        if let Some(i) = self.vertices.iter().position(|v| !m.coincident(v, &base)) {
            return Err(Error::Precondition(format!(
                "vertex {i} does not coincide with the top vertex; retract first"
            )));
        }
        let petals = self
            .edges
            .values()
            .map(|pts| {
                let points = pts[1..pts.len() - 1].to_vec();
                let constant = points.iter().all(|p| m.coincident(p, &base));
                Petal { points, constant }
            })
            .collect();
        Ok(PiecewiseGeodesicFlower { base, petals })
    }
}
