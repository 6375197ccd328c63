//! Named initial nets used by scenarios, examples and tests.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use super::{Cage, Net, NetEdge, PiecewiseGeodesicFlower};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldKind, Point};

/// One-petal flower along the circle `level = const`: a parallel on a
/// surface of revolution, a colatitude circle on the sphere, a circle about
/// the origin on the plane. Interior points are shifted by `interior_offset`
/// in the level coordinate; the base sits at longitude 0.
pub fn parallel_circle(
    m: &Manifold,
    level: f64,
    count: usize,
    interior_offset: f64,
) -> Result<PiecewiseGeodesicFlower> {
    let at = |lv: f64, phi: f64| -> [f64; 2] {
        match m.kind {
            ManifoldKind::EuclideanPlane | ManifoldKind::FlatTorus { .. } => {
                [lv * phi.cos(), lv * phi.sin()]
            }
            _ => [lv, phi],
        }
    };
    let base = m.point(at(level, 0.0))?;
    let pts = (1..=count)
        .map(|k| {
            m.point(at(
                level + interior_offset,
                TAU * k as f64 / (count + 1) as f64,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseGeodesicFlower::new(m, base, vec![pts])
}

/// Equator of the round sphere as a single petal based at longitude 0.
/// Interior points are displaced in colatitude by `offset`: southwards on the
/// first half turn, northwards on the second.
pub fn equator_petal(m: &Manifold, count: usize, offset: f64) -> Result<PiecewiseGeodesicFlower> {
    if !matches!(m.kind, ManifoldKind::RoundSphere { .. }) {
        return Err(Error::Precondition(
            "equator petal needs a round sphere".into(),
        ));
    }
    let base = m.point([PI / 2.0, 0.0])?;
    let pts = (1..=count)
        .map(|k| {
            let phi = TAU * k as f64 / (count + 1) as f64;
            // odd under the antipodal map, so the latitude mode is not excited
            let sign = if 2 * k == count + 1 {
                0.0
            } else {
                phi.sin().signum()
            };
            m.point([PI / 2.0 + sign * offset, phi])
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseGeodesicFlower::new(m, base, vec![pts])
}

/// Chart circle of the given radius about `center`, based at angle 0.
pub fn round_loop(
    m: &Manifold,
    center: [f64; 2],
    radius: f64,
    count: usize,
) -> Result<PiecewiseGeodesicFlower> {
    let at = |phi: f64| {
        [
            center[0] + radius * phi.cos(),
            center[1] + radius * phi.sin(),
        ]
    };
    let base = m.point(at(0.0))?;
    let pts = (1..=count)
        .map(|k| m.point(at(TAU * k as f64 / (count + 1) as f64)))
        .collect::<Result<Vec<_>>>()?;
    PiecewiseGeodesicFlower::new(m, base, vec![pts])
}

/// Three meridians joining the poles of a round sphere at longitudes
/// `0, 2π/3, 4π/3`, each cut into `segments` pieces.
pub fn theta_net(m: &Manifold, segments: usize) -> Result<Net> {
    if !matches!(m.kind, ManifoldKind::RoundSphere { .. }) {
        return Err(Error::Precondition("theta net needs a round sphere".into()));
    }
    let segments = segments.max(2);
    let north = m.point([0.0, 0.0])?;
    let south = m.point([PI, 0.0])?;
    let mut edges = Vec::new();
    for j in 0..3 {
        let phi = TAU * j as f64 / 3.0;
        let points = (1..segments)
            .map(|k| m.point([PI * k as f64 / segments as f64, phi]))
            .collect::<Result<Vec<_>>>()?;
        edges.push(NetEdge {
            from: 0,
            to: 1,
            points,
        });
    }
    Net::new(m, vec![north, south], edges)
}

/// Cage on chart-coordinate vertices; edge `(a, b)` is the chart segment from
/// vertex `a` to vertex `b` plus `shifts[(a, b)]` (used to pick a lattice
/// translate on the torus), cut into `segments` pieces.
pub fn linear_cage(
    m: &Manifold,
    vertices: &[[f64; 2]],
    segments: usize,
    shifts: &BTreeMap<(usize, usize), [f64; 2]>,
) -> Result<Cage> {
    let segments = segments.max(1);
    let vs = vertices
        .iter()
        .map(|&c| m.point(c))
        .collect::<Result<Vec<_>>>()?;
    let mut edges = BTreeMap::new();
    for a in 0..vertices.len() {
        for b in a + 1..vertices.len() {
            let shift = shifts.get(&(a, b)).copied().unwrap_or([0.0; 2]);
            let pa = vertices[a];
            let d = match m.kind {
                ManifoldKind::SurfaceOfRevolution { .. } => {
                    let d = m.chart_delta(&Point::new(pa), &Point::new(vertices[b]));
                    [d[0] + shift[0], d[1] + shift[1]]
                }
                _ => [
                    vertices[b][0] - pa[0] + shift[0],
                    vertices[b][1] - pa[1] + shift[1],
                ],
            };
            let mut poly = vec![vs[a]];
            for k in 1..segments {
                let f = k as f64 / segments as f64;
                poly.push(m.point([pa[0] + f * d[0], pa[1] + f * d[1]])?);
            }
            poly.push(vs[b]);
            edges.insert((a, b), poly);
        }
    }
    Cage::new(m, vs, edges)
}

pub fn triangle_cage(
    m: &Manifold,
    vertices: [[f64; 2]; 3],
    segments: usize,
    shifts: &BTreeMap<(usize, usize), [f64; 2]>,
) -> Result<Cage> {
    linear_cage(m, &vertices, segments, shifts)
}
