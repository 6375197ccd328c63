//! Deformation retraction of cages onto flowers: every vertex but the top one
//! slides along its edge to the top vertex, dragging the other edges along.

use std::collections::BTreeMap;

use super::{chain_connections, Cage};
use crate::error::Result;
use crate::manifold::{Manifold, Point};

/// Splits a polyline at arc-length fraction `t`; returns the part before the
/// cut (ending at the cut point) and the part after (starting at it).
fn split(m: &Manifold, poly: &[Point], t: f64) -> Result<(Vec<Point>, Vec<Point>)> {
    let conns = chain_connections(m, poly)?;
    let total: f64 = conns.iter().map(|c| c.length).sum();
    let target = t.clamp(0.0, 1.0) * total;
    if t <= 0.0 || total <= 0.0 {
        return Ok((vec![poly[0]], poly.to_vec()));
    }
    if t >= 1.0 {
        return Ok((poly.to_vec(), vec![poly[poly.len() - 1]]));
    }
    let mut acc = 0.0;
    for (i, c) in conns.iter().enumerate() {
        if acc + c.length >= target {
            let f = if c.length > 0.0 {
                (target - acc) / c.length
            } else {
                1.0
            };
            let cut = m.along(c, f)?;
            let mut head = poly[..=i].to_vec();
            head.push(cut);
            let mut tail = vec![cut];
            tail.extend_from_slice(&poly[i + 1..]);
            return Ok((head, tail));
        }
        acc += c.length;
    }
    Ok((poly.to_vec(), vec![poly[poly.len() - 1]]))
}

fn push_dedup(m: &Manifold, out: &mut Vec<Point>, pts: &[Point]) {
    for p in pts {
        if out.last().is_none_or(|q| !m.coincident(q, p)) {
            out.push(*p);
        }
    }
}

/// The cage at time `t ∈ [0, 1]` of the retraction. Vertex `i` below the top
/// vertex moves along edge `(i, top)` by fraction `t` of its length; edge
/// `(i, j)` becomes the path back along `(i, top)` to the old vertex, the old
/// edge, and the path forward along `(j, top)`. No point leaves the old image.
pub fn cage_to_flower(m: &Manifold, cage: &Cage, t: f64) -> Result<Cage> {
    let top = cage.vertices.len() - 1;
    let mut heads = Vec::with_capacity(top);
    let mut tails = Vec::with_capacity(top);
    for i in 0..top {
        let (h, tl) = split(m, &cage.edges[&(i, top)], t)?;
        heads.push(h);
        tails.push(tl);
    }
    let mut vertices: Vec<Point> = heads.iter().map(|h| *h.last().unwrap()).collect();
    vertices.push(cage.vertices[top]);

    let mut edges = BTreeMap::new();
    for (&(a, b), poly) in &cage.edges {
        let pts = if b == top {
            tails[a].clone()
        } else {
            let mut out = Vec::new();
            let mut back = heads[a].clone();
            back.reverse();
            push_dedup(m, &mut out, &back);
            push_dedup(m, &mut out, poly);
            push_dedup(m, &mut out, &heads[b]);
            out
        };
        let mut pts = if pts.len() < 2 {
            vec![pts[0], pts[0]]
        } else {
            pts
        };
        // ends exactly on the (moved) vertices
        pts[0] = vertices[a];
        let last = pts.len() - 1;
        pts[last] = vertices[b];
        edges.insert((a, b), pts);
    }
    Ok(Cage { vertices, edges })
}

impl Cage {
    /// Points on every segment at `per_segment` uniform subdivisions, plus the
    /// largest spacing between neighbouring samples.
    pub fn image_samples(&self, m: &Manifold, per_segment: usize) -> Result<(Vec<Point>, f64)> {
        let k = per_segment.max(1);
        let mut out = Vec::new();
        let mut gap: f64 = 0.0;
        for poly in self.edges.values() {
            for c in chain_connections(m, poly)? {
                gap = gap.max(c.length / k as f64);
                for j in 0..=k {
                    out.push(m.along(&c, j as f64 / k as f64)?);
                }
            }
        }
        Ok((out, gap))
    }
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(m: &Manifold, a: &[Point], b: &[Point]) -> Result<f64> {
    let directed = |x: &[Point], y: &[Point]| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in x {
            let mut best = f64::INFINITY;
            for q in y {
                best = best.min(m.distance(p, q)?.value);
            }
            worst = worst.max(best);
        }
        Ok(worst)
    };
    Ok(directed(a, b)?.max(directed(b, a)?))
}
