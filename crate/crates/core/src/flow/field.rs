//! The discrete curve-shortening vector field on a flower.
//!
//! A point of a long petal moves by the sum of its two outward unit tangents.
//! A point of a short petal (extent at most `a/2`) instead follows the base:
//! it moves by the base's velocity, transported to it, plus the unit vector
//! pointing back at the base. Petals of extent between `a/2` and `a` blend the
//! two with a smoothstep weight.

use crate::error::{Error, Result};
use crate::manifold::{Connection, Manifold, Point};
use crate::nets::PiecewiseGeodesicFlower;

use super::FlowConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub base: [f64; 2],
    /// One vector per interior point of every petal (zero on constant petals).
    pub petals: Vec<Vec<[f64; 2]>>,
    /// Short-petal weight per petal; `1` on constant petals.
    pub weights: Vec<f64>,
    /// Some petal is strictly between the short and the long regime.
    pub blending: bool,
    /// Every non-constant petal is short.
    pub all_short: bool,
    /// Largest balancing residual (sum of unit tangents) over all points.
    pub max_residual: f64,
    pub max_speed: f64,
    /// `Σ |V|²` over base and interior points.
    pub energy: f64,
    /// `dL/dt` when every point moves by its field vector.
    pub length_rate: f64,
}

fn unit(v: [f64; 2], len: f64) -> [f64; 2] {
    [v[0] / len, v[1] / len]
}

fn add(a: &mut [f64; 2], b: [f64; 2], s: f64) {
    a[0] += s * b[0];
    a[1] += s * b[1];
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Weight of the short regime for a petal of extent `e`.
pub fn short_weight(e: f64, a: f64) -> f64 {
    smoothstep((a - e) / (0.5 * a))
}

/// Outward unit tangents of a chain at its start and end.
fn end_tangents(m: &Manifold, conns: &[Connection]) -> [f64; 2] {
    let eps = m.segment_epsilon();
    let mut out = [0.0; 2];
    let first = &conns[0];
    if first.length > eps {
        add(&mut out, unit(first.velocity, first.length), 1.0);
    }
    let last = &conns[conns.len() - 1];
    if last.length > eps {
        add(&mut out, unit(last.terminal, -last.length), 1.0);
    }
    out
}

/// Sum of unit tangents at interior point `i` of a chain.
fn interior_tangents(m: &Manifold, conns: &[Connection], i: usize) -> [f64; 2] {
    let eps = m.segment_epsilon();
    let mut out = [0.0; 2];
    let back = &conns[i];
    if back.length > eps {
        add(&mut out, unit(back.terminal, -back.length), 1.0);
    }
    let fwd = &conns[i + 1];
    if fwd.length > eps {
        add(&mut out, unit(fwd.velocity, fwd.length), 1.0);
    }
    out
}

/// Distance from the base to the farthest point of a petal, capped: any
/// value at or above `cap` is reported as infinite. The connections from the
/// base are returned whenever the extent is below the cap.
fn petal_extent(
    m: &Manifold,
    base: &Point,
    points: &[Point],
    conns: &[Connection],
    cap: f64,
) -> Result<(f64, Option<Vec<Connection>>)> {
    let total: f64 = conns.iter().map(|c| c.length).sum();
    // points within half the cap along the petal cannot reach the cap
    let mut prefix = 0.0;
    for (i, p) in points.iter().enumerate() {
        prefix += conns[i].length;
        if prefix.min(total - prefix) <= 0.5 * cap {
            continue;
        }
        match m.connect(base, p) {
            Ok(c) if c.length < cap => {}
            Ok(_) | Err(Error::OutsideUniqueness { .. }) => return Ok((f64::INFINITY, None)),
            Err(e) => return Err(e),
        }
    }
    let spokes = points
        .iter()
        .map(|p| m.connect(base, p))
        .collect::<Result<Vec<_>>>()?;
    let extent = spokes.iter().map(|c| c.length).fold(0.0, f64::max);
    Ok((extent, Some(spokes)))
}

/// Evaluates the field given the chain connections of every petal.
pub fn vector_field(
    m: &Manifold,
    flower: &PiecewiseGeodesicFlower,
    conns: &[Vec<Connection>],
    config: &FlowConfig,
) -> Result<FieldSample> {
    let a = config.short_radius;
    let base = flower.base;
    let np = flower.petals.len();
    let mut weights = vec![1.0; np];
    let mut spokes: Vec<Option<Vec<Connection>>> = vec![None; np];
    let mut blending = false;
    let mut all_short = true;
    let mut base_residual = [0.0; 2];
    let mut v_base = [0.0; 2];
    for (j, petal) in flower.petals.iter().enumerate() {
        if petal.constant {
            continue;
        }
        let (e, sp) = petal_extent(m, &base, &petal.points, &conns[j], a)?;
        let w = if e.is_finite() {
            short_weight(e, a)
        } else {
            0.0
        };
        weights[j] = w;
        if w > 0.0 {
            spokes[j] = sp;
        }
        blending |= w > 0.0 && w < 1.0;
        all_short &= w >= 1.0;
        let t = end_tangents(m, &conns[j]);
        add(&mut base_residual, t, 1.0);
        add(&mut v_base, t, 1.0 - w);
    }
    if flower.petals.iter().all(|p| p.constant) {
        all_short = true;
    }

    let mut max_residual = m.norm(&base, base_residual);
    let mut energy = m.inner(&base, v_base, v_base);
    let mut max_speed = energy.sqrt();
    let mut length_rate = -m.inner(&base, base_residual, v_base);
    let mut petals = Vec::with_capacity(np);
    for (j, petal) in flower.petals.iter().enumerate() {
        let n = petal.points.len();
        if petal.constant {
            petals.push(vec![[0.0; 2]; n]);
            continue;
        }
        let w = weights[j];
        let mut vs = Vec::with_capacity(n);
        for (i, p) in petal.points.iter().enumerate() {
            let g = interior_tangents(m, &conns[j], i);
            let mut v = [0.0; 2];
            add(&mut v, g, 1.0 - w);
            if w > 0.0 {
                let spoke = &spokes[j].as_ref().expect("spokes of a short petal")[i];
                let mut s = m.transport(spoke, v_base)?;
                if spoke.length > m.segment_epsilon() {
                    add(&mut s, unit(spoke.terminal, -spoke.length), 1.0);
                }
                add(&mut v, s, w);
            }
            let speed2 = m.inner(p, v, v);
            max_residual = max_residual.max(m.norm(p, g));
            energy += speed2;
            max_speed = max_speed.max(speed2.sqrt());
            length_rate -= m.inner(p, g, v);
            vs.push(v);
        }
        petals.push(vs);
    }
    Ok(FieldSample {
        base: v_base,
        petals,
        weights,
        blending,
        all_short,
        max_residual,
        max_speed,
        energy,
        length_rate,
    })
}
