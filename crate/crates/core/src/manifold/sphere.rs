//! Round sphere of radius `r`, covered by two colatitude/longitude charts.
//!
//! Chart 0 has its poles on the z-axis, chart 1 on the x-axis. Every stored
//! point lives in the chart whose poles are farther away; geodesics are
//! evaluated in the embedding, where they are great circles.

use super::chart::Vec2;
use super::Point;

pub(crate) type Vec3 = [f64; 3];

#[inline]
fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Embedding of a chart point.
pub(crate) fn embed(r: f64, p: &Point) -> Vec3 {
    let [th, ph] = p.coords;
    let (st, ct) = th.sin_cos();
    let (sp, cp) = ph.sin_cos();
    match p.chart {
        0 => [r * st * cp, r * st * sp, r * ct],
        _ => [r * ct, r * st * cp, r * st * sp],
    }
}

/// Coordinate frame `(∂θ, ∂φ)` at `p` in the embedding.
fn frame(r: f64, p: &Point) -> (Vec3, Vec3) {
    let [th, ph] = p.coords;
    let (st, ct) = th.sin_cos();
    let (sp, cp) = ph.sin_cos();
    match p.chart {
        0 => (
            [r * ct * cp, r * ct * sp, -r * st],
            [-r * st * sp, r * st * cp, 0.0],
        ),
        _ => (
            [-r * st, r * ct * cp, r * ct * sp],
            [0.0, -r * st * sp, r * st * cp],
        ),
    }
}

fn chart_point(r: f64, y: Vec3, chart: u8) -> Point {
    let (axial, a, b) = match chart {
        0 => (y[2], y[0], y[1]),
        _ => (y[0], y[1], y[2]),
    };
    let th = (axial / r).clamp(-1.0, 1.0).acos();
    let ph = b.atan2(a).rem_euclid(std::f64::consts::TAU);
    Point {
        coords: [th, ph],
        chart,
    }
}

/// Chart point for an embedded position, in the preferred chart.
pub(crate) fn from_embedding(r: f64, y: Vec3) -> Point {
    let n = norm(y);
    let y = scale(y, r / n);
    let chart = if (y[2] / r).abs() <= 0.75 { 0 } else { 1 };
    chart_point(r, y, chart)
}

pub(crate) fn tangent_to_ambient(r: f64, p: &Point, c: Vec2) -> Vec3 {
    let (et, ep) = frame(r, p);
    add(scale(et, c[0]), scale(ep, c[1]))
}

pub(crate) fn tangent_from_ambient(r: f64, p: &Point, w: Vec3) -> Vec2 {
    let (et, ep) = frame(r, p);
    let st = p.coords[0].sin();
    [dot(w, et) / (r * r), dot(w, ep) / (r * r * st * st)]
}

pub(crate) fn canonical(r: f64, p: &Point) -> Point {
    let y = embed(r, p);
    let preferred = if (y[2] / r).abs() <= 0.75 { 0 } else { 1 };
    if preferred == p.chart && (0.0..=std::f64::consts::PI).contains(&p.coords[0]) {
        // already in the right chart: keep the coordinates bit for bit
        let ph = p.coords[1].rem_euclid(std::f64::consts::TAU) % std::f64::consts::TAU;
        return Point {
            coords: [p.coords[0], ph],
            chart: p.chart,
        };
    }
    from_embedding(r, y)
}

/// Re-expresses `c` (components at `p`) at the canonical version of `p`.
pub(crate) fn canonical_tangent(r: f64, p: &Point, c: Vec2) -> (Point, Vec2) {
    let q = canonical(r, p);
    if q.chart == p.chart {
        return (q, c);
    }
    let w = tangent_to_ambient(r, p, c);
    (q, tangent_from_ambient(r, &q, w))
}

/// `exp_p(t v)` and the velocity there.
pub(crate) fn exp(r: f64, p: &Point, v: Vec2, t: f64) -> (Point, Vec2) {
    let x = embed(r, p);
    let w = tangent_to_ambient(r, p, v);
    let speed = norm(w);
    if speed * t.abs() == 0.0 {
        return (*p, v);
    }
    let angle = speed * t / r;
    let e = scale(w, 1.0 / speed);
    let (s, c) = angle.sin_cos();
    let y = add(scale(x, c), scale(e, r * s));
    let vel = add(scale(x, -speed * s / r), scale(w, c));
    let q = from_embedding(r, y);
    let vq = tangent_from_ambient(r, &q, vel);
    (q, vq)
}

/// Initial velocity (unit parameter interval), terminal velocity and length
/// of the minimizing great-circle arc from `p` to `q`. Antipodal pairs have
/// no unique answer and yield `None`.
pub(crate) fn log(r: f64, p: &Point, q: &Point) -> Option<(Vec2, Vec2, f64)> {
    let x = embed(r, p);
    let y = embed(r, q);
    let angle = norm(cross(x, y)).atan2(dot(x, y));
    if angle == 0.0 {
        return Some(([0.0; 2], [0.0; 2], 0.0));
    }
    let perp = add(y, scale(x, -dot(x, y) / (r * r)));
    let pn = norm(perp);
    if pn < 1e-15 * r {
        return None;
    }
    let len = angle * r;
    let w = scale(perp, len / pn);
    let v = tangent_from_ambient(r, p, w);
    // terminal velocity: tangent at q continuing the arc
    let wt = add(scale(x, -len * angle.sin() / r), scale(w, angle.cos()));
    let vt = tangent_from_ambient(r, q, wt);
    Some((v, vt, len))
}

/// Parallel transport of `w` (at `p`) along `t ↦ exp_p(t v)`, `t ∈ [0, 1]`.
pub(crate) fn transport(r: f64, p: &Point, v: Vec2, w: Vec2, end: &Point) -> Vec2 {
    let x = embed(r, p);
    let a = tangent_to_ambient(r, p, v);
    let b = tangent_to_ambient(r, p, w);
    let speed = norm(a);
    if speed == 0.0 {
        return tangent_from_ambient(r, end, b);
    }
    let e = scale(a, 1.0 / speed);
    let xn = scale(x, 1.0 / r);
    let along = dot(b, e);
    let normal = add(b, scale(e, -along));
    let angle = speed / r;
    let (s, c) = angle.sin_cos();
    let e_end = add(scale(xn, -s), scale(e, c));
    let moved = add(scale(e_end, along), normal);
    tangent_from_ambient(r, end, moved)
}

/// Great-circle distance.
pub(crate) fn distance(r: f64, p: &Point, q: &Point) -> f64 {
    let x = embed(r, p);
    let y = embed(r, q);
    r * norm(cross(x, y)).atan2(dot(x, y))
}

/// Tangential part of the ambient second difference; zero along great circles.
pub(crate) fn covariant_acceleration(
    r: f64,
    prev: &Point,
    mid: &Point,
    next: &Point,
    h: f64,
) -> f64 {
    let a = embed(r, prev);
    let b = embed(r, mid);
    let c = embed(r, next);
    let acc = scale(add(add(a, c), scale(b, -2.0)), 1.0 / (h * h));
    let bn = scale(b, 1.0 / r);
    norm(add(acc, scale(bn, -dot(acc, bn))))
}
