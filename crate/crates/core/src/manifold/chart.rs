//! Geodesic and parallel-transport integration in a single two-dimensional chart.
//!
//! The integrator is classical RK4 with a step count fixed by the arc length
//! of the requested piece, refined by step doubling until two consecutive
//! resolutions agree. Boundary value problems are solved by shooting.

use crate::error::{Error, Result};

pub(crate) type Vec2 = [f64; 2];
/// `gamma[k][i][j]` = Γ^k_ij.
pub(crate) type Christoffel = [[[f64; 2]; 2]; 2];

pub(crate) trait ChartMetric {
    fn metric(&self, x: Vec2) -> [[f64; 2]; 2];
    fn christoffel(&self, x: Vec2) -> Christoffel;
    /// Whether `x` is inside the region the integrator may visit.
    fn admissible(&self, _x: Vec2) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct IvpSettings {
    /// Largest RK4 step, in units of arc length.
    pub max_step: f64,
    /// Agreement required between a resolution and its doubling.
    pub tol: f64,
    pub max_doublings: u32,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct BvpSettings {
    pub max_iterations: usize,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct IvpEnd {
    pub x: Vec2,
    pub v: Vec2,
    pub w: Vec2,
}

#[inline]
pub(crate) fn quad(g: &[[f64; 2]; 2], a: Vec2, b: Vec2) -> f64 {
    a[0] * (g[0][0] * b[0] + g[0][1] * b[1]) + a[1] * (g[1][0] * b[0] + g[1][1] * b[1])
}

#[inline]
fn contract(gamma: &Christoffel, a: Vec2, b: Vec2) -> Vec2 {
    let mut out = [0.0; 2];
    for (k, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += gamma[k][i][j] * a[i] * b[j];
            }
        }
        *o = s;
    }
    out
}

#[derive(Clone, Copy)]
struct State {
    x: Vec2,
    v: Vec2,
    w: Vec2,
}

impl State {
    fn axpy(&self, h: f64, d: &State) -> State {
        State {
            x: [self.x[0] + h * d.x[0], self.x[1] + h * d.x[1]],
            v: [self.v[0] + h * d.v[0], self.v[1] + h * d.v[1]],
            w: [self.w[0] + h * d.w[0], self.w[1] + h * d.w[1]],
        }
    }
}

fn rhs<C: ChartMetric + ?Sized>(c: &C, s: &State, transport: bool) -> State {
    let g = c.christoffel(s.x);
    let a = contract(&g, s.v, s.v);
    let w = if transport {
        contract(&g, s.v, s.w)
    } else {
        [0.0; 2]
    };
    State {
        x: s.v,
        v: [-a[0], -a[1]],
        w: [-w[0], -w[1]],
    }
}

/// Fixed-step RK4 from parameter 0 to `t`.
fn rk4<C: ChartMetric + ?Sized>(
    c: &C,
    x: Vec2,
    v: Vec2,
    w: Option<Vec2>,
    t: f64,
    steps: usize,
) -> Result<IvpEnd> {
    let transport = w.is_some();
    let mut s = State {
        x,
        v,
        w: w.unwrap_or([0.0; 2]),
    };
    let h = t / steps as f64;
    for step in 0..steps {
        let k1 = rhs(c, &s, transport);
        let k2 = rhs(c, &s.axpy(0.5 * h, &k1), transport);
        let k3 = rhs(c, &s.axpy(0.5 * h, &k2), transport);
        let k4 = rhs(c, &s.axpy(h, &k3), transport);
        for i in 0..2 {
            s.x[i] += h / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
            s.v[i] += h / 6.0 * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
            s.w[i] += h / 6.0 * (k1.w[i] + 2.0 * k2.w[i] + 2.0 * k3.w[i] + k4.w[i]);
        }
        if !c.admissible(s.x) || !s.x.iter().chain(s.v.iter()).all(|z| z.is_finite()) {
            return Err(Error::LeftWorkingRegion {
                at: crate::manifold::Point::raw(s.x),
                param: h * (step + 1) as f64,
            });
        }
    }
    Ok(IvpEnd {
        x: s.x,
        v: s.v,
        w: s.w,
    })
}

fn base_steps<C: ChartMetric + ?Sized>(c: &C, x: Vec2, v: Vec2, t: f64, max_step: f64) -> usize {
    let speed = quad(&c.metric(x), v, v).max(0.0).sqrt();
    let len = speed * t.abs();
    ((len / max_step).ceil() as usize).max(2)
}

/// Integrates the geodesic (and optionally a parallel field `w`) with step
/// doubling until the endpoint stabilizes. Returns the accepted endpoint and
/// the step count that produced it.
pub(crate) fn integrate_resolved<C: ChartMetric + ?Sized>(
    c: &C,
    x: Vec2,
    v: Vec2,
    w: Option<Vec2>,
    t: f64,
    s: &IvpSettings,
) -> Result<(IvpEnd, usize)> {
    if t == 0.0 {
        let end = IvpEnd {
            x,
            v,
            w: w.unwrap_or([0.0; 2]),
        };
        return Ok((end, 0));
    }
    let mut n = base_steps(c, x, v, t, s.max_step);
    let mut coarse = rk4(c, x, v, w, t, n)?;
    for _ in 0..s.max_doublings {
        let fine = rk4(c, x, v, w, t, 2 * n)?;
        let err = (0..2)
            .map(|i| (fine.x[i] - coarse.x[i]).abs())
            .fold(0.0, f64::max);
        if err <= s.tol {
            return Ok((coarse, n));
        }
        n *= 2;
        coarse = fine;
    }
    Ok((coarse, n))
}

pub(crate) fn integrate<C: ChartMetric + ?Sized>(
    c: &C,
    x: Vec2,
    v: Vec2,
    w: Option<Vec2>,
    t: f64,
    s: &IvpSettings,
) -> Result<IvpEnd> {
    integrate_resolved(c, x, v, w, t, s).map(|(end, _)| end)
}

fn solve2(m: [[f64; 2]; 2], r: Vec2) -> Option<Vec2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    Some([
        (m[1][1] * r[0] - m[0][1] * r[1]) / det,
        (-m[1][0] * r[0] + m[0][0] * r[1]) / det,
    ])
}

/// Shooting solution of the geodesic boundary value problem `x0 -> x1` on
/// the unit parameter interval. `x1` must already be the representative
/// nearest to `x0` (seam unwrapped). Returns the initial velocity and the
/// endpoint data of the final, verified integration.
pub(crate) fn shoot<C: ChartMetric + ?Sized>(
    c: &C,
    x0: Vec2,
    x1: Vec2,
    ivp: &IvpSettings,
    bvp: &BvpSettings,
) -> Result<(Vec2, IvpEnd)> {
    let d = [x1[0] - x0[0], x1[1] - x0[1]];
    if d[0] == 0.0 && d[1] == 0.0 {
        return Ok((
            [0.0; 2],
            IvpEnd {
                x: x0,
                v: [0.0; 2],
                w: [0.0; 2],
            },
        ));
    }
    let mid = [0.5 * (x0[0] + x1[0]), 0.5 * (x0[1] + x1[1])];
    let gmid = c.christoffel(mid);
    let corr = contract(&gmid, d, d);
    let mut v = [d[0] + 0.5 * corr[0], d[1] + 0.5 * corr[1]];
    let scale = d[0].abs().max(d[1].abs());

    let (_, mut steps) = integrate_resolved(c, x0, v, None, 1.0, ivp)?;
    let mut last_res = f64::INFINITY;
    let mut use_fd = false;
    for iteration in 0..bvp.max_iterations {
        let end = rk4(c, x0, v, None, 1.0, steps.max(1))?;
        let r = [end.x[0] - x1[0], end.x[1] - x1[1]];
        let res = r[0].abs().max(r[1].abs());
        if res <= bvp.tol {
            let (verified, n) = integrate_resolved(c, x0, v, None, 1.0, ivp)?;
            if n == steps {
                return Ok((v, verified));
            }
            steps = n;
            continue;
        }
        if res > 0.5 * last_res {
            use_fd = true;
        }
        last_res = res;
        let jac = if use_fd {
            let eta = 1e-7 * scale.max(1e-12);
            let mut j = [[0.0; 2]; 2];
            for col in 0..2 {
                let mut vp = v;
                vp[col] += eta;
                let e = rk4(c, x0, vp, None, 1.0, steps.max(1))?;
                for row in 0..2 {
                    j[row][col] = (e.x[row] - end.x[row]) / eta;
                }
            }
            j
        } else {
            let gv = contract_first(&gmid, v);
            [[1.0 - gv[0][0], -gv[0][1]], [-gv[1][0], 1.0 - gv[1][1]]]
        };
        let Some(dv) = solve2(jac, r) else {
            return Err(Error::NoConvergence {
                iterations: iteration + 1,
                residual: res,
            });
        };
        v = [v[0] - dv[0], v[1] - dv[1]];
    }
    Err(Error::NoConvergence {
        iterations: bvp.max_iterations,
        residual: last_res,
    })
}

/// `out[k][j] = Σ_i Γ^k_ij a^i`
fn contract_first(gamma: &Christoffel, a: Vec2) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for k in 0..2 {
        for j in 0..2 {
            out[k][j] = gamma[k][0][j] * a[0] + gamma[k][1][j] * a[1];
        }
    }
    out
}

/// Covariant acceleration `x'' + Γ(x', x')` from three samples spaced `h`
/// apart in the curve parameter, measured in the metric at the middle sample.
pub(crate) fn covariant_acceleration<C: ChartMetric + ?Sized>(
    c: &C,
    prev: Vec2,
    mid: Vec2,
    next: Vec2,
    h: f64,
) -> f64 {
    let vel = [
        (next[0] - prev[0]) / (2.0 * h),
        (next[1] - prev[1]) / (2.0 * h),
    ];
    let acc = [
        (next[0] - 2.0 * mid[0] + prev[0]) / (h * h),
        (next[1] - 2.0 * mid[1] + prev[1]) / (h * h),
    ];
    let gv = contract(&c.christoffel(mid), vel, vel);
    let cov = [acc[0] + gv[0], acc[1] + gv[1]];
    quad(&c.metric(mid), cov, cov).max(0.0).sqrt()
}
