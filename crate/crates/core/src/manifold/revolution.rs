//! Surfaces of revolution `(u, φ) ↦ (ρ(u) cos φ, ρ(u) sin φ, u)`.

use serde::{Deserialize, Serialize};

use super::chart::{ChartMetric, Christoffel, Vec2};

/// Named analytic profile families. Each ships `ρ`, `ρ'` and `ρ''`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `z = 1/x` rotated about the z-axis: `ρ(u) = 1/u`, `u > 0`.
    Hyperbola,
    /// `ρ(u) = sech u`.
    SechBulge,
    /// `z = x²`: `ρ(u) = √u`, `u > 0`.
    Paraboloid,
    /// `ρ(u) = cosh u`.
    Catenoid,
}

impl Profile {
    /// `(ρ, ρ', ρ'')` at `u`.
    #[inline]
    pub fn radius(self, u: f64) -> (f64, f64, f64) {
        match self {
            Profile::Hyperbola => {
                let r = 1.0 / u;
                (r, -r * r, 2.0 * r * r * r)
            }
            Profile::SechBulge => {
                let s = 1.0 / u.cosh();
                let t = u.tanh();
                (s, -s * t, s * (t * t - s * s))
            }
            Profile::Paraboloid => {
                let r = u.sqrt();
                (r, 0.5 / r, -0.25 / (r * u))
            }
            Profile::Catenoid => (u.cosh(), u.sinh(), u.cosh()),
        }
    }

    /// Open interval of admissible profile parameters.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Profile::Hyperbola | Profile::Paraboloid => (0.0, f64::INFINITY),
            Profile::SechBulge | Profile::Catenoid => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Working band used when none is configured.
    pub fn default_band(self) -> (f64, f64) {
        match self {
            Profile::Hyperbola => (0.15, 7.0),
            Profile::SechBulge => (-2.5, 2.5),
            Profile::Paraboloid => (0.05, 4.0),
            Profile::Catenoid => (-1.5, 1.5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Hyperbola => "hyperbola",
            Profile::SechBulge => "sech_bulge",
            Profile::Paraboloid => "paraboloid",
            Profile::Catenoid => "catenoid",
        }
    }

    /// Arc length of the meridian between two profile parameters.
    pub fn meridian_length(self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if hi - lo == 0.0 {
            return 0.0;
        }
        let f = |u: f64| {
            let (_, d, _) = self.radius(u);
            (1.0 + d * d).sqrt()
        };
        adaptive_simpson(&f, lo, hi, 1e-12, 40)
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// Chart of a surface of revolution restricted to a band of profile parameters.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RevolutionChart {
    pub profile: Profile,
    pub band: (f64, f64),
}

impl ChartMetric for RevolutionChart {
    #[inline]
    fn metric(&self, x: Vec2) -> [[f64; 2]; 2] {
        let (r, d, _) = self.profile.radius(x[0]);
        [[1.0 + d * d, 0.0], [0.0, r * r]]
    }

    #[inline]
    fn christoffel(&self, x: Vec2) -> Christoffel {
        let (r, d, dd) = self.profile.radius(x[0]);
        let e = 1.0 + d * d;
        let de = 2.0 * d * dd;
        let dg = 2.0 * r * d;
        let g = r * r;
        let mut gamma = [[[0.0; 2]; 2]; 2];
        gamma[0][0][0] = de / (2.0 * e);
        gamma[0][1][1] = -dg / (2.0 * e);
        gamma[1][0][1] = dg / (2.0 * g);
        gamma[1][1][0] = dg / (2.0 * g);
        gamma
    }

    #[inline]
    fn admissible(&self, x: Vec2) -> bool {
        x[0] >= self.band.0 && x[0] <= self.band.1
    }
}
