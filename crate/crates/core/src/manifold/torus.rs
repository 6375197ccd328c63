//! Flat torus `R² / Λ` for a lattice `Λ` spanned by two column vectors.

use super::chart::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Lattice {
    /// `basis[k]` is the k-th generating vector.
    pub basis: [Vec2; 2],
}

impl Lattice {
    fn det(&self) -> f64 {
        let [a, b] = self.basis;
        a[0] * b[1] - a[1] * b[0]
    }

    pub fn is_valid(&self) -> bool {
        let d = self.det();
        d.is_finite() && d.abs() > 1e-12
    }

    /// Lattice coordinates of a chart vector.
    fn coefficients(&self, x: Vec2) -> Vec2 {
        let [a, b] = self.basis;
        let d = self.det();
        [
            (x[0] * b[1] - x[1] * b[0]) / d,
            (a[0] * x[1] - a[1] * x[0]) / d,
        ]
    }

    pub fn combine(&self, m: f64, n: f64) -> Vec2 {
        let [a, b] = self.basis;
        [m * a[0] + n * b[0], m * a[1] + n * b[1]]
    }

    /// Representative in the fundamental parallelogram.
    pub fn reduce(&self, x: Vec2) -> Vec2 {
        let c = self.coefficients(x);
        if c.iter().all(|v| (0.0..1.0).contains(v)) {
            return x;
        }
        let f = [c[0].rem_euclid(1.0), c[1].rem_euclid(1.0)];
        let f = [
            if f[0] >= 1.0 { 0.0 } else { f[0] },
            if f[1] >= 1.0 { 0.0 } else { f[1] },
        ];
        self.combine(f[0], f[1])
    }

    /// Shortest translate of `d` by lattice vectors.
    pub fn shortest(&self, d: Vec2) -> Vec2 {
        let c = self.coefficients(d);
        let base = self.combine(c[0].round(), c[1].round());
        let d0 = [d[0] - base[0], d[1] - base[1]];
        let mut best = d0;
        let mut best_len = d0[0] * d0[0] + d0[1] * d0[1];
        for m in -2..=2 {
            for n in -2..=2 {
                let t = self.combine(m as f64, n as f64);
                let cand = [d0[0] - t[0], d0[1] - t[1]];
                let l = cand[0] * cand[0] + cand[1] * cand[1];
                if l < best_len {
                    best = cand;
                    best_len = l;
                }
            }
        }
        best
    }

    /// Length of the shortest non-zero lattice vector.
    pub fn systole(&self) -> f64 {
        let mut best = f64::INFINITY;
        for m in -3i32..=3 {
            for n in -3i32..=3 {
                if m == 0 && n == 0 {
                    continue;
                }
                let t = self.combine(m as f64, n as f64);
                best = best.min((t[0] * t[0] + t[1] * t[1]).sqrt());
            }
        }
        best
    }
}
