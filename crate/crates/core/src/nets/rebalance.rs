//! Birkhoff rebalancing: redistribute the points of a closed chain so that
//! consecutive points are equally far apart, keeping every new point on the
//! old broken geodesic. Chords never exceed the arcs they replace, so the
//! length cannot grow.

use crate::error::{Error, Result};
use crate::manifold::{Connection, Manifold, Point};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RebalanceSettings {
    /// Allowed relative spread `(max − min) / mean` of the segment lengths.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for RebalanceSettings {
    fn default() -> Self {
        RebalanceSettings {
            tol: 1e-6,
            max_iterations: 500,
        }
    }
}

pub(crate) fn chain_connections(m: &Manifold, chain: &[Point]) -> Result<Vec<Connection>> {
    chain.windows(2).map(|w| m.connect(&w[0], &w[1])).collect()
}

/// Arc-length parametrization of a broken geodesic.
struct BrokenGeodesic<'a> {
    conns: &'a [Connection],
    cum: Vec<f64>,
}

impl<'a> BrokenGeodesic<'a> {
    fn new(conns: &'a [Connection]) -> Self {
        let mut cum = Vec::with_capacity(conns.len() + 1);
        cum.push(0.0);
        for c in conns {
            cum.push(cum.last().unwrap() + c.length);
        }
        BrokenGeodesic { conns, cum }
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn at(&self, m: &Manifold, s: f64) -> Result<Point> {
        if s <= 0.0 {
            return Ok(self.conns[0].start);
        }
        if s >= self.total() {
            return Ok(self.conns[self.conns.len() - 1].end);
        }
        let i = self
            .cum
            .partition_point(|&c| c <= s)
            .saturating_sub(1)
            .min(self.conns.len() - 1);
        let c = &self.conns[i];
        if c.length <= 0.0 {
            return Ok(c.end);
        }
        m.along(c, (s - self.cum[i]) / c.length)
    }
}

fn spread(conns: &[Connection]) -> f64 {
    let (lo, hi, sum) = conns
        .iter()
        .fold((f64::INFINITY, 0.0f64, 0.0), |(lo, hi, s), c| {
            (lo.min(c.length), hi.max(c.length), s + c.length)
        });
    let mean = sum / conns.len() as f64;
    if mean <= 0.0 {
        0.0
    } else {
        (hi - lo) / mean
    }
}

/// Rebalances the chain `[b, p_1, …, b]` (with its connections) into `n`
/// interior points. Returns the points, the new connections, and the
/// remaining relative spread of the segment lengths.
pub(crate) fn rebalance_chain(
    m: &Manifold,
    petal: usize,
    conns: &[Connection],
    n: usize,
    settings: &RebalanceSettings,
) -> Result<(Vec<Point>, Vec<Connection>, f64)> {
    let segs = n + 1;
    let base = conns[0].start;
    let total: f64 = conns.iter().map(|c| c.length).sum();
    if total <= m.segment_epsilon() * segs as f64 {
        let c = m.connect(&base, &base)?;
        return Ok((vec![base; n], vec![c; segs], 0.0));
    }
    if conns.len() == segs {
        let sp = spread(conns);
        if sp <= settings.tol {
            let pts = conns[1..].iter().map(|c| c.start).collect();
            return Ok((pts, conns.to_vec(), sp));
        }
    }
    let fail = |e: Error| match e {
        Error::OutsideUniqueness { distance, bound } => Error::Rebalance {
            petal,
            reason: format!(
                "segment of length {distance:.6} exceeds the uniqueness bound {bound:.6}"
            ),
        },
        other => other,
    };
    // Equalize chords along the current curve; if that stalls (sharp corners
    // make the chord/arc relation very uneven) restart on the best chain found.
    let inner = 25;
    let mut curve_conns = conns.to_vec();
    let mut best: Option<(Vec<Point>, Vec<Connection>, f64)> = None;
    let mut budget = settings.max_iterations.max(1);
    while budget > 0 {
        let curve = BrokenGeodesic::new(&curve_conns);
        let total = curve.total();
        let mut s: Vec<f64> = (0..=segs).map(|k| total * k as f64 / segs as f64).collect();
        let mut round_best: Option<(Vec<Point>, Vec<Connection>, f64)> = None;
        let mut omega: f64 = 1.0;
        let mut prev = f64::INFINITY;
        for _ in 0..inner.min(budget) {
            budget -= 1;
            let mut chain = Vec::with_capacity(segs + 1);
            for &si in &s {
                chain.push(curve.at(m, si)?);
            }
            let new = chain_connections(m, &chain).map_err(fail)?;
            let sp = spread(&new);
            if round_best.as_ref().is_none_or(|b| sp < b.2) {
                round_best = Some((chain[1..=n].to_vec(), new.clone(), sp));
            }
            if sp <= settings.tol {
                break;
            }
            omega = if sp > prev {
                (0.5 * omega).max(0.125)
            } else {
                (1.5 * omega).min(1.0)
            };
            prev = sp;
            let mut cum = Vec::with_capacity(segs + 1);
            cum.push(0.0);
            for c in &new {
                cum.push(cum.last().unwrap() + c.length);
            }
            let chord_total = *cum.last().unwrap();
            let mut next = s.clone();
            for (k, v) in next.iter_mut().enumerate().take(segs).skip(1) {
                let target = chord_total * k as f64 / segs as f64;
                let i = cum
                    .partition_point(|&c| c <= target)
                    .saturating_sub(1)
                    .min(segs - 1);
                let w = cum[i + 1] - cum[i];
                let f = if w > 0.0 { (target - cum[i]) / w } else { 0.0 };
                let target_s = s[i] + f * (s[i + 1] - s[i]);
                *v += omega * (target_s - *v);
            }
            s = next;
        }
        let rb = round_best.expect("at least one iteration");
        let done = rb.2 <= settings.tol;
        curve_conns = rb.1.clone();
        if best.as_ref().is_none_or(|b| rb.2 < b.2) {
            best = Some(rb);
        }
        if done {
            break;
        }
    }
    Ok(best.expect("at least one iteration"))
}

/// Resamples a petal `base → points → base` into `n` interior points whose
/// consecutive distances agree within `settings.tol` relative.
pub fn birkhoff_rebalance(
    m: &Manifold,
    base: &Point,
    points: &[Point],
    n: usize,
    settings: &RebalanceSettings,
) -> Result<Vec<Point>> {
    let mut chain = Vec::with_capacity(points.len() + 2);
    chain.push(*base);
    chain.extend_from_slice(points);
    chain.push(*base);
    let conns = chain_connections(m, &chain)?;
    let (pts, _, sp) = rebalance_chain(m, 0, &conns, n, settings)?;
    if sp > settings.tol {
        return Err(Error::Rebalance {
            petal: 0,
            reason: format!("segment lengths still differ by {sp:.3e} relative"),
        });
    }
    Ok(pts)
}
