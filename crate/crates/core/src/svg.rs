//! Minimal SVG figures: orthographic views of embedded surfaces, chart plots
//! of flat ones.

use std::fmt::Write as _;

use crate::manifold::{Manifold, ManifoldKind, Point};

#[derive(Clone, Copy, Debug)]
pub enum Projection {
    /// Chart coordinates; torus paths are unwrapped into the plane.
    Chart,
    /// Orthographic view of the embedding from azimuth and elevation (radians).
    Orthographic { azimuth: f64, elevation: f64 },
}

impl Projection {
    pub fn for_manifold(m: &Manifold) -> Self {
        match m.kind {
            ManifoldKind::RoundSphere { .. } | ManifoldKind::SurfaceOfRevolution { .. } => {
                Projection::Orthographic {
                    azimuth: 0.5,
                    elevation: 0.35,
                }
            }
            _ => Projection::Chart,
        }
    }

    fn project(&self, m: &Manifold, p: &Point) -> [f64; 2] {
        match *self {
            Projection::Chart => p.coords,
            Projection::Orthographic { azimuth, elevation } => {
                let [x, y, z] = m.embed(p);
                let (sa, ca) = azimuth.sin_cos();
                let (se, ce) = elevation.sin_cos();
                let x1 = x * ca - y * sa;
                let y1 = x * sa + y * ca;
                [x1, z * ce - y1 * se]
            }
        }
    }
}

struct Shape {
    points: Vec<[f64; 2]>,
    stroke: String,
    width: f64,
    dot: bool,
}

pub struct Figure {
    projection: Projection,
    shapes: Vec<Shape>,
}

impl Figure {
    pub fn new(projection: Projection) -> Self {
        Figure {
            projection,
            shapes: Vec::new(),
        }
    }

    /// Adds a path through `points`. In chart view each step follows the
    /// shortest chart displacement, so torus paths do not jump across.
    pub fn polyline(&mut self, m: &Manifold, points: &[Point], stroke: &str, width: f64) {
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        match self.projection {
            Projection::Chart => {
                for (i, p) in points.iter().enumerate() {
                    if i == 0 {
                        out.push(p.coords);
                    } else {
                        let d = m.chart_delta(&points[i - 1], p);
                        let prev = out[i - 1];
                        out.push([prev[0] + d[0], prev[1] + d[1]]);
                    }
                }
            }
            proj => out.extend(points.iter().map(|p| proj.project(m, p))),
        }
        self.shapes.push(Shape {
            points: out,
            stroke: stroke.into(),
            width,
            dot: false,
        });
    }

    pub fn dot(&mut self, m: &Manifold, p: &Point, fill: &str) {
        self.shapes.push(Shape {
            points: vec![self.projection.project(m, p)],
            stroke: fill.into(),
            width: 1.0,
            dot: true,
        });
    }

    pub fn render(&self) -> String {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for s in &self.shapes {
            for p in &s.points {
                for i in 0..2 {
                    lo[i] = lo[i].min(p[i]);
                    hi[i] = hi[i].max(p[i]);
                }
            }
        }
        if !lo[0].is_finite() {
            lo = [0.0; 2];
            hi = [1.0; 2];
        }
        let size = 600.0;
        let margin = 20.0;
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let k = (size - 2.0 * margin) / span;
        let map = |p: &[f64; 2]| {
            (
                margin + (p[0] - lo[0]) * k,
                size - margin - (p[1] - lo[1]) * k,
            )
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for s in &self.shapes {
            if s.dot {
                let (x, y) = map(&s.points[0]);
                let _ = writeln!(
                    out,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"/>"#,
                    s.stroke
                );
                continue;
            }
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|p| {
                    let (x, y) = map(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
                pts.join(" "),
                s.stroke,
                s.width
            );
        }
        out.push_str("</svg>");
        out
    }
}
