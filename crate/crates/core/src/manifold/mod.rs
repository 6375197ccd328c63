//! Riemannian primitives on the test surfaces: metric, geodesics, minimizing
//! connections, parallel transport and distance.
//!
//! All surfaces are two-dimensional. Points carry chart coordinates and a
//! chart id; tangent vectors carry components in the chart basis of their
//! base point. Every point handed out by a [`Manifold`] is canonical: the
//! longitude is normalized to `[0, 2π)`, torus points are reduced to the
//! fundamental domain and sphere points sit in the chart whose poles are far
//! away.

mod chart;
pub mod revolution;
mod sphere;
mod torus;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub use revolution::Profile;

use chart::{BvpSettings, IvpSettings, Vec2};
use revolution::RevolutionChart;
use torus::Lattice;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: [f64; 2],
    #[serde(default)]
    pub chart: u8,
}

impl Point {
    /// A point in chart 0. Use [`Manifold::point`] for a validated, canonical point.
    pub fn new(coords: [f64; 2]) -> Self {
        Point { coords, chart: 0 }
    }

    pub(crate) fn raw(coords: [f64; 2]) -> Self {
        Point::new(coords)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: Point,
    pub components: [f64; 2],
}

impl TangentVector {
    pub fn new(base: Point, components: [f64; 2]) -> Self {
        TangentVector { base, components }
    }

    pub fn zero(base: Point) -> Self {
        TangentVector::new(base, [0.0; 2])
    }
}

/// Minimizing geodesic between two points, parametrized on `[0, 1]`.
///
/// `velocity` has norm equal to the length; `terminal` is the velocity at the
/// far end, expressed at `end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Connection {
    pub start: Point,
    pub end: Point,
    pub velocity: [f64; 2],
    pub terminal: [f64; 2],
    pub length: f64,
}

impl Connection {
    pub fn reversed(&self) -> Connection {
        Connection {
            start: self.end,
            end: self.start,
            velocity: [-self.terminal[0], -self.terminal[1]],
            terminal: [-self.velocity[0], -self.velocity[1]],
            length: self.length,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSegment {
    pub start: Point,
    pub end: Point,
    /// Unit-speed initial velocity (zero for a degenerate segment).
    pub initial_velocity: TangentVector,
    /// Unit-speed velocity at `end`.
    pub terminal_velocity: TangentVector,
    pub length: f64,
    /// Points at uniform arc-length fractions, `samples[0] = start`.
    pub samples: Vec<Point>,
}

impl GeodesicSegment {
    pub(crate) fn connection(&self) -> Connection {
        let l = self.length;
        Connection {
            start: self.start,
            end: self.end,
            velocity: scale2(self.initial_velocity.components, l),
            terminal: scale2(self.terminal_velocity.components, l),
            length: l,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Distance {
    pub value: f64,
    /// Set when the points are outside the uniqueness regime and `value` is
    /// only an upper bound from a chart path.
    pub upper_bound_only: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldKind {
    EuclideanPlane,
    RoundSphere { radius: f64 },
    FlatTorus { lattice: [[f64; 2]; 2] },
    SurfaceOfRevolution { profile: Profile },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum WorkingRegion {
    /// Disk about the chart origin.
    Disk {
        radius: f64,
    },
    /// Band of profile parameters on a surface of revolution.
    Band {
        u_min: f64,
        u_max: f64,
    },
    Whole,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub ivp_max_step: f64,
    pub ivp_tol: f64,
    pub ivp_max_doublings: u32,
    pub newton_max_iterations: usize,
    pub newton_tol: f64,
    /// Number of samples stored on a [`GeodesicSegment`].
    pub segment_samples: usize,
    /// Parameter spacing of the covariant-acceleration finite differences.
    pub deviation_step: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            ivp_max_step: 0.02,
            ivp_tol: 1e-11,
            ivp_max_doublings: 8,
            newton_max_iterations: 50,
            newton_tol: 1e-10,
            segment_samples: 9,
            deviation_step: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifold {
    pub id: String,
    pub kind: ManifoldKind,
    /// Lower bound on the injectivity radius over the working region.
    pub injectivity_floor: f64,
    /// Lower bound on the convexity radius over the working region.
    pub convexity_floor: f64,
    pub working_region: WorkingRegion,
    pub solver: SolverSettings,
    /// Cached working diameter of a surface of revolution's band.
    #[serde(skip)]
    band_diameter: f64,
}

#[derive(Deserialize)]
struct ManifoldDescriptor {
    #[serde(default)]
    id: Option<String>,
    #[serde(flatten)]
    kind: ManifoldKind,
    #[serde(default)]
    u_range: Option<[f64; 2]>,
    #[serde(default)]
    working_radius: Option<f64>,
    #[serde(default)]
    injectivity_floor: Option<f64>,
    #[serde(default)]
    convexity_floor: Option<f64>,
}

fn scale2(a: Vec2, s: f64) -> Vec2 {
    [a[0] * s, a[1] * s]
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

impl Manifold {
    pub fn plane() -> Self {
        Manifold {
            id: "plane".into(),
            kind: ManifoldKind::EuclideanPlane,
            injectivity_floor: 1e3,
            convexity_floor: 1e3,
            working_region: WorkingRegion::Disk { radius: 100.0 },
            solver: SolverSettings::default(),
            band_diameter: 0.0,
        }
    }

    pub fn sphere(radius: f64) -> Self {
        Manifold {
            id: if radius == 1.0 {
                "unit_sphere".into()
            } else {
                format!("sphere_r{radius}")
            },
            kind: ManifoldKind::RoundSphere { radius },
            injectivity_floor: PI * radius,
            convexity_floor: 0.5 * PI * radius,
            working_region: WorkingRegion::Whole,
            solver: SolverSettings::default(),
            band_diameter: 0.0,
        }
    }

    pub fn torus(lattice: [[f64; 2]; 2]) -> Self {
        let l = Lattice { basis: lattice };
        let sys = l.systole();
        Manifold {
            id: if lattice == [[1.0, 0.0], [0.0, 1.0]] {
                "unit_torus".into()
            } else {
                "flat_torus".into()
            },
            kind: ManifoldKind::FlatTorus { lattice },
            injectivity_floor: 0.5 * sys,
            convexity_floor: 0.25 * sys,
            working_region: WorkingRegion::Whole,
            solver: SolverSettings::default(),
            band_diameter: 0.0,
        }
    }

    pub fn unit_torus() -> Self {
        Manifold::torus([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Surface of revolution over the profile's default band.
    pub fn revolution(profile: Profile) -> Self {
        let (lo, hi) = profile.default_band();
        Manifold::revolution_on(profile, lo, hi)
    }

    /// Surface of revolution restricted to `u ∈ [u_min, u_max]`.
    ///
    /// The injectivity floor is estimated as `0.9·π·ρ_min` (half the shortest
    /// parallel, with margin), capped by the conjugate-point bound `π/√K_max`.
    pub fn revolution_on(profile: Profile, u_min: f64, u_max: f64) -> Self {
        let samples = 400;
        let mut rho_min = f64::INFINITY;
        let mut k_max: f64 = 0.0;
        for i in 0..=samples {
            let u = u_min + (u_max - u_min) * i as f64 / samples as f64;
            let (r, d, dd) = profile.radius(u);
            rho_min = rho_min.min(r);
            let k = -dd / (r * (1.0 + d * d).powi(2));
            k_max = k_max.max(k);
        }
        let mut inj = 0.9 * PI * rho_min;
        if k_max > 0.0 {
            inj = inj.min(PI / k_max.sqrt());
        }
        Manifold {
            id: profile.name().into(),
            kind: ManifoldKind::SurfaceOfRevolution { profile },
            injectivity_floor: inj,
            convexity_floor: 0.5 * inj,
            working_region: WorkingRegion::Band { u_min, u_max },
            solver: SolverSettings::default(),
            band_diameter: {
                let rmax = (0..=100)
                    .map(|i| profile.radius(u_min + (u_max - u_min) * i as f64 / 100.0).0)
                    .fold(0.0, f64::max);
                profile.meridian_length(u_min, u_max) + PI * rmax
            },
        }
    }

    /// Registry lookup by string id.
    pub fn from_id(id: &str) -> Result<Self> {
        Ok(match id {
            "plane" | "euclidean_plane" => Manifold::plane(),
            "sphere" | "unit_sphere" | "round_sphere" => Manifold::sphere(1.0),
            "torus" | "unit_torus" | "flat_torus" => Manifold::unit_torus(),
            "hyperbola" => Manifold::revolution(Profile::Hyperbola),
            "sech_bulge" => Manifold::revolution(Profile::SechBulge),
            "paraboloid" => Manifold::revolution(Profile::Paraboloid),
            "catenoid" => Manifold::revolution(Profile::Catenoid),
            other => {
                return Err(Error::invalid(
                    "manifold",
                    format!("unknown manifold id `{other}`"),
                ))
            }
        })
    }

    /// Parses either a registry id string or a parameter block such as
    /// `{"kind":"surface_of_revolution","profile":"sech_bulge"}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(id) = v.as_str() {
            return Manifold::from_id(id);
        }
        let desc: ManifoldDescriptor = serde_json::from_value(v.clone())
            .map_err(|e| Error::invalid("manifold", e.to_string()))?;
        let mut m = match desc.kind {
            ManifoldKind::EuclideanPlane => Manifold::plane(),
            ManifoldKind::RoundSphere { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::invalid("manifold.radius", "must be positive"));
                }
                Manifold::sphere(radius)
            }
            ManifoldKind::FlatTorus { lattice } => {
                if !(Lattice { basis: lattice }).is_valid() {
                    return Err(Error::invalid("manifold.lattice", "degenerate lattice"));
                }
                Manifold::torus(lattice)
            }
            ManifoldKind::SurfaceOfRevolution { profile } => match desc.u_range {
                Some([lo, hi]) => {
                    let (dlo, dhi) = profile.domain();
                    if !(lo < hi && lo > dlo && hi < dhi) {
                        return Err(Error::invalid(
                            "manifold.u_range",
                            "must be an increasing pair inside the profile domain",
                        ));
                    }
                    Manifold::revolution_on(profile, lo, hi)
                }
                None => Manifold::revolution(profile),
            },
        };
        if let Some(r) = desc.working_radius {
            if !matches!(m.kind, ManifoldKind::EuclideanPlane) || r <= 0.0 {
                return Err(Error::invalid(
                    "manifold.working_radius",
                    "only for the plane, positive",
                ));
            }
            m.working_region = WorkingRegion::Disk { radius: r };
        }
        if let Some(i) = desc.injectivity_floor {
            if i <= 0.0 {
                return Err(Error::invalid(
                    "manifold.injectivity_floor",
                    "must be positive",
                ));
            }
            m.injectivity_floor = i;
        }
        if let Some(c) = desc.convexity_floor {
            if c <= 0.0 {
                return Err(Error::invalid(
                    "manifold.convexity_floor",
                    "must be positive",
                ));
            }
            m.convexity_floor = c;
        }
        if let Some(id) = desc.id {
            m.id = id;
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self.kind).expect("kind serializes");
        let obj = v.as_object_mut().expect("tagged enum is an object");
        obj.insert("id".into(), json!(self.id));
        obj.insert("injectivity_floor".into(), json!(self.injectivity_floor));
        obj.insert("convexity_floor".into(), json!(self.convexity_floor));
        match self.working_region {
            WorkingRegion::Band { u_min, u_max } => {
                obj.insert("u_range".into(), json!([u_min, u_max]));
            }
            WorkingRegion::Disk { radius } => {
                obj.insert("working_radius".into(), json!(radius));
            }
            WorkingRegion::Whole => {}
        }
        v
    }

    pub fn dimension(&self) -> usize {
        2
    }

    /// Diameter of the working region (used to scale degeneracy thresholds).
    pub fn working_diameter(&self) -> f64 {
        match (self.kind, self.working_region) {
            (ManifoldKind::RoundSphere { radius }, _) => PI * radius,
            (ManifoldKind::FlatTorus { lattice }, _) => {
                let [a, b] = lattice;
                (a[0] * a[0] + a[1] * a[1]).sqrt() + (b[0] * b[0] + b[1] * b[1]).sqrt()
            }
            (ManifoldKind::SurfaceOfRevolution { .. }, WorkingRegion::Band { .. }) => {
                self.band_diameter
            }
            (_, WorkingRegion::Disk { radius }) => 2.0 * radius,
            _ => 1.0,
        }
    }

    /// Length below which a segment counts as constant.
    pub fn segment_epsilon(&self) -> f64 {
        1e-9 * self.working_diameter()
    }

    fn ivp(&self) -> IvpSettings {
        IvpSettings {
            max_step: self.solver.ivp_max_step,
            tol: self.solver.ivp_tol,
            max_doublings: self.solver.ivp_max_doublings,
        }
    }

    fn bvp(&self) -> BvpSettings {
        BvpSettings {
            max_iterations: self.solver.newton_max_iterations,
            tol: self.solver.newton_tol,
        }
    }

    fn revolution_chart(&self) -> Option<RevolutionChart> {
        match (self.kind, self.working_region) {
            (
                ManifoldKind::SurfaceOfRevolution { profile },
                WorkingRegion::Band { u_min, u_max },
            ) => Some(RevolutionChart {
                profile,
                band: (u_min, u_max),
            }),
            _ => None,
        }
    }

    /// Validated, canonical point from chart-0 coordinates.
    pub fn point(&self, coords: [f64; 2]) -> Result<Point> {
        self.check_point(&Point::new(coords))?;
        Ok(self.canonical(&Point::new(coords)))
    }

    /// Validated, canonical point in an explicit chart.
    pub fn point_in_chart(&self, coords: [f64; 2], chart: u8) -> Result<Point> {
        let p = Point { coords, chart };
        self.check_point(&p)?;
        Ok(self.canonical(&p))
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if !p.coords.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite coordinates {:?}",
                p.coords
            )));
        }
        let charts = if matches!(self.kind, ManifoldKind::RoundSphere { .. }) {
            2
        } else {
            1
        };
        if p.chart >= charts {
            return Err(Error::Domain(format!("chart {} does not exist", p.chart)));
        }
        match (self.kind, self.working_region) {
            (ManifoldKind::RoundSphere { .. }, _) => {
                if !(0.0..=PI).contains(&p.coords[0]) {
                    return Err(Error::Domain(format!(
                        "colatitude {} outside [0, π]",
                        p.coords[0]
                    )));
                }
            }
            (_, WorkingRegion::Disk { radius }) => {
                let r = p.coords[0].hypot(p.coords[1]);
                if r > radius {
                    return Err(Error::Domain(format!(
                        "point at radius {r} outside working disk {radius}"
                    )));
                }
            }
            (_, WorkingRegion::Band { u_min, u_max }) => {
                if !(u_min..=u_max).contains(&p.coords[0]) {
                    return Err(Error::Domain(format!(
                        "profile parameter {} outside working band [{u_min}, {u_max}]",
                        p.coords[0]
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn canonical(&self, p: &Point) -> Point {
        match self.kind {
            ManifoldKind::EuclideanPlane => *p,
            ManifoldKind::RoundSphere { radius } => sphere::canonical(radius, p),
            ManifoldKind::FlatTorus { lattice } => {
                Point::new(Lattice { basis: lattice }.reduce(p.coords))
            }
            ManifoldKind::SurfaceOfRevolution { .. } => {
                Point::new([p.coords[0], p.coords[1].rem_euclid(TAU) % TAU])
            }
        }
    }

    /// Canonical base point together with `v` re-expressed there.
    pub fn canonical_vector(&self, v: &TangentVector) -> TangentVector {
        match self.kind {
            ManifoldKind::RoundSphere { radius } => {
                let (b, c) = sphere::canonical_tangent(radius, &v.base, v.components);
                TangentVector::new(b, c)
            }
            _ => TangentVector::new(self.canonical(&v.base), v.components),
        }
    }

    /// Metric tensor `g(p)` in the chart of `p`.
    pub fn metric_at(&self, p: &Point) -> Result<[[f64; 2]; 2]> {
        self.check_point(p)?;
        let g = self.metric_unchecked(p);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if !(g[0][0] > 0.0 && det > 1e-14 * g[0][0] * g[0][0]) {
            return Err(Error::Domain(format!(
                "chart {} is singular at {:?}",
                p.chart, p.coords
            )));
        }
        Ok(g)
    }

    fn metric_unchecked(&self, p: &Point) -> [[f64; 2]; 2] {
        match self.kind {
            ManifoldKind::EuclideanPlane | ManifoldKind::FlatTorus { .. } => {
                [[1.0, 0.0], [0.0, 1.0]]
            }
            ManifoldKind::RoundSphere { radius } => {
                let s = p.coords[0].sin();
                [[radius * radius, 0.0], [0.0, radius * radius * s * s]]
            }
            ManifoldKind::SurfaceOfRevolution { profile } => {
                let (r, d, _) = profile.radius(p.coords[0]);
                [[1.0 + d * d, 0.0], [0.0, r * r]]
            }
        }
    }

    #[inline]
    pub fn inner(&self, p: &Point, a: [f64; 2], b: [f64; 2]) -> f64 {
        chart::quad(&self.metric_unchecked(p), a, b)
    }

    #[inline]
    pub fn norm(&self, p: &Point, v: [f64; 2]) -> f64 {
        self.inner(p, v, v).max(0.0).sqrt()
    }

    /// `exp_p(t v)` together with the velocity there. `v` is expressed at `p`.
    pub fn exp(&self, p: &Point, v: [f64; 2], t: f64) -> Result<(Point, [f64; 2])> {
        match self.kind {
            ManifoldKind::EuclideanPlane => {
                let q = Point::new([p.coords[0] + t * v[0], p.coords[1] + t * v[1]]);
                if let WorkingRegion::Disk { radius } = self.working_region {
                    if q.coords[0].hypot(q.coords[1]) > radius {
                        return Err(Error::LeftWorkingRegion { at: q, param: t });
                    }
                }
                Ok((q, v))
            }
            ManifoldKind::FlatTorus { lattice } => {
                let l = Lattice { basis: lattice };
                Ok((
                    Point::new(l.reduce([p.coords[0] + t * v[0], p.coords[1] + t * v[1]])),
                    v,
                ))
            }
            ManifoldKind::RoundSphere { radius } => Ok(sphere::exp(radius, p, v, t)),
            ManifoldKind::SurfaceOfRevolution { .. } => {
                let c = self.revolution_chart().expect("band region");
                let end = chart::integrate(&c, p.coords, v, None, t, &self.ivp())?;
                Ok((self.canonical(&Point::new(end.x)), end.v))
            }
        }
    }

    /// Cheap chart-based length estimate, exact on the flat and round models.
    fn length_estimate(&self, p: &Point, q: &Point) -> f64 {
        match self.kind {
            ManifoldKind::EuclideanPlane => {
                (q.coords[0] - p.coords[0]).hypot(q.coords[1] - p.coords[1])
            }
            ManifoldKind::FlatTorus { lattice } => {
                let d = Lattice { basis: lattice }
                    .shortest([q.coords[0] - p.coords[0], q.coords[1] - p.coords[1]]);
                d[0].hypot(d[1])
            }
            ManifoldKind::RoundSphere { radius } => sphere::distance(radius, p, q),
            ManifoldKind::SurfaceOfRevolution { .. } => {
                let d = self.chart_delta(p, q);
                let mid = Point::new([0.5 * (p.coords[0] + q.coords[0]), p.coords[1]]);
                self.norm(&mid, d)
            }
        }
    }

    /// Whether two canonical points agree up to the degeneracy threshold.
    pub fn coincident(&self, p: &Point, q: &Point) -> bool {
        p == q || self.length_estimate(p, q) <= self.segment_epsilon()
    }

    /// Chart displacement from `p` to the representative of `q` nearest to it.
    pub fn chart_delta(&self, p: &Point, q: &Point) -> [f64; 2] {
        match self.kind {
            ManifoldKind::FlatTorus { lattice } => Lattice { basis: lattice }
                .shortest([q.coords[0] - p.coords[0], q.coords[1] - p.coords[1]]),
            ManifoldKind::SurfaceOfRevolution { .. } => [
                q.coords[0] - p.coords[0],
                wrap_angle(q.coords[1] - p.coords[1]),
            ],
            _ => [q.coords[0] - p.coords[0], q.coords[1] - p.coords[1]],
        }
    }

    /// Minimizing geodesic from `p` to `q`, both canonical, in the uniqueness
    /// regime `d(p, q) < injectivity_floor / 2`.
    pub fn connect(&self, p: &Point, q: &Point) -> Result<Connection> {
        let bound = 0.5 * self.injectivity_floor;
        let est = self.length_estimate(p, q);
        if est >= bound * 1.5 {
            return Err(Error::OutsideUniqueness {
                distance: est,
                bound,
            });
        }
        let (velocity, terminal, length) = match self.kind {
            ManifoldKind::EuclideanPlane | ManifoldKind::FlatTorus { .. } => {
                let d = self.chart_delta(p, q);
                (d, d, d[0].hypot(d[1]))
            }
            ManifoldKind::RoundSphere { radius } => {
                sphere::log(radius, p, q).ok_or(Error::OutsideUniqueness {
                    distance: est,
                    bound,
                })?
            }
            ManifoldKind::SurfaceOfRevolution { .. } => {
                let c = self.revolution_chart().expect("band region");
                let d = self.chart_delta(p, q);
                let target = [p.coords[0] + d[0], p.coords[1] + d[1]];
                let (v, end) = chart::shoot(&c, p.coords, target, &self.ivp(), &self.bvp())?;
                let len = self.norm(p, v);
                (v, end.v, len)
            }
        };
        if length >= bound {
            return Err(Error::OutsideUniqueness {
                distance: length,
                bound,
            });
        }
        Ok(Connection {
            start: *p,
            end: *q,
            velocity,
            terminal,
            length,
        })
    }

    /// Parallel transport of `w` (at `conn.start`) to `conn.end`.
    pub fn transport(&self, conn: &Connection, w: [f64; 2]) -> Result<[f64; 2]> {
        match self.kind {
            ManifoldKind::EuclideanPlane | ManifoldKind::FlatTorus { .. } => Ok(w),
            ManifoldKind::RoundSphere { radius } => Ok(sphere::transport(
                radius,
                &conn.start,
                conn.velocity,
                w,
                &conn.end,
            )),
            ManifoldKind::SurfaceOfRevolution { .. } => {
                let c = self.revolution_chart().expect("band region");
                let end = chart::integrate(
                    &c,
                    conn.start.coords,
                    conn.velocity,
                    Some(w),
                    1.0,
                    &self.ivp(),
                )?;
                Ok(end.w)
            }
        }
    }

    /// Point at parameter `s ∈ [0, 1]` along a connection.
    pub fn along(&self, conn: &Connection, s: f64) -> Result<Point> {
        if s <= 0.0 {
            return Ok(conn.start);
        }
        if s >= 1.0 {
            return Ok(conn.end);
        }
        self.exp(&conn.start, conn.velocity, s).map(|(q, _)| q)
    }

    /// Maximum covariant acceleration (for the unit-speed parametrization)
    /// over interior samples of a connection.
    pub fn geodesic_deviation(&self, conn: &Connection) -> Result<f64> {
        let len = conn.length;
        if len <= self.segment_epsilon() {
            return Ok(0.0);
        }
        let h = self.solver.deviation_step;
        let m = 4;
        let mut worst: f64 = 0.0;
        match self.kind {
            // straight lines in the chart by construction
            ManifoldKind::EuclideanPlane | ManifoldKind::FlatTorus { .. } => {}
            ManifoldKind::RoundSphere { radius } => {
                for k in 1..m {
                    let s = k as f64 / m as f64;
                    let a = self.along(conn, s - h)?;
                    let b = self.along(conn, s)?;
                    let c = self.along(conn, s + h)?;
                    let acc = sphere::covariant_acceleration(radius, &a, &b, &c, h);
                    worst = worst.max(acc / (len * len));
                }
            }
            ManifoldKind::SurfaceOfRevolution { .. } => {
                let chart = self.revolution_chart().expect("band region");
                for k in 1..m {
                    let s = k as f64 / m as f64;
                    let a = self.along(conn, s - h)?;
                    let b = self.along(conn, s)?;
                    let c = self.along(conn, s + h)?;
                    let da = self.chart_delta(&b, &a);
                    let dc = self.chart_delta(&b, &c);
                    let prev = [b.coords[0] + da[0], b.coords[1] + da[1]];
                    let next = [b.coords[0] + dc[0], b.coords[1] + dc[1]];
                    let acc = chart::covariant_acceleration(&chart, prev, b.coords, next, h);
                    worst = worst.max(acc / (len * len));
                }
            }
        }
        Ok(worst)
    }

    /// The geodesic with `γ(0) = p`, `γ'(0) = v`, evaluated at `t`, together
    /// with its velocity there.
    pub fn geodesic_shoot(
        &self,
        p: &Point,
        v: &TangentVector,
        t: f64,
    ) -> Result<(Point, TangentVector)> {
        self.check_point(p)?;
        self.check_point(&v.base)?;
        let cp = self.canonical(p);
        let cv = self.canonical_vector(v);
        if self.length_estimate(&cp, &cv.base) > 1e-12 * self.working_diameter().max(1.0) {
            return Err(Error::Domain(
                "tangent vector is not based at the shooting point".into(),
            ));
        }
        let (q, vq) = self.exp(&cv.base, cv.components, t)?;
        Ok((q, TangentVector::new(q, vq)))
    }

    /// Minimizing geodesic between `p` and `q` (requires `d(p, q) < i₁/2`).
    pub fn minimizing_geodesic(&self, p: &Point, q: &Point) -> Result<GeodesicSegment> {
        self.check_point(p)?;
        self.check_point(q)?;
        let p = self.canonical(p);
        let q = self.canonical(q);
        let conn = self.connect(&p, &q)?;
        self.segment_from(&conn)
    }

    pub(crate) fn segment_from(&self, conn: &Connection) -> Result<GeodesicSegment> {
        let n = self.solver.segment_samples.max(2);
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            samples.push(self.along(conn, k as f64 / (n - 1) as f64)?);
        }
        let (u0, u1) = if conn.length > 0.0 {
            (
                scale2(conn.velocity, 1.0 / conn.length),
                scale2(conn.terminal, 1.0 / conn.length),
            )
        } else {
            ([0.0; 2], [0.0; 2])
        };
        Ok(GeodesicSegment {
            start: conn.start,
            end: conn.end,
            initial_velocity: TangentVector::new(conn.start, u0),
            terminal_velocity: TangentVector::new(conn.end, u1),
            length: conn.length,
            samples,
        })
    }

    /// Parallel transport of `v` along a geodesic segment starting at `v.base`.
    pub fn parallel_transport(
        &self,
        v: &TangentVector,
        along: &GeodesicSegment,
    ) -> Result<TangentVector> {
        let cv = self.canonical_vector(v);
        if self.length_estimate(&cv.base, &along.start) > 1e-9 * self.working_diameter().max(1.0) {
            return Err(Error::Domain(
                "vector is not based at the segment start".into(),
            ));
        }
        let w = self.transport(&along.connection(), cv.components)?;
        Ok(TangentVector::new(along.end, w))
    }

    /// Riemannian distance. Exact in the uniqueness regime; otherwise an upper
    /// bound along a chart path, flagged.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<Distance> {
        self.check_point(p)?;
        self.check_point(q)?;
        let p = self.canonical(p);
        let q = self.canonical(q);
        match self.kind {
            ManifoldKind::EuclideanPlane
            | ManifoldKind::FlatTorus { .. }
            | ManifoldKind::RoundSphere { .. } => Ok(Distance {
                value: self.length_estimate(&p, &q),
                upper_bound_only: false,
            }),
            ManifoldKind::SurfaceOfRevolution { profile } => {
                if p == q {
                    return Ok(Distance {
                        value: 0.0,
                        upper_bound_only: false,
                    });
                }
                match self.connect(&p, &q) {
                    Ok(c) => Ok(Distance {
                        value: c.length,
                        upper_bound_only: false,
                    }),
                    Err(Error::OutsideUniqueness { .. }) => {
                        // meridian to the thinner parallel, around, and back
                        let d = self.chart_delta(&p, &q);
                        let (u_lo, u_hi) = if p.coords[0] < q.coords[0] {
                            (p.coords[0], q.coords[0])
                        } else {
                            (q.coords[0], p.coords[0])
                        };
                        let r = profile.radius(u_lo).0.min(profile.radius(u_hi).0);
                        Ok(Distance {
                            value: profile.meridian_length(u_lo, u_hi) + r * d[1].abs(),
                            upper_bound_only: true,
                        })
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }

    /// Position in the ambient space used for figures.
    pub fn embed(&self, p: &Point) -> [f64; 3] {
        match self.kind {
            ManifoldKind::EuclideanPlane | ManifoldKind::FlatTorus { .. } => {
                [p.coords[0], p.coords[1], 0.0]
            }
            ManifoldKind::RoundSphere { radius } => sphere::embed(radius, p),
            ManifoldKind::SurfaceOfRevolution { profile } => {
                let r = profile.radius(p.coords[0]).0;
                let (s, c) = p.coords[1].sin_cos();
                [r * c, r * s, p.coords[0]]
            }
        }
    }

    /// Coordinate used to describe separating hypersurfaces: the profile
    /// parameter on surfaces of revolution, the radius on the plane.
    pub fn level(&self, p: &Point) -> Option<f64> {
        match self.kind {
            ManifoldKind::SurfaceOfRevolution { .. } => Some(p.coords[0]),
            ManifoldKind::EuclideanPlane => Some(p.coords[0].hypot(p.coords[1])),
            _ => None,
        }
    }

    /// Distance between two level sets, measured along a meridian or ray.
    pub fn level_gap(&self, a: f64, b: f64) -> Option<f64> {
        match self.kind {
            ManifoldKind::SurfaceOfRevolution { profile } => Some(profile.meridian_length(a, b)),
            ManifoldKind::EuclideanPlane => Some((a - b).abs()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests;
