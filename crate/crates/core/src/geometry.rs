//! Planar primitives, convex hulls and polygon membership.
//!
//! Coordinates are either raw lon/lat degrees or meters in a local
//! equirectangular projection; see [`CoordinateMode`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cross products below this magnitude are treated as collinear.
pub const COLLINEAR_EPS: f64 = 1e-12;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate hull: {count} distinct points, all collinear or too few")]
    DegenerateHull { count: usize },
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("non-finite coordinate")]
    NonFinite,
}

/// A point in the working frame: x is longitude (or easting), y latitude (or northing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for PlanarPoint {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<PlanarPoint> for [f64; 2] {
    fn from(p: PlanarPoint) -> Self {
        [p.x, p.y]
    }
}

pub fn squared_distance(a: PlanarPoint, b: PlanarPoint) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

/// z-component of (a - o) x (b - o). Positive when o->a->b turns left.
pub fn cross(o: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Working coordinate frame of a trained boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateMode {
    /// Raw lon/lat degrees.
    #[default]
    Degrees,
    /// Meters in an equirectangular projection centred on `origin`.
    Projected { origin_lon: f64, origin_lat: f64 },
}

impl CoordinateMode {
    /// Local projection centred on the centroid of `points` (lon/lat).
    pub fn projected_around(points: &[PlanarPoint]) -> Self {
        let n = points.len().max(1) as f64;
        let (sx, sy) = points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        CoordinateMode::Projected {
            origin_lon: sx / n,
            origin_lat: sy / n,
        }
    }

    /// Maps a lon/lat point into this frame.
    pub fn to_working(&self, lonlat: PlanarPoint) -> PlanarPoint {
        match *self {
            CoordinateMode::Degrees => lonlat,
            CoordinateMode::Projected {
                origin_lon,
                origin_lat,
            } => {
                let k = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
                PlanarPoint::new(
                    (lonlat.x - origin_lon) * k * origin_lat.to_radians().cos(),
                    (lonlat.y - origin_lat) * k,
                )
            }
        }
    }

    /// Inverse of [`to_working`](Self::to_working).
    pub fn to_lonlat(&self, p: PlanarPoint) -> PlanarPoint {
        match *self {
            CoordinateMode::Degrees => p,
            CoordinateMode::Projected {
                origin_lon,
                origin_lat,
            } => {
                let k = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
                PlanarPoint::new(
                    p.x / (k * origin_lat.to_radians().cos()) + origin_lon,
                    p.y / k + origin_lat,
                )
            }
        }
    }
}

/// Closed ring of vertices; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<PlanarPoint>,
}

impl Polygon {
    pub fn new(vertices: Vec<PlanarPoint>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut ring: Vec<PlanarPoint> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if ring.last() != Some(&v) {
                ring.push(v);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(GeometryError::TooFewVertices(ring.len()));
        }
        Ok(Self { vertices: ring })
    }

    pub fn vertices(&self) -> &[PlanarPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area; positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc += a.x * b.y - b.x * a.y;
        }
        0.5 * acc
    }

    pub fn is_ccw(&self) -> bool {
        self.signed_area() > 0.0
    }

    pub fn bbox(&self) -> BBox {
        BBox::around(&self.vertices).expect("polygon has vertices")
    }

    pub fn contains(&self, p: PlanarPoint) -> bool {
        point_in_polygon(p, self)
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn around(points: &[PlanarPoint]) -> Option<Self> {
        let first = points.first()?;
        let mut b = BBox::new(first.x, first.y, first.x, first.y);
        for p in &points[1..] {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    /// Grows each side by `fraction` of the corresponding extent.
    pub fn expanded(&self, fraction: f64) -> Self {
        let dx = self.width() * fraction;
        let dy = self.height() * fraction;
        BBox::new(
            self.min_x - dx,
            self.min_y - dy,
            self.max_x + dx,
            self.max_y + dy,
        )
    }

    pub fn contains(&self, p: PlanarPoint) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox::new(
            self.min_x.min(other.min_x),
            self.min_y.min(other.min_y),
            self.max_x.max(other.max_x),
            self.max_y.max(other.max_y),
        )
    }
}

/// Strict convex hull by Andrew's monotone chain.
///
/// The ring is counter-clockwise and starts at the lexicographically
/// smallest input point. Collinear boundary points are dropped.
pub fn convex_hull(points: &[PlanarPoint]) -> Result<Polygon, GeometryError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let mut pts: Vec<PlanarPoint> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    let n = pts.len();
    if n < 3 {
        return Err(GeometryError::DegenerateHull { count: n });
    }

    let mut hull: Vec<PlanarPoint> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= COLLINEAR_EPS
        {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= COLLINEAR_EPS
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        return Err(GeometryError::DegenerateHull { count: n });
    }
    Polygon::new(hull)
}

fn on_segment(p: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> bool {
    if cross(a, b, p).abs() > COLLINEAR_EPS {
        return false;
    }
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Boundary-inclusive membership by ray casting. Works for any simple ring.
pub fn point_in_polygon(p: PlanarPoint, poly: &Polygon) -> bool {
    let v = poly.vertices();
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if on_segment(p, a, b) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_at {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Even-odd membership across several rings (outer rings plus holes).
pub fn point_in_rings(p: PlanarPoint, rings: &[Polygon]) -> bool {
    rings.iter().filter(|r| point_in_polygon(p, r)).count() % 2 == 1
}
