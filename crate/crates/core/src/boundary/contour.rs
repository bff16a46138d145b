//! Zero-level contours of a decision function by marching squares.
//!
//! The sampling grid is padded with one ring of negative samples so every
//! contour closes. Segments are emitted with the covered side (`f >= 0`) on
//! the left, which makes outer rings counter-clockwise and holes clockwise.
//! Saddle cells are split according to the sign of `f` at the cell centre.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::{point_in_polygon, BBox, PlanarPoint, Polygon};

pub const MIN_RESOLUTION: usize = 16;
pub const DEFAULT_RESOLUTION: usize = 256;

/// Sample value assigned to the padding ring. Decision values of a
/// normalised RBF expansion never go below -1.
const PAD_VALUE: f64 = -1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("contour resolution must be at least {MIN_RESOLUTION}, got {0}")]
    Resolution(usize),
    #[error("bounding box has zero or negative extent")]
    EmptyBox,
}

/// Contour rings in the working frame.
#[derive(Debug, Clone, Default)]
pub struct Contours {
    pub rings: Vec<Polygon>,
    /// Set when the field has one sign over the whole grid.
    pub diagnostic: Option<String>,
}

impl Contours {
    pub fn outer_rings(&self) -> impl Iterator<Item = &Polygon> {
        self.rings.iter().filter(|r| r.is_ccw())
    }

    pub fn holes(&self) -> impl Iterator<Item = &Polygon> {
        self.rings.iter().filter(|r| !r.is_ccw())
    }

    /// Groups rings into (outer, holes) polygons. Each hole goes to the
    /// smallest outer ring that contains it.
    pub fn polygons(&self) -> Vec<(Polygon, Vec<Polygon>)> {
        let mut outers: Vec<(Polygon, Vec<Polygon>)> =
            self.outer_rings().map(|r| (r.clone(), Vec::new())).collect();
        for hole in self.holes() {
            let probe = hole.vertices()[0];
            let owner = outers
                .iter()
                .enumerate()
                .filter(|(_, (o, _))| point_in_polygon(probe, o))
                .min_by(|a, b| a.1 .0.signed_area().total_cmp(&b.1 .0.signed_area()))
                .map(|(i, _)| i);
            if let Some(i) = owner {
                outers[i].1.push(hole.clone());
            }
        }
        outers
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    /// Between padded nodes (i, j) and (i + 1, j).
    H(usize, usize),
    /// Between padded nodes (i, j) and (i, j + 1).
    V(usize, usize),
}

struct Grid {
    /// Padded node count per axis.
    size: usize,
    values: Vec<f64>,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
}

impl Grid {
    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.size + i]
    }

    fn node(&self, i: usize, j: usize) -> PlanarPoint {
        PlanarPoint::new(self.x0 + i as f64 * self.dx, self.y0 + j as f64 * self.dy)
    }

    fn crossing(&self, key: EdgeKey) -> PlanarPoint {
        let ((ia, ja), (ib, jb)) = match key {
            EdgeKey::H(i, j) => ((i, j), (i + 1, j)),
            EdgeKey::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (va, vb) = (self.value(ia, ja), self.value(ib, jb));
        let t = va / (va - vb);
        let (pa, pb) = (self.node(ia, ja), self.node(ib, jb));
        PlanarPoint::new(pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y))
    }
}

/// Extracts the `f = 0` contour of `field` over `bbox` with `resolution`
/// cells per axis.
pub fn extract_contour<F>(field: F, bbox: BBox, resolution: usize) -> Result<Contours, ContourError>
where
    F: Fn(PlanarPoint) -> f64,
{
    if resolution < MIN_RESOLUTION {
        return Err(ContourError::Resolution(resolution));
    }
    if !(bbox.width() > 0.0 && bbox.height() > 0.0) {
        return Err(ContourError::EmptyBox);
    }
    let dx = bbox.width() / resolution as f64;
    let dy = bbox.height() / resolution as f64;
    let size = resolution + 3;
    let mut grid = Grid {
        size,
        values: vec![PAD_VALUE; size * size],
        x0: bbox.min_x - dx,
        y0: bbox.min_y - dy,
        dx,
        dy,
    };
    let (mut any_in, mut any_out) = (false, false);
    for j in 1..size - 1 {
        for i in 1..size - 1 {
            let v = field(grid.node(i, j));
            // NaN is treated as outside
            let v = if v.is_nan() { PAD_VALUE } else { v };
            any_in |= v >= 0.0;
            any_out |= v < 0.0;
            grid.values[j * size + i] = v;
        }
    }
    if !any_in || !any_out {
        let diagnostic = if any_in {
            "decision function is non-negative over the whole grid"
        } else {
            "decision function is negative over the whole grid"
        };
        return Ok(Contours {
            rings: Vec::new(),
            diagnostic: Some(diagnostic.to_string()),
        });
    }

    let mut next: BTreeMap<EdgeKey, EdgeKey> = BTreeMap::new();
    for j in 0..size - 1 {
        for i in 0..size - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let inside = corners.map(|(a, b)| grid.value(a, b) >= 0.0);
            if inside.iter().all(|&b| b) || inside.iter().all(|&b| !b) {
                continue;
            }
            // counter-clockwise edge walk: bottom, right, top, left
            let edges = [
                EdgeKey::H(i, j),
                EdgeKey::V(i + 1, j),
                EdgeKey::H(i, j + 1),
                EdgeKey::V(i, j),
            ];
            // (edge, leaving the covered region?)
            let mut crossings: Vec<(EdgeKey, bool)> = Vec::with_capacity(4);
            for k in 0..4 {
                let (a, b) = (inside[k], inside[(k + 1) % 4]);
                if a != b {
                    crossings.push((edges[k], a));
                }
            }
            let m = crossings.len();
            let joined = if m == 4 {
                let c = grid.node(i, j);
                field(PlanarPoint::new(c.x + 0.5 * dx, c.y + 0.5 * dy)) >= 0.0
            } else {
                true
            };
            for k in 0..m {
                let (edge, exits) = crossings[k];
                if !exits {
                    continue;
                }
                let partner = if joined { (k + 1) % m } else { (k + m - 1) % m };
                next.insert(edge, crossings[partner].0);
            }
        }
    }

    let mut rings = Vec::new();
    while let Some((&start, _)) = next.iter().next() {
        let mut ring = Vec::new();
        let mut key = start;
        while let Some(to) = next.remove(&key) {
            ring.push(grid.crossing(key));
            key = to;
        }
        if let Ok(poly) = Polygon::new(ring) {
            rings.push(poly);
        }
    }
    Ok(Contours {
        rings,
        diagnostic: None,
    })
}
