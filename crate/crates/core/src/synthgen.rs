//! Seeded synthetic measurement datasets with known coverage geometry.
//!
//! Every shape defines a normalised radial depth `s` in `[0, 1]` over its
//! covered region; bands are assigned by cutting `s`, strongest nearest the
//! core. Band regions are therefore nested: the region of band `b` or
//! stronger shrinks as `b` grows.

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{squared_distance, PlanarPoint};
use crate::measurements::{Dataset, MeasurementRecord, Provenance, SignalBand};

pub const DEFAULT_GPS_NOISE_SIGMA: f64 = 1e-4;
pub const DEFAULT_BAND_CUTS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Exterior no-service ring spans `[extent, EXTERIOR_RING * extent]`.
const EXTERIOR_RING: f64 = 1.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk { radius: f64 },
    Annulus { r_in: f64, r_out: f64 },
    /// Disk of `radius` with a bite of `bite_radius` centred `offset` east.
    Crescent { radius: f64, bite_radius: f64, offset: f64 },
    /// `k` disks of `radius` evenly spaced on a circle of `spread`.
    MultiBlob { k: usize, radius: f64, spread: f64 },
}

impl Shape {
    /// Radius of the smallest centred disk that contains the shape.
    pub fn extent(&self) -> f64 {
        match *self {
            Shape::Disk { radius } => radius,
            Shape::Annulus { r_out, .. } => r_out,
            Shape::Crescent { radius, .. } => radius,
            Shape::MultiBlob { radius, spread, .. } => spread + radius,
        }
    }

    fn blob_centres(k: usize, spread: f64) -> impl Iterator<Item = (f64, f64)> {
        (0..k).map(move |i| {
            let t = i as f64 / k as f64 * std::f64::consts::TAU;
            (spread * t.cos(), spread * t.sin())
        })
    }

    /// Normalised depth of an offset `(dx, dy)` from the centre; `None`
    /// outside the covered region.
    pub fn depth(&self, dx: f64, dy: f64) -> Option<f64> {
        let r = (dx * dx + dy * dy).sqrt();
        match *self {
            Shape::Disk { radius } => (r <= radius).then(|| r / radius),
            Shape::Annulus { r_in, r_out } => {
                (r >= r_in && r <= r_out).then(|| (r - r_in) / (r_out - r_in))
            }
            Shape::Crescent {
                radius,
                bite_radius,
                offset,
            } => {
                let in_bite = (dx - offset).powi(2) + dy * dy < bite_radius * bite_radius;
                (r <= radius && !in_bite).then(|| r / radius)
            }
            Shape::MultiBlob { k, radius, spread } => Self::blob_centres(k, spread)
                .map(|(cx, cy)| ((dx - cx).powi(2) + (dy - cy).powi(2)).sqrt() / radius)
                .filter(|&d| d <= 1.0)
                .min_by(f64::total_cmp),
        }
    }

    /// Whether the offset lies in an interior gap of the shape (as opposed
    /// to the exterior).
    pub fn in_hole(&self, dx: f64, dy: f64) -> bool {
        let r2 = dx * dx + dy * dy;
        match *self {
            Shape::Disk { .. } => false,
            Shape::Annulus { r_in, .. } => r2 < r_in * r_in,
            Shape::Crescent {
                radius,
                bite_radius,
                offset,
            } => r2 <= radius * radius && (dx - offset).powi(2) + dy * dy < bite_radius * bite_radius,
            Shape::MultiBlob { .. } => r2 <= self.extent().powi(2) && self.depth(dx, dy).is_none(),
        }
    }

    pub fn has_holes(&self) -> bool {
        !matches!(self, Shape::Disk { .. })
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::Invalid(m.to_string()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            Shape::Disk { radius } if !pos(radius) => bad("radius must be positive"),
            Shape::Annulus { r_in, r_out } if !(pos(r_in) && pos(r_out) && r_in < r_out) => {
                bad("annulus needs 0 < r_in < r_out")
            }
            Shape::Crescent {
                radius,
                bite_radius,
                offset,
            } if !(pos(radius) && pos(bite_radius) && offset.is_finite()) => {
                bad("crescent radii must be positive")
            }
            Shape::Crescent {
                radius,
                bite_radius,
                offset,
            } if offset.abs() - bite_radius >= radius || offset.abs() + radius <= bite_radius => {
                bad("crescent bite must overlap without swallowing the disk")
            }
            Shape::MultiBlob { k, radius, spread } if k == 0 || !pos(radius) || spread.is_nan() || spread < 0.0 => {
                bad("multi_blob needs k >= 1, radius > 0, spread >= 0")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub cell_id: String,
    pub shape: Shape,
    pub center: PlanarPoint,
    pub n_service: usize,
    pub n_noservice: usize,
    /// Ascending depth cuts: depth below `cuts[0]` is band 5, ..., at or
    /// above `cuts[3]` band 1.
    pub band_cuts: [f64; 4],
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub seed: u64,
    pub gps_noise_sigma: f64,
    /// Share of no-service points placed in interior holes, when the shape has any.
    pub hole_fraction: f64,
}

impl Scenario {
    pub fn new(cell_id: impl Into<String>, shape: Shape, center: PlanarPoint, seed: u64) -> Self {
        Scenario {
            cell_id: cell_id.into(),
            shape,
            center,
            n_service: 2000,
            n_noservice: 400,
            band_cuts: DEFAULT_BAND_CUTS,
            start: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            end: Utc.with_ymd_and_hms(2024, 3, 1, 0, 0, 0).unwrap(),
            seed,
            gps_noise_sigma: DEFAULT_GPS_NOISE_SIGMA,
            hole_fraction: 0.7,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.shape.validate()?;
        let bad = |m: &str| Err(ScenarioError::Invalid(m.to_string()));
        if self.n_service == 0 || self.n_noservice == 0 {
            return bad("n_service and n_noservice must be positive");
        }
        if !self.center.is_finite() {
            return bad("centre must be finite");
        }
        let cuts_ok = self.band_cuts.windows(2).all(|w| w[0] < w[1])
            && self.band_cuts[0] > 0.0
            && self.band_cuts[3] < 1.0;
        if !cuts_ok {
            return bad("band cuts must increase strictly inside (0, 1)");
        }
        if self.end <= self.start {
            return bad("timestamp range is empty");
        }
        if !(self.gps_noise_sigma >= 0.0 && self.gps_noise_sigma.is_finite()) {
            return bad("gps noise sigma must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.hole_fraction) {
            return bad("hole fraction must lie in [0, 1]");
        }
        Ok(())
    }

    /// Band observed at depth `s`.
    pub fn band_at_depth(&self, s: f64) -> SignalBand {
        let weaker = self.band_cuts.iter().filter(|&&c| s >= c).count();
        SignalBand::new(5 - weaker as u8).expect("0..=4 cuts passed")
    }

    /// Strongest band observed at the lon/lat point, before noise.
    pub fn oracle_band(&self, p: PlanarPoint) -> Option<SignalBand> {
        self.shape
            .depth(p.x - self.center.x, p.y - self.center.y)
            .map(|s| self.band_at_depth(s))
    }

    /// True region of `band` or stronger.
    pub fn oracle_covered(&self, p: PlanarPoint, band: SignalBand) -> bool {
        self.oracle_band(p).is_some_and(|b| b >= band)
    }

    pub fn in_hole(&self, p: PlanarPoint) -> bool {
        self.shape.in_hole(p.x - self.center.x, p.y - self.center.y)
    }
}

/// One generated point, kept for oracle checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleanSample {
    /// Sampled position before GPS noise.
    pub position: PlanarPoint,
    /// Position written to the dataset.
    pub observed: PlanarPoint,
    pub band: Option<SignalBand>,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: Dataset,
    /// Positions and labels in generation order.
    pub clean: Vec<CleanSample>,
}

/// dBm range `[lo, hi)` sampled for each band.
fn band_dbm_range(b: SignalBand) -> (i32, i32) {
    match b.ordinal() {
        1 => (-120, -105),
        2 => (-105, -95),
        3 => (-95, -82),
        4 => (-82, -74),
        _ => (-74, -60),
    }
}

fn sample_dbm(rng: &mut ChaCha8Rng, b: SignalBand) -> f64 {
    let (lo, hi) = band_dbm_range(b);
    let tenths = rng.random_range(lo * 10..hi * 10);
    tenths as f64 / 10.0
}

fn sample_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> (f64, f64) {
    loop {
        let dx = rng.random_range(-radius..=radius);
        let dy = rng.random_range(-radius..=radius);
        if dx * dx + dy * dy <= radius * radius {
            return (dx, dy);
        }
    }
}

fn sample_in_ring(rng: &mut ChaCha8Rng, r_in: f64, r_out: f64) -> (f64, f64) {
    loop {
        let (dx, dy) = sample_in_disk(rng, r_out);
        if dx * dx + dy * dy >= r_in * r_in {
            return (dx, dy);
        }
    }
}

pub fn generate(scenario: &Scenario) -> Result<Generated, ScenarioError> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let noise = Normal::new(0.0, scenario.gps_noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    let extent = scenario.shape.extent();
    let (t0, t1) = (scenario.start.timestamp(), scenario.end.timestamp());
    let c = scenario.center;

    let mut clean = Vec::with_capacity(scenario.n_service + scenario.n_noservice);
    while clean.len() < scenario.n_service {
        let (dx, dy) = sample_in_disk(&mut rng, extent);
        if let Some(s) = scenario.shape.depth(dx, dy) {
            clean.push(CleanSample::at(PlanarPoint::new(c.x + dx, c.y + dy), Some(scenario.band_at_depth(s))));
        }
    }
    let n_hole = if scenario.shape.has_holes() {
        (scenario.hole_fraction * scenario.n_noservice as f64).round() as usize
    } else {
        0
    };
    let mut holes = 0;
    while holes < n_hole {
        let (dx, dy) = sample_in_disk(&mut rng, extent);
        if scenario.shape.in_hole(dx, dy) {
            clean.push(CleanSample::at(PlanarPoint::new(c.x + dx, c.y + dy), None));
            holes += 1;
        }
    }
    for _ in n_hole..scenario.n_noservice {
        let (dx, dy) = sample_in_ring(&mut rng, extent, EXTERIOR_RING * extent);
        clean.push(CleanSample::at(PlanarPoint::new(c.x + dx, c.y + dy), None));
    }

    let sigma = scenario.gps_noise_sigma;
    let mut records = Vec::with_capacity(clean.len());
    for s in clean.iter_mut() {
        if sigma > 0.0 {
            s.observed = PlanarPoint::new(
                s.position.x + noise.sample(&mut rng),
                s.position.y + noise.sample(&mut rng),
            );
        }
        let ts = rng.random_range(t0..t1);
        records.push(MeasurementRecord {
            timestamp: Utc.timestamp_opt(ts, 0).single().expect("in range"),
            lon: s.observed.x,
            lat: s.observed.y,
            cell_id: scenario.cell_id.clone(),
            signal_dbm: s.band.map(|b| sample_dbm(&mut rng, b)),
            tech: Some("4G".to_string()),
        });
    }
    let provenance = Provenance {
        source: format!("synthetic:{}", scenario.cell_id),
        accepted: records.len(),
        seed: Some(scenario.seed),
        ..Default::default()
    };
    Ok(Generated {
        dataset: Dataset::from_records(records, provenance),
        clean,
    })
}

impl CleanSample {
    fn at(position: PlanarPoint, band: Option<SignalBand>) -> Self {
        CleanSample {
            position,
            observed: position,
            band,
        }
    }
}

/// Generates several scenarios into one dataset.
pub fn generate_suite(scenarios: &[Scenario]) -> Result<Dataset, ScenarioError> {
    let mut records = Vec::new();
    for s in scenarios {
        records.extend_from_slice(generate(s)?.dataset.records());
    }
    let provenance = Provenance {
        source: "synthetic:suite".into(),
        accepted: records.len(),
        seed: scenarios.first().map(|s| s.seed),
        ..Default::default()
    };
    Ok(Dataset::from_records(records, provenance))
}

/// `n` copies of `base` placed 4 extents apart along longitude, with cell
/// ids `cell-000`.. and consecutive seeds.
pub fn replicate(base: &Scenario, n: usize) -> Vec<Scenario> {
    let step = 4.0 * base.shape.extent();
    (0..n)
        .map(|i| Scenario {
            cell_id: format!("cell-{i:03}"),
            center: PlanarPoint::new(base.center.x + step * i as f64, base.center.y),
            seed: base.seed.wrapping_add(i as u64),
            ..base.clone()
        })
        .collect()
}

/// Area of the covered region of `band` or stronger, by grid counting.
pub fn band_region_area(scenario: &Scenario, band: SignalBand, resolution: usize) -> f64 {
    let e = scenario.shape.extent();
    let d = 2.0 * e / resolution as f64;
    let mut count = 0usize;
    for j in 0..resolution {
        for i in 0..resolution {
            let p = PlanarPoint::new(
                scenario.center.x - e + (i as f64 + 0.5) * d,
                scenario.center.y - e + (j as f64 + 0.5) * d,
            );
            if scenario.oracle_covered(p, band) {
                count += 1;
            }
        }
    }
    count as f64 * d * d
}

/// Lower bound on the distance from `p` to any band edge or shape outline.
/// Every edge lies on one of the circles measured here, so a point farther
/// than `d` from all of them keeps its band under any displacement below `d`.
pub fn distance_to_band_edges(scenario: &Scenario, p: PlanarPoint) -> f64 {
    let c = scenario.center;
    let dist_circle = |cx: f64, cy: f64, r: f64| {
        (squared_distance(p, PlanarPoint::new(c.x + cx, c.y + cy)).sqrt() - r).abs()
    };
    let cuts = scenario.band_cuts;
    let radial = |cx: f64, cy: f64, r0: f64, width: f64| {
        cuts.iter()
            .map(|&q| dist_circle(cx, cy, r0 + q * width))
            .chain([dist_circle(cx, cy, r0), dist_circle(cx, cy, r0 + width)])
            .fold(f64::INFINITY, f64::min)
    };
    match scenario.shape {
        Shape::Disk { radius } => radial(0.0, 0.0, 0.0, radius),
        Shape::Annulus { r_in, r_out } => radial(0.0, 0.0, r_in, r_out - r_in),
        Shape::Crescent {
            radius,
            bite_radius,
            offset,
        } => radial(0.0, 0.0, 0.0, radius).min(dist_circle(offset, 0.0, bite_radius)),
        Shape::MultiBlob { k, radius, spread } => Shape::blob_centres(k, spread)
            .map(|(cx, cy)| radial(cx, cy, 0.0, radius))
            .fold(f64::INFINITY, f64::min),
    }
}
