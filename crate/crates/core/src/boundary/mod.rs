//! Per-cell stacks of per-band coverage boundaries.
//!
//! A [`CoverageModel`] holds at most one boundary per signal band. Each
//! boundary is either a trained one-class SVM or a convex hull, and the
//! model answers "strongest band covering this point" queries.

pub mod contour;
pub mod geojson;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{convex_hull, BBox, CoordinateMode, GeometryError, PlanarPoint, Polygon};
use crate::measurements::{Partitions, SignalBand, TrainingMode};
use crate::ocsvm::{
    self, check_version, ModelIoError, OcSvmModel, TrainError, TrainParams, TrainWindow,
    MODEL_FORMAT_VERSION,
};

pub use contour::{extract_contour as extract_field_contour, ContourError, Contours};

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] ModelIoError),
    #[error("boundaries of cell {cell} use different coordinate frames")]
    MixedFrames { cell: String },
    #[error("two boundaries for cell {cell} band {band}")]
    DuplicateBand { cell: String, band: SignalBand },
}

/// Which predictor a boundary is built with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    OcSvm(TrainParams),
    Hull,
}

impl Method {
    pub fn tag(&self) -> MethodTag {
        match self {
            Method::OcSvm(_) => MethodTag::OcSvm,
            Method::Hull => MethodTag::Hull,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Hull,
    OcSvm,
}

impl MethodTag {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodTag::Hull => "hull",
            MethodTag::OcSvm => "ocsvm",
        }
    }
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MethodTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hull" => Ok(MethodTag::Hull),
            "ocsvm" | "oc-svm" => Ok(MethodTag::OcSvm),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// How training coordinates are chosen for a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameChoice {
    #[default]
    Degrees,
    /// Local equirectangular meters around the cell's service centroid.
    Projected,
}

impl FrameChoice {
    pub fn frame_for(self, lonlat: &[PlanarPoint]) -> CoordinateMode {
        match self {
            FrameChoice::Degrees => CoordinateMode::Degrees,
            FrameChoice::Projected => CoordinateMode::projected_around(lonlat),
        }
    }
}

impl std::str::FromStr for FrameChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "degrees" => Ok(FrameChoice::Degrees),
            "projected" => Ok(FrameChoice::Projected),
            other => Err(format!("unknown coordinate mode `{other}`")),
        }
    }
}

/// Convex hull baseline boundary, stored in its working frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HullBoundary {
    pub polygon: Polygon,
    pub coordinate_mode: CoordinateMode,
    pub n_train: usize,
    pub cell_id: Option<String>,
    pub band: Option<SignalBand>,
    pub mode: Option<TrainingMode>,
    pub train_window: Option<TrainWindow>,
}

impl HullBoundary {
    pub fn covers_lonlat(&self, p: PlanarPoint) -> bool {
        self.polygon.contains(self.coordinate_mode.to_working(p))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HullFile {
    version: u32,
    method: MethodTag,
    cell_id: Option<String>,
    band: Option<SignalBand>,
    mode: Option<TrainingMode>,
    coordinate_mode: CoordinateMode,
    vertices: Vec<[f64; 2]>,
    n_train: usize,
    train_window: Option<TrainWindow>,
}

/// A trained per-band predictor.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    OcSvm(OcSvmModel),
    Hull(HullBoundary),
}

impl Predictor {
    pub fn method(&self) -> MethodTag {
        match self {
            Predictor::OcSvm(_) => MethodTag::OcSvm,
            Predictor::Hull(_) => MethodTag::Hull,
        }
    }

    /// Membership of a lon/lat point; boundary-inclusive for both methods.
    pub fn covers_lonlat(&self, p: PlanarPoint) -> bool {
        match self {
            Predictor::OcSvm(m) => m.decision_value_lonlat(p) >= 0.0,
            Predictor::Hull(h) => h.covers_lonlat(p),
        }
    }

    pub fn coordinate_mode(&self) -> CoordinateMode {
        match self {
            Predictor::OcSvm(m) => m.coordinate_mode,
            Predictor::Hull(h) => h.coordinate_mode,
        }
    }

    pub fn cell_id(&self) -> Option<&str> {
        match self {
            Predictor::OcSvm(m) => m.cell_id.as_deref(),
            Predictor::Hull(h) => h.cell_id.as_deref(),
        }
    }

    pub fn band(&self) -> Option<SignalBand> {
        match self {
            Predictor::OcSvm(m) => m.band,
            Predictor::Hull(h) => h.band,
        }
    }

    pub fn mode(&self) -> Option<TrainingMode> {
        match self {
            Predictor::OcSvm(m) => m.mode,
            Predictor::Hull(h) => h.mode,
        }
    }

    pub fn n_train(&self) -> usize {
        match self {
            Predictor::OcSvm(m) => m.n_train(),
            Predictor::Hull(h) => h.n_train,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Predictor::OcSvm(m) => m.to_bytes(),
            Predictor::Hull(h) => {
                let file = HullFile {
                    version: MODEL_FORMAT_VERSION,
                    method: MethodTag::Hull,
                    cell_id: h.cell_id.clone(),
                    band: h.band,
                    mode: h.mode,
                    coordinate_mode: h.coordinate_mode,
                    vertices: h.polygon.vertices().iter().map(|&p| p.into()).collect(),
                    n_train: h.n_train,
                    train_window: h.train_window.clone(),
                };
                serde_json::to_string_pretty(&file)
                    .expect("hull serialises")
                    .into_bytes()
            }
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelIoError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
        check_version(&value)?;
        if value.get("method").and_then(|m| m.as_str()) == Some("hull") {
            let f: HullFile =
                serde_json::from_value(value).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
            let polygon = Polygon::new(f.vertices.into_iter().map(Into::into).collect())
                .map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
            Ok(Predictor::Hull(HullBoundary {
                polygon,
                coordinate_mode: f.coordinate_mode,
                n_train: f.n_train,
                cell_id: f.cell_id,
                band: f.band,
                mode: f.mode,
                train_window: f.train_window,
            }))
        } else {
            OcSvmModel::from_bytes(bytes).map(Predictor::OcSvm)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelIoError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelIoError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Metadata attached to a freshly trained predictor.
#[derive(Debug, Clone, Default)]
pub struct BoundaryMeta {
    pub cell_id: Option<String>,
    pub band: Option<SignalBand>,
    pub mode: Option<TrainingMode>,
    pub train_window: Option<TrainWindow>,
}

/// Trains one predictor on lon/lat points, working in `frame`.
pub fn train_predictor(
    lonlat: &[PlanarPoint],
    method: &Method,
    frame: CoordinateMode,
    meta: BoundaryMeta,
) -> Result<Predictor, BoundaryError> {
    let working: Vec<PlanarPoint> = lonlat.iter().map(|&p| frame.to_working(p)).collect();
    match method {
        Method::OcSvm(params) => {
            let mut m = ocsvm::train(&working, params)?;
            m.coordinate_mode = frame;
            m.cell_id = meta.cell_id;
            m.band = meta.band;
            m.mode = meta.mode;
            m.train_window = meta.train_window;
            Ok(Predictor::OcSvm(m))
        }
        Method::Hull => Ok(Predictor::Hull(HullBoundary {
            polygon: convex_hull(&working)?,
            coordinate_mode: frame,
            n_train: working.len(),
            cell_id: meta.cell_id,
            band: meta.band,
            mode: meta.mode,
            train_window: meta.train_window,
        })),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandBoundary {
    pub band: SignalBand,
    pub predictor: Predictor,
    pub mode: TrainingMode,
}

impl BandBoundary {
    pub fn method(&self) -> MethodTag {
        self.predictor.method()
    }

    pub fn n_train(&self) -> usize {
        self.predictor.n_train()
    }

    pub fn covers_lonlat(&self, p: PlanarPoint) -> bool {
        self.predictor.covers_lonlat(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageModel {
    pub cell_id: String,
    pub mode: TrainingMode,
    pub coordinate_mode: CoordinateMode,
    boundaries: BTreeMap<SignalBand, BandBoundary>,
}

impl CoverageModel {
    pub fn new(cell_id: impl Into<String>, mode: TrainingMode, coordinate_mode: CoordinateMode) -> Self {
        Self {
            cell_id: cell_id.into(),
            mode,
            coordinate_mode,
            boundaries: BTreeMap::new(),
        }
    }

    /// Assembles a model from loaded predictors of one cell.
    pub fn from_predictors(
        cell_id: &str,
        predictors: Vec<Predictor>,
    ) -> Result<Self, BoundaryError> {
        let mut model: Option<CoverageModel> = None;
        for p in predictors {
            let band = p.band().ok_or_else(|| {
                ModelIoError::Corrupt(format!("boundary for cell {cell_id} has no band"))
            })?;
            let mode = p.mode().unwrap_or_default();
            let m = model.get_or_insert_with(|| CoverageModel::new(cell_id, mode, p.coordinate_mode()));
            m.insert(BandBoundary {
                band,
                predictor: p,
                mode,
            })?;
        }
        Ok(model.unwrap_or_else(|| {
            CoverageModel::new(cell_id, TrainingMode::default(), CoordinateMode::Degrees)
        }))
    }

    pub fn insert(&mut self, boundary: BandBoundary) -> Result<(), BoundaryError> {
        if boundary.predictor.coordinate_mode() != self.coordinate_mode {
            return Err(BoundaryError::MixedFrames {
                cell: self.cell_id.clone(),
            });
        }
        if self.boundaries.contains_key(&boundary.band) {
            return Err(BoundaryError::DuplicateBand {
                cell: self.cell_id.clone(),
                band: boundary.band,
            });
        }
        self.boundaries.insert(boundary.band, boundary);
        Ok(())
    }

    pub fn boundary(&self, band: SignalBand) -> Option<&BandBoundary> {
        self.boundaries.get(&band)
    }

    /// Boundaries in ascending band order.
    pub fn boundaries(&self) -> impl Iterator<Item = &BandBoundary> {
        self.boundaries.values()
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    /// Strongest band whose boundary covers the lon/lat point.
    pub fn highest_band_at(&self, p: PlanarPoint) -> Option<SignalBand> {
        self.boundaries
            .values()
            .rev()
            .find(|b| b.covers_lonlat(p))
            .map(|b| b.band)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    pub method: Method,
    pub mode: TrainingMode,
    pub frame: FrameChoice,
    pub train_window: Option<TrainWindow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedBand {
    pub cell_id: String,
    pub band: SignalBand,
    pub n_points: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub model: CoverageModel,
    pub skipped: Vec<SkippedBand>,
}

/// Trains one boundary per trainable band of `cell`. Bands below the
/// partition minimum, or whose training fails, are reported in `skipped`.
pub fn build(cell: &str, partitions: &Partitions, config: &BuildConfig) -> BuildOutcome {
    let all_service: Vec<PlanarPoint> = SignalBand::ALL
        .iter()
        .flat_map(|&b| partitions.points(cell, b).iter().copied())
        .collect();
    let frame = config.frame.frame_for(&all_service);

    let candidates: Vec<(SignalBand, Vec<PlanarPoint>)> = SignalBand::ALL
        .iter()
        .filter(|&&b| !partitions.points(cell, b).is_empty())
        .map(|&b| (b, partitions.training_points(cell, b, config.mode)))
        .collect();

    let results: Vec<Result<BandBoundary, SkippedBand>> = candidates
        .into_par_iter()
        .map(|(band, pts)| {
            let skip = |reason: String| SkippedBand {
                cell_id: cell.to_string(),
                band,
                n_points: pts.len(),
                reason,
            };
            if pts.len() < partitions.min_points {
                return Err(skip(format!(
                    "{} points below minimum {}",
                    pts.len(),
                    partitions.min_points
                )));
            }
            let meta = BoundaryMeta {
                cell_id: Some(cell.to_string()),
                band: Some(band),
                mode: Some(config.mode),
                train_window: config.train_window.clone(),
            };
            train_predictor(&pts, &config.method, frame, meta)
                .map(|predictor| BandBoundary {
                    band,
                    predictor,
                    mode: config.mode,
                })
                .map_err(|e| skip(format!("training failed: {e}")))
        })
        .collect();

    let mut model = CoverageModel::new(cell, config.mode, frame);
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(b) => model.insert(b).expect("one boundary per band, shared frame"),
            Err(s) => skipped.push(s),
        }
    }
    BuildOutcome { model, skipped }
}

/// Default contour box: support-vector extent padded by 10% and three
/// kernel length-scales.
pub fn contour_bbox(model: &OcSvmModel) -> BBox {
    let b = BBox::around(model.support_vectors()).expect("model has support vectors");
    let pad = 3.0 / model.gamma().sqrt();
    let b = b.expanded(0.1);
    BBox::new(b.min_x - pad, b.min_y - pad, b.max_x + pad, b.max_y + pad)
}

/// Zero-level contour of an OC-SVM decision function, in the model frame.
pub fn extract_contour(
    model: &OcSvmModel,
    bbox: BBox,
    resolution: usize,
) -> Result<Contours, ContourError> {
    contour::extract_contour(|p| model.decision_value(p), bbox, resolution)
}

/// Area (frame units squared) inside `hull` where the model predicts no
/// coverage, estimated on the centres of a `resolution` square grid.
pub fn hull_excess_region(model: &OcSvmModel, hull: &Polygon, bbox: BBox, resolution: usize) -> f64 {
    let n = resolution.max(1);
    let dx = bbox.width() / n as f64;
    let dy = bbox.height() / n as f64;
    let count: usize = (0..n)
        .into_par_iter()
        .map(|j| {
            let y = bbox.min_y + (j as f64 + 0.5) * dy;
            (0..n)
                .filter(|&i| {
                    let p = PlanarPoint::new(bbox.min_x + (i as f64 + 0.5) * dx, y);
                    hull.contains(p) && model.decision_value(p) < 0.0
                })
                .count()
        })
        .sum();
    count as f64 * dx * dy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::{partition, Dataset, MeasurementRecord, Provenance};
    use chrono::{TimeZone, Utc};

    fn ring_points(n: usize, r: f64, cx: f64, cy: f64) -> Vec<PlanarPoint> {
        (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 * std::f64::consts::TAU;
                PlanarPoint::new(cx + r * t.cos(), cy + r * t.sin())
            })
            .collect()
    }

    fn dataset(rows: &[(f64, f64, Option<f64>)]) -> Dataset {
        let t0 = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, &(lon, lat, dbm))| MeasurementRecord {
                timestamp: t0 + chrono::Duration::seconds(i as i64),
                lon,
                lat,
                cell_id: "c".into(),
                signal_dbm: dbm,
                tech: None,
            })
            .collect();
        Dataset::from_records(records, Provenance::default())
    }

    /// Nested disks: band b occupies radii [(5-b)*0.01, (6-b)*0.01).
    fn nested_disk_dataset() -> Dataset {
        let dbm = [-110.0, -100.0, -90.0, -78.0, -70.0];
        let mut rows = Vec::new();
        for b in 1..=5usize {
            let r_lo = (5 - b) as f64 * 0.01;
            for k in 0..4 {
                let r = r_lo + 0.002 + 0.002 * k as f64;
                for p in ring_points(24, r, 0.0, 0.0) {
                    rows.push((p.x, p.y, Some(dbm[b - 1])));
                }
            }
        }
        dataset(&rows)
    }

    fn hull_config(mode: TrainingMode) -> BuildConfig {
        BuildConfig {
            method: Method::Hull,
            mode,
            frame: FrameChoice::Degrees,
            train_window: None,
        }
    }

    #[test]
    fn build_two_band_model_and_skip_small_band() {
        let mut rows: Vec<(f64, f64, Option<f64>)> = ring_points(30, 0.01, 0.0, 0.0)
            .into_iter()
            .map(|p| (p.x, p.y, Some(-110.0)))
            .collect();
        rows.extend(ring_points(30, 0.005, 0.0, 0.0).into_iter().map(|p| (p.x, p.y, Some(-90.0))));
        rows.extend(ring_points(5, 0.002, 0.0, 0.0).into_iter().map(|p| (p.x, p.y, Some(-60.0))));
        let parts = partition(&dataset(&rows), 20);
        let params = TrainParams::new(0.2, 1e4).unwrap();
        let out = build(
            "c",
            &parts,
            &BuildConfig {
                method: Method::OcSvm(params),
                mode: TrainingMode::Partition,
                frame: FrameChoice::Degrees,
                train_window: None,
            },
        );
        let bands: Vec<u8> = out.model.boundaries().map(|b| b.band.ordinal()).collect();
        assert_eq!(bands, vec![1, 3]);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.skipped[0].band.ordinal(), 5);
        assert_eq!(out.skipped[0].n_points, 5);
    }

    #[test]
    fn cumulative_mode_trains_on_stronger_bands_too() {
        let parts = partition(&nested_disk_dataset(), 20);
        let out = build("c", &parts, &hull_config(TrainingMode::Cumulative));
        // 96 points per band; band b sees bands b..=5
        let counts: Vec<usize> = out.model.boundaries().map(|b| b.n_train()).collect();
        assert_eq!(counts, vec![480, 384, 288, 192, 96]);
        // nested by construction
        assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        let partition_out = build("c", &parts, &hull_config(TrainingMode::Partition));
        let counts: Vec<usize> = partition_out.model.boundaries().map(|b| b.n_train()).collect();
        assert_eq!(counts, vec![96; 5]);
    }

    #[test]
    fn nested_disk_probe_sequence() {
        let parts = partition(&nested_disk_dataset(), 20);
        let out = build("c", &parts, &hull_config(TrainingMode::Cumulative));
        let probes = [0.001, 0.015, 0.025, 0.035, 0.045, 0.06];
        let got: Vec<Option<u8>> = probes
            .iter()
            .map(|&r| out.model.highest_band_at(PlanarPoint::new(r, 0.0)).map(|b| b.ordinal()))
            .collect();
        assert_eq!(got, vec![Some(5), Some(4), Some(3), Some(2), Some(1), None]);
    }

    #[test]
    fn highest_band_agrees_with_per_band_membership() {
        let parts = partition(&nested_disk_dataset(), 20);
        let out = build("c", &parts, &hull_config(TrainingMode::Partition));
        for k in 0..60 {
            let p = PlanarPoint::new(-0.055 + k as f64 * 0.0019, 0.003);
            let expected = SignalBand::ALL
                .iter()
                .rev()
                .find(|&&b| out.model.boundary(b).is_some_and(|bb| bb.covers_lonlat(p)))
                .copied();
            assert_eq!(out.model.highest_band_at(p), expected);
        }
    }

    #[test]
    fn query_inside_band_one_and_three() {
        let mut model = CoverageModel::new("c", TrainingMode::Partition, CoordinateMode::Degrees);
        let big = ring_points(16, 1.0, 0.0, 0.0);
        let small = ring_points(16, 0.5, 0.0, 0.0);
        for (ord, pts) in [(1u8, big), (3u8, small)] {
            let band = SignalBand::new(ord).unwrap();
            let predictor = train_predictor(
                &pts,
                &Method::Hull,
                CoordinateMode::Degrees,
                BoundaryMeta {
                    band: Some(band),
                    ..Default::default()
                },
            )
            .unwrap();
            model
                .insert(BandBoundary {
                    band,
                    predictor,
                    mode: TrainingMode::Partition,
                })
                .unwrap();
        }
        assert_eq!(model.highest_band_at(PlanarPoint::new(0.1, 0.1)).map(|b| b.ordinal()), Some(3));
        assert_eq!(model.highest_band_at(PlanarPoint::new(0.8, 0.0)).map(|b| b.ordinal()), Some(1));
        assert_eq!(model.highest_band_at(PlanarPoint::new(2.0, 0.0)), None);
    }

    #[test]
    fn mixed_frames_rejected() {
        let pts = ring_points(10, 0.01, 0.0, 51.0);
        let p1 = train_predictor(&pts, &Method::Hull, CoordinateMode::Degrees, BoundaryMeta {
            band: SignalBand::new(1),
            ..Default::default()
        })
        .unwrap();
        let p2 = train_predictor(
            &pts,
            &Method::Hull,
            CoordinateMode::projected_around(&pts),
            BoundaryMeta {
                band: SignalBand::new(2),
                ..Default::default()
            },
        )
        .unwrap();
        let err = CoverageModel::from_predictors("c", vec![p1, p2]).unwrap_err();
        assert!(matches!(err, BoundaryError::MixedFrames { .. }));
    }

    #[test]
    fn projected_frame_hull_covers_training_points() {
        let pts = ring_points(40, 0.02, -1.5, 52.0);
        let frame = CoordinateMode::projected_around(&pts);
        let p = train_predictor(&pts, &Method::Hull, frame, BoundaryMeta::default()).unwrap();
        assert!(p.covers_lonlat(PlanarPoint::new(-1.5, 52.0)));
        assert!(!p.covers_lonlat(PlanarPoint::new(-1.5, 52.03)));
    }

    #[test]
    fn hull_file_round_trip() {
        let pts = ring_points(12, 0.01, 0.1, 51.2);
        let p = train_predictor(
            &pts,
            &Method::Hull,
            CoordinateMode::Degrees,
            BoundaryMeta {
                cell_id: Some("c9".into()),
                band: SignalBand::new(4),
                mode: Some(TrainingMode::Cumulative),
                train_window: None,
            },
        )
        .unwrap();
        let back = Predictor::from_bytes(&p.to_bytes()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn contour_of_disk_like_model() {
        let pts: Vec<PlanarPoint> = (1..=6)
            .flat_map(|k| ring_points(8 * k, 0.002 * k as f64, 0.0, 0.0))
            .collect();
        let m = ocsvm::train(&pts, &TrainParams::new(0.1, 2e3).unwrap()).unwrap();
        let bbox = contour_bbox(&m);
        let c = extract_contour(&m, bbox, 64).unwrap();
        assert_eq!(c.rings.len(), 1);
        assert!(c.rings[0].is_ccw());
        // |f| at vertices bounded by Lipschitz constant times a cell diagonal
        let lipschitz = (2.0 * m.gamma() / std::f64::consts::E).sqrt();
        let diag = (bbox.width().powi(2) + bbox.height().powi(2)).sqrt() / 64.0;
        for v in c.rings[0].vertices() {
            assert!(m.decision_value(*v).abs() <= lipschitz * diag);
        }
    }

    #[test]
    fn contour_outside_support_is_empty() {
        let pts = ring_points(20, 0.01, 0.0, 0.0);
        let m = ocsvm::train(&pts, &TrainParams::new(0.2, 1e4).unwrap()).unwrap();
        let c = extract_contour(&m, BBox::new(1.0, 1.0, 1.1, 1.1), 32).unwrap();
        assert!(c.rings.is_empty());
        assert!(c.diagnostic.is_some());
    }

    #[test]
    fn hull_excess_is_zero_when_model_covers_hull() {
        let pts = ring_points(20, 0.01, 0.0, 0.0);
        let m = ocsvm::train(&pts, &TrainParams::new(0.2, 1e4).unwrap()).unwrap();
        let hull = convex_hull(&pts).unwrap();
        let bbox = hull.bbox();
        // narrow kernel relative to spacing would leave gaps; here gamma is broad
        assert_eq!(hull_excess_region(&m, &hull, bbox, 64), 0.0);
    }
}
