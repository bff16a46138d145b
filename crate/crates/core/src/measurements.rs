//! Crowdsourced measurement ingest: validation, de-duplication, signal
//! banding, per-cell partitioning and temporal splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::PlanarPoint;

/// Header written by [`write_csv`] and expected (in any column order) by [`parse_csv`].
pub const CSV_HEADER: [&str; 6] = ["timestamp", "lat", "lon", "cell_id", "signal_dbm", "tech"];

const REQUIRED_COLUMNS: [&str; 5] = ["timestamp", "lat", "lon", "cell_id", "signal_dbm"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
}

/// One of the five signal-strength bands, ordinal 1 (weakest) to 5 (strongest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SignalBand(u8);

/// Lower edges of bands 2..=5 in dBm.
pub const BAND_CUTS_DBM: [f64; 4] = [-105.0, -95.0, -82.0, -74.0];

impl SignalBand {
    pub const ALL: [SignalBand; 5] = [
        SignalBand(1),
        SignalBand(2),
        SignalBand(3),
        SignalBand(4),
        SignalBand(5),
    ];

    pub fn new(ordinal: u8) -> Option<Self> {
        (1..=5).contains(&ordinal).then_some(SignalBand(ordinal))
    }

    pub fn ordinal(self) -> u8 {
        self.0
    }

    /// Inclusive lower edge; `-inf` for band 1.
    pub fn lower_dbm(self) -> f64 {
        match self.0 {
            1 => f64::NEG_INFINITY,
            k => BAND_CUTS_DBM[(k - 2) as usize],
        }
    }

    /// Exclusive upper edge; `+inf` for band 5.
    pub fn upper_dbm(self) -> f64 {
        match self.0 {
            5 => f64::INFINITY,
            k => BAND_CUTS_DBM[(k - 1) as usize],
        }
    }

    pub fn contains(self, dbm: f64) -> bool {
        dbm >= self.lower_dbm() && dbm < self.upper_dbm()
    }

    /// Category label used in reports and query output.
    pub fn label(self) -> &'static str {
        match self.0 {
            1 => "1. Poor to none (outdoor only)",
            2 => "2. Variable (outdoor only)",
            3 => "3. Good (outdoor only)",
            4 => "4. Variable in-home, good outdoor",
            _ => "5. Good in-home and outdoor",
        }
    }

    /// This band and every stronger one.
    pub fn and_stronger(self) -> impl Iterator<Item = SignalBand> {
        (self.0..=5).map(SignalBand)
    }
}

impl TryFrom<u8> for SignalBand {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        SignalBand::new(v).ok_or_else(|| format!("band ordinal {v} outside 1..=5"))
    }
}

impl From<SignalBand> for u8 {
    fn from(b: SignalBand) -> u8 {
        b.0
    }
}

impl fmt::Display for SignalBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Band whose `[lower, upper)` interval contains `signal_dbm`.
pub fn band_of(signal_dbm: f64) -> SignalBand {
    let idx = BAND_CUTS_DBM.iter().filter(|&&cut| signal_dbm >= cut).count();
    SignalBand(idx as u8 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub timestamp: DateTime<Utc>,
    pub lon: f64,
    pub lat: f64,
    pub cell_id: String,
    /// `None` marks a no-service sample.
    pub signal_dbm: Option<f64>,
    pub tech: Option<String>,
}

impl MeasurementRecord {
    pub fn position(&self) -> PlanarPoint {
        PlanarPoint::new(self.lon, self.lat)
    }

    pub fn is_no_service(&self) -> bool {
        self.signal_dbm.is_none()
    }

    pub fn band(&self) -> Option<SignalBand> {
        self.signal_dbm.map(band_of)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    /// Decimal places of lon/lat used when detecting duplicate events.
    pub dedup_decimals: u32,
    pub min_dbm: f64,
    pub max_dbm: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            dedup_decimals: 5,
            min_dbm: -150.0,
            max_dbm: -20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub source: String,
    pub accepted: usize,
    /// Invalid coordinates or implausible signal values.
    pub rejected: usize,
    pub deduped: usize,
    pub row_errors: Vec<RowError>,
    pub seed: Option<u64>,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source: {}", self.source)?;
        writeln!(f, "accepted: {}", self.accepted)?;
        writeln!(f, "rejected: {}", self.rejected)?;
        writeln!(f, "deduped: {}", self.deduped)?;
        writeln!(f, "row_errors: {}", self.row_errors.len())?;
        if let Some(seed) = self.seed {
            writeln!(f, "seed: {seed}")?;
        }
        for e in &self.row_errors {
            writeln!(f, "  line {}: {}", e.line, e.message)?;
        }
        Ok(())
    }
}

/// Measurement records sorted by timestamp.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    records: Vec<MeasurementRecord>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Sorts `records` by timestamp (stable).
    pub fn from_records(mut records: Vec<MeasurementRecord>, provenance: Provenance) -> Self {
        records.sort_by_key(|r| r.timestamp);
        Self {
            records,
            provenance,
        }
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn time_range(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        Some((self.records.first()?.timestamp, self.records.last()?.timestamp))
    }

    /// SHA-256 of the canonical CSV rendering.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        write_csv_to(self, &mut buf).expect("writing to memory");
        hex::encode(Sha256::digest(&buf))
    }
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("unparseable timestamp `{s}`: {e}"))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_csv(path: impl AsRef<Path>, config: &IngestConfig) -> Result<Dataset, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    parse_reader(file, path.display().to_string(), config)
}

/// Ingests measurement CSV from any reader. `source` is recorded in provenance.
pub fn parse_reader<R: Read>(
    reader: R,
    source: impl Into<String>,
    config: &IngestConfig,
) -> Result<Dataset, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = col(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
    }
    let [i_ts, i_lat, i_lon, i_cell, i_sig] = idx;
    let i_tech = col("tech");

    let mut prov = Provenance {
        source: source.into(),
        ..Default::default()
    };
    let scale = 10f64.powi(config.dedup_decimals as i32);
    let mut seen: HashSet<(String, i64, i64, i64)> = HashSet::new();
    let mut records = Vec::new();

    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| row.get(i).unwrap_or("").trim();

        let timestamp = match parse_timestamp(field(i_ts)) {
            Ok(t) => t,
            Err(message) => {
                prov.row_errors.push(RowError { line, message });
                continue;
            }
        };
        let lat = field(i_lat).parse::<f64>().ok();
        let lon = field(i_lon).parse::<f64>().ok();
        let (lat, lon) = match (lat, lon) {
            (Some(lat), Some(lon))
                if lat.is_finite()
                    && lon.is_finite()
                    && (-90.0..=90.0).contains(&lat)
                    && (-180.0..=180.0).contains(&lon) =>
            {
                (lat, lon)
            }
            _ => {
                prov.rejected += 1;
                continue;
            }
        };
        let sig_field = field(i_sig);
        let signal_dbm = if sig_field.is_empty() {
            None
        } else {
            match sig_field.parse::<f64>() {
                Ok(v) if v >= config.min_dbm && v <= config.max_dbm => Some(v),
                _ => {
                    prov.rejected += 1;
                    continue;
                }
            }
        };
        let cell_id = field(i_cell).to_string();
        let tech = i_tech
            .map(field)
            .filter(|s| !s.is_empty())
            .map(str::to_string);

        let key = (
            cell_id.clone(),
            timestamp.timestamp(),
            (lon * scale).round() as i64,
            (lat * scale).round() as i64,
        );
        if !seen.insert(key) {
            prov.deduped += 1;
            continue;
        }
        records.push(MeasurementRecord {
            timestamp,
            lon,
            lat,
            cell_id,
            signal_dbm,
            tech,
        });
    }
    prov.accepted = records.len();
    Ok(Dataset::from_records(records, prov))
}

pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_csv_to(dataset, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(dataset: &Dataset, writer: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in dataset.records() {
        w.write_record([
            format_timestamp(&r.timestamp),
            r.lat.to_string(),
            r.lon.to_string(),
            r.cell_id.clone(),
            r.signal_dbm.map(|v| v.to_string()).unwrap_or_default(),
            r.tech.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// How band partitions feed boundary training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMode {
    /// Each band's boundary sees only that band's points.
    #[default]
    Partition,
    /// Each band's boundary sees that band and every stronger one.
    Cumulative,
}

impl TrainingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainingMode::Partition => "partition",
            TrainingMode::Cumulative => "cumulative",
        }
    }

    /// Bands whose points train (and are positives for) `band`.
    pub fn bands_for(self, band: SignalBand) -> Vec<SignalBand> {
        match self {
            TrainingMode::Partition => vec![band],
            TrainingMode::Cumulative => band.and_stronger().collect(),
        }
    }
}

impl std::str::FromStr for TrainingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "partition" => Ok(TrainingMode::Partition),
            "cumulative" => Ok(TrainingMode::Cumulative),
            other => Err(format!("unknown training mode `{other}`")),
        }
    }
}

/// Band partitions of one dataset plus the no-service negative pools.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Partitions {
    pub bands: BTreeMap<(String, SignalBand), Vec<PlanarPoint>>,
    /// No-service points keyed by cell id.
    pub no_service: BTreeMap<String, Vec<PlanarPoint>>,
    /// No-service points without a cell id.
    pub global_no_service: Vec<PlanarPoint>,
    pub min_points: usize,
}

impl Partitions {
    pub fn points(&self, cell: &str, band: SignalBand) -> &[PlanarPoint] {
        self.bands
            .get(&(cell.to_string(), band))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_trainable(&self, cell: &str, band: SignalBand) -> bool {
        self.points(cell, band).len() >= self.min_points
    }

    /// Untrainable (cell, band) keys with their point counts.
    pub fn untrainable(&self) -> Vec<(String, SignalBand, usize)> {
        self.bands
            .iter()
            .filter(|(_, pts)| pts.len() < self.min_points)
            .map(|((c, b), pts)| (c.clone(), *b, pts.len()))
            .collect()
    }

    /// Every cell id that appears in a band partition or a no-service pool.
    pub fn cells(&self) -> Vec<String> {
        let mut cells: Vec<String> = self
            .bands
            .keys()
            .map(|(c, _)| c.clone())
            .chain(self.no_service.keys().cloned())
            .collect();
        cells.sort();
        cells.dedup();
        cells
    }

    /// Training points for `band` under `mode`, strongest-last order.
    pub fn training_points(&self, cell: &str, band: SignalBand, mode: TrainingMode) -> Vec<PlanarPoint> {
        mode.bands_for(band)
            .into_iter()
            .flat_map(|b| self.points(cell, b).iter().copied())
            .collect()
    }

    pub fn no_service_of(&self, cell: &str) -> &[PlanarPoint] {
        self.no_service.get(cell).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn total_points(&self) -> usize {
        self.bands.values().map(Vec::len).sum::<usize>()
            + self.no_service.values().map(Vec::len).sum::<usize>()
            + self.global_no_service.len()
    }
}

pub const DEFAULT_MIN_POINTS: usize = 20;

pub fn partition(dataset: &Dataset, min_points: usize) -> Partitions {
    let mut parts = Partitions {
        min_points,
        ..Default::default()
    };
    for r in dataset.records() {
        match (r.band(), r.cell_id.is_empty()) {
            (Some(band), _) => parts
                .bands
                .entry((r.cell_id.clone(), band))
                .or_default()
                .push(r.position()),
            (None, false) => parts
                .no_service
                .entry(r.cell_id.clone())
                .or_default()
                .push(r.position()),
            (None, true) => parts.global_no_service.push(r.position()),
        }
    }
    parts
}

/// Records strictly before `split` go to train, the rest to validation.
pub fn temporal_split(dataset: &Dataset, split: DateTime<Utc>) -> (Dataset, Dataset) {
    let cut = dataset.records.partition_point(|r| r.timestamp < split);
    let (a, b) = dataset.records.split_at(cut);
    let side = |records: &[MeasurementRecord], tag: &str| Dataset {
        records: records.to_vec(),
        provenance: Provenance {
            source: format!("{}#{tag}", dataset.provenance.source),
            accepted: records.len(),
            seed: dataset.provenance.seed,
            ..Default::default()
        },
    };
    if a.is_empty() {
        warn!("temporal split at {}: training side is empty", format_timestamp(&split));
    }
    if b.is_empty() {
        warn!("temporal split at {}: validation side is empty", format_timestamp(&split));
    }
    (side(a, "train"), side(b, "validation"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(csv: &str) -> Dataset {
        parse_reader(csv.as_bytes(), "inline", &IngestConfig::default()).unwrap()
    }

    #[test]
    fn band_examples() {
        assert_eq!(band_of(-110.0).ordinal(), 1);
        assert_eq!(band_of(-100.0).ordinal(), 2);
        assert_eq!(band_of(-95.0).ordinal(), 3);
        assert_eq!(band_of(-74.0).ordinal(), 5);
        assert_eq!(band_of(-105.0).ordinal(), 2);
        assert_eq!(band_of(-82.0).ordinal(), 4);
        assert_eq!(band_of(-74.0000001).ordinal(), 4);
    }

    #[test]
    fn band_edges() {
        let b1 = SignalBand::new(1).unwrap();
        let b5 = SignalBand::new(5).unwrap();
        assert_eq!(b1.lower_dbm(), f64::NEG_INFINITY);
        assert_eq!(b1.upper_dbm(), -105.0);
        assert_eq!(b5.lower_dbm(), -74.0);
        assert_eq!(b5.upper_dbm(), f64::INFINITY);
        assert!(SignalBand::new(0).is_none());
        assert!(SignalBand::new(6).is_none());
        assert_eq!(b5.label(), "5. Good in-home and outdoor");
    }

    #[test]
    fn latitude_out_of_range_rejected() {
        let ds = ingest(
            "timestamp,lat,lon,cell_id,signal_dbm,tech\n\
             2024-01-15T10:30:00Z,91.0,0.1,c1,-90,4G\n\
             2024-01-15T10:31:00Z,51.0,0.1,c1,-90,4G\n",
        );
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.provenance.rejected, 1);
        assert_eq!(ds.provenance.accepted, 1);
    }

    #[test]
    fn implausible_signal_rejected() {
        let ds = ingest(
            "timestamp,lat,lon,cell_id,signal_dbm,tech\n\
             2024-01-15T10:30:00Z,51.0,0.1,c1,-151,4G\n\
             2024-01-15T10:30:00Z,51.0,0.1,c1,-19.5,4G\n\
             2024-01-15T10:30:00Z,51.0,0.1,c1,-150,4G\n",
        );
        assert_eq!(ds.provenance.rejected, 2);
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn duplicates_after_rounding_collapse() {
        // lon 0.123451 and 0.1234549 both round to 0.12345 at 5 dp
        let ds = ingest(
            "timestamp,lat,lon,cell_id,signal_dbm,tech\n\
             2024-01-15T10:30:00Z,51.000001,0.123451,c1,-90,4G\n\
             2024-01-15T10:30:00Z,51.000004,0.1234549,c1,-91,4G\n",
        );
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.provenance.deduped, 1);
        assert_eq!(ds.records()[0].signal_dbm, Some(-90.0));
    }

    #[test]
    fn different_cell_or_time_not_duplicate() {
        let ds = ingest(
            "timestamp,lat,lon,cell_id,signal_dbm,tech\n\
             2024-01-15T10:30:00Z,51.0,0.1,c1,-90,4G\n\
             2024-01-15T10:30:00Z,51.0,0.1,c2,-90,4G\n\
             2024-01-15T10:30:01Z,51.0,0.1,c1,-90,4G\n",
        );
        assert_eq!(ds.len(), 3);
    }

    #[test]
    fn empty_signal_is_no_service() {
        let ds = ingest(
            "timestamp,lat,lon,cell_id,signal_dbm,tech\n\
             2024-01-15T10:30:00Z,51.0,0.1,c1,,\n",
        );
        assert!(ds.records()[0].is_no_service());
        assert_eq!(ds.records()[0].tech, None);
    }

    #[test]
    fn missing_column_is_error() {
        let err = parse_reader(
            "timestamp,lat,lon,signal_dbm\n2024-01-15T10:30:00Z,51,0,-90\n".as_bytes(),
            "x",
            &IngestConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn(c) if c == "cell_id"));
    }

    #[test]
    fn bad_timestamp_counted_with_line_number() {
        let ds = ingest(
            "timestamp,lat,lon,cell_id,signal_dbm,tech\n\
             2024-01-15T10:30:00Z,51.0,0.1,c1,-90,4G\n\
             yesterday,51.0,0.1,c1,-90,4G\n\
             2024-01-14T10:30:00Z,51.0,0.1,c1,-90,4G\n",
        );
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.provenance.row_errors.len(), 1);
        assert_eq!(ds.provenance.row_errors[0].line, 3);
        // sorted ascending
        assert!(ds.records()[0].timestamp < ds.records()[1].timestamp);
    }

    #[test]
    fn column_order_is_free() {
        let ds = ingest(
            "cell_id,signal_dbm,lon,lat,timestamp\n\
             c9,-80,0.5,51.5,2024-02-01T00:00:00Z\n",
        );
        let r = &ds.records()[0];
        assert_eq!((r.lon, r.lat, r.cell_id.as_str()), (0.5, 51.5, "c9"));
    }

    fn record(cell: &str, dbm: Option<f64>, ts: &str) -> MeasurementRecord {
        MeasurementRecord {
            timestamp: parse_timestamp(ts).unwrap(),
            lon: 0.0,
            lat: 0.0,
            cell_id: cell.into(),
            signal_dbm: dbm,
            tech: None,
        }
    }

    #[test]
    fn partition_direct_banding() {
        let ts = "2024-01-01T00:00:00Z";
        let ds = Dataset::from_records(
            vec![
                record("c", Some(-100.0), ts),
                record("c", Some(-101.0), ts),
                record("c", Some(-70.0), ts),
            ],
            Provenance::default(),
        );
        let p = partition(&ds, 20);
        assert_eq!(p.bands.len(), 2);
        assert_eq!(p.points("c", SignalBand::new(2).unwrap()).len(), 2);
        assert_eq!(p.points("c", SignalBand::new(5).unwrap()).len(), 1);
        assert_eq!(p.untrainable().len(), 2);
    }

    #[test]
    fn partition_all_no_service() {
        let ts = "2024-01-01T00:00:00Z";
        let ds = Dataset::from_records(
            (0..7).map(|_| record("c", None, ts)).collect(),
            Provenance::default(),
        );
        let p = partition(&ds, 20);
        assert!(p.bands.is_empty());
        assert_eq!(p.no_service_of("c").len(), 7);
    }

    #[test]
    fn partition_two_cell_fixture() {
        let ts = "2024-01-01T00:00:00Z";
        let ds = Dataset::from_records(
            vec![
                record("a", Some(-120.0), ts), // a,1
                record("a", Some(-104.0), ts), // a,2
                record("a", Some(-96.0), ts),  // a,2
                record("a", None, ts),         // a pool
                record("b", Some(-82.0), ts),  // b,4
                record("b", Some(-81.0), ts),  // b,4
                record("b", Some(-60.0), ts),  // b,5
                record("", None, ts),          // global pool
                record("b", None, ts),         // b pool
            ],
            Provenance::default(),
        );
        let p = partition(&ds, 2);
        let table: Vec<(String, u8, usize)> = p
            .bands
            .iter()
            .map(|((c, b), v)| (c.clone(), b.ordinal(), v.len()))
            .collect();
        assert_eq!(
            table,
            vec![
                ("a".into(), 1, 1),
                ("a".into(), 2, 2),
                ("b".into(), 4, 2),
                ("b".into(), 5, 1),
            ]
        );
        assert_eq!(p.no_service_of("a").len(), 1);
        assert_eq!(p.no_service_of("b").len(), 1);
        assert_eq!(p.global_no_service.len(), 1);
        assert_eq!(p.total_points(), ds.len());
        assert!(p.is_trainable("a", SignalBand::new(2).unwrap()));
        assert!(!p.is_trainable("a", SignalBand::new(1).unwrap()));
    }

    #[test]
    fn split_january_february() {
        let ds = Dataset::from_records(
            vec![
                record("c", Some(-90.0), "2024-02-10T00:00:00Z"),
                record("c", Some(-90.0), "2024-01-15T00:00:00Z"),
            ],
            Provenance::default(),
        );
        let (train, val) = temporal_split(&ds, parse_timestamp("2024-02-01T00:00:00Z").unwrap());
        assert_eq!(train.len(), 1);
        assert_eq!(val.len(), 1);
        assert_eq!(format_timestamp(&train.records()[0].timestamp), "2024-01-15T00:00:00Z");
        assert_eq!(format_timestamp(&val.records()[0].timestamp), "2024-02-10T00:00:00Z");
    }

    #[test]
    fn split_before_everything() {
        let ds = Dataset::from_records(
            vec![record("c", Some(-90.0), "2024-01-15T00:00:00Z")],
            Provenance::default(),
        );
        let (train, val) = temporal_split(&ds, parse_timestamp("2023-01-01T00:00:00Z").unwrap());
        assert!(train.is_empty());
        assert_eq!(val.len(), 1);
    }

    #[test]
    fn split_ten_record_fixture() {
        // days 1..=10 of January; split at Jan 4 12:00 => days 1-4 train
        let recs: Vec<_> = (1..=10)
            .rev()
            .map(|d| record("c", Some(-90.0), &format!("2024-01-{d:02}T00:00:00Z")))
            .collect();
        let ds = Dataset::from_records(recs, Provenance::default());
        let (train, val) = temporal_split(&ds, parse_timestamp("2024-01-04T12:00:00Z").unwrap());
        assert_eq!(train.len(), 4);
        assert_eq!(val.len(), 6);
        // boundary instant itself goes to validation
        let (train, val) = temporal_split(&ds, parse_timestamp("2024-01-05T00:00:00Z").unwrap());
        assert_eq!((train.len(), val.len()), (4, 6));
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let ds = Dataset::from_records(
            vec![
                MeasurementRecord {
                    timestamp: parse_timestamp("2024-01-15T10:30:00Z").unwrap(),
                    lon: -1.234567891234,
                    lat: 52.1,
                    cell_id: "cell-7".into(),
                    signal_dbm: Some(-97.25),
                    tech: Some("4G".into()),
                },
                record("cell-7", None, "2024-01-16T10:30:00Z"),
            ],
            Provenance::default(),
        );
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = parse_reader(buf.as_slice(), "mem", &IngestConfig::default()).unwrap();
        assert_eq!(back.records(), ds.records());
    }
}
