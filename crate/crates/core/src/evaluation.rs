//! Confusion counts, F1, temporal grid search and the hull-vs-OC-SVM
//! comparison report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::boundary::{train_predictor, BoundaryMeta, FrameChoice, Method, MethodTag, Predictor};
use crate::geometry::PlanarPoint;
use crate::measurements::{
    format_timestamp, partition, temporal_split, Dataset, SignalBand, TrainingMode,
};
use crate::ocsvm::{TrainParams, TrainWindow, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Grid used when none is given.
pub const DEFAULT_NU_GRID: [f64; 4] = [0.02, 0.04, 0.06, 0.08];
pub const DEFAULT_GAMMA_GRID: [f64; 4] = [1e4, 2e4, 3e4, 4e4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("every grid point has an undefined score")]
    AllUndefined,
    #[error("no evaluable (cell, band) pairs")]
    NoJobs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `tp / (tp + fp)`; undefined when nothing was predicted covered.
    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    /// `tp / (tp + fn)`; undefined without positives.
    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    /// Undefined without positives. With positives but no covered
    /// predictions, tp = 0 and the score is 0.
    pub fn f1(&self) -> Option<f64> {
        let recall = self.recall()?;
        Some(match self.precision() {
            Some(precision) => f1(precision, recall),
            None => 0.0,
        })
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    let s = precision + recall;
    if s <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / s
    }
}

/// Anything that answers a lon/lat coverage question.
pub trait Coverage {
    fn covers(&self, p: PlanarPoint) -> bool;
}

impl Coverage for Predictor {
    fn covers(&self, p: PlanarPoint) -> bool {
        self.covers_lonlat(p)
    }
}

impl<F: Fn(PlanarPoint) -> bool> Coverage for F {
    fn covers(&self, p: PlanarPoint) -> bool {
        self(p)
    }
}

pub fn evaluate_band<C: Coverage + ?Sized>(
    predictor: &C,
    positives: &[PlanarPoint],
    negatives: &[PlanarPoint],
) -> ConfusionCounts {
    let tp = positives.iter().filter(|&&p| predictor.covers(p)).count();
    let fp = negatives.iter().filter(|&&p| predictor.covers(p)).count();
    ConfusionCounts {
        tp,
        fp,
        fn_: positives.len() - tp,
        tn: negatives.len() - fp,
    }
}

/// Which validation points count as negatives for a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativePolicy {
    /// No-service points of the cell plus validation points of bands that
    /// are not positives for this band.
    #[default]
    NoServiceAndOtherBands,
    NoServiceOnly,
}

impl std::str::FromStr for NegativePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no-service-and-other-bands" | "other-bands" => Ok(Self::NoServiceAndOtherBands),
            "no-service-only" | "no-service" => Ok(Self::NoServiceOnly),
            other => Err(format!("unknown negative policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobOptions {
    pub min_points: usize,
    pub mode: TrainingMode,
    pub negatives: NegativePolicy,
    pub frame: FrameChoice,
}

impl Default for JobOptions {
    fn default() -> Self {
        Self {
            min_points: crate::measurements::DEFAULT_MIN_POINTS,
            mode: TrainingMode::Partition,
            negatives: NegativePolicy::default(),
            frame: FrameChoice::Degrees,
        }
    }
}

/// One (cell, band) train/validate unit, all points lon/lat.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalJob {
    pub cell_id: String,
    pub band: SignalBand,
    pub mode: TrainingMode,
    pub frame: FrameChoice,
    pub train: Vec<PlanarPoint>,
    /// All service points of the cell in training; fixes the projected origin.
    pub frame_anchor: Vec<PlanarPoint>,
    pub positives: Vec<PlanarPoint>,
    pub negatives: Vec<PlanarPoint>,
    pub train_window: Option<TrainWindow>,
}

fn hash_points(hasher: &mut Sha256, pts: &[PlanarPoint]) {
    hasher.update((pts.len() as u64).to_le_bytes());
    for p in pts {
        hasher.update(p.x.to_bits().to_le_bytes());
        hasher.update(p.y.to_bits().to_le_bytes());
    }
}

impl EvalJob {
    pub fn train_hash(&self) -> String {
        let mut h = Sha256::new();
        hash_points(&mut h, &self.train);
        hex::encode(h.finalize())
    }

    pub fn validation_hash(&self) -> String {
        let mut h = Sha256::new();
        hash_points(&mut h, &self.positives);
        hash_points(&mut h, &self.negatives);
        hex::encode(h.finalize())
    }

    pub fn fit(&self, method: &Method) -> Result<Predictor, crate::boundary::BoundaryError> {
        let frame = self.frame.frame_for(&self.frame_anchor);
        train_predictor(
            &self.train,
            method,
            frame,
            BoundaryMeta {
                cell_id: Some(self.cell_id.clone()),
                band: Some(self.band),
                mode: Some(self.mode),
                train_window: self.train_window.clone(),
            },
        )
    }

    pub fn evaluate(&self, predictor: &Predictor) -> ConfusionCounts {
        evaluate_band(predictor, &self.positives, &self.negatives)
    }
}

/// A (cell, band) pair that could not become a job.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedJob {
    pub cell_id: String,
    pub band: SignalBand,
    pub n_train: usize,
    pub reason: String,
}

fn window_of(ds: &Dataset) -> Option<TrainWindow> {
    ds.time_range().map(|(a, b)| TrainWindow {
        start: format_timestamp(&a),
        end: format_timestamp(&b),
    })
}

/// Builds one job per (cell, band) whose training set meets `min_points`.
pub fn build_jobs(train: &Dataset, validation: &Dataset, opts: &JobOptions) -> (Vec<EvalJob>, Vec<SkippedJob>) {
    let tp = partition(train, opts.min_points);
    let vp = partition(validation, opts.min_points);
    let window = window_of(train);
    let mut cells = tp.cells();
    cells.retain(|c| !c.is_empty());

    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    for cell in &cells {
        let anchor: Vec<PlanarPoint> = SignalBand::ALL
            .iter()
            .flat_map(|&b| tp.points(cell, b).iter().copied())
            .collect();
        for band in SignalBand::ALL {
            if tp.points(cell, band).is_empty() {
                continue;
            }
            let train_pts = tp.training_points(cell, band, opts.mode);
            if train_pts.len() < opts.min_points {
                skipped.push(SkippedJob {
                    cell_id: cell.clone(),
                    band,
                    n_train: train_pts.len(),
                    reason: format!("{} points below minimum {}", train_pts.len(), opts.min_points),
                });
                continue;
            }
            let positive_bands = opts.mode.bands_for(band);
            let positives: Vec<PlanarPoint> = positive_bands
                .iter()
                .flat_map(|&b| vp.points(cell, b).iter().copied())
                .collect();
            let mut negatives: Vec<PlanarPoint> = vp.no_service_of(cell).to_vec();
            if opts.negatives == NegativePolicy::NoServiceAndOtherBands {
                for other in SignalBand::ALL {
                    if !positive_bands.contains(&other) {
                        negatives.extend_from_slice(vp.points(cell, other));
                    }
                }
            }
            jobs.push(EvalJob {
                cell_id: cell.clone(),
                band,
                mode: opts.mode,
                frame: opts.frame,
                train: train_pts,
                frame_anchor: anchor.clone(),
                positives,
                negatives,
                train_window: window.clone(),
            });
        }
    }
    (jobs, skipped)
}

/// Candidate (nu, gamma) values; both strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nu_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nu_values: DEFAULT_NU_GRID.to_vec(),
            gamma_values: DEFAULT_GAMMA_GRID.to_vec(),
        }
    }
}

impl GridSpec {
    pub fn new(nu_values: Vec<f64>, gamma_values: Vec<f64>) -> Result<Self, EvalError> {
        let g = Self {
            nu_values,
            gamma_values,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if self.nu_values.is_empty() || self.gamma_values.is_empty() {
            return Err(EvalError::InvalidGrid("empty value list".into()));
        }
        if !increasing(&self.nu_values) || !increasing(&self.gamma_values) {
            return Err(EvalError::InvalidGrid("values must be strictly increasing".into()));
        }
        if self.nu_values.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
            return Err(EvalError::InvalidGrid("nu must lie in (0, 1]".into()));
        }
        if self.gamma_values.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(EvalError::InvalidGrid("gamma must be finite and positive".into()));
        }
        Ok(())
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.nu_values
            .iter()
            .flat_map(|&nu| self.gamma_values.iter().map(move |&g| (nu, g)))
            .collect()
    }
}

/// Solver settings shared by every grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub nu: f64,
    pub gamma: f64,
    /// Mean F1 over jobs with a defined score.
    pub mean_f1: Option<f64>,
    pub n_defined: usize,
    /// Per-job counts, aligned with the job slice; `None` if training failed.
    pub counts: Vec<Option<ConfusionCounts>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best_nu: f64,
    pub best_gamma: f64,
    pub best_f1: f64,
    /// Row-major over (nu, gamma).
    pub table: Vec<GridCell>,
}

impl GridResult {
    pub fn best_cell(&self) -> &GridCell {
        self.table
            .iter()
            .find(|c| c.nu == self.best_nu && c.gamma == self.best_gamma)
            .expect("best cell is in the table")
    }

    /// SHA-256 over the score table.
    pub fn table_hash(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.table {
            h.update(c.nu.to_bits().to_le_bytes());
            h.update(c.gamma.to_bits().to_le_bytes());
            h.update(c.mean_f1.map_or(u64::MAX, f64::to_bits).to_le_bytes());
            h.update((c.n_defined as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// `a` beats `b`: higher F1, then smaller nu, then smaller gamma.
fn better(a: &GridCell, b: &GridCell) -> bool {
    match (a.mean_f1, b.mean_f1) {
        (Some(_), None) => true,
        (None, _) => false,
        (Some(fa), Some(fb)) => {
            if fa != fb {
                fa > fb
            } else if a.nu != b.nu {
                a.nu < b.nu
            } else {
                a.gamma < b.gamma
            }
        }
    }
}

/// Exhaustive (nu, gamma) search scored by mean validation F1 across `jobs`.
pub fn grid_search(
    jobs: &[EvalJob],
    grid: &GridSpec,
    solver: SolverSettings,
) -> Result<GridResult, EvalError> {
    grid.validate()?;
    if jobs.is_empty() {
        return Err(EvalError::NoJobs);
    }
    let pairs = grid.pairs();
    let units: Vec<(usize, usize)> = (0..pairs.len())
        .flat_map(|p| (0..jobs.len()).map(move |j| (p, j)))
        .collect();
    let results: Vec<Option<ConfusionCounts>> = units
        .par_iter()
        .map(|&(p, j)| {
            let (nu, gamma) = pairs[p];
            let params = TrainParams::new(nu, gamma)
                .ok()?
                .with_tol(solver.tol)
                .with_max_iter(solver.max_iter);
            let predictor = jobs[j].fit(&Method::OcSvm(params)).ok()?;
            Some(jobs[j].evaluate(&predictor))
        })
        .collect();

    let table: Vec<GridCell> = pairs
        .iter()
        .enumerate()
        .map(|(p, &(nu, gamma))| {
            let counts = results[p * jobs.len()..(p + 1) * jobs.len()].to_vec();
            let scores: Vec<f64> = counts.iter().filter_map(|c| c.and_then(|c| c.f1())).collect();
            GridCell {
                nu,
                gamma,
                mean_f1: mean(&scores),
                n_defined: scores.len(),
                counts,
            }
        })
        .collect();

    let best = table
        .iter()
        .fold(None::<&GridCell>, |acc, c| match acc {
            Some(b) if !better(c, b) => Some(b),
            _ => Some(c),
        })
        .filter(|c| c.mean_f1.is_some())
        .ok_or(EvalError::AllUndefined)?;
    Ok(GridResult {
        best_nu: best.nu,
        best_gamma: best.gamma,
        best_f1: best.mean_f1.expect("filtered"),
        table: table.clone(),
    })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub cell_id: String,
    pub band: SignalBand,
    pub method: MethodTag,
    pub nu: Option<f64>,
    pub gamma: Option<f64>,
    pub counts: ConfusionCounts,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub train_hash: String,
    pub validation_hash: String,
}

impl EvalRow {
    fn new(job: &EvalJob, method: MethodTag, params: Option<(f64, f64)>, counts: ConfusionCounts) -> Self {
        EvalRow {
            cell_id: job.cell_id.clone(),
            band: job.band,
            method,
            nu: params.map(|p| p.0),
            gamma: params.map(|p| p.1),
            counts,
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            train_hash: job.train_hash(),
            validation_hash: job.validation_hash(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandSummary {
    pub band: SignalBand,
    pub hull_mean_f1: Option<f64>,
    pub ocsvm_mean_f1: Option<f64>,
    pub hull_cells: usize,
    pub ocsvm_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// One entry per band 1..=5.
    pub bands: Vec<BandSummary>,
    pub failures: Vec<String>,
    pub skipped: Vec<SkippedJob>,
}

pub const REPORT_CSV_HEADER: &str = "cell_id,band,method,nu,gamma,tp,fp,fn,tn,precision,recall,f1";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn band_range_label(b: SignalBand) -> String {
    match b.ordinal() {
        1 => "< -105".to_string(),
        5 => ">= -74".to_string(),
        _ => format!(">= {} up to {}", b.lower_dbm(), b.upper_dbm()),
    }
}

impl EvalReport {
    fn from_rows(rows: Vec<EvalRow>, failures: Vec<String>, skipped: Vec<SkippedJob>) -> Self {
        let bands = SignalBand::ALL
            .iter()
            .map(|&band| {
                let scores = |m: MethodTag| -> Vec<f64> {
                    rows.iter()
                        .filter(|r| r.band == band && r.method == m)
                        .filter_map(|r| r.f1)
                        .collect()
                };
                let (h, o) = (scores(MethodTag::Hull), scores(MethodTag::OcSvm));
                BandSummary {
                    band,
                    hull_mean_f1: mean(&h),
                    ocsvm_mean_f1: mean(&o),
                    hull_cells: h.len(),
                    ocsvm_cells: o.len(),
                }
            })
            .collect();
        EvalReport {
            rows,
            bands,
            failures,
            skipped,
        }
    }

    pub fn band(&self, band: SignalBand) -> &BandSummary {
        &self.bands[(band.ordinal() - 1) as usize]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let c = r.counts;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.cell_id,
                r.band,
                r.method,
                opt(r.nu),
                opt(r.gamma),
                c.tp,
                c.fp,
                c.fn_,
                c.tn,
                opt(r.precision),
                opt(r.recall),
                opt(r.f1)
            );
        }
        out
    }

    /// Per-band mean F1 table, one row per band.
    pub fn summary_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<36} {:<24} {:>12} {:>12}",
            "Category", "Signal Level (dBm)", "Convex Hull", "OC-SVM"
        );
        for s in &self.bands {
            let _ = writeln!(
                out,
                "{:<36} {:<24} {:>12} {:>12}",
                s.band.label(),
                band_range_label(s.band),
                fmt(s.hull_mean_f1),
                fmt(s.ocsvm_mean_f1)
            );
        }
        out
    }
}

/// Hull and grid-tuned OC-SVM on the same temporal split, per (cell, band).
pub fn compare_methods(
    dataset: &Dataset,
    split: DateTime<Utc>,
    grid: &GridSpec,
    opts: &JobOptions,
    solver: SolverSettings,
) -> Result<EvalReport, EvalError> {
    grid.validate()?;
    let (train, validation) = temporal_split(dataset, split);
    let (jobs, skipped) = build_jobs(&train, &validation, opts);
    Ok(compare_jobs(&jobs, grid, solver, skipped))
}

pub fn compare_jobs(
    jobs: &[EvalJob],
    grid: &GridSpec,
    solver: SolverSettings,
    skipped: Vec<SkippedJob>,
) -> EvalReport {
    let outcomes: Vec<(Vec<EvalRow>, Vec<String>)> = jobs
        .par_iter()
        .map(|job| {
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            let tag = format!("cell {} band {}", job.cell_id, job.band);
            match job.fit(&Method::Hull) {
                Ok(h) => rows.push(EvalRow::new(job, MethodTag::Hull, None, job.evaluate(&h))),
                Err(e) => failures.push(format!("{tag} hull: {e}")),
            }
            match grid_search(std::slice::from_ref(job), grid, solver) {
                Ok(g) => {
                    let counts = g.best_cell().counts[0].expect("best cell has a defined score");
                    rows.push(EvalRow::new(
                        job,
                        MethodTag::OcSvm,
                        Some((g.best_nu, g.best_gamma)),
                        counts,
                    ));
                }
                Err(e) => failures.push(format!("{tag} ocsvm: {e}")),
            }
            (rows, failures)
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in outcomes {
        rows.extend(r);
        failures.extend(f);
    }
    EvalReport::from_rows(rows, failures, skipped)
}

/// Mean F1 per band, keyed by band, for rows of one method.
pub fn band_means(rows: &[EvalRow], method: MethodTag) -> BTreeMap<SignalBand, f64> {
    let mut acc: BTreeMap<SignalBand, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == method) {
        if let Some(f) = r.f1 {
            acc.entry(r.band).or_default().push(f);
        }
    }
    acc.into_iter()
        .filter_map(|(b, v)| mean(&v).map(|m| (b, m)))
        .collect()
}
