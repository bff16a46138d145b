//! Subcommand bodies. Each returns the text it prints on stdout.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, TimeZone, Utc};
use covmap_core::boundary::geojson::{boundary_feature, feature_collection, FeatureOutcome};
use covmap_core::boundary::{build, BandBoundary, BuildConfig, CoverageModel, FrameChoice, Method, MethodTag, Predictor};
use covmap_core::evaluation::{
    build_jobs, compare_jobs, grid_search as search, EvalJob, GridResult, GridSpec, JobOptions, NegativePolicy,
    SolverSettings, DEFAULT_GAMMA_GRID, DEFAULT_NU_GRID,
};
use covmap_core::geometry::{BBox, PlanarPoint};
use covmap_core::measurements::{
    format_timestamp, partition, temporal_split, write_csv, Dataset, TrainingMode, DEFAULT_MIN_POINTS,
};
use covmap_core::ocsvm::{TrainParams, TrainWindow, DEFAULT_MAX_ITER, DEFAULT_TOL};
use covmap_core::synthgen::{generate_suite, replicate, Scenario, Shape, DEFAULT_GPS_NOISE_SIGMA};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{parse_list, Resolver};
use crate::error::CliError;
use crate::io::{create_dir, file_stem, load_inputs, load_predictors, write};
use crate::{DataArgs, ExportArgs, GridArgs, QueryArgs, SynthArgs, TrainArgs};

pub const DEFAULT_NU: f64 = 0.02;
pub const DEFAULT_GAMMA: f64 = 1e4;
pub const EFFECTIVE_CONFIG: &str = "effective_config.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Disk,
    Annulus,
    Crescent,
    MultiBlob,
}

impl FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disk" => Ok(Self::Disk),
            "annulus" => Ok(Self::Annulus),
            "crescent" => Ok(Self::Crescent),
            "multi_blob" | "multi-blob" => Ok(Self::MultiBlob),
            other => Err(format!("unknown shape `{other}`")),
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Disk => "disk",
            Self::Annulus => "annulus",
            Self::Crescent => "crescent",
            Self::MultiBlob => "multi_blob",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodName {
    OcSvm,
    Hull,
}

impl FromStr for MethodName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ocsvm" | "oc-svm" => Ok(Self::OcSvm),
            "hull" => Ok(Self::Hull),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag().as_str())
    }
}

impl MethodName {
    fn tag(self) -> MethodTag {
        match self {
            Self::OcSvm => MethodTag::OcSvm,
            Self::Hull => MethodTag::Hull,
        }
    }
}

fn frame_name(f: &FrameChoice) -> String {
    match f {
        FrameChoice::Degrees => "degrees".into(),
        FrameChoice::Projected => "projected".into(),
    }
}

fn negatives_name(n: &NegativePolicy) -> String {
    match n {
        NegativePolicy::NoServiceAndOtherBands => "no-service-and-other-bands".into(),
        NegativePolicy::NoServiceOnly => "no-service-only".into(),
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn warn_unused(r: &Resolver<'_>) {
    for k in r.unused_file_keys() {
        warn!("config key `{k}` is not used by this command");
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("--{} must be positive, got {v}", name.replace('_', "-"))))
    }
}

pub fn synth(a: SynthArgs, r: &mut Resolver<'_>) -> Result<String, CliError> {
    let kind: ShapeKind = r
        .opt("shape", a.shape)?
        .ok_or_else(|| usage("missing --shape (disk, annulus, crescent or multi_blob)"))?;
    let shape = match kind {
        ShapeKind::Disk => Shape::Disk {
            radius: r.get("radius", a.radius, 0.03)?,
        },
        ShapeKind::Annulus => Shape::Annulus {
            r_in: r.get("r_in", a.r_in, 0.01)?,
            r_out: r.get("r_out", a.r_out, 0.03)?,
        },
        ShapeKind::Crescent => Shape::Crescent {
            radius: r.get("radius", a.radius, 0.03)?,
            bite_radius: r.get("bite_radius", a.bite_radius, 0.018)?,
            offset: r.get("offset", a.offset, 0.015)?,
        },
        ShapeKind::MultiBlob => Shape::MultiBlob {
            k: r.get("blobs", a.blobs, 3)?,
            radius: r.get("radius", a.radius, 0.008)?,
            spread: r.get("spread", a.spread, 0.015)?,
        },
    };
    let center = PlanarPoint::new(
        r.get("center_lon", a.center_lon, 0.0)?,
        r.get("center_lat", a.center_lat, 51.5)?,
    );
    let seed = r.get("seed", a.seed, 1)?;
    let mut base = Scenario::new("cell-000", shape, center, seed);
    base.n_service = r.get("n_service", a.n_service, base.n_service)?;
    base.n_noservice = r.get("n_noservice", a.n_noservice, base.n_noservice)?;
    base.gps_noise_sigma = r.get("noise_sigma", a.noise_sigma, DEFAULT_GPS_NOISE_SIGMA)?;
    base.hole_fraction = r.get("hole_fraction", a.hole_fraction, base.hole_fraction)?;
    let fmt_t = |t: &DateTime<Utc>| format_timestamp(t);
    let parse_t = crate::config::parse_instant;
    base.start = r.get_with("start", a.start, base.start, parse_t, fmt_t)?;
    base.end = r.get_with("end", a.end, base.end, parse_t, fmt_t)?;
    let cells = r.get("cells", a.cells, 1usize)?;
    if cells == 0 {
        return Err(usage("--cells must be at least 1"));
    }
    let out = r.get_with("out", a.out, PathBuf::from("synth.csv"), |s| Ok(PathBuf::from(s)), |p| p.display().to_string())?;
    warn_unused(r);

    base.validate().map_err(usage)?;
    let scenarios = replicate(&base, cells);
    let dataset = generate_suite(&scenarios).map_err(usage)?;

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_csv(&dataset, &out).map_err(|e| CliError::io(out.display(), e))?;
    let sidecar = json!({
        "records": dataset.len(),
        "content_hash": dataset.content_hash(),
        "scenarios": scenarios,
    });
    let sidecar_path = out.with_extension("scenario.json");
    write(&sidecar_path, pretty(&sidecar)?)?;
    write(&out.with_extension("config.txt"), r.render())?;
    info!("wrote {} records for {} cells", dataset.len(), cells);
    Ok(format!(
        "wrote {} records ({} cells) to {}\nscenario sidecar {}\n",
        dataset.len(),
        cells,
        out.display(),
        sidecar_path.display()
    ))
}

fn pretty(v: &impl Serialize) -> Result<String, CliError> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Domain(format!("serialising output: {e}")))
}

/// Resolved options of the data-driven commands.
struct Data {
    dataset: Dataset,
    mode: TrainingMode,
    min_points: usize,
    frame: FrameChoice,
    split: Option<DateTime<Utc>>,
    solver: SolverSettings,
    out: PathBuf,
}

fn resolve_data(a: DataArgs, r: &mut Resolver<'_>, default_out: &str) -> Result<Data, CliError> {
    let inputs = r
        .opt_with("input", a.input, parse_list, |v: &Vec<PathBuf>| {
            v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",")
        })?
        .unwrap_or_default();
    let mode = r.get_with("mode", a.mode, TrainingMode::Partition, |s| s.parse(), |m| m.as_str().into())?;
    let min_points = r.get("min_points", a.min_points, DEFAULT_MIN_POINTS)?;
    let frame = r.get_with("coordinate_mode", a.frame, FrameChoice::Degrees, |s| s.parse(), frame_name)?;
    let split = r.instant("split", a.split)?;
    let tol = positive("tol", r.get("tol", a.tol, DEFAULT_TOL)?)?;
    let max_iter = r.get("max_iter", a.max_iter, DEFAULT_MAX_ITER)?;
    let out = r.get_with("out", a.out, PathBuf::from(default_out), |s| Ok(PathBuf::from(s)), |p| {
        p.display().to_string()
    })?;
    if min_points == 0 {
        return Err(usage("--min-points must be at least 1"));
    }
    let dataset = load_inputs(&inputs)?;
    Ok(Data {
        dataset,
        mode,
        min_points,
        frame,
        split,
        solver: SolverSettings { tol, max_iter },
        out,
    })
}

fn window(ds: &Dataset) -> Option<TrainWindow> {
    ds.time_range().map(|(a, b)| TrainWindow {
        start: format_timestamp(&a),
        end: format_timestamp(&b),
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestModel {
    pub cell_id: String,
    pub band: u8,
    pub method: MethodTag,
    pub file: String,
    pub n_train: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestSkip {
    pub cell_id: String,
    pub band: u8,
    pub n_points: usize,
    pub reason: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub records_accepted: usize,
    pub records_rejected: usize,
    pub records_deduplicated: usize,
    pub records_used: usize,
    pub models: Vec<ManifestModel>,
    pub skipped: Vec<ManifestSkip>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Parameters from a grid-search `best_params.json`.
fn params_file(path: &Path) -> Result<(f64, f64), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    match (v["best_nu"].as_f64(), v["best_gamma"].as_f64()) {
        (Some(nu), Some(gamma)) => Ok((nu, gamma)),
        _ => Err(usage(format!(
            "{} has no pooled best_nu/best_gamma; pass --nu and --gamma",
            path.display()
        ))),
    }
}

pub fn train(a: TrainArgs, r: &mut Resolver<'_>) -> Result<String, CliError> {
    let data = resolve_data(a.data, r, "models_out")?;
    let method_name = r.get("method", a.method, MethodName::OcSvm)?;
    let from_params = r
        .opt_with("params", a.params, |s| Ok(PathBuf::from(s)), |p| p.display().to_string())?
        .map(|p| params_file(&p))
        .transpose()?;
    let (def_nu, def_gamma) = from_params.unwrap_or((DEFAULT_NU, DEFAULT_GAMMA));
    let method = match method_name {
        MethodName::OcSvm => {
            let nu = r.get("nu", a.nu, def_nu)?;
            let gamma = r.get("gamma", a.gamma, def_gamma)?;
            let params = TrainParams::new(nu, gamma)
                .map_err(usage)?
                .with_tol(data.solver.tol)
                .with_max_iter(data.solver.max_iter);
            Method::OcSvm(params)
        }
        MethodName::Hull => Method::Hull,
    };
    warn_unused(r);

    let train_set = match data.split {
        Some(t) => temporal_split(&data.dataset, t).0,
        None => data.dataset.clone(),
    };
    if train_set.is_empty() {
        warn!("training side of the split is empty");
    }
    let parts = partition(&train_set, data.min_points);
    let config = BuildConfig {
        method,
        mode: data.mode,
        frame: data.frame,
        train_window: window(&train_set),
    };
    let outcomes: Vec<_> = parts
        .cells()
        .into_par_iter()
        .map(|cell| build(&cell, &parts, &config))
        .collect();

    let models_dir = data.out.join("models");
    create_dir(&models_dir)?;
    for entry in std::fs::read_dir(&models_dir).map_err(|e| CliError::io(models_dir.display(), e))? {
        let p = entry.map_err(|e| CliError::io(models_dir.display(), e))?.path();
        if p.extension().is_some_and(|x| x == "json") {
            std::fs::remove_file(&p).map_err(|e| CliError::io(p.display(), e))?;
        }
    }
    let mut models = Vec::new();
    let mut skipped = Vec::new();
    for o in &outcomes {
        for b in o.model.boundaries() {
            let name = format!("{}__band{}__{}.json", file_stem(&o.model.cell_id), b.band.ordinal(), b.method());
            let bytes = b.predictor.to_bytes();
            let path = models_dir.join(&name);
            if path.exists() {
                return Err(CliError::Domain(format!("two cells map to model file {name}")));
            }
            write(&path, &bytes)?;
            models.push(ManifestModel {
                cell_id: o.model.cell_id.clone(),
                band: b.band.ordinal(),
                method: b.method(),
                file: format!("models/{name}"),
                n_train: b.n_train(),
                sha256: sha256_hex(&bytes),
            });
        }
        skipped.extend(o.skipped.iter().map(|s| ManifestSkip {
            cell_id: s.cell_id.clone(),
            band: s.band.ordinal(),
            n_points: s.n_points,
            reason: s.reason.clone(),
        }));
    }
    for s in &skipped {
        warn!("cell {} band {} skipped: {}", s.cell_id, s.band, s.reason);
    }
    let prov = &data.dataset.provenance;
    let manifest = Manifest {
        records_accepted: prov.accepted,
        records_rejected: prov.rejected,
        records_deduplicated: prov.deduped,
        records_used: train_set.len(),
        models,
        skipped,
    };
    write(&data.out.join("manifest.json"), pretty(&manifest)?)?;
    write(&data.out.join(EFFECTIVE_CONFIG), r.render())?;
    if manifest.models.is_empty() {
        return Err(CliError::Domain("no trainable (cell, band) partitions".into()));
    }
    Ok(format!(
        "trained {} boundaries, skipped {}, output {}\n",
        manifest.models.len(),
        manifest.skipped.len(),
        data.out.display()
    ))
}

/// Grid, split and jobs for grid-search and compare.
struct Evaluation {
    data: Data,
    grid: GridSpec,
    split: DateTime<Utc>,
    jobs: Vec<EvalJob>,
    skipped: Vec<covmap_core::evaluation::SkippedJob>,
    per_cell: bool,
}

/// Midpoint of the dataset's time range, to the second.
fn default_split(ds: &Dataset) -> Result<DateTime<Utc>, CliError> {
    let (a, b) = ds
        .time_range()
        .ok_or_else(|| CliError::Domain("dataset has no records".into()))?;
    let mid = a.timestamp() + (b.timestamp() - a.timestamp()) / 2;
    Ok(Utc.timestamp_opt(mid, 0).single().expect("in range"))
}

fn resolve_evaluation(a: GridArgs, r: &mut Resolver<'_>, default_out: &str) -> Result<Evaluation, CliError> {
    let data = resolve_data(a.data, r, default_out)?;
    let nu = r.list("nu_grid", a.nu_grid, DEFAULT_NU_GRID.to_vec())?;
    let gamma = r.list("gamma_grid", a.gamma_grid, DEFAULT_GAMMA_GRID.to_vec())?;
    let grid = GridSpec::new(nu, gamma).map_err(usage)?;
    let negatives = r.get_with("negatives", a.negatives, NegativePolicy::default(), |s| s.parse(), negatives_name)?;
    let per_cell = r.flag("per_cell", a.per_cell)?;
    let split = match data.split {
        Some(t) => t,
        None => {
            let t = default_split(&data.dataset)?;
            r.derived("split", format_timestamp(&t));
            t
        }
    };
    warn_unused(r);
    let (train, validation) = temporal_split(&data.dataset, split);
    if train.is_empty() || validation.is_empty() {
        warn!("temporal split at {} leaves one side empty", format_timestamp(&split));
    }
    let opts = JobOptions {
        min_points: data.min_points,
        mode: data.mode,
        negatives,
        frame: data.frame,
    };
    let (jobs, skipped) = build_jobs(&train, &validation, &opts);
    for s in &skipped {
        warn!("cell {} band {} skipped: {}", s.cell_id, s.band, s.reason);
    }
    if jobs.is_empty() {
        return Err(CliError::Domain("no evaluable (cell, band) pairs".into()));
    }
    Ok(Evaluation {
        data,
        grid,
        split,
        jobs,
        skipped,
        per_cell,
    })
}

fn table_csv(out: &mut String, scope: &str, g: &GridResult) {
    for c in &g.table {
        let f1 = c.mean_f1.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{scope},{},{},{f1},{}", c.nu, c.gamma, c.n_defined);
    }
}

fn best_json(g: &GridResult) -> serde_json::Value {
    json!({
        "best_nu": g.best_nu,
        "best_gamma": g.best_gamma,
        "best_f1": g.best_f1,
        "table_hash": g.table_hash(),
    })
}

pub fn grid_search(a: GridArgs, r: &mut Resolver<'_>) -> Result<String, CliError> {
    let ev = resolve_evaluation(a, r, "grid_out")?;
    let mut table = String::from("scope,nu,gamma,mean_f1,n_defined\n");
    let mut stdout = String::new();
    let best = if ev.per_cell {
        let mut by_cell: BTreeMap<&str, Vec<EvalJob>> = BTreeMap::new();
        for j in &ev.jobs {
            by_cell.entry(j.cell_id.as_str()).or_default().push(j.clone());
        }
        let mut cells = Vec::new();
        for (cell, jobs) in by_cell {
            match search(&jobs, &ev.grid, ev.data.solver) {
                Ok(g) => {
                    table_csv(&mut table, cell, &g);
                    let _ = writeln!(stdout, "{cell}: nu={} gamma={} f1={:.6}", g.best_nu, g.best_gamma, g.best_f1);
                    let mut b = best_json(&g);
                    b["cell_id"] = json!(cell);
                    cells.push(b);
                }
                Err(e) => warn!("cell {cell}: {e}"),
            }
        }
        if cells.is_empty() {
            return Err(CliError::Domain("every cell has an undefined score on the whole grid".into()));
        }
        json!({ "scope": "per-cell", "split": format_timestamp(&ev.split), "cells": cells })
    } else {
        let g = search(&ev.jobs, &ev.grid, ev.data.solver).map_err(|e| CliError::Domain(e.to_string()))?;
        table_csv(&mut table, "pooled", &g);
        let _ = writeln!(stdout, "best nu={} gamma={} f1={:.6}", g.best_nu, g.best_gamma, g.best_f1);
        let _ = writeln!(stdout, "table hash {}", g.table_hash());
        let mut b = best_json(&g);
        b["scope"] = json!("pooled");
        b["split"] = json!(format_timestamp(&ev.split));
        b["n_jobs"] = json!(ev.jobs.len());
        b
    };
    write(&ev.data.out.join("grid_table.csv"), table)?;
    write(&ev.data.out.join("best_params.json"), pretty(&best)?)?;
    write(&ev.data.out.join(EFFECTIVE_CONFIG), r.render())?;
    Ok(stdout)
}

pub fn compare(a: GridArgs, r: &mut Resolver<'_>) -> Result<String, CliError> {
    let ev = resolve_evaluation(a, r, "compare_out")?;
    let report = compare_jobs(&ev.jobs, &ev.grid, ev.data.solver, ev.skipped);
    for f in &report.failures {
        warn!("{f}");
    }
    if report.rows.is_empty() {
        return Err(CliError::Domain("every (cell, band) evaluation failed".into()));
    }
    let mut text = report.summary_table();
    let _ = writeln!(text, "\nsplit {}", format_timestamp(&ev.split));
    let _ = writeln!(text, "evaluated (cell, band) pairs: {}", ev.jobs.len());
    for f in &report.failures {
        let _ = writeln!(text, "failure: {f}");
    }
    for s in &report.skipped {
        let _ = writeln!(text, "skipped: cell {} band {}: {}", s.cell_id, s.band, s.reason);
    }
    write(&ev.data.out.join("report.csv"), report.to_csv())?;
    write(&ev.data.out.join("report.txt"), &text)?;
    write(&ev.data.out.join(EFFECTIVE_CONFIG), r.render())?;
    Ok(text)
}

fn models_path(r: &mut Resolver<'_>, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
    r.opt_with("models", flag, |s| Ok(PathBuf::from(s)), |p| p.display().to_string())?
        .ok_or_else(|| usage("missing --models"))
}

fn boundary_of(p: Predictor) -> Option<(String, BandBoundary)> {
    let band = p.band()?;
    let cell = p.cell_id().unwrap_or_default().to_string();
    let mode = p.mode().unwrap_or_default();
    Some((
        cell,
        BandBoundary {
            band,
            predictor: p,
            mode,
        },
    ))
}

/// Box in the predictor's working frame covering a lon/lat box.
fn frame_bbox(b: &BBox, p: &Predictor) -> BBox {
    let f = p.coordinate_mode();
    let corners = [
        PlanarPoint::new(b.min_x, b.min_y),
        PlanarPoint::new(b.min_x, b.max_y),
        PlanarPoint::new(b.max_x, b.min_y),
        PlanarPoint::new(b.max_x, b.max_y),
    ]
    .map(|c| f.to_working(c));
    BBox::around(&corners).expect("four corners")
}

pub fn export(a: ExportArgs, r: &mut Resolver<'_>) -> Result<String, CliError> {
    let models = models_path(r, a.models)?;
    let bbox = r.opt_with("bbox", a.bbox, parse_list, |v: &Vec<f64>| {
        v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
    })?;
    let bbox = match bbox.as_deref() {
        None => None,
        Some(&[x0, y0, x1, y1]) if x0 < x1 && y0 < y1 => Some(BBox::new(x0, y0, x1, y1)),
        Some(_) => return Err(usage("--bbox takes min_lon,min_lat,max_lon,max_lat with min < max")),
    };
    let resolution = r.get("resolution", a.resolution, covmap_core::boundary::contour::DEFAULT_RESOLUTION)?;
    if resolution < covmap_core::boundary::contour::MIN_RESOLUTION {
        return Err(usage(format!(
            "--resolution must be at least {}",
            covmap_core::boundary::contour::MIN_RESOLUTION
        )));
    }
    let out = r.get_with("out", a.out, PathBuf::from("boundaries.geojson"), |s| Ok(PathBuf::from(s)), |p| {
        p.display().to_string()
    })?;
    warn_unused(r);

    let mut boundaries: Vec<(String, BandBoundary, PathBuf)> = Vec::new();
    for (file, p) in load_predictors(&models)? {
        match boundary_of(p) {
            Some((cell, b)) => boundaries.push((cell, b, file)),
            None => warn!("{}: no band recorded, omitted", file.display()),
        }
    }
    boundaries.sort_by(|x, y| (&x.0, x.1.band, x.1.method()).cmp(&(&y.0, y.1.band, y.1.method())));
    let rendered: Vec<Result<FeatureOutcome, CliError>> = boundaries
        .par_iter()
        .map(|(cell, b, _)| {
            let frame_box = bbox.map(|bb| frame_bbox(&bb, &b.predictor));
            boundary_feature(cell, b, frame_box, resolution).map_err(usage)
        })
        .collect();
    let mut features = Vec::new();
    let mut omitted = 0;
    for ((_, _, file), outcome) in boundaries.iter().zip(rendered) {
        match outcome? {
            FeatureOutcome::Feature(f) => features.push(f),
            FeatureOutcome::Degenerate(why) => {
                omitted += 1;
                warn!("{}: degenerate contour ({why}), feature omitted", file.display());
            }
        }
    }
    let n = features.len();
    write(&out, pretty(&feature_collection(features))?)?;
    write(&out.with_extension("config.txt"), r.render())?;
    Ok(format!("exported {n} features ({omitted} omitted) to {}\n", out.display()))
}

pub fn query(a: QueryArgs, r: &mut Resolver<'_>) -> Result<String, CliError> {
    let models = models_path(r, a.models)?;
    let lon = r.opt("lon", a.lon)?.ok_or_else(|| usage("missing --lon"))?;
    let lat = r.opt("lat", a.lat)?.ok_or_else(|| usage("missing --lat"))?;
    let cell_filter = r.opt("cell", a.cell)?;
    let method = r.opt("method", a.method)?;
    warn_unused(r);
    if !(lon.is_finite() && lat.is_finite() && (-180.0..=180.0).contains(&lon) && (-90.0..=90.0).contains(&lat)) {
        return Err(usage(format!("malformed coordinates lon={lon} lat={lat}")));
    }

    let mut by_cell: BTreeMap<String, Vec<Predictor>> = BTreeMap::new();
    for (file, p) in load_predictors(&models)? {
        if method.is_some_and(|m| m.tag() != p.method()) {
            continue;
        }
        let cell = p.cell_id().unwrap_or_default().to_string();
        if cell_filter.as_ref().is_some_and(|c| *c != cell) {
            continue;
        }
        if p.band().is_none() {
            warn!("{}: no band recorded, ignored", file.display());
            continue;
        }
        by_cell.entry(cell).or_default().push(p);
    }
    if by_cell.is_empty() {
        return Err(CliError::Domain("no models match the query".into()));
    }
    let point = PlanarPoint::new(lon, lat);
    let mut best = None;
    for (cell, preds) in by_cell {
        let model = CoverageModel::from_predictors(&cell, preds).map_err(|e| {
            CliError::Domain(format!("{e}; restrict with --method or --cell"))
        })?;
        best = best.max(model.highest_band_at(point));
    }
    Ok(match best {
        Some(b) => format!("{}\n", b.label()),
        None => "none\n".to_string(),
    })
}
