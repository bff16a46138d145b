//! File plumbing shared by the subcommands.

use std::path::{Path, PathBuf};

use covmap_core::boundary::Predictor;
use covmap_core::measurements::{parse_csv, Dataset, IngestConfig, Provenance};
use log::{info, warn};

use crate::error::CliError;

/// Reads and merges measurement files in the given order.
pub fn load_inputs(paths: &[PathBuf]) -> Result<Dataset, CliError> {
    if paths.is_empty() {
        return Err(CliError::Usage("no input file given (--input)".into()));
    }
    let mut records = Vec::new();
    let mut prov = Provenance::default();
    let mut sources = Vec::new();
    for p in paths {
        if !p.is_file() {
            return Err(CliError::Usage(format!("input {} does not exist", p.display())));
        }
        let ds = parse_csv(p, &IngestConfig::default()).map_err(|e| CliError::io(p.display(), e))?;
        info!(
            "{}: {} accepted, {} rejected, {} duplicates",
            p.display(),
            ds.provenance.accepted,
            ds.provenance.rejected,
            ds.provenance.deduped
        );
        if ds.provenance.rejected > 0 {
            warn!("{}: {} rows rejected", p.display(), ds.provenance.rejected);
        }
        sources.push(ds.provenance.source.clone());
        prov.accepted += ds.provenance.accepted;
        prov.rejected += ds.provenance.rejected;
        prov.deduped += ds.provenance.deduped;
        prov.row_errors.extend(ds.provenance.row_errors.iter().cloned());
        records.extend_from_slice(ds.records());
    }
    prov.source = sources.join(";");
    Ok(Dataset::from_records(records, prov))
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

/// Cell id reduced to characters safe in file names.
pub fn file_stem(cell: &str) -> String {
    let s: String = cell
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '.') { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

/// The directory holding model files: `path/models` when it exists,
/// else `path` itself.
pub fn models_dir(path: &Path) -> PathBuf {
    let nested = path.join("models");
    if nested.is_dir() {
        nested
    } else {
        path.to_path_buf()
    }
}

/// Every `*.json` model under `path`, sorted by file name.
pub fn load_predictors(path: &Path) -> Result<Vec<(PathBuf, Predictor)>, CliError> {
    let dir = models_dir(path);
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("model directory {} does not exist", dir.display())));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| CliError::io(dir.display(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.is_file())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let p = Predictor::load(&f).map_err(|e| CliError::Domain(format!("{}: {e}", f.display())))?;
            Ok((f, p))
        })
        .collect()
}
