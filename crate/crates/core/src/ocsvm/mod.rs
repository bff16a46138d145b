//! One-class SVM with an RBF kernel.
//!
//! Training solves the dual with a two-coordinate SMO ([`solver`]), keeps
//! only points with non-zero weight, and yields the decision function
//! `f(p) = sum_i alpha_i K(sv_i, p) - rho`. Points with `f(p) >= 0` are
//! inside the learned support.

mod kernel;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CoordinateMode, PlanarPoint};
use crate::measurements::{SignalBand, TrainingMode};

pub use kernel::{rbf_kernel, KernelParams, FULL_MATRIX_LIMIT};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("nu must lie in (0, 1], got {0}")]
    InvalidNu(f64),
    #[error("gamma must be finite and positive, got {0}")]
    InvalidGamma(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("training point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error(
        "no convergence after {iterations} iterations (gap {gap:.3e}, objective {objective:.6e})"
    )]
    NotConverged {
        iterations: usize,
        gap: f64,
        objective: f64,
    },
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("unsupported model version {found} (expected {MODEL_FORMAT_VERSION})")]
    VersionMismatch { found: String },
    #[error("corrupt model payload: {0}")]
    Corrupt(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub nu: f64,
    pub kernel: KernelParams,
    /// KKT tolerance on the maximal violating pair.
    pub tol: f64,
    /// Cap in passes; one pass is `n` working-pair updates.
    pub max_iter: usize,
}

impl TrainParams {
    pub fn new(nu: f64, gamma: f64) -> Result<Self, TrainError> {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(TrainError::InvalidNu(nu));
        }
        let kernel = KernelParams::new(gamma).ok_or(TrainError::InvalidGamma(gamma))?;
        Ok(Self {
            nu,
            kernel,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.kernel.gamma
    }

    fn validate(&self) -> Result<(), TrainError> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(TrainError::InvalidNu(self.nu));
        }
        if KernelParams::new(self.kernel.gamma).is_none() {
            return Err(TrainError::InvalidGamma(self.kernel.gamma));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(TrainError::InvalidTolerance(self.tol));
        }
        Ok(())
    }
}

/// Time span of the training records, RFC 3339 strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainWindow {
    pub start: String,
    pub end: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    Covered,
    NotCovered,
}

/// Solver statistics from one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainDiagnostics {
    pub iterations: usize,
    /// Final maximal violating-pair gap.
    pub gap: f64,
    /// Decision values at every training point, in input order.
    pub training_decisions: Vec<f64>,
    /// Dual weights for every training point, in input order (zeros kept).
    pub alphas: Vec<f64>,
    pub upper_bound: f64,
}

impl TrainDiagnostics {
    /// Largest KKT violation measured on the training decision values.
    pub fn max_kkt_violation(&self) -> f64 {
        self.alphas
            .iter()
            .zip(&self.training_decisions)
            .map(|(&a, &f)| {
                if a <= 0.0 {
                    (-f).max(0.0)
                } else if a >= self.upper_bound {
                    f.max(0.0)
                } else {
                    f.abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// A trained boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct OcSvmModel {
    support_vectors: Vec<PlanarPoint>,
    alphas: Vec<f64>,
    rho: f64,
    nu: f64,
    gamma: f64,
    n_train: usize,
    pub coordinate_mode: CoordinateMode,
    pub cell_id: Option<String>,
    pub band: Option<SignalBand>,
    pub mode: Option<TrainingMode>,
    pub train_window: Option<TrainWindow>,
}

/// Trains on points already in the working frame.
pub fn train(points: &[PlanarPoint], params: &TrainParams) -> Result<OcSvmModel, TrainError> {
    train_with_diagnostics(points, params).map(|(m, _)| m)
}

pub fn train_with_diagnostics(
    points: &[PlanarPoint],
    params: &TrainParams,
) -> Result<(OcSvmModel, TrainDiagnostics), TrainError> {
    params.validate()?;
    if points.is_empty() {
        return Err(TrainError::Infeasible("no training points".into()));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(TrainError::NonFinite(i));
    }
    let sol = solver::solve(
        points,
        params.nu,
        params.kernel.gamma,
        params.tol,
        params.max_iter,
    )
    .map_err(|s| TrainError::NotConverged {
        iterations: s.iterations,
        gap: s.gap,
        objective: s.objective,
    })?;

    let (support_vectors, alphas): (Vec<_>, Vec<_>) = points
        .iter()
        .zip(&sol.alpha)
        .filter(|(_, &a)| a > 0.0)
        .map(|(&p, &a)| (p, a))
        .unzip();
    let model = OcSvmModel {
        support_vectors,
        alphas,
        rho: sol.rho,
        nu: params.nu,
        gamma: params.kernel.gamma,
        n_train: points.len(),
        coordinate_mode: CoordinateMode::Degrees,
        cell_id: None,
        band: None,
        mode: None,
        train_window: None,
    };
    let diagnostics = TrainDiagnostics {
        iterations: sol.iterations,
        gap: sol.gap,
        training_decisions: sol.gradient.iter().map(|g| g - sol.rho).collect(),
        alphas: sol.alpha,
        upper_bound: sol.upper,
    };
    Ok((model, diagnostics))
}

impl OcSvmModel {
    pub fn support_vectors(&self) -> &[PlanarPoint] {
        &self.support_vectors
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    /// Box bound on every dual weight, `1 / (nu * n_train)`.
    pub fn upper_bound(&self) -> f64 {
        1.0 / (self.nu * self.n_train as f64)
    }

    /// `f(p)` for `p` in the working frame.
    pub fn decision_value(&self, p: PlanarPoint) -> f64 {
        let s: f64 = self
            .support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(&sv, &a)| a * rbf_kernel(sv, p, self.gamma))
            .sum();
        s - self.rho
    }

    /// `f` at a lon/lat point, projected into the model frame first.
    pub fn decision_value_lonlat(&self, lonlat: PlanarPoint) -> f64 {
        self.decision_value(self.coordinate_mode.to_working(lonlat))
    }

    pub fn predict(&self, p: PlanarPoint) -> Prediction {
        if self.decision_value(p) >= 0.0 {
            Prediction::Covered
        } else {
            Prediction::NotCovered
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serialises")
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_json().into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelIoError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
        check_version(&value)?;
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), ModelIoError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ModelIoError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Rejects any `version` other than [`MODEL_FORMAT_VERSION`].
pub fn check_version(value: &serde_json::Value) -> Result<(), ModelIoError> {
    match value.get("version") {
        Some(v) if v.as_u64() == Some(MODEL_FORMAT_VERSION as u64) => Ok(()),
        Some(v) => Err(ModelIoError::VersionMismatch {
            found: v.to_string(),
        }),
        None => Err(ModelIoError::Corrupt("missing `version`".into())),
    }
}

/// On-disk layout of a trained model.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    cell_id: Option<String>,
    band: Option<SignalBand>,
    #[serde(default)]
    mode: Option<TrainingMode>,
    nu: f64,
    gamma: f64,
    rho: f64,
    coordinate_mode: CoordinateMode,
    support_vectors: Vec<[f64; 2]>,
    alphas: Vec<f64>,
    n_train: usize,
    train_window: Option<TrainWindow>,
}

impl From<&OcSvmModel> for ModelFile {
    fn from(m: &OcSvmModel) -> Self {
        ModelFile {
            version: MODEL_FORMAT_VERSION,
            cell_id: m.cell_id.clone(),
            band: m.band,
            mode: m.mode,
            nu: m.nu,
            gamma: m.gamma,
            rho: m.rho,
            coordinate_mode: m.coordinate_mode,
            support_vectors: m.support_vectors.iter().map(|&p| p.into()).collect(),
            alphas: m.alphas.clone(),
            n_train: m.n_train,
            train_window: m.train_window.clone(),
        }
    }
}

impl TryFrom<ModelFile> for OcSvmModel {
    type Error = ModelIoError;

    fn try_from(f: ModelFile) -> Result<Self, Self::Error> {
        let corrupt = |msg: &str| Err(ModelIoError::Corrupt(msg.to_string()));
        if f.support_vectors.is_empty() {
            return corrupt("no support vectors");
        }
        if f.support_vectors.len() != f.alphas.len() {
            return corrupt("support vector and alpha counts differ");
        }
        if f.n_train < f.alphas.len() {
            return corrupt("n_train smaller than support vector count");
        }
        let finite = f.rho.is_finite()
            && f.alphas.iter().all(|a| a.is_finite() && *a > 0.0)
            && f.support_vectors.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return corrupt("non-finite or non-positive coefficient");
        }
        if !(f.nu > 0.0 && f.nu <= 1.0) || KernelParams::new(f.gamma).is_none() {
            return corrupt("nu or gamma out of range");
        }
        Ok(OcSvmModel {
            support_vectors: f.support_vectors.into_iter().map(Into::into).collect(),
            alphas: f.alphas,
            rho: f.rho,
            nu: f.nu,
            gamma: f.gamma,
            n_train: f.n_train,
            coordinate_mode: f.coordinate_mode,
            cell_id: f.cell_id,
            band: f.band,
            mode: f.mode,
            train_window: f.train_window,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster_with_outlier() -> Vec<PlanarPoint> {
        let mut pts: Vec<PlanarPoint> = (0..20)
            .map(|i| {
                let t = i as f64 * 0.7;
                PlanarPoint::new(0.1 * t.cos() * (1.0 + 0.3 * (i % 3) as f64), 0.1 * t.sin())
            })
            .collect();
        pts.push(PlanarPoint::new(3.0, 3.0));
        pts
    }

    #[test]
    fn rejects_bad_params() {
        assert_eq!(TrainParams::new(0.0, 1.0), Err(TrainError::InvalidNu(0.0)));
        assert_eq!(TrainParams::new(1.5, 1.0), Err(TrainError::InvalidNu(1.5)));
        assert_eq!(
            TrainParams::new(0.5, -1.0),
            Err(TrainError::InvalidGamma(-1.0))
        );
        let p = TrainParams::new(0.5, 1.0).unwrap().with_tol(0.0);
        assert_eq!(
            train(&[PlanarPoint::new(0.0, 0.0)], &p),
            Err(TrainError::InvalidTolerance(0.0))
        );
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        let p = TrainParams::new(0.5, 1.0).unwrap();
        assert!(matches!(train(&[], &p), Err(TrainError::Infeasible(_))));
        let pts = [PlanarPoint::new(0.0, 0.0), PlanarPoint::new(f64::NAN, 0.0)];
        assert_eq!(train(&pts, &p), Err(TrainError::NonFinite(1)));
    }

    #[test]
    fn single_point_model() {
        let x = PlanarPoint::new(-1.2, 51.7);
        let m = train(&[x], &TrainParams::new(0.5, 1e4).unwrap()).unwrap();
        assert_eq!(m.alphas(), &[1.0]);
        assert_eq!(m.rho(), 1.0);
        assert_eq!(m.decision_value(x), 0.0);
        assert_eq!(m.predict(x), Prediction::Covered);
        let far = PlanarPoint::new(10.0, 10.0);
        assert!((m.decision_value(far) + 1.0).abs() < 1e-12);
        assert_eq!(m.predict(far), Prediction::NotCovered);
    }

    #[test]
    fn two_identical_points() {
        let x = PlanarPoint::new(0.5, 0.5);
        let m = train(&[x, x], &TrainParams::new(0.5, 2.0).unwrap()).unwrap();
        assert_eq!(m.alphas(), &[0.5, 0.5]);
        assert_eq!(m.rho(), 1.0);
        assert_eq!(m.decision_value(x), 0.0);
    }

    #[test]
    fn isolated_outlier_not_covered() {
        let pts = cluster_with_outlier();
        let m = train(&pts, &TrainParams::new(0.3, 5.0).unwrap()).unwrap();
        assert_eq!(m.predict(pts[20]), Prediction::NotCovered);
        assert_eq!(m.predict(PlanarPoint::new(0.0, 0.0)), Prediction::Covered);
    }

    #[test]
    fn invariants_hold_after_training() {
        let pts = cluster_with_outlier();
        let params = TrainParams::new(0.2, 10.0).unwrap();
        let (m, d) = train_with_diagnostics(&pts, &params).unwrap();
        let sum: f64 = m.alphas().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-8);
        for &a in m.alphas() {
            assert!(a > 0.0 && a <= m.upper_bound() + 1e-10);
        }
        assert!(d.max_kkt_violation() <= params.tol);
        for (p, f) in pts.iter().zip(&d.training_decisions) {
            assert!((m.decision_value(*p) - f).abs() < 1e-12);
        }
        // decision values never exceed 1 - rho
        for i in 0..50 {
            let p = PlanarPoint::new(-0.2 + 0.01 * i as f64, 0.0);
            assert!(m.decision_value(p) <= 1.0 - m.rho() + 1e-12);
        }
    }

    #[test]
    fn serialisation_is_lossless() {
        let pts = cluster_with_outlier();
        let mut m = train(&pts, &TrainParams::new(0.3, 7.3).unwrap()).unwrap();
        m.cell_id = Some("cell-1".into());
        m.band = SignalBand::new(3);
        m.train_window = Some(TrainWindow {
            start: "2024-01-01T00:00:00Z".into(),
            end: "2024-01-31T00:00:00Z".into(),
        });
        m.coordinate_mode = CoordinateMode::Projected {
            origin_lon: -0.123456789,
            origin_lat: 51.5,
        };
        let back = OcSvmModel::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        for i in 0..40 {
            let p = PlanarPoint::new(-0.3 + 0.017 * i as f64, 0.2 - 0.011 * i as f64);
            assert_eq!(
                back.decision_value(p).to_bits(),
                m.decision_value(p).to_bits()
            );
        }
    }

    #[test]
    fn truncated_payload_is_corrupt() {
        let m = train(&cluster_with_outlier(), &TrainParams::new(0.3, 5.0).unwrap()).unwrap();
        let bytes = m.to_bytes();
        let err = OcSvmModel::from_bytes(&bytes[..bytes.len() / 2]).unwrap_err();
        assert!(matches!(err, ModelIoError::Corrupt(_)), "{err}");
    }

    #[test]
    fn version_zero_is_rejected() {
        let fixture = r#"{"version": 0, "cell_id": null, "band": null, "nu": 0.5,
            "gamma": 1.0, "rho": 1.0, "coordinate_mode": "degrees",
            "support_vectors": [[0.0, 0.0]], "alphas": [1.0], "n_train": 1,
            "train_window": null}"#;
        let err = OcSvmModel::from_bytes(fixture.as_bytes()).unwrap_err();
        assert!(matches!(err, ModelIoError::VersionMismatch { ref found } if found == "0"));
        let ok = fixture.replace("\"version\": 0", "\"version\": 1");
        assert!(OcSvmModel::from_bytes(ok.as_bytes()).is_ok());
    }

    #[test]
    fn inconsistent_payload_is_corrupt() {
        let fixture = r#"{"version": 1, "cell_id": null, "band": null, "nu": 0.5,
            "gamma": 1.0, "rho": 1.0, "coordinate_mode": "degrees",
            "support_vectors": [[0.0, 0.0]], "alphas": [0.5, 0.5], "n_train": 2,
            "train_window": null}"#;
        assert!(matches!(
            OcSvmModel::from_bytes(fixture.as_bytes()),
            Err(ModelIoError::Corrupt(_))
        ));
    }
}
