//! Coverage boundary estimation from crowdsourced signal measurements.
//!
//! Measurements are partitioned per cell and signal band, and each band's
//! service area is learnt either as a one-class SVM decision region or as
//! a convex hull baseline.

pub mod boundary;
pub mod evaluation;
pub mod geometry;
pub mod measurements;
pub mod ocsvm;
pub mod synthgen;
