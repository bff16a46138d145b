//! Slow, independent reference implementations used to check the fast
//! paths in `covmap-core`. Nothing here shares code with the core crate.

pub mod hull;
pub mod qp;
