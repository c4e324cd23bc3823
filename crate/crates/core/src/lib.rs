//! Dynamic geometric summaries under adversarial updates.
//!
//! The crate maintains two summaries of a fully dynamic point set in R^d:
//! a 2-approximate diameter / minimum-enclosing-ball radius, and a
//! (4+eps)-approximate k-center clustering. Both stay valid against
//! adversaries that adapt to answers — and even to internal randomness —
//! because every answer is anchored at robust representatives (centerpoints
//! and density-sampled centers) that tolerate a constant fraction of
//! adversarial deletions before they must be replaced.
//!
//! Layering, bottom up:
//! - [`scalar`], [`geometry`]: coordinate substrate, Radon partitions.
//! - [`centerpoint`]: resumable iterated-Radon centerpoint builds.
//! - [`diameter`]: dynamic diameter/MEB engine, amortized or de-amortized.
//! - [`kcenter`]: dynamic k-center engine over a ladder of radius guesses.
//! - [`oracles`]: slow exact references used only by tests and the harness.
//! - [`harness`]: update streams, adversaries, metrics, experiment driver.

pub mod centerpoint;
pub mod diameter;
pub mod harness;
pub mod geometry;
pub mod kcenter;
pub mod oracles;
pub mod scalar;

pub use geometry::{dist, Point, PointId, PointSet};
pub use scalar::Real;
