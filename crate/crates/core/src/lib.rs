//! Rhaly operators `(R_θ x)_n = θ_n Σ_{j≤n} x_j` on Köthe sequence spaces.
//!
//! Everything runs at a finite truncation ([`TruncationPolicy`]) and answers
//! with a three-valued [`Verdict`]: closed-form sequence families get analytic
//! tail bounds and therefore sound certificates, opaque data gets
//! `Inconclusive` with trend diagnostics.

pub mod criteria;
pub mod dynamics;
pub mod error;
pub mod holomorphic;
pub mod koethe;
pub mod profile;
pub mod report;
pub mod rhaly;

pub use error::{Error, Result};
pub use koethe::*;
pub use report::{emit, run, run_sweep, Format, Report, RunConfig, Status};
pub use rhaly::{CesaroMeanState, RhalyOperator};
