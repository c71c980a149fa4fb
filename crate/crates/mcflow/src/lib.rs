//! Level-set mean curvature flow on uniform grids, with an arrival-time
//! analysis toolkit.
//!
//! A mean-convex front evolved by mean curvature sweeps the region it bounds
//! exactly once, so the first-passage time of each grid node assembles into
//! an arrival-time field `u`. This crate evolves the flow, extracts `u`,
//! probes its derivatives, and examines the critical set: where the Hessian
//! takes the cylindrical form, which stratum each critical point belongs to,
//! whether the singular set forms a single closed manifold at a single time,
//! and hence whether the evidence is consistent with a twice continuously
//! differentiable arrival time.
//!
//! Start with [`scenarios`] for canonical initial surfaces, [`evolve`] to run
//! the flow, and [`analyze`] for the singular-set report. The `examples/`
//! directory walks through each capability; the `mcflow` binary wraps the
//! same pipeline behind `run` / `analyze` / `export` / `verify` subcommands.

pub mod analyze;
pub mod arrival;
pub mod config;
pub mod error;
pub mod evolve;
pub mod field;
pub mod mcaf;
pub mod ops;
pub mod pipeline;
pub mod report;
pub mod scenarios;
pub mod symmetric;
pub mod verify;

pub use analyze::{AnalyzerParams, CriticalPoint, SingularSetReport, Verdict};
pub use arrival::ArrivalField;
pub use error::{Error, Result};
pub use evolve::{evolve, EvolveParams};
pub use field::{sample_implicit, FieldLabel, GridSpec, Idx, ScalarField};
pub use symmetric::SymmetricMatrix;
