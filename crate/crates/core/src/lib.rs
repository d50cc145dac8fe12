//! Constructive improvement of flatness for minimal surfaces. An explicit
//! constant ledger in log space feeds a pipeline that linearizes a flat
//! minimal graph and checks every intermediate inequality numerically.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelope;
pub mod geometry;
pub mod grid;
pub mod harmonic;
pub mod hp;
pub mod ledger;
pub mod mse;
pub mod pipeline;
pub mod scalar;
mod sparse;

pub use envelope::{MultiGraph, Sample, SurfaceSamples};
pub use grid::{Grid, GridFunction};
pub use hp::{Hp, LogReal};
pub use ledger::{ConstantLedger, Constants, HarnackParams};
pub use pipeline::{FlatnessCertificate, PipelineOptions, Surface};
pub use scalar::Scalar;

/// Grid over `f64`.
pub type Grid64 = Grid<f64>;
/// Grid function over `f64`.
pub type GridFunction64 = GridFunction<f64>;
/// Grid function over `f32`.
pub type GridFunction32 = GridFunction<f32>;
/// Ledger evaluated at the configured decimal precision.
pub type HpLedger = ConstantLedger<Hp>;
/// Ledger evaluated in `f64`.
pub type Ledger64 = ConstantLedger<f64>;
