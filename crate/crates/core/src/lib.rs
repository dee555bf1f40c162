//! Hierarchy-aware multi-label classification with uncertain labels.
//!
//! The crate covers the full loop on feature-vector data:
//!
//! - [`hierarchy`]: label forests and chain-rule propagation of conditional
//!   probabilities.
//! - [`policy`]: uncertainty policies (`ignore`, `ones`, `zeros` and the
//!   label-smoothed `ones-lsr` / `zeros-lsr`).
//! - [`data`]: CheXpert-style label CSVs, majority voting, conditional
//!   masks, and a synthetic hierarchical generator with exact marginals.
//! - [`model`]: a small ReLU/sigmoid MLP with masked cross-entropy,
//!   backpropagation, Adam, and layer freezing.
//! - [`pipeline`]: two-stage conditional training, the flat baseline, and
//!   ensembles.
//! - [`eval`]: ROC curves, AUC, and reader-study comparison.
//! - [`cli`]: config-driven `gen` / `train` / `predict` / `eval` runs.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod grid;
pub mod hierarchy;
pub mod model;
pub mod pipeline;
pub mod policy;
pub mod rng;

pub use data::{Dataset, Label, LabelMatrix, SyntheticSpec};
pub use error::{Error, Result};
pub use eval::{EvalReport, OperatingPoint, RocCurve};
pub use grid::Grid;
pub use hierarchy::{LabelTree, NodeSpec};
pub use model::{AdamState, Mlp, OptimizerConfig};
pub use pipeline::{EnsembleModel, Mode, TrainPlan};
pub use policy::{LossMask, PolicyKind, SoftTargets, UncertaintyPolicy};
