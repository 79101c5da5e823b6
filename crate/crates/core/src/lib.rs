//! Cost-optimal single-qubit gate synthesis over Clifford gates and
//! higher-order Clifford-hierarchy Z-rotations with individually assigned
//! costs.
//!
//! The pipeline:
//!
//! 1. [`gates`] and [`cost`] define the base gates and what each one costs.
//! 2. [`seqdb`] generates every cost-optimal sequence with a distinct
//!    combined gate up to a cost watermark, and can grow it later.
//! 3. [`index`] keeps the accepted gates in a k-d tree over their generator
//!    vectors.
//! 4. [`synth`] finds the cheapest sequence within a trace distance of a
//!    target, growing the database when nothing qualifies.
//! 5. [`experiment`] and [`stats`] run batch studies of mean cost against
//!    precision and fit the scaling.
//! 6. [`proportion`] predicts how often each hierarchy order should appear
//!    in optimal sequences, and measures it in synthesis output.

pub mod cost;
pub mod experiment;
pub mod gates;
pub mod index;
pub mod proportion;
pub mod psu2;
pub mod seqdb;
pub mod stats;
pub mod synth;

pub use cost::{CostError, CostModel, CostModelSpec};
pub use experiment::{ExperimentSpec, ExperimentTable};
pub use gates::{BaseGate, GateSet, GateSetSpec};
pub use index::SpatialIndex;
pub use proportion::{ModelError, ProportionParams, ProportionResult};
pub use psu2::{GateElement, PauliVector};
pub use seqdb::{DbError, SequenceDatabase};
pub use stats::{FitResult, Reduction};
pub use synth::{GrowthPolicy, SynthError, SynthesisResult};
