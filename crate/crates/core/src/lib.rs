//! Analytical performance models of dense linear algebra on distributed
//! machines, driven by a calibrated machine profile.
//!
//! Communication is priced with a latency/bandwidth model scaled by
//! measured contention factors; local kernels by interpolated efficiency
//! curves. On top of those, [`algomodel`] predicts Cannon's matrix multiply
//! and a block-cyclic triangular solve in 2D and 2.5D form, and [`oracle`]
//! walks the same schedules step by step.

pub mod algomodel;
pub mod commodel;
pub mod compmodel;
pub mod error;
pub mod fmt;
pub mod oracle;
pub mod profile;
pub mod rank;

pub use algomodel::{predict, Algorithm, ModelOptions, Prediction, Scenario, Variant};
pub use error::{Error, Result};
pub use profile::{gen_synthetic_profile, MachineProfile, SyntheticParams};
