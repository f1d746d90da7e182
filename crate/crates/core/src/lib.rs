//! CHSH statistics of optomechanically generated photon pairs.
//!
//! A blue-detuned pulse creates photon-phonon pairs, a red-detuned pulse maps
//! the phonon onto a second photon with efficiency `T`. Each photon is measured
//! by a displacement followed by an on/off detector. This crate provides
//!
//! * [`model`]: closed-form click probabilities, correlators and CHSH values,
//! * [`oracle`]: a truncated Fock-space density-matrix check of those forms,
//! * [`optimizer`]: settings optimization and violation-threshold scans,
//! * [`device`]: mapping from cavity/mechanics hardware numbers to the model,
//! * [`sweep`], [`verify`], [`feasibility`]: the data products behind the CLI.

pub mod device;
pub mod error;
pub mod feasibility;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use model::{ModelParams, ProbabilityTriple, Setting, SettingsQuad};
pub use num_complex::Complex64;

pub use optimizer::{OptimizationResult, OptimizerConfig};
