//! Fixtures shared by the criterion benchmarks.

use optobell_core::ModelParams;

/// Parameter sets spanning the regimes the CLI visits most often.
pub fn representative_params() -> Vec<(&'static str, ModelParams)> {
    vec![
        ("lossless", ModelParams::new(0.1, 1.0, 1.0, 0.0).unwrap()),
        ("lossy", ModelParams::new(0.1, 0.6, 0.9, 0.0).unwrap()),
        ("thermal", ModelParams::new(0.05, 0.9, 0.9, 0.05).unwrap()),
    ]
}
