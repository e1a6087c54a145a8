//! Shared fixtures for the criterion benchmarks.

use memdomain_core::{ModeIndex, SystemParams};

/// `L = 1`, `c = 1`, the parameter set used throughout the examples.
pub fn unit_params() -> SystemParams {
    SystemParams::new(1.0, 1.0).expect("unit parameters are valid")
}

pub fn mode(k: f64, n: u32) -> ModeIndex {
    ModeIndex::new(k, n).expect("positive momentum")
}
