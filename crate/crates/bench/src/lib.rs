//! Shared fixtures for the criterion benches.

use ulfo_core::{SystemModel, SystemParams};

pub fn typical_model() -> SystemModel {
    SystemModel::new(SystemParams::typical()).expect("typical parameters are valid")
}
