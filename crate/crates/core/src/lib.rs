//! Damping torque analysis of ultra-low-frequency oscillation (ULFO) in a
//! hydropower single-machine single-load system, carried out in the jerk
//! space (Δf, Δα = Δḟ, Δζ = Δf̈).
//!
//! - [`model`]: parameters → coefficients → state matrices in both bases
//! - [`eigen`]: characteristic polynomial, simultaneous root iteration, mode pick
//! - [`gdta`]: frequency-response torque coefficients and closed-form damping paths
//! - [`sim`]: fixed-step RK4, jerk-form equivalence, phase traces, log decrement
//! - [`study`]: Monte-Carlo scenarios, parameter sweeps, sensitivity tables

pub mod eigen;
pub mod error;
pub mod gdta;
pub mod linalg;
pub mod model;
pub mod params;
pub mod report;
pub mod sim;
pub mod study;

pub use eigen::{dominant_oscillatory_mode, eigenvalues, ComplexParts, ComplexValue, ModeEstimate, ModeSource};
pub use error::{Error, Result};
pub use gdta::{damping_decomposition, CriterionReport, DampingDecomposition, TorqueResponse, Verdict};
pub use model::{Basis, CoeffA, CoeffB, StateMatrix, SystemModel};
pub use params::{validate_params, Param, SystemParams};
pub use report::AnalysisReport;
pub use sim::{SimConfig, SimTrace};
