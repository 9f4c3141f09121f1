//! Small-amplitude periodic traveling waves of the Novikov equation
//!
//! ```text
//! u_t - u_xxt = 3u u_x u_xx - 4u² u_x + u² u_xxx
//! ```
//!
//! and their spectral and modulational stability.

pub mod bloch;
pub mod error;
pub mod fourier;
pub mod json;
pub mod linalg;
pub mod modulation;
pub mod sweep;
pub mod verify;
pub mod waveform;

pub use error::{Error, Result};
pub use waveform::{
    asymptotic_profile, equilibrium, expansion_coefficients, solve_profile, Equilibrium,
    ExpansionCoefficients, PeriodicProfile, SolverOptions, WaveParams,
};
