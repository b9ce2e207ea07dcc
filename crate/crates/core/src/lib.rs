//! Exact solitons, spectral evolution and Lax-pair checks for the fifth-order
//! nonlinear Schrödinger equation
//!
//! ```text
//! i q_t + q_xx/2 + |q|^2 q - i c3 (q_xxx + 6|q|^2 q_x)
//!   + c4 (q_xxxx + ...) - i c5 (q_xxxxx + ...) = 0.
//! ```

pub mod equation;
pub mod evolve;
pub mod field;
pub mod fourier;
pub mod lax;
pub mod linalg;
pub mod presets;
pub mod soliton;
pub mod spectral_data;

pub use num_complex::Complex64;
pub use soliton::{EngineError, SolitonEvaluator};
pub use spectral_data::{ModelCoefficients, SpectralDatum, SpectralSet};
