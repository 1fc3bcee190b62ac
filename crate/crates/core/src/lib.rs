//! Statistics of spectrally filtered thermal light decomposed into localized
//! pulses, with a brute-force Fock-space oracle for every closed form.

pub mod correlations;
pub mod error;
pub mod fidelity_robustness;
pub mod fock_oracle;
pub mod input;
pub mod mode_basis;
pub mod optimize;
pub mod spectra;
pub mod verification;
pub mod weak_limit;

pub use error::{Error, Result};
pub use nalgebra;
pub use num_complex;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
