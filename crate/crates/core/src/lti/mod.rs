//! Transfer functions, state-space models and eigenvalue analysis.

pub mod eigen;
pub mod poly;
pub mod state_space;

pub use eigen::{eigenvalues, spectral_abscissa, spectral_radius};
pub use poly::{tf_dc_gain, Polynomial, TransferFunction};
pub use state_space::{tf_to_ss, SisoRealization, StateSpaceModel};
