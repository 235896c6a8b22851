//! Simulation and fitting toolkit for a two-transmon "artificial molecule"
//! coupled to symmetric/antisymmetric microwave waveguides.
//!
//! The crate covers the steady-state thermal machine (heat currents,
//! operating regimes, coefficient of performance), driven emission spectra,
//! and single-port reflection spectroscopy fits.

pub mod device;
pub mod error;
pub mod fit;
pub mod lindblad;
pub mod operators;
pub mod reflectometry;
pub mod spectra;
pub mod thermo;

pub use error::{Error, Result};
pub use operators::{C64, HilbertDims, OperatorMatrix, SuperOperatorMatrix};
