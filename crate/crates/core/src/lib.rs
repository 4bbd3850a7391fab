//! High-harmonic generation driven by bicircular vortex beams that are
//! invariant under coordinated rotations.
//!
//! The pipeline synthesizes the two-color driver ([`field`]), computes the
//! local harmonic emission at every point of a thin gas slab ([`response`]),
//! propagates each harmonic to the far field ([`farfield`]), and analyzes the
//! result: OAM/TKAM spectra ([`spectra`]) and the attosecond pulse train with
//! its windowed quadrupole moment ([`timedomain`]). [`run`] ties the stages
//! together behind a configuration file.

pub mod basis;
pub mod error;
pub mod farfield;
pub mod field;
pub mod grid;
pub mod response;
pub mod run;
pub mod spectra;
pub mod timedomain;
pub mod units;

pub use basis::Helicity;
pub use error::{Error, Result};
