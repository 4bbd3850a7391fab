//! Synthesis of the bicircular vortex driver and its coordinated-rotation
//! symmetry.

pub mod charges;
pub mod driver;
pub mod field_grid;
pub mod symmetry;

pub use charges::{
    coordination_parameter, expected_harmonic_oam, harmonic_helicity, symmetry_constants,
    tkam_charge, CoordinationParameters, Rational,
};
pub use driver::{
    evaluate_driver, DriverComponentSpec, DriverSpec, EnvelopeSpec, PerturbationSpec,
    RelativePhase,
};
pub use field_grid::{FieldChannel, FieldGrid, LocalSymmetry};
pub use symmetry::{
    apply_coordinated_rotation, max_symmetry_residual, rotate_polarization, rotate_space,
    symmetry_residual, time_shifted,
};
