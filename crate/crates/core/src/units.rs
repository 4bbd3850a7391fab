//! Physical constants and unit conversions.
//!
//! Internally lengths are in µm, times in fs, angular frequencies in rad/fs
//! and field amplitudes in atomic units. Intensities are carried in W/cm².

use std::f64::consts::PI;

/// Speed of light in µm/fs.
pub const SPEED_OF_LIGHT_UM_PER_FS: f64 = 0.299_792_458;

/// Speed of light in nm/fs.
pub const SPEED_OF_LIGHT_NM_PER_FS: f64 = 299.792_458;

/// Intensity of a linearly polarized wave with unit peak field in atomic units (W/cm²).
/// A circular component `Re[a ê± e^{-iωt}]` carries `|a|² · ATOMIC_INTENSITY`.
pub const ATOMIC_INTENSITY_W_CM2: f64 = 3.509_445e16;

/// Atomic unit of time expressed in fs, inverted.
pub const AU_TIME_PER_FS: f64 = 41.341_374_575_751;

/// Hartree energy in eV.
pub const HARTREE_EV: f64 = 27.211_386_245_988;

/// Reference intensity for the intrinsic-phase coefficients (W/cm²).
pub const INTENSITY_UNIT_W_CM2: f64 = 1.0e14;

/// Angular frequency (rad/fs) for a vacuum wavelength in nm.
pub fn omega_from_wavelength_nm(wavelength_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_NM_PER_FS / wavelength_nm
}

/// Peak field amplitude (a.u.) of a circular component with the given intensity.
pub fn amplitude_from_intensity(intensity_w_cm2: f64) -> f64 {
    (intensity_w_cm2 / ATOMIC_INTENSITY_W_CM2).sqrt()
}

/// Wavenumber (rad/µm) of radiation at angular frequency `omega` (rad/fs).
pub fn wavenumber(omega: f64) -> f64 {
    omega / SPEED_OF_LIGHT_UM_PER_FS
}

/// Optical period (fs) of angular frequency `omega` (rad/fs).
pub fn period(omega: f64) -> f64 {
    2.0 * PI / omega
}
