//! Circular polarization basis `ê± = (x̂ ± iŷ)/√2`.
//!
//! A real transverse vector `(E_x, E_y)` is packed as the complex number
//! `E_x + iE_y`. For complex circular amplitudes the physical field is
//! `Re[E₊ê₊ + E₋ê₋]`, whose packed form is `(conj(E₊) + E₋)/√2`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Spin angular momentum label of a circular component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Helicity {
    /// `ê₊`, SAM +1.
    Right,
    /// `ê₋`, SAM −1.
    Left,
}

impl Helicity {
    pub const BOTH: [Helicity; 2] = [Helicity::Right, Helicity::Left];

    pub fn sign(self) -> i64 {
        match self {
            Helicity::Right => 1,
            Helicity::Left => -1,
        }
    }

    /// Storage index: 0 for `ê₊`, 1 for `ê₋`.
    pub fn index(self) -> usize {
        match self {
            Helicity::Right => 0,
            Helicity::Left => 1,
        }
    }

    pub fn from_sign(sign: i64) -> Option<Self> {
        match sign {
            1 => Some(Helicity::Right),
            -1 => Some(Helicity::Left),
            _ => None,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Helicity::Right => Helicity::Left,
            Helicity::Left => Helicity::Right,
        }
    }
}

impl fmt::Display for Helicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

/// Packed real field `E_x + iE_y` of `Re[e_plus ê₊ + e_minus ê₋]`.
#[inline]
pub fn pack_real_field(e_plus: Complex64, e_minus: Complex64) -> Complex64 {
    (e_plus.conj() + e_minus) * FRAC_1_SQRT_2
}

/// Phase factor picked up by the coefficient of `ê_s` under an active
/// polarization rotation by `chi`: `R(χ)ê± = e^{∓iχ}ê±`.
#[inline]
pub fn rotation_phase(helicity: Helicity, chi: f64) -> Complex64 {
    Complex64::from_polar(1.0, -(helicity.sign() as f64) * chi)
}
