//! Exact charge algebra of coordinated-rotation-invariant bicircular drivers.
//!
//! For an ω component with OAM ℓ₁ (right circular) and a 2ω component with
//! OAM ℓ₂ (left circular) the field is invariant under a spatial rotation by
//! α combined with a polarization rotation by γα, up to a time delay τα:
//!
//! ```text
//! γ = (ℓ₂ − 2ℓ₁)/3,    ωτ = (ℓ₁ + ℓ₂)/3,    j⁽ⁿ⁾ = n·ωτ
//! ```
//!
//! Everything here is exact rational arithmetic.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::basis::Helicity;
use crate::error::{Error, Result};

pub type Rational = Rational64;

/// Coordination parameter γ for drivers with OAM `l1` (ω) and `l2` (2ω).
pub fn coordination_parameter(l1: i64, l2: i64) -> Rational {
    Rational::new(l2 - 2 * l1, 3)
}

/// Symmetry constants of the coordinated rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinationParameters {
    /// Coordination parameter γ.
    pub gamma: Rational,
    /// TKAM charge of the fundamental, equal to ω·τ.
    pub j1: Rational,
    /// Fundamental angular frequency (rad/fs).
    pub omega: f64,
}

/// γ, τ and j⁽¹⁾ for the given OAM pair.
pub fn symmetry_constants(l1: i64, l2: i64, omega: f64) -> Result<CoordinationParameters> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("ω must be positive, got {omega}")));
    }
    Ok(CoordinationParameters {
        gamma: coordination_parameter(l1, l2),
        j1: Rational::new(l1 + l2, 3),
        omega,
    })
}

impl CoordinationParameters {
    /// ω·τ as an exact rational; τ itself is this divided by ω.
    pub fn tau_omega(&self) -> Rational {
        self.j1
    }

    /// Time-delay constant τ in fs.
    pub fn tau(&self) -> f64 {
        to_f64(self.j1) / self.omega
    }

    pub fn gamma_f64(&self) -> f64 {
        to_f64(self.gamma)
    }

    /// TKAM charge j⁽ⁿ⁾ = n·j⁽¹⁾ of the n-th harmonic.
    pub fn tkam_charge(&self, n: i64) -> Result<Rational> {
        tkam_charge(n, self)
    }

    /// OAM and SAM of the allowed harmonic `q`.
    pub fn expected_harmonic_oam(&self, q: i64) -> Result<(Rational, Helicity)> {
        expected_harmonic_oam(q, self)
    }
}

/// TKAM charge j⁽ⁿ⁾ = n·j⁽¹⁾.
pub fn tkam_charge(n: i64, params: &CoordinationParameters) -> Result<Rational> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("harmonic order must be ≥ 1, got {n}")));
    }
    Ok(params.j1 * n)
}

/// SAM of the allowed harmonic `q`: +1 for q ≡ 1 (mod 3), −1 for q ≡ 2.
pub fn harmonic_helicity(q: i64) -> Result<Helicity> {
    match q.rem_euclid(3) {
        1 => Ok(Helicity::Right),
        2 => Ok(Helicity::Left),
        _ => Err(Error::ForbiddenHarmonic(q)),
    }
}

/// OAM `ℓ_q = j⁽ᑫ⁾ − γS_q` and SAM `S_q` of harmonic `q`.
pub fn expected_harmonic_oam(
    q: i64,
    params: &CoordinationParameters,
) -> Result<(Rational, Helicity)> {
    let sam = harmonic_helicity(q)?;
    let oam = tkam_charge(q, params)? - params.gamma * sam.sign();
    Ok((oam, sam))
}

/// Parse a rational written as `a/b`, `a` or a decimal with at most 6
/// fractional digits.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
        return (den != 0).then(|| Rational::new(num, den));
    }
    if let Ok(n) = text.parse::<i64>() {
        return Some(Rational::from_integer(n));
    }
    let (int, frac) = text.split_once('.')?;
    if frac.len() > 6 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let negative = int.trim_start().starts_with('-');
    let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
    let scale = 10i64.pow(frac.len() as u32);
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let magnitude = int.abs() * scale + frac;
    Some(Rational::new(if negative { -magnitude } else { magnitude }, scale))
}

/// True when `value` lies on the one-third lattice.
pub fn on_third_lattice(value: Rational) -> bool {
    3 % *value.denom() == 0
}

pub fn to_f64(value: Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn coordination_parameter_examples() {
        assert_eq!(coordination_parameter(1, 1), r(-1, 3));
        assert_eq!(coordination_parameter(0, 0), r(0, 1));
        assert_eq!(coordination_parameter(1, 4), r(2, 3));
    }

    #[test]
    fn symmetry_constants_examples() {
        let omega = 2.354;
        let p = symmetry_constants(1, 1, omega).unwrap();
        assert_eq!(p.tau_omega(), r(2, 3));
        assert_eq!(p.j1, r(2, 3));
        // a full revolution accumulates τ·2π = 4π/3ω
        let full_turn = p.tau() * 2.0 * std::f64::consts::PI;
        assert!((full_turn - 4.0 * std::f64::consts::PI / (3.0 * omega)).abs() < 1e-12);

        let z = symmetry_constants(0, 0, omega).unwrap();
        assert_eq!(z.tau_omega(), r(0, 1));
        assert_eq!(z.tau(), 0.0);
        assert!(symmetry_constants(1, 1, 0.0).is_err());
    }

    #[test]
    fn tkam_charge_examples() {
        let p = symmetry_constants(1, 1, 1.0).unwrap();
        assert_eq!(p.tkam_charge(13).unwrap(), r(26, 3));
        assert_eq!(p.tkam_charge(14).unwrap(), r(28, 3));
        for (l1, l2) in [(0, 3), (2, -1), (5, 7)] {
            let p = symmetry_constants(l1, l2, 1.0).unwrap();
            assert_eq!(p.tkam_charge(2).unwrap(), p.tkam_charge(1).unwrap() * 2);
        }
        assert!(p.tkam_charge(0).is_err());
    }

    #[test]
    fn harmonic_oam_examples() {
        let p = symmetry_constants(1, 1, 1.0).unwrap();
        assert_eq!(p.expected_harmonic_oam(13).unwrap(), (r(9, 1), Helicity::Right));
        assert_eq!(p.expected_harmonic_oam(14).unwrap(), (r(9, 1), Helicity::Left));
        assert_eq!(p.expected_harmonic_oam(4).unwrap(), (r(3, 1), Helicity::Right));
        assert!(matches!(p.expected_harmonic_oam(15), Err(Error::ForbiddenHarmonic(15))));
    }

    /// Photon counting: harmonic q absorbs n₁ ω photons and n₂ 2ω photons with
    /// n₁ + 2n₂ = q and SAM n₁ − n₂ = ±1; the OAM is n₁ℓ₁ + n₂ℓ₂.
    fn photon_counting_oam(q: i64, l1: i64, l2: i64) -> Option<(i64, i64)> {
        (0..=q)
            .flat_map(|n1| (0..=q).map(move |n2| (n1, n2)))
            .find(|&(n1, n2)| n1 + 2 * n2 == q && (n1 - n2).abs() == 1)
            .map(|(n1, n2)| (n1 * l1 + n2 * l2, n1 - n2))
    }

    #[test]
    fn agrees_with_photon_counting() {
        for (l1, l2) in [(1, 1), (0, 0), (1, 4), (-2, 3), (2, 2)] {
            let p = symmetry_constants(l1, l2, 1.0).unwrap();
            for q in 1..40 {
                match (photon_counting_oam(q, l1, l2), p.expected_harmonic_oam(q)) {
                    (Some((oam, sam)), Ok((expected, helicity))) => {
                        assert_eq!(Rational::from_integer(oam), expected, "q={q} ℓ=({l1},{l2})");
                        assert_eq!(sam, helicity.sign());
                    }
                    (None, Err(Error::ForbiddenHarmonic(_))) => {}
                    other => panic!("q={q}: mismatch {other:?}"),
                }
            }
        }
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("-1/3"), Some(r(-1, 3)));
        assert_eq!(parse_rational("2"), Some(r(2, 1)));
        assert_eq!(parse_rational("0.25"), Some(r(1, 4)));
        assert_eq!(parse_rational("-0.5"), Some(r(-1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert!(on_third_lattice(r(-1, 3)));
        assert!(on_third_lattice(r(2, 1)));
        assert!(!on_third_lattice(r(1, 4)));
    }

    proptest::proptest! {
        #[test]
        fn charges_stay_on_third_lattice(l1 in -20i64..20, l2 in -20i64..20, q in 1i64..60) {
            let p = symmetry_constants(l1, l2, 1.0).unwrap();
            proptest::prop_assert!((p.gamma * 3).is_integer());
            proptest::prop_assert!((p.tau_omega() * 3).is_integer());
            proptest::prop_assert_eq!(p.tkam_charge(q).unwrap(), p.tkam_charge(1).unwrap() * q);
            if let Ok((oam, sam)) = p.expected_harmonic_oam(q) {
                proptest::prop_assert!(oam.is_integer());
                proptest::prop_assert_eq!(oam + p.gamma * sam.sign(), p.j1 * q);
            }
        }
    }
}
