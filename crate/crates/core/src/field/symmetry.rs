//! Spatial rotations, polarization rotations, time shifts and the
//! coordinated-rotation residual.
//!
//! Time shifts act on the carriers: the channel `a e^{-inωt}` becomes
//! `a e^{-inω(t+Δ)}` while the shared envelope stays evaluated at `t`. For a
//! continuous wave this is an exact time translation; for a pulse it is the
//! translation of the carrier under a fixed envelope, which is the sense in
//! which the coordinated-rotation symmetry holds.

use num_complex::Complex64;

use super::charges::{to_f64, CoordinationParameters, Rational};
use super::field_grid::FieldGrid;
use crate::basis::rotation_phase;
use crate::error::Result;

/// Passive spatial rotation: the result at azimuth θ is the input at θ − α.
pub fn rotate_space(field: &FieldGrid, alpha: f64) -> Result<FieldGrid> {
    let shift = field.transverse.rotation_shift(alpha)?;
    let n = field.transverse.n_azimuthal as isize;
    let mut out = field.clone();
    for (dst, src) in out.channels.iter_mut().zip(&field.channels) {
        for ith in 0..n {
            let from = (ith - shift).rem_euclid(n) as usize;
            dst.amplitude.column_mut(ith as usize).assign(&src.amplitude.column(from));
        }
    }
    Ok(out)
}

/// Active polarization rotation by `chi`: `ê± → e^{∓iχ}ê±`.
pub fn rotate_polarization(field: &FieldGrid, chi: f64) -> FieldGrid {
    let mut out = field.clone();
    for c in &mut out.channels {
        let phase = rotation_phase(c.helicity, chi);
        c.amplitude.mapv_inplace(|a| a * phase);
    }
    out
}

/// Carrier advance by `delta`: `F(r, t) → F(r, t + Δ)`.
pub fn time_shifted(field: &FieldGrid, delta: f64) -> FieldGrid {
    let mut out = field.clone();
    for c in &mut out.channels {
        let phase = Complex64::from_polar(1.0, -(c.carrier_multiple as f64) * field.omega * delta);
        c.amplitude.mapv_inplace(|a| a * phase);
    }
    out
}

/// `R(γα) F(R⁻¹(α) r, t)`: azimuthal samples shifted by α and circular
/// components multiplied by `e^{∓iγα}`.
pub fn apply_coordinated_rotation(field: &FieldGrid, alpha: f64, gamma: Rational) -> Result<FieldGrid> {
    let rotated = rotate_space(field, alpha)?;
    Ok(rotate_polarization(&rotated, to_f64(gamma) * alpha))
}

/// Relative L² norm of `R(γα)F(R⁻¹(α)r, t) − F(r, t + τα)`.
pub fn symmetry_residual(field: &FieldGrid, params: &CoordinationParameters, alpha: f64) -> Result<f64> {
    let transformed = apply_coordinated_rotation(field, alpha, params.gamma)?;
    let shifted = time_shifted(field, params.tau() * alpha);
    shifted.relative_distance(&transformed)
}

/// Largest symmetry residual over every grid-commensurate rotation.
pub fn max_symmetry_residual(field: &FieldGrid, params: &CoordinationParameters) -> Result<f64> {
    let step = field.transverse.azimuthal_step();
    (0..field.transverse.n_azimuthal).try_fold(0.0f64, |acc, k| {
        Ok(acc.max(symmetry_residual(field, params, k as f64 * step)?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::driver::{default_donut_width, evaluate_driver, DriverSpec, EnvelopeSpec, PerturbationSpec, RelativePhase};
    use crate::field::charges::symmetry_constants;
    use crate::grid::{TimeGrid, TransverseGrid};
    use std::f64::consts::PI;

    fn driver(l1: i64, l2: i64) -> (DriverSpec, FieldGrid) {
        let spec = DriverSpec::bicircular(l1, l2, 800.0, 2e14, 0.5, 30.0)
            .unwrap()
            .with_envelope(EnvelopeSpec { ramp_up: 5.3, flat: 10.7, ramp_down: 5.3 });
        let tg = TransverseGrid::new(40, 64, 90.0).unwrap();
        let time = TimeGrid::for_pulse(spec.omega, 64, spec.duration(), 2.0).unwrap();
        let f = evaluate_driver(&spec, &tg, &time).unwrap();
        (spec, f)
    }

    #[test]
    fn zero_rotation_is_identity() {
        let (spec, f) = driver(1, 1);
        let g = apply_coordinated_rotation(&f, 0.0, spec.params().gamma).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn gamma_zero_is_pure_spatial_rotation() {
        let (_, f) = driver(1, 2);
        let alpha = 5.0 * f.transverse.azimuthal_step();
        let g = apply_coordinated_rotation(&f, alpha, Rational::from_integer(0)).unwrap();
        assert_eq!(g, rotate_space(&f, alpha).unwrap());
        for (a, b) in g.channels.iter().zip(&f.channels) {
            assert_eq!(a.amplitude[[7, 5]], b.amplitude[[7, 0]]);
        }
    }

    #[test]
    fn incommensurate_rotation_is_rejected() {
        let (spec, f) = driver(1, 1);
        assert!(apply_coordinated_rotation(&f, 0.01, spec.params().gamma).is_err());
    }

    #[test]
    fn unperturbed_drivers_are_cr_invariant() {
        for (l1, l2) in [(1, 1), (0, 0), (1, 4), (2, -1)] {
            let (spec, f) = driver(l1, l2);
            let residual = max_symmetry_residual(&f, &spec.params()).unwrap();
            assert!(residual < 1e-10, "ℓ=({l1},{l2}): {residual}");
        }
    }

    #[test]
    fn wrong_gamma_breaks_invariance() {
        let (spec, f) = driver(1, 1);
        let mut params = spec.params();
        params.gamma = Rational::new(1, 3);
        let residual = symmetry_residual(&f, &params, PI / 2.0).unwrap();
        assert!(residual > 0.1, "{residual}");
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let spec = DriverSpec::bicircular(1, 1, 800.0, 0.0, 0.5, 30.0).unwrap();
        let tg = TransverseGrid::new(10, 16, 90.0).unwrap();
        let time = TimeGrid::periodic(spec.omega, 32, 1).unwrap();
        let f = evaluate_driver(&spec, &tg, &time).unwrap();
        assert_eq!(symmetry_residual(&f, &spec.params(), PI / 8.0).unwrap(), 0.0);
    }

    #[test]
    fn in_phase_perturbation_breaks_invariance() {
        let (spec, _) = driver(1, 1);
        let spec = spec.with_perturbation(PerturbationSpec {
            fraction: 0.1,
            relative_phase: RelativePhase::InPhase,
            donut_width: default_donut_width(30.0),
        });
        let tg = TransverseGrid::new(40, 128, 90.0).unwrap();
        let time = TimeGrid::for_pulse(spec.omega, 64, spec.duration(), 2.0).unwrap();
        let f = evaluate_driver(&spec, &tg, &time).unwrap();
        let residual = symmetry_residual(&f, &spec.params(), tg.azimuthal_step()).unwrap();
        assert!(residual > 1e-2, "{residual}");
    }

    /// Separate orbital and spin actions on each color:
    /// `R(γα)F₁ = F₁(t + γα/ω)`, `F₁(R⁻¹r) = F₁(t + ℓ₁α/ω)`,
    /// `R(γα)F₂ = F₂(t − γα/2ω)`, `F₂(R⁻¹r) = F₂(t + ℓ₂α/2ω)`.
    #[test]
    fn component_wise_actions() {
        let (l1, l2) = (1, 1);
        let (spec, f) = driver(l1, l2);
        let p = symmetry_constants(l1, l2, spec.omega).unwrap();
        let gamma = p.gamma_f64();
        let w = spec.omega;
        for k in [1, 3, 10, 37] {
            let alpha = k as f64 * f.transverse.azimuthal_step();
            let f1 = f.component(0).unwrap();
            let f2 = f.component(1).unwrap();
            let checks = [
                (rotate_polarization(&f1, gamma * alpha), time_shifted(&f1, gamma * alpha / w)),
                (rotate_space(&f1, alpha).unwrap(), time_shifted(&f1, l1 as f64 * alpha / w)),
                (rotate_polarization(&f2, gamma * alpha), time_shifted(&f2, -gamma * alpha / (2.0 * w))),
                (rotate_space(&f2, alpha).unwrap(), time_shifted(&f2, l2 as f64 * alpha / (2.0 * w))),
            ];
            for (i, (lhs, rhs)) in checks.iter().enumerate() {
                let residual = rhs.relative_distance(lhs).unwrap();
                assert!(residual < 1e-10, "relation {i}, α step {k}: {residual}");
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn residual_vanishes_for_any_oam_pair(l1 in -3i64..4, l2 in -3i64..4, k in 0usize..64) {
            let spec = DriverSpec::bicircular(l1, l2, 800.0, 2e14, 0.5, 30.0).unwrap();
            let tg = TransverseGrid::new(12, 64, 90.0).unwrap();
            let time = TimeGrid::periodic(spec.omega, 32, 1).unwrap();
            let f = evaluate_driver(&spec, &tg, &time).unwrap();
            let alpha = k as f64 * tg.azimuthal_step();
            proptest::prop_assert!(symmetry_residual(&f, &spec.params(), alpha).unwrap() < 1e-10);
        }
    }
}
