//! Instantaneous power-law surrogate for the harmonic response.
//!
//! At each point the emitted field is `D = |E|^{p−1} E` with `E` the real
//! two-component driver. Because the functional is local in time and
//! isotropic it commutes with rotations and delays, so it inherits every
//! dynamical symmetry of the driver. Each harmonic then picks up an intrinsic
//! phase `α_q·I`, with `I` the local cycle-averaged driver intensity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::emission::{EmissionGrid, HarmonicRange, SpectralExtractor};
use crate::error::{Error, Result};
use crate::field::FieldGrid;
use crate::units::INTENSITY_UNIT_W_CM2;

/// Default exponent. Odd integers make the response a polynomial in the
/// field with no high harmonics, and large exponents make the spectrum fall
/// off too steeply to rise above the envelope sidelobes of the low orders.
pub const DEFAULT_EFFECTIVE_ORDER: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateParams {
    /// Exponent p of the nonlinearity.
    pub effective_order: f64,
    /// α₀ in `α_q = α₀·q`, in rad per 10¹⁴ W/cm².
    pub intrinsic_phase_coeff: f64,
    pub harmonics: HarmonicRange,
}

impl SurrogateParams {
    pub fn intrinsic_phase(&self, q: i64) -> f64 {
        self.intrinsic_phase_coeff * q as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.effective_order >= 1.0 && self.effective_order.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "effective order must be ≥ 1, got {}",
                self.effective_order
            )));
        }
        if !self.intrinsic_phase_coeff.is_finite() {
            return Err(Error::InvalidArgument("intrinsic phase coefficient must be finite".into()));
        }
        Ok(())
    }
}

/// Applies `z ↦ |z|^{p−1} z` to a packed series in place.
pub fn power_law(series: &mut [Complex64], p: f64) {
    if p == 1.0 {
        return;
    }
    for z in series.iter_mut() {
        let r = z.norm();
        if r > 0.0 {
            *z *= r.powf(p - 1.0);
        }
    }
}

pub fn surrogate_emission(field: &FieldGrid, params: &SurrogateParams) -> Result<EmissionGrid> {
    params.validate()?;
    let tg = &field.transverse;
    let extractor = SpectralExtractor::new(field.time, field.omega, params.harmonics)?;
    let carriers = field.carrier_table();
    let n_points = tg.n_radial * tg.n_azimuthal;
    let per_point: Vec<Vec<([Complex64; 2], [f64; 2])>> = (0..n_points)
        .into_par_iter()
        .map_init(
            || {
                (
                    vec![Complex64::new(0.0, 0.0); field.time.n_t],
                    vec![Complex64::new(0.0, 0.0); extractor.scratch_len()],
                )
            },
            |(series, scratch), p| {
                let (ir, ith) = (p / tg.n_azimuthal, p % tg.n_azimuthal);
                field.packed_series_into(&carriers, ir, ith, series);
                power_law(series, params.effective_order);
                let mut lines = extractor.extract(series, scratch, |_| 1.0);
                let intensity = field.cycle_averaged_intensity(ir, ith) / INTENSITY_UNIT_W_CM2;
                for (q, (line, _)) in params.harmonics.orders().zip(lines.iter_mut()) {
                    let phase = Complex64::from_polar(1.0, params.intrinsic_phase(q) * intensity);
                    line.iter_mut().for_each(|a| *a *= phase);
                }
                lines
            },
        )
        .collect();

    let mut out = EmissionGrid::zeros(tg.clone(), field.omega, params.harmonics, field.local_symmetry());
    for (p, lines) in per_point.into_iter().enumerate() {
        let (ir, ith) = (p / tg.n_azimuthal, p % tg.n_azimuthal);
        for (iq, (line, power)) in lines.into_iter().enumerate() {
            for s in 0..2 {
                if !line[s].is_finite() || !power[s].is_finite() {
                    return Err(Error::NonFinite(format!("surrogate emission at point ({ir}, {ith})")));
                }
                out.lines[[iq, s, ir, ith]] = line[s];
                out.window_power[[iq, s, ir, ith]] = power[s];
            }
        }
    }
    Ok(out)
}
