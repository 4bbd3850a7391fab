//! Bicircular vortex driver: an ω right-circular Laguerre–Gauss beam with OAM
//! ℓ₁ plus a 2ω left-circular beam with OAM ℓ₂, both at their common focal
//! plane, optionally perturbed by ℓ = 0 donut modes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::charges::{symmetry_constants, CoordinationParameters};
use super::field_grid::{FieldChannel, FieldGrid};
use crate::basis::Helicity;
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, TransverseGrid};
use crate::units;

/// One color of the driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverComponentSpec {
    /// 1 for the fundamental, 2 for the second harmonic.
    pub carrier_multiple: u32,
    /// Topological charge ℓ.
    pub oam: i64,
    pub handedness: Helicity,
    /// Peak circular amplitude over the beam profile (a.u.).
    pub peak_amplitude: f64,
    /// Beam waist (µm).
    pub waist: f64,
}

impl DriverComponentSpec {
    pub fn peak_intensity(&self) -> f64 {
        self.peak_amplitude * self.peak_amplitude * units::ATOMIC_INTENSITY_W_CM2
    }
}

/// Trapezoidal envelope starting at t = 0 (times in fs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub ramp_up: f64,
    pub flat: f64,
    pub ramp_down: f64,
}

impl EnvelopeSpec {
    pub fn duration(&self) -> f64 {
        self.ramp_up + self.flat + self.ramp_down
    }

    pub fn value(&self, t: f64) -> f64 {
        let top = self.ramp_up + self.flat;
        let end = self.duration();
        if t < 0.0 || t > end {
            0.0
        } else if t < self.ramp_up {
            t / self.ramp_up
        } else if t <= top {
            1.0
        } else if self.ramp_down > 0.0 {
            (end - t) / self.ramp_down
        } else {
            0.0
        }
    }

    fn validate(&self) -> Result<()> {
        let parts = [self.ramp_up, self.flat, self.ramp_down];
        if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || self.duration() <= 0.0 {
            return Err(Error::Driver(format!("invalid envelope {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativePhase {
    InPhase,
    OutOfPhase,
}

impl RelativePhase {
    fn factor(self) -> f64 {
        match self {
            RelativePhase::InPhase => 1.0,
            RelativePhase::OutOfPhase => -1.0,
        }
    }
}

/// Diverts a fraction of each color's power into an ℓ = 0 donut mode with
/// amplitude profile `r² e^{-r²/σ²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub fraction: f64,
    /// Phase of the 2ω donut relative to the ω donut.
    pub relative_phase: RelativePhase,
    /// σ of the donut profile (µm).
    pub donut_width: f64,
}

/// The complete two-color driving field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverSpec {
    /// Fundamental angular frequency (rad/fs).
    pub omega: f64,
    pub fundamental: DriverComponentSpec,
    pub second: DriverComponentSpec,
    /// `None` for a continuous wave.
    pub envelope: Option<EnvelopeSpec>,
    pub perturbation: Option<PerturbationSpec>,
}

impl DriverSpec {
    /// Counter-rotating bicircular driver with equal waists.
    ///
    /// `split` is the fraction of `total_intensity` (W/cm², peak) carried by
    /// the ω component.
    pub fn bicircular(
        l1: i64,
        l2: i64,
        wavelength_nm: f64,
        total_intensity: f64,
        split: f64,
        waist: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&split) {
            return Err(Error::Driver(format!("intensity split must lie in [0, 1], got {split}")));
        }
        if !(total_intensity >= 0.0 && total_intensity.is_finite()) {
            return Err(Error::Driver(format!("invalid total intensity {total_intensity}")));
        }
        let spec = Self {
            omega: units::omega_from_wavelength_nm(wavelength_nm),
            fundamental: DriverComponentSpec {
                carrier_multiple: 1,
                oam: l1,
                handedness: Helicity::Right,
                peak_amplitude: units::amplitude_from_intensity(split * total_intensity),
                waist,
            },
            second: DriverComponentSpec {
                carrier_multiple: 2,
                oam: l2,
                handedness: Helicity::Left,
                peak_amplitude: units::amplitude_from_intensity((1.0 - split) * total_intensity),
                waist,
            },
            envelope: None,
            perturbation: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_envelope(mut self, envelope: EnvelopeSpec) -> Self {
        self.envelope = Some(envelope);
        self
    }

    pub fn with_perturbation(mut self, perturbation: PerturbationSpec) -> Self {
        self.perturbation = Some(perturbation);
        self
    }

    pub fn components(&self) -> [&DriverComponentSpec; 2] {
        [&self.fundamental, &self.second]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Driver(format!("ω must be positive, got {}", self.omega)));
        }
        let expected = [(1, Helicity::Right), (2, Helicity::Left)];
        for (c, (multiple, handedness)) in self.components().into_iter().zip(expected) {
            if c.carrier_multiple != multiple {
                return Err(Error::Driver(format!(
                    "component carrier multiple {} where {multiple} was expected",
                    c.carrier_multiple
                )));
            }
            if c.handedness != handedness {
                return Err(Error::Driver(format!(
                    "the {multiple}ω component must be {handedness:?}-handed (counter-rotating drivers)"
                )));
            }
            if !(c.waist > 0.0 && c.waist.is_finite()) {
                return Err(Error::Driver(format!("waist must be positive, got {}", c.waist)));
            }
            if !(c.peak_amplitude >= 0.0 && c.peak_amplitude.is_finite()) {
                return Err(Error::Driver(format!(
                    "peak amplitude must be non-negative, got {}",
                    c.peak_amplitude
                )));
            }
        }
        if let Some(env) = &self.envelope {
            env.validate()?;
        }
        if let Some(p) = &self.perturbation {
            if !(0.0..1.0).contains(&p.fraction) {
                return Err(Error::Driver(format!(
                    "perturbation fraction must lie in [0, 1), got {}",
                    p.fraction
                )));
            }
            if !(p.donut_width > 0.0 && p.donut_width.is_finite()) {
                return Err(Error::Driver(format!(
                    "donut width must be positive, got {}",
                    p.donut_width
                )));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> CoordinationParameters {
        symmetry_constants(self.fundamental.oam, self.second.oam, self.omega)
            .expect("validated driver has positive ω")
    }

    /// Duration of the pulse (0 for a continuous wave).
    pub fn duration(&self) -> f64 {
        self.envelope.map_or(0.0, |e| e.duration())
    }

    pub fn envelope_value(&self, t: f64) -> f64 {
        self.envelope.map_or(1.0, |e| e.value(t))
    }

    pub fn is_perturbed(&self) -> bool {
        self.perturbation.is_some_and(|p| p.fraction > 0.0)
    }
}

/// Laguerre–Gauss p = 0 amplitude at the focal plane, normalized to a peak
/// value of 1 over r.
pub fn lg_profile(oam: i64, r: f64, waist: f64) -> f64 {
    let l = oam.unsigned_abs() as f64;
    let x = 2.0 * r * r / (waist * waist);
    if l == 0.0 {
        return (-0.5 * x).exp();
    }
    ((x / l).powf(0.5 * l)) * (-0.5 * (x - l)).exp()
}

/// `∫ |lg_profile|² dA` over the plane.
pub fn lg_power(oam: i64, waist: f64) -> f64 {
    let l = oam.unsigned_abs();
    let lf = l as f64;
    let factorial: f64 = (1..=l).map(|k| k as f64).product();
    let peak_norm = if l == 0 { 1.0 } else { lf.exp() * lf.powf(-lf) };
    0.5 * PI * waist * waist * peak_norm * factorial
}

/// Unnormalized donut profile `r² e^{-r²/σ²}`.
pub fn donut_profile(r: f64, sigma: f64) -> f64 {
    r * r * (-(r * r) / (sigma * sigma)).exp()
}

/// `∫ |donut_profile|² dA` over the plane.
pub fn donut_power(sigma: f64) -> f64 {
    0.25 * PI * sigma.powi(6)
}

/// Default donut width σ_p for a given waist.
pub fn default_donut_width(waist: f64) -> f64 {
    waist * FRAC_1_SQRT_2
}

/// Samples the driver on the given grids.
///
/// Each color becomes one [`FieldChannel`]: the main LG mode scaled by
/// `√(1−f)` plus, when perturbed, a donut normalized to carry the fraction
/// `f` of that color's power.
pub fn evaluate_driver(
    spec: &DriverSpec,
    transverse: &TransverseGrid,
    time: &TimeGrid,
) -> Result<FieldGrid> {
    spec.validate()?;
    match time.samples_per_period(2.0 * spec.omega) {
        Some(s) if s >= 32 => {}
        _ => {
            return Err(Error::Grid(format!(
                "time step {} fs does not divide the 2ω period into an integer number (≥ 32) of samples",
                time.dt
            )))
        }
    }
    let envelope: Vec<f64> = (0..time.n_t).map(|n| spec.envelope_value(time.time(n))).collect();
    let fraction = spec.perturbation.map_or(0.0, |p| p.fraction);
    let main_scale = (1.0 - fraction).sqrt();
    let azimuths = transverse.azimuths();

    let channels = spec
        .components()
        .into_iter()
        .map(|c| {
            let donut = spec.perturbation.filter(|p| p.fraction > 0.0).map(|p| {
                let main_power = c.peak_amplitude.powi(2) * lg_power(c.oam, c.waist);
                let coefficient = (p.fraction * main_power / donut_power(p.donut_width)).sqrt();
                let sign = if c.carrier_multiple == 2 { p.relative_phase.factor() } else { 1.0 };
                (sign * coefficient, p.donut_width)
            });
            let amplitude = Array2::from_shape_fn(
                (transverse.n_radial, transverse.n_azimuthal),
                |(ir, ith)| {
                    let r = transverse.radii[ir];
                    let radial = main_scale * c.peak_amplitude * lg_profile(c.oam, r, c.waist);
                    let mut a = Complex64::from_polar(radial, c.oam as f64 * azimuths[ith]);
                    if let Some((coefficient, sigma)) = donut {
                        a += coefficient * donut_profile(r, sigma);
                    }
                    a
                },
            );
            FieldChannel { helicity: c.handedness, carrier_multiple: c.carrier_multiple, amplitude }
        })
        .collect();

    FieldGrid::new(transverse.clone(), *time, spec.omega, envelope, channels)
}
