//! Sampling grids: polar grids for the near field and the far field, and the
//! uniform time axis shared by every transverse point.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A polar grid with `n_radial` samples on `[0, radial_max]` and
/// `n_azimuthal` uniform azimuths on `[0, 2π)`.
///
/// Radial weights are the areas of the annular cells centered on each
/// sample, so they are positive and sum to `π·radial_max²`. Away from the
/// endpoints they coincide with the trapezoidal rule for `∫ f r dr dθ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub n_radial: usize,
    pub n_azimuthal: usize,
    pub radial_max: f64,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Near-field grid in the gas-jet plane (radii in µm).
pub type TransverseGrid = PolarGrid;

/// Far-field grid in divergence coordinates (radii in rad).
pub type DivergenceGrid = PolarGrid;

impl PolarGrid {
    pub fn new(n_radial: usize, n_azimuthal: usize, radial_max: f64) -> Result<Self> {
        if n_radial < 2 {
            return Err(Error::Grid(format!("need at least 2 radial samples, got {n_radial}")));
        }
        if !n_azimuthal.is_power_of_two() || n_azimuthal < 4 {
            return Err(Error::Grid(format!(
                "azimuthal sample count must be a power of two ≥ 4, got {n_azimuthal}"
            )));
        }
        if !(radial_max > 0.0 && radial_max.is_finite()) {
            return Err(Error::Grid(format!("radial extent must be positive, got {radial_max}")));
        }
        let dr = radial_max / (n_radial - 1) as f64;
        let radii: Vec<f64> = (0..n_radial).map(|i| i as f64 * dr).collect();
        let weights = radii
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let inner = (r - 0.5 * dr).max(0.0);
                let outer = if i + 1 == n_radial { radial_max } else { r + 0.5 * dr };
                PI * (outer * outer - inner * inner)
            })
            .collect();
        Ok(Self { n_radial, n_azimuthal, radial_max, radii, weights })
    }

    pub fn radial_step(&self) -> f64 {
        self.radial_max / (self.n_radial - 1) as f64
    }

    pub fn azimuthal_step(&self) -> f64 {
        2.0 * PI / self.n_azimuthal as f64
    }

    pub fn azimuth(&self, index: usize) -> f64 {
        index as f64 * self.azimuthal_step()
    }

    pub fn azimuths(&self) -> Vec<f64> {
        (0..self.n_azimuthal).map(|j| self.azimuth(j)).collect()
    }

    /// Quadrature weight of a single (radius, azimuth) sample.
    pub fn cell_area(&self, radial_index: usize) -> f64 {
        self.weights[radial_index] / self.n_azimuthal as f64
    }

    pub fn total_area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index shift equivalent to a rotation by `alpha`, if `alpha` is a
    /// multiple of the azimuthal step.
    pub fn rotation_shift(&self, alpha: f64) -> Result<isize> {
        let step = self.azimuthal_step();
        let steps = alpha / step;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 * steps.abs().max(1.0) {
            return Err(Error::Incommensurate { alpha, step });
        }
        Ok(rounded as isize)
    }

    /// Digest of the grid definition, used in run manifests.
    pub fn checksum(&self) -> String {
        checksum_f64(
            [self.n_radial as f64, self.n_azimuthal as f64, self.radial_max]
                .iter()
                .chain(&self.radii)
                .chain(&self.weights),
        )
    }
}

/// Uniform time axis `t_n = t0 + n·dt`, `n = 0..n_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_t: usize,
    pub t0: f64,
}

impl TimeGrid {
    pub fn new(dt: f64, n_t: usize, t0: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Grid(format!("time step must be positive, got {dt}")));
        }
        if n_t < 2 {
            return Err(Error::Grid(format!("need at least 2 time samples, got {n_t}")));
        }
        Ok(Self { dt, n_t, t0 })
    }

    /// Time axis for a pulse occupying `[0, duration]`, with at least
    /// `padding` on either side, `samples_per_2w_cycle` samples per period
    /// of the second harmonic and a power-of-two length. The span is then an
    /// integer number of fundamental periods, so every harmonic `qω` falls on
    /// an exact DFT bin.
    pub fn for_pulse(
        omega: f64,
        samples_per_2w_cycle: usize,
        duration: f64,
        padding: f64,
    ) -> Result<Self> {
        if samples_per_2w_cycle < 32 {
            return Err(Error::Grid(format!(
                "need at least 32 samples per 2ω cycle, got {samples_per_2w_cycle}"
            )));
        }
        let dt = PI / omega / samples_per_2w_cycle as f64;
        let per_fundamental = 2 * samples_per_2w_cycle;
        let needed = ((duration + 2.0 * padding) / dt).ceil() as usize;
        let mut n_t = needed.next_power_of_two().max(per_fundamental);
        while !n_t.is_multiple_of(per_fundamental) {
            n_t += n_t;
        }
        let t0 = 0.5 * duration - 0.5 * n_t as f64 * dt;
        Self::new(dt, n_t, t0)
    }

    /// Time axis spanning exactly `periods` fundamental periods from t = 0.
    /// Used for continuous-wave (envelope-free) evaluation.
    pub fn periodic(omega: f64, samples_per_2w_cycle: usize, periods: usize) -> Result<Self> {
        let dt = PI / omega / samples_per_2w_cycle as f64;
        Self::new(dt, 2 * samples_per_2w_cycle * periods, 0.0)
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_t).map(|n| self.time(n)).collect()
    }

    pub fn span(&self) -> f64 {
        self.n_t as f64 * self.dt
    }

    /// Number of samples per period of `n·omega`, if it is an integer.
    pub fn samples_per_period(&self, omega: f64) -> Option<usize> {
        let s = 2.0 * PI / omega / self.dt;
        let r = s.round();
        ((s - r).abs() < 1e-6 * s).then_some(r as usize)
    }

    /// Number of fundamental periods spanned, if it is an integer.
    pub fn periods_spanned(&self, omega: f64) -> Option<usize> {
        let m = self.span() * omega / (2.0 * PI);
        let r = m.round();
        ((m - r).abs() < 1e-6 * m.max(1.0) && r >= 1.0).then_some(r as usize)
    }

    pub fn checksum(&self) -> String {
        checksum_f64([self.dt, self.n_t as f64, self.t0].iter())
    }
}

pub(crate) fn checksum_f64<'a>(values: impl Iterator<Item = &'a f64>) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}
