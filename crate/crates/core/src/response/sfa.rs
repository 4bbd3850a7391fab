//! Strong-field-approximation dipole (Lewenstein model) for a two-component
//! field in the polarization plane.
//!
//! ```text
//! x(t) = i ∫₀^τmax dτ (π/(ε + iτ/2))^{3/2} d*(p + A(t)) [E(t−τ)·d(p + A(t−τ))] e^{−iS} + c.c.
//! p(t, τ) = −(1/τ) ∫_{t−τ}^t A,   S = I_p τ + ½∫A² − (∫A)²/2τ
//! d(k) ∝ k / (k² + 2I_p)³
//! ```
//!
//! All quantities are in atomic units. The emitted field is taken to be the
//! dipole acceleration, `−Ω² x̃(Ω)` in the spectral domain.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::emission::{EmissionGrid, HarmonicRange, SpectralExtractor};
use crate::error::{Error, Result};
use crate::field::FieldGrid;
use crate::units::{AU_TIME_PER_FS, HARTREE_EV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryClass {
    /// Excursion times up to 0.65 of a fundamental period.
    Short,
    Long,
    All,
}

/// Split between short and long excursions, in fundamental periods.
pub const SHORT_LONG_SPLIT: f64 = 0.65;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfaParams {
    pub ionization_potential_ev: f64,
    /// Longest excursion time, in fundamental periods.
    pub window_cycles: f64,
    /// Maximum relative change of the line amplitudes when the excursion
    /// quadrature step is doubled.
    pub tolerance: f64,
    pub trajectories: TrajectoryClass,
    /// Regularization ε of the wave-packet spreading factor (a.u.).
    pub epsilon: f64,
    pub harmonics: HarmonicRange,
}

/// Argon.
pub const ARGON_IONIZATION_POTENTIAL_EV: f64 = 15.76;

impl SfaParams {
    pub fn argon(harmonics: HarmonicRange) -> Self {
        Self {
            ionization_potential_ev: ARGON_IONIZATION_POTENTIAL_EV,
            window_cycles: 1.5,
            tolerance: 0.1,
            trajectories: TrajectoryClass::All,
            epsilon: 1e-4,
            harmonics,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.ionization_potential_ev) {
            return Err(Error::InvalidArgument("ionization potential must be positive".into()));
        }
        if !positive(self.tolerance) || !positive(self.epsilon) || !positive(self.window_cycles) {
            return Err(Error::InvalidArgument(
                "tolerance, ε and excursion window must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Single-point dipole evaluator on a fixed time grid.
pub struct SfaDipole {
    ip: f64,
    dt: f64,
    window: usize,
    short_limit: usize,
    trajectories: TrajectoryClass,
    /// `(π/(ε + iτ/2))^{3/2}` for τ = k·dt.
    spreading: Vec<Complex64>,
}

impl SfaDipole {
    pub fn new(params: &SfaParams, dt_fs: f64, omega: f64) -> Self {
        let dt = dt_fs * AU_TIME_PER_FS;
        let period = 2.0 * std::f64::consts::PI / omega * AU_TIME_PER_FS;
        let window = (params.window_cycles * period / dt).round() as usize;
        let short_limit = (SHORT_LONG_SPLIT * period / dt).round() as usize;
        let spreading = (0..=window)
            .map(|k| {
                let tau = k as f64 * dt;
                (Complex64::new(std::f64::consts::PI, 0.0) / Complex64::new(params.epsilon, 0.5 * tau))
                    .powf(1.5)
            })
            .collect();
        Self {
            ip: params.ionization_potential_ev / HARTREE_EV,
            dt,
            window,
            short_limit,
            trajectories: params.trajectories,
            spreading,
        }
    }

    fn included(&self, k: usize) -> bool {
        match self.trajectories {
            TrajectoryClass::All => true,
            TrajectoryClass::Short => k <= self.short_limit,
            TrajectoryClass::Long => k > self.short_limit,
        }
    }

    /// Dipole `x + iy` at every sample of the packed field `field`. A periodic
    /// field is continued cyclically before the first sample; otherwise it is
    /// taken to vanish there. `stride` is the excursion quadrature step in
    /// samples.
    pub fn dipole(&self, field: &[Complex64], periodic: bool, stride: usize) -> Vec<Complex64> {
        let n = field.len();
        let w = self.window;
        let dt = self.dt;
        let e: Vec<Complex64> = (0..n + w)
            .map(|i| {
                if i >= w {
                    field[i - w]
                } else if periodic {
                    field[(n + i - w % n) % n]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut a = vec![Complex64::new(0.0, 0.0); n + w];
        for i in 1..n + w {
            a[i] = a[i - 1] - 0.5 * dt * (e[i] + e[i - 1]);
        }
        if periodic {
            let mean = a[w..].iter().sum::<Complex64>() / n as f64;
            a.iter_mut().for_each(|v| *v -= mean);
        }
        let mut c1 = vec![Complex64::new(0.0, 0.0); n + w];
        let mut c2 = vec![0.0; n + w];
        for i in 1..n + w {
            c1[i] = c1[i - 1] + 0.5 * dt * (a[i] + a[i - 1]);
            c2[i] = c2[i - 1] + 0.5 * dt * (a[i].norm_sqr() + a[i - 1].norm_sqr());
        }
        let two_ip = 2.0 * self.ip;
        (w..n + w)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut acc_y = Complex64::new(0.0, 0.0);
                for k in (stride..=w).step_by(stride) {
                    if !self.included(k) {
                        continue;
                    }
                    let j = i - k;
                    let tau = k as f64 * dt;
                    let dc1 = c1[i] - c1[j];
                    let action = self.ip * tau + 0.5 * (c2[i] - c2[j]) - 0.5 * dc1.norm_sqr() / tau;
                    let p = -dc1 / tau;
                    let k_ret = p + a[i];
                    let k_ion = p + a[j];
                    let ionization = (e[j].re * k_ion.re + e[j].im * k_ion.im)
                        / (k_ion.norm_sqr() + two_ip).powi(3);
                    let recombination = 1.0 / (k_ret.norm_sqr() + two_ip).powi(3);
                    let weight = self.spreading[k]
                        * Complex64::from_polar(ionization * recombination, -action);
                    acc += weight * k_ret.re;
                    acc_y += weight * k_ret.im;
                }
                // x = i·Σ + c.c. = −2 Im Σ, per Cartesian component
                let scale = -2.0 * dt * stride as f64;
                Complex64::new(scale * acc.im, scale * acc_y.im)
            })
            .collect()
    }
}

pub fn sfa_emission(field: &FieldGrid, params: &SfaParams) -> Result<EmissionGrid> {
    params.validate()?;
    match field.time.samples_per_period(2.0 * field.omega) {
        Some(s) if s >= 64 => {}
        _ => {
            return Err(Error::Grid(
                "the strong-field dipole needs at least 64 samples per 2ω cycle".into(),
            ))
        }
    }
    let tg = &field.transverse;
    let extractor = SpectralExtractor::new(field.time, field.omega, params.harmonics)?;
    let model = SfaDipole::new(params, field.time.dt, field.omega);
    let periodic = field.envelope.first().is_some_and(|&v| v > 0.0);
    let carriers = field.carrier_table();
    let acceleration = |big_omega: f64| {
        let w = big_omega / AU_TIME_PER_FS;
        -w * w
    };
    let n_points = tg.n_radial * tg.n_azimuthal;
    type Lines = Vec<([Complex64; 2], [f64; 2])>;
    let per_point: Vec<Option<Lines>> = (0..n_points)
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
                let mut fine = model.dipole(series, periodic, 1);
                let mut coarse = model.dipole(series, periodic, 2);
                let fine = extractor.extract(&mut fine, scratch, acceleration);
                let coarse = extractor.extract(&mut coarse, scratch, acceleration);
                let mut reference = 0.0;
                let mut change = 0.0;
                for ((a, _), (b, _)) in fine.iter().zip(&coarse) {
                    for s in 0..2 {
                        reference += a[s].norm_sqr();
                        change += (a[s] - b[s]).norm_sqr();
                    }
                }
                let converged = change <= params.tolerance * params.tolerance * reference;
                converged.then_some(fine)
            },
        )
        .collect();

    let mut out = EmissionGrid::zeros(tg.clone(), field.omega, params.harmonics, field.local_symmetry());
    for (p, lines) in per_point.into_iter().enumerate() {
        let (ir, ith) = (p / tg.n_azimuthal, p % tg.n_azimuthal);
        let Some(lines) = lines else {
            out.excluded_points += 1;
            continue;
        };
        for (iq, (line, power)) in lines.into_iter().enumerate() {
            for s in 0..2 {
                if !line[s].is_finite() || !power[s].is_finite() {
                    return Err(Error::NonFinite(format!("strong-field dipole at point ({ir}, {ith})")));
                }
                out.lines[[iq, s, ir, ith]] = line[s];
                out.window_power[[iq, s, ir, ith]] = power[s];
            }
        }
    }
    if out.excluded_points > 0 {
        log::warn!("{} points excluded: excursion quadrature not converged", out.excluded_points);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Helicity;
    use crate::field::{FieldChannel, LocalSymmetry};
    use crate::grid::{PolarGrid, TimeGrid};
    use crate::response::helicity_of_line;
    use crate::units::{amplitude_from_intensity, omega_from_wavelength_nm};
    use ndarray::Array2;

    /// Uniform local field on a minimal grid.
    fn uniform(channels: &[(Helicity, u32, f64)], samples: usize) -> FieldGrid {
        let omega = omega_from_wavelength_nm(800.0);
        let tg = PolarGrid::new(2, 4, 1.0).unwrap();
        let time = TimeGrid::periodic(omega, samples, 2).unwrap();
        let channels = channels
            .iter()
            .map(|&(helicity, carrier_multiple, a)| FieldChannel {
                helicity,
                carrier_multiple,
                amplitude: Array2::from_elem((2, 4), Complex64::new(a, 0.0)),
            })
            .collect();
        FieldGrid::new(tg, time, omega, vec![1.0; time.n_t], channels).unwrap()
    }

    fn params(q_min: i64, q_max: i64) -> SfaParams {
        SfaParams { tolerance: 0.5, ..SfaParams::argon(HarmonicRange::new(q_min, q_max).unwrap()) }
    }

    fn total(e: &EmissionGrid, q: i64) -> f64 {
        e.slab_power(q).unwrap().iter().sum()
    }

    #[test]
    fn linear_field_emits_odd_harmonics() {
        let a = amplitude_from_intensity(1.5e14) / std::f64::consts::SQRT_2;
        let f = uniform(&[(Helicity::Right, 1, a), (Helicity::Left, 1, a)], 64);
        assert_eq!(f.local_symmetry(), LocalSymmetry::Other);
        let e = sfa_emission(&f, &params(3, 20)).unwrap();
        assert_eq!(e.excluded_points, 0);
        let odd: f64 = (3..=19).step_by(2).map(|q| total(&e, q)).sum();
        assert!(odd > 0.0);
        for q in (4..=20).step_by(2) {
            assert!(total(&e, q) < 1e-10 * odd, "q={q}");
        }
    }

    #[test]
    fn bicircular_field_emits_alternating_doublets() {
        let a = amplitude_from_intensity(1e14);
        let f = uniform(&[(Helicity::Right, 1, a), (Helicity::Left, 2, a)], 64);
        let e = sfa_emission(&f, &params(4, 20)).unwrap();
        assert_eq!(e.excluded_points, 0);
        for q in [4, 5, 7, 8, 10, 11, 13, 14, 16, 17] {
            let h = helicity_of_line(&e, q).unwrap();
            let expected = if q % 3 == 1 { Helicity::Right } else { Helicity::Left };
            assert_eq!(h.dominant, Some(expected), "q={q}");
            assert!(h.purity > 0.99, "q={q}: {}", h.purity);
        }
        for q in [6, 9, 12, 15, 18] {
            let neighbors = total(&e, q - 1) + total(&e, q + 1);
            assert!(total(&e, q) < 1e-10 * neighbors, "q={q}");
        }
    }

    #[test]
    fn trajectory_classes_partition_the_dipole() {
        let a = amplitude_from_intensity(1e14);
        let f = uniform(&[(Helicity::Right, 1, a), (Helicity::Left, 2, a)], 64);
        let series = f.packed_series(0, 0);
        let dipole = |class| {
            let p = SfaParams { trajectories: class, ..params(4, 10) };
            SfaDipole::new(&p, f.time.dt, f.omega).dipole(&series, true, 1)
        };
        let all = dipole(TrajectoryClass::All);
        let short = dipole(TrajectoryClass::Short);
        let long = dipole(TrajectoryClass::Long);
        for ((a, s), l) in all.iter().zip(&short).zip(&long) {
            assert!((a - s - l).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn zero_field_gives_zero_dipole() {
        let f = uniform(&[(Helicity::Right, 1, 0.0), (Helicity::Left, 2, 0.0)], 64);
        let e = sfa_emission(&f, &params(4, 10)).unwrap();
        assert!(e.lines.iter().all(|a| a.norm() == 0.0));
        assert_eq!(e.excluded_points, 0);
    }

    #[test]
    fn requires_fine_time_sampling() {
        let f = uniform(&[(Helicity::Right, 1, 0.05)], 32);
        assert!(sfa_emission(&f, &params(4, 10)).is_err());
    }
}
