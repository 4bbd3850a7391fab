//! Fraunhofer propagation of the thin-slab emission to divergence
//! coordinates.
//!
//! ```text
//! E_far(β, φ) = ∫∫ E(r, θ) e^{−ik_q β r cos(θ−φ)} r dr dθ
//!             = Σ_m e^{imφ} i^{−m} ∫ c_m(r) J_m(k_q β r) 2πr dr
//! ```
//!
//! with `c_m(r)` the azimuthal Fourier coefficients of the near field. The
//! kernel is diagonal in `m`, so the azimuthal order of every mode is carried
//! over exactly.

pub mod bessel;

use ndarray::{s, Array2, Array3, Array4, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::basis::Helicity;
use crate::error::{Error, Result};
use crate::grid::{DivergenceGrid, TransverseGrid};
use crate::response::{EmissionGrid, HarmonicRange};
use crate::units;

pub use bessel::{bessel_j, bessel_j_orders};

/// Divergence above which the paraxial far-field mapping is questionable.
pub const PARAXIAL_LIMIT_RAD: f64 = 0.2;

/// Far-field amplitudes per harmonic, `amplitude[[iq, s, iβ, iφ]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldGrid {
    pub divergence: DivergenceGrid,
    pub omega: f64,
    pub harmonics: HarmonicRange,
    /// `k_q = qω/c` in rad/µm.
    pub wavenumbers: Vec<f64>,
    pub amplitude: Array4<Complex64>,
    pub warnings: Vec<String>,
}

/// One harmonic of a [`FarFieldGrid`], `amplitude[[s, iβ, iφ]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldSlice {
    pub q: i64,
    pub wavenumber: f64,
    pub amplitude: Array3<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldOptions {
    /// Fewest β samples; more are used when the near-field extent requires.
    pub n_beta: usize,
    /// β_max is this many times the largest rms divergence of any harmonic.
    pub beta_margin: f64,
}

impl Default for FarFieldOptions {
    fn default() -> Self {
        Self { n_beta: 100, beta_margin: 6.0 }
    }
}

impl FarFieldGrid {
    pub fn component(&self, q: i64, helicity: Helicity) -> Result<ArrayView2<'_, Complex64>> {
        let iq = self.harmonics.index(q)?;
        Ok(self.amplitude.slice(s![iq, helicity.index(), .., ..]))
    }

    /// `∫ |E_far,s|² β dβ dφ` per helicity.
    pub fn power(&self, q: i64) -> Result<[f64; 2]> {
        let iq = self.harmonics.index(q)?;
        let mut out = [0.0; 2];
        for (s, total) in out.iter_mut().enumerate() {
            *total = grid_power(&self.divergence, self.amplitude.slice(s![iq, s, .., ..]));
        }
        Ok(out)
    }

    /// Power-weighted mean divergence of harmonic `q` (rad).
    pub fn mean_divergence(&self, q: i64) -> Result<f64> {
        let iq = self.harmonics.index(q)?;
        let g = &self.divergence;
        let mut weighted = 0.0;
        let mut total = 0.0;
        for ib in 0..g.n_radial {
            let ring: f64 = (0..2)
                .map(|s| self.amplitude.slice(s![iq, s, ib, ..]).iter().map(|a| a.norm_sqr()).sum::<f64>())
                .sum::<f64>()
                * g.cell_area(ib);
            weighted += ring * g.radii[ib];
            total += ring;
        }
        Ok(if total > 0.0 { weighted / total } else { 0.0 })
    }

    pub fn slice(&self, q: i64) -> Result<FarFieldSlice> {
        let iq = self.harmonics.index(q)?;
        Ok(FarFieldSlice {
            q,
            wavenumber: self.wavenumbers[iq],
            amplitude: self.amplitude.slice(s![iq, .., .., ..]).to_owned(),
        })
    }
}

/// `Σ cell_area·|a|²` over a polar grid.
pub fn grid_power(grid: &crate::grid::PolarGrid, values: ArrayView2<'_, Complex64>) -> f64 {
    (0..grid.n_radial)
        .map(|ir| grid.cell_area(ir) * values.row(ir).iter().map(|a| a.norm_sqr()).sum::<f64>())
        .sum()
}

/// Azimuthal Fourier coefficients `c_m(r) = (1/N) Σ_θ a(r, θ) e^{−imθ}`,
/// stored in FFT order (index k is m = k for k < N/2, m = k − N otherwise).
pub fn azimuthal_modes(values: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
    let (n_r, n) = values.dim();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = values.to_owned();
    for mut row in out.rows_mut() {
        let mut buf: Vec<Complex64> = row.iter().copied().collect();
        fft.process(&mut buf);
        for (dst, v) in row.iter_mut().zip(buf) {
            *dst = v / n as f64;
        }
    }
    debug_assert_eq!(out.dim(), (n_r, n));
    out
}

/// Signed azimuthal order of FFT index `k` for `n` samples.
pub fn mode_order(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// `J_m(k β r)` for `m = 0..=n/2`, indexed `[iβ][ir][m]`.
fn bessel_table(
    transverse: &TransverseGrid,
    divergence: &DivergenceGrid,
    wavenumber: f64,
) -> Vec<Vec<Vec<f64>>> {
    let orders = transverse.n_azimuthal / 2 + 1;
    divergence
        .radii
        .iter()
        .map(|&beta| {
            transverse
                .radii
                .iter()
                .map(|&r| {
                    let mut out = vec![0.0; orders];
                    bessel_j_orders(wavenumber * beta * r, &mut out);
                    out
                })
                .collect()
        })
        .collect()
}

fn check_grids(transverse: &TransverseGrid, divergence: &DivergenceGrid) -> Result<()> {
    if transverse.n_azimuthal != divergence.n_azimuthal {
        return Err(Error::Grid(format!(
            "far-field grid has {} azimuths, near-field grid has {}",
            divergence.n_azimuthal, transverse.n_azimuthal
        )));
    }
    Ok(())
}

fn transform_with_table(
    near: ArrayView2<'_, Complex64>,
    transverse: &TransverseGrid,
    divergence: &DivergenceGrid,
    table: &[Vec<Vec<f64>>],
) -> Array2<Complex64> {
    let n = transverse.n_azimuthal;
    let modes = azimuthal_modes(near);
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = Array2::zeros((divergence.n_radial, n));
    for (ib, row_table) in table.iter().enumerate() {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
        for (k, value) in spectrum.iter_mut().enumerate() {
            let m = mode_order(k, n);
            let order = m.unsigned_abs() as usize;
            let parity = if m < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
            let mut acc = Complex64::new(0.0, 0.0);
            for ir in 0..transverse.n_radial {
                acc += modes[[ir, k]] * (transverse.weights[ir] * row_table[ir][order]);
            }
            // i^{−m}
            let phase = match m.rem_euclid(4) {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, -1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, 1.0),
            };
            *value = phase * parity * acc;
        }
        ifft.process(&mut spectrum);
        out.row_mut(ib).assign(&ndarray::Array1::from(spectrum));
    }
    out
}

/// Fraunhofer transform of one scalar near-field component.
pub fn fraunhofer(
    near: ArrayView2<'_, Complex64>,
    transverse: &TransverseGrid,
    wavenumber: f64,
    divergence: &DivergenceGrid,
) -> Result<Array2<Complex64>> {
    check_grids(transverse, divergence)?;
    let table = bessel_table(transverse, divergence, wavenumber);
    Ok(transform_with_table(near, transverse, divergence, &table))
}

/// `k_q = qω/c` in rad/µm.
pub fn harmonic_wavenumber(q: i64, omega: f64) -> f64 {
    units::wavenumber(q as f64 * omega)
}

/// Far field of harmonic `q`, both circular components.
pub fn propagate(emission: &EmissionGrid, q: i64, divergence: &DivergenceGrid) -> Result<FarFieldSlice> {
    check_grids(&emission.transverse, divergence)?;
    let wavenumber = harmonic_wavenumber(q, emission.omega);
    let table = bessel_table(&emission.transverse, divergence, wavenumber);
    let mut amplitude = Array3::zeros((2, divergence.n_radial, divergence.n_azimuthal));
    for helicity in Helicity::BOTH {
        let near = emission.line(q, helicity)?;
        let far = transform_with_table(near, &emission.transverse, divergence, &table);
        amplitude.slice_mut(s![helicity.index(), .., ..]).assign(&far);
    }
    Ok(FarFieldSlice { q, wavenumber, amplitude })
}

fn paraxial_warning(divergence: &DivergenceGrid) -> Option<String> {
    (divergence.radial_max > PARAXIAL_LIMIT_RAD).then(|| {
        format!(
            "divergence grid extends to {:.3} rad, beyond the paraxial limit {PARAXIAL_LIMIT_RAD} rad",
            divergence.radial_max
        )
    })
}

/// Propagates every retained harmonic.
pub fn propagate_all(emission: &EmissionGrid, divergence: &DivergenceGrid) -> Result<FarFieldGrid> {
    check_grids(&emission.transverse, divergence)?;
    let harmonics = emission.harmonics;
    let slices: Vec<FarFieldSlice> = harmonics
        .orders()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q| propagate(emission, q, divergence))
        .collect::<Result<_>>()?;
    let mut amplitude =
        Array4::zeros((harmonics.len(), 2, divergence.n_radial, divergence.n_azimuthal));
    for (iq, slice) in slices.iter().enumerate() {
        amplitude.slice_mut(s![iq, .., .., ..]).assign(&slice.amplitude);
    }
    let warnings: Vec<String> = paraxial_warning(divergence).into_iter().collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(FarFieldGrid {
        divergence: divergence.clone(),
        omega: emission.omega,
        harmonics,
        wavenumbers: slices.iter().map(|s| s.wavenumber).collect(),
        amplitude,
        warnings,
    })
}

/// rms transverse wavenumber `√(∫|∇E|² / ∫|E|²)` of one near-field
/// component, evaluated mode by mode.
pub fn rms_wavenumber(near: ArrayView2<'_, Complex64>, transverse: &TransverseGrid) -> f64 {
    let modes = azimuthal_modes(near);
    let n = transverse.n_azimuthal;
    let n_r = transverse.n_radial;
    let dr = transverse.radial_step();
    let mut gradient = 0.0;
    let mut power = 0.0;
    for k in 0..n {
        let m = mode_order(k, n) as f64;
        for ir in 0..n_r {
            let c = modes[[ir, k]];
            let derivative = if ir == 0 {
                (modes[[1, k]] - c) / dr
            } else if ir + 1 == n_r {
                (c - modes[[ir - 1, k]]) / dr
            } else {
                (modes[[ir + 1, k]] - modes[[ir - 1, k]]) / (2.0 * dr)
            };
            let r = transverse.radii[ir];
            let azimuthal = if r > 0.0 { m * m * c.norm_sqr() / (r * r) } else { 0.0 };
            gradient += transverse.weights[ir] * (derivative.norm_sqr() + azimuthal);
            power += transverse.weights[ir] * c.norm_sqr();
        }
    }
    if power > 0.0 {
        (gradient / power).sqrt()
    } else {
        0.0
    }
}

/// Divergence grid whose extent is `beta_margin` times the largest rms
/// divergence `κ_rms/k_q` over all harmonics and helicities, sampled at
/// least as finely as [`divergence_step_limit`].
pub fn auto_divergence_grid(emission: &EmissionGrid, options: &FarFieldOptions) -> Result<DivergenceGrid> {
    let mut widest: f64 = 0.0;
    for q in emission.harmonics.orders() {
        let k = harmonic_wavenumber(q, emission.omega);
        for helicity in Helicity::BOTH {
            let kappa = rms_wavenumber(emission.line(q, helicity)?, &emission.transverse);
            widest = widest.max(kappa / k);
        }
    }
    if widest == 0.0 {
        // empty emission: size the grid for the slab itself
        let k = harmonic_wavenumber(emission.harmonics.q_min, emission.omega);
        widest = 1.0 / (k * emission.transverse.radial_max);
    }
    let beta_max = (options.beta_margin * widest).min(sampling_limit(emission));
    let needed = (beta_max / divergence_step_limit(emission)).ceil() as usize;
    DivergenceGrid::new(options.n_beta.max(needed), emission.transverse.n_azimuthal, beta_max)
}

/// Largest β step that samples the far-field intensity of a near field
/// confined to `r ≤ r_max` four times per oscillation, `π/(4 k_q r_max)`.
pub fn divergence_step_limit(emission: &EmissionGrid) -> f64 {
    let k = harmonic_wavenumber(emission.harmonics.q_max, emission.omega);
    std::f64::consts::PI / (4.0 * k * emission.transverse.radial_max)
}

/// Largest divergence the near-field radial step resolves for every harmonic.
///
/// Beyond `2π/(k_q Δr)` the radial quadrature produces a replica of the main
/// lobe; the limit keeps a margin below it.
pub fn sampling_limit(emission: &EmissionGrid) -> f64 {
    let k = harmonic_wavenumber(emission.harmonics.q_max, emission.omega);
    1.5 * std::f64::consts::PI / (k * emission.transverse.radial_step())
}

/// Far-field power over near-field power scaled by `(2π/k)²`; 1 when
/// Parseval's theorem holds.
pub fn parseval_ratio(emission: &EmissionGrid, far: &FarFieldGrid, q: i64, helicity: Helicity) -> Result<f64> {
    let near = grid_power(&emission.transverse, emission.line(q, helicity)?);
    let iq = far.harmonics.index(q)?;
    let k = far.wavenumbers[iq];
    let far_power = far.power(q)?[helicity.index()];
    let expected = (2.0 * std::f64::consts::PI / k).powi(2) * near;
    Ok(if expected == 0.0 { if far_power == 0.0 { 1.0 } else { f64::INFINITY } } else { far_power / expected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LocalSymmetry;
    use std::f64::consts::PI;

    fn near_grid() -> TransverseGrid {
        TransverseGrid::new(120, 64, 90.0).unwrap()
    }

    fn field(tg: &TransverseGrid, f: impl Fn(f64, f64) -> Complex64) -> Array2<Complex64> {
        Array2::from_shape_fn((tg.n_radial, tg.n_azimuthal), |(ir, ith)| f(tg.radii[ir], tg.azimuth(ith)))
    }

    #[test]
    fn gaussian_matches_closed_form() {
        let tg = near_grid();
        let w = 20.0;
        let k = 50.0;
        let near = field(&tg, |r, _| Complex64::new((-(r * r) / (w * w)).exp(), 0.0));
        let fg = DivergenceGrid::new(100, 64, 8.0 / (k * w)).unwrap();
        let far = fraunhofer(near.view(), &tg, k, &fg).unwrap();
        let peak = PI * w * w;
        for (ib, &beta) in fg.radii.iter().enumerate() {
            let exact = peak * (-(k * beta * w).powi(2) / 4.0).exp();
            for ith in 0..fg.n_azimuthal {
                let err = (far[[ib, ith]] - exact).norm();
                assert!(err < 1e-3 * peak, "β={beta}: {} vs {exact}", far[[ib, ith]]);
            }
        }
    }

    #[test]
    fn azimuthal_order_is_preserved() {
        let tg = near_grid();
        let k = 80.0;
        let fg = DivergenceGrid::new(60, 64, 0.004).unwrap();
        for m in [-5i64, 0, 3, 11] {
            let near = field(&tg, |r, th| {
                Complex64::from_polar((r / 25.0).powi(m.abs() as i32) * (-(r * r) / 400.0).exp(), m as f64 * th)
            });
            let far = fraunhofer(near.view(), &tg, k, &fg).unwrap();
            let modes = azimuthal_modes(far.view());
            let total: f64 = modes.iter().map(|c| c.norm_sqr()).sum();
            let target = if m >= 0 { m as usize } else { (64 + m) as usize };
            let stray: f64 = modes
                .indexed_iter()
                .filter(|((_, kk), _)| *kk != target)
                .map(|(_, c)| c.norm_sqr())
                .sum();
            assert!(stray <= 1e-24 * total, "m={m}: {stray} / {total}");
            if m != 0 {
                assert!(far.row(0).iter().all(|a| a.norm() < 1e-12 * total.sqrt()));
            }
        }
    }

    #[test]
    fn transform_is_linear() {
        let tg = TransverseGrid::new(40, 32, 90.0).unwrap();
        let fg = DivergenceGrid::new(30, 32, 0.01).unwrap();
        let x = field(&tg, |r, th| Complex64::from_polar((-(r * r) / 300.0).exp(), 2.0 * th + 0.1 * r));
        let y = field(&tg, |r, th| Complex64::new((r / 30.0).sin() * th.cos(), 0.3 * (-r / 40.0).exp()));
        let (a, b) = (Complex64::new(0.7, -1.2), Complex64::new(-0.4, 2.5));
        let combined = x.mapv(|v| a * v) + y.mapv(|v| b * v);
        let lhs = fraunhofer(combined.view(), &tg, 60.0, &fg).unwrap();
        let px = fraunhofer(x.view(), &tg, 60.0, &fg).unwrap();
        let py = fraunhofer(y.view(), &tg, 60.0, &fg).unwrap();
        let scale = lhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ((l, u), v) in lhs.iter().zip(&px).zip(&py) {
            assert!((l - (a * u + b * v)).norm() < 1e-13 * scale);
        }
    }

    fn synthetic_emission(f: impl Fn(i64, usize, f64, f64) -> Complex64) -> EmissionGrid {
        let tg = TransverseGrid::new(120, 64, 90.0).unwrap();
        let harmonics = HarmonicRange::new(10, 12).unwrap();
        let mut e = EmissionGrid::zeros(tg.clone(), units::omega_from_wavelength_nm(800.0), harmonics, LocalSymmetry::Other);
        for (iq, q) in harmonics.orders().enumerate() {
            for s in 0..2 {
                for ir in 0..tg.n_radial {
                    for ith in 0..tg.n_azimuthal {
                        e.lines[[iq, s, ir, ith]] = f(q, s, tg.radii[ir], tg.azimuth(ith));
                    }
                }
            }
        }
        e
    }

    #[test]
    fn parseval_holds_per_harmonic() {
        let e = synthetic_emission(|q, s, r, th| {
            let l = (2 * q + 1 - 3 * s as i64) / 3;
            let w = 14.0 - s as f64 * 3.0;
            Complex64::from_polar((r / w).powi(l as i32) * (-(r * r) / (w * w)).exp(), l as f64 * th)
        });
        let fg = auto_divergence_grid(&e, &FarFieldOptions::default()).unwrap();
        let far = propagate_all(&e, &fg).unwrap();
        assert!(far.warnings.is_empty());
        for q in 10..=12 {
            for h in Helicity::BOTH {
                let ratio = parseval_ratio(&e, &far, q, h).unwrap();
                assert!((ratio - 1.0).abs() < 1e-3, "q={q} {h}: {ratio}");
            }
        }
    }

    #[test]
    fn single_harmonic_matches_propagate_and_empty_stays_empty() {
        let e = synthetic_emission(|q, s, r, _| {
            if q == 11 && s == 0 { Complex64::new((-(r * r) / 200.0).exp(), 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let fg = auto_divergence_grid(&e, &FarFieldOptions::default()).unwrap();
        let far = propagate_all(&e, &fg).unwrap();
        let single = propagate(&e, 11, &fg).unwrap();
        assert_eq!(far.slice(11).unwrap(), single);
        assert!(far.component(10, Helicity::Right).unwrap().iter().all(|a| a.norm() == 0.0));

        let empty = synthetic_emission(|_, _, _, _| Complex64::new(0.0, 0.0));
        let fg = auto_divergence_grid(&empty, &FarFieldOptions::default()).unwrap();
        let far = propagate_all(&empty, &fg).unwrap();
        assert!(far.amplitude.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn warns_beyond_paraxial_limit() {
        let e = synthetic_emission(|_, _, _, _| Complex64::new(0.0, 0.0));
        let fg = DivergenceGrid::new(10, 64, 0.3).unwrap();
        assert_eq!(propagate_all(&e, &fg).unwrap().warnings.len(), 1);
        let mismatched = DivergenceGrid::new(10, 32, 0.01).unwrap();
        assert!(propagate_all(&e, &mismatched).is_err());
    }
}
