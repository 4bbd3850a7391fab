//! Harmonic line amplitudes and window powers of the local emission.

use ndarray::{Array4, ArrayView2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::basis::Helicity;
use crate::error::{Error, Result};
use crate::field::LocalSymmetry;
use crate::grid::{TimeGrid, TransverseGrid};

/// Retained harmonic orders `q_min..=q_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonicRange {
    pub q_min: i64,
    pub q_max: i64,
}

impl HarmonicRange {
    pub fn new(q_min: i64, q_max: i64) -> Result<Self> {
        if q_min < 1 || q_max < q_min {
            return Err(Error::InvalidArgument(format!(
                "harmonic range {q_min}..={q_max} is empty or starts below 1"
            )));
        }
        Ok(Self { q_min, q_max })
    }

    pub fn len(&self) -> usize {
        (self.q_max - self.q_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn orders(&self) -> impl Iterator<Item = i64> {
        self.q_min..=self.q_max
    }

    pub fn contains(&self, q: i64) -> bool {
        (self.q_min..=self.q_max).contains(&q)
    }

    pub fn index(&self, q: i64) -> Result<usize> {
        if self.contains(q) {
            Ok((q - self.q_min) as usize)
        } else {
            Err(Error::HarmonicOutOfRange { q, lo: self.q_min, hi: self.q_max })
        }
    }
}

/// Emission spectrum of every transverse point, sampled on the harmonic
/// comb `Ω = qω`.
///
/// `lines[[iq, s, ir, ith]]` is `Ẽ_s(r, θ, qω) = ∫ E_s(t) e^{iqωt} dt` for
/// the circular component `s` (index 0 for `ê₊`). `window_power` holds
/// `∫ |Ẽ_s(Ω)|² dΩ` over `|Ω − qω| < ω/2`. The time-domain emission is real,
/// so negative frequencies carry no extra information and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionGrid {
    pub transverse: TransverseGrid,
    pub omega: f64,
    pub harmonics: HarmonicRange,
    pub lines: Array4<Complex64>,
    pub window_power: Array4<f64>,
    /// Local symmetry of the driver that produced the emission.
    pub symmetry: LocalSymmetry,
    /// Points whose emission was discarded as unconverged.
    pub excluded_points: usize,
}

impl EmissionGrid {
    pub fn zeros(transverse: TransverseGrid, omega: f64, harmonics: HarmonicRange, symmetry: LocalSymmetry) -> Self {
        let shape = (harmonics.len(), 2, transverse.n_radial, transverse.n_azimuthal);
        Self {
            transverse,
            omega,
            harmonics,
            lines: Array4::zeros(shape),
            window_power: Array4::zeros(shape),
            symmetry,
            excluded_points: 0,
        }
    }

    pub fn line(&self, q: i64, helicity: Helicity) -> Result<ArrayView2<'_, Complex64>> {
        let iq = self.harmonics.index(q)?;
        Ok(self.lines.slice(ndarray::s![iq, helicity.index(), .., ..]))
    }

    /// Window power of harmonic `q` integrated over the slab, per helicity.
    pub fn slab_power(&self, q: i64) -> Result<[f64; 2]> {
        let iq = self.harmonics.index(q)?;
        let mut out = [0.0; 2];
        for (s, total) in out.iter_mut().enumerate() {
            for ir in 0..self.transverse.n_radial {
                let area = self.transverse.cell_area(ir);
                let row: f64 = self.window_power.slice(ndarray::s![iq, s, ir, ..]).iter().sum();
                *total += area * row;
            }
        }
        Ok(out)
    }

    /// `∫ |Ẽ_s(qω)|² dA` per helicity.
    pub fn line_power(&self, q: i64) -> Result<[f64; 2]> {
        let iq = self.harmonics.index(q)?;
        let mut out = [0.0; 2];
        for (s, total) in out.iter_mut().enumerate() {
            for ir in 0..self.transverse.n_radial {
                let area = self.transverse.cell_area(ir);
                let row: f64 =
                    self.lines.slice(ndarray::s![iq, s, ir, ..]).iter().map(|a| a.norm_sqr()).sum();
                *total += area * row;
            }
        }
        Ok(out)
    }
}

/// Dominant circular component of one harmonic, integrated over the slab.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineHelicity {
    pub q: i64,
    /// `None` when the line is too weak for the helicity to mean anything.
    pub dominant: Option<Helicity>,
    /// Fraction of the line power in the dominant component.
    pub purity: f64,
    pub power: f64,
}

/// A line is considered absent when its power is below this fraction of
/// the strongest line within two orders.
pub const ABSENT_LINE_RATIO: f64 = 1e-2;

/// Dominant helicity and purity of harmonic `q` over its ±ω/2 window.
pub fn helicity_of_line(emission: &EmissionGrid, q: i64) -> Result<LineHelicity> {
    let [plus, minus] = emission.slab_power(q)?;
    let power = plus + minus;
    let reference = (q - 2..=q + 2)
        .filter(|&p| emission.harmonics.contains(p))
        .map(|p| emission.slab_power(p).map(|[a, b]| a + b))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let (dominant, purity) = if plus >= minus { (Helicity::Right, plus) } else { (Helicity::Left, minus) };
    let present = power > 0.0 && power >= ABSENT_LINE_RATIO * reference;
    Ok(LineHelicity {
        q,
        dominant: present.then_some(dominant),
        purity: if power > 0.0 { purity / power } else { 0.0 },
        power,
    })
}

/// Converts packed time series `E_x + iE_y` on a fixed time grid into line
/// amplitudes and window powers.
pub(crate) struct SpectralExtractor {
    fft: Arc<dyn Fft<f64>>,
    time: TimeGrid,
    omega: f64,
    harmonics: HarmonicRange,
    periods: usize,
}

impl SpectralExtractor {
    pub fn new(time: TimeGrid, omega: f64, harmonics: HarmonicRange) -> Result<Self> {
        let periods = time.periods_spanned(omega).ok_or_else(|| {
            Error::Grid("time grid must span an integer number of fundamental periods".into())
        })?;
        if time.samples_per_period(omega).is_none() {
            return Err(Error::Grid("time step must divide the fundamental period".into()));
        }
        if (2 * harmonics.q_max + 1) as usize * periods > time.n_t {
            return Err(Error::Grid(format!(
                "harmonic {} is above the Nyquist frequency of the time grid",
                harmonics.q_max
            )));
        }
        let fft = FftPlanner::new().plan_fft_forward(time.n_t);
        Ok(Self { fft, time, omega, harmonics, periods })
    }

    pub fn scratch_len(&self) -> usize {
        self.fft.get_inplace_scratch_len()
    }

    /// Transforms `series` in place. `spectral_weight(Ω)` multiplies every
    /// spectral sample before extraction (e.g. `−Ω²` for an acceleration).
    pub fn extract(
        &self,
        series: &mut [Complex64],
        scratch: &mut [Complex64],
        spectral_weight: impl Fn(f64) -> f64,
    ) -> Vec<([Complex64; 2], [f64; 2])> {
        self.fft.process_with_scratch(series, scratch);
        let n = self.time.n_t;
        let dt = self.time.dt;
        let d_omega = self.omega / self.periods as f64;
        let amplitude = |k: usize| -> [Complex64; 2] {
            let big_omega = k as f64 * d_omega;
            let phase = Complex64::from_polar(
                std::f64::consts::SQRT_2 * dt * spectral_weight(big_omega),
                big_omega * self.time.t0,
            );
            [phase * series[k].conj(), phase * series[(n - k) % n]]
        };
        let m = self.periods as f64;
        self.harmonics
            .orders()
            .map(|q| {
                let line = amplitude(q as usize * self.periods);
                let lo = ((q as f64 - 0.5) * m).ceil() as usize;
                let hi = ((q as f64 + 0.5) * m).ceil() as usize;
                let mut power = [0.0; 2];
                for k in lo..hi {
                    let [p, mi] = amplitude(k);
                    power[0] += p.norm_sqr() * d_omega;
                    power[1] += mi.norm_sqr() * d_omega;
                }
                (line, power)
            })
            .collect()
    }
}
