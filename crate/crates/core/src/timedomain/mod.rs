//! Attosecond pulse train of the filtered far field and its time-windowed
//! quadrupole moment
//!
//! ```text
//! T₂₂(t) = ∫ (E_x + iE_y)²(t′) e^{−(t′−t)²/2σ²} dt′
//! ```
//!
//! whose half-phase is the local orientation of a linearly polarized pulse.

pub mod export;
pub mod spiral;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use ndarray::{s, Array2, Array4};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::basis::{rotation_phase, Helicity};
use crate::error::{Error, Result};
use crate::farfield::FarFieldGrid;
use crate::field::CoordinationParameters;
use crate::grid::{DivergenceGrid, TimeGrid};
use crate::units;

pub use export::{cartesian_apt, write_t22_csv, AptGridMeta, CartesianApt};
pub use spiral::{polarization_spiral_metrics, AptMetrics, RidgePoint};

/// Cycles of the fundamental spanned by a reconstructed pulse train.
pub const APT_CYCLES: usize = 3;

/// Minimum number of time samples per window width σ.
pub const MIN_SAMPLES_PER_SIGMA: f64 = 8.0;

/// The window is truncated at this many σ on either side.
pub const WINDOW_TRUNCATION: f64 = 5.0;

/// Window width `σ` (fs) for an angle `degrees/ω`.
pub fn sigma_from_degrees(degrees: f64, omega: f64) -> f64 {
    degrees.to_radians() / omega
}

/// Periodic pulse train synthesized from the far-field lines `q ≥ q_min`.
///
/// `coefficients[[iq, s, iβ, iφ]]` multiplies `ê_s e^{−iqωt}` for the order
/// `orders[iq]`. Time series are synthesized on demand over `time`, which
/// spans [`APT_CYCLES`] cycles starting at `−T`, so the middle cycle begins
/// at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AptField {
    pub divergence: DivergenceGrid,
    pub omega: f64,
    pub orders: Vec<i64>,
    pub coefficients: Array4<Complex64>,
    pub time: TimeGrid,
    pub samples_per_cycle: usize,
}

/// Keeps the far-field content of orders `q_min..=q_max` and prepares its
/// time-domain synthesis with `samples_per_cycle` samples per cycle of ω.
pub fn reconstruct_apt(far: &FarFieldGrid, q_min: i64, samples_per_cycle: usize) -> Result<AptField> {
    let iq0 = far.harmonics.index(q_min)?;
    let q_max = far.harmonics.q_max;
    if samples_per_cycle as i64 <= 2 * q_max {
        return Err(Error::InvalidArgument(format!(
            "{samples_per_cycle} samples per cycle cannot represent harmonic {q_max}"
        )));
    }
    let period = units::period(far.omega);
    let dt = period / samples_per_cycle as f64;
    let time = TimeGrid::new(dt, APT_CYCLES * samples_per_cycle, -period)?;
    Ok(AptField {
        divergence: far.divergence.clone(),
        omega: far.omega,
        orders: (q_min..=q_max).collect(),
        coefficients: far.amplitude.slice(s![iq0.., .., .., ..]).to_owned(),
        time,
        samples_per_cycle,
    })
}

impl AptField {
    /// Builds a synthesizer bound to this field's time grid.
    pub fn synthesizer(&self) -> Synthesizer {
        let n = self.time.n_t;
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Synthesizer {
            scratch: vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            fft,
            n,
            cycles: APT_CYCLES,
        }
    }

    /// Line coefficients `[E₊, E₋]` per retained order at one grid point.
    pub fn point_coefficients(&self, ib: usize, iphi: usize) -> Vec<[Complex64; 2]> {
        (0..self.orders.len())
            .map(|iq| [self.coefficients[[iq, 0, ib, iphi]], self.coefficients[[iq, 1, ib, iphi]]])
            .collect()
    }

    /// Line coefficients at an arbitrary `(β, φ)`, bilinear in β and periodic
    /// in φ; zero outside the divergence grid.
    pub fn interpolated_coefficients(&self, beta: f64, phi: f64) -> Vec<[Complex64; 2]> {
        let g = &self.divergence;
        let zero = vec![[Complex64::new(0.0, 0.0); 2]; self.orders.len()];
        if beta > g.radial_max || beta < 0.0 {
            return zero;
        }
        let fb = beta / g.radial_step();
        let ib = (fb.floor() as usize).min(g.n_radial - 2);
        let wb = fb - ib as f64;
        let fp = phi.rem_euclid(2.0 * PI) / g.azimuthal_step();
        let ip = (fp.floor() as usize) % g.n_azimuthal;
        let wp = fp - fp.floor();
        let ip1 = (ip + 1) % g.n_azimuthal;
        let corners = [
            (ib, ip, (1.0 - wb) * (1.0 - wp)),
            (ib + 1, ip, wb * (1.0 - wp)),
            (ib, ip1, (1.0 - wb) * wp),
            (ib + 1, ip1, wb * wp),
        ];
        (0..self.orders.len())
            .map(|iq| {
                let mut out = [Complex64::new(0.0, 0.0); 2];
                for (s, slot) in out.iter_mut().enumerate() {
                    for &(b, p, w) in &corners {
                        *slot += self.coefficients[[iq, s, b, p]] * w;
                    }
                }
                out
            })
            .collect()
    }

    /// Packed field `E_x + iE_y` at a grid point over the full time grid.
    pub fn series(&self, ib: usize, iphi: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.time.n_t];
        self.synthesizer().synthesize(self, &self.point_coefficients(ib, iphi), &mut out);
        out
    }

    /// Filtered power `Σ_q Σ_s ∫ |E|² dφ` of each divergence ring.
    pub fn power_by_radius(&self) -> Vec<f64> {
        let g = &self.divergence;
        (0..g.n_radial)
            .map(|ib| {
                let ring: f64 = self
                    .coefficients
                    .slice(s![.., .., ib, ..])
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum();
                ring * g.cell_area(ib)
            })
            .collect()
    }

    /// The field after a coordinated rotation by `alpha`: spatial rotation by
    /// α, polarization rotation by γα and delay by τα.
    pub fn coordinated_rotation(&self, params: &CoordinationParameters, alpha: f64) -> Result<AptField> {
        let shift = self.divergence.rotation_shift(alpha)?;
        let n = self.divergence.n_azimuthal as isize;
        let chi = params.gamma_f64() * alpha;
        let delay = params.tau() * alpha;
        let mut out = self.clone();
        for (iq, &q) in self.orders.iter().enumerate() {
            let delay_phase = Complex64::from_polar(1.0, q as f64 * self.omega * delay);
            for helicity in Helicity::BOTH {
                let s = helicity.index();
                let factor = rotation_phase(helicity, chi) * delay_phase;
                for ib in 0..self.divergence.n_radial {
                    for ip in 0..n {
                        let src = (ip - shift).rem_euclid(n) as usize;
                        out.coefficients[[iq, s, ib, ip as usize]] = self.coefficients[[iq, s, ib, src]] * factor;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Inverse-FFT synthesis of packed time series from line coefficients.
pub struct Synthesizer {
    fft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    n: usize,
    cycles: usize,
}

impl Synthesizer {
    /// Writes `Σ_q (conj(E₊) e^{iqωt} + E₋ e^{−iqωt})/√2` into `out`.
    pub fn synthesize(&mut self, apt: &AptField, coefficients: &[[Complex64; 2]], out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.n);
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let t0 = apt.time.t0;
        for (&q, c) in apt.orders.iter().zip(coefficients) {
            let k = q as usize * self.cycles;
            let phase = Complex64::from_polar(FRAC_1_SQRT_2, q as f64 * apt.omega * t0);
            out[k] += c[0].conj() * phase;
            out[self.n - k] += c[1] * phase.conj();
        }
        self.fft.process_with_scratch(out, &mut self.scratch);
    }
}

/// Truncated Gaussian window sampled at the series spacing.
#[derive(Debug, Clone)]
pub struct GaussianWindow {
    taps: Vec<f64>,
    half: usize,
    total: f64,
    dt: f64,
}

impl GaussianWindow {
    pub fn new(dt: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("window width must be positive, got {sigma}")));
        }
        let samples = sigma / dt;
        if samples < MIN_SAMPLES_PER_SIGMA {
            return Err(Error::UnderResolved { sigma, samples });
        }
        let half = (WINDOW_TRUNCATION * samples).ceil() as usize;
        let taps: Vec<f64> = (0..=2 * half)
            .map(|k| {
                let u = (k as f64 - half as f64) / samples;
                (-0.5 * u * u).exp()
            })
            .collect();
        let total = taps.iter().sum();
        Ok(Self { taps, half, total, dt })
    }

    /// `∫ values(t′) g(t′ − t_n) dt′` for each `n` in `range`. Near the
    /// series edges the truncated window is renormalized to the full weight.
    pub fn apply<T>(&self, values: &[T], range: std::ops::Range<usize>) -> Vec<T>
    where
        T: Copy + Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    {
        let len = values.len();
        range
            .map(|n| {
                let lo = n.saturating_sub(self.half);
                let hi = (n + self.half).min(len - 1);
                let mut acc = T::default();
                let mut weight = 0.0;
                for (m, &v) in values.iter().enumerate().take(hi + 1).skip(lo) {
                    let w = self.taps[m + self.half - n];
                    acc += v * w;
                    weight += w;
                }
                acc * (self.dt * self.total / weight)
            })
            .collect()
    }
}

/// Windowed quadrupole moment of a packed series `E_x + iE_y` sampled at `dt`.
pub fn t22_windowed(series: &[Complex64], dt: f64, sigma: f64) -> Result<Vec<Complex64>> {
    let window = GaussianWindow::new(dt, sigma)?;
    let squared: Vec<Complex64> = series.iter().map(|z| z * z).collect();
    Ok(window.apply(&squared, 0..series.len()))
}

/// Local orientation `½·arg T₂₂` in radians.
pub fn orientation(t22: Complex64) -> f64 {
    0.5 * t22.arg()
}

/// Radially integrated `T₂₂` over the azimuth and one cycle of ω.
#[derive(Debug, Clone, PartialEq)]
pub struct T22Map {
    pub theta: Vec<f64>,
    /// One cycle starting at `t = 0`.
    pub time: TimeGrid,
    pub sigma: f64,
    /// Divergence band `[β_lo, β_hi]` (rad) that was integrated.
    pub annulus: [f64; 2],
    /// Share of the filtered power inside the band.
    pub annulus_fraction: f64,
    /// `values[[iθ, it]]`.
    pub values: Array2<Complex64>,
    /// Windowed intensity `∫ |E|² g dt′` integrated over the same band.
    pub intensity: Array2<f64>,
}

impl T22Map {
    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_t(&self) -> usize {
        self.time.n_t
    }

    /// Pearson correlation between `|T₂₂|` and the windowed intensity.
    pub fn intensity_correlation(&self) -> f64 {
        let a: Vec<f64> = self.values.iter().map(|v| v.norm()).collect();
        let b: Vec<f64> = self.intensity.iter().copied().collect();
        pearson(&a, &b)
    }

    /// Largest `|a − b|` relative to `max |a|` after moving `other` by
    /// `shift_theta` azimuth samples and `shift_t` time samples and dividing by
    /// `phase`.
    pub fn shifted_residual(&self, other: &T22Map, shift_theta: isize, shift_t: isize, phase: Complex64) -> f64 {
        let (nth, nt) = self.values.dim();
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return other.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        }
        let mut worst: f64 = 0.0;
        for i in 0..nth {
            for n in 0..nt {
                let j = (i as isize + shift_theta).rem_euclid(nth as isize) as usize;
                let m = (n as isize + shift_t).rem_euclid(nt as isize) as usize;
                let diff = other.values[[j, m]] - self.values[[i, n]] * phase;
                worst = worst.max(diff.norm());
            }
        }
        worst / scale
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Narrowest contiguous band of rings holding at least `fraction` of the
/// total; ties go to the band with more power. Returns inclusive indices.
pub fn power_annulus(power: &[f64], fraction: f64) -> (usize, usize) {
    let total: f64 = power.iter().sum();
    let n = power.len();
    if total <= 0.0 {
        return (0, n - 1);
    }
    let target = fraction * total;
    let mut best = (0, n - 1, f64::NEG_INFINITY);
    for lo in 0..n {
        let mut acc = 0.0;
        for (hi, &p) in power.iter().enumerate().skip(lo) {
            acc += p;
            if acc >= target {
                let width = hi - lo;
                let best_width = best.1 - best.0;
                if width < best_width || (width == best_width && acc > best.2) {
                    best = (lo, hi, acc);
                }
                break;
            }
        }
    }
    (best.0, best.1)
}

/// `T₂₂` integrated over the narrowest divergence band holding
/// `power_fraction` of the filtered power, on the middle cycle of the train.
pub fn t22_map(apt: &AptField, sigma: f64, power_fraction: f64) -> Result<T22Map> {
    if !(power_fraction > 0.0 && power_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("power fraction must lie in (0, 1], got {power_fraction}")));
    }
    let window = GaussianWindow::new(apt.time.dt, sigma)?;
    let power = apt.power_by_radius();
    let (lo, hi) = power_annulus(&power, power_fraction);
    let total: f64 = power.iter().sum();
    let inside: f64 = power[lo..=hi].iter().sum();
    let g = &apt.divergence;
    let n = apt.samples_per_cycle;
    let middle = n..2 * n;

    let columns: Vec<(Vec<Complex64>, Vec<f64>)> = (0..g.n_azimuthal)
        .into_par_iter()
        .map_init(
            || (apt.synthesizer(), vec![Complex64::new(0.0, 0.0); apt.time.n_t]),
            |(synth, buf), iphi| {
                let mut t22 = vec![Complex64::new(0.0, 0.0); n];
                let mut intensity = vec![0.0; n];
                for ib in lo..=hi {
                    synth.synthesize(apt, &apt.point_coefficients(ib, iphi), buf);
                    let w = g.weights[ib];
                    let squared: Vec<Complex64> = buf.iter().map(|z| z * z).collect();
                    let power: Vec<f64> = buf.iter().map(|z| z.norm_sqr()).collect();
                    for (dst, v) in t22.iter_mut().zip(window.apply(&squared, middle.clone())) {
                        *dst += v * w;
                    }
                    for (dst, v) in intensity.iter_mut().zip(window.apply(&power, middle.clone())) {
                        *dst += v * w;
                    }
                }
                (t22, intensity)
            },
        )
        .collect();

    let mut values = Array2::zeros((g.n_azimuthal, n));
    let mut intensity = Array2::zeros((g.n_azimuthal, n));
    for (iphi, (t22, inten)) in columns.into_iter().enumerate() {
        values.row_mut(iphi).assign(&ndarray::Array1::from(t22));
        intensity.row_mut(iphi).assign(&ndarray::Array1::from(inten));
    }
    if values.iter().any(|v: &Complex64| !v.is_finite()) {
        return Err(Error::NonFinite("T22 map".into()));
    }
    Ok(T22Map {
        theta: g.azimuths(),
        time: TimeGrid::new(apt.time.dt, n, 0.0)?,
        sigma,
        annulus: [g.radii[lo], g.radii[hi]],
        annulus_fraction: if total > 0.0 { inside / total } else { 0.0 },
        values,
        intensity,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::basis::pack_real_field;
    use crate::field::symmetry_constants;
    use crate::response::HarmonicRange;

    pub(crate) fn gaussian_pulse(n: usize, dt: f64, width: f64, carrier: f64, chi: f64) -> Vec<Complex64> {
        let center = 0.5 * n as f64 * dt;
        (0..n)
            .map(|k| {
                let t = k as f64 * dt - center;
                let e = (-0.5 * (t / width).powi(2)).exp() * (carrier * t).cos();
                Complex64::from_polar(e, chi)
            })
            .collect()
    }

    #[test]
    fn x_linear_pulse_has_zero_phase() {
        let (n, dt) = (2048, 0.01);
        let z = gaussian_pulse(n, dt, 1.0, 30.0, 0.0);
        let t22 = t22_windowed(&z, dt, 0.2).unwrap();
        assert!(t22[n / 2].arg().abs() < 1e-12 && t22[n / 2].re > 0.0);
    }

    #[test]
    fn y_linear_pulse_has_phase_pi() {
        let (n, dt) = (2048, 0.01);
        let z = gaussian_pulse(n, dt, 1.0, 30.0, PI / 2.0);
        let t22 = t22_windowed(&z, dt, 0.2).unwrap();
        assert!((t22[n / 2].arg().abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn rotated_pulse_doubles_the_phase() {
        let (n, dt) = (2048, 0.01);
        let base = t22_windowed(&gaussian_pulse(n, dt, 1.0, 30.0, 0.0), dt, 0.2).unwrap();
        for chi in [0.1, 0.7, 1.3] {
            let rotated = t22_windowed(&gaussian_pulse(n, dt, 1.0, 30.0, chi), dt, 0.2).unwrap();
            for k in [n / 2 - 50, n / 2, n / 2 + 70] {
                let expected = base[k] * Complex64::from_polar(1.0, 2.0 * chi);
                assert!((rotated[k] - expected).norm() < 1e-6 * base[k].norm());
            }
        }
    }

    #[test]
    fn circular_light_averages_out_in_long_windows() {
        let omega = 2.0;
        let period = 2.0 * PI / omega;
        let dt = period / 64.0;
        let n = 64 * 60;
        let circular: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, omega * k as f64 * dt)).collect();
        let linear: Vec<Complex64> =
            (0..n).map(|k| Complex64::new((omega * k as f64 * dt).cos() * 2f64.sqrt(), 0.0)).collect();
        let sigma = 10.0 * period;
        let c = t22_windowed(&circular, dt, sigma).unwrap();
        let l = t22_windowed(&linear, dt, sigma).unwrap();
        assert!(c[n / 2].norm() < 1e-3 * l[n / 2].norm());
    }

    #[test]
    fn under_resolved_window_is_rejected() {
        let z = vec![Complex64::new(1.0, 0.0); 100];
        assert!(matches!(t22_windowed(&z, 0.1, 0.5), Err(Error::UnderResolved { .. })));
        assert!(t22_windowed(&z, 0.1, 0.8).is_ok());
        assert!(t22_windowed(&z, 0.1, -1.0).is_err());
    }

    #[test]
    fn edge_window_is_renormalized() {
        let z = vec![Complex64::new(1.0, 0.0); 400];
        let t22 = t22_windowed(&z, 0.1, 1.0).unwrap();
        let full = (2.0 * PI).sqrt() * 1.0;
        for v in [t22[0], t22[200], t22[399]] {
            assert!((v.re - full).abs() < 1e-3 * full);
        }
    }

    #[test]
    fn power_annulus_picks_narrowest_band() {
        let power = [0.0, 1.0, 8.0, 1.0, 0.0, 0.5];
        assert_eq!(power_annulus(&power, 0.75), (2, 2));
        assert_eq!(power_annulus(&power, 0.9), (1, 3));
        assert_eq!(power_annulus(&[0.0; 4], 0.8), (0, 3));
    }

    /// A far field with one order per helicity and a chosen azimuthal charge
    /// on a ring.
    pub(crate) fn synthetic_far(lines: &[(i64, Helicity, i64, Complex64)], harmonics: HarmonicRange) -> FarFieldGrid {
        let omega = 2.0;
        let divergence = DivergenceGrid::new(12, 32, 0.01).unwrap();
        let mut amplitude = Array4::zeros((harmonics.len(), 2, 12, 32));
        for &(q, h, m, a) in lines {
            let iq = harmonics.index(q).unwrap();
            for ib in 0..12 {
                let radial = (-((divergence.radii[ib] - 0.005) / 0.002).powi(2)).exp();
                for ip in 0..32 {
                    amplitude[[iq, h.index(), ib, ip]] +=
                        a * radial * Complex64::from_polar(1.0, m as f64 * divergence.azimuth(ip));
                }
            }
        }
        FarFieldGrid {
            divergence,
            omega,
            wavenumbers: harmonics.orders().map(|q| crate::farfield::harmonic_wavenumber(q, omega)).collect(),
            harmonics,
            amplitude,
            warnings: vec![],
        }
    }

    #[test]
    fn single_line_is_a_circular_carrier() {
        let h = HarmonicRange::new(4, 6).unwrap();
        let a = Complex64::new(0.4, 0.3);
        let far = synthetic_far(&[(4, Helicity::Right, 0, a)], h);
        let apt = reconstruct_apt(&far, 4, 64).unwrap();
        let series = apt.series(6, 0);
        let radial = (-((apt.divergence.radii[6] - 0.005) / 0.002f64).powi(2)).exp();
        for (n, z) in series.iter().enumerate() {
            let t = apt.time.time(n);
            let expected = pack_real_field(a * radial * Complex64::from_polar(1.0, -4.0 * apt.omega * t), Complex64::new(0.0, 0.0));
            assert!((z - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn co_rotating_pair_beats_at_three_omega() {
        let h = HarmonicRange::new(4, 7).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let far = synthetic_far(&[(4, Helicity::Right, 0, one), (7, Helicity::Right, 0, one)], h);
        let apt = reconstruct_apt(&far, 4, 96).unwrap();
        let series = apt.series(6, 0);
        let envelope: Vec<f64> = series.iter().map(|z| z.norm()).collect();
        // |e^{4iωt} + e^{7iωt}| repeats every third of a cycle
        for n in 0..envelope.len() - 32 {
            assert!((envelope[n] - envelope[n + 32]).abs() < 1e-12);
        }
        let lo = envelope.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(lo < 1e-2 * envelope.iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn low_orders_are_filtered_out() {
        let h = HarmonicRange::new(4, 7).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let far = synthetic_far(&[(4, Helicity::Right, 0, one)], h);
        let apt = reconstruct_apt(&far, 5, 64).unwrap();
        assert!(apt.series(6, 3).iter().all(|z| z.norm() < 1e-14));
        assert!(reconstruct_apt(&far, 3, 64).is_err());
        assert!(reconstruct_apt(&far, 5, 12).is_err());
    }

    #[test]
    fn map_is_covariant_under_coordinated_rotation() {
        // arbitrary (non-symmetric) content so that covariance is not trivial
        let h = HarmonicRange::new(10, 14).unwrap();
        let far = synthetic_far(
            &[
                (10, Helicity::Right, 3, Complex64::new(1.0, 0.2)),
                (11, Helicity::Left, -2, Complex64::new(0.3, -0.5)),
                (13, Helicity::Right, 7, Complex64::new(-0.4, 0.1)),
                (14, Helicity::Left, 1, Complex64::new(0.2, 0.6)),
                (12, Helicity::Right, 0, Complex64::new(0.1, 0.1)),
            ],
            h,
        );
        let params = symmetry_constants(1, 1, far.omega).unwrap();
        let apt = reconstruct_apt(&far, 10, 192).unwrap();
        let sigma = sigma_from_degrees(15.0, far.omega);
        let map = t22_map(&apt, sigma, 0.8).unwrap();
        // three azimuth steps: τα = 2/(3ω)·3·2π/32 = T/16 = 12 samples
        let alpha = 3.0 * apt.divergence.azimuthal_step();
        let rotated = t22_map(&apt.coordinated_rotation(&params, alpha).unwrap(), sigma, 0.8).unwrap();
        let phase = Complex64::from_polar(1.0, 2.0 * params.gamma_f64() * alpha);
        assert!(map.shifted_residual(&rotated, 3, 12, phase) < 1e-8);
        // wrong sign of the delay must not match
        assert!(map.shifted_residual(&rotated, 3, -12, phase) > 1e-3);
    }

    #[test]
    fn orientation_survives_whole_period_translation() {
        let h = HarmonicRange::new(10, 11).unwrap();
        let far = synthetic_far(
            &[(10, Helicity::Right, 3, Complex64::new(1.0, 0.0)), (11, Helicity::Left, 4, Complex64::new(0.8, 0.3))],
            h,
        );
        let apt = reconstruct_apt(&far, 10, 192).unwrap();
        let sigma = sigma_from_degrees(15.0, far.omega);
        let series = apt.series(6, 5);
        let t22 = t22_windowed(&series, apt.time.dt, sigma).unwrap();
        for k in 192..288 {
            let a = orientation(t22[k]);
            let b = orientation(t22[k - 64]);
            let c = orientation(t22[k + 192]);
            assert!((a - c).to_degrees().rem_euclid(180.0).min((c - a).to_degrees().rem_euclid(180.0)) < 1e-8);
            // a third of a cycle later the doublet is rotated by 120°
            let d = (a - b).to_degrees().rem_euclid(180.0);
            assert!((d - 120.0).abs() < 1e-8, "{d}");
        }
    }
}
