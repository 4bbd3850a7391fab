use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;

use crate::basis::{pack_real_field, Helicity};
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, TransverseGrid};
use crate::units::ATOMIC_INTENSITY_W_CM2;

/// One monochromatic circular channel of a field: the coefficient of
/// `ê_s e^{-i n ω t}` at every transverse sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldChannel {
    pub helicity: Helicity,
    pub carrier_multiple: u32,
    /// Complex amplitude in atomic units, indexed `[radius, azimuth]`.
    pub amplitude: Array2<Complex64>,
}

impl FieldChannel {
    fn key(&self) -> (Helicity, u32) {
        (self.helicity, self.carrier_multiple)
    }
}

/// Complex field sampled on a polar transverse grid × time grid.
///
/// Every driver used here is a sum of monochromatic circular channels that
/// share a single real envelope, so the samples factorize as
///
/// ```text
/// E_s(r, θ, t) = env(t) · Σ_{channels c with helicity s} a_c(r, θ) e^{-i n_c ω t}
/// ```
///
/// and are stored in that form; [`FieldGrid::sample`] and
/// [`FieldGrid::packed_series`] expand them on demand. The physical field is
/// `Re[E₊ê₊ + E₋ê₋]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub transverse: TransverseGrid,
    pub time: TimeGrid,
    /// Fundamental angular frequency (rad/fs).
    pub omega: f64,
    /// Envelope value at each time sample.
    pub envelope: Vec<f64>,
    pub channels: Vec<FieldChannel>,
}

/// Local dynamical symmetry of a field, as far as the selection rules care.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalSymmetry {
    /// Counter-rotating ω (right) and 2ω (left) components: threefold
    /// rotation–delay symmetry at every point.
    Trefoil,
    /// Anything else.
    Other,
}

impl FieldGrid {
    pub fn new(
        transverse: TransverseGrid,
        time: TimeGrid,
        omega: f64,
        envelope: Vec<f64>,
        channels: Vec<FieldChannel>,
    ) -> Result<Self> {
        let grid = Self { transverse, time, omega, envelope, channels };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let shape = [self.transverse.n_radial, self.transverse.n_azimuthal];
        if self.envelope.len() != self.time.n_t {
            return Err(Error::Grid(format!(
                "envelope has {} samples, time grid has {}",
                self.envelope.len(),
                self.time.n_t
            )));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Grid(format!("ω must be positive, got {}", self.omega)));
        }
        for c in &self.channels {
            if c.amplitude.shape() != shape {
                return Err(Error::Grid(format!(
                    "channel amplitude has shape {:?}, transverse grid is {:?}",
                    c.amplitude.shape(),
                    shape
                )));
            }
            if c.amplitude.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite("field channel amplitude".into()));
            }
        }
        if self.envelope.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("field envelope".into()));
        }
        Ok(())
    }

    /// A field with the same grids and no channels.
    pub fn empty_like(&self) -> Self {
        Self { channels: Vec::new(), ..self.clone() }
    }

    /// `env(t_n)·e^{-i n_c ω t_n}` for every channel and time sample.
    pub fn carrier_table(&self) -> Vec<Vec<Complex64>> {
        self.channels
            .iter()
            .map(|c| {
                let w = c.carrier_multiple as f64 * self.omega;
                (0..self.time.n_t)
                    .map(|n| Complex64::from_polar(self.envelope[n], -w * self.time.time(n)))
                    .collect()
            })
            .collect()
    }

    /// Circular components `(E₊, E₋)` at one sample.
    pub fn sample(&self, ir: usize, ith: usize, it: usize) -> [Complex64; 2] {
        let t = self.time.time(it);
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for c in &self.channels {
            let carrier = Complex64::from_polar(
                self.envelope[it],
                -(c.carrier_multiple as f64) * self.omega * t,
            );
            out[c.helicity.index()] += c.amplitude[[ir, ith]] * carrier;
        }
        out
    }

    /// Packed real field `E_x + iE_y` at one transverse point over the whole
    /// time grid, using a table from [`FieldGrid::carrier_table`].
    pub fn packed_series_into(
        &self,
        carriers: &[Vec<Complex64>],
        ir: usize,
        ith: usize,
        out: &mut [Complex64],
    ) {
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (c, table) in self.channels.iter().zip(carriers) {
            let a = c.amplitude[[ir, ith]];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (z, &g) in out.iter_mut().zip(table) {
                let e = a * g;
                *z += match c.helicity {
                    Helicity::Right => pack_real_field(e, Complex64::new(0.0, 0.0)),
                    Helicity::Left => pack_real_field(Complex64::new(0.0, 0.0), e),
                };
            }
        }
    }

    pub fn packed_series(&self, ir: usize, ith: usize) -> Vec<Complex64> {
        let carriers = self.carrier_table();
        let mut out = vec![Complex64::new(0.0, 0.0); self.time.n_t];
        self.packed_series_into(&carriers, ir, ith, &mut out);
        out
    }

    /// Cycle-averaged intensity (W/cm²) at the envelope maximum.
    ///
    /// Distinct channels are orthogonal over a cycle, so this is
    /// `I_au · Σ_c |a_c|²` with the channels of equal helicity and carrier
    /// added coherently first.
    pub fn cycle_averaged_intensity(&self, ir: usize, ith: usize) -> f64 {
        let mut merged: BTreeMap<(Helicity, u32), Complex64> = BTreeMap::new();
        for c in &self.channels {
            *merged.entry(c.key()).or_default() += c.amplitude[[ir, ith]];
        }
        ATOMIC_INTENSITY_W_CM2 * merged.values().map(|a| a.norm_sqr()).sum::<f64>()
    }

    /// Channels merged by `(helicity, carrier)`, in a canonical order.
    pub fn merged_channels(&self) -> Vec<FieldChannel> {
        let mut merged: BTreeMap<(Helicity, u32), Array2<Complex64>> = BTreeMap::new();
        for c in &self.channels {
            merged
                .entry(c.key())
                .and_modify(|a| *a += &c.amplitude)
                .or_insert_with(|| c.amplitude.clone());
        }
        merged
            .into_iter()
            .map(|((helicity, carrier_multiple), amplitude)| FieldChannel {
                helicity,
                carrier_multiple,
                amplitude,
            })
            .collect()
    }

    /// Field restricted to a single channel.
    pub fn component(&self, index: usize) -> Result<Self> {
        let channel = self.channels.get(index).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!("field has no channel {index}"))
        })?;
        Ok(Self { channels: vec![channel], ..self.clone() })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.transverse != other.transverse
            || self.time != other.time
            || self.omega != other.omega
            || self.envelope != other.envelope
        {
            return Err(Error::Grid("fields are sampled on different grids".into()));
        }
        Ok(())
    }

    /// `self − other`, channel by channel.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut channels = self.channels.clone();
        channels.extend(other.channels.iter().map(|c| FieldChannel {
            amplitude: c.amplitude.mapv(|a| -a),
            ..c.clone()
        }));
        Ok(Self { channels, ..self.clone() }.merged())
    }

    /// `self + other`, channel by channel.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut channels = self.channels.clone();
        channels.extend(other.channels.iter().cloned());
        Ok(Self { channels, ..self.clone() }.merged())
    }

    fn merged(self) -> Self {
        let channels = self.merged_channels();
        Self { channels, ..self }
    }

    /// Squared L² norm over all samples,
    /// `Σ_{r,θ} cell_area · Σ_t (|E₊|² + |E₋|²)`.
    ///
    /// Evaluated through the Gram matrix of the per-channel time factors,
    /// which is exact for the factorized representation.
    pub fn norm_squared(&self) -> f64 {
        let merged = self.merged_channels();
        let carriers = Self { channels: merged.clone(), ..self.empty_like() }.carrier_table();
        let mut total = 0.0;
        for (i, ci) in merged.iter().enumerate() {
            for (j, cj) in merged.iter().enumerate() {
                if ci.helicity != cj.helicity {
                    continue;
                }
                let gram: Complex64 =
                    carriers[i].iter().zip(&carriers[j]).map(|(a, b)| a.conj() * b).sum();
                let mut spatial = Complex64::new(0.0, 0.0);
                for ir in 0..self.transverse.n_radial {
                    let area = self.transverse.cell_area(ir);
                    let row: Complex64 = ci
                        .amplitude
                        .row(ir)
                        .iter()
                        .zip(cj.amplitude.row(ir))
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    spatial += row * area;
                }
                total += (spatial * gram).re;
            }
        }
        total.max(0.0)
    }

    /// Relative L² distance `‖self − other‖ / ‖self‖` (0 when both vanish).
    pub fn relative_distance(&self, other: &Self) -> Result<f64> {
        let reference = self.norm_squared();
        let diff = self.difference(other)?.norm_squared();
        if reference == 0.0 {
            return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok((diff / reference).sqrt())
    }

    /// Cycle-averaged power of each channel, `Σ cell_area |a_c|²`.
    pub fn channel_powers(&self) -> Vec<f64> {
        self.channels
            .iter()
            .map(|c| {
                (0..self.transverse.n_radial)
                    .map(|ir| {
                        self.transverse.cell_area(ir)
                            * c.amplitude.row(ir).iter().map(|a| a.norm_sqr()).sum::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    pub fn local_symmetry(&self) -> LocalSymmetry {
        let merged = self.merged_channels();
        let active: Vec<(Helicity, u32)> = merged
            .iter()
            .filter(|c| c.amplitude.iter().any(|a| a.norm() > 0.0))
            .map(|c| c.key())
            .collect();
        if active == [(Helicity::Right, 1), (Helicity::Left, 2)] {
            LocalSymmetry::Trefoil
        } else {
            LocalSymmetry::Other
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn random_field(seed: u64) -> FieldGrid {
        let transverse = TransverseGrid::new(5, 8, 2.0).unwrap();
        let time = TimeGrid::new(0.05, 64, -1.0).unwrap();
        let envelope: Vec<f64> = (0..64).map(|n| (n as f64 * 0.1).sin().abs()).collect();
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let channels = [(Helicity::Right, 1), (Helicity::Left, 2), (Helicity::Right, 3)]
            .into_iter()
            .map(|(helicity, carrier_multiple)| FieldChannel {
                helicity,
                carrier_multiple,
                amplitude: Array2::from_shape_fn((5, 8), |_| Complex64::new(next(), next())),
            })
            .collect();
        FieldGrid::new(transverse, time, 1.3, envelope, channels).unwrap()
    }

    #[test]
    fn gram_norm_matches_sample_sum() {
        let f = random_field(7);
        let mut brute = 0.0;
        for ir in 0..5 {
            for ith in 0..8 {
                for it in 0..64 {
                    let [p, m] = f.sample(ir, ith, it);
                    brute += f.transverse.cell_area(ir) * (p.norm_sqr() + m.norm_sqr());
                }
            }
        }
        let fast = f.norm_squared();
        assert!((fast - brute).abs() < 1e-12 * brute, "{fast} {brute}");
    }

    #[test]
    fn packed_series_matches_samples() {
        let f = random_field(3);
        let series = f.packed_series(2, 5);
        for (it, z) in series.iter().enumerate() {
            let [p, m] = f.sample(2, 5, it);
            assert!((pack_real_field(p, m) - z).norm() < 1e-14);
        }
    }

    #[test]
    fn difference_of_identical_fields_vanishes() {
        let f = random_field(11);
        assert_eq!(f.relative_distance(&f).unwrap(), 0.0);
        let g = random_field(12);
        assert!(f.relative_distance(&g).unwrap() > 0.1);
    }

    #[test]
    fn intensity_of_single_circular_channel() {
        let transverse = TransverseGrid::new(2, 4, 1.0).unwrap();
        let time = TimeGrid::new(0.1, 4, 0.0).unwrap();
        let a = 0.05;
        let channels = vec![FieldChannel {
            helicity: Helicity::Left,
            carrier_multiple: 2,
            amplitude: Array2::from_elem((2, 4), Complex64::from_polar(a, PI / 3.0)),
        }];
        let f = FieldGrid::new(transverse, time, 1.0, vec![1.0; 4], channels).unwrap();
        assert!((f.cycle_averaged_intensity(0, 0) - a * a * ATOMIC_INTENSITY_W_CM2).abs() < 1.0);
        assert_eq!(f.local_symmetry(), LocalSymmetry::Other);
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let transverse = TransverseGrid::new(3, 4, 1.0).unwrap();
        let time = TimeGrid::new(0.1, 4, 0.0).unwrap();
        let channels = vec![FieldChannel {
            helicity: Helicity::Right,
            carrier_multiple: 1,
            amplitude: Array2::zeros((2, 4)),
        }];
        assert!(FieldGrid::new(transverse.clone(), time, 1.0, vec![1.0; 4], channels).is_err());
        assert!(FieldGrid::new(transverse, time, 1.0, vec![1.0; 3], vec![]).is_err());
    }
}
