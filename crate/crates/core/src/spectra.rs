//! OAM and TKAM spectra of the far-field harmonics, the TKAM conservation
//! fit and selection-rule diagnostics.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::s;
use serde::{Deserialize, Serialize};

use crate::basis::Helicity;
use crate::error::{Error, Result};
use crate::farfield::{azimuthal_modes, mode_order, FarFieldGrid};
use crate::field::charges::{on_third_lattice, to_f64, CoordinationParameters, Rational};
use crate::field::LocalSymmetry;
use crate::response::EmissionGrid;

/// Purity required of a "single mode" line.
pub const PURITY_THRESHOLD: f64 = 0.95;

/// Largest tolerated power fraction in the two band-edge OAM bins.
pub const BAND_EDGE_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// OAM index.
    pub m: i64,
    /// TKAM index `m + γs`.
    pub j: Rational,
    pub power: f64,
}

/// Power per azimuthal index for one harmonic and circular component.
/// Entries run over `m ∈ [−N/2, N/2)` in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    pub q: i64,
    pub helicity: Helicity,
    /// γ used for the TKAM indices (0 for a plain OAM spectrum).
    pub gamma: Rational,
    pub entries: Vec<SpectrumEntry>,
}

impl AngularSpectrum {
    pub fn total_power(&self) -> f64 {
        self.entries.iter().map(|e| e.power).sum()
    }

    pub fn dominant(&self) -> Option<&SpectrumEntry> {
        self.entries
            .iter()
            .filter(|e| e.power > 0.0)
            .fold(None, |best: Option<&SpectrumEntry>, e| match best {
                Some(b) if b.power >= e.power => Some(b),
                _ => Some(e),
            })
    }

    /// Fraction of the power in the dominant index.
    pub fn purity(&self) -> f64 {
        let total = self.total_power();
        match self.dominant() {
            Some(d) if total > 0.0 => d.power / total,
            _ => 0.0,
        }
    }

    pub fn power_at(&self, m: i64) -> f64 {
        self.entries.iter().find(|e| e.m == m).map_or(0.0, |e| e.power)
    }

    pub fn mean_oam(&self) -> f64 {
        let total = self.total_power();
        if total == 0.0 {
            return 0.0;
        }
        self.entries.iter().map(|e| e.m as f64 * e.power).sum::<f64>() / total
    }

    /// Power-weighted standard deviation of the OAM index.
    pub fn oam_standard_deviation(&self) -> f64 {
        let total = self.total_power();
        if total == 0.0 {
            return 0.0;
        }
        let mean = self.mean_oam();
        let variance =
            self.entries.iter().map(|e| (e.m as f64 - mean).powi(2) * e.power).sum::<f64>() / total;
        variance.sqrt()
    }

    /// Power fraction in the two outermost OAM bins, a measure of azimuthal
    /// aliasing.
    pub fn band_edge_fraction(&self) -> f64 {
        let total = self.total_power();
        if total == 0.0 || self.entries.len() < 2 {
            return 0.0;
        }
        let edge = self.entries[0].power + self.entries[self.entries.len() - 1].power;
        edge / total
    }
}

/// `P(m) = ∫ |(1/2π)∫ E_s(β, φ) e^{−imφ} dφ|² 2πβ dβ`; the 2π makes `Σ_m P(m)`
/// equal the far-field power of the component.
pub fn oam_spectrum(far: &FarFieldGrid, q: i64, helicity: Helicity) -> Result<AngularSpectrum> {
    let iq = far.harmonics.index(q)?;
    let values = far.amplitude.slice(s![iq, helicity.index(), .., ..]);
    Ok(spectrum_of(values, &far.divergence, q, helicity))
}

/// Same decomposition applied to the near-field emission lines.
pub fn near_field_oam_spectrum(emission: &EmissionGrid, q: i64, helicity: Helicity) -> Result<AngularSpectrum> {
    Ok(spectrum_of(emission.line(q, helicity)?, &emission.transverse, q, helicity))
}

fn spectrum_of(
    values: ndarray::ArrayView2<'_, num_complex::Complex64>,
    grid: &crate::grid::PolarGrid,
    q: i64,
    helicity: Helicity,
) -> AngularSpectrum {
    let n = grid.n_azimuthal;
    let modes = azimuthal_modes(values);
    let mut entries: Vec<SpectrumEntry> = (0..n)
        .map(|k| {
            let power = (0..grid.n_radial).map(|ir| grid.weights[ir] * modes[[ir, k]].norm_sqr()).sum();
            let m = mode_order(k, n);
            SpectrumEntry { m, j: Rational::from_integer(m), power }
        })
        .collect();
    entries.sort_by_key(|e| e.m);
    AngularSpectrum { q, helicity, gamma: Rational::from_integer(0), entries }
}

/// Re-indexes an OAM spectrum by the TKAM charge `j = m + γs`.
pub fn tkam_spectrum(oam: &AngularSpectrum, gamma: Rational) -> Result<AngularSpectrum> {
    if !on_third_lattice(gamma) {
        return Err(Error::InvalidArgument(format!("γ = {gamma} is not on the one-third lattice")));
    }
    let shift = gamma * oam.helicity.sign();
    Ok(AngularSpectrum {
        gamma,
        entries: oam.entries.iter().map(|e| SpectrumEntry { j: Rational::from_integer(e.m) + shift, ..*e }).collect(),
        ..oam.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicConservation {
    pub q: i64,
    pub dominant_j: Rational,
    pub expected_j: Rational,
    pub matches: bool,
    /// Fraction of the harmonic's power (both helicities) at the dominant j.
    pub purity: f64,
    /// OAM and helicity of the strongest single (m, s) bin.
    pub dominant_m: i64,
    pub dominant_helicity: Helicity,
    pub expected_oam: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub harmonics: Vec<HarmonicConservation>,
    /// Least-squares slope of dominant j against q through the origin.
    pub slope: f64,
    pub slope_uncertainty: f64,
    pub expected_slope: Rational,
}

impl ConservationReport {
    pub fn all_match(&self) -> bool {
        self.harmonics.iter().all(|h| h.matches)
    }

    pub fn min_purity(&self) -> f64 {
        self.harmonics.iter().map(|h| h.purity).fold(f64::INFINITY, f64::min)
    }

    pub fn slope_error(&self) -> f64 {
        let expected = to_f64(self.expected_slope);
        if expected == 0.0 {
            self.slope.abs()
        } else {
            (self.slope / expected - 1.0).abs()
        }
    }
}

/// Dominant TKAM charge of every allowed harmonic and the linear fit
/// `j = slope·q`. `spectra` holds OAM or TKAM spectra of both helicities;
/// they are re-indexed with `params.gamma`.
pub fn conservation_fit(spectra: &[AngularSpectrum], params: &CoordinationParameters) -> Result<ConservationReport> {
    let mut by_q: BTreeMap<i64, Vec<&AngularSpectrum>> = BTreeMap::new();
    for s in spectra.iter().filter(|s| s.q.rem_euclid(3) != 0) {
        by_q.entry(s.q).or_default().push(s);
    }
    let mut harmonics = Vec::new();
    for (&q, group) in &by_q {
        let mut per_j: BTreeMap<Rational, f64> = BTreeMap::new();
        let mut strongest: Option<(f64, i64, Helicity)> = None;
        for spectrum in group {
            let tkam = tkam_spectrum(spectrum, params.gamma)?;
            for e in &tkam.entries {
                *per_j.entry(e.j).or_default() += e.power;
                if strongest.is_none_or(|(p, _, _)| e.power > p) {
                    strongest = Some((e.power, e.m, tkam.helicity));
                }
            }
        }
        let total: f64 = per_j.values().sum();
        if total == 0.0 {
            continue;
        }
        let (dominant_j, peak) = per_j
            .iter()
            .fold((Rational::from_integer(0), -1.0), |best, (&j, &p)| if p > best.1 { (j, p) } else { best });
        let expected_j = params.tkam_charge(q)?;
        let (expected_oam, _) = params.expected_harmonic_oam(q)?;
        let (_, dominant_m, dominant_helicity) = strongest.expect("nonzero power");
        harmonics.push(HarmonicConservation {
            q,
            dominant_j,
            expected_j,
            matches: dominant_j == expected_j,
            purity: peak / total,
            dominant_m,
            dominant_helicity,
            expected_oam,
        });
    }
    if harmonics.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "conservation fit needs at least 3 allowed harmonics with power, got {}",
            harmonics.len()
        )));
    }
    let sqq: f64 = harmonics.iter().map(|h| (h.q * h.q) as f64).sum();
    let sqj: f64 = harmonics.iter().map(|h| h.q as f64 * to_f64(h.dominant_j)).sum();
    let slope = sqj / sqq;
    let residual: f64 = harmonics.iter().map(|h| (to_f64(h.dominant_j) - slope * h.q as f64).powi(2)).sum();
    let slope_uncertainty = (residual / (harmonics.len() - 1) as f64 / sqq).sqrt();
    Ok(ConservationReport { harmonics, slope, slope_uncertainty, expected_slope: params.j1 })
}

/// Total power per harmonic and helicity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinePowers(pub BTreeMap<i64, [f64; 2]>);

impl LinePowers {
    /// Slab-integrated window powers of the near-field emission.
    pub fn from_emission(emission: &EmissionGrid) -> Result<Self> {
        emission.harmonics.orders().map(|q| Ok((q, emission.slab_power(q)?))).collect::<Result<_>>().map(Self)
    }

    /// Far-field line powers.
    pub fn from_far_field(far: &FarFieldGrid) -> Result<Self> {
        far.harmonics.orders().map(|q| Ok((q, far.power(q)?))).collect::<Result<_>>().map(Self)
    }

    pub fn total(&self, q: i64) -> Option<f64> {
        self.0.get(&q).map(|p| p[0] + p[1])
    }
}

/// Largest suppression reported, for lines with no power at all.
pub const MAX_SUPPRESSION_DB: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Suppression {
    /// Power of the line relative to the mean of its allowed neighbors
    /// `q ± 1, q ± 2`, in dB below.
    Suppressed { q: i64, db: f64 },
    /// The driver has no threefold symmetry, so no line is forbidden.
    NotTrefoil,
}

impl Suppression {
    pub fn db(&self) -> Option<f64> {
        match self {
            Suppression::Suppressed { db, .. } => Some(*db),
            Suppression::NotTrefoil => None,
        }
    }
}

pub fn forbidden_line_suppression(powers: &LinePowers, q: i64, symmetry: LocalSymmetry) -> Result<Suppression> {
    if q.rem_euclid(3) != 0 {
        return Err(Error::InvalidArgument(format!("harmonic {q} is not a 3n line")));
    }
    if symmetry != LocalSymmetry::Trefoil {
        return Ok(Suppression::NotTrefoil);
    }
    let line = powers.total(q).ok_or_else(|| Error::InvalidArgument(format!("harmonic {q} not computed")))?;
    let neighbors: Vec<f64> = [q - 2, q - 1, q + 1, q + 2].iter().filter_map(|&p| powers.total(p)).collect();
    if neighbors.is_empty() {
        return Err(Error::InvalidArgument(format!("no allowed neighbors of harmonic {q} computed")));
    }
    let mean = neighbors.iter().sum::<f64>() / neighbors.len() as f64;
    let db = if mean == 0.0 {
        0.0
    } else if line == 0.0 {
        MAX_SUPPRESSION_DB
    } else {
        (10.0 * (mean / line).log10()).min(MAX_SUPPRESSION_DB)
    };
    Ok(Suppression::Suppressed { q, db })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub q: i64,
    pub s: i64,
    pub m: i64,
    pub j_num: i64,
    pub j_den: i64,
    pub power: f64,
}

/// Row order of an exported spectrum table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrder {
    /// `(q, s, m)`.
    Oam,
    /// `(q, j, s)`.
    Tkam,
}

/// Writes TKAM-indexed spectra as `q,s,m,j_num,j_den,power`.
pub fn write_spectra_csv<W: Write>(spectra: &[AngularSpectrum], order: RowOrder, writer: W) -> Result<()> {
    let mut rows: Vec<SpectrumRow> = spectra
        .iter()
        .flat_map(|sp| {
            sp.entries.iter().map(move |e| SpectrumRow {
                q: sp.q,
                s: sp.helicity.sign(),
                m: e.m,
                j_num: *e.j.numer(),
                j_den: *e.j.denom(),
                power: e.power,
            })
        })
        .collect();
    match order {
        RowOrder::Oam => rows.sort_by_key(|r| (r.q, r.s, r.m)),
        RowOrder::Tkam => rows.sort_by_key(|r| (r.q, Rational::new(r.j_num, r.j_den), r.s)),
    }
    let mut out = csv::Writer::from_writer(writer);
    for row in &rows {
        out.serialize(row).map_err(|e| Error::Output(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}
