//! Run configuration.
//!
//! A TOML file with the sections below. Every key is optional and falls back
//! to the documented default; unknown keys are rejected.
//!
//! ```toml
//! [driver]
//! l1 = 1                       # OAM of the ω component (right circular)
//! l2 = 1                       # OAM of the 2ω component (left circular)
//! wavelength_nm = 800.0        # fundamental wavelength
//! total_intensity_w_cm2 = 2e14 # peak intensity of both colors together
//! split = 0.5                  # share of the intensity carried by ω
//! waist_um = 30.0              # common beam waist
//! # gamma = "-1/3"             # optional: must equal (l2 − 2·l1)/3
//!
//! [envelope]
//! kind = "trapezoid"           # or "cw"
//! ramp_up_fs = 5.3
//! flat_fs = 10.7
//! ramp_down_fs = 5.3
//!
//! [perturbation]               # optional section
//! fraction = 0.1
//! relative_phase = "in_phase"  # or "out_of_phase"
//! # donut_width_um = 21.2      # default waist/√2
//!
//! [model]
//! kind = "surrogate"           # or "sfa"
//! q_min = 7
//! q_max = 23
//!
//! [surrogate]
//! effective_order = 1.5
//! intrinsic_phase_coeff = 0.0  # α₀, rad per 10¹⁴ W/cm² per harmonic order
//!
//! [sfa]
//! ionization_potential_ev = 15.76
//! window_cycles = 1.5
//! tolerance = 0.1
//! trajectories = "all"         # "short", "long" or "all"
//! epsilon = 1e-4
//!
//! [grids]
//! n_r = 120
//! n_theta = 128
//! # r_max_um = 90.0            # default 3·waist
//! samples_per_2w_cycle = 128
//! padding_fs = 2.0             # zero-field margin around the pulse
//! n_beta = 100                # minimum; raised to resolve the slab extent
//! beta_margin = 6.0
//!
//! [analysis]
//! q_filter = 10                # lowest order kept in the pulse train
//! sigma_deg = 15.0             # T₂₂ window width σ in degrees of ω-phase
//! annulus_fraction = 0.8
//! apt_samples_per_cycle = 256
//! conservation_q_min = 10
//! conservation_q_max = 20
//! grid_points = 64             # Cartesian pulse-train export, per axis
//! grid_times = 128
//!
//! [output]
//! directory = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::charges::{on_third_lattice, parse_rational};
use crate::field::driver::default_donut_width;
use crate::field::{coordination_parameter, DriverSpec, EnvelopeSpec, PerturbationSpec, RelativePhase};
use crate::grid::{TimeGrid, TransverseGrid};
use crate::response::{HarmonicRange, SfaParams, SurrogateParams, TrajectoryClass, DEFAULT_EFFECTIVE_ORDER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverConfig {
    pub l1: i64,
    pub l2: i64,
    pub wavelength_nm: f64,
    pub total_intensity_w_cm2: f64,
    pub split: f64,
    pub waist_um: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            l1: 1,
            l2: 1,
            wavelength_nm: 800.0,
            total_intensity_w_cm2: 2e14,
            split: 0.5,
            waist_um: 30.0,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    Trapezoid,
    Cw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub kind: EnvelopeKind,
    pub ramp_up_fs: f64,
    pub flat_fs: f64,
    pub ramp_down_fs: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { kind: EnvelopeKind::Trapezoid, ramp_up_fs: 5.3, flat_fs: 10.7, ramp_down_fs: 5.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub fraction: f64,
    pub relative_phase: RelativePhase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub donut_width_um: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Surrogate,
    Sfa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub q_min: i64,
    pub q_max: i64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { kind: ModelKind::Surrogate, q_min: 7, q_max: 23 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub effective_order: f64,
    pub intrinsic_phase_coeff: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self { effective_order: DEFAULT_EFFECTIVE_ORDER, intrinsic_phase_coeff: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SfaConfig {
    pub ionization_potential_ev: f64,
    pub window_cycles: f64,
    pub tolerance: f64,
    pub trajectories: TrajectoryClass,
    pub epsilon: f64,
}

impl Default for SfaConfig {
    fn default() -> Self {
        let argon = SfaParams::argon(HarmonicRange { q_min: 1, q_max: 1 });
        Self {
            ionization_potential_ev: argon.ionization_potential_ev,
            window_cycles: argon.window_cycles,
            tolerance: argon.tolerance,
            trajectories: argon.trajectories,
            epsilon: argon.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridsConfig {
    pub n_r: usize,
    pub n_theta: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max_um: Option<f64>,
    pub samples_per_2w_cycle: usize,
    pub padding_fs: f64,
    pub n_beta: usize,
    pub beta_margin: f64,
}

impl Default for GridsConfig {
    fn default() -> Self {
        Self {
            n_r: 120,
            n_theta: 128,
            r_max_um: None,
            samples_per_2w_cycle: 128,
            padding_fs: 2.0,
            n_beta: 100,
            beta_margin: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub q_filter: i64,
    pub sigma_deg: f64,
    pub annulus_fraction: f64,
    pub apt_samples_per_cycle: usize,
    pub conservation_q_min: i64,
    pub conservation_q_max: i64,
    pub grid_points: usize,
    pub grid_times: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            q_filter: 10,
            sigma_deg: 15.0,
            annulus_fraction: 0.8,
            apt_samples_per_cycle: 256,
            conservation_q_min: 10,
            conservation_q_max: 20,
            grid_points: 64,
            grid_times: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub driver: DriverConfig,
    pub envelope: EnvelopeConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationConfig>,
    pub model: ModelConfig,
    pub surrogate: SurrogateConfig,
    pub sfa: SfaConfig,
    pub grids: GridsConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

/// A rule violation tied to a `section.key` path.
struct Violation {
    key: &'static str,
    message: String,
}

fn violation(key: &'static str, message: impl Into<String>) -> Violation {
    Violation { key, message: message.into() }
}

impl RunConfig {
    /// Parses and validates `source`, then applies `key=value` overrides.
    pub fn parse(source: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = source.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let config: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(locate_message(source, e.message())))?;
        if let Err(v) = config.check() {
            let line = find_key_line(source, v.key)
                .map(|l| format!("line {l}: "))
                .unwrap_or_else(|| {
                    if overrides.iter().any(|o| o.split('=').next().map(str::trim) == Some(v.key)) {
                        "override: ".to_string()
                    } else {
                        String::new()
                    }
                });
            return Err(Error::Config(format!("{line}{}: {}", v.key, v.message)));
        }
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&source, overrides)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.to_string().trim_start_matches("configuration error: "))))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn check(&self) -> std::result::Result<(), Violation> {
        let d = &self.driver;
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(d.wavelength_nm) {
            return Err(violation("driver.wavelength_nm", "must be positive"));
        }
        if !(d.total_intensity_w_cm2 >= 0.0 && d.total_intensity_w_cm2.is_finite()) {
            return Err(violation("driver.total_intensity_w_cm2", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&d.split) {
            return Err(violation("driver.split", "must lie in [0, 1]"));
        }
        if !positive(d.waist_um) {
            return Err(violation("driver.waist_um", "must be positive"));
        }
        if let Some(text) = &d.gamma {
            let gamma = parse_rational(text).ok_or_else(|| violation("driver.gamma", format!("cannot parse {text:?} as a fraction")))?;
            if !on_third_lattice(gamma) {
                return Err(violation("driver.gamma", format!("γ = {gamma} is not a multiple of 1/3")));
            }
            let implied = coordination_parameter(d.l1, d.l2);
            if gamma != implied {
                return Err(violation(
                    "driver.gamma",
                    format!("γ = {gamma} contradicts l1 = {}, l2 = {} (which give {implied})", d.l1, d.l2),
                ));
            }
        }
        let e = &self.envelope;
        if e.kind == EnvelopeKind::Trapezoid {
            for (key, v) in [("envelope.ramp_up_fs", e.ramp_up_fs), ("envelope.flat_fs", e.flat_fs), ("envelope.ramp_down_fs", e.ramp_down_fs)] {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(violation(key, "must be non-negative"));
                }
            }
            if e.ramp_up_fs + e.flat_fs + e.ramp_down_fs <= 0.0 {
                return Err(violation("envelope.flat_fs", "the pulse has zero duration"));
            }
        }
        if let Some(p) = &self.perturbation {
            if !(0.0..1.0).contains(&p.fraction) {
                return Err(violation("perturbation.fraction", "must lie in [0, 1)"));
            }
            if let Some(w) = p.donut_width_um {
                if !positive(w) {
                    return Err(violation("perturbation.donut_width_um", "must be positive"));
                }
            }
        }
        let m = &self.model;
        if m.q_min < 1 {
            return Err(violation("model.q_min", "must be at least 1"));
        }
        if m.q_max < m.q_min {
            return Err(violation("model.q_max", "must not be below model.q_min"));
        }
        if !(self.surrogate.effective_order >= 1.0 && self.surrogate.effective_order.is_finite()) {
            return Err(violation("surrogate.effective_order", "must be at least 1"));
        }
        if !self.surrogate.intrinsic_phase_coeff.is_finite() {
            return Err(violation("surrogate.intrinsic_phase_coeff", "must be finite"));
        }
        let s = &self.sfa;
        for (key, v) in [
            ("sfa.ionization_potential_ev", s.ionization_potential_ev),
            ("sfa.window_cycles", s.window_cycles),
            ("sfa.tolerance", s.tolerance),
            ("sfa.epsilon", s.epsilon),
        ] {
            if !positive(v) {
                return Err(violation(key, "must be positive"));
            }
        }
        let g = &self.grids;
        if g.n_r < 2 {
            return Err(violation("grids.n_r", "need at least 2 radial samples"));
        }
        if !g.n_theta.is_power_of_two() || g.n_theta < 4 {
            return Err(violation("grids.n_theta", "must be a power of two ≥ 4"));
        }
        if let Some(r) = g.r_max_um {
            if !positive(r) {
                return Err(violation("grids.r_max_um", "must be positive"));
            }
        }
        if g.samples_per_2w_cycle < 32 {
            return Err(violation("grids.samples_per_2w_cycle", "need at least 32"));
        }
        if (g.samples_per_2w_cycle as i64) < m.q_max {
            return Err(violation("grids.samples_per_2w_cycle", format!("cannot resolve harmonic {}", m.q_max)));
        }
        if !(g.padding_fs >= 0.0 && g.padding_fs.is_finite()) {
            return Err(violation("grids.padding_fs", "must be non-negative"));
        }
        if g.n_beta < 2 {
            return Err(violation("grids.n_beta", "need at least 2 divergence samples"));
        }
        if !positive(g.beta_margin) {
            return Err(violation("grids.beta_margin", "must be positive"));
        }
        let a = &self.analysis;
        if !(m.q_min..=m.q_max).contains(&a.q_filter) {
            return Err(violation("analysis.q_filter", format!("must lie in {}..={}", m.q_min, m.q_max)));
        }
        if !positive(a.sigma_deg) {
            return Err(violation("analysis.sigma_deg", "must be positive"));
        }
        if !(a.annulus_fraction > 0.0 && a.annulus_fraction <= 1.0) {
            return Err(violation("analysis.annulus_fraction", "must lie in (0, 1]"));
        }
        if (a.apt_samples_per_cycle as i64) <= 2 * m.q_max {
            return Err(violation("analysis.apt_samples_per_cycle", format!("cannot represent harmonic {}", m.q_max)));
        }
        let samples_per_sigma = a.sigma_deg / 360.0 * a.apt_samples_per_cycle as f64;
        if samples_per_sigma < crate::timedomain::MIN_SAMPLES_PER_SIGMA {
            return Err(violation(
                "analysis.sigma_deg",
                format!("σ spans only {samples_per_sigma:.2} samples; raise analysis.apt_samples_per_cycle"),
            ));
        }
        if a.conservation_q_max < a.conservation_q_min {
            return Err(violation("analysis.conservation_q_max", "must not be below analysis.conservation_q_min"));
        }
        if a.conservation_q_min < m.q_min || a.conservation_q_max > m.q_max {
            return Err(violation("analysis.conservation_q_min", "the conservation range must lie inside the model range"));
        }
        if a.grid_points < 2 {
            return Err(violation("analysis.grid_points", "need at least 2"));
        }
        if a.grid_times == 0 || !a.apt_samples_per_cycle.is_multiple_of(a.grid_times) {
            return Err(violation("analysis.grid_times", "must divide analysis.apt_samples_per_cycle"));
        }
        Ok(())
    }

    pub fn harmonics(&self) -> HarmonicRange {
        HarmonicRange { q_min: self.model.q_min, q_max: self.model.q_max }
    }

    pub fn driver_spec(&self) -> Result<DriverSpec> {
        let d = &self.driver;
        let mut spec = DriverSpec::bicircular(d.l1, d.l2, d.wavelength_nm, d.total_intensity_w_cm2, d.split, d.waist_um)?;
        if self.envelope.kind == EnvelopeKind::Trapezoid {
            spec = spec.with_envelope(EnvelopeSpec {
                ramp_up: self.envelope.ramp_up_fs,
                flat: self.envelope.flat_fs,
                ramp_down: self.envelope.ramp_down_fs,
            });
        }
        if let Some(p) = &self.perturbation {
            spec = spec.with_perturbation(PerturbationSpec {
                fraction: p.fraction,
                relative_phase: p.relative_phase,
                donut_width: p.donut_width_um.unwrap_or_else(|| default_donut_width(d.waist_um)),
            });
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn is_perturbed(&self) -> bool {
        self.perturbation.as_ref().is_some_and(|p| p.fraction > 0.0)
    }

    pub fn transverse_grid(&self) -> Result<TransverseGrid> {
        let g = &self.grids;
        TransverseGrid::new(g.n_r, g.n_theta, g.r_max_um.unwrap_or(3.0 * self.driver.waist_um))
    }

    pub fn time_grid(&self, spec: &DriverSpec) -> Result<TimeGrid> {
        let g = &self.grids;
        match self.envelope.kind {
            EnvelopeKind::Trapezoid => TimeGrid::for_pulse(spec.omega, g.samples_per_2w_cycle, spec.duration(), g.padding_fs),
            EnvelopeKind::Cw => TimeGrid::periodic(spec.omega, g.samples_per_2w_cycle, 1),
        }
    }

    pub fn surrogate_params(&self) -> SurrogateParams {
        SurrogateParams {
            effective_order: self.surrogate.effective_order,
            intrinsic_phase_coeff: self.surrogate.intrinsic_phase_coeff,
            harmonics: self.harmonics(),
        }
    }

    pub fn sfa_params(&self) -> SfaParams {
        let s = &self.sfa;
        SfaParams {
            ionization_potential_ev: s.ionization_potential_ev,
            window_cycles: s.window_cycles,
            tolerance: s.tolerance,
            trajectories: s.trajectories,
            epsilon: s.epsilon,
            harmonics: self.harmonics(),
        }
    }
}

/// Sets `section.key = value` in a parsed document. The value is read as a
/// TOML value and falls back to a bare string.
fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {item:?} is not of the form key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key {path:?} is malformed")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {path:?}: {part} is not a section")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Line (1-based) where `section.key` is assigned in `source`.
fn find_key_line(source: &str, dotted: &str) -> Option<usize> {
    let (section, key) = dotted.rsplit_once('.')?;
    let mut current = String::new();
    for (i, line) in source.lines().enumerate() {
        let trimmed = line.split('#').next().unwrap_or("").trim();
        if let Some(header) = trimmed.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = header.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((lhs, _)) = trimmed.split_once('=') {
                if lhs.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// Adds the line of the first offending key named in a deserializer message.
fn locate_message(source: &str, message: &str) -> String {
    let unknown = message
        .split('`')
        .nth(1)
        .filter(|_| message.starts_with("unknown field") || message.starts_with("invalid type") || message.contains("variant"));
    if let Some(key) = unknown {
        for (i, line) in source.lines().enumerate() {
            let trimmed = line.split('#').next().unwrap_or("").trim();
            if let Some((lhs, rhs)) = trimmed.split_once('=') {
                if lhs.trim() == key || rhs.trim().trim_matches('"') == key {
                    return format!("line {}: {message}", i + 1);
                }
            }
            if trimmed.trim_start_matches('[').trim_end_matches(']') == key {
                return format!("line {}: {message}", i + 1);
            }
        }
    }
    message.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_documented_defaults() {
        let c = RunConfig::parse("", &[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.harmonics(), HarmonicRange { q_min: 7, q_max: 23 });
        let grid = c.transverse_grid().unwrap();
        assert_eq!((grid.n_radial, grid.n_azimuthal, grid.radial_max), (120, 128, 90.0));
    }

    #[test]
    fn round_trip_is_lossless() {
        let source = "[driver]\nl1 = 2\nl2 = -1\ngamma = \"-5/3\"\n[perturbation]\nfraction = 0.1\nrelative_phase = \"out_of_phase\"\n[surrogate]\nintrinsic_phase_coeff = 0.1\n";
        let c = RunConfig::parse(source, &[]).unwrap();
        let again = RunConfig::parse(&c.to_toml().unwrap(), &[]).unwrap();
        assert_eq!(c, again);
        assert!(again.is_perturbed());
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let err = RunConfig::parse("[driver]\nl1 = 1\nwaste_um = 30\n", &[]).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("waste_um"), "{err}");
        let err = RunConfig::parse("[drivr]\n", &[]).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn invalid_values_report_their_line() {
        let err = RunConfig::parse("[driver]\nl1 = 1\n\nsplit = 1.5\n", &[]).unwrap_err().to_string();
        assert!(err.contains("line 4") && err.contains("driver.split"), "{err}");
        let err = RunConfig::parse("[model]\nq_min = 9\nq_max = 5\n", &[]).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = RunConfig::parse("[driver]\nl1 = = 2\n", &[]).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn off_lattice_gamma_is_rejected() {
        let err = RunConfig::parse("[driver]\ngamma = \"-1/4\"\n", &[]).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("1/3"), "{err}");
        let err = RunConfig::parse("[driver]\ngamma = \"1/3\"\n", &[]).unwrap_err().to_string();
        assert!(err.contains("contradicts"), "{err}");
        assert!(RunConfig::parse("[driver]\ngamma = \"-1/3\"\n", &[]).is_ok());
    }

    #[test]
    fn overrides_take_precedence() {
        let overrides = vec![
            "driver.l1=2".to_string(),
            "perturbation.fraction = 0.1".to_string(),
            "perturbation.relative_phase=in_phase".to_string(),
            "output.directory=runs/a".to_string(),
        ];
        let c = RunConfig::parse("[driver]\nl1 = 1\n", &overrides).unwrap();
        assert_eq!(c.driver.l1, 2);
        assert_eq!(c.perturbation.as_ref().unwrap().relative_phase, RelativePhase::InPhase);
        assert_eq!(c.output.directory, PathBuf::from("runs/a"));
        let err = RunConfig::parse("", &["driver.split=3".to_string()]).unwrap_err().to_string();
        assert!(err.contains("override") && err.contains("driver.split"), "{err}");
        assert!(RunConfig::parse("", &["driver.split".to_string()]).is_err());
        assert!(RunConfig::parse("", &["driver.l1.x=1".to_string()]).is_err());
    }

    #[test]
    fn sigma_must_be_resolved() {
        let err = RunConfig::parse("[analysis]\napt_samples_per_cycle = 96\n", &[]).unwrap_err().to_string();
        assert!(err.contains("analysis.sigma_deg"), "{err}");
    }

    #[test]
    fn continuous_wave_uses_one_period() {
        let c = RunConfig::parse("[envelope]\nkind = \"cw\"\n", &[]).unwrap();
        let spec = c.driver_spec().unwrap();
        assert!(spec.envelope.is_none());
        assert_eq!(c.time_grid(&spec).unwrap().periods_spanned(spec.omega), Some(1));
    }
}
