//! Configuration-driven pipeline: synthesize the driver, compute the slab
//! response, propagate to the far field and analyze.

pub mod config;
pub mod report;
pub mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::Helicity;
use crate::error::{Error, Result};
use crate::farfield::{auto_divergence_grid, parseval_ratio, propagate_all, FarFieldGrid, FarFieldOptions};
use crate::field::charges::harmonic_helicity;
use crate::field::{evaluate_driver, max_symmetry_residual, CoordinationParameters, DriverSpec, LocalSymmetry};
use crate::response::{helicity_of_line, sfa_emission, surrogate_emission, EmissionGrid};
use crate::spectra::{
    conservation_fit, forbidden_line_suppression, oam_spectrum, tkam_spectrum, write_spectra_csv, AngularSpectrum,
    ConservationReport, LinePowers, RowOrder, Suppression,
};
use crate::timedomain::{
    cartesian_apt, polarization_spiral_metrics, reconstruct_apt, sigma_from_degrees, t22_map, write_t22_csv,
    AptField, AptMetrics, T22Map,
};

pub use config::{ModelKind, RunConfig};

/// Per-harmonic results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSummary {
    pub q: i64,
    pub allowed: bool,
    /// Helicity predicted by the 3n ± 1 rule (`+1`, `−1`).
    pub expected_helicity: Option<i64>,
    /// Dominant helicity of the slab emission; absent for vanishing lines.
    pub dominant_helicity: Option<i64>,
    pub helicity_purity: f64,
    /// Far-field power per helicity `[ê₊, ê₋]`.
    pub power: [f64; 2],
    /// OAM statistics of the expected helicity (or the stronger one for 3n lines).
    pub spectrum_helicity: i64,
    pub dominant_m: Option<i64>,
    pub expected_m: Option<i64>,
    pub oam_purity: f64,
    pub mean_oam: f64,
    pub oam_std: f64,
    pub band_edge_fraction: f64,
    /// Far-field power over `(2π/k)²` near-field power, per helicity and summed.
    pub parseval: [f64; 2],
    pub parseval_total: f64,
    pub mean_divergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDomainSummary {
    pub q_filter: i64,
    pub sigma_fs: f64,
    pub annulus_rad: [f64; 2],
    pub annulus_fraction: f64,
    pub intensity_correlation: f64,
    pub time_step_fs: f64,
}

/// Everything written to `analysis/summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub l1: i64,
    pub l2: i64,
    pub gamma: String,
    pub j1: String,
    pub omega_rad_fs: f64,
    pub tau_fs: f64,
    pub perturbed: bool,
    pub intrinsic_phase_coeff: f64,
    pub local_symmetry: LocalSymmetry,
    /// Largest relative residual of the coordinated-rotation symmetry of
    /// the driver over all grid-commensurate rotations.
    pub driver_symmetry_residual: f64,
    pub excluded_points: usize,
    pub beta_max_rad: f64,
    pub n_beta: usize,
    pub conservation: Option<ConservationReport>,
    pub lines: Vec<LineSummary>,
    pub suppression: Vec<Suppression>,
    pub time_domain: Option<TimeDomainSummary>,
    pub spiral: Option<AptMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// Written atomically to `<out>/manifest.json` at the end of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub code_version: String,
    pub config: RunConfig,
    pub threads: usize,
    pub grid_checksums: BTreeMap<String, String>,
    pub timings: Vec<StageTiming>,
    pub warnings: Vec<String>,
    /// SHA-256 of every output file, keyed by path relative to the run directory.
    pub outputs: BTreeMap<String, String>,
}

/// In-memory products of a run.
pub struct Pipeline {
    pub config: RunConfig,
    pub spec: DriverSpec,
    pub params: CoordinationParameters,
    pub emission: Option<EmissionGrid>,
    pub far: Option<FarFieldGrid>,
    /// TKAM-indexed spectra of every harmonic and helicity.
    pub spectra: Vec<AngularSpectrum>,
    pub apt: Option<AptField>,
    pub t22: Option<T22Map>,
    pub summary: Option<RunSummary>,
    pub grid_checksums: BTreeMap<String, String>,
    pub timings: Vec<StageTiming>,
    pub warnings: Vec<String>,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self> {
        let spec = config.driver_spec()?;
        let params = spec.params();
        Ok(Self {
            config,
            spec,
            params,
            emission: None,
            far: None,
            spectra: Vec::new(),
            apt: None,
            t22: None,
            summary: None,
            grid_checksums: BTreeMap::new(),
            timings: Vec::new(),
            warnings: Vec::new(),
        })
    }

    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        log::info!("stage {stage}");
        let start = Instant::now();
        let out = f(self);
        self.timings.push(StageTiming { stage: stage.to_string(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    /// Driver synthesis and slab response.
    pub fn respond(&mut self) -> Result<f64> {
        let (field, residual) = self.timed("synthesize", |p| {
            let transverse = p.config.transverse_grid()?;
            let time = p.config.time_grid(&p.spec)?;
            p.grid_checksums.insert("transverse".into(), transverse.checksum());
            p.grid_checksums.insert("time".into(), time.checksum());
            let field = evaluate_driver(&p.spec, &transverse, &time)?;
            let residual = max_symmetry_residual(&field, &p.params)?;
            Ok((field, residual))
        })?;
        let emission = self.timed("respond", |p| match p.config.model.kind {
            ModelKind::Surrogate => surrogate_emission(&field, &p.config.surrogate_params()),
            ModelKind::Sfa => sfa_emission(&field, &p.config.sfa_params()),
        })?;
        if emission.excluded_points > 0 {
            self.warn(format!("{} transverse points were excluded as unconverged", emission.excluded_points));
        }
        self.emission = Some(emission);
        Ok(residual)
    }

    pub fn propagate(&mut self) -> Result<()> {
        let emission = self.emission.as_ref().ok_or_else(|| Error::InvalidArgument("no emission computed".into()))?;
        let options = FarFieldOptions { n_beta: self.config.grids.n_beta, beta_margin: self.config.grids.beta_margin };
        let start = Instant::now();
        let divergence = auto_divergence_grid(emission, &options)?;
        let far = propagate_all(emission, &divergence)?;
        self.timings.push(StageTiming { stage: "propagate".into(), seconds: start.elapsed().as_secs_f64() });
        self.grid_checksums.insert("divergence".into(), far.divergence.checksum());
        for w in far.warnings.clone() {
            self.warn(w);
        }
        self.far = Some(far);
        Ok(())
    }

    /// Angular spectra, conservation fit, selection rules and line statistics.
    pub fn analyze_spectra(&mut self, driver_symmetry_residual: f64) -> Result<()> {
        let start = Instant::now();
        let emission = self.emission.as_ref().ok_or_else(|| Error::InvalidArgument("no emission computed".into()))?;
        let far = self.far.as_ref().ok_or_else(|| Error::InvalidArgument("no far field computed".into()))?;
        let gamma = self.params.gamma;
        let mut spectra = Vec::new();
        for q in far.harmonics.orders() {
            for h in Helicity::BOTH {
                spectra.push(tkam_spectrum(&oam_spectrum(far, q, h)?, gamma)?);
            }
        }
        let a = &self.config.analysis;
        let in_range: Vec<AngularSpectrum> = spectra
            .iter()
            .filter(|s| (a.conservation_q_min..=a.conservation_q_max).contains(&s.q))
            .cloned()
            .collect();
        let mut warnings = Vec::new();
        let conservation = match conservation_fit(&in_range, &self.params) {
            Ok(report) => Some(report),
            Err(e) => {
                warnings.push(format!("conservation fit skipped: {e}"));
                None
            }
        };

        let powers = LinePowers::from_emission(emission)?;
        let mut suppression = Vec::new();
        let mut lines = Vec::new();
        for (iq, q) in far.harmonics.orders().enumerate() {
            let allowed = q.rem_euclid(3) != 0;
            if !allowed {
                suppression.push(forbidden_line_suppression(&powers, q, emission.symmetry)?);
            }
            let expected = if allowed { Some(harmonic_helicity(q)?) } else { None };
            let line = helicity_of_line(emission, q)?;
            let power = far.power(q)?;
            let chosen = expected.unwrap_or(if power[0] >= power[1] { Helicity::Right } else { Helicity::Left });
            let spectrum = &spectra[2 * iq + chosen.index()];
            let expected_m = match expected {
                Some(_) => {
                    let (m, _) = self.params.expected_harmonic_oam(q)?;
                    (*m.denom() == 1).then_some(*m.numer())
                }
                None => None,
            };
            let parseval = [parseval_ratio(emission, far, q, Helicity::Right)?, parseval_ratio(emission, far, q, Helicity::Left)?];
            let near: f64 = Helicity::BOTH
                .iter()
                .map(|&h| crate::farfield::grid_power(&emission.transverse, emission.line(q, h).expect("q in range")))
                .sum();
            let k = far.wavenumbers[iq];
            let expected_far = (2.0 * std::f64::consts::PI / k).powi(2) * near;
            let parseval_total = if expected_far == 0.0 { 1.0 } else { (power[0] + power[1]) / expected_far };
            lines.push(LineSummary {
                q,
                allowed,
                expected_helicity: expected.map(Helicity::sign),
                dominant_helicity: line.dominant.map(Helicity::sign),
                helicity_purity: line.purity,
                power,
                spectrum_helicity: chosen.sign(),
                dominant_m: spectrum.dominant().map(|e| e.m),
                expected_m,
                oam_purity: spectrum.purity(),
                mean_oam: spectrum.mean_oam(),
                oam_std: spectrum.oam_standard_deviation(),
                band_edge_fraction: spectrum.band_edge_fraction(),
                parseval,
                parseval_total,
                mean_divergence: far.mean_divergence(q)?,
            });
        }

        let summary = RunSummary {
            l1: self.config.driver.l1,
            l2: self.config.driver.l2,
            gamma: gamma.to_string(),
            j1: self.params.j1.to_string(),
            omega_rad_fs: self.params.omega,
            tau_fs: self.params.tau(),
            perturbed: self.config.is_perturbed(),
            intrinsic_phase_coeff: self.config.surrogate.intrinsic_phase_coeff,
            local_symmetry: emission.symmetry,
            driver_symmetry_residual,
            excluded_points: emission.excluded_points,
            beta_max_rad: far.divergence.radial_max,
            n_beta: far.divergence.n_radial,
            conservation,
            lines,
            suppression,
            time_domain: None,
            spiral: None,
        };
        self.spectra = spectra;
        self.summary = Some(summary);
        for w in warnings {
            self.warn(w);
        }
        self.timings.push(StageTiming { stage: "spectra".into(), seconds: start.elapsed().as_secs_f64() });
        Ok(())
    }

    /// Pulse train, windowed quadrupole map and spiral metrics.
    pub fn analyze_time_domain(&mut self) -> Result<()> {
        let start = Instant::now();
        let far = self.far.as_ref().ok_or_else(|| Error::InvalidArgument("no far field computed".into()))?;
        let a = &self.config.analysis;
        let apt = reconstruct_apt(far, a.q_filter, a.apt_samples_per_cycle)?;
        let sigma = sigma_from_degrees(a.sigma_deg, self.params.omega);
        let map = t22_map(&apt, sigma, a.annulus_fraction)?;
        let spiral = polarization_spiral_metrics(&map, &self.params);
        let td = TimeDomainSummary {
            q_filter: a.q_filter,
            sigma_fs: sigma,
            annulus_rad: map.annulus,
            annulus_fraction: map.annulus_fraction,
            intensity_correlation: map.intensity_correlation(),
            time_step_fs: map.time.dt,
        };
        let spiral = match spiral {
            Ok(m) => Some(m),
            Err(e) => {
                self.warn(format!("spiral metrics skipped: {e}"));
                None
            }
        };
        if let Some(summary) = self.summary.as_mut() {
            summary.time_domain = Some(td);
            summary.spiral = spiral;
        }
        self.apt = Some(apt);
        self.t22 = Some(map);
        self.timings.push(StageTiming { stage: "time_domain".into(), seconds: start.elapsed().as_secs_f64() });
        Ok(())
    }

    /// All stages in order.
    pub fn run_all(&mut self) -> Result<()> {
        let residual = self.respond()?;
        self.propagate()?;
        self.analyze_spectra(residual)?;
        self.analyze_time_domain()
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().ok_or_else(|| Error::Output(format!("{} has no parent directory", path.display())))?;
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Output files of a run directory, written as stages complete.
struct OutputWriter {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl OutputWriter {
    fn write(&mut self, relative: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(relative), bytes)?;
        self.written.insert(relative.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    fn write_stage_outputs(&mut self, pipeline: &Pipeline) -> Result<()> {
        if !pipeline.spectra.is_empty() && !self.written.contains_key("spectra/oam.csv") {
            let mut oam = Vec::new();
            write_spectra_csv(&pipeline.spectra, RowOrder::Oam, &mut oam)?;
            self.write("spectra/oam.csv", &oam)?;
            let mut tkam = Vec::new();
            write_spectra_csv(&pipeline.spectra, RowOrder::Tkam, &mut tkam)?;
            self.write("spectra/tkam.csv", &tkam)?;
        }
        if let (Some(map), Some(apt)) = (&pipeline.t22, &pipeline.apt) {
            if !self.written.contains_key("timedomain/t22.csv") {
                let mut csv = Vec::new();
                write_t22_csv(map, &mut csv)?;
                self.write("timedomain/t22.csv", &csv)?;
                let a = &pipeline.config.analysis;
                let extent = (1.5 * map.annulus[1]).min(apt.divergence.radial_max).max(apt.divergence.radial_step());
                let grid = cartesian_apt(apt, map.sigma, extent, a.grid_points, a.grid_times)?;
                self.write("timedomain/apt_grid.bin", &grid.to_le_bytes())?;
                self.write("timedomain/apt_grid.meta.json", &json_bytes(&grid.meta())?)?;
            }
        }
        if let Some(summary) = &pipeline.summary {
            self.write("analysis/summary.json", &json_bytes(summary)?)?;
        }
        Ok(())
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Result of [`simulate`].
pub struct SimulationOutcome {
    pub directory: PathBuf,
    pub manifest: RunManifest,
    pub pipeline: Pipeline,
}

/// Runs every stage and writes the outputs under `config.output.directory`.
/// A failing stage leaves the outputs of earlier stages in place next to a
/// manifest with status `failed`.
pub fn simulate(config: RunConfig) -> Result<SimulationOutcome> {
    let root = config.output.directory.clone();
    let mut pipeline = Pipeline::new(config)?;
    let mut writer = OutputWriter { root: root.clone(), written: BTreeMap::new() };
    let result = (|| -> Result<()> {
        let residual = pipeline.respond()?;
        pipeline.propagate()?;
        pipeline.analyze_spectra(residual)?;
        writer.write_stage_outputs(&pipeline)?;
        pipeline.analyze_time_domain()?;
        writer.write_stage_outputs(&pipeline)
    })();
    let manifest = RunManifest {
        status: if result.is_ok() { RunStatus::Ok } else { RunStatus::Failed },
        error: result.as_ref().err().map(|e| e.to_string()),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: pipeline.config.clone(),
        threads: rayon::current_num_threads(),
        grid_checksums: pipeline.grid_checksums.clone(),
        timings: pipeline.timings.clone(),
        warnings: pipeline.warnings.clone(),
        outputs: writer.written.clone(),
    };
    write_atomic(&root.join("manifest.json"), &json_bytes(&manifest)?)?;
    result?;
    Ok(SimulationOutcome { directory: root, manifest, pipeline })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(dir: &Path) -> RunConfig {
        let source = format!(
            "[envelope]\nkind = \"cw\"\n[grids]\nn_r = 24\nn_theta = 32\nn_beta = 24\n[output]\ndirectory = \"{}\"\n",
            dir.display()
        );
        RunConfig::parse(&source, &[]).unwrap()
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn small_run_writes_every_output() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = simulate(small_config(dir.path())).unwrap();
        for f in [
            "manifest.json",
            "spectra/oam.csv",
            "spectra/tkam.csv",
            "timedomain/t22.csv",
            "timedomain/apt_grid.bin",
            "timedomain/apt_grid.meta.json",
            "analysis/summary.json",
        ] {
            assert!(dir.path().join(f).is_file(), "{f} missing");
        }
        assert_eq!(outcome.manifest.status, RunStatus::Ok);
        assert_eq!(outcome.manifest.outputs.len(), 6);
        let bin = fs::metadata(dir.path().join("timedomain/apt_grid.bin")).unwrap().len();
        assert_eq!(bin, 128 * 64 * 64 * 2 * 4);
    }

    #[test]
    fn zero_intensity_runs_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config(dir.path());
        config.driver.total_intensity_w_cm2 = 0.0;
        let outcome = simulate(config).unwrap();
        let summary = outcome.pipeline.summary.unwrap();
        assert!(summary.lines.iter().all(|l| l.power == [0.0, 0.0]));
        assert!(summary.conservation.is_none() && summary.spiral.is_none());
        assert_eq!(outcome.manifest.status, RunStatus::Ok);
    }

    #[test]
    fn failure_leaves_a_failed_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config(dir.path());
        // passes validation, fails inside the time-domain stage
        config.analysis.grid_points = 1;
        assert!(simulate(config).is_err());
        let manifest: RunManifest =
            serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.status, RunStatus::Failed);
        assert!(manifest.error.is_some());
        assert!(dir.path().join("spectra/oam.csv").is_file());
    }
}
