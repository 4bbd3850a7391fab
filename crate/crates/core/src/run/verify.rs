//! Self-consistency checks of a completed run.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Pipeline;
use crate::error::{Error, Result};
use crate::field::charges::Rational;
use crate::spectra::BAND_EDGE_LIMIT;
use crate::timedomain::t22_map;

pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
pub const PARSEVAL_TOLERANCE: f64 = 1e-3;
pub const SLOPE_TOLERANCE: f64 = 0.01;
pub const CONSERVATION_PURITY: f64 = 0.95;
pub const SUPPRESSION_DB: f64 = 20.0;
pub const HELICITY_PURITY: f64 = 0.9;
pub const COVARIANCE_TOLERANCE: f64 = 1e-8;
pub const ROTATION_TOLERANCE_DEG: f64 = 5.0;
pub const STEP_DEG: f64 = 120.0;
pub const CORRELATION_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Failed on a run whose driver deliberately breaks the symmetry.
    ExpectedBroken,
    Skipped,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::ExpectedBroken => "EXPECTED-BROKEN",
            CheckStatus::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            writeln!(f, "{:<width$}  {:<15}  {}", c.name, c.status.to_string(), c.detail)?;
        }
        Ok(())
    }
}

struct Checks {
    perturbed: bool,
    checks: Vec<Check>,
}

impl Checks {
    fn push(&mut self, name: &str, ok: bool, detail: String) {
        self.record(name, if ok { CheckStatus::Pass } else { CheckStatus::Fail }, detail);
    }

    /// Like `push`, but a failure on a perturbed run is expected.
    fn push_symmetric(&mut self, name: &str, ok: bool, detail: String) {
        let status = match (ok, self.perturbed) {
            (true, _) => CheckStatus::Pass,
            (false, true) => CheckStatus::ExpectedBroken,
            (false, false) => CheckStatus::Fail,
        };
        self.record(name, status, detail);
    }

    fn skip(&mut self, name: &str, detail: String) {
        self.record(name, CheckStatus::Skipped, detail);
    }

    fn record(&mut self, name: &str, status: CheckStatus, detail: String) {
        self.checks.push(Check { name: name.to_string(), status, detail });
    }
}

/// Smallest number of azimuthal steps `k` whose coordinated rotation moves
/// the map by a whole number of time samples, with that shift.
fn commensurate_rotation(j1: Rational, samples_per_cycle: usize, n_theta: usize) -> (usize, isize) {
    for k in 1..=n_theta {
        let shift = j1 * Rational::from_integer((k * samples_per_cycle) as i64) / Rational::from_integer(n_theta as i64);
        if shift.is_integer() {
            return (k, shift.to_integer() as isize);
        }
    }
    (n_theta, 0)
}

/// Runs every check on a pipeline whose stages have all completed.
pub fn verify(pipeline: &Pipeline) -> Result<VerifyReport> {
    let missing = || Error::InvalidArgument("verification needs a completed run".into());
    let summary = pipeline.summary.as_ref().ok_or_else(missing)?;
    let params = &pipeline.params;
    let mut c = Checks { perturbed: summary.perturbed, checks: Vec::new() };

    let (l1, l2) = (summary.l1, summary.l2);
    let gamma_ok = params.gamma == Rational::new(l2 - 2 * l1, 3) && params.j1 == Rational::new(l1 + l2, 3);
    let oam_ok = summary.lines.iter().filter(|l| l.allowed).all(|l| {
        let (m, s) = params.expected_harmonic_oam(l.q).expect("allowed line");
        m == params.j1 * l.q - params.gamma * s.sign()
    });
    c.push(
        "charge algebra",
        gamma_ok && oam_ok,
        format!("gamma = {}, j1 = {}, tau = {:.4} fs", params.gamma, params.j1, params.tau()),
    );

    c.push_symmetric(
        "driver symmetry",
        summary.driver_symmetry_residual < SYMMETRY_TOLERANCE,
        format!("max residual {:.2e}", summary.driver_symmetry_residual),
    );

    let powered: Vec<_> = summary.lines.iter().filter(|l| l.power[0] + l.power[1] > 0.0).collect();
    if powered.is_empty() {
        c.skip("parseval", "no harmonic carries power".into());
    } else {
        let worst = powered.iter().max_by(|a, b| (a.parseval_total - 1.0).abs().total_cmp(&(b.parseval_total - 1.0).abs()));
        let worst = worst.expect("non-empty");
        let err = (worst.parseval_total - 1.0).abs();
        c.push("parseval", err <= PARSEVAL_TOLERANCE, format!("worst H{} ratio {:.6}", worst.q, worst.parseval_total));
    }

    match &summary.conservation {
        Some(report) => {
            c.push_symmetric(
                "tkam conservation",
                report.all_match() && report.min_purity() >= CONSERVATION_PURITY,
                format!(
                    "{} of {} harmonics at j = q*j1, min purity {:.4}",
                    report.harmonics.iter().filter(|h| h.matches).count(),
                    report.harmonics.len(),
                    report.min_purity()
                ),
            );
            c.push_symmetric(
                "tkam slope",
                report.slope_error() <= SLOPE_TOLERANCE,
                format!("slope {:.5} +/- {:.1e}, expected {}", report.slope, report.slope_uncertainty, report.expected_slope),
            );
        }
        None => {
            c.skip("tkam conservation", "no fit".into());
            c.skip("tkam slope", "no fit".into());
        }
    }

    let suppressed: Vec<(i64, f64)> = summary
        .suppression
        .iter()
        .filter_map(|s| match s {
            crate::spectra::Suppression::Suppressed { q, db } => Some((*q, *db)),
            crate::spectra::Suppression::NotTrefoil => None,
        })
        .collect();
    if suppressed.is_empty() || powered.is_empty() {
        c.skip("forbidden lines", "no threefold-symmetric emission".into());
    } else {
        let (q, db) = suppressed.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty");
        c.push("forbidden lines", db >= SUPPRESSION_DB, format!("weakest suppression H{q} {db:.1} dB"));
    }

    let allowed: Vec<_> = powered.iter().filter(|l| l.allowed).collect();
    if allowed.is_empty() {
        c.skip("helicity", "no allowed line carries power".into());
    } else {
        let bad: Vec<i64> = allowed
            .iter()
            .filter(|l| l.dominant_helicity != l.expected_helicity || l.helicity_purity < HELICITY_PURITY)
            .map(|l| l.q)
            .collect();
        let min = allowed.iter().map(|l| l.helicity_purity).fold(f64::INFINITY, f64::min);
        c.push("helicity", bad.is_empty(), format!("min purity {min:.4}, mismatched {bad:?}"));
        let edge = allowed.iter().map(|l| l.band_edge_fraction).fold(0.0, f64::max);
        c.push("oam band edge", edge <= BAND_EDGE_LIMIT, format!("largest edge fraction {edge:.1e}"));
    }

    match (&pipeline.apt, &pipeline.t22) {
        (Some(apt), Some(map)) if !powered.is_empty() => {
            let (k, shift) = commensurate_rotation(params.j1, apt.samples_per_cycle, map.n_theta());
            let alpha = k as f64 * apt.divergence.azimuthal_step();
            let rotated = t22_map(&apt.coordinated_rotation(params, alpha)?, map.sigma, pipeline.config.analysis.annulus_fraction)?;
            let phase = Complex64::from_polar(1.0, 2.0 * params.gamma_f64() * alpha);
            let residual = map.shifted_residual(&rotated, k as isize, shift, phase);
            c.push(
                "t22 covariance",
                residual <= COVARIANCE_TOLERANCE,
                format!("rotation by {k} steps, {shift} samples: residual {residual:.2e}"),
            );
        }
        _ => c.skip("t22 covariance", "no pulse train".into()),
    }

    match &summary.spiral {
        Some(m) => {
            c.push_symmetric(
                "spiral delay",
                m.delay_error() <= m.time_step,
                format!("{:.4} fs per revolution, expected {:.4} fs", m.delay_per_revolution, m.expected_delay),
            );
            c.push_symmetric(
                "spiral rotation",
                m.rotation_error_deg() <= ROTATION_TOLERANCE_DEG,
                format!("{:.2} deg per revolution, expected {:.2} deg", m.rotation_per_revolution_deg, m.expected_rotation_deg),
            );
            c.push_symmetric(
                "pulse orientation steps",
                m.orientation_steps_deg.len() == 3 && m.max_step_error_deg(STEP_DEG) <= ROTATION_TOLERANCE_DEG,
                format!("steps {:?} deg", m.orientation_steps_deg.iter().map(|s| (s * 10.0).round() / 10.0).collect::<Vec<_>>()),
            );
            c.push_symmetric(
                "t22 intensity correlation",
                m.intensity_correlation >= CORRELATION_THRESHOLD,
                format!("r = {:.4}", m.intensity_correlation),
            );
        }
        None => {
            for name in ["spiral delay", "spiral rotation", "pulse orientation steps", "t22 intensity correlation"] {
                if powered.is_empty() {
                    c.skip(name, "no harmonic carries power".into());
                } else {
                    c.push_symmetric(name, false, "no continuous ridge found".into());
                }
            }
        }
    }

    Ok(VerifyReport { checks: c.checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commensurate_rotation_is_smallest() {
        assert_eq!(commensurate_rotation(Rational::new(2, 3), 192, 32), (1, 4));
        assert_eq!(commensurate_rotation(Rational::new(2, 3), 256, 128), (3, 4));
        assert_eq!(commensurate_rotation(Rational::from_integer(0), 256, 128), (1, 0));
    }

    #[test]
    fn statuses_print_in_capitals() {
        assert_eq!(CheckStatus::ExpectedBroken.to_string(), "EXPECTED-BROKEN");
        let report = VerifyReport {
            checks: vec![Check { name: "a".into(), status: CheckStatus::ExpectedBroken, detail: String::new() }],
        };
        assert!(report.passed());
    }
}
