//! Plain-text summary of a finished run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{RunManifest, RunSummary};
use crate::error::{Error, Result};
use crate::spectra::Suppression;

/// Forbidden lines listed in the report.
pub const REPORTED_FORBIDDEN: [i64; 3] = [9, 12, 15];

pub fn load_summary(dir: &Path) -> Result<(RunManifest, RunSummary)> {
    if !dir.is_dir() {
        return Err(Error::Output(format!("{} is not a run directory", dir.display())));
    }
    let manifest: RunManifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
    let summary: RunSummary = serde_json::from_slice(&fs::read(dir.join("analysis/summary.json"))?)?;
    Ok((manifest, summary))
}

/// Renders the report of `dir`.
pub fn report(dir: &Path) -> Result<String> {
    let (manifest, s) = load_summary(dir)?;
    let mut out = String::new();
    let w = &mut out;
    // writing to a String cannot fail
    let _ = writeln!(w, "run {}: {:?}", dir.display(), manifest.status);
    if let Some(e) = &manifest.error {
        let _ = writeln!(w, "error: {e}");
    }
    let _ = writeln!(
        w,
        "l1 = {}, l2 = {}, gamma = {}, j1 = {}, tau = {:.4} fs{}",
        s.l1,
        s.l2,
        s.gamma,
        s.j1,
        s.tau_fs,
        if s.perturbed { " (perturbed)" } else { "" }
    );
    let _ = writeln!(w, "driver symmetry residual {:.2e}", s.driver_symmetry_residual);
    match &s.conservation {
        Some(c) => {
            let _ = writeln!(
                w,
                "tkam slope {:.5} +/- {:.1e} (expected {}), min purity {:.4}",
                c.slope, c.slope_uncertainty, c.expected_slope, c.min_purity()
            );
        }
        None => {
            let _ = writeln!(w, "tkam slope: not fitted");
        }
    }

    let _ = writeln!(w, "\n  q   s   m  expected  oam purity  oam sd  helicity purity  parseval");
    for l in s.lines.iter().filter(|l| l.allowed) {
        let _ = writeln!(
            w,
            "{:>3} {:>+3} {:>3} {:>9} {:>11.4} {:>7.3} {:>16.4} {:>9.6}",
            l.q,
            l.spectrum_helicity,
            l.dominant_m.map_or("-".into(), |m| m.to_string()),
            l.expected_m.map_or("-".into(), |m| m.to_string()),
            l.oam_purity,
            l.oam_std,
            l.helicity_purity,
            l.parseval_total
        );
    }

    let _ = writeln!(w, "\nforbidden lines");
    for q in REPORTED_FORBIDDEN {
        let entry = s.suppression.iter().find_map(|x| match x {
            Suppression::Suppressed { q: p, db } if *p == q => Some(format!("{db:.1} dB")),
            _ => None,
        });
        let text = match entry {
            Some(t) => t,
            None if s.suppression.iter().any(|x| matches!(x, Suppression::NotTrefoil)) => "not forbidden".into(),
            None => "not computed".into(),
        };
        let _ = writeln!(w, "  H{q:<3} {text}");
    }

    match &s.spiral {
        Some(m) => {
            let _ = writeln!(
                w,
                "\nspiral: delay {:.4} fs/rev (expected {:.4}), rotation {:.2} deg/rev (expected {:.2})",
                m.delay_per_revolution, m.expected_delay, m.rotation_per_revolution_deg, m.expected_rotation_deg
            );
            let _ = writeln!(
                w,
                "pulse orientations {:?} deg, correlation {:.4}",
                m.pulse_orientations_deg.iter().map(|a| (a * 10.0).round() / 10.0).collect::<Vec<_>>(),
                m.intensity_correlation
            );
        }
        None => {
            let _ = writeln!(w, "\nspiral: none");
        }
    }
    if !manifest.warnings.is_empty() {
        let _ = writeln!(w, "\nwarnings");
        for warning in &manifest.warnings {
            let _ = writeln!(w, "  {warning}");
        }
    }
    Ok(out)
}
