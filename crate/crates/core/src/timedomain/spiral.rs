//! Ridges of `|T₂₂|` in the (θ, t) plane and the polarization spiral they
//! trace.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{orientation, T22Map};
use crate::error::{Error, Result};
use crate::field::CoordinationParameters;

/// Peaks below this share of the global `|T₂₂|` maximum are ignored.
pub const RIDGE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub theta: f64,
    /// Peak time (fs), unwrapped along the ridge.
    pub time: f64,
    /// Orientation (deg), unwrapped along the ridge.
    pub orientation_deg: f64,
    pub magnitude: f64,
}

/// Spiral observables of a [`T22Map`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AptMetrics {
    /// Delay accumulated by the ridge over one revolution (fs).
    pub delay_per_revolution: f64,
    /// `2πτ` (fs).
    pub expected_delay: f64,
    /// Orientation change along the ridge over one revolution (deg).
    pub rotation_per_revolution_deg: f64,
    /// `360°·γ`.
    pub expected_rotation_deg: f64,
    pub delay_residual_rms: f64,
    pub rotation_residual_rms_deg: f64,
    /// Sample spacing of the map (fs).
    pub time_step: f64,
    pub ridge: Vec<RidgePoint>,
    /// Pulse times (fs) within one cycle at `θ = 0`.
    pub pulse_times: Vec<f64>,
    /// Orientations (deg, in `[0, 180)`) of those pulses.
    pub pulse_orientations_deg: Vec<f64>,
    /// Orientation change between successive pulses at `θ = 0`, in `[0, 180)`.
    pub orientation_steps_deg: Vec<f64>,
    /// Correlation of `|T₂₂|` with the windowed intensity.
    pub intensity_correlation: f64,
}

impl AptMetrics {
    pub fn delay_error(&self) -> f64 {
        (self.delay_per_revolution - self.expected_delay).abs()
    }

    pub fn rotation_error_deg(&self) -> f64 {
        (self.rotation_per_revolution_deg - self.expected_rotation_deg).abs()
    }

    /// Largest distance (deg, modulo 180°) between a pulse-to-pulse step and `target`.
    pub fn max_step_error_deg(&self, target: f64) -> f64 {
        self.orientation_steps_deg
            .iter()
            .map(|s| {
                let d = (s - target).rem_euclid(180.0);
                d.min(180.0 - d)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
struct Peak {
    time: f64,
    value: Complex64,
    magnitude: f64,
}

fn wrap(value: f64, period: f64) -> f64 {
    let w = value.rem_euclid(period);
    if w > 0.5 * period {
        w - period
    } else {
        w
    }
}

/// Local maxima of `|T₂₂|` along one periodic time column.
fn column_peaks(map: &T22Map, itheta: usize, threshold: f64) -> Vec<Peak> {
    let n = map.n_t();
    let row = map.values.row(itheta);
    let mag = |k: usize| row[k % n].norm();
    let mut peaks = Vec::new();
    for k in 0..n {
        let (prev, here, next) = (mag(k + n - 1), mag(k), mag(k + 1));
        if here <= threshold || here <= prev || here < next {
            continue;
        }
        let curvature = prev - 2.0 * here + next;
        let delta = if curvature < 0.0 { 0.5 * (prev - next) / curvature } else { 0.0 };
        let neighbor = if delta >= 0.0 { k + 1 } else { k + n - 1 };
        let value = row[k] * (1.0 - delta.abs()) + row[neighbor % n] * delta.abs();
        let magnitude = here - 0.25 * (prev - next) * delta;
        peaks.push(Peak { time: map.time.time(k) + delta * map.time.dt, value, magnitude });
    }
    peaks
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

/// Follows the strongest ridge of `|T₂₂|` once around the azimuth and fits
/// its delay and orientation against θ.
pub fn polarization_spiral_metrics(map: &T22Map, params: &CoordinationParameters) -> Result<AptMetrics> {
    let global = map.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if global == 0.0 || !global.is_finite() {
        return Err(Error::InvalidArgument("T22 map carries no signal".into()));
    }
    let threshold = RIDGE_THRESHOLD * global;
    let period = map.time.span();
    let columns: Vec<Vec<Peak>> = (0..map.n_theta()).map(|i| column_peaks(map, i, threshold)).collect();
    if let Some(i) = columns.iter().position(|c| c.is_empty()) {
        return Err(Error::InvalidArgument(format!("no ridge crosses azimuth {:.4} rad", map.theta[i])));
    }

    let start = columns[0]
        .iter()
        .copied()
        .fold(None::<Peak>, |best, p| match best {
            Some(b) if b.magnitude >= p.magnitude => Some(b),
            _ => Some(p),
        })
        .expect("non-empty column");
    let mut ridge = vec![RidgePoint {
        theta: map.theta[0],
        time: start.time,
        orientation_deg: orientation(start.value).to_degrees(),
        magnitude: start.magnitude,
    }];
    for (i, column) in columns.iter().enumerate().skip(1) {
        let last = *ridge.last().expect("ridge has a start");
        let next = column
            .iter()
            .min_by(|a, b| {
                let da = wrap(a.time - last.time, period).abs();
                let db = wrap(b.time - last.time, period).abs();
                da.total_cmp(&db)
            })
            .expect("non-empty column");
        let angle = orientation(next.value).to_degrees();
        ridge.push(RidgePoint {
            theta: map.theta[i],
            time: last.time + wrap(next.time - last.time, period),
            orientation_deg: last.orientation_deg + wrap(angle - last.orientation_deg, 180.0),
            magnitude: next.magnitude,
        });
    }

    let theta: Vec<f64> = ridge.iter().map(|p| p.theta).collect();
    let times: Vec<f64> = ridge.iter().map(|p| p.time).collect();
    let angles: Vec<f64> = ridge.iter().map(|p| p.orientation_deg).collect();
    let (delay_slope, _, delay_rms) = linear_fit(&theta, &times);
    let (angle_slope, _, angle_rms) = linear_fit(&theta, &angles);
    let turn = 2.0 * std::f64::consts::PI;

    let mut pulses = columns[0].clone();
    pulses.sort_by(|a, b| a.time.total_cmp(&b.time));
    let pulse_orientations_deg: Vec<f64> =
        pulses.iter().map(|p| orientation(p.value).to_degrees().rem_euclid(180.0)).collect();
    let orientation_steps_deg = if pulses.len() > 1 {
        (0..pulses.len())
            .map(|k| {
                let next = pulse_orientations_deg[(k + 1) % pulses.len()];
                (next - pulse_orientations_deg[k]).rem_euclid(180.0)
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(AptMetrics {
        delay_per_revolution: delay_slope * turn,
        expected_delay: params.tau() * turn,
        rotation_per_revolution_deg: angle_slope * turn,
        expected_rotation_deg: 360.0 * params.gamma_f64(),
        delay_residual_rms: delay_rms,
        rotation_residual_rms_deg: angle_rms,
        time_step: map.time.dt,
        ridge,
        pulse_times: pulses.iter().map(|p| p.time).collect(),
        pulse_orientations_deg,
        orientation_steps_deg,
        intensity_correlation: map.intensity_correlation(),
    })
}
