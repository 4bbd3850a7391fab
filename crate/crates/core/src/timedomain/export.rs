//! CSV and binary exports of the pulse train.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{orientation, AptField, GaussianWindow, T22Map};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct T22Row {
    theta_rad: f64,
    t_fs: f64,
    t22_re: f64,
    t22_im: f64,
    t22_abs: f64,
    orientation_deg: f64,
    intensity: f64,
}

/// One row per `(θ, t)` sample, θ-major.
pub fn write_t22_csv<W: Write>(map: &T22Map, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for (i, &theta) in map.theta.iter().enumerate() {
        for k in 0..map.n_t() {
            let v = map.values[[i, k]];
            out.serialize(T22Row {
                theta_rad: theta,
                t_fs: map.time.time(k),
                t22_re: v.re,
                t22_im: v.im,
                t22_abs: v.norm(),
                orientation_deg: orientation(v).to_degrees(),
                intensity: map.intensity[[i, k]],
            })
            .map_err(|e| Error::Output(e.to_string()))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// The pulse train resampled on a Cartesian divergence grid.
///
/// `data` is row-major with shape `[t, y, x, channel]`; channel 0 is the
/// instantaneous intensity `|E|²` and channel 1 the orientation `½·arg T₂₂`
/// in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianApt {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub sigma: f64,
    pub data: Vec<f32>,
}

/// Sidecar description of the binary grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AptGridMeta {
    pub dtype: String,
    pub endianness: String,
    pub order: String,
    pub shape: [usize; 4],
    pub dimensions: [String; 4],
    pub channels: [String; 2],
    pub x_div_rad: Vec<f64>,
    pub y_div_rad: Vec<f64>,
    pub t_fs: Vec<f64>,
    pub sigma_fs: f64,
}

impl CartesianApt {
    pub fn shape(&self) -> [usize; 4] {
        [self.t.len(), self.y.len(), self.x.len(), 2]
    }

    pub fn meta(&self) -> AptGridMeta {
        AptGridMeta {
            dtype: "float32".into(),
            endianness: "little".into(),
            order: "row-major".into(),
            shape: self.shape(),
            dimensions: ["t".into(), "y_div".into(), "x_div".into(), "channel".into()],
            channels: ["intensity".into(), "orientation_rad".into()],
            x_div_rad: self.x.clone(),
            y_div_rad: self.y.clone(),
            t_fs: self.t.clone(),
            sigma_fs: self.sigma,
        }
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

/// Samples the middle cycle of the train at `n_t` times on an `n_xy × n_xy`
/// grid spanning `[−extent, extent]` in both divergence directions.
pub fn cartesian_apt(apt: &AptField, sigma: f64, extent: f64, n_xy: usize, n_t: usize) -> Result<CartesianApt> {
    let cycle = apt.samples_per_cycle;
    if n_xy < 2 || n_t == 0 || !cycle.is_multiple_of(n_t) {
        return Err(Error::InvalidArgument(format!(
            "cannot sample {n_t} times from {cycle} per cycle on a {n_xy}² grid"
        )));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid extent must be positive, got {extent}")));
    }
    let window = GaussianWindow::new(apt.time.dt, sigma)?;
    let stride = cycle / n_t;
    let axis: Vec<f64> = (0..n_xy).map(|i| -extent + 2.0 * extent * i as f64 / (n_xy - 1) as f64).collect();
    let times: Vec<usize> = (0..n_t).map(|k| cycle + k * stride).collect();

    let points: Vec<Vec<[f32; 2]>> = (0..n_xy * n_xy)
        .into_par_iter()
        .map_init(
            || (apt.synthesizer(), vec![Complex64::new(0.0, 0.0); apt.time.n_t]),
            |(synth, buf), index| {
                let (x, y) = (axis[index % n_xy], axis[index / n_xy]);
                let coefficients = apt.interpolated_coefficients(x.hypot(y), y.atan2(x));
                synth.synthesize(apt, &coefficients, buf);
                let squared: Vec<Complex64> = buf.iter().map(|z| z * z).collect();
                times
                    .iter()
                    .map(|&n| {
                        let t22 = window.apply(&squared, n..n + 1)[0];
                        [buf[n].norm_sqr() as f32, orientation(t22) as f32]
                    })
                    .collect()
            },
        )
        .collect();

    let mut data = vec![0.0f32; n_t * n_xy * n_xy * 2];
    for (index, series) in points.iter().enumerate() {
        for (k, v) in series.iter().enumerate() {
            let at = (k * n_xy * n_xy + index) * 2;
            data[at] = v[0];
            data[at + 1] = v[1];
        }
    }
    Ok(CartesianApt {
        x: axis.clone(),
        y: axis,
        t: times.iter().map(|&n| apt.time.time(n)).collect(),
        sigma,
        data,
    })
}
