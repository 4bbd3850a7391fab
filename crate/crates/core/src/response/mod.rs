//! Local harmonic emission of the thin gas slab.

pub mod emission;
pub mod sfa;
pub mod surrogate;

use num_complex::Complex64;

pub use emission::{helicity_of_line, EmissionGrid, HarmonicRange, LineHelicity};
pub use sfa::{sfa_emission, SfaParams, TrajectoryClass};
pub use surrogate::{surrogate_emission, SurrogateParams, DEFAULT_EFFECTIVE_ORDER};

use crate::basis::{rotation_phase, Helicity};
use crate::error::Result;
use crate::field::CoordinationParameters;

/// Relative residual of the coordinated-rotation symmetry on the emission
/// lines: `R(γα)Ẽ(R⁻¹(α)r, qω)` against `e^{−iqωτα}Ẽ(r, qω)`.
pub fn emission_symmetry_residual(
    emission: &EmissionGrid,
    params: &CoordinationParameters,
    alpha: f64,
) -> Result<f64> {
    let tg = &emission.transverse;
    let shift = tg.rotation_shift(alpha)?;
    let n = tg.n_azimuthal as isize;
    let delay = params.tau() * alpha;
    let mut reference = 0.0;
    let mut diff = 0.0;
    for (iq, q) in emission.harmonics.orders().enumerate() {
        let delay_phase = Complex64::from_polar(1.0, -(q as f64) * emission.omega * delay);
        for helicity in Helicity::BOTH {
            let s = helicity.index();
            let pol = rotation_phase(helicity, params.gamma_f64() * alpha);
            for ir in 0..tg.n_radial {
                let area = tg.cell_area(ir);
                for ith in 0..n {
                    let from = (ith - shift).rem_euclid(n) as usize;
                    let transformed = pol * emission.lines[[iq, s, ir, from]];
                    let shifted = delay_phase * emission.lines[[iq, s, ir, ith as usize]];
                    reference += area * shifted.norm_sqr();
                    diff += area * (transformed - shifted).norm_sqr();
                }
            }
        }
    }
    Ok(if reference == 0.0 { diff.sqrt() } else { (diff / reference).sqrt() })
}
