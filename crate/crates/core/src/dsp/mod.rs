//! Signal-processing primitives: FFT, RRC pulse, fractional resampling.

pub mod fft;
pub mod resample;
pub mod rrc;

pub use fft::{fft, fft_in_place, ifft, ifft_in_place};
pub use rrc::RrcFilter;

use num_complex::Complex64;

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn energy_real(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Normalised correlation magnitude |<a, b>| / (|a| |b|).
pub fn normalized_correlation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let den = (energy(a) * energy(b)).sqrt();
    if den == 0.0 {
        0.0
    } else {
        dot.norm() / den
    }
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}
