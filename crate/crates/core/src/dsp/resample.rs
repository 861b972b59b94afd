//! Fractional-delay interpolation and time-scale resampling.
//!
//! Interpolation uses a Kaiser-windowed sinc kernel. Linear interpolation is
//! too lossy at two samples per symbol (and at six samples per carrier cycle
//! in the passband), so it is not offered.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

/// One-sided kernel length in input samples.
pub const KERNEL_HALF_WIDTH: i64 = 16;
const KAISER_BETA: f64 = 8.0;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

#[inline]
fn kernel(d: f64) -> f64 {
    let w = KERNEL_HALF_WIDTH as f64;
    if d.abs() >= w {
        return 0.0;
    }
    let sinc = if d.abs() < 1e-12 {
        1.0
    } else {
        (PI * d).sin() / (PI * d)
    };
    let r = d / w;
    let win = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / bessel_i0(KAISER_BETA);
    sinc * win
}

/// Band-limited value of `x` at fractional index `t`; samples outside the
/// slice are treated as zero.
pub fn interpolate<T>(x: &[T], t: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let base = t.floor() as i64;
    let frac = t - base as f64;
    if frac.abs() < 1e-12 {
        return if base >= 0 && (base as usize) < x.len() {
            x[base as usize]
        } else {
            T::default()
        };
    }
    let lo = (base - KERNEL_HALF_WIDTH + 1).max(0);
    let hi = (base + KERNEL_HALF_WIDTH).min(x.len() as i64 - 1);
    let mut acc = T::default();
    for i in lo..=hi {
        acc = acc + x[i as usize] * kernel(t - i as f64);
    }
    acc
}

/// Resamples `x` so that `out[n] = x(centre + scale * (n - centre))`.
///
/// `scale > 1` compresses the signal in time (reads the input faster).
pub fn time_scale<T>(x: &[T], scale: f64, centre: f64, out_len: usize) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    (0..out_len)
        .map(|n| interpolate(x, centre + scale * (n as f64 - centre)))
        .collect()
}
