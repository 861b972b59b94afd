//! Thin wrappers over `rustfft` with a per-thread planner cache.
//!
//! Forward transforms are unnormalised, inverse transforms carry the 1/N factor,
//! so `ifft(fft(x)) == x`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn fft_in_place(x: &mut [Complex64]) {
    if x.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(x.len()));
    plan.process(x);
}

pub fn ifft_in_place(x: &mut [Complex64]) {
    if x.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(x.len()));
    plan.process(x);
    let scale = 1.0 / x.len() as f64;
    x.iter_mut().for_each(|v| *v *= scale);
}

pub fn fft(x: &[Complex64]) -> Vec<Complex64> {
    let mut y = x.to_vec();
    fft_in_place(&mut y);
    y
}

pub fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    let mut y = x.to_vec();
    ifft_in_place(&mut y);
    y
}
