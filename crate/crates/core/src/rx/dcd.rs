//! Dichotomous coordinate descent for Hermitian positive definite systems.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct DcdSolution {
    pub x: Vec<f64>,
    /// Successful coordinate updates performed.
    pub updates: usize,
    /// True when the finest step size was reached within the update budget.
    pub converged: bool,
}

/// Leading-element DCD for the real symmetric system `R x = b` (`R` row-major).
///
/// Starts from `x = 0` with step `h0` and halves the step up to `bits` times.
/// At every update the coordinate with the largest `|r_n| / R_nn` is moved by
/// `+-h` when that reduces the quadratic cost.
pub fn dcd_real(r: &[f64], b: &[f64], h0: f64, bits: u32, max_updates: usize) -> DcdSolution {
    let n = b.len();
    assert_eq!(r.len(), n * n);
    let mut x = vec![0.0; n];
    let mut res = b.to_vec();
    let mut h = h0;
    let mut level = 0u32;
    let mut updates = 0usize;
    if n == 0 {
        return DcdSolution {
            x,
            updates,
            converged: true,
        };
    }
    loop {
        let p = (0..n)
            .max_by(|&i, &j| {
                (res[i].abs() / r[i * n + i]).total_cmp(&(res[j].abs() / r[j * n + j]))
            })
            .expect("non-empty");
        let rpp = r[p * n + p];
        while res[p].abs() <= 0.5 * h * rpp {
            level += 1;
            h *= 0.5;
            if level > bits {
                return DcdSolution {
                    x,
                    updates,
                    converged: true,
                };
            }
        }
        if updates == max_updates {
            return DcdSolution {
                x,
                updates,
                converged: false,
            };
        }
        let step = h * res[p].signum();
        x[p] += step;
        for (i, ri) in res.iter_mut().enumerate() {
            *ri -= step * r[i * n + p];
        }
        updates += 1;
    }
}

/// Solves `G c = xi` for Hermitian `G` (row-major) through the real system
/// `[[Re G, -Im G], [Im G, Re G]] [Re c; Im c] = [Re xi; Im xi]`.
pub fn dcd_complex(g: &[Complex64], xi: &[Complex64], h0: f64, bits: u32, max_updates: usize) -> (Vec<Complex64>, DcdSolution) {
    let m = xi.len();
    let n = 2 * m;
    let mut r = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..m {
            let v = g[i * m + j];
            r[i * n + j] = v.re;
            r[i * n + j + m] = -v.im;
            r[(i + m) * n + j] = v.im;
            r[(i + m) * n + j + m] = v.re;
        }
    }
    let b: Vec<f64> = xi.iter().map(|v| v.re).chain(xi.iter().map(|v| v.im)).collect();
    let sol = dcd_real(&r, &b, h0, bits, max_updates);
    let c = (0..m).map(|i| Complex64::new(sol.x[i], sol.x[i + m])).collect();
    (c, sol)
}

/// Initial step: the power of two at or above `max|xi| / diag`.
pub fn initial_step(xi: &[Complex64], diag: f64) -> f64 {
    let m = xi.iter().map(|v| v.re.abs().max(v.im.abs())).fold(0.0, f64::max);
    if m == 0.0 || diag <= 0.0 {
        return 1.0;
    }
    2f64.powi((m / diag).log2().ceil() as i32)
}

/// Quadratic cost `x^T R x / 2 - b^T x` minimised by DCD.
pub fn quadratic_cost(r: &[f64], b: &[f64], x: &[f64]) -> f64 {
    let n = b.len();
    let mut c = 0.0;
    for i in 0..n {
        let rx: f64 = (0..n).map(|j| r[i * n + j] * x[j]).sum();
        c += 0.5 * x[i] * rx - b[i] * x[i];
    }
    c
}
