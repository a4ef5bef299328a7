//! Independent reference computations used to check the main solvers.
//!
//! The finite-difference oracle discretizes the radial form
//! `∫ r(w'² + V w²) dr + τ w(1)²` on a uniform finite-volume grid over
//! `(1, R)` with `w(R) = 0`, and extrapolates two grids.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

fn potential(n: i64, b: f64, r: f64) -> f64 {
    let v = n as f64 / r - 0.5 * b * r;
    v * v
}

/// Symmetric tridiagonal `M^{-1/2} K M^{-1/2}` of the radial form.
/// `tau = None` imposes `w(1) = 0`.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

fn assemble(n: i64, b: f64, tau: Option<f64>, r_max: f64, h: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = ((r_max - 1.0) / h).round() as usize;
    let r = |i: usize| 1.0 + h * i as f64;
    // node 0 is the boundary half cell, node m is the Dirichlet end
    let mut k_diag = vec![0.0; m];
    let mut k_off = vec![0.0; m.saturating_sub(1)];
    let mut mass = vec![0.0; m];
    for i in 0..m {
        let ri = r(i);
        let right = (ri + 0.5 * h) / h;
        if i == 0 {
            mass[0] = 0.5 * h * (1.0 + 0.25 * h);
            k_diag[0] = right + tau.unwrap_or(0.0) + mass[0] * potential(n, b, ri);
        } else {
            mass[i] = h * ri;
            k_diag[i] = (ri - 0.5 * h) / h + right + mass[i] * potential(n, b, ri);
        }
        if i + 1 < m {
            k_off[i] = -right;
        }
    }
    (k_diag, k_off, mass)
}

fn symmetric_form(n: i64, b: f64, tau: Option<f64>, r_max: f64, h: f64) -> Tridiagonal {
    let (kd, ko, mass) = assemble(n, b, tau, r_max, h);
    let skip = usize::from(tau.is_none());
    let diag: Vec<f64> = (skip..kd.len()).map(|i| kd[i] / mass[i]).collect();
    let off: Vec<f64> = (skip..ko.len()).map(|i| ko[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    Tridiagonal { diag, off }
}

impl Tridiagonal {
    /// Number of eigenvalues below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.diag.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            d = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / d };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let c_lo = self.count_below(lo);
        let c_hi = self.count_below(hi);
        (c_lo..c_hi)
            .map(|k| {
                let (mut a, mut b) = (lo, hi);
                while b - a > 1e-14 * b.abs().max(1.0) {
                    let m = 0.5 * (a + b);
                    if self.count_below(m) > k { b = m } else { a = m }
                }
                0.5 * (a + b)
            })
            .collect()
    }
}

/// Radial eigenvalues in `(lo, hi)` on one grid.
pub fn fd_eigenvalues(n: i64, b: f64, tau: Option<f64>, r_max: f64, h: f64, lo: f64, hi: f64) -> Vec<f64> {
    symmetric_form(n, b, tau, r_max, h).eigenvalues_in(lo, hi)
}

/// The symmetric radial matrix on one grid, dense.
pub fn fd_matrix(n: i64, b: f64, tau: Option<f64>, r_max: f64, h: f64) -> nalgebra::DMatrix<f64> {
    let t = symmetric_form(n, b, tau, r_max, h);
    let m = t.diag.len();
    nalgebra::DMatrix::from_fn(m, m, |i, j| match i.abs_diff(j) {
        0 => t.diag[i],
        1 => t.off[i.min(j)],
        _ => 0.0,
    })
}

/// Richardson combination `(4 λ_{h/2} - λ_h)/3` of two grids.
pub fn fd_eigenvalues_extrapolated(n: i64, b: f64, tau: Option<f64>, r_max: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let h = 2e-3;
    // widen the window a little so grid shifts do not drop an eigenvalue
    let pad = 1e-3 * (hi - lo);
    let coarse = fd_eigenvalues(n, b, tau, r_max, h, lo - pad, hi + pad);
    let fine = fd_eigenvalues(n, b, tau, r_max, 0.5 * h, lo - pad, hi + pad);
    if coarse.len() != fine.len() {
        return Err(Error::Unresolved("finite-difference grids disagree on the eigenvalue count".into()));
    }
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .filter(|&l| l > lo && l < hi)
        .collect())
}

/// Discrete `w'(1)/w(1)` of the solution vanishing at `r_max`.
pub fn fd_log_derivative(n: i64, b: f64, lambda: f64, r_max: f64, h: f64) -> f64 {
    let (kd, ko, mass) = assemble(n, b, Some(0.0), r_max, h);
    let m = kd.len();
    // rows 1..m with w_0 = 1 fixed, Thomas sweep
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    for i in 1..m {
        let a = ko[i - 1];
        let diag = kd[i] - lambda * mass[i];
        let c = if i + 1 < m { ko[i] } else { 0.0 };
        let rhs = if i == 1 { -a } else { 0.0 };
        let (denom, rhs) = if i == 1 { (diag, rhs) } else { (diag - a * cp[i - 1], rhs - a * dp[i - 1]) };
        cp[i] = c / denom;
        dp[i] = rhs / denom;
    }
    let mut w = vec![0.0; m];
    w[0] = 1.0;
    for i in (1..m).rev() {
        w[i] = dp[i] - if i + 1 < m { cp[i] * w[i + 1] } else { 0.0 };
    }
    let r_half = 1.0 + 0.5 * h;
    r_half * (w[1] - w[0]) / h - mass[0] * (potential(n, b, 1.0) - lambda) * w[0]
}

pub fn fd_log_derivative_extrapolated(n: i64, b: f64, lambda: f64, r_max: f64) -> f64 {
    let coarse = fd_log_derivative(n, b, lambda, r_max, 2e-3);
    let fine = fd_log_derivative(n, b, lambda, r_max, 1e-3);
    (4.0 * fine - coarse) / 3.0
}

/// `Σ_k φ_k(x) conj φ_k(y)` over the orthonormal lowest-Landau-level basis
/// `φ_k ∝ z̄^k e^{-b|z|²/4}` of the plane.
pub fn lowest_landau_kernel(b: f64, x: [f64; 2], y: [f64; 2]) -> Complex64 {
    let zx = Complex64::new(x[0], -x[1]);
    let zy = Complex64::new(y[0], -y[1]);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 0..200 {
        if k > 0 {
            term = term * zx * zy.conj() * (b / 2.0) / k as f64;
        }
        acc += term;
        if k > 10 && term.norm() < 1e-18 * acc.norm() {
            break;
        }
    }
    let gauss = (-(b / 4.0) * (x[0] * x[0] + x[1] * x[1] + y[0] * y[0] + y[1] * y[1])).exp();
    acc * (b / (2.0 * PI)) * gauss
}
