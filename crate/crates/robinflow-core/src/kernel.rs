//! Fundamental solution of the Landau hamiltonian `L_b - μ` on `ℝ^{2d}`.
//!
//! `E(x, y) = 2 b^{d-1} / (4π)^d · e^{i b Im(x̄·y)/2} · I(μ/b, b|x-y|²/4)` with
//! `I(ν, s) = ∫_0^∞ e^{-s coth t + ν t} sinh^{-d} t dt`, split at `coth h = 4`
//! into an entire part `I_0` and a part `I_∞` that is continued in ν.

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::specfun::{binomial_complex, binomial_general, digamma_int, factorial, g_upper, g_upper_scaled};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

const POLE_TOL: f64 = 1e-12;
const SERIES_TERMS: usize = 60;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `h = atanh(1/4)`, the point where `coth h = 4`.
pub fn split_point() -> f64 {
    0.25f64.atanh()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub b: f64,
    pub d: usize,
    pub mu: Complex64,
}

impl KernelParams {
    pub fn new(b: f64, d: usize, mu: Complex64) -> Result<Self> {
        if !(b > 0.0) || d == 0 {
            return Err(Error::Validation(format!("need b > 0 and d >= 1, got b={b}, d={d}")));
        }
        Ok(KernelParams { b, d, mu })
    }

    pub fn nu(&self) -> Complex64 {
        self.mu / self.b
    }
}

/// `Λ_q = 2b(q-1) + bd`.
pub fn landau_level(b: f64, d: usize, q: usize) -> f64 {
    2.0 * b * (q as f64 - 1.0) + b * d as f64
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 0.0, rel_tol: 2e-15, max_intervals: 3000 }
}

/// Continued value of `e^{-s} ∫_0^3 e^{-sζ} (ζ+2)^c ζ^α dζ`.
///
/// The exponent α is lifted by `m` integrations by parts until the remaining
/// integral converges; the boundary terms at ζ = 3 carry the continuation.
pub fn lifted_zeta_integral(cexp: Complex64, alpha: Complex64, s: f64, lifts: usize) -> Result<Complex64> {
    for i in 1..=lifts {
        if (alpha + i as f64).norm() < POLE_TOL {
            return Err(Error::Pole { nu: f64::NAN });
        }
    }
    if alpha.re + lifts as f64 <= -1.0 {
        return Err(Error::Domain(format!("{lifts} lifts do not regularize alpha = {alpha}")));
    }
    // falling factorials of the (ζ+2) exponent
    let mut falling = vec![c(1.0); lifts + 1];
    for k in 1..=lifts {
        falling[k] = falling[k - 1] * (cexp - (k - 1) as f64);
    }
    let deriv = |j: usize, z: f64| -> Complex64 {
        let lz = (z + 2.0).ln();
        let mut acc = c(0.0);
        for k in 0..=j {
            let coef = binomial_general(j as f64, k) * (-s).powi((j - k) as i32);
            acc += falling[k] * ((cexp - k as f64) * lz).exp() * coef;
        }
        acc * (-s * z).exp()
    };
    let mut total = c(0.0);
    let mut denom = c(1.0);
    for j in 0..lifts {
        denom *= alpha + (j + 1) as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let pow3 = ((alpha + (1 + j) as f64) * 3f64.ln()).exp();
        total += deriv(j, 3.0) * pow3 / denom * sign;
    }
    let mut prod = c(1.0);
    for i in 1..=lifts {
        prod *= alpha + i as f64;
    }
    let expo = alpha + lifts as f64;
    let mut breaks = vec![0.0];
    if s > 1.0 {
        let mut x = 1.0 / s;
        while x < 3.0 {
            breaks.push(x);
            x *= 4.0;
        }
    }
    breaks.push(3.0);
    let rem = integrate_with_breaks(|z: f64| deriv(lifts, z) * (expo * z.ln()).exp(), &breaks, quad_opts());
    let sign = if lifts % 2 == 0 { 1.0 } else { -1.0 };
    total += rem.value * sign / prod;
    Ok(total * (-s).exp())
}

fn check_pole(d: usize, nu: Complex64) -> Result<()> {
    let x = (nu.re - d as f64) / 2.0;
    if x > -POLE_TOL {
        let j = x.round();
        let pole = d as f64 + 2.0 * j;
        if (nu - pole).norm() < POLE_TOL {
            return Err(Error::Pole { nu: pole });
        }
    }
    Ok(())
}

fn lift_count(d: usize, nu: Complex64) -> usize {
    let m = ((nu.re - d as f64 + 2.0) / 2.0).ceil() + 1.0;
    if m > 0.0 { m as usize } else { 0 }
}

/// Analytic continuation of `I_∞(ν, s) = ∫_h^∞ e^{-s coth t + νt} sinh^{-d} t dt`.
pub fn eval_i_inf(d: usize, nu: Complex64, s: f64) -> Result<Complex64> {
    if s < 0.0 || s.is_nan() {
        return Err(Error::Domain(format!("I_inf needs s >= 0, got {s}")));
    }
    check_pole(d, nu)?;
    let cexp = (nu + (d as f64 - 2.0)) / 2.0;
    let alpha = (-nu + (d as f64 - 2.0)) / 2.0;
    lifted_zeta_integral(cexp, alpha, s, lift_count(d, nu)).map_err(|e| match e {
        Error::Pole { .. } => Error::Pole { nu: nu.re },
        other => other,
    })
}

/// `∂_s I_∞(ν, s)`; coth t = 1 + ζ splits it into two lifted integrals.
pub fn eval_di_inf_ds(d: usize, nu: Complex64, s: f64) -> Result<Complex64> {
    check_pole(d, nu)?;
    let cexp = (nu + (d as f64 - 2.0)) / 2.0;
    let alpha = (-nu + (d as f64 - 2.0)) / 2.0;
    let m = lift_count(d, nu);
    let j0 = lifted_zeta_integral(cexp, alpha, s, m)?;
    let j1 = lifted_zeta_integral(cexp, alpha + 1.0, s, m.saturating_sub(1))?;
    Ok(-(j0 + j1))
}

fn i0_integrand(d: usize, nu: Complex64, s: f64, u: f64, extra_u: bool) -> Complex64 {
    // (u²-1)^{(d-2)/2} ((u+1)/(u-1))^{ν/2} e^{-su}
    let lr = (2.0 / (u - 1.0)).ln_1p();
    let base = (d as f64 - 2.0) / 2.0 * (u * u - 1.0).ln() - s * u;
    let v = (nu * (0.5 * lr) + base).exp();
    if extra_u { v * u } else { v }
}

fn i0_quadrature(d: usize, nu: Complex64, s: f64, extra_u: bool) -> Result<Complex64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("I_0 needs s > 0, got {s}")));
    }
    // u = 4 e^y, du = u dy
    let reach = 70.0 + 4.0 * (d as f64 + nu.re.abs() + 1.0) * (1.0 + (1.0 + 1.0 / s).ln());
    let ymax = ((4.0 + reach / s) / 4.0).ln();
    let pieces = (ymax.ceil() as usize).clamp(1, 64);
    let breaks: Vec<f64> = (0..=pieces).map(|k| ymax * k as f64 / pieces as f64).collect();
    let r = integrate_with_breaks(
        |y: f64| {
            let u = 4.0 * y.exp();
            i0_integrand(d, nu, s, u, extra_u) * u
        },
        &breaks,
        quad_opts(),
    );
    Ok(if extra_u { -r.value } else { r.value })
}

/// `I_0(ν, s) = ∫_0^h e^{-s coth t + νt} sinh^{-d} t dt`, entire in ν.
pub fn eval_i0(d: usize, nu: Complex64, s: f64) -> Result<Complex64> {
    i0_quadrature(d, nu, s, false)
}

pub fn eval_di0_ds(d: usize, nu: Complex64, s: f64) -> Result<Complex64> {
    i0_quadrature(d, nu, s, true)
}

/// `I = I_0 + I_∞`.
pub fn eval_i(d: usize, nu: Complex64, s: f64) -> Result<Complex64> {
    Ok(eval_i0(d, nu, s)? + eval_i_inf(d, nu, s)?)
}

pub fn eval_di_ds(d: usize, nu: Complex64, s: f64) -> Result<Complex64> {
    Ok(eval_di0_ds(d, nu, s)? + eval_di_inf_ds(d, nu, s)?)
}

/// Taylor coefficients of `(1-x²)^{(d-2)/2} ((1+x)/(1-x))^{ν/2}` at x = 0.
///
/// The second factor is `exp(ν atanh x)`, expanded by the power-series
/// exponential recurrence (no cancellation for real ν).
pub fn amplitude_coefficients(d: usize, nu: Complex64, terms: usize) -> Vec<Complex64> {
    let mut h = vec![c(0.0); terms];
    for (j, hj) in h.iter_mut().enumerate().skip(1).step_by(2) {
        *hj = nu / j as f64;
    }
    let mut e = vec![c(0.0); terms];
    e[0] = c(1.0);
    for n in 1..terms {
        let mut acc = c(0.0);
        for j in 1..=n {
            acc += h[j] * e[n - j] * j as f64;
        }
        e[n] = acc / n as f64;
    }
    let half = (d as f64 - 2.0) / 2.0;
    let mut out = vec![c(0.0); terms];
    for k in 0..=(terms - 1) / 2 {
        let pk = binomial_general(half, k) * if k % 2 == 0 { 1.0 } else { -1.0 };
        for l in 0..terms - 2 * k {
            out[2 * k + l] += e[l] * pk;
        }
    }
    out
}

/// Same coefficients from the triple binomial series
/// `Σ_{2k+l+m=N} (-1)^{k+m} 2^l C((d-2)/2,k) C(ν/2,l) C(-l,m)`.
/// Only usable for small N (the terms cancel heavily).
pub fn amplitude_coefficients_triple(d: usize, nu: Complex64, terms: usize) -> Vec<Complex64> {
    let half = (d as f64 - 2.0) / 2.0;
    (0..terms)
        .map(|n| {
            let mut acc = c(0.0);
            for k in 0..=n / 2 {
                for l in 0..=(n - 2 * k) {
                    let m = n - 2 * k - l;
                    let sign = if (k + m) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += binomial_complex(nu / 2.0, l)
                        * (sign * 2f64.powi(l as i32) * binomial_general(half, k) * binomial_general(-(l as f64), m));
                }
            }
            acc
        })
        .collect()
}

/// `I_0` from the series `Σ_N a_N s^{N+1-d} g_{d-2-N}(4s)`.
pub fn eval_i0_series(d: usize, nu: Complex64, s: f64) -> Result<Complex64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("I_0 needs s > 0, got {s}")));
    }
    let a = amplitude_coefficients(d, nu, SERIES_TERMS);
    let v = 4.0 * s;
    let mut acc = c(0.0);
    for (n, an) in a.iter().enumerate() {
        let p = d as i32 - 2 - n as i32;
        let term = if p >= 0 {
            g_upper(p, v)? * s.powi(-(p + 1))
        } else {
            // s^{-(p+1)} g_p(4s) = 4^{p+1} E_{-p}(4s)
            4f64.powi(p + 1) * g_upper_scaled(p, v)?
        };
        acc += an * term;
    }
    Ok(acc)
}

/// Leading singular behaviour of `I_0` as s → 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeadingTerm {
    /// `coef · log s`
    Log { coef: f64 },
    /// `coef · s^power`
    Power { coef: f64, power: i32 },
}

/// `I_0(ν, s) ≈ Σ_j c_j s^j + log s · Σ_j d_j s^j`; negative j carry the
/// principal part for d > 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTable {
    pub power_coeffs: BTreeMap<i32, Complex64>,
    pub log_coeffs: BTreeMap<i32, Complex64>,
    pub truncation_order: usize,
    pub leading: LeadingTerm,
}

impl ExpansionTable {
    pub fn eval(&self, s: f64) -> Complex64 {
        let ls = s.ln();
        let p: Complex64 = self.power_coeffs.iter().map(|(&j, &cj)| cj * s.powi(j)).sum();
        let l: Complex64 = self.log_coeffs.iter().map(|(&j, &dj)| dj * s.powi(j)).sum();
        p + l * ls
    }

    /// Polynomial multiplying log s.
    pub fn log_part(&self, s: f64) -> Complex64 {
        self.log_coeffs.iter().map(|(&j, &dj)| dj * s.powi(j)).sum()
    }

    /// Derivative of [`Self::log_part`].
    pub fn log_part_deriv(&self, s: f64) -> Complex64 {
        self.log_coeffs
            .iter()
            .filter(|(&j, _)| j > 0)
            .map(|(&j, &dj)| dj * (j as f64) * s.powi(j - 1))
            .sum()
    }
}

pub const MAX_EXPANSION_ORDER: usize = 8;

/// Small-s expansion of `I_0` from the amplitude series and the
/// log/power decomposition of each `g_{d-2-N}(4s)`.
pub fn small_s_expansion(d: usize, nu: Complex64, order: usize) -> Result<ExpansionTable> {
    if order > MAX_EXPANSION_ORDER {
        return Err(Error::Order(format!("expansion order {order} exceeds {MAX_EXPANSION_ORDER}")));
    }
    let a = amplitude_coefficients(d, nu, SERIES_TERMS + order);
    let ln4 = 4f64.ln();
    let mut power: BTreeMap<i32, Complex64> = BTreeMap::new();
    let mut logc: BTreeMap<i32, Complex64> = BTreeMap::new();
    for (n, &an) in a.iter().enumerate() {
        let p = d as i32 - 2 - n as i32;
        if p >= 0 {
            *power.entry(-(p + 1)).or_insert(c(0.0)) += an * factorial(p as usize);
        } else {
            let q = (-p) as usize;
            let j0 = q as i32 - 1;
            if j0 as usize <= order {
                let sg = if (q - 1) % 2 == 0 { 1.0 } else { -1.0 };
                let f = sg / factorial(q - 1);
                *logc.entry(j0).or_insert(c(0.0)) += -an * f;
                *power.entry(j0).or_insert(c(0.0)) += an * f * (digamma_int(q) - ln4);
            }
        }
        for i in 0..=order as i32 {
            if i == -p - 1 {
                continue;
            }
            let sg = if i % 2 == 0 { 1.0 } else { -1.0 };
            let k = p + 1 + i;
            let coef = sg * 4f64.powi(k) / (factorial(i as usize) * k as f64);
            *power.entry(i).or_insert(c(0.0)) -= an * coef;
        }
    }
    let leading = if d == 1 {
        LeadingTerm::Log { coef: logc.get(&0).map_or(0.0, |v| v.re) }
    } else {
        LeadingTerm::Power { coef: factorial(d - 2), power: 1 - d as i32 }
    };
    Ok(ExpansionTable { power_coeffs: power, log_coeffs: logc, truncation_order: order, leading })
}

/// Prefactor `2 b^{d-1} / (4π)^d`.
pub fn kernel_prefactor(b: f64, d: usize) -> f64 {
    2.0 * b.powi(d as i32 - 1) / (4.0 * PI).powi(d as i32)
}

/// `Im(x̄·y)` for the pairing `ℝ^{2d} ≅ ℂ^d`, `z_j = x_{2j} + i x_{2j+1}`.
pub fn symplectic_pairing(x: &[f64], y: &[f64]) -> f64 {
    x.chunks(2).zip(y.chunks(2)).map(|(a, b)| a[0] * b[1] - a[1] * b[0]).sum()
}

fn check_points(p: &KernelParams, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != 2 * p.d || y.len() != 2 * p.d {
        return Err(Error::Validation(format!("points must have {} coordinates", 2 * p.d)));
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// The fundamental solution `E_{μ,b}(x, y)`.
pub fn eval_e(p: &KernelParams, x: &[f64], y: &[f64]) -> Result<Complex64> {
    let r2 = check_points(p, x, y)?;
    if r2.sqrt() < 1e-12 {
        return Err(Error::Diagonal(r2.sqrt()));
    }
    let phase = Complex64::from_polar(1.0, 0.5 * p.b * symplectic_pairing(x, y));
    let s = p.b * r2 / 4.0;
    Ok(phase * eval_i(p.d, p.nu(), s)? * kernel_prefactor(p.b, p.d))
}

/// Residue of `E_{μ,b}(x, y)` at `μ = Λ_q`, by the trapezoid rule on a
/// circle. Only `I_∞` has poles, so the contour integrates that part alone,
/// which keeps `x = y` admissible.
pub fn landau_projection_kernel(p: &KernelParams, q: usize, x: &[f64], y: &[f64], radius: Option<f64>) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::Validation("Landau index q starts at 1".into()));
    }
    let r2 = check_points(p, x, y)?;
    let radius = radius.unwrap_or(0.1 * p.b);
    let spacing = 2.0 * p.b;
    if !(radius > 0.0) {
        return Err(Error::Validation(format!("contour radius must be positive, got {radius}")));
    }
    if radius >= spacing {
        return Err(Error::Contour { radius, spacing });
    }
    let centre = landau_level(p.b, p.d, q);
    let s = p.b * r2 / 4.0;
    let pref = kernel_prefactor(p.b, p.d);
    let phase = Complex64::from_polar(1.0, 0.5 * p.b * symplectic_pairing(x, y));
    let trapezoid = |nodes: usize| -> Result<Complex64> {
        let mut acc = c(0.0);
        for k in 0..nodes {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
            let mu = centre + w * radius;
            acc += eval_i_inf(p.d, mu / p.b, s)? * w;
        }
        Ok(acc * (radius / nodes as f64))
    };
    let mut nodes = 64;
    let mut prev = trapezoid(nodes)?;
    while nodes < 8192 {
        nodes *= 2;
        let cur = trapezoid(nodes)?;
        if (cur - prev).norm() <= 1e-9 * cur.norm().max(1e-3) {
            return Ok(cur * phase * pref);
        }
        prev = cur;
    }
    Err(Error::Unresolved(format!("residue contour did not converge with {nodes} nodes")))
}

/// `|((−i∇ + A)² − μ) E(·, y)|` at x by the five-point stencil of width h.
pub fn magnetic_residual(p: &KernelParams, x: [f64; 2], y: [f64; 2], h: f64) -> Result<f64> {
    let e = |a: f64, b: f64| eval_e(p, &[a, b], &y);
    let f0 = e(x[0], x[1])?;
    let fxp = e(x[0] + h, x[1])?;
    let fxm = e(x[0] - h, x[1])?;
    let fyp = e(x[0], x[1] + h)?;
    let fym = e(x[0], x[1] - h)?;
    let lap = (fxp + fxm + fyp + fym - f0 * 4.0) / (h * h);
    let gx = (fxp - fxm) / (2.0 * h);
    let gy = (fyp - fym) / (2.0 * h);
    let (ax, ay) = (-0.5 * p.b * x[1], 0.5 * p.b * x[0]);
    let i = Complex64::new(0.0, 1.0);
    let lf = -lap - i * 2.0 * (gx * ax + gy * ay) + f0 * (ax * ax + ay * ay);
    Ok((lf - f0 * p.mu).norm())
}
