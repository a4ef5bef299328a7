//! Fourier modes of the single and double layer operators on the unit circle.
//!
//! With `G = E/2` the Green's function of `L_b - μ`, the single layer
//! kernel on the circle is `A(θ) = G(p(0), p(θ))` and the double layer
//! kernel, normal pointing into the disc, is
//! `K(θ) = κ e^{i(b/2) sin θ} [-i(b/2) sin θ I - s ∂_s I]`, `s = b(1 - cos θ)/2`.
//! Rotation invariance makes both diagonal:
//! `a_n = ∫ A(θ) e^{-inθ} dθ`, `b_n = 1/2 + ∫ K(θ) e^{-inθ} dθ`,
//! and a decaying solution with `w'(1) = ρ w(1)` satisfies `b_n + ρ a_n = 0`.

use crate::error::{Error, Result};
use crate::kernel::{eval_di_ds, eval_i, eval_i_inf, kernel_prefactor, small_s_expansion, ExpansionTable};
use crate::quad::{integrate_with_breaks, QuadOptions, QuadValue};
use crate::symbol::RobinSymbol;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

/// Ratio between the Green's function and the kernel `E`; measured from the
/// Landau-level residue, which comes out as `-2` times the projection.
pub const GREEN_NORMALIZATION: f64 = 0.5;
const LANDAU_TOL: f64 = 1e-6;
const EXPANSION_ORDER: usize = 8;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn kappa(b: f64) -> f64 {
    GREEN_NORMALIZATION * kernel_prefactor(b, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMethod {
    KernelRestriction,
    PvDirect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryModes {
    pub mu: f64,
    pub b: f64,
    pub a_n: BTreeMap<i64, Complex64>,
    pub b_n: BTreeMap<i64, Complex64>,
    pub method: BoundaryMethod,
}

impl BoundaryModes {
    /// `b_n + τ_n a_n`, zero exactly at mode eigenvalues.
    pub fn characteristic(&self, tau: &RobinSymbol, n: i64) -> Option<Complex64> {
        Some(self.b_n.get(&n)? + self.a_n.get(&n)? * tau.value(n))
    }
}

fn check_params(mu: f64, b: f64) -> Result<()> {
    if !(b > 0.0) || !mu.is_finite() {
        return Err(Error::Validation(format!("need b > 0 and finite mu, got b={b}, mu={mu}")));
    }
    let q = ((mu / b + 1.0) / 2.0).round().max(1.0);
    let level = (2.0 * q - 1.0) * b;
    if (mu - level).abs() < LANDAU_TOL {
        return Err(Error::Landau { mu, tol: LANDAU_TOL });
    }
    Ok(())
}

/// Kernel split `f = S(θ) ln(2 - 2cos θ) + R(θ)` for both layers.
struct SplitSample {
    s_a: Complex64,
    r_a: Complex64,
    s_k: Complex64,
    r_k: Complex64,
}

fn split_sample(b: f64, nu: Complex64, table: &ExpansionTable, theta: f64) -> Result<SplitSample> {
    let k = kappa(b);
    if theta == 0.0 {
        let s_i0 = table.log_part(0.0);
        let c0 = table.power_coeffs.get(&0).copied().unwrap_or(c(0.0));
        let r_a = (c0 + eval_i_inf(1, nu, 0.0)? + s_i0 * (b / 4.0).ln()) * k;
        return Ok(SplitSample { s_a: s_i0 * k, r_a, s_k: c(0.0), r_k: -s_i0 * k });
    }
    let half = (0.5 * theta).sin();
    let s = b * half * half;
    let log_term = (4.0 * half * half).ln();
    let sin = theta.sin();
    let phase = Complex64::from_polar(k, 0.5 * b * sin);
    let rot = Complex64::new(0.0, -0.5 * b * sin);
    let i = eval_i(1, nu, s)?;
    let is = eval_di_ds(1, nu, s)?;
    let si = table.log_part(s);
    let sid = table.log_part_deriv(s);
    let a = phase * i;
    let s_a = phase * si;
    let kk = phase * (rot * i - is * s);
    let s_k = phase * (rot * si - sid * s);
    Ok(SplitSample { s_a, r_a: a - s_a * log_term, s_k, r_k: kk - s_k * log_term })
}

fn theta_points(n_abs: i64) -> usize {
    let n = (8 * n_abs as usize).max(256);
    n + n % 2
}

/// `∫_0^{2π} (S(θ) ln(2-2cosθ) + R(θ)) e^{inθ} dθ` from samples on a uniform grid.
/// The log factor has Fourier coefficients `-1/|k|`, so its product with S
/// is a discrete convolution; R is smooth and takes the trapezoid rule.
fn split_mode(s_vals: &[Complex64], r_vals: &[Complex64], n: i64) -> Complex64 {
    let big_n = s_vals.len();
    let h = 2.0 * PI / big_n as f64;
    let half = (big_n / 2) as i64;
    let mut total = c(0.0);
    for m in -half..half {
        let k = -n - m;
        if k == 0 {
            continue;
        }
        let sigma: Complex64 = s_vals
            .iter()
            .enumerate()
            .map(|(j, &v)| v * Complex64::from_polar(1.0, -(m as f64) * h * j as f64))
            .sum::<Complex64>()
            / big_n as f64;
        total += sigma * (-2.0 * PI / k.unsigned_abs() as f64);
    }
    let trap: Complex64 =
        r_vals.iter().enumerate().map(|(j, &v)| v * Complex64::from_polar(1.0, n as f64 * h * j as f64)).sum();
    total + trap * h
}

/// Modes `a_n`, `b_n` for `n_lo..=n_hi` by restricting the kernel to the
/// circle with singularity subtraction.
pub fn boundary_modes_kernel(mu: f64, b: f64, n_lo: i64, n_hi: i64) -> Result<BoundaryModes> {
    check_params(mu, b)?;
    if n_lo > n_hi {
        return Err(Error::Validation(format!("empty mode range {n_lo}..={n_hi}")));
    }
    let nu = c(mu / b);
    let table = small_s_expansion(1, nu, EXPANSION_ORDER)?;
    let big_n = theta_points(n_lo.abs().max(n_hi.abs()));
    let h = 2.0 * PI / big_n as f64;
    let samples: Vec<SplitSample> =
        (0..big_n).into_par_iter().map(|j| split_sample(b, nu, &table, h * j as f64)).collect::<Result<_>>()?;
    let s_a: Vec<Complex64> = samples.iter().map(|s| s.s_a).collect();
    let r_a: Vec<Complex64> = samples.iter().map(|s| s.r_a).collect();
    let s_k: Vec<Complex64> = samples.iter().map(|s| s.s_k).collect();
    let r_k: Vec<Complex64> = samples.iter().map(|s| s.r_k).collect();
    let mut a_n = BTreeMap::new();
    let mut b_n = BTreeMap::new();
    for n in n_lo..=n_hi {
        // the kernel's phase orientation pairs e^{-inθ} with radial mode n
        a_n.insert(n, split_mode(&s_a, &r_a, -n));
        b_n.insert(n, split_mode(&s_k, &r_k, -n) + 0.5);
    }
    Ok(BoundaryModes { mu, b, a_n, b_n, method: BoundaryMethod::KernelRestriction })
}

/// Per-mode Robin boundary operator `Γ_n = 2(b_n - 1/2 + a_n τ_n)`.
///
/// It is of order -1 and `1 + Γ_n = 2(b_n + τ_n a_n)` vanishes exactly at
/// eigenvalues. The overall sign follows from the inward normal.
pub fn gamma_mode(mu: f64, b: f64, tau: &RobinSymbol, n: i64) -> Result<Complex64> {
    let m = boundary_modes_kernel(mu, b, n, n)?;
    Ok((m.b_n[&n] - 0.5 + m.a_n[&n] * tau.value(n)) * 2.0)
}

#[derive(Clone, Copy)]
struct Pair(Complex64, Complex64);

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Pair {
    type Output = Pair;
    fn sub(self, o: Pair) -> Pair {
        Pair(self.0 - o.0, self.1 - o.1)
    }
}

impl Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, x: f64) -> Pair {
        Pair(self.0 * x, self.1 * x)
    }
}

impl QuadValue for Pair {
    fn zero() -> Self {
        Pair(c(0.0), c(0.0))
    }
    fn magnitude(&self) -> f64 {
        self.0.norm().max(self.1.norm())
    }
}

/// Angular integrals at fixed t of the single and double layer integrands.
fn angular_pair(b: f64, n: i64, t: f64) -> Pair {
    let ct = 1.0 / t.tanh();
    let points = (n.abs() as f64 + 12.0 * (b * ct).sqrt() + b + 20.0).ceil() as usize * 2;
    let h = 2.0 * PI / points as f64;
    let mut acc = Pair(c(0.0), c(0.0));
    for j in 0..points {
        let th = h * j as f64;
        let half = (0.5 * th).sin();
        let s = b * half * half;
        let sin = th.sin();
        let g = Complex64::from_polar((-s * ct).exp(), 0.5 * b * sin - n as f64 * th);
        acc.0 += g;
        acc.1 += g * Complex64::new(s * ct, -0.5 * b * sin);
    }
    acc * h
}

fn pv_tail(b: f64, nu: f64, n: i64, eps: f64) -> Pair {
    let t_max = (60.0 + (4.0 * PI).ln()) / (1.0 - nu);
    let mut breaks = vec![eps];
    while *breaks.last().unwrap() * 2.0 < t_max {
        let next = breaks.last().unwrap() * 2.0;
        breaks.push(next);
    }
    breaks.push(t_max);
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 2000 };
    integrate_with_breaks(
        |t: f64| {
            let w = 2.0 * ((nu - 1.0) * t).exp() / (-(-2.0 * t).exp_m1());
            angular_pair(b, n, t) * w
        },
        &breaks,
        opts,
    )
    .value
}

/// Richardson table for `ε_k = ε_0 / 4^k`; columns eliminate `ε^{1/2}`,
/// `ε^{3/2}`, ... in turn. Returns the table by column.
fn richardson(levels: &[Pair]) -> Vec<Vec<Pair>> {
    let mut table = vec![levels.to_vec()];
    let mut p = 0.5;
    while table.last().unwrap().len() > 1 {
        let r = 4f64.powf(p);
        let prev = table.last().unwrap();
        let next: Vec<Pair> = prev.windows(2).map(|w| (w[1] * r - w[0]) * (1.0 / (r - 1.0))).collect();
        table.push(next);
        p += 1.0;
    }
    table
}

/// Result of the direct double-integral route for one mode.
#[derive(Debug, Clone)]
pub struct PvModes {
    pub a_n: Complex64,
    pub b_n: Complex64,
    /// Successive differences along the Richardson diagonal.
    pub corrections: Vec<f64>,
}

/// `a_n`, `b_n` from the t-representation
/// `∫_0^∞ e^{νt}/sinh t ∫_0^{2π} (...) e^{-s coth t} dθ dt`, truncating at
/// `t = ε` and extrapolating ε → 0. Converges only for `μ < b`.
pub fn boundary_modes_pv(mu: f64, b: f64, n: i64) -> Result<PvModes> {
    if !(b > 0.0) {
        return Err(Error::Validation(format!("need b > 0, got {b}")));
    }
    if !(mu < b) {
        return Err(Error::Range(format!("direct route needs mu < b, got mu={mu}, b={b}")));
    }
    let nu = mu / b;
    let eps0 = 0.04;
    let levels: Vec<Pair> = (0..5).into_par_iter().map(|k| pv_tail(b, nu, n, eps0 / 4f64.powi(k))).collect();
    let table = richardson(&levels);
    let diag: Vec<Pair> = table.iter().map(|col| *col.last().unwrap()).collect();
    let corrections = diag.windows(2).map(|w| (w[1] - w[0]).magnitude()).collect();
    let best = *diag.last().unwrap();
    let k = kappa(b);
    Ok(PvModes { a_n: best.0 * k, b_n: best.1 * k + 0.5, corrections })
}

/// Zeros in μ of `b_n + τ_n a_n` on `[lo, hi]` for each mode in range.
pub fn boundary_eigenvalues(b: f64, tau: &RobinSymbol, n_lo: i64, n_hi: i64, lo: f64, hi: f64, mesh: usize) -> Result<BTreeMap<i64, Vec<f64>>> {
    let mut all = boundary_eigenvalues_multi(b, std::slice::from_ref(tau), n_lo, n_hi, lo, hi, mesh)?;
    Ok(all.remove(0))
}

/// [`boundary_eigenvalues`] for several symbols sharing one μ scan.
pub fn boundary_eigenvalues_multi(
    b: f64,
    taus: &[RobinSymbol],
    n_lo: i64,
    n_hi: i64,
    lo: f64,
    hi: f64,
    mesh: usize,
) -> Result<Vec<BTreeMap<i64, Vec<f64>>>> {
    if !(lo < hi) || mesh < 2 {
        return Err(Error::Validation("boundary root search needs lo < hi and a mesh of at least 2".into()));
    }
    let mus: Vec<f64> = (0..mesh).map(|i| lo + (hi - lo) * i as f64 / (mesh - 1) as f64).collect();
    let scans: Vec<BoundaryModes> = mus.par_iter().map(|&m| boundary_modes_kernel(m, b, n_lo, n_hi)).collect::<Result<_>>()?;
    taus.iter()
        .map(|tau| {
            let mut out = BTreeMap::new();
            for n in n_lo..=n_hi {
                let f = |m: &BoundaryModes| m.characteristic(tau, n).unwrap().re;
                let mut roots = Vec::new();
                for i in 0..mesh - 1 {
                    let (f0, f1) = (f(&scans[i]), f(&scans[i + 1]));
                    if f0 == 0.0 {
                        roots.push(mus[i]);
                    } else if f0 * f1 < 0.0 {
                        let g = |m: f64| -> Result<f64> { Ok(boundary_modes_kernel(m, b, n, n)?.characteristic(tau, n).unwrap().re) };
                        roots.push(illinois(g, mus[i], mus[i + 1], f0, f1)?);
                    }
                }
                out.insert(n, roots);
            }
            Ok(out)
        })
        .collect()
}

/// Regula falsi with the Illinois modification.
fn illinois(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<f64> {
    let mut side = 0;
    for _ in 0..100 {
        let x = (a * fb - b * fa) / (fb - fa);
        let fx = f(x)?;
        if fx == 0.0 || (b - a).abs() < 1e-11 * x.abs().max(1.0) {
            return Ok(x);
        }
        if fx * fb > 0.0 {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < 1e-11 * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::Unresolved("boundary root refinement did not converge".into()))
}
