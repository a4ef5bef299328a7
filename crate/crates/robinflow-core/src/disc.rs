//! Per-mode radial problems on the exterior of the unit disc.
//!
//! Mode n of the Landau hamiltonian acts as
//! `H_n = -d²/dr² - (1/r) d/dr + (n/r - br/2)²` on `L²((1,∞), r dr)`.
//! The decaying solution is carried in Prüfer form
//! `w = R sin ϑ`, `r w' = -R cos ϑ`, integrated inward from a far radius.
//! With this orientation ϑ(1) increases with λ and `dϑ(1)/dλ = J(1)`,
//! where `J(r) = ∫_r^∞ w² s ds / R(r)²`.

use crate::error::{Error, Result};
use crate::quad::{dopri5, OdeOptions};
use crate::specfun::{binomial_general, factorial, laguerre};
use crate::symbol::RobinSymbol;
use rayon::prelude::*;
use std::f64::consts::PI;

/// λ-distance below which `w(1)` counts as zero.
pub const DIRICHLET_TOL: f64 = 1e-8;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeProblem {
    pub n: i64,
    pub b: f64,
    pub robin: f64,
}

impl ModeProblem {
    pub fn new(n: i64, b: f64, robin: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Validation(format!("field strength must be positive, got {b}")));
        }
        if !robin.is_finite() {
            return Err(Error::Validation("Robin value must be finite".into()));
        }
        Ok(ModeProblem { n, b, robin })
    }

    pub fn potential(&self, r: f64) -> f64 {
        potential(self.n, self.b, r)
    }
}

fn potential(n: i64, b: f64, r: f64) -> f64 {
    let v = n as f64 / r - 0.5 * b * r;
    v * v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub r: f64,
    /// `ln R(r)` normalized to 0 at the far radius.
    pub log_amplitude: f64,
    pub prufer_angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    /// `w'(1)/w(1)`; `None` when `w(1)` vanishes.
    pub log_deriv_at_1: Option<f64>,
    /// `w(1)² / ∫_1^∞ w² r dr`.
    pub boundary_weight: f64,
    pub pole_flag: bool,
    pub prufer_angle: f64,
    /// `J(1)`, which is also `dϑ(1)/dλ`.
    pub angle_slope: f64,
    /// Estimated λ-distance to the nearest zero of `w(1)`.
    pub dirichlet_distance: f64,
    pub r_max: f64,
    pub grid_values: Option<Vec<RadialSample>>,
}

impl RadialSolution {
    /// `du(1)/dλ = J / sin²ϑ`.
    pub fn log_deriv_slope(&self) -> f64 {
        self.angle_slope / self.prufer_angle.sin().powi(2)
    }
}

/// Closed interval of spectral parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumWindow {
    pub lo: f64,
    pub hi: f64,
}

impl SpectrumWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Validation(format!("window needs lo < hi, got ({lo}, {hi})")));
        }
        Ok(SpectrumWindow { lo, hi })
    }

    /// Landau levels `(2q-1)b` within `radius` of the window.
    pub fn excluded(&self, b: f64, radius: f64) -> Vec<f64> {
        (1..)
            .map(|q| landau_level(b, q))
            .take_while(|&l| l <= self.hi + radius)
            .filter(|&l| l >= self.lo - radius)
            .collect()
    }

    fn check(&self, b: f64) -> Result<()> {
        match self.excluded(b, 1e-3 * b).first() {
            Some(&level) => Err(Error::Window { lo: self.lo, hi: self.hi, level }),
            None => Ok(()),
        }
    }
}

/// `Λ_q = (2q-1) b`.
pub fn landau_level(b: f64, q: usize) -> f64 {
    (2 * q - 1) as f64 * b
}

/// Far radius past the outer turning point with a WKB decay exponent of at
/// least 30, and with `b R²/4 ≥ 40`.
pub fn default_r_max(n: i64, b: f64, lambda: f64) -> f64 {
    let lp = lambda.max(0.0);
    let disc = lp + 2.0 * b * n as f64;
    let turning = if disc > 0.0 { ((lp.sqrt() + disc.sqrt()) / b).max(1.0) } else { 1.0 };
    let dr = 0.01;
    let mut r = turning;
    let mut decay = 0.0;
    while decay < 30.0 {
        decay += (potential(n, b, r) - lambda).max(0.0).sqrt() * dr;
        r += dr;
    }
    r.max((160.0 / b).sqrt())
}

struct PruferRun {
    theta: f64,
    j: f64,
    samples: Vec<RadialSample>,
}

/// Integrate ϑ, ln R and J inward from `r_max` to `r_stop`.
fn integrate_prufer(n: i64, b: f64, lambda: f64, r_max: f64, r_stop: f64, keep: bool) -> Result<PruferRun> {
    let u_far = -0.5 * b * r_max + (n as f64 + lambda / b - 1.0) / r_max;
    let theta0 = 1f64.atan2(-r_max * u_far);
    let j0 = theta0.sin().powi(2) * r_max / (-2.0 * u_far).max(1e-300);
    let rhs = |r: f64, y: &[f64; 3]| -> [f64; 3] {
        let (s, c) = y[0].sin_cos();
        let q = lambda - potential(n, b, r);
        let dell = -(1.0 / r - r * q) * s * c;
        [-c * c / r - r * q * s * s, dell, -2.0 * dell * y[2] - r * s * s]
    };
    let opts = OdeOptions { abs_tol: [1e-14, 1e-12, 1e-300], rel_tol: 1e-13, max_steps: 400_000, initial_step: 1e-3 };
    let run = dopri5(rhs, r_max, r_stop, [theta0, 0.0, j0], &opts, keep).map_err(|r| Error::Stiff { r })?;
    let samples = run
        .samples
        .iter()
        .map(|&(r, y)| RadialSample { r, log_amplitude: y[1], prufer_angle: y[0] })
        .collect();
    Ok(PruferRun { theta: run.y[0], j: run.y[2], samples })
}

fn solution_from(run: PruferRun, r_max: f64, keep: bool) -> RadialSolution {
    let (s, c) = run.theta.sin_cos();
    let distance = s.abs() / run.j;
    let pole = distance < DIRICHLET_TOL;
    RadialSolution {
        log_deriv_at_1: if pole { None } else { Some(-c / s) },
        boundary_weight: s * s / run.j,
        pole_flag: pole,
        prufer_angle: run.theta,
        angle_slope: run.j,
        dirichlet_distance: distance,
        r_max,
        grid_values: if keep { Some(run.samples) } else { None },
    }
}

/// Decaying solution of `H_n w = λ w`; the Robin value of `mp` is ignored.
pub fn solve_radial(mp: &ModeProblem, lambda: f64, r_max: Option<f64>) -> Result<RadialSolution> {
    let r_max = r_max.unwrap_or_else(|| default_r_max(mp.n, mp.b, lambda));
    if mp.b * r_max * r_max / 4.0 < 40.0 - 1e-9 {
        return Err(Error::Validation(format!("far radius {r_max} too small for b = {}", mp.b)));
    }
    Ok(solution_from(integrate_prufer(mp.n, mp.b, lambda, r_max, 1.0, false)?, r_max, false))
}

/// As [`solve_radial`], also returning the sampled log-amplitude and angle.
pub fn solve_radial_with_grid(mp: &ModeProblem, lambda: f64, r_max: Option<f64>) -> Result<RadialSolution> {
    let r_max = r_max.unwrap_or_else(|| default_r_max(mp.n, mp.b, lambda));
    Ok(solution_from(integrate_prufer(mp.n, mp.b, lambda, r_max, 1.0, true)?, r_max, true))
}

/// `w'(r)/w(r)` at each requested radius (any order, all ≥ 1).
pub fn log_derivative_at(mp: &ModeProblem, lambda: f64, radii: &[f64]) -> Result<Vec<f64>> {
    let far = radii.iter().fold(0.0f64, |m, &r| m.max(r));
    let r_max = default_r_max(mp.n, mp.b, lambda).max(far + 10.0);
    radii
        .iter()
        .map(|&r| {
            if r < 1.0 {
                return Err(Error::Validation(format!("radius {r} is inside the disc")));
            }
            let run = integrate_prufer(mp.n, mp.b, lambda, r_max, r, false)?;
            let (s, c) = run.theta.sin_cos();
            Ok(-c / (s * r))
        })
        .collect()
}

/// `w_{Λ_q,n,b}(r) = (q-1)! (-1)^{q-1} (b/2)^{(n+1)/2} r^n e^{-br²/4} L^n_{q-1}(br²/2)`.
pub fn closed_form_landau_mode(q: usize, n: i64, b: f64, r: f64) -> f64 {
    assert!(q >= 1, "Landau index starts at 1");
    let sign = if (q - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let nf = n as f64;
    factorial(q - 1) * sign * (0.5 * b).powf(0.5 * (nf + 1.0)) * r.powf(nf) * (-0.25 * b * r * r).exp()
        * laguerre(q - 1, nf, 0.5 * b * r * r)
}

/// Log-derivative of [`closed_form_landau_mode`], using `(L^n_k)' = -L^{n+1}_{k-1}`.
pub fn closed_form_log_derivative(q: usize, n: i64, b: f64, r: f64) -> f64 {
    let x = 0.5 * b * r * r;
    let nf = n as f64;
    let ratio = if q >= 2 { laguerre(q - 2, nf + 1.0, x) / laguerre(q - 1, nf, x) } else { 0.0 };
    nf / r - 0.5 * b * r - b * r * ratio
}

/// `u(1) - τ_n`; vanishes exactly on the mode spectrum.
pub fn secular(mp: &ModeProblem, lambda: f64) -> Result<f64> {
    Ok(dtr_ratio(mp.n, mp.b, lambda)? - mp.robin)
}

/// Per-mode Dirichlet-to-Robin value `ρ_n(μ) = w'(1)/w(1)`.
pub fn dtr_ratio(n: i64, b: f64, mu: f64) -> Result<f64> {
    let mp = ModeProblem::new(n, b, 0.0)?;
    let sol = solve_radial(&mp, mu, None)?;
    sol.log_deriv_at_1
        .ok_or(Error::Dirichlet { n, lambda: mu, distance: sol.dirichlet_distance })
}

/// Angle `α ∈ (0, π)` with `-cot α = τ`; Robin eigenvalues sit at `ϑ(1) = α + kπ`.
pub fn robin_angle(tau: f64) -> f64 {
    1f64.atan2(-tau)
}

/// Number of mode eigenvalues strictly below λ, from the Prüfer winding.
pub fn count_below(mp: &ModeProblem, lambda: f64) -> Result<usize> {
    let sol = solve_radial(mp, lambda, None)?;
    Ok(winding_count(sol.prufer_angle, robin_angle(mp.robin)))
}

fn winding_count(theta: f64, alpha: f64) -> usize {
    if theta > alpha { ((theta - alpha) / PI).ceil() as usize } else { 0 }
}

/// Angle and slope at fixed far radius.
fn angle_at(n: i64, b: f64, lambda: f64, r_max: f64) -> Result<(f64, f64)> {
    let run = integrate_prufer(n, b, lambda, r_max, 1.0, false)?;
    Ok((run.theta, run.j))
}

/// Solve `ϑ(λ) = target` inside a bracket by safeguarded Newton.
fn solve_angle(n: i64, b: f64, r_max: f64, target: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (th, slope) = angle_at(n, b, x, r_max)?;
        let f = th - target;
        if f > 0.0 { hi = x } else { lo = x }
        let newton = x - f / slope;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step < ROOT_TOL * x.abs().max(1.0) || hi - lo < ROOT_TOL * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::Unresolved(format!("angle root for mode {n} did not converge")))
}

fn roots_for_targets(n: i64, b: f64, w: &SpectrumWindow, targets_of: impl Fn(f64, f64) -> Vec<f64>) -> Result<Vec<f64>> {
    let r_max = default_r_max(n, b, w.hi);
    let (th_lo, _) = angle_at(n, b, w.lo, r_max)?;
    let (th_hi, _) = angle_at(n, b, w.hi, r_max)?;
    let targets = targets_of(th_lo, th_hi);
    targets.par_iter().map(|&t| solve_angle(n, b, r_max, t, w.lo, w.hi)).collect()
}

/// Robin eigenvalues of mode `mp` in the window, ascending.
pub fn mode_eigenvalues(mp: &ModeProblem, w: &SpectrumWindow) -> Result<Vec<f64>> {
    w.check(mp.b)?;
    let alpha = robin_angle(mp.robin);
    roots_for_targets(mp.n, mp.b, w, |lo, hi| {
        let first = winding_count(lo, alpha);
        let last = winding_count(hi, alpha);
        (first..last).map(|k| alpha + k as f64 * PI).filter(|&t| t > lo).collect()
    })
}

/// Zeros of `w(1)` in the window, ascending.
pub fn dirichlet_mode_spectrum(n: i64, b: f64, w: &SpectrumWindow) -> Result<Vec<f64>> {
    ModeProblem::new(n, b, 0.0)?;
    w.check(b)?;
    roots_for_targets(n, b, w, |lo, hi| {
        let first = (lo / PI).floor() as i64 + 1;
        let last = (hi / PI).ceil() as i64 - 1;
        (first.max(1)..=last).map(|k| k as f64 * PI).collect()
    })
}

/// The k-th (from 0) Robin eigenvalue of mode n, searched outward from `guess`.
pub fn nth_eigenvalue(n: i64, b: f64, tau: f64, k: usize, guess: f64) -> Result<f64> {
    let target = robin_angle(tau) + k as f64 * PI;
    let mut width = 1.0f64.max(guess.abs() * 0.1);
    let mut lo = guess - width;
    let mut hi = guess + width;
    for _ in 0..80 {
        let r_max = default_r_max(n, b, hi);
        let (th_lo, _) = angle_at(n, b, lo, r_max)?;
        let (th_hi, _) = angle_at(n, b, hi, r_max)?;
        if th_lo <= target && th_hi >= target {
            return solve_angle(n, b, r_max, target, lo, hi);
        }
        width *= 2.0;
        if th_lo > target {
            lo -= width;
        }
        if th_hi < target {
            hi += width;
        }
    }
    Err(Error::Unresolved(format!("no bracket for eigenvalue {k} of mode {n}")))
}

/// `dλ/dt` along `τ_n + t` at an eigenvalue: the boundary weight `w(1)²/‖w‖²`.
pub fn feynman_hellmann(mp: &ModeProblem, lambda_eigen: f64) -> Result<f64> {
    let sol = solve_radial(mp, lambda_eigen, None)?;
    let u = sol
        .log_deriv_at_1
        .ok_or(Error::Dirichlet { n: mp.n, lambda: lambda_eigen, distance: sol.dirichlet_distance })?;
    // distance to the eigenvalue in λ, to first order
    let offset = (u - mp.robin).abs() / sol.log_deriv_slope();
    if offset > 1e-8 * lambda_eigen.abs().max(1.0) {
        return Err(Error::NotEigen { lambda: lambda_eigen, residual: u - mp.robin });
    }
    Ok(sol.boundary_weight)
}

/// Which sign in front of the Laguerre-derivative term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaguerreSign {
    /// `(2n - b - 2τ) L^n_{q-1} - 2b L^{n+1}_{q-2}`, the one matching the ODE.
    Operative,
    /// The opposite sign, kept for comparison.
    Flipped,
}

/// The linear condition on `τ` for `Λ_q` to be an eigenvalue of mode n.
pub fn landau_condition(q: usize, n: i64, b: f64, tau: f64, sign: LaguerreSign) -> f64 {
    let nf = n as f64;
    let main = (2.0 * nf - b - 2.0 * tau) * laguerre(q - 1, nf, 0.5 * b);
    let lower = if q >= 2 { 2.0 * b * laguerre(q - 2, nf + 1.0, 0.5 * b) } else { 0.0 };
    match sign {
        LaguerreSign::Operative => main - lower,
        LaguerreSign::Flipped => main + lower,
    }
}

/// `ℓ_n(q, b) = L^{n+1}_{q-2}(b/2) / L^n_{q-1}(b/2)`; `None` at a zero of the denominator.
pub fn ell(q: usize, n: i64, b: f64) -> Option<f64> {
    if q < 2 {
        return Some(0.0);
    }
    let den = laguerre(q - 1, n as f64, 0.5 * b);
    (den != 0.0).then(|| laguerre(q - 2, n as f64 + 1.0, 0.5 * b) / den)
}

/// Same ratio as explicit polynomials in n:
/// `Σ_j C(q-1+n, q-2-j)(-b/2)^j/j!` over `Σ_j C(q-1+n, q-1-j)(-b/2)^j/j!`.
pub fn ell_rational(q: usize, n: i64, b: f64) -> Option<f64> {
    if q < 2 {
        return Some(0.0);
    }
    let top = (q - 1) as f64 + n as f64;
    let poly = |deg: usize| -> f64 {
        (0..=deg).map(|j| binomial_general(top, deg - j) * (-0.5 * b).powi(j as i32) / factorial(j)).sum()
    };
    let den = poly(q - 1);
    (den != 0.0).then(|| poly(q - 2) / den)
}

/// `T_n(q, b)`: the Robin value making `Λ_q` an eigenvalue of mode n.
pub fn landau_robin_value(q: usize, n: i64, b: f64, sign: LaguerreSign) -> Option<f64> {
    let l = ell(q, n, b)?;
    let base = n as f64 - 0.5 * b;
    Some(match sign {
        LaguerreSign::Operative => base - b * l,
        LaguerreSign::Flipped => base + b * l,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandauMultiplicity {
    pub q: usize,
    pub modes: Vec<i64>,
    pub robin_values: Vec<(i64, Option<f64>)>,
}

/// Modes in `n_lo..=n_hi` for which `Λ_q` is an eigenvalue under `tau`.
pub fn landau_multiplicity(q: usize, b: f64, tau: &RobinSymbol, n_lo: i64, n_hi: i64) -> Result<LandauMultiplicity> {
    if q == 0 {
        return Err(Error::Validation("Landau index starts at 1".into()));
    }
    let mut modes = Vec::new();
    let mut robin_values = Vec::new();
    for n in n_lo..=n_hi {
        let t = tau.value(n);
        let cond = landau_condition(q, n, b, t, LaguerreSign::Operative);
        let nf = n as f64;
        let scale = (2.0 * nf.abs() + b + 2.0 * t.abs()) * laguerre(q - 1, nf, 0.5 * b).abs()
            + if q >= 2 { 2.0 * b * laguerre(q - 2, nf + 1.0, 0.5 * b).abs() } else { 0.0 };
        if cond.abs() <= 1e-10 * scale.max(1.0) {
            modes.push(n);
        }
        robin_values.push((n, landau_robin_value(q, n, b, LaguerreSign::Operative)));
    }
    Ok(LandauMultiplicity { q, modes, robin_values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{fd_eigenvalues_extrapolated, fd_log_derivative_extrapolated};
    use proptest::prelude::*;

    fn mp(n: i64, b: f64, tau: f64) -> ModeProblem {
        ModeProblem::new(n, b, tau).unwrap()
    }

    #[test]
    fn lowest_landau_level_log_derivative() {
        let s = solve_radial(&mp(0, 1.0, 0.0), 1.0, None).unwrap();
        assert!((s.log_deriv_at_1.unwrap() + 0.5).abs() < 1e-9);
        assert!(!s.pole_flag && s.boundary_weight > 0.0);
    }

    #[test]
    fn second_landau_level_matches_closed_form() {
        let s = solve_radial(&mp(2, 1.0, 0.0), 3.0, None).unwrap();
        let exact = closed_form_log_derivative(2, 2, 1.0, 1.0);
        assert!((s.log_deriv_at_1.unwrap() - exact).abs() < 1e-8);
    }

    #[test]
    fn log_derivative_matches_fd_oracle() {
        let r_max = default_r_max(0, 1.0, 0.5);
        let s = solve_radial(&mp(0, 1.0, 0.0), 0.5, Some(r_max)).unwrap();
        let fd = fd_log_derivative_extrapolated(0, 1.0, 0.5, r_max);
        assert!((s.log_deriv_at_1.unwrap() - fd).abs() < 1e-6, "{:?} vs {fd}", s.log_deriv_at_1);
    }

    #[test]
    fn far_radius_doubling_is_stable() {
        for &(n, b, l) in &[(0, 1.0, 0.5), (3, 2.0, 1.5), (-4, 0.5, 2.2), (8, 1.0, 4.2)] {
            let m = mp(n, b, 0.0);
            let r = default_r_max(n, b, l);
            let a = solve_radial(&m, l, Some(r)).unwrap().log_deriv_at_1.unwrap();
            let c = solve_radial(&m, l, Some(2.0 * r)).unwrap().log_deriv_at_1.unwrap();
            assert!((a - c).abs() <= 1e-10 * a.abs().max(1.0), "n={n}: {a} vs {c}");
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((closed_form_landau_mode(1, 0, 2.0, 1.0) - (-0.5f64).exp()).abs() < 1e-15);
        let v = closed_form_landau_mode(2, 1, 1.0, 1.0);
        assert!((v - (-0.5 * (-0.25f64).exp() * 1.5)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_projectively_equal_to_ode() {
        let m = mp(1, 1.0, 0.0);
        let sol = solve_radial_with_grid(&m, 3.0, None).unwrap();
        let ratios: Vec<f64> = sol
            .grid_values
            .unwrap()
            .iter()
            .filter(|s| s.r <= 5.0)
            .map(|s| {
                let w = s.log_amplitude.exp() * s.prufer_angle.sin();
                closed_form_landau_mode(2, 1, 1.0, s.r) / w
            })
            .collect();
        assert!(ratios.len() > 10);
        for r in &ratios {
            assert!((r / ratios[0] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn secular_vanishes_at_first_landau_level() {
        assert!(secular(&mp(0, 1.0, -0.5), 1.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn eigenvalues_match_fd_oracle() {
        // n = 0 has no Neumann eigenvalue below b; n = 2 has one
        let mut found = 0;
        for n in [0, 2] {
            let m = mp(n, 1.0, 0.0);
            let w = SpectrumWindow::new(0.2, 0.98).unwrap();
            let ev = mode_eigenvalues(&m, &w).unwrap();
            let fd = fd_eigenvalues_extrapolated(n, 1.0, Some(0.0), default_r_max(n, 1.0, 0.98), 0.2, 0.98).unwrap();
            assert_eq!(ev.len(), fd.len());
            for (a, b) in ev.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-6, "{a} vs {b}");
                assert!(secular(&m, *a).unwrap().abs() < 1e-6);
            }
            found += ev.len();
        }
        assert!(found > 0);
    }

    #[test]
    fn dirichlet_spectrum_matches_fd_oracle() {
        let w = SpectrumWindow::new(1.02, 2.9).unwrap();
        let ev = dirichlet_mode_spectrum(0, 1.0, &w).unwrap();
        let fd = fd_eigenvalues_extrapolated(0, 1.0, None, default_r_max(0, 1.0, 2.9), 1.02, 2.9).unwrap();
        assert_eq!(ev.len(), fd.len());
        for (a, b) in ev.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn window_touching_landau_level_is_rejected() {
        let w = SpectrumWindow::new(0.5, 1.0005).unwrap();
        assert!(matches!(mode_eigenvalues(&mp(0, 1.0, 0.0), &w), Err(Error::Window { .. })));
        assert!(SpectrumWindow::new(2.0, 1.0).is_err());
    }

    #[test]
    fn empty_window_below_cluster() {
        let m = mp(0, 1.0, 0.0);
        let ev = mode_eigenvalues(&m, &SpectrumWindow::new(-3.0, 0.2).unwrap()).unwrap();
        let lowest = mode_eigenvalues(&m, &SpectrumWindow::new(-3.0, 0.99).unwrap()).unwrap();
        if let Some(&l0) = lowest.first() {
            let w = SpectrumWindow::new(l0 - 0.5, l0 - 1e-3).unwrap();
            assert!(mode_eigenvalues(&m, &w).unwrap().is_empty());
        }
        assert!(ev.iter().all(|&l| l < 0.2));
    }

    #[test]
    fn large_robin_approaches_dirichlet_from_below() {
        let w = SpectrumWindow::new(1.02, 2.9).unwrap();
        let dir = dirichlet_mode_spectrum(0, 1.0, &w).unwrap();
        assert!(!dir.is_empty());
        let mut prev = f64::NEG_INFINITY;
        for &tau in &[1e2, 1e4, 1e6] {
            let ev = mode_eigenvalues(&mp(0, 1.0, tau), &SpectrumWindow::new(1.02, dir[0] + 1e-9).unwrap()).unwrap();
            let top = *ev.last().unwrap();
            assert!(top < dir[0] && top > prev);
            prev = top;
        }
        assert!(dir[0] - prev < 1e-5);
    }

    #[test]
    fn dirichlet_interlaces_neumann() {
        let w = SpectrumWindow::new(1.02, 2.95).unwrap();
        let dir = dirichlet_mode_spectrum(2, 1.0, &w).unwrap();
        let rob = mode_eigenvalues(&mp(2, 1.0, 0.0), &w).unwrap();
        let mut all: Vec<(f64, bool)> = dir.iter().map(|&x| (x, true)).chain(rob.iter().map(|&x| (x, false))).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in all.windows(2) {
            assert_ne!(pair[0].1, pair[1].1, "two consecutive values of one kind: {all:?}");
        }
    }

    #[test]
    fn crossing_identity_for_shift() {
        let (n, b, tau, mu) = (1, 1.0, 0.3, 0.5);
        let rho = dtr_ratio(n, b, mu).unwrap();
        let t_star = rho - tau;
        let ev = mode_eigenvalues(&mp(n, b, tau + t_star), &SpectrumWindow::new(mu - 0.2, mu + 0.2).unwrap()).unwrap();
        assert!(ev.iter().any(|&l| (l - mu).abs() < 1e-9), "{ev:?}");
    }

    #[test]
    fn dtr_grows_like_minus_abs_n() {
        let ratios: Vec<f64> = [20, 30, 40, 60].iter().map(|&n| dtr_ratio(n, 1.0, 0.5).unwrap() / n as f64).collect();
        for w in ratios.windows(2) {
            assert!((w[1] + 1.0).abs() < (w[0] + 1.0).abs());
        }
        assert!((ratios[3] + 1.0).abs() < 0.05);
        let neg: Vec<f64> = [-20, -60].iter().map(|&n| dtr_ratio(n, 1.0, 0.5).unwrap() / (n as f64).abs()).collect();
        assert!((neg[1] + 1.0).abs() < 0.05);
    }

    #[test]
    fn dtr_increasing_between_poles() {
        let vals: Vec<f64> = (0..20).map(|i| dtr_ratio(0, 1.0, -2.0 + 0.14 * i as f64).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn feynman_hellmann_matches_finite_difference() {
        let w = SpectrumWindow::new(-4.0, 0.98).unwrap();
        for &(n, tau) in &[(2, 0.0), (3, 0.5), (0, -1.5)] {
            let ev = mode_eigenvalues(&mp(n, 1.0, tau), &w).unwrap();
            assert!(!ev.is_empty(), "n={n} tau={tau}");
            let lam = ev[0];
            let fh = feynman_hellmann(&mp(n, 1.0, tau), lam).unwrap();
            let h = 1e-4;
            let up = nth_eigenvalue(n, 1.0, tau + h, 0, lam).unwrap();
            let dn = nth_eigenvalue(n, 1.0, tau - h, 0, lam).unwrap();
            let fd = (up - dn) / (2.0 * h);
            assert!(fh >= 0.0);
            assert!((fh - fd).abs() < 1e-5 * fd.abs(), "n={n}: {fh} vs {fd}");
        }
        assert!(matches!(feynman_hellmann(&mp(0, 1.0, 0.0), 0.7), Err(Error::NotEigen { .. })));
    }

    #[test]
    fn feynman_hellmann_vanishes_near_dirichlet() {
        let w = SpectrumWindow::new(1.02, 2.9).unwrap();
        let ev = mode_eigenvalues(&mp(0, 1.0, 1e6), &w).unwrap();
        let fh = feynman_hellmann(&mp(0, 1.0, 1e6), ev[0]).unwrap();
        assert!(fh < 1e-9);
    }

    #[test]
    fn first_level_multiplicity_is_linear() {
        let b = 1.3;
        let tau = RobinSymbol::Table {
            values: (-6..=6).map(|n| (n, n as f64 - 0.5 * b)).collect(),
            default: Box::new(RobinSymbol::Zero),
        };
        let m = landau_multiplicity(1, b, &tau, -6, 6).unwrap();
        assert_eq!(m.modes, (-6..=6).collect::<Vec<_>>());
        for (n, t) in m.robin_values {
            assert_eq!(t, Some(n as f64 - 0.5 * b));
        }
    }

    #[test]
    fn ell_rational_matches_laguerre_ratio() {
        for q in 2..6 {
            for n in -8..12 {
                let a = ell(q, n, 0.9);
                let r = ell_rational(q, n, 0.9);
                if let (Some(a), Some(r)) = (a, r) {
                    assert!((a - r).abs() <= 1e-10 * a.abs().max(1.0), "q={q} n={n}");
                }
            }
        }
    }

    #[test]
    fn ell_decays_like_q_minus_one_over_n() {
        for q in 2..5 {
            let v: Vec<f64> = [50i64, 100, 200, 400].iter().map(|&n| ell(q, n, 1.0).unwrap() * n as f64).collect();
            assert!((v[3] - (q - 1) as f64).abs() < (v[0] - (q - 1) as f64).abs());
            assert!((v[3] - (q - 1) as f64).abs() < 0.05 * (q - 1) as f64);
        }
    }

    #[test]
    fn laguerre_sign_audit() {
        // Approach Λ_q from below with τ_n = T_n under each sign; only the
        // operative one makes the secular value vanish in the limit.
        for &(q, n) in &[(2usize, 1i64), (2, 3), (3, 2)] {
            let b = 1.0;
            let lam = landau_level(b, q);
            let op = landau_robin_value(q, n, b, LaguerreSign::Operative).unwrap();
            let fl = landau_robin_value(q, n, b, LaguerreSign::Flipped).unwrap();
            let u = dtr_ratio(n, b, lam - 1e-9).unwrap();
            assert!((u - op).abs() < 1e-6, "q={q} n={n}: u={u} op={op}");
            assert!((u - fl).abs() > 1e-2);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn prufer_angle_increases_with_lambda(n in -6i64..6, l in -3.0f64..5.0, dl in 0.01f64..0.5) {
            let r_max = default_r_max(n, 1.0, l + dl);
            let (a, sa) = angle_at(n, 1.0, l, r_max).unwrap();
            let (c, sc) = angle_at(n, 1.0, l + dl, r_max).unwrap();
            prop_assert!(c > a && sa > 0.0 && sc > 0.0);
        }

        #[test]
        fn boundary_weight_nonnegative(n in -6i64..6, l in -3.0f64..5.0, b in 0.5f64..2.0) {
            let s = solve_radial(&mp(n, b, 0.0), l, None).unwrap();
            prop_assert!(s.boundary_weight >= 0.0);
            prop_assert_eq!(s.pole_flag, s.log_deriv_at_1.is_none());
        }
    }
}
