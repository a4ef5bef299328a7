//! Spectral flow of the exterior Landau–Robin disc operator along paths of
//! Robin data, mode by mode.

use crate::disc::{self, ModeProblem, SpectrumWindow};
use crate::error::{Error, Result};
use crate::flowengine::{self, FlowOptions, HermitianPath};
use crate::symbol::RobinSymbol;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Mutex;

const ENDPOINT_TOL: f64 = 1e-10;
const LANDAU_TOL: f64 = 1e-6;
const MAX_MODES: i64 = 1 << 13;

/// How the Robin data moves with the path parameter `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RobinPath {
    /// `τ + t`
    Shift,
    /// `τ + t σ`
    Scaled { speed: RobinSymbol },
    /// `τ + t (τ₁ − τ)`
    Toward { target: RobinSymbol },
    /// `τ + δ(t)` with δ piecewise linear through the given nodes.
    Sampled { grid: Vec<f64>, offsets: Vec<RobinSymbol> },
}

impl RobinPath {
    /// Mode-wise slope when the path is linear in `t`.
    fn speed(&self, tau: &RobinSymbol, n: i64) -> Option<f64> {
        match self {
            RobinPath::Shift => Some(1.0),
            RobinPath::Scaled { speed } => Some(speed.value(n)),
            RobinPath::Toward { target } => Some(target.value(n) - tau.value(n)),
            RobinPath::Sampled { .. } => None,
        }
    }

    fn value(&self, tau: &RobinSymbol, n: i64, t: f64) -> f64 {
        match self {
            RobinPath::Sampled { grid, offsets } => {
                let k = grid.partition_point(|&g| g <= t).clamp(1, grid.len() - 1) - 1;
                let s = ((t - grid[k]) / (grid[k + 1] - grid[k])).clamp(0.0, 1.0);
                tau.value(n) + (1.0 - s) * offsets[k].value(n) + s * offsets[k + 1].value(n)
            }
            _ => tau.value(n) + t * self.speed(tau, n).unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowQuery {
    pub b: f64,
    pub tau: RobinSymbol,
    pub mu: f64,
    pub path: RobinPath,
    pub t_start: f64,
    pub gamma: f64,
    pub n_max: Option<u64>,
}

impl FlowQuery {
    /// Unit-speed shift `τ + t`, `t ∈ [0, γ]`.
    pub fn shift(b: f64, tau: RobinSymbol, mu: f64, gamma: f64) -> Self {
        FlowQuery { b, tau, mu, path: RobinPath::Shift, t_start: 0.0, gamma, n_max: None }
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.gamma
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Validation(format!("field strength b = {} must be positive", self.b)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite() && self.t_start.is_finite() && self.mu.is_finite()) {
            return Err(Error::Validation("gamma must be finite and non-negative; mu and t_start finite".into()));
        }
        self.tau.validate()?;
        let q = (self.mu / self.b + 1.0) / 2.0;
        let level = (2.0 * q.round() - 1.0) * self.b;
        if q.round() >= 1.0 && (self.mu - level).abs() < LANDAU_TOL * self.b.max(1.0) {
            return Err(Error::Landau { mu: self.mu, tol: LANDAU_TOL });
        }
        match &self.path {
            RobinPath::Scaled { speed } => speed.validate()?,
            RobinPath::Toward { target } => target.validate()?,
            RobinPath::Sampled { grid, offsets } => {
                if grid.len() < 2 || grid.len() != offsets.len() || grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Validation("sampled path needs an increasing grid with one offset per node".into()));
                }
                let span = self.gamma.max(1.0);
                if (grid[0] - self.t_start).abs() > 1e-12 * span || (grid[grid.len() - 1] - self.t_end()).abs() > 1e-12 * span {
                    return Err(Error::Validation("sampled path grid must run from t_start to t_start + gamma".into()));
                }
                for o in offsets {
                    o.validate()?;
                }
            }
            RobinPath::Shift => {}
        }
        Ok(())
    }

    fn sup_tau(&self, m: i64) -> f64 {
        let nodes: Vec<f64> = match &self.path {
            RobinPath::Sampled { grid, .. } => grid.clone(),
            _ => vec![self.t_start, self.t_end()],
        };
        (-m..=m)
            .flat_map(|n| nodes.iter().map(move |&t| (n, t)))
            .map(|(n, t)| self.path.value(&self.tau, n, t).abs())
            .fold(0.0, f64::max)
    }

    /// First guess for the mode cutoff: `ρ_n ≈ −|n|`, so modes past the
    /// largest Robin value along the path cannot cross.
    fn initial_cutoff(&self) -> i64 {
        (self.sup_tau(50) + 10.0).ceil() as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub n: i64,
    pub t_star: f64,
    pub sign: i32,
    /// Index of the mode eigenvalue (from 0) that passes μ.
    pub branch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinFlow {
    pub sf: i64,
    pub crossings: Vec<CrossingEvent>,
    pub n_max: u64,
}

/// Dirichlet-to-Robin value and the Prüfer angle at `r = 1` for mode n at μ.
fn mode_data(n: i64, b: f64, mu: f64) -> Result<(f64, f64)> {
    let mp = ModeProblem::new(n, b, 0.0)?;
    let sol = disc::solve_radial(&mp, mu, None)?;
    let rho = sol.log_deriv_at_1.ok_or(Error::Dirichlet { n, lambda: mu, distance: sol.dirichlet_distance })?;
    Ok((rho, sol.prufer_angle))
}

fn branch_index(theta: f64, rho: f64) -> usize {
    ((theta - disc::robin_angle(rho)) / PI).round().max(0.0) as usize
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= ENDPOINT_TOL * a.abs().max(b.abs()).max(1.0)
}

fn linear_crossing(q: &FlowQuery, n: i64) -> Result<Option<CrossingEvent>> {
    let (rho, theta) = mode_data(n, q.b, q.mu)?;
    let speed = q.path.speed(&q.tau, n).expect("linear path");
    let (t0, t1) = (q.t_start, q.t_end());
    let at = |t: f64| q.path.value(&q.tau, n, t);
    for t in [t0, t1] {
        if near(at(t), rho) {
            return Err(Error::Endpoint(format!("mu is an eigenvalue of mode {n} at t = {t}")));
        }
    }
    if speed == 0.0 {
        return Ok(None);
    }
    let t_star = t0 + (rho - at(t0)) / speed;
    if t_star > t0 && t_star <= t1 {
        let sign = if speed > 0.0 { 1 } else { -1 };
        Ok(Some(CrossingEvent { n, t_star, sign, branch: branch_index(theta, rho) }))
    } else {
        Ok(None)
    }
}

/// Runs `per_mode` on `|n| ≤ cutoff`, growing the cutoff until the two
/// outermost shells are quiet (or using the caller's cutoff as given).
fn sweep_modes<T: Send>(
    q: &FlowQuery,
    per_mode: impl Fn(i64) -> Result<Option<T>> + Sync,
) -> Result<(Vec<(i64, T)>, u64)> {
    let run = |lo: i64, hi: i64| -> Result<Vec<(i64, T)>> {
        let modes: Vec<i64> = (-hi..=hi).filter(|n| n.abs() >= lo).collect();
        let found: Vec<Option<(i64, T)>> =
            modes.par_iter().map(|&n| per_mode(n).map(|r| r.map(|v| (n, v)))).collect::<Result<_>>()?;
        Ok(found.into_iter().flatten().collect())
    };
    if let Some(m) = q.n_max {
        let m = m as i64;
        return Ok((run(0, m)?, m as u64));
    }
    let mut m = q.initial_cutoff().max(2);
    let mut all = run(0, m)?;
    loop {
        if all.iter().all(|(n, _)| n.abs() < m - 1) {
            all.sort_by_key(|(n, _)| *n);
            return Ok((all, m as u64));
        }
        if 2 * m > MAX_MODES {
            return Err(Error::Unresolved(format!("crossings persist at the mode cutoff {m}")));
        }
        all.extend(run(m + 1, 2 * m)?);
        m *= 2;
    }
}

/// Exact per-mode counting for paths linear in `t`: the branch through μ
/// in mode n crosses at `τ_n(t*) = ρ_n(μ)`.
pub fn flow_shift(q: &FlowQuery) -> Result<RobinFlow> {
    q.validate()?;
    if matches!(q.path, RobinPath::Sampled { .. }) {
        return Err(Error::Validation("flow_shift needs a path that is linear in t".into()));
    }
    if q.gamma == 0.0 {
        return Ok(RobinFlow { sf: 0, crossings: Vec::new(), n_max: q.n_max.unwrap_or(0) });
    }
    let (found, n_max) = sweep_modes(q, |n| linear_crossing(q, n))?;
    let mut crossings: Vec<CrossingEvent> = found.into_iter().map(|(_, c)| c).collect();
    crossings.sort_by(|a, b| a.n.cmp(&b.n).then(a.t_star.total_cmp(&b.t_star)));
    let sf = crossings.iter().map(|c| c.sign as i64).sum();
    Ok(RobinFlow { sf, crossings, n_max })
}

/// Range of `τ_n(t)` along the path; the path is piecewise linear in `t`.
fn robin_range(q: &FlowQuery, n: i64) -> (f64, f64) {
    let nodes: Vec<f64> = match &q.path {
        RobinPath::Sampled { grid, .. } => grid.clone(),
        _ => vec![q.t_start, q.t_end()],
    };
    nodes.iter().map(|&t| q.path.value(&q.tau, n, t)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn track_grid(q: &FlowQuery) -> Vec<f64> {
    match &q.path {
        RobinPath::Sampled { grid, .. } => grid.clone(),
        _ => (0..=8).map(|k| q.t_start + q.gamma * k as f64 / 8.0).collect(),
    }
}

/// Follows the branch of mode n that passes μ and hands the scalar path
/// `μ_{n,k}(t) − μ` to the generic engine.
fn tracked_mode(q: &FlowQuery, n: i64) -> Result<Option<Vec<CrossingEvent>>> {
    let (rho, theta) = mode_data(n, q.b, q.mu)?;
    for t in [q.t_start, q.t_end()] {
        if near(q.path.value(&q.tau, n, t), rho) {
            return Err(Error::Endpoint(format!("mu is an eigenvalue of mode {n} at t = {t}")));
        }
    }
    let (lo, hi) = robin_range(q, n);
    if rho < lo - ENDPOINT_TOL || rho > hi + ENDPOINT_TOL {
        return Ok(None);
    }
    let k = branch_index(theta, rho);
    let failure: std::sync::Arc<Mutex<Option<Error>>> = Default::default();
    let (b, mu, path, tau) = (q.b, q.mu, q.path.clone(), q.tau.clone());
    let sink = failure.clone();
    let track = HermitianPath::diagonal(track_grid(q), 1, move |t| {
        match disc::nth_eigenvalue(n, b, path.value(&tau, n, t), k, mu) {
            Ok(l) => vec![l],
            Err(e) => {
                sink.lock().unwrap().get_or_insert(e);
                vec![mu + 1e6]
            }
        }
    })?;
    let result = flowengine::spectral_flow_matrix_path_with(&track, mu, FlowOptions { locate_tol: 1e-10 });
    if let Some(e) = failure.lock().unwrap().take() {
        return Err(e);
    }
    let result = result?;
    let events: Vec<CrossingEvent> = result
        .crossings
        .iter()
        .flat_map(|c| std::iter::repeat_n(CrossingEvent { n, t_star: c.t, sign: c.sign, branch: k }, c.multiplicity))
        .collect();
    Ok(if events.is_empty() { None } else { Some(events) })
}

/// Branch tracking for any path: each mode whose Robin value passes
/// `ρ_n(μ)` contributes the flow of its tracked eigenvalue branch.
pub fn flow_general(q: &FlowQuery) -> Result<RobinFlow> {
    q.validate()?;
    if q.gamma == 0.0 {
        return Ok(RobinFlow { sf: 0, crossings: Vec::new(), n_max: q.n_max.unwrap_or(0) });
    }
    let (found, n_max) = sweep_modes(q, |n| tracked_mode(q, n))?;
    let mut crossings: Vec<CrossingEvent> = found.into_iter().flat_map(|(_, c)| c).collect();
    crossings.sort_by(|a, b| a.n.cmp(&b.n).then(a.t_star.total_cmp(&b.t_star)));
    let sf = crossings.iter().map(|c| c.sign as i64).sum();
    Ok(RobinFlow { sf, crossings, n_max })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylFit {
    pub gammas: Vec<f64>,
    pub flows: Vec<i64>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// Two standard errors of the slope.
    pub slope_band: f64,
    /// `2c`, the per-mode counting prediction for speed c.
    pub predicted_slope: f64,
}

/// Least-squares line through `sf(γ)` for the path `τ + c t`, `t ∈ [−γ, 0]`.
///
/// The Dirichlet-to-Robin values tend to `−|n|`, so lowering the Robin data
/// by `cγ` sweeps about `2cγ` modes past μ.
pub fn weyl_fit(b: f64, tau: &RobinSymbol, mu: f64, speed: f64, gammas: &[f64]) -> Result<WeylFit> {
    if gammas.len() < 4 || gammas.windows(2).any(|w| !(w[1] > w[0])) || gammas[0] <= 0.0 {
        return Err(Error::Validation("need at least four increasing positive gamma values".into()));
    }
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::Validation("path speed must be positive".into()));
    }
    let flows: Vec<i64> = gammas
        .iter()
        .map(|&g| {
            let q = FlowQuery {
                b,
                tau: tau.clone(),
                mu,
                path: RobinPath::Scaled { speed: RobinSymbol::constant(speed) },
                t_start: -g,
                gamma: g,
                n_max: None,
            };
            flow_shift(&q).map(|f| f.sf)
        })
        .collect::<Result<_>>()?;
    let n = gammas.len() as f64;
    let mx = gammas.iter().sum::<f64>() / n;
    let my = flows.iter().map(|&f| f as f64).sum::<f64>() / n;
    let sxx: f64 = gammas.iter().map(|g| (g - mx).powi(2)).sum();
    let sxy: f64 = gammas.iter().zip(&flows).map(|(g, &f)| (g - mx) * (f as f64 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = gammas.iter().zip(&flows).map(|(g, &f)| f as f64 - (slope * g + intercept)).collect();
    let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (n - 2.0);
    Ok(WeylFit { gammas: gammas.to_vec(), flows, slope, intercept, residuals, slope_band: 2.0 * (s2 / sxx).sqrt(), predicted_slope: 2.0 * speed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub sf: i64,
    pub all_upward: bool,
    /// A mode eigenvalue of `τ₀` found in `[μ₀, μ)`, as `(n, λ)`.
    pub seed_eigenvalue: Option<(i64, f64)>,
    /// `τ₁ − τ₀ ≥ (μ − μ₀) c²` on every mode checked.
    pub gap_condition: bool,
    /// Both conditions hold, so `sf ≥ 1` is expected.
    pub strict_expected: bool,
    pub strict_confirmed: bool,
}

/// Flow along `τ₀ + t(τ₁ − τ₀)`, `t ∈ [0, 1]`, with the strict-positivity
/// conditions checked on `|n| ≤ n_max`.
pub fn monotonicity_report(b: f64, tau0: &RobinSymbol, tau1: &RobinSymbol, mu: f64, mu0: f64, c: f64, n_max: u64) -> Result<MonotonicityReport> {
    if mu0 >= mu {
        return Err(Error::Order(format!("mu0 = {mu0} must be below mu = {mu}")));
    }
    let m = n_max as i64;
    for n in -m..=m {
        let diff = tau1.value(n) - tau0.value(n);
        if diff < 0.0 {
            return Err(Error::NotMonotone { n, diff });
        }
    }
    if tau1.order() < tau0.order() || (tau1.order() == tau0.order() && slope_of(tau1) < slope_of(tau0)) {
        return Err(Error::NotMonotone { n: 10 * m.max(1) + 1, diff: tau1.value(10 * m + 1) - tau0.value(10 * m + 1) });
    }
    let q = FlowQuery {
        b,
        tau: tau0.clone(),
        mu,
        path: RobinPath::Toward { target: tau1.clone() },
        t_start: 0.0,
        gamma: 1.0,
        n_max: Some(n_max),
    };
    let flow = flow_shift(&q)?;
    let window = SpectrumWindow::new(mu0, mu)?;
    let seed = (-m..=m)
        .find_map(|n| {
            let mp = ModeProblem::new(n, b, tau0.value(n)).ok()?;
            disc::mode_eigenvalues(&mp, &window).ok()?.into_iter().find(|&l| l >= mu0 && l < mu).map(|l| (n, l))
        });
    let gap_condition = (-m..=m).all(|n| tau1.value(n) - tau0.value(n) >= (mu - mu0) * c * c);
    let strict_expected = seed.is_some() && gap_condition;
    Ok(MonotonicityReport {
        sf: flow.sf,
        all_upward: flow.crossings.iter().all(|c| c.sign == 1),
        seed_eigenvalue: seed,
        gap_condition,
        strict_expected,
        strict_confirmed: !strict_expected || flow.sf >= 1,
    })
}

fn slope_of(s: &RobinSymbol) -> f64 {
    match s {
        RobinSymbol::Affine { a, .. } => *a,
        RobinSymbol::Table { default, .. } => slope_of(default),
        _ => 0.0,
    }
}
