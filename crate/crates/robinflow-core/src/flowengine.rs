//! Spectral flow of finite hermitian matrix paths, regularized
//! determinants, finite-rank truncation of Robin data and Kato–Temple
//! certificates.

use crate::error::{Error, Result};
use crate::symbol::RobinSymbol;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const ENDPOINT_TOL: f64 = 1e-10;
/// Smallest |eigenvalue − μ| the refinement can still tell apart from a touch.
const RESOLUTION: f64 = 1e-10;
const MAX_DEPTH: usize = 40;
const FD_STEP: f64 = 1e-5;

type MatrixFn = dyn Fn(f64) -> CMatrix + Send + Sync;

/// A continuous path `t ↦ A(t)` of hermitian matrices sampled on a grid.
///
/// Between grid nodes the path is either evaluated exactly (closure paths)
/// or linearly interpolated (sampled paths).
#[derive(Clone)]
pub struct HermitianPath {
    grid: Vec<f64>,
    size: usize,
    eval: Arc<MatrixFn>,
}

impl std::fmt::Debug for HermitianPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HermitianPath").field("grid", &self.grid).field("size", &self.size).finish()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Validation("path grid must be finite and strictly increasing with at least two nodes".into()));
    }
    Ok(())
}

fn check_hermitian(m: &CMatrix, t: f64) -> Result<()> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::Validation(format!("matrix at t = {t} is not hermitian (defect {defect:e})")));
    }
    Ok(())
}

impl HermitianPath {
    /// Path given by a closure, checked for hermiticity on the grid.
    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> CMatrix + Send + Sync + 'static) -> Result<Self> {
        check_grid(&grid)?;
        let first = f(grid[0]);
        let size = first.nrows();
        if first.ncols() != size {
            return Err(Error::Validation("path matrices must be square".into()));
        }
        for &t in &grid {
            let m = f(t);
            if m.shape() != (size, size) {
                return Err(Error::Validation("path matrices change size".into()));
            }
            check_hermitian(&m, t)?;
        }
        Ok(HermitianPath { grid, size, eval: Arc::new(f) })
    }

    /// Piecewise-linear path through the given samples.
    pub fn sampled(grid: Vec<f64>, matrices: Vec<CMatrix>) -> Result<Self> {
        check_grid(&grid)?;
        if matrices.len() != grid.len() {
            return Err(Error::Validation("one matrix per grid node is required".into()));
        }
        let size = matrices[0].nrows();
        for (m, &t) in matrices.iter().zip(&grid) {
            if m.shape() != (size, size) {
                return Err(Error::Validation("path matrices change size".into()));
            }
            check_hermitian(m, t)?;
        }
        let nodes = grid.clone();
        let eval = move |t: f64| {
            let k = match nodes.partition_point(|&g| g <= t) {
                0 => 0,
                k if k >= nodes.len() => nodes.len() - 2,
                k => k - 1,
            };
            let s = ((t - nodes[k]) / (nodes[k + 1] - nodes[k])).clamp(0.0, 1.0);
            &matrices[k] * Complex64::from(1.0 - s) + &matrices[k + 1] * Complex64::from(s)
        };
        Ok(HermitianPath { grid, size, eval: Arc::new(eval) })
    }

    /// Real diagonal path `diag(f_0(t), …, f_{m-1}(t))`.
    pub fn diagonal(grid: Vec<f64>, size: usize, f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Result<Self> {
        Self::from_fn(grid, move |t| {
            let d = f(t);
            assert_eq!(d.len(), size, "diagonal path changed size");
            CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(size, d.into_iter().map(Complex64::from)))
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self, t: f64) -> CMatrix {
        (self.eval)(t)
    }

    /// Ascending eigenvalues of `A(t) − μ`.
    pub fn shifted_eigenvalues(&self, t: f64, mu: f64) -> Vec<f64> {
        let m = self.matrix(t);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().map(|x| x - mu).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// The same path restricted to `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let mut grid: Vec<f64> = vec![a];
        grid.extend(self.grid.iter().copied().filter(|&t| t > a && t < b));
        grid.push(b);
        check_grid(&grid)?;
        Ok(HermitianPath { grid, size: self.size, eval: self.eval.clone() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub multiplicity: usize,
    pub sign: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub sf: i64,
    pub crossings: Vec<Crossing>,
    pub partition: Vec<f64>,
}

impl FlowResult {
    pub fn signed_total(&self) -> i64 {
        self.crossings.iter().map(|c| c.multiplicity as i64 * c.sign as i64).sum()
    }
}

fn negatives(ev: &[f64]) -> usize {
    ev.iter().filter(|&&x| x < 0.0).count()
}

struct Piece {
    a: f64,
    b: f64,
    ea: Vec<f64>,
    em: Vec<f64>,
    eb: Vec<f64>,
}

impl Piece {
    /// Per-track value ranges, padded by the midpoint curvature.
    fn ranges(&self) -> Vec<(f64, f64)> {
        (0..self.ea.len())
            .map(|i| {
                let dev = (self.em[i] - 0.5 * (self.ea[i] + self.eb[i])).abs();
                let lo = self.ea[i].min(self.em[i]).min(self.eb[i]) - 2.0 * dev;
                let hi = self.ea[i].max(self.em[i]).max(self.eb[i]) + 2.0 * dev;
                (lo, hi)
            })
            .collect()
    }

    /// A level λ > 0 that no track reaches on the piece.
    fn barrier(&self) -> f64 {
        let r = self.ranges();
        if r[0].0 > 0.0 {
            return 0.5 * r[0].0;
        }
        for w in r.windows(2) {
            let floor = w[0].1.max(0.0);
            if w[1].0 > floor {
                return 0.5 * (floor + w[1].0);
            }
        }
        r.last().map_or(1.0, |x| x.1.max(0.0) + 1.0)
    }
}

fn count_in(ev: &[f64], lambda: f64) -> i64 {
    ev.iter().filter(|&&x| x >= 0.0 && x < lambda).count() as i64
}

/// Tuning for the crossing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Relative width at which crossing bisection stops.
    pub locate_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { locate_tol: 1e-13 }
    }
}

struct Engine<'a> {
    path: &'a HermitianPath,
    mu: f64,
    opts: FlowOptions,
}

impl Engine<'_> {
    fn eig(&self, t: f64) -> Vec<f64> {
        self.path.shifted_eigenvalues(t, self.mu)
    }

    /// Whether some track near zero is not resolved on `[a, b]`.
    fn needs_split(ea: &[f64], em: &[f64], eb: &[f64]) -> bool {
        (0..ea.len()).any(|i| {
            let dev = (em[i] - 0.5 * (ea[i] + eb[i])).abs();
            let near = ea[i].abs().min(em[i].abs()).min(eb[i].abs());
            let sa = ea[i] < 0.0;
            let sm = em[i] < 0.0;
            let sb = eb[i] < 0.0;
            // two sign changes on one track, or curvature comparable to the distance from zero
            (sa != sm && sm != sb) || near < 4.0 * dev
        })
    }

    fn refine(&self, a: f64, b: f64, ea: Vec<f64>, eb: Vec<f64>, depth: usize, out: &mut Vec<Piece>) -> Result<()> {
        let m = 0.5 * (a + b);
        let em = self.eig(m);
        if Self::needs_split(&ea, &em, &eb) {
            if depth < MAX_DEPTH {
                self.refine(a, m, ea, em.clone(), depth + 1, out)?;
                return self.refine(m, b, em, eb, depth + 1, out);
            }
            let closest = ea.iter().chain(&em).chain(&eb).map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            if closest < RESOLUTION && negatives(&ea) == negatives(&eb) {
                return Err(Error::Unresolved(format!("suspected tangential crossing near t = {m}")));
            }
        }
        out.push(Piece { a, b, ea, em, eb });
        Ok(())
    }

    fn pieces(&self) -> Result<Vec<Piece>> {
        let grid = &self.path.grid;
        let evs: Vec<Vec<f64>> = grid.par_iter().map(|&t| self.eig(t)).collect();
        for (idx, t) in [(0, grid[0]), (grid.len() - 1, grid[grid.len() - 1])] {
            if let Some(x) = evs[idx].iter().find(|x| x.abs() < ENDPOINT_TOL) {
                return Err(Error::Endpoint(format!("eigenvalue at distance {:e} from mu at t = {t}", x.abs())));
            }
        }
        let chunks: Vec<Result<Vec<Piece>>> = (0..grid.len() - 1)
            .into_par_iter()
            .map(|k| {
                let mut out = Vec::new();
                self.refine(grid[k], grid[k + 1], evs[k].clone(), evs[k + 1].clone(), 0, &mut out)?;
                Ok(out)
            })
            .collect();
        let mut all = Vec::new();
        for c in chunks {
            all.extend(c?);
        }
        Ok(all)
    }

    /// Bisect on the count of negative eigenvalues to locate crossings.
    fn locate(&self, a: f64, b: f64, na: usize, nb: usize, out: &mut Vec<Crossing>) {
        if na == nb {
            return;
        }
        if b - a <= self.opts.locate_tol * a.abs().max(b.abs()).max(1.0) {
            let t = 0.5 * (a + b);
            let delta = na as i64 - nb as i64;
            // tracks meeting zero within the bisection width form one event
            out.push(Crossing { t, multiplicity: delta.unsigned_abs() as usize, sign: delta.signum() as i32 });
            return;
        }
        let m = 0.5 * (a + b);
        let nm = negatives(&self.eig(m));
        self.locate(a, m, na, nm, out);
        self.locate(m, b, nm, nb, out);
    }
}

/// Spectral flow of `A(t) − μ` by the barrier counting formula.
pub fn spectral_flow_matrix_path(path: &HermitianPath, mu: f64) -> Result<FlowResult> {
    spectral_flow_matrix_path_with(path, mu, FlowOptions::default())
}

pub fn spectral_flow_matrix_path_with(path: &HermitianPath, mu: f64, opts: FlowOptions) -> Result<FlowResult> {
    let engine = Engine { path, mu, opts };
    let pieces = engine.pieces()?;
    let sf = pieces
        .iter()
        .map(|p| {
            let lambda = p.barrier();
            count_in(&p.eb, lambda) - count_in(&p.ea, lambda)
        })
        .sum();
    let found: Vec<Vec<Crossing>> = pieces
        .par_iter()
        .map(|p| {
            let mut out = Vec::new();
            engine.locate(p.a, p.b, negatives(&p.ea), negatives(&p.eb), &mut out);
            out
        })
        .collect();
    let mut partition: Vec<f64> = pieces.iter().map(|p| p.a).collect();
    partition.push(pieces.last().map_or(path.grid[0], |p| p.b));
    let result = FlowResult { sf, crossings: found.into_iter().flatten().collect(), partition };
    if result.signed_total() != result.sf {
        return Err(Error::Unresolved(format!(
            "crossing list sums to {} but the counting formula gives {}",
            result.signed_total(),
            result.sf
        )));
    }
    Ok(result)
}

/// `(A − μ − i)(A − μ + i)^{-1}`.
pub fn cayley_transform(a: &CMatrix, mu: f64) -> CMatrix {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let shifted = a - &id * Complex64::from(mu);
    let minus = &shifted - &id * Complex64::i();
    let plus = &shifted + &id * Complex64::i();
    let inv = plus.try_inverse().expect("A − μ + i is invertible for hermitian A");
    minus * inv
}

/// Eigenvalues of a unitary matrix via the complex Schur form.
fn unitary_eigenvalues(u: &CMatrix) -> Result<Vec<Complex64>> {
    let n = u.nrows();
    let defect = (u * u.adjoint() - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::Unresolved(format!("Cayley transform not unitary (defect {defect:e})")));
    }
    let (_, t) = u.clone().schur().unpack();
    let ev: Vec<Complex64> = t.diagonal().iter().copied().collect();
    if let Some(z) = ev.iter().find(|z| (z.norm() - 1.0).abs() > 1e-10) {
        return Err(Error::Unresolved(format!("Cayley eigenvalue {z} left the unit circle")));
    }
    Ok(ev)
}

/// Winding of the Cayley transform through −1: eigenvalues in the open upper
/// half circle correspond to negative eigenvalues of `A − μ`, and they can
/// only enter or leave it through −1.
pub fn cayley_winding(path: &HermitianPath, mu: f64) -> Result<i64> {
    // None when some eigenvalue sits at −1
    let upper = |t: f64| -> Result<Option<i64>> {
        let ev = unitary_eigenvalues(&cayley_transform(&path.matrix(t), mu))?;
        if ev.iter().any(|z| (*z + 1.0).norm() < 2.0 * ENDPOINT_TOL) {
            return Ok(None);
        }
        Ok(Some(ev.iter().filter(|z| z.im > 0.0).count() as i64))
    };
    let g = &path.grid;
    let last = g.len() - 1;
    let ups: Vec<i64> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if k == 0 || k == last {
                return upper(g[k])?.ok_or_else(|| Error::Endpoint(format!("Cayley eigenvalue at -1 at t = {}", g[k])));
            }
            // interior nodes only need to avoid −1; nudge toward a neighbour
            let room = (g[k] - g[k - 1]).min(g[k + 1] - g[k]);
            for frac in [0.0, 0.25, -0.25, 0.125, -0.125, 0.375, -0.375] {
                if let Some(n) = upper(g[k] + frac * room)? {
                    return Ok(n);
                }
            }
            Err(Error::Unresolved(format!("Cayley eigenvalue stays at -1 near t = {}", g[k])))
        })
        .collect::<Result<_>>()?;
    Ok(ups.windows(2).map(|w| w[0] - w[1]).sum())
}

/// Scalar factor `(1+λ) exp(Σ_{j<p} (−1)^j λ^j / j)` of one eigenvalue.
pub fn det_reg_factor(p: usize, lambda: Complex64) -> Complex64 {
    let mut power = Complex64::from(1.0);
    let mut log_factor = Complex64::from(0.0);
    for j in 1..p {
        power *= lambda;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        log_factor += power * (sign / j as f64);
    }
    (1.0 + lambda) * log_factor.exp()
}

/// `det(1 + R_p(A))`, `R_p(A) = (1+A) exp(Σ_{j<p} (−1)^j A^j / j) − 1`, as
/// the product of eigenvalue factors from the complex Schur form. A factor
/// vanishes exactly when `−1` is an eigenvalue.
pub fn det_reg(p: usize, a: &CMatrix) -> Result<Complex64> {
    if p == 0 {
        return Err(Error::Validation("regularization order must be at least 1".into()));
    }
    if a.is_empty() {
        return Ok(Complex64::from(1.0));
    }
    let (_, t) = a.clone().schur().unpack();
    Ok(t.diagonal().iter().map(|&l| det_reg_factor(p, l)).product())
}

fn min_singular_value(m: &CMatrix) -> f64 {
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `d/dα det_p(1 + A(α)) = (−1)^{p−1} tr(A′ A^{p−1} (1+A)^{−1}) det_p(1 + A)`.
///
/// `da` overrides the centered difference for `A′`.
pub fn det_reg_derivative(p: usize, family: &dyn Fn(f64) -> CMatrix, alpha: f64, da: Option<&CMatrix>) -> Result<Complex64> {
    let a = family(alpha);
    let n = a.nrows();
    let one_plus = CMatrix::identity(n, n) + &a;
    let smin = min_singular_value(&one_plus);
    let scale = one_plus.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if smin < 1e-12 * scale {
        return Err(Error::Singular(smin));
    }
    let deriv = match da {
        Some(d) => d.clone(),
        None => (family(alpha + FD_STEP) - family(alpha - FD_STEP)) / Complex64::from(2.0 * FD_STEP),
    };
    let inv = one_plus.try_inverse().ok_or(Error::Singular(smin))?;
    let mut power = CMatrix::identity(n, n);
    for _ in 1..p {
        power = &power * &a;
    }
    let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
    Ok((deriv * power * inv).trace() * sign * det_reg(p, &a)?)
}

/// Slope `μ′(t) = −∂_t F / ∂_μ F` of the zero set of `F(t, μ) = det_p(1 + A(t, μ))`.
///
/// On the branch both partials carry the vanishing determinant, so the
/// ratio of trace factors is taken at `t + ε` and extrapolated to ε = 0.
pub fn implicit_branch_slope(p: usize, family: &(dyn Fn(f64, f64) -> CMatrix + Sync), t: f64, mu: f64) -> Result<f64> {
    let f0 = det_reg(p, &family(t, mu))?;
    if f0.norm() > 1e-8 {
        return Err(Error::NotOnBranch(f0.norm()));
    }
    let ratio = |eps: f64| -> Result<Complex64> {
        let tt = t + eps;
        let a = family(tt, mu);
        let n = a.nrows();
        let inv = (CMatrix::identity(n, n) + &a).try_inverse().ok_or(Error::Singular(0.0))?;
        let mut x = CMatrix::identity(n, n);
        for _ in 1..p {
            x = &x * &a;
        }
        let x = x * inv;
        let h = FD_STEP;
        let dt = (family(tt + h, mu) - family(tt - h, mu)) / Complex64::from(2.0 * h);
        let dmu = (family(tt, mu + h) - family(tt, mu - h)) / Complex64::from(2.0 * h);
        Ok(-(dt * &x).trace() / (dmu * &x).trace())
    };
    let r: Vec<Complex64> = [1e-3, 5e-4, 2.5e-4].par_iter().map(|&e| ratio(e)).collect::<Result<_>>()?;
    Ok(((r[2] * 8.0 - r[1] * 6.0 + r[0]) / 3.0).re)
}

/// Position of mode `n` in the ordering 0, 1, −1, 2, −2, …
pub fn fourier_position(n: i64) -> usize {
    if n > 0 { (2 * n - 1) as usize } else { (-2 * n) as usize }
}

/// Mode at a position of the ordering 0, 1, −1, 2, −2, …
pub fn fourier_mode(k: usize) -> i64 {
    if k % 2 == 1 { k.div_ceil(2) as i64 } else { -((k / 2) as i64) }
}

/// A Robin operator on the circle in the Fourier basis.
#[derive(Debug, Clone, PartialEq)]
pub enum FourierOperator {
    Symbol(RobinSymbol),
    Matrix(DMatrix<f64>),
}

/// `T_(N)(τ)`: keeps the block of modes with `|n| ≤ N`.
///
/// Symbols give the `(2N+1)`-square diagonal; matrices keep their size with
/// the other entries zeroed.
pub fn truncate_finite_rank(op: &FourierOperator, n_cut: usize) -> DMatrix<f64> {
    let keep = 2 * n_cut + 1;
    match op {
        FourierOperator::Symbol(s) => DMatrix::from_fn(keep, keep, |i, j| if i == j { s.value(fourier_mode(i)) } else { 0.0 }),
        FourierOperator::Matrix(m) => DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i < keep && j < keep { m[(i, j)] } else { 0.0 }),
    }
}

fn weight(k: usize, s: f64) -> f64 {
    let n = fourier_mode(k) as f64;
    (1.0 + n * n).powf(0.5 * s)
}

/// `‖τ − T‖` from `H^{3/2}` to `H^{1/2}`: largest singular value of
/// `W_{1/2} (τ − T) W_{−3/2}`.
pub fn sobolev_norm_gap_matrix(tau: &DMatrix<f64>, truncated: &DMatrix<f64>) -> f64 {
    let mut d = tau.clone();
    for i in 0..d.nrows() {
        for j in 0..d.ncols() {
            let t = if i < truncated.nrows() && j < truncated.ncols() { truncated[(i, j)] } else { 0.0 };
            d[(i, j)] = weight(i, 0.5) * (d[(i, j)] - t) * weight(j, -1.5);
        }
    }
    d.singular_values().iter().copied().fold(0.0, f64::max)
}

/// `sup_{|n|>N} (1+n²)^{−1/2} |τ_n|` for a diagonal sequence of growth order ≤ 1.
///
/// `limit` is the value of the weighted sequence at infinity; the scan covers
/// `N < |n| ≤ 2N + 2000`.
pub fn sobolev_norm_gap_sequence(tau: impl Fn(i64) -> f64, n_cut: usize, limit: f64) -> f64 {
    let lo = n_cut as i64 + 1;
    let hi = 2 * n_cut as i64 + 2000;
    (lo..=hi)
        .flat_map(|n| [n, -n])
        .map(|n| tau(n).abs() / (1.0 + (n * n) as f64).sqrt())
        .fold(limit.abs(), f64::max)
}

pub fn sobolev_norm_gap(tau: &RobinSymbol, n_cut: usize) -> f64 {
    let limit = match tau {
        RobinSymbol::Affine { a, .. } => a.abs(),
        RobinSymbol::Table { default, .. } => match default.as_ref() {
            RobinSymbol::Affine { a, .. } => a.abs(),
            _ => 0.0,
        },
        _ => 0.0,
    };
    sobolev_norm_gap_sequence(|n| tau.value(n), n_cut, limit)
}

/// Kato–Temple: with `‖(A − η)v‖ ≤ ε` for a unit `v`, `ε² < (μ − η)(η − μ₀)`
/// forces an eigenvalue into `(μ₀, μ)`.
pub fn kato_temple_certificate(eta: f64, eps: f64, mu0: f64, mu: f64) -> Result<bool> {
    if mu0 >= mu {
        return Err(Error::Order(format!("mu0 = {mu0} must be below mu = {mu}")));
    }
    if !(eta > mu0 && eta < mu) {
        return Ok(false);
    }
    Ok(eps * eps < (mu - eta) * (eta - mu0))
}

/// Rayleigh quotient and residual norm of `v` for a real symmetric matrix.
pub fn rayleigh_residual(a: &DMatrix<f64>, v: &nalgebra::DVector<f64>) -> (f64, f64) {
    let v = v.normalize();
    let av = a * &v;
    let eta = v.dot(&av);
    (eta, (av - &v * eta).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn affine_diag(slopes: Vec<f64>, offsets: Vec<f64>) -> HermitianPath {
        let m = slopes.len();
        HermitianPath::diagonal(vec![0.0, 0.25, 0.5, 0.75, 1.0], m, move |t| {
            slopes.iter().zip(&offsets).map(|(s, o)| s * t + o).collect()
        })
        .unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale);
        (&m + m.adjoint()) * Complex64::from(0.5)
    }

    #[test]
    fn constant_path_has_no_flow() {
        let p = affine_diag(vec![0.0, 0.0], vec![-1.0, 2.0]);
        let r = spectral_flow_matrix_path(&p, 0.0).unwrap();
        assert_eq!(r.sf, 0);
        assert!(r.crossings.is_empty());
    }

    #[test]
    fn opposite_crossings_cancel() {
        let p = affine_diag(vec![1.0, -1.0], vec![-0.3, 0.7]);
        let r = spectral_flow_matrix_path(&p, 0.0).unwrap();
        assert_eq!(r.sf, 0);
        assert_eq!(r.crossings.len(), 2);
        assert!((r.crossings[0].t - 0.3).abs() < 1e-10 && r.crossings[0].sign == 1);
        assert!((r.crossings[1].t - 0.7).abs() < 1e-10 && r.crossings[1].sign == -1);
        assert_eq!(cayley_winding(&p, 0.0).unwrap(), 0);
    }

    #[test]
    fn three_upward_crossings() {
        let p = affine_diag(vec![1.0; 3], vec![-0.1, -0.5, -0.9]);
        assert_eq!(spectral_flow_matrix_path(&p, 0.0).unwrap().sf, 3);
        assert_eq!(cayley_winding(&p, 0.0).unwrap(), 3);
    }

    #[test]
    fn simultaneous_crossing_has_multiplicity() {
        let p = affine_diag(vec![1.0, 2.0], vec![-0.5, -1.0]);
        let r = spectral_flow_matrix_path(&p, 0.0).unwrap();
        assert_eq!(r.sf, 2);
        assert_eq!(r.crossings.len(), 1);
        assert_eq!(r.crossings[0].multiplicity, 2);
    }

    #[test]
    fn endpoint_eigenvalue_is_rejected() {
        let p = affine_diag(vec![1.0], vec![0.0]);
        assert!(matches!(spectral_flow_matrix_path(&p, 0.0), Err(Error::Endpoint(_))));
    }

    #[test]
    fn touches_count_zero_and_exact_touch_is_unresolved() {
        let near = HermitianPath::diagonal(vec![0.0, 1.0], 1, |t| vec![(t - 0.5).powi(2) + 1e-4]).unwrap();
        let r = spectral_flow_matrix_path(&near, 0.0).unwrap();
        assert_eq!(r.sf, 0);
        assert!(r.crossings.is_empty());
        let exact = HermitianPath::diagonal(vec![0.0, 1.0], 1, |t| vec![(t - 0.5).powi(2)]).unwrap();
        assert!(matches!(spectral_flow_matrix_path(&exact, 0.0), Err(Error::Unresolved(_))));
    }

    #[test]
    fn nonlinear_double_crossing_is_found() {
        // dips below zero on (0.45, 0.55)
        let p = HermitianPath::diagonal(vec![0.0, 1.0], 1, |t| vec![(t - 0.5).powi(2) - 0.0025]).unwrap();
        let r = spectral_flow_matrix_path(&p, 0.0).unwrap();
        assert_eq!(r.sf, 0);
        assert_eq!(r.crossings.len(), 2);
        assert!((r.crossings[0].t - 0.45).abs() < 1e-10 && r.crossings[0].sign == -1);
    }

    #[test]
    fn rotated_path_matches_winding() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a0 = random_hermitian(&mut rng, 5, 1.0);
        let a1 = random_hermitian(&mut rng, 5, 1.0);
        let p = HermitianPath::from_fn((0..=8).map(|k| k as f64 / 8.0).collect(), move |t| &a0 + &a1 * Complex64::from(3.0 * t)).unwrap();
        let r = spectral_flow_matrix_path(&p, 0.1).unwrap();
        assert_eq!(r.sf, cayley_winding(&p, 0.1).unwrap());
        let start = p.shifted_eigenvalues(0.0, 0.1);
        let end = p.shifted_eigenvalues(1.0, 0.1);
        assert_eq!(r.sf, negatives(&start) as i64 - negatives(&end) as i64);
    }

    #[test]
    fn sampled_path_interpolates() {
        let m = |x: f64| CMatrix::from_diagonal_element(1, 1, Complex64::from(x));
        let p = HermitianPath::sampled(vec![0.0, 1.0, 2.0], vec![m(-1.0), m(1.0), m(-1.0)]).unwrap();
        assert!((p.matrix(0.25)[(0, 0)].re + 0.5).abs() < 1e-15);
        let r = spectral_flow_matrix_path(&p, 0.0).unwrap();
        assert_eq!(r.crossings.len(), 2);
        assert_eq!(r.sf, 0);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let bad = CMatrix::from_row_slice(2, 2, &[Complex64::from(1.0), Complex64::from(2.0), Complex64::from(0.0), Complex64::from(1.0)]);
        assert!(HermitianPath::sampled(vec![0.0, 1.0], vec![bad.clone(), bad]).is_err());
    }

    #[test]
    fn det_reg_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(&mut rng, 6, 0.5);
        let zero = CMatrix::zeros(6, 6);
        for p in 1..5 {
            assert!((det_reg(p, &zero).unwrap() - 1.0).norm() < 1e-15);
        }
        let direct = (CMatrix::identity(6, 6) + &a).determinant() * (-a.trace()).exp();
        let d2 = det_reg(2, &a).unwrap();
        assert!((d2 - direct).norm() < 1e-12 * direct.norm());
        // −1 in the spectrum forces a zero
        let ev = a.symmetric_eigenvalues();
        let shift = -1.0 - ev[0];
        let b = &a + CMatrix::identity(6, 6) * Complex64::from(shift);
        for p in 1..5 {
            assert!(det_reg(p, &b).unwrap().norm() < 1e-10 * others(p, &ev.as_slice()[1..], shift));
        }
    }

    #[test]
    fn det_derivative_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a0 = random_hermitian(&mut rng, 6, 0.4);
        let a1 = random_hermitian(&mut rng, 6, 0.4);
        let fam = move |x: f64| &a0 + &a1 * Complex64::from(x);
        for p in 1..5 {
            let exact = det_reg_derivative(p, &fam, 0.3, None).unwrap();
            let h = 1e-4;
            let fd = (det_reg(p, &fam(0.3 + h)).unwrap() - det_reg(p, &fam(0.3 - h)).unwrap()) / (2.0 * h);
            assert!((exact - fd).norm() < 1e-6 * fd.norm().max(1e-3), "p={p}: {exact} vs {fd}");
        }
        // p = 1 is Jacobi's formula
        let a = fam(0.3);
        let one = CMatrix::identity(6, 6) + &a;
        let jacobi = (a1_of(&fam) * one.clone().try_inverse().unwrap()).trace() * one.determinant();
        assert!((det_reg_derivative(1, &fam, 0.3, None).unwrap() - jacobi).norm() < 1e-8 * jacobi.norm());
        let still = |_: f64| a.clone();
        assert_eq!(det_reg_derivative(3, &still, 0.0, None).unwrap(), Complex64::from(0.0));
    }

    /// Size of the determinant without the factor that vanishes.
    fn others(p: usize, rest: &[f64], shift: f64) -> f64 {
        rest.iter().map(|&l| det_reg_factor(p, Complex64::from(l + shift)).norm()).product()
    }

    fn a1_of(fam: &dyn Fn(f64) -> CMatrix) -> CMatrix {
        fam(1.0) - fam(0.0)
    }

    #[test]
    fn singular_derivative_is_reported() {
        let fam = |x: f64| CMatrix::from_diagonal_element(2, 2, Complex64::from(x - 1.0));
        assert!(matches!(det_reg_derivative(2, &fam, 0.0, None), Err(Error::Singular(_))));
    }

    #[test]
    fn affine_branch_slope() {
        // det(1 + A) = t − μ
        let fam = |t: f64, mu: f64| CMatrix::from_diagonal_element(1, 1, Complex64::from(t - mu - 1.0));
        assert!((implicit_branch_slope(1, &fam, 0.4, 0.4).unwrap() - 1.0).abs() < 1e-8);
        assert!(matches!(implicit_branch_slope(1, &fam, 0.4, 0.5), Err(Error::NotOnBranch(_))));
        // a curved branch μ = t² inside a 2×2 block, p = 2
        let fam2 = |t: f64, mu: f64| CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::from(t * t - mu - 1.0), Complex64::from(0.3)]));
        assert!((implicit_branch_slope(2, &fam2, 0.7, 0.49).unwrap() - 1.4).abs() < 1e-6);
    }

    #[test]
    fn fourier_ordering() {
        let modes: Vec<i64> = (0..7).map(fourier_mode).collect();
        assert_eq!(modes, vec![0, 1, -1, 2, -2, 3, -3]);
        for n in -20..=20 {
            assert_eq!(fourier_mode(fourier_position(n)), n);
        }
    }

    #[test]
    fn truncation_is_a_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(9, 9, |_, _| rng.random_range(-1.0..1.0));
        let m = (&m + m.transpose()) * 0.5;
        let once = truncate_finite_rank(&FourierOperator::Matrix(m), 2);
        let twice = truncate_finite_rank(&FourierOperator::Matrix(once.clone()), 2);
        assert_eq!(once, twice);
        assert!(once.view((5, 0), (4, 9)).iter().all(|&x| x == 0.0));
        let sym = RobinSymbol::Affine { a: 1.0, c: 0.5 };
        let t = truncate_finite_rank(&FourierOperator::Symbol(sym.clone()), 3);
        assert_eq!(t.nrows(), 7);
        for k in 0..7 {
            assert_eq!(t[(k, k)], sym.value(fourier_mode(k)));
        }
    }

    #[test]
    fn gap_closed_form_and_matrix_agree() {
        let one = RobinSymbol::constant(1.0);
        for n in [0usize, 3, 10, 40] {
            let expected = 1.0 / (1.0 + ((n + 1) * (n + 1)) as f64).sqrt();
            assert_eq!(sobolev_norm_gap(&one, n), expected);
        }
        let full = truncate_finite_rank(&FourierOperator::Symbol(one.clone()), 30);
        let cut = truncate_finite_rank(&FourierOperator::Matrix(full.clone()), 5);
        assert!((sobolev_norm_gap_matrix(&full, &cut) - sobolev_norm_gap(&one, 5)).abs() < 1e-14);
    }

    #[test]
    fn gap_decay_rates() {
        for t in [0.0f64, 0.5] {
            let f = move |n: i64| (1.0 + n.unsigned_abs() as f64).powf(t);
            let (n1, n2) = (50usize, 400usize);
            let slope = (sobolev_norm_gap_sequence(f, n2, 0.0) / sobolev_norm_gap_sequence(f, n1, 0.0)).ln() / (n2 as f64 / n1 as f64).ln();
            assert!((slope + (1.0 - t)).abs() < 0.1, "t={t}: {slope}");
        }
    }

    #[test]
    fn kato_temple_arithmetic() {
        assert!(kato_temple_certificate(1.5, 0.1, 1.0, 2.0).unwrap());
        assert!(!kato_temple_certificate(1.5, 0.6, 1.0, 2.0).unwrap());
        assert!(matches!(kato_temple_certificate(1.5, 0.1, 2.0, 2.0), Err(Error::Order(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn flow_equals_winding_on_affine_paths(
            slopes in proptest::collection::vec(-3.0f64..3.0, 1..6),
            offsets in proptest::collection::vec(-2.0f64..2.0, 6),
            mu in -1.0f64..1.0,
        ) {
            let m = slopes.len();
            let p = affine_diag(slopes, offsets[..m].to_vec());
            let (a, b) = (p.shifted_eigenvalues(0.0, mu), p.shifted_eigenvalues(1.0, mu));
            prop_assume!(a.iter().chain(&b).all(|x| x.abs() > 1e-6));
            let r = spectral_flow_matrix_path(&p, mu).unwrap();
            prop_assert_eq!(r.sf, cayley_winding(&p, mu).unwrap());
            prop_assert_eq!(r.sf, r.signed_total());
        }

        #[test]
        fn flow_is_additive(seed in 0u64..1000, split in 0.2f64..0.8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a0 = random_hermitian(&mut rng, 4, 1.0);
            let a1 = random_hermitian(&mut rng, 4, 2.0);
            let p = HermitianPath::from_fn(vec![0.0, 0.5, 1.0], move |t| &a0 + &a1 * Complex64::from(t)).unwrap();
            let mid = p.shifted_eigenvalues(split, 0.0);
            let ends = [p.shifted_eigenvalues(0.0, 0.0), p.shifted_eigenvalues(1.0, 0.0)];
            prop_assume!(mid.iter().chain(ends.iter().flatten()).all(|x| x.abs() > 1e-6));
            let whole = spectral_flow_matrix_path(&p, 0.0).unwrap().sf;
            let left = spectral_flow_matrix_path(&p.restrict(0.0, split).unwrap(), 0.0).unwrap().sf;
            let right = spectral_flow_matrix_path(&p.restrict(split, 1.0).unwrap(), 0.0).unwrap().sf;
            prop_assert_eq!(whole, left + right);
        }

        #[test]
        fn det_reg_zero_iff_minus_one_eigenvalue(seed in 0u64..1000, p in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(&mut rng, 5, 0.8);
            let ev = a.symmetric_eigenvalues();
            let gap = ev.iter().map(|x| (x + 1.0).abs()).fold(f64::INFINITY, f64::min);
            let d = det_reg(p, &a).unwrap().norm();
            prop_assume!(gap > 1e-3);
            prop_assert!(d > 1e-10);
            let b = &a + CMatrix::identity(5, 5) * Complex64::from(-1.0 - ev[0]);
            prop_assert!(det_reg(p, &b).unwrap().norm() < 1e-10 * others(p, &ev.as_slice()[1..], -1.0 - ev[0]));
        }

        #[test]
        fn gap_is_monotone(c in 0.1f64..5.0, a in 0.0f64..2.0, n in 0usize..200) {
            let s = RobinSymbol::Affine { a, c };
            prop_assert!(sobolev_norm_gap(&s, n + 1) <= sobolev_norm_gap(&s, n) + 1e-15);
        }

        #[test]
        fn kato_temple_is_sound(seed in 0u64..500, noise in 1e-4f64..0.3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = DMatrix::from_fn(8, 8, |_, _| rng.random_range(-1.0..1.0));
            let m = (&m + m.transpose()) * 0.5;
            let eig = m.clone().symmetric_eigen();
            let k = rng.random_range(0..8);
            let v = eig.eigenvectors.column(k).into_owned() + nalgebra::DVector::from_fn(8, |_, _| rng.random_range(-noise..noise));
            let (eta, eps) = rayleigh_residual(&m, &v);
            let (mu0, mu) = (eta - 0.4, eta + 0.4);
            if kato_temple_certificate(eta, eps, mu0, mu).unwrap() {
                prop_assert!(eig.eigenvalues.iter().any(|&x| x > mu0 && x < mu));
            }
        }
    }
}
