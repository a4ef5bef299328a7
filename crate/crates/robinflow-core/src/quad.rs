//! Adaptive Gauss–Kronrod quadrature and a Dormand–Prince integrator.
//!
//! Both are generic over the value type so the same code serves real and
//! complex integrands.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_259,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

fn gk21<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for i in 0..10 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + s * WG[i / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive GK21 on `[a, b]` with extra initial breakpoints.
pub fn integrate_with_breaks<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult<T> {
    let mut pieces: Vec<(f64, f64, T, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk21(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total = pieces.iter().fold(T::zero(), |acc, p| acc + p.2);
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if err <= target {
            return QuadResult { value: total, error: err, converged: true };
        }
        if pieces.len() >= opts.max_intervals {
            return QuadResult { value: total, error: err, converged: false };
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (a, b, _, _) = pieces[worst];
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return QuadResult { value: total, error: err, converged: false };
        }
        let (v1, e1) = gk21(&mut f, a, m);
        let (v2, e2) = gk21(&mut f, m, b);
        pieces[worst] = (a, m, v1, e1);
        pieces.push((m, b, v2, e2));
    }
}

pub fn integrate<T: QuadValue>(f: impl FnMut(f64) -> T, a: f64, b: f64, opts: QuadOptions) -> QuadResult<T> {
    integrate_with_breaks(f, &[a, b], opts)
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4) with a fixed-size state

const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<const N: usize> {
    pub abs_tol: [f64; N],
    pub rel_tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

/// Outcome of an ODE run: final state, the accepted mesh, or the position
/// where step control gave up.
pub struct OdeRun<const N: usize> {
    pub y: [f64; N],
    pub steps: usize,
    pub samples: Vec<(f64, [f64; N])>,
}

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction).
/// `keep_samples` records every accepted step.
pub fn dopri5<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    x1: f64,
    y0: [f64; N],
    opts: &OdeOptions<N>,
    keep_samples: bool,
) -> Result<OdeRun<N>, f64> {
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let span = (x1 - x0).abs();
    let mut h = opts.initial_step.min(span).max(span * 1e-12);
    let mut x = x0;
    let mut y = y0;
    let mut k = [[0.0; N]; 7];
    k[0] = f(x, &y);
    let mut samples = Vec::new();
    if keep_samples {
        samples.push((x, y));
    }
    let mut steps = 0;
    while (x1 - x) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(x);
        }
        let remaining = (x1 - x).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = DP_A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += dir * h * a * kj[i];
                    }
                }
            }
            k[s] = f(x + dir * h * DP_C[s], &ys);
        }
        let mut ynew = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut incr = 0.0;
            let mut e = 0.0;
            for s in 0..7 {
                incr += DP_B[s] * k[s][i];
                e += DP_E[s] * k[s][i];
            }
            ynew[i] = y[i] + dir * h * incr;
            let sc = opts.abs_tol[i] + opts.rel_tol * y[i].abs().max(ynew[i].abs());
            err = err.max((h * e).abs() / sc);
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < span * 1e-16 {
                return Err(x);
            }
            continue;
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + dir * h };
            y = ynew;
            k[0] = k[6];
            steps += 1;
            if keep_samples {
                samples.push((x, y));
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < span * 1e-16 {
            return Err(x);
        }
    }
    Ok(OdeRun { y, steps, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(7) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default());
        assert!((r.value - (255.0 / 8.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn matches_simpson_on_oscillatory_integrand() {
        let f = |x: f64| (10.0 * x).sin() * (-x).exp();
        let r = integrate(f, 0.0, 3.0, QuadOptions::default());
        let s = composite_simpson(f, 0.0, 3.0, 200_000);
        assert!((r.value - s).abs() < 1e-11, "{} vs {}", r.value, s);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, QuadOptions::default());
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 4000 });
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn dopri_exponential_both_directions() {
        let opts = OdeOptions { abs_tol: [1e-13], rel_tol: 1e-12, max_steps: 100_000, initial_step: 1e-3 };
        let fwd = dopri5(|_, y: &[f64; 1]| [y[0]], 0.0, 2.0, [1.0], &opts, false).unwrap();
        assert!((fwd.y[0] - 2f64.exp()).abs() < 1e-10);
        let back = dopri5(|_, y: &[f64; 1]| [-y[0]], 2.0, 0.0, [1.0], &opts, false).unwrap();
        assert!((back.y[0] - 2f64.exp()).abs() < 1e-10);
    }
}
