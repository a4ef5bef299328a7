//! Generalized binomials, Laguerre polynomials and the upper incomplete
//! gamma integrals `g_n(v) = ∫_v^∞ e^{-ζ} ζ^n dζ`.

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use num_complex::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Degree and superscript of a generalized Laguerre polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyParam {
    pub degree: usize,
    pub alpha: f64,
}

impl PolyParam {
    pub fn eval(&self, x: f64) -> f64 {
        laguerre(self.degree, self.alpha, x)
    }
}

/// `x (x-1) ... (x-j+1) / j!`
pub fn binomial_general(x: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

pub fn binomial_complex(x: Complex64, j: usize) -> Complex64 {
    (0..j).fold(Complex64::new(1.0, 0.0), |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

/// `L^α_k(x)` by the upward three-term recurrence.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L^α_k(x)` from the explicit sum `Σ_i C(k+α, k-i) (-x)^i / i!`.
pub fn laguerre_sum(k: usize, alpha: f64, x: f64) -> f64 {
    let mut term_pow = 1.0;
    let mut s = 0.0;
    for i in 0..=k {
        if i > 0 {
            term_pow *= -x / i as f64;
        }
        s += binomial_general(k as f64 + alpha, k - i) * term_pow;
    }
    s
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// ψ(q) for a positive integer q.
pub fn digamma_int(q: usize) -> f64 {
    -EULER_GAMMA + (1..q).map(|k| 1.0 / k as f64).sum::<f64>()
}

/// Scaled integral `∫_0^∞ exp(-v e^y + (n+1) y) dy = v^{-(n+1)} g_n(v)` for
/// `n ≤ -1`, i.e. the generalized exponential integral `E_{-n}(v)`.
pub fn g_upper_scaled(n: i32, v: f64) -> Result<f64> {
    if n > -1 {
        return Err(Error::Domain(format!("scaled form needs n <= -1, got {n}")));
    }
    if !(v > 0.0) {
        return Err(Error::Domain(format!("g_{n}(v) needs v > 0, got {v}")));
    }
    let np1 = (n + 1) as f64;
    let ymax = (1.0 + 60.0 / v).ln() + 1.0;
    let r = integrate(
        |y: f64| (-v * y.exp() + np1 * y).exp(),
        0.0,
        ymax,
        QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_intervals: 2000 },
    );
    Ok(r.value)
}

/// `g_n(v) = ∫_v^∞ e^{-ζ} ζ^n dζ`.
pub fn g_upper(n: i32, v: f64) -> Result<f64> {
    if v < 0.0 || v.is_nan() {
        return Err(Error::Domain(format!("g_n(v) needs v >= 0, got {v}")));
    }
    if n >= 0 {
        // n! e^{-v} Σ_{k≤n} v^k / k!
        let mut term = 1.0;
        let mut s = 1.0;
        for k in 1..=n as usize {
            term *= v / k as f64;
            s += term;
        }
        return Ok(factorial(n as usize) * (-v).exp() * s);
    }
    if v == 0.0 {
        return Err(Error::Domain(format!("g_{n}(0) diverges")));
    }
    Ok(v.powi(n + 1) * g_upper_scaled(n, v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Exact rational Laguerre evaluation, as numerator/denominator in i128.
    fn laguerre_rational(k: i128, alpha: i128, x: (i128, i128)) -> (i128, i128) {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        fn binom(n: i128, k: i128) -> i128 {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        let (mut num, mut den) = (0i128, 1i128);
        let mut fact = 1i128;
        for i in 0..=k {
            if i > 0 {
                fact *= i;
            }
            let c = binom(k + alpha, k - i);
            let tn = c * (-x.0).pow(i as u32);
            let td = fact * x.1.pow(i as u32);
            num = num * td + tn * den;
            den *= td;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
        (num, den)
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
        }
        s * h / 3.0
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_general(5.0, 2), 10.0);
        assert_eq!(binomial_general(-7.3, 0), 1.0);
        assert!((binomial_general(-0.5, 2) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn laguerre_low_degree() {
        assert_eq!(laguerre(0, 3.0, 17.0), 1.0);
        for &(n, x) in &[(0.0, 0.3), (2.0, 1.7), (-3.0, 0.25)] {
            assert!((laguerre(1, n, x) - (n + 1.0 - x)).abs() < 1e-14);
        }
    }

    #[test]
    fn laguerre_matches_exact_rational() {
        let (p, q) = laguerre_rational(3, 0, (1, 1));
        assert!((laguerre(3, 0.0, 1.0) - p as f64 / q as f64).abs() < 1e-15);
        for k in 0..12 {
            for alpha in -4..6 {
                let (p, q) = laguerre_rational(k, alpha, (3, 4));
                let exact = p as f64 / q as f64;
                let got = laguerre(k as usize, alpha as f64, 0.75);
                assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "k={k} a={alpha}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn recurrence_stable_for_large_degree() {
        for &x in &[0.5, 2.0, 80.0, 200.0] {
            let a = laguerre(50, 0.0, x);
            let b = laguerre_sum(50, 0.0, x);
            if x <= 2.0 {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "x={x}: {a} vs {b}");
            }
            assert!(a.is_finite());
        }
    }

    #[test]
    fn g_upper_examples() {
        assert!((g_upper(0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-16);
        assert_eq!(g_upper(2, 0.0).unwrap(), 2.0);
        let oracle = simpson(|t| (-1.0 / t).exp() / t, 1e-9, 1.0, 400_000); // ζ = 1/t
        let e1 = g_upper(-1, 1.0).unwrap();
        assert!((e1 - 0.219_383_934_395_520_27).abs() < 1e-14);
        assert!((e1 - oracle).abs() < 1e-9);
        assert!(matches!(g_upper(-1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn g_upper_recurrence() {
        for n in 1..=20 {
            for &v in &[0.1, 1.0, 10.0] {
                let lhs = g_upper(n, v).unwrap();
                let rhs = v.powi(n) * (-v).exp() + n as f64 * g_upper(n - 1, v).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs(), "n={n} v={v}");
            }
        }
        for n in -8..=0 {
            for &v in &[0.1, 1.0, 10.0] {
                let lhs = g_upper(n, v).unwrap();
                let rhs = v.powi(n) * (-v).exp() + n as f64 * g_upper(n - 1, v).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs(), "n={n} v={v}");
            }
        }
    }

    #[test]
    fn laguerre_roots_are_simple() {
        // Derivative identity d/dx L^α_k = -L^{α+1}_{k-1}; a double root would
        // make both vanish together.
        for k in 1..10 {
            for &alpha in &[-0.5, 0.0, 1.0, 3.0, 7.0] {
                let f = |x: f64| laguerre(k, alpha, x);
                let mut x = 1e-3;
                let step = 1e-3;
                let mut prev = f(x);
                while x < 60.0 {
                    let xn = x + step;
                    let cur = f(xn);
                    if prev == 0.0 || prev.signum() != cur.signum() {
                        let d = laguerre(k - 1, alpha + 1.0, 0.5 * (x + xn));
                        assert!(d.abs() > 1e-10, "k={k} alpha={alpha} x={x}");
                    }
                    prev = cur;
                    x = xn;
                }
            }
        }
    }

    proptest! {
        #[test]
        fn laguerre_three_term(k in 1usize..30, alpha in -3.0f64..8.0, x in 0.0f64..20.0) {
            let kf = k as f64;
            let lhs = (kf + 1.0) * laguerre(k + 1, alpha, x);
            let rhs = (2.0 * kf + 1.0 + alpha - x) * laguerre(k, alpha, x) - (kf + alpha) * laguerre(k - 1, alpha, x);
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }

        #[test]
        fn recurrence_agrees_with_sum(k in 0usize..15, alpha in -2.0f64..6.0, x in 0.0f64..5.0) {
            let a = laguerre(k, alpha, x);
            let b = laguerre_sum(k, alpha, x);
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }

        #[test]
        fn g_upper_positive_and_decreasing(n in -6i32..6, v in 0.05f64..20.0) {
            let g1 = g_upper(n, v).unwrap();
            let g2 = g_upper(n, v * 1.1).unwrap();
            prop_assert!(g1 > 0.0 && g2 < g1);
        }
    }
}
