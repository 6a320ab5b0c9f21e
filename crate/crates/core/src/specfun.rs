//! Scalar special functions on the real line: Airy `Ai`, `Ai'`, the standard
//! normal CDF and the Gumbel weight `exp(-exp(-r))`.
//!
//! Airy values on `[-10, 12]` come from local Taylor series of the Airy
//! equation `y'' = x y` around a table of anchor points spaced `0.25` apart.
//! The anchors are generated once: the negative half by stepping out of the
//! Maclaurin values at the origin, the positive half by stepping backward
//! from `x = 12` (where the asymptotic series is accurate to roundoff), which
//! is the stable direction for the recessive solution. Outside the table the
//! classical asymptotic expansions are used.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

/// `Ai(0)`.
pub const AI_0: f64 = 0.355_028_053_887_817_2;
/// `Ai'(0)`.
pub const AI_PRIME_0: f64 = -0.258_819_403_792_806_8;

const TABLE_LO: f64 = -10.0;
const TABLE_HI: f64 = 12.0;
const TABLE_STEP: f64 = 0.25;

/// Accuracy targets for scalar evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalAccuracy {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for EvalAccuracy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
        }
    }
}

impl EvalAccuracy {
    /// Returns `None` unless both tolerances are strictly positive.
    pub fn new(abs_tol: f64, rel_tol: f64) -> Option<Self> {
        (abs_tol > 0.0 && rel_tol > 0.0).then_some(Self { abs_tol, rel_tol })
    }

    /// Whether `value` is within tolerance of `reference`.
    pub fn accepts(&self, value: f64, reference: f64) -> bool {
        let err = (value - reference).abs();
        err <= self.abs_tol || err <= self.rel_tol * reference.abs()
    }
}

/// `Ai(x)`.
pub fn airy_ai(x: f64) -> f64 {
    airy_pair(x).0
}

/// `Ai'(x)`.
pub fn airy_ai_prime(x: f64) -> f64 {
    airy_pair(x).1
}

/// `(Ai(x), Ai'(x))` in one evaluation.
pub fn airy_pair(x: f64) -> (f64, f64) {
    if x > TABLE_HI {
        asymptotic_positive(x)
    } else if x < TABLE_LO {
        asymptotic_negative(-x)
    } else {
        let table = anchors();
        let j = ((x - TABLE_LO) / TABLE_STEP).round() as usize;
        let j = j.min(table.len() - 1);
        let c = TABLE_LO + j as f64 * TABLE_STEP;
        let (a, b) = table[j];
        taylor(c, a, b, x - c)
    }
}

/// Standard normal CDF.
pub fn gaussian_cdf(s: f64) -> f64 {
    0.5 * libm::erfc(-s / std::f64::consts::SQRT_2)
}

/// Gumbel weight `G(r) = exp(-exp(-r))`; underflows cleanly to 0.
pub fn gumbel_weight(r: f64) -> f64 {
    (-(-r).exp()).exp()
}

/// Generalized exponential integral `E_n(z) = ∫_1^∞ e^{-zt} t^{-n} dt` for
/// `n ≥ 1` and `Re z ≥ 0`, `z ≠ 0`.
pub fn exp_integral_e(n: u32, z: Complex64) -> Complex64 {
    let mut e = exp_integral_e1(z);
    let ez = (-z).exp();
    for k in 1..n {
        e = (ez - z * e) / k as f64;
    }
    e
}

fn exp_integral_e1(z: Complex64) -> Complex64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if z.norm() <= 2.0 {
        // E_1(z) = −γ − ln z − Σ_{k≥1} (−z)^k / (k k!)
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..60 {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.norm() < 1e-17 * sum.norm().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    } else {
        // continued fraction e^{-z} / (z + 1/(1 + 1/(z + 2/(1 + 2/(z + ...)))))
        // evaluated with modified Lentz
        let mut b = z + 1.0;
        let mut c = Complex64::new(1e300, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * an + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

fn anchors() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(build_anchors)
}

fn build_anchors() -> Vec<(f64, f64)> {
    let n = ((TABLE_HI - TABLE_LO) / TABLE_STEP).round() as usize + 1;
    let zero = (-TABLE_LO / TABLE_STEP).round() as usize;
    let mut table = vec![(0.0, 0.0); n];
    table[zero] = (AI_0, AI_PRIME_0);
    for j in (0..zero).rev() {
        let c = TABLE_LO + (j + 1) as f64 * TABLE_STEP;
        let (a, b) = table[j + 1];
        table[j] = taylor(c, a, b, -TABLE_STEP);
    }
    table[n - 1] = asymptotic_positive(TABLE_HI);
    for j in (zero + 1..n - 1).rev() {
        let c = TABLE_LO + (j + 1) as f64 * TABLE_STEP;
        let (a, b) = table[j + 1];
        table[j] = taylor(c, a, b, -TABLE_STEP);
    }
    table
}

/// Taylor series of the Airy-equation solution with `y(c) = a`, `y'(c) = b`,
/// evaluated at `c + u`. Returns `(y, y')`.
fn taylor(c: f64, a: f64, b: f64, u: f64) -> (f64, f64) {
    // coefficients: a_{n+2} (n+2)(n+1) = c a_n + a_{n-1}
    let mut prev2 = 0.0; // a_{n-1}
    let mut prev = a; // a_n
    let mut cur = b; // a_{n+1}
    let mut y = a + b * u;
    let mut dy = b;
    let mut upow = u; // u^{n+1}
    let mut small = 0;
    for n in 0..80 {
        let next = (c * prev + prev2) / ((n + 2) as f64 * (n + 1) as f64);
        let dterm = (n + 2) as f64 * next * upow;
        upow *= u;
        let term = next * upow;
        y += term;
        dy += dterm;
        if term.abs() <= 1e-18 * y.abs() && dterm.abs() <= 1e-18 * dy.abs() {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        prev2 = prev;
        prev = cur;
        cur = next;
    }
    (y, dy)
}

/// Coefficients `u_k` of the Airy asymptotic series.
fn u_coefficients() -> &'static [f64] {
    static U: OnceLock<Vec<f64>> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = vec![1.0];
        for k in 1..40 {
            let kf = k as f64;
            let prev = u[k - 1];
            u.push(
                prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                    / ((2.0 * kf - 1.0) * 216.0 * kf),
            );
        }
        u
    })
}

fn v_coefficient(k: usize, u: f64) -> f64 {
    let kf = k as f64;
    -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u
}

/// Sums `sum_k (-1)^k c_k z^{-k}` stopping at the smallest term.
fn alternating_series(coef: impl Fn(usize) -> f64, inv: f64, max: usize) -> f64 {
    let mut sum = 0.0;
    let mut p = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..max {
        let term = coef(k) * p;
        if term.abs() > last {
            break;
        }
        sum += if k % 2 == 0 { term } else { -term };
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        last = term.abs();
        p *= inv;
    }
    sum
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let u = u_coefficients();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let inv = 1.0 / zeta;
    let su = alternating_series(|k| u[k], inv, u.len());
    let sv = alternating_series(|k| v_coefficient(k, u[k]), inv, u.len());
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    (e / q * su, -e * q * sv)
}

/// Asymptotics of `Ai(-z)` and `Ai'(-z)` for large positive `z`.
fn asymptotic_negative(z: f64) -> (f64, f64) {
    let u = u_coefficients();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let inv = 1.0 / zeta;
    let inv2 = inv * inv;
    let half = u.len() / 2;
    let p_u = alternating_series(|k| u[2 * k], inv2, half);
    let q_u = inv * alternating_series(|k| u[2 * k + 1], inv2, half - 1);
    let p_v = alternating_series(|k| v_coefficient(2 * k, u[2 * k]), inv2, half);
    let q_v = inv * alternating_series(|k| v_coefficient(2 * k + 1, u[2 * k + 1]), inv2, half - 1);
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let norm = 1.0 / PI.sqrt();
    let q = z.powf(0.25);
    let ai = norm / q * (c * p_u + s * q_u);
    let aip = norm * q * (s * p_v - c * q_v);
    (ai, aip)
}
