//! Kernels entering the three determinant formulas for `F_T`: σ-profiles,
//! the Airy kernel, the crossover Airy kernel `K_σ`, its symmetrized
//! full-line form, the Gumbel kernel `K_{σ_T}` (principal value and smooth +
//! Hilbert decompositions) and the cosecant kernel on vertical contours.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{
    breaks_from, composite, oscillatory_g, pv_rule_graded, ContourRule, QuadratureRule,
};
use crate::specfun::{airy_pair, exp_integral_e};

/// Real part of the η-contour: `Γ_η = c₃/2 + iℝ`, `Γ_ζ = −c₃/2 + iℝ`.
pub const C3: f64 = 0.793_700_525_984_099_7 / 2.0; // 2^{-4/3}

const CBRT2: f64 = 1.259_921_049_894_873_2;

/// `κ_T = 2^{-1/3} T^{1/3}`.
pub fn kappa(t: f64) -> f64 {
    (0.5 * t).cbrt()
}

/// `a = s − log √(2πT)`.
pub fn shift_a(t: f64, s: f64) -> f64 {
    s - 0.5 * (2.0 * PI * t).ln()
}

/// Parameters `(T, s, μ̃)` of a crossover kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverParams {
    pub t: f64,
    pub s: f64,
    pub mu: Complex64,
}

impl CrossoverParams {
    pub fn new(t: f64, s: f64, mu: Complex64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("T must be positive and finite, got {t}")));
        }
        if !s.is_finite() || !mu.re.is_finite() || !mu.im.is_finite() {
            return Err(invalid("s and mu must be finite"));
        }
        if mu.im == 0.0 && mu.re >= 0.0 {
            return Err(Error::SigmaPole(mu.re));
        }
        Ok(Self { t, s, mu })
    }

    pub fn kappa(&self) -> f64 {
        kappa(self.t)
    }

    pub fn a(&self) -> f64 {
        shift_a(self.t, self.s)
    }

    /// Left end `a / κ_T` of the half-line in the Airy formula.
    pub fn s_prime(&self) -> f64 {
        self.a() / self.kappa()
    }

    pub fn profile(&self) -> SigmaProfile {
        SigmaProfile::Crossover {
            kappa: self.kappa(),
            mu: self.mu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    Smooth,
    PrincipalValueAtZero,
    StepAtZero,
}

/// Weight functions `σ(t)` going from 0 at `−∞` to 1 at `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaProfile {
    /// `σ_{T,μ̃}(t) = μ̃ / (μ̃ − e^{−κt})`.
    Crossover { kappa: f64, mu: Complex64 },
    /// `σ_T(t) = 1 / (1 − e^{−κt})`, integrated as a principal value.
    PrincipalValue { kappa: f64 },
    /// `σ̃_T(t) = σ_T(t) − 1/(κt)`.
    Smoothed { kappa: f64 },
    /// `1_{[0,∞)}`.
    Step,
}

impl SigmaProfile {
    /// Crossover profile; fails for `μ̃ ∈ [0, ∞)` where `σ` has a real pole.
    pub fn crossover(kappa: f64, mu: Complex64) -> Result<Self> {
        if mu.im == 0.0 && mu.re >= 0.0 {
            let t0 = if mu.re > 0.0 { -mu.re.ln() / kappa } else { f64::INFINITY };
            return Err(Error::SigmaPole(t0));
        }
        Ok(SigmaProfile::Crossover { kappa, mu })
    }

    pub fn kind(&self) -> SigmaKind {
        match self {
            SigmaProfile::Crossover { .. } | SigmaProfile::Smoothed { .. } => SigmaKind::Smooth,
            SigmaProfile::PrincipalValue { .. } => SigmaKind::PrincipalValueAtZero,
            SigmaProfile::Step => SigmaKind::StepAtZero,
        }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        match *self {
            SigmaProfile::Crossover { kappa, mu } => crossover_sigma(kappa, mu, t).0,
            SigmaProfile::PrincipalValue { kappa } => Complex64::new(sigma_t(kappa, t), 0.0),
            SigmaProfile::Smoothed { kappa } => Complex64::new(sigma_tilde(kappa, t), 0.0),
            SigmaProfile::Step => Complex64::new(
                if t > 0.0 {
                    1.0
                } else if t == 0.0 {
                    0.5
                } else {
                    0.0
                },
                0.0,
            ),
        }
    }

    /// `σ'(t)`; zero for the step profile away from 0 (its derivative is a
    /// point mass).
    pub fn derivative(&self, t: f64) -> Complex64 {
        match *self {
            SigmaProfile::Crossover { kappa, mu } => crossover_sigma(kappa, mu, t).1,
            SigmaProfile::PrincipalValue { kappa } => {
                Complex64::new(sigma_t_derivative(kappa, t), 0.0)
            }
            SigmaProfile::Smoothed { kappa } => {
                let u = kappa * t;
                let d = if u.abs() < 0.1 {
                    let u2 = u * u;
                    kappa * (1.0 / 12.0 - u2 / 240.0 + u2 * u2 / 6048.0 - u2 * u2 * u2 / 172800.0)
                } else {
                    sigma_t_derivative(kappa, t) + 1.0 / (kappa * t * t)
                };
                Complex64::new(d, 0.0)
            }
            SigmaProfile::Step => Complex64::new(0.0, 0.0),
        }
    }
}

/// `(σ, σ')` for `σ = μ/(μ − e^{−κt})`, written in terms of `e^{κt}` when
/// `t < 0` so that nothing overflows.
fn crossover_sigma(kappa: f64, mu: Complex64, t: f64) -> (Complex64, Complex64) {
    let u = kappa * t;
    if u >= 0.0 {
        let e = (-u).exp();
        let den = mu - e;
        (mu / den, -kappa * mu * e / (den * den))
    } else {
        let f = u.exp();
        let den = mu * f - 1.0;
        (mu * f / den, -kappa * mu * f / (den * den))
    }
}

/// `σ_{T,μ̃}(t)`; fails for `μ̃ ∈ [0, ∞)`.
pub fn sigma_t_mu(t: f64, params: &CrossoverParams) -> Result<Complex64> {
    Ok(SigmaProfile::crossover(params.kappa(), params.mu)?.value(t))
}

/// `σ_T(t) = 1/(1 − e^{−κt})` for `t ≠ 0`.
pub fn sigma_t(kappa: f64, t: f64) -> f64 {
    -1.0 / (-kappa * t).exp_m1()
}

fn sigma_t_derivative(kappa: f64, t: f64) -> f64 {
    let u = kappa * t;
    // −κ e^{−u} / (1 − e^{−u})² = −κ / (4 sinh²(u/2))
    let sh = (0.5 * u).sinh();
    -kappa / (4.0 * sh * sh)
}

/// `σ̃_T(t) = σ_T(t) − 1/(κt)`, with value `1/2` at `t = 0`.
pub fn sigma_tilde(kappa: f64, t: f64) -> f64 {
    let u = kappa * t;
    if u.abs() < 0.1 {
        let u2 = u * u;
        0.5 + u / 12.0 - u * u2 / 720.0 + u * u2 * u2 / 30240.0 - u * u2 * u2 * u2 / 1_209_600.0
    } else {
        sigma_t(kappa, t) - 1.0 / u
    }
}

/// Airy kernel `K_Ai(x, y) = (Ai(x)Ai'(y) − Ai'(x)Ai(y)) / (x − y)`, with
/// the diagonal `Ai'(x)² − x Ai(x)²`.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    airy_kernel_from(x, airy_pair(x), y, airy_pair(y))
}

fn airy_kernel_from(x: f64, (ax, bx): (f64, f64), y: f64, (ay, by): (f64, f64)) -> f64 {
    let d = x - y;
    if d.abs() > 1e-3 {
        return (ax * by - bx * ay) / d;
    }
    // expand around the midpoint: K(m + h, m − h) = D(m) + f''(0) h²/2
    let m = 0.5 * (x + y);
    let (a, b) = airy_pair(m);
    let diag = b * b - m * a * a;
    if d == 0.0 {
        return diag;
    }
    let h = 0.5 * d;
    let f2 = 2.0 * (-(2.0 / 3.0) * m * m * a * a + (2.0 / 3.0) * m * b * b + a * b / 3.0);
    diag + 0.5 * f2 * h * h
}

/// Unweighted matrix `K_Ai(x_i, x_j)`, row-major.
pub fn airy_kernel_matrix(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let pairs: Vec<(f64, f64)> = nodes.iter().map(|&x| airy_pair(x)).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let k = airy_kernel_from(nodes[i], pairs[i], nodes[j], pairs[j]);
            out[i * n + j] = k;
            out[j * n + i] = k;
        }
    }
    out
}

/// Quadrature in `t` for `∫ σ'(t) K_Ai(x + t, y + t) dt` with `x, y` in
/// `[x_min, x_max]`. Centered at the transition point
/// `t₀ = −log|μ̃| / κ`; panels near `t₀` are limited by the distance to the
/// complex poles of `σ'`, far away by the oscillation of `K_Ai`.
pub fn sigma_prime_rule(kappa: f64, mu: Complex64, x_min: f64, x_max: f64) -> Result<QuadratureRule> {
    let t0 = -mu.norm().ln() / kappa;
    let pole_dist = mu.arg().abs() / kappa;
    let lo = t0 - 38.0 / kappa;
    let hi = (t0 + 38.0 / kappa).min(25.0 - x_min);
    if !(hi > lo) {
        return Ok(QuadratureRule {
            nodes: Vec::new(),
            weights: Vec::new(),
            segment: (lo, lo),
        });
    }
    let span = x_max - x_min;
    let width = |t: f64| {
        let pole = (t - t0).abs().max(pole_dist);
        let osc = 10.0 / (-(x_min + t)).max(1.0).sqrt();
        pole.min(osc).min(12.0 / (1.0 + span)).min(2.0)
    };
    composite(&breaks_from(t0, lo, hi, width), 24)
}

/// `K_σ(x, y) = ∫ σ(t) Ai(x+t) Ai(y+t) dt` for a smooth or step profile,
/// evaluated as `∫ σ'(t) K_Ai(x+t, y+t) dt`.
pub fn crossover_airy_kernel(x: f64, y: f64, profile: &SigmaProfile) -> Result<Complex64> {
    match *profile {
        SigmaProfile::Step => Ok(Complex64::new(airy_kernel(x, y), 0.0)),
        SigmaProfile::Crossover { kappa, mu } => {
            let rule = sigma_prime_rule(kappa, mu, x.min(y), x.max(y))?;
            Ok(rule.integrate_complex(|t| profile.derivative(t) * airy_kernel(x + t, y + t)))
        }
        _ => Err(invalid(
            "crossover_airy_kernel needs a smooth crossover or step profile; use the gumbel kernels for σ_T",
        )),
    }
}

/// Unweighted matrix `K_σ(x_i, x_j)`, row-major, sharing one `t`-rule and
/// one table of Airy values across all entries.
pub fn crossover_airy_matrix(nodes: &[f64], profile: &SigmaProfile) -> Result<Vec<Complex64>> {
    let (kappa, mu) = match *profile {
        SigmaProfile::Step => {
            return Ok(airy_kernel_matrix(nodes)
                .into_iter()
                .map(|k| Complex64::new(k, 0.0))
                .collect())
        }
        SigmaProfile::Crossover { kappa, mu } => (kappa, mu),
        _ => return Err(invalid("crossover_airy_matrix needs a crossover or step profile")),
    };
    let n = nodes.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let x_min = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rule = sigma_prime_rule(kappa, mu, x_min, x_max)?;
    let m = rule.len();
    let w: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &wt)| profile.derivative(t) * wt)
        .collect();
    let mut a = Mat::<f64>::zeros(n, m);
    let mut b = Mat::<f64>::zeros(n, m);
    for i in 0..n {
        for k in 0..m {
            let (ai, aip) = airy_pair(nodes[i] + rule.nodes[k]);
            a[(i, k)] = ai;
            b[(i, k)] = aip;
        }
    }
    // off-diagonal: (A W Bᵀ − B W Aᵀ)_{ij} / (x_i − x_j), split into re/im
    let scaled = |part: fn(&Complex64) -> f64| {
        let mut aw = a.clone();
        for k in 0..m {
            let s = part(&w[k]);
            for i in 0..n {
                aw[(i, k)] *= s;
            }
        }
        let p = &aw * b.transpose();
        p.clone() - p.transpose()
    };
    let re = scaled(|z| z.re);
    let im = scaled(|z| z.im);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let d = nodes[i] - nodes[j];
            out[i * n + j] = if i == j || d.abs() <= 1e-3 {
                // direct sum with the stable kernel evaluation
                let (xi, xj) = (nodes[i], nodes[j]);
                (0..m)
                    .map(|k| {
                        let t = rule.nodes[k];
                        w[k] * airy_kernel_from(
                            xi + t,
                            (a[(i, k)], b[(i, k)]),
                            xj + t,
                            (a[(j, k)], b[(j, k)]),
                        )
                    })
                    .sum()
            } else {
                Complex64::new(re[(i, j)], im[(i, j)]) / d
            };
        }
    }
    Ok(out)
}

/// `√σ(x − s') K_Ai(x, y) √σ(y − s')` on the full line, principal square
/// root, `s' = a / κ_T`.
pub fn symmetrized_kernel(x: f64, y: f64, params: &CrossoverParams) -> Result<Complex64> {
    let profile = SigmaProfile::crossover(params.kappa(), params.mu)?;
    let sp = params.s_prime();
    let sx = profile.value(x - sp).sqrt();
    let sy = profile.value(y - sp).sqrt();
    Ok(sx * airy_kernel(x, y) * sy)
}

/// Symmetrized kernel for an arbitrary profile shifted by `shift`.
pub fn symmetrized_kernel_with(x: f64, y: f64, profile: &SigmaProfile, shift: f64) -> Complex64 {
    profile.value(x - shift).sqrt() * airy_kernel(x, y) * profile.value(y - shift).sqrt()
}

/// Cutoff of the σ-weighted `t` integrals on the oscillatory side.
const HILBERT_CUTOFF: f64 = 400.0;

/// Principal-value rule in `t` for integrands `h(t) Ai(x+t) Ai(y+t) / t`
/// with `x, y ≥ x_min`, on `[lo, hi]`. `pole_scale` bounds panel widths by
/// the distance to other complex singularities of `h` (`2π/κ` for `σ_T`).
fn airy_product_pv_rule(x_min: f64, lo: f64, pole_scale: f64) -> Result<QuadratureRule> {
    let hi = (25.0 - x_min).max(1.0);
    let osc = move |t: f64| 8.0 / (-(x_min + t)).max(1.0).sqrt();
    let delta = osc(0.0).min(1.0).min(0.5 * pole_scale);
    pv_rule_graded(0.0, lo, hi, delta, 20, |t| {
        osc(t).min((t * t + pole_scale * pole_scale).sqrt()).min(2.0)
    })
}

/// `PV ∫ σ_T(t) Ai(x+t) Ai(y+t) dt` by a principal-value rule.
pub fn gumbel_kernel_pv(x: f64, y: f64, t: f64) -> Result<f64> {
    let k = kappa(t);
    let rule = airy_product_pv_rule(x.min(y), -40.0 / k, 2.0 * PI / k)?;
    Ok(rule.integrate(|u| sigma_t(k, u) * airy_pair(x + u).0 * airy_pair(y + u).0))
}

/// Matrix `PV ∫ σ_T(t) Ai(x_i+t) Ai(x_j+t) dt` as `A diag(ω σ_T) Aᵀ` over a
/// shared principal-value rule, symmetrized. The `t`-range starts at
/// `−decay/κ`, where `σ_T` has fallen to `e^{−decay}`.
pub fn gumbel_pv_matrix(nodes: &[f64], t: f64, decay: f64) -> Result<Mat<f64>> {
    let n = nodes.len();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    if !(decay > 0.0) {
        return Err(invalid("decay must be positive"));
    }
    let k = kappa(t);
    let x_min = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let rule = airy_product_pv_rule(x_min, -decay / k, 2.0 * PI / k)?;
    let m = rule.len();
    let mut a = Mat::<f64>::zeros(n, m);
    let mut aw = Mat::<f64>::zeros(n, m);
    for kk in 0..m {
        let u = rule.nodes[kk];
        let w = rule.weights[kk] * sigma_t(k, u);
        for i in 0..n {
            let v = airy_pair(nodes[i] + u).0;
            a[(i, kk)] = v;
            aw[(i, kk)] = v * w;
        }
    }
    let mut p = &aw * a.transpose();
    drop((a, aw));
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    Ok(p)
}

/// `PV ∫_{−∞}^{∞} Ai(x+t) Ai(y+t) / t dt`.
pub fn airy_product_hilbert(x: f64, y: f64) -> Result<f64> {
    let rule = airy_product_pv_rule(x.min(y), -HILBERT_CUTOFF, f64::INFINITY)?;
    let core = rule.integrate(|u| airy_pair(x + u).0 * airy_pair(y + u).0 / u);
    Ok(core + hilbert_tail(x, y, HILBERT_CUTOFF))
}

/// `∫_{−∞}^{−L} Ai(x+t) Ai(y+t) / t dt` for large `L`, from the modulus and
/// phase expansions `Ai(−z) = M(z) cos θ(z)`.
pub fn hilbert_tail(x: f64, y: f64, cutoff: f64) -> f64 {
    let mp = |z: f64| {
        let z3 = z * z * z;
        let m2 = (1.0 + 5.0 / 32.0 / z3 + 10395.0 / 18432.0 / (z3 * z3)) / (PI * z.sqrt());
        m2.sqrt()
    };
    // θ1 − θ2 with the leading difference computed without cancellation
    let dtheta = |z1: f64, z2: f64| {
        let s1 = z1.sqrt();
        let s2 = z2.sqrt();
        let lead = (z1 - z2) * (z1 * z1 + z1 * z2 + z2 * z2) / (z1 * s1 + z2 * s2);
        let corr = |z: f64| 5.0 / 48.0 / (z * z.sqrt()) + 1105.0 / 9216.0 / (z.powi(4) * z.sqrt());
        -(2.0 / 3.0) * lead - (corr(z1) - corr(z2))
    };
    let theta_sum = |z1: f64, z2: f64| {
        let th = |z: f64| {
            let z3 = z * z * z;
            PI / 4.0 - (2.0 / 3.0) * z * z.sqrt() * (1.0 + 5.0 / 32.0 / z3 + 1105.0 / 6144.0 / (z3 * z3))
        };
        th(z1) + th(z2)
    };
    // slow part: −∫_{√L}^{∞} M1 M2 cos(θ1 − θ2) / u du, τ = u²
    let u0 = cutoff.sqrt();
    let u1 = 400.0_f64.max(4.0 * u0);
    let d = x - y;
    let width = (12.0 / d.abs().max(1e-9)).min(4.0);
    let n_panels = ((u1 - u0) / width).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=n_panels)
        .map(|i| u0 + (u1 - u0) * i as f64 / n_panels as f64)
        .collect();
    let rule = composite(&breaks, 16).expect("valid panels");
    let slow = -rule.integrate(|u| {
        let tau = u * u;
        let (z1, z2) = (tau - x, tau - y);
        mp(z1) * mp(z2) * dtheta(z1, z2).cos() / u
    });
    // remainder beyond u1: −(1/π)[C2 + e S3 + (x+y)/4 C4]
    let e = (x * x - y * y) / 4.0;
    let cs = |n: u32| -> Complex64 {
        if d.abs() * u1 < 1e-12 {
            Complex64::new(u1.powi(1 - n as i32) / (n as f64 - 1.0), 0.0)
        } else {
            exp_integral_e(n, Complex64::new(0.0, -d * u1)) * u1.powi(1 - n as i32)
        }
    };
    let remainder = -(cs(2).re + e * cs(3).im + 0.25 * (x + y) * cs(4).re) / PI;
    // fast part, leading boundary term of −∫_L^∞ M1 M2 cos(θ1 + θ2) / (2τ) dτ
    let (z1, z2) = (cutoff - x, cutoff - y);
    let dphi = -(z1.sqrt() + z2.sqrt());
    let fast = mp(z1) * mp(z2) * theta_sum(z1, z2).sin() / (2.0 * cutoff * dphi);
    slow + remainder + fast
}

/// `K_{σ_T}(x, y)` as `∫ σ̃_T Ai Ai dt − κ_T⁻¹ π G_{(x−y)/2}((x+y)/2)`.
///
/// With `G_a` as in [`oscillatory_g`], the Hilbert transform of the Airy
/// product is `PV ∫ Ai(x+t) Ai(y+t) / t dt = −π G_{(x−y)/2}((x+y)/2)`.
pub fn gumbel_kernel(x: f64, y: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("T must be positive and finite, got {t}")));
    }
    let k = kappa(t);
    let rule = airy_product_pv_rule(x.min(y), -HILBERT_CUTOFF, 2.0 * PI / k)?;
    let smooth = rule.integrate(|u| sigma_tilde(k, u) * airy_pair(x + u).0 * airy_pair(y + u).0);
    // below −L, σ_T is exponentially small, so σ̃_T ≈ −1/(κt)
    let tail = -hilbert_tail(x, y, HILBERT_CUTOFF) / k;
    let g = oscillatory_g(0.5 * (x - y), 0.5 * (x + y));
    Ok(smooth + tail - PI * g / k)
}

/// Discretized vertical contours `Γ_η` and `Γ_ζ` for the cosecant kernel.
#[derive(Debug, Clone)]
pub struct ComplexContour {
    /// Shared rule in `r = Im`.
    pub r_rule: QuadratureRule,
    pub eta: ContourRule,
    pub zeta: ContourRule,
}

/// Truncation and resolution of the vertical contours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// `|Im| ≤ r_max`; `None` picks it from `tol` and the Gaussian decay.
    pub r_max: Option<f64>,
    pub per_panel: usize,
    pub max_width: f64,
    pub tol: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            per_panel: 12,
            max_width: 0.5,
            tol: 1e-10,
        }
    }
}

impl ContourConfig {
    /// Diagonal entries of the kernel decay like `exp(−c₃ T r²)`.
    pub fn truncation(&self, t: f64) -> f64 {
        self.r_max
            .unwrap_or_else(|| ((1.0 / self.tol).ln() / (C3 * t)).sqrt().max(3.0))
    }
}

impl ComplexContour {
    pub fn new(t: f64, a: f64, cfg: &ContourConfig) -> Result<Self> {
        let r_max = cfg.truncation(t);
        if !(r_max > 0.0) || cfg.per_panel == 0 || !(cfg.max_width > 0.0) {
            return Err(invalid("contour truncation and panel sizes must be positive"));
        }
        let lin = CBRT2 * a.abs() + 1.0;
        let width = |r: f64| (10.0 / (t * r * r + lin)).min(cfg.max_width);
        let r_rule = composite(&breaks_from(0.0, -r_max, r_max, width), cfg.per_panel)?;
        Ok(Self::from_r_rule(r_rule))
    }

    pub fn from_r_rule(r_rule: QuadratureRule) -> Self {
        let i = Complex64::i();
        let eta = ContourRule::from_parametrization(&r_rule, |r| Complex64::new(C3 / 2.0, r), |_| i);
        let zeta =
            ContourRule::from_parametrization(&r_rule, |r| Complex64::new(-C3 / 2.0, r), |_| i);
        Self { r_rule, eta, zeta }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}

/// `e^{−T/3 (ζ³ − η'³) + 2^{1/3} a (ζ − η')} π 2^{1/3} (−μ̃)^{−z} / sin(πz)`
/// with `z = 2^{1/3}(ζ − η')`.
pub fn csc_factor(zeta: Complex64, eta_p: Complex64, params: &CrossoverParams) -> Result<Complex64> {
    let dz = zeta - eta_p;
    let z = dz * CBRT2;
    let nearest = z.re.round();
    if Complex64::new(z.re - nearest, z.im).norm() < 1e-8 {
        return Err(Error::CscPole);
    }
    let log_mmu = (-params.mu).ln();
    let cubic = dz * (zeta * zeta + zeta * eta_p + eta_p * eta_p);
    let mut expo = -params.t / 3.0 * cubic + CBRT2 * params.a() * dz - z * log_mmu;
    let i = Complex64::i();
    // 1/sin(πz) with the large exponential folded into `expo`
    let pref = if z.im >= 0.0 {
        expo += i * PI * z;
        -2.0 * i / (1.0 - (2.0 * i * PI * z).exp())
    } else {
        expo -= i * PI * z;
        2.0 * i / (1.0 - (-2.0 * i * PI * z).exp())
    };
    Ok(expo.exp() * pref * (PI * CBRT2))
}

/// Same factor with the cosecant replaced by its defining `t`-integral
/// `2^{1/3} ∫ μ̃ e^{−2^{1/3} t (ζ − η')} / (e^t − μ̃) dt`.
pub fn csc_factor_t_integral(
    zeta: Complex64,
    eta_p: Complex64,
    params: &CrossoverParams,
) -> Result<Complex64> {
    let dz = zeta - eta_p;
    let w = -dz * CBRT2;
    if !(w.re > 0.0 && w.re < 1.0) {
        return Err(invalid("t-integral diverges unless 0 < Re(−2^{1/3}(ζ − η')) < 1"));
    }
    let mu = params.mu;
    let decay = w.re.min(1.0 - w.re);
    let half = 40.0 / decay;
    let center = mu.norm().ln();
    let pole_dist = mu.arg().abs().max(1e-3);
    let width = |t: f64| {
        ((t - center).abs().max(pole_dist))
            .min(8.0 / (w.im.abs() + 1.0))
            .min(1.0)
    };
    let rule = composite(&breaks_from(center, center - half, center + half, width), 20)?;
    let integral = rule.integrate_complex(|t| {
        if t > 0.0 {
            mu * ((w - 1.0) * t).exp() / (1.0 - mu * (-t).exp())
        } else {
            mu * (w * t).exp() / (t.exp() - mu)
        }
    });
    let cubic = dz * (zeta * zeta + zeta * eta_p + eta_p * eta_p);
    let expo = -params.t / 3.0 * cubic + CBRT2 * params.a() * dz;
    Ok(expo.exp() * integral * CBRT2)
}

/// `K^csc_a(η, η') = ∫_{Γ_ζ} (csc factor) dζ / (ζ − η)` on the discretized
/// ζ-contour.
pub fn cosecant_kernel(
    eta: Complex64,
    eta_p: Complex64,
    params: &CrossoverParams,
    zeta: &ContourRule,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (&z, &w) in zeta.nodes.iter().zip(&zeta.weights) {
        sum += csc_factor(z, eta_p, params)? * w / (z - eta);
    }
    Ok(sum)
}

/// [`cosecant_kernel`] with the inner `t`-integral done by quadrature.
pub fn cosecant_kernel_t_integral(
    eta: Complex64,
    eta_p: Complex64,
    params: &CrossoverParams,
    zeta: &ContourRule,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (&z, &w) in zeta.nodes.iter().zip(&zeta.weights) {
        sum += csc_factor_t_integral(z, eta_p, params)? * w / (z - eta);
    }
    Ok(sum)
}

/// Weighted cosecant matrix `K(η_i, η_j) w_j` on the η-nodes of `contour`,
/// computed as the product `[w^ζ_k / (ζ_k − η_i)] · [csc(ζ_k, η_j) w^η_j]`.
pub fn cosecant_matrix(contour: &ComplexContour, params: &CrossoverParams) -> Result<Mat<Complex64>> {
    let n = contour.eta.len();
    let m = contour.zeta.len();
    let a = Mat::<Complex64>::from_fn(n, m, |i, k| {
        contour.zeta.weights[k] / (contour.zeta.nodes[k] - contour.eta.nodes[i])
    });
    let mut b = Mat::<Complex64>::zeros(m, n);
    for k in 0..m {
        for j in 0..n {
            b[(k, j)] = csc_factor(contour.zeta.nodes[k], contour.eta.nodes[j], params)?
                * contour.eta.weights[j];
        }
    }
    Ok(&a * &b)
}
