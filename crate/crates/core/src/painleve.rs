//! Integro-differential route to `det(I − K_σ)_{L²(r,∞)}`.
//!
//! For each `t` on a `σ'`-weighted grid, `q_t` solves
//! `q_t'' = (r + t + c(r)) q_t` with `q_t(r) ~ Ai(t + r)` as `r → ∞`, where the
//! coupling is `c(r) = 2 ∫ σ'(t) q_t²(r) dt`. The coupled system is solved by
//! Picard iteration on `c`; each sweep marches every `q_t` backward in `r`
//! with Numerov's method. The determinant follows from
//! `log det = −∫_r^∞ (x − r) ∫ σ'(t) q_t²(x) dt dx`.
//!
//! Only real profiles are supported: the step (Hastings-McLeod) and
//! `σ_{T,μ̃}` with `μ̃ < 0`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fredholm::NystromSystem;
use crate::kernels::{crossover_airy_matrix, kappa, SigmaProfile};
use crate::linalg::DenseMatrix;
use crate::quadrature::{breaks_from, composite, QuadratureRule};
use crate::specfun::airy_pair;

/// Discretization of the Picard/Numerov solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PainleveConfig {
    /// Start of the backward march; `None` picks `max(12, 30/κ − t₀)` so that
    /// `σ'` has decayed below `e^{−30}` where `Ai(t + r)` is not small.
    pub r_max: Option<f64>,
    pub r_min: f64,
    pub step: f64,
    pub relaxation: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Half-width of the `t`-window in units of `κ⁻¹`.
    pub window: f64,
    pub per_panel: usize,
    /// Forces `c ≡ 0` (every `q_t` is then `Ai(t + r)`).
    pub zero_coupling: bool,
}

impl Default for PainleveConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            r_min: -6.0,
            step: 1.0 / 128.0,
            relaxation: 0.5,
            tol: 1e-9,
            max_iter: 400,
            window: 40.0,
            per_panel: 16,
            zero_coupling: false,
        }
    }
}

/// Real coupling profile, validated.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Coupling {
    Step,
    Logistic { kappa: f64, m: f64 },
}

impl Coupling {
    fn from_profile(profile: &SigmaProfile) -> Result<Self> {
        match *profile {
            SigmaProfile::Step => Ok(Coupling::Step),
            SigmaProfile::Crossover { kappa, mu } if mu.im == 0.0 && mu.re < 0.0 => {
                Ok(Coupling::Logistic { kappa, m: -mu.re })
            }
            SigmaProfile::Crossover { .. } => Err(invalid(
                "painleve route is validated only for real negative mu",
            )),
            _ => Err(invalid("painleve route needs the step or a crossover profile")),
        }
    }

    /// Transition point `t₀ = −log m / κ`.
    fn center(&self) -> f64 {
        match *self {
            Coupling::Step => 0.0,
            Coupling::Logistic { kappa, m } => -m.ln() / kappa,
        }
    }

    fn density(&self, t: f64) -> f64 {
        match *self {
            Coupling::Step => 0.0,
            Coupling::Logistic { kappa, .. } => {
                // σ = m / (m + e^{−κt}), σ' = κ m e^{−κt} / (m + e^{−κt})²
                let u = kappa * (t - self.center());
                let e = (-u.abs()).exp();
                kappa * e / ((1.0 + e) * (1.0 + e))
            }
        }
    }
}

/// Solution of the coupled system.
#[derive(Debug, Clone)]
pub struct QField {
    /// `t`-nodes and weights `σ'(t) w_t` of the coupling measure.
    pub t_nodes: Vec<f64>,
    pub t_weights: Vec<f64>,
    /// Decreasing grid `r_max = r_0 > r_1 > … ≥ r_min`.
    pub r_grid: Vec<f64>,
    /// `values[i][k] = q_{t_i}(r_k)`.
    pub values: Vec<Vec<f64>>,
    /// `c(r_k) = 2 ∫ σ' q_t²(r_k) dt`.
    pub coupling: Vec<f64>,
    /// Sup-norm change of the coupling at each Picard sweep.
    pub residuals: Vec<f64>,
    log_det: Vec<f64>,
}

fn default_r_max(c: &Coupling) -> f64 {
    match *c {
        Coupling::Step => 12.0,
        Coupling::Logistic { kappa, .. } => (30.0 / kappa - c.center()).max(12.0),
    }
}

/// `t`-rule for the coupling measure: panels resolve `σ'` near `t₀` and the
/// oscillation of `Ai(t + r)` for `t + r_min < 0`.
fn coupling_rule(c: &Coupling, r_min: f64, cfg: &PainleveConfig) -> Result<QuadratureRule> {
    match *c {
        Coupling::Step => Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![1.0],
            segment: (0.0, 0.0),
        }),
        Coupling::Logistic { kappa, .. } => {
            let t0 = c.center();
            let lo = t0 - cfg.window / kappa;
            // q_t is below e^{−200} on [r_min, ∞) once t + r_min > 30
            let hi = (t0 + cfg.window / kappa).min(30.0 - r_min).max(t0 + 1.0 / kappa);
            let width = |t: f64| {
                let near = (t - t0).abs().max(1.0 / kappa);
                let osc = 8.0 / (-(t + r_min)).max(1.0).sqrt();
                near.min(osc).min(2.0)
            };
            let raw = composite(&breaks_from(t0, lo, hi, width), cfg.per_panel)?;
            let weights = raw
                .nodes
                .iter()
                .zip(&raw.weights)
                .map(|(&t, &w)| c.density(t) * w)
                .collect();
            Ok(QuadratureRule {
                nodes: raw.nodes,
                weights,
                segment: raw.segment,
            })
        }
    }
}

/// Numerov march of `q'' = (r + t + c(r)) q` from the two Airy starting values.
fn march(t: f64, r_grid: &[f64], coupling: &[f64], h: f64) -> Vec<f64> {
    let n = r_grid.len();
    let mut q = vec![0.0; n];
    q[0] = airy_pair(t + r_grid[0]).0;
    if n > 1 {
        q[1] = airy_pair(t + r_grid[1]).0;
    }
    let h2 = h * h / 12.0;
    let f = |k: usize| r_grid[k] + t + coupling[k];
    for k in 1..n.saturating_sub(1) {
        let a = 1.0 - h2 * f(k + 1);
        let b = 2.0 * (1.0 + 5.0 * h2 * f(k));
        let c = 1.0 - h2 * f(k - 1);
        q[k + 1] = (b * q[k] - c * q[k - 1]) / a;
    }
    q
}

/// Solves the coupled system for a step or real crossover profile.
pub fn solve_q(profile: &SigmaProfile, cfg: &PainleveConfig) -> Result<QField> {
    let c = Coupling::from_profile(profile)?;
    if !(cfg.step > 0.0 && cfg.relaxation > 0.0 && cfg.relaxation <= 1.0) {
        return Err(invalid("painleve step and relaxation must be positive (relaxation ≤ 1)"));
    }
    let r_max = cfg.r_max.unwrap_or_else(|| default_r_max(&c));
    if !(r_max > cfg.r_min) {
        return Err(invalid("painleve grid needs r_min < r_max"));
    }
    let n = ((r_max - cfg.r_min) / cfg.step).ceil() as usize + 1;
    let r_grid: Vec<f64> = (0..n).map(|k| r_max - k as f64 * cfg.step).collect();
    let rule = coupling_rule(&c, cfg.r_min, cfg)?;

    let mut coupling = vec![0.0; n];
    let mut residuals = Vec::new();
    let mut values;
    let mut iter = 0;
    loop {
        values = rule
            .nodes
            .par_iter()
            .map(|&t| march(t, &r_grid, &coupling, cfg.step))
            .collect::<Vec<_>>();
        if cfg.zero_coupling {
            break;
        }
        let fresh: Vec<f64> = (0..n)
            .map(|k| {
                2.0 * rule
                    .weights
                    .iter()
                    .zip(&values)
                    .map(|(w, q)| w * q[k] * q[k])
                    .sum::<f64>()
            })
            .collect();
        let res = fresh
            .iter()
            .zip(&coupling)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !res.is_finite() {
            return Err(Error::NonConvergence {
                module: "painleve",
                iterations: iter,
                residual: res,
            });
        }
        residuals.push(res);
        if res < cfg.tol {
            coupling = fresh;
            values = rule
                .nodes
                .par_iter()
                .map(|&t| march(t, &r_grid, &coupling, cfg.step))
                .collect();
            break;
        }
        iter += 1;
        if iter >= cfg.max_iter {
            return Err(Error::NonConvergence {
                module: "painleve",
                iterations: iter,
                residual: res,
            });
        }
        for (ck, fk) in coupling.iter_mut().zip(&fresh) {
            *ck += cfg.relaxation * (fk - *ck);
        }
    }
    let log_det = cumulative_log_det(&r_grid, &coupling, cfg.step);
    Ok(QField {
        t_nodes: rule.nodes,
        t_weights: rule.weights,
        r_grid,
        values,
        coupling,
        residuals,
        log_det,
    })
}

/// `log det(r_k) = −∫_{r_k}^{r_max} (x − r_k) g(x) dx` with `g = c/2`, by
/// fourth-order cumulative sums of `∫ g` and `∫ x g`.
fn cumulative_log_det(r: &[f64], c: &[f64], h: f64) -> Vec<f64> {
    let n = r.len();
    let g: Vec<f64> = c.iter().map(|v| 0.5 * v).collect();
    let xg: Vec<f64> = g.iter().zip(r).map(|(a, b)| a * b).collect();
    let interval = |f: &[f64], k: usize| -> f64 {
        // ∫ over [r_{k+1}, r_k] (length h) from a cubic through 4 neighbours
        if n < 4 {
            return 0.5 * h * (f[k] + f[k + 1]);
        }
        if k == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if k + 2 >= n {
            h / 24.0 * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4])
        } else {
            h / 24.0 * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2])
        }
    };
    let mut out = vec![0.0; n];
    let (mut i0, mut i1) = (0.0, 0.0);
    for k in 1..n {
        i0 += interval(&g, k - 1);
        i1 += interval(&xg, k - 1);
        out[k] = -(i1 - r[k] * i0);
    }
    out
}

impl QField {
    pub fn r_max(&self) -> f64 {
        self.r_grid[0]
    }

    pub fn r_min(&self) -> f64 {
        *self.r_grid.last().expect("nonempty grid")
    }

    fn check_r(&self, r: f64) -> Result<()> {
        let (lo, hi) = (self.r_min(), self.r_max());
        if !(r >= lo - 1e-12 && r <= hi + 1e-12) {
            return Err(Error::OutsideGrid { r, lo, hi });
        }
        Ok(())
    }

    /// Local degree-5 interpolation of grid data at `r`.
    fn interpolate(&self, data: &[f64], r: f64) -> f64 {
        let n = self.r_grid.len();
        let h = self.r_grid[0] - self.r_grid[1];
        let pos = ((self.r_max() - r) / h).clamp(0.0, (n - 1) as f64);
        let m = 6.min(n);
        let start = (pos.floor() as usize).saturating_sub(2).min(n - m);
        let mut sum = 0.0;
        for i in start..start + m {
            let mut l = 1.0;
            for j in start..start + m {
                if i != j {
                    l *= (r - self.r_grid[j]) / (self.r_grid[i] - self.r_grid[j]);
                }
            }
            sum += l * data[i];
        }
        sum
    }

    /// `q_{t_i}(r)` for the `i`-th `t`-node.
    pub fn q(&self, i: usize, r: f64) -> Result<f64> {
        self.check_r(r)?;
        let row = self
            .values
            .get(i)
            .ok_or_else(|| invalid(format!("t-node index {i} out of range")))?;
        Ok(self.interpolate(row, r))
    }

    /// `∫ σ'(t) q_t²(r) dt = c(r) / 2`.
    pub fn sigma_q2(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(0.5 * self.interpolate(&self.coupling, r))
    }

    /// Total mass of the coupling measure.
    pub fn sigma_mass(&self) -> f64 {
        self.t_weights.iter().sum()
    }

    /// `det(I − K_σ)_{L²(r,∞)}` from the double integral of the coupling.
    pub fn det_from_q(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(self.interpolate(&self.log_det, r).exp())
    }

    /// Central second difference of `log det_from_q` with step `delta`.
    pub fn log_det_second_difference(&self, r: f64, delta: f64) -> Result<f64> {
        let f = |x: f64| -> Result<f64> { Ok(self.det_from_q(x)?.ln()) };
        Ok((f(r + delta)? - 2.0 * f(r)? + f(r - delta)?) / (delta * delta))
    }
}

/// `det(I − K_σ)_{L²(r,∞)}` by Nyström discretization of
/// `K_σ(x, y) = ∫ σ(t) Ai(x+t) Ai(y+t) dt` on `[r, x_hi]`, with `x_hi`
/// chosen like the Painlevé `r_max`.
pub fn half_line_det(profile: &SigmaProfile, r: f64) -> Result<f64> {
    let c = Coupling::from_profile(profile)?;
    let x_hi = default_r_max(&c).max(r + 1.0);
    let n_panels = (x_hi - r).ceil() as usize;
    let breaks: Vec<f64> = (0..=n_panels)
        .map(|i| r + (x_hi - r) * i as f64 / n_panels as f64)
        .collect();
    let rule = composite(&breaks, 12)?;
    let kmat = crossover_airy_matrix(&rule.nodes, profile)?;
    let sw: Vec<Complex64> = rule
        .weights
        .iter()
        .map(|w| Complex64::new(w.sqrt(), 0.0))
        .collect();
    let n = rule.len();
    let weighted = DenseMatrix::from_fn(n, |i, j| sw[i] * kmat[i * n + j] * sw[j]);
    let det = NystromSystem::from_weighted(&weighted, sw.clone(), sw)?.determinant();
    Ok(det.re)
}

/// `σ_{T,μ̃}` profile for real negative `μ̃`.
pub fn real_profile(t: f64, mu: f64) -> Result<SigmaProfile> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("T must be positive and finite, got {t}")));
    }
    if !(mu < 0.0 && mu.is_finite()) {
        return Err(invalid(format!("painleve route needs real mu < 0, got {mu}")));
    }
    SigmaProfile::crossover(kappa(t), Complex64::new(mu, 0.0))
}
