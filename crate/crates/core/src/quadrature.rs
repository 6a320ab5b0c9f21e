//! Integration rules: Gauss-Legendre panels, composite and half-line rules,
//! principal-value rules and the oscillatory integral `G_a(x)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Nodes and weights on a real segment.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub segment: (f64, f64),
}

/// Nodes and complex weights along a contour.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn integrate_complex(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    /// Concatenates rules on adjacent segments.
    pub fn concat(parts: &[QuadratureRule]) -> QuadratureRule {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in parts {
            nodes.extend_from_slice(&p.nodes);
            weights.extend_from_slice(&p.weights);
        }
        let start = parts.first().map_or(0.0, |p| p.segment.0);
        let end = parts.last().map_or(0.0, |p| p.segment.1);
        QuadratureRule {
            nodes,
            weights,
            segment: (start, end),
        }
    }

    /// Keeps only the nodes with `x >= lo` (used to truncate composite rules
    /// at a panel boundary).
    pub fn restrict_from(&self, lo: f64) -> QuadratureRule {
        let (nodes, weights) = self
            .nodes
            .iter()
            .zip(&self.weights)
            .filter(|(&x, _)| x >= lo)
            .map(|(&x, &w)| (x, w))
            .unzip();
        QuadratureRule {
            nodes,
            weights,
            segment: (lo.max(self.segment.0), self.segment.1),
        }
    }
}

impl ContourRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| f(z) * w)
            .sum()
    }

    /// Maps a real rule through a parametrization `z(t)` with derivative
    /// `dz(t)`.
    pub fn from_parametrization(
        rule: &QuadratureRule,
        z: impl Fn(f64) -> Complex64,
        dz: impl Fn(f64) -> Complex64,
    ) -> ContourRule {
        let nodes = rule.nodes.iter().map(|&t| z(t)).collect();
        let weights = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| dz(t) * w)
            .collect();
        ContourRule { nodes, weights }
    }

    pub fn concat(parts: &[ContourRule]) -> ContourRule {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in parts {
            nodes.extend_from_slice(&p.nodes);
            weights.extend_from_slice(&p.weights);
        }
        ContourRule { nodes, weights }
    }
}

type Reference = Arc<(Vec<f64>, Vec<f64>)>;

/// n-point Gauss-Legendre nodes and weights on `[-1, 1]`, cached.
fn reference_rule(n: usize) -> Reference {
    static CACHE: OnceLock<Mutex<HashMap<usize, Reference>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let r = Arc::new(compute_reference(n));
    cache.lock().unwrap().insert(n, r.clone());
    r
}

fn compute_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// n-point Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(invalid("gauss_legendre needs n >= 1"));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(invalid(format!("gauss_legendre needs a < b, got [{a}, {b}]")));
    }
    let r = reference_rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureRule {
        nodes: r.0.iter().map(|&t| mid + half * t).collect(),
        weights: r.1.iter().map(|&w| half * w).collect(),
        segment: (a, b),
    })
}

/// Composite Gauss-Legendre rule over consecutive panels `[b_i, b_{i+1}]`.
pub fn composite(breaks: &[f64], per_panel: usize) -> Result<QuadratureRule> {
    if breaks.len() < 2 {
        return Err(invalid("composite rule needs at least one panel"));
    }
    let parts = breaks
        .windows(2)
        .map(|w| gauss_legendre(per_panel, w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadratureRule::concat(&parts))
}

/// Composite rule on `[c, c + tail_length]` with `panels` panels whose widths
/// double from left to right.
pub fn half_line_rule(
    c: f64,
    tail_length: f64,
    panels: usize,
    per_panel: usize,
) -> Result<QuadratureRule> {
    if !(tail_length > 0.0) {
        return Err(invalid("half_line_rule needs tail_length > 0"));
    }
    if panels == 0 {
        return Err(invalid("half_line_rule needs at least one panel"));
    }
    let total = (1u64 << panels) as f64 - 1.0;
    let mut breaks = vec![c];
    let mut acc = 0.0;
    for k in 0..panels {
        acc += (1u64 << k) as f64;
        breaks.push(c + tail_length * acc / total);
    }
    composite(&breaks, per_panel)
}

/// Panel boundaries on `[lo, hi]` such that each panel is no wider than
/// `width(x)` evaluated at its left end (and at the tentative right end).
pub fn graded_breaks(lo: f64, hi: f64, width: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut breaks = vec![lo];
    let mut x = lo;
    while x < hi {
        let mut h = width(x);
        let h2 = width((x + h).min(hi));
        h = h.min(h2).max(1e-12 * (hi - lo).abs().max(1.0));
        let next = if x + h >= hi || hi - (x + h) < 0.2 * h {
            hi
        } else {
            x + h
        };
        breaks.push(next);
        x = next;
    }
    breaks
}

/// Panel boundaries on `[lo, hi]` grown outward from `center`, which is
/// clamped into the interval. A panel whose inner end is at `t` and tentative
/// outer end at `t'` gets width `min(width(t), width(t'))`.
pub fn breaks_from(center: f64, lo: f64, hi: f64, width: impl Fn(f64) -> f64) -> Vec<f64> {
    let step = |start: f64, dir: f64, stop: f64| -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = start;
        while dir * (stop - t) > 0.0 {
            let mut h = width(t);
            h = h.min(width(t + dir * h)).max(1e-12);
            let remaining = dir * (stop - t);
            if remaining < 1.2 * h {
                h = remaining;
            }
            t = if h == remaining { stop } else { t + dir * h };
            out.push(t);
        }
        out
    };
    let c = center.clamp(lo, hi);
    let mut b = step(c, -1.0, lo);
    b.reverse();
    b.push(c);
    b.extend(step(c, 1.0, hi));
    b
}

/// Parameters for principal-value rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvParams {
    /// Half-width of the symmetric excision; `None` means `1e-3 (hi - lo)`.
    pub delta: Option<f64>,
    pub per_panel: usize,
    /// Upper bound for panel widths outside the excision.
    pub max_width: f64,
}

impl Default for PvParams {
    fn default() -> Self {
        Self {
            delta: None,
            per_panel: 24,
            max_width: f64::INFINITY,
        }
    }
}

/// Rule computing the Cauchy principal value through a simple pole at
/// `pole`. Around the pole the nodes come in mirror pairs `pole ± u_k` with
/// equal weights, so the odd singular part cancels exactly and the rule
/// effectively integrates the smooth function `(h(u) - h(-u)) / u`. Outside
/// the excision, panels grow geometrically away from the pole.
pub fn pv_rule(pole: f64, lo: f64, hi: f64, params: PvParams) -> Result<QuadratureRule> {
    let delta = params.delta.unwrap_or(1e-3 * (hi - lo));
    pv_rule_graded(pole, lo, hi, delta, params.per_panel, |_| params.max_width)
}

/// Like [`pv_rule`], with the panel width outside the excision bounded by
/// `max_width(t)` evaluated at the panel's inner end.
pub fn pv_rule_graded(
    pole: f64,
    lo: f64,
    hi: f64,
    delta: f64,
    per_panel: usize,
    max_width: impl Fn(f64) -> f64,
) -> Result<QuadratureRule> {
    if !(lo < pole && pole < hi) {
        return Err(Error::PoleOnBoundary { pole, lo, hi });
    }
    let delta = delta.min(pole - lo).min(hi - pole);
    if !(delta > 0.0) {
        return Err(invalid("principal value excision must be positive"));
    }
    let n = per_panel;
    let inner = gauss_legendre(n, 0.0, delta)?;
    let mut nodes = Vec::with_capacity(2 * n);
    let mut weights = Vec::with_capacity(2 * n);
    for (&u, &w) in inner.nodes.iter().zip(&inner.weights) {
        nodes.push(pole - u);
        weights.push(w);
        nodes.push(pole + u);
        weights.push(w);
    }
    let mut parts = vec![QuadratureRule {
        nodes,
        weights,
        segment: (pole - delta, pole + delta),
    }];
    let outward = |start: f64, end: f64| -> Result<Vec<QuadratureRule>> {
        let mut out = Vec::new();
        let len = (end - start).abs();
        let dir = (end - start).signum();
        let mut pos = 0.0;
        let mut width = delta;
        while pos < len {
            let t = start + dir * pos;
            let mut w = width.min(max_width(t)).max(1e-9 * delta);
            if len - pos < 1.2 * w {
                w = len - pos;
            }
            let (a, b) = (t, start + dir * (pos + w));
            out.push(gauss_legendre(n, a.min(b), a.max(b))?);
            pos += w;
            width = 2.0 * w;
        }
        Ok(out)
    };
    if pole + delta < hi {
        parts.extend(outward(pole + delta, hi)?);
    }
    if pole - delta > lo {
        parts.extend(outward(pole - delta, lo)?);
    }
    let mut rule = QuadratureRule::concat(&parts);
    rule.segment = (lo, hi);
    Ok(rule)
}

/// Principal value of `∫_lo^hi f(t) dt` with a simple pole of `f` at `pole`.
pub fn pv_integral(
    f: impl Fn(f64) -> f64,
    pole: f64,
    lo: f64,
    hi: f64,
    params: PvParams,
) -> Result<f64> {
    Ok(pv_rule(pole, lo, hi, params)?.integrate(f))
}

/// `G_a(x) = (2 π^{3/2})^{-1} ∫_0^∞ sin(xξ + ξ³/12 − a²/ξ + π/4) ξ^{-1/2} dξ`.
///
/// The integral equals `Im(e^{iπ/4} ∫_0^∞ e^{iΦ(ξ)} ξ^{-1/2} dξ)` with
/// `Φ(ξ) = xξ + ξ³/12 − a²/ξ`, and the complex integral may be taken along
/// the ray `arg ξ = θ ∈ (0, π/3)`, on which `e^{iΦ}` decays at both ends.
/// `θ = π/6` turns the cubic phase into pure Gaussian-like decay; for negative
/// `x` the angle is reduced so that the transient growth `exp(|x| ρ sin θ)`
/// stays below `e^3`.
pub fn oscillatory_g(a: f64, x: f64) -> f64 {
    let theta = ray_angle(x);
    let (sin_t, cos_t) = theta.sin_cos();
    let sin3 = (3.0 * theta).sin();
    let dir = Complex64::new(cos_t, sin_t);
    let half_dir = Complex64::from_polar(1.0, 0.5 * theta);
    let a2 = a * a;
    // integrand in v with ξ = v² e^{iθ}: 2 e^{iθ/2} e^{iΦ(ξ)}
    let f = |v: f64| -> Complex64 {
        if v == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let rho = v * v;
        let xi = dir * rho;
        let phase = xi * x + xi * xi * xi / 12.0 - a2 / xi;
        (Complex64::i() * phase).exp() * half_dir * 2.0
    };
    // upper cutoff: ρ³ sin3θ/12 − |x|ρ sinθ ≥ 45
    let mut rho_hi: f64 = 1.0;
    while rho_hi.powi(3) * sin3 / 12.0 - x.min(0.0).abs() * rho_hi * sin_t < 45.0 {
        rho_hi *= 1.1;
    }
    let v_hi = rho_hi.sqrt();
    // lower cutoff: damping exp(−a² sinθ / ρ) below 1e-19
    let v_lo = if a2 > 0.0 { (a2 * sin_t / 44.0).sqrt() } else { 0.0 };
    let freq = |v: f64| {
        let v = v.max(1e-300);
        let v2 = v * v;
        2.0 * v * (x.abs() + v2 * v2 / 4.0 + a2 / (v2 * v2))
    };
    let breaks = graded_breaks(v_lo, v_hi, |v| (4.0 / freq(v)).min(0.5));
    let rule = composite(&breaks, 16).expect("valid panels");
    let integral = rule.integrate_complex(f);
    let value = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4) * integral;
    value.im / (2.0 * PI.powf(1.5))
}

fn ray_angle(x: f64) -> f64 {
    let growth = |theta: f64| {
        if x >= 0.0 {
            return 0.0;
        }
        let rho = (4.0 * -x * theta.sin() / (3.0 * theta).sin()).sqrt();
        2.0 / 3.0 * -x * theta.sin() * rho
    };
    let mut theta = PI / 6.0;
    while growth(theta) > 3.0 {
        theta *= 0.9;
    }
    theta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_weights_sum_to_two() {
        for n in [1, 2, 5, 24, 80] {
            let r = reference_rule(n);
            let s: f64 = r.1.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
        }
    }
}
