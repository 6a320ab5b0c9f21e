//! `F_T(s)` by the crossover Airy, Gumbel convolution and cosecant kernel
//! formulas, the GUE reference, and the small/large-`T` limit scans.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::kernels::{
    airy_kernel_matrix, cosecant_matrix, gumbel_pv_matrix, kappa, shift_a, ComplexContour,
    ContourConfig, CrossoverParams, SigmaProfile,
};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::quadrature::{breaks_from, composite, gauss_legendre, ContourRule, QuadratureRule};
use crate::specfun::{airy_pair, gaussian_cdf, gumbel_weight};

/// Discretization of the μ̃-contour `C̃`: the ray `x + i` from `X_max` in to
/// `i`, the left unit semicircle from `i` to `−i`, and the ray `x − i` out to
/// `X_max` (counterclockwise around the origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuContourConfig {
    pub x_max: f64,
    /// Panels per ray; widths double away from the semicircle.
    pub ray_panels: usize,
    pub ray_nodes_per_panel: usize,
    pub semicircle_nodes: usize,
}

impl Default for MuContourConfig {
    fn default() -> Self {
        Self {
            x_max: 40.0,
            ray_panels: 4,
            ray_nodes_per_panel: 16,
            semicircle_nodes: 48,
        }
    }
}

impl MuContourConfig {
    /// Nodes and weights of `dμ̃` along `C̃`, without the `1/(2πi)`.
    pub fn rule(&self) -> Result<ContourRule> {
        if !(self.x_max > 0.0) || self.ray_panels == 0 || self.ray_nodes_per_panel == 0 {
            return Err(invalid("mu contour needs x_max > 0 and nonempty rays"));
        }
        let total = (1u64 << self.ray_panels) as f64 - 1.0;
        let mut breaks = vec![0.0];
        let mut acc = 0.0;
        for k in 0..self.ray_panels {
            acc += (1u64 << k) as f64;
            breaks.push(self.x_max * acc / total);
        }
        let ray = composite(&breaks, self.ray_nodes_per_panel)?;
        let i = Complex64::i();
        let upper = ContourRule::from_parametrization(
            &ray,
            |x| Complex64::new(x, 1.0),
            |_| Complex64::new(-1.0, 0.0),
        );
        let arc_rule = gauss_legendre(self.semicircle_nodes, PI / 2.0, 1.5 * PI)?;
        let arc = ContourRule::from_parametrization(
            &arc_rule,
            |th| Complex64::from_polar(1.0, th),
            |th| i * Complex64::from_polar(1.0, th),
        );
        let lower = ContourRule::from_parametrization(
            &ray,
            |x| Complex64::new(x, -1.0),
            |_| Complex64::new(1.0, 0.0),
        );
        Ok(ContourRule::concat(&[upper, arc, lower]))
    }
}

/// Discretization of the full-line Airy formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryGridConfig {
    /// Truncation tolerance for the neglected left part of the operator.
    pub tol: f64,
    pub per_panel: usize,
    /// Panel width is `min(max_width, oscillation / sqrt(max(1, −x)))`.
    pub oscillation: f64,
    pub max_width: f64,
    pub x_hi: f64,
}

impl Default for AiryGridConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            per_panel: 20,
            oscillation: 12.0,
            max_width: 1.5,
            x_hi: 10.0,
        }
    }
}

/// Discretization of the Gumbel convolution formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelConfig {
    pub per_panel: usize,
    /// Width of the panels of the master `x`-grid (in `x = ρ / κ_T`).
    pub panel_width: f64,
    /// Neglected size of `f` at the ends of its range.
    pub tol: f64,
    /// Degree of the local interpolant of `f` in the `r`-integral.
    pub interp_degree: usize,
    /// Truncations drop contributions below `e^{−tail}`: the `x`-grid ends at
    /// `8 + tail/κ` and the `t`-integrals start at `−tail/κ`.
    pub tail: f64,
}

impl Default for GumbelConfig {
    fn default() -> Self {
        Self {
            per_panel: 8,
            panel_width: 0.25,
            tol: 1e-10,
            interp_degree: 11,
            tail: 25.0,
        }
    }
}

/// All discretization parameters for `F_T` evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub mu: MuContourConfig,
    pub airy: AiryGridConfig,
    pub csc: ContourConfig,
    pub gumbel: GumbelConfig,
    /// `|Im|` of the μ̃-integral must stay below `threshold (1 + |Re|)`.
    pub residual_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mu: MuContourConfig::default(),
            airy: AiryGridConfig::default(),
            csc: ContourConfig::default(),
            gumbel: GumbelConfig::default(),
            residual_threshold: 1e-6,
        }
    }
}

/// Which determinant formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Airy,
    Csc,
    Gumbel,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Airy => "airy",
            Method::Csc => "csc",
            Method::Gumbel => "gumbel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "airy" => Some(Method::Airy),
            "csc" => Some(Method::Csc),
            "gumbel" => Some(Method::Gumbel),
            _ => None,
        }
    }
}

/// One evaluation of `F_T(s)` with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtValue {
    pub s: f64,
    /// Real part (raw, not clipped to `[0, 1]`).
    pub value: f64,
    /// `|Im|` of the μ̃-integral; zero for the Gumbel formula, which is real.
    pub residual: f64,
    /// Largest Nyström system size used.
    pub nodes: usize,
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("T must be positive and finite, got {t}")));
    }
    Ok(())
}

fn check_s(s: &[f64]) -> Result<()> {
    if s.iter().any(|v| !v.is_finite()) {
        return Err(invalid("s values must be finite"));
    }
    Ok(())
}

/// `(1/2πi) Σ w e^{−μ} det(μ) / μ`, with the residual check.
fn contour_average(
    s: f64,
    mus: &ContourRule,
    dets: &[Complex64],
    nodes: usize,
    threshold: f64,
) -> Result<FtValue> {
    let mut sum = Complex64::new(0.0, 0.0);
    for ((&mu, &w), &d) in mus.nodes.iter().zip(&mus.weights).zip(dets) {
        sum += w * (-mu).exp() * d / mu;
    }
    let f = sum / Complex64::new(0.0, 2.0 * PI);
    let residual = f.im.abs();
    if residual > threshold * (1.0 + f.re.abs()) {
        return Err(Error::ContourUnderResolved {
            residual,
            threshold: threshold * (1.0 + f.re.abs()),
        });
    }
    Ok(FtValue {
        s,
        value: f.re,
        residual,
        nodes,
    })
}

/// Left truncation point of the full-line grid for one μ̃: below it
/// `|σ(x − s')| K_Ai(x, x)` integrates to less than `tol e^{Re μ̃}`.
fn airy_left_cut(kappa: f64, s_prime: f64, mu: Complex64, tol: f64) -> f64 {
    let target = (tol * mu.re.exp()).min(1e-3);
    let mut x = s_prime - 10.0;
    for _ in 0..4 {
        let rhs = (target * PI * kappa / mu.norm()).ln() - 0.5 * (x.abs() + 1.0).ln();
        x = s_prime + rhs / kappa;
    }
    x.min(s_prime)
}

/// Weighted Airy kernel `√w_i K_Ai(x_i, x_j) √w_j` on a composite grid.
struct AiryGrid {
    rule: QuadratureRule,
    /// Index of the first node of every panel.
    panel_start: Vec<(f64, usize)>,
    weighted: Mat<f64>,
}

impl AiryGrid {
    fn new(x_lo: f64, cfg: &AiryGridConfig) -> Result<Self> {
        let x_hi = cfg.x_hi.max(x_lo + 1.0);
        let width = |x: f64| (cfg.oscillation / (-x).max(1.0).sqrt()).min(cfg.max_width);
        let breaks = breaks_from(x_hi, x_lo, x_hi, width);
        let rule = composite(&breaks, cfg.per_panel)?;
        let panel_start = breaks[..breaks.len() - 1]
            .iter()
            .enumerate()
            .map(|(p, &b)| (b, p * cfg.per_panel))
            .collect();
        let n = rule.len();
        let k = airy_kernel_matrix(&rule.nodes);
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let weighted = Mat::from_fn(n, n, |i, j| sw[i] * k[i * n + j] * sw[j]);
        Ok(Self {
            rule,
            panel_start,
            weighted,
        })
    }

    /// First node index of the last panel starting at or below `x`.
    fn cut_index(&self, x: f64) -> usize {
        let mut idx = 0;
        for &(b, i) in &self.panel_start {
            if b <= x {
                idx = i;
            }
        }
        idx
    }

    fn determinant(&self, profile: &SigmaProfile, shift: f64, from: usize) -> Complex64 {
        let n = self.rule.len() - from;
        let d: Vec<Complex64> = self.rule.nodes[from..]
            .iter()
            .map(|&x| profile.value(x - shift).sqrt())
            .collect();
        let m = DenseMatrix::from_fn(n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            Complex64::new(id, 0.0) - d[i] * self.weighted[(from + i, from + j)] * d[j]
        });
        LuFactors::new(&m).determinant()
    }
}

/// `F_T(s)` by the crossover Airy kernel formula, in its symmetrized
/// full-line form `det(I − √σ K_Ai √σ)_{L²(ℝ)}`, at several `s` sharing one
/// grid.
pub fn f_t_airy_grid(t: f64, s_values: &[f64], cfg: &EvalConfig) -> Result<Vec<FtValue>> {
    check_t(t)?;
    check_s(s_values)?;
    if s_values.is_empty() {
        return Ok(Vec::new());
    }
    let k = kappa(t);
    let mus = cfg.mu.rule()?;
    let shifts: Vec<f64> = s_values.iter().map(|&s| shift_a(t, s) / k).collect();
    let mut x_lo = f64::INFINITY;
    for &sp in &shifts {
        for &mu in &mus.nodes {
            x_lo = x_lo.min(airy_left_cut(k, sp, mu, cfg.airy.tol));
        }
    }
    let grid = AiryGrid::new(x_lo, &cfg.airy)?;
    let mut out = Vec::with_capacity(s_values.len());
    for (&s, &sp) in s_values.iter().zip(&shifts) {
        let results: Vec<(Complex64, usize)> = mus
            .nodes
            .par_iter()
            .map(|&mu| {
                let profile = SigmaProfile::crossover(k, mu)?;
                let from = grid.cut_index(airy_left_cut(k, sp, mu, cfg.airy.tol));
                Ok((grid.determinant(&profile, sp, from), grid.rule.len() - from))
            })
            .collect::<Result<_>>()?;
        let dets: Vec<Complex64> = results.iter().map(|r| r.0).collect();
        let nodes = results.iter().map(|r| r.1).max().unwrap_or(0);
        out.push(contour_average(s, &mus, &dets, nodes, cfg.residual_threshold)?);
    }
    Ok(out)
}

/// `F_T(s)` by the crossover Airy kernel formula.
pub fn f_t_airy(t: f64, s: f64, cfg: &EvalConfig) -> Result<FtValue> {
    Ok(f_t_airy_grid(t, &[s], cfg)?[0])
}

/// `det(I − K^csc_a)` on the discretized `Γ_η`.
///
/// Both contour integrals, the `ζ`-integral inside the kernel and the
/// action on `L²(Γ_η)`, are taken with the measure `dz / (2πi)`; this is the
/// normalization under which the determinant equals the crossover Airy
/// determinant `det(I − K_{σ_{T,μ̃}})_{L²(κ_T⁻¹a, ∞)}` for every `μ̃`.
pub fn csc_determinant(contour: &ComplexContour, params: &CrossoverParams) -> Result<Complex64> {
    let k = cosecant_matrix(contour, params)?;
    let n = k.nrows();
    let norm = -1.0 / (4.0 * PI * PI);
    let m = DenseMatrix::from_fn(n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) - k[(i, j)] * norm
    });
    if let Some((i, j)) = m.first_non_finite() {
        return Err(Error::NonFiniteEntry { i, j });
    }
    Ok(LuFactors::new(&m).determinant())
}

/// `F_T(s)` by the cosecant kernel formula.
pub fn f_t_csc(t: f64, s: f64, cfg: &EvalConfig) -> Result<FtValue> {
    check_t(t)?;
    check_s(&[s])?;
    let a = shift_a(t, s);
    let contour = ComplexContour::new(t, a, &cfg.csc)?;
    let mus = cfg.mu.rule()?;
    let dets: Vec<Complex64> = mus
        .nodes
        .par_iter()
        .map(|&mu| csc_determinant(&contour, &CrossoverParams::new(t, s, mu)?))
        .collect::<Result<_>>()?;
    contour_average(s, &mus, &dets, contour.len(), cfg.residual_threshold)
}

/// `F_T` at several `s` by the cosecant kernel formula.
pub fn f_t_csc_grid(t: f64, s_values: &[f64], cfg: &EvalConfig) -> Result<Vec<FtValue>> {
    s_values.iter().map(|&s| f_t_csc(t, s, cfg)).collect()
}

/// Samples of `f(ρ) = κ⁻¹ det(I − K_{σ_T}) tr((I − K_{σ_T})⁻¹ P_Ai)` on
/// `L²(ρ/κ, ∞)`.
#[derive(Debug, Clone)]
pub struct GumbelDensity {
    pub rho: Vec<f64>,
    pub f: Vec<f64>,
}

impl GumbelDensity {
    /// Computes `f` at `ρ = κ b` for every panel boundary `b` of a master
    /// grid on `[x_lo, x_hi]`.
    ///
    /// With the nodes taken in decreasing order, the system on `L²(b, ∞)` is a
    /// leading block of one symmetric matrix, so a single unpivoted `LDLᵀ`
    /// gives all the determinants (products of leading pivots) and, through
    /// one forward substitution, all the traces `uᵀ M_b⁻¹ u = Σ z_i² / d_i`.
    pub fn compute(t: f64, x_lo: f64, x_hi: f64, cfg: &GumbelConfig) -> Result<Self> {
        check_t(t)?;
        if !(x_hi > x_lo) {
            return Err(invalid("gumbel grid needs x_lo < x_hi"));
        }
        let k = kappa(t);
        let n_panels = ((x_hi - x_lo) / cfg.panel_width).ceil().max(1.0) as usize;
        let breaks: Vec<f64> = (0..=n_panels)
            .map(|i| x_lo + (x_hi - x_lo) * i as f64 / n_panels as f64)
            .collect();
        let rule = composite(&breaks, cfg.per_panel)?;
        let n = rule.len();
        // nodes in decreasing order: L²(b, ∞) is a leading block
        let rev = |r: usize| n - 1 - r;
        let rnodes: Vec<f64> = (0..n).map(|r| rule.nodes[rev(r)]).collect();
        let sw: Vec<f64> = (0..n).map(|r| rule.weights[rev(r)].sqrt()).collect();
        let mut m = gumbel_pv_matrix(&rnodes, t, cfg.tail)?;
        for j in 0..n {
            for i in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                m[(i, j)] = id - sw[i] * m[(i, j)] * sw[j];
            }
        }
        let ldlt = m
            .ldlt(Side::Lower)
            .map_err(|_| Error::SingularResolvent)?;
        drop(m);
        let l = ldlt.L();
        let d = ldlt.D().column_vector();
        let mut z: Vec<f64> = (0..n).map(|r| sw[r] * airy_pair(rnodes[r]).0).collect();
        for j in 0..n {
            let zj = z[j];
            for i in j + 1..n {
                z[i] -= l[(i, j)] * zj;
            }
        }
        let mut rho = Vec::with_capacity(n_panels + 1);
        let mut f = Vec::with_capacity(n_panels + 1);
        let (mut det, mut tr) = (1.0, 0.0);
        // walk leading blocks outward; block size n − p·per_panel ↔ boundary p
        let mut samples = vec![(k * x_hi, 0.0)];
        for r in 0..n {
            let di = d[r];
            if di == 0.0 || !di.is_finite() {
                return Err(Error::SingularResolvent);
            }
            det *= di;
            tr += z[r] * z[r] / di;
            if (r + 1) % cfg.per_panel == 0 {
                let p = n_panels - (r + 1) / cfg.per_panel;
                samples.push((k * breaks[p], det * tr / k));
            }
        }
        for &(x, v) in samples.iter().rev() {
            rho.push(x);
            f.push(v);
        }
        Ok(Self { rho, f })
    }

    /// Local Lagrange interpolation of degree `deg` on the sample grid;
    /// zero outside it.
    pub fn eval(&self, rho: f64, deg: usize) -> f64 {
        let n = self.rho.len();
        if n == 0 || rho < self.rho[0] || rho > self.rho[n - 1] {
            return 0.0;
        }
        let pos = self.rho.partition_point(|&r| r < rho);
        let m = (deg + 1).min(n);
        let start = pos.saturating_sub(m / 2).min(n - m);
        let xs = &self.rho[start..start + m];
        let ys = &self.f[start..start + m];
        let mut sum = 0.0;
        for i in 0..m {
            let mut l = 1.0;
            for j in 0..m {
                if i != j {
                    l *= (rho - xs[j]) / (xs[i] - xs[j]);
                }
            }
            sum += l * ys[i];
        }
        sum
    }
}

/// `ρ`-range of the samples of `f` needed for the convolution at the given
/// `a` values, as `(ρ_lo, ρ_hi)`, and the right end of the `x`-grid.
fn gumbel_range(t: f64, a_values: &[f64], cfg: &GumbelConfig) -> (f64, f64, f64) {
    let k = kappa(t);
    let a_min = a_values.iter().cloned().fold(f64::INFINITY, f64::min);
    // G(r) < tol below r_lo
    let r_lo = -(-cfg.tol.ln()).ln();
    // f(ρ) is bounded by κ⁻¹ ∫_{ρ/κ}^∞ Ai², negligible beyond x = 8
    let rho_hi = 8.0 * k;
    let rho_lo = (a_min + r_lo).max(-12.0 - 6.0 * k).min(rho_hi - 1.0);
    // the kernel decays like e^{−κ x}
    let x_end = 8.0 + cfg.tail / k;
    (rho_lo, rho_hi, x_end)
}

/// `F_T(s) = 1 − ∫ G(r) f(a + r) dr` at several `s` sharing one density.
///
/// Substituting `μ̃ = e^{−r}` in the contour integral puts the half-line of
/// `f` at `κ⁻¹(a + r)`, so the density enters as `f(a + r)`.
pub fn f_t_gumbel_grid(t: f64, s_values: &[f64], cfg: &EvalConfig) -> Result<Vec<FtValue>> {
    check_t(t)?;
    check_s(s_values)?;
    if s_values.is_empty() {
        return Ok(Vec::new());
    }
    let g = &cfg.gumbel;
    let k = kappa(t);
    let a_values: Vec<f64> = s_values.iter().map(|&s| shift_a(t, s)).collect();
    let a_min = a_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let (mut rho_lo, _rho_hi, x_end) = gumbel_range(t, &a_values, g);
    // f can be huge where G is tiny (det(I − K_{σ_T}) grows fast to the left
    // for small T), so the left edge is judged on the weighted integrand
    let mut widenings = 0;
    let density = loop {
        let d = GumbelDensity::compute(t, rho_lo / k, x_end, g)?;
        let edge = d
            .rho
            .iter()
            .zip(&d.f)
            .take_while(|(&r, _)| r <= d.rho[0] + 0.5)
            .map(|(&r, &f)| (gumbel_weight(r - a_min) * f).abs())
            .fold(0.0, f64::max);
        if edge <= g.tol {
            break d;
        }
        widenings += 1;
        if widenings > 20 {
            return Err(Error::NonConvergence {
                module: "crossover (gumbel range)",
                iterations: widenings,
                residual: edge,
            });
        }
        rho_lo -= 0.5;
    };
    Ok(s_values
        .iter()
        .zip(&a_values)
        .map(|(&s, &a)| {
            // ρ = a + r over the sampled ρ-range, split at the sample points
            let breaks: Vec<f64> = density.rho.iter().map(|&rho| rho - a).collect();
            let rule = composite(&breaks, 8).expect("increasing breaks");
            let conv = rule.integrate(|r| gumbel_weight(r) * density.eval(a + r, g.interp_degree));
            FtValue {
                s,
                value: 1.0 - conv,
                residual: 0.0,
                nodes: density.rho.len() * g.per_panel,
            }
        })
        .collect())
}

/// `F_T(s)` by the Gumbel convolution formula.
pub fn f_t_gumbel(t: f64, s: f64, cfg: &EvalConfig) -> Result<FtValue> {
    Ok(f_t_gumbel_grid(t, &[s], cfg)?[0])
}

/// Evaluates `F_T` on a grid with the chosen formula.
pub fn f_t(method: Method, t: f64, s_values: &[f64], cfg: &EvalConfig) -> Result<Vec<FtValue>> {
    match method {
        Method::Airy => f_t_airy_grid(t, s_values, cfg),
        Method::Csc => f_t_csc_grid(t, s_values, cfg),
        Method::Gumbel => f_t_gumbel_grid(t, s_values, cfg),
    }
}

/// `F_GUE(s) = det(I − K_Ai)_{L²(s, ∞)}` with an `n`-node Gauss-Legendre
/// rule on `[s, max(s + 16, 12)]`.
pub fn f_gue_with(s: f64, n: usize) -> Result<f64> {
    if !s.is_finite() {
        return Err(invalid("s must be finite"));
    }
    let hi = (s + 16.0).max(12.0);
    if s >= 12.0 {
        return Ok(1.0);
    }
    let rule = gauss_legendre(n, s, hi)?;
    let k = airy_kernel_matrix(&rule.nodes);
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let m = DenseMatrix::from_real_fn(n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - sw[i] * k[i * n + j] * sw[j]
    });
    Ok(LuFactors::new(&m).determinant().re)
}

/// `F_GUE(s)`.
pub fn f_gue(s: f64) -> Result<f64> {
    f_gue_with(s, 80)
}

/// `(s, deviation)` pairs and their supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitScan {
    pub t: f64,
    pub points: Vec<(f64, f64, f64)>,
    pub sup: f64,
}

impl LimitScan {
    fn from_points(t: f64, points: Vec<(f64, f64, f64)>) -> Self {
        let sup = points.iter().map(|p| (p.1 - p.2).abs()).fold(0.0, f64::max);
        Self { t, points, sup }
    }
}

/// `sup_s |F_T(2^{−1/2} π^{1/4} T^{1/4} s) − Φ(s)|`. Each point is
/// `(s, F_T, Φ)`.
pub fn gaussian_limit_scan(
    method: Method,
    t: f64,
    s_grid: &[f64],
    cfg: &EvalConfig,
) -> Result<LimitScan> {
    let scale = PI.powf(0.25) * t.powf(0.25) / 2f64.sqrt();
    let scaled: Vec<f64> = s_grid.iter().map(|&s| scale * s).collect();
    let f = f_t(method, t, &scaled, cfg)?;
    let points = s_grid
        .iter()
        .zip(&f)
        .map(|(&s, v)| (s, v.value, gaussian_cdf(s)))
        .collect();
    Ok(LimitScan::from_points(t, points))
}

/// `sup_s |F_T(T^{1/3} s) − F_GUE(2^{1/3} s)|`. Each point is
/// `(s, F_T, F_GUE)`.
pub fn tracy_widom_limit_scan(
    method: Method,
    t: f64,
    s_grid: &[f64],
    cfg: &EvalConfig,
) -> Result<LimitScan> {
    let scaled: Vec<f64> = s_grid.iter().map(|&s| t.cbrt() * s).collect();
    let f = f_t(method, t, &scaled, cfg)?;
    let points = s_grid
        .iter()
        .zip(&f)
        .map(|(&s, v)| Ok((s, v.value, f_gue(2f64.cbrt() * s)?)))
        .collect::<Result<_>>()?;
    Ok(LimitScan::from_points(t, points))
}

/// Heat kernel `p(T, X)`.
pub fn heat_kernel(t: f64, x: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// `T^{−1/2} ∫_0^T ∫ p²(T−S, X−Y) p²(S, Y) / p²(T, X) dY dS`.
///
/// For fixed `S` the `Y`-integrand is a Gaussian with mean `XS/T` and
/// variance `S(T−S)/(2T)`, integrated on a rule scaled to it.
pub fn variance_constant(t: f64, x: f64) -> Result<f64> {
    check_t(t)?;
    // S = T (1 − cos θ)/2 removes the S^{−1/2} endpoint singularities
    let s_rule = gauss_legendre(64, 0.0, PI)?;
    let y_rule = gauss_legendre(96, -1.0, 1.0)?;
    let mut total = 0.0;
    let px = heat_kernel(t, x);
    for (&th, &wth) in s_rule.nodes.iter().zip(&s_rule.weights) {
        let s = 0.5 * t * (1.0 - th.cos());
        let ds = 0.5 * t * th.sin();
        // Y-integrand is a Gaussian centered at X S/T with variance S(T−S)/(2T)
        let mean = x * s / t;
        let sd = (s * (t - s) / (2.0 * t)).sqrt();
        let half = 12.0 * sd;
        let inner: f64 = y_rule
            .nodes
            .iter()
            .zip(&y_rule.weights)
            .map(|(&u, &wu)| {
                let y = mean + half * u;
                let a = heat_kernel(t - s, x - y);
                let b = heat_kernel(s, y);
                a * a * b * b * wu * half
            })
            .sum();
        total += wth * ds * inner;
    }
    Ok(total / (px * px) / t.sqrt())
}

/// `√π / 2`, the closed form of [`variance_constant`].
pub const VARIANCE_CONSTANT: f64 = 0.886_226_925_452_758;

/// Evaluations of `F_T` on an `s`-grid by one method.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub t: f64,
    pub method: Method,
    pub rows: Vec<FtValue>,
}

impl DistributionTable {
    pub fn compute(method: Method, t: f64, s_grid: &[f64], cfg: &EvalConfig) -> Result<Self> {
        Ok(Self {
            t,
            method,
            rows: f_t(method, t, s_grid, cfg)?,
        })
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// Largest decrease between consecutive grid points (0 if monotone).
    pub fn max_decrease(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| (w[0].value - w[1].value).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Maps inverse temperature `β` to the time of the `β = 1` law:
/// `F_β(T, X)` is distributed as `F(β⁴ T, β² X)`.
pub fn beta_scaled_time(beta: f64, t: f64) -> f64 {
    beta.powi(4) * t
}

/// Spatial counterpart of [`beta_scaled_time`].
pub fn beta_scaled_position(beta: f64, x: f64) -> f64 {
    beta * beta * x
}
