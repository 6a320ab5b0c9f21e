use std::f64::consts::PI;

use kpz_crossover::crossover::{
    beta_scaled_position, beta_scaled_time, csc_determinant, f_gue, f_t, f_t_airy_grid, f_t_csc,
    f_t_gumbel, f_t_gumbel_grid, gaussian_limit_scan, variance_constant, DistributionTable,
    EvalConfig, GumbelConfig, GumbelDensity, Method, MuContourConfig, VARIANCE_CONSTANT,
};
use kpz_crossover::fredholm::NystromSystem;
use kpz_crossover::kernels::{crossover_airy_matrix, kappa, ComplexContour, CrossoverParams};
use kpz_crossover::linalg::DenseMatrix;
use kpz_crossover::quadrature::composite;
use kpz_crossover::Complex64;

fn fast() -> EvalConfig {
    let mut cfg = EvalConfig::default();
    cfg.mu = MuContourConfig {
        semicircle_nodes: 24,
        ray_nodes_per_panel: 8,
        ..cfg.mu
    };
    cfg.csc.tol = 1e-7;
    cfg
}

/// det(I − K_{σ_{T,μ̃}}) on L²(a/κ, ∞), truncated at a/κ + 16.
fn airy_half_line_det(p: &CrossoverParams) -> Complex64 {
    let sp = p.s_prime();
    // K_σ(x, x) decays only like e^{−κx}, so the rule runs out to s' + 44
    let breaks: Vec<f64> = (0..=88).map(|k| sp + 0.5 * k as f64).collect();
    let rule = composite(&breaks, 12).unwrap();
    let km = crossover_airy_matrix(&rule.nodes, &p.profile()).unwrap();
    let n = rule.len();
    let sw: Vec<Complex64> = rule.weights.iter().map(|w| Complex64::new(w.sqrt(), 0.0)).collect();
    let weighted = DenseMatrix::from_fn(n, |i, j| sw[i] * km[i * n + j] * sw[j]);
    NystromSystem::from_weighted(&weighted, sw.clone(), sw).unwrap().determinant()
}

#[test]
fn cosecant_determinant_equals_airy_determinant() {
    for &mu in &[Complex64::new(-1.0, 0.0), Complex64::new(2.0, 1.0), Complex64::new(0.0, -3.0)] {
        let p = CrossoverParams::new(1.0, 0.0, mu).unwrap();
        let contour = ComplexContour::new(p.t, p.a(), &Default::default()).unwrap();
        let csc = csc_determinant(&contour, &p).unwrap();
        let airy = airy_half_line_det(&p);
        assert!((csc - airy).norm() < 1e-8, "mu = {mu}: {csc} vs {airy}");
    }
}

#[test]
fn airy_route_values() {
    let cfg = EvalConfig::default();
    let v = f_t_airy_grid(1.0, &[-1.0, 0.0, 8.0], &cfg).unwrap();
    for r in &v {
        assert!(r.residual < 1e-6 * (1.0 + r.value.abs()));
        assert!((-1e-4..=1.0 + 1e-4).contains(&r.value));
    }
    assert!((v[2].value - 1.0).abs() < 1e-3);
    // frozen from the three-route comparison
    assert!((v[1].value - 0.677_599_742).abs() < 1e-8);
    let g = f_t_gumbel(1.0, -1.0, &cfg).unwrap();
    assert!((g.value - v[0].value).abs() < 5e-3);
    assert!((g.value - v[0].value).abs() < 1e-7);
    let c = f_t_csc(1.0, 0.0, &fast()).unwrap();
    assert!((c.value - v[1].value).abs() < 1e-3);
    assert!(c.residual < 1e-6);
}

#[test]
fn gumbel_density_properties() {
    let cfg = GumbelConfig::default();
    let k = kappa(1.0);
    let d = GumbelDensity::compute(1.0, -6.0, 12.0, &cfg).unwrap();
    assert!(d.rho.windows(2).all(|w| w[0] < w[1]));
    assert!(d.eval(10.0 * k, cfg.interp_degree).abs() < 1e-6);
    let right: Vec<f64> = d.rho.iter().zip(&d.f).filter(|p| *p.0 > 1.0).map(|p| *p.1).collect();
    assert!(right.iter().all(|&f| f >= -1e-12));
    assert!(right.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    // f changes sign on the left (near ρ ≈ −3.2 at T = 1); the lobe is
    // stable under refinement, so it is a property of f and not noise
    let fine = GumbelDensity::compute(
        1.0,
        -6.0,
        12.0,
        &GumbelConfig { panel_width: 0.125, per_panel: 10, ..cfg },
    )
    .unwrap();
    for &r in &[-3.2, -2.0, -0.5, 1.0] {
        let (a, b) = (d.eval(r, cfg.interp_degree), fine.eval(r, cfg.interp_degree));
        assert!((a - b).abs() < 1e-7, "rho = {r}: {a} vs {b}");
    }
    assert!(d.eval(-3.2, cfg.interp_degree) < -0.4);
}

#[test]
fn gumbel_route_is_monotone_and_bounded() {
    let s: Vec<f64> = (-8..=6).map(|k| 0.5 * k as f64).collect();
    for &t in &[0.25, 10.0] {
        let table = DistributionTable::compute(Method::Gumbel, t, &s, &EvalConfig::default()).unwrap();
        assert_eq!(table.max_residual(), 0.0);
        assert!(table.max_decrease() == 0.0, "T = {t}");
        for r in &table.rows {
            assert!((-1e-4..=1.0 + 1e-4).contains(&r.value));
        }
    }
}

#[test]
fn gumbel_frozen_values() {
    let cfg = EvalConfig::default();
    let frozen = [
        (0.25, [0.003_525_922_6, 0.630_631_374_3, 0.999_331_468_0]),
        (1.0, [0.050_063_799_7, 0.677_599_742_4, 0.993_073_855_6]),
        (10.0, [0.359_593_399_6, 0.773_534_352_4, 0.964_846_898_2]),
    ];
    for (t, vals) in frozen {
        let got = f_t_gumbel_grid(t, &[-2.0, 0.0, 2.0], &cfg).unwrap();
        for (g, v) in got.iter().zip(vals) {
            assert!((g.value - v).abs() < 1e-8, "T = {t}, s = {}: {} vs {v}", g.s, g.value);
        }
    }
}

#[test]
fn f_gue_values() {
    assert!((f_gue(0.0).unwrap() - 0.9694).abs() < 2e-4);
    assert!((f_gue(4.0).unwrap() - 1.0).abs() < 1e-6);
    let mut prev = 0.0;
    for k in 0..=32 {
        let v = f_gue(-5.0 + 0.25 * k as f64).unwrap();
        assert!(v >= prev);
        prev = v;
    }
}

#[test]
fn variance_constant_closed_form() {
    assert!((VARIANCE_CONSTANT - PI.sqrt() / 2.0).abs() < 1e-15);
    let base = variance_constant(1.0, 0.0).unwrap();
    assert!((base - VARIANCE_CONSTANT).abs() < 1e-6);
    for &(t, x) in &[(1.0, 1.0), (4.0, 0.0), (0.3, -2.0)] {
        assert!((variance_constant(t, x).unwrap() - base).abs() < 1e-6, "({t}, {x})");
    }
}

#[test]
fn beta_scaling_is_a_parameter_map() {
    let beta = 2.0;
    let t = beta_scaled_time(beta, 0.0625);
    assert_eq!(t, 1.0);
    assert_eq!(beta_scaled_position(beta, 0.5), 2.0);
    let cfg = EvalConfig::default();
    let a = f_t(Method::Gumbel, t, &[0.0], &cfg).unwrap();
    let b = f_t(Method::Gumbel, 1.0, &[0.0], &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gaussian_scan_at_moderate_t() {
    let s: Vec<f64> = (-8..=8).map(|k| 0.25 * k as f64).collect();
    let scan = gaussian_limit_scan(Method::Gumbel, 0.1, &s, &EvalConfig::default()).unwrap();
    assert_eq!(scan.points.len(), 17);
    assert!((scan.sup - 0.1067).abs() < 1e-3, "sup {}", scan.sup);
}

#[test]
fn rejects_bad_arguments() {
    let cfg = EvalConfig::default();
    assert!(f_t(Method::Gumbel, 0.0, &[0.0], &cfg).is_err());
    assert!(f_t(Method::Airy, 1.0, &[f64::NAN], &cfg).is_err());
    assert_eq!(Method::parse("csc"), Some(Method::Csc));
    assert_eq!(Method::parse("all"), None);
}
