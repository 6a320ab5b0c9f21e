use std::f64::consts::PI;

use kpz_crossover::fredholm::NystromSystem;
use kpz_crossover::kernels::{
    airy_kernel, airy_kernel_matrix, cosecant_kernel, cosecant_kernel_t_integral, crossover_airy_kernel,
    crossover_airy_matrix, csc_factor, csc_factor_t_integral, gumbel_kernel, gumbel_kernel_pv, kappa,
    shift_a, sigma_t_mu, sigma_tilde, symmetrized_kernel, ComplexContour, ContourConfig,
    CrossoverParams, SigmaKind, SigmaProfile, C3,
};
use kpz_crossover::linalg::DenseMatrix;
use kpz_crossover::quadrature::composite;
use kpz_crossover::specfun::airy_ai;
use kpz_crossover::{Complex64, Error};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(t: f64, s: f64, mu: Complex64) -> CrossoverParams {
    CrossoverParams::new(t, s, mu).unwrap()
}

/// ∫ σ(t) Ai(x+t) Ai(y+t) dt straight from the definition.
fn k_sigma_oracle(x: f64, y: f64, profile: &SigmaProfile, lo: f64) -> Complex64 {
    let hi = 30.0 - x.min(y);
    let n = ((hi - lo) / 0.25).ceil() as usize;
    let breaks: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    composite(&breaks, 16)
        .unwrap()
        .integrate_complex(|t| profile.value(t) * airy_ai(x + t) * airy_ai(y + t))
}

#[test]
fn params_derived_quantities() {
    let p = params(2.0, 0.5, c(-1.0, 0.0));
    assert!((p.kappa() - 1.0).abs() < 1e-15);
    assert!((p.a() - (0.5 - (4.0 * PI).sqrt().ln())).abs() < 1e-15);
    assert_eq!(p.a(), shift_a(2.0, 0.5));
    assert!(matches!(CrossoverParams::new(1.0, 0.0, c(0.5, 0.0)), Err(Error::SigmaPole(_))));
    assert!(CrossoverParams::new(0.0, 0.0, c(-1.0, 0.0)).is_err());
    assert!((C3 - 2f64.powf(-4.0 / 3.0)).abs() < 1e-16);
}

#[test]
fn sigma_values() {
    let on_c = [c(-1.0, 0.0), c(0.0, 1.0), c(5.0, -1.0), c(-0.3, -0.95)];
    for &mu in &on_c {
        let v = sigma_t_mu(100.0, &params(1.0, 0.0, mu)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-12);
    }
    let v = sigma_t_mu(0.0, &params(1.0, 0.0, c(-1.0, 0.0))).unwrap();
    assert!((v - c(0.5, 0.0)).norm() < 1e-15);
    assert!(SigmaProfile::crossover(1.0, c(2.0, 0.0)).is_err());
    assert_eq!(SigmaProfile::Step.kind(), SigmaKind::StepAtZero);
    assert_eq!(SigmaProfile::PrincipalValue { kappa: 1.0 }.kind(), SigmaKind::PrincipalValueAtZero);
}

#[test]
fn sigma_derivative_matches_finite_difference() {
    for &mu in &[c(-1.0, 0.0), c(2.0, 1.0), c(-0.2, -1.0)] {
        let prof = SigmaProfile::crossover(kappa(1.0), mu).unwrap();
        let h = 1e-4;
        let fd = (prof.value(0.7 + h) - prof.value(0.7 - h)) / (2.0 * h);
        assert!((prof.derivative(0.7) - fd).norm() < 1e-7);
    }
    let sm = SigmaProfile::Smoothed { kappa: 0.8 };
    for &t in &[-3.0, -0.05, 0.0, 0.02, 1.5] {
        let h = 1e-4;
        let fd = (sm.value(t + h) - sm.value(t - h)) / (2.0 * h);
        assert!((sm.derivative(t) - fd).norm() < 1e-7, "t = {t}");
    }
}

#[test]
fn sigma_transition_window() {
    for &(t, mu) in &[(1.0, 0.5), (10.0, 2.0), (0.25, 1.0)] {
        let k = kappa(t);
        let prof = SigmaProfile::crossover(k, c(-mu, 0.0)).unwrap();
        let t0 = -f64::ln(mu) / k;
        for d in [40.5, 45.0, 60.0] {
            assert!((prof.value(t0 + d / k) - c(1.0, 0.0)).norm() < 1e-8);
            assert!(prof.value(t0 - d / k).norm() < 1e-8);
        }
    }
}

#[test]
fn sigma_tilde_at_zero() {
    assert_eq!(sigma_tilde(0.7, 0.0), 0.5);
    // series and direct forms meet smoothly at |κt| = 0.1
    let k = 1.3;
    let edge = 0.1 / k;
    assert!((sigma_tilde(k, edge * (1.0 - 1e-12)) - sigma_tilde(k, edge * (1.0 + 1e-12))).abs() < 1e-13);
}

#[test]
fn step_profile_is_airy_kernel() {
    let step = SigmaProfile::Step;
    for &(x, y) in &[(0.0, 0.0), (-1.5, 0.3), (2.0, 2.5)] {
        // the jump of σ sits on the first panel boundary
        let o = k_sigma_oracle(x, y, &step, 0.0).re;
        assert!((airy_kernel(x, y) - o).abs() < 1e-8, "({x}, {y})");
        assert_eq!(crossover_airy_kernel(x, y, &step).unwrap().re, airy_kernel(x, y));
    }
    assert!((airy_kernel(0.0, 0.0) - 0.0669874).abs() < 1e-6);
}

#[test]
fn crossover_kernel_matches_definition() {
    for &(t, mu) in &[(1.0, c(-1.0, 0.0)), (1.0, c(0.3, 1.2)), (10.0, c(-2.0, 0.0))] {
        let prof = SigmaProfile::crossover(kappa(t), mu).unwrap();
        let t0 = -mu.norm().ln() / kappa(t);
        for &(x, y) in &[(0.0, 0.0), (-1.0, 0.5), (1.2, 2.0)] {
            let k = crossover_airy_kernel(x, y, &prof).unwrap();
            let o = k_sigma_oracle(x, y, &prof, t0 - 40.0 / kappa(t));
            assert!((k - o).norm() < 1e-9, "T={t} mu={mu} ({x},{y}): {k} vs {o}");
        }
    }
}

#[test]
fn crossover_kernel_real_for_negative_mu() {
    let prof = SigmaProfile::crossover(kappa(1.0), c(-0.5, 0.0)).unwrap();
    for &(x, y) in &[(0.0, 0.3), (-2.0, 1.0)] {
        assert!(crossover_airy_kernel(x, y, &prof).unwrap().im.abs() < 1e-12);
    }
    assert!(crossover_airy_kernel(0.0, 0.0, &SigmaProfile::PrincipalValue { kappa: 1.0 }).is_err());
}

#[test]
fn crossover_matrix_matches_pointwise_kernel() {
    let prof = SigmaProfile::crossover(kappa(1.0), c(0.5, -0.8)).unwrap();
    let nodes = [-1.0, -0.9995, 0.0, 0.7, 3.0];
    let m = crossover_airy_matrix(&nodes, &prof).unwrap();
    for (i, &x) in nodes.iter().enumerate() {
        for (j, &y) in nodes.iter().enumerate() {
            let k = crossover_airy_kernel(x, y, &prof).unwrap();
            assert!((m[i * nodes.len() + j] - k).norm() < 1e-10);
        }
    }
}

#[test]
fn symmetrized_identity() {
    let p = params(1.0, 0.0, c(-1.0, 0.0));
    let prof = p.profile();
    let sp = p.s_prime();
    // half line: K_σ on L²(s', ∞)
    // K_σ(x, x) decays only like e^{−κx}
    let breaks: Vec<f64> = (0..=88).map(|k| sp + 0.5 * k as f64).collect();
    let rule = composite(&breaks, 12).unwrap();
    let km = crossover_airy_matrix(&rule.nodes, &prof).unwrap();
    let n = rule.len();
    let sw: Vec<Complex64> = rule.weights.iter().map(|w| c(w.sqrt(), 0.0)).collect();
    let weighted = DenseMatrix::from_fn(n, |i, j| sw[i] * km[i * n + j] * sw[j]);
    let half = NystromSystem::from_weighted(&weighted, sw.clone(), sw).unwrap().determinant();
    // full line: √σ K_Ai √σ; σ(x − s') < 1e-15 below s' − 44
    let lo = sp - 44.0;
    let nb = ((sp + 44.0 - lo) / 0.25).ceil() as usize;
    let breaks: Vec<f64> = (0..=nb).map(|k| lo + 0.25 * k as f64).collect();
    let rule = composite(&breaks, 10).unwrap();
    let n = rule.len();
    let ka = airy_kernel_matrix(&rule.nodes);
    let root: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| (prof.value(x - sp) * w).sqrt())
        .collect();
    let weighted = DenseMatrix::from_fn(n, |i, j| root[i] * ka[i * n + j] * root[j]);
    let full = NystromSystem::from_weighted(&weighted, root.clone(), root).unwrap().determinant();
    assert!((half - full).norm() < 1e-5, "{half} vs {full}");
    assert!(half.im.abs() < 1e-12);
    // pointwise form of the same kernel
    let x = 0.3;
    let y = -0.4;
    let direct = (prof.value(x - sp) * prof.value(y - sp)).sqrt() * airy_kernel(x, y);
    assert!((symmetrized_kernel(x, y, &p).unwrap() - direct).norm() < 1e-15);
}

#[test]
fn symmetrized_kernel_symmetric_for_real_mu() {
    let p = params(1.0, 0.3, c(-0.7, 0.0));
    for &(x, y) in &[(0.0, 1.0), (-3.0, 2.0), (5.0, -5.0)] {
        let a = symmetrized_kernel(x, y, &p).unwrap();
        let b = symmetrized_kernel(y, x, &p).unwrap();
        assert!((a - b).norm() <= 1e-15 * a.norm() && a.im == 0.0);
    }
}

#[test]
fn gumbel_kernel_matches_pv_route() {
    let (x, y) = (0.5, 0.2);
    let a = gumbel_kernel(x, y, 1.0).unwrap();
    let b = gumbel_kernel_pv(x, y, 1.0).unwrap();
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    let ba = gumbel_kernel(y, x, 1.0).unwrap();
    assert!((a - ba).abs() < 1e-6);
    assert!(gumbel_kernel(x, y, 0.0).is_err());
}

#[test]
fn cosecant_closed_form_matches_t_integral() {
    let cfg = ContourConfig::default();
    for &mu in &[c(-1.0, 0.0), c(2.0, 1.0)] {
        let p = params(1.0, 0.0, mu);
        let contour = ComplexContour::new(p.t, p.a(), &cfg).unwrap();
        let (zeta, eta_p) = (contour.zeta.nodes[7], contour.eta.nodes[40]);
        let f1 = csc_factor(zeta, eta_p, &p).unwrap();
        let f2 = csc_factor_t_integral(zeta, eta_p, &p).unwrap();
        assert!((f1 - f2).norm() < 1e-9 * (1.0 + f1.norm()));
        let (eta, eta_p) = (contour.eta.nodes[20], contour.eta.nodes[33]);
        let k1 = cosecant_kernel(eta, eta_p, &p, &contour.zeta).unwrap();
        let k2 = cosecant_kernel_t_integral(eta, eta_p, &p, &contour.zeta).unwrap();
        assert!((k1 - k2).norm() < 1e-6, "mu = {mu}: {k1} vs {k2}");
    }
}

#[test]
fn contour_geometry() {
    let contour = ComplexContour::new(0.25, -1.0, &ContourConfig::default()).unwrap();
    let cb = 2f64.cbrt();
    for z in contour.zeta.nodes.iter().step_by(7) {
        for e in &contour.eta.nodes {
            assert!(((-(z - e) * cb).re - 0.5).abs() < 1e-14);
        }
    }
}

#[test]
fn cubic_factor_decays_on_zeta_contour() {
    let t = 1.0;
    let mag = |r: f64| (-t / 3.0 * c(-C3 / 2.0, r).powi(3)).exp().norm();
    let mut prev = mag(5.0);
    for k in 1..200 {
        let r = 5.0 + 0.05 * k as f64;
        let m = mag(r);
        assert!(m < prev);
        assert!((mag(-r) - m).abs() <= 1e-12 * m);
        prev = m;
    }
}

#[test]
fn cosecant_truncation_doubling() {
    let p = params(1.0, 0.0, c(-1.0, 0.0));
    let base = ContourConfig::default();
    let r = base.truncation(p.t);
    let short = ComplexContour::new(p.t, p.a(), &base).unwrap();
    let long = ComplexContour::new(p.t, p.a(), &ContourConfig { r_max: Some(2.0 * r), ..base }).unwrap();
    let (eta, eta_p) = (c(C3 / 2.0, 0.3), c(C3 / 2.0, -0.8));
    let a = cosecant_kernel(eta, eta_p, &p, &short.zeta).unwrap();
    let b = cosecant_kernel(eta, eta_p, &p, &long.zeta).unwrap();
    assert!((a - b).norm() < 1e-7);
}

#[test]
fn csc_pole_guard() {
    let p = params(1.0, 0.0, c(-1.0, 0.0));
    let z = c(0.0, 0.2);
    assert_eq!(csc_factor(z, z, &p), Err(Error::CscPole));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn crossover_kernel_symmetric(x in -4.0f64..4.0, y in -4.0f64..4.0, re in -2.0f64..2.0, im in 0.1f64..2.0) {
        let prof = SigmaProfile::crossover(kappa(1.0), c(re, im)).unwrap();
        let a = crossover_airy_kernel(x, y, &prof).unwrap();
        let b = crossover_airy_kernel(y, x, &prof).unwrap();
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn airy_kernel_symmetric(x in -6.0f64..6.0, y in -6.0f64..6.0) {
        prop_assert!((airy_kernel(x, y) - airy_kernel(y, x)).abs() < 1e-14);
    }
}
