//! `compare` suites: one row per criterion with the measured value, its
//! tolerance and the verdict.

use kpz_crossover::crossover::{
    f_gue_with, f_t, f_t_gumbel_grid, variance_constant, EvalConfig, FtValue, Method,
    VARIANCE_CONSTANT,
};
use kpz_crossover::kernels::SigmaProfile;
use kpz_crossover::painleve::{half_line_det, real_profile, solve_q, PainleveConfig};
use kpz_crossover::wasep::{sample_cdf, two_sample_ks, EmpiricalCdf, WasepParams};

use crate::commands::{scan, sim_settings, Limit, LOG_DET_DELTA};
use crate::config::{parse_grid, Settings};
use crate::output::Table;
use crate::{Failure, Suite};

struct Report {
    table: Table,
    failed: bool,
}

impl Report {
    fn new(suite: Suite) -> Self {
        let mut table = Table::new(&["criterion", "measured", "tolerance", "pass"]);
        table.meta("suite", suite.name());
        Self { table, failed: false }
    }

    /// `measured <= tolerance`.
    fn at_most(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        self.check(name, measured, tolerance, measured <= tolerance);
    }

    fn check(&mut self, name: impl Into<String>, measured: f64, tolerance: f64, pass: bool) {
        let name: String = name.into();
        self.failed |= !pass;
        self.table
            .push(vec![name.as_str().into(), measured.into(), tolerance.into(), pass.into()]);
    }

    fn finish(self) -> Result<Table, Failure> {
        if self.failed {
            Err(Failure::Acceptance(self.table))
        } else {
            Ok(self.table)
        }
    }
}

pub fn run(suite: Suite, s: &Settings) -> Result<Table, Failure> {
    let mut rep = Report::new(suite);
    match suite {
        Suite::CrossFormula => cross_formula(&mut rep, s)?,
        Suite::TwLimit => limit(&mut rep, s, Limit::TracyWidom)?,
        Suite::GaussLimit => limit(&mut rep, s, Limit::Gaussian)?,
        Suite::PainleveOracle => painleve_oracle(&mut rep, s)?,
        Suite::WasepKs => wasep_ks(&mut rep, s)?,
        Suite::VarianceConstant => variance(&mut rep)?,
    }
    rep.finish()
}

fn times(s: &Settings, default: &[f64]) -> Result<Vec<f64>, Failure> {
    Ok(match s.time()? {
        Some(t) => vec![t],
        None => default.to_vec(),
    })
}

fn sup_diff(a: &[FtValue], b: &[FtValue]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.value - y.value).abs()).fold(0.0, f64::max)
}

fn cross_formula(rep: &mut Report, s: &Settings) -> Result<(), Failure> {
    let cfg = s.eval_config()?;
    let grid = s.s_values(Some("-4:2:1"))?;
    let num = Failure::numeric("crossover");
    for t in times(s, &[0.25, 1.0, 10.0])? {
        let airy = f_t(Method::Airy, t, &grid, &cfg).map_err(&num)?;
        let csc = f_t(Method::Csc, t, &grid, &cfg).map_err(&num)?;
        let gumbel = f_t(Method::Gumbel, t, &grid, &cfg).map_err(&num)?;
        rep.at_most(format!("T={t} max|airy-csc|"), sup_diff(&airy, &csc), 1e-3);
        rep.at_most(format!("T={t} max|airy-gumbel|"), sup_diff(&airy, &gumbel), 5e-3);
        let res = airy.iter().chain(&csc).map(|v| v.residual).fold(0.0, f64::max);
        rep.check(format!("T={t} max imag residual"), res, 1e-6, res < 1e-6);
    }
    Ok(())
}

fn limit(rep: &mut Report, s: &Settings, kind: Limit) -> Result<(), Failure> {
    let (t_default, ratio, grid) = match kind {
        Limit::TracyWidom => (200.0, 0.25, "-3:1:0.1"),
        Limit::Gaussian => (1e-3, 100.0, "-2:2:0.1"),
    };
    let t = s.time()?.unwrap_or(t_default);
    let t_ref = t * ratio;
    let grid = s.s_values(Some(grid))?;
    for m in s.methods("gumbel")? {
        let sup = scan(kind, m, t, &grid, s)?.sup;
        let sup_ref = scan(kind, m, t_ref, &grid, s)?.sup;
        rep.at_most(format!("{} T={t} sup deviation", m.name()), sup, 0.02);
        rep.check(
            format!("{} sup deviation at T={t_ref} exceeds it", m.name()),
            sup_ref,
            sup,
            sup_ref > sup,
        );
    }
    Ok(())
}

fn painleve_oracle(rep: &mut Report, s: &Settings) -> Result<(), Failure> {
    let cfg: PainleveConfig = s.painleve_config()?;
    let num = Failure::numeric("painleve");
    let hm = solve_q(&SigmaProfile::Step, &cfg).map_err(&num)?;
    let gue = f_gue_with(0.0, 80).map_err(Failure::numeric("fredholm"))?;
    rep.at_most("F_GUE(0) vs step-profile route", (hm.det_from_q(0.0).map_err(&num)? - gue).abs(), 5e-4);
    let mus = match s.f64("mu")? {
        Some(mu) => vec![mu],
        None => vec![-0.5, -1.0, -2.0],
    };
    let r_grid = parse_grid("r_grid", s.get("r_grid").unwrap_or("-1:1:1"))?;
    for t in times(s, &[1.0, 10.0])? {
        for &mu in &mus {
            let prof = real_profile(t, mu).map_err(&num)?;
            let field = solve_q(&prof, &cfg).map_err(&num)?;
            let (mut dual, mut ident) = (0.0f64, 0.0f64);
            for &r in &r_grid {
                let fd = half_line_det(&prof, r).map_err(Failure::numeric("fredholm"))?;
                dual = dual.max((field.det_from_q(r).map_err(&num)? - fd).abs());
                let second = field.log_det_second_difference(r, LOG_DET_DELTA).map_err(&num)?;
                ident = ident.max((second + field.sigma_q2(r).map_err(&num)?).abs());
            }
            rep.at_most(format!("T={t} mu={mu} |det_from_q - fredholm|"), dual, 1e-3);
            rep.at_most(format!("T={t} mu={mu} second log-derivative identity"), ident, 1e-4);
        }
    }
    Ok(())
}

/// `F_T` interpolated by evaluating exactly at the support and cell edges.
fn ks_to_law(cdf: &EmpiricalCdf, cfg: &EvalConfig) -> Result<f64, Failure> {
    let d = cdf.lattice_spacing();
    let mut pts: Vec<f64> = cdf
        .support()
        .iter()
        .flat_map(|&v| [v - 0.5 * d, v, v + 0.5 * d])
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let vals = f_t_gumbel_grid(cdf.params.t, &pts, cfg).map_err(Failure::numeric("crossover"))?;
    Ok(cdf.ks_distance(|x| {
        let i = pts.partition_point(|&p| p < x);
        vals[i.min(vals.len() - 1)].value
    }))
}

fn wasep_ks(rep: &mut Report, s: &Settings) -> Result<(), Failure> {
    let mut sim = sim_settings(s)?;
    if !s.contains("n_samples") {
        sim.n = 20_000;
    }
    let cfg = s.eval_config()?;
    let p = sim.params;
    let num = Failure::numeric("wasep");
    rep.table.meta("seed", sim.seed);
    let main = sample_cdf(&p, sim.n, sim.seed).map_err(&num)?;
    let ks = ks_to_law(&main, &cfg)?;
    rep.at_most(format!("eps={} KS to F_T", p.epsilon), ks, 0.08);
    let mut ladder = Vec::new();
    for (k, eps) in [2.0 * p.epsilon, p.epsilon, 0.5 * p.epsilon].into_iter().enumerate() {
        if eps == p.epsilon {
            ladder.push(ks);
            continue;
        }
        let q = WasepParams::new(eps, p.t, p.x).map_err(&num)?;
        let c = sample_cdf(&q, sim.n, sim.seed.wrapping_add(k as u64 + 1)).map_err(&num)?;
        ladder.push(ks_to_law(&c, &cfg)?);
    }
    rep.check(
        format!("KS at eps={} (below KS at eps={})", 0.5 * p.epsilon, 2.0 * p.epsilon),
        ladder[2],
        ladder[0],
        ladder[2] < ladder[1] && ladder[1] < ladder[0],
    );
    let shifted = WasepParams::new(p.epsilon, p.t, p.x + 0.5).map_err(&num)?;
    let other = sample_cdf(&shifted, sim.n, sim.seed.wrapping_add(7)).map_err(&num)?;
    rep.at_most(
        format!("KS(X={}, X={})", p.x, p.x + 0.5),
        two_sample_ks(main.sorted(), other.sorted()),
        0.03,
    );
    Ok(())
}

fn variance(rep: &mut Report) -> Result<(), Failure> {
    let num = Failure::numeric("crossover");
    let base = variance_constant(1.0, 0.0).map_err(&num)?;
    rep.at_most("|value - sqrt(pi)/2|", (base - VARIANCE_CONSTANT).abs(), 1e-6);
    for (t, x) in [(1.0, 1.0), (4.0, 0.0), (0.25, -2.0)] {
        let v = variance_constant(t, x).map_err(&num)?;
        rep.at_most(format!("shift to T={t} X={x}"), (v - base).abs(), 1e-6);
    }
    Ok(())
}
