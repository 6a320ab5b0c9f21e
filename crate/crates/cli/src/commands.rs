use kpz_crossover::crossover::{
    f_t, gaussian_limit_scan, tracy_widom_limit_scan, EvalConfig, LimitScan, Method,
};
use kpz_crossover::kernels::SigmaProfile;
use kpz_crossover::painleve::{half_line_det, real_profile, solve_q};
use kpz_crossover::wasep::{sample_cdf, WasepParams};

use crate::config::{parse_grid, Settings};
use crate::output::{fmt_f64, Table};
use crate::Failure;

pub const DEFAULT_TABLE_GRID: &str = "-8:6:0.25";
pub const DEFAULT_TW_GRID: &str = "-3:1:0.1";
pub const DEFAULT_GAUSS_GRID: &str = "-2:2:0.1";
pub const DEFAULT_R_GRID: &str = "-2:2:0.5";

/// Prepends version, command and the merged config to the metadata.
pub fn header(table: &mut Table, command: &str, s: &Settings) {
    let mut meta = vec![
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), command.to_string()),
    ];
    for (k, v) in s.entries() {
        if k != "output" && k != "threads" {
            meta.push((format!("config.{k}"), v.to_string()));
        }
    }
    meta.append(&mut table.meta);
    table.meta = meta;
}

pub fn require_t(s: &Settings) -> Result<f64, Failure> {
    s.time()?
        .ok_or_else(|| Failure::Usage("missing required --T".into()))
}

fn eval_config(s: &Settings) -> Result<EvalConfig, Failure> {
    Ok(s.eval_config()?)
}

/// `eval` and `table`: one row per `(method, s)`, `s` ascending.
pub fn eval(s: &Settings, table_mode: bool) -> Result<Table, Failure> {
    let t = require_t(s)?;
    let grid = s.s_values(table_mode.then_some(DEFAULT_TABLE_GRID))?;
    let methods = s.methods("gumbel")?;
    let cfg = eval_config(s)?;
    let mut columns = vec!["T", "s", "method", "value", "imag_residual", "nodes"];
    if table_mode {
        columns.push("increment");
    }
    let mut out = Table::new(&columns);
    for m in methods {
        let values = f_t(m, t, &grid, &cfg).map_err(Failure::numeric("crossover"))?;
        let mut prev: Option<f64> = None;
        let (mut max_res, mut max_dec) = (0.0f64, 0.0f64);
        for v in &values {
            let mut row = vec![
                t.into(),
                v.s.into(),
                m.name().into(),
                v.value.into(),
                v.residual.into(),
                v.nodes.into(),
            ];
            if table_mode {
                let inc = prev.map_or(0.0, |p| v.value - p);
                row.push(inc.into());
                max_dec = max_dec.max(-inc);
            }
            max_res = max_res.max(v.residual);
            prev = Some(v.value);
            out.push(row);
        }
        if table_mode {
            out.meta(format!("max_residual.{}", m.name()), fmt_f64(max_res));
            out.meta(format!("max_decrease.{}", m.name()), fmt_f64(max_dec));
        }
    }
    Ok(out)
}

pub struct SimSettings {
    pub params: WasepParams,
    pub n: usize,
    pub seed: u64,
}

pub fn sim_settings(s: &Settings) -> Result<SimSettings, Failure> {
    let eps = s.f64("epsilon")?.unwrap_or(0.1);
    let t = s.time()?.unwrap_or(0.5);
    let x = s.f64("X")?.unwrap_or(0.0);
    let n = s.usize("n_samples")?.unwrap_or(1000);
    let seed = s.u64("seed")?.unwrap_or(0);
    let params = WasepParams::new(eps, t, x).map_err(Failure::numeric("wasep"))?;
    Ok(SimSettings { params, n, seed })
}

pub fn simulate(s: &Settings) -> Result<Table, Failure> {
    let sim = sim_settings(s)?;
    let cdf = sample_cdf(&sim.params, sim.n, sim.seed).map_err(Failure::numeric("wasep"))?;
    let p = &sim.params;
    let mut out = Table::new(&["replica_index", "seed", "h", "F_eps_plus_shift"]);
    out.meta("seed", sim.seed);
    out.meta("epsilon", p.epsilon);
    out.meta("T", p.t);
    out.meta("X", p.x);
    out.meta("n_samples", sim.n);
    out.meta("site", p.site());
    out.meta("window", p.window());
    out.meta("lattice_spacing", fmt_f64(cdf.lattice_spacing()));
    for r in &cdf.replicas {
        out.push(vec![r.index.into(), r.seed.into(), r.h.into(), r.value.into()]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    TracyWidom,
    Gaussian,
}

/// Tail used by the Gaussian scan when `gumbel.tail` is not set: at small
/// `T` the default range is needlessly wide.
pub fn gauss_config(s: &Settings, t: f64) -> Result<EvalConfig, Failure> {
    let mut cfg = eval_config(s)?;
    if t < 0.01 && !s.contains("gumbel.tail") {
        cfg.gumbel.tail = 12.0;
    }
    Ok(cfg)
}

pub fn scan(kind: Limit, method: Method, t: f64, grid: &[f64], s: &Settings) -> Result<LimitScan, Failure> {
    match kind {
        Limit::TracyWidom => tracy_widom_limit_scan(method, t, grid, &eval_config(s)?),
        Limit::Gaussian => gaussian_limit_scan(method, t, grid, &gauss_config(s, t)?),
    }
    .map_err(Failure::numeric("crossover"))
}

pub fn limit(s: &Settings, kind: Limit) -> Result<Table, Failure> {
    let t = require_t(s)?;
    let default = match kind {
        Limit::TracyWidom => DEFAULT_TW_GRID,
        Limit::Gaussian => DEFAULT_GAUSS_GRID,
    };
    let grid = s.s_values(Some(default))?;
    let reference = match kind {
        Limit::TracyWidom => "F_GUE",
        Limit::Gaussian => "Phi",
    };
    let mut out = Table::new(&["T", "s", "method", "F_T", reference, "deviation"]);
    for m in s.methods("gumbel")? {
        let sc = scan(kind, m, t, &grid, s)?;
        for &(x, f, r) in &sc.points {
            out.push(vec![t.into(), x.into(), m.name().into(), f.into(), r.into(), (f - r).abs().into()]);
        }
        out.meta(format!("sup_deviation.{}", m.name()), fmt_f64(sc.sup));
    }
    Ok(out)
}

pub fn profile(s: &Settings) -> Result<SigmaProfile, Failure> {
    match s.time()? {
        Some(t) => {
            let mu = s.f64("mu")?.unwrap_or(-1.0);
            real_profile(t, mu).map_err(Failure::numeric("painleve"))
        }
        None if s.contains("mu") => Err(Failure::Usage("--mu needs --T".into())),
        None => Ok(SigmaProfile::Step),
    }
}

/// Finite-difference step of the second log-derivative identity.
pub const LOG_DET_DELTA: f64 = 0.05;

pub fn painleve(s: &Settings) -> Result<Table, Failure> {
    let prof = profile(s)?;
    let cfg = s.painleve_config()?;
    let grid = parse_grid("r_grid", s.get("r_grid").unwrap_or(DEFAULT_R_GRID))?;
    let field = solve_q(&prof, &cfg).map_err(Failure::numeric("painleve"))?;
    let mut out = Table::new(&[
        "r",
        "det_from_q",
        "fredholm_det",
        "abs_diff",
        "sigma_q2",
        "log_det_second_difference",
        "identity_residual",
    ]);
    out.meta("profile", if matches!(prof, SigmaProfile::Step) { "step" } else { "crossover" });
    out.meta("picard_iterations", field.residuals.len());
    out.meta(
        "picard_residual",
        fmt_f64(field.residuals.last().copied().unwrap_or(0.0)),
    );
    out.meta("r_range", format!("[{}, {}]", field.r_min(), field.r_max()));
    let num = Failure::numeric("painleve");
    for &r in &grid {
        let dq = field.det_from_q(r).map_err(&num)?;
        let fd = half_line_det(&prof, r).map_err(Failure::numeric("fredholm"))?;
        let q2 = field.sigma_q2(r).map_err(&num)?;
        let second = field.log_det_second_difference(r, LOG_DET_DELTA).map_err(&num)?;
        out.push(vec![
            r.into(),
            dq.into(),
            fd.into(),
            (dq - fd).abs().into(),
            q2.into(),
            second.into(),
            (second + q2).abs().into(),
        ]);
    }
    Ok(out)
}
