//! Flat `key = value` run configuration. Flags override the config file,
//! which overrides the defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use kpz_crossover::crossover::{EvalConfig, Method};
use kpz_crossover::painleve::PainleveConfig;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Run-level keys. Numeric overrides live under `mu_contour.`, `airy.`,
/// `csc.`, `gumbel.` and `painleve.`.
const RUN_KEYS: &[&str] = &[
    "T", "s", "s_grid", "method", "epsilon", "X", "n_samples", "seed", "mu", "r_grid", "output",
    "format", "threads",
];

const NUMERIC_KEYS: &[&str] = &[
    "mu_contour.x_max",
    "mu_contour.ray_panels",
    "mu_contour.ray_nodes_per_panel",
    "mu_contour.semicircle_nodes",
    "airy.tol",
    "airy.per_panel",
    "airy.oscillation",
    "airy.max_width",
    "airy.x_hi",
    "csc.r_max",
    "csc.per_panel",
    "csc.max_width",
    "csc.tol",
    "gumbel.per_panel",
    "gumbel.panel_width",
    "gumbel.tol",
    "gumbel.interp_degree",
    "gumbel.tail",
    "residual_threshold",
    "painleve.r_max",
    "painleve.r_min",
    "painleve.step",
    "painleve.relaxation",
    "painleve.tol",
    "painleve.max_iter",
    "painleve.window",
    "painleve.per_panel",
];

/// Merged settings; keys are sorted so the echo is deterministic.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        let key = key.trim();
        if !RUN_KEYS.contains(&key) && !NUMERIC_KEYS.contains(&key) {
            return err(format!("unknown config key `{key}`"));
        }
        self.map.insert(key.to_string(), value.into().trim().to_string());
        Ok(())
    }

    /// `key=value` as passed to `--set`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        match pair.split_once('=') {
            Some((k, v)) => self.set(k, v),
            None => err(format!("expected key=value, got `{pair}`")),
        }
    }

    /// Lines of `key = value`; `#` starts a comment, blank lines are skipped.
    pub fn parse_file_contents(text: &str) -> Result<Self, ConfigError> {
        let mut out = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("config line {}: expected key = value", n + 1));
            };
            out.set(k, v)
                .map_err(|e| ConfigError(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_contents(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| ConfigError(format!("{key}: expected a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| ConfigError(format!("{key}: expected a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    /// `T`, required and positive.
    pub fn time(&self) -> Result<Option<f64>, ConfigError> {
        match self.f64("T")? {
            Some(t) if !(t > 0.0 && t.is_finite()) => err(format!("T must be positive, got {t}")),
            t => Ok(t),
        }
    }

    /// `s` and `s_grid` are exclusive; the grid is returned ascending.
    pub fn s_values(&self, default: Option<&str>) -> Result<Vec<f64>, ConfigError> {
        match (self.get("s"), self.get("s_grid")) {
            (Some(_), Some(_)) => err("give either s or s_grid, not both"),
            (Some(s), None) => Ok(vec![parse_f64("s", s)?]),
            (None, Some(g)) => parse_grid("s_grid", g),
            (None, None) => match default {
                Some(g) => parse_grid("s_grid", g),
                None => err("missing s or s_grid"),
            },
        }
    }

    pub fn methods(&self, default: &str) -> Result<Vec<Method>, ConfigError> {
        let name = self.get("method").unwrap_or(default);
        if name == "all" {
            return Ok(vec![Method::Airy, Method::Csc, Method::Gumbel]);
        }
        Method::parse(name)
            .map(|m| vec![m])
            .ok_or_else(|| ConfigError(format!("unknown method `{name}` (airy, csc, gumbel, all)")))
    }

    pub fn eval_config(&self) -> Result<EvalConfig, ConfigError> {
        let mut c = EvalConfig::default();
        macro_rules! apply {
            ($key:literal, $field:expr, $kind:ident) => {
                if let Some(v) = self.$kind($key)? {
                    $field = v;
                }
            };
        }
        apply!("mu_contour.x_max", c.mu.x_max, f64);
        apply!("mu_contour.ray_panels", c.mu.ray_panels, usize);
        apply!("mu_contour.ray_nodes_per_panel", c.mu.ray_nodes_per_panel, usize);
        apply!("mu_contour.semicircle_nodes", c.mu.semicircle_nodes, usize);
        apply!("airy.tol", c.airy.tol, f64);
        apply!("airy.per_panel", c.airy.per_panel, usize);
        apply!("airy.oscillation", c.airy.oscillation, f64);
        apply!("airy.max_width", c.airy.max_width, f64);
        apply!("airy.x_hi", c.airy.x_hi, f64);
        if let Some(v) = self.f64("csc.r_max")? {
            c.csc.r_max = Some(v);
        }
        apply!("csc.per_panel", c.csc.per_panel, usize);
        apply!("csc.max_width", c.csc.max_width, f64);
        apply!("csc.tol", c.csc.tol, f64);
        apply!("gumbel.per_panel", c.gumbel.per_panel, usize);
        apply!("gumbel.panel_width", c.gumbel.panel_width, f64);
        apply!("gumbel.tol", c.gumbel.tol, f64);
        apply!("gumbel.interp_degree", c.gumbel.interp_degree, usize);
        apply!("gumbel.tail", c.gumbel.tail, f64);
        apply!("residual_threshold", c.residual_threshold, f64);
        Ok(c)
    }

    pub fn painleve_config(&self) -> Result<PainleveConfig, ConfigError> {
        let mut c = PainleveConfig::default();
        if let Some(v) = self.f64("painleve.r_max")? {
            c.r_max = Some(v);
        }
        if let Some(v) = self.f64("painleve.r_min")? {
            c.r_min = v;
        }
        if let Some(v) = self.f64("painleve.step")? {
            c.step = v;
        }
        if let Some(v) = self.f64("painleve.relaxation")? {
            c.relaxation = v;
        }
        if let Some(v) = self.f64("painleve.tol")? {
            c.tol = v;
        }
        if let Some(v) = self.usize("painleve.max_iter")? {
            c.max_iter = v;
        }
        if let Some(v) = self.f64("painleve.window")? {
            c.window = v;
        }
        if let Some(v) = self.usize("painleve.per_panel")? {
            c.per_panel = v;
        }
        Ok(c)
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("{key}: expected a finite number, got `{v}`")),
    }
}

/// `start:stop:step`, inclusive of `stop` up to rounding. Points are
/// `start + k step`, so equal specs give bit-identical grids.
pub fn parse_grid(key: &str, spec: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return err(format!("{key}: expected start:stop:step, got `{spec}`"));
    }
    let start = parse_f64(key, parts[0])?;
    let stop = parse_f64(key, parts[1])?;
    let step = parse_f64(key, parts[2])?;
    if !(step > 0.0) {
        return err(format!("{key}: step must be positive"));
    }
    if stop < start {
        return err(format!("{key}: stop {stop} is below start {start}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return err(format!("{key}: {n} points is too many"));
    }
    Ok((0..n).map(|k| start + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let g = parse_grid("s_grid", "-5:3:0.5").unwrap();
        assert_eq!(g.len(), 17);
        assert_eq!(g[0], -5.0);
        assert_eq!(g[16], 3.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(parse_grid("s_grid", "0:0:1").unwrap(), vec![0.0]);
        assert_eq!(parse_grid("s_grid", "-3:1:0.1").unwrap().len(), 41);
        assert!(parse_grid("s_grid", "1:0:0.1").is_err());
        assert!(parse_grid("s_grid", "0:1:0").is_err());
        assert!(parse_grid("s_grid", "0:1").is_err());
    }

    #[test]
    fn file_parsing() {
        let s = Settings::parse_file_contents(
            "# comment\nT = 2\n\nmethod=csc # trailing\ngumbel.tail = 12\n",
        )
        .unwrap();
        assert_eq!(s.get("T"), Some("2"));
        assert_eq!(s.get("method"), Some("csc"));
        assert_eq!(s.eval_config().unwrap().gumbel.tail, 12.0);
        assert!(Settings::parse_file_contents("bogus = 1").is_err());
        assert!(Settings::parse_file_contents("T 1").is_err());
    }

    #[test]
    fn validation() {
        let mut s = Settings::default();
        s.set("T", "-1").unwrap();
        assert!(s.time().is_err());
        s.set("T", "abc").unwrap();
        assert!(s.time().is_err());
        s.set("s", "0").unwrap();
        s.set("s_grid", "0:1:1").unwrap();
        assert!(s.s_values(None).is_err());
        s.set("method", "all").unwrap();
        assert_eq!(s.methods("gumbel").unwrap().len(), 3);
        s.set("method", "fourier").unwrap();
        assert!(s.methods("gumbel").is_err());
    }
}
