use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

mod commands;
mod compare;
mod config;
mod output;

use config::{ConfigError, Settings};
use output::{Format, Table};

/// Directory for output files; relative `--output` paths resolve against it.
pub const OUT_DIR_ENV: &str = "KPZ_CROSSOVER_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "kpz-crossover", version, about = "KPZ crossover distribution F_T(s): evaluation, limits, Painleve route and WASEP sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` config file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Output file (default stdout, or `<command>.<format>` in $KPZ_CROSSOVER_OUT_DIR).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Numeric override, e.g. `--set gumbel.tail=12`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// `start:stop:step`, inclusive.
    #[arg(long = "s-grid", allow_hyphen_values = true)]
    s_grid: Option<String>,
    /// airy, csc, gumbel or all.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args, Debug, Default)]
struct SimArgs {
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long = "X", allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long = "n-samples")]
    n_samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// F_T(s) at a point or on a grid.
    Eval(GridArgs),
    /// F_T on a grid with monotonicity and residual diagnostics.
    Table(GridArgs),
    /// Runs an acceptance suite; exit 1 if a criterion fails.
    Compare {
        suite: Suite,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long = "X", allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long = "n-samples")]
        n_samples: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// WASEP replicas of F_eps(T, X) + T/24.
    Simulate(SimArgs),
    /// Deviation of F_T(T^{1/3} s) from F_GUE(2^{1/3} s).
    TwLimit(GridArgs),
    /// Deviation of F_T(2^{-1/2} pi^{1/4} T^{1/4} s) from Phi(s).
    GaussLimit(GridArgs),
    /// Integrable-system route for det(I - K_sigma) against the Fredholm determinant.
    Painleve {
        /// Omit for the step profile (F_GUE).
        #[arg(long = "T", allow_hyphen_values = true)]
        t: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long = "r-grid", allow_hyphen_values = true)]
        r_grid: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    CrossFormula,
    TwLimit,
    GaussLimit,
    PainleveOracle,
    WasepKs,
    VarianceConstant,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::CrossFormula => "cross-formula",
            Suite::TwLimit => "tw-limit",
            Suite::GaussLimit => "gauss-limit",
            Suite::PainleveOracle => "painleve-oracle",
            Suite::WasepKs => "wasep-ks",
            Suite::VarianceConstant => "variance-constant",
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical {
        module: &'static str,
        error: kpz_crossover::Error,
    },
    Acceptance(Table),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.0)
    }
}

impl Failure {
    /// Maps a library error raised inside `module`; invalid parameters are
    /// configuration errors.
    pub fn numeric(module: &'static str) -> impl Fn(kpz_crossover::Error) -> Failure {
        move |error| match error {
            kpz_crossover::Error::InvalidParameter(msg) => Failure::Usage(msg),
            kpz_crossover::Error::NonConvergence { module: m, .. } => Failure::Numerical { module: m, error },
            error => Failure::Numerical { module, error },
        }
    }
}

fn put(settings: &mut Settings, key: &str, value: &Option<String>) -> Result<(), ConfigError> {
    match value {
        Some(v) => settings.set(key, v.clone()),
        None => Ok(()),
    }
}

impl GridArgs {
    fn apply(&self, s: &mut Settings) -> Result<(), ConfigError> {
        put(s, "T", &self.t)?;
        put(s, "s", &self.s)?;
        put(s, "s_grid", &self.s_grid)?;
        put(s, "method", &self.method)
    }
}

impl SimArgs {
    fn apply(&self, s: &mut Settings) -> Result<(), ConfigError> {
        put(s, "epsilon", &self.epsilon)?;
        put(s, "T", &self.t)?;
        put(s, "X", &self.x)?;
        put(s, "n_samples", &self.n_samples)?;
        put(s, "seed", &self.seed)
    }
}

fn settings(cli: &Cli) -> Result<Settings, ConfigError> {
    let mut s = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    for pair in &cli.set {
        s.set_pair(pair)?;
    }
    match &cli.command {
        Command::Eval(g) | Command::Table(g) | Command::TwLimit(g) | Command::GaussLimit(g) => g.apply(&mut s)?,
        Command::Compare {
            grid,
            mu,
            epsilon,
            x,
            n_samples,
            seed,
            ..
        } => {
            grid.apply(&mut s)?;
            SimArgs {
                epsilon: epsilon.clone(),
                t: None,
                x: x.clone(),
                n_samples: n_samples.clone(),
                seed: seed.clone(),
            }
            .apply(&mut s)?;
            put(&mut s, "mu", mu)?;
        }
        Command::Simulate(sim) => sim.apply(&mut s)?,
        Command::Painleve { t, mu, r_grid } => {
            put(&mut s, "T", t)?;
            put(&mut s, "mu", mu)?;
            put(&mut s, "r_grid", r_grid)?;
        }
    }
    put(&mut s, "format", &cli.format)?;
    put(&mut s, "threads", &cli.threads.map(|n| n.to_string()))?;
    put(&mut s, "output", &cli.output.as_ref().map(|p| p.display().to_string()))?;
    Ok(s)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Eval(_) => "eval",
        Command::Table(_) => "table",
        Command::Compare { .. } => "compare",
        Command::Simulate(_) => "simulate",
        Command::TwLimit(_) => "tw-limit",
        Command::GaussLimit(_) => "gauss-limit",
        Command::Painleve { .. } => "painleve",
    }
}

fn destination(s: &Settings, name: &str, format: Format) -> Option<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match (s.get("output").map(PathBuf::from), dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p),
        (None, Some(d)) => Some(d.join(format!("{name}.{}", format.extension()))),
        (None, None) => None,
    }
}

fn emit(table: &Table, s: &Settings, name: &str) -> Result<(), Failure> {
    let format = Format::parse(s.get("format").unwrap_or("csv"))
        .ok_or_else(|| Failure::Usage("format must be csv or json".into()))?;
    let io_err = |e: io::Error| Failure::Usage(format!("cannot write output: {e}"));
    match destination(s, name, format) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(io_err)?;
            }
            let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
            table.write(format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(format, &mut w).map_err(io_err)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let s = settings(cli)?;
    if let Some(n) = s.usize("threads")? {
        if n == 0 {
            return Err(Failure::Usage("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    let name = command_name(&cli.command);
    let result = match &cli.command {
        Command::Eval(_) => commands::eval(&s, false),
        Command::Table(_) => commands::eval(&s, true),
        Command::Compare { suite, .. } => compare::run(*suite, &s),
        Command::Simulate(_) => commands::simulate(&s),
        Command::TwLimit(_) => commands::limit(&s, commands::Limit::TracyWidom),
        Command::GaussLimit(_) => commands::limit(&s, commands::Limit::Gaussian),
        Command::Painleve { .. } => commands::painleve(&s),
    };
    let mut table = match result {
        Ok(t) => t,
        Err(Failure::Acceptance(mut t)) => {
            commands::header(&mut t, name, &s);
            emit(&t, &s, name)?;
            return Err(Failure::Acceptance(t));
        }
        Err(e) => return Err(e),
    };
    commands::header(&mut table, name, &s);
    emit(&table, &s, name)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Acceptance(_)) => {
            eprintln!("error: acceptance criteria failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = Cli::command();
            cmd.build();
            let sub = command_name(&cli.command);
            let usage = cmd
                .find_subcommand_mut(sub)
                .map(|c| c.render_usage())
                .unwrap_or_else(|| Cli::command().render_usage());
            eprintln!("{usage}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Numerical { module, error }) => {
            eprintln!("error: numerical failure in module {module}: {error}");
            ExitCode::from(3)
        }
    }
}
