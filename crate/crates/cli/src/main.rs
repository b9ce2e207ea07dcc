//! `nls5` command-line front end.
//!
//! Exit codes: 0 success, 1 validation or simulation failure, 2 bad input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nls5::evolve::Scheme;
use nls5::presets::Reduction;
use nls5::{Complex64, ModelCoefficients};

mod config;
mod figures;
mod output;
mod parse;
mod simulate;
mod soliton;
mod validate;

use config::{RunConfig, Suite};

/// Errors sorted by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Malformed flags, config or spectral data.
    Input(anyhow::Error),
    /// The computation itself failed.
    Run(anyhow::Error),
}

pub type Result<T> = std::result::Result<T, Failure>;

pub fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

pub fn failed(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Run(e.into())
}

/// Grid and decay problems are the caller's to fix; the rest are failures.
pub fn field_error(e: nls5::field::FieldError) -> Failure {
    use nls5::field::FieldError::*;
    match e {
        InvalidGrid(_) | DomainTooSmall { .. } | LengthMismatch { .. } | Parse(_) => input(e),
        _ => failed(e),
    }
}

#[derive(Debug, Parser)]
#[command(name = "nls5", version, about = "Exact N-soliton solutions of the fifth-order NLS equation and their validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample an exact soliton on a grid and summarise amplitude and velocity.
    Soliton {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Output times: `t1,t2,...` or `start:step:end`.
        #[arg(long = "t", value_parser = parse::times, allow_hyphen_values = true)]
        times: Option<parse::Times>,
    },
    /// Residual, zero-curvature, conservation and convergence checks.
    Validate {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        /// Spectral parameter of the Lax pair (repeatable).
        #[arg(long = "zeta", value_parser = parse::complex, allow_hyphen_values = true)]
        zetas: Vec<Complex64>,
        /// Times at which to check: `t1,t2,...` or `start:step:end`.
        #[arg(long = "t", value_parser = parse::times, allow_hyphen_values = true)]
        times: Option<parse::Times>,
        /// Step of the time finite differences.
        #[arg(long)]
        dt_fd: Option<f64>,
        /// Base step of the convergence runs.
        #[arg(long)]
        dt: Option<f64>,
        /// Length of the convergence runs.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Evolve initial data numerically.
    Simulate {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        dt: Option<f64>,
        /// Length of the run, counted from the start time.
        #[arg(long)]
        t_end: Option<f64>,
        /// Start time for exact initial data.
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Initial frame CSV (`x,t,re,im,abs`) instead of spectral data.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Record the error against the exact solution for every stored frame.
        #[arg(long)]
        compare_exact: bool,
        #[arg(long, value_parser = parse::scheme)]
        scheme: Option<Scheme>,
        /// Store every n-th step.
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Plot-ready data for Figures 1-5.
    Figures {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        figure: Option<u32>,
        /// Time axis: `t1,t2,...` or `start:step:end`.
        #[arg(long = "t", value_parser = parse::times, allow_hyphen_values = true)]
        times: Option<parse::Times>,
    },
}

#[derive(Debug, Args)]
struct IoArgs {
    /// JSON config: spectral data plus `grid`, `integrator`, `output`, `validate`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    preset: Option<String>,
    /// `c3,c4,c5`.
    #[arg(long, value_parser = parse::coeffs, allow_hyphen_values = true)]
    coeffs: Option<ModelCoefficients>,
    /// Switch coefficients off to reach an integrable reduction.
    #[arg(long, value_parser = parse::reduction)]
    reduce: Option<Reduction>,
}

#[derive(Debug, Args)]
struct SpectralArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Eigenvalue `RE+IMi` (repeatable).
    #[arg(long = "zeta", value_parser = parse::complex, allow_hyphen_values = true)]
    zetas: Vec<Complex64>,
    /// Norming constant alpha of each soliton, in `--zeta` order.
    #[arg(long = "alpha-k", value_parser = parse::complex, allow_hyphen_values = true)]
    alphas: Vec<Complex64>,
    /// Norming constant beta of each soliton, in `--zeta` order.
    #[arg(long = "beta-k", value_parser = parse::complex, allow_hyphen_values = true)]
    betas: Vec<Complex64>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
}

impl IoArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output.dir = Some(out.clone());
        }
        Ok(cfg)
    }
}

impl ModelArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.preset {
            cfg.preset = Some(p.clone());
        }
        if let Some(k) = self.coeffs {
            cfg.coeffs = Some(k);
        }
    }
}

impl SpectralArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        self.model.apply(cfg);
        cfg.override_data(&self.zetas, &self.alphas, &self.betas)?;
        cfg.reduce(self.model.reduce)
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.grid.x_min = self.xmin.or(cfg.grid.x_min);
        cfg.grid.x_max = self.xmax.or(cfg.grid.x_max);
        cfg.grid.n = self.nx.or(cfg.grid.n);
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Soliton { io, spectral, grid, times } => {
            let mut cfg = io.load()?;
            spectral.apply(&mut cfg)?;
            grid.apply(&mut cfg);
            cfg.output.times = times.map(|t| t.0).or(cfg.output.times);
            soliton::run(cfg)
        }
        Command::Validate { io, model, grid, suite, zetas, times, dt_fd, dt, horizon } => {
            let mut cfg = io.load()?;
            model.apply(&mut cfg);
            cfg.reduce(model.reduce)?;
            grid.apply(&mut cfg);
            cfg.output.times = times.map(|t| t.0).or(cfg.output.times);
            let v = &mut cfg.validate;
            v.suite = suite.or(v.suite);
            if !zetas.is_empty() {
                v.zetas = Some(zetas.iter().map(|z| [z.re, z.im]).collect());
            }
            v.dt_fd = dt_fd.or(v.dt_fd);
            v.horizon = horizon.or(v.horizon);
            cfg.integrator.dt = dt.or(cfg.integrator.dt);
            validate::run(cfg)
        }
        Command::Simulate { io, spectral, grid, dt, t_end, from, init, compare_exact, scheme, stride } => {
            let mut cfg = io.load()?;
            spectral.apply(&mut cfg)?;
            grid.apply(&mut cfg);
            let s = &mut cfg.integrator;
            s.dt = dt.or(s.dt);
            s.duration = t_end.or(s.duration);
            s.t_start = from.or(s.t_start);
            s.init = init.or(s.init.take());
            s.scheme = scheme.or(s.scheme);
            s.monitor_stride = stride.or(s.monitor_stride);
            if compare_exact {
                s.compare_exact = Some(true);
            }
            simulate::run(cfg)
        }
        Command::Figures { io, grid, figure, times } => {
            let mut cfg = io.load()?;
            grid.apply(&mut cfg);
            cfg.figure = figure.or(cfg.figure);
            cfg.output.times = times.map(|t| t.0).or(cfg.output.times);
            figures::run(cfg)
        }
    }
}

/// `NLS5_THREADS` caps the worker pool; 0 or unset means one per core.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("NLS5_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| anyhow::anyhow!("NLS5_THREADS must be a non-negative integer, got {raw:?}"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
