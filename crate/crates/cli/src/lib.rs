//! Command-line front end: runs the engines from a TOML configuration and
//! flag overrides and writes CSV series with JSON diagnostics.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hypsorb::{InitialCondition, Params, SampledProfile};

use config::{Axis, EngineKind, RunConfig, SweepConfig};

#[derive(Debug, Parser)]
#[command(
    name = "hypsorb",
    version,
    about = "Hyperbolic diffusion with surface adsorption"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one engine and write its series and diagnostics.
    Run(RunArgs),
    /// Run one engine for each value of a parameter.
    Sweep(SweepArgs),
    /// Run two engines and report their deviation.
    Compare(CompareArgs),
    /// Tabulate the eigenvalue functions on an α grid.
    EigenDump(EigenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IcKind {
    Step,
    Parabolic,
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineKind>,
    /// Desorption time.
    #[arg(long = "A")]
    pub a: Option<f64>,
    /// Relaxation time.
    #[arg(long = "B")]
    pub b: Option<f64>,
    /// Adsorption length.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Initial density.
    #[arg(long = "N0")]
    pub n0: Option<f64>,
    #[arg(long, value_enum, conflicts_with = "initial_file")]
    pub ic: Option<IcKind>,
    /// Two-column `z,value` profile on [-1/2, 1/2].
    #[arg(long)]
    pub initial_file: Option<PathBuf>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub nz: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub nt: Option<usize>,
    /// Time horizon.
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Probe positions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub probes: Option<Vec<f64>>,
    /// Output intervals over [0, T].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output directory; defaults to $HYPSORB_OUT_DIR, then `hypsorb-out`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Stem of the output files.
    #[arg(long)]
    pub name: Option<String>,
}

impl Common {
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let flags = [self.a, self.b, self.l, self.n0];
        if flags.iter().any(Option::is_some) {
            let mut p = if cfg.params.is_some() || cfg.physical.is_some() {
                cfg.params()?
            } else {
                match flags {
                    [Some(a), Some(b), Some(l), Some(n0)] => Params {
                        desorption_time: a,
                        relaxation_time: b,
                        adsorption_length: l,
                        initial_density: n0,
                    },
                    _ => bail!("without a config file, give all of --A, --B, --L and --N0"),
                }
            };
            for (axis, v) in [Axis::A, Axis::B, Axis::L, Axis::N0].into_iter().zip(flags) {
                if let Some(v) = v {
                    axis.set(&mut p, v);
                }
            }
            cfg.params = Some(p);
            cfg.physical = None;
        }
        if let Some(e) = self.engine {
            cfg.engine = e;
        }
        match self.ic {
            Some(IcKind::Step) => cfg.initial = InitialCondition::Step,
            Some(IcKind::Parabolic) => cfg.initial = InitialCondition::Parabolic,
            None => {}
        }
        if let Some(path) = &self.initial_file {
            let (z, v) = output::read_profile(path)?;
            let profile =
                SampledProfile::new(z, v).with_context(|| format!("profile {}", path.display()))?;
            cfg.initial = InitialCondition::Sampled(profile);
        }
        set(&mut cfg.modes, self.modes);
        set(&mut cfg.grid.n_z, self.nz);
        set(&mut cfg.samples, self.samples);
        if self.lambda.is_some() {
            cfg.grid.lambda = self.lambda;
        }
        if self.nt.is_some() {
            cfg.grid.n_t = self.nt;
        }
        if self.horizon.is_some() {
            cfg.grid.horizon = self.horizon;
        }
        if let Some(probes) = &self.probes {
            cfg.probes = probes.clone();
        }
        if self.out_dir.is_some() {
            cfg.output.dir = self.out_dir.clone();
        }
        if self.name.is_some() {
            cfg.output.name = self.name.clone();
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Clone, Args)]
pub struct AlphaGrid {
    #[arg(long, default_value_t = 0.01)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha_step: f64,
}

impl AlphaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let AlphaGrid {
            alpha_min: lo,
            alpha_max: hi,
            alpha_step: step,
        } = *self;
        if !(step > 0.0 && lo.is_finite() && hi >= lo) {
            bail!("alpha grid: need a positive step and alpha-max >= alpha-min");
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| lo + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also write the eigenvalue functions on the α grid.
    #[arg(long)]
    pub diagnostics: bool,
    #[command(flatten)]
    pub alpha: AlphaGrid,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl SweepArgs {
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = self.common.config()?;
        match (self.axis, self.values.clone(), cfg.sweep.take()) {
            (Some(axis), Some(values), _) => cfg.sweep = Some(SweepConfig { axis, values }),
            (axis, values, Some(s)) => {
                cfg.sweep = Some(SweepConfig {
                    axis: axis.unwrap_or(s.axis),
                    values: values.unwrap_or(s.values),
                })
            }
            (None, None, None) => {}
            _ => bail!("sweep needs both --axis and --values"),
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// The two engines to compare.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub engines: Option<Vec<EngineKind>>,
    /// Start of the comparison window.
    #[arg(long)]
    pub from: Option<f64>,
    /// Largest accepted max |Δσ| / σ_eq.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl CompareArgs {
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = self.common.config()?;
        if let Some(e) = &self.engines {
            let [a, b] = e[..] else {
                bail!("--engines takes two engines, e.g. `spectral,fdm`");
            };
            cfg.compare.engines = [a, b];
        }
        set(&mut cfg.compare.from, self.from);
        set(&mut cfg.compare.tolerance, self.tolerance);
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct EigenArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub alpha: AlphaGrid,
}

/// Executes a parsed command line. Returns `false` when a comparison fails.
pub fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            let grid = args.diagnostics.then(|| args.alpha.points()).transpose()?;
            for path in commands::run(args.common.config()?, grid)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Sweep(args) => {
            let index = commands::sweep(args.config()?, args.jobs)?;
            println!("{}", index.display());
            Ok(true)
        }
        Command::Compare(args) => {
            let done = commands::compare(args.config()?)?;
            println!("{}", done.report);
            println!("{}", if done.pass { "PASS" } else { "FAIL" });
            for path in &done.paths {
                println!("{}", path.display());
            }
            Ok(done.pass)
        }
        Command::EigenDump(args) => {
            let path = commands::eigen(args.common.config()?, &args.alpha.points()?)?;
            println!("{}", path.display());
            Ok(true)
        }
    }
}
