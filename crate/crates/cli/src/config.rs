//! Run configuration: a TOML document whose values command-line flags override.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hypsorb::fdm::{default_lambda, FdmConfig, Grid};
use hypsorb::validate::ParabolicConfig;
use hypsorb::{InitialCondition, Params, PhysicalInputs};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HYPSORB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "hypsorb-out";

/// Horizon used when none is given: 2, or 10 once `B ≥ 1` slows the approach
/// to equilibrium.
pub fn default_horizon(b: f64) -> f64 {
    if b >= 1.0 {
        10.0
    } else {
        2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Spectral,
    Fdm,
    Parabolic,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Spectral => "spectral",
            EngineKind::Fdm => "fdm",
            EngineKind::Parabolic => "parabolic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Axis {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
    #[value(name = "L", alias = "l")]
    L,
    #[value(name = "N0", alias = "n0")]
    N0,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::A => "A",
            Axis::B => "B",
            Axis::L => "L",
            Axis::N0 => "N0",
        }
    }

    pub fn set(self, p: &mut Params, value: f64) {
        match self {
            Axis::A => p.desorption_time = value,
            Axis::B => p.relaxation_time = value,
            Axis::L => p.adsorption_length = value,
            Axis::N0 => p.initial_density = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_z: usize,
    /// `k/h`; defaults to `0.5√B`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Explicit step count; overrides `lambda`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub cfl_limit: f64,
    /// `k/h²` for the parabolic solver.
    pub parabolic_ratio: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_z: 400,
            lambda: None,
            n_t: None,
            horizon: None,
            cfl_limit: 1.0,
            parabolic_ratio: hypsorb::validate::PARABOLIC_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub engines: [EngineKind; 2],
    /// Start of the comparison window; the window ends at `T`.
    pub from: f64,
    /// Largest accepted `max |Δσ| / σ_eq`.
    pub tolerance: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            engines: [EngineKind::Spectral, EngineKind::Fdm],
            from: 0.05,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub engine: EngineKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalInputs>,
    pub initial: InitialCondition,
    pub modes: usize,
    pub probes: Vec<f64>,
    /// Number of output intervals over `[0, T]`.
    pub samples: usize,
    pub grid: GridConfig,
    pub compare: CompareConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: EngineKind::Fdm,
            params: None,
            physical: None,
            initial: InitialCondition::Step,
            modes: hypsorb::spectral::DEFAULT_MODES,
            probes: Vec::new(),
            samples: 2000,
            grid: GridConfig::default(),
            compare: CompareConfig::default(),
            sweep: None,
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid configuration")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serialisable")
    }

    /// The dimensionless parameters; set directly or derived from physical inputs.
    pub fn params(&self) -> Result<Params> {
        match (&self.params, &self.physical) {
            (Some(_), Some(_)) => bail!("config: give either [params] or [physical], not both"),
            (Some(p), None) => {
                p.validate().context("config field `params`")?;
                Ok(*p)
            }
            (None, Some(phys)) => Params::from_physical(phys).context("config field `physical`"),
            (None, None) => bail!("config: missing parameters (set A, B, L and N0)"),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.grid
            .horizon
            .unwrap_or_else(|| default_horizon(self.params.map_or(0.0, |p| p.relaxation_time)))
    }

    /// Checks every field and fills defaults that depend on other fields, so
    /// that the returned configuration reproduces the run on its own.
    pub fn resolve(mut self) -> Result<Self> {
        let p = self.params()?;
        self.params = Some(p);
        self.physical = None;
        self.grid.horizon = Some(self.horizon());
        let t = self.grid.horizon.unwrap();
        if !(t > 0.0 && t.is_finite()) {
            bail!("config field `grid.T`: must be positive, got {t}");
        }
        self.initial
            .validate(&p)
            .context("config field `initial`")?;
        if self.modes == 0 {
            bail!("config field `modes`: must be at least 1");
        }
        if self.samples == 0 {
            bail!("config field `samples`: must be at least 1");
        }
        if let Some(z) = self.probes.iter().find(|z| !(z.abs() <= 0.5)) {
            bail!("config field `probes`: {z} lies outside [-1/2, 1/2]");
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                bail!("config field `sweep.values`: empty");
            }
        }
        let c = &self.compare;
        if c.engines[0] == c.engines[1] {
            bail!("config field `compare.engines`: the two engines must differ");
        }
        if !(c.from >= 0.0 && c.from < t) {
            bail!(
                "config field `compare.from`: must lie in [0, T), got {}",
                c.from
            );
        }
        if !(c.tolerance > 0.0) {
            bail!("config field `compare.tolerance`: must be positive");
        }
        Ok(self)
    }

    pub fn out_dir(&self) -> PathBuf {
        resolve_out_dir(self.output.dir.clone(), std::env::var_os(OUT_DIR_ENV))
    }

    pub fn name(&self) -> String {
        self.output
            .name
            .clone()
            .unwrap_or_else(|| self.engine.name().to_string())
    }

    /// Steps rounded up to a multiple of `samples`, so the series lands
    /// exactly on `samples + 1` equally spaced times.
    fn aligned(&self, n_t: usize) -> usize {
        n_t.div_ceil(self.samples) * self.samples
    }

    pub fn fdm_config(&self, p: &Params) -> Result<FdmConfig> {
        let t = self.horizon();
        let g = &self.grid;
        let grid = match g.n_t {
            Some(n_t) => Grid::new(g.n_z, n_t, t)?,
            None => {
                let lambda = g
                    .lambda
                    .unwrap_or_else(|| default_lambda(p.relaxation_time));
                let free = Grid::with_lambda(g.n_z, lambda, t)?;
                Grid::new(g.n_z, self.aligned(free.n_t), t)?
            }
        };
        let mut cfg = FdmConfig::new(grid)
            .probes(&self.probes)
            .record_every(grid.n_t / self.samples);
        cfg.cfl_limit = g.cfl_limit;
        Ok(cfg)
    }

    pub fn parabolic_config(&self) -> Result<ParabolicConfig> {
        let mut cfg =
            ParabolicConfig::with_ratio(self.grid.n_z, self.grid.parabolic_ratio, self.horizon())?;
        cfg.grid = Grid::new(self.grid.n_z, self.aligned(cfg.grid.n_t), self.horizon())?;
        let every = cfg.grid.n_t / self.samples;
        Ok(cfg.probes(&self.probes).record_every(every))
    }
}

/// Explicit directory, else the environment variable, else [`DEFAULT_OUT_DIR`].
pub fn resolve_out_dir(explicit: Option<PathBuf>, env: Option<std::ffi::OsString>) -> PathBuf {
    explicit
        .or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}
