//! Engine-agnostic time series of surface coverage and sampled bulk density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::interpolate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Spectral,
    Fdm,
    Parabolic,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Spectral => "spectral",
            Engine::Fdm => "fdm",
            Engine::Parabolic => "parabolic",
        })
    }
}

/// Density profiles on the half slab `0 ≤ z ≤ 1/2` at selected times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rows {
    pub z: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub engine: Engine,
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Bulk density just in front of the surface, `N(1/2, t)`.
    pub surface_density: Vec<f64>,
    pub probes: Vec<f64>,
    /// `probe_values[j][p]` is `N(probes[p], times[j])`.
    pub probe_values: Vec<Vec<f64>>,
    /// `2∫₀^{1/2} N dz + 2σ - reference_mass` at each recorded time.
    pub conservation: Vec<f64>,
    /// Total particle content the engine conserves.
    pub reference_mass: f64,
    pub rows: Option<Rows>,
}

impl TimeSeries {
    pub fn new(engine: Engine, probes: Vec<f64>, reference_mass: f64) -> Self {
        TimeSeries {
            engine,
            times: Vec::new(),
            sigma: Vec::new(),
            surface_density: Vec::new(),
            probes,
            probe_values: Vec::new(),
            conservation: Vec::new(),
            reference_mass,
            rows: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    pub fn sigma_at(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.sigma, t)
    }

    pub fn surface_density_at(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.surface_density, t)
    }

    /// Column of probe `index` over all recorded times.
    pub fn probe_column(&self, index: usize) -> Vec<f64> {
        self.probe_values.iter().map(|row| row[index]).collect()
    }

    pub fn probe_at(&self, index: usize, t: f64) -> f64 {
        interpolate(&self.times, &self.probe_column(index), t)
    }

    pub fn max_conservation_residual(&self) -> f64 {
        self.conservation
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.abs()))
    }
}

/// Composite trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid(z: &[f64], values: &[f64]) -> f64 {
    z.windows(2)
        .zip(values.windows(2))
        .map(|(z, v)| 0.5 * (z[1] - z[0]) * (v[0] + v[1]))
        .sum()
}

/// Trapezoid rule with uniform spacing `h`: end weights `h/2`, interior `h`.
pub fn trapezoid_uniform(h: f64, values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Uniform grid of `n + 1` points on `[start, end]`.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                end
            } else {
                start + (end - start) * i as f64 / n as f64
            }
        })
        .collect()
}

/// Time of the first interior local maximum of `values`, ignoring wiggles:
/// a sample qualifies when it is the largest value within `±window` and the
/// series drops by more than `drop` after it within the window.
pub fn first_local_max(
    times: &[f64],
    values: &[f64],
    window: f64,
    drop: f64,
) -> Option<(f64, f64)> {
    let n = times.len();
    for j in 1..n.saturating_sub(1) {
        let (tj, vj) = (times[j], values[j]);
        if times[n - 1] - tj < window {
            continue;
        }
        if values[j - 1] > vj || values[j + 1] > vj {
            continue;
        }
        let lo = times.partition_point(|&t| t < tj - window);
        let hi = times.partition_point(|&t| t <= tj + window);
        let neighbourhood = &values[lo..hi];
        if neighbourhood.iter().any(|&v| v > vj) {
            continue;
        }
        let after_min = values[j..hi].iter().cloned().fold(f64::INFINITY, f64::min);
        if vj - after_min > drop {
            return Some((tj, vj));
        }
    }
    None
}

/// Largest decrease `values[i] - values[j]` with `i < j`, i.e. how far the
/// series is from being non-decreasing.
pub fn max_decrease(values: &[f64]) -> f64 {
    let mut running_max = f64::NEG_INFINITY;
    let mut worst = 0.0_f64;
    for &v in values {
        running_max = running_max.max(v);
        worst = worst.max(running_max - v);
    }
    worst
}

pub(crate) fn check_probes(probes: &[f64]) -> Result<()> {
    match probes.iter().find(|z| !(z.abs() <= 0.5)) {
        Some(z) => Err(Error::invalid(
            "probes",
            format!("{z} lies outside [-1/2, 1/2]"),
        )),
        None => Ok(()),
    }
}
