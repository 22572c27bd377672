//! Explicit finite differences for `B N_tt + N_t = N_zz` on the half slab.
//!
//! Nodes `i = 0..=n_z` sit at `z = i h` with `h = 1/(2 n_z)`; node 0 is the
//! mid-plane and node `n_z` the adsorbing surface. Interior nodes follow the
//! three-level scheme, the mid-plane mirrors its neighbour, and the surface
//! value is whatever makes particle conservation and backward-Euler Langmuir
//! kinetics hold simultaneously. The trapezoid rule measures bulk content, so
//! `2·trapezoid(row) + 2σ` is conserved to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{interpolate, sample_initial, InitialCondition, Params};
use crate::series::{check_probes, trapezoid_uniform, Engine, Rows, TimeSeries};

/// Smallest supported number of spatial segments.
pub const MIN_SEGMENTS: usize = 8;

/// Default `λ = k/h`: half the characteristic ratio `√B`.
pub fn default_lambda(b: f64) -> f64 {
    0.5 * b.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_z: usize,
    pub n_t: usize,
    pub h: f64,
    pub k: f64,
    pub lambda: f64,
    pub horizon: f64,
}

impl Grid {
    pub fn new(n_z: usize, n_t: usize, horizon: f64) -> Result<Self> {
        if n_z < MIN_SEGMENTS {
            return Err(Error::invalid(
                "n_z",
                format!("need at least {MIN_SEGMENTS} segments, got {n_z}"),
            ));
        }
        if n_t == 0 {
            return Err(Error::invalid("n_t", "need at least one time step"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(
                "T",
                format!("horizon must be positive, got {horizon}"),
            ));
        }
        let h = 0.5 / n_z as f64;
        let k = horizon / n_t as f64;
        Ok(Grid {
            n_z,
            n_t,
            h,
            k,
            lambda: k / h,
            horizon,
        })
    }

    /// Picks the step count so that `k/h` does not exceed `lambda`.
    pub fn with_lambda(n_z: usize, lambda: f64, horizon: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                format!("must be positive, got {lambda}"),
            ));
        }
        let h = 0.5 / n_z.max(1) as f64;
        let n_t = (horizon / (lambda * h) - 1e-9).ceil().max(1.0) as usize;
        Grid::new(n_z, n_t, horizon)
    }

    pub fn z(&self, i: usize) -> f64 {
        if i == self.n_z {
            0.5
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_z).map(|i| self.z(i)).collect()
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.n_t {
            self.horizon
        } else {
            j as f64 * self.k
        }
    }

    /// Step count closest to the time interval `dt`, at least one.
    pub fn steps_per(&self, dt: f64) -> usize {
        ((dt / self.k).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdmConfig {
    pub grid: Grid,
    pub probes: Vec<f64>,
    /// Record σ and probes every this many steps (the last step is always recorded).
    pub record_every: usize,
    /// Also keep full rows every this many steps.
    pub row_every: Option<usize>,
    /// Initial `∂N/∂t` at the nodes; zero when absent.
    pub initial_velocity: Option<Vec<f64>>,
    /// Largest accepted `λ/√B`.
    pub cfl_limit: f64,
}

impl FdmConfig {
    pub fn new(grid: Grid) -> Self {
        FdmConfig {
            grid,
            probes: Vec::new(),
            record_every: 1,
            row_every: None,
            initial_velocity: None,
            cfl_limit: 1.0,
        }
    }

    pub fn probes(mut self, probes: &[f64]) -> Self {
        self.probes = probes.to_vec();
        self
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n.max(1);
        self
    }

    pub fn row_every(mut self, n: usize) -> Self {
        self.row_every = Some(n.max(1));
        self
    }
}

/// First time level from Taylor expansion with the initial velocity `g`.
/// Fills nodes `1..n_z`; the caller applies the boundary conditions.
pub fn step_first(row0: &[f64], g: &[f64], grid: &Grid, b: f64, out: &mut [f64]) {
    let (l2, k) = (grid.lambda * grid.lambda, grid.k);
    let side = l2 / (2.0 * b);
    let vel = (2.0 * b - k) * k / (2.0 * b);
    for i in 1..grid.n_z {
        out[i] = row0[i] + side * (row0[i + 1] - 2.0 * row0[i] + row0[i - 1]) + vel * g[i];
    }
}

/// Three-level update of nodes `1..n_z` from the two previous rows.
pub fn step_interior(prev: &[f64], prev2: &[f64], grid: &Grid, b: f64, out: &mut [f64]) {
    let (l2, k) = (grid.lambda * grid.lambda, grid.k);
    let denom = 2.0 * b + k;
    let side = 2.0 * l2 / denom;
    let back = (2.0 * b - k) / denom;
    for i in 1..grid.n_z {
        out[i] = prev[i]
            + back * (prev[i] - prev2[i])
            + side * (prev[i + 1] - 2.0 * prev[i] + prev[i - 1]);
    }
}

/// Zero gradient at the mid-plane.
pub fn apply_symmetry(row: &mut [f64]) {
    row[0] = row[1];
}

/// Sets the surface node of `row` (interior already filled) and returns the
/// new coverage. With `I` the trapezoid content of the half slab,
/// `σ = mass/2 - I` and `A(σ - σ_prev)/k = L N_s - σ` are solved together;
/// `N_s` enters `I` through the end weight `h/2`.
pub fn apply_surface(row: &mut [f64], sigma_prev: f64, grid: &Grid, p: &Params, mass: f64) -> f64 {
    let n = grid.n_z;
    let h = grid.h;
    let beta = 1.0 / (p.desorption_time / grid.k + 1.0);
    let partial = h * (0.5 * row[0] + row[1..n].iter().sum::<f64>());
    let coeff = beta * p.adsorption_length + 0.5 * h;
    let surface = (0.5 * mass - partial - (1.0 - beta) * sigma_prev) / coeff;
    row[n] = surface;
    0.5 * mass - partial - 0.5 * h * surface
}

/// `∫ g dz + 2(L/A) N_s(0)`: zero when the initial velocity is compatible with
/// the kinetics at `t = 0`.
pub fn velocity_compatibility(g: &[f64], grid: &Grid, p: &Params, surface0: f64) -> f64 {
    2.0 * trapezoid_uniform(grid.h, g) + 2.0 * p.adsorption_length / p.desorption_time * surface0
}

fn probe_row(grid_z: &[f64], row: &[f64], probes: &[f64]) -> Vec<f64> {
    probes
        .iter()
        .map(|z| interpolate(grid_z, row, z.abs()))
        .collect()
}

fn check_finite(row: &[f64], step: usize, lambda: f64) -> Result<()> {
    match row.iter().position(|v| !v.is_finite()) {
        Some(node) => Err(Error::Instability { step, node, lambda }),
        None => Ok(()),
    }
}

pub fn run_fdm(p: &Params, ic: &InitialCondition, config: &FdmConfig) -> Result<TimeSeries> {
    p.validate()?;
    check_probes(&config.probes)?;
    let grid = &config.grid;
    let b = p.relaxation_time;
    if b <= 0.0 {
        return Err(Error::Configuration(
            "the hyperbolic scheme needs B > 0; use the parabolic solver for B = 0".into(),
        ));
    }
    let bound = config.cfl_limit * b.sqrt();
    if grid.lambda > bound {
        return Err(Error::Configuration(format!(
            "lambda = {} exceeds the stability bound {bound} ({} x sqrt(B))",
            grid.lambda, config.cfl_limit
        )));
    }

    let z = grid.nodes();
    let n = grid.n_z;
    let mut row0 = sample_initial(ic, p, &z)?;
    row0[n] = 0.0;
    let g = match &config.initial_velocity {
        Some(g) if g.len() != n + 1 => {
            return Err(Error::invalid(
                "initial_velocity",
                format!("expected {} nodes, got {}", n + 1, g.len()),
            ))
        }
        Some(g) => g.clone(),
        None => vec![0.0; n + 1],
    };
    let mass = 2.0 * trapezoid_uniform(grid.h, &row0);

    let mut series = TimeSeries::new(Engine::Fdm, config.probes.clone(), mass);
    let mut rows = config.row_every.map(|_| Rows {
        z: z.clone(),
        times: Vec::new(),
        values: Vec::new(),
    });
    let record =
        |j: usize, row: &[f64], sigma: f64, series: &mut TimeSeries, rows: &mut Option<Rows>| {
            let residual = 2.0 * trapezoid_uniform(grid.h, row) + 2.0 * sigma - mass;
            if j.is_multiple_of(config.record_every) || j == grid.n_t {
                let t = grid.time(j);
                series.times.push(t);
                series.sigma.push(sigma);
                series.surface_density.push(row[n]);
                series.probe_values.push(probe_row(&z, row, &config.probes));
                series.conservation.push(residual);
            }
            if let (Some(rows), Some(every)) = (rows.as_mut(), config.row_every) {
                if j.is_multiple_of(every) || j == grid.n_t {
                    rows.times.push(grid.time(j));
                    rows.values.push(row.to_vec());
                }
            }
        };

    let mut sigma = 0.0;
    record(0, &row0, sigma, &mut series, &mut rows);

    let mut prev2 = row0;
    let mut prev = prev2.clone();
    step_first(&prev2, &g, grid, b, &mut prev);
    apply_symmetry(&mut prev);
    sigma = apply_surface(&mut prev, sigma, grid, p, mass);
    check_finite(&prev, 1, grid.lambda)?;
    record(1, &prev, sigma, &mut series, &mut rows);

    let mut next = prev.clone();
    for j in 2..=grid.n_t {
        step_interior(&prev, &prev2, grid, b, &mut next);
        apply_symmetry(&mut next);
        sigma = apply_surface(&mut next, sigma, grid, p, mass);
        check_finite(&next, j, grid.lambda)?;
        record(j, &next, sigma, &mut series, &mut rows);
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut next);
    }
    series.rows = rows;
    Ok(series)
}
