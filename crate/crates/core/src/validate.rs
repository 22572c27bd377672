//! Parabolic reference solver, engine comparison and residual audits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdm::{apply_surface, Grid, MIN_SEGMENTS};
use crate::params::{interpolate, sample_initial, InitialCondition, Params};
use crate::series::{check_probes, trapezoid, trapezoid_uniform, Engine, Rows, TimeSeries};

/// Default `k/h²` for the parabolic solver.
pub const PARABOLIC_RATIO: f64 = 0.4;

/// How the parabolic solver closes the surface node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceClosure {
    /// Flux balance `-∂N/∂z = dσ/dt` on the surface half cell.
    Local,
    /// Global particle count, as in the hyperbolic scheme.
    Nonlocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicConfig {
    pub grid: Grid,
    pub probes: Vec<f64>,
    pub record_every: usize,
    pub row_every: Option<usize>,
    pub closure: SurfaceClosure,
}

impl ParabolicConfig {
    /// Grid with `k = PARABOLIC_RATIO·h²` (rounded down to fit `horizon`).
    pub fn new(n_z: usize, horizon: f64) -> Result<Self> {
        Self::with_ratio(n_z, PARABOLIC_RATIO, horizon)
    }

    pub fn with_ratio(n_z: usize, ratio: f64, horizon: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::invalid(
                "ratio",
                format!("must be positive, got {ratio}"),
            ));
        }
        let h = 0.5 / n_z.max(1) as f64;
        let n_t = (horizon / (ratio * h * h) - 1e-9).ceil().max(1.0) as usize;
        Ok(ParabolicConfig {
            grid: Grid::new(n_z, n_t, horizon)?,
            probes: Vec::new(),
            record_every: 1,
            row_every: None,
            closure: SurfaceClosure::Local,
        })
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

    pub fn closure(mut self, closure: SurfaceClosure) -> Self {
        self.closure = closure;
        self
    }
}

/// Explicit solver for `N_t = N_zz` (B ignored) with Langmuir kinetics
/// integrated by backward Euler. The mid-plane and the surface are half
/// cells, so the trapezoid content plus `σ` is conserved to rounding.
pub fn run_parabolic(
    p: &Params,
    ic: &InitialCondition,
    config: &ParabolicConfig,
) -> Result<TimeSeries> {
    p.validate()?;
    check_probes(&config.probes)?;
    let grid = &config.grid;
    if grid.n_z < MIN_SEGMENTS {
        return Err(Error::invalid(
            "n_z",
            format!("need at least {MIN_SEGMENTS} segments"),
        ));
    }
    let h = grid.h;
    let r = grid.k / (h * h);
    if r > 0.5 {
        return Err(Error::Configuration(format!(
            "k/h² = {r} exceeds the parabolic stability bound 1/2"
        )));
    }

    let z = grid.nodes();
    let n = grid.n_z;
    let mut row = sample_initial(ic, p, &z)?;
    row[n] = 0.0;
    let mass = 2.0 * trapezoid_uniform(h, &row);
    let beta = 1.0 / (p.desorption_time / grid.k + 1.0);
    let l = p.adsorption_length;

    let mut series = TimeSeries::new(Engine::Parabolic, config.probes.clone(), mass);
    let mut rows = config.row_every.map(|_| Rows {
        z: z.clone(),
        times: Vec::new(),
        values: Vec::new(),
    });
    let record =
        |j: usize, row: &[f64], sigma: f64, series: &mut TimeSeries, rows: &mut Option<Rows>| {
            if j.is_multiple_of(config.record_every) || j == grid.n_t {
                series.times.push(grid.time(j));
                series.sigma.push(sigma);
                series.surface_density.push(row[n]);
                series.probe_values.push(
                    config
                        .probes
                        .iter()
                        .map(|q| interpolate(&z, row, q.abs()))
                        .collect(),
                );
                series
                    .conservation
                    .push(2.0 * trapezoid_uniform(h, row) + 2.0 * sigma - mass);
            }
            if let (Some(rows), Some(every)) = (rows.as_mut(), config.row_every) {
                if j.is_multiple_of(every) || j == grid.n_t {
                    rows.times.push(grid.time(j));
                    rows.values.push(row.to_vec());
                }
            }
        };

    let mut sigma = 0.0;
    record(0, &row, sigma, &mut series, &mut rows);
    let mut next = row.clone();
    for j in 1..=grid.n_t {
        next[0] = row[0] + 2.0 * r * (row[1] - row[0]);
        for i in 1..n {
            next[i] = row[i] + r * (row[i + 1] - 2.0 * row[i] + row[i - 1]);
        }
        sigma = match config.closure {
            SurfaceClosure::Local => {
                let ns = (0.5 * h * row[n] + grid.k / h * (row[n - 1] - row[n]) + beta * sigma)
                    / (0.5 * h + beta * l);
                next[n] = ns;
                sigma + beta * (l * ns - sigma)
            }
            SurfaceClosure::Nonlocal => apply_surface(&mut next, sigma, grid, p, mass),
        };
        if let Some(node) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::Instability {
                step: j,
                node,
                lambda: grid.lambda,
            });
        }
        std::mem::swap(&mut row, &mut next);
        record(j, &row, sigma, &mut series, &mut rows);
    }
    series.rows = rows;
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeDeviation {
    pub z: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub params: Option<Params>,
    pub engines: (Engine, Engine),
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
    pub sigma_max: f64,
    pub sigma_max_at: f64,
    pub sigma_rms: f64,
    pub probes: Vec<ProbeDeviation>,
    pub conservation: (f64, f64),
}

impl ComparisonReport {
    pub fn with_params(mut self, p: Params) -> Self {
        self.params = Some(p);
        self
    }

    /// `sigma_max / σ_eq`, when the parameters are known.
    pub fn relative_sigma_max(&self) -> Option<f64> {
        self.params.map(|p| self.sigma_max / p.equilibrium().1)
    }

    /// True when the largest σ deviation is below `tolerance·σ_eq`.
    pub fn passes(&self, tolerance: f64) -> Option<bool> {
        self.relative_sigma_max().map(|r| r <= tolerance)
    }
}

impl std::fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, b) = self.engines;
        writeln!(
            f,
            "{a} vs {b} on t* in [{}, {}] ({} points)",
            self.t_start, self.t_end, self.points
        )?;
        write!(
            f,
            "  max |dsigma| = {:.3e} at t* = {:.4}",
            self.sigma_max, self.sigma_max_at
        )?;
        if let Some(rel) = self.relative_sigma_max() {
            write!(f, " ({:.3}% of sigma_eq)", 100.0 * rel)?;
        }
        writeln!(f)?;
        writeln!(f, "  rms |dsigma| = {:.3e}", self.sigma_rms)?;
        for probe in &self.probes {
            writeln!(f, "  max |dN(z* = {})| = {:.3e}", probe.z, probe.max)?;
        }
        write!(
            f,
            "  conservation residuals: {a} {:.3e}, {b} {:.3e}",
            self.conservation.0, self.conservation.1
        )
    }
}

/// Deviations between two series, both linearly interpolated onto `tgrid`.
/// Probes are compared where both series sample the same `z`.
pub fn compare_engines(a: &TimeSeries, b: &TimeSeries, tgrid: &[f64]) -> Result<ComparisonReport> {
    let (Some((a_start, a_end)), Some((b_start, b_end))) = (a.time_range(), b.time_range()) else {
        return Err(Error::invalid("series", "empty time series"));
    };
    let (Some(&t_start), Some(&t_end)) = (tgrid.first(), tgrid.last()) else {
        return Err(Error::invalid("tgrid", "empty comparison grid"));
    };
    let slack = 1e-9 * (1.0 + t_end.abs());
    let covers = |lo: f64, hi: f64| t_start >= lo - slack && t_end <= hi + slack;
    if !covers(a_start, a_end) || !covers(b_start, b_end) {
        return Err(Error::NonOverlapping {
            a_start,
            a_end,
            b_start,
            b_end,
        });
    }

    let mut sigma_max = 0.0_f64;
    let mut sigma_max_at = t_start;
    let mut sum_sq = 0.0;
    for &t in tgrid {
        let d = (a.sigma_at(t) - b.sigma_at(t)).abs();
        sum_sq += d * d;
        if d > sigma_max {
            sigma_max = d;
            sigma_max_at = t;
        }
    }

    let mut probes = Vec::new();
    for (ia, &z) in a.probes.iter().enumerate() {
        if let Some(ib) = b.probes.iter().position(|&w| (w - z).abs() < 1e-12) {
            let (ca, cb) = (a.probe_column(ia), b.probe_column(ib));
            let max = tgrid.iter().fold(0.0_f64, |m, &t| {
                m.max((interpolate(&a.times, &ca, t) - interpolate(&b.times, &cb, t)).abs())
            });
            probes.push(ProbeDeviation { z, max });
        }
    }

    Ok(ComparisonReport {
        params: None,
        engines: (a.engine, b.engine),
        t_start,
        t_end,
        points: tgrid.len(),
        sigma_max,
        sigma_max_at,
        sigma_rms: (sum_sq / tgrid.len() as f64).sqrt(),
        probes,
        conservation: (a.max_conservation_residual(), b.max_conservation_residual()),
    })
}

/// `A(σ_j - σ_{j-1})/(t_j - t_{j-1}) - (L N_s,j - σ_j)` for `j ≥ 1`.
pub fn audit_kinetics(series: &TimeSeries, p: &Params) -> Vec<f64> {
    (1..series.len())
        .map(|j| {
            let dt = series.times[j] - series.times[j - 1];
            let rate = (series.sigma[j] - series.sigma[j - 1]) / dt;
            p.desorption_time * rate
                - (p.adsorption_length * series.surface_density[j] - series.sigma[j])
        })
        .collect()
}

/// `|2·trapezoid(N) + 2σ - M|` for every stored row, with `M` the content the
/// engine started from.
pub fn audit_conservation(series: &TimeSeries) -> Result<Vec<f64>> {
    let rows = series
        .rows
        .as_ref()
        .ok_or_else(|| Error::invalid("series", "no density rows were recorded"))?;
    Ok(rows
        .times
        .iter()
        .zip(&rows.values)
        .map(|(&t, row)| {
            (2.0 * trapezoid(&rows.z, row) + 2.0 * series.sigma_at(t) - series.reference_mass).abs()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{linspace, max_decrease};

    fn base() -> Params {
        Params::new(0.01, 0.1, 1.0, 3.0).unwrap()
    }

    #[test]
    fn stability_bound_is_enforced() {
        let cfg = ParabolicConfig::with_ratio(20, 0.6, 0.1).unwrap();
        assert!(matches!(
            run_parabolic(&base(), &InitialCondition::Step, &cfg),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn closures_agree_and_conserve() {
        let p = base();
        let cfg = ParabolicConfig::new(40, 1.0).unwrap();
        let local = run_parabolic(&p, &InitialCondition::Step, &cfg).unwrap();
        let nonlocal = run_parabolic(
            &p,
            &InitialCondition::Step,
            &cfg.clone().closure(SurfaceClosure::Nonlocal),
        )
        .unwrap();
        let worst = local
            .sigma
            .iter()
            .zip(&nonlocal.sigma)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(worst < 1e-12, "{worst}");
        assert!(local.max_conservation_residual() < 1e-12);
        assert!(nonlocal.max_conservation_residual() < 1e-12);
        assert_eq!(max_decrease(&local.sigma), 0.0);
    }

    #[test]
    fn no_adsorption_keeps_density() {
        let p = Params::new(0.01, 0.1, 0.0, 3.0).unwrap();
        for closure in [SurfaceClosure::Local, SurfaceClosure::Nonlocal] {
            let cfg = ParabolicConfig::new(20, 0.2).unwrap().closure(closure);
            let s = run_parabolic(&p, &InitialCondition::Step, &cfg).unwrap();
            assert!(s.sigma.iter().all(|&v| v.abs() < 1e-15), "{closure:?}");
            assert!(s.max_conservation_residual() < 1e-12);
        }
    }

    #[test]
    fn kinetics_audit_is_exact_for_parabolic_runs() {
        let p = base();
        let cfg = ParabolicConfig::new(20, 0.5).unwrap();
        let s = run_parabolic(&p, &InitialCondition::Step, &cfg).unwrap();
        let worst = audit_kinetics(&s, &p)
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.abs()));
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn identical_series_have_zero_deviation() {
        let p = base();
        let cfg = ParabolicConfig::new(20, 0.5).unwrap().probes(&[0.0]);
        let s = run_parabolic(&p, &InitialCondition::Step, &cfg).unwrap();
        let report = compare_engines(&s, &s, &linspace(0.0, 0.5, 50))
            .unwrap()
            .with_params(p);
        assert_eq!(report.sigma_max, 0.0);
        assert_eq!(report.sigma_rms, 0.0);
        assert_eq!(report.probes[0].max, 0.0);
        assert_eq!(report.passes(0.0), Some(true));
        assert!(matches!(
            compare_engines(&s, &s, &linspace(0.0, 0.6, 10)),
            Err(Error::NonOverlapping { .. })
        ));
    }

    #[test]
    fn conservation_audit_needs_rows() {
        let p = base();
        let cfg = ParabolicConfig::new(20, 0.2).unwrap();
        let s = run_parabolic(&p, &InitialCondition::Step, &cfg).unwrap();
        assert!(audit_conservation(&s).is_err());
        let s = run_parabolic(&p, &InitialCondition::Step, &cfg.row_every(10)).unwrap();
        let res = audit_conservation(&s).unwrap();
        assert!(res[0] < 1e-15);
        assert!(res.iter().all(|r| *r < 1e-12));
    }
}
