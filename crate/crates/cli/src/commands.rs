use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use hypsorb::eigen::eigen_dump;
use hypsorb::fdm::run_fdm;
use hypsorb::series::{first_local_max, linspace, max_decrease, TimeSeries};
use hypsorb::spectral::solve_spectral;
use hypsorb::validate::{audit_kinetics, compare_engines, run_parabolic, ComparisonReport};
use hypsorb::Params;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{EngineKind, RunConfig};
use crate::output::{artifact, create, write_eigen_samples, write_json, write_series, SeriesTable};

/// A finished solve: the series plus engine-specific diagnostics.
pub struct Solved {
    pub series: TimeSeries,
    pub diagnostics: Value,
}

fn summary(series: &TimeSeries, p: &Params) -> Value {
    let kinetics = audit_kinetics(series, p);
    let kinetic_max = kinetics.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let (_, sigma_eq) = p.equilibrium();
    json!({
        "points": series.len(),
        "sigma_final": series.sigma.last(),
        "sigma_eq": sigma_eq,
        "first_maximum": first_local_max(&series.times, &series.sigma, 0.02, 1e-4)
            .map(|(t, s)| json!({ "t_star": t, "sigma": s })),
        "largest_decrease": max_decrease(&series.sigma),
        "conservation_residual_max": series.max_conservation_residual(),
        "kinetic_residual_max": kinetic_max,
    })
}

/// Runs one engine on a resolved configuration.
pub fn solve(cfg: &RunConfig, engine: EngineKind) -> Result<Solved> {
    let p = cfg.params()?;
    let ic = &cfg.initial;
    let (series, extra) = match engine {
        EngineKind::Fdm => {
            let fc = cfg.fdm_config(&p)?;
            let series = run_fdm(&p, ic, &fc)?;
            (series, json!({ "grid": fc.grid }))
        }
        EngineKind::Parabolic => {
            let pc = cfg.parabolic_config()?;
            let series = run_parabolic(&p, ic, &pc)?;
            (series, json!({ "grid": pc.grid, "closure": pc.closure }))
        }
        EngineKind::Spectral => {
            let sol = solve_spectral(&p, ic, cfg.modes)?;
            let times = linspace(0.0, cfg.horizon(), cfg.samples);
            let series = sol.series(&times, &cfg.probes, 0)?;
            let modes: Vec<Value> = sol
                .modes
                .iter()
                .map(|m| {
                    json!({
                        "alpha": m.mode.alpha,
                        "anchor": m.mode.index,
                        "mu1": [m.mode.exponents.mu1.re, m.mode.exponents.mu1.im],
                        "mu2": [m.mode.exponents.mu2.re, m.mode.exponents.mu2.im],
                        "coefficient": m.coefficient,
                        "s1": [m.s1.re, m.s1.im],
                        "s2": [m.s2.re, m.s2.im],
                    })
                })
                .collect();
            (
                series,
                json!({ "truncation": sol.diagnostics, "modes": modes }),
            )
        }
    };
    let mut diagnostics = summary(&series, &p);
    diagnostics["engine"] = json!(engine.name());
    diagnostics["details"] = extra;
    Ok(Solved {
        series,
        diagnostics,
    })
}

fn echo(cfg: &RunConfig) -> String {
    format!("hypsorb {}\n{}", env!("CARGO_PKG_VERSION"), cfg.to_toml())
}

#[derive(Debug, Serialize)]
pub struct Written {
    pub series: PathBuf,
    pub diagnostics: PathBuf,
}

fn write_solved(cfg: &RunConfig, name: &str, solved: &Solved) -> Result<Written> {
    let dir = cfg.out_dir();
    let series = artifact(&dir, name, "csv")?;
    write_series(
        create(&series)?,
        &SeriesTable::from(&solved.series),
        &echo(cfg),
    )
    .with_context(|| format!("writing {}", series.display()))?;
    let diagnostics = artifact(&dir, name, "json")?;
    write_json(
        &diagnostics,
        &json!({ "config": cfg, "diagnostics": solved.diagnostics }),
    )?;
    Ok(Written {
        series,
        diagnostics,
    })
}

/// `run`: one engine, a series CSV and a diagnostics JSON. With
/// `eigen_grid`, also the eigenvalue functions on that α grid.
pub fn run(cfg: RunConfig, eigen_grid: Option<Vec<f64>>) -> Result<Vec<PathBuf>> {
    let cfg = cfg.resolve()?;
    let solved = solve(&cfg, cfg.engine)?;
    let written = write_solved(&cfg, &cfg.name(), &solved)?;
    let mut paths = vec![written.series, written.diagnostics];
    if let Some(alphas) = eigen_grid {
        paths.push(write_eigen(
            &cfg,
            &alphas,
            &format!("{}_eigen", cfg.name()),
        )?);
    }
    Ok(paths)
}

fn write_eigen(cfg: &RunConfig, alphas: &[f64], stem: &str) -> Result<PathBuf> {
    let p = cfg.params()?;
    let path = artifact(&cfg.out_dir(), stem, "csv")?;
    write_eigen_samples(create(&path)?, &eigen_dump(&p, alphas), &echo(cfg))?;
    Ok(path)
}

/// `eigen-dump`: `(α, f1, f2, Re[E], Im[E])` on a grid.
pub fn eigen(cfg: RunConfig, alphas: &[f64]) -> Result<PathBuf> {
    let cfg = cfg.resolve()?;
    let stem = cfg
        .output
        .name
        .as_ref()
        .map_or("eigen".to_string(), |n| format!("{n}_eigen"));
    write_eigen(&cfg, alphas, &stem)
}

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub params: Params,
    pub series: PathBuf,
    pub diagnostics: Value,
}

/// `sweep`: one run per value of the sweep axis, `jobs` at a time.
pub fn sweep(cfg: RunConfig, jobs: Option<usize>) -> Result<PathBuf> {
    let Some(axis_cfg) = cfg.sweep.clone() else {
        bail!("sweep needs an axis and values (`--axis` and `--values` or a [sweep] table)");
    };
    let base = cfg.params()?;
    let name = cfg.name();
    let mut points = Vec::new();
    for &value in &axis_cfg.values {
        let mut p = base;
        axis_cfg.axis.set(&mut p, value);
        let mut point = cfg.clone();
        point.params = Some(p);
        point.physical = None;
        point.sweep = None;
        let point = point
            .resolve()
            .with_context(|| format!("sweep point {} = {value}", axis_cfg.axis.name()))?;
        points.push((value, point));
    }
    let root = cfg.clone().resolve()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("starting worker pool")?;
    let results: Vec<Result<SweepPoint>> = pool.install(|| {
        points
            .par_iter()
            .map(|(value, point)| {
                let label = format!("{name}_{}_{value}", axis_cfg.axis.name());
                let solved = solve(point, point.engine)
                    .with_context(|| format!("sweep point {} = {value}", axis_cfg.axis.name()))?;
                let written = write_solved(point, &label, &solved)?;
                Ok(SweepPoint {
                    value: *value,
                    params: point.params.unwrap(),
                    series: written.series,
                    diagnostics: solved.diagnostics,
                })
            })
            .collect()
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let index = artifact(&root.out_dir(), &format!("{name}_sweep"), "json")?;
    write_json(
        &index,
        &json!({ "config": root, "axis": axis_cfg.axis.name(), "points": points }),
    )?;
    Ok(index)
}

pub struct Compared {
    pub report: ComparisonReport,
    pub pass: bool,
    pub paths: Vec<PathBuf>,
}

/// `compare`: both configured engines, their series, and the deviation report.
pub fn compare(cfg: RunConfig) -> Result<Compared> {
    let cfg = cfg.resolve()?;
    let p = cfg.params()?;
    let [ea, eb] = cfg.compare.engines;
    let (a, b) = rayon::join(|| solve(&cfg, ea), || solve(&cfg, eb));
    let (a, b) = (a?, b?);
    let name = cfg
        .output
        .name
        .clone()
        .unwrap_or_else(|| "compare".to_string());
    let wa = write_solved(&cfg, &format!("{name}_{}", ea.name()), &a)?;
    let wb = write_solved(&cfg, &format!("{name}_{}", eb.name()), &b)?;
    let tgrid = linspace(cfg.compare.from, cfg.horizon(), cfg.samples);
    let report = compare_engines(&a.series, &b.series, &tgrid)?.with_params(p);
    let pass = report.passes(cfg.compare.tolerance).unwrap_or(false);
    let path = artifact(&cfg.out_dir(), &format!("{name}_report"), "json")?;
    write_json(
        &path,
        &json!({
            "config": cfg,
            "report": report,
            "relative_sigma_max": report.relative_sigma_max(),
            "tolerance": cfg.compare.tolerance,
            "pass": pass,
        }),
    )?;
    Ok(Compared {
        report,
        pass,
        paths: vec![wa.series, wa.diagnostics, wb.series, wb.diagnostics, path],
    })
}
