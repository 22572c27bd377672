//! Closed-form modal solution.
//!
//! The deviation from equilibrium is expanded as
//!
//! ```text
//! η(z, t) = Σ_α [S₁ e^{μ₁t} + S₂ e^{μ₂t}] cos(αz)
//! ```
//!
//! over the eigenvalues of [`crate::eigen::find_eigenvalues`]. The cosines
//! `φ_α = cos(αz)` are not orthogonal on the slab, so the initial profile is
//! projected through an orthogonalised basis `ψ_q = Σ_{α≤q} V_{αq} φ_α` built
//! from the exact Gram matrix. Starting at rest fixes `μ₁S₁ + μ₂S₂ = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{find_eigenvalues, Mode};
use crate::error::{Error, Result};
use crate::params::{InitialCondition, Params};
use crate::series::{check_probes, linspace, trapezoid, Engine, Rows, TimeSeries};

/// Default truncation of the modal sum.
pub const DEFAULT_MODES: usize = 50;

/// Gram matrices with a larger condition estimate are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// `∫_{-1/2}^{1/2} cos(a z) cos(b z) dz`.
pub fn gram_entry(a: f64, b: f64) -> f64 {
    let diff = a - b;
    let sum = a + b;
    let first = if diff.abs() < 1e-8 {
        // sin(x/2)/x → 1/2 - x²/48
        0.5 - diff * diff / 48.0
    } else {
        (0.5 * diff).sin() / diff
    };
    first + (0.5 * sum).sin() / sum
}

/// `∫_{-1/2}^{1/2} cos(a z) dz = 2 sin(a/2)/a`.
pub fn cosine_integral(a: f64) -> f64 {
    2.0 * (0.5 * a).sin() / a
}

/// Symmetric matrix of inner products between the mode shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn new(alphas: &[f64]) -> Self {
        let n = alphas.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let d = gram_entry(alphas[i], alphas[j]);
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        GramMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// `G v`
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let row = &self.entries[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).map(|(g, x)| g * x).sum()
            })
            .collect()
    }

    /// `uᵀ G v`
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(self.apply(v)).map(|(a, b)| a * b).sum()
    }
}

/// Orthogonal combinations `ψ_q = Σ_{α≤q} V_{αq} φ_α` with `V_{qq} = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthoBasis {
    /// `columns[q][α] = V_{αq}`; entries with `α > q` are zero.
    columns: Vec<Vec<f64>>,
    /// `(ψ_q, ψ_q)`
    norms_sq: Vec<f64>,
}

impl OrthoBasis {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// `V_{αq}`
    pub fn coefficient(&self, alpha: usize, q: usize) -> f64 {
        self.columns[q][alpha]
    }

    pub fn column(&self, q: usize) -> &[f64] {
        &self.columns[q]
    }

    pub fn norm_sq(&self, q: usize) -> f64 {
        self.norms_sq[q]
    }

    /// `(ψ_i, ψ_j)` computed through the Gram matrix.
    pub fn inner(&self, gram: &GramMatrix, i: usize, j: usize) -> f64 {
        gram.inner(&self.columns[i], &self.columns[j])
    }

    /// `max_{i≠j} |(ψ_i, ψ_j)| / (‖ψ_i‖ ‖ψ_j‖)`
    pub fn orthogonality_residual(&self, gram: &GramMatrix) -> f64 {
        let gpsi: Vec<Vec<f64>> = self.columns.iter().map(|c| gram.apply(c)).collect();
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            for j in 0..i {
                let ip: f64 = self.columns[i]
                    .iter()
                    .zip(&gpsi[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let scale = (self.norms_sq[i] * self.norms_sq[j]).sqrt();
                worst = worst.max(ip.abs() / scale);
            }
        }
        worst
    }

    /// `ψ_q(z)` for the given eigenvalues.
    pub fn eval(&self, alphas: &[f64], q: usize, z: f64) -> f64 {
        self.columns[q]
            .iter()
            .zip(alphas)
            .take(q + 1)
            .map(|(v, a)| v * (a * z).cos())
            .sum()
    }
}

/// Modified Gram–Schmidt in coefficient space, with one reorthogonalisation pass.
pub fn orthogonalize(gram: &GramMatrix) -> Result<OrthoBasis> {
    let n = gram.dim();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut gpsi: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut norms_sq: Vec<f64> = Vec::with_capacity(n);
    for q in 0..n {
        let mut v = vec![0.0; n];
        v[q] = 1.0;
        for _pass in 0..2 {
            for j in 0..q {
                let ip: f64 = v.iter().zip(&gpsi[j]).map(|(a, b)| a * b).sum();
                let r = ip / norms_sq[j];
                for (vi, pj) in v.iter_mut().zip(&columns[j]).take(j + 1) {
                    *vi -= r * pj;
                }
            }
        }
        let gv = gram.apply(&v);
        let norm_sq: f64 = v.iter().zip(&gv).map(|(a, b)| a * b).sum();
        let diag = gram.get(q, q);
        if !(norm_sq > diag / MAX_CONDITION) {
            return Err(Error::DegenerateBasis {
                mode: q,
                condition: diag / norm_sq.max(f64::MIN_POSITIVE),
            });
        }
        columns.push(v);
        gpsi.push(gv);
        norms_sq.push(norm_sq);
    }
    Ok(OrthoBasis { columns, norms_sq })
}

fn determinant(mut m: Vec<f64>, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a * n + col].abs().total_cmp(&m[b * n + col].abs()))
            .unwrap();
        if m[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
        }
    }
    det
}

/// Leading `q × q` block of the Gram matrix with row `skip_row` and column
/// `skip_col` removed.
fn minor(gram: &GramMatrix, q: usize, skip_row: usize, skip_col: usize) -> f64 {
    let mut m = Vec::with_capacity((q - 1) * (q - 1));
    for r in (0..q).filter(|&r| r != skip_row) {
        for c in (0..q).filter(|&c| c != skip_col) {
            m.push(gram.get(r, c));
        }
    }
    determinant(m, q - 1)
}

/// Orthogonalisation through cofactors of the leading Gram determinants:
/// `ψ_q ∝ det[[d_11 … d_1q], …, [d_{q-1,1} … d_{q-1,q}], [φ_1 … φ_q]]`,
/// normalised so that `V_{qq} = 1`.
///
/// Cost grows as `O(n⁵)` and accuracy degrades with `n`; this exists to
/// cross-check [`orthogonalize`] on small bases.
pub fn orthogonalize_by_minors(gram: &GramMatrix) -> Result<OrthoBasis> {
    let n = gram.dim();
    let mut columns = Vec::with_capacity(n);
    let mut norms_sq = Vec::with_capacity(n);
    for q in 1..=n {
        let leading = minor(gram, q, q - 1, q - 1);
        if leading == 0.0 {
            return Err(Error::DegenerateBasis {
                mode: q - 1,
                condition: f64::INFINITY,
            });
        }
        let mut v = vec![0.0; n];
        for a in 1..=q {
            let sign = if (q + a) % 2 == 0 { 1.0 } else { -1.0 };
            v[a - 1] = sign * minor(gram, q, q - 1, a - 1) / leading;
        }
        norms_sq.push(gram.inner(&v, &v));
        columns.push(v);
    }
    Ok(OrthoBasis { columns, norms_sq })
}

/// Expansion of `N(z, 0) - N_eq` on the mode shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    /// `R_q = (η₀, ψ_q)/(ψ_q, ψ_q)`
    pub ratios: Vec<f64>,
    /// `C_α = Σ_{q≥α} V_{αq} R_q`, so that `η₀ ≈ Σ C_α φ_α`.
    pub coefficients: Vec<f64>,
    /// `‖η₀ - Σ C_α φ_α‖ / ‖η₀‖`, or zero when `η₀` vanishes.
    pub relative_l2_residual: f64,
}

/// `∫ (N(z, 0) - N_eq)² dz`
fn deviation_norm_sq(ic: &InitialCondition, p: &Params, n_eq: f64) -> f64 {
    let n0 = p.initial_density;
    match ic {
        InitialCondition::Step => (n0 - n_eq).powi(2),
        InitialCondition::Parabolic => {
            // ∫(1-4z²)² = 8/15, ∫(1-4z²) = 2/3
            let a = 1.5 * n0;
            a * a * 8.0 / 15.0 - 2.0 * a * n_eq * 2.0 / 3.0 + n_eq * n_eq
        }
        InitialCondition::Sampled(profile) => {
            let (z, v) = (profile.positions(), profile.values());
            let mut total = 0.0;
            for i in 0..z.len() - 1 {
                let (u0, u1) = (v[i] - n_eq, v[i + 1] - n_eq);
                total += (z[i + 1] - z[i]) * (u0 * u0 + u0 * u1 + u1 * u1) / 3.0;
            }
            2.0 * total
        }
    }
}

pub fn project_initial(
    ic: &InitialCondition,
    alphas: &[f64],
    basis: &OrthoBasis,
    p: &Params,
) -> Projection {
    let n = alphas.len();
    let (n_eq, _) = p.equilibrium();
    let moments: Vec<f64> = alphas
        .iter()
        .map(|&a| ic.cosine_moment(p, a) - n_eq * cosine_integral(a))
        .collect();
    let ratios: Vec<f64> = (0..n)
        .map(|q| {
            let ip: f64 = basis
                .column(q)
                .iter()
                .zip(&moments)
                .map(|(v, b)| v * b)
                .sum();
            ip / basis.norm_sq(q)
        })
        .collect();
    let coefficients: Vec<f64> = (0..n)
        .map(|a| (a..n).map(|q| basis.coefficient(a, q) * ratios[q]).sum())
        .collect();

    let total = deviation_norm_sq(ic, p, n_eq);
    let captured: f64 = ratios
        .iter()
        .enumerate()
        .map(|(q, r)| r * r * basis.norm_sq(q))
        .sum();
    let relative_l2_residual = if total > 0.0 {
        ((total - captured).max(0.0) / total).sqrt()
    } else {
        0.0
    };
    Projection {
        ratios,
        coefficients,
        relative_l2_residual,
    }
}

/// `(S₁, S₂)` per mode from the projection coefficients and rest initial state.
pub fn amplitudes(coefficients: &[f64], modes: &[Mode]) -> Result<Vec<(Complex64, Complex64)>> {
    coefficients
        .iter()
        .zip(modes)
        .map(|(&c, mode)| {
            let (mu1, mu2) = (mode.exponents.mu1, mode.exponents.mu2);
            if mu1 == mu2 {
                return Err(Error::DegenerateMode { alpha: mode.alpha });
            }
            let ratio = mu1 / mu2;
            let s1 = c / (1.0 - ratio);
            Ok((s1, -ratio * s1))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMode {
    pub mode: Mode,
    pub coefficient: f64,
    pub s1: Complex64,
    pub s2: Complex64,
}

impl SpectralMode {
    fn temporal(&self, t: f64) -> Complex64 {
        let e = &self.mode.exponents;
        self.s1 * (e.mu1 * t).exp() + self.s2 * (e.mu2 * t).exp()
    }

    fn temporal_rate(&self, t: f64) -> Complex64 {
        let e = &self.mode.exponents;
        self.s1 * e.mu1 * (e.mu1 * t).exp() + self.s2 * e.mu2 * (e.mu2 * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    pub mode_count: usize,
    pub orthogonality_residual: f64,
    /// Relative L² error of the truncated initial-profile expansion.
    pub initial_l2_residual: f64,
    /// `|Σ C_α - (N(0, 0) - N_eq)|`
    pub initial_centre_error: f64,
    /// `σ(0)`; the exact value is zero.
    pub initial_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSolution {
    pub params: Params,
    pub n_eq: f64,
    pub sigma_eq: f64,
    pub modes: Vec<SpectralMode>,
    pub diagnostics: SpectralDiagnostics,
}

impl SpectralSolution {
    /// `N(z, t)` before discarding the imaginary part.
    pub fn density_complex(&self, z: f64, t: f64) -> Complex64 {
        let sum: Complex64 = self
            .modes
            .iter()
            .map(|m| m.temporal(t) * (m.mode.alpha * z).cos())
            .sum();
        self.n_eq + sum
    }

    pub fn density(&self, z: f64, t: f64) -> f64 {
        self.density_complex(z, t).re
    }

    /// `∂N/∂t`
    pub fn density_rate(&self, z: f64, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| m.temporal_rate(t) * (m.mode.alpha * z).cos())
            .sum::<Complex64>()
            .re
    }

    pub fn sigma_complex(&self, t: f64) -> Complex64 {
        let sum: Complex64 = self
            .modes
            .iter()
            .map(|m| m.temporal(t) * ((0.5 * m.mode.alpha).sin() / m.mode.alpha))
            .sum();
        self.sigma_eq - sum
    }

    pub fn sigma(&self, t: f64) -> f64 {
        self.sigma_complex(t).re
    }

    /// `dσ/dt`
    pub fn sigma_rate(&self, t: f64) -> f64 {
        -self
            .modes
            .iter()
            .map(|m| m.temporal_rate(t) * ((0.5 * m.mode.alpha).sin() / m.mode.alpha))
            .sum::<Complex64>()
            .re
    }

    /// `∫ N dz` over the slab, summed mode by mode.
    pub fn bulk_content(&self, t: f64) -> f64 {
        self.n_eq
            + self
                .modes
                .iter()
                .map(|m| m.temporal(t) * cosine_integral(m.mode.alpha))
                .sum::<Complex64>()
                .re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.mode.alpha).collect()
    }

    /// Samples the solution at `times`. `row_points` > 0 also stores density
    /// profiles on that many uniform panels of `[0, 1/2]` at every time.
    pub fn series(&self, times: &[f64], probes: &[f64], row_points: usize) -> Result<TimeSeries> {
        check_probes(probes)?;
        if times.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::invalid("times", "must be non-negative"));
        }
        let mut out = TimeSeries::new(
            Engine::Spectral,
            probes.to_vec(),
            self.params.initial_density,
        );
        let row_z = (row_points > 0).then(|| linspace(0.0, 0.5, row_points));
        let mut rows = row_z.as_ref().map(|z| Rows {
            z: z.clone(),
            times: Vec::new(),
            values: Vec::new(),
        });
        for &t in times {
            let sigma = self.sigma(t);
            out.times.push(t);
            out.sigma.push(sigma);
            out.surface_density.push(self.density(0.5, t));
            out.probe_values
                .push(probes.iter().map(|&z| self.density(z, t)).collect());
            match (&mut rows, &row_z) {
                (Some(rows), Some(z)) => {
                    let values: Vec<f64> = z.iter().map(|&z| self.density(z, t)).collect();
                    out.conservation
                        .push(2.0 * trapezoid(z, &values) + 2.0 * sigma - out.reference_mass);
                    rows.times.push(t);
                    rows.values.push(values);
                }
                _ => out
                    .conservation
                    .push(self.bulk_content(t) + 2.0 * sigma - out.reference_mass),
            }
        }
        out.rows = rows;
        Ok(out)
    }
}

/// Eigenvalues → Gram matrix → orthogonal basis → projection → amplitudes.
pub fn solve_spectral(
    p: &Params,
    ic: &InitialCondition,
    mode_count: usize,
) -> Result<SpectralSolution> {
    p.validate()?;
    ic.validate(p)?;
    let modes = find_eigenvalues(p, mode_count)?;
    solve_with_modes(p, ic, modes)
}

/// Same as [`solve_spectral`] with a caller-supplied eigenvalue set.
pub fn solve_with_modes(
    p: &Params,
    ic: &InitialCondition,
    modes: Vec<Mode>,
) -> Result<SpectralSolution> {
    let alphas: Vec<f64> = modes.iter().map(|m| m.alpha).collect();
    let gram = GramMatrix::new(&alphas);
    let basis = orthogonalize(&gram)?;
    let projection = project_initial(ic, &alphas, &basis, p);
    let amps = amplitudes(&projection.coefficients, &modes)?;
    let (n_eq, sigma_eq) = p.equilibrium();

    let spectral_modes: Vec<SpectralMode> = modes
        .into_iter()
        .zip(&projection.coefficients)
        .zip(amps)
        .map(|((mode, &coefficient), (s1, s2))| SpectralMode {
            mode,
            coefficient,
            s1,
            s2,
        })
        .collect();

    let centre_sum: f64 = projection.coefficients.iter().sum();
    let mut solution = SpectralSolution {
        params: *p,
        n_eq,
        sigma_eq,
        modes: spectral_modes,
        diagnostics: SpectralDiagnostics {
            mode_count: alphas.len(),
            orthogonality_residual: basis.orthogonality_residual(&gram),
            initial_l2_residual: projection.relative_l2_residual,
            initial_centre_error: (centre_sum - (ic.value_at(p, 0.0) - n_eq)).abs(),
            initial_sigma: 0.0,
        },
    };
    solution.diagnostics.initial_sigma = solution.sigma(0.0);
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig3() -> Params {
        Params::new(1e-3, 0.1, 1.0, 3.0).unwrap()
    }

    #[test]
    fn gram_diagonal_and_limit() {
        assert!((gram_entry(2.0 * PI, 2.0 * PI) - 0.5).abs() < 1e-15);
        let a = 7.1_f64;
        let exact = 0.5 + a.sin() / (2.0 * a);
        assert!((gram_entry(a, a) - exact).abs() < 1e-15);
        assert!((gram_entry(a, a + 1e-9) - exact).abs() < 1e-9);
    }

    #[test]
    fn two_mode_projection_step() {
        let alphas = [3.5, 9.8];
        let gram = GramMatrix::new(&alphas);
        let basis = orthogonalize(&gram).unwrap();
        let ratio = gram.get(0, 1) / gram.get(0, 0);
        assert!((basis.coefficient(0, 1) + ratio).abs() < 1e-15);
        assert!(basis.inner(&gram, 0, 1).abs() < 1e-15);
    }

    #[test]
    fn minors_agree_with_projection_on_small_basis() {
        let alphas: Vec<f64> = find_eigenvalues(&fig3(), 6)
            .unwrap()
            .iter()
            .map(|m| m.alpha)
            .collect();
        let gram = GramMatrix::new(&alphas);
        let a = orthogonalize(&gram).unwrap();
        let b = orthogonalize_by_minors(&gram).unwrap();
        for q in 0..alphas.len() {
            for al in 0..=q {
                assert!((a.coefficient(al, q) - b.coefficient(al, q)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn no_adsorption_gives_zero_coefficients() {
        // with L → 0 the equilibrium equals N0 and the deviation vanishes
        let p = Params::new(1e-3, 0.1, 1e-300, 3.0).unwrap();
        let sol = solve_spectral(&p, &InitialCondition::Step, 10).unwrap();
        assert!(sol.modes.iter().all(|m| m.coefficient.abs() < 1e-12));
    }

    #[test]
    fn amplitudes_respect_rest_condition() {
        let sol = solve_spectral(&fig3(), &InitialCondition::Step, 30).unwrap();
        for m in &sol.modes {
            let e = &m.mode.exponents;
            let velocity = e.mu1 * m.s1 + e.mu2 * m.s2;
            assert!(velocity.norm() < 1e-12 * e.mu1.norm() * m.s1.norm().max(1e-300));
            assert!((m.s1 + m.s2 - m.coefficient).norm() < 1e-12 * m.coefficient.abs().max(1e-12));
            if e.is_complex() {
                assert!((m.s2 - m.s1.conj()).norm() < 1e-12 * m.s1.norm());
            }
        }
    }

    #[test]
    fn degenerate_mode_is_rejected() {
        let p = Params::new(0.01, 0.25, 1.0, 3.0).unwrap();
        let mode = Mode {
            alpha: 1.0,
            exponents: crate::eigen::exponents(1.0, 0.25),
            branch: crate::eigen::Branch::ReE,
            index: 0,
        };
        assert!(matches!(
            amplitudes(&[1.0], &[mode]),
            Err(Error::DegenerateMode { .. })
        ));
        let _ = p;
    }

    #[test]
    fn density_is_even_and_relaxes() {
        let sol = solve_spectral(&fig3(), &InitialCondition::Step, 20).unwrap();
        for &(z, t) in &[(0.1, 0.05), (0.37, 0.4), (0.5, 1.0)] {
            assert_eq!(sol.density(z, t), sol.density(-z, t));
        }
        assert!((sol.density(0.2, 40.0) - sol.n_eq).abs() < 1e-12);
        assert!((sol.sigma(40.0) - sol.sigma_eq).abs() < 1e-12);
    }

    #[test]
    fn series_shape() {
        let sol = solve_spectral(&fig3(), &InitialCondition::Parabolic, 20).unwrap();
        let ts = sol.series(&[0.0, 0.5, 1.0], &[0.0, 0.25], 50).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.probe_values[1].len(), 2);
        assert_eq!(ts.rows.as_ref().unwrap().values[2].len(), 51);
        assert!(sol.series(&[0.0], &[0.6], 0).is_err());
    }
}
