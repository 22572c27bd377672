//! Dimensionless model parameters, equilibrium state and initial profiles.
//!
//! Lengths are measured in units of the slab thickness `d` and times in units
//! of the diffusion time `d²/D`, so the slab occupies `-1/2 ≤ z ≤ 1/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on mass and symmetry for user-sampled initial profiles.
pub const SAMPLED_TOLERANCE: f64 = 1e-6;

/// Physical description of the slab, in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInputs {
    /// Slab thickness `d` [m].
    pub thickness: f64,
    /// Diffusion coefficient `D` [m²/s].
    pub diffusivity: f64,
    /// Cattaneo relaxation time `τ_r` [s]. Zero recovers Fickian diffusion.
    pub relaxation_time: f64,
    /// Desorption time `τ_a` [s].
    pub desorption_time: f64,
    /// Adsorption rate coefficient `k_a` [m/s].
    pub adsorption_rate: f64,
    /// Initial bulk density `n_0` [1/m³].
    pub initial_density: f64,
}

impl PhysicalInputs {
    pub fn validate(&self) -> Result<()> {
        positive("thickness", self.thickness)?;
        positive("diffusivity", self.diffusivity)?;
        non_negative("relaxation_time", self.relaxation_time)?;
        positive("desorption_time", self.desorption_time)?;
        positive("adsorption_rate", self.adsorption_rate)?;
        positive("initial_density", self.initial_density)
    }

    /// Diffusion time `d²/D`, the time unit of the dimensionless model.
    pub fn diffusion_time(&self) -> f64 {
        self.thickness * self.thickness / self.diffusivity
    }
}

/// The four dimensionless groups that fully determine a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Desorption time over diffusion time.
    #[serde(rename = "A")]
    pub desorption_time: f64,
    /// Cattaneo relaxation time over diffusion time. Zero is the parabolic limit.
    #[serde(rename = "B")]
    pub relaxation_time: f64,
    /// Intrinsic adsorption length `k_a τ_a` over the slab thickness.
    #[serde(rename = "L")]
    pub adsorption_length: f64,
    /// Initial particle content per unit area, `n_0 d`.
    #[serde(rename = "N0")]
    pub initial_density: f64,
}

impl Params {
    pub fn new(a: f64, b: f64, l: f64, n0: f64) -> Result<Self> {
        let p = Params {
            desorption_time: a,
            relaxation_time: b,
            adsorption_length: l,
            initial_density: n0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("A", self.desorption_time)?;
        non_negative("B", self.relaxation_time)?;
        non_negative("L", self.adsorption_length)?;
        positive("N0", self.initial_density)
    }

    pub fn from_physical(p: &PhysicalInputs) -> Result<Self> {
        p.validate()?;
        let tau_d = p.diffusion_time();
        Ok(Params {
            desorption_time: p.desorption_time / tau_d,
            relaxation_time: p.relaxation_time / tau_d,
            adsorption_length: p.adsorption_rate * p.desorption_time / p.thickness,
            initial_density: p.initial_density * p.thickness,
        })
    }

    /// Final uniform bulk density and surface coverage `(N_eq, σ_eq)`.
    pub fn equilibrium(&self) -> (f64, f64) {
        let l = self.adsorption_length;
        let n0 = self.initial_density;
        let denom = 1.0 + 2.0 * l;
        (n0 / denom, n0 * l / denom)
    }

    /// Propagation speed of density variations, `1/√B`. Infinite when `B = 0`.
    pub fn wave_speed(&self) -> f64 {
        if self.relaxation_time == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.relaxation_time.sqrt()
        }
    }

    /// Separation constant `1/(2√B)` above which the temporal exponents are
    /// complex conjugates. Infinite when `B = 0`.
    pub fn alpha_critical(&self) -> f64 {
        if self.relaxation_time == 0.0 {
            f64::INFINITY
        } else {
            0.5 / self.relaxation_time.sqrt()
        }
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

/// A user-provided initial profile, stored on the half slab `0 ≤ z ≤ 1/2`
/// and evaluated by linear interpolation in `|z|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct SampledProfile {
    z: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawProfile {
    z: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawProfile> for SampledProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        SampledProfile::new(raw.z, raw.values)
    }
}

impl SampledProfile {
    /// Accepts samples on either `[0, 1/2]` or `[-1/2, 1/2]`. A full-slab
    /// profile must be even to within [`SAMPLED_TOLERANCE`].
    pub fn new(z: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if z.len() != values.len() {
            return Err(Error::invalid(
                "sampled",
                format!("{} positions but {} values", z.len(), values.len()),
            ));
        }
        if z.len() < 2 {
            return Err(Error::invalid("sampled", "need at least two samples"));
        }
        if z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "sampled",
                "positions must be strictly increasing",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sampled", "values must be finite"));
        }
        let edge = 1e-12;
        let last = *z.last().unwrap();
        if (last - 0.5).abs() > edge {
            return Err(Error::invalid(
                "sampled",
                format!("grid must end at z = 1/2, got {last}"),
            ));
        }
        let first = z[0];
        if first.abs() <= edge {
            return Ok(SampledProfile { z, values });
        }
        if (first + 0.5).abs() > edge {
            return Err(Error::invalid(
                "sampled",
                format!("grid must start at z = 0 or z = -1/2, got {first}"),
            ));
        }

        let full = SampledProfile {
            z: z.clone(),
            values: values.clone(),
        };
        let scale = values
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for (&zi, &vi) in z.iter().zip(&values) {
            let mirrored = full.interpolate_raw(-zi);
            if (mirrored - vi).abs() > SAMPLED_TOLERANCE * scale {
                return Err(Error::invalid(
                    "sampled",
                    format!(
                        "profile is not even: N({zi}) = {vi} but N({}) = {mirrored}",
                        -zi
                    ),
                ));
            }
        }
        let (hz, hv): (Vec<f64>, Vec<f64>) = z
            .iter()
            .zip(&values)
            .filter(|(zi, _)| **zi >= 0.0)
            .map(|(zi, vi)| (*zi, *vi))
            .unzip();
        let (hz, hv) = if hz[0] > 0.0 {
            let mut hz2 = vec![0.0];
            let mut hv2 = vec![full.interpolate_raw(0.0)];
            hz2.extend(hz);
            hv2.extend(hv);
            (hz2, hv2)
        } else {
            (hz, hv)
        };
        Ok(SampledProfile { z: hz, values: hv })
    }

    pub fn positions(&self) -> &[f64] {
        &self.z
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn interpolate_raw(&self, x: f64) -> f64 {
        interpolate(&self.z, &self.values, x)
    }

    pub fn value_at(&self, z: f64) -> f64 {
        self.interpolate_raw(z.abs())
    }

    /// Exact integral over the full slab of the interpolant.
    pub fn mass(&self) -> f64 {
        2.0 * self
            .z
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(z, v)| 0.5 * (z[1] - z[0]) * (v[0] + v[1]))
            .sum::<f64>()
    }

    /// Exact `∫ N(z) cos(αz) dz` over the full slab for the piecewise-linear interpolant.
    pub fn cosine_moment(&self, alpha: f64) -> f64 {
        let mut total = 0.0;
        for (z, v) in self.z.windows(2).zip(self.values.windows(2)) {
            let slope = (v[1] - v[0]) / (z[1] - z[0]);
            let anti = |x: f64, f: f64| {
                f * (alpha * x).sin() / alpha + slope * (alpha * x).cos() / (alpha * alpha)
            };
            total += anti(z[1], v[1]) - anti(z[0], v[0]);
        }
        2.0 * total
    }
}

/// Linear interpolation on an increasing grid, clamped at the ends.
pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let idx = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let w = (x - x0) / (x1 - x0);
    ys[idx - 1] * (1.0 - w) + ys[idx] * w
}

/// Initial bulk density. All variants vanish at the surfaces, are even in
/// `z`, carry total mass `N0`, and start at rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `N0` in the open slab, zero on the surfaces.
    Step,
    /// `(3N0/2)(1 - 4z²)`.
    Parabolic,
    Sampled(SampledProfile),
}

impl InitialCondition {
    /// Checks the profile against the surface, mass and symmetry constraints.
    pub fn validate(&self, p: &Params) -> Result<()> {
        let InitialCondition::Sampled(profile) = self else {
            return Ok(());
        };
        let n0 = p.initial_density;
        let surface = *profile.values.last().unwrap();
        if surface.abs() > SAMPLED_TOLERANCE * n0 {
            return Err(Error::invalid(
                "sampled",
                format!("surface value must vanish, got {surface}"),
            ));
        }
        let mass = profile.mass();
        if (mass - n0).abs() > SAMPLED_TOLERANCE * n0 {
            return Err(Error::invalid(
                "sampled",
                format!("profile mass {mass} differs from N0 = {n0}"),
            ));
        }
        Ok(())
    }

    pub fn value_at(&self, p: &Params, z: f64) -> f64 {
        let n0 = p.initial_density;
        match self {
            InitialCondition::Step => {
                if z.abs() >= 0.5 - 1e-12 {
                    0.0
                } else {
                    n0
                }
            }
            InitialCondition::Parabolic => 1.5 * n0 * (1.0 - 4.0 * z * z),
            InitialCondition::Sampled(profile) => profile.value_at(z),
        }
    }

    /// `∫ N(z, 0) cos(αz) dz` over the slab, in closed form.
    pub fn cosine_moment(&self, p: &Params, alpha: f64) -> f64 {
        let n0 = p.initial_density;
        let (s, c) = (0.5 * alpha).sin_cos();
        match self {
            InitialCondition::Step => n0 * 2.0 * s / alpha,
            InitialCondition::Parabolic => {
                if alpha.abs() < 0.5 {
                    1.5 * n0 * parabola_moment_series(0.5 * alpha)
                } else {
                    1.5 * n0 * (16.0 * s / alpha.powi(3) - 8.0 * c / (alpha * alpha))
                }
            }
            InitialCondition::Sampled(profile) => profile.cosine_moment(alpha),
        }
    }

    pub fn mass(&self, p: &Params) -> f64 {
        match self {
            InitialCondition::Step | InitialCondition::Parabolic => p.initial_density,
            InitialCondition::Sampled(profile) => profile.mass(),
        }
    }
}

/// `2(sin x - x cos x)/x³` summed as a power series, for small `x`.
fn parabola_moment_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut total = 0.0;
    // k-th term: 2 (-1)^(k+1) 2k / (2k+1)! x^(2k-2)
    let mut power = 1.0;
    let mut factorial = 6.0;
    let mut sign = 1.0;
    for k in 1..12 {
        let kf = k as f64;
        total += sign * 4.0 * kf / factorial * power;
        power *= x2;
        factorial *= (2.0 * kf + 2.0) * (2.0 * kf + 3.0);
        sign = -sign;
    }
    total
}

/// Evaluates the initial profile on `zgrid`, which may cover `[0, 1/2]` or `[-1/2, 1/2]`.
pub fn sample_initial(ic: &InitialCondition, p: &Params, zgrid: &[f64]) -> Result<Vec<f64>> {
    ic.validate(p)?;
    if let Some(z) = zgrid
        .iter()
        .find(|z| z.abs() > 0.5 + 1e-12 || !z.is_finite())
    {
        return Err(Error::invalid(
            "zgrid",
            format!("{z} lies outside the slab"),
        ));
    }
    Ok(zgrid.iter().map(|&z| ic.value_at(p, z)).collect())
}
