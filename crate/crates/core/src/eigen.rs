//! Temporal exponents and the transcendental eigenvalue equations.
//!
//! Each spatial mode `cos(αz)` decays in time as a combination of `e^{μ₁t}`
//! and `e^{μ₂t}`, where `μ₁,₂` solve `Bμ² + μ + α² = 0`. Requiring every mode
//! to satisfy the kinetic and conservation conditions at the surface gives
//!
//! ```text
//! tan(α/2)/α + L/(1 + μA) = 0
//! ```
//!
//! once per exponent. Above `α_c = 1/(2√B)` the two equations are complex
//! conjugates of each other; the eigenvalues used by the modal solution are the
//! roots of their common real part.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

/// Half-width of the excluded band around each pole of `tan(α/2)`.
pub const POLE_GUARD: f64 = 1e-8;
/// Offset from the critical point applied to roots that land on it.
pub const CRITICAL_NUDGE: f64 = 1e-9;
/// Bisection stops once the bracket is this narrow (or `|f|` this small).
pub const ROOT_TOLERANCE: f64 = 1e-12;
/// Largest eigenvalue the bracket search will attempt.
pub const ALPHA_LIMIT: f64 = 1e6;

const SCAN_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub mu1: Complex64,
    pub mu2: Complex64,
}

impl Exponents {
    pub fn is_complex(&self) -> bool {
        self.mu1.im != 0.0
    }
}

/// Roots of `Bμ² + μ + α² = 0`. `mu1` carries the `+` sign (the faster decay,
/// or the positive imaginary part on the complex branch).
///
/// With `B = 0` the fast exponent is reported as `-∞` and `mu2 = -α²`.
pub fn exponents(alpha: f64, b: f64) -> Exponents {
    if b == 0.0 {
        return Exponents {
            mu1: Complex64::new(f64::NEG_INFINITY, 0.0),
            mu2: Complex64::new(-alpha * alpha, 0.0),
        };
    }
    let disc = 1.0 - 4.0 * alpha * alpha * b;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let mu1 = -(1.0 + root) / (2.0 * b);
        // product form avoids cancellation when 4α²B ≪ 1
        let mu2 = -2.0 * alpha * alpha / (1.0 + root);
        Exponents {
            mu1: Complex64::new(mu1, 0.0),
            mu2: Complex64::new(mu2, 0.0),
        }
    } else {
        let omega = (-disc).sqrt();
        let mu1 = Complex64::new(-0.5 / b, -0.5 * omega / b);
        Exponents {
            mu1,
            mu2: mu1.conj(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `tan(α/2)/α + L/(1 + μ₁A) = 0`
    F1,
    /// `tan(α/2)/α + L/(1 + μ₂A) = 0`
    F2,
    /// Real part of the merged equation.
    ReE,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub alpha: f64,
    pub exponents: Exponents,
    pub branch: Branch,
    /// `m` of the anchor `2mπ` whose pole-free neighbourhood holds `alpha`.
    pub index: usize,
}

/// `tan(α/2)/α`, refusing arguments inside the guard band of a pole.
pub fn tan_term(alpha: f64) -> Result<f64> {
    let k = (alpha / PI - 1.0) / 2.0;
    let nearest_pole = (2.0 * k.round() + 1.0) * PI;
    if (alpha - nearest_pole).abs() < POLE_GUARD {
        return Err(Error::Pole { alpha });
    }
    Ok((0.5 * alpha).tan() / alpha)
}

fn branch_value(alpha: f64, p: &Params, mu: Complex64) -> Result<Complex64> {
    let t = tan_term(alpha)?;
    let l = p.adsorption_length;
    Ok(t + l / (1.0 + mu * p.desorption_time))
}

fn real_branch(alpha: f64, p: &Params, pick: impl Fn(&Exponents) -> Complex64) -> Result<f64> {
    let critical = p.alpha_critical();
    if alpha > critical {
        return Err(Error::ComplexBranch { alpha, critical });
    }
    let ex = exponents(alpha, p.relaxation_time);
    Ok(branch_value(alpha, p, pick(&ex))?.re)
}

pub fn f1(alpha: f64, p: &Params) -> Result<f64> {
    real_branch(alpha, p, |e| e.mu1)
}

pub fn f2(alpha: f64, p: &Params) -> Result<f64> {
    real_branch(alpha, p, |e| e.mu2)
}

/// Both branch functions as complex numbers, valid on either side of `α_c`.
pub fn branch_functions(alpha: f64, p: &Params) -> Result<(Complex64, Complex64)> {
    let ex = exponents(alpha, p.relaxation_time);
    Ok((
        branch_value(alpha, p, ex.mu1)?,
        branch_value(alpha, p, ex.mu2)?,
    ))
}

/// Denominator `(2B - A)² + A²(4α²B - 1)` shared by both parts of the merged equation.
fn merged_denominator(alpha: f64, p: &Params) -> f64 {
    let (a, b) = (p.desorption_time, p.relaxation_time);
    (2.0 * b - a).powi(2) + a * a * (4.0 * alpha * alpha * b - 1.0)
}

/// Real part of the merged eigenvalue equation,
/// `tan(α/2)/α + L·2B(2B - A)/((2B - A)² + A²(4α²B - 1))`.
///
/// Below `α_c` the same expression equals the mean of `f1` and `f2`, so it is
/// used on both sides of the critical point.
pub fn re_e(alpha: f64, p: &Params) -> Result<f64> {
    let t = tan_term(alpha)?;
    let (a, b, l) = (p.desorption_time, p.relaxation_time, p.adsorption_length);
    if 2.0 * b == a {
        return Ok(t);
    }
    Ok(t + l * 2.0 * b * (2.0 * b - a) / merged_denominator(alpha, p))
}

/// `(Re[E], Im[E])` on the complex branch. The imaginary part carries the
/// sign belonging to `μ₁`; the `μ₂` equation has the opposite sign.
pub fn eigen_equation_complex(alpha: f64, p: &Params) -> Result<(f64, f64)> {
    let critical = p.alpha_critical();
    if alpha <= critical {
        return Err(Error::InvalidInput {
            field: "alpha",
            reason: format!("{alpha} is not above the critical value {critical}"),
        });
    }
    let (a, b, l) = (p.desorption_time, p.relaxation_time, p.adsorption_length);
    let re = re_e(alpha, p)?;
    let omega = (4.0 * alpha * alpha * b - 1.0).sqrt();
    let im = l * 2.0 * b * a * omega / merged_denominator(alpha, p);
    Ok((re, im))
}

/// Location of the pole `1 + μA = 0` of the adsorption term, present when `A > B`.
fn adsorption_pole(p: &Params) -> Option<f64> {
    let (a, b) = (p.desorption_time, p.relaxation_time);
    (a > b).then(|| (a - b).sqrt() / a)
}

fn bisect(f: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 || fm.abs() < ROOT_TOLERANCE || hi - lo < ROOT_TOLERANCE {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All sign-change roots of `f` in `[lo, hi]`, found by uniform scanning
/// followed by bisection. `f` must be continuous on the interval.
fn scan_roots(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let step = (hi - lo) / SCAN_SAMPLES as f64;
    let mut x0 = lo;
    let mut f0 = f(x0)?;
    for s in 1..=SCAN_SAMPLES {
        let x1 = if s == SCAN_SAMPLES {
            hi
        } else {
            lo + s as f64 * step
        };
        let f1 = f(x1)?;
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let root = bisect(f, x0, x1, f0)?;
            let residual = f(root)?.abs();
            if residual > 1e-6 {
                return Err(Error::Bracketing {
                    lo: x0,
                    hi: x1,
                    residual,
                });
            }
            roots.push(root);
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(roots)
}

/// Pole-free anchor interval around `2mπ`.
fn anchor_interval(m: usize) -> (f64, f64) {
    let centre = 2.0 * m as f64 * PI;
    let half = PI * (1.0 - 1e-6);
    (centre - half, centre + half)
}

fn roots_in_anchor(
    f: &dyn Fn(f64) -> Result<f64>,
    m: usize,
    upper: f64,
    splits: &[f64],
) -> Result<Vec<f64>> {
    let (lo, hi) = anchor_interval(m);
    let hi = hi.min(upper);
    if hi <= lo {
        return Ok(Vec::new());
    }
    let mut edges = vec![lo];
    for &s in splits {
        if s > lo && s < hi {
            let gap = 1e-9 * s.max(1.0);
            edges.push(s - gap);
            edges.push(s + gap);
        }
    }
    edges.push(hi);
    let mut roots = Vec::new();
    for pair in edges.chunks(2) {
        roots.extend(scan_roots(f, pair[0], pair[1])?);
    }
    Ok(roots)
}

fn make_mode(alpha: f64, p: &Params, branch: Branch, index: usize) -> Mode {
    Mode {
        alpha,
        exponents: exponents(alpha, p.relaxation_time),
        branch,
        index,
    }
}

/// The first `count` roots of `Re[E] = 0`, in increasing order.
///
/// Roots are searched in the pole-free neighbourhoods `2mπ ± π` for
/// `m = 1, 2, ...`, each split at the adsorption-term pole when it falls inside.
/// A root within [`CRITICAL_NUDGE`] of `α_c` is moved off it.
pub fn find_eigenvalues(p: &Params, count: usize) -> Result<Vec<Mode>> {
    p.validate()?;
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    if p.relaxation_time <= 0.0 {
        return Err(Error::invalid("B", "the modal solution requires B > 0"));
    }
    let critical = p.alpha_critical();
    let f = |alpha: f64| re_e(alpha, p);
    let splits: Vec<f64> = adsorption_pole(p).into_iter().collect();

    let mut modes = Vec::with_capacity(count);
    let mut m = 1;
    while modes.len() < count {
        let (lo, _) = anchor_interval(m);
        if lo > ALPHA_LIMIT {
            return Err(Error::PartialResult {
                found: modes.len(),
                requested: count,
                limit: ALPHA_LIMIT,
            });
        }
        for mut alpha in roots_in_anchor(&f, m, f64::INFINITY, &splits)? {
            if (alpha - critical).abs() < CRITICAL_NUDGE {
                alpha = if alpha >= critical {
                    critical + CRITICAL_NUDGE
                } else {
                    critical - CRITICAL_NUDGE
                };
            }
            modes.push(make_mode(alpha, p, Branch::ReE, m));
            if modes.len() == count {
                break;
            }
        }
        m += 1;
    }
    Ok(modes)
}

/// Roots of `f1` or `f2` below `α_c`, searched in the same anchor intervals as
/// [`find_eigenvalues`]. The real branches have finitely many roots, so fewer
/// than `max_count` may be returned.
pub fn find_branch_roots(p: &Params, branch: Branch, max_count: usize) -> Result<Vec<Mode>> {
    p.validate()?;
    if p.relaxation_time <= 0.0 {
        return Err(Error::invalid("B", "the real branches require B > 0"));
    }
    let critical = p.alpha_critical();
    let f: Box<dyn Fn(f64) -> Result<f64> + '_> = match branch {
        Branch::F1 => Box::new(|a| f1(a, p)),
        Branch::F2 => Box::new(|a| f2(a, p)),
        Branch::ReE => Box::new(|a| re_e(a, p)),
    };
    let splits: Vec<f64> = adsorption_pole(p).into_iter().collect();
    let mut modes = Vec::new();
    let mut m = 1;
    while modes.len() < max_count && anchor_interval(m).0 < critical.min(ALPHA_LIMIT) {
        for alpha in roots_in_anchor(&*f, m, critical, &splits)? {
            modes.push(make_mode(alpha, p, branch, m));
            if modes.len() == max_count {
                break;
            }
        }
        m += 1;
    }
    Ok(modes)
}

/// One sample of the eigenvalue functions. Entries are `NaN` at tan poles.
/// Above `α_c`, `f1` and `f2` hold real parts and `im_e` the imaginary part of the `μ₁` equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSample {
    pub alpha: f64,
    pub f1: f64,
    pub f2: f64,
    pub re_e: f64,
    pub im_e: f64,
}

pub fn eigen_dump(p: &Params, alphas: &[f64]) -> Vec<EigenSample> {
    alphas
        .iter()
        .map(|&alpha| match branch_functions(alpha, p) {
            Ok((g1, g2)) => EigenSample {
                alpha,
                f1: g1.re,
                f2: g2.re,
                re_e: re_e(alpha, p).unwrap_or(f64::NAN),
                im_e: g1.im,
            },
            Err(_) => EigenSample {
                alpha,
                f1: f64::NAN,
                f2: f64::NAN,
                re_e: f64::NAN,
                im_e: f64::NAN,
            },
        })
        .collect()
}
