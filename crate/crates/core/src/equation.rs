//! Residual of the parametric fundamental equation of information
//!
//! ```text
//! f(x) + (1-x)^a f(y/(1-x)) = f(y) + (1-y)^a f(x/(1-y)),   x, y, x+y in (0, 1)
//! ```
//!
//! and defect testers for the Cauchy-type helper equations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::Alpha;
use crate::error::{Error, Result};
use crate::function::Evaluate;
use crate::sampling::OpenTriangleSampler;

/// Left side minus right side of the equation at `(x, y)`.
///
/// The two differences `f(x) - f(y)` and `(1-x)^a f(..) - (1-y)^a f(..)` are
/// formed first, so swapping `x` and `y` negates the result bit for bit and
/// the diagonal `x = y` gives exactly zero.
///
/// ```
/// use infostab::{residual, Alpha, UnitIntervalFunction};
///
/// let alpha = Alpha::new(2.0)?;
/// let f = UnitIntervalFunction::power(3.0, -2.0, alpha);
/// assert!(residual(&f, alpha, 0.3, 0.2)?.abs() < 1e-12);
/// # Ok::<(), infostab::Error>(())
/// ```
pub fn residual<F: Evaluate + ?Sized>(f: &F, alpha: Alpha, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0 && x + y < 1.0) {
        return Err(Error::OutOfDomain2 { x, y });
    }
    let a = alpha.value();
    let wx = (1.0 - x).powf(a);
    let wy = (1.0 - y).powf(a);
    let direct = f.eval(x)? - f.eval(y)?;
    let weighted = wx * f.eval(y / (1.0 - x))? - wy * f.eval(x / (1.0 - y))?;
    let r = direct + weighted;
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFiniteValue {
            context: "residual",
            x,
            y,
        })
    }
}

/// Sampled sup-norm of the residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    /// `max |residual|` over the samples.
    pub eps_hat: f64,
    /// A sample attaining `eps_hat` (the first one in sampler order).
    pub argmax: (f64, f64),
    /// 99th percentile of `|residual|` (nearest rank).
    pub p99: f64,
    pub samples: usize,
}

/// Evaluates `|residual|` on every sample concurrently and reduces order-insensitively.
pub fn sup_residual<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    sampler: &OpenTriangleSampler,
) -> Result<ResidualSummary> {
    let points = sampler.points()?;
    sup_residual_on(f, alpha, &points)
}

/// [`sup_residual`] over an explicit point set.
pub fn sup_residual_on<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    points: &[(f64, f64)],
) -> Result<ResidualSummary> {
    if points.is_empty() {
        return Err(Error::invalid("samples", "no admissible sample points"));
    }
    let values: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(x, y)| residual(f, alpha, x, y).map(f64::abs))
        .collect();
    // Report the first failing sample in sampler order, independent of scheduling.
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let (imax, eps_hat) =
        values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            });
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let rank = ((0.99 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(ResidualSummary {
        eps_hat,
        argmax: points[imax],
        p99: sorted[rank - 1],
        samples: points.len(),
    })
}

/// A real interval with optional endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub include_lo: bool,
    pub include_hi: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            include_lo: false,
            include_hi: false,
        }
    }

    /// `(lo, hi]`.
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            include_lo: false,
            include_hi: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.include_lo {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.include_hi {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }
}

fn max_defect<D>(
    pairs: &[(f64, f64)],
    admissible: impl Fn(f64, f64) -> bool,
    defect: D,
) -> Result<f64>
where
    D: Fn(f64, f64) -> f64,
{
    let mut worst = 0f64;
    for &(x, y) in pairs {
        if !admissible(x, y) {
            return Err(Error::OutOfDomain2 { x, y });
        }
        let d = defect(x, y).abs();
        if !d.is_finite() {
            return Err(Error::NonFiniteValue {
                context: "defect",
                x,
                y,
            });
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

/// `max |a(x+y) - a(x) - a(y)|` over pairs with `x, y, x+y` in `domain`, `x, y >= 0`.
pub fn additive_defect(
    a: impl Fn(f64) -> f64,
    pairs: &[(f64, f64)],
    domain: Interval,
) -> Result<f64> {
    max_defect(
        pairs,
        |x, y| {
            x >= 0.0
                && y >= 0.0
                && domain.contains(x)
                && domain.contains(y)
                && domain.contains(x + y)
        },
        |x, y| a(x + y) - a(x) - a(y),
    )
}

/// `max |mu(xy) - mu(x) mu(y)|` over pairs with `x, y, xy` in `domain`, `x, y >= 0`.
pub fn multiplicative_defect(
    mu: impl Fn(f64) -> f64,
    pairs: &[(f64, f64)],
    domain: Interval,
) -> Result<f64> {
    max_defect(
        pairs,
        |x, y| {
            x >= 0.0
                && y >= 0.0
                && domain.contains(x)
                && domain.contains(y)
                && domain.contains(x * y)
        },
        |x, y| mu(x * y) - mu(x) * mu(y),
    )
}

/// `max |l(xy) - l(x) - l(y)|` over pairs with `x, y > 0` and `x, y, xy` in `domain`.
pub fn logarithmic_defect(
    l: impl Fn(f64) -> f64,
    pairs: &[(f64, f64)],
    domain: Interval,
) -> Result<f64> {
    max_defect(
        pairs,
        |x, y| {
            x > 0.0 && y > 0.0 && domain.contains(x) && domain.contains(y) && domain.contains(x * y)
        },
        |x, y| l(x * y) - l(x) - l(y),
    )
}
