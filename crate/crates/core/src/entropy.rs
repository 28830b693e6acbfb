//! Shannon and degree-`alpha` entropies, `alpha`-recursive measures built from
//! a two-symbol function, and the stability check for whole measure systems.
//!
//! A two-symbol measure `I2` is carried as `f(x) = I2(1 - x, x)`, so
//! `I2(q1, q2) = f(q2)`. Longer measures are generated by merging the first
//! two masses repeatedly:
//!
//! ```text
//! I_n(p1, ..., pn) = I_{n-1}(p1 + p2, p3, ..., pn) + (p1 + p2)^alpha I2(p1/(p1+p2), p2/(p1+p2))
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::{Alpha, AlphaClass};
use crate::constants::k_alpha;
use crate::error::{Error, Result};
use crate::function::{Evaluate, UnitIntervalFunction};
use crate::probability::ProbabilityVector;
use crate::sampling::{OpenTriangleSampler, SimplexSampler};
use crate::stability::{extract_candidate, verdict, CanonicalSolution};

/// Shannon entropy in bits.
///
/// ```
/// use infostab::{entropy::shannon, ProbabilityVector};
///
/// let p = ProbabilityVector::parse("0.5,0.25,0.125,0.125")?;
/// assert!((shannon(&p) - 1.75).abs() < 1e-15);
/// # Ok::<(), infostab::Error>(())
/// ```
pub fn shannon(p: &ProbabilityVector) -> f64 {
    -p.components().iter().map(|&q| q * q.log2()).sum::<f64>()
}

/// Entropy of degree `alpha`: `(sum p_i^alpha - 1) / (2^(1-alpha) - 1)`.
///
/// Both numerator and denominator go through `expm1`, so exponents very close
/// to 1 (built with [`Alpha::with_guard`]) keep their accuracy.
pub fn degree_alpha(p: &ProbabilityVector, alpha: Alpha) -> Result<f64> {
    let norm = alpha.entropy_normalizer();
    if norm == 0.0 {
        return Err(Error::AlphaNearOne {
            alpha: alpha.value(),
            guard: 0.0,
        });
    }
    let am1 = alpha.value() - 1.0;
    // sum p^a - 1 = sum p (p^(a-1) - 1)
    let num: f64 = p
        .components()
        .iter()
        .map(|&q| q * (am1 * q.ln()).exp_m1())
        .sum();
    Ok(num / norm)
}

/// The two-symbol degree-`alpha` entropy as a function of the second mass.
///
/// For `alpha != 0` this is the power form with `a = b = 1 / (2^(1-alpha) - 1)`;
/// for `alpha = 0` it is the constant 1.
pub fn two_symbol_entropy(alpha: Alpha) -> UnitIntervalFunction {
    if alpha.is_zero() {
        UnitIntervalFunction::log(0.0, 1.0)
    } else {
        let a = 1.0 / alpha.entropy_normalizer();
        UnitIntervalFunction::power(a, a, alpha)
    }
}

/// Recursion on a raw slice; the caller guarantees `p.len() >= 2`.
fn build<F: Evaluate + ?Sized>(i2: &F, alpha: f64, p: &[f64]) -> Result<f64> {
    let n = p.len();
    let mut head = p[0];
    let mut acc = 0.0;
    for &pk in &p[1..n - 1] {
        let s = head + pk;
        if 1.0 - s <= crate::probability::SUM_TOL {
            return Err(Error::OutOfDomain { x: s });
        }
        acc += s.powf(alpha) * i2.eval(pk / s)?;
        head = s;
    }
    Ok(acc + i2.eval(p[n - 1])?)
}

/// `I_n(p)` generated from `f(x) = I2(1 - x, x)` by the left-to-right recursion.
///
/// ```
/// use infostab::entropy::{degree_alpha, recursive_build, two_symbol_entropy};
/// use infostab::{Alpha, ProbabilityVector};
///
/// let alpha = Alpha::new(2.0)?;
/// let p = ProbabilityVector::uniform(3)?;
/// let built = recursive_build(&two_symbol_entropy(alpha), alpha, &p)?;
/// assert!((built - 4.0 / 3.0).abs() < 1e-12);
/// assert!((built - degree_alpha(&p, alpha)?).abs() < 1e-12);
/// # Ok::<(), infostab::Error>(())
/// ```
pub fn recursive_build<F: Evaluate + ?Sized>(
    i2: &F,
    alpha: Alpha,
    p: &ProbabilityVector,
) -> Result<f64> {
    build(i2, alpha.value(), p.components())
}

/// `max |I3(p1, p2, p3) - I3(p1, p3, p2)|` over `samples` (each of length 3).
pub fn semi_symmetry_defect<I>(i3: I, samples: &[ProbabilityVector]) -> Result<f64>
where
    I: Fn(&ProbabilityVector) -> Result<f64> + Sync,
{
    if let Some(bad) = samples.iter().find(|p| p.len() != 3) {
        return Err(Error::invalid(
            "samples",
            format!("expected triples, got length {}", bad.len()),
        ));
    }
    let defects = samples
        .par_iter()
        .map(|p| {
            let c = p.components();
            let swapped = ProbabilityVector::new(vec![c[0], c[2], c[1]])?;
            Ok((i3(p)? - i3(&swapped)?).abs())
        })
        .collect::<Vec<Result<f64>>>();
    defects.into_iter().try_fold(0f64, |m, d| Ok(m.max(d?)))
}

/// A sequence of measures generated from `i2`, with the slack sequence
/// `eps_1, eps_2, ...` of the hypotheses: `eps_1` bounds the semi-symmetry
/// defect of `I3` and `eps_k` (`k >= 2`) the recursion defect of `I_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSystem {
    pub i2: UnitIntervalFunction,
    pub alpha: Alpha,
    pub slack: Vec<f64>,
}

impl MeasureSystem {
    pub fn new(i2: UnitIntervalFunction, alpha: Alpha, slack: Vec<f64>) -> Result<Self> {
        if slack.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
            return Err(Error::invalid(
                "slack",
                "entries must be finite and nonnegative",
            ));
        }
        Ok(MeasureSystem { i2, alpha, slack })
    }

    pub fn measure(&self, p: &ProbabilityVector) -> Result<f64> {
        recursive_build(&self.i2, self.alpha, p)
    }

    /// `eps_k`, 1-based.
    pub fn eps(&self, k: usize) -> f64 {
        self.slack[k - 1]
    }
}

/// The function of the equation associated with the system: `f(x) = I2(1 - x, x)`.
pub fn reduce_to_f(system: &MeasureSystem) -> UnitIntervalFunction {
    system.i2.clone()
}

/// Recursion defect `|I_n(p) - I_{n-1}(p1+p2, ...) - (p1+p2)^a I2(...)|` at one point.
pub fn recursion_defect(system: &MeasureSystem, p: &ProbabilityVector) -> Result<f64> {
    let c = p.components();
    if c.len() < 3 {
        return Err(Error::invalid("p", "recursion defect needs n >= 3"));
    }
    let a = system.alpha.value();
    let s = c[0] + c[1];
    let mut merged = Vec::with_capacity(c.len() - 1);
    merged.push(s);
    merged.extend_from_slice(&c[2..]);
    let rhs = build(&system.i2, a, &merged)? + s.powf(a) * system.i2.eval(c[1] / s)?;
    Ok((system.measure(p)? - rhs).abs())
}

/// Measures a slack sequence `eps_1 .. eps_{n_max - 1}` for `i2`.
///
/// `eps_1` is the semi-symmetry defect of `I3`, taken over the triples
/// `(1 - x - y, y, x)` from `triangle` together with the `n = 3` simplex
/// samples. `eps_k` is the largest recursion defect of `I_{k+1}` over the
/// simplex samples.
pub fn measure_slack(
    i2: &UnitIntervalFunction,
    alpha: Alpha,
    n_max: usize,
    triangle: &OpenTriangleSampler,
    simplex: &SimplexSampler,
) -> Result<Vec<f64>> {
    check_n_max(n_max)?;
    let probe = MeasureSystem::new(i2.clone(), alpha, Vec::new())?;
    let mut triples = triangle
        .points()?
        .into_iter()
        .map(|(x, y)| ProbabilityVector::new(vec![1.0 - x - y, y, x]))
        .collect::<Result<Vec<_>>>()?;
    triples.extend(simplex.vectors(3)?);
    let eps1 = semi_symmetry_defect(|p| probe.measure(p), &triples)?;
    let mut slack = vec![eps1];
    for k in 2..n_max.max(3) {
        let vs = simplex.vectors(k + 1)?;
        let d = vs
            .par_iter()
            .map(|p| recursion_defect(&probe, p))
            .collect::<Vec<_>>()
            .into_iter()
            .try_fold(0f64, |m, d| Ok::<_, Error>(m.max(d?)))?;
        slack.push(d);
    }
    Ok(slack)
}

fn check_n_max(n_max: usize) -> Result<()> {
    if !(3..=8).contains(&n_max) {
        return Err(Error::invalid("n_max", format!("{n_max} is not in 3..=8")));
    }
    Ok(())
}

/// The comparison measure `J_n` built from an extracted candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparisonMeasure {
    /// `c H^alpha_n + d (p1^alpha - 1)`.
    Power { c: f64, d: f64 },
    /// `c H^0_n + lambda ln p1`, where `H^0_n = n - 1`.
    Log { c: f64, lambda: f64 },
}

impl ComparisonMeasure {
    pub fn from_candidate(candidate: CanonicalSolution, alpha: Alpha) -> Self {
        match candidate {
            CanonicalSolution::Power { a, b } => ComparisonMeasure::Power {
                c: alpha.entropy_normalizer() * a,
                d: b - a,
            },
            CanonicalSolution::LogPlusConst { lambda, c } => ComparisonMeasure::Log { c, lambda },
        }
    }

    pub fn eval(&self, alpha: Alpha, p: &ProbabilityVector) -> Result<f64> {
        let p1 = p.components()[0];
        Ok(match *self {
            ComparisonMeasure::Power { c, d } => {
                c * degree_alpha(p, alpha)? + d * (p1.powf(alpha.value()) - 1.0)
            }
            ComparisonMeasure::Log { c, lambda } => c * (p.len() - 1) as f64 + lambda * p1.ln(),
        })
    }
}

/// Right-hand side of the system bound at `p`.
///
/// With `e = 2 eps_2 + eps_1` and `S = eps_2 + ... + eps_{n-1}`:
/// `S + K e (1 + sum_{k=2}^{n-1} sum_{i<=k} p_i^alpha)` for `alpha < 0`,
/// `S + K (n-1) e` otherwise.
pub fn system_bound(system: &MeasureSystem, k: f64, p: &ProbabilityVector) -> f64 {
    let n = p.len();
    let e = 2.0 * system.eps(2) + system.eps(1);
    let prefix: f64 = (2..n).map(|j| system.eps(j)).sum();
    match system.alpha.class() {
        AlphaClass::Negative => {
            let a = system.alpha.value();
            let c = p.components();
            let mut partial = c[0].powf(a);
            let mut factor = 1.0;
            for &ck in &c[1..n - 1] {
                partial += ck.powf(a);
                factor += partial;
            }
            prefix + k * e * factor
        }
        _ => prefix + k * (n - 1) as f64 * e,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRow {
    pub n: usize,
    /// `max |I_n - J_n|` over the samples.
    pub deviation: f64,
    /// Bound at the sample with the largest `deviation / bound`.
    pub bound: f64,
    pub bound_min: f64,
    pub bound_max: f64,
    pub worst_ratio: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub alpha: f64,
    pub k_alpha: f64,
    pub candidate: CanonicalSolution,
    pub comparison: ComparisonMeasure,
    pub slack: Vec<f64>,
    pub rows: Vec<SystemRow>,
    pub pass: bool,
    pub note: String,
}

const COMPARISON_NOTE: &str = "J_n = c H_n + d (p1^alpha - 1) with c = (2^(1-alpha) - 1) a, d = b - a \
(alpha != 0) or J_n = c (n - 1) + lambda ln p1 (alpha = 0); the induction step of the argument writes \
J_n for alpha != 0 as c H_n alone, which differs from this form whenever d != 0";

/// Compares the generated `I_n` with `J_n` for `n = 2 ..= n_max`.
pub fn system_certificate(
    system: &MeasureSystem,
    n_max: usize,
    sampler: &SimplexSampler,
) -> Result<SystemReport> {
    check_n_max(n_max)?;
    let needed = (n_max - 1).max(2);
    if system.slack.len() < needed {
        return Err(Error::InsufficientSlackSequence {
            needed,
            got: system.slack.len(),
        });
    }
    let alpha = system.alpha;
    let k = k_alpha(alpha)?;
    let f = reduce_to_f(system);
    let candidate = extract_candidate(&f, alpha)?;
    let comparison = ComparisonMeasure::from_candidate(candidate, alpha);
    let mut rows = Vec::new();
    for n in 2..=n_max {
        let vs = sampler.vectors(n)?;
        let per_sample = vs
            .par_iter()
            .map(|p| {
                let dev = (system.measure(p)? - comparison.eval(alpha, p)?).abs();
                Ok((dev, system_bound(system, k, p)))
            })
            .collect::<Vec<Result<(f64, f64)>>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mut row = SystemRow {
            n,
            deviation: 0.0,
            bound: f64::NAN,
            bound_min: f64::INFINITY,
            bound_max: f64::NEG_INFINITY,
            worst_ratio: f64::NEG_INFINITY,
            samples: per_sample.len(),
            pass: true,
        };
        for &(dev, bound) in &per_sample {
            row.deviation = row.deviation.max(dev);
            row.bound_min = row.bound_min.min(bound);
            row.bound_max = row.bound_max.max(bound);
            let ratio = if bound > 0.0 {
                dev / bound
            } else if dev == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            if ratio > row.worst_ratio {
                row.worst_ratio = ratio;
                row.bound = bound;
            }
            row.pass &= verdict(dev, bound);
        }
        rows.push(row);
    }
    Ok(SystemReport {
        alpha: alpha.value(),
        k_alpha: k,
        candidate,
        comparison,
        slack: system.slack.clone(),
        pass: rows.iter().all(|r| r.pass),
        rows,
        note: COMPARISON_NOTE.to_string(),
    })
}
