//! Constructive extraction of the nearby exact solution and certification of
//! the stability bound.
//!
//! Given `f` with residual at most `eps` on the open triangle, the pipeline is
//!
//! 1. lift `f` to the `alpha`-homogeneous function `F(u, v) = (u+v)^a f(v/(u+v))`;
//! 2. measure its asymmetry `g(u) = F(u, 1) - F(1, u)`;
//! 3. for `alpha != 0` read off `c` from `g(2)` (negative `alpha`) or `g(1/2)`
//!    (positive `alpha`), center `f0(x) = f(x) - c((1-x)^a - 1)` and set
//!    `a = f0(1/2) / (2^(1-a) - 1)`, `b = a + c`;
//! 4. for `alpha = 0` fit `g(u) ~ lambda ln u` and set `c = f(1/2) - lambda ln(1/2)`.
//!
//! The result is then compared against `f` on a dense grid and the measured
//! deviation is checked against `K(alpha) * eps_hat`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::{Alpha, AlphaClass};
use crate::constants::{closed_bound_factor, k_alpha};
use crate::equation::{sup_residual, ResidualSummary};
use crate::error::{Error, Result};
use crate::function::{ClosedFunction, ClosedSolution, Evaluate, UnitIntervalFunction};
use crate::sampling::OpenTriangleSampler;

/// Relative slack of the pass/fail comparison.
pub const VERDICT_SLACK: f64 = 1e-9;

/// An exact solution on the open interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalSolution {
    /// `a x^alpha + b (1-x)^alpha - b`, used when `alpha != 0`.
    Power { a: f64, b: f64 },
    /// `lambda ln(1-x) + c`, used when `alpha = 0`.
    LogPlusConst { lambda: f64, c: f64 },
}

impl CanonicalSolution {
    fn name(&self) -> &'static str {
        match self {
            CanonicalSolution::Power { .. } => "power",
            CanonicalSolution::LogPlusConst { .. } => "log_plus_const",
        }
    }

    fn check_case(&self, alpha: Alpha) -> Result<()> {
        let ok = matches!(
            (self, alpha.is_zero()),
            (CanonicalSolution::Power { .. }, false)
                | (CanonicalSolution::LogPlusConst { .. }, true)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::CaseMismatch {
                candidate: self.name(),
                alpha: alpha.value(),
            })
        }
    }

    pub fn to_function(&self, alpha: Alpha) -> Result<UnitIntervalFunction> {
        self.check_case(alpha)?;
        Ok(match *self {
            CanonicalSolution::Power { a, b } => UnitIntervalFunction::power(a, b, alpha),
            CanonicalSolution::LogPlusConst { lambda, c } => UnitIntervalFunction::log(lambda, c),
        })
    }

    pub fn eval(&self, alpha: Alpha, x: f64) -> Result<f64> {
        self.to_function(alpha)?.eval(x)
    }
}

/// The homogeneous lift `F(u, v) = (u+v)^alpha f(v / (u+v))`.
pub fn lift_f<F: Evaluate + ?Sized>(f: &F, alpha: Alpha, u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0 && v > 0.0) {
        return Err(Error::OutOfDomain2 { x: u, y: v });
    }
    let s = u + v;
    let value = s.powf(alpha.value()) * f.eval(v / s)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteValue {
            context: "lift",
            x: u,
            y: v,
        })
    }
}

/// The asymmetry `g(u) = F(u, 1) - F(1, u) = (1+u)^alpha [f(1/(1+u)) - f(u/(1+u))]`.
pub fn defect_g<F: Evaluate + ?Sized>(f: &F, alpha: Alpha, u: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::OutOfDomain { x: u });
    }
    let s = 1.0 + u;
    let value = s.powf(alpha.value()) * (f.eval(1.0 / s)? - f.eval(u / s)?);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteValue {
            context: "defect g",
            x: u,
            y: f64::NAN,
        })
    }
}

/// The constant `c` of the power case: `g(2) / (2^a - 1)` for negative
/// `alpha`, `g(1/2) / (2^-a - 1)` for positive `alpha`.
///
/// Both routes only read `f(1/3)` and `f(2/3)`.
pub fn extract_c<F: Evaluate + ?Sized>(f: &F, alpha: Alpha) -> Result<f64> {
    let a = alpha.value();
    match alpha.class() {
        AlphaClass::Zero => Err(Error::ZeroAlphaHasNoC),
        AlphaClass::Negative => Ok(defect_g(f, alpha, 2.0)? / (a.exp2() - 1.0)),
        AlphaClass::PositiveNotOne => Ok(defect_g(f, alpha, 0.5)? / ((-a).exp2() - 1.0)),
    }
}

/// How much a sup-norm perturbation `eps` of `f` can move `c`, per unit `eps`.
pub fn c_amplification(alpha: Alpha) -> Option<f64> {
    let a = alpha.value();
    match alpha.class() {
        AlphaClass::Zero => None,
        AlphaClass::Negative => Some(2.0 * 3f64.powf(a) / (a.exp2() - 1.0).abs()),
        AlphaClass::PositiveNotOne => Some(2.0 * 1.5f64.powf(a) / ((-a).exp2() - 1.0).abs()),
    }
}

/// 64 log-spaced points on `[1/8, 8]`.
pub fn default_log_grid() -> Vec<f64> {
    log_spaced(0.125, 8.0, 64)
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub lambda: f64,
    /// `max |g(uv) - g(u) - g(v)|` over grid pairs whose product stays in the grid hull.
    pub log_defect: f64,
}

/// Least-squares slope of `g(u)` (at `alpha = 0`) against `ln u`, through the origin.
pub fn fit_lambda_log<F: Evaluate + ?Sized>(f: &F, u_grid: &[f64]) -> Result<LogFit> {
    if u_grid.len() < 8 {
        return Err(Error::DegenerateGrid(format!(
            "{} points, at least 8 needed",
            u_grid.len()
        )));
    }
    if u_grid.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
        return Err(Error::DegenerateGrid("points must be positive".into()));
    }
    let zero = Alpha::new(0.0)?;
    let g = u_grid
        .iter()
        .map(|&u| defect_g(f, zero, u))
        .collect::<Result<Vec<_>>>()?;
    let (num, den) = u_grid.iter().zip(&g).fold((0.0, 0.0), |(n, d), (&u, &gu)| {
        (n + gu * u.ln(), d + u.ln() * u.ln())
    });
    if den <= 0.0 {
        return Err(Error::DegenerateGrid("all points equal 1".into()));
    }
    let (lo, hi) = u_grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &u| {
            (l.min(u), h.max(u))
        });
    let mut log_defect = 0f64;
    for i in 0..u_grid.len() {
        for j in i..u_grid.len() {
            let w = u_grid[i] * u_grid[j];
            if w >= lo && w <= hi {
                let d = defect_g(f, zero, w)? - g[i] - g[j];
                log_defect = log_defect.max(d.abs());
            }
        }
    }
    Ok(LogFit {
        lambda: num / den,
        log_defect,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOptions {
    pub log_grid: Vec<f64>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            log_grid: default_log_grid(),
        }
    }
}

/// The constructive near-solution of `f`, with default options.
///
/// ```
/// use infostab::{extract_candidate, Alpha, CanonicalSolution, UnitIntervalFunction};
///
/// let alpha = Alpha::new(-1.0)?;
/// let f = UnitIntervalFunction::power(2.0, 5.0, alpha);
/// let CanonicalSolution::Power { a, b } = extract_candidate(&f, alpha)? else { unreachable!() };
/// assert!((a - 2.0).abs() < 1e-10 && (b - 5.0).abs() < 1e-10);
/// # Ok::<(), infostab::Error>(())
/// ```
pub fn extract_candidate<F: Evaluate + ?Sized>(f: &F, alpha: Alpha) -> Result<CanonicalSolution> {
    extract_candidate_with(f, alpha, &ExtractOptions::default())
}

pub fn extract_candidate_with<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    opts: &ExtractOptions,
) -> Result<CanonicalSolution> {
    if alpha.is_zero() {
        let fit = fit_lambda_log(f, &opts.log_grid)?;
        let c = f.eval(0.5)? - fit.lambda * 0.5f64.ln();
        return Ok(CanonicalSolution::LogPlusConst {
            lambda: fit.lambda,
            c,
        });
    }
    let a_exp = alpha.value();
    let c = extract_c(f, alpha)?;
    // f0(x) = f(x) - c((1-x)^a - 1); (1-x)^a - 1 is itself an exact solution.
    let f0_half = f.eval(0.5)? - c * (0.5f64.powf(a_exp) - 1.0);
    let a = f0_half / alpha.entropy_normalizer();
    Ok(CanonicalSolution::Power { a, b: a + c })
}

/// The power candidate obtained with the uncorrected centering
/// `f0(x) = f(x) - c (1-x)^a`. Only reported as a diagnostic: on an exact
/// solution it is off by a constant multiple of `c`.
pub fn extract_candidate_plain_centering<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
) -> Result<CanonicalSolution> {
    let c = extract_c(f, alpha)?;
    let f0_half = f.eval(0.5)? - c * 0.5f64.powf(alpha.value());
    let a = f0_half / alpha.entropy_normalizer();
    Ok(CanonicalSolution::Power { a, b: a + c })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Open,
    Closed,
}

/// Outcome of one certification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub alpha: f64,
    pub eps_hat: f64,
    pub k_alpha: f64,
    pub candidate: CanonicalSolution,
    pub sup_deviation: f64,
    pub bound: f64,
    pub pass: bool,
    pub samples: usize,
    pub margin: f64,
    pub seed: u64,
    pub domain: Domain,
}

impl StabilityCertificate {
    /// `sup_deviation / bound`; 0 when both vanish.
    pub fn utilization(&self) -> f64 {
        if self.bound > 0.0 {
            self.sup_deviation / self.bound
        } else if self.sup_deviation == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub fn verdict(sup_deviation: f64, bound: f64) -> bool {
    sup_deviation <= bound + VERDICT_SLACK * (1.0 + bound.abs())
}

/// Side information that is not part of the certificate proper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDiagnostics {
    /// `"pass"` or `"fail at sampled resolution"`.
    pub verdict: String,
    pub residual: ResidualSummary,
    pub deviation_argmax: f64,
    pub deviation_points: usize,
    /// Sensitivity of `c` to a unit perturbation of `f` (power case only).
    pub c_amplification: Option<f64>,
    /// Candidate and deviation under the uncorrected centering (power case only).
    pub plain_centering_candidate: Option<CanonicalSolution>,
    pub plain_centering_deviation: Option<f64>,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub certificate: StabilityCertificate,
    pub diagnostics: CertificateDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub deviation_points: usize,
    pub extract: ExtractOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            deviation_points: 10_000,
            extract: ExtractOptions::default(),
        }
    }
}

/// `points` equispaced abscissae on `[2m, 1 - 2m]`.
///
/// At `x` the uniform bound leans on the residual at `(1-x, x/2)`, whose
/// distance to the hypotenuse is `x/2`; `x >= 2m` keeps that point inside the
/// region the sampler covers.
pub fn deviation_grid(margin: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = (2.0 * margin, 1.0 - 2.0 * margin);
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        n => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `(max, argmax)` of `|lhs(x) - rhs(x)|` over `xs`, first maximizer in grid order.
fn sup_gap(xs: &[f64], gap: impl Fn(f64) -> Result<f64> + Sync) -> Result<(f64, f64)> {
    let values = xs
        .par_iter()
        .map(|&x| gap(x).map(f64::abs))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for (&x, &v) in xs.iter().zip(&values) {
        if v.is_nan() {
            return Err(Error::NonFiniteValue {
                context: "deviation",
                x,
                y: f64::NAN,
            });
        }
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

fn plain_centering<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    grid: &[f64],
) -> Result<(Option<CanonicalSolution>, Option<f64>)> {
    if alpha.is_zero() {
        return Ok((None, None));
    }
    let cand = extract_candidate_plain_centering(f, alpha)?;
    let (dev, _) = sup_gap(grid, |x| Ok(f.eval(x)? - cand.eval(alpha, x)?))?;
    Ok((Some(cand), Some(dev)))
}

/// Certifies `sup |f - candidate| <= K(alpha) * eps_hat` on the open interval.
///
/// ```
/// use infostab::{certify_open, Alpha, CertifyOptions, OpenTriangleSampler, UnitIntervalFunction};
///
/// let alpha = Alpha::new(2.0)?;
/// let f = UnitIntervalFunction::power(3.0, -2.0, alpha);
/// let sampler = OpenTriangleSampler::halton(2_000, 7);
/// let cert = certify_open(&f, alpha, &sampler, &CertifyOptions::default())?.certificate;
/// assert!(cert.pass && cert.sup_deviation < 1e-12);
/// # Ok::<(), infostab::Error>(())
/// ```
pub fn certify_open<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    sampler: &OpenTriangleSampler,
    opts: &CertifyOptions,
) -> Result<Certification> {
    let residual = sup_residual(f, alpha, sampler)?;
    let candidate = extract_candidate_with(f, alpha, &opts.extract)?;
    let k = k_alpha(alpha)?;
    let grid = deviation_grid(sampler.margin, opts.deviation_points);
    let (sup_deviation, deviation_argmax) =
        sup_gap(&grid, |x| Ok(f.eval(x)? - candidate.eval(alpha, x)?))?;
    let (plain_cand, plain_dev) = plain_centering(f, alpha, &grid)?;
    let bound = k * residual.eps_hat;
    Ok(assemble(
        alpha,
        residual,
        k,
        candidate,
        sup_deviation,
        deviation_argmax,
        bound,
        sampler,
        Domain::Open,
        grid.len(),
        plain_cand,
        plain_dev,
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    alpha: Alpha,
    residual: ResidualSummary,
    k: f64,
    candidate: CanonicalSolution,
    sup_deviation: f64,
    deviation_argmax: f64,
    bound: f64,
    sampler: &OpenTriangleSampler,
    domain: Domain,
    deviation_points: usize,
    plain_centering_candidate: Option<CanonicalSolution>,
    plain_centering_deviation: Option<f64>,
) -> Certification {
    let pass = verdict(sup_deviation, bound);
    let certificate = StabilityCertificate {
        alpha: alpha.value(),
        eps_hat: residual.eps_hat,
        k_alpha: k,
        candidate,
        sup_deviation,
        bound,
        pass,
        samples: residual.samples,
        margin: sampler.margin,
        seed: sampler.seed,
        domain,
    };
    let diagnostics = CertificateDiagnostics {
        verdict: if pass {
            "pass"
        } else {
            "fail at sampled resolution"
        }
        .to_string(),
        residual,
        deviation_argmax,
        deviation_points,
        c_amplification: c_amplification(alpha),
        plain_centering_candidate,
        plain_centering_deviation,
        utilization: certificate.utilization(),
    };
    Certification {
        certificate,
        diagnostics,
    }
}

/// Extends an open-interval candidate to a solution on `[0, 1]`.
///
/// For `alpha != 0` the boundary values are forced (`0` and `a - b`); for
/// `alpha = 0` they are copied from `f`, and the logarithmic part is dropped,
/// since on the closed domain only the zero logarithmic function survives.
pub fn extend_closed(
    candidate: CanonicalSolution,
    alpha: Alpha,
    f0: f64,
    f1: f64,
) -> Result<ClosedSolution> {
    candidate.check_case(alpha)?;
    Ok(match candidate {
        CanonicalSolution::Power { a, b } => ClosedSolution::H1 { a, b, alpha },
        CanonicalSolution::LogPlusConst { c, .. } => ClosedSolution::H2 { c, f0, f1 },
    })
}

/// Certification on `[0, 1]`.
///
/// `eps_hat` is measured on the interior sampler; the deviation grid adds the
/// two endpoints. The bound factor is `K(alpha)` for `alpha <= 0` and
/// `max{K(alpha), T(alpha) + 1}` for `alpha > 0`.
pub fn certify_closed<F: Evaluate>(
    f: &ClosedFunction<F>,
    alpha: Alpha,
    sampler: &OpenTriangleSampler,
    opts: &CertifyOptions,
) -> Result<Certification> {
    let residual = sup_residual(&f.interior, alpha, sampler)?;
    let candidate = extract_candidate_with(&f.interior, alpha, &opts.extract)?;
    let closed = extend_closed(candidate, alpha, f.at_zero, f.at_one)?;
    let mut grid = Vec::with_capacity(opts.deviation_points + 2);
    grid.push(0.0);
    grid.extend(deviation_grid(sampler.margin, opts.deviation_points));
    grid.push(1.0);
    let (sup_deviation, deviation_argmax) = sup_gap(&grid, |x| Ok(f.eval(x)? - closed.eval(x)?))?;
    let interior_grid = &grid[1..grid.len() - 1];
    let (plain_cand, plain_dev) = plain_centering(&f.interior, alpha, interior_grid)?;
    let bound = closed_bound_factor(alpha)? * residual.eps_hat;
    Ok(assemble(
        alpha,
        residual,
        k_alpha(alpha)?,
        candidate,
        sup_deviation,
        deviation_argmax,
        bound,
        sampler,
        Domain::Closed,
        grid.len(),
        plain_cand,
        plain_dev,
    ))
}

/// Intermediate quantities of the bound's derivation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProofDiagnostics {
    /// `F0(p, q) = f0(p) + p^a f0(q) - f0(pq) - (1-pq)^a f0((1-p)/(1-pq))`
    /// for the centered `f0`.
    pub f0_value: f64,
    /// `|G(p, q) - G(q, p)|` with `G(u, v) = F(u, v) + g(v)`.
    pub g_defect: f64,
}

/// Evaluates the centered combination `F0(p, q)` and the `G`-asymmetry at `(p, q)`.
///
/// The centering is `f0(x) = f(x) - c((1-x)^a - 1)` for `alpha != 0` and
/// `f0(x) = f(x) - lambda ln(1-x)` for `alpha = 0`.
pub fn proof_diagnostics<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    p: f64,
    q: f64,
) -> Result<ProofDiagnostics> {
    let centering = if alpha.is_zero() {
        Centering::Log(fit_lambda_log(f, &default_log_grid())?.lambda)
    } else {
        Centering::Power(extract_c(f, alpha)?)
    };
    proof_diagnostics_with(f, alpha, centering, p, q)
}

/// The function subtracted from `f` before forming `F0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Centering {
    /// `c((1-x)^a - 1)`.
    Power(f64),
    /// `lambda ln(1-x)`.
    Log(f64),
}

/// [`proof_diagnostics`] with a precomputed centering constant.
pub fn proof_diagnostics_with<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    centering: Centering,
    p: f64,
    q: f64,
) -> Result<ProofDiagnostics> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(Error::OutOfDomain2 { x: p, y: q });
    }
    let a = alpha.value();
    let f0 = |x: f64| -> Result<f64> {
        let shift = match centering {
            Centering::Power(c) => c * ((1.0 - x).powf(a) - 1.0),
            Centering::Log(lambda) => lambda * (-x).ln_1p(),
        };
        Ok(f.eval(x)? - shift)
    };
    let pq = p * q;
    let f0_value =
        f0(p)? + p.powf(a) * f0(q)? - f0(pq)? - (1.0 - pq).powf(a) * f0((1.0 - p) / (1.0 - pq))?;
    let big_g =
        |u: f64, v: f64| -> Result<f64> { Ok(lift_f(f, alpha, u, v)? + defect_g(f, alpha, v)?) };
    let g_defect = (big_g(p, q)? - big_g(q, p)?).abs();
    if !(f0_value.is_finite() && g_defect.is_finite()) {
        return Err(Error::NonFiniteValue {
            context: "proof diagnostics",
            x: p,
            y: q,
        });
    }
    Ok(ProofDiagnostics { f0_value, g_defect })
}
