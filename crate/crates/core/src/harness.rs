//! Instance generation, constant sweeps and batch experiments.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::{Alpha, AlphaClass, DEFAULT_ALPHA_GUARD};
use crate::constants::{k_alpha, k_negative_supremum, t_alpha};
use crate::error::{Error, Result};
use crate::function::{
    ClosedFunction, Evaluate, NoiseKind, PerturbationSpec, Tabulated, UnitIntervalFunction,
};
use crate::oracle::{chebyshev_fit_log, chebyshev_fit_power, MIN_POWER_ALPHA};
use crate::sampling::{OpenTriangleSampler, SamplingScheme, DEFAULT_MARGIN};
use crate::stability::{
    certify_closed, certify_open, deviation_grid, CanonicalSolution, Certification, CertifyOptions,
    Domain,
};

/// One experiment, as a flat key-value file.
///
/// ```
/// use infostab::harness::ExperimentConfig;
///
/// let cfg: ExperimentConfig = toml::from_str("alpha = -1.0\na = 2.0\nb = 5.0\nepsilon = 1e-3")?;
/// let text = cfg.to_toml()?;
/// assert_eq!(ExperimentConfig::from_toml(&text)?, cfg);
/// # Ok::<(), Box<dyn std::error::Error>>(())
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub alpha_guard: f64,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub c: f64,
    pub epsilon: f64,
    pub noise_kind: NoiseKind,
    pub noise_seed: u64,
    pub samples: usize,
    pub margin: f64,
    pub seed: u64,
    pub scheme: SamplingScheme,
    pub deviation_points: usize,
    pub domain: Domain,
    /// Boundary values of a closed instance, overriding the generated ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: 2.0,
            alpha_guard: DEFAULT_ALPHA_GUARD,
            a: 1.0,
            b: 1.0,
            lambda: 1.0,
            c: 0.0,
            epsilon: 0.0,
            noise_kind: NoiseKind::UniformIid,
            noise_seed: 0,
            samples: 20_000,
            margin: DEFAULT_MARGIN,
            seed: 0,
            scheme: SamplingScheme::HaltonQuasiRandom,
            deviation_points: 10_000,
            domain: Domain::Open,
            f0: None,
            f1: None,
            manifest_path: None,
            table_path: None,
            report_path: None,
        }
    }
}

fn finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{v} is not finite")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn alpha(&self) -> Result<Alpha> {
        Alpha::with_guard(self.alpha, self.alpha_guard)
    }

    pub fn sampler(&self) -> Result<OpenTriangleSampler> {
        OpenTriangleSampler::new(self.samples, self.margin, self.seed, self.scheme)
    }

    pub fn perturbation(&self) -> PerturbationSpec {
        PerturbationSpec {
            epsilon: self.epsilon,
            kind: self.noise_kind,
            seed: self.noise_seed,
        }
    }

    pub fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            deviation_points: self.deviation_points,
            ..CertifyOptions::default()
        }
    }

    /// The exact member of the family the instance is built around.
    pub fn truth(&self) -> Result<CanonicalSolution> {
        Ok(if self.alpha()?.is_zero() {
            CanonicalSolution::LogPlusConst {
                lambda: self.lambda,
                c: self.c,
            }
        } else {
            CanonicalSolution::Power {
                a: self.a,
                b: self.b,
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let alpha = self.alpha()?;
        for (field, v) in [
            ("a", self.a),
            ("b", self.b),
            ("lambda", self.lambda),
            ("c", self.c),
        ] {
            finite(field, v)?;
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(
                "epsilon",
                format!("{} must be finite and >= 0", self.epsilon),
            ));
        }
        self.sampler()?;
        if self.deviation_points < 2 {
            return Err(Error::invalid("deviation_points", "at least 2 required"));
        }
        if self.domain == Domain::Closed && alpha.is_zero() && self.lambda != 0.0 {
            return Err(Error::invalid(
                "lambda",
                "a closed alpha = 0 instance needs lambda = 0 (no logarithmic part on [0, 1])",
            ));
        }
        for (field, v) in [("f0", self.f0), ("f1", self.f1)] {
            if let Some(v) = v {
                finite(field, v)?;
            }
        }
        Ok(())
    }
}

/// Everything recorded about a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: InstanceKind,
    pub alpha: f64,
    pub truth: CanonicalSolution,
    pub perturbation: PerturbationSpec,
    pub domain: Domain,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<[f64; 2]>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Exact,
    Perturbed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub function: UnitIntervalFunction,
    /// Present for closed-domain instances.
    pub closed: Option<ClosedFunction<UnitIntervalFunction>>,
    pub manifest: Manifest,
}

/// Builds the exact solution of `config`, adds the configured noise and, if
/// paths are set, writes the manifest and a tabulated dump.
///
/// Closed instances get boundary values compatible with the closed-domain
/// solutions: for `alpha < 0` exactly `0` and `a - b`; for `alpha > 0` the
/// same values plus noise; for `alpha = 0` the constant `c`. Explicit `f0`,
/// `f1` override these.
pub fn gen_instance(config: &ExperimentConfig) -> Result<Instance> {
    config.validate()?;
    let alpha = config.alpha()?;
    let truth = config.truth()?;
    let spec = config.perturbation();
    let function = truth.to_function(alpha)?.perturbed(spec)?;
    let noise = crate::function::Noise::new(spec)?;
    let closed = match config.domain {
        Domain::Open => None,
        Domain::Closed => {
            let (at_zero, at_one) = match (alpha.class(), truth) {
                (AlphaClass::Negative, CanonicalSolution::Power { a, b }) => (0.0, a - b),
                (AlphaClass::PositiveNotOne, CanonicalSolution::Power { a, b }) => {
                    (noise.at(0.0), a - b + noise.at(1.0))
                }
                _ => (config.c, config.c),
            };
            Some(ClosedFunction {
                interior: function.clone(),
                at_zero: config.f0.unwrap_or(at_zero),
                at_one: config.f1.unwrap_or(at_one),
            })
        }
    };
    let manifest = Manifest {
        status: if config.epsilon == 0.0 {
            InstanceKind::Exact
        } else {
            InstanceKind::Perturbed
        },
        alpha: alpha.value(),
        truth,
        perturbation: spec,
        domain: config.domain,
        boundary: closed.as_ref().map(|c| [c.at_zero, c.at_one]),
        config: config.clone(),
    };
    let instance = Instance {
        function,
        closed,
        manifest,
    };
    if let Some(path) = &config.manifest_path {
        write_json(path, &instance.manifest)?;
    }
    if let Some(path) = &config.table_path {
        dump_table(&instance.function, config.margin, config.deviation_points)?.save(path)?;
    }
    Ok(instance)
}

/// Samples `f` at `points` equispaced abscissae on `[m, 1 - m]`, every
/// argument a residual scan with margin `m` can reach.
pub fn dump_table(f: &UnitIntervalFunction, margin: f64, points: usize) -> Result<Tabulated> {
    Tabulated::sample(f, deviation_grid(margin / 2.0, points))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    /// `|K - (4T + 3) / |2^(1-a) - 1|| / K` where `T` exists.
    pub relation_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsSweep {
    pub rows: Vec<ConstantsRow>,
    /// Largest `K` over the negative exponents of the grid.
    pub negative_grid_max: Option<f64>,
    /// `sup_{alpha < 0} K(alpha)`.
    pub negative_supremum: f64,
    pub max_relation_residual: Option<f64>,
}

impl ConstantsSweep {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `K`, `T` and the relation between them on a grid of exponents.
pub fn sweep_constants(alpha_grid: &[f64]) -> Result<ConstantsSweep> {
    let rows = alpha_grid
        .iter()
        .map(|&a| {
            let alpha = Alpha::new(a)?;
            let k = k_alpha(alpha)?;
            let t = t_alpha(alpha).ok();
            let relation_residual = t.map(|t| {
                ((4.0 * t + 3.0) / ((1.0 - alpha.value()).exp2() - 1.0).abs() - k).abs() / k
            });
            Ok(ConstantsRow {
                alpha: alpha.value(),
                k,
                t,
                relation_residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let negative_grid_max = rows
        .iter()
        .filter(|r| r.alpha < 0.0)
        .map(|r| r.k)
        .reduce(f64::max);
    let max_relation_residual = rows
        .iter()
        .filter_map(|r| r.relation_residual)
        .reduce(f64::max);
    Ok(ConstantsSweep {
        rows,
        negative_grid_max,
        negative_supremum: k_negative_supremum(),
        max_relation_residual,
    })
}

/// `n` exponents `-10^t`, log-spaced between `lo` and `hi` (both negative).
pub fn negative_log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::stability::log_spaced(-lo, -hi, n)
        .into_iter()
        .map(|m| -m)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub oracle_dev: f64,
    /// `oracle_dev <= sup_deviation <= bound`, up to rounding.
    pub sandwich: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub index: usize,
    pub status: ItemStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certification: Option<Certification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    /// Largest parameter error of the candidate against the manifest truth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    /// `passed / (passed + failed)`; absent when nothing was certified.
    pub pass_rate: Option<f64>,
    pub max_utilization: Option<f64>,
    pub items: Vec<BatchItem>,
}

/// Rounding allowance of the oracle comparison.
pub const SANDWICH_REL: f64 = 1e-9;
pub const SANDWICH_ABS: f64 = 1e-12;

/// Whether the minimax deviation sits below the candidate's and that below the bound.
pub fn sandwich_holds(oracle_dev: f64, sup_deviation: f64, bound: f64) -> bool {
    oracle_dev <= sup_deviation * (1.0 + SANDWICH_REL) + SANDWICH_ABS
        && crate::stability::verdict(sup_deviation, bound)
}

/// Minimax deviation of the instance's family on the certificate's grid.
pub fn oracle_on_grid(
    f: &UnitIntervalFunction,
    alpha: Alpha,
    margin: f64,
    points: usize,
) -> Result<Option<f64>> {
    let grid = deviation_grid(margin, points);
    if alpha.is_zero() {
        Ok(Some(chebyshev_fit_log(f, &grid)?.dev))
    } else if alpha.value().abs() > MIN_POWER_ALPHA {
        Ok(Some(chebyshev_fit_power(f, alpha, &grid)?.dev))
    } else {
        Ok(None)
    }
}

fn parameter_error(candidate: CanonicalSolution, truth: CanonicalSolution) -> Option<f64> {
    match (candidate, truth) {
        (CanonicalSolution::Power { a, b }, CanonicalSolution::Power { a: a0, b: b0 }) => {
            Some((a - a0).abs().max((b - b0).abs()))
        }
        (
            CanonicalSolution::LogPlusConst { lambda, c },
            CanonicalSolution::LogPlusConst { lambda: l0, c: c0 },
        ) => Some((lambda - l0).abs().max((c - c0).abs())),
        _ => None,
    }
}

fn run_item(
    config: &ExperimentConfig,
) -> Result<(Certification, Option<OracleComparison>, Option<f64>)> {
    let instance = gen_instance(config)?;
    let alpha = config.alpha()?;
    let sampler = config.sampler()?;
    let opts = config.certify_options();
    let cert = match &instance.closed {
        None => certify_open(&instance.function, alpha, &sampler, &opts)?,
        Some(closed) => certify_closed(closed, alpha, &sampler, &opts)?,
    };
    let c = &cert.certificate;
    let oracle = oracle_on_grid(
        &instance.function,
        alpha,
        config.margin,
        config.deviation_points,
    )?
    .map(|dev| OracleComparison {
        oracle_dev: dev,
        sandwich: sandwich_holds(
            dev,
            interior_deviation(&instance, &cert).unwrap_or(c.sup_deviation),
            c.bound,
        ),
    });
    let err = parameter_error(c.candidate, instance.manifest.truth);
    if let Some(path) = &config.report_path {
        write_json(path, &cert)?;
    }
    Ok((cert, oracle, err))
}

/// Interior deviation of a closed certificate, comparable with the oracle fit.
fn interior_deviation(instance: &Instance, cert: &Certification) -> Option<f64> {
    instance.closed.as_ref()?;
    let alpha = Alpha::new(cert.certificate.alpha).ok()?;
    let grid = deviation_grid(
        cert.certificate.margin,
        cert.diagnostics.deviation_points - 2,
    );
    grid.iter()
        .map(|&x| {
            Some(
                (instance.function.eval(x).ok()?
                    - cert.certificate.candidate.eval(alpha, x).ok()?)
                .abs(),
            )
        })
        .try_fold(0f64, |m, d| Some(m.max(d?)))
}

/// Runs every config, `workers` at a time (all cores when `None`).
///
/// Items fail independently: an invalid config is recorded as an error and
/// the batch carries on. The report is ordered by config index.
pub fn run_batch(configs: &[ExperimentConfig], workers: Option<usize>) -> Result<BatchReport> {
    if configs.is_empty() {
        return Err(Error::invalid("configs", "batch is empty"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let items: Vec<BatchItem> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, cfg)| match run_item(cfg) {
                Ok((cert, oracle, parameter_error)) => BatchItem {
                    index,
                    status: if cert.certificate.pass {
                        ItemStatus::Pass
                    } else {
                        ItemStatus::Fail
                    },
                    certification: Some(cert),
                    oracle,
                    parameter_error,
                    error: None,
                },
                Err(e) => BatchItem {
                    index,
                    status: ItemStatus::Error,
                    certification: None,
                    oracle: None,
                    parameter_error: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    });
    let count = |s| items.iter().filter(|i| i.status == s).count();
    let (passed, failed, errors) = (
        count(ItemStatus::Pass),
        count(ItemStatus::Fail),
        count(ItemStatus::Error),
    );
    let max_utilization = items
        .iter()
        .filter_map(|i| i.certification.as_ref())
        .map(|c| c.certificate.utilization())
        .reduce(f64::max);
    Ok(BatchReport {
        total: items.len(),
        passed,
        failed,
        errors,
        pass_rate: (passed + failed > 0).then(|| passed as f64 / (passed + failed) as f64),
        max_utilization,
        items,
    })
}
