//! Real functions on the open unit interval and their closed-interval extensions.

use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alpha::Alpha;
use crate::error::{Error, Result};

/// Anything that can be evaluated on `(0, 1)`.
///
/// Implemented by [`UnitIntervalFunction`] and by [`FromFn`], which wraps a
/// plain closure so that ad hoc test functions go through the same code paths.
pub trait Evaluate: Sync {
    fn eval(&self, x: f64) -> Result<f64>;
}

impl<T: Evaluate + ?Sized> Evaluate for &T {
    fn eval(&self, x: f64) -> Result<f64> {
        (**self).eval(x)
    }
}

/// Adapter turning a closure into an [`Evaluate`] on `(0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct FromFn<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Evaluate for FromFn<F> {
    fn eval(&self, x: f64) -> Result<f64> {
        check_open(x)?;
        Ok((self.0)(x))
    }
}

pub(crate) fn check_open(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain { x })
    }
}

/// A function `(0, 1) -> R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitIntervalFunction {
    /// `a x^alpha + b (1-x)^alpha - b`.
    Power {
        a: f64,
        b: f64,
        alpha: Alpha,
    },
    /// `lambda ln(1-x) + c`.
    Log {
        lambda: f64,
        c: f64,
    },
    Tabulated(Tabulated),
    Perturbed {
        base: Box<UnitIntervalFunction>,
        noise: Noise,
    },
}

impl UnitIntervalFunction {
    pub fn power(a: f64, b: f64, alpha: Alpha) -> Self {
        UnitIntervalFunction::Power { a, b, alpha }
    }

    pub fn log(lambda: f64, c: f64) -> Self {
        UnitIntervalFunction::Log { lambda, c }
    }

    pub fn perturbed(self, spec: PerturbationSpec) -> Result<Self> {
        Ok(UnitIntervalFunction::Perturbed {
            base: Box::new(self),
            noise: Noise::new(spec)?,
        })
    }

    /// The function with any perturbation layers stripped.
    pub fn unperturbed(&self) -> &UnitIntervalFunction {
        match self {
            UnitIntervalFunction::Perturbed { base, .. } => base.unperturbed(),
            other => other,
        }
    }
}

impl Evaluate for UnitIntervalFunction {
    fn eval(&self, x: f64) -> Result<f64> {
        check_open(x)?;
        let value = match self {
            UnitIntervalFunction::Power { a, b, alpha } => {
                let al = alpha.value();
                a * x.powf(al) + b * ((1.0 - x).powf(al) - 1.0)
            }
            UnitIntervalFunction::Log { lambda, c } => {
                // lambda = 0 must give c even where ln(1-x) is large.
                if *lambda == 0.0 {
                    *c
                } else {
                    lambda * (-x).ln_1p() + c
                }
            }
            UnitIntervalFunction::Tabulated(t) => t.eval(x)?,
            UnitIntervalFunction::Perturbed { base, noise } => base.eval(x)? + noise.at(x),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFiniteValue {
                context: "function evaluation",
                x,
                y: f64::NAN,
            })
        }
    }
}

/// Linearly interpolated samples on a strictly increasing grid inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRaw", into = "TabulatedRaw")]
pub struct Tabulated {
    grid: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TabulatedRaw {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<TabulatedRaw> for Tabulated {
    type Error = Error;
    fn try_from(raw: TabulatedRaw) -> Result<Self> {
        Tabulated::new(raw.grid, raw.values)
    }
}

impl From<Tabulated> for TabulatedRaw {
    fn from(t: Tabulated) -> Self {
        TabulatedRaw {
            grid: t.grid,
            values: t.values,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    x: f64,
    value: f64,
}

impl Tabulated {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::invalid("grid", "needs at least 2 points"));
        }
        if grid.len() != values.len() {
            return Err(Error::invalid(
                "values",
                format!("{} values for {} grid points", values.len(), grid.len()),
            ));
        }
        if let Some(&x) = grid.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::invalid("grid", format!("{x} is not inside (0, 1)")));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid", "must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "must be finite"));
        }
        Ok(Tabulated { grid, values })
    }

    /// Samples `f` on `grid`.
    pub fn sample<F: Evaluate + ?Sized>(f: &F, grid: Vec<f64>) -> Result<Self> {
        let values = grid
            .iter()
            .map(|&x| f.eval(x))
            .collect::<Result<Vec<_>>>()?;
        Tabulated::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_open(x)?;
        let (lo, hi) = self.hull();
        if x < lo || x > hi {
            return Err(Error::TabulatedExtrapolation { x, lo, hi });
        }
        let i = self.grid.partition_point(|&g| g <= x);
        if i == self.grid.len() {
            return Ok(self.values[i - 1]);
        }
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        let t = (x - x0) / (x1 - x0);
        Ok(y0 + t * (y1 - y0))
    }

    /// Reads `x,value` CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "value" {
            return Err(Error::invalid("csv header", "expected `x,value`"));
        }
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for row in rdr.deserialize() {
            let row: CsvRow = row?;
            grid.push(row.x);
            values.push(row.value);
        }
        Tabulated::new(grid, values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (&x, &value) in self.grid.iter().zip(&self.values) {
            wtr.serialize(CsvRow { x, value })?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Independent uniform draw in `[-eps, eps]` for every distinct `x`.
    UniformIid,
    /// `eps * sin(omega x + phi)` with seeded `omega`, `phi`.
    SmoothBump,
}

/// Generative parameters of a sup-norm bounded perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub kind: NoiseKind,
    pub seed: u64,
}

/// A realized perturbation `delta` with `|delta(x)| <= epsilon`.
///
/// The realization is a pure function of `(x, spec)`: the uniform kind keys a
/// ChaCha stream on the bit pattern of `x` together with the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PerturbationSpec", into = "PerturbationSpec")]
pub struct Noise {
    spec: PerturbationSpec,
    omega: f64,
    phi: f64,
}

impl TryFrom<PerturbationSpec> for Noise {
    type Error = Error;
    fn try_from(spec: PerturbationSpec) -> Result<Self> {
        Noise::new(spec)
    }
}

impl From<Noise> for PerturbationSpec {
    fn from(n: Noise) -> Self {
        n.spec
    }
}

impl Noise {
    pub fn new(spec: PerturbationSpec) -> Result<Self> {
        if !(spec.epsilon >= 0.0 && spec.epsilon.is_finite()) {
            return Err(Error::invalid(
                "epsilon",
                format!("{} must be a finite nonnegative number", spec.epsilon),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let omega = rng.random_range(TAU..4.0 * TAU);
        let phi = rng.random_range(0.0..TAU);
        Ok(Noise { spec, omega, phi })
    }

    pub fn spec(&self) -> PerturbationSpec {
        self.spec
    }

    pub fn at(&self, x: f64) -> f64 {
        let eps = self.spec.epsilon;
        if eps == 0.0 {
            return 0.0;
        }
        match self.spec.kind {
            NoiseKind::UniformIid => {
                let mut key = [0u8; 32];
                key[..8].copy_from_slice(&x.to_bits().to_le_bytes());
                key[8..16].copy_from_slice(&self.spec.seed.to_le_bytes());
                let mut rng = ChaCha8Rng::from_seed(key);
                eps * rng.random_range(-1.0..=1.0)
            }
            NoiseKind::SmoothBump => eps * (self.omega * x + self.phi).sin(),
        }
    }
}

/// A solution of the equation on the closed domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedSolution {
    /// `0` at 0, `a x^alpha + b(1-x)^alpha - b` inside, `a - b` at 1.
    H1 { a: f64, b: f64, alpha: Alpha },
    /// `f0` at 0, the constant `c` inside, `f1` at 1.
    H2 { c: f64, f0: f64, f1: f64 },
}

impl ClosedSolution {
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain { x });
        }
        Ok(match *self {
            ClosedSolution::H1 { a, b, alpha } => {
                if x == 0.0 {
                    0.0
                } else if x == 1.0 {
                    a - b
                } else {
                    let al = alpha.value();
                    a * x.powf(al) + b * (1.0 - x).powf(al) - b
                }
            }
            ClosedSolution::H2 { c, f0, f1 } => {
                if x == 0.0 {
                    f0
                } else if x == 1.0 {
                    f1
                } else {
                    c
                }
            }
        })
    }
}

/// A function on `[0, 1]`: an interior function plus two boundary values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFunction<F> {
    pub interior: F,
    pub at_zero: f64,
    pub at_one: f64,
}

impl<F: Evaluate> ClosedFunction<F> {
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            Ok(self.at_zero)
        } else if x == 1.0 {
            Ok(self.at_one)
        } else {
            self.interior.eval(x)
        }
    }
}
