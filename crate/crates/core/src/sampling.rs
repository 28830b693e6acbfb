//! Deterministic point sets on the open triangle and on the open simplex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::ProbabilityVector;

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// Log-graded map of `[0, 1)` onto itself: `s` near 0 or 1 lands
/// geometrically close to that end, down to `floor / 2`.
fn graded(s: f64, floor: f64) -> f64 {
    let ln_floor = floor.ln();
    if s < 0.5 {
        0.5 * (ln_floor * (1.0 - 2.0 * s)).exp()
    } else {
        1.0 - 0.5 * (ln_floor * (2.0 * s - 1.0)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    UniformRejection,
    #[default]
    HaltonQuasiRandom,
}

/// Pairs `(x, y)` with `x, y >= margin` and `x + y <= 1 - margin`.
///
/// The Halton scheme uses a seeded Cranley-Patterson shift of the (2, 3)
/// Halton sequence. Every second point is placed in vertex-polar coordinates
/// instead: `r = 1 - x` log-uniform on `[2m, 1 - m]` and `t = y / (1 - x)`
/// log-graded towards both ends. This resolves the vertex `x -> 1`, where the
/// weight `(1-x)^alpha` blows up for negative exponents, down to the margin.
/// The residual is antisymmetric, so the mirrored vertex `y -> 1` needs no
/// points of its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenTriangleSampler {
    pub count: usize,
    pub margin: f64,
    pub seed: u64,
    #[serde(default)]
    pub scheme: SamplingScheme,
}

pub const DEFAULT_MARGIN: f64 = 1e-4;

impl OpenTriangleSampler {
    pub fn new(count: usize, margin: f64, seed: u64, scheme: SamplingScheme) -> Result<Self> {
        let s = OpenTriangleSampler {
            count,
            margin,
            seed,
            scheme,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn halton(count: usize, seed: u64) -> Self {
        OpenTriangleSampler {
            count,
            margin: DEFAULT_MARGIN,
            seed,
            scheme: SamplingScheme::HaltonQuasiRandom,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("count", "must be positive"));
        }
        if !(self.margin > 0.0 && self.margin < 0.25) {
            return Err(Error::invalid(
                "margin",
                format!("{} is not in (0, 0.25)", self.margin),
            ));
        }
        Ok(())
    }

    /// Whether `(x, y)` and both inner arguments respect the margin.
    pub fn admits(&self, x: f64, y: f64) -> bool {
        let m = self.margin;
        let slack = m * 1e-9;
        x >= m
            && y >= m
            && x + y <= 1.0 - m + slack
            && y / (1.0 - x) <= 1.0 - m + slack
            && x / (1.0 - y) <= 1.0 - m + slack
    }

    fn vertex_polar(&self, u: f64, v: f64) -> (f64, f64) {
        let m = self.margin;
        let r = 2.0 * m * ((1.0 - m) / (2.0 * m)).powf(u);
        let t = m / r + (1.0 - 2.0 * m / r) * graded(v, m);
        (1.0 - r, t * r)
    }

    fn place(&self, mut u: f64, mut v: f64) -> (f64, f64) {
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let m = self.margin;
        let span = 1.0 - 3.0 * m;
        (m + span * u, m + span * v)
    }

    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count);
        match self.scheme {
            SamplingScheme::HaltonQuasiRandom => {
                // the two halves run their own Halton streams: interleaving
                // one stream would hand each half only part of the base-2 range
                let shifts: [(f64, f64); 2] =
                    [(rng.random(), rng.random()), (rng.random(), rng.random())];
                for i in 0..self.count as u64 {
                    let (k, half) = (i / 2 + 1, (i % 2) as usize);
                    let u = (radical_inverse(k, 2) + shifts[half].0).fract();
                    let v = (radical_inverse(k, 3) + shifts[half].1).fract();
                    out.push(if half == 1 {
                        self.vertex_polar(u, v)
                    } else {
                        self.place(u, v)
                    });
                }
            }
            SamplingScheme::UniformRejection => {
                while out.len() < self.count {
                    let (u, v): (f64, f64) = (rng.random(), rng.random());
                    if u + v <= 1.0 {
                        out.push(self.place(u, v));
                    }
                }
            }
        }
        out.retain(|&(x, y)| self.admits(x, y));
        Ok(out)
    }
}

/// Seeded points of the open simplex with every coordinate at least `margin`.
///
/// Coordinates are normalized exponential draws (a flat Dirichlet) affinely
/// squeezed into `{p_i >= margin}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexSampler {
    pub count: usize,
    pub margin: f64,
    pub seed: u64,
}

impl SimplexSampler {
    pub fn new(count: usize, margin: f64, seed: u64) -> Self {
        SimplexSampler {
            count,
            margin,
            seed,
        }
    }

    pub fn vectors(&self, n: usize) -> Result<Vec<ProbabilityVector>> {
        if n < 2 {
            return Err(Error::invalid("n", "simplex dimension must be >= 2"));
        }
        if !(self.margin > 0.0 && self.margin * n as f64 <= 0.5) {
            return Err(Error::invalid(
                "margin",
                format!("{} too large for n = {n}", self.margin),
            ));
        }
        // Mix n into the stream so different dimensions draw independent sets.
        let mut rng =
            ChaCha8Rng::seed_from_u64(self.seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let free = 1.0 - n as f64 * self.margin;
        (0..self.count)
            .map(|_| {
                let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let total: f64 = e.iter().sum();
                ProbabilityVector::new(e.iter().map(|v| self.margin + free * v / total).collect())
            })
            .collect()
    }
}
