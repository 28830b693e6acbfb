use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum p_i - 1|`.
pub const SUM_TOL: f64 = 1e-12;

/// A point of the open simplex: `n >= 2` strictly positive components summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::invalid("p", "needs at least two components"));
        }
        if let Some(p) = components.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::invalid(
                "p",
                format!("component {p} is not positive"),
            ));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid("p", format!("components sum to {sum}")));
        }
        Ok(ProbabilityVector(components))
    }

    /// Parses `0.5,0.25,0.25`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid("p", format!("`{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ProbabilityVector::new(parts)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        ProbabilityVector::new(vec![1.0 / n as f64; n])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbabilityVector::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Vec<f64> {
        p.0
    }
}
