//! The exponent `alpha` of the parametric equation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the excluded band around `alpha = 1`.
pub const DEFAULT_ALPHA_GUARD: f64 = 1e-3;

/// Values with `|alpha| <= ZERO_TOL` are treated as `alpha = 0`.
pub const ZERO_TOL: f64 = 1e-12;

/// Which of the three regimes an exponent falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaClass {
    Negative,
    Zero,
    PositiveNotOne,
}

/// A validated exponent, kept at least `guard` away from 1.
///
/// ```
/// use infostab::{Alpha, AlphaClass};
///
/// assert_eq!(Alpha::new(-1.0).unwrap().class(), AlphaClass::Negative);
/// assert_eq!(Alpha::new(1e-13).unwrap().class(), AlphaClass::Zero);
/// assert!(Alpha::new(0.9995).is_err());
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha {
    value: f64,
    class: AlphaClass,
}

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        Self::with_guard(value, DEFAULT_ALPHA_GUARD)
    }

    /// Builds an exponent with a custom guard band. The guard must be
    /// positive so that `alpha = 1` itself is never representable.
    pub fn with_guard(value: f64, guard: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid("alpha", format!("{value} is not finite")));
        }
        if guard.is_nan() || guard <= 0.0 {
            return Err(Error::invalid(
                "alpha_guard",
                format!("{guard} must be > 0"),
            ));
        }
        if (value - 1.0).abs() < guard {
            return Err(Error::AlphaNearOne {
                alpha: value,
                guard,
            });
        }
        let class = if value < -ZERO_TOL {
            AlphaClass::Negative
        } else if value <= ZERO_TOL {
            AlphaClass::Zero
        } else {
            AlphaClass::PositiveNotOne
        };
        // Inside the zero band the exponent is snapped to exactly 0 so every
        // downstream power uses the alpha = 0 formulas consistently.
        let value = if class == AlphaClass::Zero {
            0.0
        } else {
            value
        };
        Ok(Alpha { value, class })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn class(self) -> AlphaClass {
        self.class
    }

    pub fn is_zero(self) -> bool {
        self.class == AlphaClass::Zero
    }

    /// `2^(1-alpha) - 1`, the normalizer of the degree-alpha entropy.
    pub fn entropy_normalizer(self) -> f64 {
        ((1.0 - self.value) * std::f64::consts::LN_2).exp_m1()
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Alpha::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(alpha: Alpha) -> f64 {
        alpha.value
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes() {
        assert_eq!(Alpha::new(-1e-11).unwrap().class(), AlphaClass::Negative);
        assert_eq!(Alpha::new(-1e-13).unwrap().class(), AlphaClass::Zero);
        assert_eq!(Alpha::new(0.0).unwrap().class(), AlphaClass::Zero);
        assert_eq!(
            Alpha::new(1e-11).unwrap().class(),
            AlphaClass::PositiveNotOne
        );
        assert_eq!(Alpha::new(5.0).unwrap().class(), AlphaClass::PositiveNotOne);
    }

    #[test]
    fn zero_band_snaps_to_zero() {
        assert_eq!(Alpha::new(-5e-13).unwrap().value(), 0.0);
    }

    #[test]
    fn guard_band() {
        assert!(matches!(
            Alpha::new(1.0005),
            Err(Error::AlphaNearOne { .. })
        ));
        assert!(Alpha::new(1.0011).is_ok());
        assert!(Alpha::new(0.9989).is_ok());
        assert!(Alpha::with_guard(1.0 + 1e-6, 1e-7).is_ok());
        assert!(Alpha::with_guard(1.0, 0.0).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
    }

    #[test]
    fn serde_goes_through_validation() {
        let a: Alpha = serde_json::from_str("2.0").unwrap();
        assert_eq!(a.value(), 2.0);
        assert!(serde_json::from_str::<Alpha>("1.0").is_err());
        assert_eq!(serde_json::to_string(&a).unwrap(), "2.0");
    }
}
