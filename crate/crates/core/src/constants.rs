//! Explicit stability constants `K(alpha)` and `T(alpha)`.
//!
//! `K(alpha)` is the factor in the uniform bound `|f - candidate| <= K(alpha) eps`
//! on the open interval. It has three branches:
//!
//! | regime        | `K(alpha)`                                                                  |
//! |---------------|-----------------------------------------------------------------------------|
//! | `alpha < 0`   | `(8 + 6*2^a + 2^-a) / |2^(1-a) - 1|`                                        |
//! | `alpha = 0`   | `63`                                                                        |
//! | `alpha > 0`   | `(3 + 12*2^a + 32*3^(a+1) / |2^-a - 1|) / |2^(1-a) - 1|`                    |
//!
//! On the negative branch `K` increases towards 15 as `alpha -> 0-`, so 15 is
//! a uniform constant for every negative exponent. `T(alpha)` only exists for
//! positive exponents and is tied to `K` by `K = (4T + 3) / |2^(1-a) - 1|`.

use crate::alpha::{Alpha, AlphaClass};
use crate::error::{Error, Result};

/// The negative-branch formula of `K`, evaluated at any real exponent.
///
/// Its value at 0 is the supremum of `K` over all negative exponents.
pub fn k_negative_branch(alpha: f64) -> f64 {
    let two_a = alpha.exp2();
    (8.0 + 6.0 * two_a + (-alpha).exp2()) / ((1.0 - alpha).exp2() - 1.0).abs()
}

/// Supremum of `K(alpha)` over `alpha < 0`, reached only in the limit `alpha -> 0-`.
pub fn k_negative_supremum() -> f64 {
    k_negative_branch(0.0)
}

/// The stability constant `K(alpha)`.
///
/// ```
/// use infostab::{k_alpha, Alpha};
///
/// assert_eq!(k_alpha(Alpha::new(0.0)?)?, 63.0);
/// assert!((k_alpha(Alpha::new(-1.0)?)? - 13.0 / 3.0).abs() < 1e-12);
/// assert!((k_alpha(Alpha::new(2.0)?)? - 2406.0).abs() < 1e-9);
/// # Ok::<(), infostab::Error>(())
/// ```
pub fn k_alpha(alpha: Alpha) -> Result<f64> {
    let a = alpha.value();
    let k = match alpha.class() {
        AlphaClass::Negative => k_negative_branch(a),
        AlphaClass::Zero => 63.0,
        AlphaClass::PositiveNotOne => {
            let inner = 32.0 * 3f64.powf(a + 1.0) / ((-a).exp2() - 1.0).abs();
            (3.0 + 12.0 * a.exp2() + inner) / ((1.0 - a).exp2() - 1.0).abs()
        }
    };
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::AlphaNearOne {
            alpha: a,
            guard: 0.0,
        });
    }
    Ok(k)
}

/// The auxiliary constant `T(alpha) = 3*2^a + 8*3^(a+1) / |2^-a - 1|`, defined for `alpha > 0`.
pub fn t_alpha(alpha: Alpha) -> Result<f64> {
    if alpha.class() != AlphaClass::PositiveNotOne {
        return Err(Error::TAlphaUndefined {
            alpha: alpha.value(),
        });
    }
    let a = alpha.value();
    Ok(3.0 * a.exp2() + 8.0 * 3f64.powf(a + 1.0) / ((-a).exp2() - 1.0).abs())
}

/// Factor of the closed-domain bound: `K` for `alpha <= 0`, `max{K, T + 1}` for `alpha > 0`.
pub fn closed_bound_factor(alpha: Alpha) -> Result<f64> {
    let k = k_alpha(alpha)?;
    match alpha.class() {
        AlphaClass::PositiveNotOne => Ok(k.max(t_alpha(alpha)? + 1.0)),
        _ => Ok(k),
    }
}
