//! Stability of the parametric fundamental equation of information.
//!
//! The equation, for a real exponent `alpha` and `f: (0, 1) -> R`, reads
//!
//! ```text
//! f(x) + (1-x)^alpha f(y/(1-x)) = f(y) + (1-y)^alpha f(x/(1-y))
//! ```
//!
//! for all `x, y > 0` with `x + y < 1`. The crate measures how far a given `f`
//! is from satisfying it, builds the nearby exact solution explicitly, and
//! checks the deviation against the constant `K(alpha)`.

pub mod alpha;
pub mod constants;
pub mod entropy;
pub mod equation;
mod error;
pub mod function;
pub mod harness;
pub mod oracle;
pub mod probability;
pub mod sampling;
pub mod stability;

pub use alpha::{Alpha, AlphaClass};
pub use constants::{closed_bound_factor, k_alpha, t_alpha};
pub use equation::{residual, sup_residual, ResidualSummary};
pub use error::{Error, Result};
pub use function::{
    ClosedFunction, ClosedSolution, Evaluate, FromFn, NoiseKind, PerturbationSpec, Tabulated,
    UnitIntervalFunction,
};
pub use probability::ProbabilityVector;
pub use sampling::{OpenTriangleSampler, SamplingScheme, SimplexSampler};
pub use stability::{
    certify_closed, certify_open, extract_candidate, CanonicalSolution, Certification,
    CertifyOptions, StabilityCertificate,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/equation.md")]
    mod equation {}
    #[doc = include_str!("../../../book/src/constants.md")]
    mod constants {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
