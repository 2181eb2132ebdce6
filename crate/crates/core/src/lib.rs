//! Numerics for Bayesian estimation of Gaussian random phase-space
//! displacements probed by Gaussian and non-Gaussian states.
//!
//! A single bosonic mode is displaced by an unknown (xi, eta) drawn from an
//! isotropic Gaussian prior of total variance v, then measured. The crate
//! computes the post-selected mean-square error v' (the trace of the
//! posterior covariance given an outcome), the unconditional Bayesian error,
//! finite post-selection-window averages, the classical and Gaussian lower
//! bounds, Fisher-information-type lower bounds for photon-limited probes,
//! and the closed forms used to pin all of it down. An independent
//! Monte-Carlo importance-sampling oracle cross-checks the quadrature
//! pipeline.
//!
//! Modules:
//! - [`fock`]: truncated Fock-basis operators, displacements, beamsplitter,
//!   Wigner evaluation;
//! - [`gaussian`]: analytic 2x2 covariance calculus and the classical /
//!   Gaussian bounds;
//! - [`filter`]: likelihood kernels ("filter functions") for heterodyne
//!   detection with Fock, lossy, Gaussian and grid-state probes;
//! - [`bayes`]: posterior statistics, Bayes-averaged error, windowed
//!   post-selection;
//! - [`ghosh`]: Fisher-type bounds and the closed-form golden values;
//! - [`oracle`]: Monte-Carlo and operator-exponentiation oracles plus the
//!   v = 2 theorem check;
//! - [`quad`], [`special`]: quadrature and special-function support.

pub mod bayes;
pub mod error;
pub mod filter;
pub mod fock;
pub mod gaussian;
pub mod ghosh;
pub mod oracle;
pub mod quad;
pub mod special;
pub mod sweeps;

pub use bayes::{PosteriorSummary, Prior, WindowReport};
pub use error::{Error, Result};
pub use filter::Filter;
pub use fock::{DisplacementParams, TruncatedOperator, TwoModeOperator};
pub use gaussian::{classical_bound, gaussian_bound, Covariance2};
pub use ghosh::GhoshReport;
pub use oracle::{McResult, V2CheckReport};
