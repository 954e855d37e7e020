//! Extremal statistics of quadratic forms evaluated at Haar-distributed
//! columns (equivalently GOE/GUE eigenvectors).
//!
//! The crate couples i.i.d. Gaussian columns with their Gram–Schmidt
//! orthonormalization, evaluates `max_j Σ a_i (√N γ_ij)²` and its Gaussian
//! counterpart, normalizes by the closed-form Gumbel/Weibull constants, and
//! ships independent analytic oracles (incomplete gamma, Laplace-method
//! tails, hyperspherical quadrature) for every constant it uses.

// NaN-rejecting `!(x > 0.0)` guards and oracle digits beyond f64 are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod experiments;
pub mod field;
pub mod haar;
pub mod limits;
pub mod quadratic;
pub mod rng;
pub mod special;
pub mod stats;
pub mod tail;

pub use error::{Error, Result};
pub use field::{ColMatrix, FieldKind, FieldScalar};
pub use haar::{coupling_diagnostics, gram_schmidt_partial, haar_matrix_qr, CoupledSample, CouplingDiagnostics};
pub use limits::{
    c_m_constant, c_star_constant, gamma_k_constant, law_cdf, normalization_diverging, normalization_fixed,
    normalization_fixed_field, signature, LimitLaw, Normalization, SignatureData, StatisticConvention,
};
pub use quadratic::{
    extremal_statistic, gaussian_extremal_statistic, que_statistic, ExtremalMode, RawStatistic, Source, Spectrum,
};
pub use rng::{gaussian_block, substream, GaussianBlock, RandomStream};
pub use stats::{ks_distance, summary, two_sample_ks, EmpiricalSample, Summary};
