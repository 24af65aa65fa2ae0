//! # divisor-core
//!
//! Numerical analysis of the convolution divisibility of probability
//! distributions on the real line.
//!
//! Given a distribution `μ` described symbolically (atoms, Cauchy and
//! Gaussian factors, mixtures, convolutions), this crate can
//!
//! - evaluate its characteristic function and certify that it never
//!   vanishes on a frequency window ([`charfn::admissibility_check`]),
//! - extract the second characteristic `ψ` (the continuous logarithm of
//!   the characteristic function with `ψ(0) = 0`) by outward marching
//!   with a per-step no-winding certificate ([`charfn::second_characteristic`]),
//! - form fractional convolution powers `μ^{*t} = F⁻¹(e^{tψ})` by an
//!   exact binomial-series route, a closed-form signed-density route for
//!   Cauchy-smoothed compound distributions, or a generic FFT route
//!   ([`fracpower`]),
//! - decide whether `t` belongs to the divisibility set `Λ(μ)` (is
//!   `e^{tψ}` again a characteristic function?) by signed-density
//!   inspection or a Gram positive-semidefiniteness test, scan a `t`
//!   range, and estimate the divisibility parameters `λ₀` and `λ₁`
//!   ([`lambda`]).
//!
//! Fractional powers outside `Λ(μ)` are *signed* objects; negative mass
//! is the signal this crate exists to detect, so it is always returned,
//! never clamped.
//!
//! ```
//! use divisor_core::{is_member, lambda_scan, Classification, DistExpr, MembershipMethod};
//!
//! // ν = (1+α)⁻¹(δ₀ + αδ₁): only integer convolution powers stay positive
//! let nu = DistExpr::nu_example(0.5)?;
//! let half = is_member(&nu, 1.5, 1e-7, MembershipMethod::SeriesDensity)?;
//! assert!(!half.member, "ν^{{*1.5}} has a negative atom");
//!
//! let report = lambda_scan(&nu, 0.5, 3.0, 11, 1e-7)?;
//! assert_eq!(report.members(), vec![1.0, 2.0, 3.0]);
//! assert_eq!(report.classification, Classification::MinimallyDivisibleCandidate);
//! # Ok::<(), divisor_core::Error>(())
//! ```
//!
//! All public types are immutable after construction and all operations
//! are pure, so values can be shared freely across threads.

// argument guards use `!(x > 0.0)` deliberately: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charfn;
pub mod fracpower;
pub mod lambda;
pub mod measures;

use thiserror::Error;

/// Errors shared by the numeric modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A distribution expression violated a structural invariant.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// An operation received an argument outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The characteristic function came within `zero_tol` of 0 on the
    /// inspected grid, so no continuous logarithm can be certified.
    #[error("characteristic function not admissible: |cf({y})| = {modulus:e} below tolerance")]
    NotAdmissible { y: f64, modulus: f64 },

    /// Adaptive bisection hit its depth limit while trying to certify a
    /// no-winding step of the continuous logarithm.
    #[error("phase refinement exhausted near y = {y} at depth {depth}")]
    RefinementExhausted { y: f64, depth: u32 },

    /// A truncated series failed to meet its tail bound within the term
    /// budget.
    #[error("series tail not converged within {l_max} terms")]
    TailNotConverged { l_max: usize },

    /// The characteristic function had not decayed at the edge of the
    /// frequency window, so the inverse transform would fold tails back
    /// into the result.
    #[error(
        "aliasing suspected: |cf^t| = {edge_magnitude:e} at the window edge exceeds {tol:e}; \
         enlarge y_max"
    )]
    AliasingSuspected { edge_magnitude: f64, tol: f64 },

    /// A Gram evaluation point fell outside the range covered by the
    /// sampled second characteristic.
    #[error("point {requested} outside the trace range [-{range}, {range}]")]
    PointsOutOfRange { requested: f64, range: f64 },

    /// An internal cross-check failed; results would not be trustworthy.
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use charfn::{
    admissibility_check, cf_eval, psi_closed_form, second_characteristic, Admissibility,
    AdmissibilityReport, PsiTrace,
};
pub use fracpower::{
    cauchy_compound_density, compound_power_atoms, convolve_grids, frac_power_grid,
    frac_power_series, gen_binomial, has_series_route, ray_threshold, real_root,
    BinomialSeriesParams, FracPowerOutput, GridParams,
};
pub use lambda::{
    gram_psd_min_eig, interval_closure, is_member, lambda_scan, scaling_check,
    semigroup_spot_check, Classification, Evidence, ImpliedRay, LambdaReport, MembershipMethod,
    MembershipVerdict,
};
pub use measures::{Atom, DistExpr, GridSignedDensity, SignedAtomicMeasure};
