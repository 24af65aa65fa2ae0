//! Benchmark-only crate; see `benches/kernels.rs`.
//!
//! Shared fixture constructors live here so the bench target stays
//! small.

use divisor_core::DistExpr;

/// The minimally divisible two-atom example at α = 0.5.
pub fn nu() -> DistExpr {
    DistExpr::nu_example(0.5).expect("valid alpha")
}

/// The partly divisible Cauchy-compound example at α = 0.5.
pub fn mu() -> DistExpr {
    DistExpr::mu_example(0.5).expect("valid alpha")
}
