//! Optimized combinations of e-values.
//!
//! Two batch statistics are provided for a vector `E = (E_1, .., E_n)` of
//! independent or simultaneous e-values:
//!
//! * the optimized betting product `sup_{λ∈[0,1]} ∏ (1 − λ + λ E_i)`, and
//! * the maximum symmetric average `max_k A_k(E)`, where `A_k` is the
//!   k-th elementary symmetric polynomial divided by `C(n, k)`.
//!
//! Both have `P(statistic ≥ t) ≤ 1/t` under the null, so rejecting when the
//! statistic reaches `1/α` is a level-α test. Pathwise the maximum symmetric
//! average dominates the betting product. Ville's sequential test with a
//! fixed or predictable betting fraction is included for comparison.
//!
//! All products are carried in log domain through [`LogValue`].

pub mod betting;
pub mod error;
pub mod evalues;
pub mod logvalue;
pub mod simlab;
pub mod sympoly;
pub mod testkit;

pub use betting::{optimize_lambda, product_value, score_derivative, BettingOptimum, Boundary};
pub use error::{Error, Result};
pub use evalues::{validate_evalues, EValueVector, Regime};
pub use logvalue::LogValue;
pub use sympoly::{
    identity_residual, mixture_value, naive_symmetric_sums, symmetric_averages, symmetric_sums,
    SymmetricAverages,
};
pub use testkit::{
    e_to_p, test_max_average, test_optimized_betting, test_ville, LambdaStrategy, ReportDetail,
    StatisticKind, TestReport, VilleTrajectory,
};
