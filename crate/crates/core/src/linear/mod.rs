//! Linear processes `ξ_k = Σ_j a_j η_{k−j}` with constant coefficients.

pub mod coeffs;
pub mod simulate;
pub mod variance;

pub use coeffs::{CoefficientSequence, Family};
pub use simulate::{dnk_linear, simulate_linear, truncation_for, Innovation, LinearPath, LinearSimulator};
pub use variance::{
    b_bar, condition9_report, condition9_verdict, growth_exponent_fit, linear_variance, partial_sums_b, sigma1_sq,
    sigma2_sq, Condition9Report, Condition9Thresholds, GrowthFit, LinearVarianceReport, Sigma1, Verdict,
};
