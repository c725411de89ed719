//! Monte Carlo diagnostics for central limit behaviour of partial sums.

pub mod chaining;
pub mod conditional;
pub mod example3;
pub mod functional;
pub mod levy;
pub mod lindeberg;
pub mod mixing;

pub use chaining::{chaining_bound, max_square_partial_sum, mc_mean_with_se};
pub use conditional::{conditional_clt_stat, dkw_floor, mixing_clt_experiment, unconditional_levy, ConditionalClt, MixingCltRow};
pub use example3::{example3_stat, Example3Law};
pub use functional::{functional_paths, max_partial_sum_stat, remainder_max_stat, FunctionalPaths, PathEnsembleStat};
pub use levy::{levy_bound, levy_distance, levy_to_normal, witness_set, Cdf, EmpiricalCdf, WitnessSet};
pub use lindeberg::{lindeberg_report, v_sup_stat, LindebergReport, SupDeviation, LINDEBERG_EPS};
pub use mixing::alpha_mixing_exact;
