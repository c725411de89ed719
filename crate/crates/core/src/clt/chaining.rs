//! Dyadic chaining bound for `E max_{k≤n} T_k²`.

use crate::error::{Error, Result};
use crate::numeric::mean_and_sd;

/// `d Σ_{j=0}^{d} 2^{d−j} ‖T_{2^j}‖²` with `d = ⌈log₂ n⌉`; for `n = 1` this is `‖T_1‖²`.
/// `norms[j]` is `‖T_{2^j}‖` (not squared).
pub fn chaining_bound(norms: &[f64], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let d = n.next_power_of_two().trailing_zeros() as usize;
    if norms.len() <= d {
        return Err(Error::MissingDyadicNorm { j: norms.len(), d });
    }
    if d == 0 {
        return Ok(norms[0] * norms[0]);
    }
    let sum: f64 = (0..=d).map(|j| (1u64 << (d - j)) as f64 * norms[j] * norms[j]).sum();
    Ok(d as f64 * sum)
}

/// Mean and standard error of `max_k T_k²` samples.
pub fn mc_mean_with_se(samples: &[f64]) -> (f64, f64) {
    let (mean, sd) = mean_and_sd(samples);
    (mean, sd / (samples.len() as f64).sqrt())
}

/// `max_k T_k²` along one path of increments.
pub fn max_square_partial_sum(increments: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut best = 0.0f64;
    for x in increments {
        s += x;
        best = best.max(s * s);
    }
    best
}
