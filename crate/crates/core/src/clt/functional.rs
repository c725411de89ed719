//! Rescaled partial-sum and martingale paths, and the maxima of `S − M`.

use crate::chain::{MarkovModel, StartSpec};
use crate::error::{Error, Result};
use crate::martingale::{self, PairFunction};
use crate::numeric::quantile_sorted;
use crate::rng::RootSeed;

/// Levels at which remainder exceedances are reported.
pub const REMAINDER_EPS: [f64; 3] = [0.1, 0.25, 0.5];

/// `B_n(k/n) = S_k/σ_n` and `M_n(k/n) = M_k/σ_n` for `k = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalPaths {
    pub t: Vec<f64>,
    pub b: Vec<f64>,
    pub m: Vec<f64>,
    /// `S_{n−1}/σ_n`, the value of the step function just before `t = 1`
    pub b_left_limit_at_one: f64,
}

impl FunctionalPaths {
    pub fn sup_gap(&self) -> f64 {
        self.b.iter().zip(&self.m).map(|(b, m)| (b - m).abs()).fold(0.0, f64::max)
    }
}

pub fn functional_paths(model: &MarkovModel, h: &PairFunction, sigma_n: f64, x0: usize, path: &[u32]) -> Result<FunctionalPaths> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("path must have at least one step".into()));
    }
    if !(sigma_n > 0.0) {
        return Err(Error::InvalidArgument("sigma_n must be positive".into()));
    }
    let n = path.len();
    let m_path = martingale::martingale_path(h, x0, path)?;
    let s_path = model.partial_sums(path);
    let t = (0..=n).map(|k| k as f64 / n as f64).collect();
    let b: Vec<f64> = std::iter::once(0.0).chain(s_path.iter().map(|s| s / sigma_n)).collect();
    let m = std::iter::once(0.0).chain(m_path.iter().map(|v| v / sigma_n)).collect();
    Ok(FunctionalPaths { t, b_left_limit_at_one: b[n - 1], b, m })
}

/// Per-path samples of a statistic with summary quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsembleStat {
    pub n: usize,
    /// in path-index order
    pub samples: Vec<f64>,
    pub median: f64,
    pub q90: f64,
    /// `(ε, fraction of samples ≥ ε)`
    pub exceedance: Vec<(f64, f64)>,
}

impl PathEnsembleStat {
    pub fn from_samples(n: usize, samples: Vec<f64>, eps_grid: &[f64]) -> Self {
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let m = samples.len() as f64;
        let exceedance = eps_grid.iter().map(|&e| (e, samples.iter().filter(|&&s| s >= e).count() as f64 / m)).collect();
        Self { n, median: quantile_sorted(&sorted, 0.5), q90: quantile_sorted(&sorted, 0.9), samples, exceedance }
    }
}

/// `max_{j≤n} |S_j − M_j|/√n` with `M` built from the limit difference
/// function (checked against the dyadic approximants at tolerance `tol`).
pub fn remainder_max_stat(model: &MarkovModel, n: usize, ensemble: usize, root_seed: RootSeed, tol: f64) -> Result<PathEnsembleStat> {
    let limit = martingale::limit_difference_function(model, tol)?;
    let h = limit.h;
    let root_n = (n as f64).sqrt();
    let samples = model.map_paths(n, ensemble, StartSpec::Stationary, root_seed, |_, x0, path| {
        let mut prev = x0;
        let mut r = 0.0f64;
        let mut worst = 0.0f64;
        for &x in path {
            let x = x as usize;
            r += model.g_values()[x] - h.get(prev, x);
            worst = worst.max(r.abs());
            prev = x;
        }
        worst / root_n
    })?;
    Ok(PathEnsembleStat::from_samples(n, samples, &REMAINDER_EPS))
}

/// `max_{k≤n} |S_k|/√n`.
pub fn max_partial_sum_stat(model: &MarkovModel, n: usize, ensemble: usize, root_seed: RootSeed) -> Result<PathEnsembleStat> {
    let root_n = (n as f64).sqrt();
    let samples = model.map_paths(n, ensemble, StartSpec::Stationary, root_seed, |_, _, path| {
        let mut s = 0.0f64;
        let mut worst = 0.0f64;
        for &x in path {
            s += model.g_values()[x as usize];
            worst = worst.max(s.abs());
        }
        worst / root_n
    })?;
    Ok(PathEnsembleStat::from_samples(n, samples, &REMAINDER_EPS))
}
