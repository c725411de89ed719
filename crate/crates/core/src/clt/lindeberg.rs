//! Conditional-variance and truncated-moment statistics of martingale differences.

use crate::chain::{MarkovModel, StartSpec};
use crate::error::{Error, Result};
use crate::martingale::PairFunction;
use crate::numeric::{mean_and_sd, quantile_sorted};
use crate::rng::RootSeed;
use crate::variance;

/// Truncation levels reported by default.
pub const LINDEBERG_EPS: [f64; 3] = [0.05, 0.1, 0.25];

#[derive(Debug, Clone, PartialEq)]
pub struct LindebergReport {
    pub n: usize,
    pub ensemble: usize,
    pub sigma_n: f64,
    pub mean_v: f64,
    pub sd_v: f64,
    /// `n Σ_x π(x) v(x) / σ_n²`, the exact mean of `V_n(1)` under `X_0 ~ π`
    pub exact_mean_v: f64,
    pub sup_dev: SupDeviation,
    /// `(ε, mean over paths of σ_n^{−2} Σ_k v_ε(X_{k−1}))`
    pub truncated: Vec<(f64, f64)>,
    /// `max |H_n|`
    pub max_abs_h: f64,
}

/// Summary of `sup_{0<t≤1} |V_n(t) − t|` over paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupDeviation {
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

/// `v(x) = Σ_{x′} Q(x, x′) H(x, x′)²`.
pub fn conditional_variance(model: &MarkovModel, h: &PairFunction) -> Vec<f64> {
    truncated_conditional_variance(model, h, 0.0)
}

/// `v_c(x) = Σ_{x′} Q(x, x′) H(x, x′)² 1{|H(x, x′)| ≥ c}`.
pub fn truncated_conditional_variance(model: &MarkovModel, h: &PairFunction, c: f64) -> Vec<f64> {
    (0..model.num_states())
        .map(|x| {
            model
                .kernel_row(x)
                .iter()
                .enumerate()
                .map(|(y, q)| {
                    let v = h.get(x, y);
                    if v.abs() >= c {
                        q * v * v
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect()
}

/// `sup_{0<t≤1} |V(t) − t|` for the staircase `V(t) = C_{⌊nt⌋}` with
/// `C_k = Σ_{i<k} increments[i]`.
pub fn staircase_sup(increments: &[f64]) -> f64 {
    let n = increments.len() as f64;
    let mut c = 0.0;
    let mut sup = 0.0f64;
    for (k, inc) in increments.iter().enumerate() {
        // on [k/n, (k+1)/n) the staircase is C_k
        sup = sup.max((c - k as f64 / n).abs()).max((c - (k + 1) as f64 / n).abs());
        c += inc;
    }
    sup.max((c - 1.0).abs())
}

fn check_pair(model: &MarkovModel, h: &PairFunction) -> Result<()> {
    if h.num_states() != model.num_states() || h.model_id() != model.id() {
        return Err(Error::DimensionMismatch { expected: model.num_states(), actual: h.num_states() });
    }
    Ok(())
}

/// `V_n(1)`, its sup deviation and truncated analogues over stationary paths.
pub fn lindeberg_report(
    model: &MarkovModel,
    h: &PairFunction,
    n: usize,
    ensemble: usize,
    root_seed: RootSeed,
    eps_grid: &[f64],
) -> Result<LindebergReport> {
    check_pair(model, h)?;
    let sigma_sq = variance::sigma_n_sq(model, n)?;
    let sigma_n = sigma_sq.sqrt();
    let v = conditional_variance(model, h);
    let v_eps: Vec<Vec<f64>> = eps_grid.iter().map(|e| truncated_conditional_variance(model, h, e * sigma_n)).collect();

    let rows = model.map_paths(n, ensemble, StartSpec::Stationary, root_seed, |_, x0, path| {
        let prev = std::iter::once(x0).chain(path[..n - 1].iter().map(|&x| x as usize));
        let increments: Vec<f64> = prev.clone().map(|x| v[x] / sigma_sq).collect();
        let total: f64 = increments.iter().sum();
        let truncated: Vec<f64> = v_eps.iter().map(|ve| prev.clone().map(|x| ve[x]).sum::<f64>() / sigma_sq).collect();
        (total, staircase_sup(&increments), truncated)
    })?;

    let totals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (mean_v, sd_v) = mean_and_sd(&totals);
    let mut sups: Vec<f64> = rows.iter().map(|r| r.1).collect();
    sups.sort_by(f64::total_cmp);
    let sup_dev = SupDeviation {
        median: quantile_sorted(&sups, 0.5),
        q90: quantile_sorted(&sups, 0.9),
        max: *sups.last().expect("non-empty ensemble"),
    };
    let truncated = eps_grid
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, rows.iter().map(|r| r.2[i]).sum::<f64>() / ensemble as f64))
        .collect();
    let exact_mean_v = n as f64 * model.pi().iter().zip(&v).map(|(p, x)| p * x).sum::<f64>() / sigma_sq;
    Ok(LindebergReport {
        n,
        ensemble,
        sigma_n,
        mean_v,
        sd_v,
        exact_mean_v,
        sup_dev,
        truncated,
        max_abs_h: h.values().iter().fold(0.0, |m, x| m.max(x.abs())),
    })
}

/// Distribution summary of `sup_t |V_n(t) − t|`.
pub fn v_sup_stat(model: &MarkovModel, h: &PairFunction, n: usize, ensemble: usize, root_seed: RootSeed) -> Result<SupDeviation> {
    Ok(lindeberg_report(model, h, n, ensemble, root_seed, &[])?.sup_dev)
}

/// Smallest `n` on the dyadic grid `2^lo..2^hi` with `ε σ_n > max |H_n|`, where
/// `H_n` is the averaged difference function at `n`.
pub fn truncation_vanishing_threshold(model: &MarkovModel, eps: f64, lo: u32, hi: u32) -> Result<Option<usize>> {
    for e in lo..=hi {
        let n = 1usize << e;
        let h = crate::martingale::difference_function(model, &crate::poisson::h_n_averaged(model, n)?)?;
        let max_h = h.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if eps * variance::sigma_n_sq(model, n)?.sqrt() > max_h {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
