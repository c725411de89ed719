//! Lévy distance of `S_n/σ_n` from `Φ` given the starting state, averaged over `π`.

use crate::chain::{MarkovModel, StartSpec};
use crate::clt::levy::levy_to_normal;
use crate::clt::mixing::alpha_mixing_exact;
use crate::error::{Error, Result};
use crate::rng::RootSeed;
use crate::variance;

/// Smallest ensemble per starting state.
pub const MIN_PATHS_PER_STATE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalClt {
    pub n: usize,
    pub paths_per_state: usize,
    pub per_state_levy: Vec<f64>,
    pub pi: Vec<f64>,
    /// `Σ_x π(x) Δ(Φ, F̂_n(x; ·))`
    pub integrated: f64,
    /// 95% DKW radius `√(ln(2/0.05)/(2m))` of one empirical CDF, the sampling
    /// noise level of each per-state distance
    pub floor: f64,
}

/// DKW radius at 95% for a sample of size `m`.
pub fn dkw_floor(m: usize) -> f64 {
    ((2.0f64 / 0.05).ln() / (2.0 * m as f64)).sqrt()
}

/// `S_n/σ_n` for `count` paths from `start`, `σ_n` exact.
pub fn standardized_sums(model: &MarkovModel, n: usize, count: usize, start: StartSpec, seed: RootSeed) -> Result<Vec<f64>> {
    let sigma = variance::sigma_n_sq(model, n)?.sqrt();
    model.map_paths(n, count, start, seed, |_, _, path| {
        path.iter().map(|&x| model.g_values()[x as usize]).sum::<f64>() / sigma
    })
}

/// Starting state `x` uses seed `root_seed.derive(x)`.
pub fn conditional_clt_stat(model: &MarkovModel, n: usize, paths_per_state: usize, root_seed: RootSeed) -> Result<ConditionalClt> {
    if paths_per_state < MIN_PATHS_PER_STATE {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_PATHS_PER_STATE} paths per state, got {paths_per_state}"
        )));
    }
    variance::sigma_n_sq(model, n)?;
    let per_state_levy = (0..model.num_states())
        .map(|x| {
            let sums = standardized_sums(model, n, paths_per_state, StartSpec::Fixed(x), root_seed.derive(x as u64))?;
            levy_to_normal(sums)
        })
        .collect::<Result<Vec<f64>>>()?;
    let integrated = per_state_levy.iter().zip(model.pi()).map(|(d, p)| d * p).sum();
    Ok(ConditionalClt {
        n,
        paths_per_state,
        per_state_levy,
        pi: model.pi().to_vec(),
        integrated,
        floor: dkw_floor(paths_per_state),
    })
}

/// Lévy distance of `S_n/σ_n` from `Φ` with `X_0 ~ π`.
pub fn unconditional_levy(model: &MarkovModel, n: usize, count: usize, root_seed: RootSeed) -> Result<f64> {
    levy_to_normal(standardized_sums(model, n, count, StartSpec::Stationary, root_seed)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingCltRow {
    pub n: usize,
    pub alpha: f64,
    pub unconditional_levy: f64,
    pub conditional_integrated: f64,
}

/// `α_n`, the unconditional Lévy distance and the conditional statistic along a grid.
pub fn mixing_clt_experiment(model: &MarkovModel, n_grid: &[usize], ensemble: usize, root_seed: RootSeed) -> Result<Vec<MixingCltRow>> {
    n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let seed = root_seed.derive(i as u64);
            Ok(MixingCltRow {
                n,
                alpha: alpha_mixing_exact(model, n)?,
                unconditional_levy: unconditional_levy(model, n, ensemble, seed.derive(u64::MAX))?,
                conditional_integrated: conditional_clt_stat(model, n, ensemble, seed)?.integrated,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clt::levy::{levy_distance, Cdf, EmpiricalCdf};
    use crate::presets;

    #[test]
    fn iid_clt_is_close() {
        let m = presets::iid_two_state();
        let r = conditional_clt_stat(&m, 1 << 12, 2000, RootSeed(1)).unwrap();
        assert!(r.integrated <= 0.03, "{r:?}");
        assert_eq!(r.per_state_levy.len(), 2);
    }

    #[test]
    fn one_step_two_point_law() {
        // S_1/σ_1 = ±1 with equal probability whatever the start
        let m = presets::iid_two_state();
        let r = conditional_clt_stat(&m, 1, 4000, RootSeed(2)).unwrap();
        let exact = levy_distance(&Cdf::Empirical(EmpiricalCdf::new(vec![-1.0, 1.0]).unwrap()), &Cdf::StandardNormal);
        assert!((r.integrated - exact).abs() < 0.03, "{} vs {exact}", r.integrated);
        assert!(exact > 0.1);
    }

    #[test]
    fn arguments_are_checked() {
        let m = presets::two_state(0.3, 0.3);
        assert!(conditional_clt_stat(&m, 16, 50, RootSeed(0)).is_err());
        assert!(matches!(conditional_clt_stat(&presets::coboundary(), 64, 200, RootSeed(0)), Err(Error::DegenerateVariance { .. })));
        assert!((dkw_floor(2000) - 0.03037).abs() < 1e-4);
    }

    #[test]
    fn mixing_table_single_row() {
        let m = presets::two_state(0.3, 0.3);
        let rows = mixing_clt_experiment(&m, &[64], 200, RootSeed(3)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].alpha < 1e-20, "{}", rows[0].alpha);
    }
}
