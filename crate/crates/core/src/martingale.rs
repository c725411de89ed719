//! Martingale differences `H(x₀, x₁) = h(x₁) − Qh(x₀)` built from Poisson
//! approximants, and exact `L²` errors of the resulting approximations.

use crate::chain::{MarkovModel, ModelId};
use crate::error::{Error, Result};
use crate::poisson::{self, Method, PoissonApproximant};
use crate::variance;

/// Largest dyadic exponent tried by [`limit_difference_function`].
pub const LIMIT_MAX_K: u32 = 14;

/// A function of consecutive states, stored row-major as `values[x₀·S + x₁]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFunction {
    values: Vec<f64>,
    states: usize,
    source: Method,
    model_id: ModelId,
}

impl PairFunction {
    pub fn get(&self, x0: usize, x1: usize) -> f64 {
        self.values[x0 * self.states + x1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn source(&self) -> Method {
        self.source
    }

    pub fn model_id(&self) -> ModelId {
        self.model_id
    }

    /// `max_{x₀} |Σ_{x₁} Q(x₀, x₁) H(x₀, x₁)|`.
    pub fn conditional_mean_defect(&self, model: &MarkovModel) -> f64 {
        (0..self.states)
            .map(|x0| {
                model.kernel_row(x0).iter().enumerate().map(|(x1, q)| q * self.get(x0, x1)).sum::<f64>().abs()
            })
            .fold(0.0, f64::max)
    }

    fn check(&self, model: &MarkovModel) -> Result<()> {
        if self.states != model.num_states() {
            return Err(Error::DimensionMismatch { expected: model.num_states(), actual: self.states });
        }
        if self.model_id != model.id() {
            return Err(Error::InvalidArgument("pair function belongs to a different model".into()));
        }
        Ok(())
    }
}

/// Per-`k` errors `‖S_k − M_{nk}‖` against the maximal-inequality bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationErrorReport {
    pub n: usize,
    pub per_k_errors: Vec<f64>,
    pub max_error: f64,
    /// `3 · max_{k≤n} ‖E(S_k | X_0)‖`
    pub bound: f64,
    /// `n‖f_n‖ + 2‖Qh_n‖`, the intermediate quantity the bound is derived from
    pub sharper_bound: f64,
    /// `σ_n`, without the degeneracy check
    pub sigma_n: f64,
    pub method: Method,
}

/// Limit `H` of the dyadic subsequence `H_{2^k}`, with the gaps along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitDifference {
    pub h: PairFunction,
    /// `‖H_{2^k} − H‖_{π₁}` for `k = 0..=LIMIT_MAX_K`
    pub gaps: Vec<f64>,
    /// `‖H_{2^k} − H_{2^{k−1}}‖_{π₁}` for `k = 1..=LIMIT_MAX_K`
    pub successive: Vec<f64>,
    /// first `k` with `gaps[k] ≤ tol`
    pub k_star: u32,
    /// whether `gaps` is non-increasing
    pub monotone: bool,
}

fn pair_from(model: &MarkovModel, h: &[f64], source: Method) -> PairFunction {
    let s = model.num_states();
    let qh = model.apply_slice(h);
    let mut values = Vec::with_capacity(s * s);
    for x0 in 0..s {
        values.extend(h.iter().map(|v| v - qh[x0]));
    }
    PairFunction { values, states: s, source, model_id: model.id() }
}

pub fn difference_function(model: &MarkovModel, approx: &PoissonApproximant) -> Result<PairFunction> {
    model.check(&approx.h)?;
    Ok(pair_from(model, approx.h.values(), approx.method))
}

/// `E H(X_0, X_1)² = Σ π(x₀) Q(x₀, x₁) H(x₀, x₁)²`.
pub fn second_moment(model: &MarkovModel, h: &PairFunction) -> Result<f64> {
    h.check(model)?;
    Ok(pair_norm_sq(model, |x0, x1| h.get(x0, x1)))
}

fn pair_norm_sq(model: &MarkovModel, f: impl Fn(usize, usize) -> f64) -> f64 {
    let pi = model.pi();
    (0..model.num_states())
        .map(|x0| {
            pi[x0]
                * model
                    .kernel_row(x0)
                    .iter()
                    .enumerate()
                    .map(|(x1, q)| {
                        let v = f(x0, x1);
                        q * v * v
                    })
                    .sum::<f64>()
        })
        .sum()
}

/// `M_1..M_n` along `x0, path[0], path[1], …`.
pub fn martingale_path(h: &PairFunction, x0: usize, path: &[u32]) -> Result<Vec<f64>> {
    let s = h.num_states();
    let bad = std::iter::once(x0).chain(path.iter().map(|&x| x as usize)).find(|&x| x >= s);
    if let Some(x) = bad {
        return Err(Error::DimensionMismatch { expected: s, actual: x + 1 });
    }
    let mut prev = x0;
    let mut acc = 0.0;
    Ok(path
        .iter()
        .map(|&x| {
            let x = x as usize;
            acc += h.get(prev, x);
            prev = x;
            acc
        })
        .collect())
}

/// `H_1..H_n` with `H_k` built from the averaged approximant `h_k`.
pub fn nontriangular_sequence(model: &MarkovModel, n: usize) -> Result<Vec<PairFunction>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = vec![0.0; model.num_states()];
    poisson::for_each_partial_sum(model, n, |k, ho| {
        acc.iter_mut().zip(ho).for_each(|(a, v)| *a += v);
        let avg: Vec<f64> = acc.iter().map(|a| a / k as f64).collect();
        out.push(pair_from(model, &avg, Method::Averaged { n: k }));
    });
    Ok(out)
}

/// `M_1..M_n` with `M_k = Σ_{j≤k} H_j(X_{j−1}, X_j)`; `seq` comes from
/// [`nontriangular_sequence`] and must be at least as long as `path`.
pub fn nontriangular_path(seq: &[PairFunction], x0: usize, path: &[u32]) -> Result<Vec<f64>> {
    if seq.len() < path.len() {
        return Err(Error::DimensionMismatch { expected: path.len(), actual: seq.len() });
    }
    let s = seq.first().map_or(0, |h| h.num_states());
    let mut prev = x0;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(path.len());
    for (h, &x) in seq.iter().zip(path) {
        let x = x as usize;
        if prev >= s || x >= s {
            return Err(Error::DimensionMismatch { expected: s, actual: prev.max(x) + 1 });
        }
        acc += h.get(prev, x);
        prev = x;
        out.push(acc);
    }
    Ok(out)
}

/// `‖S_k − M_k‖` for `k = 1..=n`, where `M` uses the difference function of
/// `approx`. With `f = g − (I − Q)h` and `u = Qh`,
/// `S_k − M_k = Σ_{i≤k} f(X_i) + u(X_0) − u(X_k)`, whose second moment expands as
/// `Σ_{i,j≤k} γ_f(|i−j|) + 2⟨u,u⟩ − 2⟨u,Q^k u⟩ + 2Σ_{i≤k}⟨u,Q^i f⟩ − 2Σ_{m<k}⟨f,Q^m u⟩`.
pub fn approx_error_profile(model: &MarkovModel, approx: &PoissonApproximant, n: usize) -> Result<Vec<f64>> {
    model.check(&approx.h)?;
    if n == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let h = approx.h.values();
    let u = model.apply_slice(h);
    let f: Vec<f64> = model.g_values().iter().zip(h).zip(&u).map(|((g, hv), uv)| g - hv + uv).collect();
    let s = f.len();
    let uu = model.inner_slice(&u, &u);
    let gamma0 = model.inner_slice(&f, &f);

    let mut pf = f.clone();
    let mut pu = u.clone();
    let mut scratch = vec![0.0; s];
    let (mut a, mut c, mut e, mut gsum) = (0.0, 0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        e += model.inner_slice(&f, &pu);
        a += gamma0 + 2.0 * gsum;
        model.apply_into(&pf, &mut scratch);
        std::mem::swap(&mut pf, &mut scratch);
        model.apply_into(&pu, &mut scratch);
        std::mem::swap(&mut pu, &mut scratch);
        c += model.inner_slice(&u, &pf);
        gsum += model.inner_slice(&f, &pf);
        let b = 2.0 * uu - 2.0 * model.inner_slice(&u, &pu);
        out.push((a + b + 2.0 * (c - e)).max(0.0).sqrt());
    }
    Ok(out)
}

/// `‖S_k − M_k‖` for a single `k`; see [`approx_error_profile`].
pub fn approx_error_l2(model: &MarkovModel, approx: &PoissonApproximant, k: usize) -> Result<f64> {
    Ok(*approx_error_profile(model, approx, k)?.last().expect("k >= 1"))
}

/// Errors of the averaged approximant `h_n` for every `k ≤ n`, with the bound
/// `3 max_{k≤n} ‖E(S_k|X_0)‖`.
pub fn error_bound_report(model: &MarkovModel, n: usize) -> Result<ApproximationErrorReport> {
    let approx = poisson::h_n_averaged(model, n)?;
    let per_k_errors = approx_error_profile(model, &approx, n)?;
    let max_error = per_k_errors.iter().cloned().fold(0.0, f64::max);

    let mut best = 0.0f64;
    let mut qh_n_o = Vec::new();
    poisson::for_each_partial_sum(model, n, |k, ho| {
        let q = model.apply_slice(ho);
        best = best.max(model.norm_slice(&q));
        if k == n {
            qh_n_o = q;
        }
    });
    let qh = model.apply_slice(approx.h.values());
    // n f_n = Q h_n^o
    let sharper_bound = model.norm_slice(&qh_n_o) + 2.0 * model.norm_slice(&qh);
    Ok(ApproximationErrorReport {
        n,
        per_k_errors,
        max_error,
        bound: 3.0 * best,
        sharper_bound,
        sigma_n: variance::sigma_n_sq_raw(model, n).max(0.0).sqrt(),
        method: approx.method,
    })
}

/// `n‖H_a − H_b‖²_{π₁} / σ_n²`.
pub fn equivalence_gap(model: &MarkovModel, a: &PairFunction, b: &PairFunction, n: usize, sigma_n: f64) -> Result<f64> {
    a.check(model)?;
    b.check(model)?;
    if !(sigma_n > 0.0) {
        return Err(Error::InvalidArgument("sigma_n must be positive".into()));
    }
    let d = pair_norm_sq(model, |x0, x1| a.get(x0, x1) - b.get(x0, x1));
    Ok(n as f64 * d / (sigma_n * sigma_n))
}

/// `‖H_a − H_b‖_{π₁}` for difference functions of `h_a`, `h_b`.
fn difference_gap(model: &MarkovModel, ha: &[f64], hb: &[f64]) -> f64 {
    let d: Vec<f64> = ha.iter().zip(hb).map(|(a, b)| a - b).collect();
    let qd = model.apply_slice(&d);
    pair_norm_sq(model, |x0, x1| d[x1] - qd[x0]).sqrt()
}

/// `H` from the exact Poisson solution, checked against the averaged
/// `H_{2^k}`, `k = 0..=14`.
pub fn limit_difference_function(model: &MarkovModel, tol: f64) -> Result<LimitDifference> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let exact = poisson::exact_solution(model)?;
    let h = exact.h.values();

    let mut dyadic: Vec<Vec<f64>> = Vec::with_capacity(LIMIT_MAX_K as usize + 1);
    let mut acc = vec![0.0; model.num_states()];
    poisson::for_each_partial_sum(model, 1 << LIMIT_MAX_K, |k, ho| {
        acc.iter_mut().zip(ho).for_each(|(a, v)| *a += v);
        if k.is_power_of_two() {
            dyadic.push(acc.iter().map(|a| a / k as f64).collect());
        }
    });
    let gaps: Vec<f64> = dyadic.iter().map(|hk| difference_gap(model, hk, h)).collect();
    let successive = dyadic.windows(2).map(|w| difference_gap(model, &w[1], &w[0])).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    let last_gap = *gaps.last().expect("at least one dyadic level");
    let k_star = gaps
        .iter()
        .position(|&g| g <= tol)
        .ok_or(Error::NoConvergence { tol, max_k: LIMIT_MAX_K, last_gap })? as u32;
    Ok(LimitDifference { h: pair_from(model, h, Method::Exact), gaps, successive, k_star, monotone })
}
