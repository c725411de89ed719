//! Exact strong-mixing coefficients of a stationary finite chain.

use crate::chain::MarkovModel;
use crate::error::{Error, Result};

/// Largest state space for subset enumeration.
pub const MIXING_MAX_STATES: usize = 12;

/// Rows of `Q^n`, row-major.
#[cfg(test)]
fn kernel_power(model: &MarkovModel, n: usize) -> Vec<f64> {
    let s = model.num_states();
    let mut p = vec![0.0; s * s];
    (0..s).for_each(|i| p[i * s + i] = 1.0);
    let mut next = vec![0.0; s * s];
    for _ in 0..n {
        for i in 0..s {
            for j in 0..s {
                next[i * s + j] = (0..s).map(|k| p[i * s + k] * model.transition(k, j)).sum();
            }
        }
        std::mem::swap(&mut p, &mut next);
    }
    p
}

/// `(Q − 1πᵀ)^n = Q^n − 1πᵀ` for `n ≥ 1`, row-major, without the cancellation
/// of subtracting `π` from a converged `Q^n`.
fn centered_kernel_power(model: &MarkovModel, n: usize) -> Vec<f64> {
    let s = model.num_states();
    let pi = model.pi();
    let d: Vec<f64> = (0..s * s).map(|k| model.transition(k / s, k % s) - pi[k % s]).collect();
    let mut p = d.clone();
    let mut next = vec![0.0; s * s];
    for _ in 1..n {
        for i in 0..s {
            for j in 0..s {
                next[i * s + j] = (0..s).map(|k| p[i * s + k] * d[k * s + j]).sum();
            }
        }
        std::mem::swap(&mut p, &mut next);
    }
    p
}

/// `sup_{A,B} |P(X_0 ∈ A, X_n ∈ B) − π(A)π(B)|` over subsets of states.
/// For fixed `A` the inner sup over `B` collects either all positive or all
/// negative entries of `r_A(x′) = Σ_{x∈A} π(x)Q^n(x, x′) − π(A)π(x′)`.
pub fn alpha_mixing_exact(model: &MarkovModel, n: usize) -> Result<f64> {
    let s = model.num_states();
    if s > MIXING_MAX_STATES {
        return Err(Error::StateSpaceTooLarge { size: s, limit: MIXING_MAX_STATES });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("mixing lag must be at least 1".into()));
    }
    let dn = centered_kernel_power(model, n);
    let pi = model.pi();
    let mut best = 0.0f64;
    let mut r = vec![0.0; s];
    for mask in 1u32..(1 << s) {
        r.iter_mut().for_each(|v| *v = 0.0);
        for x in (0..s).filter(|x| mask & (1 << x) != 0) {
            for (y, rv) in r.iter_mut().enumerate() {
                *rv += pi[x] * dn[x * s + y];
            }
        }
        let (mut pos, mut neg) = (0.0, 0.0);
        for &d in &r {
            if d > 0.0 {
                pos += d;
            } else {
                neg -= d;
            }
        }
        best = best.max(pos).max(neg);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    /// Enumerates every `(A, B)` pair directly.
    fn brute(model: &MarkovModel, n: usize) -> f64 {
        let s = model.num_states();
        let qn = kernel_power(model, n);
        let pi = model.pi();
        let mut best = 0.0f64;
        for a in 0u32..(1 << s) {
            for b in 0u32..(1 << s) {
                let ins = |m: u32, x: usize| m & (1 << x) != 0;
                let pa: f64 = (0..s).filter(|&x| ins(a, x)).map(|x| pi[x]).sum();
                let pb: f64 = (0..s).filter(|&x| ins(b, x)).map(|x| pi[x]).sum();
                let joint: f64 = (0..s)
                    .filter(|&x| ins(a, x))
                    .flat_map(|x| (0..s).filter(move |&y| ins(b, y)).map(move |y| (x, y)))
                    .map(|(x, y)| pi[x] * qn[x * s + y])
                    .sum();
                best = best.max((joint - pa * pb).abs());
            }
        }
        best
    }

    /// Same supremum with the past event allowed to depend on `(X_{−1}, X_0)`.
    fn brute_two_step_past(model: &MarkovModel) -> f64 {
        let s = model.num_states();
        let pi = model.pi();
        let pairs: Vec<(usize, usize)> = (0..s).flat_map(|a| (0..s).map(move |b| (a, b))).collect();
        let p_pair: Vec<f64> = pairs.iter().map(|&(a, b)| pi[a] * model.transition(a, b)).collect();
        let mut best = 0.0f64;
        for amask in 0u32..(1 << pairs.len()) {
            for bmask in 0u32..(1 << s) {
                let mut pa = 0.0;
                let mut joint = 0.0;
                for (k, &(_, x0)) in pairs.iter().enumerate() {
                    if amask & (1 << k) != 0 {
                        pa += p_pair[k];
                        joint += p_pair[k] * (0..s).filter(|&y| bmask & (1 << y) != 0).map(|y| model.transition(x0, y)).sum::<f64>();
                    }
                }
                let pb: f64 = (0..s).filter(|&y| bmask & (1 << y) != 0).map(|y| pi[y]).sum();
                best = best.max((joint - pa * pb).abs());
            }
        }
        best
    }

    #[test]
    fn mixing_examples() {
        let iid = presets::iid_uniform(3);
        for n in 1..5 {
            assert!(alpha_mixing_exact(&iid, n).unwrap() < 1e-15);
        }
        let m = presets::two_state(0.3, 0.3);
        assert!((alpha_mixing_exact(&m, 1).unwrap() - 0.1).abs() < 1e-15);
        for n in 1..12 {
            assert!((alpha_mixing_exact(&m, n).unwrap() - 0.25 * 0.4f64.powi(n as i32)).abs() < 1e-15);
        }
        let a = alpha_mixing_exact(&m, 64).unwrap();
        assert!((a / (0.25 * 0.4f64.powi(64)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduction_matches_enumeration() {
        for m in [presets::three_state(), presets::two_state(0.2, 0.5), presets::coboundary(), presets::sparse_ring(5)] {
            for n in [1, 2, 5] {
                assert!((alpha_mixing_exact(&m, n).unwrap() - brute(&m, n)).abs() < 1e-12);
            }
        }
        let m = presets::three_state();
        assert!((alpha_mixing_exact(&m, 1).unwrap() - brute_two_step_past(&m)).abs() < 1e-12);
    }

    #[test]
    fn large_models_are_refused() {
        let m = presets::sparse_ring(13);
        assert!(matches!(alpha_mixing_exact(&m, 1), Err(Error::StateSpaceTooLarge { size: 13, limit: 12 })));
    }
}
