//! Exact `σ_n²`, `ℓ(n)` and conditional-mean diagnostics for finite chains.

use crate::chain::MarkovModel;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Relative floor below which `σ_n²` counts as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// `σ_n²`, `ℓ(n)` and `‖E(S_n | X_0)‖` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    pub n_grid: Vec<usize>,
    pub sigma_sq: Vec<f64>,
    pub ell: Vec<f64>,
    pub cond_mean_norm: Vec<f64>,
}

impl VarianceProfile {
    /// `‖E(S_n | X_0)‖ / σ_n` per grid point.
    pub fn ratio4(&self) -> Vec<f64> {
        self.cond_mean_norm.iter().zip(&self.sigma_sq).map(|(c, s)| c / s.sqrt()).collect()
    }
}

/// `γ_k = ⟨g, Q^k g⟩_π`.
pub fn autocovariance(model: &MarkovModel, k: usize) -> f64 {
    let qk = model.kernel_power_apply(&model.g(), k).expect("g belongs to its model");
    model.inner_slice(model.g_values(), qk.values())
}

/// `γ_0..γ_{len−1}`.
pub fn autocovariances(model: &MarkovModel, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    walk(model, len.saturating_sub(1), |_, gamma, _| out.push(gamma));
    out
}

/// Visits `(k, γ_k, ‖Σ_{i=1}^k Q^i g‖)` for `k = 0..=max_k`; the norm is 0 at `k = 0`.
fn walk(model: &MarkovModel, max_k: usize, mut visit: impl FnMut(usize, f64, f64)) {
    let g = model.g_values();
    let mut power = g.to_vec();
    let mut next = vec![0.0; g.len()];
    let mut cond = vec![0.0; g.len()];
    visit(0, model.inner_slice(g, g), 0.0);
    for k in 1..=max_k {
        model.apply_into(&power, &mut next);
        std::mem::swap(&mut power, &mut next);
        cond.iter_mut().zip(&power).for_each(|(c, p)| *c += p);
        visit(k, model.inner_slice(g, &power), model.norm_slice(&cond));
    }
}

/// `σ_n² = nγ_0 + 2Σ_{k<n}(n − k)γ_k` without the degeneracy check.
pub fn sigma_n_sq_raw(model: &MarkovModel, n: usize) -> f64 {
    let mut sigma = 0.0;
    sigma_sq_walk(model, n, |m, s, _| {
        if m == n {
            sigma = s
        }
    });
    sigma
}

/// Visits `(n, σ_n², ‖E(S_n|X_0)‖)` for `n = 1..=max_n` using
/// `σ_n² = σ_{n−1}² + γ_0 + 2Σ_{k=1}^{n−1} γ_k`.
fn sigma_sq_walk(model: &MarkovModel, max_n: usize, mut visit: impl FnMut(usize, f64, f64)) {
    let mut gamma0 = 0.0;
    let mut tail = NeumaierSum::new();
    let mut sigma = NeumaierSum::new();
    // γ_k and the conditional mean of S_k arrive together; σ_{k}² needs γ_1..γ_{k−1}
    walk(model, max_n, |k, gamma, cond| {
        if k == 0 {
            gamma0 = gamma;
            return;
        }
        sigma.add(gamma0 + 2.0 * tail.value());
        tail.add(gamma);
        visit(k, sigma.value(), cond);
    });
}

fn check_degenerate(n: usize, sigma_sq: f64, gamma0: f64) -> Result<f64> {
    if !(sigma_sq > DEGENERACY_FLOOR * n as f64 * gamma0) {
        return Err(Error::DegenerateVariance { n, sigma_sq });
    }
    Ok(sigma_sq)
}

pub fn sigma_n_sq(model: &MarkovModel, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let gamma0 = autocovariance(model, 0);
    check_degenerate(n, sigma_n_sq_raw(model, n), gamma0)
}

/// `‖E(S_n | X_0)‖ / σ_n`.
pub fn condition4_ratio(model: &MarkovModel, n: usize) -> Result<f64> {
    let sigma_sq = sigma_n_sq(model, n)?;
    let cond = model.conditional_mean_sn(n)?;
    Ok(model.l2_norm_pi(&cond)? / sigma_sq.sqrt())
}

fn check_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be non-empty, positive and strictly increasing".into()));
    }
    Ok(())
}

pub fn ell_profile(model: &MarkovModel, n_grid: &[usize]) -> Result<VarianceProfile> {
    check_grid(n_grid)?;
    let gamma0 = autocovariance(model, 0);
    let max_n = *n_grid.last().expect("non-empty grid");
    let mut sigma_sq = Vec::with_capacity(n_grid.len());
    let mut cond_mean_norm = Vec::with_capacity(n_grid.len());
    let mut next = 0;
    sigma_sq_walk(model, max_n, |n, s, c| {
        if next < n_grid.len() && n == n_grid[next] {
            sigma_sq.push(s);
            cond_mean_norm.push(c);
            next += 1;
        }
    });
    for (&n, &s) in n_grid.iter().zip(&sigma_sq) {
        check_degenerate(n, s, gamma0)?;
    }
    let ell = n_grid.iter().zip(&sigma_sq).map(|(&n, s)| s / n as f64).collect();
    Ok(VarianceProfile { n_grid: n_grid.to_vec(), sigma_sq, ell, cond_mean_norm })
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("q must exceed 1, got {q}")));
    }
    Ok(())
}

/// `‖E(S_n | X_0)‖ · log^q n / √n` per grid point.
pub fn condition15_series(model: &MarkovModel, n_grid: &[usize], q: f64) -> Result<Vec<f64>> {
    check_grid(n_grid)?;
    check_q(q)?;
    if n_grid[0] < 2 {
        return Err(Error::InvalidArgument("condition (15) series needs n >= 2".into()));
    }
    let max_n = *n_grid.last().expect("non-empty grid");
    let mut out = Vec::with_capacity(n_grid.len());
    let mut next = 0;
    walk(model, max_n, |k, _, cond| {
        if next < n_grid.len() && k == n_grid[next] {
            let n = k as f64;
            out.push(cond * n.ln().powf(q) / n.sqrt());
            next += 1;
        }
    });
    Ok(out)
}

/// `‖Q^n g‖ · √n · log^q n` per grid point.
pub fn condition19_series(model: &MarkovModel, n_grid: &[usize], q: f64) -> Result<Vec<f64>> {
    check_grid(n_grid)?;
    check_q(q)?;
    let g = model.g_values();
    let mut power = g.to_vec();
    let mut next = vec![0.0; g.len()];
    let mut out = Vec::with_capacity(n_grid.len());
    let mut k = 0;
    for &n in n_grid {
        while k < n {
            model.apply_into(&power, &mut next);
            std::mem::swap(&mut power, &mut next);
            k += 1;
        }
        let nf = n as f64;
        out.push(model.norm_slice(&power) * nf.sqrt() * nf.ln().powf(q));
    }
    Ok(out)
}

/// Default grid `2^lo ..= 2^hi`.
pub fn dyadic_grid(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    const LAMBDA: f64 = 0.4;

    /// `E(S_n²)` by summing over every path `X_0..X_n` under `π`.
    fn brute_force_second_moment(model: &MarkovModel, n: usize) -> f64 {
        let s = model.num_states();
        let mut total = 0.0;
        let mut stack = Vec::new();
        for x0 in 0..s {
            stack.push((x0, 0, model.pi()[x0], 0.0));
        }
        while let Some((x, depth, prob, sum)) = stack.pop() {
            if depth == n {
                total += prob * sum * sum;
                continue;
            }
            for y in 0..s {
                let p = model.transition(x, y);
                if p > 0.0 {
                    stack.push((y, depth + 1, prob * p, sum + model.g_values()[y]));
                }
            }
        }
        total
    }

    #[test]
    fn autocovariance_examples() {
        let iid = presets::iid_uniform(3);
        assert!((autocovariance(&iid, 0) - 1.0).abs() < 1e-14);
        assert!(autocovariance(&iid, 3).abs() < 1e-15);
        let m = presets::two_state(0.3, 0.3);
        for k in 0..20 {
            assert!((autocovariance(&m, k) - LAMBDA.powi(k as i32)).abs() < 1e-14);
        }
        assert_eq!(autocovariances(&m, 5).len(), 5);
    }

    #[test]
    fn sigma_examples() {
        let iid = presets::iid_two_state();
        for n in [1, 7, 100] {
            assert!((sigma_n_sq(&iid, n).unwrap() - n as f64).abs() < 1e-10);
        }
        let m = presets::two_state(0.3, 0.3);
        // geometric-series oracle: σ_n² = n(1+λ)/(1−λ) − 2λ(1 − λ^n)/(1−λ)²
        for n in [1, 2, 10, 1000] {
            let nf = n as f64;
            let want = nf * (1.0 + LAMBDA) / (1.0 - LAMBDA) - 2.0 * LAMBDA * (1.0 - LAMBDA.powi(n as i32)) / (1.0 - LAMBDA).powi(2);
            assert!((sigma_n_sq(&m, n).unwrap() - want).abs() < 1e-9 * want);
        }
        assert!((sigma_n_sq(&m, 1 << 14).unwrap() / (1 << 14) as f64 - 7.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn coboundary_variance_is_bounded_and_flagged() {
        let m = presets::coboundary();
        // telescoping oracle ‖w(X_1) − w(X_{n+1})‖²: 0 for even n, 4 for odd n
        for n in 1..40 {
            let want = if n % 2 == 0 { 0.0 } else { 4.0 };
            assert!((sigma_n_sq_raw(&m, n) - want).abs() < 1e-10);
        }
        assert!(matches!(sigma_n_sq(&m, 1024), Err(Error::DegenerateVariance { n: 1024, .. })));
        let p = ell_profile(&m, &[1, 3, 101, 1001]).unwrap();
        assert!(p.ell.windows(2).all(|w| w[1] < w[0]));
        assert!(p.ell[3] < 0.005);
    }

    #[test]
    fn sigma_matches_path_enumeration() {
        let models = [presets::two_state(0.3, 0.3), presets::two_state(0.2, 0.7), presets::three_state(), presets::iid_uniform(3)];
        for m in &models {
            for n in 1..=8 {
                let brute = brute_force_second_moment(m, n);
                assert!((sigma_n_sq_raw(m, n) - brute).abs() < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn condition4_examples() {
        let iid = presets::iid_uniform(3);
        assert!(condition4_ratio(&iid, 50).unwrap() < 1e-14);
        let m = presets::three_state();
        let qg = m.apply_kernel(&m.g()).unwrap();
        let want = m.l2_norm_pi(&qg).unwrap() / m.l2_norm_pi(&m.g()).unwrap();
        assert!((condition4_ratio(&m, 1).unwrap() - want).abs() < 1e-14);

        let m = presets::two_state(0.3, 0.3);
        let mut n = 8;
        while n <= 1 << 12 {
            let r = condition4_ratio(&m, n).unwrap() / condition4_ratio(&m, 4 * n).unwrap();
            assert!((r - 2.0).abs() < 0.4, "n={n} ratio {r}");
            n *= 4;
        }
    }

    #[test]
    fn ell_profile_examples() {
        let iid = presets::iid_two_state();
        let p = ell_profile(&iid, &dyadic_grid(0, 10)).unwrap();
        assert!(p.ell.iter().all(|v| (v - 1.0).abs() < 1e-12));

        let m = presets::two_state(0.3, 0.3);
        let p = ell_profile(&m, &dyadic_grid(3, 14)).unwrap();
        let drift: Vec<f64> = p.ell.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).collect();
        assert!(drift.windows(2).all(|w| w[1] < w[0]));
        assert!((p.ell.last().unwrap() - 7.0 / 3.0).abs() < 1e-3);
        for (i, &n) in p.n_grid.iter().enumerate() {
            assert!((p.sigma_sq[i] - sigma_n_sq(&m, n).unwrap()).abs() < 1e-9 * p.sigma_sq[i]);
            let c = m.l2_norm_pi(&m.conditional_mean_sn(n).unwrap()).unwrap();
            assert!((p.cond_mean_norm[i] - c).abs() < 1e-12);
        }
        assert!(ell_profile(&m, &[4, 4]).is_err());
        assert!(ell_profile(&m, &[]).is_err());
    }

    #[test]
    fn condition_series_examples() {
        let iid = presets::iid_uniform(3);
        let grid = dyadic_grid(1, 10);
        assert!(condition15_series(&iid, &grid, 2.0).unwrap().iter().all(|v| v.abs() < 1e-13));
        assert!(condition19_series(&iid, &grid, 2.0).unwrap().iter().all(|v| v.abs() < 1e-13));

        let m = presets::two_state(0.3, 0.3);
        let grid = dyadic_grid(3, 14);
        // ‖E(S_n|X_0)‖ = λ(1 − λ^n)/(1 − λ) is bounded, so the series is eventually decreasing
        for q in [2.0, 3.0] {
            let s = condition15_series(&m, &grid, q).unwrap();
            for (v, &n) in s.iter().zip(&grid) {
                let nf = n as f64;
                let want = LAMBDA * (1.0 - LAMBDA.powi(n as i32)) / (1.0 - LAMBDA) * nf.ln().powf(q) / nf.sqrt();
                assert!((v - want).abs() < 1e-12 * want);
            }
            assert!(s[s.len() - 4..].windows(2).all(|w| w[1] < w[0]));
        }
        let s = condition19_series(&m, &grid, 2.0).unwrap();
        for (v, &n) in s.iter().zip(&grid) {
            let nf = n as f64;
            let want = LAMBDA.powi(n as i32) * nf.sqrt() * nf.ln().powi(2);
            assert!((v - want).abs() <= 1e-12 * want + 1e-13);
        }

        let slow = presets::by_name("slow_two_state").unwrap();
        let s = condition19_series(&slow, &dyadic_grid(1, 12), 2.0).unwrap();
        let peak = s.iter().cloned().fold(0.0, f64::max);
        assert!(peak > 10.0);
        assert!(*s.last().unwrap() < 1e-10);

        assert!(condition15_series(&m, &[1, 2], 2.0).is_err());
        assert!(condition19_series(&m, &[2, 4], 1.0).is_err());
    }

    #[test]
    fn slow_variation_where_condition4_holds() {
        for name in ["iid", "iid3", "two_state", "slow_two_state", "three_state"] {
            let m = presets::by_name(name).unwrap();
            let p = ell_profile(&m, &dyadic_grid(3, 14)).unwrap();
            let k = p.ell.len() - 1;
            assert!((p.ell[k] / p.ell[k - 1] - 1.0).abs() < 0.05, "{name}");
        }
    }
}
