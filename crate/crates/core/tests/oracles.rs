mod common;

use approx::assert_relative_eq;
use common::{brute_error_sq, for_each_path};
use martapprox::chain::StartSpec;
use martapprox::clt::{levy_distance, Cdf, EmpiricalCdf};
use martapprox::linear::{sigma2_sq, CoefficientSequence};
use martapprox::martingale::{approx_error_l2, difference_function, martingale_path};
use martapprox::poisson::{exact_solution, h_n_averaged, h_n_partial, resolvent};
use martapprox::rng::RootSeed;
use martapprox::variance::sigma_n_sq_raw;
use martapprox::{presets, MarkovModel};

fn three_state() -> MarkovModel {
    presets::three_state()
}

#[test]
fn variance_and_conditional_mean_by_enumeration() {
    let m = three_state();
    for n in 1..=6 {
        let mut var = 0.0;
        let mut cond = vec![0.0; m.num_states()];
        for_each_path(&m, n, |p, x| {
            let s: f64 = x[1..].iter().map(|&y| m.g_values()[y]).sum();
            var += p * s * s;
            cond[x[0]] += p * s / m.pi()[x[0]];
        });
        assert_relative_eq!(sigma_n_sq_raw(&m, n), var, max_relative = 1e-12);
        let exact = m.conditional_mean_sn(n).unwrap();
        for (a, b) in exact.values().iter().zip(&cond) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn approximants_against_matrix_powers() {
    let m = three_state();
    let s = m.num_states();
    let rows = m.kernel_rows();
    // Q^j g by repeated dense products
    let mut powers = vec![m.g_values().to_vec()];
    for _ in 0..40 {
        let last = powers.last().unwrap();
        powers.push((0..s).map(|x| (0..s).map(|y| rows[x][y] * last[y]).sum()).collect());
    }
    let n = 12;
    let partial: Vec<f64> = (0..s).map(|x| (0..n).map(|j| powers[j][x]).sum()).collect();
    let averaged: Vec<f64> = (0..s).map(|x| (1..=n).map(|k| (0..k).map(|j| powers[j][x]).sum::<f64>()).sum::<f64>() / n as f64).collect();
    for (a, b) in h_n_partial(&m, n).unwrap().h.values().iter().zip(&partial) {
        assert!((a - b).abs() < 1e-12);
    }
    for (a, b) in h_n_averaged(&m, n).unwrap().h.values().iter().zip(&averaged) {
        assert!((a - b).abs() < 1e-12);
    }
    // resolvent as a geometric series, truncated where terms are below 1e-16
    let eps = 0.5;
    let series: Vec<f64> = (0..s).map(|x| (1..=40).map(|j| (1.0f64 + eps).powi(-(j as i32)) * powers[j - 1][x]).sum()).collect();
    for (a, b) in resolvent(&m, eps).unwrap().h.values().iter().zip(&series) {
        assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()));
    }
}

#[test]
fn exact_solution_solves_poisson_equation() {
    let m = three_state();
    let h = exact_solution(&m).unwrap();
    let qh = m.apply_kernel(&h.h).unwrap();
    for x in 0..m.num_states() {
        assert!((h.h.values()[x] - qh.values()[x] - m.g_values()[x]).abs() < 1e-12);
    }
}

#[test]
fn error_l2_monte_carlo() {
    let m = presets::two_state(0.3, 0.3);
    let (n, k, count) = (16, 16, 100_000);
    let a = h_n_averaged(&m, n).unwrap();
    let h = difference_function(&m, &a).unwrap();
    let sq = m
        .map_paths(k, count, StartSpec::Stationary, RootSeed(91), |_, x0, path| {
            let s = m.partial_sums(path)[k - 1];
            let mk = martingale_path(&h, x0, path).unwrap()[k - 1];
            (s - mk).powi(2)
        })
        .unwrap();
    let mean = sq.iter().sum::<f64>() / count as f64;
    let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
    let se = (var / count as f64).sqrt();
    let exact = approx_error_l2(&m, &a, k).unwrap().powi(2);
    assert!((mean - exact).abs() < 4.0 * se, "MC {mean} ± {se} vs exact {exact}");
    assert_relative_eq!(approx_error_l2(&m, &a, 10).unwrap().powi(2), brute_error_sq(&m, &h, 10), max_relative = 1e-10);
}

#[test]
fn sigma2_from_direct_partial_sums() {
    for c in [CoefficientSequence::harmonic(), CoefficientSequence::power_law(0.75).unwrap(), CoefficientSequence::alternating_power(0.6).unwrap()] {
        let n = 500;
        let mut b = 0.0;
        let mut direct = 0.0;
        for j in 0..n {
            b += c.a(j);
            direct += b * b;
        }
        assert_relative_eq!(sigma2_sq(&c, n).unwrap(), direct, max_relative = 1e-12);
    }
}

/// Lévy distance by scanning ε on a grid and x on a fine mesh.
fn levy_scan(a: &[f64], b: &[f64]) -> f64 {
    let f = EmpiricalCdf::new(a.to_vec()).unwrap();
    let g = EmpiricalCdf::new(b.to_vec()).unwrap();
    let xs: Vec<f64> = (-4000..=4000).map(|i| i as f64 * 1e-3).collect();
    let fits = |eps: f64| {
        xs.iter().all(|&x| f.cdf(x - eps) - eps <= g.cdf(x) + 1e-12 && g.cdf(x) <= f.cdf(x + eps) + eps + 1e-12)
    };
    (0..=1000).map(|i| i as f64 * 1e-3).find(|&e| fits(e)).unwrap_or(1.0)
}

#[test]
fn levy_matches_grid_scan() {
    let cases: [(&[f64], &[f64]); 4] = [
        (&[0.0], &[0.5]),
        (&[0.0, 1.0], &[0.1, 1.3]),
        (&[-1.0, 0.0, 2.0], &[-1.0, 0.05, 0.1, 2.5]),
        (&[0.3, 0.3, 0.4, 1.9, -2.0], &[1.0, 1.2]),
    ];
    for (a, b) in cases {
        let fast = levy_distance(&Cdf::Empirical(EmpiricalCdf::new(a.to_vec()).unwrap()), &Cdf::Empirical(EmpiricalCdf::new(b.to_vec()).unwrap()));
        let slow = levy_scan(a, b);
        assert!((fast - slow).abs() <= 2e-3, "{a:?} {b:?}: {fast} vs {slow}");
    }
}
