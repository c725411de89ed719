#![allow(dead_code)]

use martapprox::martingale::PairFunction;
use martapprox::MarkovModel;
use proptest::prelude::*;
use proptest::test_runner::Config;

pub fn cases(n: u32) -> Config {
    Config { cases: n, failure_persistence: None, ..Config::default() }
}

/// Strictly positive kernels on 2..=6 states with a random observable, centered.
pub fn ergodic_model() -> impl Strategy<Value = MarkovModel> {
    (2usize..=6)
        .prop_flat_map(|s| (prop::collection::vec(prop::collection::vec(0.05f64..1.0, s), s), prop::collection::vec(-3.0f64..3.0, s)))
        .prop_map(|(mut rows, g)| {
            for r in &mut rows {
                let t: f64 = r.iter().sum();
                r.iter_mut().for_each(|v| *v /= t);
            }
            let states = (0..rows.len()).map(|i| format!("s{i}")).collect();
            MarkovModel::with_raw_observable(states, &rows, None, g).expect("positive kernel").0
        })
}

/// Visits every path `X_0..X_k` with its probability under the stationary start.
pub fn for_each_path(m: &MarkovModel, k: usize, mut f: impl FnMut(f64, &[usize])) {
    let s = m.num_states();
    let mut path = vec![0usize; k + 1];
    fn rec(m: &MarkovModel, s: usize, depth: usize, p: f64, path: &mut Vec<usize>, f: &mut dyn FnMut(f64, &[usize])) {
        if depth == path.len() {
            f(p, path);
            return;
        }
        for y in 0..s {
            let q = if depth == 0 { m.pi()[y] } else { m.transition(path[depth - 1], y) };
            path[depth] = y;
            rec(m, s, depth + 1, p * q, path, f);
        }
    }
    rec(m, s, 0, 1.0, &mut path, &mut f);
}

/// `E (S_k − M_k)²` by enumerating all paths.
pub fn brute_error_sq(m: &MarkovModel, h: &PairFunction, k: usize) -> f64 {
    let mut total = 0.0;
    for_each_path(m, k, |p, x| {
        let d: f64 = (1..=k).map(|i| m.g_values()[x[i]] - h.get(x[i - 1], x[i])).sum();
        total += p * d * d;
    });
    total
}
