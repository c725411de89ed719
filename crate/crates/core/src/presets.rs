//! Named models used throughout the tests and the experiment runner.
//!
//! All presets except `coboundary` are irreducible and aperiodic. The
//! coboundary chain is irreducible with period 2: zero long-run variance
//! needs `h(X_1) = Qh(X_0)` almost surely, which no aperiodic finite chain
//! allows for non-constant `h`.

use crate::chain::MarkovModel;

/// Names accepted by [`by_name`].
pub const PRESET_NAMES: &[&str] = &["iid", "iid3", "two_state", "slow_two_state", "three_state", "coboundary"];

pub fn by_name(name: &str) -> Option<MarkovModel> {
    Some(match name {
        "iid" => iid_two_state(),
        "iid3" => iid_uniform(3),
        "two_state" => two_state(0.3, 0.3),
        "slow_two_state" => two_state(0.01, 0.01),
        "three_state" => three_state(),
        "coboundary" => coboundary(),
        _ => return None,
    })
}

/// I.i.d. fair coin with `g = ±1`.
pub fn iid_two_state() -> MarkovModel {
    MarkovModel::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]], vec![-1.0, 1.0]).expect("valid preset")
}

/// I.i.d. uniform on `S` states with a unit-variance linear observable.
pub fn iid_uniform(s: usize) -> MarkovModel {
    let rows = vec![vec![1.0 / s as f64; s]; s];
    let mid = (s as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..s).map(|i| i as f64 - mid).collect();
    let var = raw.iter().map(|v| v * v).sum::<f64>() / s as f64;
    let g = raw.iter().map(|v| v / var.sqrt()).collect();
    MarkovModel::from_rows(&rows, g).expect("valid preset")
}

/// Two states, flip probabilities `p` (from 0) and `q` (from 1), `g = (−1, +1)`
/// recentered under `π = (q, p)/(p + q)`.
pub fn two_state(p: f64, q: f64) -> MarkovModel {
    let rows = vec![vec![1.0 - p, p], vec![q, 1.0 - q]];
    let states = vec!["0".to_string(), "1".to_string()];
    MarkovModel::with_raw_observable(states, &rows, None, vec![-1.0, 1.0]).expect("valid preset").0
}

/// Non-reversible three-state chain with a non-symmetric observable.
pub fn three_state() -> MarkovModel {
    let rows = vec![vec![0.5, 0.4, 0.1], vec![0.1, 0.5, 0.4], vec![0.3, 0.1, 0.6]];
    let states = (0..3).map(|i| i.to_string()).collect();
    MarkovModel::with_raw_observable(states, &rows, None, vec![2.0, -1.0, 0.5]).expect("valid preset").0
}

/// Bipartite four-state chain (`{0,1} ↔ {2,3}`, uniform within the target
/// class) with `g = (I − Q)w`, `w = (1, 1, −1, −1)`. Partial sums telescope:
/// `S_n = w(X_1) − w(X_{n+1})`.
pub fn coboundary() -> MarkovModel {
    let rows = vec![
        vec![0.0, 0.0, 0.5, 0.5],
        vec![0.0, 0.0, 0.5, 0.5],
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.5, 0.5, 0.0, 0.0],
    ];
    MarkovModel::from_rows(&rows, vec![2.0, 2.0, -2.0, -2.0]).expect("valid preset")
}

/// The `w` with `g = (I − Q)w` for [`coboundary`].
pub fn coboundary_potential() -> Vec<f64> {
    vec![1.0, 1.0, -1.0, -1.0]
}

/// Lazy nearest-neighbour walk on a ring of `s` states; sparse kernel, used to
/// exercise trajectory legality.
pub fn sparse_ring(s: usize) -> MarkovModel {
    let mut rows = vec![vec![0.0; s]; s];
    for (x, row) in rows.iter_mut().enumerate() {
        row[x] = 0.5;
        row[(x + 1) % s] += 0.3;
        row[(x + s - 1) % s] += 0.2;
    }
    let states = (0..s).map(|i| i.to_string()).collect();
    let raw = (0..s).map(|i| (i as f64).sin()).collect();
    MarkovModel::with_raw_observable(states, &rows, None, raw).expect("valid preset").0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_named_preset_builds() {
        for name in PRESET_NAMES {
            let m = by_name(name).unwrap();
            assert!(m.mean_pi(&m.g()).unwrap().abs() < 1e-12, "{name}");
        }
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn two_state_symmetric_keeps_unit_observable() {
        let m = two_state(0.3, 0.3);
        assert_eq!(m.g_values(), &[-1.0, 1.0]);
        assert!((m.pi()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coboundary_observable_is_i_minus_q_of_w() {
        let m = coboundary();
        let w = m.function(coboundary_potential()).unwrap();
        let qw = m.apply_kernel(&w).unwrap();
        for x in 0..4 {
            assert_eq!(w.values()[x] - qw.values()[x], m.g_values()[x]);
        }
    }
}
