//! I.i.d. increments with tail `P(|Y| > y) ~ 2/(y² ln^{3/2} y)`, used to show
//! that `max_k |Y_k − Y_0|/σ_n` need not vanish although `σ_n² ~ n/ln² n`.

use std::f64::consts::E;

use rand::Rng;
use rayon::prelude::*;

use crate::clt::functional::PathEnsembleStat;
use crate::error::{Error, Result};
use crate::rng::RootSeed;

/// Levels at which exceedances of the Example 3 statistic are reported.
pub const EXAMPLE3_EPS: [f64; 3] = [0.5, 1.0, 2.0];

/// Where the power tail takes over from the uniform body.
pub fn body_edge() -> f64 {
    E * E
}

/// `P(|Y| > y)` for `y ≥ e²`.
pub fn tail_prob(y: f64) -> f64 {
    2.0 / (y * y * y.ln().powf(1.5))
}

/// `P(|Y| > y)` everywhere: uniform body on `[0, e²]`, power tail beyond.
pub fn abs_survival(y: f64) -> f64 {
    let edge = body_edge();
    let p = tail_prob(edge);
    if y <= 0.0 {
        1.0
    } else if y < edge {
        p + (1.0 - p) * (1.0 - y / edge)
    } else {
        tail_prob(y)
    }
}

/// `y ≥ e²` with `tail_prob(y) = u`, by Newton on `L = ln y` in `2L + 1.5 ln L = ln(2/u)`.
fn tail_inverse(u: f64) -> f64 {
    let k = (2.0 / u).ln();
    let mut l = (0.5 * k).max(2.0);
    for _ in 0..50 {
        let f = 2.0 * l + 1.5 * l.ln() - k;
        let step = f / (2.0 + 1.5 / l);
        l -= step;
        if step.abs() < 1e-15 * l {
            break;
        }
    }
    l.exp()
}

/// Distribution of the increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example3Law {
    HeavyTail,
    /// uniform on `[−√3, √3]`
    Bounded,
}

impl Example3Law {
    pub fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let positive: bool = rng.random();
        let magnitude = match self {
            Example3Law::HeavyTail => {
                // inverse of P(|Y| > y) at 1 − u ∈ (0, 1]
                let s = 1.0 - u;
                let edge = body_edge();
                let p = tail_prob(edge);
                if s <= p {
                    tail_inverse(s)
                } else {
                    edge * (1.0 - (s - p) / (1.0 - p))
                }
            }
            Example3Law::Bounded => 3f64.sqrt() * u,
        };
        if positive {
            magnitude
        } else {
            -magnitude
        }
    }
}

/// `σ_n = √(n / ln² n)`.
pub fn example3_sigma(n: usize) -> f64 {
    let nf = n as f64;
    (nf / nf.ln().powi(2)).sqrt()
}

/// Per path `max_{1≤k≤n} |Y_k − Y_0| / σ_n` with i.i.d. `Y_0..Y_n`.
pub fn example3_stat(n: usize, ensemble: usize, root_seed: RootSeed, law: Example3Law) -> Result<PathEnsembleStat> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!("example 3 needs n >= 16, got {n}")));
    }
    if ensemble == 0 {
        return Err(Error::InvalidArgument("ensemble must be non-empty".into()));
    }
    let sigma = example3_sigma(n);
    let samples: Vec<f64> = (0..ensemble)
        .into_par_iter()
        .map(|i| {
            let mut rng = root_seed.stream(i as u64);
            let y0 = law.sample(&mut rng);
            (0..n).map(|_| (law.sample(&mut rng) - y0).abs()).fold(0.0, f64::max) / sigma
        })
        .collect();
    Ok(PathEnsembleStat::from_samples(n, samples, &EXAMPLE3_EPS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_is_continuous_and_decreasing() {
        let edge = body_edge();
        assert!((abs_survival(edge - 1e-9) - abs_survival(edge + 1e-9)).abs() < 1e-9);
        assert!((tail_prob(edge) - 0.012_95).abs() < 1e-4);
        let ys: Vec<f64> = (0..500).map(|i| i as f64 * 0.1).collect();
        assert!(ys.windows(2).all(|w| abs_survival(w[1]) <= abs_survival(w[0])));
        for u in [1e-3, 1e-6, 1e-10] {
            assert!((tail_prob(tail_inverse(u)) / u - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_tail_constant() {
        let mut rng = RootSeed(17).stream(0);
        let m = 1_000_000;
        let y = 50.0f64;
        let hits = (0..m).filter(|_| Example3Law::HeavyTail.sample(&mut rng).abs() > y).count();
        let c = y * y * y.ln().powf(1.5) * hits as f64 / m as f64;
        assert!((c / 2.0 - 1.0).abs() < 0.3, "{c}");
    }

    #[test]
    fn bounded_control_shrinks() {
        let a = example3_stat(1 << 10, 200, RootSeed(1), Example3Law::Bounded).unwrap();
        let b = example3_stat(1 << 14, 200, RootSeed(1), Example3Law::Bounded).unwrap();
        assert!(a.median / b.median > 2.0);
        assert!(example3_stat(8, 10, RootSeed(1), Example3Law::Bounded).is_err());
    }
}
