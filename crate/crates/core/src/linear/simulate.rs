//! Truncated moving-average simulation `ξ_k = Σ_{j≤J} a_j η_{k−j}`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linear::coeffs::{CoefficientSequence, Family};
use crate::rng::RootSeed;

/// Default share of `Σ a_j²` the truncation may drop.
pub const DEFAULT_TRUNCATION_REL: f64 = 1e-6;
/// Truncation points above this are refused.
pub const MAX_SIM_TRUNCATION: usize = 1 << 26;
/// Below this many multiply-adds the convolution is done directly.
const DIRECT_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Innovation {
    Normal,
    Rademacher,
}

impl Innovation {
    pub fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            Innovation::Normal => rng.sample(StandardNormal),
            Innovation::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// `ξ_1..ξ_n` together with the innovations `η_1..η_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPath {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Smallest `J` with `Σ_{j>J} a_j² ≤ rel · Σ_j a_j²` according to the family's tail bound.
pub fn truncation_for(coeffs: &CoefficientSequence, rel: f64) -> Result<usize> {
    if let Family::Tabulated { values, finite_support: true } = coeffs.family() {
        return Ok(values.len() - 1);
    }
    let target = rel * coeffs.sum_of_squares()?;
    let fits = |j: usize| coeffs.a_sq_tail(j).map(|(_, upper)| upper <= target);
    if !fits(MAX_SIM_TRUNCATION)? {
        return Err(Error::TailBoundUnavailable(format!(
            "{} needs more than {MAX_SIM_TRUNCATION} lags for relative tail {rel:e}",
            coeffs.name()
        )));
    }
    let (mut lo, mut hi) = (1usize, MAX_SIM_TRUNCATION);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if fits(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Reusable simulator for one `(coefficients, n, J)` triple.
pub struct LinearSimulator {
    n: usize,
    big_j: usize,
    innovation: Innovation,
    a: Vec<f64>,
    fft: Option<FftParts>,
}

struct FftParts {
    size: usize,
    filter: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl LinearSimulator {
    pub fn new(coeffs: &CoefficientSequence, n: usize, truncation_j: usize, innovation: Innovation) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if let Family::Tabulated { finite_support: false, .. } = coeffs.family() {
            return Err(crate::linear::coeffs::unavailable_tail());
        }
        let a: Vec<f64> = (0..=truncation_j).map(|j| coeffs.a(j)).collect();
        let fft = if (truncation_j + 1).saturating_mul(n) > DIRECT_LIMIT {
            let size = (truncation_j + n).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut filter: Vec<Complex<f64>> = (0..size).map(|j| Complex::new(a.get(j).copied().unwrap_or(0.0), 0.0)).collect();
            forward.process(&mut filter);
            Some(FftParts { size, filter, forward, inverse })
        } else {
            None
        };
        Ok(Self { n, big_j: truncation_j, innovation, a, fft })
    }

    pub fn truncation(&self) -> usize {
        self.big_j
    }

    /// `η_{1−J}, …, η_n` from stream `index`.
    fn innovations(&self, seed: RootSeed, index: u64) -> Vec<f64> {
        let mut rng = seed.stream(index);
        (0..self.big_j + self.n).map(|_| self.innovation.draw(&mut rng)).collect()
    }

    fn direct(&self, x: &[f64]) -> LinearPath {
        let xi = (0..self.n)
            .map(|k| {
                let m = k + self.big_j;
                self.a.iter().enumerate().map(|(j, a)| a * x[m - j]).sum()
            })
            .collect();
        LinearPath { xi, eta: x[self.big_j..].to_vec() }
    }

    /// Convolves two innovation sequences at once as the real and imaginary parts.
    fn fft_pair(&self, parts: &FftParts, x: &[f64], y: Option<&[f64]>) -> (LinearPath, Option<LinearPath>) {
        let mut buf: Vec<Complex<f64>> = (0..parts.size)
            .map(|t| Complex::new(x.get(t).copied().unwrap_or(0.0), y.and_then(|y| y.get(t).copied()).unwrap_or(0.0)))
            .collect();
        parts.forward.process(&mut buf);
        buf.iter_mut().zip(&parts.filter).for_each(|(b, f)| *b *= f);
        parts.inverse.process(&mut buf);
        let scale = 1.0 / parts.size as f64;
        let window = &buf[self.big_j..self.big_j + self.n];
        let first = LinearPath { xi: window.iter().map(|c| c.re * scale).collect(), eta: x[self.big_j..].to_vec() };
        let second =
            y.map(|y| LinearPath { xi: window.iter().map(|c| c.im * scale).collect(), eta: y[self.big_j..].to_vec() });
        (first, second)
    }

    /// Path `index` of `seed`. On the FFT route paths are computed in pairs
    /// `(2i, 2i + 1)` so that a path is bit-identical whether drawn alone or
    /// inside an ensemble.
    pub fn path(&self, seed: RootSeed, index: u64) -> LinearPath {
        match &self.fft {
            None => self.direct(&self.innovations(seed, index)),
            Some(parts) => {
                let base = index & !1;
                let x = self.innovations(seed, base);
                let y = self.innovations(seed, base + 1);
                let (a, b) = self.fft_pair(parts, &x, Some(&y));
                if index == base {
                    a
                } else {
                    b.expect("pair has a second path")
                }
            }
        }
    }

    /// Paths `0..count` of `seed`, in index order.
    pub fn ensemble(&self, count: usize, seed: RootSeed) -> Vec<LinearPath> {
        match &self.fft {
            None => (0..count).into_par_iter().map(|i| self.path(seed, i as u64)).collect(),
            Some(parts) => {
                let pairs: Vec<(LinearPath, Option<LinearPath>)> = (0..count.div_ceil(2))
                    .into_par_iter()
                    .map(|p| {
                        let i = 2 * p as u64;
                        let x = self.innovations(seed, i);
                        let y = self.innovations(seed, i + 1);
                        self.fft_pair(parts, &x, Some(&y))
                    })
                    .collect();
                let mut out: Vec<LinearPath> = pairs.into_iter().flat_map(|(a, b)| std::iter::once(a).chain(b)).collect();
                out.truncate(count);
                out
            }
        }
    }
}

/// One path from stream 0 of `root_seed`; `truncation_j` must drop at most
/// [`DEFAULT_TRUNCATION_REL`] of `Σ a_j²`.
pub fn simulate_linear(
    coeffs: &CoefficientSequence,
    innovation: Innovation,
    n: usize,
    truncation_j: usize,
    root_seed: RootSeed,
) -> Result<LinearPath> {
    let needed = truncation_for(coeffs, DEFAULT_TRUNCATION_REL)?;
    if truncation_j < needed {
        return Err(Error::InvalidArgument(format!(
            "truncation {truncation_j} drops more than {DEFAULT_TRUNCATION_REL:e} of the variance (need {needed})"
        )));
    }
    Ok(LinearSimulator::new(coeffs, n, truncation_j, innovation)?.path(root_seed, 0))
}

/// `D_{nk} = b̄_n η_k` for the innovations of a path.
pub fn dnk_linear(coeffs: &CoefficientSequence, n: usize, eta: &[f64]) -> Result<Vec<f64>> {
    let b_bar = coeffs.b_bar(n)?;
    Ok(eta.iter().map(|e| b_bar * e).collect())
}
