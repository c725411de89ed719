//! `σ_{n,1}²`, `σ_{n,2}²`, the ratio test for `σ_{n,1}² = o(σ_{n,2}²)` and
//! log–log growth fits.

use std::fmt;

use crate::error::{Error, Result};
use crate::linear::coeffs::{unavailable_tail, CoefficientSequence, Family};
use crate::numeric::{linear_fit, tail_integral, NeumaierSum};

/// Largest truncation point tried before giving up on a tail bound.
pub const MAX_TRUNCATION: usize = 1 << 31;

/// `σ_{n,1}²` with the truncation used and a bound on the estimated tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma1 {
    pub value: f64,
    pub truncation_j: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "HOLDS",
            Verdict::Fails => "FAILS",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Thresholds for [`condition9_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition9Thresholds {
    /// final ratio below which a decreasing ratio counts as vanishing
    pub holds_below: f64,
    /// largest relative change over the top three grid points for a ratio to count as stable
    pub stable_rel_change: f64,
}

impl Default for Condition9Thresholds {
    fn default() -> Self {
        Self { holds_below: 0.05, stable_rel_change: 0.10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearVarianceReport {
    pub n: usize,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma_sq_total: f64,
    pub ratio9: f64,
    pub truncation_j: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition9Report {
    pub rows: Vec<LinearVarianceReport>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    pub r_squared: f64,
}

pub fn partial_sums_b(coeffs: &CoefficientSequence, n: usize) -> f64 {
    coeffs.b(n)
}

pub fn b_bar(coeffs: &CoefficientSequence, n: usize) -> Result<f64> {
    coeffs.b_bar(n)
}

/// `σ_{n,2}² = Σ_{j=0}^{n−1} b_j²`.
pub fn sigma2_sq(coeffs: &CoefficientSequence, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("sigma2_sq needs n >= 1".into()));
    }
    let mut acc = NeumaierSum::new();
    coeffs.b_iter().take(n).for_each(|b| acc.add(b * b));
    Ok(acc.value())
}

/// Lower and upper envelopes `lo(u) ≤ |b_{j+n} − b_j| ≤ hi(u)` at `u = j`,
/// both non-increasing in `u`, plus the decay exponent of `hi²`.
struct Envelope<'a> {
    lo: Box<dyn Fn(f64) -> f64 + 'a>,
    hi: Box<dyn Fn(f64) -> f64 + 'a>,
    decay: f64,
}

fn envelope(coeffs: &CoefficientSequence, n: usize) -> Option<Envelope<'static>> {
    let nf = n as f64;
    match *coeffs.family() {
        // Σ_{i=j+1}^{j+n} 1/i sits between ∫_{j+1}^{j+n+1} and ∫_j^{j+n} of 1/u
        Family::Harmonic => Some(Envelope {
            lo: Box::new(move |u| (nf / (u + 1.0)).ln_1p()),
            hi: Box::new(move |u| (nf / u).ln_1p()),
            decay: 2.0,
        }),
        Family::PowerLaw { beta } => {
            let hi = move |u: f64| ((u + nf).powf(1.0 - beta) - u.powf(1.0 - beta)) / (1.0 - beta);
            Some(Envelope { lo: Box::new(move |u| hi(u + 1.0)), hi: Box::new(hi), decay: 2.0 * beta })
        }
        Family::LogGap => {
            let v = move |u: f64| 1.0 / (u + 1.0).ln() - 1.0 / (u + nf + 1.0).ln();
            Some(Envelope { lo: Box::new(v), hi: Box::new(v), decay: 2.0 })
        }
        Family::AlternatingPower { beta } => {
            let c = move |u: f64| u.powf(-beta);
            let e = move |u: f64| c(u) - c(u + 1.0);
            if n % 2 == 0 {
                // pairs (c_i − c_{i+1}) on alternate indices: between T/2 and (T + e_{j+1})/2
                let t = move |u: f64| c(u + 1.0) - c(u + nf + 1.0);
                Some(Envelope {
                    lo: Box::new(move |u| 0.5 * t(u)),
                    hi: Box::new(move |u| 0.5 * (t(u) + e(u + 1.0))),
                    decay: 2.0 * beta + 2.0,
                })
            } else {
                let s = move |u: f64| c(u + 1.0) + c(u + nf);
                Some(Envelope {
                    lo: Box::new(move |u| 0.5 * s(u)),
                    hi: Box::new(move |u| 0.5 * (s(u) + e(u + 1.0))),
                    decay: 2.0 * beta,
                })
            }
        }
        Family::SummableGeometric { .. } | Family::Tabulated { .. } => None,
    }
}

/// Midpoint estimate of `Σ_{j>J} d_j²` and its half-width (plus quadrature error).
fn tail_estimate(coeffs: &CoefficientSequence, n: usize, big_j: usize) -> Result<(f64, f64)> {
    let jf = big_j as f64;
    match coeffs.family() {
        Family::SummableGeometric { rho } => {
            let d = (1.0 - rho.powi(n as i32)) / (1.0 - rho);
            let t = d * d * rho.powi(2 * (big_j as i32 + 2)) / (1.0 - rho * rho);
            Ok((t, 0.0))
        }
        Family::Tabulated { finite_support: true, .. } => Ok((0.0, 0.0)),
        Family::Tabulated { .. } => Err(unavailable_tail()),
        _ => {
            let env = envelope(coeffs, n).expect("envelope for analytic family");
            let upper = tail_integral(|u| (env.hi)(u).powi(2), jf, env.decay);
            let lower = tail_integral(|u| (env.lo)(u).powi(2), jf + 1.0, env.decay);
            let mid = 0.5 * (upper.value + lower.value);
            let half = 0.5 * (upper.value - lower.value).abs() + upper.error + lower.error;
            Ok((mid, half))
        }
    }
}

/// `σ_{n,1}² = Σ_{j≥0} (b_{j+n} − b_j)²`: exact partial sum to `J` plus an
/// estimated tail whose uncertainty is at most `tol · value`. `J` starts at
/// `max(8n, 4096)` and doubles until that holds.
pub fn sigma1_sq(coeffs: &CoefficientSequence, n: usize, tol: f64) -> Result<Sigma1> {
    if n == 0 {
        return Err(Error::InvalidArgument("sigma1_sq needs n >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if let Family::Tabulated { values, finite_support } = coeffs.family() {
        if !finite_support {
            return Err(unavailable_tail());
        }
        // d_j vanishes once j + 1 is past the table
        let len = values.len();
        let value = sum_d_squared(coeffs, n, 0, len, &mut window_start(coeffs, n)).value();
        return Ok(Sigma1 { value, truncation_j: len, tail_bound: 0.0 });
    }

    let mut big_j = (8 * n).max(4096);
    let mut d = window_start(coeffs, n);
    let mut head = sum_d_squared(coeffs, n, 0, big_j, &mut d);
    loop {
        let (tail, half) = tail_estimate(coeffs, n, big_j)?;
        let value = head.value() + tail;
        if half <= tol * value || big_j >= MAX_TRUNCATION {
            if half > tol * value {
                return Err(Error::TailBoundUnavailable(format!(
                    "tail uncertainty {half:e} exceeds {tol:e} relative at J = {big_j}"
                )));
            }
            return Ok(Sigma1 { value, truncation_j: big_j, tail_bound: half });
        }
        let next = 2 * big_j;
        let more = sum_d_squared(coeffs, n, big_j + 1, next, &mut d);
        head.add(more.value());
        big_j = next;
    }
}

/// Running `d_j = b_{j+n} − b_j`, advanced by `d_{j+1} = d_j + a_{j+n+1} − a_{j+1}`.
struct Window {
    next_j: usize,
    d: NeumaierSum,
}

fn window_start(coeffs: &CoefficientSequence, n: usize) -> Window {
    let mut d = NeumaierSum::new();
    (1..=n).for_each(|i| d.add(coeffs.a(i)));
    Window { next_j: 0, d }
}

/// `Σ_{j=from}^{to} d_j²`; `w` must sit at `from`.
fn sum_d_squared(coeffs: &CoefficientSequence, n: usize, from: usize, to: usize, w: &mut Window) -> NeumaierSum {
    debug_assert_eq!(w.next_j, from);
    let mut acc = NeumaierSum::new();
    for j in from..=to {
        let d = w.d.value();
        acc.add(d * d);
        w.d.add(coeffs.a(j + n + 1));
        w.d.add(-coeffs.a(j + 1));
        w.next_j = j + 1;
    }
    acc
}

fn check_increasing(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be non-empty, positive and strictly increasing".into()));
    }
    Ok(())
}

pub fn linear_variance(coeffs: &CoefficientSequence, n: usize, tol: f64) -> Result<LinearVarianceReport> {
    let s1 = sigma1_sq(coeffs, n, tol)?;
    let s2 = sigma2_sq(coeffs, n)?;
    Ok(LinearVarianceReport {
        n,
        sigma1_sq: s1.value,
        sigma2_sq: s2,
        sigma_sq_total: s1.value + s2,
        ratio9: s1.value / s2,
        truncation_j: s1.truncation_j,
        tail_bound: s1.tail_bound,
    })
}

/// Ratio `σ_{n,1}²/σ_{n,2}²` along the grid with a verdict from the top three points.
pub fn condition9_report(
    coeffs: &CoefficientSequence,
    n_grid: &[usize],
    tol: f64,
    thresholds: Condition9Thresholds,
) -> Result<Condition9Report> {
    check_increasing(n_grid)?;
    let rows = n_grid.iter().map(|&n| linear_variance(coeffs, n, tol)).collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio9).collect();
    Ok(Condition9Report { verdict: condition9_verdict(&ratios, thresholds), rows })
}

/// HOLDS: decreasing over the top three points and below `holds_below` at the end.
/// FAILS: above `holds_below` with relative change under `stable_rel_change`
/// over the top three points. Otherwise INCONCLUSIVE.
pub fn condition9_verdict(ratios: &[f64], thresholds: Condition9Thresholds) -> Verdict {
    if ratios.len() < 3 {
        return Verdict::Inconclusive;
    }
    let top = &ratios[ratios.len() - 3..];
    let last = top[2];
    if top.windows(2).all(|w| w[1] < w[0]) && last < thresholds.holds_below {
        return Verdict::Holds;
    }
    let hi = top.iter().cloned().fold(f64::MIN, f64::max);
    let lo = top.iter().cloned().fold(f64::MAX, f64::min);
    if last > thresholds.holds_below && (hi - lo) / last < thresholds.stable_rel_change {
        return Verdict::Fails;
    }
    Verdict::Inconclusive
}

/// Least-squares slope of `ln series` on `ln n` over the top half of the grid.
pub fn growth_exponent_fit(series: &[f64], n_grid: &[usize]) -> Result<GrowthFit> {
    if series.len() != n_grid.len() {
        return Err(Error::DimensionMismatch { expected: n_grid.len(), actual: series.len() });
    }
    if let Some(index) = series.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NonPositiveSeries { index });
    }
    if n_grid.len() < 2 {
        return Err(Error::InvalidArgument("growth fit needs at least two grid points".into()));
    }
    let start = n_grid.len() / 2;
    let start = start.min(n_grid.len() - 2);
    let x: Vec<f64> = n_grid[start..].iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = series[start..].iter().map(|v| v.ln()).collect();
    let (_, exponent, r_squared) = linear_fit(&x, &y);
    Ok(GrowthFit { exponent, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct `Σ_{j≤J} (b_{j+n} − b_j)²` from stored `b`, no sliding window.
    fn direct_head(c: &CoefficientSequence, n: usize, big_j: usize) -> f64 {
        let b: Vec<f64> = c.b_iter().take(big_j + n + 1).collect();
        (0..=big_j).map(|j| (b[j + n] - b[j]).powi(2)).sum()
    }

    #[test]
    fn envelopes_bracket_the_increments() {
        let fams = [
            CoefficientSequence::harmonic(),
            CoefficientSequence::log_gap(),
            CoefficientSequence::power_law(0.75).unwrap(),
            CoefficientSequence::alternating_power(0.7).unwrap(),
        ];
        for c in &fams {
            for n in [1, 2, 7, 64] {
                let env = envelope(c, n).unwrap();
                let b: Vec<f64> = c.b_iter().take(20_000 + n).collect();
                for j in [10, 100, 1000, 19_000] {
                    let d = (b[j + n] - b[j]).abs();
                    let (lo, hi) = ((env.lo)(j as f64), (env.hi)(j as f64));
                    assert!(lo <= d * (1.0 + 1e-10) && d <= hi * (1.0 + 1e-10), "{} n={n} j={j}: {lo} {d} {hi}", c.name());
                }
            }
        }
    }

    #[test]
    fn sigma1_head_matches_direct_sum_and_tail_is_honest() {
        let fams = [
            CoefficientSequence::harmonic(),
            CoefficientSequence::log_gap(),
            CoefficientSequence::power_law(0.75).unwrap(),
            CoefficientSequence::alternating_power(0.7).unwrap(),
            CoefficientSequence::geometric(0.5).unwrap(),
        ];
        for c in &fams {
            for n in [1, 4, 33] {
                let s = sigma1_sq(c, n, 1e-6).unwrap();
                assert!(s.tail_bound <= 1e-6 * s.value);
                // a much longer direct head plus the same tail estimate agrees
                let far = 64 * s.truncation_j.min(1 << 16);
                let (tail, half) = tail_estimate(c, n, far).unwrap();
                let reference = direct_head(c, n, far) + tail;
                assert!((s.value - reference).abs() <= s.tail_bound + half + 1e-9 * s.value, "{} n={n}", c.name());
            }
        }
    }

    #[test]
    fn sigma1_tabulated() {
        let c = CoefficientSequence::tabulated(vec![0.5, 1.0, -2.0], true).unwrap();
        // d_0 = a_1 + a_2 + … for n past the support; d_1 = a_2; rest vanish
        let s = sigma1_sq(&c, 10, 1e-12).unwrap();
        assert_eq!(s.tail_bound, 0.0);
        assert!((s.value - (1.0 + 4.0)).abs() < 1e-15);
        let c = CoefficientSequence::tabulated(vec![1.0, 0.5], false).unwrap();
        assert!(matches!(sigma1_sq(&c, 4, 1e-6), Err(Error::TailBoundUnavailable(_))));
    }

    #[test]
    fn sigma2_examples() {
        let h = CoefficientSequence::harmonic();
        let n = 1 << 16;
        let r = sigma2_sq(&h, n).unwrap() / (n as f64 * (n as f64).ln().powi(2));
        assert!((r - 1.0).abs() < 0.2, "{r}");
        let g = CoefficientSequence::geometric(0.5).unwrap();
        let r = sigma2_sq(&g, n).unwrap() / n as f64;
        assert!((r - 4.0).abs() < 1e-3);
        let lg = CoefficientSequence::log_gap();
        let nf = n as f64;
        let r = sigma2_sq(&lg, n).unwrap() * nf.ln().powi(2) / nf;
        assert!((r - 1.0).abs() < 0.3, "{r}");
        assert!(sigma2_sq(&lg, 0).is_err());
    }

    #[test]
    fn verdict_rules() {
        let t = Condition9Thresholds::default();
        assert_eq!(condition9_verdict(&[0.3, 0.1, 0.05, 0.04], t), Verdict::Holds);
        assert_eq!(condition9_verdict(&[0.9, 0.5, 0.51, 0.52], t), Verdict::Fails);
        assert_eq!(condition9_verdict(&[0.9, 0.5, 0.3, 0.2], t), Verdict::Inconclusive);
        assert_eq!(condition9_verdict(&[0.01, 0.02], t), Verdict::Inconclusive);
        assert_eq!(Verdict::Holds.to_string(), "HOLDS");
    }

    #[test]
    fn growth_fit_examples() {
        let grid: Vec<usize> = (3..=14).map(|e| 1 << e).collect();
        let s: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
        assert!((growth_exponent_fit(&s, &grid).unwrap().exponent - 1.0).abs() < 1e-9);

        let grid: Vec<usize> = (10..=14).map(|e| 1 << e).collect();
        let s: Vec<f64> = grid.iter().map(|&n| n as f64 * (n as f64).ln().powi(2)).collect();
        let e = growth_exponent_fit(&s, &grid).unwrap().exponent;
        assert!(e > 1.0 && e < 1.3, "{e}");

        assert!(matches!(growth_exponent_fit(&[1.0, 0.0], &[1, 2]), Err(Error::NonPositiveSeries { index: 1 })));
    }
}
