//! Small numerical helpers shared by the exact and Monte Carlo modules.

use std::f64::consts::{PI, SQRT_2};

use statrs::distribution::{ContinuousCDF, Normal};
use libm::erfc;

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_quantile(p: f64) -> f64 {
    // statrs only fails on invalid parameters, which (0, 1) never are.
    let mut x = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p);
    // polish with Newton steps against our own cdf
    for _ in 0..3 {
        let pdf = std_normal_pdf(x);
        if !x.is_finite() || pdf == 0.0 {
            break;
        }
        x -= (std_normal_cdf(x) - p) / pdf;
    }
    x
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    if order == 1 {
        (x, 1.0)
    } else {
        (p1, d)
    }
}

/// Composite Gauss–Legendre rule over `[a, b]` split into `panels` equal pieces.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = NeumaierSum::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in nodes.iter().zip(&weights) {
            acc.add(0.5 * h * w * f(mid + 0.5 * h * x));
        }
    }
    acc.value()
}

/// Value and error estimate of a tail integral.
#[derive(Debug, Clone, Copy)]
pub struct TailIntegral {
    pub value: f64,
    pub error: f64,
}

/// `∫_x^∞ f(u) du` for a positive integrand decaying like `u^(-decay)` with `decay > 1`.
///
/// The substitution `u = x w^(-p)` with `p = 1/(decay - 1)` maps the tail onto
/// `(0, 1]` with an integrand that is bounded near `w = 0`; geometrically graded
/// panels then absorb any remaining logarithmic factors. The error estimate is the
/// gap between a 12-point and a 24-point rule on the same panels.
pub fn tail_integral<F: Fn(f64) -> f64>(f: F, x: f64, decay: f64) -> TailIntegral {
    assert!(x > 0.0 && decay > 1.0);
    let p = 1.0 / (decay - 1.0);
    let g = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let u = x * w.powf(-p);
        if !u.is_finite() {
            return 0.0;
        }
        f(u) * x * p * w.powf(-p - 1.0)
    };
    let coarse = graded(&g, 12);
    let fine = graded(&g, 24);
    TailIntegral {
        value: fine,
        error: (fine - coarse).abs() + 1e-15 * fine.abs(),
    }
}

fn graded<G: Fn(f64) -> f64>(g: &G, order: usize) -> f64 {
    const LEVELS: i32 = 60;
    let mut acc = NeumaierSum::new();
    let mut hi = 1.0_f64;
    for _ in 0..LEVELS {
        let lo = hi * 0.5;
        acc.add(integrate(g, lo, hi, 1, order));
        hi = lo;
    }
    acc.add(integrate(g, 0.0, hi, 1, order));
    acc.value()
}

/// Ordinary least squares fit `y = a + b x`; returns `(a, b, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (intercept, slope, r2)
}

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (m - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = neumaier_sum(xs.iter().copied()) / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = neumaier_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (m - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // order k is exact for degree 2k - 1
        for order in 1..=12 {
            let deg = 2 * order - 1;
            let got = integrate(|x| x.powi(deg as i32 - 1), 0.0, 1.0, 1, order);
            assert!((got - 1.0 / deg as f64).abs() < 1e-14, "order {order}");
        }
        let (nodes, weights) = gauss_legendre(20);
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tail_integral_matches_closed_forms() {
        // ∫_x^∞ u^-1.5 du = 2 / sqrt(x)
        let t = tail_integral(|u| u.powf(-1.5), 100.0, 1.5);
        assert!((t.value - 0.2).abs() < 1e-13, "{t:?}");
        // ∫_x^∞ 1/(u^2 ln^2 u) du has no closed form, but 1/(u^2) dominates; compare to
        // the closed form of ∫_x^∞ u^-2 du = 1/x times a sandwich
        let x = 1e4_f64;
        let t = tail_integral(|u| 1.0 / (u * u * u.ln().powi(2)), x, 2.0);
        assert!(t.value < 1.0 / (x * x.ln().powi(2)));
        assert!(t.value > 1.0 / (x * (2.0 * x).ln().powi(2)) * 0.5);
        assert!(t.error < 1e-6 * t.value);
    }

    #[test]
    fn normal_cdf_and_quantile_agree() {
        for p in [0.001, 0.05, 0.3, 0.5, 0.9, 0.999] {
            let q = std_normal_quantile(p);
            assert!((std_normal_cdf(q) - p).abs() < 1e-12);
        }
        assert!((std_normal_quantile(0.05) + 1.6448536269514722).abs() < 1e-9);
    }

    #[test]
    fn neumaier_beats_naive_on_cancellation() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(xs), 2.0);
    }

    #[test]
    fn linear_fit_recovers_slope() {
        let x: Vec<f64> = (1..20).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let (a, b, r2) = linear_fit(&x, &y);
        assert!((a - 3.0).abs() < 1e-12 && (b + 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
