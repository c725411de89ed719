//! Lévy distance between distribution functions and the witness-function
//! upper bound against the standard normal.

use crate::error::{Error, Result};
use crate::numeric::{std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// Width at which the bisections stop.
const BISECTION_WIDTH: f64 = 1e-12;

/// Empirical distribution function of a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empirical CDF needs at least one sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidArgument("empirical CDF samples must not be NaN".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `F(x) = #{s ≤ x}/m`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// `F(x−) = #{s < x}/m`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s < x) as f64 / self.len() as f64
    }

    /// Distinct sample values with `F` at each.
    fn jumps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let m = self.len() as f64;
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.sorted.len() {
                return None;
            }
            let x = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let out = (x, i as f64 / m, j as f64 / m);
            i = j;
            Some(out)
        })
    }

    /// `∫ f dF`.
    pub fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.sorted.iter().map(|&x| f(x)).sum::<f64>() / self.len() as f64
    }
}

/// A distribution function accepted by [`levy_distance`].
#[derive(Debug, Clone, PartialEq)]
pub enum Cdf {
    Empirical(EmpiricalCdf),
    StandardNormal,
}

impl Cdf {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Cdf::Empirical(e) => e.cdf(x),
            Cdf::StandardNormal => std_normal_cdf(x),
        }
    }
}

/// Whether `sup_y F(y) − G(y + ε) ≤ ε`, checked at the jumps of `F`.
fn one_side_empirical(f: &EmpiricalCdf, g: &EmpiricalCdf, eps: f64) -> bool {
    f.jumps().all(|(x, _, fx)| fx - g.cdf(x + eps) <= eps)
}

/// Whether `F(x − ε) − ε ≤ Φ(x) ≤ F(x + ε) + ε` for all `x`.
fn fits_normal(f: &EmpiricalCdf, eps: f64) -> bool {
    f.jumps().all(|(x, left, right)| right - std_normal_cdf(x + eps) <= eps && std_normal_cdf(x - eps) - left <= eps)
}

/// Smallest `ε ∈ [0, 1]` with `fits(ε)`, for a monotone predicate.
fn bisect(fits: impl Fn(f64) -> bool) -> f64 {
    if fits(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `inf{ε : F(x − ε) − ε ≤ G(x) ≤ F(x + ε) + ε for all x}`.
pub fn levy_distance(f: &Cdf, g: &Cdf) -> f64 {
    match (f, g) {
        (Cdf::StandardNormal, Cdf::StandardNormal) => 0.0,
        (Cdf::Empirical(e), Cdf::StandardNormal) | (Cdf::StandardNormal, Cdf::Empirical(e)) => {
            bisect(|eps| fits_normal(e, eps))
        }
        (Cdf::Empirical(a), Cdf::Empirical(b)) => {
            bisect(|eps| one_side_empirical(a, b, eps) && one_side_empirical(b, a, eps))
        }
    }
}

/// Lévy distance of a sample's empirical law from `Φ`.
pub fn levy_to_normal(samples: Vec<f64>) -> Result<f64> {
    Ok(levy_distance(&Cdf::Empirical(EmpiricalCdf::new(samples)?), &Cdf::StandardNormal))
}

/// Piecewise-linear witnesses `w_i = u_i − ∫u_i dΦ` on a uniform partition of
/// `[Φ^{-1}(ε/2), −Φ^{-1}(ε/2)]` with mesh at most `ε/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSet {
    pub epsilon: f64,
    pub breakpoints: Vec<f64>,
    /// `∫u_i dΦ` for `i = 1..m`
    pub centers: Vec<f64>,
}

impl WitnessSet {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `u_i(x)`: 1 left of `x_{i−1}`, 0 right of `x_i`, linear between. `i` is 1-based.
    pub fn u(&self, i: usize, x: f64) -> f64 {
        let (lo, hi) = (self.breakpoints[i - 1], self.breakpoints[i]);
        if x <= lo {
            1.0
        } else if x >= hi {
            0.0
        } else {
            (hi - x) / (hi - lo)
        }
    }

    pub fn w(&self, i: usize, x: f64) -> f64 {
        self.u(i, x) - self.centers[i - 1]
    }
}

pub fn witness_set(epsilon: f64) -> Result<WitnessSet> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("witness epsilon must be in (0, 1), got {epsilon}")));
    }
    let a = std_normal_quantile(epsilon / 2.0);
    let b = -a;
    let m = ((b - a) / (epsilon / 2.0)).ceil() as usize;
    let breakpoints: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
    let centers = breakpoints
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            // Φ(lo) + ∫_lo^hi (hi − x)/(hi − lo) φ(x) dx, using ∫xφ = −φ
            let mass = std_normal_cdf(hi) - std_normal_cdf(lo);
            std_normal_cdf(lo) + (hi * mass + std_normal_pdf(hi) - std_normal_pdf(lo)) / (hi - lo)
        })
        .collect();
    Ok(WitnessSet { epsilon, breakpoints, centers })
}

/// `ε + max_i |∫w_i dF|`, an upper bound for `Δ(Φ, F)`.
pub fn levy_bound(f: &Cdf, witnesses: &WitnessSet) -> f64 {
    match f {
        Cdf::StandardNormal => witnesses.epsilon,
        Cdf::Empirical(e) => {
            let worst = (1..=witnesses.len())
                .map(|i| e.mean_of(|x| witnesses.w(i, x)).abs())
                .fold(0.0, f64::max);
            witnesses.epsilon + worst
        }
    }
}
