//! Coefficient families `a_j` and their cumulative sums `b_n = a_0 + ⋯ + a_n`.

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `a_j = ρ^j`
    SummableGeometric { rho: f64 },
    /// `a_0 = 0`, `a_j = 1/j`
    Harmonic,
    /// `a_0 = 0`, `a_1 = 1/ln 2`, `a_j = 1/ln(j+1) − 1/ln j`, so `b_n = 1/ln(n+1)`
    LogGap,
    /// `a_0 = 1`, `a_j = j^{−β}`
    PowerLaw { beta: f64 },
    /// `a_0 = 0`, `a_j = (−1)^j j^{−β}`
    AlternatingPower { beta: f64 },
    /// Explicit `a_0, a_1, …`. With `finite_support` the sequence is zero past
    /// the table; otherwise the tail is unknown.
    Tabulated { values: Vec<f64>, finite_support: bool },
}

/// A validated coefficient sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    family: Family,
}

impl CoefficientSequence {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::SummableGeometric { rho } if !(rho.abs() < 1.0) => {
                return Err(Error::InvalidArgument(format!("geometric family needs |rho| < 1, got {rho}")));
            }
            Family::PowerLaw { beta } | Family::AlternatingPower { beta } if !(*beta > 0.5 && *beta < 1.0) => {
                return Err(Error::InvalidArgument(format!("power families need 1/2 < beta < 1, got {beta}")));
            }
            Family::Tabulated { values, .. } if values.is_empty() || values.iter().any(|v| !v.is_finite()) => {
                return Err(Error::InvalidArgument("tabulated coefficients must be non-empty and finite".into()));
            }
            _ => {}
        }
        Ok(Self { family })
    }

    pub fn geometric(rho: f64) -> Result<Self> {
        Self::new(Family::SummableGeometric { rho })
    }

    pub fn harmonic() -> Self {
        Self { family: Family::Harmonic }
    }

    pub fn log_gap() -> Self {
        Self { family: Family::LogGap }
    }

    pub fn power_law(beta: f64) -> Result<Self> {
        Self::new(Family::PowerLaw { beta })
    }

    pub fn alternating_power(beta: f64) -> Result<Self> {
        Self::new(Family::AlternatingPower { beta })
    }

    pub fn tabulated(values: Vec<f64>, finite_support: bool) -> Result<Self> {
        Self::new(Family::Tabulated { values, finite_support })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Short name used in reports and configs.
    pub fn name(&self) -> &'static str {
        match self.family {
            Family::SummableGeometric { .. } => "summable_geometric",
            Family::Harmonic => "harmonic",
            Family::LogGap => "log_gap",
            Family::PowerLaw { .. } => "power_law",
            Family::AlternatingPower { .. } => "alternating_power",
            Family::Tabulated { .. } => "tabulated",
        }
    }

    pub fn a(&self, j: usize) -> f64 {
        let jf = j as f64;
        match &self.family {
            Family::SummableGeometric { rho } => rho.powi(j as i32),
            Family::Harmonic => {
                if j == 0 {
                    0.0
                } else {
                    1.0 / jf
                }
            }
            Family::LogGap => match j {
                0 => 0.0,
                1 => 1.0 / std::f64::consts::LN_2,
                // 1/ln(j+1) − 1/ln j, written to avoid cancellation
                _ => {
                    let (l0, l1) = (jf.ln(), (jf + 1.0).ln());
                    -(1.0 / jf).ln_1p() / (l0 * l1)
                }
            },
            Family::PowerLaw { beta } => {
                if j == 0 {
                    1.0
                } else {
                    jf.powf(-beta)
                }
            }
            Family::AlternatingPower { beta } => {
                if j == 0 {
                    0.0
                } else {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * jf.powf(-beta)
                }
            }
            Family::Tabulated { values, .. } => values.get(j).copied().unwrap_or(0.0),
        }
    }

    /// `b_0, b_1, …` as an endless iterator.
    pub fn b_iter(&self) -> BIter<'_> {
        BIter { coeffs: self, next: 0, acc: NeumaierSum::new() }
    }

    /// `b_n`, with closed forms where the family has one.
    pub fn b(&self, n: usize) -> f64 {
        let nf = n as f64;
        match &self.family {
            Family::SummableGeometric { rho } => {
                if *rho == 0.0 {
                    1.0
                } else {
                    (1.0 - rho.powi(n as i32 + 1)) / (1.0 - rho)
                }
            }
            Family::LogGap => log_gap_b(n),
            Family::Harmonic if n > 10_000 => {
                // asymptotic expansion of the harmonic number
                let inv = 1.0 / nf;
                let inv2 = inv * inv;
                nf.ln() + EULER_GAMMA + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0 - inv2 * inv2 * inv2 / 252.0
            }
            _ => self.b_iter().nth(n).expect("endless iterator"),
        }
    }

    /// `b̄_n = (b_0 + ⋯ + b_{n−1})/n`.
    pub fn b_bar(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("b_bar needs n >= 1".into()));
        }
        let mut acc = NeumaierSum::new();
        self.b_iter().take(n).for_each(|b| acc.add(b));
        Ok(acc.value() / n as f64)
    }

    /// `Σ_j a_j²`, exact for the closed-form families.
    pub fn sum_of_squares(&self) -> Result<f64> {
        Ok(match &self.family {
            Family::SummableGeometric { rho } => 1.0 / (1.0 - rho * rho),
            Family::Harmonic => std::f64::consts::PI.powi(2) / 6.0,
            Family::Tabulated { values, finite_support: true } => values.iter().map(|v| v * v).sum(),
            Family::Tabulated { .. } => return Err(unavailable_tail()),
            _ => {
                let j = 1 << 16;
                let head: f64 = (0..=j).map(|i| self.a(i).powi(2)).sum();
                head + self.a_sq_tail(j)?.0
            }
        })
    }

    /// Estimate and rigorous upper bound of `Σ_{j>J} a_j²`.
    pub fn a_sq_tail(&self, big_j: usize) -> Result<(f64, f64)> {
        let jf = big_j as f64;
        Ok(match &self.family {
            Family::SummableGeometric { rho } => {
                let t = rho.powi(2 * (big_j as i32 + 1)) / (1.0 - rho * rho);
                (t, t)
            }
            // Σ_{j>J} j^{−p} ∈ [(J+1)^{1−p}, J^{1−p}]/(p−1) for p > 1
            Family::Harmonic => (1.0 / (jf + 0.5), 1.0 / jf),
            Family::PowerLaw { beta } | Family::AlternatingPower { beta } => {
                let p = 2.0 * beta;
                ((jf + 0.5).powf(1.0 - p) / (p - 1.0), jf.powf(1.0 - p) / (p - 1.0))
            }
            Family::LogGap => {
                // a_j ≤ 1/(j ln² j) for j ≥ 2, so a_j² ≤ 1/(j² ln⁴ j) ≤ 1/(j² ln⁴ J) past J
                let upper = 1.0 / (jf * jf.ln().powi(4));
                (upper * jf / (jf + 0.5), upper)
            }
            Family::Tabulated { values, finite_support: true } => {
                let t: f64 = values.iter().skip(big_j + 1).map(|v| v * v).sum();
                (t, t)
            }
            Family::Tabulated { .. } => return Err(unavailable_tail()),
        })
    }
}

pub(crate) fn unavailable_tail() -> Error {
    Error::TailBoundUnavailable("tabulated coefficients without declared finite support".into())
}

fn log_gap_b(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        1.0 / ((n + 1) as f64).ln()
    }
}

/// Iterator over `b_0, b_1, …`.
#[derive(Debug, Clone)]
pub struct BIter<'a> {
    coeffs: &'a CoefficientSequence,
    next: usize,
    acc: NeumaierSum,
}

impl Iterator for BIter<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let j = self.next;
        self.next += 1;
        Some(match self.coeffs.family {
            Family::LogGap => log_gap_b(j),
            _ => {
                self.acc.add(self.coeffs.a(j));
                self.acc.value()
            }
        })
    }
}
