//! Exact and approximate solutions of Poisson's equation `h = Qh + g`.

use nalgebra::{DMatrix, DVector};

use crate::chain::{MarkovModel, PerStateFunction};
use crate::error::{Error, Result};

/// Which construction produced an approximant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// `h_n^o = g + Qg + ⋯ + Q^{n−1} g`
    PartialSum { n: usize },
    /// `h_n = (h_1^o + ⋯ + h_n^o)/n`
    Averaged { n: usize },
    /// `f_ε` with `(1 + ε) f_ε = g + Q f_ε`
    Resolvent { eps: f64 },
    /// centered solution of `(I − Q) h = g`
    Exact,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::PartialSum { .. } => "partial_sum",
            Method::Averaged { .. } => "averaged",
            Method::Resolvent { .. } => "resolvent",
            Method::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonApproximant {
    pub h: PerStateFunction,
    pub method: Method,
}

/// Components of `‖h_n‖ + n‖(I − Q)h_n − g‖` and its ratio to `σ_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub h_norm: f64,
    pub residual_term: f64,
    pub combined: f64,
    pub ratio: f64,
}

fn require_positive(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(())
}

pub fn h_n_partial(model: &MarkovModel, n: usize) -> Result<PoissonApproximant> {
    require_positive(n)?;
    let g = model.g_values();
    let mut power = g.to_vec();
    let mut acc = g.to_vec();
    let mut next = vec![0.0; g.len()];
    for _ in 1..n {
        model.apply_into(&power, &mut next);
        std::mem::swap(&mut power, &mut next);
        acc.iter_mut().zip(&power).for_each(|(a, p)| *a += p);
    }
    Ok(PoissonApproximant { h: model.wrap(acc), method: Method::PartialSum { n } })
}

/// Iterates `h_k^o = g + Q h_{k−1}^o` and hands each `(k, h_k^o)` to `visit`.
pub(crate) fn for_each_partial_sum(model: &MarkovModel, n: usize, mut visit: impl FnMut(usize, &[f64])) {
    let g = model.g_values();
    let mut cur = vec![0.0; g.len()];
    let mut next = vec![0.0; g.len()];
    for k in 1..=n {
        model.apply_into(&cur, &mut next);
        next.iter_mut().zip(g).for_each(|(a, gv)| *a += gv);
        std::mem::swap(&mut cur, &mut next);
        visit(k, &cur);
    }
}

pub fn h_n_averaged(model: &MarkovModel, n: usize) -> Result<PoissonApproximant> {
    require_positive(n)?;
    let mut acc = vec![0.0; model.num_states()];
    for_each_partial_sum(model, n, |_, h| acc.iter_mut().zip(h).for_each(|(a, v)| *a += v));
    acc.iter_mut().for_each(|a| *a /= n as f64);
    Ok(PoissonApproximant { h: model.wrap(acc), method: Method::Averaged { n } })
}

/// Solves `((1 + ε)I − Q) f = g`.
pub fn resolvent(model: &MarkovModel, eps: f64) -> Result<PoissonApproximant> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("resolvent needs 0 < eps < 1, got {eps}")));
    }
    let s = model.num_states();
    let a = DMatrix::from_fn(s, s, |i, j| if i == j { 1.0 + eps } else { 0.0 } - model.transition(i, j));
    let f = solve_refined(a, model.g_values())?;
    let approx = PoissonApproximant { h: model.wrap(f), method: Method::Resolvent { eps } };
    let residual = resolvent_residual(model, &approx.h, eps);
    if residual > 1e-10 * (1.0 + max_abs(approx.h.values())) {
        return Err(Error::SolveFailure(format!("resolvent residual {residual:e} at eps = {eps}")));
    }
    Ok(approx)
}

/// Prescription `h_n = f_{1/n}`; needs `n ≥ 2` so that `ε < 1`.
pub fn resolvent_for_horizon(model: &MarkovModel, n: usize) -> Result<PoissonApproximant> {
    if n < 2 {
        return Err(Error::InvalidArgument("the resolvent approximant needs n >= 2".into()));
    }
    resolvent(model, 1.0 / n as f64)
}

/// Series form `Σ_{j≥1} (1 + ε)^{−j} Q^{j−1} g`, summed until the next term is
/// below `1e−17` relative or `max_terms` is reached. Returns the sum and the
/// number of terms used.
pub fn resolvent_series(model: &MarkovModel, eps: f64, max_terms: usize) -> (PerStateFunction, usize) {
    let g = model.g_values();
    let mut power = g.to_vec();
    let mut next = vec![0.0; g.len()];
    let mut acc = vec![0.0; g.len()];
    let mut weight = 1.0 / (1.0 + eps);
    let mut used = 0;
    for _ in 0..max_terms {
        acc.iter_mut().zip(&power).for_each(|(a, p)| *a += weight * p);
        used += 1;
        let size = max_abs(&power) * weight;
        if size <= 1e-17 * max_abs(&acc).max(f64::MIN_POSITIVE) {
            break;
        }
        model.apply_into(&power, &mut next);
        std::mem::swap(&mut power, &mut next);
        weight /= 1.0 + eps;
    }
    (model.wrap(acc), used)
}

/// `max_x |(1 + ε) f(x) − (Qf)(x) − g(x)|`.
pub fn resolvent_residual(model: &MarkovModel, f: &PerStateFunction, eps: f64) -> f64 {
    let qf = model.apply_slice(f.values());
    f.values()
        .iter()
        .zip(&qf)
        .zip(model.g_values())
        .map(|((fv, q), g)| ((1.0 + eps) * fv - q - g).abs())
        .fold(0.0, f64::max)
}

/// Centered solution of `(I − Q) h = g`, via `(I − Q + 1πᵀ) h = g`.
pub fn exact_solution(model: &MarkovModel) -> Result<PoissonApproximant> {
    let s = model.num_states();
    let pi = model.pi();
    let a = DMatrix::from_fn(s, s, |i, j| if i == j { 1.0 } else { 0.0 } - model.transition(i, j) + pi[j]);
    let h = solve_refined(a, model.g_values())?;
    let h = model.wrap(h);
    let residual = poisson_residual(model, &h);
    if residual > 1e-10 * (1.0 + max_abs(h.values())) {
        return Err(Error::SolveFailure(format!("Poisson residual {residual:e}")));
    }
    Ok(PoissonApproximant { h, method: Method::Exact })
}

/// `max_x |((I − Q)h − g)(x)|`.
pub fn poisson_residual(model: &MarkovModel, h: &PerStateFunction) -> f64 {
    let qh = model.apply_slice(h.values());
    h.values()
        .iter()
        .zip(&qh)
        .zip(model.g_values())
        .map(|((hv, q), g)| (hv - q - g).abs())
        .fold(0.0, f64::max)
}

/// `‖h‖`, `n‖(I − Q)h − g‖`, their sum, and the sum over `σ_n`.
pub fn residual_eq5(model: &MarkovModel, approx: &PoissonApproximant, n: usize, sigma_n: f64) -> Result<ResidualReport> {
    model.check(&approx.h)?;
    if !(sigma_n > 0.0) {
        return Err(Error::InvalidArgument("sigma_n must be positive".into()));
    }
    let h = approx.h.values();
    let qh = model.apply_slice(h);
    let defect: Vec<f64> = h.iter().zip(&qh).zip(model.g_values()).map(|((a, b), g)| a - b - g).collect();
    let h_norm = model.norm_slice(h);
    let residual_term = n as f64 * model.norm_slice(&defect);
    let combined = h_norm + residual_term;
    Ok(ResidualReport { h_norm, residual_term, combined, ratio: combined / sigma_n })
}

fn solve_refined(a: DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let b = DVector::from_column_slice(rhs);
    let lu = a.clone().lu();
    let mut x = lu.solve(&b).ok_or_else(|| Error::SolveFailure("singular system".into()))?;
    let r = &b - &a * &x;
    if let Some(c) = lu.solve(&r) {
        x += c;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolveFailure("non-finite solution".into()));
    }
    Ok(x.iter().copied().collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
