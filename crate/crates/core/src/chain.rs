//! Finite-state Markov chains with a designated observable `g`.
//!
//! A [`MarkovModel`] owns a row-stochastic kernel `Q`, its stationary law `π`
//! (strictly positive, unique) and a `π`-centered observable. All kernel
//! algebra here is exact dense arithmetic; simulation uses one ChaCha stream
//! per trajectory (see [`crate::rng`]).

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::RootSeed;

/// Largest state space accepted for exact operations.
pub const MAX_STATES: usize = 4096;

const ROW_SUM_TOL: f64 = 1e-12;
const CLAMP_BELOW: f64 = 1e-15;
const STATIONARY_TOL: f64 = 1e-10;
const CENTERING_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelId(pub u64);

#[derive(Clone, PartialEq)]
pub struct MarkovModel {
    states: Vec<String>,
    kernel: Vec<f64>,
    cumulative: Vec<f64>,
    pi: Vec<f64>,
    g: Vec<f64>,
    id: ModelId,
    hash: String,
}

impl fmt::Debug for MarkovModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkovModel")
            .field("states", &self.states)
            .field("pi", &self.pi)
            .field("g", &self.g)
            .field("hash", &self.hash)
            .finish_non_exhaustive()
    }
}

/// A real value per state, tied to the model it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct PerStateFunction {
    values: Vec<f64>,
    model_id: ModelId,
}

impl PerStateFunction {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn model_id(&self) -> ModelId {
        self.model_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> PerStateFunction {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PerStateFunction {
        PerStateFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            model_id: self.model_id,
        }
    }

    pub fn max_abs_diff(&self, other: &PerStateFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Where simulated trajectories start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartSpec {
    Fixed(usize),
    Stationary,
}

/// One simulated path `X_1..X_n` started from `start = X_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub start: usize,
    pub path: Vec<u32>,
    pub seed: RootSeed,
    pub index: u64,
}

/// Simulated trajectories in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ensemble {
    pub trajectories: Vec<Trajectory>,
}

impl Ensemble {
    pub fn by_start(&self) -> BTreeMap<usize, Vec<&Trajectory>> {
        let mut groups: BTreeMap<usize, Vec<&Trajectory>> = BTreeMap::new();
        for t in &self.trajectories {
            groups.entry(t.start).or_default().push(t);
        }
        groups
    }
}

impl MarkovModel {
    /// Builds a model from kernel rows and an already-centered observable.
    /// The stationary law is computed when `pi` is `None`.
    pub fn new(
        states: Vec<String>,
        rows: &[Vec<f64>],
        pi: Option<Vec<f64>>,
        g: Vec<f64>,
    ) -> Result<Self> {
        let s = rows.len();
        if s < 2 {
            return Err(Error::InvalidKernel(format!("need at least 2 states, got {s}")));
        }
        if s > MAX_STATES {
            return Err(Error::StateSpaceTooLarge { size: s, limit: MAX_STATES });
        }
        if states.len() != s {
            return Err(Error::DimensionMismatch { expected: s, actual: states.len() });
        }
        if g.len() != s {
            return Err(Error::DimensionMismatch { expected: s, actual: g.len() });
        }
        let kernel = normalize_kernel(rows)?;
        let pi = match pi {
            Some(p) => {
                check_stationary(&kernel, &p)?;
                p
            }
            None => stationary_distribution_flat(&kernel, s)?,
        };
        if let Some(state) = pi.iter().position(|&p| p <= 0.0) {
            return Err(Error::NonPositiveStationary { state });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("observable has non-finite values".into()));
        }
        let mean = dot(&pi, &g);
        if mean.abs() > CENTERING_TOL {
            return Err(Error::NotCentered { mean });
        }
        Ok(Self::assemble(states, kernel, pi, g))
    }

    /// Like [`MarkovModel::new`] but centers `raw_g` first. Returns the model and
    /// the subtracted mean.
    pub fn with_raw_observable(
        states: Vec<String>,
        rows: &[Vec<f64>],
        pi: Option<Vec<f64>>,
        raw_g: Vec<f64>,
    ) -> Result<(Self, f64)> {
        let s = rows.len();
        if raw_g.len() != s {
            return Err(Error::DimensionMismatch { expected: s, actual: raw_g.len() });
        }
        let kernel = normalize_kernel(rows)?;
        let pi = match pi {
            Some(p) => {
                check_stationary(&kernel, &p)?;
                p
            }
            None => stationary_distribution_flat(&kernel, s)?,
        };
        let mean = dot(&pi, &raw_g);
        let mut g = center_values(&raw_g, &pi);
        // a second pass removes the rounding residue of the first
        let residue = dot(&pi, &g);
        g.iter_mut().for_each(|v| *v -= residue);
        Ok((Self::new(states, rows, Some(pi), g)?, mean))
    }

    /// Numbered states `0..S`.
    pub fn from_rows(rows: &[Vec<f64>], g: Vec<f64>) -> Result<Self> {
        let states = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(states, rows, None, g)
    }

    /// Same kernel and stationary law with a different observable.
    pub fn with_observable(&self, g: Vec<f64>) -> Result<Self> {
        Self::new(self.states.clone(), &self.kernel_rows(), Some(self.pi.clone()), g)
    }

    fn assemble(states: Vec<String>, kernel: Vec<f64>, pi: Vec<f64>, g: Vec<f64>) -> Self {
        let s = states.len();
        let mut cumulative = vec![0.0; s * s];
        for x in 0..s {
            let mut acc = 0.0;
            let mut last_positive = 0;
            for y in 0..s {
                acc += kernel[x * s + y];
                cumulative[x * s + y] = acc;
                if kernel[x * s + y] > 0.0 {
                    last_positive = y;
                }
            }
            for y in last_positive..s {
                cumulative[x * s + y] = 1.0;
            }
        }
        let mut hasher = Sha256::new();
        hasher.update((s as u64).to_le_bytes());
        for v in kernel.iter().chain(&g) {
            hasher.update(v.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        Self {
            states,
            kernel,
            cumulative,
            pi,
            g,
            id: ModelId(u64::from_le_bytes(head)),
            hash: hex::encode(digest),
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    /// Hex SHA-256 of the kernel and observable.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn transition(&self, x: usize, y: usize) -> f64 {
        self.kernel[x * self.num_states() + y]
    }

    pub fn kernel_row(&self, x: usize) -> &[f64] {
        let s = self.num_states();
        &self.kernel[x * s..(x + 1) * s]
    }

    pub fn kernel_rows(&self) -> Vec<Vec<f64>> {
        (0..self.num_states()).map(|x| self.kernel_row(x).to_vec()).collect()
    }

    pub fn g(&self) -> PerStateFunction {
        self.wrap(self.g.clone())
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    /// Wraps raw values as a function on this model's states.
    pub fn function(&self, values: Vec<f64>) -> Result<PerStateFunction> {
        if values.len() != self.num_states() {
            return Err(Error::DimensionMismatch { expected: self.num_states(), actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("function has non-finite values".into()));
        }
        Ok(self.wrap(values))
    }

    pub fn constant(&self, c: f64) -> PerStateFunction {
        self.wrap(vec![c; self.num_states()])
    }

    pub(crate) fn wrap(&self, values: Vec<f64>) -> PerStateFunction {
        PerStateFunction { values, model_id: self.id }
    }

    pub(crate) fn check(&self, h: &PerStateFunction) -> Result<()> {
        if h.values.len() != self.num_states() || h.model_id != self.id {
            return Err(Error::DimensionMismatch { expected: self.num_states(), actual: h.values.len() });
        }
        Ok(())
    }

    /// `(Qh)(x) = Σ_y Q(x, y) h(y)`.
    pub fn apply_kernel(&self, h: &PerStateFunction) -> Result<PerStateFunction> {
        self.check(h)?;
        Ok(self.wrap(self.apply_slice(&h.values)))
    }

    pub(crate) fn apply_slice(&self, h: &[f64]) -> Vec<f64> {
        let s = self.num_states();
        let mut out = vec![0.0; s];
        self.apply_into(h, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, h: &[f64], out: &mut [f64]) {
        let s = self.num_states();
        for (x, o) in out.iter_mut().enumerate() {
            *o = dot(&self.kernel[x * s..(x + 1) * s], h);
        }
    }

    /// `Q^k h`; `k = 0` returns `h`.
    pub fn kernel_power_apply(&self, h: &PerStateFunction, k: usize) -> Result<PerStateFunction> {
        self.check(h)?;
        let mut cur = h.values.clone();
        let mut next = vec![0.0; cur.len()];
        for _ in 0..k {
            self.apply_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(self.wrap(cur))
    }

    /// `sqrt(Σ π(x) h(x)²)`.
    pub fn l2_norm_pi(&self, h: &PerStateFunction) -> Result<f64> {
        self.check(h)?;
        Ok(self.norm_slice(&h.values))
    }

    pub(crate) fn norm_slice(&self, h: &[f64]) -> f64 {
        self.inner_slice(h, h).max(0.0).sqrt()
    }

    pub(crate) fn inner_slice(&self, a: &[f64], b: &[f64]) -> f64 {
        self.pi.iter().zip(a).zip(b).map(|((p, x), y)| p * x * y).sum()
    }

    pub fn inner_pi(&self, a: &PerStateFunction, b: &PerStateFunction) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.inner_slice(&a.values, &b.values))
    }

    pub fn mean_pi(&self, h: &PerStateFunction) -> Result<f64> {
        self.check(h)?;
        Ok(dot(&self.pi, &h.values))
    }

    /// `E(S_n | X_0 = x) = Σ_{k=1}^n (Q^k g)(x)`.
    pub fn conditional_mean_sn(&self, n: usize) -> Result<PerStateFunction> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let s = self.num_states();
        let mut power = self.g.clone();
        let mut next = vec![0.0; s];
        let mut acc = vec![0.0; s];
        for _ in 0..n {
            self.apply_into(&power, &mut next);
            std::mem::swap(&mut power, &mut next);
            acc.iter_mut().zip(&power).for_each(|(a, p)| *a += p);
        }
        Ok(self.wrap(acc))
    }

    /// Next state given a uniform draw `u ∈ [0, 1)`.
    pub(crate) fn step(&self, x: usize, u: f64) -> usize {
        let s = self.num_states();
        let row = &self.cumulative[x * s..(x + 1) * s];
        if s <= 16 {
            row.iter().position(|&c| c > u).unwrap_or(s - 1)
        } else {
            row.partition_point(|&c| c <= u).min(s - 1)
        }
    }

    pub(crate) fn draw_stationary<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, p) in self.pi.iter().enumerate() {
            acc += p;
            if u < acc {
                return x;
            }
        }
        self.num_states() - 1
    }

    /// Fills `path` with `X_1..X_n` started from `start`.
    pub(crate) fn fill_path<R: Rng>(&self, start: usize, n: usize, rng: &mut R, path: &mut Vec<u32>) {
        path.clear();
        let mut x = start;
        for _ in 0..n {
            x = self.step(x, rng.random());
            path.push(x as u32);
        }
    }

    fn resolve_start<R: Rng>(&self, start: StartSpec, rng: &mut R) -> usize {
        match start {
            StartSpec::Fixed(x) => x,
            StartSpec::Stationary => self.draw_stationary(rng),
        }
    }

    fn check_ensemble_args(&self, n: usize, count: usize, start: StartSpec) -> Result<()> {
        if n == 0 || count == 0 {
            return Err(Error::InvalidArgument(format!(
                "ensemble needs n >= 1 and count >= 1 (got n = {n}, count = {count})"
            )));
        }
        if let StartSpec::Fixed(x) = start {
            if x >= self.num_states() {
                return Err(Error::InvalidArgument(format!("start state {x} out of range")));
            }
        }
        Ok(())
    }

    /// Simulates `count` trajectories of length `n`; trajectory `i` uses stream `i`
    /// of `root_seed` for both its start draw and its steps.
    pub fn simulate_paths(&self, n: usize, count: usize, start: StartSpec, root_seed: RootSeed) -> Result<Ensemble> {
        let trajectories = self.map_paths(n, count, start, root_seed, |i, x0, path| Trajectory {
            start: x0,
            path: path.to_vec(),
            seed: root_seed,
            index: i as u64,
        })?;
        Ok(Ensemble { trajectories })
    }

    /// Runs `f(index, X_0, X_1..X_n)` on every trajectory without storing paths.
    /// Output order is index order whatever the thread schedule.
    pub fn map_paths<T, F>(&self, n: usize, count: usize, start: StartSpec, root_seed: RootSeed, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, usize, &[u32]) -> T + Sync,
    {
        self.check_ensemble_args(n, count, start)?;
        Ok((0..count)
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(n),
                |buf, i| {
                    let mut rng = root_seed.stream(i as u64);
                    let x0 = self.resolve_start(start, &mut rng);
                    self.fill_path(x0, n, &mut rng, buf);
                    f(i, x0, buf)
                },
            )
            .collect())
    }

    /// Checks that every step of `t` has positive transition probability.
    pub fn is_legal(&self, t: &Trajectory) -> bool {
        let mut x = t.start;
        for &y in &t.path {
            let y = y as usize;
            if y >= self.num_states() || self.transition(x, y) <= 0.0 {
                return false;
            }
            x = y;
        }
        true
    }

    /// Observable partial sums `S_1..S_n` along a path.
    pub fn partial_sums(&self, path: &[u32]) -> Vec<f64> {
        let mut acc = 0.0;
        path.iter()
            .map(|&x| {
                acc += self.g[x as usize];
                acc
            })
            .collect()
    }
}

/// Subtracts the `π`-mean from `raw`.
pub fn center_observable(raw: &PerStateFunction, pi: &[f64]) -> Result<PerStateFunction> {
    if raw.values.len() != pi.len() {
        return Err(Error::DimensionMismatch { expected: pi.len(), actual: raw.values.len() });
    }
    Ok(PerStateFunction { values: center_values(&raw.values, pi), model_id: raw.model_id })
}

fn center_values(raw: &[f64], pi: &[f64]) -> Vec<f64> {
    let mean = dot(pi, raw);
    raw.iter().map(|v| v - mean).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize_kernel(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let s = rows.len();
    let mut kernel = Vec::with_capacity(s * s);
    for (x, row) in rows.iter().enumerate() {
        if row.len() != s {
            return Err(Error::InvalidKernel(format!("row {x} has {} entries, expected {s}", row.len())));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidKernel(format!("row {x} has invalid entry {v}")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidKernel(format!("row {x} sums to {sum}")));
        }
        let clamped: Vec<f64> = row.iter().map(|&v| if v < CLAMP_BELOW { 0.0 } else { v }).collect();
        let total: f64 = clamped.iter().sum();
        kernel.extend(clamped.iter().map(|v| v / total));
    }
    Ok(kernel)
}

fn check_stationary(kernel: &[f64], pi: &[f64]) -> Result<()> {
    let s = pi.len();
    if s * s != kernel.len() {
        return Err(Error::DimensionMismatch { expected: (kernel.len() as f64).sqrt() as usize, actual: s });
    }
    if pi.iter().any(|p| !p.is_finite() || *p < 0.0) || ((pi.iter().sum::<f64>()) - 1.0).abs() > STATIONARY_TOL {
        return Err(Error::InvalidArgument("pi is not a probability vector".into()));
    }
    let residual = stationary_residual(kernel, pi);
    if residual > STATIONARY_TOL {
        return Err(Error::InvalidArgument(format!("pi is not stationary (residual {residual:e})")));
    }
    Ok(())
}

/// `max_y |(πQ)(y) − π(y)|`.
pub fn stationary_residual(kernel: &[f64], pi: &[f64]) -> f64 {
    let s = pi.len();
    (0..s)
        .map(|y| ((0..s).map(|x| pi[x] * kernel[x * s + y]).sum::<f64>() - pi[y]).abs())
        .fold(0.0, f64::max)
}

/// Stationary law of a row-stochastic kernel given as rows.
pub fn stationary_distribution(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let s = rows.len();
    if s > MAX_STATES {
        return Err(Error::StateSpaceTooLarge { size: s, limit: MAX_STATES });
    }
    let kernel = normalize_kernel(rows)?;
    stationary_distribution_flat(&kernel, s)
}

fn stationary_distribution_flat(kernel: &[f64], s: usize) -> Result<Vec<f64>> {
    // A = I − Qᵀ; its null space is the set of invariant measures.
    let a = DMatrix::from_fn(s, s, |i, j| if i == j { 1.0 } else { 0.0 } - kernel[j * s + i]);
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let scale = r[(0, 0)].abs().max(1.0);
    let deficient = (0..s).filter(|&i| r[(i, i)].abs() <= RANK_TOL * scale).count();
    if deficient > 1 {
        return Err(Error::NonUniqueStationary { dimension: deficient });
    }
    // rows of A sum to zero, so the last equation can be swapped for Σπ = 1
    let mut b = a;
    for j in 0..s {
        b[(s - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(s);
    rhs[s - 1] = 1.0;
    let lu = b.clone().lu();
    let mut pi = lu
        .solve(&rhs)
        .ok_or_else(|| Error::SolveFailure("stationary system is singular".into()))?;
    // one step of iterative refinement
    let res = &rhs - &b * &pi;
    if let Some(corr) = lu.solve(&res) {
        pi += corr;
    }
    let mut pi: Vec<f64> = pi.iter().map(|&p| if p.abs() < 1e-300 { 0.0 } else { p }).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let residual = stationary_residual(kernel, &pi);
    if residual > STATIONARY_TOL {
        return Err(Error::SolveFailure(format!("stationary residual {residual:e}")));
    }
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn two_state(p: f64, q: f64) -> MarkovModel {
        MarkovModel::from_rows(&[vec![1.0 - p, p], vec![q, 1.0 - q]], vec![-1.0, 1.0]).unwrap()
    }

    #[test]
    fn stationary_of_iid_kernel_is_its_row() {
        let r = vec![0.2, 0.5, 0.3];
        let pi = stationary_distribution(&[r.clone(), r.clone(), r.clone()]).unwrap();
        for (a, b) in pi.iter().zip(&r) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stationary_two_state_symmetric() {
        let pi = stationary_distribution(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-14 && (pi[1] - 0.5).abs() < 1e-14);
        // oracle: left eigenvector of [[1-p,p],[q,1-q]] is (q, p)/(p+q)
        let pi = stationary_distribution(&[vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        assert!((pi[0] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn stationary_doubly_stochastic_is_uniform() {
        let rows = vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.5, 0.3], vec![0.3, 0.2, 0.5]];
        let pi = stationary_distribution(&rows).unwrap();
        assert!(pi.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn reducible_kernel_is_rejected() {
        let rows = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ];
        assert!(matches!(stationary_distribution(&rows), Err(Error::NonUniqueStationary { dimension: 3 })));
    }

    #[test]
    fn transient_state_is_rejected() {
        let rows = vec![vec![0.5, 0.5], vec![0.0, 1.0]];
        let err = MarkovModel::from_rows(&rows, vec![0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveStationary { state: 0 }));
    }

    #[test]
    fn bad_rows_are_rejected() {
        let err = MarkovModel::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]], vec![0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidKernel(_)));
        let err = MarkovModel::from_rows(&[vec![1.1, -0.1], vec![0.5, 0.5]], vec![0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidKernel(_)));
    }

    #[test]
    fn tiny_entries_are_clamped() {
        let rows = vec![vec![0.5, 0.5 - 1e-16, 1e-16], vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5]];
        let m = MarkovModel::from_rows(&rows, vec![0.0; 3]).unwrap();
        assert_eq!(m.transition(0, 2), 0.0);
        assert_eq!(m.kernel_row(0).iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn uncentered_observable_is_rejected_then_centered() {
        let rows = vec![vec![0.7, 0.3], vec![0.3, 0.7]];
        assert!(matches!(MarkovModel::from_rows(&rows, vec![0.0, 1.0]), Err(Error::NotCentered { .. })));
        let (m, mean) =
            MarkovModel::with_raw_observable(vec!["a".into(), "b".into()], &rows, None, vec![0.0, 1.0]).unwrap();
        assert!((mean - 0.5).abs() < 1e-15);
        assert_eq!(m.g_values(), &[-0.5, 0.5]);
    }

    #[test]
    fn center_observable_examples() {
        let m = presets::iid_two_state();
        let raw = m.function(vec![7.0, 7.0]).unwrap();
        let c = center_observable(&raw, &[0.5, 0.5]).unwrap();
        assert!(c.values().iter().all(|v| v.abs() < 1e-14));
        let raw = m.function(vec![0.0, 1.0]).unwrap();
        assert_eq!(center_observable(&raw, &[0.5, 0.5]).unwrap().values(), &[-0.5, 0.5]);
        // oracle: mean = 0.25, so (0 - 0.25, 1 - 0.25)
        let c = center_observable(&raw, &[0.75, 0.25]).unwrap();
        assert!((c.values()[0] + 0.25).abs() < 1e-15 && (c.values()[1] - 0.75).abs() < 1e-15);
        assert!(dot(&[0.75, 0.25], c.values()).abs() < 1e-14);
    }

    #[test]
    fn apply_kernel_examples() {
        let iid = presets::iid_two_state();
        let qg = iid.apply_kernel(&iid.g()).unwrap();
        assert!(qg.values().iter().all(|v| v.abs() < 1e-14));

        let m = two_state(0.3, 0.3);
        let qg = m.apply_kernel(&m.g()).unwrap();
        assert!((qg.values()[0] + 0.4).abs() < 1e-15 && (qg.values()[1] - 0.4).abs() < 1e-15);

        let c = m.apply_kernel(&m.constant(3.25)).unwrap();
        assert!(c.values().iter().all(|v| (v - 3.25).abs() < 1e-15));
    }

    #[test]
    fn kernel_power_examples() {
        let m = two_state(0.3, 0.3);
        let g = m.g();
        assert_eq!(m.kernel_power_apply(&g, 0).unwrap(), g);
        let q3 = m.kernel_power_apply(&g, 3).unwrap();
        // oracle: explicit matrix cube
        let q = [[0.7, 0.3], [0.3, 0.7]];
        let mut p = [[1.0, 0.0], [0.0, 1.0]];
        for _ in 0..3 {
            let mut next = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = (0..2).map(|k| p[i][k] * q[k][j]).sum();
                }
            }
            p = next;
        }
        for x in 0..2 {
            let want: f64 = (0..2).map(|y| p[x][y] * g.values()[y]).sum();
            assert!((q3.values()[x] - want).abs() < 1e-15);
            assert!((q3.values()[x] - 0.064 * g.values()[x]).abs() < 1e-15);
        }
        let iid = presets::iid_uniform(3);
        let z = iid.kernel_power_apply(&iid.g(), 5).unwrap();
        assert!(z.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn l2_norm_examples() {
        let m = two_state(0.3, 0.3);
        assert_eq!(m.l2_norm_pi(&m.constant(0.0)).unwrap(), 0.0);
        assert!((m.l2_norm_pi(&m.g()).unwrap() - 1.0).abs() < 1e-15);
        let h = m.function(vec![-5.0 / 3.0, 5.0 / 3.0]).unwrap();
        assert!((m.l2_norm_pi(&h).unwrap() - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_mean_examples() {
        let iid = presets::iid_uniform(3);
        for n in [1, 4, 17] {
            assert!(iid.conditional_mean_sn(n).unwrap().values().iter().all(|v| v.abs() < 1e-14));
        }
        let m = two_state(0.3, 0.3);
        let c = m.conditional_mean_sn(2).unwrap();
        assert!((c.values()[1] - 0.56).abs() < 1e-15);
        assert_eq!(m.conditional_mean_sn(1).unwrap(), m.apply_kernel(&m.g()).unwrap());
    }

    #[test]
    fn foreign_function_is_rejected() {
        let a = two_state(0.3, 0.3);
        let b = presets::iid_uniform(3);
        assert!(matches!(a.apply_kernel(&b.g()), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.function(vec![1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn simulation_is_reproducible_and_legal() {
        let m = two_state(0.3, 0.3);
        let a = m.simulate_paths(3, 1, StartSpec::Fixed(0), RootSeed(11)).unwrap();
        let b = m.simulate_paths(3, 1, StartSpec::Fixed(0), RootSeed(11)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectories[0].path.len(), 3);

        let slow = presets::sparse_ring(5);
        let e = slow.simulate_paths(50, 40, StartSpec::Stationary, RootSeed(3)).unwrap();
        assert!(e.trajectories.iter().all(|t| slow.is_legal(t)));
        let groups = e.by_start();
        assert_eq!(groups.values().map(Vec::len).sum::<usize>(), 40);
    }

    #[test]
    fn simulation_rejects_bad_arguments() {
        let m = two_state(0.3, 0.3);
        assert!(m.simulate_paths(0, 1, StartSpec::Stationary, RootSeed(0)).is_err());
        assert!(m.simulate_paths(1, 0, StartSpec::Stationary, RootSeed(0)).is_err());
        assert!(m.simulate_paths(1, 1, StartSpec::Fixed(2), RootSeed(0)).is_err());
    }

    #[test]
    fn empirical_transition_frequency_within_binomial_band() {
        let m = two_state(0.5, 0.5);
        let e = m.map_paths(200, 500, StartSpec::Stationary, RootSeed(99), |_, x0, path| {
            let mut from0 = 0u64;
            let mut stay = 0u64;
            let mut x = x0;
            for &y in path {
                if x == 0 {
                    from0 += 1;
                    if y == 0 {
                        stay += 1;
                    }
                }
                x = y as usize;
            }
            (from0, stay)
        })
        .unwrap();
        let (n0, s0) = e.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let p_hat = s0 as f64 / n0 as f64;
        let sigma = (0.25 / n0 as f64).sqrt();
        assert!((p_hat - 0.5).abs() < 3.0 * sigma, "p_hat = {p_hat}");
    }

    #[test]
    fn iid_state_frequencies_within_multinomial_band() {
        let r = vec![0.2, 0.5, 0.3];
        let m = MarkovModel::from_rows(&[r.clone(), r.clone(), r.clone()], vec![0.0; 3]).unwrap();
        let counts = m
            .map_paths(100, 400, StartSpec::Stationary, RootSeed(5), |_, _, path| {
                let mut c = [0u64; 3];
                path.iter().for_each(|&x| c[x as usize] += 1);
                c
            })
            .unwrap()
            .into_iter()
            .fold([0u64; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
        let total = 40_000.0;
        for (c, p) in counts.iter().zip(&r) {
            let sigma = (p * (1.0 - p) / total).sqrt();
            assert!((*c as f64 / total - p).abs() < 3.0 * sigma);
        }
    }
}
