//! Chains and distributions on a finite state space `[d]`.
//!
//! Everything here works with dense row-major storage; the toolkit targets
//! chains with at most a few dozen states. All types are immutable once
//! constructed and every operation is a pure function of its inputs.
//!
//! Matrix norms follow the unhalved ℓ₁ convention: the distance between two
//! rows is `Σ_j |A(i,j) − B(i,j)|`, so two stochastic rows are at most 2
//! apart.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on row sums (and distribution sums) accepted at validation.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Tolerance on `π(i)M(i,j) − π(j)M(j,i)` for detailed balance.
pub const DETAILED_BALANCE_TOLERANCE: f64 = 1e-10;

/// A probability distribution over `[d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    /// Validates `weights` (non-negative, summing to one within
    /// [`ROW_SUM_TOLERANCE`]) and renormalizes them.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DimensionTooSmall(0));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite(1, i + 1));
            }
            if w < 0.0 {
                return Err(Error::NegativeEntry(1, i + 1));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::NotADistribution(sum));
        }
        Ok(Self::normalized(weights, sum))
    }

    fn normalized(mut weights: Vec<f64>, sum: f64) -> Self {
        if needs_renormalizing(sum, weights.len()) {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self { weights }
    }

    pub fn uniform(d: usize) -> Self {
        Self {
            weights: vec![1.0 / d as f64; d],
        }
    }

    /// Dirac mass at `state` (0-based).
    pub fn point_mass(d: usize, state: usize) -> Self {
        let mut weights = vec![0.0; d];
        weights[state] = 1.0;
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Smallest entry, `π*` when applied to a stationary law.
    pub fn min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w < self.weights[best] {
                best = i;
            }
        }
        best
    }

    /// ℓ₁ distance to another distribution.
    pub fn l1_distance(&self, other: &ProbDist) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// A `d × d` row-stochastic matrix with `d ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    dim: usize,
    // row-major
    entries: Vec<f64>,
}

impl StochasticMatrix {
    /// Builds a matrix from rows, validating with [`ROW_SUM_TOLERANCE`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotSquare);
        }
        let raw = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        validate_stochastic(&raw, ROW_SUM_TOLERANCE)
    }

    /// Wraps entries that are already stochastic up to rounding, such as
    /// products of stochastic matrices. Rows are renormalized.
    pub(crate) fn from_stochastic_entries(dim: usize, mut entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        for row in entries.chunks_mut(dim) {
            for x in row.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            let s: f64 = row.iter().sum();
            if s > 0.0 && needs_renormalizing(s, dim) {
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        Self { dim, entries }
    }

    pub fn identity(d: usize) -> Self {
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1.0;
        }
        Self { dim: d, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.dim)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Entrywise difference `self − other`.
    pub fn difference(&self, other: &StochasticMatrix) -> DMatrix<f64> {
        self.to_dmatrix() - other.to_dmatrix()
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &StochasticMatrix) -> StochasticMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in compose");
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let row = other.row(k);
                let dst = &mut out[i * d..(i + 1) * d];
                for (o, &b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        StochasticMatrix::from_stochastic_entries(d, out)
    }

    /// `M^k` by repeated squaring; `M^0` is the identity.
    pub fn power(&self, mut k: u32) -> StochasticMatrix {
        let mut result = StochasticMatrix::identity(self.dim);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.compose(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base);
            }
        }
        result
    }

    /// Row vector product `μ M`, returned as raw weights.
    pub fn left_apply(&self, mu: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for (i, &w) in mu.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o += w * m;
            }
        }
        out
    }

    /// Relabels states: entry `(i, j)` of the result is `M(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> StochasticMatrix {
        let d = self.dim;
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = self.get(perm[i], perm[j]);
            }
        }
        StochasticMatrix { dim: d, entries }
    }
}

/// A path `X_1, …, X_m` over `[d]`, stored with 0-based state labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    dim: usize,
    states: Vec<usize>,
}

impl Trajectory {
    pub fn new(dim: usize, states: Vec<usize>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if let Some(&bad) = states.iter().find(|&&s| s >= dim) {
            return Err(Error::StateOutOfRange {
                index: bad as i64 + 1,
                dim,
            });
        }
        Ok(Self { dim, states })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Always false; trajectories hold at least one state.
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }
}

/// Validates a raw square matrix as row-stochastic.
///
/// Rows whose sum is within `tolerance` of one are renormalized so that the
/// stored rows sum to one up to rounding.
pub fn validate_stochastic(raw: &DMatrix<f64>, tolerance: f64) -> Result<StochasticMatrix> {
    if raw.nrows() != raw.ncols() {
        return Err(Error::NotSquare);
    }
    let d = raw.nrows();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut sum = 0.0;
        for j in 0..d {
            let x = raw[(i, j)];
            if !x.is_finite() {
                return Err(Error::NonFinite(i + 1, j + 1));
            }
            if x < 0.0 {
                return Err(Error::NegativeEntry(i + 1, j + 1));
            }
            sum += x;
        }
        if (sum - 1.0).abs() > tolerance {
            return Err(Error::RowSumOutOfTolerance(i + 1, sum));
        }
        let rescale = needs_renormalizing(sum, d);
        for j in 0..d {
            let x = raw[(i, j)];
            entries.push(if rescale { x / sum } else { x });
        }
    }
    Ok(StochasticMatrix { dim: d, entries })
}

/// Sums within rounding error of one are left alone, so that validating an
/// already-normalized row is the identity.
fn needs_renormalizing(sum: f64, len: usize) -> bool {
    (sum - 1.0).abs() > len as f64 * f64::EPSILON
}

/// True iff the transition graph is strongly connected and aperiodic,
/// i.e. the matrix is primitive (`M^k > 0` entrywise for some `k`).
pub fn is_ergodic(m: &StochasticMatrix) -> bool {
    let d = m.dim();
    let reach = |forward: bool| -> Vec<Option<usize>> {
        let mut level = vec![None; d];
        level[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            let lu = level[u].unwrap();
            for v in 0..d {
                let edge = if forward { m.get(u, v) } else { m.get(v, u) };
                if edge > 0.0 && level[v].is_none() {
                    level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
            }
        }
        level
    };
    let forward = reach(true);
    if forward.iter().any(Option::is_none) || reach(false).iter().any(Option::is_none) {
        return false;
    }
    // Period of an irreducible chain: gcd over edges u→v of level(u) + 1 − level(v)
    // for BFS levels from any root.
    let mut g = 0usize;
    for u in 0..d {
        for v in 0..d {
            if m.get(u, v) > 0.0 {
                let lu = forward[u].unwrap() as i64;
                let lv = forward[v].unwrap() as i64;
                g = gcd(g, (lu + 1 - lv).unsigned_abs() as usize);
                if g == 1 {
                    return true;
                }
            }
        }
    }
    g == 1
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The unique stationary law of an ergodic chain.
///
/// Solves `(Mᵀ − I)x = 0` with the last equation replaced by `Σ x = 1`.
pub fn stationary_distribution(m: &StochasticMatrix) -> Result<ProbDist> {
    if !is_ergodic(m) {
        return Err(Error::NotErgodic);
    }
    let d = m.dim();
    let mut a = m.to_dmatrix().transpose() - DMatrix::<f64>::identity(d, d);
    for j in 0..d {
        a[(d - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(d);
    b[d - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or(Error::NotErgodic)?;
    let mut weights: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::NotErgodic);
    }
    Ok(ProbDist { weights })
}

/// Detailed balance check `π(i)M(i,j) = π(j)M(j,i)` within
/// [`DETAILED_BALANCE_TOLERANCE`].
pub fn is_reversible(m: &StochasticMatrix, pi: &ProbDist) -> bool {
    let d = m.dim();
    if pi.dim() != d {
        return false;
    }
    (0..d).all(|i| {
        (i + 1..d).all(|j| {
            (pi.get(i) * m.get(i, j) - pi.get(j) * m.get(j, i)).abs() <= DETAILED_BALANCE_TOLERANCE
        })
    })
}

/// Time reversal `M*(i,j) = π(j)M(j,i)/π(i)`.
pub fn time_reversal(m: &StochasticMatrix, pi: &ProbDist) -> Result<StochasticMatrix> {
    let d = m.dim();
    check_dim(d, pi.dim())?;
    if let Some(i) = (0..d).find(|&i| pi.get(i) <= 0.0) {
        return Err(Error::ZeroStationaryMass(i + 1));
    }
    let raw = DMatrix::from_fn(d, d, |i, j| pi.get(j) * m.get(j, i) / pi.get(i));
    validate_stochastic(&raw, ROW_SUM_TOLERANCE)
}

/// `|||A||| = max_i Σ_j |A(i,j)|`.
pub fn tv_matrix_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `max_i ‖A(i,·)‖_p` for `p ∈ [1, 2]`; `p = ∞` selects the entrywise max
/// norm `max_{i,j} |A(i,j)|`.
pub fn p_row_norm(a: &DMatrix<f64>, p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        return Ok(a.iter().fold(0.0, |acc, x| acc.max(x.abs())));
    }
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::OutOfRange(format!("p = {p}")));
    }
    if p == 1.0 {
        return Ok(tv_matrix_norm(a));
    }
    Ok(a.row_iter()
        .map(|r| r.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p))
        .fold(0.0, f64::max))
}

/// Row-wise norm used to score an estimate against the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// Max ℓ₁ row sum, [`tv_matrix_norm`].
    Tv,
    /// Entrywise max.
    Max,
    /// Max ℓ_p row norm, `p ∈ [1, 2]`.
    P(f64),
}

impl Norm {
    pub fn apply(&self, a: &DMatrix<f64>) -> Result<f64> {
        match *self {
            Norm::Tv => Ok(tv_matrix_norm(a)),
            Norm::Max => p_row_norm(a, f64::INFINITY),
            Norm::P(p) => p_row_norm(a, p),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tv" => Ok(Norm::Tv),
            "max" => Ok(Norm::Max),
            other => {
                let p = other
                    .strip_prefix("p:")
                    .or_else(|| other.strip_prefix('p'))
                    .ok_or_else(|| Error::Parse(format!("unknown norm '{other}'")))?;
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("unknown norm '{other}'")))?;
                if !(1.0..=2.0).contains(&p) {
                    return Err(Error::OutOfRange(format!("p = {p}")));
                }
                Ok(Norm::P(p))
            }
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::Tv => write!(f, "tv"),
            Norm::Max => write!(f, "max"),
            Norm::P(p) => write!(f, "p:{p}"),
        }
    }
}

/// `Π_μ = Σ μ(i)²/π(i)`, the cost of starting away from stationarity.
pub fn pi_mu(mu: &ProbDist, pi: &ProbDist) -> Result<f64> {
    check_dim(pi.dim(), mu.dim())?;
    let mut total = 0.0;
    for i in 0..pi.dim() {
        let p = pi.get(i);
        if p <= 0.0 {
            return Err(Error::ZeroStationaryMass(i + 1));
        }
        total += mu.get(i) * mu.get(i) / p;
    }
    Ok(total)
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random stochastic matrix; each entry is zeroed with probability
    /// `sparsity`, and an all-zero row gets a random single entry.
    pub fn random_stochastic(d: usize, sparsity: f64, seed: u64) -> StochasticMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|_| {
                let mut r: Vec<f64> = (0..d)
                    .map(|_| {
                        if rng.random::<f64>() < sparsity {
                            0.0
                        } else {
                            rng.random::<f64>() + 1e-3
                        }
                    })
                    .collect();
                if r.iter().all(|&x| x == 0.0) {
                    r[rng.random_range(0..d)] = 1.0;
                }
                let s: f64 = r.iter().sum();
                r.iter().map(|x| x / s).collect()
            })
            .collect();
        StochasticMatrix::from_rows(&rows).unwrap()
    }

    pub fn random_dist(d: usize, seed: u64) -> ProbDist {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = w.iter().sum();
        ProbDist::new(w.iter().map(|x| x / s).collect()).unwrap()
    }

    /// Brute-force power iteration, the independent route to `π`.
    pub fn power_iteration_stationary(m: &StochasticMatrix, steps: usize) -> Vec<f64> {
        let d = m.dim();
        let mut v = vec![1.0 / d as f64; d];
        for _ in 0..steps {
            let next = m.left_apply(&v);
            // average with the previous iterate to damp any periodic component
            v = next.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
        }
        v
    }
}
