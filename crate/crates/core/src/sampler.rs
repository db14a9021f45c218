//! Seeded trajectory simulation and counting.
//!
//! Randomness comes from ChaCha8, a counter-based generator. Every
//! independent stream (a trial, a sweep cell) gets its own seed derived by
//! hashing the master seed with the stream coordinates, so results do not
//! depend on how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{check_dim, ProbDist, StochasticMatrix, Trajectory};
use crate::error::{Error, Result};

/// Mixes a master seed with stream coordinates (splitmix64 finalizer).
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts
        .iter()
        .fold(mix(master), |acc, &p| mix(acc.rotate_left(23) ^ p))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inverse-CDF sampler over the rows of a chain.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    dim: usize,
    cumulative: Vec<f64>,
    // last state with positive mass per row, the fallback for u ≥ cdf due to rounding
    last_positive: Vec<usize>,
}

impl ChainSampler {
    pub fn new(m: &StochasticMatrix) -> Self {
        let d = m.dim();
        let mut cumulative = Vec::with_capacity(d * d);
        let mut last_positive = Vec::with_capacity(d);
        for row in m.rows() {
            cumulative.extend(cumulative_of(row));
            last_positive.push(row.iter().rposition(|&p| p > 0.0).unwrap_or(d - 1));
        }
        Self {
            dim: d,
            cumulative,
            last_positive,
        }
    }

    #[inline]
    pub fn step<R: Rng>(&self, from: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let cdf = &self.cumulative[from * self.dim..(from + 1) * self.dim];
        cdf.iter()
            .position(|&c| u < c)
            .unwrap_or(self.last_positive[from])
    }
}

fn cumulative_of(weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

fn draw_initial<R: Rng>(mu: &ProbDist, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let cdf = cumulative_of(mu.as_slice());
    cdf.iter()
        .position(|&c| u < c)
        .unwrap_or_else(|| mu.as_slice().iter().rposition(|&p| p > 0.0).unwrap_or(0))
}

/// Draws `X_1 ~ μ`, then `X_{t+1} ~ M(X_t, ·)` for `m − 1` steps.
pub fn sample_trajectory(
    m: &StochasticMatrix,
    mu: &ProbDist,
    length: usize,
    seed: u64,
) -> Result<Trajectory> {
    check_dim(m.dim(), mu.dim())?;
    if length == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let sampler = ChainSampler::new(m);
    let mut rng = rng_from_seed(seed);
    let mut states = Vec::with_capacity(length);
    let mut x = draw_initial(mu, &mut rng);
    states.push(x);
    for _ in 1..length {
        x = sampler.step(x, &mut rng);
        states.push(x);
    }
    Trajectory::new(m.dim(), states)
}

/// Visit and transition counts over `t ∈ [m − 1]`:
/// `N_i = #{t < m : X_t = i}` and `N_ij = #{t < m : X_t = i, X_{t+1} = j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSummary {
    pub dim: usize,
    pub length: usize,
    pub visits: Vec<u64>,
    /// Row-major `d × d`.
    pub transitions: Vec<u64>,
}

impl CountSummary {
    fn empty(dim: usize, length: usize) -> Self {
        Self {
            dim,
            length,
            visits: vec![0; dim],
            transitions: vec![0; dim * dim],
        }
    }

    #[inline]
    fn record(&mut self, from: usize, to: usize) {
        self.visits[from] += 1;
        self.transitions[from * self.dim + to] += 1;
    }

    pub fn transition(&self, i: usize, j: usize) -> u64 {
        self.transitions[i * self.dim + j]
    }

    pub fn transition_row(&self, i: usize) -> &[u64] {
        &self.transitions[i * self.dim..(i + 1) * self.dim]
    }
}

pub fn count_summary(x: &Trajectory) -> CountSummary {
    let mut counts = CountSummary::empty(x.dim(), x.len());
    for w in x.states().windows(2) {
        counts.record(w[0], w[1]);
    }
    counts
}

/// Simulates a trajectory and returns only its counts, without storing the
/// path. Consumes randomness exactly as [`sample_trajectory`], so both agree
/// for the same seed.
pub fn sample_counts(
    m: &StochasticMatrix,
    mu: &ProbDist,
    length: usize,
    seed: u64,
) -> Result<CountSummary> {
    check_dim(m.dim(), mu.dim())?;
    if length == 0 {
        return Err(Error::EmptyTrajectory);
    }
    Ok(sample_counts_with(&ChainSampler::new(m), mu, length, seed))
}

pub(crate) fn sample_counts_with(
    sampler: &ChainSampler,
    mu: &ProbDist,
    length: usize,
    seed: u64,
) -> CountSummary {
    let mut rng = rng_from_seed(seed);
    let mut counts = CountSummary::empty(sampler.dim, length);
    let mut x = draw_initial(mu, &mut rng);
    for _ in 1..length {
        let y = sampler.step(x, &mut rng);
        counts.record(x, y);
        x = y;
    }
    counts
}

/// True when some state's visit count falls outside `[½mπ_i, (3/2)mπ_i]`.
pub fn visit_window_violated(counts: &CountSummary, pi: &ProbDist) -> bool {
    let m = counts.length as f64;
    counts
        .visits
        .iter()
        .zip(pi.as_slice())
        .any(|(&n, &p)| (n as f64) < 0.5 * m * p || (n as f64) > 1.5 * m * p)
}

/// Cover times of the inner clique `{1, …, d/3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverTimeStats {
    /// `T_cliq` per trial; censored trials hold `cap`.
    pub samples: Vec<u64>,
    pub censored: Vec<bool>,
    pub target_m: u64,
    pub cap: u64,
    /// Fraction of trials with `T_cliq > target_m` (censored trials count).
    pub empirical_exceed_prob: f64,
}

impl CoverTimeStats {
    pub fn mean(&self) -> f64 {
        self.samples.iter().map(|&s| s as f64).sum::<f64>() / self.samples.len() as f64
    }

    pub fn censor_rate(&self) -> f64 {
        self.censored.iter().filter(|&&c| c).count() as f64 / self.censored.len() as f64
    }

    /// CSV rows `trial,t_cliq,censored` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,t_cliq,censored\n");
        for (i, (t, c)) in self.samples.iter().zip(&self.censored).enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, t, u8::from(*c)));
        }
        out
    }
}

/// Hard censoring cap as a multiple of `m_limit`.
pub const COVER_TIME_CAP_FACTOR: u64 = 50;

/// Simulates `trials` trajectories from the uniform (stationary) law and
/// records the first time every state of the inner clique was visited.
pub fn cover_time_inner_clique(
    m: &StochasticMatrix,
    d: usize,
    m_limit: u64,
    trials: usize,
    seed: u64,
) -> Result<CoverTimeStats> {
    if !d.is_multiple_of(6) || d < 12 {
        return Err(Error::InvalidDimension(d));
    }
    check_dim(d, m.dim())?;
    if trials == 0 {
        return Err(Error::OutOfRange("trials = 0".into()));
    }
    let clique = d / 3;
    let cap = COVER_TIME_CAP_FACTOR * m_limit.max(clique as u64);
    let sampler = ChainSampler::new(m);
    let start = ProbDist::uniform(d);
    let results: Vec<(u64, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_from_seed(derive_seed(seed, &[trial]));
            let mut seen = vec![false; clique];
            let mut missing = clique;
            let mut x = draw_initial(&start, &mut rng);
            let mut t = 1u64;
            loop {
                if x < clique && !seen[x] {
                    seen[x] = true;
                    missing -= 1;
                    if missing == 0 {
                        return (t, false);
                    }
                }
                if t >= cap {
                    return (cap, true);
                }
                x = sampler.step(x, &mut rng);
                t += 1;
            }
        })
        .collect();
    let exceed = results
        .iter()
        .filter(|(t, censored)| *censored || *t > m_limit)
        .count();
    Ok(CoverTimeStats {
        empirical_exceed_prob: exceed as f64 / trials as f64,
        samples: results.iter().map(|r| r.0).collect(),
        censored: results.iter().map(|r| r.1).collect(),
        target_m: m_limit,
        cap,
    })
}

/// Closed-form coupon-collector quantities for the inner-clique cover time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouponBound {
    /// `1 + (d/3)/η · H_{d/3−1}`.
    pub mean_lb: f64,
    /// `((d/3 − 1)²/η²) · π²/6`.
    pub var_ub: f64,
    /// `⌊(d/(20η)) ln(d/3)⌋`.
    pub threshold_m: u64,
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

pub fn coupon_collector_bound(d: usize, eta: f64) -> Result<CouponBound> {
    if !d.is_multiple_of(6) || d == 0 {
        return Err(Error::OutOfRange(format!("d = {d} (must be a positive multiple of 6)")));
    }
    if !(eta > 0.0 && eta < 1.0 / 48.0) {
        return Err(Error::OutOfRange(format!("eta = {eta} (need 0 < eta < 1/48)")));
    }
    let n = (d / 3) as f64;
    Ok(CouponBound {
        mean_lb: 1.0 + n / eta * harmonic(d / 3 - 1),
        var_ub: (n - 1.0).powi(2) / (eta * eta) * std::f64::consts::PI.powi(2) / 6.0,
        threshold_m: cover_threshold(d, eta),
    })
}

/// `⌊(d/(20η)) ln(d/3)⌋`, below which the inner clique stays uncovered with
/// probability at least 1/5.
pub fn cover_threshold(d: usize, eta: f64) -> u64 {
    (d as f64 / (20.0 * eta) * (d as f64 / 3.0).ln()).floor() as u64
}
