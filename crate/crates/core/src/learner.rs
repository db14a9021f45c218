//! The smoothed maximum-likelihood learner and the sample-size calculators
//! attached to its analysis.
//!
//! Logarithms in every bound are natural logarithms.

use crate::chain::{check_dim, Norm, StochasticMatrix, Trajectory};
use crate::error::{Error, Result};
use crate::io::KvBlock;
use crate::sampler::{count_summary, CountSummary};

/// `M̂` together with the counts it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedChain {
    pub estimate: StochasticMatrix,
    /// 0-based states with `N_i = 0`; their rows are uniform.
    pub unvisited_states: Vec<usize>,
    pub source_length: usize,
}

/// `M̂(i,j) = N_ij / N_i`, or the uniform row when `N_i = 0`.
pub fn learn(x: &Trajectory) -> LearnedChain {
    learn_from_counts(&count_summary(x))
}

pub fn learn_from_counts(counts: &CountSummary) -> LearnedChain {
    let d = counts.dim;
    let mut entries = Vec::with_capacity(d * d);
    let mut unvisited_states = Vec::new();
    for i in 0..d {
        let n_i = counts.visits[i];
        if n_i == 0 {
            unvisited_states.push(i);
            entries.extend(std::iter::repeat_n(1.0 / d as f64, d));
        } else {
            entries.extend(
                counts
                    .transition_row(i)
                    .iter()
                    .map(|&n_ij| n_ij as f64 / n_i as f64),
            );
        }
    }
    LearnedChain {
        estimate: StochasticMatrix::from_stochastic_entries(d, entries),
        unvisited_states,
        source_length: counts.length,
    }
}

/// `|||M − M̂|||` in the chosen row-wise norm.
pub fn learn_error(m: &StochasticMatrix, learned: &LearnedChain, norm: Norm) -> Result<f64> {
    check_dim(m.dim(), learned.estimate.dim())?;
    norm.apply(&m.difference(&learned.estimate))
}

/// Error of the estimate built from `counts`, without materializing `M̂`.
pub fn count_error(m: &StochasticMatrix, counts: &CountSummary, norm: Norm) -> Result<f64> {
    check_dim(m.dim(), counts.dim)?;
    let d = m.dim();
    let mut row_diff = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let n_i = counts.visits[i];
        for (j, diff) in row_diff.iter_mut().enumerate() {
            let hat = if n_i == 0 {
                1.0 / d as f64
            } else {
                counts.transition(i, j) as f64 / n_i as f64
            };
            *diff = m.get(i, j) - hat;
        }
        let r = match norm {
            Norm::Tv => row_diff.iter().map(|x| x.abs()).sum(),
            Norm::Max => row_diff.iter().fold(0.0f64, |a, x| a.max(x.abs())),
            Norm::P(p) => {
                if !(1.0..=2.0).contains(&p) {
                    return Err(Error::OutOfRange(format!("p = {p}")));
                }
                row_diff.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
            }
        };
        worst = worst.max(r);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub d: usize,
    pub pi_min: f64,
    pub gamma_ps: f64,
    pub pi_mu: f64,
}

/// Sufficient trajectory length for `P(|||M − M̂||| > ε) ≤ δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSizeBound {
    pub m_tv_term: u64,
    pub m_mixing_term: u64,
    pub m_required: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub inputs: BoundInputs,
}

impl SampleSizeBound {
    pub fn to_kv(&self) -> KvBlock {
        let mut kv = KvBlock::new();
        kv.push("m_tv_term", self.m_tv_term)
            .push("m_mixing_term", self.m_mixing_term)
            .push("m_required", self.m_required);
        kv
    }
}

// Relative slack for the π* ≤ 1/d and Π_μ ≤ 1/π* checks, which are often fed
// values computed in floating point.
const BOUND_SLACK: f64 = 1e-9;

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("delta = {delta} (need 0 < delta < 1)")))
    }
}

fn check_mixing_inputs(inputs: &BoundInputs) -> Result<()> {
    let BoundInputs {
        d,
        pi_min,
        gamma_ps,
        pi_mu,
    } = *inputs;
    if d < 2 {
        return Err(Error::OutOfRange(format!("d = {d} (need d >= 2)")));
    }
    if !(pi_min > 0.0 && pi_min <= (1.0 + BOUND_SLACK) / d as f64) {
        return Err(Error::OutOfRange(format!("pi_min = {pi_min} (need 0 < pi_min <= 1/d)")));
    }
    if !(gamma_ps > 0.0 && gamma_ps <= 1.0) {
        return Err(Error::OutOfRange(format!("gamma_ps = {gamma_ps} (need 0 < gamma_ps <= 1)")));
    }
    if !(pi_mu >= 1.0 - BOUND_SLACK && pi_mu <= (1.0 + BOUND_SLACK) / pi_min) {
        return Err(Error::OutOfRange(format!("pi_mu = {pi_mu} (need 1 <= pi_mu <= 1/pi_min)")));
    }
    Ok(())
}

/// `⌈(16d/(ε²π*)) ln(4d²/δ)⌉` and `⌈(112/(γ_ps π*)) ln(2d√Π_μ/δ)⌉`.
pub fn sample_size_upper(epsilon: f64, delta: f64, inputs: BoundInputs) -> Result<SampleSizeBound> {
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::OutOfRange(format!("epsilon = {epsilon} (need 0 < epsilon < 2)")));
    }
    check_delta(delta)?;
    check_mixing_inputs(&inputs)?;
    let d = inputs.d as f64;
    let m_tv_term =
        (16.0 * d / (epsilon * epsilon * inputs.pi_min) * (4.0 * d * d / delta).ln()).ceil() as u64;
    let m_mixing_term = mixing_term(delta, &inputs);
    Ok(SampleSizeBound {
        m_tv_term,
        m_mixing_term,
        m_required: m_tv_term.max(m_mixing_term),
        epsilon,
        delta,
        inputs,
    })
}

fn mixing_term(delta: f64, inputs: &BoundInputs) -> u64 {
    let d = inputs.d as f64;
    (112.0 / (inputs.gamma_ps * inputs.pi_min) * (2.0 * d * inputs.pi_mu.sqrt() / delta).ln()).ceil()
        as u64
}

/// Length beyond which every visit count lies in `[½mπ_i, (3/2)mπ_i]` with
/// probability at least `1 − δ`.
pub fn visit_concentration_threshold(delta: f64, inputs: BoundInputs) -> Result<u64> {
    check_delta(delta)?;
    check_mixing_inputs(&inputs)?;
    Ok(mixing_term(delta, &inputs))
}

/// Confidence level at which the lower-bound TV term is stated.
pub const LOWER_BOUND_DELTA: f64 = 0.1;

/// The two lower-bound terms, with explicit constants.
///
/// The mixing term `(d/(20η)) ln(d/3)` is reported with `η = γ_ps`. The
/// relation between the two is only known up to constants, so the value is an
/// order-of-magnitude reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub tv_term: f64,
    pub mixing_term: f64,
}

pub fn sample_size_lower(d: usize, epsilon: f64, pi_min: f64, gamma_ps: f64) -> Result<LowerBound> {
    if d < 12 || !d.is_multiple_of(6) {
        return Err(Error::OutOfRange(format!("d = {d} (need d = 6k with k >= 2)")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / 32.0) {
        return Err(Error::OutOfRange(format!("epsilon = {epsilon} (need 0 < epsilon < 1/32)")));
    }
    if !(gamma_ps > 0.0 && gamma_ps < 0.125) {
        return Err(Error::OutOfRange(format!("gamma_ps = {gamma_ps} (need 0 < gamma_ps < 1/8)")));
    }
    if !(pi_min > 0.0 && pi_min <= (1.0 + BOUND_SLACK) / d as f64) {
        return Err(Error::OutOfRange(format!("pi_min = {pi_min} (need 0 < pi_min <= 1/d)")));
    }
    let d = d as f64;
    Ok(LowerBound {
        tv_term: d * (1.0 - 2.0 * LOWER_BOUND_DELTA) * std::f64::consts::LN_2
            / (8192.0 * epsilon * epsilon * pi_min),
        mixing_term: d / (20.0 * gamma_ps) * (d / 3.0).ln(),
    })
}

/// `(d₁ + d₂) exp(−(ε²/2)/(σ² + Rε/3))`, clipped to `[0, 1]`.
pub fn matrix_freedman_bound(d1: usize, d2: usize, eps: f64, sigma2: f64, r: f64) -> Result<f64> {
    if !(eps >= 0.0 && sigma2 > 0.0 && r > 0.0) || !eps.is_finite() {
        return Err(Error::OutOfRange(format!(
            "eps = {eps}, sigma2 = {sigma2}, R = {r} (need eps >= 0, sigma2 > 0, R > 0)"
        )));
    }
    let raw = (d1 + d2) as f64 * (-(eps * eps / 2.0) / (sigma2 + r * eps / 3.0)).exp();
    Ok(raw.clamp(0.0, 1.0))
}

/// Row-wise instantiation used for a single row with `n` visits:
/// `(d+1) exp(−ε²n²/(2d(3n + εn/(3√(2d)))))`, unclipped.
pub fn freedman_row_bound(d: usize, eps: f64, n: f64) -> f64 {
    let d_f = d as f64;
    let denom = 2.0 * d_f * (3.0 * n + eps * n / (3.0 * (2.0 * d_f).sqrt()));
    (d_f + 1.0) * (-(eps * eps * n * n) / denom).exp()
}

/// `2d exp(−ε²n/(8d))`, the simplified form that dominates
/// [`freedman_row_bound`].
pub fn freedman_row_simplified(d: usize, eps: f64, n: f64) -> f64 {
    let d_f = d as f64;
    2.0 * d_f * (-(eps * eps * n) / (8.0 * d_f)).exp()
}
