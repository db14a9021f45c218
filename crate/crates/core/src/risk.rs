//! Monte-Carlo estimates of `P(|||M − M̂||| > ε)` over a grid of trajectory
//! lengths.
//!
//! Every trial draws its own seed from `(master_seed, m, trial, member)`, so
//! a sweep is bit-for-bit reproducible under any thread count.

use std::path::Path;

use rayon::prelude::*;

use crate::chain::{check_dim, stationary_distribution, Norm, ProbDist, StochasticMatrix};
use crate::error::{Error, Result};
use crate::families::{build_heta, gp_perturbed, varshamov_gilbert, HEtaParams};
use crate::io::{format_real, parse_matrix, KvBlock};
use crate::learner::count_error;
use crate::sampler::{derive_seed, sample_counts_with, ChainSampler};

/// First line of every curve CSV.
pub const CSV_VERSION_LINE: &str = "# mcmx risk-curve v1";
pub const CSV_HEADER: &str = "m,empirical_risk,trials,ci_low,ci_high,median_error";

#[derive(Debug, Clone, PartialEq)]
pub enum ChainSource {
    Matrix(StochasticMatrix),
    /// `G_p` members `M_σ` with `σ` taken from a greedy codebook.
    Gp {
        d: usize,
        p_star: f64,
        family_epsilon: f64,
        members: usize,
    },
    /// `H_η` members `M_{η,τ}` with `τ` running over the first words of `{0,1}^{d/3}`.
    Heta {
        d: usize,
        eta: f64,
        family_epsilon: f64,
        members: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    Stationary,
    Explicit(ProbDist),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub source: ChainSource,
    pub epsilon: f64,
    pub m_grid: Vec<u64>,
    pub trials_per_m: usize,
    pub master_seed: u64,
    pub initial_law: InitialLaw,
    pub norm: Norm,
}

const DEFAULT_MEMBERS: usize = 8;

impl SweepConfig {
    pub fn new(source: ChainSource, epsilon: f64, m_grid: Vec<u64>, trials_per_m: usize, master_seed: u64) -> Self {
        Self {
            source,
            epsilon,
            m_grid,
            trials_per_m,
            master_seed,
            initial_law: InitialLaw::Stationary,
            norm: Norm::Tv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_grid.is_empty() || self.m_grid[0] == 0 {
            return Err(Error::InvalidParams("m_grid must be non-empty with m >= 1".into()));
        }
        if self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("m_grid must be strictly increasing".into()));
        }
        if self.trials_per_m == 0 {
            return Err(Error::InvalidParams("trials_per_m must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParams(format!("epsilon = {}", self.epsilon)));
        }
        Ok(())
    }

    /// Parses a flat `key=value` file. `chain=matrix:PATH` is resolved
    /// against `base_dir`.
    ///
    /// Keys: `chain` (`matrix:PATH`, `gp` or `heta`), `d`, `p_star`, `eta`,
    /// `family_epsilon`, `members`, `epsilon`, `m_grid` (comma list),
    /// `trials_per_m`, `master_seed`, `initial_law` (`stationary` or a comma
    /// list of weights) and `norm` (`tv`, `max`, `p:<p>`).
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let kv = KvBlock::parse(text)?;
        let get = |k: &str| kv.get(k).ok_or_else(|| Error::Parse(format!("missing key '{k}'")));
        fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse(format!("{k}: '{v}' is not valid")))
        }
        let opt_num = |k: &str, default: usize| -> Result<usize> {
            kv.get(k).map_or(Ok(default), |v| num(k, v))
        };
        let chain = get("chain")?;
        let source = if let Some(path) = chain.strip_prefix("matrix:") {
            let text = std::fs::read_to_string(base_dir.join(path))?;
            ChainSource::Matrix(parse_matrix(&text)?)
        } else {
            match chain {
                "gp" => ChainSource::Gp {
                    d: num("d", get("d")?)?,
                    p_star: num("p_star", get("p_star")?)?,
                    family_epsilon: num("family_epsilon", get("family_epsilon")?)?,
                    members: opt_num("members", DEFAULT_MEMBERS)?,
                },
                "heta" => ChainSource::Heta {
                    d: num("d", get("d")?)?,
                    eta: num("eta", get("eta")?)?,
                    family_epsilon: num("family_epsilon", get("family_epsilon")?)?,
                    members: opt_num("members", DEFAULT_MEMBERS)?,
                },
                other => return Err(Error::Parse(format!("chain: unknown source '{other}'"))),
            }
        };
        let m_grid = get("m_grid")?
            .split(',')
            .map(|t| num("m_grid", t.trim()))
            .collect::<Result<Vec<u64>>>()?;
        let initial_law = match kv.get("initial_law") {
            None | Some("stationary") => InitialLaw::Stationary,
            Some(list) => InitialLaw::Explicit(ProbDist::new(
                list.split(',')
                    .map(|t| num("initial_law", t.trim()))
                    .collect::<Result<Vec<f64>>>()?,
            )?),
        };
        let config = SweepConfig {
            source,
            epsilon: num("epsilon", get("epsilon")?)?,
            m_grid,
            trials_per_m: num("trials_per_m", get("trials_per_m")?)?,
            master_seed: num("master_seed", get("master_seed")?)?,
            initial_law,
            norm: kv.get("norm").map_or(Ok(Norm::Tv), |v| v.parse())?,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskRow {
    pub m: u64,
    pub empirical_risk: f64,
    pub trials: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub median_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RiskCurve {
    pub rows: Vec<RiskRow>,
}

impl RiskCurve {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_VERSION_LINE}\n{CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.m,
                format_real(r.empirical_risk),
                r.trials,
                format_real(r.ci_low),
                format_real(r.ci_high),
                format_real(r.median_error)
            ));
        }
        out
    }
}

/// Outcome of a sweep. For ensembles, `mixture` pools every trial (members
/// drawn uniformly) and `worst_member` keeps, per `m`, the member with the
/// highest empirical risk among the trials that drew it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mixture: RiskCurve,
    pub worst_member: Option<RiskCurve>,
    pub members: usize,
}

/// Wilson score interval at `z = 1.96`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    const Z: f64 = 1.96;
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    0.5 * (values[(n - 1) / 2] + values[n / 2])
}

fn summarize(m: u64, errors: &mut [f64], epsilon: f64) -> RiskRow {
    let failures = errors.iter().filter(|&&e| e > epsilon).count();
    let (ci_low, ci_high) = wilson_interval(failures, errors.len());
    RiskRow {
        m,
        empirical_risk: failures as f64 / errors.len() as f64,
        trials: errors.len(),
        ci_low,
        ci_high,
        median_error: median(errors),
    }
}

struct Member {
    chain: StochasticMatrix,
    sampler: ChainSampler,
    initial: ProbDist,
}

fn members_of(config: &SweepConfig) -> Result<Vec<StochasticMatrix>> {
    Ok(match &config.source {
        ChainSource::Matrix(m) => vec![m.clone()],
        ChainSource::Gp {
            d,
            p_star,
            family_epsilon,
            members,
        } => {
            let dist = (*d / 16).max(1) as u32;
            let book = varshamov_gilbert(d / 2, dist, Some((*members).max(1)))?;
            (0..book.len())
                .map(|i| gp_perturbed(*d, *p_star, *family_epsilon, &book.word_bits(i)))
                .collect::<Result<_>>()?
        }
        ChainSource::Heta {
            d,
            eta,
            family_epsilon,
            members,
        } => {
            let book = varshamov_gilbert(d / 3, 1, Some((*members).max(1)))?;
            (0..book.len())
                .map(|i| build_heta(&HEtaParams::new(*d, *eta, *family_epsilon, book.word_bits(i))?))
                .collect::<Result<_>>()?
        }
    })
}

// Salt separating the member draw from the trajectory seed.
const MEMBER_DRAW: u64 = 0x6d65_6d62;

/// Runs the sweep on the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let members = members_of(config)?
        .into_iter()
        .map(|chain| {
            let initial = match &config.initial_law {
                InitialLaw::Stationary => stationary_distribution(&chain)?,
                InitialLaw::Explicit(mu) => {
                    check_dim(chain.dim(), mu.dim())?;
                    mu.clone()
                }
            };
            Ok(Member {
                sampler: ChainSampler::new(&chain),
                chain,
                initial,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k = members.len() as u64;
    let ensemble = members.len() > 1;

    let mut mixture = RiskCurve::default();
    let mut worst = RiskCurve::default();
    for &m in &config.m_grid {
        let outcomes: Vec<(usize, f64)> = (0..config.trials_per_m as u64)
            .into_par_iter()
            .map(|trial| {
                let member = if ensemble {
                    (derive_seed(config.master_seed, &[m, trial, MEMBER_DRAW]) % k) as usize
                } else {
                    0
                };
                let mb = &members[member];
                let seed = derive_seed(config.master_seed, &[m, trial, member as u64]);
                let counts = sample_counts_with(&mb.sampler, &mb.initial, m as usize, seed);
                count_error(&mb.chain, &counts, config.norm).map(|e| (member, e))
            })
            .collect::<Result<_>>()?;

        let mut all: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
        mixture.rows.push(summarize(m, &mut all, config.epsilon));

        if ensemble {
            let worst_row = (0..members.len())
                .filter_map(|j| {
                    let mut errs: Vec<f64> = outcomes.iter().filter(|o| o.0 == j).map(|o| o.1).collect();
                    (!errs.is_empty()).then(|| summarize(m, &mut errs, config.epsilon))
                })
                .max_by(|a, b| a.empirical_risk.total_cmp(&b.empirical_risk))
                .expect("at least one trial per grid point");
            worst.rows.push(worst_row);
        }
    }
    Ok(SweepResult {
        mixture,
        worst_member: ensemble.then_some(worst),
        members: members.len(),
    })
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Runs the sweep on a dedicated pool with `threads` workers.
pub fn run_sweep_with_threads(config: &SweepConfig, threads: usize) -> Result<SweepResult> {
    with_threads(threads, || run_sweep(config))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    /// Smallest grid `m` with `empirical_risk ≤ target`.
    pub m_star: u64,
    /// Least-squares slope of `ln(median_error)` against `ln(m)`.
    pub fit_exponent: f64,
}

pub fn scaling_fit(curve: &RiskCurve, target_risk: f64) -> Result<ScalingFit> {
    let m_star = curve
        .rows
        .iter()
        .find(|r| r.empirical_risk <= target_risk)
        .map(|r| r.m)
        .ok_or(Error::NoCrossing)?;
    Ok(ScalingFit {
        m_star,
        fit_exponent: log_log_slope(curve),
    })
}

/// Slope of `ln(median_error)` on `ln(m)` over rows with positive median.
/// `NaN` when fewer than two rows qualify.
pub fn log_log_slope(curve: &RiskCurve) -> f64 {
    let pts: Vec<(f64, f64)> = curve
        .rows
        .iter()
        .filter(|r| r.median_error > 0.0)
        .map(|r| ((r.m as f64).ln(), r.median_error.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Gnuplot script plotting a curve CSV on log-scaled `m`.
pub fn gnuplot_script(csv_path: &str, epsilon: f64) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale x\n\
         set xlabel 'm'\n\
         set ylabel 'P(error > {epsilon})'\n\
         set yrange [0:1]\n\
         plot '{csv_path}' using 1:4:5 with filledcurves title 'Wilson 95%' fillstyle transparent solid 0.2, \\\n     \
         '' using 1:2 with linespoints title 'empirical risk'\n"
    )
}
