//! The two lower-bound families: `G_p`, whose members differ only in the
//! row of one rarely visited state, and `H_η`, an inner clique with a slow
//! rim attached to every clique state.
//!
//! Sign vectors `σ ∈ {−1, +1}^n` and `τ ∈ {0, 1}^n` are both stored as
//! `bool` slices. For `σ` the mapping is `true ↦ +1`, `false ↦ −1`.

use rayon::prelude::*;

use crate::chain::{ProbDist, StochasticMatrix};
use crate::error::{Error, Result};
use crate::io::{format_real, KvBlock};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

/// Parameters of a `G_p` member on `d + 1` states.
#[derive(Debug, Clone, PartialEq)]
pub struct GpParams {
    pub d: usize,
    pub p_star: f64,
    /// Row of the last state; its last entry must equal `p_star`.
    pub eta: ProbDist,
}

impl GpParams {
    pub fn new(d: usize, p_star: f64, eta: ProbDist) -> Result<Self> {
        let params = Self { d, p_star, eta };
        params.validate()?;
        Ok(params)
    }

    /// The unperturbed member, `η_k = (1 − p*)/d`.
    pub fn uniform(d: usize, p_star: f64) -> Result<Self> {
        let eta = gp_base_eta(d, p_star)?;
        Self::new(d, p_star, eta)
    }

    fn validate(&self) -> Result<()> {
        let d = self.d;
        if d < 1 {
            return Err(invalid("d must be at least 1"));
        }
        if !(self.p_star > 0.0 && self.p_star < 1.0 / (d as f64 + 2.0)) {
            return Err(invalid(format!("p_star = {} (need 0 < p_star < 1/(d+2))", self.p_star)));
        }
        if self.eta.dim() != d + 1 {
            return Err(invalid(format!("eta has {} entries, expected {}", self.eta.dim(), d + 1)));
        }
        if (self.eta.get(d) - self.p_star).abs() > 1e-12 {
            return Err(invalid("last entry of eta must equal p_star"));
        }
        Ok(())
    }

    /// `π_k = (1 − p*)²/d + η_k p*` for `k ≤ d`, and `π_{d+1} = p*`.
    pub fn stationary_closed_form(&self) -> Vec<f64> {
        let (d, p) = (self.d, self.p_star);
        let mut pi: Vec<f64> = (0..d)
            .map(|k| (1.0 - p).powi(2) / d as f64 + self.eta.get(k) * p)
            .collect();
        pi.push(p);
        pi
    }

    pub fn closed_form(&self) -> KvBlock {
        let pi = self.stationary_closed_form();
        let mut kv = KvBlock::new();
        kv.push(
            "closed.stationary",
            pi.iter().map(|&x| format_real(x)).collect::<Vec<_>>().join(","),
        )
        .push_real("closed.pi_min", pi.iter().cloned().fold(f64::INFINITY, f64::min));
        kv
    }
}

fn gp_base_eta(d: usize, p_star: f64) -> Result<ProbDist> {
    let mut w = vec![(1.0 - p_star) / d as f64; d];
    w.push(p_star);
    ProbDist::new(w).map_err(|_| invalid(format!("p_star = {p_star}")))
}

/// Rows `1..d` equal `(p_1, …, p_d, p*)` with `p_k = (1 − p*)/d`; the last
/// row is `η`.
pub fn build_gp(params: &GpParams) -> Result<StochasticMatrix> {
    params.validate()?;
    let d = params.d;
    let mut common = vec![(1.0 - params.p_star) / d as f64; d];
    common.push(params.p_star);
    let mut rows = vec![common; d];
    rows.push(params.eta.as_slice().to_vec());
    StochasticMatrix::from_rows(&rows)
}

/// `η(σ) = ((1 − p* + 16σ₁ε)/d, (1 − p* − 16σ₁ε)/d, …, p*)`.
pub fn gp_eta_sigma(d: usize, p_star: f64, epsilon: f64, sigma: &[bool]) -> Result<ProbDist> {
    if !d.is_multiple_of(2) || sigma.len() != d / 2 {
        return Err(invalid(format!("sigma must have d/2 entries with d even (d = {d})")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / 32.0) {
        return Err(invalid(format!("epsilon = {epsilon} (need 0 < epsilon < 1/32)")));
    }
    let mut w = Vec::with_capacity(d + 1);
    for &s in sigma {
        let shift = if s { 16.0 * epsilon } else { -16.0 * epsilon };
        w.push((1.0 - p_star + shift) / d as f64);
        w.push((1.0 - p_star - shift) / d as f64);
    }
    w.push(p_star);
    if w.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::PerturbationOutOfSimplex);
    }
    ProbDist::new(w)
}

/// The `G_p` member `M_σ`.
pub fn gp_perturbed(d: usize, p_star: f64, epsilon: f64, sigma: &[bool]) -> Result<StochasticMatrix> {
    let eta = gp_eta_sigma(d, p_star, epsilon, sigma)?;
    build_gp(&GpParams::new(d, p_star, eta)?)
}

/// `M_0`, the center of the perturbation.
pub fn gp_center(d: usize, p_star: f64) -> Result<StochasticMatrix> {
    build_gp(&GpParams::uniform(d, p_star)?)
}

/// `Σ p_i ln(p_i/q_i)` with `0 ln 0 = 0`.
pub fn kl_divergence(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    crate::chain::check_dim(p.dim(), q.dim())?;
    let mut kl = 0.0;
    for (i, (&a, &b)) in p.as_slice().iter().zip(q.as_slice()).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::SupportViolation(i + 1));
            }
            kl += a * (a / b).ln();
        }
    }
    Ok(kl)
}

/// Upper limit on the number of words [`kl_words_exact`] enumerates.
pub const KL_WORDS_MAX: u128 = 10_000_000;

/// Exact KL divergence between the laws of length-`m` words drawn from `M1`
/// and `M2` with the same initial law, by enumerating every word.
pub fn kl_words_exact(m1: &StochasticMatrix, m2: &StochasticMatrix, mu: &ProbDist, m: usize) -> Result<f64> {
    crate::chain::check_dim(m1.dim(), m2.dim())?;
    crate::chain::check_dim(m1.dim(), mu.dim())?;
    let d = m1.dim();
    if m == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let words = (d as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if words > KL_WORDS_MAX {
        return Err(Error::TooLargeForExact(words));
    }

    fn walk(
        m1: &StochasticMatrix,
        m2: &StochasticMatrix,
        state: usize,
        p1: f64,
        p2: f64,
        remaining: usize,
    ) -> Result<f64> {
        if remaining == 0 {
            return Ok(p1 * (p1 / p2).ln());
        }
        let mut total = 0.0;
        for next in 0..m1.dim() {
            let a = p1 * m1.get(state, next);
            if a == 0.0 {
                continue;
            }
            let b = p2 * m2.get(state, next);
            if b == 0.0 {
                return Err(Error::SupportViolation(next + 1));
            }
            total += walk(m1, m2, next, a, b, remaining - 1)?;
        }
        Ok(total)
    }

    // One task per first state; partial sums are added in state order.
    let parts: Vec<Result<f64>> = (0..d)
        .into_par_iter()
        .map(|x| {
            let p = mu.get(x);
            if p == 0.0 {
                Ok(0.0)
            } else {
                walk(m1, m2, x, p, p, m - 1)
            }
        })
        .collect();
    parts.into_iter().sum()
}

/// A binary code with guaranteed pairwise Hamming distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    pub n: usize,
    /// Bit `j` of a word is coordinate `j`.
    pub words: Vec<u64>,
    pub min_distance: u32,
}

impl Codebook {
    pub fn word_bits(&self, index: usize) -> Vec<bool> {
        (0..self.n).map(|j| self.words[index] >> j & 1 == 1).collect()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Smallest pairwise distance actually present, or `None` below two words.
    pub fn measured_min_distance(&self) -> Option<u32> {
        let mut best: Option<u32> = None;
        for (i, a) in self.words.iter().enumerate() {
            for b in &self.words[i + 1..] {
                let dist = (a ^ b).count_ones();
                best = Some(best.map_or(dist, |x| x.min(dist)));
            }
        }
        best
    }
}

/// Greedy lexicographic packing: scans `0, 1, 2, …` and keeps each word at
/// distance at least `min_dist` from every kept word. Stops after `limit`
/// words when one is given.
pub fn varshamov_gilbert(n: usize, min_dist: u32, limit: Option<usize>) -> Result<Codebook> {
    if n == 0 || n > 63 {
        return Err(invalid(format!("n = {n} (need 1 <= n <= 63)")));
    }
    if min_dist < 1 || min_dist as usize > n {
        return Err(invalid(format!("min_dist = {min_dist} (need 1 <= min_dist <= n)")));
    }
    let cap = limit.unwrap_or(usize::MAX);
    let mut words: Vec<u64> = Vec::new();
    for w in 0..(1u64 << n) {
        if words.len() >= cap {
            break;
        }
        if words.iter().all(|&k| (k ^ w).count_ones() >= min_dist) {
            words.push(w);
        }
    }
    Ok(Codebook {
        n,
        words,
        min_distance: min_dist,
    })
}

/// Parameters of an `H_η` member.
#[derive(Debug, Clone, PartialEq)]
pub struct HEtaParams {
    pub d: usize,
    pub eta: f64,
    pub epsilon: f64,
    /// One bit per clique state, length `d/3`.
    pub tau: Vec<bool>,
}

impl HEtaParams {
    pub fn new(d: usize, eta: f64, epsilon: f64, tau: Vec<bool>) -> Result<Self> {
        let params = Self { d, eta, epsilon, tau };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if !self.d.is_multiple_of(6) || self.d < 12 {
            return Err(invalid(format!("d = {} (need d = 6k, k >= 2)", self.d)));
        }
        check_eta(self.eta)?;
        if !(self.epsilon > 0.0 && self.epsilon <= 0.125) {
            return Err(invalid(format!("epsilon = {} (need 0 < epsilon <= 1/8)", self.epsilon)));
        }
        if self.tau.len() != self.d / 3 {
            return Err(invalid(format!("tau has {} bits, expected {}", self.tau.len(), self.d / 3)));
        }
        Ok(())
    }

    pub fn clique_size(&self) -> usize {
        self.d / 3
    }

    pub fn tau_weight(&self) -> usize {
        self.tau.iter().filter(|&&t| t).count()
    }

    pub fn closed_form(&self) -> Result<KvBlock> {
        let mut kv = KvBlock::new();
        kv.push_real("closed.pi_min", 1.0 / self.d as f64)
            .push("closed.reversible", true)
            .push_real("closed.kappa_squared", heta_kappa_squared_closed_form(self)?)
            .push_real("closed.cheeger", heta_cheeger_closed_form(self))
            .push_real("closed.gamma_lower", self.eta / 64.0)
            .push_real("closed.gamma_upper", 6.0 * self.eta);
        Ok(kv)
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 / 48.0 {
        Ok(())
    } else {
        Err(invalid(format!("eta = {eta} (need 0 < eta < 1/48)")))
    }
}

/// Assembles `[[C_η, R_τ], [R_τᵀ, L_τ]]`. Clique states come first; the rim
/// pair of clique state `i` sits at `d/3 + 2i` and `d/3 + 2i + 1`.
pub fn build_heta(params: &HEtaParams) -> Result<StochasticMatrix> {
    params.validate()?;
    let (d, n, eta, eps) = (params.d, params.clique_size(), params.eta, params.epsilon);
    let mut rows = vec![vec![0.0; d]; d];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = if i == j { 0.75 - eta } else { eta / (n - 1) as f64 };
        }
        let t = if params.tau[i] { 4.0 * eps } else { 0.0 };
        let (a, b) = (n + 2 * i, n + 2 * i + 1);
        rows[i][a] = (1.0 + t) / 8.0;
        rows[i][b] = (1.0 - t) / 8.0;
        rows[a][i] = (1.0 + t) / 8.0;
        rows[b][i] = (1.0 - t) / 8.0;
        rows[a][a] = (7.0 - t) / 8.0;
        rows[b][b] = (7.0 + t) / 8.0;
    }
    StochasticMatrix::from_rows(&rows)
}

/// `κ(M²)` for `M = M_{η,τ}`, with `c = 1 + 1/(d/3 − 1)`:
///
/// * `τ = 0`: `1 − (η/8)c`
/// * one bit of `τ` set: `1 − (η/8)c + ηε/2`
/// * two or more bits set: `1 − η(1/8 − ε/2)c`
pub fn heta_kappa_squared_closed_form(params: &HEtaParams) -> Result<f64> {
    params.validate()?;
    let n = params.clique_size() as f64;
    let c = n / (n - 1.0);
    let (eta, eps) = (params.eta, params.epsilon);
    Ok(match params.tau_weight() {
        0 => 1.0 - eta / 8.0 * c,
        1 => 1.0 - eta / 8.0 * c + eta * eps / 2.0,
        _ => 1.0 - eta * (0.125 - eps / 2.0) * c,
    })
}

/// The two-case form `1 − η(1/8 − ε/2)(1 + 1/(d/3 − 1))`, with `ε` read as
/// zero when `τ = 0`. It misses the single-bit case.
pub fn heta_kappa_squared_two_case(params: &HEtaParams) -> Result<f64> {
    params.validate()?;
    let n = params.clique_size() as f64;
    let eps = if params.tau_weight() == 0 { 0.0 } else { params.epsilon };
    Ok(1.0 - params.eta * (0.125 - eps / 2.0) * n / (n - 1.0))
}

/// `Φ(M_{η,τ}) = (n − ⌊n/2⌋)η/(3(n − 1))` with `n = d/3`, attained by half of
/// the clique together with its rim states. It does not depend on `τ` or `ε`.
pub fn heta_cheeger_closed_form(params: &HEtaParams) -> f64 {
    let n = params.clique_size();
    (n - n / 2) as f64 * params.eta / (3.0 * (n - 1) as f64)
}

/// `M_I`: the clique with the rim removed, diagonal `1 − η` and off-diagonal
/// `η/(d/3 − 1)`.
pub fn inner_clique_chain(d: usize, eta: f64) -> Result<StochasticMatrix> {
    if !d.is_multiple_of(6) || d < 12 {
        return Err(invalid(format!("d = {d} (need d = 6k, k >= 2)")));
    }
    check_eta(eta)?;
    let n = d / 3;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 - eta } else { eta / (n - 1) as f64 })
                .collect()
        })
        .collect();
    StochasticMatrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{is_ergodic, is_reversible, stationary_distribution, tv_matrix_norm};
    use crate::sampler::rng_from_seed;
    use crate::spectral::{cheeger, dobrushin, reversible_spectrum};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_tau<R: Rng>(n: usize, rng: &mut R) -> Vec<bool> {
        (0..n).map(|_| rng.random_bool(0.5)).collect()
    }

    fn random_heta(seed: u64, d: usize) -> HEtaParams {
        let mut rng = rng_from_seed(seed);
        let eta = rng.random_range(1e-4..1.0 / 48.0);
        let eps = rng.random_range(1e-3..=0.125);
        let tau = random_tau(d / 3, &mut rng);
        HEtaParams::new(d, eta, eps, tau).unwrap()
    }

    #[test]
    fn gp_stationary_example() {
        let params = GpParams::uniform(4, 0.1).unwrap();
        let m = build_gp(&params).unwrap();
        let pi = stationary_distribution(&m).unwrap();
        for (k, &v) in pi.as_slice().iter().enumerate() {
            let expected = if k < 4 { 0.225 } else { 0.1 };
            assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
        }
        assert_eq!(params.stationary_closed_form().len(), 5);
    }

    #[test]
    fn gp_stationary_closed_form_random_eta() {
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let d = rng.random_range(2..10);
            let p = rng.random_range(0.001..1.0 / (d as f64 + 2.0));
            let mut w: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x *= (1.0 - p) / s);
            w.push(p);
            let params = GpParams::new(d, p, ProbDist::new(w).unwrap()).unwrap();
            let m = build_gp(&params).unwrap();
            assert!(is_ergodic(&m));
            let pi = stationary_distribution(&m).unwrap();
            for (a, b) in pi.as_slice().iter().zip(params.stationary_closed_form()) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn gp_params_are_validated() {
        assert!(GpParams::uniform(4, 1.0 / 6.0).is_err());
        assert!(GpParams::uniform(4, 0.0).is_err());
        let eta = ProbDist::new(vec![0.2, 0.2, 0.2, 0.2, 0.2]).unwrap();
        assert!(matches!(GpParams::new(4, 0.1, eta), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn gp_perturbation_distances() {
        let (d, p, eps) = (8, 0.05, 0.02);
        let center = gp_center(d, p).unwrap();
        let plus = vec![true; d / 2];
        let minus = vec![false; d / 2];
        let m_plus = gp_perturbed(d, p, eps, &plus).unwrap();
        let m_minus = gp_perturbed(d, p, eps, &minus).unwrap();
        assert_abs_diff_eq!(tv_matrix_norm(&m_plus.difference(&center)), 16.0 * eps, epsilon = 1e-12);
        assert_abs_diff_eq!(tv_matrix_norm(&m_minus.difference(&center)), 16.0 * eps, epsilon = 1e-12);
        // Flipping all d/2 signs moves each of the d entries by 32ε/d.
        let direct: f64 = (0..=d).map(|j| (m_plus.get(d, j) - m_minus.get(d, j)).abs()).sum();
        assert_abs_diff_eq!(direct, 32.0 * eps, epsilon = 1e-12);
        let a = gp_eta_sigma(d, p, eps, &plus).unwrap();
        let b = gp_eta_sigma(d, p, eps, &minus).unwrap();
        assert_abs_diff_eq!(a.l1_distance(&b), 64.0 * eps / d as f64 * (d / 2) as f64, epsilon = 1e-12);
    }

    #[test]
    fn gp_perturbation_errors() {
        assert!(matches!(gp_perturbed(5, 0.05, 0.01, &[true, false]), Err(Error::InvalidParams(_))));
        assert!(matches!(gp_perturbed(4, 0.05, 0.05, &[true, false]), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn kl_examples() {
        let p = ProbDist::new(vec![0.5, 0.5]).unwrap();
        let q = ProbDist::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let oracle = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(kl_divergence(&p, &q).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle, 0.143841, epsilon = 1e-6);
        let r = ProbDist::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(kl_divergence(&p, &r), Err(Error::SupportViolation(2)));
        assert!(kl_divergence(&r, &p).unwrap() > 0.0);
    }

    #[test]
    fn kl_eta_second_order_value() {
        // Σ over d/2 pairs of a[(1+x)ln(1+x) + (1−x)ln(1−x)] with a = (1−p*)/d,
        // x = 16ε/(1−p*), whose leading term is 128ε²/(1−p*).
        let (d, p, eps) = (6, 0.1, 0.01);
        let a = (1.0 - p) / d as f64;
        let x = 16.0 * eps / (1.0 - p);
        let oracle = d as f64 / 2.0 * a * ((1.0 + x) * (1.0 + x).ln() + (1.0 - x) * (1.0 - x).ln());
        let kl = kl_divergence(
            &gp_eta_sigma(d, p, eps, &[true, false, true]).unwrap(),
            &GpParams::uniform(d, p).unwrap().eta,
        )
        .unwrap();
        assert_abs_diff_eq!(kl, oracle, epsilon = 1e-15);
        assert!(kl >= 128.0 * eps * eps / (1.0 - p));
    }

    /// Chain rule: KL of words = KL(μ‖μ) + Σ_t E_{X_t ~ μM1^{t−1}} KL(M1(X_t,·)‖M2(X_t,·)).
    fn kl_words_chain_rule(m1: &StochasticMatrix, m2: &StochasticMatrix, mu: &ProbDist, m: usize) -> f64 {
        let mut law = mu.as_slice().to_vec();
        let mut total = 0.0;
        for _ in 1..m {
            for (x, &w) in law.iter().enumerate() {
                if w > 0.0 {
                    let r1 = ProbDist::new(m1.row(x).to_vec()).unwrap();
                    let r2 = ProbDist::new(m2.row(x).to_vec()).unwrap();
                    total += w * kl_divergence(&r1, &r2).unwrap();
                }
            }
            law = m1.left_apply(&law);
        }
        total
    }

    #[test]
    fn kl_words_matches_chain_rule_and_per_step_accounting() {
        let (d, p) = (4, 0.1);
        let mut rng = rng_from_seed(10);
        for _ in 0..5 {
            let e1 = rng.random_range(0.001..1.0 / 32.0);
            let e2 = rng.random_range(0.001..1.0 / 32.0);
            let s1 = random_tau(d / 2, &mut rng);
            let s2 = random_tau(d / 2, &mut rng);
            let m1 = gp_perturbed(d, p, e1, &s1).unwrap();
            let m2 = gp_perturbed(d, p, e2, &s2).unwrap();
            let mu = GpParams::uniform(d, p).unwrap().eta;
            let kl_eta = kl_divergence(
                &gp_eta_sigma(d, p, e1, &s1).unwrap(),
                &gp_eta_sigma(d, p, e2, &s2).unwrap(),
            )
            .unwrap();
            for m in 1..=6 {
                let exact = kl_words_exact(&m1, &m2, &mu, m).unwrap();
                assert_abs_diff_eq!(exact, kl_words_chain_rule(&m1, &m2, &mu, m), epsilon = 1e-12);
                assert_abs_diff_eq!(exact, p * (m - 1) as f64 * kl_eta, epsilon = 1e-12);
                assert!(exact <= p * m as f64 * kl_eta + 1e-12);
            }
        }
    }

    #[test]
    fn kl_words_identity_and_limits() {
        let m = gp_center(3, 0.1).unwrap();
        let mu = ProbDist::uniform(4);
        assert_eq!(kl_words_exact(&m, &m, &mu, 5).unwrap(), 0.0);
        assert_eq!(kl_words_exact(&m, &m, &mu, 12), Err(Error::TooLargeForExact(4u128.pow(12))));
    }

    #[test]
    fn codebook_examples() {
        let all = varshamov_gilbert(4, 1, None).unwrap();
        assert_eq!(all.len(), 16);
        let even = varshamov_gilbert(16, 2, None).unwrap();
        assert_eq!(even.len(), 1 << 15);
        assert!(even.words.iter().all(|w| w.count_ones() % 2 == 0));
        for d in [32usize, 48, 96] {
            let book = varshamov_gilbert(d / 2, (d / 16) as u32, Some(1 << (d / 16))).unwrap();
            assert_eq!(book.len(), 1 << (d / 16), "d = {d}");
            assert!(book.measured_min_distance().unwrap() >= (d / 16) as u32);
        }
        assert!(varshamov_gilbert(4, 5, None).is_err());
        assert_eq!(varshamov_gilbert(3, 3, None).unwrap().word_bits(1), vec![true; 3]);
    }

    #[test]
    fn heta_structure() {
        for seed in 0..10 {
            for d in [12, 18, 24] {
                let params = random_heta(seed, d);
                let m = build_heta(&params).unwrap();
                assert!(is_ergodic(&m));
                let pi = stationary_distribution(&m).unwrap();
                assert!(pi.as_slice().iter().all(|&v| (v - 1.0 / d as f64).abs() < 1e-12));
                assert!(is_reversible(&m, &pi));
                for row in m.rows() {
                    assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn heta_neighbors_are_epsilon_apart() {
        let params = random_heta(1, 12);
        let mut other = params.clone();
        other.tau = params.tau.iter().map(|t| !t).collect();
        let diff = build_heta(&params).unwrap().difference(&build_heta(&other).unwrap());
        assert_abs_diff_eq!(tv_matrix_norm(&diff), params.epsilon, epsilon = 1e-15);
    }

    #[test]
    fn heta_params_are_validated() {
        let tau = vec![false; 4];
        assert!(HEtaParams::new(12, 1.0 / 48.0, 0.1, tau.clone()).is_err());
        assert!(HEtaParams::new(12, 0.01, 0.2, tau.clone()).is_err());
        assert!(HEtaParams::new(15, 0.01, 0.1, vec![false; 5]).is_err());
        assert!(HEtaParams::new(12, 0.01, 0.1, vec![false; 3]).is_err());
        assert!(HEtaParams::new(12, 0.01, 0.125, tau).is_ok());
    }

    #[test]
    fn kappa_squared_examples() {
        let zero = HEtaParams::new(12, 0.01, 0.1, vec![false; 4]).unwrap();
        assert_abs_diff_eq!(heta_kappa_squared_closed_form(&zero).unwrap(), 1.0 - 0.01 / 8.0 * 4.0 / 3.0, epsilon = 1e-15);
        let ones = HEtaParams::new(12, 0.01, 0.1, vec![true; 4]).unwrap();
        assert_abs_diff_eq!(heta_kappa_squared_closed_form(&ones).unwrap(), 0.999, epsilon = 1e-15);
        assert_eq!(
            heta_kappa_squared_closed_form(&ones).unwrap(),
            heta_kappa_squared_two_case(&ones).unwrap()
        );
    }

    #[test]
    fn kappa_squared_matches_brute_force() {
        for seed in 0..60 {
            let d = [12, 18, 24][seed as usize % 3];
            let mut params = random_heta(100 + seed, d);
            if seed % 5 == 0 {
                params.tau = vec![false; d / 3];
                params.tau[seed as usize % (d / 3)] = true;
            }
            let m = build_heta(&params).unwrap();
            let brute = dobrushin(&m.power(2));
            let closed = heta_kappa_squared_closed_form(&params).unwrap();
            assert_abs_diff_eq!(brute, closed, epsilon = 1e-12);
            assert!(closed <= 1.0 - params.eta / 16.0);
        }
    }

    #[test]
    fn cheeger_closed_form_matches_enumeration() {
        for seed in 0..4 {
            for d in [12, 18] {
                let params = random_heta(200 + seed, d);
                let m = build_heta(&params).unwrap();
                let phi = cheeger(&m, &ProbDist::uniform(d)).unwrap();
                assert_abs_diff_eq!(phi, heta_cheeger_closed_form(&params), epsilon = 1e-12);
            }
        }
        let d12 = random_heta(0, 12);
        assert_abs_diff_eq!(heta_cheeger_closed_form(&d12), 2.0 * d12.eta / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn inner_clique_second_eigenvalue() {
        for (d, eta) in [(12, 0.01), (18, 0.02), (30, 0.005)] {
            let m = inner_clique_chain(d, eta).unwrap();
            let n = d / 3;
            let s = reversible_spectrum(&m, &ProbDist::uniform(n)).unwrap();
            assert_abs_diff_eq!(s.eigenvalues[1], 1.0 - eta * (1.0 + 1.0 / (n - 1) as f64), epsilon = 1e-12);
            for row in m.rows() {
                assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            }
        }
        assert!(inner_clique_chain(10, 0.01).is_err());
    }

    proptest! {
        #[test]
        fn codebook_distance_invariant(n in 1usize..=12, dist in 1u32..=6) {
            prop_assume!(dist as usize <= n);
            let book = varshamov_gilbert(n, dist, None).unwrap();
            if let Some(min) = book.measured_min_distance() {
                prop_assert!(min >= dist);
            }
        }
    }
}
