//! Numerical checks of the closed forms attached to the lower-bound
//! families and the spectral quantities, run on seeded random draws.
//!
//! Each check is stated exactly as printed, so a check can fail when a
//! printed closed form disagrees with brute force. The detail line always
//! carries the measured values.

use rand::Rng;

use crate::chain::{is_reversible, stationary_distribution, tv_matrix_norm, ProbDist, StochasticMatrix};
use crate::error::Result;
use crate::families::{
    build_gp, build_heta, gp_center, gp_eta_sigma, gp_perturbed, heta_cheeger_closed_form,
    heta_kappa_squared_closed_form, heta_kappa_squared_two_case, kl_divergence, kl_words_exact, GpParams,
    HEtaParams,
};
use crate::sampler::{derive_seed, rng_from_seed};
use crate::spectral::{cheeger, dobrushin, pseudo_spectral_gap, reversible_spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for LemmaCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

pub const CLOSED_FORM_TOL: f64 = 1e-12;

/// Draws `η ∈ (0, 1/48)`, `ε ∈ (0, 1/8]` and a uniform `τ`.
pub fn random_heta_params<R: Rng>(d: usize, rng: &mut R) -> HEtaParams {
    let eta = rng.random_range(1e-4..1.0 / 48.0);
    let epsilon = rng.random_range(1e-3..=0.125);
    let tau = (0..d / 3).map(|_| rng.random_bool(0.5)).collect();
    HEtaParams {
        d,
        eta,
        epsilon,
        tau,
    }
}

/// A random symmetric chain with every diagonal entry at least ½, hence
/// positive semidefinite.
pub fn random_lazy_symmetric<R: Rng>(d: usize, rng: &mut R) -> StochasticMatrix {
    let mut s = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let x = rng.random::<f64>() / d as f64;
            s[i][j] = x;
            s[j][i] = x;
        }
    }
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let off: f64 = s[i].iter().sum();
            (0..d)
                .map(|j| if i == j { 1.0 - 0.5 * off } else { 0.5 * s[i][j] })
                .collect()
        })
        .collect();
    StochasticMatrix::from_rows(&rows).expect("rows are stochastic by construction")
}

fn check(name: &'static str, passed: bool, detail: String) -> LemmaCheck {
    LemmaCheck { name, passed, detail }
}

/// `Φ(M_{η,τ}) = 3η` at `d = 12`.
pub fn cheeger_constant(seed: u64, draws: usize) -> Result<LemmaCheck> {
    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
    let mut worst: f64 = 0.0;
    let mut worst_corrected: f64 = 0.0;
    let mut ratio = 0.0;
    for _ in 0..draws {
        let p = random_heta_params(12, &mut rng);
        let phi = cheeger(&build_heta(&p)?, &ProbDist::uniform(12))?;
        worst = worst.max((phi - 3.0 * p.eta).abs());
        worst_corrected = worst_corrected.max((phi - heta_cheeger_closed_form(&p)).abs());
        ratio = phi / p.eta;
    }
    Ok(check(
        "cheeger-constant",
        worst <= CLOSED_FORM_TOL,
        format!(
            "max |Phi - 3 eta| = {worst:.3e} over {draws} draws at d=12 (Phi/eta = {ratio:.6}); \
             max |Phi - (n - floor(n/2)) eta/(3(n-1))| = {worst_corrected:.3e}"
        ),
    ))
}

/// `κ(M²)` of `H_η` against the closed form, and `κ(M²) ≤ 1 − η/16`.
pub fn dobrushin_coefficient(seed: u64, draws: usize) -> Result<LemmaCheck> {
    let mut rng = rng_from_seed(derive_seed(seed, &[2]));
    let mut worst: f64 = 0.0;
    let mut bound_ok = true;
    let mut two_case_misses = 0;
    for i in 0..draws {
        let d = [12, 18, 24][i % 3];
        let p = random_heta_params(d, &mut rng);
        let brute = dobrushin(&build_heta(&p)?.power(2));
        worst = worst.max((brute - heta_kappa_squared_closed_form(&p)?).abs());
        bound_ok &= brute <= 1.0 - p.eta / 16.0;
        if (brute - heta_kappa_squared_two_case(&p)?).abs() > CLOSED_FORM_TOL {
            two_case_misses += 1;
        }
    }
    Ok(check(
        "dobrushin-coefficient",
        worst <= CLOSED_FORM_TOL && bound_ok,
        format!(
            "max |kappa(M^2) - closed form| = {worst:.3e} over {draws} draws (d in 12,18,24); \
             kappa(M^2) <= 1 - eta/16: {bound_ok}; two-case form missed {two_case_misses}/{draws}"
        ),
    ))
}

/// `η/64 ≤ γ ≤ 6η`, `γ ≤ γ_ps ≤ 2γ` and `Φ²/2 ≤ γ ≤ 2Φ` on `H_η`.
pub fn control_spectral_gap(seed: u64, draws: usize) -> Result<LemmaCheck> {
    let mut rng = rng_from_seed(derive_seed(seed, &[3]));
    let (mut gap_ok, mut ps_ok, mut cheeger_ok) = (true, true, true);
    let mut lo_ratio = f64::INFINITY;
    let mut hi_ratio: f64 = 0.0;
    for i in 0..draws {
        let d = [12, 18, 24][i % 3];
        let p = random_heta_params(d, &mut rng);
        let m = build_heta(&p)?;
        let pi = ProbDist::uniform(d);
        let gamma = reversible_spectrum(&m, &pi)?.gap;
        let ps = pseudo_spectral_gap(&m, &pi, None)?.value;
        let phi = cheeger(&m, &pi)?;
        let tol = CLOSED_FORM_TOL;
        gap_ok &= p.eta / 64.0 <= gamma + tol && gamma <= 6.0 * p.eta + tol;
        ps_ok &= gamma <= ps + tol && ps <= 2.0 * gamma + tol;
        cheeger_ok &= phi * phi / 2.0 <= gamma + tol && gamma <= 2.0 * phi + tol;
        lo_ratio = lo_ratio.min(gamma / p.eta);
        hi_ratio = hi_ratio.max(gamma / p.eta);
    }
    Ok(check(
        "control-spectral-gap",
        gap_ok && ps_ok && cheeger_ok,
        format!(
            "gamma/eta in [{lo_ratio:.4}, {hi_ratio:.4}] over {draws} draws; eta/64 <= gamma <= 6 eta: {gap_ok}; \
             gamma <= gamma_ps <= 2 gamma: {ps_ok}; Phi^2/2 <= gamma <= 2 Phi: {cheeger_ok}"
        ),
    ))
}

/// `γ_ps = γ(2 − γ)` with maximizer `k = 1` for lazy symmetric chains.
pub fn symmetric_pseudo_gap(seed: u64, draws: usize) -> Result<LemmaCheck> {
    let mut rng = rng_from_seed(derive_seed(seed, &[4]));
    let mut worst: f64 = 0.0;
    let mut argmax_one = true;
    for _ in 0..draws {
        let d = rng.random_range(2..=10);
        let m = random_lazy_symmetric(d, &mut rng);
        let pi = ProbDist::uniform(d);
        let gamma = reversible_spectrum(&m, &pi)?.gap;
        let ps = pseudo_spectral_gap(&m, &pi, None)?;
        worst = worst.max((ps.value - gamma * (2.0 - gamma)).abs());
        argmax_one &= ps.argmax_k == 1;
    }
    Ok(check(
        "symmetric-pseudo-gap",
        worst <= 1e-9 && argmax_one,
        format!("max |gamma_ps - gamma(2 - gamma)| = {worst:.3e} over {draws} lazy symmetric chains; argmax k = 1: {argmax_one}"),
    ))
}

/// Stationary law, distances and `KL(η(σ)‖η₀) ≤ 128ε²` for `G_p`.
pub fn gp_closed_forms(seed: u64, draws: usize) -> Result<LemmaCheck> {
    let mut rng = rng_from_seed(derive_seed(seed, &[5]));
    let (mut pi_err, mut center_err, mut pair_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut kl_ratio: f64 = 0.0;
    for _ in 0..draws {
        let d = 2 * rng.random_range(1..=8);
        let p_star = rng.random_range(1e-3..1.0 / (d as f64 + 2.0));
        let eps = rng.random_range(1e-4..1.0 / 32.0);
        let s1: Vec<bool> = (0..d / 2).map(|_| rng.random_bool(0.5)).collect();
        let s2: Vec<bool> = (0..d / 2).map(|_| rng.random_bool(0.5)).collect();

        let eta1 = gp_eta_sigma(d, p_star, eps, &s1)?;
        let params = GpParams::new(d, p_star, eta1.clone())?;
        let pi = stationary_distribution(&build_gp(&params)?)?;
        for (a, b) in pi.as_slice().iter().zip(params.stationary_closed_form()) {
            pi_err = pi_err.max((a - b).abs());
        }

        let center = gp_center(d, p_star)?;
        let m1 = gp_perturbed(d, p_star, eps, &s1)?;
        center_err = center_err.max((tv_matrix_norm(&m1.difference(&center)) - 16.0 * eps).abs());

        let hamming = s1.iter().zip(&s2).filter(|(a, b)| a != b).count();
        let eta2 = gp_eta_sigma(d, p_star, eps, &s2)?;
        pair_err = pair_err.max((eta1.l1_distance(&eta2) - 32.0 * eps / d as f64 * hamming as f64).abs());

        let eta0 = GpParams::uniform(d, p_star)?.eta;
        kl_ratio = kl_ratio.max(kl_divergence(&eta1, &eta0)? / (128.0 * eps * eps));
    }
    let passed = pi_err <= 1e-10 && center_err <= CLOSED_FORM_TOL && pair_err <= CLOSED_FORM_TOL && kl_ratio <= 1.0;
    Ok(check(
        "gp-closed-forms",
        passed,
        format!(
            "over {draws} draws: max stationary error {pi_err:.3e}; max | |||M_s - M_0||| - 16 eps | = {center_err:.3e}; \
             max | ||eta(s) - eta(s')||_1 - (32 eps/d) d_H | = {pair_err:.3e}; max KL(eta(s)||eta_0)/(128 eps^2) = {kl_ratio:.6}"
        ),
    ))
}

/// `KL(M₁^m ‖ M₂^m) ≤ p* m KL(η₁‖η₂)` by exhaustive word enumeration.
pub fn tensorization_kl(seed: u64, pairs: usize) -> Result<LemmaCheck> {
    let mut rng = rng_from_seed(derive_seed(seed, &[6]));
    let (d, p_star) = (4, 0.1);
    let mu = GpParams::uniform(d, p_star)?.eta;
    let mut holds = true;
    let mut max_gap: f64 = 0.0;
    let mut per_step_err: f64 = 0.0;
    for _ in 0..pairs {
        let e1 = rng.random_range(1e-4..1.0 / 32.0);
        let e2 = rng.random_range(1e-4..1.0 / 32.0);
        let s1: Vec<bool> = (0..d / 2).map(|_| rng.random_bool(0.5)).collect();
        let s2: Vec<bool> = (0..d / 2).map(|_| rng.random_bool(0.5)).collect();
        let m1 = gp_perturbed(d, p_star, e1, &s1)?;
        let m2 = gp_perturbed(d, p_star, e2, &s2)?;
        let kl_eta = kl_divergence(&gp_eta_sigma(d, p_star, e1, &s1)?, &gp_eta_sigma(d, p_star, e2, &s2)?)?;
        for m in 2..=6 {
            let exact = kl_words_exact(&m1, &m2, &mu, m)?;
            let bound = p_star * m as f64 * kl_eta;
            holds &= exact <= bound + CLOSED_FORM_TOL;
            max_gap = max_gap.max(bound - exact);
            per_step_err = per_step_err.max((exact - p_star * (m - 1) as f64 * kl_eta).abs());
        }
    }
    Ok(check(
        "tensorization-kl",
        holds,
        format!(
            "{pairs} pairs, d=3 (4 states), p*=0.1, m=2..6: inequality holds: {holds}; max slack {max_gap:.3e}; \
             max |exact - p*(m-1) KL| = {per_step_err:.3e}"
        ),
    ))
}

/// Whether every `H_η` draw is reversible with uniform stationary law.
pub fn heta_structure(seed: u64, draws: usize) -> Result<LemmaCheck> {
    let mut rng = rng_from_seed(derive_seed(seed, &[7]));
    let mut ok = true;
    for i in 0..draws {
        let d = [12, 18, 24][i % 3];
        let m = build_heta(&random_heta_params(d, &mut rng))?;
        let pi = stationary_distribution(&m)?;
        ok &= is_reversible(&m, &pi) && pi.as_slice().iter().all(|&x| (x - 1.0 / d as f64).abs() <= 1e-12);
    }
    Ok(check("heta-structure", ok, format!("{draws} draws reversible with uniform pi: {ok}")))
}

/// The full suite with the draw counts used by `verify-lemmas`.
pub fn run_all(seed: u64) -> Result<Vec<LemmaCheck>> {
    Ok(vec![
        cheeger_constant(seed, 10)?,
        dobrushin_coefficient(seed, 50)?,
        control_spectral_gap(seed, 50)?,
        symmetric_pseudo_gap(seed, 20)?,
        gp_closed_forms(seed, 20)?,
        tensorization_kl(seed, 10)?,
        heta_structure(seed, 30)?,
    ])
}
