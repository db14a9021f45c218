//! Mixing diagnostics: spectral gap, pseudo-spectral gap, Dobrushin
//! contraction and the Cheeger constant.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::chain::{check_dim, is_ergodic, is_reversible, time_reversal, ProbDist, StochasticMatrix};
use crate::error::{Error, Result};
use crate::io::KvBlock;

/// Largest dimension accepted by the exhaustive [`cheeger`] computation.
pub const CHEEGER_MAX_DIM: usize = 25;

/// Slack on `π(S) ≤ ½` so that half-mass sets survive rounding in `π`.
const HALF_MASS_SLACK: f64 = 1e-12;

/// Real spectrum of a reversible chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// `λ_1 ≥ λ_2 ≥ … ≥ λ_d`.
    pub eigenvalues: Vec<f64>,
    /// `γ = 1 − λ_2`.
    pub gap: f64,
}

/// Result of the pseudo-spectral gap maximisation over `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoGap {
    pub value: f64,
    pub argmax_k: u32,
    /// The cap on `k` in force when the search stopped.
    pub k_cap_used: u32,
    /// Number of `k` actually evaluated.
    pub k_evaluated: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Present only for reversible chains.
    pub spectrum: Option<Spectrum>,
    pub pseudo: PseudoGap,
}

impl SpectralReport {
    pub fn to_kv(&self) -> KvBlock {
        let mut kv = KvBlock::new();
        if let Some(s) = &self.spectrum {
            let eig: Vec<String> = s.eigenvalues.iter().map(|&x| crate::io::format_real(x)).collect();
            kv.push("eigenvalues", eig.join(","));
            kv.push_real("gamma", s.gap);
        }
        kv.push_real("gamma_ps", self.pseudo.value)
            .push("gamma_ps_argmax_k", self.pseudo.argmax_k)
            .push("gamma_ps_k_cap", self.pseudo.k_cap_used);
        kv
    }
}

/// Eigenvalues of `D^{1/2} A D^{−1/2}` (`D = diag(π)`), sorted descending.
/// `A` must be reversible with respect to `π`; the symmetrization is
/// averaged with its transpose to remove rounding asymmetry.
fn symmetrized_eigenvalues(a: &StochasticMatrix, pi: &ProbDist) -> Vec<f64> {
    let d = a.dim();
    let sqrt_pi: Vec<f64> = pi.as_slice().iter().map(|p| p.sqrt()).collect();
    let s = DMatrix::from_fn(d, d, |i, j| {
        let forward = sqrt_pi[i] * a.get(i, j) / sqrt_pi[j];
        let backward = sqrt_pi[j] * a.get(j, i) / sqrt_pi[i];
        0.5 * (forward + backward)
    });
    let mut eig: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// Spectrum of a chain reversible with respect to `pi`.
pub fn reversible_spectrum(m: &StochasticMatrix, pi: &ProbDist) -> Result<Spectrum> {
    check_dim(m.dim(), pi.dim())?;
    if let Some(i) = (0..pi.dim()).find(|&i| pi.get(i) <= 0.0) {
        return Err(Error::ZeroStationaryMass(i + 1));
    }
    if !is_reversible(m, pi) {
        return Err(Error::NotReversible);
    }
    let eigenvalues = symmetrized_eigenvalues(m, pi);
    let gap = 1.0 - eigenvalues[1];
    Ok(Spectrum { eigenvalues, gap })
}

/// `γ_ps = max_{k ≥ 1} γ((M*)^k M^k) / k`.
///
/// The multiplicative reversiblization `(M*)^k M^k` is self-adjoint and
/// positive semi-definite in `L²(π)`, so its gap is at most 1 and the `k`-th
/// term is at most `1/k`. The search stops as soon as `1/(k+1)` cannot beat
/// the running maximum, or at the cap. The default cap is
/// `max(10·⌈1/γ_ps-so-far⌉, (d−1)²+1)`; the second term guarantees that
/// `M^k > 0` has been reached, so the running maximum is positive.
pub fn pseudo_spectral_gap(
    m: &StochasticMatrix,
    pi: &ProbDist,
    k_cap: Option<u32>,
) -> Result<PseudoGap> {
    check_dim(m.dim(), pi.dim())?;
    if !is_ergodic(m) {
        return Err(Error::NotErgodic);
    }
    if k_cap == Some(0) {
        return Err(Error::OutOfRange("k_cap = 0".into()));
    }
    let d = m.dim();
    let reversal = time_reversal(m, pi)?;
    let primitive_power = ((d - 1) * (d - 1) + 1) as u32;

    let mut forward = m.clone();
    let mut backward = reversal.clone();
    let mut best = 0.0f64;
    let mut argmax = 1;
    let mut k = 1u32;
    loop {
        let product = backward.compose(&forward);
        let eig = symmetrized_eigenvalues(&product, pi);
        let term = (1.0 - eig[1]) / k as f64;
        if term > best {
            best = term;
            argmax = k;
        }
        let cap = k_cap.unwrap_or_else(|| {
            let by_value = if best > 0.0 {
                (10.0 * (1.0 / best).ceil()).min(u32::MAX as f64) as u32
            } else {
                u32::MAX
            };
            by_value.max(primitive_power)
        });
        if k >= cap || 1.0 / (k as f64 + 1.0) <= best {
            return Ok(PseudoGap {
                value: best,
                argmax_k: argmax,
                k_cap_used: cap,
                k_evaluated: k,
            });
        }
        k += 1;
        forward = forward.compose(m);
        backward = backward.compose(&reversal);
    }
}

/// Spectrum (when reversible) together with the pseudo-spectral gap.
pub fn spectral_report(
    m: &StochasticMatrix,
    pi: &ProbDist,
    k_cap: Option<u32>,
) -> Result<SpectralReport> {
    let pseudo = pseudo_spectral_gap(m, pi, k_cap)?;
    let spectrum = match reversible_spectrum(m, pi) {
        Ok(s) => Some(s),
        Err(Error::NotReversible) => None,
        Err(e) => return Err(e),
    };
    Ok(SpectralReport { spectrum, pseudo })
}

/// Dobrushin coefficient `κ(M) = ½ max_{i,j} ‖M(i,·) − M(j,·)‖₁`.
pub fn dobrushin(m: &StochasticMatrix) -> f64 {
    let d = m.dim();
    let mut best = 0.0f64;
    for i in 0..d {
        for j in i + 1..d {
            let dist: f64 = m
                .row(i)
                .iter()
                .zip(m.row(j))
                .map(|(a, b)| (a - b).abs())
                .sum();
            best = best.max(dist);
        }
    }
    (0.5 * best).min(1.0)
}

/// Stationary flow out of `S` and `π(S)` for the subset encoded by `mask`.
fn flow_and_mass(m: &StochasticMatrix, pi: &ProbDist, mask: u32) -> (f64, f64) {
    let d = m.dim();
    let inside = |i: usize| mask >> i & 1 == 1;
    let mut flow = 0.0;
    let mut mass = 0.0;
    for i in (0..d).filter(|&i| inside(i)) {
        mass += pi.get(i);
        let out: f64 = (0..d).filter(|&j| !inside(j)).map(|j| m.get(i, j)).sum();
        flow += pi.get(i) * out;
    }
    (flow, mass)
}

/// Cheeger constant `Φ = min_{S: π(S) ≤ ½} Σ_{i∈S, j∉S} π(i)M(i,j) / π(S)`,
/// computed exactly by enumerating every nonempty subset.
///
/// Subsets are walked in Gray-code order within blocks of the low bits, with
/// the flow updated in `O(d)` per step; the minimising subset is then
/// re-evaluated from scratch. Blocks are processed in parallel and reduced
/// deterministically.
pub fn cheeger(m: &StochasticMatrix, pi: &ProbDist) -> Result<f64> {
    Ok(cheeger_with_set(m, pi)?.0)
}

/// [`cheeger`] together with the minimising subset as a 0-based bitmask.
pub fn cheeger_with_set(m: &StochasticMatrix, pi: &ProbDist) -> Result<(f64, u32)> {
    let d = m.dim();
    check_dim(d, pi.dim())?;
    if d > CHEEGER_MAX_DIM {
        return Err(Error::DimensionTooLargeForExact(d));
    }
    if let Some(i) = (0..d).find(|&i| pi.get(i) <= 0.0) {
        return Err(Error::ZeroStationaryMass(i + 1));
    }
    let low_bits = d.min(16);
    let high_bits = d - low_bits;
    // w[i][j] = π(i) M(i,j)
    let w: Vec<f64> = (0..d * d)
        .map(|x| pi.get(x / d) * m.get(x / d, x % d))
        .collect();

    let scan_block = |high: u32| -> Option<(f64, u32)> {
        let mut mask = high << low_bits;
        let (mut flow, mut mass) = flow_and_mass(m, pi, mask);
        // into_s[v] = Σ_{i∈S} w(i,v), from_v_to_s[v] = Σ_{j∈S} w(v,j)
        let mut into_s = vec![0.0; d];
        let mut from_v_to_s = vec![0.0; d];
        for u in (0..d).filter(|&u| mask >> u & 1 == 1) {
            for v in 0..d {
                into_s[v] += w[u * d + v];
                from_v_to_s[v] += w[v * d + u];
            }
        }
        let mut best: Option<(f64, u32)> = None;
        let mut consider = |flow: f64, mass: f64, mask: u32| {
            if mask != 0 && mass <= 0.5 + HALF_MASS_SLACK {
                let ratio = flow / mass;
                if best.is_none_or(|(b, bm)| ratio < b || (ratio == b && mask < bm)) {
                    best = Some((ratio, mask));
                }
            }
        };
        consider(flow, mass, mask);
        for g in 1u32..(1u32 << low_bits) {
            let v = g.trailing_zeros() as usize;
            let pv = pi.get(v);
            let self_w = w[v * d + v];
            if mask >> v & 1 == 0 {
                // v joins S
                flow += pv - self_w - from_v_to_s[v] - into_s[v];
                mass += pv;
                mask |= 1 << v;
                for u in 0..d {
                    into_s[u] += w[v * d + u];
                    from_v_to_s[u] += w[u * d + v];
                }
            } else {
                // v leaves S
                mask &= !(1 << v);
                for u in 0..d {
                    into_s[u] -= w[v * d + u];
                    from_v_to_s[u] -= w[u * d + v];
                }
                flow -= pv - self_w - from_v_to_s[v] - into_s[v];
                mass -= pv;
            }
            consider(flow, mass, mask);
        }
        best
    };

    let best = (0u32..(1u32 << high_bits))
        .into_par_iter()
        .filter_map(scan_block)
        .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .ok_or(Error::InvalidDimension(d))?;
    let (flow, mass) = flow_and_mass(m, pi, best.1);
    Ok((flow / mass, best.1))
}

/// Evaluates both sides of the one-step contraction
/// `‖(μ − μ′)M‖₁ ≤ κ(M)‖μ − μ′‖₁`.
pub fn contraction_check(m: &StochasticMatrix, mu: &ProbDist, mu2: &ProbDist) -> Result<(f64, f64)> {
    check_dim(m.dim(), mu.dim())?;
    check_dim(m.dim(), mu2.dim())?;
    let diff: Vec<f64> = mu
        .as_slice()
        .iter()
        .zip(mu2.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    let lhs: f64 = m.left_apply(&diff).iter().map(|x| x.abs()).sum();
    let rhs = dobrushin(m) * mu.l1_distance(mu2);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::stationary_distribution;
    use crate::chain::test_support::{random_dist, random_stochastic};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_state(a: f64, b: f64) -> StochasticMatrix {
        StochasticMatrix::from_rows(&[vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap()
    }

    /// Lazy random symmetric chain `(I + S)/2`, `S` symmetric stochastic.
    pub(crate) fn lazy_symmetric(d: usize, seed: u64) -> StochasticMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = vec![vec![0.0; d]; d];
        // symmetric off-diagonal weights, scaled so rows sum below one
        for i in 0..d {
            for j in i + 1..d {
                let x = rng.random::<f64>() / d as f64;
                s[i][j] = x;
                s[j][i] = x;
            }
        }
        for (i, row) in s.iter_mut().enumerate() {
            let off: f64 = row.iter().sum();
            row[i] = 1.0 - off;
        }
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| 0.5 * s[i][j] + if i == j { 0.5 } else { 0.0 })
                    .collect()
            })
            .collect();
        StochasticMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn two_state_spectrum_closed_form() {
        for &(a, b) in &[(0.1, 0.3), (0.5, 0.5), (0.02, 0.9)] {
            let m = two_state(a, b);
            let pi = stationary_distribution(&m).unwrap();
            let s = reversible_spectrum(&m, &pi).unwrap();
            assert_abs_diff_eq!(s.eigenvalues[0], 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.eigenvalues[1], 1.0 - a - b, epsilon = 1e-12);
            assert_abs_diff_eq!(s.gap, a + b, epsilon = 1e-12);
        }
    }

    #[test]
    fn inner_clique_second_eigenvalue() {
        // d = 12: n = 4 clique states, off-diagonal η/3
        let (n, eta) = (4usize, 0.01);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 - eta } else { eta / (n - 1) as f64 })
                    .collect()
            })
            .collect();
        let m = StochasticMatrix::from_rows(&rows).unwrap();
        let s = reversible_spectrum(&m, &ProbDist::uniform(n)).unwrap();
        let expected = 1.0 - eta - eta / (n - 1) as f64;
        for &l in &s.eigenvalues[1..] {
            assert_abs_diff_eq!(l, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_has_zero_gap() {
        let m = StochasticMatrix::identity(4);
        let s = reversible_spectrum(&m, &ProbDist::uniform(4)).unwrap();
        assert!(s.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert_abs_diff_eq!(s.gap, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_reversible_spectrum_is_rejected() {
        let m = StochasticMatrix::from_rows(&[
            vec![0.1, 0.8, 0.1],
            vec![0.1, 0.1, 0.8],
            vec![0.8, 0.1, 0.1],
        ])
        .unwrap();
        let pi = stationary_distribution(&m).unwrap();
        assert_eq!(reversible_spectrum(&m, &pi), Err(Error::NotReversible));
        // the pseudo-gap is still defined
        let pg = pseudo_spectral_gap(&m, &pi, None).unwrap();
        assert!(pg.value > 0.0 && pg.value <= 1.0);
    }

    #[test]
    fn pseudo_gap_of_reversible_with_lambda2_point_nine() {
        // λ = (1, 0.9): every term (1 − 0.9^{2k})/k, maximised at k = 1
        let m = two_state(0.05, 0.05);
        let pi = ProbDist::uniform(2);
        let pg = pseudo_spectral_gap(&m, &pi, None).unwrap();
        let oracle = (1..=200)
            .map(|k| (1.0 - 0.9f64.powi(2 * k)) / k as f64)
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(oracle, 0.19, epsilon = 1e-15);
        assert_abs_diff_eq!(pg.value, 0.19, epsilon = 1e-12);
        assert_eq!(pg.argmax_k, 1);
    }

    #[test]
    fn pseudo_gap_symmetric_identity() {
        for seed in 0..10 {
            let m = lazy_symmetric(6, seed);
            let pi = ProbDist::uniform(6);
            let gamma = reversible_spectrum(&m, &pi).unwrap().gap;
            let pg = pseudo_spectral_gap(&m, &pi, None).unwrap();
            assert_abs_diff_eq!(pg.value, gamma * (2.0 - gamma), epsilon = 1e-9);
            assert_eq!(pg.argmax_k, 1);
        }
    }

    #[test]
    fn pseudo_gap_with_dominant_negative_eigenvalue() {
        // λ = (1, −0.8): γ = 1.8 but γ_ps = 1 − 0.64, not γ(2 − γ)
        let m = two_state(0.9, 0.9);
        let pi = ProbDist::uniform(2);
        let gamma = reversible_spectrum(&m, &pi).unwrap().gap;
        let pg = pseudo_spectral_gap(&m, &pi, None).unwrap();
        assert_abs_diff_eq!(gamma, 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(pg.value, 0.36, epsilon = 1e-12);
    }

    #[test]
    fn pseudo_gap_when_first_reversiblization_has_no_gap() {
        // M*M is block diagonal here (states 1 and 2 are never both
        // reachable in one step from the same row), so γ(M*M) = 0 and
        // the maximum is attained at k ≥ 2.
        let m = StochasticMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let pi = stationary_distribution(&m).unwrap();
        let pg = pseudo_spectral_gap(&m, &pi, None).unwrap();
        assert!(pg.value > 0.0);
        assert!(pg.argmax_k >= 2);
    }

    #[test]
    fn pseudo_gap_respects_user_cap() {
        let m = two_state(0.001, 0.001);
        let pi = ProbDist::uniform(2);
        let pg = pseudo_spectral_gap(&m, &pi, Some(3)).unwrap();
        assert_eq!(pg.k_cap_used, 3);
        assert!(pg.k_evaluated <= 3);
        assert!(pseudo_spectral_gap(&m, &pi, Some(0)).is_err());
    }

    #[test]
    fn pseudo_gap_rejects_periodic_chain() {
        let m = StochasticMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            pseudo_spectral_gap(&m, &ProbDist::uniform(2), None),
            Err(Error::NotErgodic)
        );
    }

    #[test]
    fn dobrushin_examples() {
        let flat = StochasticMatrix::from_rows(&[vec![0.2, 0.8], vec![0.2, 0.8]]).unwrap();
        assert_eq!(dobrushin(&flat), 0.0);
        assert_eq!(dobrushin(&StochasticMatrix::identity(3)), 1.0);
        let m = two_state(0.1, 0.1);
        assert_abs_diff_eq!(dobrushin(&m), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn cheeger_two_state() {
        // π = (b, a)/(a+b); with a ≥ b only S = {1} has π(S) ≤ ½
        let (a, b) = (0.3, 0.1);
        let m = two_state(a, b);
        let pi = stationary_distribution(&m).unwrap();
        assert!(pi.get(0) <= 0.5);
        let oracle = pi.get(0) * a / pi.get(0);
        assert_abs_diff_eq!(cheeger(&m, &pi).unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn cheeger_complete_uniform_chain() {
        // With π uniform the minimand is Σ_{i∈S, j∉S} M(i,j) / |S|
        // = (d − |S|)/d, smallest at |S| = ⌊d/2⌋.
        for d in 2..=9usize {
            let m = StochasticMatrix::from_rows(&vec![vec![1.0 / d as f64; d]; d]).unwrap();
            let pi = ProbDist::uniform(d);
            let oracle = (1..=d / 2)
                .map(|s| (s * (d - s)) as f64 / d as f64 / s as f64)
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(cheeger(&m, &pi).unwrap(), oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn cheeger_matches_direct_enumeration() {
        for seed in 0..5 {
            let m = random_stochastic(9, 0.3, seed);
            if !crate::chain::is_ergodic(&m) {
                continue;
            }
            let pi = stationary_distribution(&m).unwrap();
            let mut oracle = f64::INFINITY;
            for mask in 1u32..(1 << 9) {
                let (flow, mass) = flow_and_mass(&m, &pi, mask);
                if mass <= 0.5 {
                    oracle = oracle.min(flow / mass);
                }
            }
            assert_abs_diff_eq!(cheeger(&m, &pi).unwrap(), oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn cheeger_dimension_cap() {
        let d = CHEEGER_MAX_DIM + 1;
        let m = StochasticMatrix::from_rows(&vec![vec![1.0 / d as f64; d]; d]).unwrap();
        assert_eq!(
            cheeger(&m, &ProbDist::uniform(d)),
            Err(Error::DimensionTooLargeForExact(d))
        );
    }

    #[test]
    fn contraction_examples() {
        let m = random_stochastic(4, 0.0, 3);
        let mu = random_dist(4, 1);
        assert_eq!(contraction_check(&m, &mu, &mu).unwrap(), (0.0, 0.0));
        let rank_one = StochasticMatrix::from_rows(&vec![vec![0.1, 0.2, 0.3, 0.4]; 4]).unwrap();
        let (lhs, rhs) = contraction_check(&rank_one, &mu, &random_dist(4, 2)).unwrap();
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-15);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn contraction_holds_on_many_random_triples() {
        for seed in 0..10_000u64 {
            let m = random_stochastic(5, 0.2, seed);
            let (lhs, rhs) =
                contraction_check(&m, &random_dist(5, seed ^ 0xa5a5), &random_dist(5, seed ^ 0x5a5a))
                    .unwrap();
            assert!(lhs <= rhs + 1e-12, "seed {seed}: {lhs} > {rhs}");
        }
    }

    proptest! {
        #[test]
        fn one_minus_gap_below_dobrushin(d in 2usize..=7, seed in any::<u64>()) {
            let m = lazy_symmetric(d, seed);
            let pi = ProbDist::uniform(d);
            let gamma = reversible_spectrum(&m, &pi).unwrap().gap;
            prop_assert!(1.0 - gamma <= dobrushin(&m) + 1e-10);
        }

        #[test]
        fn spectrum_within_unit_interval(d in 2usize..=7, seed in any::<u64>()) {
            // random reversible chain: symmetric weights W, M = D⁻¹W
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut w = vec![vec![0.0; d]; d];
            for i in 0..d { for j in i..d { let x = rng.random::<f64>() + 0.01; w[i][j] = x; w[j][i] = x; } }
            let rows: Vec<Vec<f64>> = w.iter().map(|r| { let s: f64 = r.iter().sum(); r.iter().map(|x| x / s).collect() }).collect();
            let m = StochasticMatrix::from_rows(&rows).unwrap();
            let pi = stationary_distribution(&m).unwrap();
            let s = reversible_spectrum(&m, &pi).unwrap();
            prop_assert!((s.eigenvalues[0] - 1.0).abs() <= 1e-10);
            prop_assert!(s.eigenvalues.iter().all(|&l| (-1.0 - 1e-10..=1.0 + 1e-10).contains(&l)));
            let pg = pseudo_spectral_gap(&m, &pi, None).unwrap();
            let first = {
                let r = time_reversal(&m, &pi).unwrap();
                1.0 - symmetrized_eigenvalues(&r.compose(&m), &pi)[1]
            };
            prop_assert!(pg.value >= first - 1e-12);
        }

        #[test]
        fn symmetric_sandwich(d in 2usize..=8, seed in any::<u64>()) {
            let m = lazy_symmetric(d, seed);
            let pi = ProbDist::uniform(d);
            let gamma = reversible_spectrum(&m, &pi).unwrap().gap;
            let pg = pseudo_spectral_gap(&m, &pi, None).unwrap();
            prop_assert!(gamma <= pg.value + 1e-12 && pg.value <= 2.0 * gamma + 1e-12);
            let phi = cheeger(&m, &pi).unwrap();
            prop_assert!(phi * phi / 2.0 <= gamma + 1e-12);
            prop_assert!(gamma <= 2.0 * phi + 1e-12);
        }

        #[test]
        fn dobrushin_submultiplicative(d in 2usize..=6, seed in any::<u64>()) {
            let m = random_stochastic(d, 0.2, seed);
            let k2 = dobrushin(&m.power(2));
            for t in 2..=6u32 {
                prop_assert!(dobrushin(&m.power(t)) <= k2.powi((t / 2) as i32) + 1e-12);
            }
        }
    }
}
