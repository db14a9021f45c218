//! The full set of mixing quantities the learning bounds depend on.

use crate::chain::{pi_mu, stationary_distribution, ProbDist, StochasticMatrix};
use crate::error::Result;
use crate::io::{format_real, KvBlock};
use crate::spectral::{cheeger, dobrushin, spectral_report, PseudoGap, CHEEGER_MAX_DIM};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDiagnostics {
    pub stationary: ProbDist,
    /// `π* = min_i π(i)`.
    pub pi_min: f64,
    /// `γ`, only for reversible chains.
    pub spectral_gap: Option<f64>,
    pub eigenvalues: Option<Vec<f64>>,
    pub pseudo_spectral_gap: PseudoGap,
    /// `κ(M)`.
    pub dobrushin: f64,
    /// `κ(M²)`.
    pub dobrushin_squared: f64,
    /// `Φ`, absent when the dimension is beyond exhaustive enumeration.
    pub cheeger: Option<f64>,
    /// `Π_μ` for the supplied initial law (`μ = π` when none was given).
    pub pi_mu: f64,
}

/// Computes every diagnostic for an ergodic chain.
pub fn diagnose(
    m: &StochasticMatrix,
    initial: Option<&ProbDist>,
    k_cap: Option<u32>,
) -> Result<ChainDiagnostics> {
    let stationary = stationary_distribution(m)?;
    let report = spectral_report(m, &stationary, k_cap)?;
    let cheeger = if m.dim() <= CHEEGER_MAX_DIM {
        Some(cheeger(m, &stationary)?)
    } else {
        None
    };
    let pi_mu = match initial {
        Some(mu) => pi_mu(mu, &stationary)?,
        None => pi_mu(&stationary, &stationary)?,
    };
    Ok(ChainDiagnostics {
        pi_min: stationary.min(),
        spectral_gap: report.spectrum.as_ref().map(|s| s.gap),
        eigenvalues: report.spectrum.map(|s| s.eigenvalues),
        pseudo_spectral_gap: report.pseudo,
        dobrushin: dobrushin(m),
        dobrushin_squared: dobrushin(&m.power(2)),
        cheeger,
        pi_mu,
        stationary,
    })
}

impl ChainDiagnostics {
    pub fn is_reversible(&self) -> bool {
        self.spectral_gap.is_some()
    }

    /// Flat `key=value` rendering used by the CLI.
    pub fn to_kv(&self) -> KvBlock {
        let mut kv = KvBlock::new();
        let join = |v: &[f64]| v.iter().map(|&x| format_real(x)).collect::<Vec<_>>().join(",");
        kv.push("dim", self.stationary.dim())
            .push("stationary", join(self.stationary.as_slice()))
            .push_real("pi_min", self.pi_min)
            .push("reversible", self.is_reversible());
        if let Some(g) = self.spectral_gap {
            kv.push_real("gamma", g);
        }
        if let Some(e) = &self.eigenvalues {
            kv.push("eigenvalues", join(e));
        }
        kv.push_real("gamma_ps", self.pseudo_spectral_gap.value)
            .push("gamma_ps_argmax_k", self.pseudo_spectral_gap.argmax_k)
            .push("gamma_ps_k_cap", self.pseudo_spectral_gap.k_cap_used)
            .push_real("kappa", self.dobrushin)
            .push_real("kappa_squared", self.dobrushin_squared);
        if let Some(c) = self.cheeger {
            kv.push_real("cheeger", c);
        }
        kv.push_real("pi_mu", self.pi_mu);
        kv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_state_symmetric() {
        let m = StochasticMatrix::from_rows(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let diag = diagnose(&m, None, None).unwrap();
        assert_abs_diff_eq!(diag.pi_min, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(diag.spectral_gap.unwrap(), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(diag.dobrushin, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(diag.pseudo_spectral_gap.value, 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(diag.cheeger.unwrap(), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(diag.pi_mu, 1.0, epsilon = 1e-12);
        let kv = diag.to_kv();
        assert_eq!(kv.get("reversible"), Some("true"));
        assert!(kv.get("gamma").unwrap().starts_with("0.2000000000000"));
    }

    #[test]
    fn pi_mu_invariant() {
        let m = StochasticMatrix::from_rows(&[
            vec![0.5, 0.3, 0.2],
            vec![0.1, 0.6, 0.3],
            vec![0.3, 0.3, 0.4],
        ])
        .unwrap();
        let mu = ProbDist::point_mass(3, 2);
        let diag = diagnose(&m, Some(&mu), None).unwrap();
        assert!(diag.pi_mu <= 1.0 / diag.pi_min + 1e-12);
        assert!(diag.pseudo_spectral_gap.value > 0.0);
        assert!(!diag.is_reversible());
    }
}
