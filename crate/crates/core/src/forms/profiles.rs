//! Transverse (t-direction) profiles and their moment integrals.
//!
//! For the built-in profile pairs the moments
//!   D_j = int (tau' sigma' - kappa^2 tau sigma) t^j dt
//!   N_j = int tau sigma t^j dt                       (j = 0, 1, 2)
//! are stored in closed form. This matters: the ground mode satisfies
//! D_0 = D_1 = 0 exactly, and evaluating that cancellation numerically on
//! heavy test functions would drown the small quantities the certifier needs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::layer::LayerConfig;
use crate::linalg::gauss_legendre_on;
use crate::real::Real;

/// A t-profile tau(t) vanishing at t = +-a.
#[derive(Clone)]
pub enum TransverseProfile<T: Real> {
    /// chi = cos(kappa t), the transverse ground mode.
    GroundMode,
    /// t * cos(kappa t), the odd companion used in the certificate.
    TGroundMode,
    /// sin(2 kappa t) = sin(pi t / a), the second Dirichlet mode.
    SecondMode,
    /// User profile returning (tau, tau').
    Custom(Arc<dyn Fn(T) -> (T, T) + Send + Sync>),
}

impl<T: Real> TransverseProfile<T> {
    /// (tau(t), tau'(t)).
    pub fn eval(&self, t: T, cfg: &LayerConfig<T>) -> (T, T) {
        let k = cfg.kappa;
        match self {
            TransverseProfile::GroundMode => ((k * t).cos(), -k * (k * t).sin()),
            TransverseProfile::TGroundMode => {
                let (c, s) = ((k * t).cos(), (k * t).sin());
                (t * c, c - k * t * s)
            }
            TransverseProfile::SecondMode => {
                let x = T::two() * k * t;
                (x.sin(), T::two() * k * x.cos())
            }
            TransverseProfile::Custom(f) => f(t),
        }
    }

    /// Checks the Dirichlet condition tau(+-a) = 0.
    pub fn check_dirichlet(&self, cfg: &LayerConfig<T>) -> Result<()> {
        let scale = gauss_legendre_on(16, -cfg.a, cfg.a)
            .into_iter()
            .map(|(t, _)| self.eval(t, cfg).0.abs())
            .fold(T::zero(), |m, x| m.max(x))
            .max(T::of(1e-30));
        for t in [-cfg.a, cfg.a] {
            let (v, _) = self.eval(t, cfg);
            if v.abs() > T::of(1e-9) * scale {
                return Err(Error::Invalid(format!(
                    "profile violates Dirichlet condition: tau({}) = {}",
                    t.as_f64(),
                    v.as_f64()
                )));
            }
        }
        Ok(())
    }
}

/// Moments of a profile pair: d[j] = D_j, n[j] = N_j for j = 0, 1, 2.
#[derive(Debug, Clone, Copy)]
pub struct PairMoments<T> {
    pub d: [T; 3],
    pub n: [T; 3],
}

/// Moments for a profile pair: closed forms for the built-in combinations,
/// 64-point Gauss-Legendre otherwise.
pub fn pair_moments<T: Real>(
    tau: &TransverseProfile<T>,
    sigma: &TransverseProfile<T>,
    cfg: &LayerConfig<T>,
) -> PairMoments<T> {
    use TransverseProfile::*;
    let a = cfg.a;
    let a2 = a * a;
    let a3 = a2 * a;
    let pi2 = T::pi() * T::pi();
    let z = T::zero();
    match (tau, sigma) {
        (GroundMode, GroundMode) => PairMoments {
            d: [z, z, a],
            n: [a, z, a3 * (T::of(1.0 / 3.0) - T::two() / pi2)],
        },
        (GroundMode, TGroundMode) | (TGroundMode, GroundMode) => PairMoments {
            d: [z, a * T::half(), z],
            n: [z, a3 * (T::of(1.0 / 3.0) - T::two() / pi2), z],
        },
        (TGroundMode, TGroundMode) => PairMoments {
            d: [a, z, a3 * (T::of(4.0 / 3.0) - T::of(8.0) / pi2)],
            n: [
                a3 * (T::of(1.0 / 3.0) - T::two() / pi2),
                z,
                a3 * a2 * (T::of(0.2) - T::of(4.0) / pi2 + T::of(24.0) / (pi2 * pi2)),
            ],
        },
        (SecondMode, SecondMode) => PairMoments {
            d: [
                T::of(3.0) * cfg.kappa_sq * a,
                z,
                cfg.kappa_sq * a3 + T::of(5.0 / 8.0) * a,
            ],
            n: [a, z, a3 * (T::of(1.0 / 3.0) - T::half() / pi2)],
        },
        _ => numeric_moments(tau, sigma, cfg),
    }
}

fn numeric_moments<T: Real>(
    tau: &TransverseProfile<T>,
    sigma: &TransverseProfile<T>,
    cfg: &LayerConfig<T>,
) -> PairMoments<T> {
    let mut d = [T::zero(); 3];
    let mut n = [T::zero(); 3];
    for (t, w) in gauss_legendre_on(64, -cfg.a, cfg.a) {
        let (tv, tp) = tau.eval(t, cfg);
        let (sv, sp) = sigma.eval(t, cfg);
        let dd = tp * sp - cfg.kappa_sq * tv * sv;
        let nn = tv * sv;
        let mut tj = T::one();
        for j in 0..3 {
            d[j] += w * dd * tj;
            n[j] += w * nn * tj;
            tj = tj * t;
        }
    }
    PairMoments { d, n }
}

/// Scalar transverse integrals reported for cross-checks against the paper.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TransverseIntegrals<T> {
    /// int chi^2 dt (= a).
    pub chi_norm_sq: T,
    /// int chi'^2 - kappa^2 int chi^2 (= 0).
    pub chi_prime_identity_residual: T,
    /// sigma = -int chi' chi t dt (= a/2, positive).
    pub sigma: T,
    /// C1 = int (chi' chi_1' t - kappa^2 chi chi_1 t) dt with chi_1 = t chi.
    /// Direct quadrature gives +a/2; the certifier uses the computed sign.
    pub c1_quadrature: T,
}

pub fn transverse_integrals<T: Real>(cfg: &LayerConfig<T>) -> TransverseIntegrals<T> {
    let k = cfg.kappa;
    let mut chi2 = T::zero();
    let mut res = T::zero();
    let mut sig = T::zero();
    let mut c1 = T::zero();
    for (t, w) in gauss_legendre_on(64, -cfg.a, cfg.a) {
        let (c, s) = ((k * t).cos(), (k * t).sin());
        let chi = c;
        let chi_p = -k * s;
        let chi1 = t * c;
        let chi1_p = c - k * t * s;
        chi2 += w * chi * chi;
        res += w * (chi_p * chi_p - cfg.kappa_sq * chi * chi);
        sig -= w * chi_p * chi * t;
        c1 += w * (chi_p * chi1_p * t - cfg.kappa_sq * chi * chi1 * t);
    }
    TransverseIntegrals {
        chi_norm_sq: chi2,
        chi_prime_identity_residual: res,
        sigma: sig,
        c1_quadrature: c1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(a: f64) -> LayerConfig<f64> {
        LayerConfig::new(a).unwrap()
    }

    #[test]
    fn closed_forms_match_quadrature() {
        use TransverseProfile::*;
        for a in [0.25, 0.5, 1.0, 1.7] {
            let c = cfg(a);
            for (p, q) in [
                (GroundMode, GroundMode),
                (GroundMode, TGroundMode),
                (TGroundMode, TGroundMode),
                (SecondMode, SecondMode),
            ] {
                let exact = pair_moments(&p, &q, &c);
                let num = numeric_moments(&p, &q, &c);
                for j in 0..3 {
                    assert_relative_eq!(exact.d[j], num.d[j], epsilon = 1e-12 * (1.0 + a * a));
                    assert_relative_eq!(exact.n[j], num.n[j], epsilon = 1e-13 * (1.0 + a * a));
                }
            }
        }
    }

    #[test]
    fn ground_mode_kills_low_moments_exactly() {
        let c = cfg(0.73);
        let m = pair_moments(
            &TransverseProfile::GroundMode,
            &TransverseProfile::GroundMode,
            &c,
        );
        assert_eq!(m.d[0], 0.0);
        assert_eq!(m.d[1], 0.0);
        assert_eq!(m.d[2], c.a);
        assert_eq!(m.n[0], c.a);
    }

    #[test]
    fn paper_scalars_at_a_one() {
        let t = transverse_integrals(&cfg(1.0));
        assert_relative_eq!(t.chi_norm_sq, 1.0, epsilon = 1e-13);
        assert!(t.chi_prime_identity_residual.abs() < 1e-13);
        assert_relative_eq!(t.sigma, 0.5, epsilon = 1e-13);
        // the direct computation gives +a/2 (the paper prints -1/2)
        assert_relative_eq!(t.c1_quadrature, 0.5, epsilon = 1e-13);
    }

    #[test]
    fn second_mode_energy() {
        // D_0 for the second mode is (4 kappa^2 - kappa^2) * a = 3 kappa^2 a
        let c = cfg(0.5);
        let m = pair_moments(
            &TransverseProfile::SecondMode,
            &TransverseProfile::SecondMode,
            &c,
        );
        assert_relative_eq!(m.d[0] / m.n[0], 3.0 * c.kappa_sq, epsilon = 1e-10);
    }

    #[test]
    fn dirichlet_check() {
        let c = cfg(1.0);
        TransverseProfile::<f64>::GroundMode.check_dirichlet(&c).unwrap();
        TransverseProfile::<f64>::SecondMode.check_dirichlet(&c).unwrap();
        let bad = TransverseProfile::Custom(Arc::new(|_t: f64| (1.0, 0.0)));
        assert!(bad.check_dirichlet(&c).is_err());
    }
}
