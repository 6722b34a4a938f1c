//! Quadratic forms Q = Q1 + Q2 for separable test fields on the layer.
//!
//! Q1(f,g) = int G^{ij} d_i f d_j g dOmega   (horizontal Dirichlet energy)
//! Q2(f,g) = int (d_t f d_t g - kappa^2 f g) dOmega
//!
//! Fields are sums of separable terms u(x) * tau(t). The t-dependence of Q2
//! and of the L2 pairing reduces to the closed-form moments in `profiles`,
//! contracted against the volume factor J = 1 - H t + K t^2; Q1 keeps a
//! numeric t-quadrature because G^{ij}(t) is a rational function of t.

pub mod factors;
pub mod grid;
pub mod profiles;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::layer::{layer_metric_at, LayerConfig};
use crate::linalg::{gauss_legendre_on, pairwise_sum};
use crate::real::Real;
use crate::surface::Surface;

pub use factors::{FnFactor, GeodesicCutoff, NormalZ, ProductFactor, SurfaceFactor};
pub use grid::{GridSpec, QuadratureGrid};
pub use profiles::{pair_moments, transverse_integrals, TransverseIntegrals, TransverseProfile};

/// A separable test field: sum of u_i(x) * tau_i(t) terms supported in a
/// parameter-radius annulus.
pub struct LayerField<T: Real> {
    pub terms: Vec<(Arc<dyn SurfaceFactor<T>>, TransverseProfile<T>)>,
    /// Annulus (r_in, r_out) in parameter radius containing every u_i support.
    pub support_r: (T, T),
}

impl<T: Real> LayerField<T> {
    pub fn new(
        terms: Vec<(Arc<dyn SurfaceFactor<T>>, TransverseProfile<T>)>,
        support_r: (T, T),
        cfg: &LayerConfig<T>,
    ) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("field needs at least one term".into()));
        }
        for (_, tau) in &terms {
            tau.check_dirichlet(cfg)?;
        }
        Ok(Self { terms, support_r })
    }
}

/// Evaluated forms for one field.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FormValue<T> {
    pub q: T,
    pub q1: T,
    pub q2: T,
    pub l2_norm_sq: T,
    /// |Q(working grid) - Q(half-resolution grid)|, the certificate's budget.
    pub quadrature_error_estimate: T,
}

/// Bilinear values Q(f,g), Q1(f,g), Q2(f,g), <f,g>_L2 on one grid.
#[derive(Debug, Clone, Copy)]
pub struct BilinearValue<T> {
    pub q: T,
    pub q1: T,
    pub q2: T,
    pub l2: T,
}

/// Evaluates the bilinear forms for a pair of fields on the given grid.
pub fn eval_forms_pair<T: Real>(
    f: &LayerField<T>,
    g: &LayerField<T>,
    surface: &Surface<T>,
    cfg: &LayerConfig<T>,
    grid: &QuadratureGrid<T>,
) -> Result<BilinearValue<T>> {
    grid.check_coverage(f.support_r)?;
    grid.check_coverage(g.support_r)?;
    let rule_t = gauss_legendre_on(grid.n_t, -cfg.a, cfg.a);
    // profile values at the t nodes, one row per term of each field
    let f_tau: Vec<Vec<T>> = f
        .terms
        .iter()
        .map(|(_, tau)| rule_t.iter().map(|&(t, _)| tau.eval(t, cfg).0).collect())
        .collect();
    let g_tau: Vec<Vec<T>> = g
        .terms
        .iter()
        .map(|(_, tau)| rule_t.iter().map(|&(t, _)| tau.eval(t, cfg).0).collect())
        .collect();
    // closed-form (or 64-pt) moments per term pair
    let moments: Vec<Vec<profiles::PairMoments<T>>> = f
        .terms
        .iter()
        .map(|(_, tau)| {
            g.terms
                .iter()
                .map(|(_, sig)| pair_moments(tau, sig, cfg))
                .collect()
        })
        .collect();

    let lo = f.support_r.0.max(g.support_r.0);
    let hi = f.support_r.1.min(g.support_r.1);

    let contribs: Result<Vec<[T; 4]>> = grid
        .nodes
        .par_iter()
        .map(|&[u, v, w]| -> Result<[T; 4]> {
            let r = (u * u + v * v).sqrt();
            if r < lo || r > hi {
                return Ok([T::zero(); 4]);
            }
            let s = surface.sample(u, v)?;
            let fe: Result<Vec<(T, [T; 2])>> = f
                .terms
                .iter()
                .map(|(fac, _)| fac.eval(surface, u, v))
                .collect();
            let ge: Result<Vec<(T, [T; 2])>> = g
                .terms
                .iter()
                .map(|(fac, _)| fac.eval(surface, u, v))
                .collect();
            let (fe, ge) = (fe?, ge?);
            let mut q1 = T::zero();
            let mut q2 = T::zero();
            let mut l2 = T::zero();
            for (i, (fv, fg)) in fe.iter().enumerate() {
                for (j, (gv, gg)) in ge.iter().enumerate() {
                    let m = &moments[i][j];
                    let uv = *fv * *gv;
                    q2 += uv * (m.d[0] - s.mean * m.d[1] + s.gauss * m.d[2]);
                    l2 += uv * (m.n[0] - s.mean * m.n[1] + s.gauss * m.n[2]);
                    let _ = (fg, gg); // gradients used in the t loop below
                }
            }
            for (k, &(t, wt)) in rule_t.iter().enumerate() {
                let lm = layer_metric_at(&s, t, cfg).map_err(|e| match e {
                    Error::LayerFold { t, j, .. } => Error::LayerFold {
                        rho: r.as_f64(),
                        t,
                        j,
                    },
                    other => other,
                })?;
                let mut cross = T::zero();
                for (i, (_, fg)) in fe.iter().enumerate() {
                    for (j, (_, gg)) in ge.iter().enumerate() {
                        cross += f_tau[i][k] * g_tau[j][k] * lm.g_horiz_inv.quad(*fg, *gg);
                    }
                }
                q1 += wt * lm.j * cross;
            }
            let scale = w * s.det_g.sqrt();
            Ok([q1 * scale, q2 * scale, l2 * scale, (q1 + q2) * scale])
        })
        .collect();
    let contribs = contribs?;
    let col = |k: usize| -> Vec<T> { contribs.iter().map(|c| c[k]).collect() };
    Ok(BilinearValue {
        q1: pairwise_sum(&col(0)),
        q2: pairwise_sum(&col(1)),
        l2: pairwise_sum(&col(2)),
        q: pairwise_sum(&col(3)),
    })
}

/// Evaluates Q, Q1, Q2 and the L2 norm of a field, with an error estimate
/// from a half-resolution re-evaluation.
pub fn eval_forms<T: Real>(
    field: &LayerField<T>,
    surface: &Surface<T>,
    cfg: &LayerConfig<T>,
    grid: &QuadratureGrid<T>,
) -> Result<FormValue<T>> {
    let full = eval_forms_pair(field, field, surface, cfg, grid)?;
    let coarse = eval_forms_pair(field, field, surface, cfg, &grid.halved())?;
    Ok(FormValue {
        q: full.q,
        q1: full.q1,
        q2: full.q2,
        l2_norm_sq: full.l2,
        quadrature_error_estimate: (full.q - coarse.q).abs(),
    })
}

/// Rayleigh quotient int |grad f|^2 / int f^2 = (Q + kappa^2 ||f||^2)/||f||^2.
pub fn rayleigh_quotient<T: Real>(
    field: &LayerField<T>,
    surface: &Surface<T>,
    cfg: &LayerConfig<T>,
    grid: &QuadratureGrid<T>,
) -> Result<T> {
    let v = eval_forms_pair(field, field, surface, cfg, grid)?;
    if !(v.l2 > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    Ok((v.q + cfg.kappa_sq * v.l2) / v.l2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cutoff_field(
        radii: [f64; 4],
        profile: TransverseProfile<f64>,
        cfg: &LayerConfig<f64>,
    ) -> LayerField<f64> {
        let cut = GeodesicCutoff::new(radii[0], radii[1], radii[2], radii[3]).unwrap();
        LayerField::new(
            vec![(Arc::new(cut) as Arc<dyn SurfaceFactor<f64>>, profile)],
            (radii[0], radii[3]),
            cfg,
        )
        .unwrap()
    }

    #[test]
    fn slab_ground_mode_has_no_transverse_energy() {
        // On the plane Q2(w chi, w chi) = 0 and Q1 = (int |grad w|^2) * a
        let s = Surface::<f64>::plane();
        let cfg = LayerConfig::new(1.0).unwrap();
        let field = cutoff_field([1.0, 2.0, 4.0, 8.0], TransverseProfile::GroundMode, &cfg);
        let g = QuadratureGrid::radial(&[1.0, 2.0, 4.0, 8.0], 12, 8, 16).unwrap();
        let v = eval_forms(&field, &s, &cfg, &g).unwrap();
        assert_eq!(v.q2, 0.0);
        // log ramps: Dirichlet energy 2 pi / ln 2 each, times int chi^2 = a
        let expect = 2.0 * (2.0 * std::f64::consts::PI / 2.0_f64.ln()) * cfg.a;
        assert_relative_eq!(v.q1, expect, max_relative = 1e-9);
        assert_relative_eq!(v.q, v.q1, max_relative = 1e-12);
    }

    #[test]
    fn slab_second_mode_energy_gap() {
        // second transverse mode: Q2 = 3 kappa^2 ||f||^2
        let s = Surface::<f64>::plane();
        let cfg = LayerConfig::new(0.7).unwrap();
        let field = cutoff_field([1.0, 2.0, 4.0, 8.0], TransverseProfile::SecondMode, &cfg);
        let g = QuadratureGrid::radial(&[1.0, 2.0, 4.0, 8.0], 12, 8, 16).unwrap();
        let v = eval_forms(&field, &s, &cfg, &g).unwrap();
        assert_relative_eq!(v.q2, 3.0 * cfg.kappa_sq * v.l2_norm_sq, max_relative = 1e-10);
        assert!(v.q1 > 0.0);
    }

    #[test]
    fn slab_rayleigh_at_least_threshold() {
        let s = Surface::<f64>::plane();
        let cfg = LayerConfig::new(1.0).unwrap();
        let field = cutoff_field([1.0, 3.0, 9.0, 27.0], TransverseProfile::GroundMode, &cfg);
        let g = QuadratureGrid::radial(&[1.0, 3.0, 9.0, 27.0], 12, 8, 16).unwrap();
        let rq = rayleigh_quotient(&field, &s, &cfg, &g).unwrap();
        assert!(rq >= cfg.kappa_sq, "rq = {rq} < {}", cfg.kappa_sq);
    }

    #[test]
    fn decomposition_identity_and_positivity_on_curved_layer() {
        let s = Surface::<f64>::hyperboloid(1.0, 1.0);
        let cfg = LayerConfig::new(0.5).unwrap();
        let field = cutoff_field([2.0, 4.0, 8.0, 16.0], TransverseProfile::GroundMode, &cfg);
        let g = QuadratureGrid::radial(&[1.2, 2.8, 5.7, 11.4], 10, 8, 16).unwrap();
        // note: support is in geodesic radius for the cutoff; the parameter
        // annulus r in [1.2, 11.4] comfortably contains rho in [2, 16]
        let field = LayerField {
            support_r: (1.2, 11.4),
            ..field
        };
        let v = eval_forms(&field, &s, &cfg, &g).unwrap();
        let scale = v.q1.abs().max(v.q2.abs()).max(1.0);
        assert!((v.q - v.q1 - v.q2).abs() <= 1e-12 * scale);
        assert!(v.q1 >= -1e-12 * scale);
        assert!(v.l2_norm_sq > 0.0);
    }

    #[test]
    fn grid_refinement_is_cauchy() {
        let s = Surface::<f64>::hyperboloid(1.0, 1.0);
        let cfg = LayerConfig::new(0.5).unwrap();
        let field = cutoff_field([2.0, 4.0, 8.0, 16.0], TransverseProfile::GroundMode, &cfg);
        // panel breaks at the profile kinks (parameter radii of the geodesic
        // cutoff radii), so Gauss panels see a smooth integrand
        let breaks: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&rho| s.r_of_rho(rho).unwrap())
            .collect();
        let field = LayerField {
            support_r: (breaks[0], breaks[3]),
            ..field
        };
        let g = QuadratureGrid::radial(&breaks, 8, 8, 16).unwrap();
        let g2 = QuadratureGrid::radial(&breaks, 16, 16, 32).unwrap();
        let v = eval_forms(&field, &s, &cfg, &g).unwrap();
        let v2 = eval_forms(&field, &s, &cfg, &g2).unwrap();
        assert!(
            (v.q - v2.q).abs() <= v.quadrature_error_estimate + 1e-12 * v.q.abs(),
            "delta {} vs estimate {}",
            (v.q - v2.q).abs(),
            v.quadrature_error_estimate
        );
    }

    #[test]
    fn coverage_and_fold_errors() {
        let cfg = LayerConfig::new(0.5).unwrap();
        let field = cutoff_field([1.0, 2.0, 4.0, 8.0], TransverseProfile::GroundMode, &cfg);
        let s = Surface::<f64>::plane();
        let small = QuadratureGrid::radial(&[1.0, 4.0], 8, 8, 16).unwrap();
        assert!(matches!(
            eval_forms_pair(&field, &field, &s, &cfg, &small),
            Err(Error::Coverage { .. })
        ));

        // a = 1.5 over the unit hyperboloid folds near the apex
        let cfg_wide = LayerConfig::new(1.5).unwrap();
        let hyp = Surface::<f64>::hyperboloid(1.0, 1.0);
        let near = cutoff_field([0.1, 0.2, 0.5, 1.0], TransverseProfile::GroundMode, &cfg_wide);
        let g = QuadratureGrid::radial(&[0.05, 1.0], 8, 8, 16).unwrap();
        let near = LayerField {
            support_r: (0.05, 1.0),
            ..near
        };
        assert!(matches!(
            eval_forms_pair(&near, &near, &hyp, &cfg_wide, &g),
            Err(Error::LayerFold { .. })
        ));
    }

    #[test]
    fn poincare_inequality_for_random_profiles() {
        use rand::{Rng, SeedableRng};
        let cfg = LayerConfig::new(0.8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = cfg.a;
        for _ in 0..50 {
            let coefs: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let tau = TransverseProfile::Custom(Arc::new(move |t: f64| {
                let mut v = 0.0;
                let mut d = 0.0;
                for (k, &c) in coefs.iter().enumerate() {
                    let om = (k as f64 + 1.0) * std::f64::consts::PI / (2.0 * a);
                    v += c * (om * (t + a)).sin();
                    d += c * om * (om * (t + a)).cos();
                }
                (v, d)
            }));
            let mut num = 0.0;
            let mut den = 0.0;
            for (t, w) in gauss_legendre_on(64, -a, a) {
                let (v, d) = tau.eval(t, &cfg);
                num += w * d * d;
                den += w * v * v;
            }
            assert!(num >= cfg.kappa_sq * den - 1e-10 * num.abs().max(1.0));
        }
    }
}
