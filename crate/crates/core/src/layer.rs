//! Fermi-coordinate metric of the layer and the metric-comparison sandwich.

use crate::error::{Error, Result};
use crate::linalg::Sym2;
use crate::real::Real;
use crate::surface::GeomSample;

/// Half-width and the derived spectral threshold of the straight slab.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct LayerConfig<T> {
    pub a: T,
    pub kappa: T,
    pub kappa_sq: T,
}

impl<T: Real> LayerConfig<T> {
    pub fn new(a: T) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(Error::Invalid("half-width a must be positive".into()));
        }
        let kappa = T::pi() / (T::two() * a);
        Ok(Self {
            a,
            kappa,
            kappa_sq: kappa * kappa,
        })
    }
}

/// The layer metric at one (surface point, t). The full 3x3 metric is
/// block-diagonal: the horizontal 2x2 block below plus G_33 = 1.
#[derive(Debug, Clone, Copy)]
pub struct LayerMetric<T> {
    pub g_horiz: Sym2<T>,
    pub g_horiz_inv: Sym2<T>,
    /// Volume factor J = (1 - kappa1 t)(1 - kappa2 t) = 1 - H t + K t^2.
    pub j: T,
    /// sqrt(det G) = J * sqrt(det g).
    pub d_omega_density: T,
}

/// Smallest J tolerated before the layer is declared folded.
pub const FOLD_TOL: f64 = 1e-8;

/// Assembles the metric of the parallel surface at offset t:
/// G = g - 2 t b + t^2 (b g^-1 b).
pub fn layer_metric_at<T: Real>(
    sample: &GeomSample<T>,
    t: T,
    cfg: &LayerConfig<T>,
) -> Result<LayerMetric<T>> {
    debug_assert!(t.abs() <= cfg.a * (T::one() + T::of(1e-12)));
    let f1 = T::one() - sample.kappa1 * t;
    let f2 = T::one() - sample.kappa2 * t;
    let j = f1 * f2;
    // each principal factor must stay positive: J > 0 with both factors
    // negative is still a fold (the normal map reverses orientation twice)
    if f1.min(f2) <= T::of(FOLD_TOL) {
        return Err(Error::LayerFold {
            rho: f64::NAN,
            t: t.as_f64(),
            j: j.as_f64(),
        });
    }
    let ginv = sample.g.inverse();
    let bginvb = sample.b.sandwich(&ginv);
    let g_horiz = sample
        .g
        .add(&sample.b.scale(-T::two() * t))
        .add(&bginvb.scale(t * t));
    Ok(LayerMetric {
        g_horiz,
        g_horiz_inv: g_horiz.inverse(),
        j,
        d_omega_density: j * sample.det_g.sqrt(),
    })
}

/// Width of the Prop.-2.2 sandwich and the measured eigenvalue range of the
/// horizontal block relative to g over a t-sweep.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ComparisonEpsilon<T> {
    pub epsilon: T,
    pub eig_lo: T,
    pub eig_hi: T,
}

pub fn comparison_epsilon<T: Real>(
    sample: &GeomSample<T>,
    cfg: &LayerConfig<T>,
) -> Result<ComparisonEpsilon<T>> {
    let nb = sample.norm_b;
    let epsilon = T::two() * cfg.a * nb + cfg.a * cfg.a * nb * nb;
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let n = 33;
    for k in 0..n {
        let t = cfg.a * (T::of(2.0 * k as f64 / (n - 1) as f64) - T::one());
        let lm = match layer_metric_at(sample, t, cfg) {
            Ok(lm) => lm,
            // a folded point makes the sandwich vacuous anyway
            Err(Error::LayerFold { .. }) => continue,
            Err(e) => return Err(e),
        };
        let eigs = lm.g_horiz.generalized_eigs(&sample.g);
        lo = lo.min(eigs[0]);
        hi = hi.max(eigs[1]);
    }
    if epsilon < T::one() {
        // near-degenerate pairs cost sqrt(machine eps) in the eigenvalue
        let tol = T::of(1e-7) * (T::one() + epsilon);
        if lo < T::one() - epsilon - tol || hi > T::one() + epsilon + tol {
            return Err(Error::Internal(format!(
                "metric sandwich violated: eigs [{}, {}] vs epsilon {}",
                lo.as_f64(),
                hi.as_f64(),
                epsilon.as_f64()
            )));
        }
    }
    Ok(ComparisonEpsilon {
        epsilon,
        eig_lo: lo,
        eig_hi: hi,
    })
}

/// Volume-element bounds (1-eps)^2 <= J <= (1+eps)^2 where they apply.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct VolumeSandwich<T> {
    pub lower: T,
    pub upper: T,
    /// True when eps >= 1 and the bounds carry no information.
    pub vacuous: bool,
}

pub fn volume_sandwich<T: Real>(
    sample: &GeomSample<T>,
    cfg: &LayerConfig<T>,
) -> Result<VolumeSandwich<T>> {
    let eps = comparison_epsilon(sample, cfg)?.epsilon;
    let lower = (T::one() - eps) * (T::one() - eps);
    let upper = (T::one() + eps) * (T::one() + eps);
    let vacuous = eps >= T::one();
    if !vacuous {
        for k in 0..17 {
            let t = cfg.a * (T::of(2.0 * k as f64 / 16.0) - T::one());
            let j = layer_metric_at(sample, t, cfg)?.j;
            let tol = T::of(1e-9);
            if j < lower - tol || j > upper + tol {
                return Err(Error::Internal(format!(
                    "volume sandwich violated: J = {} outside [{}, {}]",
                    j.as_f64(),
                    lower.as_f64(),
                    upper.as_f64()
                )));
            }
        }
    }
    Ok(VolumeSandwich {
        lower,
        upper,
        vacuous,
    })
}
