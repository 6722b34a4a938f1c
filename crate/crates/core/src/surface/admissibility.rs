//! Admissibility screening: sup ||B||, curvature sign, asymptotic flatness
//! and the decay-rate fit used by the general (curve-based) certifier.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::surface::integrals::total_curvature;
use crate::surface::{Surface, Symmetry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSign {
    Nonnegative,
    Mixed,
}

/// Everything downstream modules need to decide whether the layer over this
/// surface is worth certifying.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AdmissibilityReport<T> {
    /// C = sup ||B|| over the surface.
    pub sup_norm_b: T,
    /// Ca = C * a; must stay below 1 for an embedded layer.
    pub ca: T,
    pub total_k: T,
    pub total_abs_k: T,
    pub k_sign: KSign,
    pub asymptotically_flat: bool,
    /// alpha from the fit ||B||(r) ~ r^(-alpha) on the far field.
    pub decay_exponent_estimate: T,
    pub totally_geodesic: bool,
}

/// Screens the surface for the half-width `a`. Errors with
/// `SelfIntersectionRisk` when Ca >= 1.
pub fn admissibility<T: Real>(surface: &Surface<T>, a: T) -> Result<AdmissibilityReport<T>> {
    if !(a > T::zero()) {
        return Err(Error::Invalid("half-width a must be positive".into()));
    }
    let sup = sup_norm_b(surface)?;
    let ca = sup * a;
    if ca >= T::one() {
        return Err(Error::SelfIntersectionRisk {
            c: sup.as_f64(),
            a: a.as_f64(),
            ca: ca.as_f64(),
        });
    }
    let k_sign = curvature_sign(surface)?;
    let far_rho = far_radius(surface);
    let totals = total_curvature(surface, far_rho)?;
    let (alpha, far_b) = decay_fit(surface)?;
    let flat_tol = T::of(1e-3) / surface.length_scale();
    Ok(AdmissibilityReport {
        sup_norm_b: sup,
        ca,
        total_k: totals.total_k,
        total_abs_k: totals.total_abs_k,
        k_sign,
        asymptotically_flat: far_b < flat_tol,
        decay_exponent_estimate: alpha,
        totally_geodesic: sup == T::zero(),
    })
}

fn far_radius<T: Real>(surface: &Surface<T>) -> T {
    match surface.symmetry {
        Symmetry::Radial => surface.length_scale() * T::of(2000.0),
        Symmetry::General => surface.grid_halfwidth * T::of(0.8),
    }
}

/// sup ||B||: coarse scan, then golden-section refinement around the best
/// bracket (radial profile for radial families, parameter grid otherwise).
pub fn sup_norm_b<T: Real>(surface: &Surface<T>) -> Result<T> {
    match surface.symmetry {
        Symmetry::Radial => {
            let scale = surface.length_scale();
            // coarse scan: dense in the core plus octaves to the far field
            let mut best = (T::zero(), surface.norm_b_at_r(T::zero())?);
            let mut probe = |r: T| -> Result<()> {
                let v = surface.norm_b_at_r(r)?;
                if v > best.1 {
                    best = (r, v);
                }
                Ok(())
            };
            let n = 400;
            for i in 1..=n {
                probe(scale * T::of(4.0 * i as f64 / n as f64))?;
            }
            let mut r = scale * T::of(4.0);
            while r < scale * T::of(4096.0) {
                r = r * T::of(1.25);
                probe(r)?;
            }
            let (r0, _) = best;
            let lo = (r0 - scale * T::of(0.05)).max(T::zero());
            let hi = r0 + scale * T::of(0.05);
            Ok(golden_max(lo, hi, |r| surface.norm_b_at_r(r).unwrap()))
        }
        Symmetry::General => {
            let half = surface.grid_halfwidth;
            let n = 200usize;
            let h = T::two() * half / T::of(n as f64);
            let mut best = (T::zero(), T::zero(), T::zero());
            for i in 0..=n {
                for j in 0..=n {
                    let u = -half + h * T::of(i as f64);
                    let v = -half + h * T::of(j as f64);
                    if !surface.domain.contains(u, v) {
                        continue;
                    }
                    let s = surface.sample(u, v)?;
                    if s.norm_b > best.2 {
                        best = (u, v, s.norm_b);
                    }
                }
            }
            // refine along each axis in turn
            let (mut u, mut v, _) = best;
            for _ in 0..3 {
                u = golden_argmax(u - h, u + h, |x| {
                    surface.sample(x, v).map(|s| s.norm_b).unwrap_or(T::zero())
                });
                v = golden_argmax(v - h, v + h, |x| {
                    surface.sample(u, x).map(|s| s.norm_b).unwrap_or(T::zero())
                });
            }
            surface.sample(u, v).map(|s| s.norm_b)
        }
    }
}

fn golden_argmax<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> T) -> T {
    let phi = T::of(0.618_033_988_749_894_9);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo + hi) * T::half()
}

fn golden_max<T: Real>(lo: T, hi: T, f: impl Fn(T) -> T + Copy) -> T {
    f(golden_argmax(lo, hi, f))
}

/// Nonnegative iff K stays above a tiny negative tolerance everywhere sampled.
fn curvature_sign<T: Real>(surface: &Surface<T>) -> Result<KSign> {
    let tol = -T::of(1e-10);
    match surface.symmetry {
        Symmetry::Radial => {
            let scale = surface.length_scale();
            for i in 0..2000 {
                // r from 0 out to 1000 length scales, densest near the core
                let x = T::of(i as f64 / 2000.0);
                let r = scale * (x * T::of(4.0) + (x * T::of(10.0)).exp() - T::one());
                let s = surface.sample(r, T::zero())?;
                if s.gauss < tol * s.norm_b * s.norm_b.max(T::one()) {
                    return Ok(KSign::Mixed);
                }
            }
            Ok(KSign::Nonnegative)
        }
        Symmetry::General => {
            let half = surface.grid_halfwidth;
            let n = 150usize;
            let h = T::two() * half / T::of(n as f64);
            for i in 0..=n {
                for j in 0..=n {
                    let u = -half + h * T::of(i as f64);
                    let v = -half + h * T::of(j as f64);
                    if !surface.domain.contains(u, v) {
                        continue;
                    }
                    let s = surface.sample(u, v)?;
                    if s.gauss < tol * s.norm_b * s.norm_b.max(T::one()) {
                        return Ok(KSign::Mixed);
                    }
                }
            }
            Ok(KSign::Nonnegative)
        }
    }
}

/// Least-squares fit of log ||B|| against log r over the far field.
/// Returns (alpha, ||B|| at the farthest probe). alpha = 0 when ||B||
/// vanishes identically on the window.
fn decay_fit<T: Real>(surface: &Surface<T>) -> Result<(T, T)> {
    let (r_lo, r_hi) = match surface.symmetry {
        Symmetry::Radial => (
            surface.length_scale() * T::of(50.0),
            surface.length_scale() * T::of(1000.0),
        ),
        Symmetry::General => (
            surface.grid_halfwidth * T::of(0.3),
            surface.grid_halfwidth * T::of(0.9),
        ),
    };
    let n = 24;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut far_b = T::zero();
    for k in 0..n {
        let t = T::of(k as f64 / (n - 1) as f64);
        let r = r_lo * (r_hi / r_lo).powf(t);
        let nb = match surface.symmetry {
            Symmetry::Radial => surface.norm_b_at_r(r)?,
            Symmetry::General => surface.sample(r, T::zero())?.norm_b,
        };
        far_b = nb;
        if nb > T::zero() {
            xs.push(r.ln());
            ys.push(nb.ln());
        }
    }
    if xs.len() < 4 {
        return Ok((T::zero(), far_b));
    }
    let m = T::of(xs.len() as f64);
    let sx: T = xs.iter().copied().sum();
    let sy: T = ys.iter().copied().sum();
    let sxx: T = xs.iter().map(|&x| x * x).sum();
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| x * y).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    Ok((-slope, far_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plane_report() {
        let s = Surface::<f64>::plane();
        let rep = admissibility(&s, 1.0).unwrap();
        assert_eq!(rep.sup_norm_b, 0.0);
        assert_eq!(rep.ca, 0.0);
        assert_eq!(rep.k_sign, KSign::Nonnegative);
        assert!(rep.totally_geodesic);
        assert!(rep.asymptotically_flat);
    }

    #[test]
    fn hyperboloid_sup_b_is_sqrt2_at_apex() {
        // kappa1 = kappa2 = 1 at the apex and both decay outward
        let s = Surface::<f64>::hyperboloid(1.0, 1.0);
        let rep = admissibility(&s, 0.5).unwrap();
        assert_relative_eq!(rep.sup_norm_b, 2.0_f64.sqrt(), max_relative = 1e-9);
        assert_relative_eq!(rep.ca, 2.0_f64.sqrt() * 0.5, max_relative = 1e-9);
        assert_eq!(rep.k_sign, KSign::Nonnegative);
        assert!(!rep.totally_geodesic);
        assert!(rep.asymptotically_flat);
        // ||B|| ~ 1/r on the asymptotic cone
        assert_relative_eq!(rep.decay_exponent_estimate, 1.0, max_relative = 0.05);
    }

    #[test]
    fn hyperboloid_wide_layer_refused() {
        let s = Surface::<f64>::hyperboloid(1.0, 1.0);
        let err = admissibility(&s, 1.0).unwrap_err();
        assert!(matches!(err, Error::SelfIntersectionRisk { ca, .. } if ca > 1.0));
    }

    #[test]
    fn bump_is_mixed_sign() {
        let s = Surface::<f64>::gaussian_bump(1.0, 1.0);
        let rep = admissibility(&s, 0.1).unwrap();
        assert_eq!(rep.k_sign, KSign::Mixed);
        assert!(rep.asymptotically_flat);
        assert!(rep.sup_norm_b > 2.0); // apex curvature alone is 2*sqrt(2)
    }

    #[test]
    fn flattened_paraboloid_is_convex_and_flat() {
        let s = Surface::<f64>::flattened_paraboloid(1.0, 1.0);
        let rep = admissibility(&s, 0.5).unwrap();
        assert_eq!(rep.k_sign, KSign::Nonnegative);
        assert!(rep.asymptotically_flat);
        assert!(rep.ca < 1.0);
    }
}
