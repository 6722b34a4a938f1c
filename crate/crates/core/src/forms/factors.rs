//! Surface factors u(x): scalar fields on the surface with coordinate
//! gradients, combined with transverse profiles into layer test fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::surface::families::radial_derivs;
use crate::surface::{Surface, Symmetry};

/// A scalar field on the surface returning (value, [d/du, d/dv]).
pub trait SurfaceFactor<T: Real>: Send + Sync {
    fn eval(&self, surface: &Surface<T>, u: T, v: T) -> Result<(T, [T; 2])>;
}

/// Piecewise log-linear plateau bump in the geodesic radius rho:
/// 0 outside [r1, r4], ramps up on [r1, r2], 1 on [r2, r3], down on [r3, r4].
/// Ramps are linear in ln(rho), so each one costs Dirichlet energy
/// 2 pi / ln(r_out/r_in) on a flat end regardless of scale.
#[derive(Debug, Clone)]
pub struct GeodesicCutoff<T> {
    pub r1: T,
    pub r2: T,
    pub r3: T,
    pub r4: T,
}

impl<T: Real> GeodesicCutoff<T> {
    pub fn new(r1: T, r2: T, r3: T, r4: T) -> Result<Self> {
        if !(T::zero() < r1 && r1 < r2 && r2 <= r3 && r3 < r4) {
            return Err(Error::BadRadii(format!(
                "need 0 < r1 < r2 <= r3 < r4, got ({}, {}, {}, {})",
                r1.as_f64(),
                r2.as_f64(),
                r3.as_f64(),
                r4.as_f64()
            )));
        }
        Ok(Self { r1, r2, r3, r4 })
    }

    /// (phi(rho), d phi / d rho).
    pub fn profile(&self, rho: T) -> (T, T) {
        if rho <= self.r1 || rho >= self.r4 {
            (T::zero(), T::zero())
        } else if rho < self.r2 {
            let den = (self.r2 / self.r1).ln();
            ((rho / self.r1).ln() / den, T::one() / (rho * den))
        } else if rho <= self.r3 {
            (T::one(), T::zero())
        } else {
            let den = (self.r4 / self.r3).ln();
            ((self.r4 / rho).ln() / den, -T::one() / (rho * den))
        }
    }
}

impl<T: Real> SurfaceFactor<T> for GeodesicCutoff<T> {
    fn eval(&self, surface: &Surface<T>, u: T, v: T) -> Result<(T, [T; 2])> {
        let r = (u * u + v * v).sqrt();
        let rho = surface.geodesic_radius(u, v);
        let (val, dphi) = self.profile(rho);
        if dphi == T::zero() || r == T::zero() {
            return Ok((val, [T::zero(), T::zero()]));
        }
        // d rho / dr = sqrt(1 + f'^2) on radial surfaces; FD otherwise
        let drho_dr = match surface.symmetry {
            Symmetry::Radial => {
                let h = surface.radial_height().expect("radial").clone();
                let fp = radial_derivs(h.as_ref(), r).fp;
                (T::one() + fp * fp).sqrt()
            }
            Symmetry::General => {
                let hstep = r * T::of(1e-5);
                let (c, s) = (u / r, v / r);
                let rho_p = surface.geodesic_radius((r + hstep) * c, (r + hstep) * s);
                let rho_m = surface.geodesic_radius((r - hstep) * c, (r - hstep) * s);
                (rho_p - rho_m) / (T::two() * hstep)
            }
        };
        let d_dr = dphi * drho_dr;
        Ok((val, [d_dr * u / r, d_dr * v / r]))
    }
}

/// The normal's z-component as a factor (used by the directed-end certifier).
#[derive(Debug, Clone, Copy)]
pub struct NormalZ;

impl<T: Real> SurfaceFactor<T> for NormalZ {
    fn eval(&self, surface: &Surface<T>, u: T, v: T) -> Result<(T, [T; 2])> {
        match surface.symmetry {
            Symmetry::Radial => {
                // n_z = 1/sqrt(1 + f'^2); d n_z/dr = -f' f'' / w^{3/2}
                let h = surface.radial_height().expect("radial").clone();
                let r = (u * u + v * v).sqrt();
                let d = radial_derivs(h.as_ref(), r);
                let w = T::one() + d.fp * d.fp;
                let nz = T::one() / w.sqrt();
                if r == T::zero() {
                    return Ok((nz, [T::zero(), T::zero()]));
                }
                let dnz_dr = -d.fp * d.fpp / (w * w.sqrt());
                Ok((nz, [dnz_dr * u / r, dnz_dr * v / r]))
            }
            Symmetry::General => {
                let h = T::of(1e-5) * surface.length_scale();
                let nz = surface.sample(u, v)?.n_z;
                let du = (surface.sample(u + h, v)?.n_z - surface.sample(u - h, v)?.n_z)
                    / (T::two() * h);
                let dv = (surface.sample(u, v + h)?.n_z - surface.sample(u, v - h)?.n_z)
                    / (T::two() * h);
                Ok((nz, [du, dv]))
            }
        }
    }
}

/// Pointwise product of two factors.
pub struct ProductFactor<T: Real> {
    pub left: Arc<dyn SurfaceFactor<T>>,
    pub right: Arc<dyn SurfaceFactor<T>>,
}

impl<T: Real> SurfaceFactor<T> for ProductFactor<T> {
    fn eval(&self, surface: &Surface<T>, u: T, v: T) -> Result<(T, [T; 2])> {
        let (a, da) = self.left.eval(surface, u, v)?;
        let (b, db) = self.right.eval(surface, u, v)?;
        Ok((a * b, [da[0] * b + a * db[0], da[1] * b + a * db[1]]))
    }
}

/// Closure-backed factor for ad-hoc fields with analytic gradients.
pub struct FnFactor<T, F> {
    pub f: F,
    pub _marker: std::marker::PhantomData<T>,
}

impl<T, F> FnFactor<T, F>
where
    F: Fn(T, T) -> (T, [T; 2]),
{
    pub fn new(f: F) -> Self {
        Self {
            f,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<T: Real, F> SurfaceFactor<T> for FnFactor<T, F>
where
    F: Fn(T, T) -> (T, [T; 2]) + Send + Sync,
{
    fn eval(&self, _surface: &Surface<T>, u: T, v: T) -> Result<(T, [T; 2])> {
        Ok((self.f)(u, v))
    }
}
