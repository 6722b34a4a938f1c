//! Built-in surface families. All are complete graphs z = f(|x|) over the
//! plane; the radial height is stored as z = F(q) with q = r^2 so that every
//! derivative stays regular at the axis.

use std::sync::Arc;

use crate::real::Real;

/// Radial height profile z = F(q), q = r^2, with two derivatives in q.
pub trait RadialHeight<T: Real>: Send + Sync {
    /// Returns (F, dF/dq, d2F/dq2) at q = r^2.
    fn height(&self, q: T) -> (T, T, T);

    /// Characteristic length of the curved region (used for default grids).
    fn length_scale(&self) -> T;
}

/// Radial slope f'(r) and curvature data derived from the q-profile.
pub struct RadialDerivs<T> {
    pub f: T,
    /// f'(r)
    pub fp: T,
    /// f''(r)
    pub fpp: T,
    /// f'(r)/r, finite at r = 0 (equals 2 F'(q))
    pub fp_over_r: T,
}

pub fn radial_derivs<T: Real>(h: &dyn RadialHeight<T>, r: T) -> RadialDerivs<T> {
    let q = r * r;
    let (f, f1, f2) = h.height(q);
    RadialDerivs {
        f,
        fp: T::two() * r * f1,
        fpp: T::two() * f1 + T::of(4.0) * q * f2,
        fp_over_r: T::two() * f1,
    }
}

/// Principal curvatures (radial, angular) of the graph z = f(r) at radius r.
pub fn radial_curvatures<T: Real>(h: &dyn RadialHeight<T>, r: T) -> (T, T) {
    let d = radial_derivs(h, r);
    let w = T::one() + d.fp * d.fp;
    let k_rad = d.fpp / (w * w.sqrt());
    let k_ang = d.fp_over_r / w.sqrt();
    (k_rad, k_ang)
}

/// The flat plane z = 0.
pub struct Plane;

impl<T: Real> RadialHeight<T> for Plane {
    fn height(&self, _q: T) -> (T, T, T) {
        (T::zero(), T::zero(), T::zero())
    }
    fn length_scale(&self) -> T {
        T::one()
    }
}

/// One sheet of a hyperboloid-like cone-asymptotic graph
/// z = slope * sqrt(s^2 + r^2). Convex, K > 0 everywhere, ||B|| ~ 1/r.
pub struct Hyperboloid<T> {
    pub slope: T,
    pub s: T,
}

impl<T: Real> RadialHeight<T> for Hyperboloid<T> {
    fn height(&self, q: T) -> (T, T, T) {
        let m = self.slope;
        let b = self.s * self.s + q;
        let rt = b.sqrt();
        (
            m * rt,
            m * T::half() / rt,
            -m * T::of(0.25) / (b * rt),
        )
    }
    fn length_scale(&self) -> T {
        self.s
    }
}

/// Gaussian bump z = h exp(-r^2/w^2): mixed curvature sign, total curvature 0.
pub struct GaussianBump<T> {
    pub height: T,
    pub width: T,
}

impl<T: Real> RadialHeight<T> for GaussianBump<T> {
    fn height(&self, q: T) -> (T, T, T) {
        let w2 = self.width * self.width;
        let e = (-q / w2).exp();
        (
            self.height * e,
            -self.height / w2 * e,
            self.height / (w2 * w2) * e,
        )
    }
    fn length_scale(&self) -> T {
        self.width
    }
}

/// Paraboloid cap that flattens into a cone at infinity:
/// z = slope * s * ln(cosh(r / s)). Convex (K >= 0), ||B|| -> 0.
pub struct FlattenedParaboloid<T> {
    pub slope: T,
    pub s: T,
}

impl<T: Real> RadialHeight<T> for FlattenedParaboloid<T> {
    fn height(&self, q: T) -> (T, T, T) {
        let s = self.s;
        let m = self.slope;
        let x2 = q / (s * s); // x^2 with x = r/s
        // Series for small x: ln cosh x = x^2/2 - x^4/12 + x^6/45 - ...
        // F(q)  = m s ln cosh(sqrt(q)/s)
        // F'(q) = m tanh(x) / (2 s x)
        // F''(q)= m (x sech^2 x - tanh x) / (4 s^3 x^3)
        if x2 < T::of(1e-4) {
            let f = m * s * (x2 * T::half() - x2 * x2 / T::of(12.0));
            let f1 = m / (T::two() * s) * (T::one() - x2 / T::of(3.0));
            let f2 = m / (T::of(4.0) * s * s * s)
                * (-T::two() / T::of(3.0) + T::of(8.0) / T::of(15.0) * x2);
            (f, f1, f2)
        } else {
            let x = x2.sqrt();
            let th = x.tanh();
            let sech2 = T::one() - th * th;
            let f = m * s * (x.cosh()).ln();
            let f1 = m * th / (T::two() * s * x);
            let f2 = m * (x * sech2 - th) / (T::of(4.0) * s * s * s * x * x * x);
            (f, f1, f2)
        }
    }
    fn length_scale(&self) -> T {
        self.s
    }
}

/// Named built-in family with shape parameters; also the config-file surface.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyTag {
    Plane,
    Hyperboloid { slope: f64, s: f64 },
    GaussianBump { height: f64, width: f64 },
    FlattenedParaboloid { slope: f64, s: f64 },
    Plugin { name: String },
}

impl FamilyTag {
    pub fn label(&self) -> String {
        match self {
            FamilyTag::Plane => "plane".into(),
            FamilyTag::Hyperboloid { slope, s } => format!("hyperboloid(slope={slope},s={s})"),
            FamilyTag::GaussianBump { height, width } => {
                format!("gaussian_bump(h={height},w={width})")
            }
            FamilyTag::FlattenedParaboloid { slope, s } => {
                format!("flattened_paraboloid(slope={slope},s={s})")
            }
            FamilyTag::Plugin { name } => format!("plugin({name})"),
        }
    }

    pub fn build_radial<T: Real>(&self) -> Option<Arc<dyn RadialHeight<T>>> {
        match *self {
            FamilyTag::Plane => Some(Arc::new(Plane)),
            FamilyTag::Hyperboloid { slope, s } => Some(Arc::new(Hyperboloid {
                slope: T::of(slope),
                s: T::of(s),
            })),
            FamilyTag::GaussianBump { height, width } => Some(Arc::new(GaussianBump {
                height: T::of(height),
                width: T::of(width),
            })),
            FamilyTag::FlattenedParaboloid { slope, s } => Some(Arc::new(FlattenedParaboloid {
                slope: T::of(slope),
                s: T::of(s),
            })),
            FamilyTag::Plugin { .. } => None,
        }
    }
}
