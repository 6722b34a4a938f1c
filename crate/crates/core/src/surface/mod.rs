//! Embedded surfaces and their pointwise differential geometry.

pub mod admissibility;
pub mod families;
pub mod geodesic;
pub mod integrals;

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{cross3, dot3, norm3, scale3, Sym2};
use crate::real::Real;

use families::{radial_derivs, FamilyTag, RadialHeight};
use geodesic::{GridGeodesic, RadialGeodesic};

/// Position and first/second parameter derivatives of the embedding at (u, v).
#[derive(Debug, Clone, Copy)]
pub struct SurfaceJet<T> {
    pub p: [T; 3],
    pub p_u: [T; 3],
    pub p_v: [T; 3],
    pub p_uu: [T; 3],
    pub p_uv: [T; 3],
    pub p_vv: [T; 3],
}

/// A pluggable parametrization p: (u, v) -> R^3.
///
/// Built-in families override `jet` with analytic derivatives; plug-ins can
/// rely on the central-difference default.
pub trait Parametrization<T: Real>: Send + Sync {
    fn point(&self, u: T, v: T) -> [T; 3];

    /// Finite-difference step, relative to the surface length scale.
    fn fd_step(&self) -> T {
        T::of(1e-4)
    }

    fn jet(&self, u: T, v: T) -> SurfaceJet<T> {
        let h = self.fd_step();
        let p = self.point(u, v);
        let pu1 = self.point(u + h, v);
        let pu0 = self.point(u - h, v);
        let pv1 = self.point(u, v + h);
        let pv0 = self.point(u, v - h);
        let puv = self.point(u + h, v + h);
        let puv2 = self.point(u + h, v - h);
        let puv3 = self.point(u - h, v + h);
        let puv4 = self.point(u - h, v - h);
        let two_h = T::two() * h;
        let h2 = h * h;
        let mut jet = SurfaceJet {
            p,
            p_u: [T::zero(); 3],
            p_v: [T::zero(); 3],
            p_uu: [T::zero(); 3],
            p_uv: [T::zero(); 3],
            p_vv: [T::zero(); 3],
        };
        for k in 0..3 {
            jet.p_u[k] = (pu1[k] - pu0[k]) / two_h;
            jet.p_v[k] = (pv1[k] - pv0[k]) / two_h;
            jet.p_uu[k] = (pu1[k] - T::two() * p[k] + pu0[k]) / h2;
            jet.p_vv[k] = (pv1[k] - T::two() * p[k] + pv0[k]) / h2;
            jet.p_uv[k] = (puv[k] - puv2[k] - puv3[k] + puv4[k]) / (T::of(4.0) * h2);
        }
        jet
    }
}

/// Graph z = F(u^2 + v^2) as a parametrization with analytic jet.
pub struct RadialGraph<T: Real> {
    pub height: Arc<dyn RadialHeight<T>>,
}

impl<T: Real> Parametrization<T> for RadialGraph<T> {
    fn point(&self, u: T, v: T) -> [T; 3] {
        let (f, _, _) = self.height.height(u * u + v * v);
        [u, v, f]
    }

    fn jet(&self, u: T, v: T) -> SurfaceJet<T> {
        let q = u * u + v * v;
        let (f, f1, f2) = self.height.height(q);
        let two = T::two();
        let four = T::of(4.0);
        // w = F(q): w_u = 2u F', w_uu = 2F' + 4u^2 F'', w_uv = 4uv F''
        SurfaceJet {
            p: [u, v, f],
            p_u: [T::one(), T::zero(), two * u * f1],
            p_v: [T::zero(), T::one(), two * v * f1],
            p_uu: [T::zero(), T::zero(), two * f1 + four * u * u * f2],
            p_uv: [T::zero(), T::zero(), four * u * v * f2],
            p_vv: [T::zero(), T::zero(), two * f1 + four * v * v * f2],
        }
    }
}

/// Parameter domain of the chart.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Domain<T> {
    FullPlane,
    Rect { half_u: T, half_v: T },
}

impl<T: Real> Domain<T> {
    pub fn contains(&self, u: T, v: T) -> bool {
        match *self {
            Domain::FullPlane => true,
            Domain::Rect { half_u, half_v } => u.abs() <= half_u && v.abs() <= half_v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Symmetry {
    Radial,
    General,
}

/// Full pointwise geometric state at one surface point.
#[derive(Debug, Clone, Copy)]
pub struct GeomSample<T> {
    pub point: [T; 3],
    /// Unit normal, oriented with positive z at the basepoint for graphs.
    pub normal: [T; 3],
    /// z-component of the normal.
    pub n_z: T,
    /// First fundamental form.
    pub g: Sym2<T>,
    /// Second fundamental form.
    pub b: Sym2<T>,
    pub kappa1: T,
    pub kappa2: T,
    /// Gauss curvature K = kappa1 * kappa2.
    pub gauss: T,
    /// Mean curvature in the trace convention H = kappa1 + kappa2.
    pub mean: T,
    /// ||B|| = sqrt(kappa1^2 + kappa2^2).
    pub norm_b: T,
    pub det_g: T,
}

/// An embedded complete surface with its chart, symmetry tag and caches.
pub struct Surface<T: Real> {
    pub tag: FamilyTag,
    pub symmetry: Symmetry,
    pub domain: Domain<T>,
    param: Arc<dyn Parametrization<T>>,
    radial: Option<Arc<dyn RadialHeight<T>>>,
    radial_geo: OnceLock<Arc<RadialGeodesic<T>>>,
    grid_geo: OnceLock<Arc<GridGeodesic<T>>>,
    /// Grid half-width / resolution for general-surface geodesics.
    pub grid_halfwidth: T,
    pub grid_n: usize,
}

impl<T: Real> Surface<T> {
    fn from_radial(tag: FamilyTag) -> Self {
        let height = tag.build_radial::<T>().expect("radial family");
        Self {
            tag,
            symmetry: Symmetry::Radial,
            domain: Domain::FullPlane,
            param: Arc::new(RadialGraph {
                height: height.clone(),
            }),
            radial: Some(height),
            radial_geo: OnceLock::new(),
            grid_geo: OnceLock::new(),
            grid_halfwidth: T::of(50.0),
            grid_n: 400,
        }
    }

    pub fn plane() -> Self {
        Self::from_radial(FamilyTag::Plane)
    }

    pub fn hyperboloid(slope: f64, s: f64) -> Self {
        Self::from_radial(FamilyTag::Hyperboloid { slope, s })
    }

    pub fn gaussian_bump(height: f64, width: f64) -> Self {
        Self::from_radial(FamilyTag::GaussianBump { height, width })
    }

    pub fn flattened_paraboloid(slope: f64, s: f64) -> Self {
        Self::from_radial(FamilyTag::FlattenedParaboloid { slope, s })
    }

    pub fn from_tag(tag: &FamilyTag) -> Result<Self> {
        if tag.build_radial::<T>().is_none() {
            return Err(Error::Invalid(format!(
                "family {} has no built-in construction",
                tag.label()
            )));
        }
        Ok(Self::from_radial(tag.clone()))
    }

    /// Wrap a user-supplied parametrization (central-difference derivatives).
    pub fn plugin(
        name: &str,
        param: Arc<dyn Parametrization<T>>,
        domain: Domain<T>,
        grid_halfwidth: T,
        grid_n: usize,
    ) -> Self {
        Self {
            tag: FamilyTag::Plugin { name: name.into() },
            symmetry: Symmetry::General,
            domain,
            param,
            radial: None,
            radial_geo: OnceLock::new(),
            grid_geo: OnceLock::new(),
            grid_halfwidth,
            grid_n,
        }
    }

    pub fn parametrization(&self) -> &dyn Parametrization<T> {
        self.param.as_ref()
    }

    pub fn radial_height(&self) -> Option<&Arc<dyn RadialHeight<T>>> {
        self.radial.as_ref()
    }

    pub fn length_scale(&self) -> T {
        match &self.radial {
            Some(h) => h.length_scale(),
            None => T::one(),
        }
    }

    /// Pointwise geometry; errors if the immersion degenerates numerically.
    pub fn sample(&self, u: T, v: T) -> Result<GeomSample<T>> {
        let jet = self.param.jet(u, v);
        sample_from_jet(&jet).ok_or_else(|| Error::ImmersionFailure {
            u: u.as_f64(),
            v: v.as_f64(),
            det_g: {
                let g = first_form(&jet);
                g.det().as_f64()
            },
        })
    }

    fn radial_geodesic(&self) -> &Arc<RadialGeodesic<T>> {
        self.radial_geo.get_or_init(|| {
            Arc::new(RadialGeodesic::new(
                self.radial.as_ref().expect("radial surface").clone(),
            ))
        })
    }

    fn grid_geodesic(&self) -> &Arc<GridGeodesic<T>> {
        self.grid_geo.get_or_init(|| {
            let param = self.param.clone();
            let metric_len = move |u1: T, v1: T, u2: T, v2: T| {
                let a = param.point(u1, v1);
                let b = param.point(u2, v2);
                norm3([b[0] - a[0], b[1] - a[1], b[2] - a[2]])
            };
            Arc::new(GridGeodesic::build(
                metric_len,
                self.grid_halfwidth,
                self.grid_n,
            ))
        })
    }

    /// Geodesic distance from the basepoint (parameter origin).
    pub fn geodesic_radius(&self, u: T, v: T) -> T {
        match self.symmetry {
            Symmetry::Radial => self.radial_geodesic().rho_of_r((u * u + v * v).sqrt()),
            Symmetry::General => self.grid_geodesic().distance(u, v),
        }
    }

    /// Geodesic radius of the parameter circle of radius r (radial only).
    pub fn rho_of_r(&self, r: T) -> Result<T> {
        if self.symmetry != Symmetry::Radial {
            return Err(Error::NonRadial);
        }
        Ok(self.radial_geodesic().rho_of_r(r))
    }

    /// Parameter radius of the geodesic circle of radius rho (radial only).
    pub fn r_of_rho(&self, rho: T) -> Result<T> {
        if self.symmetry != Symmetry::Radial {
            return Err(Error::NonRadial);
        }
        Ok(self.radial_geodesic().r_of_rho(rho))
    }

    /// ||B|| along the radial profile (radial only).
    pub fn norm_b_at_r(&self, r: T) -> Result<T> {
        let h = self.radial.as_ref().ok_or(Error::NonRadial)?;
        let (k1, k2) = families::radial_curvatures(h.as_ref(), r);
        Ok((k1 * k1 + k2 * k2).sqrt())
    }

    /// Slope data of the radial profile (radial only).
    pub fn radial_slope(&self, r: T) -> Result<T> {
        let h = self.radial.as_ref().ok_or(Error::NonRadial)?;
        Ok(radial_derivs(h.as_ref(), r).fp)
    }
}

fn first_form<T: Real>(jet: &SurfaceJet<T>) -> Sym2<T> {
    Sym2::new(
        dot3(jet.p_u, jet.p_u),
        dot3(jet.p_u, jet.p_v),
        dot3(jet.p_v, jet.p_v),
    )
}

/// Build the geometric state from a jet; None if det(g) is not safely positive.
pub fn sample_from_jet<T: Real>(jet: &SurfaceJet<T>) -> Option<GeomSample<T>> {
    let g = first_form(jet);
    let det_g = g.det();
    let scale = g.xx * g.yy;
    if !(det_g > scale * T::of(1e-12)) {
        return None;
    }
    let n_raw = cross3(jet.p_u, jet.p_v);
    let normal = scale3(n_raw, T::one() / norm3(n_raw));
    let b = Sym2::new(
        dot3(jet.p_uu, normal),
        dot3(jet.p_uv, normal),
        dot3(jet.p_vv, normal),
    );
    let gauss = b.det() / det_g;
    let ginv = g.inverse();
    // H = tr(g^-1 b)
    let mean = ginv.xx * b.xx + T::two() * ginv.xy * b.xy + ginv.yy * b.yy;
    let disc = (mean * mean - T::of(4.0) * gauss).max(T::zero()).sqrt();
    let kappa1 = (mean - disc) * T::half();
    let kappa2 = (mean + disc) * T::half();
    let norm_b = (kappa1 * kappa1 + kappa2 * kappa2).sqrt();
    Some(GeomSample {
        point: jet.p,
        normal,
        n_z: normal[2],
        g,
        b,
        kappa1,
        kappa2,
        gauss,
        mean,
        norm_b,
        det_g,
    })
}
