//! Global diagnostics over geodesic balls: total curvature, Hartman deficit,
//! and the boundary integral of ||B||.

use crate::error::{Error, Result};
use crate::linalg::{gauss_legendre_on, norm3, sub3};
use crate::real::Real;
use crate::surface::families::radial_derivs;
use crate::surface::{Surface, Symmetry};

/// Curvature totals over the geodesic ball B(R), with a tail proxy.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CurvatureTotals<T> {
    pub total_k: T,
    pub total_abs_k: T,
    /// Estimated |K| mass between R and 4R; large values flag non-convergence.
    pub tail_abs_k: T,
}

impl<T: Real> CurvatureTotals<T> {
    /// Whether the tail proxy is below `tol` relative to the collected mass.
    pub fn converged(&self, tol: T) -> bool {
        self.tail_abs_k <= tol * (self.total_abs_k + T::one())
    }
}

/// Integrates K and |K| over the geodesic ball of radius R.
pub fn total_curvature<T: Real>(surface: &Surface<T>, radius: T) -> Result<CurvatureTotals<T>> {
    if !(radius > T::zero()) {
        return Err(Error::Invalid("total_curvature needs R > 0".into()));
    }
    match surface.symmetry {
        Symmetry::Radial => {
            let r_max = surface.r_of_rho(radius)?;
            let (k, abs_k) = radial_k_mass(surface, T::zero(), r_max);
            let r_tail = surface.r_of_rho(radius * T::of(4.0))?;
            let (_, tail) = radial_k_mass(surface, r_max, r_tail);
            Ok(CurvatureTotals {
                total_k: k,
                total_abs_k: abs_k,
                tail_abs_k: tail,
            })
        }
        Symmetry::General => {
            // midpoint grid over the chart, clipped to the geodesic ball
            let n = 240usize;
            let half = surface.grid_halfwidth;
            let h = T::two() * half / T::of(n as f64);
            let mut k_sum = T::zero();
            let mut abs_sum = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let u = -half + h * (T::of(i as f64) + T::half());
                    let v = -half + h * (T::of(j as f64) + T::half());
                    if !surface.domain.contains(u, v) {
                        continue;
                    }
                    if surface.geodesic_radius(u, v) > radius {
                        continue;
                    }
                    let s = surface.sample(u, v)?;
                    let da = s.det_g.sqrt() * h * h;
                    k_sum += s.gauss * da;
                    abs_sum += s.gauss.abs() * da;
                }
            }
            Ok(CurvatureTotals {
                total_k: k_sum,
                total_abs_k: abs_sum,
                // the chart box is the coverage limit; no tail model
                tail_abs_k: T::zero(),
            })
        }
    }
}

/// (int K dA, int |K| dA) over the parameter annulus r in [r0, r1], radial case.
/// K dA reduces to 2 pi * f' f'' / (1 + f'^2)^{3/2} dr.
fn radial_k_mass<T: Real>(surface: &Surface<T>, r0: T, r1: T) -> (T, T) {
    let height = surface
        .radial_height()
        .expect("radial_k_mass on radial surface")
        .clone();
    let dens_at = |r: T| {
        let d = radial_derivs(height.as_ref(), r);
        let wfac = T::one() + d.fp * d.fp;
        d.fp * d.fpp / (wfac * wfac.sqrt())
    };
    let mut k = T::zero();
    let mut abs_k = T::zero();
    for (a, b) in log_panels(r0.max(T::zero()), r1, surface.length_scale()) {
        // split panels where the integrand changes sign so |K| stays smooth
        // on every Gauss panel (otherwise the abs kink costs ~1e-4 accuracy)
        let quarters: Vec<T> = (0..=4)
            .map(|i| a + (b - a) * T::of(i as f64 / 4.0))
            .collect();
        let mut cuts = vec![a];
        for q in quarters.windows(2) {
            let (mut lo, mut hi) = (q[0], q[1]);
            if dens_at(lo) * dens_at(hi) < T::zero() {
                for _ in 0..60 {
                    let mid = (lo + hi) * T::half();
                    if dens_at(lo) * dens_at(mid) <= T::zero() {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                cuts.push((lo + hi) * T::half());
            }
            cuts.push(q[1]);
        }
        for p in cuts.windows(2) {
            for (r, w) in gauss_legendre_on(24, p[0], p[1]) {
                let dens = dens_at(r);
                k += w * dens;
                abs_k += w * dens.abs();
            }
        }
    }
    let two_pi = T::two() * T::pi();
    (k * two_pi, abs_k * two_pi)
}

/// Panel subdivision of [r0, r1]: linear panels through the curved core, then
/// octave-spaced panels so far tails stay resolved.
pub(crate) fn log_panels<T: Real>(r0: T, r1: T, scale: T) -> Vec<(T, T)> {
    let mut cuts = vec![r0];
    let core = scale * T::of(4.0);
    if r0 < core.min(r1) {
        // 8 linear panels over the core
        let hi = core.min(r1);
        for i in 1..=8 {
            cuts.push(r0 + (hi - r0) * T::of(i as f64 / 8.0));
        }
    }
    let mut last = *cuts.last().unwrap();
    while last < r1 {
        last = (last * T::of(1.5)).min(r1);
        cuts.push(last);
    }
    cuts.windows(2)
        .filter(|p| p[1] > p[0])
        .map(|p| (p[0], p[1]))
        .collect()
}

/// Hartman diagnostic: isoperimetric constant of the end and the defect of
/// the identity  int K = 2 pi chi - lambda  (chi = 1 for graphs).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct HartmanEstimate<T> {
    pub lambda_estimate: T,
    pub residual: T,
    /// False when successive circumference ratios still drift.
    pub converged: bool,
}

/// Estimates lambda = lim Length(dB(rho))/rho from a sweep of radii, removing
/// the O(1/rho) offset by differencing the two largest radii.
pub fn hartman_deficit<T: Real>(surface: &Surface<T>, radii: &[T]) -> Result<HartmanEstimate<T>> {
    if radii.len() < 2 {
        return Err(Error::Invalid("hartman_deficit needs >= 2 radii".into()));
    }
    let mut lens = Vec::with_capacity(radii.len());
    for &rho in radii {
        lens.push(circle_length(surface, rho)?);
    }
    let n = radii.len();
    let (r_a, r_b) = (radii[n - 2], radii[n - 1]);
    let lambda = (lens[n - 1] - lens[n - 2]) / (r_b - r_a);
    let plain_a = lens[n - 2] / r_a;
    let plain_b = lens[n - 1] / r_b;
    let converged = (plain_b - plain_a).abs() <= T::of(0.02) * plain_b.abs().max(T::one());
    let totals = total_curvature(surface, radii[n - 1])?;
    let residual = (totals.total_k - (T::two() * T::pi() - lambda)).abs();
    Ok(HartmanEstimate {
        lambda_estimate: lambda,
        residual,
        converged,
    })
}

/// Length of the geodesic circle of radius rho.
pub fn circle_length<T: Real>(surface: &Surface<T>, rho: T) -> Result<T> {
    match surface.symmetry {
        Symmetry::Radial => {
            let r = surface.r_of_rho(rho)?;
            Ok(T::two() * T::pi() * r)
        }
        Symmetry::General => {
            let pts = geodesic_circle(surface, rho, 256)?;
            let mut len = T::zero();
            for w in pts.windows(2) {
                len += segment3(surface, w[0], w[1]);
            }
            if let (Some(&first), Some(&last)) = (pts.first(), pts.last()) {
                len += segment3(surface, last, first);
            }
            Ok(len)
        }
    }
}

fn segment3<T: Real>(surface: &Surface<T>, a: [T; 2], b: [T; 2]) -> T {
    let pa = surface.parametrization().point(a[0], a[1]);
    let pb = surface.parametrization().point(b[0], b[1]);
    norm3(sub3(pb, pa))
}

/// Parameter points of the geodesic circle, found by bisection along rays.
pub fn geodesic_circle<T: Real>(
    surface: &Surface<T>,
    rho: T,
    n_theta: usize,
) -> Result<Vec<[T; 2]>> {
    let mut pts = Vec::with_capacity(n_theta);
    for k in 0..n_theta {
        let theta = T::two() * T::pi() * T::of(k as f64) / T::of(n_theta as f64);
        let (c, s) = (theta.cos(), theta.sin());
        // bracket: geodesic radius >= chord radius, so r = rho is an upper bound
        let (mut lo, mut hi) = (T::zero(), rho);
        if surface.geodesic_radius(hi * c, hi * s) < rho {
            return Err(Error::Internal(format!(
                "geodesic circle bracket failed at rho = {}",
                rho.as_f64()
            )));
        }
        for _ in 0..80 {
            let mid = (lo + hi) * T::half();
            if surface.geodesic_radius(mid * c, mid * s) < rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = (lo + hi) * T::half();
        pts.push([r * c, r * s]);
    }
    Ok(pts)
}

/// Line integral of ||B|| over the geodesic circle of radius R.
pub fn boundary_b_integral<T: Real>(surface: &Surface<T>, radius: T) -> Result<T> {
    match surface.symmetry {
        Symmetry::Radial => {
            let r = surface.r_of_rho(radius)?;
            let nb = surface.norm_b_at_r(r)?;
            Ok(nb * T::two() * T::pi() * r)
        }
        Symmetry::General => {
            let pts = geodesic_circle(surface, radius, 256)?;
            let mut acc = T::zero();
            let n = pts.len();
            for i in 0..n {
                let p = pts[i];
                let q = pts[(i + 1) % n];
                let ds = segment3(surface, p, q);
                let mid = [(p[0] + q[0]) * T::half(), (p[1] + q[1]) * T::half()];
                let s = surface.sample(mid[0], mid[1])?;
                acc += s.norm_b * ds;
            }
            Ok(acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plane_totals_vanish() {
        let s = Surface::<f64>::plane();
        let t = total_curvature(&s, 7.0).unwrap();
        assert_eq!(t.total_k, 0.0);
        assert_eq!(t.total_abs_k, 0.0);
        assert_eq!(boundary_b_integral(&s, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn hyperboloid_total_curvature_is_gauss_cap_area() {
        // Normals of z = sqrt(1 + r^2) sweep the spherical cap of half-angle
        // 45 degrees: area 2 pi (1 - cos 45) = 2 pi (1 - 1/sqrt(2))
        let s = Surface::<f64>::hyperboloid(1.0, 1.0);
        let expect = 2.0 * std::f64::consts::PI * (1.0 - 1.0 / 2.0_f64.sqrt());
        let t = total_curvature(&s, 3000.0).unwrap();
        assert_relative_eq!(t.total_k, expect, max_relative = 1e-3);
        assert_relative_eq!(t.total_abs_k, expect, max_relative = 1e-3);
        assert!(t.converged(0.01));
    }

    #[test]
    fn gaussian_bump_total_curvature_cancels() {
        let s = Surface::<f64>::gaussian_bump(1.0, 1.0);
        let t = total_curvature(&s, 40.0).unwrap();
        assert!(t.total_k.abs() < 1e-6, "total K = {}", t.total_k);
        assert!(t.total_abs_k > 1.0); // cap and annulus both carry mass
    }

    #[test]
    fn abs_curvature_monotone_in_radius() {
        let s = Surface::<f64>::gaussian_bump(0.9, 1.3);
        let mut prev = 0.0;
        for rho in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let t = total_curvature(&s, rho).unwrap();
            assert!(t.total_abs_k >= prev - 1e-12);
            prev = t.total_abs_k;
        }
    }

    #[test]
    fn hartman_plane_and_hyperboloid() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let plane = Surface::<f64>::plane();
        let h = hartman_deficit(&plane, &[10.0, 20.0, 40.0]).unwrap();
        assert_relative_eq!(h.lambda_estimate, two_pi, max_relative = 1e-9);
        assert!(h.residual < 1e-8);

        let hyp = Surface::<f64>::hyperboloid(1.0, 1.0);
        let h = hartman_deficit(&hyp, &[200.0, 400.0, 800.0]).unwrap();
        assert_relative_eq!(h.lambda_estimate, two_pi / 2.0_f64.sqrt(), max_relative = 5e-3);
        assert!(h.residual < 0.05, "residual {}", h.residual);
        assert!(h.converged);
    }

    #[test]
    fn hartman_bump_recovers_flat_lambda() {
        let s = Surface::<f64>::gaussian_bump(1.0, 1.0);
        let h = hartman_deficit(&s, &[40.0, 80.0]).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        assert_relative_eq!(h.lambda_estimate, two_pi, max_relative = 1e-3);
        assert!(h.residual < 0.02);
    }

    #[test]
    fn boundary_b_integral_hyperboloid_bounded_below() {
        // ||B|| ~ c/r while circumference ~ c' r: the product stays positive
        let s = Surface::<f64>::hyperboloid(1.0, 1.0);
        for rho in [20.0, 80.0, 320.0] {
            let v = boundary_b_integral(&s, rho).unwrap();
            assert!(v > 1.0, "rho={rho} -> {v}");
        }
        // bump: not convex, the integral decays instead
        let b = Surface::<f64>::gaussian_bump(1.0, 1.0);
        let far = boundary_b_integral(&b, 30.0).unwrap();
        assert!(far < 1e-6, "{far}");
    }
}
