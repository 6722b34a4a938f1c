//! Quadrature grids over the surface chart, tensored with Gauss-Legendre
//! in the transverse direction.

use crate::error::{Error, Result};
use crate::linalg::gauss_legendre_on;
use crate::real::Real;

/// How the grid was built; kept so half-resolution copies can be rebuilt.
#[derive(Debug, Clone)]
pub enum GridSpec<T> {
    /// Polar grid: Gauss panels in r between the given breakpoints
    /// (log-subdivided), uniform trapezoid in the angle.
    Radial {
        breaks: Vec<T>,
        n_r: usize,
        n_theta: usize,
    },
    /// Tensor Gauss grid on a parameter rectangle.
    Tensor {
        half_u: T,
        half_v: T,
        n_u: usize,
        n_v: usize,
    },
}

/// Surface nodes with du dv weights plus the transverse rule order.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<T> {
    pub spec: GridSpec<T>,
    /// (u, v, weight) with weight already including the area element du dv
    /// of the chart (but not sqrt(det g)).
    pub nodes: Vec<[T; 3]>,
    pub n_t: usize,
    /// Covered parameter-radius interval.
    pub cover: (T, T),
}

impl<T: Real> QuadratureGrid<T> {
    /// Polar grid between radial breakpoints. Breakpoints should include the
    /// kinks of the integrand (cutoff radii); panels between them are
    /// geometrically subdivided so wide plateaus stay resolved.
    pub fn radial(breaks: &[T], n_r: usize, n_theta: usize, n_t: usize) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("radial breakpoints must increase".into()));
        }
        if !(breaks[0] >= T::zero()) {
            return Err(Error::Invalid("radial breakpoints must be >= 0".into()));
        }
        let n_r = n_r.max(2);
        let n_theta = n_theta.max(1);
        let dtheta = T::two() * T::pi() / T::of(n_theta as f64);
        let mut nodes = Vec::new();
        for w in breaks.windows(2) {
            for (a, b) in subdivide(w[0], w[1]) {
                for (r, wr) in gauss_legendre_on(n_r, a, b) {
                    for k in 0..n_theta {
                        let theta = dtheta * (T::of(k as f64) + T::half());
                        nodes.push([r * theta.cos(), r * theta.sin(), wr * r * dtheta]);
                    }
                }
            }
        }
        Ok(Self {
            spec: GridSpec::Radial {
                breaks: breaks.to_vec(),
                n_r,
                n_theta,
            },
            nodes,
            n_t: n_t.max(4),
            cover: (breaks[0], *breaks.last().unwrap()),
        })
    }

    /// Tensor Gauss grid on [-half_u, half_u] x [-half_v, half_v].
    pub fn tensor(half_u: T, half_v: T, n_u: usize, n_v: usize, n_t: usize) -> Result<Self> {
        if !(half_u > T::zero() && half_v > T::zero()) {
            return Err(Error::Invalid("tensor grid needs positive extents".into()));
        }
        let ru = gauss_legendre_on(n_u.max(2), -half_u, half_u);
        let rv = gauss_legendre_on(n_v.max(2), -half_v, half_v);
        let mut nodes = Vec::with_capacity(ru.len() * rv.len());
        for &(u, wu) in &ru {
            for &(v, wv) in &rv {
                nodes.push([u, v, wu * wv]);
            }
        }
        Ok(Self {
            spec: GridSpec::Tensor {
                half_u,
                half_v,
                n_u: n_u.max(2),
                n_v: n_v.max(2),
            },
            nodes,
            n_t: n_t.max(4),
            cover: (T::zero(), half_u.min(half_v)),
        })
    }

    /// Half-resolution copy used for the quadrature error estimate.
    pub fn halved(&self) -> Self {
        match &self.spec {
            GridSpec::Radial {
                breaks,
                n_r,
                n_theta,
            } => Self::radial(
                breaks,
                (n_r / 2).max(2),
                (n_theta / 2).max(1),
                (self.n_t / 2).max(4),
            )
            .expect("halved radial grid"),
            GridSpec::Tensor {
                half_u,
                half_v,
                n_u,
                n_v,
            } => Self::tensor(
                *half_u,
                *half_v,
                (n_u / 2).max(2),
                (n_v / 2).max(2),
                (self.n_t / 2).max(4),
            )
            .expect("halved tensor grid"),
        }
    }

    /// Verifies that a support annulus lies inside the covered radii.
    pub fn check_coverage(&self, support: (T, T)) -> Result<()> {
        let tol = T::of(1e-9) * (T::one() + self.cover.1);
        if support.0 < self.cover.0 - tol || support.1 > self.cover.1 + tol {
            return Err(Error::Coverage {
                support_lo: support.0.as_f64(),
                support_hi: support.1.as_f64(),
                cover_lo: self.cover.0.as_f64(),
                cover_hi: self.cover.1.as_f64(),
            });
        }
        Ok(())
    }
}

/// Geometric subdivision with ratio <= 2 (linear split near zero).
fn subdivide<T: Real>(a: T, b: T) -> Vec<(T, T)> {
    let mut cuts = vec![a];
    if a <= b * T::of(1e-6) {
        // panel touches the axis: 6 linear pieces
        for i in 1..6 {
            cuts.push(a + (b - a) * T::of(i as f64 / 6.0));
        }
    } else {
        let ratio = (b / a).as_f64();
        let m = ratio.ln().max(0.0) / 2.0_f64.ln();
        let m = (m.ceil() as usize).max(1);
        let step = (b / a).powf(T::one() / T::of(m as f64));
        let mut x = a;
        for _ in 1..m {
            x = x * step;
            cuts.push(x);
        }
    }
    cuts.push(b);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect()
}
