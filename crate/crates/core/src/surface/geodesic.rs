//! Geodesic radius from the basepoint (parameter origin).
//!
//! Radial surfaces use the exact line integral rho(r) = int_0^r sqrt(1 + f'^2);
//! general surfaces fall back to shortest paths on a 16-connected parameter
//! grid with edge lengths from the first fundamental form.

use std::collections::BinaryHeap;
use std::sync::{Arc, RwLock};

use crate::linalg::gauss_legendre_on;
use crate::real::Real;
use crate::surface::families::{radial_derivs, RadialHeight};

/// Cached monotone map between parameter radius r and geodesic radius rho
/// for a radial surface.
pub struct RadialGeodesic<T: Real> {
    height: Arc<dyn RadialHeight<T>>,
    // breakpoints (r, rho), strictly increasing in both coordinates
    table: RwLock<Vec<(T, T)>>,
}

impl<T: Real> RadialGeodesic<T> {
    pub fn new(height: Arc<dyn RadialHeight<T>>) -> Self {
        let scale = height.length_scale();
        let mut pts = vec![(T::zero(), T::zero())];
        let mut r_prev = T::zero();
        let mut rho = T::zero();
        // log-spaced breakpoints from scale*2^-20 upward; extended on demand
        let mut r = scale * T::of(2.0_f64.powi(-20));
        while r < scale * T::of(16.0) {
            rho = rho + segment_len(height.as_ref(), r_prev, r);
            pts.push((r, rho));
            r_prev = r;
            r = r * T::two();
        }
        Self {
            height,
            table: RwLock::new(pts),
        }
    }

    fn ensure(&self, r: T) {
        let mut tab = self.table.write().unwrap();
        let (mut r_last, mut rho_last) = *tab.last().unwrap();
        while r_last < r {
            let r_next = r_last * T::two();
            rho_last = rho_last + segment_len(self.height.as_ref(), r_last, r_next);
            tab.push((r_next, rho_last));
            r_last = r_next;
        }
    }

    /// Geodesic radius of the parameter circle of radius r.
    pub fn rho_of_r(&self, r: T) -> T {
        if r <= T::zero() {
            return T::zero();
        }
        self.ensure(r);
        let tab = self.table.read().unwrap();
        let i = match tab.binary_search_by(|p| p.0.partial_cmp(&r).unwrap()) {
            Ok(i) => return tab[i].1,
            Err(i) => i,
        };
        let (r0, rho0) = tab[i - 1];
        rho0 + segment_len(self.height.as_ref(), r0, r)
    }

    /// Inverse map: parameter radius whose geodesic radius is rho.
    pub fn r_of_rho(&self, rho: T) -> T {
        if rho <= T::zero() {
            return T::zero();
        }
        // rho(r) >= r, so r = rho is an upper bound
        self.ensure(rho);
        let (mut lo, mut hi) = (T::zero(), rho);
        // bisection; the map is strictly increasing
        for _ in 0..200 {
            let mid = (lo + hi) * T::half();
            if self.rho_of_r(mid) < rho {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= hi * T::epsilon() * T::of(8.0) {
                break;
            }
        }
        (lo + hi) * T::half()
    }
}

fn segment_len<T: Real>(h: &dyn RadialHeight<T>, r0: T, r1: T) -> T {
    gauss_legendre_on(16, r0, r1)
        .into_iter()
        .map(|(r, w)| {
            let d = radial_derivs(h, r);
            w * (T::one() + d.fp * d.fp).sqrt()
        })
        .sum()
}

/// Shortest-path geodesic distances from the basepoint on a 16-connected
/// parameter grid. Edge lengths use the metric at edge midpoints; the
/// expected error (a few percent at worst) is acceptable because geodesic
/// radii only parameterize cutoff annuli.
pub struct GridGeodesic<T: Real> {
    pub u0: T,
    pub v0: T,
    pub step: T,
    pub n: usize, // grid is (2n+1) x (2n+1) centered at the basepoint
    pub dist: Vec<T>,
}

#[derive(PartialEq)]
struct HeapItem<T> {
    d: T,
    idx: usize,
}

impl<T: PartialEq> Eq for HeapItem<T> {}

impl<T: PartialOrd + PartialEq> Ord for HeapItem<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on distance
        other.d.partial_cmp(&self.d).unwrap()
    }
}

impl<T: PartialOrd + PartialEq> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> GridGeodesic<T> {
    /// Dijkstra from the center node of a square grid of half-width
    /// `halfwidth` with `2n+1` nodes per side.
    pub fn build<F>(metric_len: F, halfwidth: T, n: usize) -> Self
    where
        F: Fn(T, T, T, T) -> T, // length of the segment (u1,v1)-(u2,v2)
    {
        let side = 2 * n + 1;
        let step = halfwidth / T::of(n as f64);
        let coord = |i: usize| T::of(i as f64 - n as f64) * step;
        let idx = |i: usize, j: usize| i * side + j;
        let mut dist = vec![T::infinity(); side * side];
        let mut heap = BinaryHeap::new();
        dist[idx(n, n)] = T::zero();
        heap.push(HeapItem {
            d: T::zero(),
            idx: idx(n, n),
        });
        // kings plus knights: 16 directions cap the metrication error near 3%
        let neighbors: [(isize, isize); 16] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
            (-2, -1),
            (-2, 1),
            (-1, -2),
            (-1, 2),
            (1, -2),
            (1, 2),
            (2, -1),
            (2, 1),
        ];
        while let Some(HeapItem { d, idx: cur }) = heap.pop() {
            if d > dist[cur] {
                continue;
            }
            let (i, j) = (cur / side, cur % side);
            for &(di, dj) in &neighbors {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni as usize >= side || nj as usize >= side {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                let len = metric_len(coord(i), coord(j), coord(ni), coord(nj));
                let nd = d + len;
                let t = idx(ni, nj);
                if nd < dist[t] {
                    dist[t] = nd;
                    heap.push(HeapItem { d: nd, idx: t });
                }
            }
        }
        Self {
            u0: T::zero(),
            v0: T::zero(),
            step,
            n,
            dist,
        }
    }

    /// Bilinear interpolation of the distance field at (u, v).
    pub fn distance(&self, u: T, v: T) -> T {
        let side = 2 * self.n + 1;
        let fu = u / self.step + T::of(self.n as f64);
        let fv = v / self.step + T::of(self.n as f64);
        let iu = fu.floor().max(T::zero()).min(T::of((side - 2) as f64));
        let iv = fv.floor().max(T::zero()).min(T::of((side - 2) as f64));
        let (au, av) = (fu - iu, fv - iv);
        let (i, j) = (iu.as_f64() as usize, iv.as_f64() as usize);
        let g = |i: usize, j: usize| self.dist[i * side + j];
        let one = T::one();
        (one - au) * (one - av) * g(i, j)
            + au * (one - av) * g(i + 1, j)
            + (one - au) * av * g(i, j + 1)
            + au * av * g(i + 1, j + 1)
    }
}
