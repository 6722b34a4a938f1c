//! Small dense helpers: 2x2 symmetric matrices, 3-vectors, Gauss-Legendre
//! rules, deterministic summation, and the tiny dense eigen/Cholesky kernels
//! used by the Rayleigh-Ritz step of the eigensolver.

use crate::real::Real;

/// Symmetric 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> Sym2<T> {
    pub fn new(xx: T, xy: T, yy: T) -> Self {
        Self { xx, xy, yy }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::one())
    }

    pub fn det(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        Self::new(self.yy / d, -self.xy / d, self.xx / d)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }

    /// v^T A w for column 2-vectors.
    pub fn quad(&self, v: [T; 2], w: [T; 2]) -> T {
        v[0] * (self.xx * w[0] + self.xy * w[1]) + v[1] * (self.xy * w[0] + self.yy * w[1])
    }

    /// A * B * A for symmetric A = self and symmetric B (result symmetric).
    pub fn sandwich(&self, b: &Self) -> Self {
        // rows of self
        let (a11, a12, a22) = (self.xx, self.xy, self.yy);
        // C = A*B
        let c11 = a11 * b.xx + a12 * b.xy;
        let c12 = a11 * b.xy + a12 * b.yy;
        let c21 = a12 * b.xx + a22 * b.xy;
        let c22 = a12 * b.xy + a22 * b.yy;
        // C*A
        Sym2::new(
            c11 * a11 + c12 * a12,
            c11 * a12 + c12 * a22,
            c21 * a12 + c22 * a22,
        )
    }

    /// Eigenvalues of the generalized problem self * v = mu * g * v
    /// (both symmetric, g positive definite), sorted ascending.
    pub fn generalized_eigs(&self, g: &Sym2<T>) -> [T; 2] {
        // mu solves det(self - mu g) = 0:
        // det(g) mu^2 - (a11 g22 + a22 g11 - 2 a12 g12) mu + det(self) = 0
        let dg = g.det();
        let beta = self.xx * g.yy + self.yy * g.xx - T::two() * self.xy * g.xy;
        let da = self.det();
        let disc = (beta * beta - T::of(4.0) * dg * da).max(T::zero()).sqrt();
        let mu1 = (beta - disc) / (T::two() * dg);
        let mu2 = (beta + disc) / (T::two() * dg);
        [mu1, mu2]
    }
}

pub fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3<T: Real>(a: [T; 3]) -> T {
    dot3(a, a).sqrt()
}

pub fn scale3<T: Real>(a: [T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn sub3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on P_n in f64 and lifted to T; accurate to
/// machine precision for the orders used here (n <= 64).
pub fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // initial guess (Tricomi)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((T::of(x), T::of(w)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on<T: Real>(n: usize, a: T, b: T) -> Vec<(T, T)> {
    let mid = (a + b) * T::half();
    let hal = (b - a) * T::half();
    gauss_legendre::<T>(n)
        .into_iter()
        .map(|(x, w)| (mid + hal * x, w * hal))
        .collect()
}

/// Deterministic pairwise summation; independent of thread count because the
/// order is fixed by the slice layout.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Dense column-major symmetric storage for the Rayleigh-Ritz kernels.
#[derive(Debug, Clone)]
pub struct DenseMat<T> {
    pub n: usize,
    pub data: Vec<T>, // column major, n x n
}

impl<T: Real> DenseMat<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.n + i] = v;
    }
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi.
/// Returns (eigenvalues ascending, eigenvectors as columns).
pub fn sym_eig_small<T: Real>(a: &DenseMat<T>) -> (Vec<T>, DenseMat<T>) {
    let n = a.n;
    let mut m = a.clone();
    let mut v = DenseMat::zeros(n);
    for i in 0..n {
        v.set(i, i, T::one());
    }
    let eps = T::epsilon() * T::of(16.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + m.get(p, q) * m.get(p, q);
            }
        }
        let scale: T = (0..n).map(|i| m.get(i, i).abs()).sum::<T>() + T::of(1e-300);
        if off.sqrt() <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (T::two() * apq);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let vals: Vec<T> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vecs = DenseMat::zeros(n);
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            vecs.set(i, newj, v.get(i, oldj));
        }
    }
    (vals, vecs)
}

/// In-place Cholesky A = L L^T for a small symmetric positive-definite
/// matrix; returns None if a pivot drops below tol * diagonal scale.
pub fn cholesky_small<T: Real>(a: &DenseMat<T>, tol: T) -> Option<DenseMat<T>> {
    let n = a.n;
    let scale = (0..n)
        .map(|i| a.get(i, i).abs())
        .fold(T::zero(), |m, x| m.max(x));
    let mut l = DenseMat::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d = d - l.get(j, k) * l.get(j, k);
        }
        if d <= tol * scale {
            return None;
        }
        let dj = d.sqrt();
        l.set(j, j, dj);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s = s - l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / dj);
        }
    }
    Some(l)
}

/// Solve L^T X = B in place where L is lower triangular (B column major).
pub fn solve_lt<T: Real>(l: &DenseMat<T>, b: &mut DenseMat<T>) {
    let n = l.n;
    for col in 0..b.n {
        for i in (0..n).rev() {
            let mut s = b.get(i, col);
            for k in (i + 1)..n {
                s = s - l.get(k, i) * b.get(k, col);
            }
            b.set(i, col, s / l.get(i, i));
        }
    }
}

/// Solve L X = B in place where L is lower triangular.
pub fn solve_l<T: Real>(l: &DenseMat<T>, b: &mut DenseMat<T>) {
    let n = l.n;
    for col in 0..b.n {
        for i in 0..n {
            let mut s = b.get(i, col);
            for k in 0..i {
                s = s - l.get(i, k) * b.get(k, col);
            }
            b.set(i, col, s / l.get(i, i));
        }
    }
}
