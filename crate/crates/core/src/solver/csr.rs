//! Minimal sparse symmetric matrix support for the eigensolver.

use rayon::prelude::*;

use crate::real::Real;

/// Compressed sparse row matrix, built from triplets.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &mut Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut prev: Option<(usize, usize)> = None;
        for &(r, c, v) in triplets.iter() {
            if prev == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                prev = Some((r, c));
            }
        }
        for r in 1..=n {
            row_ptr[r] += row_ptr[r - 1];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    d[r] += self.values[k];
                }
            }
        }
        d
    }

    /// y = A x, parallel over rows.
    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut s = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        });
    }

    /// Max |A_ij - A_ji| over stored entries (symmetry check).
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let mut mirror = T::zero();
                for k2 in self.row_ptr[c]..self.row_ptr[c + 1] {
                    if self.col_idx[k2] == r {
                        mirror = self.values[k2];
                    }
                }
                worst = worst.max((self.values[k] - mirror).abs());
            }
        }
        worst
    }

    /// Coordinate-format text dump: "row col value" per line, 0-based.
    pub fn to_triplet_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push_str(&format!(
                    "{} {} {:e}\n",
                    r,
                    self.col_idx[k],
                    self.values[k].as_f64()
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_assemble_and_multiply() {
        let mut t = vec![
            (0usize, 0usize, 2.0),
            (0, 1, -1.0),
            (1, 0, -1.0),
            (1, 1, 2.0),
            (1, 1, 0.5), // duplicate accumulates
            (2, 2, 3.0),
        ];
        let a = CsrMatrix::from_triplets(3, &mut t);
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        a.mul_vec(&x, &mut y);
        assert_eq!(y, [0.0, 4.0, 9.0]);
        assert_eq!(a.diagonal(), vec![2.0, 2.5, 3.0]);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn empty_rows_are_handled() {
        let mut t = vec![(0usize, 0usize, 1.0), (3, 3, 4.0)];
        let a = CsrMatrix::from_triplets(4, &mut t);
        let x = [1.0, 1.0, 1.0, 1.0];
        let mut y = [0.0; 4];
        a.mul_vec(&x, &mut y);
        assert_eq!(y, [1.0, 0.0, 0.0, 4.0]);
    }
}
