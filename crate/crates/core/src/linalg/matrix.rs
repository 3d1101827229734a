use std::io::Write;
use std::ops::{Index, IndexMut};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl DenseComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds the matrix row by row in parallel; `f(i, row)` fills row `i`.
    pub fn from_rows_par(rows: usize, cols: usize, f: impl Fn(usize, &mut [Complex64]) + Sync) -> Self {
        let mut data = vec![ZERO; rows * cols];
        if cols > 0 {
            data.par_chunks_mut(cols).enumerate().for_each(|(i, row)| f(i, row));
        }
        Self { rows, cols, data }
    }

    /// Takes ownership of row-major data.
    ///
    /// # Panics
    /// If `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { data: self.data.iter().map(|&z| z * s).collect(), ..*self }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: Complex64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + s * b).collect();
        Self { data, ..*self }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copy of the `nr × nc` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Adds `s * block` into the sub-matrix starting at `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &Self, s: Complex64) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        for i in 0..block.rows {
            let dst = &mut self.data[(r0 + i) * self.cols + c0..(r0 + i) * self.cols + c0 + block.cols];
            for (d, &b) in dst.iter_mut().zip(block.row(i)) {
                *d += s * b;
            }
        }
    }

    /// Adds `s` to the diagonal of the square sub-block of size `n` at `(r0, c0)`.
    pub fn add_identity_block(&mut self, r0: usize, c0: usize, n: usize, s: Complex64) {
        for i in 0..n {
            self[(r0 + i, c0 + i)] += s;
        }
    }

    /// `self * x`. Rows are independent, each summed in a fixed order, so the
    /// result does not depend on the thread count.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "vector length does not match columns");
        let mut y = vec![ZERO; self.rows];
        let body = |(i, yi): (usize, &mut Complex64)| {
            *yi = self.row(i).iter().zip(x).fold(ZERO, |acc, (&a, &b)| acc + a * b);
        };
        if self.rows * self.cols >= 1 << 16 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
        y
    }

    /// Dense product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let n = other.cols;
        Self::from_rows_par(self.rows, n, |i, out| {
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        })
    }

    /// Writes `row,col,re,im` lines with a header.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "row,col,re,im")?;
        for i in 0..self.rows {
            for (j, z) in self.row(i).iter().enumerate() {
                writeln!(w, "{i},{j},{:e},{:e}", z.re, z.im)?;
            }
        }
        w.flush()
    }
}

impl Index<(usize, usize)> for DenseComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_matches_hand_computation() {
        let a = DenseComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, 0.0)]);
        let b = DenseComplexMatrix::from_row_major(2, 1, vec![c(1.0, 1.0), c(3.0, 0.0)]);
        let p = a.matmul(&b);
        assert_eq!(p.as_slice(), &[c(1.0, 4.0), c(2.0, 2.0)]);
        assert_eq!(a.matvec(&[c(1.0, 1.0), c(3.0, 0.0)]), vec![c(1.0, 4.0), c(2.0, 2.0)]);
    }

    #[test]
    fn block_round_trip() {
        let mut m = DenseComplexMatrix::zeros(4, 4);
        let b = DenseComplexMatrix::identity(2);
        m.add_block(2, 0, &b, c(0.0, 2.0));
        assert_eq!(m.block(2, 0, 2, 2), b.scaled(c(0.0, 2.0)));
        assert_eq!(m[(0, 0)], ZERO);
    }
}
