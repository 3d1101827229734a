use num_complex::Complex64;

use super::DenseComplexMatrix;

/// LU factorisation `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    singular: bool,
}

impl LuDecomposition {
    pub fn new(a: &DenseComplexMatrix) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let mut singular = false;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i * n + k].norm().partial_cmp(&lu[j * n + k].norm()).unwrap())
                .unwrap();
            if lu[p * n + k].norm() <= f64::EPSILON * scale * n as f64 {
                singular = true;
            }
            if lu[p * n + k].norm() == 0.0 {
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Self { n, lu, perm, singular }
    }

    /// True when a pivot fell below `n · eps · max|A|`.
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: Complex64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    pub fn determinant(&self) -> Complex64 {
        let n = self.n;
        let mut det: Complex64 = (0..n).map(|i| self.lu[i * n + i]).product();
        // Sign of the permutation from its cycle decomposition.
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        det
    }
}

/// Solves `A x = b`; `None` if `A` is numerically singular.
pub fn lu_solve(a: &DenseComplexMatrix, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let lu = LuDecomposition::new(a);
    if lu.is_singular() {
        return None;
    }
    Some(lu.solve(b))
}
