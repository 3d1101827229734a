use num_complex::Complex64;

use super::DenseComplexMatrix;
use crate::error::SpectrumError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Unitary reduction to upper Hessenberg form by Householder reflections.
pub fn hessenberg(a: &DenseComplexMatrix) -> DenseComplexMatrix {
    assert!(a.is_square());
    let n = a.rows();
    let mut h = a.as_slice().to_vec();
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let xnorm = (0..m).map(|i| h[(k + 1 + i) * n + k].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1) * n + k];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        for i in 0..m {
            v[i] = h[(k + 1 + i) * n + k];
        }
        v[0] -= alpha;
        let vn2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        let f = 2.0 / vn2;
        // Left: H <- (I - f v v^H) H on rows k+1.., columns k..
        for j in k..n {
            let s: Complex64 = (0..m).map(|i| v[i].conj() * h[(k + 1 + i) * n + j]).sum();
            let s = s * f;
            for i in 0..m {
                h[(k + 1 + i) * n + j] -= s * v[i];
            }
        }
        // Right: H <- H (I - f v v^H) on columns k+1..
        for i in 0..n {
            let row = &mut h[i * n + k + 1..i * n + n];
            let s: Complex64 = row.iter().zip(&v[..m]).map(|(&a, &b)| a * b).sum();
            let s = s * f;
            for (r, vl) in row.iter_mut().zip(&v[..m]) {
                *r -= s * vl.conj();
            }
        }
        h[(k + 1) * n + k] = alpha;
        for i in 1..m {
            h[(k + 1 + i) * n + k] = ZERO;
        }
    }
    DenseComplexMatrix::from_row_major(n, n, h)
}

/// All eigenvalues of a square complex matrix: Hessenberg reduction followed
/// by single-shift QR with Wilkinson shifts and deflation. Fails after
/// `100 · n` QR sweeps, returning the eigenvalues deflated so far.
pub fn eigenvalues(a: &DenseComplexMatrix) -> Result<Vec<Complex64>, SpectrumError> {
    if !a.is_square() {
        return Err(SpectrumError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let hm = hessenberg(a);
    let mut h = hm.as_slice().to_vec();
    let idx = |i: usize, j: usize| i * n + j;
    let mut eig = vec![ZERO; n];
    let mut found = vec![false; n];
    let max_sweeps = 100 * n;
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let mut rot: Vec<(Complex64, Complex64)> = vec![(ZERO, ZERO); n];
    let norm_est = hm.max_abs().max(f64::MIN_POSITIVE);

    loop {
        if hi == 0 {
            eig[0] = h[idx(0, 0)];
            found[0] = true;
            break;
        }
        // Find the start of the active unreduced block.
        let mut l = hi;
        while l > 0 {
            let sub = abs1(h[idx(l, l - 1)]);
            let mut diag = abs1(h[idx(l - 1, l - 1)]) + abs1(h[idx(l, l)]);
            if diag == 0.0 {
                diag = norm_est;
            }
            if sub <= f64::EPSILON * diag {
                h[idx(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[idx(hi, hi)];
            found[hi] = true;
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            let partial = (0..n).filter(|&i| found[i]).map(|i| eig[i]).collect::<Vec<_>>();
            return Err(SpectrumError::NoConvergence { sweeps, found: partial.len(), partial });
        }
        sweeps += 1;
        since_deflation += 1;

        let a11 = h[idx(hi - 1, hi - 1)];
        let a12 = h[idx(hi - 1, hi)];
        let a21 = h[idx(hi, hi - 1)];
        let a22 = h[idx(hi, hi)];
        let mu = if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            a22 + Complex64::new(1.5 * abs1(a21), 0.5 * abs1(a21))
        } else {
            let half = (a11 - a22) * 0.5;
            let disc = (half * half + a12 * a21).sqrt();
            let m1 = (a11 + a22) * 0.5 + disc;
            let m2 = (a11 + a22) * 0.5 - disc;
            if (m1 - a22).norm() <= (m2 - a22).norm() {
                m1
            } else {
                m2
            }
        };

        for k in l..=hi {
            h[idx(k, k)] -= mu;
        }
        // H - mu I = Q R by Givens rotations on rows of the active block.
        for k in l..hi {
            let x = h[idx(k, k)];
            let y = h[idx(k + 1, k)];
            let r = x.norm().hypot(y.norm());
            let (c, s) = if r == 0.0 { (Complex64::new(1.0, 0.0), ZERO) } else { (x / r, y / r) };
            rot[k] = (c, s);
            for j in k..=hi {
                let p = h[idx(k, j)];
                let q = h[idx(k + 1, j)];
                h[idx(k, j)] = c.conj() * p + s.conj() * q;
                h[idx(k + 1, j)] = -s * p + c * q;
            }
        }
        // R Q: apply the adjoint rotations on columns.
        for k in l..hi {
            let (c, s) = rot[k];
            for i in l..=(k + 1).min(hi) {
                let p = h[idx(i, k)];
                let q = h[idx(i, k + 1)];
                h[idx(i, k)] = p * c + q * s;
                h[idx(i, k + 1)] = -p * s.conj() + q * c.conj();
            }
        }
        for k in l..=hi {
            h[idx(k, k)] += mu;
        }
    }
    Ok(eig)
}
