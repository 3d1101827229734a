//! Unrestarted GMRES with a zero initial guess.

use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::formulations::BlockSystem;
use crate::linalg::{norm2, DenseComplexMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Arnoldi vectors with norm below this are treated as a breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Relative residual `‖b - A y‖ / ‖b‖` at which to stop.
    pub tol: f64,
    /// Iteration cap; `None` means the system dimension.
    pub max_iter: Option<usize>,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    /// Relative residual before the first iteration (1) and after each one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// The Arnoldi process produced a (numerically) zero vector.
    pub breakdown: bool,
    /// `‖b - A y‖ / ‖b‖` recomputed from the returned solution.
    pub true_residual: f64,
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    /// Writes `iteration,residual`.
    pub fn write_residuals_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "iteration,residual")?;
        for (i, r) in self.residual_history.iter().enumerate() {
            writeln!(w, "{i},{r:e}")?;
        }
        Ok(())
    }
}

/// Solves an assembled formulation.
pub fn gmres(system: &BlockSystem, opts: GmresOptions) -> SolveReport {
    gmres_dense(&system.matrix, &system.rhs, opts)
}

/// GMRES on a dense matrix.
pub fn gmres_dense(a: &DenseComplexMatrix, b: &[Complex64], opts: GmresOptions) -> SolveReport {
    gmres_impl(a, b, opts).0
}

/// GMRES that also returns the orthonormal Arnoldi basis.
pub fn gmres_with_basis(
    a: &DenseComplexMatrix,
    b: &[Complex64],
    opts: GmresOptions,
) -> (SolveReport, Vec<Vec<Complex64>>) {
    gmres_impl(a, b, opts)
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

fn gmres_impl(a: &DenseComplexMatrix, b: &[Complex64], opts: GmresOptions) -> (SolveReport, Vec<Vec<Complex64>>) {
    let start = Instant::now();
    assert!(a.is_square() && a.rows() == b.len(), "GMRES needs a square system matching the right-hand side");
    let n = b.len();
    let max_iter = opts.max_iter.unwrap_or(n).min(n);
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        let report = SolveReport {
            solution: vec![ZERO; n],
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
            breakdown: false,
            true_residual: 0.0,
            wall_time: start.elapsed(),
        };
        return (report, Vec::new());
    }

    let mut basis: Vec<Vec<Complex64>> = vec![b.iter().map(|z| z / bnorm).collect()];
    // Columns of the Hessenberg matrix, already rotated into triangular form.
    let mut r: Vec<Vec<Complex64>> = Vec::with_capacity(max_iter);
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(max_iter);
    let mut g = vec![Complex64::new(bnorm, 0.0)];
    let mut history = vec![1.0];
    let mut breakdown = false;
    let mut converged = 1.0 <= opts.tol;

    let mut j = 0;
    while j < max_iter && !converged {
        let mut v = a.matvec(&basis[j]);
        let mut h = vec![ZERO; j + 2];
        // Modified Gram-Schmidt, then one re-orthogonalisation pass.
        for _pass in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = dot(q, &v);
                h[i] += c;
                for (vk, qk) in v.iter_mut().zip(q) {
                    *vk -= c * qk;
                }
            }
        }
        let hnext = norm2(&v);
        h[j + 1] = Complex64::new(hnext, 0.0);

        for (i, &(c, s)) in rotations.iter().enumerate() {
            let t = c * h[i] + s * h[i + 1];
            h[i + 1] = -s.conj() * h[i] + c * h[i + 1];
            h[i] = t;
        }
        let (c, s, rho) = givens(h[j], h[j + 1]);
        h[j] = rho;
        h[j + 1] = ZERO;
        rotations.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s.conj() * gj);
        r.push(h);
        j += 1;

        let rel = g[j].norm() / bnorm;
        history.push(rel);
        converged = rel <= opts.tol;
        if hnext <= BREAKDOWN_TOL * bnorm.max(1.0) {
            breakdown = !converged;
            // Exact invariant subspace: the least squares solution is exact.
            if breakdown && rel <= 1e3 * f64::EPSILON {
                breakdown = false;
            }
            break;
        }
        basis.push(v.iter().map(|z| z / hnext).collect());
    }

    // Back substitution for the least squares coefficients.
    let m = j;
    let mut coef = vec![ZERO; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for k in i + 1..m {
            s -= r[k][i] * coef[k];
        }
        coef[i] = if r[i][i] == ZERO { ZERO } else { s / r[i][i] };
    }
    let mut x = vec![ZERO; n];
    for (ck, q) in coef.iter().zip(&basis) {
        for (xi, qi) in x.iter_mut().zip(q) {
            *xi += ck * qi;
        }
    }
    let ax = a.matvec(&x);
    let res: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let true_residual = norm2(&res) / bnorm;
    basis.truncate(m.max(1));
    let report = SolveReport {
        solution: x,
        iterations: m,
        residual_history: history,
        converged,
        breakdown,
        true_residual,
        wall_time: start.elapsed(),
    };
    (report, basis)
}

/// Rotation `[c, s; -s̄, c]` (real `c`) that maps `(a, b)` to `(ρ, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO, a);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn, Complex64::new(bn, 0.0));
    }
    let nrm = an.hypot(bn);
    let phase = a / an;
    let c = an / nrm;
    let s = phase * b.conj() / nrm;
    (c, s, phase * nrm)
}
