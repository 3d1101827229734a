//! Eigenvalue distributions of assembled systems and their squares, and the
//! discrete Calderon identity check.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, GeometryError, SpectrumError};
use crate::formulations::{AccumulationPrediction, BlockSystem};
use crate::geometry::BoundaryMesh;
use crate::linalg::{self, DenseComplexMatrix, LuDecomposition};
use crate::operators::{assemble_all, targets_of};

/// Largest matrix handed to the dense eigensolver.
pub const DEFAULT_CAP: usize = 3000;
/// Clustering radius used by the reports unless overridden (a test calibration).
pub const DEFAULT_RADIUS: f64 = 0.25;

/// All eigenvalues of `m`, refusing matrices larger than [`DEFAULT_CAP`].
pub fn eigenvalues(m: &DenseComplexMatrix) -> Result<Vec<Complex64>, SpectrumError> {
    eigenvalues_capped(m, DEFAULT_CAP)
}

pub fn eigenvalues_capped(m: &DenseComplexMatrix, cap: usize) -> Result<Vec<Complex64>, SpectrumError> {
    if !m.is_square() {
        return Err(SpectrumError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() > cap {
        return Err(SpectrumError::TooLarge { dim: m.rows(), cap });
    }
    linalg::eigenvalues(m)
}

/// Backward error `‖Av - λv‖ / ‖A‖_F` of the eigenpair obtained from `lambda`
/// by a few steps of inverse iteration.
pub fn backward_error(m: &DenseComplexMatrix, lambda: Complex64) -> f64 {
    let n = m.rows();
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let shift = lambda + Complex64::new(1e-10, 1e-10) * scale;
    let mut shifted = m.clone();
    shifted.add_identity_block(0, 0, n, -shift);
    let lu = LuDecomposition::new(&shifted);
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, (i as f64 * 0.618).sin())).collect();
    for _ in 0..3 {
        v = lu.solve(&v);
        let norm = linalg::norm2(&v);
        if !(norm.is_finite() && norm > 0.0) {
            return f64::INFINITY;
        }
        v.iter_mut().for_each(|z| *z /= norm);
    }
    let av = m.matvec(&v);
    let r: Vec<Complex64> = av.iter().zip(&v).map(|(a, x)| a - lambda * x).collect();
    linalg::norm2(&r) / scale
}

/// Eigenvalues of one matrix with clustering statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub label: String,
    pub eigenvalues: Vec<Complex64>,
    pub prediction: Option<AccumulationPrediction>,
    pub radius: f64,
    /// Fraction of eigenvalues within `radius` of each predicted point.
    pub clustering: Vec<f64>,
    pub spectral_radius: f64,
}

impl SpectrumReport {
    pub fn new(
        label: impl Into<String>,
        eigenvalues: Vec<Complex64>,
        prediction: Option<AccumulationPrediction>,
        radius: f64,
    ) -> Self {
        let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut report =
            SpectrumReport { label: label.into(), eigenvalues, prediction, radius, clustering: Vec::new(), spectral_radius };
        if let Some(p) = &report.prediction {
            report.clustering = p.points.iter().map(|&z| report.fraction_within(&[z], radius)).collect();
        }
        report
    }

    /// Fraction of eigenvalues within `radius` of any of `points`.
    pub fn fraction_within(&self, points: &[Complex64], radius: f64) -> f64 {
        if self.eigenvalues.is_empty() {
            return 0.0;
        }
        self.count_within(points, radius) as f64 / self.eigenvalues.len() as f64
    }

    pub fn count_within(&self, points: &[Complex64], radius: f64) -> usize {
        self.eigenvalues.iter().filter(|z| points.iter().any(|p| (*z - p).norm() <= radius)).count()
    }

    /// Eigenvalue of largest magnitude.
    pub fn dominant(&self) -> Option<Complex64> {
        self.eigenvalues.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm()))
    }

    /// Eigenvalues inside the box `|re| ≤ half_width`, `|im| ≤ half_width`.
    pub fn truncated(&self, half_width: f64) -> Vec<Complex64> {
        self.eigenvalues.iter().copied().filter(|z| z.re.abs() <= half_width && z.im.abs() <= half_width).collect()
    }

    /// Writes `re,im`, sorted by real then imaginary part.
    pub fn write_eigenvalues_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut sorted = self.eigenvalues.clone();
        sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        writeln!(w, "re,im")?;
        for z in sorted {
            writeln!(w, "{:e},{:e}", z.re, z.im)?;
        }
        Ok(())
    }

    /// Writes `point_re,point_im,radius,fraction,note` per predicted point.
    pub fn write_clustering_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "point_re,point_im,radius,fraction,note")?;
        if let Some(p) = &self.prediction {
            for ((z, f), note) in p.points.iter().zip(&self.clustering).zip(&p.notes) {
                writeln!(w, "{:e},{:e},{},{},{}", z.re, z.im, self.radius, f, note)?;
            }
        }
        Ok(())
    }
}

/// Report on the eigenvalues of `m` itself.
pub fn report(
    label: impl Into<String>,
    m: &DenseComplexMatrix,
    prediction: Option<AccumulationPrediction>,
    radius: f64,
) -> Result<SpectrumReport, SpectrumError> {
    Ok(SpectrumReport::new(label, eigenvalues(m)?, prediction, radius))
}

/// Forms `A²` explicitly and reports its eigenvalues against `prediction`.
pub fn square_and_report(
    system: &BlockSystem,
    prediction: Option<AccumulationPrediction>,
    radius: f64,
) -> Result<SpectrumReport, SpectrumError> {
    if system.dim() > DEFAULT_CAP {
        return Err(SpectrumError::TooLarge { dim: system.dim(), cap: DEFAULT_CAP });
    }
    let a2 = system.matrix.matmul(&system.matrix);
    report(format!("{} A^2", system.tag), &a2, prediction, radius)
}

/// `m` with every block outside the block diagonal of `system`'s partition set
/// to zero. Equation block `r` and unknown block `c` are kept when `r = c`.
pub fn diagonal_blocks(system: &BlockSystem, m: &DenseComplexMatrix) -> DenseComplexMatrix {
    let (rows, cols) = system.block_grid();
    let n = system.dim();
    let mut row_block = vec![usize::MAX; n];
    let mut col_block = vec![usize::MAX; n];
    for (b, r) in rows.iter().enumerate() {
        r.clone().for_each(|i| row_block[i] = b);
    }
    for (b, c) in cols.iter().enumerate() {
        c.clone().for_each(|j| col_block[j] = b);
    }
    DenseComplexMatrix::from_fn(n, n, |i, j| if row_block[i] == col_block[j] { m[(i, j)] } else { Complex64::new(0.0, 0.0) })
}

/// Report on the diagonal blocks of `A²`, i.e. the union of their spectra.
pub fn square_diagonal_blocks_report(
    system: &BlockSystem,
    prediction: Option<AccumulationPrediction>,
    radius: f64,
) -> Result<SpectrumReport, SpectrumError> {
    if system.dim() > DEFAULT_CAP {
        return Err(SpectrumError::TooLarge { dim: system.dim(), cap: DEFAULT_CAP });
    }
    let a2 = system.matrix.matmul(&system.matrix);
    report(format!("{} diag(A^2)", system.tag), &diagonal_blocks(system, &a2), prediction, radius)
}

/// Maximum elementwise deviations of the discrete Calderon identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalderonReport {
    pub wavenumber: f64,
    /// `max |(-SN)_{ij} - δ_{ij}/4|`
    pub neg_sn: f64,
    /// `max |(-NS)_{ij} - δ_{ij}/4|`
    pub neg_ns: f64,
    /// `-SN + D² = I/4`
    pub sn_dd: f64,
    /// `SD* - DS = 0`
    pub sd_ds: f64,
    /// `-D*N + ND = 0`
    pub dn_nd: f64,
    /// `D*² - NS = I/4`
    pub dd_ns: f64,
}

impl CalderonReport {
    pub fn identities(&self) -> [f64; 4] {
        [self.sn_dd, self.sd_ds, self.dn_nd, self.dd_ns]
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "quantity,max_deviation")?;
        for (name, v) in [
            ("-SN vs I/4", self.neg_sn),
            ("-NS vs I/4", self.neg_ns),
            ("-SN+DD vs I/4", self.sn_dd),
            ("SD*-DS vs 0", self.sd_ds),
            ("-D*N+ND vs 0", self.dn_nd),
            ("D*D*-NS vs I/4", self.dd_ns),
        ] {
            writeln!(w, "{name},{v:e}")?;
        }
        Ok(())
    }
}

fn max_deviation(m: &DenseComplexMatrix, diag: f64) -> f64 {
    let n = m.cols();
    m.as_slice()
        .iter()
        .enumerate()
        .map(|(idx, z)| if idx / n == idx % n { (z - diag).norm() } else { z.norm() })
        .fold(0.0, f64::max)
}

/// Calderon deviations from given `S`, `D`, `D*`, `N` matrices.
pub fn calderon_deviations(
    wavenumber: f64,
    s: &DenseComplexMatrix,
    d: &DenseComplexMatrix,
    ds: &DenseComplexMatrix,
    n: &DenseComplexMatrix,
) -> CalderonReport {
    let sn = s.matmul(n);
    let ns = n.matmul(s);
    let minus = Complex64::new(-1.0, 0.0);
    CalderonReport {
        wavenumber,
        neg_sn: max_deviation(&sn.scaled(minus), 0.25),
        neg_ns: max_deviation(&ns.scaled(minus), 0.25),
        sn_dd: max_deviation(&d.matmul(d).sub(&sn), 0.25),
        sd_ds: max_deviation(&s.matmul(ds).sub(&d.matmul(s)), 0.0),
        dn_nd: max_deviation(&n.matmul(d).sub(&ds.matmul(n)), 0.0),
        dd_ns: max_deviation(&ds.matmul(ds).sub(&ns), 0.25),
    }
}

/// Assembles the four operators on a single closed interface at wavenumber
/// `k` and checks the Calderon identities.
pub fn calderon_check(mesh: &BoundaryMesh, k: f64) -> Result<CalderonReport, Error> {
    if mesh.ranges().len() != 1 {
        return Err(GeometryError::Topology(format!(
            "Calderon check needs one closed interface, mesh has {}",
            mesh.ranges().len()
        ))
        .into());
    }
    let range = 0..mesh.len();
    let ops = assemble_all(mesh, range.clone(), &targets_of(mesh, range), k)?;
    Ok(calderon_deviations(k, &ops.single, &ops.double, &ops.adjoint, &ops.hyper))
}
