//! Collocation matrices of the single layer, double layer, adjoint double
//! layer and hypersingular operators on constant elements.
//!
//! Entry `(j, m)` integrates the kernel over source element `m` at target
//! `x_j`. Normals follow the mesh: `n(y)` is the source element normal and
//! `n(x)` the target normal. Regular entries use the 10-point Gauss rule;
//! sources closer than two of their lengths to the target are bisected up to
//! four times; self entries (target at the element midpoint) use the
//! closed-form logarithm split for the single layer and the endpoint identity
//! for the hypersingular operator.

mod kernel;
mod quadrature;

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

pub use kernel::{element_integrals, potential_integrals, single_layer_self, ElementIntegrals};
pub(crate) use kernel::FAR_NODES;
pub use quadrature::QuadratureRule;

pub use crate::linalg::DenseComplexMatrix;

use crate::error::AssemblyError;
use crate::geometry::{segment_distance, BoundaryMesh, Element, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorKind {
    SingleLayer,
    DoubleLayer,
    AdjointDoubleLayer,
    Hypersingular,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [
        OperatorKind::SingleLayer,
        OperatorKind::DoubleLayer,
        OperatorKind::AdjointDoubleLayer,
        OperatorKind::Hypersingular,
    ];

    /// Coefficient of the identity in the boundary trace of the corresponding
    /// potential, approached from the side the normal points away from.
    pub fn interior_trace_sign(self) -> f64 {
        match self {
            OperatorKind::SingleLayer | OperatorKind::Hypersingular => 0.0,
            OperatorKind::DoubleLayer => -0.5,
            OperatorKind::AdjointDoubleLayer => 0.5,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OperatorKind::SingleLayer => "S",
            OperatorKind::DoubleLayer => "D",
            OperatorKind::AdjointDoubleLayer => "D*",
            OperatorKind::Hypersingular => "N",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// An operator kind at a fixed wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator {
    pub kind: OperatorKind,
    pub wavenumber: f64,
}

impl Operator {
    pub fn new(kind: OperatorKind, wavenumber: f64) -> Self {
        Self { kind, wavenumber }
    }
}

/// Collocation point with its unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub point: Vec2,
    pub normal: Vec2,
}

impl From<&Element> for Target {
    fn from(e: &Element) -> Self {
        Target { point: e.midpoint, normal: e.normal }
    }
}

/// The four operator matrices for one (source range, target set, wavenumber).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    pub wavenumber: f64,
    pub single: DenseComplexMatrix,
    pub double: DenseComplexMatrix,
    pub adjoint: DenseComplexMatrix,
    pub hyper: DenseComplexMatrix,
}

impl OperatorSet {
    pub fn get(&self, kind: OperatorKind) -> &DenseComplexMatrix {
        match kind {
            OperatorKind::SingleLayer => &self.single,
            OperatorKind::DoubleLayer => &self.double,
            OperatorKind::AdjointDoubleLayer => &self.adjoint,
            OperatorKind::Hypersingular => &self.hyper,
        }
    }
}

fn check(mesh: &BoundaryMesh, sources: &Range<usize>, k: f64) -> Result<(), AssemblyError> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(AssemblyError::NonPositiveWavenumber(k));
    }
    if sources.start > sources.end || sources.end > mesh.len() {
        return Err(AssemblyError::RangeOutOfBounds { start: sources.start, end: sources.end, len: mesh.len() });
    }
    for (m, e) in mesh.elements()[sources.clone()].iter().enumerate() {
        if !(e.length > 0.0) {
            return Err(AssemblyError::DegenerateElement { element: sources.start + m });
        }
    }
    Ok(())
}

/// Classifies the target against a source element: `Ok(true)` for midpoint
/// collocation, `Ok(false)` for a regular target, error if on the element
/// elsewhere.
fn self_entry(t: &Target, e: &Element, target: usize, element: usize) -> Result<bool, AssemblyError> {
    let tol = 1e-12 * e.length;
    if segment_distance(t.point, e.a, e.b) > tol {
        return Ok(false);
    }
    if t.point.distance(e.midpoint) <= tol {
        Ok(true)
    } else {
        Err(AssemblyError::TargetOnElement { target, element })
    }
}

/// Assembles all four operators at wavenumber `k` in one pass, with rows
/// computed in parallel.
pub fn assemble_all(
    mesh: &BoundaryMesh,
    sources: Range<usize>,
    targets: &[Target],
    k: f64,
) -> Result<OperatorSet, AssemblyError> {
    check(mesh, &sources, k)?;
    let rule = QuadratureRule::standard();
    let elems = &mesh.elements()[sources.clone()];
    let ncols = elems.len();
    let rows: Vec<Result<[Vec<Complex64>; 4], AssemblyError>> = targets
        .par_iter()
        .enumerate()
        .map(|(j, t)| {
            let mut out: [Vec<Complex64>; 4] = std::array::from_fn(|_| Vec::with_capacity(ncols));
            for (m, e) in elems.iter().enumerate() {
                let is_self = self_entry(t, e, j, sources.start + m)?;
                let v = element_integrals(t.point, t.normal, e, k, &rule, is_self);
                out[0].push(v.single);
                out[1].push(v.double);
                out[2].push(v.adjoint);
                out[3].push(v.hyper);
            }
            Ok(out)
        })
        .collect();
    let mut data: [Vec<Complex64>; 4] = std::array::from_fn(|_| Vec::with_capacity(targets.len() * ncols));
    for row in rows {
        let row = row?;
        for (d, r) in data.iter_mut().zip(row) {
            d.extend(r);
        }
    }
    let [s, d, ds, n] = data.map(|v| DenseComplexMatrix::from_row_major(targets.len(), ncols, v));
    Ok(OperatorSet { wavenumber: k, single: s, double: d, adjoint: ds, hyper: n })
}

/// Assembles one operator.
pub fn assemble(
    op: Operator,
    mesh: &BoundaryMesh,
    sources: Range<usize>,
    targets: &[Target],
) -> Result<DenseComplexMatrix, AssemblyError> {
    check(mesh, &sources, op.wavenumber)?;
    let rule = QuadratureRule::standard();
    let elems = &mesh.elements()[sources.clone()];
    let rows: Vec<Vec<Complex64>> = targets
        .par_iter()
        .enumerate()
        .map(|(j, t)| {
            elems
                .iter()
                .enumerate()
                .map(|(m, e)| {
                    let is_self = self_entry(t, e, j, sources.start + m)?;
                    let v = element_integrals(t.point, t.normal, e, op.wavenumber, &rule, is_self);
                    Ok(match op.kind {
                        OperatorKind::SingleLayer => v.single,
                        OperatorKind::DoubleLayer => v.double,
                        OperatorKind::AdjointDoubleLayer => v.adjoint,
                        OperatorKind::Hypersingular => v.hyper,
                    })
                })
                .collect::<Result<Vec<_>, AssemblyError>>()
        })
        .collect::<Result<_, AssemblyError>>()?;
    Ok(DenseComplexMatrix::from_row_major(targets.len(), elems.len(), rows.concat()))
}

/// Collocation targets of the elements in `range`.
pub fn targets_of(mesh: &BoundaryMesh, range: Range<usize>) -> Vec<Target> {
    mesh.elements()[range].iter().map(Target::from).collect()
}

/// Writes a block as `row,col,re,im`.
pub fn write_block_csv(m: &DenseComplexMatrix, path: &Path) -> std::io::Result<()> {
    m.write_csv(path)
}

/// Writes `label` and the entries of several blocks to one CSV stream.
pub fn write_blocks_csv(blocks: &[(&str, &DenseComplexMatrix)], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "block,row,col,re,im")?;
    for (label, m) in blocks {
        for i in 0..m.rows() {
            for (j, z) in m.row(i).iter().enumerate() {
                writeln!(w, "{label},{i},{j},{:e},{:e}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}
