//! Off-boundary evaluation of the boundary element solution and the relative
//! error metric on the real part.
//!
//! In domain `Ω_i` the field is
//! `u(x) = δ_{i1} u_in(x) + Σ_Γ s_Γ (ε_i S_i w - D_i u)(x)`, summed over the
//! interfaces bounding `Ω_i`, with `s_Γ = +1` when the normal of `Γ` points out
//! of `Ω_i` and `-1` otherwise.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::SeriesSolution;
use crate::error::{Error, FieldError, GeometryError};
use crate::formulations::BlockSystem;
use crate::geometry::{locate_point, BoundaryMesh, Scene, Vec2, HOST_DOMAIN};
use crate::operators::{potential_integrals, QuadratureRule, FAR_NODES};

/// Half-width of the default evaluation grid.
pub const GRID_HALF_WIDTH: f64 = 2.99;
/// Points per side of the default evaluation grid.
pub const GRID_POINTS: usize = 101;

/// Boundary values `u` and `w` on every element of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Densities {
    pub u: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl Densities {
    /// Scatters a solution vector of `system` onto the mesh element order.
    pub fn from_solution(system: &BlockSystem, mesh: &BoundaryMesh, y: &[Complex64]) -> Result<Self, FieldError> {
        if y.len() != system.dim() {
            return Err(FieldError::DensityLength { expected: system.dim(), found: y.len() });
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut u = vec![zero; mesh.len()];
        let mut w = vec![zero; mesh.len()];
        for (id, ui, wi) in system.split_solution(y) {
            let r = mesh.range(id).unwrap_or(0..0);
            if ui.len() != r.len() || wi.len() != r.len() {
                return Err(FieldError::DensityLength { expected: r.len(), found: ui.len().min(wi.len()) });
            }
            u[r.clone()].copy_from_slice(&ui);
            w[r].copy_from_slice(&wi);
        }
        Ok(Densities { u, w })
    }
}

/// Field values on a point set. Points on the boundary carry no domain and
/// no value.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub points: Vec<Vec2>,
    pub values: Vec<Option<Complex64>>,
    pub domains: Vec<Option<u32>>,
}

impl FieldGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points flagged as lying on the boundary.
    pub fn flagged(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Writes `x,y,re,im,domain`; flagged points have empty value and domain fields.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "x,y,re,im,domain")?;
        for ((p, v), d) in self.points.iter().zip(&self.values).zip(&self.domains) {
            match (v, d) {
                (Some(z), Some(d)) => writeln!(w, "{},{},{:e},{:e},{}", p.x, p.y, z.re, z.im, d)?,
                _ => writeln!(w, "{},{},,,", p.x, p.y)?,
            }
        }
        Ok(())
    }
}

/// `n × n` equally spaced points over `[-h, h]²`, row by row in `y`.
pub fn uniform_grid(n: usize, half_width: f64) -> Vec<Vec2> {
    let step = if n > 1 { 2.0 * half_width / (n - 1) as f64 } else { 0.0 };
    let coord = |i: usize| if n > 1 { -half_width + step * i as f64 } else { 0.0 };
    (0..n).flat_map(|j| (0..n).map(move |i| Vec2::new(coord(i), coord(j)))).collect()
}

/// The default 101 × 101 grid over `[-2.99, 2.99]²`.
pub fn default_grid() -> Vec<Vec2> {
    uniform_grid(GRID_POINTS, GRID_HALF_WIDTH)
}

/// Field at `x` using the representation of `domain`.
pub fn evaluate_in_domain(
    scene: &Scene,
    mesh: &BoundaryMesh,
    densities: &Densities,
    domain: u32,
    x: Vec2,
) -> Complex64 {
    let near = QuadratureRule::standard();
    let far = QuadratureRule::gauss_legendre(FAR_NODES);
    evaluate_with_rules(scene, mesh, densities, domain, x, &near, &far)
}

fn evaluate_with_rules(
    scene: &Scene,
    mesh: &BoundaryMesh,
    densities: &Densities,
    domain: u32,
    x: Vec2,
    near: &QuadratureRule,
    far: &QuadratureRule,
) -> Complex64 {
    let k = scene.wavenumber(domain);
    let eps = scene.epsilon(domain);
    let mut sum = if domain == HOST_DOMAIN { scene.incident().value(x, k) } else { Complex64::new(0.0, 0.0) };
    for iface in scene.interfaces_of(domain) {
        let Some(sign) = iface.orientation_sign(domain) else { continue };
        let Some(range) = mesh.range(iface.id) else { continue };
        let mut part = Complex64::new(0.0, 0.0);
        for i in range {
            let (s, d) = potential_integrals(x, &mesh.elements()[i], k, near, far);
            part += s * densities.w[i] * eps - d * densities.u[i];
        }
        sum += part * sign;
    }
    sum
}

/// Evaluates the field at every point, in parallel.
pub fn evaluate_field(
    scene: &Scene,
    mesh: &BoundaryMesh,
    densities: &Densities,
    points: &[Vec2],
) -> Result<FieldGrid, Error> {
    if densities.u.len() != mesh.len() || densities.w.len() != mesh.len() {
        return Err(FieldError::DensityLength { expected: mesh.len(), found: densities.u.len().min(densities.w.len()) }.into());
    }
    let near = QuadratureRule::standard();
    let far = QuadratureRule::gauss_legendre(FAR_NODES);
    let results: Vec<Result<(Option<u32>, Option<Complex64>), GeometryError>> = points
        .par_iter()
        .map(|&x| match locate_point(scene, mesh, x) {
            Ok(d) => Ok((Some(d), Some(evaluate_with_rules(scene, mesh, densities, d, x, &near, &far)))),
            Err(GeometryError::OnBoundary { .. }) => Ok((None, None)),
            Err(e) => Err(e),
        })
        .collect();
    let mut values = Vec::with_capacity(points.len());
    let mut domains = Vec::with_capacity(points.len());
    for r in results {
        let (d, v) = r?;
        domains.push(d);
        values.push(v);
    }
    Ok(FieldGrid { points: points.to_vec(), values, domains })
}

/// Series solution on a point set. Regions are numbered as domains `1, 2, …`
/// from the outside in.
pub fn reference_field(series: &SeriesSolution, points: &[Vec2]) -> FieldGrid {
    let (values, domains) = points
        .par_iter()
        .map(|&x| (Some(series.evaluate(x)), Some(series.region(x.norm()) as u32 + 1)))
        .unzip();
    FieldGrid { points: points.to_vec(), values, domains }
}

/// `sqrt(Σ Re(u - u_ref)² / Σ Re(u_ref)²)` over points where both grids have
/// values.
pub fn l2_error(numerical: &FieldGrid, reference: &FieldGrid) -> Result<f64, FieldError> {
    if numerical.len() != reference.len() {
        return Err(FieldError::PointMismatch(numerical.len(), reference.len()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in numerical.values.iter().zip(&reference.values) {
        if let (Some(a), Some(b)) = (a, b) {
            num += (a.re - b.re).powi(2);
            den += b.re.powi(2);
        }
    }
    if den == 0.0 {
        return Err(FieldError::ZeroReference);
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: Vec<Complex64>) -> FieldGrid {
        let n = values.len();
        FieldGrid {
            points: (0..n).map(|i| Vec2::new(i as f64, 0.0)).collect(),
            values: values.into_iter().map(Some).collect(),
            domains: vec![Some(1); n],
        }
    }

    #[test]
    fn error_metric_examples() {
        let a = grid(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1)]);
        assert_eq!(l2_error(&a, &a).unwrap(), 0.0);
        let neg = grid(a.values.iter().map(|v| -v.unwrap()).collect());
        assert!((l2_error(&neg, &a).unwrap() - 2.0).abs() < 1e-15);
        let imag = grid(a.values.iter().map(|v| v.unwrap() + Complex64::new(0.0, 3.0)).collect());
        assert_eq!(l2_error(&imag, &a).unwrap(), 0.0);
        let zero = grid(vec![Complex64::new(0.0, 1.0); 2]);
        assert_eq!(l2_error(&a, &zero), Err(FieldError::ZeroReference));
        assert!(matches!(l2_error(&a, &grid(vec![])), Err(FieldError::PointMismatch(2, 0))));
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 10201);
        assert_eq!(g[0], Vec2::new(-2.99, -2.99));
        assert!((g[10200].x - 2.99).abs() < 1e-12 && (g[10200].y - 2.99).abs() < 1e-12);
    }
}
