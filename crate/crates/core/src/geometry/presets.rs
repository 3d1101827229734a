//! Benchmark scenes. Material constants follow `ε_i = i` unless given.

use std::f64::consts::PI;

use super::{Domain, Incident, Interface, InterfaceShape, Scene, Vec2};
use crate::error::GeometryError;

fn arc(center: Vec2, radius: f64, start_deg: f64, sweep_deg: f64) -> InterfaceShape {
    InterfaceShape::Arc { center, radius, start: start_deg.to_radians(), sweep: sweep_deg.to_radians() }
}

fn iface(id: u32, shape: InterfaceShape, left: u32, right: u32, count: usize) -> Interface {
    Interface { id, shape, left_domain: left, right_domain: right, element_count: count }
}

fn polyline(points: &[(f64, f64)], closed: bool) -> InterfaceShape {
    InterfaceShape::Polyline { vertices: points.iter().map(|&(x, y)| Vec2::new(x, y)).collect(), closed }
}

/// Circle of radius `radius` centred at the origin, material `eps2` inside,
/// `n` elements. Interface 1, normal pointing inward.
pub fn circle(radius: f64, eps2: f64, omega: f64, n: usize) -> Result<Scene, GeometryError> {
    Scene::new(
        vec![Domain::new(1, 1.0), Domain::new(2, eps2)],
        vec![iface(1, InterfaceShape::circle(Vec2::default(), radius, true), 1, 2, n)],
        omega,
        Incident::default(),
    )
}

/// Concentric circles: host outside `r_outer` (interface 1), `eps2` in the
/// annulus, `eps3` inside `r_inner` (interface 2). Normals point into the
/// annulus. The outer circle gets `2n/3` elements and the inner `n/3`.
pub fn concentric(r_inner: f64, r_outer: f64, eps2: f64, eps3: f64, omega: f64, n: usize) -> Result<Scene, GeometryError> {
    let inner = n / 3;
    concentric_with_counts(r_inner, r_outer, eps2, eps3, omega, n - inner, inner)
}

/// [`concentric`] with explicit element counts.
pub fn concentric_with_counts(
    r_inner: f64,
    r_outer: f64,
    eps2: f64,
    eps3: f64,
    omega: f64,
    n_outer: usize,
    n_inner: usize,
) -> Result<Scene, GeometryError> {
    if !(0.0 < r_inner && r_inner < r_outer) {
        return Err(GeometryError::Config(format!("need 0 < r_inner < r_outer, got {r_inner}, {r_outer}")));
    }
    Scene::new(
        vec![Domain::new(1, 1.0), Domain::new(2, eps2), Domain::new(3, eps3)],
        vec![
            iface(1, InterfaceShape::circle(Vec2::default(), r_outer, true), 1, 2, n_outer),
            iface(2, InterfaceShape::circle(Vec2::default(), r_inner, false), 3, 2, n_inner),
        ],
        omega,
        Incident::default(),
    )
}

/// Axis-aligned square `[0, side]²` with `per_side` elements on each edge.
pub fn square(side: f64, eps2: f64, omega: f64, per_side: usize) -> Result<Scene, GeometryError> {
    let shape = polyline(&[(0.0, 0.0), (0.0, side), (side, side), (side, 0.0)], true);
    Scene::new(
        vec![Domain::new(1, 1.0), Domain::new(2, eps2)],
        vec![iface(1, shape, 1, 2, 4 * per_side)],
        omega,
        Incident::default(),
    )
}

/// Unit disk split by the vertical diameter: `eps2` on the left half, `eps3`
/// on the right. Interface 1 is the left semicircle, 2 the right semicircle,
/// 3 the diameter (normal pointing into domain 2). The circle gets `3n/4`
/// elements split evenly, the diameter the rest.
pub fn junction(eps2: f64, eps3: f64, omega: f64, n: usize) -> Result<Scene, GeometryError> {
    let circle = (3 * n + 2) / 4;
    let left = circle / 2;
    let right = circle - left;
    let chord = n - circle;
    Scene::new(
        vec![Domain::new(1, 1.0), Domain::new(2, eps2), Domain::new(3, eps3)],
        vec![
            iface(1, arc(Vec2::default(), 1.0, 270.0, -180.0), 1, 2, left),
            iface(2, arc(Vec2::default(), 1.0, 90.0, -180.0), 1, 3, right),
            iface(3, polyline(&[(0.0, 1.0), (0.0, -1.0)], false), 3, 2, chord),
        ],
        omega,
        Incident::default(),
    )
}

/// Unit disk cut into three 120° sectors (domains 2, 3, 4 counter-clockwise
/// from the top), with three material junctions on the circle and one at the
/// centre. About `n` elements in total.
pub fn sectors(omega: f64, n: usize) -> Result<Scene, GeometryError> {
    let arc_len = 2.0 * PI / 3.0;
    let total = 3.0 * arc_len + 3.0;
    let n_arc = ((n as f64) * arc_len / total).round().max(3.0) as usize;
    let n_ray = ((n as f64) / total).round().max(1.0) as usize;
    let ray = |deg: f64| {
        let t = deg.to_radians();
        polyline(&[(0.0, 0.0), (t.cos(), t.sin())], false)
    };
    Scene::new(
        vec![Domain::new(1, 1.0), Domain::new(2, 2.0), Domain::new(3, 3.0), Domain::new(4, 4.0)],
        vec![
            iface(1, arc(Vec2::default(), 1.0, 210.0, -120.0), 1, 2, n_arc),
            iface(2, arc(Vec2::default(), 1.0, 330.0, -120.0), 1, 3, n_arc),
            iface(3, arc(Vec2::default(), 1.0, 90.0, -120.0), 1, 4, n_arc),
            iface(4, ray(90.0), 2, 4, n_ray),
            iface(5, ray(210.0), 3, 2, n_ray),
            iface(6, ray(330.0), 4, 3, n_ray),
        ],
        omega,
        Incident::default(),
    )
}

/// Two unit squares side by side (domains 2 and 3) with a circular inclusion
/// (domain 4, radius 0.25) inside the left one. About `n` elements in total.
pub fn squares_with_inclusion(omega: f64, n: usize) -> Result<Scene, GeometryError> {
    let incl = 2.0 * PI * 0.25;
    let total = 3.0 + 3.0 + 1.0 + incl;
    let per_len = n as f64 / total;
    let count = |len: f64, min: usize| ((per_len * len).round() as usize).max(min);
    Scene::new(
        vec![Domain::new(1, 1.0), Domain::new(2, 2.0), Domain::new(3, 3.0), Domain::new(4, 4.0)],
        vec![
            iface(1, polyline(&[(0.0, -0.5), (-1.0, -0.5), (-1.0, 0.5), (0.0, 0.5)], false), 1, 2, count(3.0, 3)),
            iface(2, polyline(&[(0.0, 0.5), (1.0, 0.5), (1.0, -0.5), (0.0, -0.5)], false), 1, 3, count(3.0, 3)),
            iface(3, polyline(&[(0.0, 0.5), (0.0, -0.5)], false), 3, 2, count(1.0, 1)),
            iface(4, InterfaceShape::Arc { center: Vec2::new(-0.5, 0.0), radius: 0.25, start: 0.0, sweep: 2.0 * PI }, 4, 2, count(incl, 3)),
        ],
        omega,
        Incident::default(),
    )
}
