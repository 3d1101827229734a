use std::ops::Range;

use super::{segment_distance, Scene, Vec2, HOST_DOMAIN};
use crate::error::GeometryError;

/// Straight constant element. Collocation happens at the midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub interface: u32,
    pub a: Vec2,
    pub b: Vec2,
    pub midpoint: Vec2,
    /// Unit normal pointing from the interface's left domain into its right domain.
    pub normal: Vec2,
    pub length: f64,
}

impl Element {
    pub fn new(interface: u32, a: Vec2, b: Vec2) -> Self {
        let d = b - a;
        let length = d.norm();
        let tangent = d * (1.0 / length);
        Element {
            interface,
            a,
            b,
            midpoint: (a + b) * 0.5,
            normal: tangent.right_normal(),
            length,
        }
    }

    /// Unit vector from `a` to `b`.
    pub fn tangent(&self) -> Vec2 {
        (self.b - self.a) * (1.0 / self.length)
    }

    /// Point at local parameter `s ∈ [-1, 1]`.
    pub fn point_at(&self, s: f64) -> Vec2 {
        self.midpoint + (self.b - self.a) * (0.5 * s)
    }
}

/// Elements of all interfaces, stored contiguously in interface order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    elements: Vec<Element>,
    ranges: Vec<(u32, Range<usize>)>,
}

impl BoundaryMesh {
    /// Mesh with the element counts stored in the scene.
    pub fn from_scene(scene: &Scene) -> Result<Self, GeometryError> {
        build_mesh(scene, &scene.element_counts())
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `(interface id, element index range)` in interface order.
    pub fn ranges(&self) -> &[(u32, Range<usize>)] {
        &self.ranges
    }

    pub fn range(&self, interface: u32) -> Option<Range<usize>> {
        self.ranges.iter().find(|(id, _)| *id == interface).map(|(_, r)| r.clone())
    }

    pub fn interface_elements(&self, interface: u32) -> &[Element] {
        self.range(interface).map(|r| &self.elements[r]).unwrap_or(&[])
    }

    pub fn midpoints(&self) -> Vec<Vec2> {
        self.elements.iter().map(|e| e.midpoint).collect()
    }

    pub fn normals(&self) -> Vec<Vec2> {
        self.elements.iter().map(|e| e.normal).collect()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.length).collect()
    }

    /// Distance from `x` to the nearest element.
    pub fn distance_to(&self, x: Vec2) -> f64 {
        self.elements.iter().map(|e| segment_distance(x, e.a, e.b)).fold(f64::INFINITY, f64::min)
    }

    /// Same mesh rigidly translated by `shift`.
    pub fn translated(&self, shift: Vec2) -> Self {
        let elements = self
            .elements
            .iter()
            .map(|e| Element { a: e.a + shift, b: e.b + shift, midpoint: e.midpoint + shift, ..*e })
            .collect();
        BoundaryMesh { elements, ranges: self.ranges.clone() }
    }
}

/// Splits every interface into `counts[i]` straight elements (interface
/// order). Arcs become inscribed polygons with equal chords; polyline counts
/// are distributed over the edges in proportion to their lengths.
pub fn build_mesh(scene: &Scene, counts: &[usize]) -> Result<BoundaryMesh, GeometryError> {
    if counts.len() != scene.interfaces().len() {
        return Err(GeometryError::Config(format!(
            "expected {} element counts, got {}",
            scene.interfaces().len(),
            counts.len()
        )));
    }
    let mut elements = Vec::with_capacity(counts.iter().sum());
    let mut ranges = Vec::with_capacity(counts.len());
    for (iface, &count) in scene.interfaces().iter().zip(counts) {
        let min = iface.shape.min_elements();
        if count < min {
            return Err(GeometryError::InvalidInterface {
                interface: iface.id,
                reason: format!("needs at least {min} elements, got {count}"),
            });
        }
        let mut pts = iface.shape.outline(count);
        if iface.shape.is_closed() {
            pts.push(pts[0]);
        }
        let start = elements.len();
        for (edge, w) in pts.windows(2).enumerate() {
            if !(w[0].distance(w[1]) > 0.0) {
                return Err(GeometryError::ZeroLengthEdge { interface: iface.id, edge });
            }
            elements.push(Element::new(iface.id, w[0], w[1]));
        }
        ranges.push((iface.id, start..elements.len()));
    }
    Ok(BoundaryMesh { elements, ranges })
}

/// Ray directions tried in turn; generic angles so rays rarely graze vertices.
const RAY_ANGLES: [f64; 4] = [0.754_877_666_246_692_7, 2.236_067_977_499_79, 3.926_990_816_987_241_5, 5.385_164_807_134_504];

/// Domain containing `x`, found from the nearest crossing of a ray with the
/// oriented elements. Points within `1e-10 × scene diameter` of an element
/// return [`GeometryError::OnBoundary`].
pub fn locate_point(scene: &Scene, mesh: &BoundaryMesh, x: Vec2) -> Result<u32, GeometryError> {
    let tol = 1e-10 * scene.diameter();
    let distance = mesh.distance_to(x);
    if distance <= tol {
        return Err(GeometryError::OnBoundary { x: x.x, y: x.y, distance });
    }
    'angles: for &theta in &RAY_ANGLES {
        let dir = Vec2::new(theta.cos(), theta.sin());
        let mut nearest: Option<(f64, &Element)> = None;
        for e in mesh.elements() {
            let seg = e.b - e.a;
            let denom = dir.cross(seg);
            if denom.abs() < 1e-14 * e.length {
                continue;
            }
            let w = e.a - x;
            let t = w.cross(seg) / denom;
            let s = w.cross(dir) / denom;
            if t <= 0.0 || !(-1e-12..=1.0 + 1e-12).contains(&s) {
                continue;
            }
            if nearest.map_or(true, |(best, _)| t < best) {
                nearest = Some((t, e));
            }
        }
        let Some((_, e)) = nearest else {
            return Ok(HOST_DOMAIN);
        };
        let seg = e.b - e.a;
        let s = (e.a - x).cross(dir) / dir.cross(seg);
        let grazing = dir.dot(e.normal).abs() < 1e-8;
        if s < 1e-9 || s > 1.0 - 1e-9 || grazing {
            continue 'angles;
        }
        let iface = scene
            .interface(e.interface)
            .ok_or_else(|| GeometryError::Topology(format!("mesh references unknown interface {}", e.interface)))?;
        // Crossing along the normal means the ray leaves the left domain.
        return Ok(if dir.dot(e.normal) > 0.0 { iface.left_domain } else { iface.right_domain });
    }
    Err(GeometryError::Topology(format!("could not classify point ({}, {})", x.x, x.y)))
}
