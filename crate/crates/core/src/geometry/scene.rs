use std::collections::BTreeSet;
use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{signed_area, Vec2};
use crate::error::GeometryError;

/// Id of the unbounded host domain.
pub const HOST_DOMAIN: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub id: u32,
    pub epsilon: f64,
}

impl Domain {
    pub fn new(id: u32, epsilon: f64) -> Self {
        Self { id, epsilon }
    }

    /// `k_i = omega * sqrt(epsilon_i)`.
    pub fn wavenumber(&self, omega: f64) -> f64 {
        omega * self.epsilon.sqrt()
    }
}

/// Geometric description of an interface before meshing.
#[derive(Debug, Clone, PartialEq)]
pub enum InterfaceShape {
    /// Straight edges through the vertices; `closed` adds the edge back to the start.
    Polyline { vertices: Vec<Vec2>, closed: bool },
    /// Circular arc traversed from `start` through `sweep` radians (negative
    /// sweep is clockwise). `|sweep| = 2π` is a full circle. Polygonalised into
    /// an inscribed polygon at mesh time.
    Arc { center: Vec2, radius: f64, start: f64, sweep: f64 },
}

impl InterfaceShape {
    pub fn circle(center: Vec2, radius: f64, clockwise: bool) -> Self {
        InterfaceShape::Arc { center, radius, start: 0.0, sweep: if clockwise { -TAU } else { TAU } }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            InterfaceShape::Polyline { closed, .. } => *closed,
            InterfaceShape::Arc { sweep, .. } => (sweep.abs() - TAU).abs() < 1e-12,
        }
    }

    /// First and last point of the chain.
    pub fn endpoints(&self) -> (Vec2, Vec2) {
        match self {
            InterfaceShape::Polyline { vertices, closed } => {
                let first = vertices[0];
                let last = if *closed { first } else { *vertices.last().unwrap() };
                (first, last)
            }
            InterfaceShape::Arc { center, radius, start, sweep } => {
                let end = start + sweep;
                (
                    *center + Vec2::new(start.cos(), start.sin()) * *radius,
                    *center + Vec2::new(end.cos(), end.sin()) * *radius,
                )
            }
        }
    }

    /// Vertices of the polygonal outline with `count` edges. Closed outlines do
    /// not repeat the first vertex.
    pub(crate) fn outline(&self, count: usize) -> Vec<Vec2> {
        match self {
            InterfaceShape::Polyline { vertices, closed } => {
                let edges = edge_list(vertices, *closed);
                let per_edge = distribute_counts(&edges, count);
                let mut out = Vec::with_capacity(count + 1);
                for (&(a, b), &m) in edges.iter().zip(per_edge.iter()) {
                    for j in 0..m {
                        let t = j as f64 / m as f64;
                        out.push(a + (b - a) * t);
                    }
                }
                if !closed {
                    out.push(*vertices.last().unwrap());
                }
                out
            }
            InterfaceShape::Arc { center, radius, start, sweep } => {
                let closed = self.is_closed();
                let last = if closed { count - 1 } else { count };
                (0..=last)
                    .map(|j| {
                        let theta = start + sweep * (j as f64 / count as f64);
                        *center + Vec2::new(theta.cos(), theta.sin()) * *radius
                    })
                    .collect()
            }
        }
    }

    /// Minimum number of elements the shape can be split into.
    pub fn min_elements(&self) -> usize {
        match self {
            InterfaceShape::Polyline { vertices, closed } => edge_list(vertices, *closed).len(),
            InterfaceShape::Arc { .. } => {
                if self.is_closed() {
                    3
                } else {
                    1
                }
            }
        }
    }
}

fn edge_list(vertices: &[Vec2], closed: bool) -> Vec<(Vec2, Vec2)> {
    let mut edges: Vec<(Vec2, Vec2)> = vertices.windows(2).map(|w| (w[0], w[1])).collect();
    if closed && vertices.len() > 1 {
        edges.push((*vertices.last().unwrap(), vertices[0]));
    }
    edges
}

/// Splits `count` elements over edges proportionally to edge length, at least
/// one per edge, by largest remainder.
fn distribute_counts(edges: &[(Vec2, Vec2)], count: usize) -> Vec<usize> {
    let lengths: Vec<f64> = edges.iter().map(|(a, b)| a.distance(*b)).collect();
    let total: f64 = lengths.iter().sum();
    let spare = count.saturating_sub(edges.len());
    let ideal: Vec<f64> = lengths.iter().map(|l| l / total * count as f64).collect();
    let mut out: Vec<usize> = ideal.iter().map(|v| (v.floor() as usize).max(1)).collect();
    let mut assigned: usize = out.iter().sum();
    if assigned > count {
        // Rounding up short edges overshot; take back from the longest ones.
        while assigned > count {
            let i = (0..out.len())
                .filter(|&i| out[i] > 1)
                .max_by(|&i, &j| (out[i] as f64 - ideal[i]).partial_cmp(&(out[j] as f64 - ideal[j])).unwrap())
                .unwrap();
            out[i] -= 1;
            assigned -= 1;
        }
        return out;
    }
    let _ = spare;
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = ideal[i] - out[i] as f64;
        let rj = ideal[j] - out[j] as f64;
        rj.partial_cmp(&ri).unwrap().then(i.cmp(&j))
    });
    let mut k = 0;
    while assigned < count {
        out[order[k % order.len()]] += 1;
        assigned += 1;
        k += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub id: u32,
    pub shape: InterfaceShape,
    /// Domain on the left of the direction of travel; the normal points away from it.
    pub left_domain: u32,
    /// Domain the normal points into.
    pub right_domain: u32,
    pub element_count: usize,
}

impl Interface {
    /// +1 when the normal points out of `domain`, -1 when it points into it.
    pub fn orientation_sign(&self, domain: u32) -> Option<f64> {
        if domain == self.left_domain {
            Some(1.0)
        } else if domain == self.right_domain {
            Some(-1.0)
        } else {
            None
        }
    }

    pub fn touches(&self, domain: u32) -> bool {
        self.left_domain == domain || self.right_domain == domain
    }
}

/// Plane incident wave `amplitude * exp(i k1 direction·x)` living in the host.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incident {
    pub direction: Vec2,
    pub amplitude: Complex64,
}

impl Default for Incident {
    fn default() -> Self {
        Self { direction: Vec2::new(1.0, 0.0), amplitude: Complex64::new(1.0, 0.0) }
    }
}

impl Incident {
    pub fn value(&self, x: Vec2, k1: f64) -> Complex64 {
        self.amplitude * Complex64::from_polar(1.0, k1 * self.direction.dot(x))
    }

    /// `∇u_in · n`, from the analytic gradient.
    pub fn normal_derivative(&self, x: Vec2, normal: Vec2, k1: f64) -> Complex64 {
        Complex64::new(0.0, k1 * self.direction.dot(normal)) * self.value(x, k1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    domains: Vec<Domain>,
    interfaces: Vec<Interface>,
    omega: f64,
    incident: Incident,
}

impl Scene {
    /// Validates and builds a scene. Domains and interfaces are stored sorted by id.
    pub fn new(
        mut domains: Vec<Domain>,
        mut interfaces: Vec<Interface>,
        omega: f64,
        incident: Incident,
    ) -> Result<Self, GeometryError> {
        domains.sort_by_key(|d| d.id);
        interfaces.sort_by_key(|i| i.id);
        let dir_norm = incident.direction.norm();
        if !(dir_norm > 0.0) || !dir_norm.is_finite() {
            return Err(GeometryError::Config("incident direction must be a nonzero vector".into()));
        }
        let incident = Incident { direction: incident.direction * (1.0 / dir_norm), ..incident };
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(GeometryError::Config(format!("omega must be positive, got {omega}")));
        }
        let scene = Scene { domains, interfaces, omega, incident };
        scene.validate()?;
        Ok(scene)
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn incident(&self) -> &Incident {
        &self.incident
    }

    pub fn domain(&self, id: u32) -> Option<&Domain> {
        self.domains.iter().find(|d| d.id == id)
    }

    pub fn interface(&self, id: u32) -> Option<&Interface> {
        self.interfaces.iter().find(|i| i.id == id)
    }

    /// Position of interface `id` in [`Scene::interfaces`].
    pub fn interface_index(&self, id: u32) -> Option<usize> {
        self.interfaces.iter().position(|i| i.id == id)
    }

    pub fn epsilon(&self, domain: u32) -> f64 {
        self.domain(domain).map(|d| d.epsilon).unwrap_or(f64::NAN)
    }

    pub fn wavenumber(&self, domain: u32) -> f64 {
        self.domain(domain).map(|d| d.wavenumber(self.omega)).unwrap_or(f64::NAN)
    }

    /// Interfaces bordering `domain`, in id order.
    pub fn interfaces_of(&self, domain: u32) -> impl Iterator<Item = &Interface> {
        self.interfaces.iter().filter(move |i| i.touches(domain))
    }

    pub fn element_counts(&self) -> Vec<usize> {
        self.interfaces.iter().map(|i| i.element_count).collect()
    }

    pub fn total_elements(&self) -> usize {
        self.interfaces.iter().map(|i| i.element_count).sum()
    }

    /// Copy with new angular frequency.
    pub fn with_omega(&self, omega: f64) -> Result<Self, GeometryError> {
        Scene::new(self.domains.clone(), self.interfaces.clone(), omega, self.incident)
    }

    /// Copy with a changed material constant.
    pub fn with_epsilon(&self, domain: u32, epsilon: f64) -> Result<Self, GeometryError> {
        let mut domains = self.domains.clone();
        let d = domains
            .iter_mut()
            .find(|d| d.id == domain)
            .ok_or_else(|| GeometryError::InvalidDomain { domain, reason: "no such domain".into() })?;
        d.epsilon = epsilon;
        Scene::new(domains, self.interfaces.clone(), self.omega, self.incident)
    }

    /// Copy whose element counts are rescaled so they sum to `total`, keeping
    /// the current proportions (largest remainder rounding, at least the
    /// shape's minimum per interface).
    pub fn with_total_elements(&self, total: usize) -> Result<Self, GeometryError> {
        let base: Vec<f64> = self.interfaces.iter().map(|i| i.element_count as f64).collect();
        let sum: f64 = base.iter().sum();
        let ideal: Vec<f64> = base.iter().map(|b| b / sum * total as f64).collect();
        let mut counts: Vec<usize> = ideal.iter().map(|v| v.floor() as usize).collect();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&i, &j| {
            (ideal[j] - counts[j] as f64).partial_cmp(&(ideal[i] - counts[i] as f64)).unwrap().then(i.cmp(&j))
        });
        let mut assigned: usize = counts.iter().sum();
        let mut k = 0;
        while assigned < total {
            counts[order[k % order.len()]] += 1;
            assigned += 1;
            k += 1;
        }
        self.with_element_counts(&counts)
    }

    /// Copy with explicit per-interface element counts (in interface order).
    pub fn with_element_counts(&self, counts: &[usize]) -> Result<Self, GeometryError> {
        if counts.len() != self.interfaces.len() {
            return Err(GeometryError::Config(format!(
                "expected {} element counts, got {}",
                self.interfaces.len(),
                counts.len()
            )));
        }
        let mut interfaces = self.interfaces.clone();
        for (iface, &c) in interfaces.iter_mut().zip(counts) {
            iface.element_count = c;
        }
        Scene::new(self.domains.clone(), interfaces, self.omega, self.incident)
    }

    /// Diagonal of the bounding box of all interface geometry.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for iface in &self.interfaces {
            for p in iface.shape.outline(iface.shape.min_elements().max(64)) {
                lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        (hi - lo).norm()
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let mut ids = BTreeSet::new();
        for d in &self.domains {
            if !ids.insert(d.id) {
                return Err(GeometryError::InvalidDomain { domain: d.id, reason: "duplicate id".into() });
            }
            if !d.epsilon.is_finite() || d.epsilon == 0.0 {
                return Err(GeometryError::InvalidDomain {
                    domain: d.id,
                    reason: format!("epsilon must be finite and nonzero, got {}", d.epsilon),
                });
            }
        }
        match self.domain(HOST_DOMAIN) {
            None => return Err(GeometryError::Topology("scene has no host domain 1".into())),
            Some(d) if d.epsilon != 1.0 => {
                return Err(GeometryError::InvalidDomain {
                    domain: HOST_DOMAIN,
                    reason: format!("host epsilon is normalised to 1, got {}", d.epsilon),
                })
            }
            _ => {}
        }
        if self.interfaces.is_empty() {
            return Err(GeometryError::Topology("scene has no interfaces".into()));
        }

        let mut iface_ids = BTreeSet::new();
        for iface in &self.interfaces {
            let id = iface.id;
            if !iface_ids.insert(id) {
                return Err(GeometryError::InvalidInterface { interface: id, reason: "duplicate id".into() });
            }
            if iface.left_domain == iface.right_domain {
                return Err(GeometryError::InvalidInterface {
                    interface: id,
                    reason: "left and right domain coincide".into(),
                });
            }
            for dom in [iface.left_domain, iface.right_domain] {
                if self.domain(dom).is_none() {
                    return Err(GeometryError::InvalidInterface {
                        interface: id,
                        reason: format!("unknown domain {dom}"),
                    });
                }
            }
            if iface.element_count < iface.shape.min_elements() {
                return Err(GeometryError::InvalidInterface {
                    interface: id,
                    reason: format!(
                        "needs at least {} elements, got {}",
                        iface.shape.min_elements(),
                        iface.element_count
                    ),
                });
            }
            match &iface.shape {
                InterfaceShape::Polyline { vertices, closed } => {
                    if vertices.len() < 2 || (*closed && vertices.len() < 3) {
                        return Err(GeometryError::InvalidInterface {
                            interface: id,
                            reason: "too few vertices".into(),
                        });
                    }
                    for (e, (a, b)) in edge_list(vertices, *closed).iter().enumerate() {
                        if !(a.distance(*b) > 0.0) {
                            return Err(GeometryError::ZeroLengthEdge { interface: id, edge: e });
                        }
                    }
                }
                InterfaceShape::Arc { radius, sweep, .. } => {
                    if !(*radius > 0.0) || !(sweep.abs() > 0.0) || sweep.abs() > TAU + 1e-12 {
                        return Err(GeometryError::InvalidInterface {
                            interface: id,
                            reason: "arc needs positive radius and 0 < |sweep| <= 2π".into(),
                        });
                    }
                }
            }
        }

        let tol = 1e-9 * self.diameter().max(1e-300);
        for iface in &self.interfaces {
            if iface.shape.is_closed() {
                let area = signed_area(&iface.shape.outline(iface.shape.min_elements().max(64)));
                // Counter-clockwise travel keeps the enclosed region on the left.
                let inside = if area > 0.0 { iface.left_domain } else { iface.right_domain };
                if inside == HOST_DOMAIN {
                    return Err(GeometryError::Topology(format!(
                        "interface {}: orientation puts the unbounded host inside a closed curve \
                         (signed area {area:.3e}); reverse the traversal or swap left/right",
                        iface.id
                    )));
                }
            } else {
                let (p, q) = iface.shape.endpoints();
                for end in [p, q] {
                    let joined = self.interfaces.iter().any(|other| {
                        other.id != iface.id && !other.shape.is_closed() && {
                            let (a, b) = other.shape.endpoints();
                            a.distance(end) < tol || b.distance(end) < tol
                        }
                    });
                    if !joined {
                        return Err(GeometryError::Topology(format!(
                            "interface {}: open end ({:.6}, {:.6}) is not a junction with another interface",
                            iface.id, end.x, end.y
                        )));
                    }
                }
            }
        }

        // Every domain boundary, oriented so the domain is on the left, must
        // close: at each chain endpoint as many chains leave as arrive.
        for d in &self.domains {
            let mut touching = 0;
            let mut ends: Vec<(Vec2, i32, u32)> = Vec::new();
            for iface in self.interfaces_of(d.id) {
                touching += 1;
                if iface.shape.is_closed() {
                    continue;
                }
                let (a, b) = iface.shape.endpoints();
                let (start, end) = if iface.left_domain == d.id { (a, b) } else { (b, a) };
                ends.push((start, 1, iface.id));
                ends.push((end, -1, iface.id));
            }
            if touching == 0 {
                return Err(GeometryError::Topology(format!("domain {} has no boundary", d.id)));
            }
            for &(p, _, _) in &ends {
                let balance: i32 = ends.iter().filter(|(q, _, _)| q.distance(p) < tol).map(|(_, s, _)| s).sum();
                if balance != 0 {
                    let culprits: BTreeSet<u32> =
                        ends.iter().filter(|(q, _, _)| q.distance(p) < tol).map(|(_, _, id)| *id).collect();
                    return Err(GeometryError::Topology(format!(
                        "domain {}: boundary does not close at ({:.6}, {:.6}); check left/right of interfaces {:?}",
                        d.id, p.x, p.y, culprits
                    )));
                }
            }
        }
        Ok(())
    }
}
