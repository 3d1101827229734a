//! TOML scene description.
//!
//! ```toml
//! omega = 5.0
//!
//! [incident]            # optional, defaults to direction [1, 0], amplitude [1, 0]
//! direction = [1.0, 0.0]
//! amplitude = [1.0, 0.0]  # re, im
//!
//! [domain.1]
//! epsilon = 1.0
//! [domain.2]
//! epsilon = 2.0
//!
//! [interface.1]
//! left = 1               # normal points from `left` into `right`
//! right = 2
//! elements = 600
//! circle = { center = [0.0, 0.0], radius = 1.0, start_deg = 0.0, sweep_deg = -360.0 }
//!
//! [interface.2]
//! left = 3
//! right = 2
//! elements = 400
//! polyline = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]
//! closed = true
//! ```
//!
//! Each interface carries exactly one of `circle` or `polyline`. `sweep_deg`
//! defaults to -360 (full clockwise circle) and `start_deg` to 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Domain, Incident, Interface, InterfaceShape, Scene, Vec2};
use crate::error::GeometryError;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub omega: f64,
    #[serde(default)]
    pub incident: Option<IncidentSpec>,
    pub domain: BTreeMap<String, DomainSpec>,
    pub interface: BTreeMap<String, InterfaceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSpec {
    #[serde(default = "default_direction")]
    pub direction: [f64; 2],
    #[serde(default = "default_amplitude")]
    pub amplitude: [f64; 2],
}

fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSpec {
    pub left: u32,
    pub right: u32,
    pub elements: usize,
    #[serde(default)]
    pub circle: Option<CircleSpec>,
    #[serde(default)]
    pub polyline: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub closed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    #[serde(default)]
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default)]
    pub start_deg: f64,
    #[serde(default = "default_sweep")]
    pub sweep_deg: f64,
}

fn default_sweep() -> f64 {
    -360.0
}

fn parse_id(key: &str, what: &str) -> Result<u32, GeometryError> {
    key.parse::<u32>().map_err(|_| GeometryError::Config(format!("{what} key `{key}` is not a non-negative integer")))
}

impl SceneSpec {
    pub fn to_scene(&self) -> Result<Scene, GeometryError> {
        let domains = self
            .domain
            .iter()
            .map(|(k, d)| Ok(Domain::new(parse_id(k, "domain")?, d.epsilon)))
            .collect::<Result<Vec<_>, GeometryError>>()?;
        let mut interfaces = Vec::with_capacity(self.interface.len());
        for (k, spec) in &self.interface {
            let id = parse_id(k, "interface")?;
            let shape = match (&spec.circle, &spec.polyline) {
                (Some(c), None) => {
                    if spec.closed.is_some() {
                        return Err(GeometryError::Config(format!(
                            "interface {id}: `closed` applies to polylines only"
                        )));
                    }
                    InterfaceShape::Arc {
                        center: Vec2::new(c.center[0], c.center[1]),
                        radius: c.radius,
                        start: c.start_deg.to_radians(),
                        sweep: c.sweep_deg.to_radians(),
                    }
                }
                (None, Some(p)) => InterfaceShape::Polyline {
                    vertices: p.iter().map(|v| Vec2::new(v[0], v[1])).collect(),
                    closed: spec.closed.unwrap_or(false),
                },
                _ => {
                    return Err(GeometryError::Config(format!(
                        "interface {id}: give exactly one of `circle` or `polyline`"
                    )))
                }
            };
            interfaces.push(Interface {
                id,
                shape,
                left_domain: spec.left,
                right_domain: spec.right,
                element_count: spec.elements,
            });
        }
        let incident = self
            .incident
            .as_ref()
            .map(|i| Incident {
                direction: Vec2::new(i.direction[0], i.direction[1]),
                amplitude: Complex64::new(i.amplitude[0], i.amplitude[1]),
            })
            .unwrap_or_default();
        Scene::new(domains, interfaces, self.omega, incident)
    }
}

/// Parses and validates a TOML scene description.
pub fn parse_scene(text: &str) -> Result<Scene, GeometryError> {
    let spec: SceneSpec = toml::from_str(text).map_err(|e| GeometryError::Config(e.to_string()))?;
    spec.to_scene()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CIRCLE: &str = r#"
        omega = 5.0
        [domain.1]
        epsilon = 1.0
        [domain.2]
        epsilon = 2.0
        [interface.1]
        left = 1
        right = 2
        elements = 64
        circle = { radius = 1.0 }
    "#;

    #[test]
    fn parses_circle_scene() {
        let scene = parse_scene(CIRCLE).unwrap();
        assert_eq!(scene.domains().len(), 2);
        assert_eq!(scene.interfaces()[0].element_count, 64);
        assert!((scene.wavenumber(2) - 5.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = CIRCLE.replace("elements = 64", "elements = 64\ncolour = 3");
        assert!(matches!(parse_scene(&text), Err(GeometryError::Config(_))));
    }

    #[test]
    fn rejects_two_shapes() {
        let text = CIRCLE.replace("circle = { radius = 1.0 }", "circle = { radius = 1.0 }\npolyline = [[0.0, 0.0], [1.0, 0.0]]");
        assert!(matches!(parse_scene(&text), Err(GeometryError::Config(_))));
    }
}
