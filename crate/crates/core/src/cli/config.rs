//! Experiment configuration, read from TOML. Unknown keys are rejected.
//!
//! ```toml
//! out = "out/circle"           # optional; `--out` takes precedence
//!
//! [scene]
//! preset = "circle"            # circle | concentric | square | junction | sectors | squares-inclusion
//! omega = 5.0
//! elements = 600               # total element count
//! radius = 1.0                 # circle radius, or square side
//! epsilon = [2.0]              # material constants of domains 2, 3, ...
//! # radii = [1.0, 2.0]         # concentric: inner, outer
//! # counts = [400, 200]        # per-interface element counts (overrides `elements`)
//! # file = "scene.toml"        # instead of `preset`: a scene file, relative to this config
//!
//! [formulation]
//! tag = "calderon-bm-minus-alpha"
//! # alpha = [0.0, -0.2]        # re, im; defaults to -i/k1
//! # beta = [1.0, 0.0]
//! # gamma = [0.0, -0.1]
//!
//! [solve]
//! tol = 1e-8
//! # max_iter = 500
//! field = true                 # also evaluate the field on a grid
//! grid_points = 101
//! grid_half_width = 2.99
//!
//! [sweep]
//! parameter = "omega"          # omega | epsilon
//! start = 0.1
//! stop = 10.0
//! points = 100
//! rule = "single"              # single: set `domain`; reciprocal: eps2 = 1/eps3 = 1/value
//! domain = 2
//! formulations = ["conventional-bm", "calderon-bm-beta1", "calderon-bm-minus-alpha"]
//!
//! [eig]
//! radius = 0.25
//! cap = 3000
//! diagonal_blocks = false
//! truncate = 2.0               # half-width of the truncated view
//!
//! [calderon]
//! wavenumber = 1.5
//!
//! [converge]
//! elements = [75, 150, 300, 600]
//! formulations = ["conventional-bm", "calderon-bm-beta1", "calderon-bm-minus-alpha"]
//! truncation = 50
//! ```
//!
//! Every section except `[scene]` is optional and takes the defaults above
//! (the sweep range defaults to `(0, 10]` in 100 uniform points).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::analytic::{solve_concentric_with, solve_circle_with, SeriesSolution, DEFAULT_TRUNCATION};
use crate::error::{Error, GeometryError};
use crate::formulations::{FormulationKind, FormulationTag};
use crate::geometry::{parse_scene, presets, Scene};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub scene: SceneConfig,
    #[serde(default)]
    pub formulation: FormulationConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub eig: EigConfig,
    #[serde(default)]
    pub calderon: CalderonConfig,
    #[serde(default)]
    pub converge: ConvergeConfig,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub elements: Option<usize>,
    #[serde(default)]
    pub counts: Option<Vec<usize>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub radii: Option<[f64; 2]>,
    #[serde(default)]
    pub epsilon: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulationConfig {
    pub tag: String,
    #[serde(default)]
    pub alpha: Option<[f64; 2]>,
    #[serde(default)]
    pub beta: Option<[f64; 2]>,
    #[serde(default)]
    pub gamma: Option<[f64; 2]>,
}

impl Default for FormulationConfig {
    fn default() -> Self {
        Self { tag: FormulationTag::CalderonBMBetaMinusAlpha.name().into(), alpha: None, beta: None, gamma: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub field: bool,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_grid_half_width")]
    pub grid_half_width: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: None,
            field: false,
            grid_points: default_grid_points(),
            grid_half_width: default_grid_half_width(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Omega,
    Epsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonRule {
    /// Sets the material constant of one domain.
    Single,
    /// Sets `ε₃ = value` and `ε₂ = 1/value`.
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_parameter")]
    pub parameter: SweepParameter,
    #[serde(default = "default_sweep_start")]
    pub start: f64,
    #[serde(default = "default_sweep_stop")]
    pub stop: f64,
    #[serde(default = "default_sweep_points")]
    pub points: usize,
    #[serde(default = "default_rule")]
    pub rule: EpsilonRule,
    #[serde(default = "default_sweep_domain")]
    pub domain: u32,
    #[serde(default)]
    pub formulations: Option<Vec<String>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            parameter: default_parameter(),
            start: default_sweep_start(),
            stop: default_sweep_stop(),
            points: default_sweep_points(),
            rule: default_rule(),
            domain: default_sweep_domain(),
            formulations: None,
        }
    }
}

impl SweepConfig {
    /// `points` uniform values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.stop],
            n => (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigConfig {
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default)]
    pub diagonal_blocks: bool,
    #[serde(default = "default_truncate")]
    pub truncate: f64,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self { radius: default_radius(), cap: default_cap(), diagonal_blocks: false, truncate: default_truncate() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalderonConfig {
    #[serde(default)]
    pub wavenumber: Option<f64>,
}

impl Default for CalderonConfig {
    fn default() -> Self {
        Self { wavenumber: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    #[serde(default = "default_converge_elements")]
    pub elements: Vec<usize>,
    #[serde(default)]
    pub formulations: Option<Vec<String>>,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self { elements: default_converge_elements(), formulations: None, truncation: default_truncation() }
    }
}

fn default_tol() -> f64 {
    1e-8
}
fn default_grid_points() -> usize {
    101
}
fn default_grid_half_width() -> f64 {
    2.99
}
fn default_parameter() -> SweepParameter {
    SweepParameter::Omega
}
fn default_sweep_start() -> f64 {
    0.1
}
fn default_sweep_stop() -> f64 {
    10.0
}
fn default_sweep_points() -> usize {
    100
}
fn default_rule() -> EpsilonRule {
    EpsilonRule::Single
}
fn default_sweep_domain() -> u32 {
    2
}
fn default_radius() -> f64 {
    crate::spectra::DEFAULT_RADIUS
}
fn default_cap() -> usize {
    crate::spectra::DEFAULT_CAP
}
fn default_truncate() -> f64 {
    2.0
}
fn default_converge_elements() -> Vec<usize> {
    vec![75, 150, 300, 600]
}
fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn config_error(msg: impl Into<String>) -> Error {
    GeometryError::Config(msg.into()).into()
}

impl ExperimentConfig {
    /// Parses and validates a configuration; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, Error> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_error(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.formulation_kind()?;
        for list in [&self.sweep.formulations, &self.converge.formulations].into_iter().flatten() {
            for tag in list {
                tag.parse::<FormulationTag>().map_err(|e| config_error(e.to_string()))?;
            }
        }
        if !(self.solve.tol > 0.0) {
            return Err(config_error("solve.tol must be positive"));
        }
        if self.solve.grid_points == 0 || !(self.solve.grid_half_width > 0.0) {
            return Err(config_error("solve grid needs at least one point and a positive half-width"));
        }
        if !(self.sweep.start > 0.0 && self.sweep.stop >= self.sweep.start) {
            return Err(config_error("sweep range must satisfy 0 < start <= stop"));
        }
        if !(self.eig.radius > 0.0) {
            return Err(config_error("eig.radius must be positive"));
        }
        if self.converge.elements.is_empty() {
            return Err(config_error("converge.elements must not be empty"));
        }
        if matches!(self.calderon.wavenumber, Some(k) if !(k > 0.0)) {
            return Err(config_error("calderon.wavenumber must be positive"));
        }
        self.scene()?;
        Ok(())
    }

    /// Formulation from `[formulation]`, optionally with the tag replaced.
    pub fn formulation_kind_with(&self, tag: Option<FormulationTag>) -> Result<FormulationKind, Error> {
        let f = &self.formulation;
        let tag = match tag {
            Some(t) => t,
            None => f.tag.parse::<FormulationTag>().map_err(|e| config_error(e.to_string()))?,
        };
        let mut kind = FormulationKind::new(tag);
        if let Some(a) = f.alpha {
            kind = kind.with_alpha(complex(a));
        }
        if let Some(b) = f.beta {
            kind = kind.with_beta(complex(b));
        }
        if let Some(g) = f.gamma {
            kind = kind.with_gamma(complex(g));
        }
        Ok(kind)
    }

    pub fn formulation_kind(&self) -> Result<FormulationKind, Error> {
        self.formulation_kind_with(None)
    }

    /// The scene with the configured element count.
    pub fn scene(&self) -> Result<Scene, Error> {
        self.scene_with_elements(self.scene.elements)
    }

    /// The scene with `elements` in total (preset rules split the count).
    pub fn scene_with_elements(&self, elements: Option<usize>) -> Result<Scene, Error> {
        let s = &self.scene;
        let scene = match (&s.preset, &s.file) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(config_error("scene needs exactly one of `preset` or `file`"));
            }
            (None, Some(file)) => {
                let path = self.base_dir.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                let mut scene = parse_scene(&text)?;
                if let Some(omega) = s.omega {
                    scene = scene.with_omega(omega)?;
                }
                if let Some(n) = elements {
                    scene = scene.with_total_elements(n)?;
                }
                scene
            }
            (Some(name), None) => self.preset(name, elements)?,
        };
        match (&s.counts, elements == s.elements) {
            (Some(counts), true) => Ok(scene.with_element_counts(counts)?),
            _ => Ok(scene),
        }
    }

    fn eps(&self, i: usize, default: f64) -> f64 {
        self.scene.epsilon.as_ref().and_then(|e| e.get(i).copied()).unwrap_or(default)
    }

    fn preset(&self, name: &str, elements: Option<usize>) -> Result<Scene, Error> {
        let s = &self.scene;
        let omega = s.omega.unwrap_or(1.0);
        let n = elements.unwrap_or(300);
        let [r_in, r_out] = s.radii.unwrap_or([1.0, 2.0]);
        Ok(match name {
            "circle" => presets::circle(s.radius.unwrap_or(1.0), self.eps(0, 2.0), omega, n)?,
            "concentric" => presets::concentric(r_in, r_out, self.eps(0, 2.0), self.eps(1, 3.0), omega, n)?,
            "square" => presets::square(s.radius.unwrap_or(1.0), self.eps(0, 2.0), omega, (n / 4).max(1))?,
            "junction" => presets::junction(self.eps(0, 2.0), self.eps(1, 3.0), omega, n)?,
            "sectors" => presets::sectors(omega, n)?,
            "squares-inclusion" => presets::squares_with_inclusion(omega, n)?,
            other => return Err(config_error(format!("unknown preset `{other}`"))),
        })
    }

    /// Series solution for the circle and concentric presets.
    pub fn oracle(&self, scene: &Scene, truncation: usize) -> Result<Option<SeriesSolution>, Error> {
        let incident = *scene.incident();
        let omega = scene.omega();
        Ok(match self.scene.preset.as_deref() {
            Some("circle") => Some(solve_circle_with(
                self.scene.radius.unwrap_or(1.0),
                scene.epsilon(2),
                omega,
                truncation,
                incident,
            )?),
            Some("concentric") => {
                let [r_in, r_out] = self.scene.radii.unwrap_or([1.0, 2.0]);
                Some(solve_concentric_with(r_in, r_out, scene.epsilon(2), scene.epsilon(3), omega, truncation, incident)?)
            }
            _ => None,
        })
    }
}

/// Parses formulation names, defaulting to `fallback`.
pub fn parse_tags(list: &Option<Vec<String>>, fallback: &[FormulationTag]) -> Result<Vec<FormulationTag>, Error> {
    match list {
        None => Ok(fallback.to_vec()),
        Some(l) => l.iter().map(|t| t.parse::<FormulationTag>().map_err(|e| config_error(e.to_string()))).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::parse("[scene]\npreset = \"circle\"\nomega = 5.0\nelements = 60\n", Path::new(".")).unwrap();
        assert_eq!(cfg.solve.tol, 1e-8);
        assert_eq!(cfg.sweep.values().len(), 100);
        assert_eq!(cfg.scene().unwrap().total_elements(), 60);
        assert!(cfg.oracle(&cfg.scene().unwrap(), 50).unwrap().is_some());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse("[scene]\npreset = \"circle\"\nbogus = 1\n", Path::new("."));
        assert!(err.is_err());
        let err = ExperimentConfig::parse("colour = 1\n[scene]\npreset = \"circle\"\n", Path::new("."));
        assert!(err.is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        for text in [
            "[scene]\npreset = \"hexagon\"\n",
            "[scene]\n",
            "[scene]\npreset = \"circle\"\n[formulation]\ntag = \"pmchwt\"\n",
            "[scene]\npreset = \"circle\"\n[sweep]\nstart = 0.0\n",
            "[scene]\npreset = \"circle\"\nepsilon = [0.0]\n",
        ] {
            assert!(ExperimentConfig::parse(text, Path::new(".")).is_err(), "{text}");
        }
    }
}
