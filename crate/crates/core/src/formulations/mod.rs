//! Block systems `A y = b` for the Burton–Miller transmission formulations.
//!
//! Unknowns are the trace `u` and the scaled flux `w = (1/ε) ∂u/∂n` on every
//! interface, ordered `(u_1, …, u_m, w_1, …, w_m)` by interface id, with `n`
//! the interface normal. Each domain contributes one trace equation per
//! bounding interface. With `s = +1` when the normal points out of domain `i`
//! and `-1` when it points in, the equation of domain `i` collocated on `Γ₀`
//! reads, summed over the interfaces `Γ` of the domain,
//!
//! * standard: `½u₀ + Σ s (D_i u_Γ - ε_i S_i w_Γ) = u_in` (host only on the right),
//! * Burton–Miller with coefficient `c`:
//!   `½u₀ + (cε_i/2) w₀ + Σ s (D_i u_Γ + c N_i u_Γ - ε_i S_i w_Γ - c ε_i D*_i w_Γ)
//!   = u_in + c q_in`.
//!
//! Every layout below is a choice of equation type, scale and row position for
//! these equations, written by one shared row writer.

mod blocks;
mod predict;

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;

pub use blocks::{BlockKey, OperatorBlocks};
pub use predict::{predict_accumulation, AccumulationPrediction};

use crate::error::BuildError;
use crate::geometry::{BoundaryMesh, Scene, HOST_DOMAIN};
use crate::linalg::DenseComplexMatrix;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulationTag {
    /// Host Burton–Miller row first, interior standard row second.
    ConventionalBM,
    /// Rows swapped, `β = 1`.
    CalderonBMBeta1,
    /// Rows swapped, standard row scaled by `β = -α`.
    CalderonBMBetaMinusAlpha,
    /// All domain equations in domain order, host equations Burton–Miller.
    MultiConventional,
    /// Calderon ordering with every non-host equation standard, scaled by `β`.
    MultiCalderonOrig,
    /// Calderon ordering with Burton–Miller equations for domains on the
    /// outgoing side of each interface, coefficient `α/ε_i`.
    MultiCalderonMod,
    /// The general construction rule; coincides with `MultiCalderonMod`.
    Recipe,
}

impl FormulationTag {
    pub const ALL: [FormulationTag; 7] = [
        FormulationTag::ConventionalBM,
        FormulationTag::CalderonBMBeta1,
        FormulationTag::CalderonBMBetaMinusAlpha,
        FormulationTag::MultiConventional,
        FormulationTag::MultiCalderonOrig,
        FormulationTag::MultiCalderonMod,
        FormulationTag::Recipe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulationTag::ConventionalBM => "conventional-bm",
            FormulationTag::CalderonBMBeta1 => "calderon-bm-beta1",
            FormulationTag::CalderonBMBetaMinusAlpha => "calderon-bm-minus-alpha",
            FormulationTag::MultiConventional => "multi-conventional",
            FormulationTag::MultiCalderonOrig => "multi-calderon-orig",
            FormulationTag::MultiCalderonMod => "multi-calderon-mod",
            FormulationTag::Recipe => "recipe",
        }
    }

    pub fn is_single(self) -> bool {
        matches!(
            self,
            FormulationTag::ConventionalBM | FormulationTag::CalderonBMBeta1 | FormulationTag::CalderonBMBetaMinusAlpha
        )
    }
}

impl fmt::Display for FormulationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulationTag {
    type Err = BuildError;
    fn from_str(s: &str) -> Result<Self, BuildError> {
        FormulationTag::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            let names: Vec<_> = FormulationTag::ALL.iter().map(|t| t.name()).collect();
            BuildError::Invalid(format!("unknown formulation `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

/// A formulation with optional coefficient overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormulationKind {
    pub tag: FormulationTag,
    pub alpha: Option<Complex64>,
    pub beta: Option<Complex64>,
    pub gamma: Option<Complex64>,
}

impl From<FormulationTag> for FormulationKind {
    fn from(tag: FormulationTag) -> Self {
        FormulationKind { tag, alpha: None, beta: None, gamma: None }
    }
}

/// Coefficients after defaults are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub alpha: Complex64,
    /// Scale of the standard equations in Calderon orderings (1 for the
    /// conventional layouts).
    pub beta: Complex64,
    /// Burton–Miller coefficient of non-host equations when overridden;
    /// otherwise `α/ε_i` per domain.
    pub gamma: Option<Complex64>,
}

impl FormulationKind {
    pub fn new(tag: FormulationTag) -> Self {
        tag.into()
    }

    pub fn with_alpha(mut self, alpha: Complex64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_beta(mut self, beta: Complex64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_gamma(mut self, gamma: Complex64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    /// Applies the defaults: `α = -i/k₁`, `β = -α` where the formulation fixes
    /// it, `β = 1` for `CalderonBMBeta1`. Overrides of coefficients that a
    /// formulation fixes are rejected.
    pub fn coefficients(&self, scene: &Scene) -> Result<Coefficients, BuildError> {
        use FormulationTag::*;
        let k1 = scene.wavenumber(HOST_DOMAIN);
        if !(k1 > 0.0) {
            return Err(BuildError::Invalid(format!("host wavenumber must be positive, got {k1}")));
        }
        let alpha = self.alpha.unwrap_or(Complex64::new(0.0, -1.0 / k1));
        let fixed = |what: &str| {
            BuildError::Invalid(format!("{} fixes {what}; use a formulation that leaves it free", self.tag))
        };
        let beta = match self.tag {
            ConventionalBM | MultiConventional => {
                if self.beta.is_some() {
                    return Err(fixed("beta = 1"));
                }
                ONE
            }
            CalderonBMBeta1 => self.beta.unwrap_or(ONE),
            MultiCalderonOrig => self.beta.unwrap_or(-alpha),
            CalderonBMBetaMinusAlpha | MultiCalderonMod | Recipe => {
                if self.beta.is_some() {
                    return Err(fixed("beta = -alpha"));
                }
                -alpha
            }
        };
        let gamma = match self.tag {
            MultiCalderonMod | Recipe => self.gamma,
            _ => {
                if self.gamma.is_some() {
                    return Err(BuildError::Invalid(format!("{} has no gamma coefficient", self.tag)));
                }
                None
            }
        };
        Ok(Coefficients { alpha, beta, gamma })
    }
}

/// Which density a column block multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Density {
    U,
    W,
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Density::U => "u",
            Density::W => "w",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownBlock {
    pub interface: u32,
    pub density: Density,
    pub range: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquationType {
    Standard { scale: Complex64 },
    BurtonMiller { coefficient: Complex64 },
}

/// One trace equation: domain, collocation interface, type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equation {
    pub domain: u32,
    pub interface: u32,
    pub kind: EquationType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationBlock {
    pub equation: Equation,
    pub rows: Range<usize>,
}

/// Assembled formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    pub matrix: DenseComplexMatrix,
    pub rhs: Vec<Complex64>,
    pub unknowns: Vec<UnknownBlock>,
    pub equations: Vec<EquationBlock>,
    pub tag: FormulationTag,
    pub coefficients: Coefficients,
}

impl BlockSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Splits a solution vector into `(u, w)` per interface, in interface order.
    pub fn split_solution(&self, y: &[Complex64]) -> Vec<(u32, Vec<Complex64>, Vec<Complex64>)> {
        let mut out: Vec<(u32, Vec<Complex64>, Vec<Complex64>)> = Vec::new();
        for b in &self.unknowns {
            let idx = match out.iter().position(|(id, _, _)| *id == b.interface) {
                Some(i) => i,
                None => {
                    out.push((b.interface, Vec::new(), Vec::new()));
                    out.len() - 1
                }
            };
            let part = y[b.range.clone()].to_vec();
            match b.density {
                Density::U => out[idx].1 = part,
                Density::W => out[idx].2 = part,
            }
        }
        out
    }

    /// Solution vector from per-element `u` and `w` over the whole mesh.
    pub fn pack(&self, u: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
        let n = u.len();
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        for b in &self.unknowns {
            let offset = match b.density {
                Density::U => 0,
                Density::W => n,
            };
            for i in b.range.clone() {
                let e = i - offset;
                y[i] = match b.density {
                    Density::U => u[e],
                    Density::W => w[e],
                };
            }
        }
        y
    }

    /// Column blocks grouped per unknown block: entry `(r, c)` of the block grid
    /// refers to equation block `r` and unknown block `c`.
    pub fn block_grid(&self) -> (Vec<Range<usize>>, Vec<Range<usize>>) {
        (
            self.equations.iter().map(|e| e.rows.clone()).collect(),
            self.unknowns.iter().map(|u| u.range.clone()).collect(),
        )
    }

    /// Writes the matrix and right-hand side as CSV (`row,col,re,im`; the
    /// right-hand side uses column `rhs`).
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for i in 0..self.matrix.rows() {
            for (j, z) in self.matrix.row(i).iter().enumerate() {
                writeln!(w, "{i},{j},{:e},{:e}", z.re, z.im)?;
            }
        }
        for (i, z) in self.rhs.iter().enumerate() {
            writeln!(w, "{i},rhs,{:e},{:e}", z.re, z.im)?;
        }
        Ok(())
    }
}

fn check_materials(scene: &Scene) -> Result<(), BuildError> {
    for d in scene.domains() {
        if d.epsilon == -1.0 {
            return Err(BuildError::Metamaterial { domain: d.id });
        }
        if !(d.epsilon > 0.0) {
            return Err(BuildError::Invalid(format!(
                "domain {} has epsilon {}; only positive material constants are supported",
                d.id, d.epsilon
            )));
        }
    }
    Ok(())
}

/// Equation list of a layout.
fn layout(tag: FormulationTag, scene: &Scene, c: &Coefficients) -> Vec<Equation> {
    use FormulationTag::*;
    let bm_host = EquationType::BurtonMiller { coefficient: c.alpha };
    match tag {
        ConventionalBM | MultiConventional => {
            let mut eqs = Vec::new();
            for d in scene.domains() {
                for iface in scene.interfaces_of(d.id) {
                    let kind = if d.id == HOST_DOMAIN { bm_host } else { EquationType::Standard { scale: ONE } };
                    eqs.push(Equation { domain: d.id, interface: iface.id, kind });
                }
            }
            eqs
        }
        CalderonBMBeta1 | CalderonBMBetaMinusAlpha | MultiCalderonOrig | MultiCalderonMod | Recipe => {
            let standard = EquationType::Standard { scale: c.beta };
            let outgoing_bm = matches!(tag, MultiCalderonMod | Recipe);
            let upper = scene
                .interfaces()
                .iter()
                .map(|iface| Equation { domain: iface.right_domain, interface: iface.id, kind: standard });
            let lower = scene.interfaces().iter().map(|iface| {
                let d = iface.left_domain;
                let kind = if d == HOST_DOMAIN {
                    bm_host
                } else if outgoing_bm {
                    let coefficient = c.gamma.unwrap_or(c.alpha / scene.epsilon(d));
                    EquationType::BurtonMiller { coefficient }
                } else {
                    standard
                };
                Equation { domain: d, interface: iface.id, kind }
            });
            upper.chain(lower).collect()
        }
    }
}

/// Writes every equation of `equations` into a fresh system. This is the only
/// place matrix entries are produced, so all layouts share identical rows.
fn write_system(
    tag: FormulationTag,
    coefficients: Coefficients,
    equations: Vec<Equation>,
    scene: &Scene,
    mesh: &BoundaryMesh,
    blocks: &OperatorBlocks,
) -> Result<BlockSystem, BuildError> {
    let n = mesh.len();
    let dim = 2 * n;
    let mut matrix = DenseComplexMatrix::zeros(dim, dim);
    let mut rhs = vec![Complex64::new(0.0, 0.0); dim];
    let half = Complex64::new(0.5, 0.0);
    let k1 = scene.wavenumber(HOST_DOMAIN);
    let incident = scene.incident();

    let mut eq_blocks = Vec::with_capacity(equations.len());
    let mut row = 0;
    for eq in equations {
        let target = scene
            .interface(eq.interface)
            .ok_or_else(|| BuildError::Invalid(format!("unknown interface {}", eq.interface)))?;
        let trange = mesh.range(target.id).ok_or_else(|| BuildError::MissingBlock(format!("mesh range {}", target.id)))?;
        let nt = trange.len();
        let eps = scene.epsilon(eq.domain);
        let k = scene.wavenumber(eq.domain);
        let (scale, c) = match eq.kind {
            EquationType::Standard { scale } => (scale, None),
            EquationType::BurtonMiller { coefficient } => (ONE, Some(coefficient)),
        };
        // Identity terms on the collocation interface.
        matrix.add_identity_block(row, trange.start, nt, half * scale);
        if let Some(c) = c {
            matrix.add_identity_block(row, n + trange.start, nt, c * eps * 0.5 * scale);
        }
        for src in scene.interfaces_of(eq.domain) {
            let s = src.orientation_sign(eq.domain).unwrap();
            let srange = mesh.range(src.id).ok_or_else(|| BuildError::MissingBlock(format!("mesh range {}", src.id)))?;
            let ops = blocks.get(BlockKey { domain: eq.domain, source: src.id, target: target.id }, k)?;
            let (uc, wc) = (srange.start, n + srange.start);
            matrix.add_block(row, uc, &ops.double, scale * s);
            matrix.add_block(row, wc, &ops.single, -scale * s * eps);
            if let Some(c) = c {
                matrix.add_block(row, uc, &ops.hyper, scale * s * c);
                matrix.add_block(row, wc, &ops.adjoint, -scale * s * eps * c);
            }
        }
        if eq.domain == HOST_DOMAIN {
            for (i, e) in mesh.elements()[trange.clone()].iter().enumerate() {
                let uin = incident.value(e.midpoint, k1);
                let qin = incident.normal_derivative(e.midpoint, e.normal, k1);
                rhs[row + i] = scale * (uin + c.map_or(Complex64::new(0.0, 0.0), |c| c * qin));
            }
        }
        eq_blocks.push(EquationBlock { equation: eq, rows: row..row + nt });
        row += nt;
    }
    if row != dim {
        return Err(BuildError::Topology {
            kind: tag.to_string(),
            expected: format!("{dim} equations rows"),
            detail: format!("layout produced {row}"),
        });
    }
    let mut unknowns = Vec::with_capacity(2 * mesh.ranges().len());
    for density in [Density::U, Density::W] {
        let off = if density == Density::U { 0 } else { n };
        for (id, r) in mesh.ranges() {
            unknowns.push(UnknownBlock { interface: *id, density, range: off + r.start..off + r.end });
        }
    }
    Ok(BlockSystem { matrix, rhs, unknowns, equations: eq_blocks, tag, coefficients })
}

/// Single closed interface between the host and one scatterer.
pub fn build_single(
    kind: FormulationKind,
    scene: &Scene,
    mesh: &BoundaryMesh,
    blocks: &OperatorBlocks,
) -> Result<BlockSystem, BuildError> {
    if !kind.tag.is_single() {
        return Err(BuildError::Invalid(format!("{} is not a single-material formulation", kind.tag)));
    }
    if scene.domains().len() != 2 || scene.interfaces().len() != 1 || !scene.interfaces()[0].shape.is_closed() {
        return Err(BuildError::Topology {
            kind: kind.tag.to_string(),
            expected: "two domains separated by one closed interface".into(),
            detail: format!(
                "scene has {} domains and {} interfaces; use a multi-material formulation or the recipe",
                scene.domains().len(),
                scene.interfaces().len()
            ),
        });
    }
    check_materials(scene)?;
    let c = kind.coefficients(scene)?;
    write_system(kind.tag, c, layout(kind.tag, scene, &c), scene, mesh, blocks)
}

/// Scatterers made of several materials.
pub fn build_multi(
    kind: FormulationKind,
    scene: &Scene,
    mesh: &BoundaryMesh,
    blocks: &OperatorBlocks,
) -> Result<BlockSystem, BuildError> {
    use FormulationTag::*;
    if !matches!(kind.tag, MultiConventional | MultiCalderonOrig | MultiCalderonMod) {
        return Err(BuildError::Invalid(format!("{} is not a multi-material formulation", kind.tag)));
    }
    if scene.domains().len() < 3 {
        return Err(BuildError::Topology {
            kind: kind.tag.to_string(),
            expected: "at least three domains".into(),
            detail: "use a single-material formulation or the recipe".into(),
        });
    }
    check_materials(scene)?;
    let c = kind.coefficients(scene)?;
    write_system(kind.tag, c, layout(kind.tag, scene, &c), scene, mesh, blocks)
}

/// General construction: for every interface, the equation of the domain the
/// normal points into is a standard equation scaled by `-α` (upper half), and
/// the equation of the domain it points out of is Burton–Miller with
/// coefficient `α` for the host and `α/ε_i` otherwise (lower half).
pub fn build_recipe(scene: &Scene, mesh: &BoundaryMesh, blocks: &OperatorBlocks) -> Result<BlockSystem, BuildError> {
    build_recipe_with(FormulationKind::new(FormulationTag::Recipe), scene, mesh, blocks)
}

/// [`build_recipe`] with explicit `α` or `γ` overrides.
pub fn build_recipe_with(
    kind: FormulationKind,
    scene: &Scene,
    mesh: &BoundaryMesh,
    blocks: &OperatorBlocks,
) -> Result<BlockSystem, BuildError> {
    let kind = FormulationKind { tag: FormulationTag::Recipe, ..kind };
    check_materials(scene)?;
    let c = kind.coefficients(scene)?;
    write_system(FormulationTag::Recipe, c, layout(FormulationTag::Recipe, scene, &c), scene, mesh, blocks)
}

/// Dispatches on the tag.
pub fn build(
    kind: FormulationKind,
    scene: &Scene,
    mesh: &BoundaryMesh,
    blocks: &OperatorBlocks,
) -> Result<BlockSystem, BuildError> {
    if kind.tag.is_single() {
        build_single(kind, scene, mesh, blocks)
    } else if kind.tag == FormulationTag::Recipe {
        build_recipe_with(kind, scene, mesh, blocks)
    } else {
        build_multi(kind, scene, mesh, blocks)
    }
}
