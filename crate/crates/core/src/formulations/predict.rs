use num_complex::Complex64;

use super::{FormulationKind, FormulationTag};
use crate::error::{BuildError, Error, SpectrumError};
use crate::geometry::{Scene, HOST_DOMAIN};

/// Points at which the eigenvalues of `A²` accumulate, up to compact
/// perturbations of the underlying operators.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationPrediction {
    pub points: Vec<Complex64>,
    /// One note per point (which block the point comes from).
    pub notes: Vec<String>,
}

impl AccumulationPrediction {
    fn push(&mut self, z: Complex64, note: impl Into<String>) {
        self.points.push(z);
        self.notes.push(note.into());
    }
}

/// Closed-form accumulation points of `A²`.
///
/// * `β = 1`: `(1 - αε₂)/4` and `α(α - ε₂)/4` (general `β`: `β(β - αε₂)/4`, `α(α - βε₂)/4`)
/// * `β = -α`: `α²(1 + ε₂)/4`
/// * original multi-material ordering: `β(β - αε₂)/4`, `β²/4`, `α(α - βε₂)/4`, `0`
/// * modified ordering: `α²(1 + ε₂)/4`, `α²(1 + ε₂/ε₃)/4`
/// * recipe: `α²(1 + ε_r/ε_l)/4` for every interface, with `ε_l`, `ε_r` the
///   materials the normal points out of and into (extrapolated from the
///   modified ordering, not separately analysed).
///
/// The conventional layouts have no accumulation point.
pub fn predict_accumulation(kind: FormulationKind, scene: &Scene) -> Result<AccumulationPrediction, Error> {
    use FormulationTag::*;
    let c = kind.coefficients(scene)?;
    let (alpha, beta) = (c.alpha, c.beta);
    let mut p = AccumulationPrediction { points: Vec::new(), notes: Vec::new() };
    let quarter = 0.25;
    match kind.tag {
        ConventionalBM | MultiConventional => return Err(SpectrumError::UnboundedSpectrum.into()),
        CalderonBMBeta1 | CalderonBMBetaMinusAlpha => {
            let e2 = interior_epsilon(scene);
            let a = beta * (beta - alpha * e2) * quarter;
            let b = alpha * (alpha - beta * e2) * quarter;
            if (a - b).norm() <= 1e-14 * a.norm().max(b.norm()) {
                p.push(a, "both diagonal blocks");
            } else {
                p.push(a, "upper diagonal block");
                p.push(b, "lower diagonal block");
            }
        }
        MultiCalderonOrig => {
            let e2 = scene.epsilon(middle_domain(scene));
            p.push(beta * (beta - alpha * e2) * quarter, "host interface, standard row");
            p.push(beta * beta * quarter, "inner interface, standard row");
            p.push(alpha * (alpha - beta * e2) * quarter, "host interface, Burton-Miller row");
            p.push(Complex64::new(0.0, 0.0), "inner interface, standard row of the enclosed domain");
        }
        MultiCalderonMod | Recipe => {
            if c.gamma.is_some() {
                return Err(BuildError::Invalid("no closed-form prediction for an overridden gamma".into()).into());
            }
            for iface in scene.interfaces() {
                let el = scene.epsilon(iface.left_domain);
                let er = scene.epsilon(iface.right_domain);
                let z = alpha * alpha * (1.0 + er / el) * quarter;
                if !p.points.iter().any(|q| (q - z).norm() <= 1e-14 * z.norm()) {
                    p.push(z, format!("interface {}", iface.id));
                }
            }
        }
    }
    Ok(p)
}

fn interior_epsilon(scene: &Scene) -> f64 {
    scene.domains().iter().find(|d| d.id != HOST_DOMAIN).map_or(f64::NAN, |d| d.epsilon)
}

/// Domain adjacent to the host in a nested scene.
fn middle_domain(scene: &Scene) -> u32 {
    scene
        .interfaces()
        .iter()
        .find(|i| i.left_domain == HOST_DOMAIN)
        .map_or(HOST_DOMAIN, |i| i.right_domain)
}
