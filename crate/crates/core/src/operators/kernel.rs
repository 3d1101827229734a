//! Element integrals of the Helmholtz kernels `G = (i/4) H_0^(1)(k r)` and its
//! normal derivatives, with `d = x - y` and `r = |d|`:
//!
//! * single layer `G`
//! * double layer `∂G/∂n(y) = (ik/4) H_1(kr) (d·n_y) / r`
//! * adjoint double layer `∂G/∂n(x) = -(ik/4) H_1(kr) (d·n_x) / r`
//! * hypersingular `∂²G/∂n(x)∂n(y)`, integrated through the tangential
//!   derivative identity
//!   `p.f.∫ ∂²G/∂n_x∂n_y = k² (n_x·n_y) ∫ G + [E(y)]_{y=a}^{y=b}`,
//!   `E(y) = (ik/4) H_1(kr)/r · ((n_x·n_y)(d·t) - (n_x·t)(d·n_y))`
//!   for a straight element from `a` to `b` with unit tangent `t`.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

use super::QuadratureRule;
use crate::geometry::{segment_distance, Element, Vec2};
use crate::specfun::{hankel01, hankel1_order1, EULER_GAMMA};

/// Sub-elements closer than this many of their own lengths to the target are split.
pub(crate) const NEAR_FACTOR: f64 = 2.0;
/// Maximum recursive bisection depth for near-singular integrals.
pub(crate) const MAX_DEPTH: u32 = 4;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Integrals of all four kernels over one element for one target.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElementIntegrals {
    pub single: Complex64,
    pub double: Complex64,
    pub adjoint: Complex64,
    pub hyper: Complex64,
}

/// Smooth part `(i/4) H_0(kr) + ln(r)/(2π)` of the single layer kernel, with
/// its `r → 0` limit `i/4 - (ln(k/2) + γ)/(2π)`.
fn single_layer_remainder(k: f64, r: f64) -> Complex64 {
    if r == 0.0 {
        return Complex64::new(-((0.5 * k).ln() + EULER_GAMMA) / (2.0 * PI), 0.25);
    }
    let (h0, _) = hankel01(k * r);
    I * 0.25 * h0 + Complex64::new(r.ln() / (2.0 * PI), 0.0)
}

/// `∫ (i/4) H_0(k|x - y|) dΓ(y)` over a straight element of length `length`
/// with `x` at its midpoint. The logarithm is integrated in closed form and
/// the smooth remainder by the given rule on each half.
pub fn single_layer_self(length: f64, k: f64, rule: &QuadratureRule) -> Complex64 {
    let half = 0.5 * length;
    // -(1/2π) ∫_{-h}^{h} ln|s| ds = -(1/π) h (ln h - 1)
    let log_part = -FRAC_1_PI * half * (half.ln() - 1.0);
    // Each half [0, h] maps to s = h (1 + ξ) / 2; both halves are equal.
    let remainder: Complex64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&xi, &w)| single_layer_remainder(k, 0.5 * half * (1.0 + xi)) * w)
        .sum::<Complex64>()
        * (0.5 * half)
        * 2.0;
    Complex64::new(log_part, 0.0) + remainder
}

/// Endpoint term `E(y)` of the hypersingular identity.
fn hyper_endpoint(x: Vec2, nx: Vec2, y: Vec2, t: Vec2, ny: Vec2, k: f64) -> Complex64 {
    let d = x - y;
    let r = d.norm();
    let h1 = hankel1_order1(k * r);
    I * (0.25 * k / r) * h1 * (nx.dot(ny) * d.dot(t) - nx.dot(t) * d.dot(ny))
}

/// Adds the rule's contribution over `[a, b]` to `acc`, bisecting pieces that
/// are near `x`.
#[allow(clippy::too_many_arguments)]
fn accumulate(
    x: Vec2,
    nx: Vec2,
    ny: Vec2,
    a: Vec2,
    b: Vec2,
    k: f64,
    rule: &QuadratureRule,
    depth: u32,
    acc: &mut [Complex64; 3],
) {
    let len = a.distance(b);
    if depth < MAX_DEPTH && segment_distance(x, a, b) < NEAR_FACTOR * len {
        let m = (a + b) * 0.5;
        accumulate(x, nx, ny, a, m, k, rule, depth + 1, acc);
        accumulate(x, nx, ny, m, b, k, rule, depth + 1, acc);
        return;
    }
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let jac = 0.5 * len;
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let y = mid + half * s;
        let d = x - y;
        let r = d.norm();
        let (h0, h1) = hankel01(k * r);
        let wj = w * jac;
        let dk = I * (0.25 * k / r) * h1;
        acc[0] += I * 0.25 * h0 * wj;
        acc[1] += dk * (d.dot(ny) * wj);
        acc[2] -= dk * (d.dot(nx) * wj);
    }
}

/// All four element integrals at target `x` with normal `nx`. `is_self`
/// selects the midpoint-collocation formulas.
pub fn element_integrals(
    x: Vec2,
    nx: Vec2,
    elem: &Element,
    k: f64,
    rule: &QuadratureRule,
    is_self: bool,
) -> ElementIntegrals {
    let t = elem.tangent();
    let ny = elem.normal;
    if is_self {
        let single = single_layer_self(elem.length, k, rule);
        let h1 = hankel1_order1(0.5 * k * elem.length);
        return ElementIntegrals {
            single,
            double: ZERO,
            adjoint: ZERO,
            hyper: single * (k * k) - I * (0.5 * k) * h1,
        };
    }
    let mut acc = [ZERO; 3];
    accumulate(x, nx, ny, elem.a, elem.b, k, rule, 0, &mut acc);
    let ends = hyper_endpoint(x, nx, elem.b, t, ny, k) - hyper_endpoint(x, nx, elem.a, t, ny, k);
    ElementIntegrals {
        single: acc[0],
        double: acc[1],
        adjoint: acc[2],
        hyper: acc[0] * (k * k * nx.dot(ny)) + ends,
    }
}

/// Rule for potential evaluation at off-boundary points far from the element.
pub(crate) const FAR_NODES: usize = 4;
/// Distance, in element lengths, beyond which [`FAR_NODES`] points suffice.
pub(crate) const FAR_FACTOR: f64 = 10.0;

/// `(∫ G, ∫ ∂G/∂n_y)` over an element at an off-boundary point.
pub fn potential_integrals(
    x: Vec2,
    elem: &Element,
    k: f64,
    near_rule: &QuadratureRule,
    far_rule: &QuadratureRule,
) -> (Complex64, Complex64) {
    let dist = segment_distance(x, elem.a, elem.b);
    let rule = if dist > FAR_FACTOR * elem.length { far_rule } else { near_rule };
    let mut acc = [ZERO; 3];
    accumulate(x, Vec2::default(), elem.normal, elem.a, elem.b, k, rule, 0, &mut acc);
    (acc[0], acc[1])
}
