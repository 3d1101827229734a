//! Separation-of-variables solutions for circular scatterers, used as
//! reference fields.
//!
//! The incident plane wave is expanded as
//! `A e^{ik₁ d·x} = A Σ iⁿ e^{-inφ} J_n(k₁r) e^{inθ}` with `d = (cos φ, sin φ)`.
//! For one circle of radius `R` the field is
//! `u = u_in + Σ a_n H_n(k₁r) e^{inθ}` outside and `Σ b_n J_n(k₂r) e^{inθ}` inside.
//! For concentric circles `r₁ < r₂` each region uses radially scaled bases so
//! the mode systems stay well scaled:
//! outside `a_n H_n(k₁r)/H_n(k₁r₂)`, in the annulus
//! `c_n J_n(k₂r)/J_n(k₂r₂) + d_n H_n(k₂r)/H_n(k₂r₁)`, inside `e_n J_n(k₃r)/J_n(k₃r₁)`.
//! Across every interface `u` and `(1/ε) ∂u/∂r` are continuous.

use num_complex::Complex64;

use crate::error::AnalyticError;
use crate::geometry::{Incident, Vec2};
use crate::linalg::{DenseComplexMatrix, LuDecomposition};
use crate::specfun::{bessel_j_orders, bessel_y_orders};

/// Default number of modes on each side of zero.
pub const DEFAULT_TRUNCATION: usize = 50;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    /// One circle of radius `radii[0]`.
    Circle,
    /// Outer radius `radii[0]`, inner radius `radii[1]`.
    Concentric,
}

/// Mode coefficients of a series solution, indexed by `n + truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    pub layout: Layout,
    pub truncation: usize,
    pub omega: f64,
    /// Interface radii, outermost first.
    pub radii: Vec<f64>,
    /// Material constants, host first.
    pub epsilons: Vec<f64>,
    pub incident: Incident,
    /// Host scattered-field coefficients.
    pub a: Vec<Complex64>,
    /// Circle: interior coefficients. Concentric: annulus `J` coefficients.
    pub b: Vec<Complex64>,
    /// Concentric only: annulus `H` coefficients.
    pub c: Vec<Complex64>,
    /// Concentric only: inner-disk coefficients.
    pub d: Vec<Complex64>,
}

/// `Z_m(z)` for `m = -(t+1)..=t+1` from non-negative orders.
struct Cyl {
    t: i32,
    j: Vec<f64>,
    y: Vec<f64>,
}

impl Cyl {
    fn new(t: usize, z: f64, need_y: bool) -> Self {
        let j = bessel_j_orders(t + 2, z);
        let y = if need_y && z > 0.0 {
            bessel_y_orders(t + 2, z).expect("positive argument")
        } else {
            Vec::new()
        };
        Cyl { t: t as i32, j, y }
    }

    fn sign(n: i32) -> f64 {
        if n < 0 && n % 2 != 0 {
            -1.0
        } else {
            1.0
        }
    }

    fn jn(&self, n: i32) -> Complex64 {
        debug_assert!(n.abs() <= self.t + 2);
        Complex64::new(Self::sign(n) * self.j[n.unsigned_abs() as usize], 0.0)
    }

    fn hn(&self, n: i32) -> Complex64 {
        let m = n.unsigned_abs() as usize;
        Complex64::new(self.j[m], self.y[m]) * Self::sign(n)
    }

    /// Derivatives with respect to the argument: `Z_n' = (Z_{n-1} - Z_{n+1}) / 2`.
    fn jn_prime(&self, n: i32) -> Complex64 {
        (self.jn(n - 1) - self.jn(n + 1)) * 0.5
    }

    fn hn_prime(&self, n: i32) -> Complex64 {
        (self.hn(n - 1) - self.hn(n + 1)) * 0.5
    }
}

fn incident_mode(incident: &Incident, n: i32) -> Complex64 {
    let phi = incident.direction.y.atan2(incident.direction.x);
    incident.amplitude * I.powi(n) * Complex64::from_polar(1.0, -(n as f64) * phi)
}

fn check(omega: f64, eps: &[f64], radii: &[f64], truncation: usize) -> Result<(), AnalyticError> {
    if !(omega > 0.0) {
        return Err(AnalyticError::InvalidParameters(format!("omega must be positive, got {omega}")));
    }
    if eps.iter().any(|e| !(*e > 0.0)) {
        return Err(AnalyticError::InvalidParameters("material constants must be positive".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(AnalyticError::InvalidParameters("radii must be positive".into()));
    }
    if truncation > 60 {
        return Err(AnalyticError::InvalidParameters("truncation is limited to 60 modes".into()));
    }
    Ok(())
}

/// Circle of `radius` with material `eps2`, incident `e^{ik₁x}`.
pub fn solve_circle(radius: f64, eps2: f64, omega: f64, truncation: usize) -> Result<SeriesSolution, AnalyticError> {
    solve_circle_with(radius, eps2, omega, truncation, Incident::default())
}

pub fn solve_circle_with(
    radius: f64,
    eps2: f64,
    omega: f64,
    truncation: usize,
    incident: Incident,
) -> Result<SeriesSolution, AnalyticError> {
    check(omega, &[eps2], &[radius], truncation)?;
    let k1 = omega;
    let k2 = omega * eps2.sqrt();
    let out = Cyl::new(truncation, k1 * radius, true);
    let inn = Cyl::new(truncation, k2 * radius, false);
    let t = truncation as i32;
    let mut a = Vec::with_capacity(2 * truncation + 1);
    let mut b = Vec::with_capacity(2 * truncation + 1);
    for n in -t..=t {
        let p = incident_mode(&incident, n);
        // [ H  -J ] [a]   [ -p J1 ]
        // [ k1 H'  -(k2/ε) J' ] [b] = [ -p k1 J1' ]
        let m11 = out.hn(n);
        let m12 = -inn.jn(n);
        let m21 = out.hn_prime(n) * k1;
        let m22 = -inn.jn_prime(n) * (k2 / eps2);
        let r1 = -p * out.jn(n);
        let r2 = -p * out.jn_prime(n) * k1;
        let det = m11 * m22 - m12 * m21;
        if !(det.norm() > 0.0) || !det.norm().is_finite() {
            return Err(AnalyticError::SingularMode { mode: n });
        }
        a.push((r1 * m22 - m12 * r2) / det);
        b.push((m11 * r2 - r1 * m21) / det);
    }
    Ok(SeriesSolution {
        layout: Layout::Circle,
        truncation,
        omega,
        radii: vec![radius],
        epsilons: vec![1.0, eps2],
        incident,
        a,
        b,
        c: Vec::new(),
        d: Vec::new(),
    })
}

/// Concentric circles: `eps2` in the annulus `r_inner < r < r_outer`, `eps3`
/// inside `r_inner`.
pub fn solve_concentric(
    r_inner: f64,
    r_outer: f64,
    eps2: f64,
    eps3: f64,
    omega: f64,
    truncation: usize,
) -> Result<SeriesSolution, AnalyticError> {
    solve_concentric_with(r_inner, r_outer, eps2, eps3, omega, truncation, Incident::default())
}

pub fn solve_concentric_with(
    r_inner: f64,
    r_outer: f64,
    eps2: f64,
    eps3: f64,
    omega: f64,
    truncation: usize,
    incident: Incident,
) -> Result<SeriesSolution, AnalyticError> {
    check(omega, &[eps2, eps3], &[r_inner, r_outer], truncation)?;
    if r_inner >= r_outer {
        return Err(AnalyticError::InvalidParameters(format!("need r_inner < r_outer, got {r_inner} >= {r_outer}")));
    }
    let (k1, k2, k3) = (omega, omega * eps2.sqrt(), omega * eps3.sqrt());
    let h1o = Cyl::new(truncation, k1 * r_outer, true);
    let z2o = Cyl::new(truncation, k2 * r_outer, true);
    let z2i = Cyl::new(truncation, k2 * r_inner, true);
    let j3i = Cyl::new(truncation, k3 * r_inner, false);
    let t = truncation as i32;
    let len = 2 * truncation + 1;
    let (mut a, mut c, mut d, mut e) =
        (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
    for n in -t..=t {
        let p = incident_mode(&incident, n);
        let h1 = h1o.hn(n);
        let j2o = z2o.jn(n);
        let h2i = z2i.hn(n);
        let j3 = j3i.jn(n);
        if j2o.norm() < 1e-280 || j3.norm() < 1e-280 || !h1.norm().is_finite() || !h2i.norm().is_finite() {
            // Mode is numerically absent at these arguments.
            a.push(ZERO);
            c.push(ZERO);
            d.push(ZERO);
            e.push(ZERO);
            continue;
        }
        let s2 = eps2.recip();
        let s3 = eps3.recip();
        // Unknowns (a, c, d, e); rows: u and flux at r_outer, u and flux at r_inner.
        let rows = [
            [Complex64::new(1.0, 0.0), -Complex64::new(1.0, 0.0), -z2o.hn(n) / h2i, ZERO],
            [
                h1o.hn_prime(n) / h1 * k1,
                -z2o.jn_prime(n) / j2o * (k2 * s2),
                -z2o.hn_prime(n) / h2i * (k2 * s2),
                ZERO,
            ],
            [ZERO, z2i.jn(n) / j2o, Complex64::new(1.0, 0.0), -Complex64::new(1.0, 0.0)],
            [ZERO, z2i.jn_prime(n) / j2o * (k2 * s2), z2i.hn_prime(n) / h2i * (k2 * s2), -j3i.jn_prime(n) / j3 * (k3 * s3)],
        ];
        let rhs = [-p * h1o.jn(n), -p * h1o.jn_prime(n) * k1, ZERO, ZERO];
        let m = DenseComplexMatrix::from_fn(4, 4, |i, j| rows[i][j]);
        let lu = LuDecomposition::new(&m);
        if lu.is_singular() {
            return Err(AnalyticError::SingularMode { mode: n });
        }
        let x = lu.solve(&rhs);
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AnalyticError::SingularMode { mode: n });
        }
        a.push(x[0]);
        c.push(x[1]);
        d.push(x[2]);
        e.push(x[3]);
    }
    Ok(SeriesSolution {
        layout: Layout::Concentric,
        truncation,
        omega,
        radii: vec![r_outer, r_inner],
        epsilons: vec![1.0, eps2, eps3],
        incident,
        a,
        b: c,
        c: d,
        d: e,
    })
}

impl SeriesSolution {
    fn k(&self, region: usize) -> f64 {
        self.omega * self.epsilons[region].sqrt()
    }

    /// Region index (0 = host) of radius `r`; points on an interface belong
    /// to the outer side.
    pub fn region(&self, r: f64) -> usize {
        self.radii.iter().take_while(|&&rad| r < rad).count()
    }

    /// Total field at `x`.
    pub fn evaluate(&self, x: Vec2) -> Complex64 {
        let r = x.norm();
        let region = self.region(r);
        self.evaluate_in(x, region)
    }

    /// Field at `x` from the expansion of `region`, whether or not `x` lies in it.
    pub fn evaluate_in(&self, x: Vec2, region: usize) -> Complex64 {
        let r = x.norm();
        let theta = x.y.atan2(x.x);
        let t = self.truncation as i32;
        let k = self.k(region);
        let z = Cyl::new(self.truncation, k * r, region < self.radii.len() && r > 0.0);
        let phase = |n: i32| Complex64::from_polar(1.0, n as f64 * theta);
        let mut sum = ZERO;
        match (self.layout, region) {
            (Layout::Circle, 0) => {
                for n in -t..=t {
                    sum += self.a[(n + t) as usize] * z.hn(n) * phase(n);
                }
                sum + self.incident.value(x, k)
            }
            (Layout::Circle, _) => {
                for n in -t..=t {
                    sum += self.b[(n + t) as usize] * z.jn(n) * phase(n);
                }
                sum
            }
            (Layout::Concentric, 0) => {
                let h1o = Cyl::new(self.truncation, k * self.radii[0], true);
                for n in -t..=t {
                    let i = (n + t) as usize;
                    if self.a[i] != ZERO {
                        sum += self.a[i] * z.hn(n) / h1o.hn(n) * phase(n);
                    }
                }
                sum + self.incident.value(x, k)
            }
            (Layout::Concentric, 1) => {
                let zo = Cyl::new(self.truncation, k * self.radii[0], false);
                let zi = Cyl::new(self.truncation, k * self.radii[1], true);
                for n in -t..=t {
                    let i = (n + t) as usize;
                    if self.b[i] != ZERO || self.c[i] != ZERO {
                        sum += (self.b[i] * z.jn(n) / zo.jn(n) + self.c[i] * z.hn(n) / zi.hn(n)) * phase(n);
                    }
                }
                sum
            }
            (Layout::Concentric, _) => {
                let zi = Cyl::new(self.truncation, k * self.radii[1], false);
                for n in -t..=t {
                    let i = (n + t) as usize;
                    if self.d[i] != ZERO {
                        sum += self.d[i] * z.jn(n) / zi.jn(n) * phase(n);
                    }
                }
                sum
            }
        }
    }

    /// Per-mode mismatch of `u` and `(1/ε) ∂u/∂r` across every interface:
    /// `(mode, max |Δu|, max |Δw|)`, relative to the incident mode coefficient.
    pub fn boundary_residuals(&self) -> Vec<(i32, f64, f64)> {
        let t = self.truncation as i32;
        let mut out = Vec::new();
        for n in -t..=t {
            let i = (n + t) as usize;
            let p = incident_mode(&self.incident, n);
            let (mut du, mut dw) = (0.0_f64, 0.0_f64);
            for (iface, &rad) in self.radii.iter().enumerate() {
                let (uo, wo) = self.mode_trace(iface, rad, n, i, p);
                let (ui, wi) = self.mode_trace(iface + 1, rad, n, i, p);
                du = du.max((uo - ui).norm() / p.norm());
                dw = dw.max((wo - wi).norm() / p.norm());
            }
            out.push((n, du, dw));
        }
        out
    }

    /// Mode-`n` value and scaled radial derivative of `region`'s expansion at radius `r`.
    fn mode_trace(&self, region: usize, r: f64, n: i32, i: usize, p: Complex64) -> (Complex64, Complex64) {
        let k = self.k(region);
        let s = k / self.epsilons[region];
        let z = Cyl::new(self.truncation, k * r, region < self.radii.len());
        match (self.layout, region) {
            (Layout::Circle, 0) => (
                p * z.jn(n) + self.a[i] * z.hn(n),
                (p * z.jn_prime(n) + self.a[i] * z.hn_prime(n)) * s,
            ),
            (Layout::Circle, _) => (self.b[i] * z.jn(n), self.b[i] * z.jn_prime(n) * s),
            (Layout::Concentric, 0) => {
                let h = Cyl::new(self.truncation, k * self.radii[0], true).hn(n);
                (
                    p * z.jn(n) + self.a[i] * z.hn(n) / h,
                    (p * z.jn_prime(n) + self.a[i] * z.hn_prime(n) / h) * s,
                )
            }
            (Layout::Concentric, 1) => {
                let jo = Cyl::new(self.truncation, k * self.radii[0], false).jn(n);
                let hi = Cyl::new(self.truncation, k * self.radii[1], true).hn(n);
                (
                    self.b[i] * z.jn(n) / jo + self.c[i] * z.hn(n) / hi,
                    (self.b[i] * z.jn_prime(n) / jo + self.c[i] * z.hn_prime(n) / hi) * s,
                )
            }
            (Layout::Concentric, _) => {
                let ji = Cyl::new(self.truncation, k * self.radii[1], false).jn(n);
                (self.d[i] * z.jn(n) / ji, self.d[i] * z.jn_prime(n) / ji * s)
            }
        }
    }
}
