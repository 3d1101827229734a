//! Integer-order cylinder functions of real positive argument.
//!
//! Orders 0 and 1 come from the fdlibm rational approximations in the `libm`
//! crate. Higher orders are generated by three-term recurrence: upward for
//! `Y_n` (always stable) and for `J_n` while the order stays below the
//! argument, Miller's downward recurrence otherwise. Downward sequences are
//! normalised against whichever of `J_0`, `J_1` is larger in magnitude, so the
//! normalisation never divides by a value close to a zero.

use num_complex::Complex64;

use crate::error::SpecFunError;

/// Largest order accepted by the public entry points.
pub const MAX_ORDER: u32 = 60;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// One evaluated cylinder function value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylFunValue {
    pub order: i32,
    pub argument: f64,
    pub value: Complex64,
}

fn check_order(n: i32) -> Result<(), SpecFunError> {
    if n.unsigned_abs() > MAX_ORDER {
        return Err(SpecFunError::OrderOutOfRange { order: n, max: MAX_ORDER });
    }
    Ok(())
}

#[inline]
fn parity(n: i32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Bessel function of the first kind `J_n(z)` for `z >= 0`.
///
/// Orders outside `|n| <= 60` are still evaluated; the accuracy contract only
/// covers the documented range.
pub fn bessel_j(n: i32, z: f64) -> f64 {
    debug_assert!(z >= 0.0, "bessel_j needs a non-negative argument");
    let m = n.unsigned_abs() as usize;
    let sign = if n < 0 { parity(n) } else { 1.0 };
    let value = match m {
        0 => libm::j0(z),
        1 => libm::j1(z),
        _ => {
            if z == 0.0 {
                0.0
            } else if z * z <= 4.0 * (m as f64 + 1.0) && z < 2.0 {
                j_series(m, z)
            } else {
                bessel_j_orders(m, z)[m]
            }
        }
    };
    sign * value
}

/// Power series for `J_m(z)`, used where the terms decrease monotonically.
fn j_series(m: usize, z: f64) -> f64 {
    let half = 0.5 * z;
    let log_first = m as f64 * half.ln() - ln_factorial(m);
    if log_first < -745.0 {
        return 0.0;
    }
    let first = log_first.exp();
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * (m + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    first * sum
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

/// `J_0(z), …, J_nmax(z)` for `z >= 0`.
pub fn bessel_j_orders(nmax: usize, z: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let j0 = libm::j0(z);
    out[0] = j0;
    if nmax == 0 {
        return out;
    }
    let j1 = libm::j1(z);
    out[1] = j1;
    if nmax == 1 {
        return out;
    }
    if (nmax as f64) < z {
        // Oscillatory regime throughout: forward recurrence is stable.
        for k in 1..nmax {
            out[k + 1] = (2.0 * k as f64 / z) * out[k] - out[k - 1];
        }
        return out;
    }
    miller_downward(&mut out, z, j0, j1);
    out
}

/// Fills `out[0..]` with `J_k(z)` by Miller's algorithm.
fn miller_downward(out: &mut [f64], z: f64, j0: f64, j1: f64) {
    let nmax = out.len() - 1;
    let top = nmax.max(z.ceil() as usize);
    let start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    let mut upper = 0.0_f64;
    let mut current = 1e-300_f64;
    let mut scaled = vec![0.0; nmax + 1];
    let mut p0 = 0.0;
    let mut p1 = 0.0;
    for k in (1..=start).rev() {
        // current holds the unnormalised J_k, upper J_{k+1}.
        let lower = (2.0 * k as f64 / z) * current - upper;
        upper = current;
        current = lower;
        if k - 1 <= nmax {
            scaled[k - 1] = current;
        }
        if k <= nmax {
            scaled[k] = upper;
        }
        if k == 1 {
            p0 = current;
            p1 = upper;
        }
        if current.abs() > 1e250 {
            let s = 1e-250;
            current *= s;
            upper *= s;
            for v in scaled.iter_mut() {
                *v *= s;
            }
        }
    }
    let norm = if j0.abs() >= j1.abs() { j0 / p0 } else { j1 / p1 };
    for (o, s) in out.iter_mut().zip(scaled.iter()) {
        *o = s * norm;
    }
    out[0] = j0;
    out[1] = j1;
}

/// Bessel function of the second kind `Y_n(z)` for `z > 0`.
pub fn bessel_y(n: i32, z: f64) -> Result<f64, SpecFunError> {
    if !(z > 0.0) {
        return Err(SpecFunError::NonPositiveArgument { argument: z });
    }
    check_order(n)?;
    let m = n.unsigned_abs() as usize;
    let sign = if n < 0 { parity(n) } else { 1.0 };
    let value = match m {
        0 => libm::y0(z),
        1 => libm::y1(z),
        _ => *bessel_y_orders(m, z)?.last().unwrap(),
    };
    Ok(sign * value)
}

/// `Y_0(z), …, Y_nmax(z)` by upward recurrence. Values beyond the `f64` range
/// come back as `-inf`.
pub fn bessel_y_orders(nmax: usize, z: f64) -> Result<Vec<f64>, SpecFunError> {
    if !(z > 0.0) {
        return Err(SpecFunError::NonPositiveArgument { argument: z });
    }
    let mut out = vec![0.0; nmax + 1];
    out[0] = libm::y0(z);
    if nmax >= 1 {
        out[1] = libm::y1(z);
    }
    for k in 1..nmax {
        out[k + 1] = (2.0 * k as f64 / z) * out[k] - out[k - 1];
    }
    Ok(out)
}

/// Hankel function of the first kind `H_n^(1)(z) = J_n(z) + i Y_n(z)`.
pub fn hankel1(n: i32, z: f64) -> Result<Complex64, SpecFunError> {
    let y = bessel_y(n, z)?;
    Ok(Complex64::new(bessel_j(n, z), y))
}

/// `(H_0^(1)(z), H_1^(1)(z))` without argument checks; the kernels guard
/// `z > 0` themselves.
#[inline]
pub(crate) fn hankel01(z: f64) -> (Complex64, Complex64) {
    (
        Complex64::new(libm::j0(z), libm::y0(z)),
        Complex64::new(libm::j1(z), libm::y1(z)),
    )
}

#[inline]
pub(crate) fn hankel1_order1(z: f64) -> Complex64 {
    Complex64::new(libm::j1(z), libm::y1(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_at_zero_argument() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert_eq!(bessel_j(7, 0.0), 0.0);
    }

    #[test]
    fn first_zeros_of_j0_and_y0() {
        assert!(bessel_j(0, 2.404825557695773).abs() < 1e-10);
        assert!(bessel_y(0, 0.8935769662791675).unwrap().abs() < 1e-8);
    }

    #[test]
    fn negative_orders_follow_parity() {
        for n in 1..8 {
            let z = 3.7;
            assert_eq!(bessel_j(-n, z), parity(n) * bessel_j(n, z));
            assert_eq!(bessel_y(-n, z).unwrap(), parity(n) * bessel_y(n, z).unwrap());
        }
    }

    #[test]
    fn y_rejects_non_positive_argument() {
        assert!(matches!(bessel_y(0, 0.0), Err(SpecFunError::NonPositiveArgument { .. })));
        assert!(hankel1(1, -1.0).is_err());
        assert!(matches!(bessel_y(61, 1.0), Err(SpecFunError::OrderOutOfRange { .. })));
    }

    #[test]
    fn y0_small_argument_expansion() {
        let z: f64 = 1e-6;
        let expansion = std::f64::consts::FRAC_2_PI * ((z / 2.0).ln() + EULER_GAMMA);
        let y = bessel_y(0, z).unwrap();
        assert!(((y - expansion) / expansion).abs() < 1e-8);
    }

    #[test]
    fn wronskian_identity() {
        for &z in &[0.5, 5.0, 50.0] {
            let j = bessel_j_orders(11, z);
            let y = bessel_y_orders(11, z).unwrap();
            for n in 0..=10 {
                let w = j[n + 1] * y[n] - j[n] * y[n + 1];
                let expected = 2.0 / (std::f64::consts::PI * z);
                assert!((w - expected).abs() < 1e-9, "n={n} z={z}: {w} vs {expected}");
            }
        }
    }

    #[test]
    fn hankel_imaginary_part_is_y() {
        for &z in &[0.3, 2.0, 17.0] {
            assert_eq!(hankel1(0, z).unwrap().im, bessel_y(0, z).unwrap());
        }
    }

    #[test]
    fn hankel_large_argument_modulus() {
        let z = 200.0;
        let h = hankel1(0, z).unwrap();
        let lead = (2.0 / (std::f64::consts::PI * z)).sqrt();
        assert!((h.norm() - lead).abs() < 0.01 * lead);
    }

    #[test]
    fn hankel_derivative_identity() {
        let step = 1e-5;
        for &z in &[1.0, 10.0] {
            let d = (hankel1(0, z + step).unwrap() - hankel1(0, z - step).unwrap()) / (2.0 * step);
            let h1 = hankel1(1, z).unwrap();
            assert!((d + h1).norm() < 1e-6);
        }
    }

    #[test]
    fn three_term_recurrence_residual() {
        let mut z = 0.1;
        while z <= 100.0 {
            let j = bessel_j_orders(41, z);
            for n in 1..=40 {
                let res = j[n - 1] + j[n + 1] - (2.0 * n as f64 / z) * j[n];
                assert!(res.abs() <= 1e-9 * j[n].abs().max(1.0), "n={n} z={z} res={res}");
            }
            z *= 1.37;
        }
    }

    #[test]
    fn scalar_and_array_paths_agree() {
        for &z in &[0.2, 1.5, 3.0, 12.0, 45.0, 80.0] {
            let arr = bessel_j_orders(60, z);
            for n in 2..=60 {
                let s = bessel_j(n as i32, z);
                assert!((s - arr[n]).abs() <= 1e-13 * arr[n].abs().max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn continuity_across_algorithm_switches() {
        // Switch points: series (z < 2, z^2 <= 4(n+1)), forward (n < z), Miller.
        for n in 2..=12_i32 {
            let mut switches = vec![2.0, n as f64];
            let series_edge = (4.0 * (n as f64 + 1.0)).sqrt();
            if series_edge < 2.0 {
                switches.push(series_edge);
            }
            for s in switches {
                let h = 1e-9;
                let below = bessel_j(n, s - h);
                let above = bessel_j(n, s + h);
                assert!((above - below).abs() < 1e-8, "n={n} at {s}");
            }
        }
    }
}
