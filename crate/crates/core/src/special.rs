//! Complex-argument special functions: log-gamma, reciprocal gamma, the
//! upper incomplete gamma function and the `erfc`-based onset function used
//! by the contour mollifier.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Value plus an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnResult {
    pub value: C64,
    pub est_abs_error: f64,
}

const LANCZOS_G: f64 = 7.0;
// Godfrey's coefficients for g = 7, n = 9.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

fn nonpositive_integer(z: C64) -> Option<i64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        Some(z.re as i64)
    } else {
        None
    }
}

/// Principal branch of `log Γ(z)`: analytic off the cut `(-∞, 0]`, real on
/// the positive axis.
pub fn log_gamma(z: C64) -> Result<C64> {
    if let Some(n) = nonpositive_integer(z) {
        return Err(Error::Pole(format!("log_gamma at z = {n}")));
    }
    if z.re >= 0.5 {
        return Ok(lanczos_log_gamma(z));
    }
    // Shift right, then undo with principal logs; the sum of logs carries
    // the cut of each factor onto (-inf, 0].
    let shift = (0.5 - z.re).ceil() as usize;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..shift {
        acc += (z + k as f64).ln();
    }
    Ok(lanczos_log_gamma(z + shift as f64) - acc)
}

fn lanczos_log_gamma(z: C64) -> C64 {
    let w = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (w + i as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (w + 0.5) * t.ln() - t + x.ln()
}

/// `Γ(z)`; errors at the poles.
pub fn gamma(z: C64) -> Result<C64> {
    Ok(log_gamma(z)?.exp())
}

/// `1/Γ(z)`, entire: exactly zero at the nonpositive integers.
pub fn rgamma(z: C64) -> C64 {
    match log_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => C64::new(0.0, 0.0),
    }
}

/// Upper incomplete gamma `Γ(s, z) = ∫_z^∞ t^{s-1} e^{-t} dt` for `Re z > 0`.
///
/// Uses Legendre's continued fraction (modified Lentz) when
/// `|z| >= max(1, Re s + 1)` and the lower-gamma power series otherwise.
pub fn upper_incomplete_gamma(s: C64, z: C64) -> Result<SpecialFnResult> {
    if !(z.re > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!(
            "upper_incomplete_gamma requires Re z > 0, got z = {z}"
        )));
    }
    let r = if z.norm() >= (s.re + 1.0).max(1.0) {
        continued_fraction(s, z)?
    } else if let Some(n) = nonpositive_integer(s) {
        integer_order_series(n, z)?
    } else {
        lower_series(s, z)?
    };
    if !r.value.re.is_finite() || !r.value.im.is_finite() {
        return Err(Error::Domain(format!("Γ({s}, {z}) overflowed")));
    }
    Ok(r)
}

fn continued_fraction(s: C64, z: C64) -> Result<SpecialFnResult> {
    let tiny = C64::new(TINY, 0.0);
    let mut b = z + 1.0 - s;
    let mut c = C64::new(1.0 / TINY, 0.0);
    let mut d = if b.norm() < TINY { tiny } else { b }.inv();
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let del = d * c;
        h *= del;
        let change = (del - 1.0).norm();
        if change < 4.0 * f64::EPSILON {
            let value = (s * z.ln() - z).exp() * h;
            let est = value.norm() * (change + i as f64 * f64::EPSILON).min(1e-10);
            return Ok(SpecialFnResult {
                value,
                est_abs_error: est,
            });
        }
    }
    Err(Error::NoConvergence {
        what: format!("incomplete gamma continued fraction, s = {s}, z = {z}"),
        iterations: MAX_ITER,
    })
}

// γ(s, z) = z^s e^{-z} Σ z^n / (s (s+1) ... (s+n)); Γ(s, z) = Γ(s) - γ(s, z).
fn lower_series(s: C64, z: C64) -> Result<SpecialFnResult> {
    let mut denom = s;
    let mut term = denom.inv();
    let mut sum = term;
    for n in 1..=MAX_ITER {
        denom += 1.0;
        term *= z / denom;
        sum += term;
        if term.norm() <= f64::EPSILON * sum.norm() {
            let lower = (s * z.ln() - z).exp() * sum;
            let full = gamma(s)?;
            let value = full - lower;
            let scale = full.norm().max(lower.norm());
            return Ok(SpecialFnResult {
                value,
                est_abs_error: scale * (n as f64 + 4.0) * f64::EPSILON,
            });
        }
    }
    Err(Error::NoConvergence {
        what: format!("incomplete gamma series, s = {s}, z = {z}"),
        iterations: MAX_ITER,
    })
}

// Γ(0, z) = E1(z) = -γ - ln z - Σ_{n≥1} (-z)^n / (n n!), then
// Γ(s, z) = (Γ(s+1, z) - z^s e^{-z}) / s downward.
fn integer_order_series(n: i64, z: C64) -> Result<SpecialFnResult> {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = C64::new(0.0, 0.0);
    let mut converged = false;
    for k in 1..=MAX_ITER {
        term *= -z / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.norm() <= f64::EPSILON * sum.norm().max(1e-300) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: format!("E1 series, z = {z}"),
            iterations: MAX_ITER,
        });
    }
    let mut value = -EULER_GAMMA - z.ln() - sum;
    let emz = (-z).exp();
    let mut order = 0i64;
    while order > n {
        let s = (order - 1) as f64;
        value = (value - z.powf(s) * emz) / s;
        order -= 1;
    }
    Ok(SpecialFnResult {
        value,
        est_abs_error: value.norm() * 32.0 * f64::EPSILON * (1 - n) as f64,
    })
}

/// `(erfc(x), φ(x))` with `φ(x) = ½ (x erfc x − e^{−x²}/√π)`.
pub fn erfc_family(x: f64) -> (f64, f64) {
    let e = libm::erfc(x);
    (e, 0.5 * (x * e - (-x * x).exp() / PI.sqrt()))
}

/// `[φ(x), φ'(x), ..., φ^{(n)}(x)]`.
///
/// `φ' = erfc/2` and `erfc^{(m)}(x) = −(2/√π)(−1)^{m−1} H_{m−1}(x) e^{−x²}`
/// with physicists' Hermite polynomials `H`.
pub fn phi_derivatives(x: f64, n: usize) -> Vec<f64> {
    let (erfc, phi) = erfc_family(x);
    let mut out = Vec::with_capacity(n + 1);
    out.push(phi);
    if n == 0 {
        return out;
    }
    out.push(0.5 * erfc);
    let gauss = (-x * x).exp() * 2.0 / PI.sqrt();
    let (mut h_prev, mut h) = (0.0, 1.0);
    for m in 1..n {
        // φ^{(m+1)} = ½ erfc^{(m)}, erfc^{(m)} uses H_{m-1}.
        let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
        out.push(-0.5 * gauss * sign * h);
        let next = 2.0 * x * h - 2.0 * (m - 1) as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn log_gamma_simple_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-15);
        assert_relative_eq!(
            log_gamma(c(0.5, 0.0)).unwrap().re,
            0.572_364_942_924_700_1,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            log_gamma(c(10.0, 0.0)).unwrap().re,
            362_880f64.ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn log_gamma_poles_rejected() {
        for z in [0.0, -1.0, -7.0] {
            assert!(matches!(log_gamma(c(z, 0.0)), Err(Error::Pole(_))));
        }
    }

    // Independent route: Stirling series after shifting far right.
    fn stirling_log_gamma(z: C64) -> C64 {
        let shift = 30usize;
        let w = z + shift as f64;
        let b = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0];
        let mut corr = C64::new(0.0, 0.0);
        let w2 = w * w;
        let mut p = w;
        for bk in b {
            corr += bk / p;
            p *= w2;
        }
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..shift {
            acc += (z + k as f64).ln();
        }
        (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + corr - acc
    }

    #[test]
    fn log_gamma_matches_stirling_and_reflection() {
        let z = c(1.0, 1.0);
        let l = log_gamma(z).unwrap();
        assert!((l - stirling_log_gamma(z)).norm() < 1e-13);
        // Γ(z)Γ(1−z) = π / sin(πz)
        let prod = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
        let rhs = PI / (PI * z).sin();
        assert!((prod / rhs - 1.0).norm() < 1e-13);
        for z in [c(-2.5, 0.3), c(0.2, -4.0), c(3.3, 7.1), c(-0.7, -0.01)] {
            let a = log_gamma(z).unwrap();
            let b = stirling_log_gamma(z);
            assert!((a - b).norm() < 1e-12, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn rgamma_vanishes_at_poles() {
        assert_eq!(rgamma(c(0.0, 0.0)), c(0.0, 0.0));
        assert_eq!(rgamma(c(-3.0, 0.0)), c(0.0, 0.0));
        assert_relative_eq!(rgamma(c(3.0, 0.0)).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn incomplete_gamma_order_one_is_exponential() {
        let z = c(2.0, 3.0);
        let g = upper_incomplete_gamma(c(1.0, 0.0), z).unwrap();
        assert!((g.value - (-z).exp()).norm() < 1e-15);
    }

    #[test]
    fn incomplete_gamma_small_argument_limit() {
        let g = upper_incomplete_gamma(c(0.5, 0.0), c(1e-20, 0.0)).unwrap();
        assert!((g.value.re - PI.sqrt()).abs() < 1e-9);
    }

    // Oracle: Gauss-Legendre on the ray t = z + x, x in [0, ∞), mapped by
    // x = u/(1-u) and split into panels.
    fn ray_quadrature(s: C64, z: C64) -> C64 {
        let nodes = gauss_legendre(40);
        let panels = 400;
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..panels {
            let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
            for &(x, w) in &nodes {
                let u = 0.5 * (a + b) + 0.5 * (b - a) * x;
                let t = u / (1.0 - u);
                let dt = 1.0 / ((1.0 - u) * (1.0 - u));
                let arg = z + t;
                let f = ((s - 1.0) * arg.ln() - arg).exp();
                acc += f * dt * w * 0.5 * (b - a);
            }
        }
        acc
    }

    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    }

    #[test]
    fn incomplete_gamma_matches_ray_quadrature() {
        for (s, z) in [
            (c(0.5, 0.0), c(1.0, 1.0)),
            (c(0.5, 0.0), c(0.4, 0.2)),
            (c(2.3, -0.7), c(3.0, -2.0)),
            (c(-1.5, 0.0), c(1.5, 0.5)),
        ] {
            let got = upper_incomplete_gamma(s, z).unwrap().value;
            let want = ray_quadrature(s, z);
            assert!(
                (got - want).norm() <= 1e-12 * want.norm(),
                "s={s} z={z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn incomplete_gamma_integer_orders() {
        // Γ(0, z) = E1(z); Γ(-1, z) via the recurrence must satisfy it back.
        for z in [c(0.3, 0.1), c(0.8, -0.5)] {
            let g0 = upper_incomplete_gamma(c(0.0, 0.0), z).unwrap().value;
            let gm1 = upper_incomplete_gamma(c(-1.0, 0.0), z).unwrap().value;
            let rhs = -gm1 + z.powf(-1.0) * (-z).exp();
            assert!((g0 - rhs).norm() < 1e-13 * g0.norm());
            let want = ray_quadrature(c(0.0, 0.0), z);
            assert!((g0 - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn incomplete_gamma_domain() {
        assert!(matches!(
            upper_incomplete_gamma(c(0.5, 0.0), c(-1.0, 2.0)),
            Err(Error::Domain(_))
        ));
        assert!(upper_incomplete_gamma(c(0.5, 0.0), c(0.0, 2.0)).is_err());
    }

    #[test]
    fn phi_closed_form_values() {
        let (_, p0) = erfc_family(0.0);
        assert_relative_eq!(p0, -0.5 / PI.sqrt(), epsilon = 1e-16);
        assert!(erfc_family(8.0).1.abs() < 1e-28);
        assert!((erfc_family(-8.0).1 + 8.0).abs() < 1e-27);
    }

    #[test]
    fn phi_derivatives_match_finite_differences() {
        let h = 1e-4;
        for i in 0..=20 {
            let x = -5.0 + 0.5 * i as f64;
            let d = phi_derivatives(x, 5);
            for k in 0..4 {
                let fp = phi_derivatives(x + h, k)[k];
                let fm = phi_derivatives(x - h, k)[k];
                let fd = (fp - fm) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-7, "x={x} k={k}: {fd} vs {}", d[k + 1]);
            }
        }
    }
}
