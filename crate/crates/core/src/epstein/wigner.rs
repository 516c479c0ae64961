//! Brute-force Wigner limit `W_A^{(N)}(s) = Z_A^{(N)}(s) − I_A^{(N)}(s)`.
//!
//! The box integral uses `div(x Q^{-s}) = (2 − 2s) Q^{-s}`: over the square
//! `[−M, M]²` the flux `x·n` equals `M` on every side, so
//! `I = M/(2 − 2s) ∮ Q^{-s} dl`, a smooth one-dimensional integral that
//! never touches the origin.

use num_complex::Complex64 as C64;

use super::form::ComplexQuadraticForm;
use crate::error::{Error, Result};

const GL_NODES: usize = 20;

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    use std::f64::consts::PI;
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

fn panel_sum(f: &dyn Fn(f64) -> C64, a: f64, b: f64, panels: usize, nodes: &[(f64, f64)]) -> C64 {
    let w = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * w;
        for &(x, wt) in nodes {
            acc += f(lo + 0.5 * w * (x + 1.0)) * (0.5 * w * wt);
        }
    }
    acc
}

/// `∫_{[−M, M]²} Q_A(v)^{−s} dv` with `M = N + ½`, to absolute accuracy
/// `tol` (panel doubling).
pub fn box_integral(a: &ComplexQuadraticForm, s: C64, half_width: f64, tol: f64) -> Result<C64> {
    let m = half_width;
    let pw = |v1: f64, v2: f64| (-s * a.eval(v1, v2).ln()).exp();
    // Sides x = ±M and y = ±M; Q is even so opposite sides coincide.
    let side = |t: f64| pw(m, t) + pw(t, m);
    let nodes = gauss_legendre(GL_NODES);
    let mut panels = (2.0 * m).ceil().max(4.0) as usize;
    let mut prev = panel_sum(&side, -m, m, panels, &nodes);
    for _ in 0..12 {
        panels *= 2;
        let cur = panel_sum(&side, -m, m, panels, &nodes);
        let scale = 2.0 * m / (2.0 - 2.0 * s).norm();
        // Below a few ulps of the total the panel change is round-off.
        let floor = 64.0 * f64::EPSILON * cur.norm() * scale;
        if (cur - prev).norm() * scale < tol.max(floor) {
            return Ok(cur * 2.0 * m / (2.0 - 2.0 * s));
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        what: "box integral panel refinement".into(),
        iterations: panels,
    })
}

/// `Σ'_{j ∈ [−N, N]²} Q_A(j)^{−s}`, summed in lexicographic order.
pub fn truncated_sum(a: &ComplexQuadraticForm, s: C64, n: i64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j1 in -n..=n {
        let mut row = C64::new(0.0, 0.0);
        for j2 in -n..=n {
            if j1 == 0 && j2 == 0 {
                continue;
            }
            row += (-s * a.eval(j1 as f64, j2 as f64).ln()).exp();
        }
        acc += row;
    }
    acc
}

/// `W_A^{(N)}(s)` for `0 < Re s < 1`.
pub fn wigner_limit_oracle(a: &ComplexQuadraticForm, s: C64, n: usize) -> Result<C64> {
    if !(s.re > 0.0 && s.re < 1.0) {
        return Err(Error::Domain(format!(
            "Wigner oracle needs 0 < Re s < 1, got s = {s}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if !a.flags().re_pd {
        return Err(Error::Inadmissible("Wigner oracle needs Re(A) positive definite".into()));
    }
    let z = truncated_sum(a, s, n as i64);
    let i = box_integral(a, s, n as f64 + 0.5, 1e-12)?;
    Ok(z - i)
}
