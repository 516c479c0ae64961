//! Dense LU and restarted GMRES for the discretized boundary equation.

use num_complex::Complex64 as C64;

use super::DiscretizedLayerOperator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    /// Relative residual `‖Ax − b‖∞ / ‖b‖∞`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 100,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    DenseLu,
    Iterative(GmresOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solver: &'static str,
    pub iterations: usize,
    /// Relative 2-norm residual estimate after each iteration (GMRES) or the
    /// final ∞-norm residual (LU).
    pub residual_history: Vec<f64>,
    /// `‖Aσ − f‖∞ / ‖f‖∞`, recomputed with a fresh apply.
    pub relative_residual: f64,
}

fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn norm_inf(x: &[C64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.norm()))
}

fn residual_inf(op: &DiscretizedLayerOperator, x: &[C64], f: &[C64]) -> Result<f64> {
    let ax = op.apply(x)?;
    let r: Vec<C64> = ax.iter().zip(f).map(|(a, b)| a - b).collect();
    let fn_ = norm_inf(f);
    Ok(if fn_ == 0.0 { norm_inf(&r) } else { norm_inf(&r) / fn_ })
}

/// Solves `A σ = f`.
pub fn solve_dirichlet(
    op: &DiscretizedLayerOperator,
    f: &[C64],
    solver: SolverKind,
) -> Result<(Vec<C64>, SolveReport)> {
    if f.len() != op.len() {
        return Err(Error::Domain(format!("expected {} data samples, got {}", op.len(), f.len())));
    }
    match solver {
        SolverKind::DenseLu => {
            let a = op.to_dense()?;
            let b = nalgebra::DVector::from_column_slice(f);
            let x = a
                .lu()
                .solve(&b)
                .ok_or_else(|| Error::Solver {
                    msg: "singular matrix in LU".into(),
                    history: vec![],
                })?;
            let x: Vec<C64> = x.iter().copied().collect();
            let res = residual_inf(op, &x, f)?;
            if !(res <= 1e-10) {
                return Err(Error::Solver {
                    msg: format!("LU residual {res:.3e} above 1e-10"),
                    history: vec![res],
                });
            }
            Ok((
                x,
                SolveReport {
                    solver: "dense_lu",
                    iterations: 1,
                    residual_history: vec![res],
                    relative_residual: res,
                },
            ))
        }
        SolverKind::Iterative(opts) => {
            let x0 = vec![C64::new(0.0, 0.0); f.len()];
            gmres(op, f, x0, opts)
        }
    }
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations,
/// starting from `x0`.
pub fn gmres(
    op: &DiscretizedLayerOperator,
    b: &[C64],
    x0: Vec<C64>,
    opts: GmresOptions,
) -> Result<(Vec<C64>, SolveReport)> {
    let n = b.len();
    if x0.len() != n || op.len() != n {
        return Err(Error::Domain("dimension mismatch in GMRES".into()));
    }
    let bnorm = norm2(b);
    let zero = C64::new(0.0, 0.0);
    if bnorm == 0.0 {
        return Ok((
            vec![zero; n],
            SolveReport {
                solver: "gmres",
                iterations: 0,
                residual_history: vec![0.0],
                relative_residual: 0.0,
            },
        ));
    }
    let m = opts.restart.max(1);
    let binf = norm_inf(b);
    let mut inner_tol = opts.tol;
    let mut x = x0;
    let mut history = Vec::new();
    let mut iters = 0usize;
    let residual = |x: &[C64]| -> Result<Vec<C64>> {
        let ax = op.apply(x)?;
        Ok(b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect())
    };
    let mut r = residual(&x)?;
    let final_rel;
    loop {
        let beta = norm2(&r);
        if history.is_empty() {
            history.push(beta / bnorm);
        }
        let rel_inf = norm_inf(&r) / binf;
        if rel_inf <= opts.tol {
            final_rel = rel_inf;
            break;
        }
        if iters >= opts.max_iter {
            return Err(Error::Solver {
                msg: format!("GMRES did not reach {:.1e} in {iters} iterations", opts.tol),
                history,
            });
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        // Hessenberg columns, rotated in place.
        let mut hcols: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<C64> = Vec::with_capacity(m);
        let mut g = vec![C64::new(beta, 0.0)];
        let mut converged = false;
        for j in 0..m {
            let mut w = op.apply(&v[j])?;
            let mut h = vec![zero; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij: C64 = vi.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                h[i] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm2(&w);
            h[j + 1] = C64::new(hn, 0.0);
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i].conj() * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let (c, s) = givens(h[j], h[j + 1]);
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = zero;
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            hcols.push(h);
            iters += 1;
            let rel = g[j + 1].norm() / bnorm;
            history.push(rel);
            if hn != 0.0 {
                v.push(w.iter().map(|wk| wk / hn).collect());
            }
            if rel <= inner_tol || hn == 0.0 || iters >= opts.max_iter {
                converged = rel <= inner_tol;
                break;
            }
        }
        // Back substitution on the triangular factor.
        let kdim = hcols.len();
        let mut y = vec![zero; kdim];
        for i in (0..kdim).rev() {
            let mut acc = g[i];
            for (l, yl) in y.iter().enumerate().take(kdim).skip(i + 1) {
                acc -= hcols[l][i] * yl;
            }
            y[i] = acc / hcols[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xk, vk) in x.iter_mut().zip(&v[i]) {
                *xk += yi * vk;
            }
        }
        r = residual(&x)?;
        if converged {
            // The target is the ∞-norm ratio; tighten the 2-norm goal if the
            // true residual misses it.
            let rel_inf = norm_inf(&r) / binf;
            if rel_inf > opts.tol {
                inner_tol = (inner_tol * 0.5 * opts.tol / rel_inf).max(f64::EPSILON);
            }
        }
    }
    Ok((
        x,
        SolveReport {
            solver: "gmres",
            iterations: iters,
            residual_history: history,
            relative_residual: final_rel,
        },
    ))
}

// (c, s) with c real so that [c s; −s̄ c]·[a; b] = [ρ; 0].
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let rho = an.hypot(bn);
    let c = an / rho;
    let s = (a / an) * b.conj() / rho;
    (c, s)
}
