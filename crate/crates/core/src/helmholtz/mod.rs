//! Helmholtz layer potentials on complexified charts.
//!
//! Kernels are written with the unnormalized normal `z = ∂₁X × ∂₂X`, so
//! `n dS = z dv` and `dS = J dv` with `J = √(z·z)`. Off the diagonal every
//! operator is the plain trapezoidal sum; the diagonal carries the local
//! corrections from [`correction`].

pub mod correction;
mod solve;

pub use correction::{local_correction, local_corrections, LayerKind, LocalCorrection};
pub use solve::{gmres, solve_dirichlet, GmresOptions, SolveReport, SolverKind};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::GridSpec;
use crate::surfaces::{complex_distance, cross, dot, on_growing_branch, ComplexPoint, SurfaceChart};

/// Default cap on the number of nodes for dense materialization.
pub const DEFAULT_NODE_BUDGET: usize = 10_000;

const APPLY_BLOCKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Single,
    Double,
    /// `D − ik·S`.
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub k: C64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, k: C64) -> Result<Self> {
        if k == C64::new(0.0, 0.0) || k.im < 0.0 || !k.is_finite() {
            return Err(Error::Domain(format!("wavenumber must be nonzero with Im k ≥ 0, got {k}")));
        }
        Ok(Self { kind, k })
    }

    /// Weights `(w_S, w_D)` of the single and double layer.
    pub fn coupling(&self) -> (C64, C64) {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match self.kind {
            KernelKind::Single => (one, zero),
            KernelKind::Double => (zero, one),
            KernelKind::Combined => (-C64::new(0.0, 1.0) * self.k, one),
        }
    }
}

/// Position, normal and Jacobian at every grid node.
#[derive(Debug, Clone)]
pub struct SurfaceNodes {
    pub points: Vec<[C64; 3]>,
    pub normals: Vec<[C64; 3]>,
    pub jacobians: Vec<C64>,
}

impl SurfaceNodes {
    pub fn new(chart: &dyn SurfaceChart, grid: &GridSpec) -> Result<Self> {
        let data: Vec<Result<([C64; 3], [C64; 3], C64)>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let v = grid.point(grid.index(k));
                let j = chart.jet(v, 1);
                let x = [j[0].value(), j[1].value(), j[2].value()];
                let d1 = [j[0].coeff(1, 0), j[1].coeff(1, 0), j[2].coeff(1, 0)];
                let d2 = [j[0].coeff(0, 1), j[1].coeff(0, 1), j[2].coeff(0, 1)];
                let z = cross(&d1, &d2);
                let zz = dot(&z, &z);
                if !ComplexPoint(x).is_finite() || zz.norm() == 0.0 || !zz.is_finite() {
                    return Err(Error::Geometry {
                        v1: v.0,
                        v2: v.1,
                        msg: format!("degenerate chart, z·z = {zz}"),
                    });
                }
                Ok((x, z, zz.sqrt()))
            })
            .collect();
        let mut out = Self {
            points: Vec::with_capacity(grid.len()),
            normals: Vec::with_capacity(grid.len()),
            jacobians: Vec::with_capacity(grid.len()),
        };
        for d in data {
            let (x, z, j) = d?;
            out.points.push(x);
            out.normals.push(z);
            out.jacobians.push(j);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn branch_error(x: &[C64; 3], y: &[C64; 3], r2: C64) -> Error {
    Error::Branch(format!("r² = {r2} between {x:?} and {y:?}"))
}

/// Principal square root without the polar round trip.
#[inline]
fn csqrt(z: C64) -> C64 {
    // |z| without hypot; distances here are far from overflow
    let m = z.norm_sqr().sqrt();
    if m == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if z.re >= 0.0 {
        let t = (0.5 * (m + z.re)).sqrt();
        C64::new(t, z.im / (2.0 * t))
    } else {
        let t = (0.5 * (m - z.re)).sqrt();
        C64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

#[inline]
fn cexp(z: C64) -> C64 {
    let (s, c) = z.im.sin_cos();
    C64::new(c, s) * z.re.exp()
}

const INV_4PI: f64 = 1.0 / (4.0 * PI);

/// `w_S·e^{ikr}J/(4πr) + w_D·(x−y)·z (1−ikr)e^{ikr}/(4πr³)` for one pair.
#[inline]
fn pair_kernel(
    x: &[C64; 3],
    y: &[C64; 3],
    z: &[C64; 3],
    jac: C64,
    ik: C64,
    (ws, wd): (C64, C64),
) -> std::result::Result<C64, C64> {
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if on_growing_branch(r2) || r2 == C64::new(0.0, 0.0) {
        return Err(r2);
    }
    let r = csqrt(r2);
    let inv_r2 = r2.inv();
    // e^{ikr}/(4πr)
    let g = cexp(ik * r) * r * inv_r2 * INV_4PI;
    let n = d[0] * z[0] + d[1] * z[1] + d[2] * z[2];
    Ok(ws * g * jac + wd * n * (C64::new(1.0, 0.0) - ik * r) * g * inv_r2)
}

/// Nyström discretization of a layer operator on one grid.
#[derive(Debug, Clone)]
pub struct DiscretizedLayerOperator {
    grid: GridSpec,
    kernel: KernelSpec,
    order: u32,
    identity: C64,
    nodes: SurfaceNodes,
    corrections: Vec<LocalCorrection>,
    node_budget: usize,
    deterministic: bool,
}

/// Corrected layer operator for `kernel`, without identity term.
pub fn layer_operator(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    kernel: KernelSpec,
    order: u32,
) -> Result<DiscretizedLayerOperator> {
    build(chart, grid, kernel, order, C64::new(0.0, 0.0))
}

/// `½I + D − ik·S` with corrections folded into the diagonal.
pub fn assemble_combined_field(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    k: C64,
    order: u32,
) -> Result<DiscretizedLayerOperator> {
    let kernel = KernelSpec::new(KernelKind::Combined, k)?;
    build(chart, grid, kernel, order, C64::new(0.5, 0.0))
}

fn build(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    kernel: KernelSpec,
    order: u32,
    identity: C64,
) -> Result<DiscretizedLayerOperator> {
    let nodes = SurfaceNodes::new(chart, grid)?;
    let corrections = (0..grid.len())
        .into_par_iter()
        .map(|p| correction_for(chart, grid, &kernel, order, grid.index(p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscretizedLayerOperator {
        grid: grid.clone(),
        kernel,
        order,
        identity,
        nodes,
        corrections,
        node_budget: DEFAULT_NODE_BUDGET,
        deterministic: false,
    })
}

fn correction_for(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    kernel: &KernelSpec,
    order: u32,
    target: (i64, i64),
) -> Result<LocalCorrection> {
    let (ws, wd) = kernel.coupling();
    match kernel.kind {
        KernelKind::Single => local_correction(chart, grid, target, LayerKind::Single, kernel.k, order),
        KernelKind::Double => local_correction(chart, grid, target, LayerKind::Double, kernel.k, order),
        KernelKind::Combined => {
            let c = local_corrections(
                chart,
                grid,
                target,
                &[LayerKind::Double, LayerKind::Single],
                kernel.k,
                order,
            )?;
            Ok(LocalCorrection::default().combine(&c[0], wd).combine(&c[1], ws))
        }
    }
}

impl DiscretizedLayerOperator {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn nodes(&self) -> &SurfaceNodes {
        &self.nodes
    }

    /// Correction weights at row-major node `p`.
    pub fn correction(&self, p: usize) -> &LocalCorrection {
        &self.corrections[p]
    }

    pub fn node_budget(&self) -> usize {
        self.node_budget
    }

    pub fn set_node_budget(&mut self, budget: usize) {
        self.node_budget = budget;
    }

    /// Sequential row loop instead of the thread pool.
    pub fn set_deterministic(&mut self, on: bool) {
        self.deterministic = on;
    }

    // Rows t0..t1 against all later nodes, both directions: each unordered
    // pair costs one root and one exponential.
    fn apply_block(&self, t0: usize, t1: usize, density: &[C64]) -> Result<Vec<C64>> {
        let ik = C64::new(0.0, 1.0) * self.kernel.k;
        let (ws, wd) = self.kernel.coupling();
        let nd = &self.nodes;
        let n = nd.len();
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let mut y = vec![zero; n];
        for t in t0..t1 {
            let x = &nd.points[t];
            let zt = &nd.normals[t];
            let jt = nd.jacobians[t];
            let st = density[t];
            let mut acc = zero;
            for j in t + 1..n {
                let sj = density[j];
                if sj == zero && st == zero {
                    continue;
                }
                let p = &nd.points[j];
                let d = [x[0] - p[0], x[1] - p[1], x[2] - p[2]];
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                if on_growing_branch(r2) || r2 == zero {
                    return Err(branch_error(x, p, r2));
                }
                let r = csqrt(r2);
                let inv_r2 = r2.inv();
                let g = cexp(ik * r) * r * inv_r2 * INV_4PI;
                let q = wd * (one - ik * r) * g * inv_r2;
                let gs = ws * g;
                let zj = &nd.normals[j];
                let nj = d[0] * zj[0] + d[1] * zj[1] + d[2] * zj[2];
                let nt = d[0] * zt[0] + d[1] * zt[1] + d[2] * zt[2];
                acc += (gs * nd.jacobians[j] + nj * q) * sj;
                y[j] += (gs * jt - nt * q) * st;
            }
            y[t] += acc;
        }
        Ok(y)
    }

    // Row ranges with roughly equal pair counts. Fixed by n alone, so the
    // summation order does not depend on the thread count.
    fn blocks(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let total = n * n.saturating_sub(1) / 2;
        let per = total / APPLY_BLOCKS + 1;
        let mut out = Vec::new();
        let (mut start, mut work) = (0usize, 0usize);
        for t in 0..n {
            work += n - 1 - t;
            if work >= per || t + 1 == n {
                out.push((start, t + 1));
                start = t + 1;
                work = 0;
            }
        }
        out
    }

    /// Matrix-free apply.
    pub fn apply(&self, density: &[C64]) -> Result<Vec<C64>> {
        if density.len() != self.len() {
            return Err(Error::Domain(format!(
                "expected {} density samples, got {}",
                self.len(),
                density.len()
            )));
        }
        let blocks = self.blocks();
        let parts: Vec<Vec<C64>> = if self.deterministic {
            blocks
                .iter()
                .map(|&(a, b)| self.apply_block(a, b, density))
                .collect::<Result<_>>()?
        } else {
            blocks
                .par_iter()
                .map(|&(a, b)| self.apply_block(a, b, density))
                .collect::<Result<_>>()?
        };
        let (h1, h2) = self.grid.spacing();
        let mut y = vec![C64::new(0.0, 0.0); self.len()];
        for part in &parts {
            for (yi, pi) in y.iter_mut().zip(part) {
                *yi += pi;
            }
        }
        for (t, yt) in y.iter_mut().enumerate() {
            *yt = *yt * (h1 * h2)
                + self.identity * density[t]
                + self.corrections[t].apply(density, &self.grid, self.grid.index(t));
        }
        Ok(y)
    }

    /// Dense matrix, refused above the node budget.
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let n = self.len();
        if n > self.node_budget {
            return Err(Error::NodeBudget {
                nodes: n,
                budget: self.node_budget,
            });
        }
        let ik = C64::new(0.0, 1.0) * self.kernel.k;
        let w = self.kernel.coupling();
        let (h1, h2) = self.grid.spacing();
        let nd = &self.nodes;
        let fill_row = |t: usize| -> Result<Vec<C64>> {
            let x = &nd.points[t];
            let mut row = vec![C64::new(0.0, 0.0); n];
            for j in 0..n {
                if j != t {
                    row[j] = pair_kernel(x, &nd.points[j], &nd.normals[j], nd.jacobians[j], ik, w)
                        .map_err(|r2| branch_error(x, &nd.points[j], r2))?
                        * (h1 * h2);
                }
            }
            row[t] += self.identity;
            let ti = self.grid.index(t);
            let c = &self.corrections[t];
            for (&l, &wl) in c.offsets.iter().zip(&c.weights) {
                if let Some(p) = self.grid.position((ti.0 + l.0, ti.1 + l.1)) {
                    row[p] += wl;
                }
            }
            Ok(row)
        };
        let rows: Vec<Vec<C64>> = if self.deterministic {
            (0..n).map(fill_row).collect::<Result<_>>()?
        } else {
            (0..n).into_par_iter().map(fill_row).collect::<Result<_>>()?
        };
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

fn layer_eval(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    density: &[C64],
    kind: KernelKind,
    k: C64,
    order: u32,
) -> Result<Vec<C64>> {
    layer_operator(chart, grid, KernelSpec::new(kind, k)?, order)?.apply(density)
}

/// Corrected single layer `S[σ]` at every node.
pub fn single_layer_eval(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    density: &[C64],
    k: C64,
    order: u32,
) -> Result<Vec<C64>> {
    layer_eval(chart, grid, density, KernelKind::Single, k, order)
}

/// Corrected double layer `D[σ]` (principal value) at every node.
pub fn double_layer_eval(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    density: &[C64],
    k: C64,
    order: u32,
) -> Result<Vec<C64>> {
    layer_eval(chart, grid, density, KernelKind::Double, k, order)
}

/// Corrected layer potential at a single grid node `target`.
pub fn layer_potential_at(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    density: &[C64],
    kernel: KernelSpec,
    order: u32,
    target: (i64, i64),
) -> Result<C64> {
    let t = grid
        .position(target)
        .ok_or_else(|| Error::Domain(format!("target {target:?} is not a grid node")))?;
    if density.len() != grid.len() {
        return Err(Error::Domain("density length does not match the grid".into()));
    }
    let ik = C64::new(0.0, 1.0) * kernel.k;
    let w = kernel.coupling();
    let x = chart.point(grid.point(target)).0;
    let (h1, h2) = grid.spacing();
    let parts: Vec<Result<C64>> = (0..grid.len())
        .into_par_iter()
        .with_min_len(1024)
        .map(|j| {
            if j == t || density[j] == C64::new(0.0, 0.0) {
                return Ok(C64::new(0.0, 0.0));
            }
            let jet = chart.jet(grid.point(grid.index(j)), 1);
            let y = [jet[0].value(), jet[1].value(), jet[2].value()];
            let d1 = [jet[0].coeff(1, 0), jet[1].coeff(1, 0), jet[2].coeff(1, 0)];
            let d2 = [jet[0].coeff(0, 1), jet[1].coeff(0, 1), jet[2].coeff(0, 1)];
            let z = cross(&d1, &d2);
            let jac = dot(&z, &z).sqrt();
            pair_kernel(&x, &y, &z, jac, ik, w)
                .map(|kv| kv * density[j])
                .map_err(|r2| branch_error(&x, &y, r2))
        })
        .collect();
    let mut acc = C64::new(0.0, 0.0);
    for p in parts {
        acc += p?;
    }
    acc *= h1 * h2;
    let corr = correction_for(chart, grid, &kernel, order, target)?;
    Ok(acc + corr.apply(density, grid, target))
}

/// `e^{ik r}/(4π r)` with `r` the complexified distance to `source` at
/// every node.
pub fn point_source_data(
    source: [f64; 3],
    k: C64,
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
) -> Result<Vec<C64>> {
    let s = ComplexPoint::real(source[0], source[1], source[2]);
    (0..grid.len())
        .map(|p| {
            let x = chart.point(grid.point(grid.index(p)));
            let r = complex_distance(&x, &s)?;
            Ok(green(k, r))
        })
        .collect()
}

fn green(k: C64, r: C64) -> C64 {
    cexp(C64::new(0.0, 1.0) * k * r) / r * INV_4PI
}

/// Free-space field of a point source at real `targets`.
pub fn exact_field(source: [f64; 3], k: C64, targets: &[[f64; 3]]) -> Vec<C64> {
    targets
        .iter()
        .map(|t| {
            let r = ((t[0] - source[0]).powi(2) + (t[1] - source[1]).powi(2) + (t[2] - source[2]).powi(2)).sqrt();
            green(k, C64::new(r, 0.0))
        })
        .collect()
}

/// `u = D[σ] − ik·S[σ]` at real targets by the plain trapezoidal rule.
pub fn evaluate_solution_offsurface(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    density: &[C64],
    k: C64,
    targets: &[[f64; 3]],
) -> Result<Vec<C64>> {
    let nodes = SurfaceNodes::new(chart, grid)?;
    evaluate_with_nodes(&nodes, grid, density, k, targets)
}

/// As [`evaluate_solution_offsurface`] with precomputed nodes.
pub fn evaluate_with_nodes(
    nodes: &SurfaceNodes,
    grid: &GridSpec,
    density: &[C64],
    k: C64,
    targets: &[[f64; 3]],
) -> Result<Vec<C64>> {
    let kernel = KernelSpec::new(KernelKind::Combined, k)?;
    if density.len() != nodes.len() {
        return Err(Error::Domain("density length does not match the grid".into()));
    }
    let ik = C64::new(0.0, 1.0) * k;
    let w = kernel.coupling();
    let (h1, h2) = grid.spacing();
    let min_dist = 2.0 * grid.mean_spacing();
    targets
        .par_iter()
        .map(|t| {
            let x = [C64::new(t[0], 0.0), C64::new(t[1], 0.0), C64::new(t[2], 0.0)];
            let mut acc = C64::new(0.0, 0.0);
            let mut nearest = f64::INFINITY;
            for j in 0..nodes.len() {
                let y = &nodes.points[j];
                let d2: f64 = (0..3).map(|i| (t[i] - y[i].re).powi(2)).sum();
                nearest = nearest.min(d2);
                if density[j] == C64::new(0.0, 0.0) {
                    continue;
                }
                let kv = pair_kernel(&x, y, &nodes.normals[j], nodes.jacobians[j], ik, w)
                    .map_err(|r2| branch_error(&x, y, r2))?;
                acc += kv * density[j];
            }
            if nearest.sqrt() < min_dist {
                return Err(Error::Proximity(format!(
                    "target {t:?} is {:.3e} from the surface, need ≥ {min_dist:.3e}",
                    nearest.sqrt()
                )));
            }
            Ok(acc * (h1 * h2))
        })
        .collect()
}

/// Test density paired with the Gaussian bump.
pub fn bump_density(v1: f64, v2: f64) -> C64 {
    C64::new((0.6 * v1 + 2.0).sin() - 3.0 * (0.7 * v2 - PI).cos(), 0.0)
        + C64::new(0.0, 1.0) * ((v1 + 1.0).sin() - (0.2 * v2).cos()).exp()
}

/// Test density paired with the slanted cylinder. The angle is read in
/// `[0, 2π)`, so the imaginary part jumps across `v₁ = 0`.
pub fn cylinder_density(v1: f64, v2: f64) -> C64 {
    let v1 = v1.rem_euclid(2.0 * PI);
    C64::new((3.0 * v1 + 2.0).sin() - 3.0 * (0.7 * v2 - PI).cos(), 0.3 * v1 * (2.0 * v2).cos())
}

/// Sizes the global thread pool from `CZQ_THREADS` if set. Returns the
/// number of threads in use.
pub fn configure_threads() -> usize {
    if let Some(n) = std::env::var("CZQ_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}
