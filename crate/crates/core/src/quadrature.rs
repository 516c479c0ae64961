//! Punctured and zeta-corrected trapezoidal rules for `∫ g(v) Q_A(v)^{-s} dv`
//! over the plane or the cylinder `𝕋 × ℝ`.
//!
//! Node `(j₁, j₂)` of a grid sits at `origin + (j₁h₁, j₂h₂)`. Rules are
//! centred on a target node; the integrand is singular there.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::epstein::{ComplexQuadraticForm, LatticeSums};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Plane,
    /// Axis 1 is periodic with period `2π`.
    Cylinder,
}

/// Equispaced parameter grid with an index box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    kind: DomainKind,
    h: (f64, f64),
    origin: (f64, f64),
    lo: (i64, i64),
    hi: (i64, i64),
}

impl GridSpec {
    /// Square grid on the plane with indices `[−n₁, n₁] × [−n₂, n₂]`.
    pub fn plane(h: f64, origin: (f64, f64), n1: i64, n2: i64) -> Result<Self> {
        Self::plane_box(h, h, origin, (-n1, -n2), (n1, n2))
    }

    /// General plane grid, possibly anisotropic, with inclusive index box.
    pub fn plane_box(
        h1: f64,
        h2: f64,
        origin: (f64, f64),
        lo: (i64, i64),
        hi: (i64, i64),
    ) -> Result<Self> {
        if !(h1 > 0.0 && h2 > 0.0) {
            return Err(Error::Domain(format!("spacings must be positive: {h1}, {h2}")));
        }
        if lo.0 > hi.0 || lo.1 > hi.1 {
            return Err(Error::Domain("empty index box".into()));
        }
        Ok(Self {
            kind: DomainKind::Plane,
            h: (h1, h2),
            origin,
            lo,
            hi,
        })
    }

    /// Cylinder grid: `periodic_count` nodes around axis 1 (`h₁ = 2π/n`),
    /// spacing `h2` and indices `[lo2, hi2]` along axis 2.
    pub fn cylinder(
        periodic_count: usize,
        h2: f64,
        origin: (f64, f64),
        lo2: i64,
        hi2: i64,
    ) -> Result<Self> {
        if periodic_count < 2 {
            return Err(Error::Domain("cylinder needs at least two nodes per period".into()));
        }
        let n = periodic_count as i64;
        let mut g = Self::plane_box(
            2.0 * PI / periodic_count as f64,
            h2,
            origin,
            (-(n / 2), lo2),
            (n - 1 - n / 2, hi2),
        )?;
        g.kind = DomainKind::Cylinder;
        Ok(g)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// `(h₁, h₂)`.
    pub fn spacing(&self) -> (f64, f64) {
        self.h
    }

    /// `√(h₁h₂)`, the scale used by the corrections.
    pub fn mean_spacing(&self) -> f64 {
        (self.h.0 * self.h.1).sqrt()
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    /// Inclusive index box `(lo, hi)`.
    pub fn index_box(&self) -> ((i64, i64), (i64, i64)) {
        (self.lo, self.hi)
    }

    pub fn periodic_count(&self) -> Option<usize> {
        match self.kind {
            DomainKind::Cylinder => Some((self.hi.0 - self.lo.0 + 1) as usize),
            DomainKind::Plane => None,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (
            (self.hi.0 - self.lo.0 + 1) as usize,
            (self.hi.1 - self.lo.1 + 1) as usize,
        )
    }

    pub fn len(&self) -> usize {
        let (a, b) = self.dims();
        a * b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major position of index `j`, wrapping axis 1 on the cylinder.
    pub fn position(&self, j: (i64, i64)) -> Option<usize> {
        let (n1, n2) = self.dims();
        let mut j1 = j.0 - self.lo.0;
        if self.kind == DomainKind::Cylinder {
            j1 = j1.rem_euclid(n1 as i64);
        }
        let j2 = j.1 - self.lo.1;
        if j1 < 0 || j1 >= n1 as i64 || j2 < 0 || j2 >= n2 as i64 {
            return None;
        }
        Some(j1 as usize * n2 + j2 as usize)
    }

    /// Index of the node at row-major position `k`.
    pub fn index(&self, k: usize) -> (i64, i64) {
        let n2 = self.dims().1;
        (self.lo.0 + (k / n2) as i64, self.lo.1 + (k % n2) as i64)
    }

    /// Parameter point of index `j`.
    pub fn point(&self, j: (i64, i64)) -> (f64, f64) {
        (
            self.origin.0 + j.0 as f64 * self.h.0,
            self.origin.1 + j.1 as f64 * self.h.1,
        )
    }

    /// Signed offset `j − t`; axis 1 reduced to one period on the cylinder.
    pub fn offset(&self, j: (i64, i64), t: (i64, i64)) -> (i64, i64) {
        let mut d1 = j.0 - t.0;
        if let Some(n) = self.periodic_count() {
            let n = n as i64;
            d1 = (d1 + n / 2).rem_euclid(n) - n / 2;
        }
        (d1, j.1 - t.1)
    }

    /// Samples `f` at every node, row-major.
    pub fn sample<F: Fn(f64, f64) -> C64>(&self, f: F) -> Vec<C64> {
        (0..self.len())
            .map(|k| {
                let (v1, v2) = self.point(self.index(k));
                f(v1, v2)
            })
            .collect()
    }

    /// Largest `|g|` on the non-periodic edges of the index box.
    pub fn boundary_max(&self, samples: &[C64]) -> f64 {
        let mut m: f64 = 0.0;
        for k in 0..self.len() {
            let j = self.index(k);
            let edge1 = self.kind == DomainKind::Plane && (j.0 == self.lo.0 || j.0 == self.hi.0);
            if edge1 || j.1 == self.lo.1 || j.1 == self.hi.1 {
                m = m.max(samples[k].norm());
            }
        }
        m
    }

    /// The form seen on the unit lattice: `D A D / (h₁h₂)` with
    /// `D = diag(h₁, h₂)`.
    pub fn lattice_form(&self, a: &ComplexQuadraticForm) -> Result<ComplexQuadraticForm> {
        let hb = self.mean_spacing();
        a.diag_congruence(self.h.0 / hb, self.h.1 / hb)
    }
}

fn check_samples(samples: &[C64], grid: &GridSpec) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(Error::Domain(format!(
            "expected {} samples, got {}",
            grid.len(),
            samples.len()
        )));
    }
    Ok(())
}

/// `Σ′ g_j Q(j − t)^{-s} h̄^{2−2s}` around target index `t`, with `Q` the
/// lattice form of the grid and `h̄ = √(h₁h₂)`.
pub fn punctured_trapezoid_at(
    samples: &[C64],
    a: &ComplexQuadraticForm,
    s: C64,
    grid: &GridSpec,
    target: (i64, i64),
) -> Result<C64> {
    check_samples(samples, grid)?;
    let lf = grid.lattice_form(a)?;
    let mut acc = C64::new(0.0, 0.0);
    for (k, &g) in samples.iter().enumerate() {
        let d = grid.offset(grid.index(k), target);
        if d == (0, 0) || g == C64::new(0.0, 0.0) {
            continue;
        }
        acc += g * (-s * lf.eval(d.0 as f64, d.1 as f64).ln()).exp();
    }
    let hb = grid.mean_spacing();
    Ok(acc * ((2.0 - 2.0 * s) * hb.ln()).exp())
}

/// Punctured rule with the singularity at index `(0, 0)`.
pub fn punctured_trapezoid(
    samples: &[C64],
    a: &ComplexQuadraticForm,
    s: C64,
    grid: &GridSpec,
) -> Result<C64> {
    punctured_trapezoid_at(samples, a, s, grid, (0, 0))
}

/// Offsets and weights of a local correction. The rule adds
/// `h̄^{2−2s} Σ w_l g(t + l)`; order 3 has the single weight `−Z_A(s)`.
#[derive(Debug, Clone)]
pub struct CorrectionStencil {
    pub order: u32,
    pub s: C64,
    pub offsets: Vec<(i64, i64)>,
    pub weights: Vec<C64>,
    /// The unit-lattice form the weights were built for.
    pub form: ComplexQuadraticForm,
}

impl CorrectionStencil {
    /// `order ∈ {3, 5, 7}`; `a` is the unit-lattice form.
    pub fn new(a: &ComplexQuadraticForm, s: C64, order: u32) -> Result<Self> {
        match order {
            3 => {
                let z = LatticeSums::new(a, 1e-13, 0)?.monomial(s, (0, 0))?;
                Ok(Self {
                    order,
                    s,
                    offsets: vec![(0, 0)],
                    weights: vec![-z],
                    form: *a,
                })
            }
            5 | 7 => fit_correction_stencil(a, s, order),
            _ => Err(Error::Stencil(format!("unsupported order {order}"))),
        }
    }

    /// `Σ w_l g(t + l)`; offsets outside the grid are dropped.
    pub fn apply(&self, samples: &[C64], grid: &GridSpec, target: (i64, i64)) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (&l, &w) in self.offsets.iter().zip(&self.weights) {
            if let Some(k) = grid.position((target.0 + l.0, target.1 + l.1)) {
                acc += w * samples[k];
            }
        }
        acc
    }
}

/// Even multi-indices `β` with `|β| ≤ max_deg`.
pub(crate) fn even_multi_indices(max_deg: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for d in (0..=max_deg).step_by(2) {
        for b1 in 0..=d {
            out.push((b1, d - b1));
        }
    }
    out
}

/// Minimum-norm solution of `M x = b` for real `M`, complex `b`.
/// Fails when the nonzero singular values spread beyond `max_cond`.
pub(crate) fn min_norm_solve(m: &DMatrix<f64>, b: &[C64], max_cond: f64) -> Result<Vec<C64>> {
    let svd = m.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 0.0) || smax / smin > max_cond {
        return Err(Error::Stencil(format!(
            "moment system ill-conditioned: condition {:.3e}",
            smax / smin
        )));
    }
    let re = DVector::from_iterator(b.len(), b.iter().map(|z| z.re));
    let im = DVector::from_iterator(b.len(), b.iter().map(|z| z.im));
    let xr = svd.solve(&re, 0.0).map_err(|e| Error::Stencil(e.to_string()))?;
    let xi = svd.solve(&im, 0.0).map_err(|e| Error::Stencil(e.to_string()))?;
    Ok(xr.iter().zip(xi.iter()).map(|(&r, &i)| C64::new(r, i)).collect())
}

/// Centrally symmetric offsets `l` with `|l|_∞ ≤ r`: the origin, then one
/// representative of each `±l` pair.
fn half_box(r: i64) -> Vec<(i64, i64)> {
    let mut out = vec![(0, 0)];
    for l1 in -r..=r {
        for l2 in -r..=r {
            if (l1, l2) > (0, 0) {
                out.push((l1, l2));
            }
        }
    }
    out
}

/// Higher-order stencil: weights `w` with `Σ w_l l^β = −Z_A(s; β)` for every
/// even `|β| ≤ order − 3`, `w_l = w_{−l}`, minimum norm. The correction then
/// annihilates the Taylor terms of `g` through degree `order − 3`.
pub fn fit_correction_stencil(a: &ComplexQuadraticForm, s: C64, order: u32) -> Result<CorrectionStencil> {
    if order != 5 && order != 7 {
        return Err(Error::Stencil(format!("fitted stencils exist for orders 5 and 7, not {order}")));
    }
    let max_deg = order - 3;
    let betas = even_multi_indices(max_deg);
    let mut sums = LatticeSums::new(a, 1e-13, max_deg)?;
    let rhs: Vec<C64> = betas
        .iter()
        .map(|&b| sums.monomial(s, b).map(|z| -z))
        .collect::<Result<_>>()?;
    let reps = half_box(((order - 3) / 2) as i64);
    // Pair columns carry √2 so the minimum norm is over per-node weights.
    let m = DMatrix::from_fn(betas.len(), reps.len(), |r, c| {
        let (b1, b2) = betas[r];
        let l = reps[c];
        let mono = (l.0 as f64).powi(b1 as i32) * (l.1 as f64).powi(b2 as i32);
        if c == 0 {
            mono
        } else {
            2f64.sqrt() * mono
        }
    });
    let x = min_norm_solve(&m, &rhs, 1e12)?;
    let mut offsets = vec![(0, 0)];
    let mut weights = vec![x[0]];
    for (c, &l) in reps.iter().enumerate().skip(1) {
        let w = x[c] / 2f64.sqrt();
        offsets.push(l);
        weights.push(w);
        offsets.push((-l.0, -l.1));
        weights.push(w);
    }
    Ok(CorrectionStencil {
        order,
        s,
        offsets,
        weights,
        form: *a,
    })
}

/// Corrected rule around target index `t`. Order 3 adds
/// `−Z_A(s) g(t) h̄^{2−2s}`; orders 5 and 7 use a fitted stencil.
pub fn corrected_trapezoid_at(
    samples: &[C64],
    a: &ComplexQuadraticForm,
    s: f64,
    grid: &GridSpec,
    order: u32,
    target: (i64, i64),
) -> Result<C64> {
    if s >= 1.0 {
        return Err(Error::UnsupportedPower(format!(
            "s = {s}: the plane rule covers s < 1 only"
        )));
    }
    let s = C64::new(s, 0.0);
    let stencil = CorrectionStencil::new(&grid.lattice_form(a)?, s, order)?;
    corrected_with_stencil(samples, a, grid, &stencil, target)
}

/// Corrected rule with a precomputed stencil (built for `grid.lattice_form(a)`).
pub fn corrected_with_stencil(
    samples: &[C64],
    a: &ComplexQuadraticForm,
    grid: &GridSpec,
    stencil: &CorrectionStencil,
    target: (i64, i64),
) -> Result<C64> {
    let base = punctured_trapezoid_at(samples, a, stencil.s, grid, target)?;
    let hb = grid.mean_spacing();
    let scale = ((2.0 - 2.0 * stencil.s) * hb.ln()).exp();
    Ok(base + scale * stencil.apply(samples, grid, target))
}

/// Corrected rule with the singularity at index `(0, 0)`.
pub fn corrected_trapezoid(
    samples: &[C64],
    a: &ComplexQuadraticForm,
    s: f64,
    grid: &GridSpec,
    order: u32,
) -> Result<C64> {
    corrected_trapezoid_at(samples, a, s, grid, order, (0, 0))
}

/// Least-squares slope of `log err` against `log h`.
pub fn convergence_slope(h: &[f64], err: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|x| x.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
