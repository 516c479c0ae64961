//! Local quadrature corrections for the Helmholtz layer kernels.
//!
//! Around a target `t`, with `u = v − t`, the squared distance is
//! `r² = Q(u) + δ(u)` where `Q` is the first fundamental form and
//! `δ = O(|u|³)`. Expanding the kernel in powers of `r` and then
//! `r^{2a} = Σ_m C(a, m) δ^m Q^{a−m}` reduces every non-smooth piece to
//! monomials `u^β Q(u)^{−τ}`. For those, the punctured rule misses exactly
//! `−h₁h₂ h^β Z_{DAD}(τ; β)`, with `D = diag(h₁, h₂)`. Terms of homogeneous
//! degree `|β| − 2τ ≤ order − 3` are kept.
//!
//! The corrections depend on Taylor coefficients of the density. They are
//! turned into weights on density samples by minimum-norm moment matching on
//! a small box of nodes.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::epstein::{ComplexQuadraticForm, LatticeSums};
use crate::error::{Error, Result};
use crate::quadrature::GridSpec;
use crate::surfaces::{Jet, SurfaceChart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Single,
    Double,
}

/// Weights on density samples at `target + offset`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalCorrection {
    pub offsets: Vec<(i64, i64)>,
    pub weights: Vec<C64>,
}

impl LocalCorrection {
    /// `Σ w_l σ(t + l)`; offsets outside the grid are dropped.
    pub fn apply(&self, density: &[C64], grid: &GridSpec, target: (i64, i64)) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (&l, &w) in self.offsets.iter().zip(&self.weights) {
            if let Some(k) = grid.position((target.0 + l.0, target.1 + l.1)) {
                acc += w * density[k];
            }
        }
        acc
    }

    /// `self + c·other` on the union of offsets.
    pub fn combine(&self, other: &LocalCorrection, c: C64) -> LocalCorrection {
        let mut out = self.clone();
        for (&l, &w) in other.offsets.iter().zip(&other.weights) {
            match out.offsets.iter().position(|&o| o == l) {
                Some(i) => out.weights[i] += c * w,
                None => {
                    out.offsets.push(l);
                    out.weights.push(c * w);
                }
            }
        }
        out
    }
}

fn check_order(order: u32) -> Result<()> {
    if matches!(order, 3 | 5 | 7) {
        Ok(())
    } else {
        Err(Error::Stencil(format!("correction order must be 3, 5 or 7, got {order}")))
    }
}

/// Largest monomial degree `|β|` any kept term can reach.
fn max_beta(kind: LayerKind, order: u32) -> usize {
    let o = order as usize;
    match kind {
        LayerKind::Single => 3 * o - 6,
        LayerKind::Double => 3 * o - 4,
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Generalized binomial `C(a, m)`.
fn binom(a: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (a - i as f64) / (i + 1) as f64)
}

/// Monomials `u^γ` with `|γ| ≤ p`, ordered by degree.
fn monomials(p: usize) -> Vec<(usize, usize)> {
    (0..=p).flat_map(|n| (0..=n).map(move |b| (n - b, b))).collect()
}

struct MomentFit {
    offsets: Vec<(i64, i64)>,
    gammas: Vec<(usize, usize)>,
    // offsets × gammas
    pinv: DMatrix<f64>,
}

// Minimum-norm moment matching on the (2R+1)² box, exact for |γ| ≤ order − 2.
fn moment_fit(order: u32) -> &'static MomentFit {
    static FITS: [OnceLock<MomentFit>; 2] = [OnceLock::new(), OnceLock::new()];
    let slot = if order == 5 { 0 } else { 1 };
    FITS[slot].get_or_init(|| {
        let r = ((order - 1) / 2) as i64;
        let offsets: Vec<(i64, i64)> = (-r..=r).flat_map(|a| (-r..=r).map(move |b| (a, b))).collect();
        let gammas = monomials(order as usize - 2);
        // Rows scaled by R^{-|γ|}; full row rank makes the unscaling exact.
        let rf = r as f64;
        let m = DMatrix::from_fn(gammas.len(), offsets.len(), |i, j| {
            let (g1, g2) = gammas[i];
            let (l1, l2) = offsets[j];
            (l1 as f64 / rf).powi(g1 as i32) * (l2 as f64 / rf).powi(g2 as i32)
        });
        let gram = (&m * m.transpose()).cholesky().expect("moment matrix has full row rank");
        let mut pinv = m.transpose() * gram.inverse();
        for (i, &(g1, g2)) in gammas.iter().enumerate() {
            pinv.column_mut(i).scale_mut(rf.powi(-((g1 + g2) as i32)));
        }
        MomentFit {
            offsets,
            gammas,
            pinv,
        }
    })
}

/// Expansion data of `X` around one target.
struct LocalGeometry {
    form: ComplexQuadraticForm,
    delta: Jet,
    jac_over_4pi: Jet,
    numerator_over_4pi: Jet,
}

fn local_geometry(chart: &dyn SurfaceChart, v: (f64, f64), degree: usize) -> Result<LocalGeometry> {
    let x = chart.jet(v, degree + 1);
    let dx: Vec<Jet> = x.iter().map(|c| c.truncate(degree) + (-c.value())).collect();
    let d1: Vec<Jet> = x.iter().map(|c| c.derivative(0)).collect();
    let d2: Vec<Jet> = x.iter().map(|c| c.derivative(1)).collect();
    let z = [
        &d1[1] * &d2[2] - &d1[2] * &d2[1],
        &d1[2] * &d2[0] - &d1[0] * &d2[2],
        &d1[0] * &d2[1] - &d1[1] * &d2[0],
    ];
    let r2 = &dx[0] * &dx[0] + &dx[1] * &dx[1] + &dx[2] * &dx[2];
    let (e, f, g) = (r2.coeff(2, 0), r2.coeff(1, 1) * 0.5, r2.coeff(0, 2));
    let form = ComplexQuadraticForm::new(e, f, g).map_err(|err| Error::Geometry {
        v1: v.0,
        v2: v.1,
        msg: err.to_string(),
    })?;
    let mut delta = r2;
    delta.set(2, 0, C64::new(0.0, 0.0));
    delta.set(1, 1, C64::new(0.0, 0.0));
    delta.set(0, 2, C64::new(0.0, 0.0));
    let zz = &z[0] * &z[0] + &z[1] * &z[1] + &z[2] * &z[2];
    let quarter = C64::new(1.0 / (4.0 * PI), 0.0);
    let jac_over_4pi = zz.sqrt().scale(quarter);
    let n = &dx[0] * &z[0] + &dx[1] * &z[1] + &dx[2] * &z[2];
    let numerator_over_4pi = n.scale(-quarter);
    Ok(LocalGeometry {
        form,
        delta,
        jac_over_4pi,
        numerator_over_4pi,
    })
}

/// Correction weights for the single or double layer at grid node `target`.
///
/// The corrected potential is the punctured sum plus
/// `Σ_l w_l σ(target + l)`.
pub fn local_correction(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    target: (i64, i64),
    kind: LayerKind,
    k: C64,
    order: u32,
) -> Result<LocalCorrection> {
    let mut both = local_corrections(chart, grid, target, &[kind], k, order)?;
    Ok(both.remove(0))
}

/// Same as [`local_correction`] for several kernels, sharing the geometry
/// and lattice sums.
pub fn local_corrections(
    chart: &dyn SurfaceChart,
    grid: &GridSpec,
    target: (i64, i64),
    kinds: &[LayerKind],
    k: C64,
    order: u32,
) -> Result<Vec<LocalCorrection>> {
    check_order(order)?;
    let v = grid.point(target);
    let degree = kinds.iter().map(|&kd| max_beta(kd, order)).max().unwrap_or(0);
    let geo = local_geometry(chart, v, degree)?;
    let (h1, h2) = grid.spacing();
    let hb = grid.mean_spacing();
    let lattice = grid.lattice_form(&geo.form).map_err(|err| Error::Geometry {
        v1: v.0,
        v2: v.1,
        msg: err.to_string(),
    })?;
    let mut sums = LatticeSums::new(&lattice, 1e-13, degree as u32)?;
    let mut zcache: HashMap<(i64, (usize, usize)), C64> = HashMap::new();
    // −h₁h₂ h^β Z_{DAD}(τ; β), τ = twice_tau / 2
    let mut zterm = |twice_tau: i64, beta: (usize, usize)| -> Result<C64> {
        if let Some(&z) = zcache.get(&(twice_tau, beta)) {
            return Ok(z);
        }
        let tau = C64::new(twice_tau as f64 / 2.0, 0.0);
        let z = sums.monomial(tau, (beta.0 as u32, beta.1 as u32))?;
        let scale = -h1 * h2 * h1.powi(beta.0 as i32) * h2.powi(beta.1 as i32)
            * hb.powf(-(twice_tau as f64));
        let val = z * scale;
        zcache.insert((twice_tau, beta), val);
        Ok(val)
    };

    let p = order as usize - 2;
    let gammas = monomials(p);
    let ik = C64::new(0.0, 1.0) * k;
    let mut out = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let (base, twice_a0, g) = match kind {
            LayerKind::Single => (0usize, -1i64, &geo.jac_over_4pi),
            LayerKind::Double => (2usize, -3i64, &geo.numerator_over_4pi),
        };
        let g = g.truncate(degree);
        let mut coeffs = vec![C64::new(0.0, 0.0); gammas.len()];
        let limit = order as i64 - 3;
        // Kernel term r^{2q + twice_a0/2·2}: only even powers 2q of the
        // Taylor series of the radial factor are non-smooth.
        let mut q = 0usize;
        while 2 * q as i64 - 1 <= limit {
            let c2q = match kind {
                LayerKind::Single => ik.powu(2 * q as u32) / factorial(2 * q),
                LayerKind::Double => {
                    ik.powu(2 * q as u32) * (1.0 - 2.0 * q as f64) / factorial(2 * q)
                }
            };
            let twice_a = twice_a0 + 2 * q as i64;
            let mut dm = Jet::constant(C64::new(1.0, 0.0), degree);
            let mut m = 0usize;
            while m as i64 + 2 * q as i64 - 1 <= limit {
                let twice_tau = 2 * m as i64 - twice_a;
                let alpha = c2q * binom(twice_a as f64 / 2.0, m);
                let h = (&dm * &g).scale(alpha);
                for (gi, &gamma) in gammas.iter().enumerate() {
                    for ((e1, e2), c) in h.terms() {
                        let beta = (e1 + gamma.0, e2 + gamma.1);
                        let nb = (beta.0 + beta.1) as i64;
                        if nb % 2 == 1 || nb - twice_tau > limit || (nb as usize) < base {
                            continue;
                        }
                        coeffs[gi] += c * zterm(twice_tau, beta)?;
                    }
                }
                dm = &dm * &geo.delta;
                m += 1;
            }
            q += 1;
        }
        if kind == LayerKind::Single {
            // Smooth part ik/(4π)·J·σ at the omitted node.
            coeffs[0] += ik * g.value() * (h1 * h2);
        }
        out.push(weights_from_moments(&gammas, &coeffs, (h1, h2), order));
    }
    Ok(out)
}

fn weights_from_moments(
    gammas: &[(usize, usize)],
    coeffs: &[C64],
    h: (f64, f64),
    order: u32,
) -> LocalCorrection {
    if order == 3 {
        return LocalCorrection {
            offsets: vec![(0, 0)],
            weights: vec![coeffs[0]],
        };
    }
    let fit = moment_fit(order);
    debug_assert_eq!(fit.gammas, gammas);
    let scaled: Vec<C64> = gammas
        .iter()
        .zip(coeffs)
        .map(|(&(g1, g2), &c)| c / (h.0.powi(g1 as i32) * h.1.powi(g2 as i32)))
        .collect();
    let weights = (0..fit.offsets.len())
        .map(|j| (0..gammas.len()).map(|i| scaled[i] * fit.pinv[(j, i)]).sum())
        .collect();
    LocalCorrection {
        offsets: fit.offsets.clone(),
        weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epstein::epstein_zeta;
    use crate::surfaces::{jacobian, FlatPlane};

    #[test]
    fn order_three_single_layer_matches_closed_form() {
        let chart = crate::surfaces::gaussian_bump();
        let h = 0.2;
        let t = (-7.5, -9.375);
        let grid = GridSpec::plane(h, t, 10, 10).unwrap();
        let k = C64::new(2.0, 0.0);
        let c = local_correction(&chart, &grid, (0, 0), LayerKind::Single, k, 3).unwrap();
        let a = crate::surfaces::first_fundamental_form(&chart, t).unwrap();
        let z = epstein_zeta(&a, C64::new(0.5, 0.0), 1e-13).unwrap().value;
        let j = jacobian(&chart, t).unwrap();
        let want = j * h / (4.0 * PI) * (-z + C64::new(0.0, 1.0) * k * h);
        assert_eq!(c.offsets, vec![(0, 0)]);
        assert!((c.weights[0] - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn flat_double_layer_correction_vanishes() {
        let grid = GridSpec::plane(0.1, (0.0, 0.0), 5, 5).unwrap();
        for order in [3, 5, 7] {
            let c = local_correction(&FlatPlane, &grid, (0, 0), LayerKind::Double, C64::new(1.0, 0.0), order)
                .unwrap();
            assert!(c.weights.iter().all(|w| w.norm() < 1e-15));
        }
    }

    #[test]
    fn moment_fit_reproduces_polynomials() {
        for order in [5, 7] {
            let fit = moment_fit(order);
            for (i, &(g1, g2)) in fit.gammas.iter().enumerate() {
                for (i2, _) in fit.gammas.iter().enumerate() {
                    let s: f64 = fit
                        .offsets
                        .iter()
                        .enumerate()
                        .map(|(j, &(l1, l2))| {
                            fit.pinv[(j, i2)] * (l1 as f64).powi(g1 as i32) * (l2 as f64).powi(g2 as i32)
                        })
                        .sum();
                    let want = if i == i2 { 1.0 } else { 0.0 };
                    assert!((s - want).abs() < 1e-10, "order {order} γ {i} {i2}: {s}");
                }
            }
        }
    }
}
