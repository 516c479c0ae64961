//! Exponentially convergent evaluation of `Z_A(s) = Σ' Q_A(j)^{-s}` and of
//! the monomial-weighted sums `Z_A(τ; γ) = Σ' j^γ Q_A(j)^{-τ}`, continued
//! analytically in both the exponent and the (complex) form.
//!
//! With `Q^{-τ} = π^τ/Γ(τ) ∫₀^∞ t^{τ-1} e^{-πtQ} dt`, the part of the
//! integral over `t ≥ 1` gives incomplete-gamma terms on the direct lattice;
//! the part over `t < 1` is Poisson-summed. The Fourier transform of
//! `x^γ e^{-πtQ_A(x)}` is `(i/2π)^{|γ|} ∂_k^γ [e^{-πQ_B(k)/t} / (t √det A)]`
//! with `B = A⁻¹`, and the derivative is a polynomial in `k` and `1/t`
//! times the Gaussian, so every dual term is again an incomplete gamma.

use num_complex::Complex64 as C64;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use super::form::ComplexQuadraticForm;
use crate::error::{Error, Result};
use crate::special::{rgamma, upper_incomplete_gamma};

/// Default absolute truncation tolerance.
pub const DEFAULT_EPS: f64 = 1e-12;

/// A zeta evaluation together with how it was truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub value: C64,
    pub s: C64,
    pub truncation_radius: f64,
    pub est_abs_error: f64,
}

fn side_radius(rate: f64, eps: f64) -> f64 {
    let arg = 4.0 * PI / (eps * rate);
    if arg <= 1.0 {
        1.0
    } else {
        (arg.ln() / rate).sqrt() + 1.0
    }
}

/// Truncation radius for the two-sided incomplete-gamma series so that the
/// neglected tails are below `eps`. Decay rates are `λ_min(Re A)` and
/// `λ_min(Re A⁻¹)`.
pub fn truncation_radius(a: &ComplexQuadraticForm, s: C64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let a = direct_form(a)?;
    let (ra, rb) = (a.re_min_eig(), a.re_inv_min_eig());
    let floor = [a.norm(), s.norm() / ra, a.inv_norm(), (1.0 - s).norm() / rb]
        .into_iter()
        .fold(0.0f64, f64::max);
    let rho = side_radius(ra, eps).max(side_radius(rb, eps));
    Ok(rho.max((floor / PI).sqrt() * (1.0 + 1e-12)))
}

// Form to which the representation applies directly (rotated if needed).
fn direct_form(a: &ComplexQuadraticForm) -> Result<ComplexQuadraticForm> {
    if a.flags().is_direct() {
        Ok(*a)
    } else if let Some(xi) = a.rotation() {
        let r = a.scaled(xi)?;
        if !r.flags().is_direct() {
            return Err(Error::Branch("rotated form is not directly admissible".into()));
        }
        Ok(r)
    } else {
        Err(Error::Inadmissible("form is not admissible".into()))
    }
}

/// Coefficients of `e^{-φ} ∂_k^γ e^{φ}`, `φ = -(π/t) Q_B(k)`, keyed by
/// `(power of 1/t, power of k₁, power of k₂)`.
fn dual_polynomial(b: (C64, C64, C64), gamma: (u32, u32)) -> BTreeMap<(u32, u32, u32), C64> {
    let mut poly = BTreeMap::new();
    poly.insert((0, 0, 0), C64::new(1.0, 0.0));
    let (b11, b12, b22) = b;
    let step = |poly: &BTreeMap<(u32, u32, u32), C64>, axis: usize| {
        let mut out: BTreeMap<(u32, u32, u32), C64> = BTreeMap::new();
        // ∂φ/∂k₁ = -2π u (B11 k1 + B12 k2), ∂φ/∂k₂ = -2π u (B12 k1 + B22 k2)
        let (c1, c2) = if axis == 0 { (b11, b12) } else { (b12, b22) };
        for (&(p, a, bb), &c) in poly {
            let own = if axis == 0 { a } else { bb };
            if own > 0 {
                let key = if axis == 0 { (p, a - 1, bb) } else { (p, a, bb - 1) };
                *out.entry(key).or_default() += c * own as f64;
            }
            *out.entry((p + 1, a + 1, bb)).or_default() += c * c1 * (-2.0 * PI);
            *out.entry((p + 1, a, bb + 1)).or_default() += c * c2 * (-2.0 * PI);
        }
        out
    };
    for _ in 0..gamma.0 {
        poly = step(&poly, 0);
    }
    for _ in 0..gamma.1 {
        poly = step(&poly, 1);
    }
    poly
}

fn key(z: C64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

struct Side {
    // Half lattice (j and -j paired), with π·Q(j).
    points: Vec<(i32, i32, C64)>,
    tables: HashMap<(u64, u64), Vec<C64>>,
}

impl Side {
    fn new(form: &ComplexQuadraticForm, rho: f64) -> Self {
        let n = rho.floor() as i32;
        let mut points = Vec::new();
        for j1 in 0..=n {
            for j2 in -n..=n {
                if j1 == 0 && j2 <= 0 {
                    continue;
                }
                if ((j1 * j1 + j2 * j2) as f64) <= rho * rho {
                    points.push((j1, j2, PI * form.eval(j1 as f64, j2 as f64)));
                }
            }
        }
        Self {
            points,
            tables: HashMap::new(),
        }
    }

    /// `Γ(a, z) z^{-a}` at `z = πQ(j)` for every stored point.
    fn table(&mut self, a: C64) -> Result<&Vec<C64>> {
        let k = key(a);
        if !self.tables.contains_key(&k) {
            let mut t = Vec::with_capacity(self.points.len());
            for &(_, _, z) in &self.points {
                let g = upper_incomplete_gamma(a, z)?.value;
                t.push(g * (-a * z.ln()).exp());
            }
            self.tables.insert(k, t);
        }
        Ok(&self.tables[&k])
    }

    /// `Σ_{half lattice} j^γ Γ(a, πQ)(πQ)^{-a}`.
    fn weighted_sum(&mut self, a: C64, gamma: (u32, u32)) -> Result<C64> {
        self.table(a)?;
        let table = &self.tables[&key(a)];
        let mut acc = C64::new(0.0, 0.0);
        for (&(j1, j2, _), &t) in self.points.iter().zip(table) {
            acc += t * mono(j1, j2, gamma);
        }
        Ok(acc)
    }
}

/// Cached lattice sums for one form; evaluates `Z_A(τ; γ)` for many
/// exponents and monomials, reusing incomplete-gamma tables.
pub struct LatticeSums {
    form: ComplexQuadraticForm,
    // Internally evaluated for `scale · A` (rotation and balancing).
    scale: C64,
    work: ComplexQuadraticForm,
    inv: (C64, C64, C64),
    sqrt_det: C64,
    eps: f64,
    rho: (f64, f64),
    direct: Side,
    dual: Side,
    polys: HashMap<(u32, u32), BTreeMap<(u32, u32, u32), C64>>,
}

impl LatticeSums {
    /// `max_degree` is the largest monomial degree `|γ|` that will be
    /// requested; it widens the truncation radii.
    pub fn new(form: &ComplexQuadraticForm, eps: f64, max_degree: u32) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        let rotated = direct_form(form)?;
        let rot = if form.flags().is_direct() {
            C64::new(1.0, 0.0)
        } else {
            form.rotation().expect("rotation present")
        };
        if !form.flags().is_direct() {
            check_rotation_branch(form, rot)?;
        }
        // Balance the decay of both sides: Z_{cA} = c^{-τ} Z_A.
        let c = (rotated.re_inv_min_eig() / rotated.re_min_eig()).sqrt();
        let work = rotated.scaled(C64::new(c, 0.0))?;
        let rho_a = inflated_radius(work.re_min_eig(), work.norm(), eps, max_degree);
        let rho_b = inflated_radius(work.re_inv_min_eig(), work.inv_norm(), eps, max_degree);
        let direct = Side::new(&work, rho_a);
        let inv = work.inverse_entries();
        let inv_form = ComplexQuadraticForm::new(inv.0, inv.1, inv.2)?;
        let dual = Side::new(&inv_form, rho_b);
        Ok(Self {
            form: *form,
            scale: rot * c,
            work,
            inv,
            sqrt_det: work.sqrt_det(),
            eps,
            rho: (rho_a, rho_b),
            direct,
            dual,
            polys: HashMap::new(),
        })
    }

    pub fn form(&self) -> &ComplexQuadraticForm {
        &self.form
    }

    /// Truncation radii (direct lattice, dual lattice) of the scaled form.
    pub fn radii(&self) -> (f64, f64) {
        self.rho
    }

    /// `Z_A(τ; γ)`; zero for odd `|γ|`.
    pub fn monomial(&mut self, tau: C64, gamma: (u32, u32)) -> Result<C64> {
        let deg = gamma.0 + gamma.1;
        if deg % 2 == 1 {
            return Ok(C64::new(0.0, 0.0));
        }
        if tau.im == 0.0 && tau.re <= 0.0 && tau.re == tau.re.round() {
            // Polynomial summand: continuation is -1 for Σ' 1 and 0 otherwise.
            return Ok(if deg == 0 && tau.re == 0.0 {
                C64::new(-1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            });
        }
        let inner = self.work_monomial(tau, gamma)?;
        // Z_A = scale^τ Z_{scale·A}
        Ok(inner * (tau * self.scale.ln()).exp())
    }

    /// Same as `monomial` but for the internal scaled form.
    fn work_monomial(&mut self, tau: C64, gamma: (u32, u32)) -> Result<C64> {
        let deg = gamma.0 + gamma.1;
        let t1 = 2.0 * self.direct.weighted_sum(tau, gamma)?;
        let poly = self
            .polys
            .entry(gamma)
            .or_insert_with(|| dual_polynomial(self.inv, gamma))
            .clone();
        let mut t2 = C64::new(0.0, 0.0);
        let mut origin = C64::new(0.0, 0.0);
        for (&(p, a, b), &c) in &poly {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let expo = p as f64 + 1.0 - tau;
            if a + b == 0 {
                let d = tau - 1.0 - p as f64;
                if d.norm() < 1e-14 {
                    return Err(Error::Pole(format!(
                        "Z(τ; γ) pole at τ = {tau}, γ = {gamma:?}"
                    )));
                }
                origin += c / d;
            }
            if (a + b) % 2 == 1 {
                // odd in k: cancels over ±k
                continue;
            }
            t2 += c * 2.0 * self.dual.weighted_sum(expo, (a, b))?;
        }
        let pref = C64::new(0.0, 1.0 / (2.0 * PI)).powu(deg) / self.sqrt_det;
        let bracket = t1 + pref * (t2 + origin);
        let pi_tau = (tau * PI.ln()).exp();
        let mut value = pi_tau * rgamma(tau) * bracket;
        if deg == 0 {
            value -= pi_tau * rgamma(tau + 1.0);
        }
        Ok(value)
    }

    /// Rough error estimate: truncation tolerance plus cancellation noise.
    pub fn error_estimate(&self, value: C64) -> f64 {
        self.eps + 64.0 * f64::EPSILON * value.norm()
    }

    /// The internally used form `scale · A`.
    pub fn working_form(&self) -> &ComplexQuadraticForm {
        &self.work
    }
}

#[inline]
fn mono(j1: i32, j2: i32, gamma: (u32, u32)) -> f64 {
    (j1 as f64).powi(gamma.0 as i32) * (j2 as f64).powi(gamma.1 as i32)
}

fn inflated_radius(rate: f64, norm: f64, eps: f64, deg: u32) -> f64 {
    let mut rho = side_radius(rate, eps).max((norm / PI).sqrt());
    if deg == 0 {
        return rho;
    }
    let amp = norm.max(1.0).powi(deg as i32);
    let tail = |r: f64| {
        2.0 * PI / rate * amp * (r + 1.0).powi(deg as i32 + 1) * (-rate * (r - 1.0).powi(2)).exp()
    };
    while tail(rho) > 0.5 * eps {
        rho += 0.25;
    }
    rho
}

// The rotated identity Q_A(j)^{-τ} = ξ^τ Q_{ξA}(j)^{-τ} needs
// Arg(Q_{ξA}(j)) - Arg(ξ) to stay inside (-π, π].
fn check_rotation_branch(form: &ComplexQuadraticForm, xi: C64) -> Result<()> {
    for j1 in -3i32..=3 {
        for j2 in -3i32..=3 {
            if j1 == 0 && j2 == 0 {
                continue;
            }
            let q = form.eval(j1 as f64, j2 as f64);
            let shifted = (xi * q).arg() - xi.arg();
            if !(shifted > -PI && shifted <= PI) || (shifted - q.arg()).abs() > 1e-9 {
                return Err(Error::Branch(format!(
                    "rotation changes the logarithm branch at j = ({j1}, {j2})"
                )));
            }
        }
    }
    Ok(())
}

/// `Z_A(s)` via the incomplete-gamma representation, truncated for `eps`.
pub fn epstein_zeta(a: &ComplexQuadraticForm, s: C64, eps: f64) -> Result<ZetaValue> {
    if (s - 1.0).norm() == 0.0 {
        return Err(Error::Pole("Epstein zeta has a pole at s = 1".into()));
    }
    let mut sums = LatticeSums::new(a, eps, 0)?;
    let value = sums.monomial(s, (0, 0))?;
    Ok(ZetaValue {
        value,
        s,
        truncation_radius: truncation_radius(a, s, eps)?,
        est_abs_error: sums.error_estimate(value),
    })
}

/// `Z_A(s)` with both series cut at `|j| ≤ rho` for the unscaled form, no
/// adaptive widening. Used to check the truncation bound itself.
pub fn epstein_zeta_truncated(a: &ComplexQuadraticForm, s: C64, rho: f64) -> Result<C64> {
    if (s - 1.0).norm() == 0.0 {
        return Err(Error::Pole("Epstein zeta has a pole at s = 1".into()));
    }
    let direct = direct_form(a)?;
    let (ie, i_f, ig) = direct.inverse_entries();
    let inv = ComplexQuadraticForm::new(ie, i_f, ig)?;
    let mut sa = Side::new(&direct, rho);
    let mut sb = Side::new(&inv, rho);
    let t1: C64 = sa.table(s)?.iter().sum::<C64>() * 2.0;
    let t2: C64 = sb.table(1.0 - s)?.iter().sum::<C64>() * 2.0;
    let bracket = t1 + (t2 + 1.0 / (s - 1.0)) / direct.sqrt_det();
    let pi_s = (s * PI.ln()).exp();
    let mut value = pi_s * (rgamma(s) * bracket - rgamma(s + 1.0));
    if let Some(xi) = a.rotation().filter(|_| !a.flags().is_direct()) {
        value *= (s * xi.ln()).exp();
    }
    Ok(value)
}

/// `(∂Z/∂E, ∂Z/∂F, ∂Z/∂G)` of `Z_A(s)`, via
/// `∂Z/∂E = −s Σ' j₁² Q^{−s−1}`, `∂Z/∂F = −2s Σ' j₁j₂ Q^{−s−1}`,
/// `∂Z/∂G = −s Σ' j₂² Q^{−s−1}`.
pub fn zeta_parameter_gradient(
    a: &ComplexQuadraticForm,
    s: C64,
    eps: f64,
) -> Result<[C64; 3]> {
    if (s - 1.0).norm() == 0.0 {
        return Err(Error::Pole("Epstein zeta has a pole at s = 1".into()));
    }
    let mut sums = LatticeSums::new(a, eps, 2)?;
    let t = s + 1.0;
    Ok([
        -s * sums.monomial(t, (2, 0))?,
        -2.0 * s * sums.monomial(t, (1, 1))?,
        -s * sums.monomial(t, (0, 2))?,
    ])
}
