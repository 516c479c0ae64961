//! Complexified parametric surfaces `X: ℝ² → ℂ³`.
//!
//! A chart only has to supply Taylor jets of `X` around a parameter point;
//! positions, derivatives, fundamental forms and the local expansions used by
//! the layer-potential corrections are all read off those jets.

mod jet;

pub use jet::Jet;

use num_complex::Complex64 as C64;
use std::fmt;

use crate::epstein::ComplexQuadraticForm;
use crate::error::{Error, Result};
use crate::quadrature::DomainKind;
use crate::special::phi_derivatives;

/// A point of `ℂ³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPoint(pub [C64; 3]);

impl ComplexPoint {
    pub fn real(x: f64, y: f64, z: f64) -> Self {
        Self([C64::new(x, 0.0), C64::new(y, 0.0), C64::new(z, 0.0)])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Bilinear dot product (no conjugation).
#[inline]
pub fn dot(a: &[C64; 3], b: &[C64; 3]) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Bilinear cross product.
#[inline]
pub fn cross(a: &[C64; 3], b: &[C64; 3]) -> [C64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Principal `√(Σ (xᵢ − yᵢ)²)`. Fails when `r²` sits in the closed lower
/// left quadrant (`Re r² ≤ 0`, `Im r² < 0`): the root has then crossed to
/// the growing side and the geometry is complexified too aggressively for an
/// outgoing kernel. Mildly negative `Im r` with `Re r² > 0` is accepted.
pub fn complex_distance(x: &ComplexPoint, y: &ComplexPoint) -> Result<C64> {
    let d = [x.0[0] - y.0[0], x.0[1] - y.0[1], x.0[2] - y.0[2]];
    let r2 = dot(&d, &d);
    if !r2.is_finite() {
        return Err(Error::Domain("non-finite point".into()));
    }
    if on_growing_branch(r2) {
        return Err(Error::Branch(format!("r² = {r2} in the lower left quadrant")));
    }
    Ok(r2.sqrt())
}

/// The branch rule of [`complex_distance`] on `r²`.
#[inline]
pub fn on_growing_branch(r2: C64) -> bool {
    r2.re <= 0.0 && r2.im < -1e-12 * r2.norm().max(1.0)
}

/// `ψ(v) = α [φ(c(v + L)) − φ(−c(v − L))]`: zero on `|v| < L`, slope `α c`
/// outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    pub slope: f64,
    pub onset: f64,
    pub strength: f64,
}

impl Default for Mollifier {
    fn default() -> Self {
        Self {
            slope: 0.75,
            onset: 10.0,
            strength: 1.0,
        }
    }
}

impl Mollifier {
    pub fn psi(&self, v: f64) -> f64 {
        self.derivatives(v, 0)[0]
    }

    /// `[ψ(v), ψ'(v), …, ψ^{(n)}(v)]`.
    pub fn derivatives(&self, v: f64, n: usize) -> Vec<f64> {
        let c = self.slope;
        let a = phi_derivatives(c * (v + self.onset), n);
        let b = phi_derivatives(-c * (v - self.onset), n);
        (0..=n)
            .map(|k| {
                let ck = c.powi(k as i32);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                self.strength * ck * (a[k] - sign * b[k])
            })
            .collect()
    }

    /// Jet of `v + u + iψ(v + u)` along one axis.
    pub fn complexified(&self, v: f64, axis: usize, degree: usize) -> Jet {
        let x = Jet::variable(v, axis, degree);
        if self.strength == 0.0 {
            return x;
        }
        let d: Vec<C64> = self
            .derivatives(v, degree)
            .into_iter()
            .map(|p| C64::new(0.0, p))
            .collect();
        &x + &x.compose(&d)
    }
}

/// `ψ(v)` for the given mollifier.
pub fn mollifier_psi(v: f64, params: &Mollifier) -> f64 {
    params.psi(v)
}

/// Position, first and second derivatives of a chart at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartDerivatives {
    pub x: [C64; 3],
    pub d1: [C64; 3],
    pub d2: [C64; 3],
    pub d11: [C64; 3],
    pub d12: [C64; 3],
    pub d22: [C64; 3],
}

/// Analytic complexified surface parameterization.
pub trait SurfaceChart: Send + Sync + fmt::Debug {
    fn kind(&self) -> DomainKind;

    /// Taylor jets of the three components of `X(v + u)` in `u`.
    fn jet(&self, v: (f64, f64), degree: usize) -> [Jet; 3];

    fn point(&self, v: (f64, f64)) -> ComplexPoint {
        let j = self.jet(v, 0);
        ComplexPoint([j[0].value(), j[1].value(), j[2].value()])
    }

    fn derivatives(&self, v: (f64, f64)) -> ChartDerivatives {
        let j = self.jet(v, 2);
        let pick = |a: usize, b: usize, f: f64| {
            [j[0].coeff(a, b) * f, j[1].coeff(a, b) * f, j[2].coeff(a, b) * f]
        };
        ChartDerivatives {
            x: pick(0, 0, 1.0),
            d1: pick(1, 0, 1.0),
            d2: pick(0, 1, 1.0),
            d11: pick(2, 0, 2.0),
            d12: pick(1, 1, 1.0),
            d22: pick(0, 2, 2.0),
        }
    }
}

/// `E = ∂₁X·∂₁X`, `F = ∂₁X·∂₂X`, `G = ∂₂X·∂₂X`, validated.
pub fn first_fundamental_form(
    chart: &dyn SurfaceChart,
    v: (f64, f64),
) -> Result<ComplexQuadraticForm> {
    let d = chart.derivatives(v);
    ComplexQuadraticForm::new(dot(&d.d1, &d.d1), dot(&d.d1, &d.d2), dot(&d.d2, &d.d2)).map_err(
        |e| Error::Geometry {
            v1: v.0,
            v2: v.1,
            msg: e.to_string(),
        },
    )
}

/// `J = √(z·z)` with `z = ∂₁X × ∂₂X`; cross-checked against `EG − F²`.
pub fn jacobian(chart: &dyn SurfaceChart, v: (f64, f64)) -> Result<C64> {
    let d = chart.derivatives(v);
    let z = cross(&d.d1, &d.d2);
    let j2 = dot(&z, &z);
    let geo = |msg: String| Error::Geometry {
        v1: v.0,
        v2: v.1,
        msg,
    };
    if j2.im == 0.0 && j2.re <= 0.0 {
        return Err(geo(format!("z·z = {j2} on the branch cut")));
    }
    let (e, f, g) = (dot(&d.d1, &d.d1), dot(&d.d1, &d.d2), dot(&d.d2, &d.d2));
    let lagrange = e * g - f * f;
    if (j2 - lagrange).norm() > 1e-10 * j2.norm().max(lagrange.norm()) {
        return Err(geo(format!("J² = {j2} but EG − F² = {lagrange}")));
    }
    Ok(j2.sqrt())
}

/// `X = (v₁ + iψ(v₁), v₂ + iψ(v₂), A exp(−β(X₁² + X₂²)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub decay: f64,
    pub mollifier: Mollifier,
}

pub fn gaussian_bump() -> GaussianBump {
    GaussianBump {
        amplitude: -6.0,
        decay: 0.05,
        mollifier: Mollifier::default(),
    }
}

impl SurfaceChart for GaussianBump {
    fn kind(&self) -> DomainKind {
        DomainKind::Plane
    }

    fn jet(&self, v: (f64, f64), degree: usize) -> [Jet; 3] {
        let x1 = self.mollifier.complexified(v.0, 0, degree);
        let x2 = self.mollifier.complexified(v.1, 1, degree);
        let q = (&x1 * &x1 + &x2 * &x2).scale(C64::new(-self.decay, 0.0));
        let x3 = q.exp().scale(C64::new(self.amplitude, 0.0));
        [x1, x2, x3]
    }
}

/// `X = (R cos v₁, R sin v₁, 0) + a (v₂ + iψ(v₂))`, periodic in `v₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlantedCylinder {
    pub radius: f64,
    pub axis: [f64; 3],
    pub mollifier: Mollifier,
}

pub fn slanted_cylinder() -> SlantedCylinder {
    SlantedCylinder {
        radius: 2.5,
        axis: [0.5, 0.5, 1.0],
        mollifier: Mollifier::default(),
    }
}

impl SurfaceChart for SlantedCylinder {
    fn kind(&self) -> DomainKind {
        DomainKind::Cylinder
    }

    fn jet(&self, v: (f64, f64), degree: usize) -> [Jet; 3] {
        let t = Jet::variable(v.0, 0, degree);
        let w = self.mollifier.complexified(v.1, 1, degree);
        let r = C64::new(self.radius, 0.0);
        let a = |k: usize| C64::new(self.axis[k], 0.0);
        [
            t.cos().scale(r) + w.scale(a(0)),
            t.sin().scale(r) + w.scale(a(1)),
            w.scale(a(2)),
        ]
    }
}

/// Rough half-space: real part
/// `(v₁, v₂, e^{−|v|²/8}[cos(1.9v₁ + 0.95v₂) + sin(v₁ + 1.55v₂)])`,
/// imaginary part `(ψ(v₁), ψ(v₂), 0)` scaled by the mollifier strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughHalfspace {
    pub mollifier: Mollifier,
}

pub fn rough_halfspace() -> RoughHalfspace {
    RoughHalfspace {
        mollifier: Mollifier {
            strength: 0.5,
            ..Mollifier::default()
        },
    }
}

impl SurfaceChart for RoughHalfspace {
    fn kind(&self) -> DomainKind {
        DomainKind::Plane
    }

    fn jet(&self, v: (f64, f64), degree: usize) -> [Jet; 3] {
        let x1 = self.mollifier.complexified(v.0, 0, degree);
        let x2 = self.mollifier.complexified(v.1, 1, degree);
        let u1 = Jet::variable(v.0, 0, degree);
        let u2 = Jet::variable(v.1, 1, degree);
        let c = |x: f64| C64::new(x, 0.0);
        let env = (&u1 * &u1 + &u2 * &u2).scale(c(-0.125)).exp();
        let wave = (u1.scale(c(1.9)) + u2.scale(c(0.95))).cos()
            + (u1.clone() + u2.scale(c(1.55))).sin();
        [x1, x2, env * wave]
    }
}

/// The real plane `(v₁, v₂, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlatPlane;

impl SurfaceChart for FlatPlane {
    fn kind(&self) -> DomainKind {
        DomainKind::Plane
    }

    fn jet(&self, v: (f64, f64), degree: usize) -> [Jet; 3] {
        [
            Jet::variable(v.0, 0, degree),
            Jet::variable(v.1, 1, degree),
            Jet::zero(degree),
        ]
    }
}

/// Builtin chart by name: `gaussian_bump`, `slanted_cylinder`,
/// `rough_halfspace` or `flat_plane`.
pub fn builtin(name: &str) -> Result<Box<dyn SurfaceChart>> {
    Ok(match name {
        "gaussian_bump" | "bump" => Box::new(gaussian_bump()),
        "slanted_cylinder" | "cylinder" => Box::new(slanted_cylinder()),
        "rough_halfspace" | "halfspace" => Box::new(rough_halfspace()),
        "flat_plane" | "plane" => Box::new(FlatPlane),
        _ => return Err(Error::Config(format!("unknown geometry '{name}'"))),
    })
}
