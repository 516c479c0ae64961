use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Which admissibility test a form passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Admissibility {
    /// `Re(A)` positive definite.
    pub re_pd: bool,
    /// `Re(A⁻¹)` positive definite.
    pub re_inv_pd: bool,
    /// Diagonal form with `E/|E| + G/|G| ≠ 0`; evaluated through a rotation.
    pub diagonal_relaxed: bool,
}

impl Admissibility {
    /// Both real parts positive definite: the incomplete-gamma representation
    /// applies directly.
    pub fn is_direct(&self) -> bool {
        self.re_pd && self.re_inv_pd
    }
}

/// Complex symmetric 2×2 matrix `[[E, F], [F, G]]` and its quadratic form
/// `Q(v) = E v₁² + 2F v₁v₂ + G v₂²` (bilinear, no conjugation).
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexQuadraticForm {
    e: C64,
    f: C64,
    g: C64,
    det: C64,
    sqrt_det: C64,
    flags: Admissibility,
    rotation: Option<C64>,
}

impl fmt::Debug for ComplexQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ComplexQuadraticForm {{ E: {}, F: {}, G: {}, flags: {:?} }}",
            self.e, self.f, self.g, self.flags
        )
    }
}

fn re_pd(e: C64, f: C64, g: C64) -> bool {
    e.re > 0.0 && e.re * g.re - f.re * f.re > 0.0
}

/// Smallest eigenvalue of the real symmetric matrix `[[a, b], [b, c]]`.
pub(crate) fn sym_min_eig(a: f64, b: f64, c: f64) -> f64 {
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    m - r
}

/// Spectral norm of a complex symmetric 2×2 matrix.
pub(crate) fn spectral_norm(e: C64, f: C64, g: C64) -> f64 {
    // Largest eigenvalue of M^H M.
    let a = e.norm_sqr() + f.norm_sqr();
    let c = f.norm_sqr() + g.norm_sqr();
    let b = e.conj() * f + f.conj() * g;
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
    (m + r).sqrt()
}

impl ComplexQuadraticForm {
    /// Builds and validates a form: computes the determinant, the inverse and
    /// the admissibility flags. Fails on singular or inadmissible input.
    pub fn new(e: C64, f: C64, g: C64) -> Result<Self> {
        for x in [e, f, g] {
            if !x.re.is_finite() || !x.im.is_finite() {
                return Err(Error::Domain("non-finite form entry".into()));
            }
        }
        let det = e * g - f * f;
        let scale = e.norm() * g.norm() + f.norm_sqr();
        if det.norm() <= 1e-14 * scale || det.norm() == 0.0 {
            return Err(Error::SingularForm);
        }
        let (ie, i_f, ig) = (g / det, -f / det, e / det);
        let mut flags = Admissibility {
            re_pd: re_pd(e, f, g),
            re_inv_pd: re_pd(ie, i_f, ig),
            diagonal_relaxed: false,
        };
        let mut rotation = None;
        if !flags.is_direct() {
            if f == C64::new(0.0, 0.0) {
                let unit = e / e.norm() + g / g.norm();
                if unit.norm() <= 1e-12 {
                    return Err(Error::Inadmissible(
                        "diagonal relaxation fails: E/|E| + G/|G| = 0".into(),
                    ));
                }
                flags.diagonal_relaxed = true;
                rotation = Some(best_rotation(e, g));
            } else if !flags.re_pd {
                return Err(Error::Inadmissible("Re(A) is not positive definite".into()));
            } else {
                return Err(Error::Inadmissible(
                    "Re(A^-1) is not positive definite".into(),
                ));
            }
        }
        let sqrt_det = if flags.re_pd {
            continued_sqrt_det(e, f, g)
        } else {
            det.sqrt()
        };
        Ok(Self {
            e,
            f,
            g,
            det,
            sqrt_det,
            flags,
            rotation,
        })
    }

    pub fn real(e: f64, f: f64, g: f64) -> Result<Self> {
        Self::new(C64::new(e, 0.0), C64::new(f, 0.0), C64::new(g, 0.0))
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 1.0).expect("identity is admissible")
    }

    pub fn e(&self) -> C64 {
        self.e
    }
    pub fn f(&self) -> C64 {
        self.f
    }
    pub fn g(&self) -> C64 {
        self.g
    }
    pub fn det(&self) -> C64 {
        self.det
    }

    /// `√det A` on the branch continued from `Re(A)` along
    /// `(1−t) Re(A) + t A`; principal root when `Re(A)` is not definite.
    pub fn sqrt_det(&self) -> C64 {
        self.sqrt_det
    }

    pub fn flags(&self) -> Admissibility {
        self.flags
    }

    /// Unit rotation `ξ` used on the diagonal-relaxed path.
    pub fn rotation(&self) -> Option<C64> {
        self.rotation
    }

    /// `Q_A(v)`.
    #[inline]
    pub fn eval(&self, v1: f64, v2: f64) -> C64 {
        self.e * (v1 * v1) + self.f * (2.0 * v1 * v2) + self.g * (v2 * v2)
    }

    /// Entries `(E, F, G)` of `A⁻¹`.
    pub fn inverse_entries(&self) -> (C64, C64, C64) {
        (self.g / self.det, -self.f / self.det, self.e / self.det)
    }

    pub fn inverse(&self) -> Result<Self> {
        let (a, b, c) = self.inverse_entries();
        Self::new(a, b, c)
    }

    /// `c·A` for a complex scalar `c`.
    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::new(c * self.e, c * self.f, c * self.g)
    }

    /// `D A D` with `D = diag(d1, d2)`.
    pub fn diag_congruence(&self, d1: f64, d2: f64) -> Result<Self> {
        Self::new(self.e * (d1 * d1), self.f * (d1 * d2), self.g * (d2 * d2))
    }

    /// `λ_min(Re A)`.
    pub fn re_min_eig(&self) -> f64 {
        sym_min_eig(self.e.re, self.f.re, self.g.re)
    }

    /// `λ_min(Re A⁻¹)`.
    pub fn re_inv_min_eig(&self) -> f64 {
        let (a, b, c) = self.inverse_entries();
        sym_min_eig(a.re, b.re, c.re)
    }

    /// `‖A‖₂`.
    pub fn norm(&self) -> f64 {
        spectral_norm(self.e, self.f, self.g)
    }

    /// `‖A⁻¹‖₂`.
    pub fn inv_norm(&self) -> f64 {
        let (a, b, c) = self.inverse_entries();
        spectral_norm(a, b, c)
    }
}

// Maximizes min(Re(ξE), Re(ξG)) over |ξ| = 1: the optimum bisects the
// shorter arc between arg E and arg G.
fn best_rotation(e: C64, g: C64) -> C64 {
    let (a, b) = (e.arg(), g.arg());
    let mut theta = -0.5 * (a + b);
    if (a - b).abs() > PI {
        theta += PI;
    }
    C64::from_polar(1.0, theta)
}

fn continued_sqrt_det(e: C64, f: C64, g: C64) -> C64 {
    let (er, fr, gr) = (C64::new(e.re, 0.0), C64::new(f.re, 0.0), C64::new(g.re, 0.0));
    let det_at = |t: f64| {
        let ee = er + (e - er) * t;
        let ff = fr + (f - fr) * t;
        let gg = gr + (g - gr) * t;
        ee * gg - ff * ff
    };
    let mut root = det_at(0.0).sqrt();
    let steps = 512;
    for i in 1..=steps {
        let cand = det_at(i as f64 / steps as f64).sqrt();
        root = if (cand - root).norm() <= (cand + root).norm() {
            cand
        } else {
            -cand
        };
    }
    root
}
