//! Truncated bivariate Taylor polynomials with complex coefficients.

use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Neg, Sub};

/// `Σ_{a+b ≤ D} c_{ab} u₁^a u₂^b`, stored by total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    degree: usize,
    coef: Vec<C64>,
}

#[inline]
fn slot(a: usize, b: usize) -> usize {
    let n = a + b;
    n * (n + 1) / 2 + b
}

impl Jet {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coef: vec![C64::new(0.0, 0.0); (degree + 1) * (degree + 2) / 2],
        }
    }

    pub fn constant(c: C64, degree: usize) -> Self {
        let mut j = Self::zero(degree);
        j.coef[0] = c;
        j
    }

    /// `v + u_axis` for `axis ∈ {0, 1}`.
    pub fn variable(v: f64, axis: usize, degree: usize) -> Self {
        let mut j = Self::constant(C64::new(v, 0.0), degree);
        if degree > 0 {
            j.coef[if axis == 0 { slot(1, 0) } else { slot(0, 1) }] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of `u₁^a u₂^b`; zero beyond the truncation degree.
    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        if a + b > self.degree {
            C64::new(0.0, 0.0)
        } else {
            self.coef[slot(a, b)]
        }
    }

    pub fn set(&mut self, a: usize, b: usize, c: C64) {
        self.coef[slot(a, b)] = c;
    }

    pub fn value(&self) -> C64 {
        self.coef[0]
    }

    /// Nonzero terms as `((a, b), c)`.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), C64)> + '_ {
        (0..=self.degree).flat_map(move |n| {
            (0..=n).filter_map(move |b| {
                let c = self.coef[slot(n - b, b)];
                (c != C64::new(0.0, 0.0)).then_some(((n - b, b), c))
            })
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            degree: self.degree,
            coef: self.coef.iter().map(|x| x * c).collect(),
        }
    }

    /// Same polynomial at a different truncation degree.
    pub fn truncate(&self, degree: usize) -> Self {
        let mut out = Self::zero(degree);
        for n in 0..=degree.min(self.degree) {
            for b in 0..=n {
                out.coef[slot(n - b, b)] = self.coef[slot(n - b, b)];
            }
        }
        out
    }

    /// `∂/∂u_axis`, one degree lower.
    pub fn derivative(&self, axis: usize) -> Self {
        let d = self.degree.saturating_sub(1);
        let mut out = Self::zero(d);
        if self.degree == 0 {
            return out;
        }
        for n in 0..=d {
            for b in 0..=n {
                let a = n - b;
                out.coef[slot(a, b)] = if axis == 0 {
                    self.coef[slot(a + 1, b)] * (a + 1) as f64
                } else {
                    self.coef[slot(a, b + 1)] * (b + 1) as f64
                };
            }
        }
        out
    }

    /// `u₁^a u₂^b · self`, truncated.
    pub fn shift(&self, a: usize, b: usize) -> Self {
        let mut out = Self::zero(self.degree);
        for n in 0..=self.degree {
            if n + a + b > self.degree {
                break;
            }
            for q in 0..=n {
                out.coef[slot(n - q + a, q + b)] = self.coef[slot(n - q, q)];
            }
        }
        out
    }

    /// `f(self)` given `[f(c₀), f'(c₀), …]` at the constant term `c₀`.
    pub fn compose(&self, derivs: &[C64]) -> Self {
        let mut w = self.clone();
        w.coef[0] = C64::new(0.0, 0.0);
        let mut fact = vec![1.0; self.degree + 1];
        for n in 1..=self.degree {
            fact[n] = fact[n - 1] * n as f64;
        }
        let top = self.degree.min(derivs.len().saturating_sub(1));
        let mut acc = Self::constant(derivs[top] / fact[top], self.degree);
        for n in (0..top).rev() {
            acc = &acc * &w;
            acc.coef[0] += derivs[n] / fact[n];
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.degree + 1])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cyc = [s, c, -s, -c];
        self.compose(&(0..=self.degree).map(|n| cyc[n % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cyc = [c, -s, -c, s];
        self.compose(&(0..=self.degree).map(|n| cyc[n % 4]).collect::<Vec<_>>())
    }

    /// Principal square root at the constant term, continued analytically.
    pub fn sqrt(&self) -> Self {
        let c0 = self.value();
        let mut d = Vec::with_capacity(self.degree + 1);
        let mut coef = C64::new(1.0, 0.0);
        let r = c0.sqrt();
        for n in 0..=self.degree {
            d.push(coef * r / c0.powu(n as u32));
            coef *= 0.5 - n as f64;
        }
        self.compose(&d)
    }

    /// `self^m` for `m ≥ 0`.
    pub fn powu(&self, m: u32) -> Self {
        let mut out = Self::constant(C64::new(1.0, 0.0), self.degree);
        for _ in 0..m {
            out = &out * self;
        }
        out
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        debug_assert_eq!(self.degree, o.degree);
        Jet {
            degree: self.degree,
            coef: self.coef.iter().zip(&o.coef).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        debug_assert_eq!(self.degree, o.degree);
        Jet {
            degree: self.degree,
            coef: self.coef.iter().zip(&o.coef).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        debug_assert_eq!(self.degree, o.degree);
        let d = self.degree;
        let mut out = Jet::zero(d);
        for n1 in 0..=d {
            for b1 in 0..=n1 {
                let x = self.coef[slot(n1 - b1, b1)];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for n2 in 0..=(d - n1) {
                    for b2 in 0..=n2 {
                        let y = o.coef[slot(n2 - b2, b2)];
                        out.coef[slot(n1 - b1 + n2 - b2, b1 + b2)] += x * y;
                    }
                }
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet { (&self).$f(&o) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $f(self, o: &Jet) -> Jet { (&self).$f(o) }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet { self.$f(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Add<C64> for Jet {
    type Output = Jet;
    fn add(mut self, c: C64) -> Jet {
        self.coef[0] += c;
        self
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    fn mul(self, c: C64) -> Jet {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(j: &Jet, u1: f64, u2: f64) -> C64 {
        j.terms()
            .map(|((a, b), c)| c * u1.powi(a as i32) * u2.powi(b as i32))
            .sum()
    }

    #[test]
    fn exp_sin_sqrt_match_pointwise() {
        let d = 12;
        let x = Jet::variable(0.3, 0, d);
        let y = Jet::variable(-0.2, 1, d);
        let i = C64::new(0.0, 1.0);
        let w = &x * &x + (&y * &x).scale(i) + Jet::constant(C64::new(1.0, 0.5), d);
        let f = w.exp() * w.sin() + w.sqrt();
        let (u1, u2) = (0.01, -0.013);
        let (xv, yv) = (C64::new(0.3 + u1, 0.0), C64::new(-0.2 + u2, 0.0));
        let wv = xv * xv + i * yv * xv + C64::new(1.0, 0.5);
        let want = wv.exp() * wv.sin() + wv.sqrt();
        assert!((eval(&f, u1, u2) - want).norm() < 1e-14);
    }

    #[test]
    fn derivative_and_shift() {
        let d = 5;
        let x = Jet::variable(2.0, 0, d);
        let y = Jet::variable(0.0, 1, d);
        let p = &(&x * &x) * &y;
        let dp = p.derivative(0);
        assert_eq!(dp.coeff(0, 1), C64::new(4.0, 0.0));
        assert_eq!(dp.coeff(1, 1), C64::new(2.0, 0.0));
        let s = p.shift(1, 2);
        assert_eq!(s.coeff(1, 3), C64::new(4.0, 0.0));
        assert_eq!(s.coeff(3, 3), C64::new(0.0, 0.0));
    }
}
