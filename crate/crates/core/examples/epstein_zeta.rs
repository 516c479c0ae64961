//! Epstein zeta values for the identity form and two complex forms, with
//! the functional equation and the residue at `s = 1` as sanity checks.
//!
//! cargo run --release --example epstein_zeta -- [s]

use czq::epstein::{epstein_zeta, ComplexQuadraticForm};
use czq::special::gamma;
use czq::C64;
use std::f64::consts::PI;

fn main() -> czq::Result<()> {
    let s: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.5);
    let s = C64::new(s, 0.0);
    let forms = [
        ("identity", ComplexQuadraticForm::identity()),
        (
            "bump target",
            ComplexQuadraticForm::new(C64::new(1.0, 6e-3), C64::new(1.39e-5, 0.0), C64::new(0.9638, 0.3805))?,
        ),
        (
            "cylinder target",
            ComplexQuadraticForm::new(C64::new(6.25, 0.0), C64::new(-0.2765, -0.0461), C64::new(1.4582, 0.5006))?,
        ),
    ];
    for (name, a) in &forms {
        let z = epstein_zeta(a, s, 1e-14)?;
        println!("{name:16} Z({s}) = {:.15e}  (rho = {:.2}, est. error {:.1e})", z.value, z.truncation_radius, z.est_abs_error);

        let lam = |f: &ComplexQuadraticForm, s: C64| -> czq::Result<C64> {
            Ok((-s * PI.ln()).exp() * gamma(s)? * epstein_zeta(f, s, 1e-14)?.value)
        };
        let lhs = lam(a, s)?;
        let rhs = lam(&a.inverse()?, 1.0 - s)? / a.sqrt_det();
        println!("{:16} functional equation mismatch {:.1e}", "", (lhs - rhs).norm() / lhs.norm());

        let d = 1e-6;
        let res = epstein_zeta(a, C64::new(1.0 + d, 0.0), 1e-14)?.value * d;
        println!("{:16} (s-1)Z at s = 1 + 1e-6: {:.10}, pi/sqrt(det) = {:.10}", "", res, PI / a.sqrt_det());
    }
    Ok(())
}
