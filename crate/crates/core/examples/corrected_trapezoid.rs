//! Punctured and corrected trapezoidal rules on `∫ e^{-|v|²} Q(v)^{-1/2} dv`.
//! For the identity form the exact value is `π^{3/2}`.
//!
//! cargo run --release --example corrected_trapezoid

use czq::epstein::ComplexQuadraticForm;
use czq::quadrature::{
    convergence_slope, corrected_trapezoid, fit_correction_stencil, punctured_trapezoid, GridSpec,
};
use czq::C64;
use std::f64::consts::PI;

fn main() -> czq::Result<()> {
    let a = ComplexQuadraticForm::identity();
    let exact = PI.powf(1.5);
    let hs = [0.2f64, 0.1, 0.05, 0.025];
    for order in [1u32, 3, 5, 7] {
        let mut errs = Vec::new();
        for &h in &hs {
            let n = (7.0 / h).ceil() as i64;
            let grid = GridSpec::plane(h, (0.0, 0.0), n, n)?;
            let g = grid.sample(|x, y| C64::new((-(x * x + y * y)).exp(), 0.0));
            let v = if order == 1 {
                punctured_trapezoid(&g, &a, C64::new(0.5, 0.0), &grid)?
            } else {
                corrected_trapezoid(&g, &a, 0.5, &grid, order)?
            };
            errs.push((v.re - exact).abs().max(1e-300));
        }
        let label = if order == 1 { "punctured".to_string() } else { format!("order {order}") };
        let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
        println!("{label:10} errors {}  slope {:.2}", shown.join(" "), convergence_slope(&hs, &errs));
    }

    let st = fit_correction_stencil(&a, C64::new(0.5, 0.0), 5)?;
    println!("order-5 stencil for s = 1/2:");
    for (o, w) in st.offsets.iter().zip(&st.weights) {
        println!("  {o:?}  {w:.12}");
    }
    Ok(())
}
