//! The builtin complexified charts: points, first fundamental forms,
//! Jacobians and complexified distances.
//!
//! cargo run --release --example surface_charts

use czq::surfaces::{builtin, complex_distance, first_fundamental_form, jacobian};
use std::f64::consts::PI;

fn main() -> czq::Result<()> {
    let cases = [
        ("gaussian_bump", (-7.5, -9.375)),
        ("slanted_cylinder", (1.2 * PI, -8.6372)),
        ("rough_halfspace", (0.0, 0.0)),
        ("rough_halfspace", (11.0, 3.0)),
    ];
    for (name, v) in cases {
        let chart = builtin(name)?;
        let x = chart.point(v);
        let a = first_fundamental_form(chart.as_ref(), v)?;
        println!("{name} at {v:?}");
        println!("  X = [{:.4}, {:.4}, {:.4}]", x.0[0], x.0[1], x.0[2]);
        println!("  E = {:.4}  F = {:.4}  G = {:.4}", a.e(), a.f(), a.g());
        println!("  J = {:.4}", jacobian(chart.as_ref(), v)?);
        let y = chart.point((v.0 + 0.5, v.1 - 0.25));
        println!("  r to a nearby node = {:.6}", complex_distance(&x, &y)?);
    }
    Ok(())
}
