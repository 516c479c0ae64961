//! Self-convergence of the corrected single and double layer at one target.
//!
//! cargo run --release --example layer_convergence -- bump single 5

use czq::cli::study_grid;
use czq::helmholtz::{bump_density, cylinder_density, layer_potential_at, KernelKind, KernelSpec};
use czq::quadrature::convergence_slope;
use czq::surfaces::builtin;
use czq::C64;
use std::f64::consts::PI;

fn main() -> czq::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let chart_name = args.get(1).map(String::as_str).unwrap_or("bump");
    let kind = match args.get(2).map(String::as_str).unwrap_or("single") {
        "double" => KernelKind::Double,
        _ => KernelKind::Single,
    };
    let order: u32 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);
    let chart = builtin(chart_name)?;
    let kernel = KernelSpec::new(kind, C64::new(2.0, 0.0))?;
    let cylinder = chart_name.contains("cyl");
    // Nodes per unit length on the bump, per period on the cylinder.
    let counts: Vec<f64> = match (cylinder, order) {
        (true, _) => vec![30.0, 40.0, 60.0, 80.0, 120.0],
        (false, 7) => vec![4.0, 6.0, 8.0, 12.0, 16.0],
        (false, _) => vec![2.0, 4.0, 8.0, 16.0, 32.0],
    };
    let (target, density): ((f64, f64), fn(f64, f64) -> C64) = if cylinder {
        ((1.2 * PI, -8.6372), cylinder_density)
    } else {
        ((-7.5, -9.375), bump_density)
    };
    let mut hs = Vec::new();
    let mut vals = Vec::new();
    for &n in &counts {
        let h = if cylinder { 2.0 * PI / n } else { 1.0 / n };
        let grid = study_grid(chart.as_ref(), h, target, 30.0)?;
        let v = layer_potential_at(chart.as_ref(), &grid, &grid.sample(density), kernel, order, (0, 0))?;
        println!("h = {h:.5}  value = {v:.15e}");
        hs.push(h);
        vals.push(v);
    }
    let m = vals.len();
    let r = (hs[m - 2] / hs[m - 1]).powi(order as i32);
    let reference = (vals[m - 1] * r - vals[m - 2]) / (r - 1.0);
    let errs: Vec<f64> = vals[..m - 1].iter().map(|v| (v - reference).norm()).collect();
    for (h, e) in hs.iter().zip(&errs) {
        println!("h = {h:.5}  error = {e:.3e}");
    }
    println!("slope = {:.3}", convergence_slope(&hs[..m - 1], &errs));
    Ok(())
}
