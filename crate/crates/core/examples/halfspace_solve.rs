//! Dirichlet problem above the complexified rough half-space with
//! point-source data, checked against the exact field.
//!
//! cargo run --release --example halfspace_solve -- [h] [half_width] [order] [dense|gmres]

use czq::helmholtz::{
    assemble_combined_field, evaluate_with_nodes, exact_field, point_source_data, solve_dirichlet,
    GmresOptions, SolverKind,
};
use czq::quadrature::GridSpec;
use czq::surfaces::rough_halfspace;
use czq::C64;
use std::time::Instant;

fn main() -> czq::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let h: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.375);
    let half: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(12.0);
    let order: u32 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);
    let solver = match args.get(4).map(String::as_str) {
        Some("gmres") => SolverKind::Iterative(GmresOptions::default()),
        _ => SolverKind::DenseLu,
    };
    let k = C64::new(2.0, 0.0);
    let source = [1.0, 1.0, -2.0];
    let chart = rough_halfspace();
    let n = (2.0 * half / h).round() as i64;
    let grid = GridSpec::plane_box(h, h, (0.0, 0.0), (-n / 2, -n / 2), (n / 2 - 1, n / 2 - 1))?;
    println!("{} nodes", grid.len());

    let t0 = Instant::now();
    let op = assemble_combined_field(&chart, &grid, k, order)?;
    println!("assembly {:.1}s", t0.elapsed().as_secs_f64());
    let f = point_source_data(source, k, &chart, &grid)?;
    let t1 = Instant::now();
    let (sigma, report) = solve_dirichlet(&op, &f, solver)?;
    println!(
        "{} solve {:.1}s, {} iterations, residual {:.2e}",
        report.solver,
        t1.elapsed().as_secs_f64(),
        report.iterations,
        report.relative_residual
    );

    let targets: Vec<[f64; 3]> = (-9..=9)
        .flat_map(|i| (-9..=9).map(move |j| [i as f64, j as f64, 3.0]))
        .collect();
    let u = evaluate_with_nodes(op.nodes(), &grid, &sigma, k, &targets)?;
    let exact = exact_field(source, k, &targets);
    let err = u
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).norm() / b.norm())
        .fold(0.0, f64::max);
    println!("max relative error in |x₁|,|x₂| ≤ 9 at x₃ = 3: {err:.3e}");
    if std::env::var("CZQ_VERBOSE").is_ok() {
        for (t, (a, b)) in targets.iter().zip(u.iter().zip(&exact)) {
            if t[0] as i64 % 3 == 0 && t[1] as i64 % 3 == 0 {
                println!("{:?} {:.3e}", t, (a - b).norm() / b.norm());
            }
        }
    }
    Ok(())
}
