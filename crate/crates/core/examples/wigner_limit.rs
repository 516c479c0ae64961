//! Truncated lattice sum minus box integral approaching the continued zeta
//! value inside the critical strip.
//!
//! cargo run --release --example wigner_limit -- [s]

use czq::epstein::{epstein_zeta, wigner_limit_oracle, ComplexQuadraticForm};
use czq::C64;

fn main() -> czq::Result<()> {
    let s: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.7);
    let s = C64::new(s, 0.0);
    let a = ComplexQuadraticForm::new(C64::new(1.0, 6e-3), C64::new(1.39e-5, 0.0), C64::new(0.9638, 0.3805))?;
    let z = epstein_zeta(&a, s, 1e-14)?.value;
    println!("Z({s}) = {z:.12e}");
    for n in [8, 16, 32, 64, 128] {
        let w = wigner_limit_oracle(&a, s, n)?;
        println!("N = {n:4}  W = {w:.12e}  |W - Z| = {:.3e}", (w - z).norm());
    }
    Ok(())
}
