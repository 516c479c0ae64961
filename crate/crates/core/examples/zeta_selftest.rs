//! Runs an experiment config through the library harness and prints any
//! failing checks. Same as `czq zeta-selftest --config <path>`.
//!
//! cargo run --release --example zeta_selftest -- configs/zeta_selftest.ini

use czq::cli::{run, ExperimentConfig};
use std::path::PathBuf;

fn main() -> czq::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("configs/zeta_selftest.ini"));
    let cfg = ExperimentConfig::load(&path)?;
    let table = run(&cfg)?;
    let failures = table.failures();
    println!("{} rows, {} failing", table.rows.len(), failures.len());
    for r in failures {
        println!("FAIL {}  abs {:.3e}  rel {:.3e}", r.parameters, r.abs_error, r.rel_error);
    }
    Ok(())
}
