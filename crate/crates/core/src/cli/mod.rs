//! Experiment harness behind the `czq` binary: configs, runners and CSV
//! result tables.

mod config;
mod output;
mod runs;

pub use config::{
    DensityKind, ExperimentConfig, ExperimentKind, SolveSettings, StudyKind, ZetaSettings,
};
pub use output::{write_columns, ResultRow, ResultTable};
pub use runs::{
    run, run_convergence, run_halfspace_solve, run_wigner, run_zeta_selftest, sample_forms,
    study_grid, zeta_beta_product,
};

impl ExperimentConfig {
    /// JSON written on the first line of the result CSV.
    pub fn header(&self) -> serde_json::Value {
        serde_json::json!({
            "config_hash": self.hash,
            "experiment": self.id,
            "kind": format!("{:?}", self.kind),
            "czq_version": env!("CARGO_PKG_VERSION"),
        })
    }
}

/// Runs `cfg` and writes its table to `cfg.output`.
pub fn run_and_write(cfg: &ExperimentConfig) -> crate::Result<ResultTable> {
    cfg.prepare_output()?;
    let table = run(cfg)?;
    table.write_csv(&cfg.output, &cfg.header(), cfg.deterministic)?;
    Ok(table)
}
