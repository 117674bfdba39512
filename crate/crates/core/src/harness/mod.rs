//! Batch runs, table rendering and synthetic-model checks.

use thiserror::Error;

pub mod grid;
pub mod synthetic;
pub mod table;

pub use grid::{run_grid, ErrorInterval, GridCell, GridConfig, GridReport, ModeRun, TableFormat};
pub use synthetic::{generate_model_sequence, verify_propositions, ModelSequence, SyntheticModel};
pub use table::{emit_summary, emit_table};

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad selection, flag or format. The CLI maps this to exit code 2.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("synthetic model left (0, 1) or stopped decreasing: {0}")]
    ModelInvalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
