//! Batch orchestration: config documents, grid expansion, the results
//! store, execution, and report generation.

mod batch;
mod config;
mod report;
mod store;

pub use batch::{run_batch, store_path, BatchFailure, BatchSummary, STORE_FILE};
pub use config::{
    config_hash, expand_grid, BatchConfig, CvConfig, DatasetRef, ExperimentConfig,
};
pub use report::generate_report;
pub use store::{read_records, write_records, RecordFilter};
