//! Files, configuration and orchestration around `mola-core`: suitability
//! ingestion and synthetic fields, seeded replicate runs on a worker pool,
//! priority sweeps with flashpoint detection and gray areas, SVG reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod generate;
pub mod io;
pub mod manifest;
pub mod pipeline;
pub mod render;
pub mod replicate;

pub use config::{load_config, RunConfig};
pub use error::{MolaError, Result};
pub use generate::{generate_field, GeneratorSpec};
pub use pipeline::{anneal_pipeline, sweep_pipeline, RunOptions};
pub use render::render_reports;
pub use replicate::{run_replicates, ReplicateSet};
