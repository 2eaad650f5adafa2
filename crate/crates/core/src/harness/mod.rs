//! Benchmark orchestration over disjoint datasets, and a synthetic tagged
//! corpus for running it without licensed data.

mod benchmark;
mod synthetic;

pub use benchmark::{
    evaluate_dataset, run_benchmark, tune_tfw_params, BenchmarkParams, BenchmarkRun, DatasetModels, Method,
};
pub use synthetic::{generate_synthetic, topic_label, SyntheticSpec};
