//! Experiment harness: configuration, sweeps, the comparison protocol,
//! result files, summary statistics and circuit inspection.

pub mod config;
pub mod dot;
pub mod experiment;
pub mod overlap;
pub mod records;
pub mod stats;

pub use config::{Algorithm, CellParams, ExperimentConfig, Grid, TunedConfigs};
pub use dot::{export_dot, DotOptions};
pub use experiment::{
    compare, read_genomes, replicate_seed, resolve_cell, run_replicate, sweep, write_compare,
    write_sweep, CompareFiles, CompareOutput, GenomeEntry, Manifest, SweepFiles, SweepOutput,
};
pub use overlap::{overlap, OverlapMatrix};
pub use records::{read_records, write_records, ResultRecord, RESULT_COLUMNS};
pub use stats::{format_table, median_ratios, quantile, summarize, MedianRatio, Summary};
