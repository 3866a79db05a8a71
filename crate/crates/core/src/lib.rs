//! Multitask Cartesian genetic programming over NAND-only Boolean circuits.
//!
//! A single genome carries one output tap per task, so subcircuits evolved for
//! one task can be reused by the others. The crate provides:
//!
//! * [`genome`]: single-row CGP genomes, decoding of active subgraphs, and
//!   per-gene weighted mutation.
//! * [`tasks`]: the two-input logic task suite and bit-parallel fitness.
//! * [`contribution`]: which tasks each node feeds, and the constant, linear
//!   and exponential mutation-weighting schemes built on top of that.
//! * [`evolve`]: the (1+λ) evolution strategy with neutral drift and
//!   node-evaluation effort accounting.
//! * [`harness`]: parameter sweeps, the single-task vs. multi-behavior
//!   comparison protocol, result files, statistics and circuit export.

pub mod contribution;
pub mod error;
pub mod evolve;
pub mod genome;
pub mod harness;
pub mod tasks;

pub use contribution::{contributions, node_weights, ContributionMap, SchemeKind, WeightScheme};
pub use error::{Error, Result};
pub use evolve::{
    derive_seed, run, run_multibehavior, run_observed, run_single_task_suite, run_with_rng,
    EffortCounter, EsConfig, GenerationReport, RunResult, SuiteResult,
};
pub use genome::{decode, mutate, random_genome, ActiveSet, Genome, GenomeParams, MutationWeights};
pub use tasks::{
    evaluate_outputs, fitness, fitness_with, FitnessMode, FitnessVector, TaskSuite, TruthTable,
};
