//! Sweep and comparison protocols.
//!
//! Every replicate owns a generator seeded from
//! `derive_seed(master_seed, [algorithm, replicate])`, so outcomes do not
//! depend on scheduling. Outcomes are sorted into (algorithm, cell,
//! replicate) order before anything is written.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, CellParams, ExperimentConfig, TunedConfigs};
use super::records::{write_records, ResultRecord};
use super::stats::{format_table, median_ratios, summarize, MedianRatio, Summary};
use crate::error::{Error, Result};
use crate::evolve::{derive_seed, run_multibehavior, run_single_task_suite};
use crate::genome::Genome;
use crate::tasks::TaskSuite;

pub fn replicate_seed(master_seed: u64, algorithm: Algorithm, replicate: usize) -> u64 {
    derive_seed(master_seed, &[algorithm.index(), replicate as u64])
}

/// Final genome of one run, as stored in the genomes sidecar file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenomeEntry {
    pub algorithm: Algorithm,
    pub cell_id: String,
    pub replicate: usize,
    /// Task names in output order.
    pub tasks: Vec<String>,
    pub per_task: Vec<f64>,
    pub genome: Genome,
}

#[derive(Clone, Debug)]
pub struct ReplicateOutcome {
    pub record: ResultRecord,
    pub genomes: Vec<GenomeEntry>,
    cell_index: usize,
}

#[derive(Clone, Copy, Debug)]
struct Job {
    algorithm: Algorithm,
    cell_index: usize,
    cell: CellParams,
    replicate: usize,
}

/// Runs one replicate of `algorithm` in `cell`. For `single_task` this is the
/// full sequential protocol over every task of the suite.
pub fn run_replicate(
    cfg: &ExperimentConfig,
    suite: &TaskSuite,
    algorithm: Algorithm,
    cell: &CellParams,
    replicate: usize,
) -> Result<ReplicateOutcome> {
    run_job(
        cfg,
        suite,
        Job {
            algorithm,
            cell_index: 0,
            cell: *cell,
            replicate,
        },
    )
}

fn run_job(cfg: &ExperimentConfig, suite: &TaskSuite, job: Job) -> Result<ReplicateOutcome> {
    let cell = job.cell.normalized(job.algorithm);
    let cell_id = cell.cell_id();
    let seed = replicate_seed(cfg.master_seed, job.algorithm, job.replicate);
    let es = cfg.es_config(job.algorithm, &cell, suite.len(), seed);
    let names = |tasks: &[usize]| -> Vec<String> {
        tasks
            .iter()
            .map(|&t| suite.tasks()[t].name.clone())
            .collect()
    };

    let start = Instant::now();
    let (success, node_evals, generations, genomes) = if job.algorithm.is_multi() {
        let r = run_multibehavior(&es, suite)?;
        let entry = GenomeEntry {
            algorithm: job.algorithm,
            cell_id: cell_id.clone(),
            replicate: job.replicate,
            tasks: names(&r.final_fitness.tasks),
            per_task: r.final_fitness.per_task.clone(),
            genome: r.final_genome,
        };
        (r.success, r.node_evals, r.generations, vec![entry])
    } else {
        let r = run_single_task_suite(&es, suite)?;
        let entries = r
            .runs
            .into_iter()
            .map(|run| GenomeEntry {
                algorithm: job.algorithm,
                cell_id: cell_id.clone(),
                replicate: job.replicate,
                tasks: names(&run.final_fitness.tasks),
                per_task: run.final_fitness.per_task,
                genome: run.final_genome,
            })
            .collect();
        (r.success, r.total_effort, r.total_generations, entries)
    };
    let duration_ms = if cfg.record_durations {
        start.elapsed().as_millis() as u64
    } else {
        0
    };

    Ok(ReplicateOutcome {
        record: ResultRecord {
            algorithm: job.algorithm,
            cell_id,
            n_nodes: cell.n_nodes,
            base_rate: cell.base_rate,
            scheme: es.scheme.kind.as_str().to_string(),
            k: cell.k,
            floor: cell.floor,
            replicate: job.replicate,
            seed,
            success,
            node_evals,
            generations,
            duration_ms,
        },
        genomes,
        cell_index: job.cell_index,
    })
}

fn execute(
    cfg: &ExperimentConfig,
    suite: &TaskSuite,
    jobs: &[Job],
) -> Result<Vec<ReplicateOutcome>> {
    let mut outcomes = if cfg.parallel {
        let work = || {
            jobs.par_iter()
                .map(|&job| run_job(cfg, suite, job))
                .collect::<Result<Vec<_>>>()
        };
        match cfg.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("thread pool: {e}")))?
                .install(work)?,
            None => work()?,
        }
    } else {
        jobs.iter()
            .map(|&job| run_job(cfg, suite, job))
            .collect::<Result<Vec<_>>>()?
    };
    outcomes.sort_by_key(|o| (o.record.algorithm, o.cell_index, o.record.replicate));
    Ok(outcomes)
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub records: Vec<ResultRecord>,
    /// One summary per (algorithm, cell), in grid order.
    pub summaries: Vec<Summary>,
    pub tuned: TunedConfigs,
}

/// Index of the best summary: highest success rate, then lowest median
/// effort, then lowest mean; earlier cells win remaining ties.
pub fn best_cell(summaries: &[Summary]) -> Option<usize> {
    (0..summaries.len()).min_by(|&a, &b| {
        let (x, y) = (&summaries[a], &summaries[b]);
        y.success_rate
            .total_cmp(&x.success_rate)
            .then(x.median.total_cmp(&y.median))
            .then(x.mean.total_cmp(&y.mean))
            .then(a.cmp(&b))
    })
}

pub fn sweep(cfg: &ExperimentConfig, suite: &TaskSuite) -> Result<SweepOutput> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    let mut grids = Vec::new();
    for &algorithm in &cfg.algorithms {
        let cells = cfg.cells(algorithm)?;
        for (cell_index, cell) in cells.iter().enumerate() {
            for replicate in 0..cfg.replicates {
                jobs.push(Job {
                    algorithm,
                    cell_index,
                    cell: *cell,
                    replicate,
                });
            }
        }
        grids.push((algorithm, cells));
    }
    let outcomes = execute(cfg, suite, &jobs)?;
    let records: Vec<ResultRecord> = outcomes.into_iter().map(|o| o.record).collect();

    let mut summaries = Vec::new();
    let mut tuned = TunedConfigs::default();
    for (algorithm, cells) in grids {
        let per_cell = cells
            .iter()
            .map(|cell| {
                let id = cell.normalized(algorithm).cell_id();
                let group: Vec<&ResultRecord> = records
                    .iter()
                    .filter(|r| r.algorithm == algorithm && r.cell_id == id)
                    .collect();
                let efforts: Vec<u64> = group.iter().map(|r| r.node_evals).collect();
                let successes = group.iter().filter(|r| r.success).count();
                Summary::from_efforts(algorithm, id, &efforts, successes)
            })
            .collect::<Result<Vec<_>>>()?;
        let best = best_cell(&per_cell).expect("grid is nonempty");
        tuned.0.insert(algorithm, cells[best].normalized(algorithm));
        summaries.extend(per_cell);
    }
    Ok(SweepOutput {
        records,
        summaries,
        tuned,
    })
}

/// Cell to use for `algorithm`: the tuned file first, then the config's
/// `[algorithm.<id>]` section, then the grid if it has exactly one cell.
pub fn resolve_cell(
    cfg: &ExperimentConfig,
    tuned: Option<&TunedConfigs>,
    algorithm: Algorithm,
) -> Result<CellParams> {
    if let Some(cell) = tuned.and_then(|t| t.get(algorithm)) {
        return Ok(*cell);
    }
    if let Some(cell) = cfg.algorithm.get(&algorithm) {
        return Ok(*cell);
    }
    match cfg.cells(algorithm)?.as_slice() {
        [only] => Ok(*only),
        _ => Err(Error::config(format!(
            "no tuned configuration for {algorithm}; run `sweep` or add [algorithm.{algorithm}]"
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct CompareOutput {
    pub records: Vec<ResultRecord>,
    pub genomes: Vec<GenomeEntry>,
    pub summaries: Vec<Summary>,
    pub ratios: Vec<MedianRatio>,
}

impl CompareOutput {
    pub fn table(&self) -> String {
        format_table(&self.summaries)
    }

    /// `median(single_task) / median(algorithm)`, if both were run.
    pub fn single_task_ratio(&self, algorithm: Algorithm) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.numerator == Algorithm::SingleTask && r.denominator == algorithm)
            .map(|r| r.ratio)
    }
}

/// Runs every requested algorithm `replicates` times with its tuned cell.
pub fn compare(
    cfg: &ExperimentConfig,
    suite: &TaskSuite,
    tuned: Option<&TunedConfigs>,
) -> Result<CompareOutput> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &algorithm in &cfg.algorithms {
        let cell = resolve_cell(cfg, tuned, algorithm)?;
        for replicate in 0..cfg.replicates {
            jobs.push(Job {
                algorithm,
                cell_index: 0,
                cell,
                replicate,
            });
        }
    }
    let outcomes = execute(cfg, suite, &jobs)?;
    let mut records = Vec::with_capacity(outcomes.len());
    let mut genomes = Vec::new();
    for o in outcomes {
        records.push(o.record);
        genomes.extend(o.genomes);
    }
    let summaries = summarize(&records)?;
    let ratios = median_ratios(&summaries);
    Ok(CompareOutput {
        records,
        genomes,
        summaries,
        ratios,
    })
}

/// Reproducibility record written next to every results file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub master_seed: u64,
    pub records: usize,
    pub wall_clock_ms: u64,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuned: Option<TunedConfigs>,
}

impl Manifest {
    pub fn new(command: &str, cfg: &ExperimentConfig, records: usize, wall_clock_ms: u64) -> Self {
        Manifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: cfg.master_seed,
            records,
            wall_clock_ms,
            config: cfg.clone(),
            tuned: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::config(format!("manifest: {e}")))?;
        write_text(path, &text)
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Paths written by [`write_sweep`].
#[derive(Clone, Debug)]
pub struct SweepFiles {
    pub results: PathBuf,
    pub tuned: PathBuf,
    pub manifest: PathBuf,
}

impl SweepFiles {
    pub fn in_dir(dir: &Path) -> Self {
        SweepFiles {
            results: dir.join("sweep.csv"),
            tuned: dir.join("tuned.toml"),
            manifest: dir.join("sweep_manifest.toml"),
        }
    }
}

pub fn write_sweep(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &SweepOutput,
    wall_clock_ms: u64,
) -> Result<SweepFiles> {
    let files = SweepFiles::in_dir(dir);
    write_records(&files.results, &out.records)?;
    write_text(&files.tuned, &out.tuned.to_toml_string())?;
    let mut manifest = Manifest::new("sweep", cfg, out.records.len(), wall_clock_ms);
    manifest.tuned = Some(out.tuned.clone());
    manifest.write(&files.manifest)?;
    Ok(files)
}

/// Paths written by [`write_compare`].
#[derive(Clone, Debug)]
pub struct CompareFiles {
    pub results: PathBuf,
    pub genomes: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
}

impl CompareFiles {
    pub fn in_dir(dir: &Path) -> Self {
        CompareFiles {
            results: dir.join("compare.csv"),
            genomes: dir.join("compare_genomes.jsonl"),
            summary: dir.join("compare_summary.txt"),
            manifest: dir.join("compare_manifest.toml"),
        }
    }
}

pub fn write_compare(
    dir: &Path,
    cfg: &ExperimentConfig,
    tuned: Option<&TunedConfigs>,
    out: &CompareOutput,
    wall_clock_ms: u64,
) -> Result<CompareFiles> {
    let files = CompareFiles::in_dir(dir);
    write_records(&files.results, &out.records)?;
    let mut lines = String::new();
    for g in &out.genomes {
        lines.push_str(&serde_json::to_string(g).expect("genome entry serializes"));
        lines.push('\n');
    }
    write_text(&files.genomes, &lines)?;
    write_text(&files.summary, &out.table())?;
    let mut manifest = Manifest::new("compare", cfg, out.records.len(), wall_clock_ms);
    manifest.tuned = tuned.cloned();
    manifest.write(&files.manifest)?;
    Ok(files)
}

pub fn read_genomes(path: &Path) -> Result<Vec<GenomeEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                msg: e.to_string(),
            })
        })
        .collect()
}
