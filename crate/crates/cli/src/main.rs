//! `mtcgp`: command-line driver for multitask CGP experiments.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for runtime or
//! persistence errors.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use mtcgp::evolve::{run_multibehavior, run_single_task_suite};
use mtcgp::harness::{
    self, compare, export_dot, overlap, read_records, resolve_cell, summarize, sweep,
    write_compare, write_sweep, Algorithm, DotOptions, ExperimentConfig, GenomeEntry, TunedConfigs,
};
use mtcgp::{fitness, Error, Genome, TaskSuite};

#[derive(Parser)]
#[command(
    name = "mtcgp",
    version,
    about = "Multitask Cartesian GP over NAND circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the parameter grid and pick the best cell per algorithm.
    Sweep {
        config: PathBuf,
        /// Output directory (overrides `[output] dir`).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the single-task vs. multi-behavior comparison.
    Compare {
        config: PathBuf,
        /// Tuned configurations written by `sweep`.
        #[arg(long)]
        tuned: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Run replicates one after another instead of on a thread pool.
        #[arg(long)]
        serial: bool,
    },
    /// Run one replicate of one algorithm and print the result as JSON.
    Run {
        config: PathBuf,
        #[arg(long)]
        algo: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        tuned: Option<PathBuf>,
        /// Write the final genome (multi-behavior runs) to this file.
        #[arg(long)]
        genome_out: Option<PathBuf>,
    },
    /// Render a genome file as a Graphviz digraph.
    ExportDot {
        genome: PathBuf,
        /// Line to use when the file is a genomes sidecar (JSON lines).
        #[arg(long, default_value_t = 0)]
        entry: usize,
        /// Comma-separated task names per output; defaults to suite order.
        #[arg(long, value_delimiter = ',')]
        tasks: Vec<String>,
        /// Custom task suite file.
        #[arg(long)]
        suite: Option<PathBuf>,
        #[arg(long)]
        include_inactive: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the active-node overlap matrix of a genome file.
    Overlap {
        genome: PathBuf,
        #[arg(long, default_value_t = 0)]
        entry: usize,
        #[arg(long, value_delimiter = ',')]
        tasks: Vec<String>,
        #[arg(long)]
        suite: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Summarize a results file.
    Stats {
        results: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            let config_error = e
                .chain()
                .find_map(|c| c.downcast_ref::<Error>())
                .is_some_and(Error::is_config);
            ExitCode::from(if config_error { 1 } else { 2 })
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let suite = cfg.load_suite()?;
            let start = Instant::now();
            let result = sweep(&cfg, &suite)?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let files = write_sweep(&dir, &cfg, &result, start.elapsed().as_millis() as u64)?;
            emit(&format!(
                "{}\n{}",
                harness::format_table(&result.summaries),
                result.tuned.to_toml_string()
            ))?;
            eprintln!(
                "wrote {} records to {}, tuned cells to {}",
                result.records.len(),
                files.results.display(),
                files.tuned.display()
            );
        }
        Command::Compare {
            config,
            tuned,
            out,
            serial,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if serial {
                cfg.parallel = false;
            }
            let suite = cfg.load_suite()?;
            let tuned = tuned.as_deref().map(TunedConfigs::load).transpose()?;
            let start = Instant::now();
            let result = compare(&cfg, &suite, tuned.as_ref())?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let files = write_compare(
                &dir,
                &cfg,
                tuned.as_ref(),
                &result,
                start.elapsed().as_millis() as u64,
            )?;
            emit(&result.table())?;
            eprintln!("wrote {}", files.results.display());
        }
        Command::Run {
            config,
            algo,
            seed,
            tuned,
            genome_out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let suite = cfg.load_suite()?;
            let algorithm: Algorithm = algo.parse()?;
            let tuned = tuned.as_deref().map(TunedConfigs::load).transpose()?;
            let cell = resolve_cell(&cfg, tuned.as_ref(), algorithm)?.normalized(algorithm);
            let es = cfg.es_config(algorithm, &cell, suite.len(), seed);
            let json = if algorithm.is_multi() {
                let r = run_multibehavior(&es, &suite)?;
                if let Some(path) = &genome_out {
                    write_file(path, &r.final_genome.to_json())?;
                }
                serde_json::to_string_pretty(&r)?
            } else {
                let r = run_single_task_suite(&es, &suite)?;
                if genome_out.is_some() {
                    eprintln!(
                        "note: --genome-out is ignored for single_task (one genome per task)"
                    );
                }
                serde_json::to_string_pretty(&r)?
            };
            emit(&format!("{json}\n"))?;
        }
        Command::ExportDot {
            genome,
            entry,
            tasks,
            suite,
            include_inactive,
            out,
        } => {
            let (genome, suite, assignment) =
                load_circuit(&genome, entry, suite.as_deref(), &tasks)?;
            let fit = fitness(&genome, &suite, &assignment)?;
            let dot = export_dot(&genome, &suite, &fit, DotOptions { include_inactive });
            match out {
                Some(path) => write_file(&path, &dot)?,
                None => emit(&dot)?,
            }
        }
        Command::Overlap {
            genome,
            entry,
            tasks,
            suite,
            json,
        } => {
            let (genome, suite, assignment) =
                load_circuit(&genome, entry, suite.as_deref(), &tasks)?;
            let m = overlap(&genome);
            if json {
                emit(&format!("{}\n", serde_json::to_string(&m)?))?;
            } else {
                let labels: Vec<String> = assignment
                    .iter()
                    .map(|&t| suite.tasks()[t].name.clone())
                    .collect();
                emit(&m.to_text(&labels))?;
            }
        }
        Command::Stats { results, json } => {
            let records = read_records(&results)?;
            let summaries = summarize(&records)?;
            if json {
                let ratios = harness::median_ratios(&summaries);
                let doc = serde_json::json!({ "summaries": summaries, "ratios": ratios });
                emit(&format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            } else {
                emit(&harness::format_table(&summaries))?;
            }
        }
    }
    Ok(())
}

/// Reads a genome file and works out which task each output solves.
///
/// The file is either a bare genome or a genomes sidecar, one entry per line;
/// for the latter the entry's own task names are the default assignment.
fn load_circuit(
    path: &Path,
    entry: usize,
    suite: Option<&Path>,
    tasks: &[String],
) -> Result<(Genome, TaskSuite, Vec<usize>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
        .context("reading genome")?;
    let (genome, mut names) = match Genome::from_json(&text) {
        Ok(g) => (g, Vec::new()),
        Err(plain) => {
            let Some(line) = text.lines().filter(|l| !l.trim().is_empty()).nth(entry) else {
                return Err(plain.into());
            };
            let e: GenomeEntry = serde_json::from_str(line).map_err(|_| plain)?;
            e.genome.validate()?;
            (e.genome, e.tasks)
        }
    };
    if !tasks.is_empty() {
        names = tasks.to_vec();
    }
    let suite = match suite {
        Some(p) => TaskSuite::load(p)?,
        None => TaskSuite::canonical(),
    };
    let assignment: Vec<usize> = if names.is_empty() {
        if genome.n_outputs() > suite.len() {
            return Err(Error::Param(format!(
                "genome has {} outputs but the suite only {} tasks",
                genome.n_outputs(),
                suite.len()
            ))
            .into());
        }
        (0..genome.n_outputs()).collect()
    } else {
        names
            .iter()
            .map(|name| {
                suite
                    .index_of(name)
                    .ok_or_else(|| Error::Param(format!("unknown task {name:?}")))
            })
            .collect::<Result<_, _>>()?
    };
    Ok((genome, suite, assignment))
}

/// The error chain on one line, leaving out causes already quoted by the
/// message above them.
fn describe(e: &anyhow::Error) -> String {
    let mut out = e.to_string();
    let mut last = out.clone();
    for cause in e.chain().skip(1) {
        let msg = cause.to_string();
        if !last.ends_with(&msg) {
            out.push_str(": ");
            out.push_str(&msg);
        }
        last = msg;
    }
    out
}

/// Writes to stdout; a closed pipe (`mtcgp ... | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
    {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: "<stdout>".into(),
            source: e,
        }
        .into()),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| {
        Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    })
}
