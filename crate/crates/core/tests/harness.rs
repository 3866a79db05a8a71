use std::collections::BTreeSet;

use mtcgp::harness::{
    compare, quantile, read_genomes, read_records, summarize, sweep, write_compare, write_sweep,
    Algorithm, CompareFiles, ExperimentConfig, TunedConfigs, RESULT_COLUMNS,
};
use mtcgp::{fitness_with, Genome, TaskSuite};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

#[test]
fn sweep_emits_one_record_per_cell_and_replicate() {
    let cfg = config(
        r#"
algorithms = ["multi_constant"]
replicates = 20
master_seed = 3
budget = 150000

[grid]
n_nodes = [20, 30, 40]
base_rate = [0.02, 0.05, 0.1]
"#,
    );
    let out = sweep(&cfg, &TaskSuite::canonical()).unwrap();
    assert_eq!(out.records.len(), 180);
    let keys: BTreeSet<(Algorithm, &str, usize)> = out
        .records
        .iter()
        .map(|r| (r.algorithm, r.cell_id.as_str(), r.replicate))
        .collect();
    assert_eq!(keys.len(), 180);
    assert_eq!(out.summaries.len(), 9);
    assert!(out.summaries.iter().all(|s| s.n == 20));
    assert!(out.tuned.get(Algorithm::MultiConstant).is_some());
    // Failed runs are recorded at their terminal effort, never below budget.
    for r in &out.records {
        assert!(r.success || r.node_evals >= cfg.budget, "{r:?}");
        assert_eq!(r.node_evals % r.n_nodes as u64, 0);
    }
}

#[test]
fn sweep_files_round_trip() {
    let cfg = config(
        r#"
algorithms = ["single_task", "multi_linear"]
replicates = 4
master_seed = 5
budget = 200000

[grid]
n_nodes = [20]
base_rate = [0.3, 0.6]
floor = [0.0, 0.01]
"#,
    );
    let out = sweep(&cfg, &TaskSuite::canonical()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_sweep(dir.path(), &cfg, &out, 12).unwrap();
    assert_eq!(read_records(&files.results).unwrap(), out.records);
    assert_eq!(TunedConfigs::load(&files.tuned).unwrap(), out.tuned);

    let manifest: toml::Value =
        toml::from_str(&std::fs::read_to_string(&files.manifest).unwrap()).unwrap();
    assert_eq!(manifest["command"].as_str(), Some("sweep"));
    assert_eq!(manifest["master_seed"].as_integer(), Some(5));
    assert_eq!(
        manifest["records"].as_integer(),
        Some(out.records.len() as i64)
    );
    assert!(manifest.get("tuned").is_some());
    // The embedded config reproduces the run.
    let embedded = manifest["config"]
        .clone()
        .try_into::<ExperimentConfig>()
        .unwrap();
    assert_eq!(embedded, cfg);
}

fn small_compare() -> ExperimentConfig {
    config(
        r#"
replicates = 6
master_seed = 99
budget = 2000000

[algorithm.single_task]
n_nodes = 20
base_rate = 0.3

[algorithm.multi_constant]
n_nodes = 30
base_rate = 0.05

[algorithm.multi_linear]
n_nodes = 30
base_rate = 0.5
fitness = "binary"

[algorithm.multi_exponential]
n_nodes = 50
base_rate = 0.9
k = 10.0
fitness = "binary"
"#,
    )
}

#[test]
fn compare_outputs_are_consistent() {
    let suite = TaskSuite::canonical();
    let cfg = small_compare();
    let out = compare(&cfg, &suite, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_compare(dir.path(), &cfg, None, &out, 0).unwrap();

    let csv = std::fs::read_to_string(&files.results).unwrap();
    assert_eq!(csv.lines().next().unwrap(), RESULT_COLUMNS.join(","));
    let records = read_records(&files.results).unwrap();
    assert_eq!(records.len(), 4 * 6);

    // Summary statistics agree with a recomputation from the raw file.
    let summaries = summarize(&records).unwrap();
    assert_eq!(summaries, out.summaries);
    for s in &summaries {
        let mut efforts: Vec<f64> = records
            .iter()
            .filter(|r| r.algorithm == s.algorithm)
            .map(|r| r.node_evals as f64)
            .collect();
        efforts.sort_by(f64::total_cmp);
        let n = efforts.len();
        let median = (efforts[n / 2 - 1] + efforts[n / 2]) / 2.0;
        assert_eq!(s.median, median);
        assert_eq!(quantile(&efforts, 0.5), median);
    }
    assert_eq!(
        std::fs::read_to_string(&files.summary).unwrap(),
        out.table()
    );

    // Every stored genome is valid and re-evaluates to its stored fitness.
    let entries = read_genomes(&files.genomes).unwrap();
    assert_eq!(entries.len(), 6 * 9 + 3 * 6);
    for e in &entries {
        let g = Genome::from_json(&e.genome.to_json()).unwrap();
        let assignment: Vec<usize> = e.tasks.iter().map(|t| suite.index_of(t).unwrap()).collect();
        let cell_binary = e.cell_id.ends_with("_bin");
        let mode = if cell_binary {
            mtcgp::FitnessMode::Binary
        } else {
            mtcgp::FitnessMode::FractionCorrect
        };
        let f = fitness_with(&g, &suite, &assignment, mode).unwrap();
        assert_eq!(f.per_task, e.per_task, "{e:?}");
    }
    // single-task entries come one per task, in suite order
    let first: Vec<&str> = entries[..9].iter().map(|e| e.tasks[0].as_str()).collect();
    let names: Vec<&str> = suite.tasks().iter().map(|t| t.name.as_str()).collect();
    assert_eq!(first, names);
    assert!(CompareFiles::in_dir(dir.path()).manifest.exists());
}

#[test]
fn seeds_depend_only_on_master_seed_algorithm_and_replicate() {
    let suite = TaskSuite::canonical();
    let mut cfg = small_compare();
    cfg.algorithms = vec![Algorithm::MultiExponential, Algorithm::SingleTask];
    let a = compare(&cfg, &suite, None).unwrap();
    cfg.algorithms = vec![Algorithm::SingleTask];
    cfg.replicates = 3;
    let b = compare(&cfg, &suite, None).unwrap();
    let single_a: Vec<_> = a
        .records
        .iter()
        .filter(|r| r.algorithm == Algorithm::SingleTask)
        .take(3)
        .collect();
    let single_b: Vec<_> = b.records.iter().collect();
    assert_eq!(single_a, single_b);
    let seeds: BTreeSet<u64> = a.records.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), a.records.len());
}

#[test]
fn missing_tuned_cell_is_a_config_error() {
    let cfg = config("algorithms = [\"multi_linear\"]\nreplicates = 1");
    let err = compare(&cfg, &TaskSuite::canonical(), None).unwrap_err();
    assert!(err.is_config(), "{err}");
}

#[test]
fn custom_suite_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("suite.toml"),
        "[[task]]\nname = \"XOR\"\nmask = \"0110\"\n\n[[task]]\nname = \"A\"\nmask = \"0011\"\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("exp.toml"),
        "algorithms = [\"multi_constant\"]\nreplicates = 3\nbudget = 1000000\nsuite = \"suite.toml\"\n\n\
         [algorithm.multi_constant]\nn_nodes = 15\nbase_rate = 0.1\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&dir.path().join("exp.toml")).unwrap();
    let suite = cfg.load_suite().unwrap();
    assert_eq!(suite.len(), 2);
    let out = compare(&cfg, &suite, None).unwrap();
    assert_eq!(out.records.len(), 3);
    assert!(out.genomes.iter().all(|e| e.tasks == ["XOR", "A"]));
}
