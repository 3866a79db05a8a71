use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::contribution::WeightScheme;
use crate::error::{Error, Result};
use crate::evolve::EsConfig;
use crate::genome::GenomeParams;
use crate::tasks::{FitnessMode, TaskSuite};

/// The four compared algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    SingleTask,
    MultiConstant,
    MultiLinear,
    MultiExponential,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::SingleTask,
        Algorithm::MultiConstant,
        Algorithm::MultiLinear,
        Algorithm::MultiExponential,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::SingleTask => "single_task",
            Algorithm::MultiConstant => "multi_constant",
            Algorithm::MultiLinear => "multi_linear",
            Algorithm::MultiExponential => "multi_exponential",
        }
    }

    /// Stable numeric id, mixed into replicate seeds.
    pub fn index(&self) -> u64 {
        *self as u64
    }

    pub fn is_multi(&self) -> bool {
        *self != Algorithm::SingleTask
    }

    /// Whether the grid's `k` values matter for this algorithm.
    pub fn uses_k(&self) -> bool {
        *self == Algorithm::MultiExponential
    }

    /// Whether the grid's `floor` values matter for this algorithm.
    pub fn uses_floor(&self) -> bool {
        matches!(self, Algorithm::MultiLinear | Algorithm::MultiExponential)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::config(format!("unknown algorithm {s:?}")))
    }
}

/// One point of the parameter grid for one algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellParams {
    pub n_nodes: usize,
    pub base_rate: f64,
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub floor: f64,
    #[serde(default)]
    pub fitness: FitnessMode,
}

impl CellParams {
    pub fn cell_id(&self) -> String {
        let mut id = format!(
            "n{}_r{}_k{}_f{}",
            self.n_nodes, self.base_rate, self.k, self.floor
        );
        if self.fitness == FitnessMode::Binary {
            id.push_str("_bin");
        }
        id
    }

    pub fn scheme(&self, algorithm: Algorithm) -> WeightScheme {
        match algorithm {
            Algorithm::SingleTask | Algorithm::MultiConstant => WeightScheme::constant(),
            Algorithm::MultiLinear => WeightScheme::linear(self.floor),
            Algorithm::MultiExponential => WeightScheme::exponential(self.k, self.floor),
        }
    }

    /// Zeroes the fields that `algorithm` ignores so equivalent cells share
    /// an id.
    pub fn normalized(mut self, algorithm: Algorithm) -> Self {
        if !algorithm.uses_k() {
            self.k = 0.0;
        }
        if !algorithm.uses_floor() {
            self.floor = 0.0;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default = "default_n_nodes")]
    pub n_nodes: Vec<usize>,
    #[serde(default = "default_base_rate")]
    pub base_rate: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: Vec<f64>,
    #[serde(default = "default_floor")]
    pub floor: Vec<f64>,
    /// Fitness modes to sweep. Empty means the experiment-wide `fitness`.
    #[serde(default)]
    pub fitness: Vec<FitnessMode>,
}

fn default_n_nodes() -> Vec<usize> {
    vec![10, 20, 50, 100]
}
fn default_base_rate() -> Vec<f64> {
    vec![0.01, 0.02, 0.05, 0.1]
}
fn default_k() -> Vec<f64> {
    vec![1.0, 2.0, 5.0, 10.0]
}
fn default_floor() -> Vec<f64> {
    vec![0.0, 0.01]
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            n_nodes: default_n_nodes(),
            base_rate: default_base_rate(),
            k: default_k(),
            floor: default_floor(),
            fitness: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
        }
    }
}

/// Experiment description, read from a TOML file. Unknown keys are errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_lambda")]
    pub lambda: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels_back: Option<usize>,
    #[serde(default)]
    pub fitness: FitnessMode,
    #[serde(default = "default_true")]
    pub weight_outputs: bool,
    #[serde(default = "default_true")]
    pub parallel: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Write wall-clock durations into the results file. Off by default so
    /// reruns produce byte-identical files.
    #[serde(default)]
    pub record_durations: bool,
    /// Optional custom task suite file; the canonical suite otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<PathBuf>,
    #[serde(default)]
    pub grid: Grid,
    /// Per-algorithm grids. An entry replaces `grid` for that algorithm as a
    /// whole; fields it leaves out take the built-in defaults.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grids: BTreeMap<Algorithm, Grid>,
    /// Fixed per-algorithm settings, used by `compare` and `run` when no
    /// tuned file is given.
    #[serde(default)]
    pub algorithm: BTreeMap<Algorithm, CellParams>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}
fn default_replicates() -> usize {
    50
}
fn default_budget() -> u64 {
    50_000_000
}
fn default_lambda() -> usize {
    4
}
fn default_true() -> bool {
    true
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        // a relative suite path is relative to the config file
        if let (Some(suite), Some(dir)) = (&cfg.suite, path.parent()) {
            if suite.is_relative() {
                cfg.suite = Some(dir.join(suite));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::config("no algorithms selected"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates must be at least 1"));
        }
        if self.budget == 0 {
            return Err(Error::config("budget must be positive"));
        }
        if self.lambda == 0 {
            return Err(Error::config("lambda must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads must be at least 1"));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(Error::config(format!("algorithm {a} listed twice")));
            }
        }
        for (alg, cell) in &self.algorithm {
            self.es_config(*alg, cell, 1, 0)
                .validate()
                .map_err(|e| Error::config(format!("[algorithm.{alg}]: {e}")))?;
        }
        Ok(())
    }

    pub fn load_suite(&self) -> Result<TaskSuite> {
        match &self.suite {
            Some(path) => TaskSuite::load(path),
            None => Ok(TaskSuite::canonical()),
        }
    }

    /// The grid swept for `algorithm`.
    pub fn grid_for(&self, algorithm: Algorithm) -> &Grid {
        self.grids.get(&algorithm).unwrap_or(&self.grid)
    }

    /// Enumerates the grid cells for `algorithm`, in a fixed order. Fields the
    /// algorithm ignores are not swept.
    pub fn cells(&self, algorithm: Algorithm) -> Result<Vec<CellParams>> {
        let g = self.grid_for(algorithm);
        let fixed_fitness = [self.fitness];
        let fitness: &[FitnessMode] = if g.fitness.is_empty() {
            &fixed_fitness
        } else {
            &g.fitness
        };
        let ks: &[f64] = if algorithm.uses_k() { &g.k } else { &[0.0] };
        let floors: &[f64] = if algorithm.uses_floor() {
            &g.floor
        } else {
            &[0.0]
        };
        for (name, empty) in [
            ("n_nodes", g.n_nodes.is_empty()),
            ("base_rate", g.base_rate.is_empty()),
            ("k", ks.is_empty()),
            ("floor", floors.is_empty()),
        ] {
            if empty {
                let table = if self.grids.contains_key(&algorithm) {
                    format!("grids.{algorithm}")
                } else {
                    "grid".to_string()
                };
                return Err(Error::config(format!(
                    "{table}.{name} is empty for algorithm {algorithm}"
                )));
            }
        }
        let mut cells = Vec::new();
        for &n_nodes in &g.n_nodes {
            for &base_rate in &g.base_rate {
                for &k in ks {
                    for &floor in floors {
                        for &fit in fitness {
                            cells.push(CellParams {
                                n_nodes,
                                base_rate,
                                k,
                                floor,
                                fitness: fit,
                            });
                        }
                    }
                }
            }
        }
        Ok(cells)
    }

    /// The evolution-strategy settings for one run of `algorithm` in `cell`.
    pub fn es_config(
        &self,
        algorithm: Algorithm,
        cell: &CellParams,
        n_tasks: usize,
        seed: u64,
    ) -> EsConfig {
        let n_outputs = if algorithm.is_multi() { n_tasks } else { 1 };
        let mut params = GenomeParams::new(2, cell.n_nodes, n_outputs);
        params.levels_back = self.levels_back;
        EsConfig {
            lambda: self.lambda,
            base_rate: cell.base_rate,
            scheme: cell.scheme(algorithm),
            budget: self.budget,
            genome_params: params,
            seed,
            fitness_mode: cell.fitness,
            weight_outputs: self.weight_outputs,
        }
    }
}

/// Best cell per algorithm, as written by `sweep` and read by `compare`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TunedConfigs(pub BTreeMap<Algorithm, CellParams>);

impl TunedConfigs {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("tuned configs: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("tuned configs serialize")
    }

    pub fn get(&self, algorithm: Algorithm) -> Option<&CellParams> {
        self.0.get(&algorithm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_desk_scale_grid() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.algorithms, Algorithm::ALL);
        assert_eq!(cfg.replicates, 50);
        assert_eq!(cfg.budget, 50_000_000);
        assert_eq!(cfg.cells(Algorithm::MultiConstant).unwrap().len(), 16);
        assert_eq!(cfg.cells(Algorithm::MultiLinear).unwrap().len(), 32);
        assert_eq!(cfg.cells(Algorithm::MultiExponential).unwrap().len(), 128);
    }

    #[test]
    fn parses_nested_sections() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            algorithms = ["single_task", "multi_exponential"]
            replicates = 3
            master_seed = 99
            [grid]
            n_nodes = [20]
            base_rate = [0.1, 0.2]
            fitness = ["fraction_correct", "binary"]
            [algorithm.multi_exponential]
            n_nodes = 30
            base_rate = 0.5
            k = 5
            floor = 0.0
            fitness = "binary"
            [output]
            dir = "out"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.cells(Algorithm::SingleTask).unwrap().len(), 4);
        let cell = cfg.algorithm[&Algorithm::MultiExponential];
        assert_eq!(cell.cell_id(), "n30_r0.5_k5_f0_bin");
        let es = cfg.es_config(Algorithm::MultiExponential, &cell, 9, 1);
        assert_eq!(es.genome_params.n_outputs, 9);
        assert_eq!(es.scheme, WeightScheme::exponential(5.0, 0.0));
        assert_eq!(es.fitness_mode, FitnessMode::Binary);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml_str("replicate = 3").is_err());
        assert!(ExperimentConfig::from_toml_str("[grid]\nnodes = [1]").is_err());
        assert!(ExperimentConfig::from_toml_str("replicates = 0").is_err());
        assert!(ExperimentConfig::from_toml_str("algorithms = [\"multi_quadratic\"]").is_err());
        assert!(ExperimentConfig::from_toml_str(
            "[algorithm.multi_exponential]\nn_nodes = 10\nbase_rate = 0.1\nk = 0"
        )
        .is_err());
    }

    #[test]
    fn empty_grid_is_config_error() {
        let cfg = ExperimentConfig::from_toml_str("[grid]\nn_nodes = []").unwrap();
        assert!(matches!(
            cfg.cells(Algorithm::SingleTask),
            Err(Error::Config(_))
        ));
        let cfg = ExperimentConfig::from_toml_str("[grid]\nk = []").unwrap();
        assert!(cfg.cells(Algorithm::MultiConstant).is_ok());
        assert!(cfg.cells(Algorithm::MultiExponential).is_err());
    }

    #[test]
    fn per_algorithm_grid_replaces_shared_grid() {
        let cfg = ExperimentConfig::from_toml_str(
            "[grid]\nn_nodes = [10]\nbase_rate = [0.5]\n\n\
             [grids.multi_exponential]\nn_nodes = [30, 40]\nbase_rate = [0.7]\nk = [5.0]\nfloor = [0.0]",
        )
        .unwrap();
        assert_eq!(cfg.cells(Algorithm::SingleTask).unwrap().len(), 1);
        let cells = cfg.cells(Algorithm::MultiExponential).unwrap();
        assert_eq!(
            cells.iter().map(|c| c.n_nodes).collect::<Vec<_>>(),
            [30, 40]
        );
        // multi_linear falls back to the shared grid: 1 n x 1 rate x 2 floors
        assert_eq!(cfg.cells(Algorithm::MultiLinear).unwrap().len(), 2);
        assert_eq!(
            ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(),
            cfg
        );

        let cfg = ExperimentConfig::from_toml_str("[grids.single_task]\nbase_rate = []").unwrap();
        let err = cfg.cells(Algorithm::SingleTask).unwrap_err().to_string();
        assert!(err.contains("grids.single_task.base_rate"), "{err}");
    }

    #[test]
    fn tuned_round_trip() {
        let mut t = TunedConfigs::default();
        t.0.insert(
            Algorithm::SingleTask,
            CellParams {
                n_nodes: 15,
                base_rate: 0.3,
                k: 0.0,
                floor: 0.0,
                fitness: FitnessMode::FractionCorrect,
            },
        );
        let text = t.to_toml_string();
        assert!(text.contains("[single_task]"), "{text}");
        assert_eq!(TunedConfigs::from_toml_str(&text).unwrap(), t);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        assert_eq!(
            ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(),
            cfg
        );
    }
}
