//! Task contributions of circuit nodes and fitness-driven mutation weights.
//!
//! Each node is tagged with the tasks whose output subcircuit contains it.
//! Its mutation weight then decreases with the mean fitness of those tasks,
//! so genes that already encode a good solution are disturbed less often.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{decode, ActiveSet, Genome, MutationWeights};
use crate::tasks::FitnessVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContributionMap {
    /// Ascending task indices per node; empty for inactive nodes.
    pub node_tasks: Vec<Vec<usize>>,
    pub output_task: Vec<usize>,
}

impl ContributionMap {
    pub fn from_active(active: &ActiveSet, n_nodes: usize, assignment: &[usize]) -> Result<Self> {
        if active.per_output.len() != assignment.len() {
            return Err(Error::param(format!(
                "assignment has {} entries for {} outputs",
                assignment.len(),
                active.per_output.len()
            )));
        }
        let mut node_tasks = vec![Vec::new(); n_nodes];
        for (nodes, &task) in active.per_output.iter().zip(assignment) {
            for &n in nodes {
                node_tasks[n].push(task);
            }
        }
        for tasks in &mut node_tasks {
            tasks.sort_unstable();
            tasks.dedup();
        }
        Ok(ContributionMap {
            node_tasks,
            output_task: assignment.to_vec(),
        })
    }
}

pub fn contributions(genome: &Genome, assignment: &[usize]) -> Result<ContributionMap> {
    ContributionMap::from_active(&decode(genome), genome.n_nodes(), assignment)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Constant,
    Linear,
    Exponential,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::Constant => "constant",
            SchemeKind::Linear => "linear",
            SchemeKind::Exponential => "exponential",
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a mean task fitness in `[0, 1]` to a mutation weight:
/// constant gives 1, linear `1 - f`, exponential `exp(-k f)`, each clamped
/// below at `floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightScheme {
    #[serde(rename = "scheme")]
    pub kind: SchemeKind,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default)]
    pub floor: f64,
}

fn default_k() -> f64 {
    1.0
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme::constant()
    }
}

impl WeightScheme {
    pub fn constant() -> Self {
        WeightScheme {
            kind: SchemeKind::Constant,
            k: default_k(),
            floor: 0.0,
        }
    }

    pub fn linear(floor: f64) -> Self {
        WeightScheme {
            kind: SchemeKind::Linear,
            k: default_k(),
            floor,
        }
    }

    pub fn exponential(k: f64, floor: f64) -> Self {
        WeightScheme {
            kind: SchemeKind::Exponential,
            k,
            floor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::param(format!("floor {} outside [0, 1]", self.floor)));
        }
        if self.kind == SchemeKind::Exponential && !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::param(format!(
                "exponential k must be > 0, got {}",
                self.k
            )));
        }
        Ok(())
    }

    pub fn weight(&self, mean_fitness: f64) -> f64 {
        let w = match self.kind {
            SchemeKind::Constant => 1.0,
            SchemeKind::Linear => 1.0 - mean_fitness,
            SchemeKind::Exponential => (-self.k * mean_fitness).exp(),
        };
        w.max(self.floor)
    }

    /// Whether every weight this scheme emits equals 1, making weighted
    /// mutation identical to plain mutation.
    pub fn is_uniform(&self) -> bool {
        self.kind == SchemeKind::Constant
    }
}

/// Per-node and per-output weights for the parent described by `cmap` and
/// `fitness`. Nodes that feed no task keep weight 1.
pub fn node_weights(
    cmap: &ContributionMap,
    fitness: &FitnessVector,
    scheme: &WeightScheme,
) -> Result<MutationWeights> {
    let lookup = |task: usize| {
        fitness
            .of_task(task)
            .ok_or_else(|| Error::param(format!("task {task} missing from fitness vector")))
    };
    let nodes = cmap
        .node_tasks
        .iter()
        .map(|tasks| {
            if tasks.is_empty() {
                return Ok(1.0);
            }
            let mut sum = 0.0;
            for &t in tasks {
                sum += lookup(t)?;
            }
            Ok(scheme.weight(sum / tasks.len() as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let outputs = cmap
        .output_task
        .iter()
        .map(|&t| Ok(scheme.weight(lookup(t)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MutationWeights { nodes, outputs })
}
