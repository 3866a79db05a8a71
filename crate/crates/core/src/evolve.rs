//! The (1+λ) evolution strategy with neutral drift.
//!
//! Effort is measured in node-evaluations: every evaluated individual adds
//! its genome's full node count, active or not. The initial parent counts as
//! one evaluated individual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contribution::{node_weights, ContributionMap, WeightScheme};
use crate::error::{Error, Result};
use crate::genome::{decode, mutate_into, random_genome, Genome, GenomeParams, MutationWeights};
use crate::tasks::{Evaluator, FitnessMode, FitnessVector, TaskSuite};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsConfig {
    pub lambda: usize,
    pub base_rate: f64,
    pub scheme: WeightScheme,
    /// Maximum node-evaluations, checked at generation boundaries.
    pub budget: u64,
    pub genome_params: GenomeParams,
    pub seed: u64,
    pub fitness_mode: FitnessMode,
    /// Apply the weighting scheme to output genes too. When false, output
    /// genes always mutate at `base_rate`.
    pub weight_outputs: bool,
}

impl EsConfig {
    /// A (1+4) configuration with constant weighting.
    pub fn new(genome_params: GenomeParams, base_rate: f64, budget: u64, seed: u64) -> Self {
        EsConfig {
            lambda: 4,
            base_rate,
            scheme: WeightScheme::constant(),
            budget,
            genome_params,
            seed,
            fitness_mode: FitnessMode::FractionCorrect,
            weight_outputs: true,
        }
    }

    pub fn with_scheme(mut self, scheme: WeightScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda == 0 {
            return Err(Error::param("lambda must be at least 1"));
        }
        if self.budget == 0 {
            return Err(Error::param("budget must be positive"));
        }
        if !(self.base_rate > 0.0 && self.base_rate <= 1.0) {
            return Err(Error::param(format!(
                "base_rate {} outside (0, 1]",
                self.base_rate
            )));
        }
        self.scheme.validate()?;
        self.genome_params.validate()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffortCounter {
    pub node_evals: u64,
    pub individuals: u64,
}

impl EffortCounter {
    pub fn record(&mut self, n_nodes: usize) {
        self.individuals += 1;
        self.node_evals += n_nodes as u64;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub success: bool,
    pub node_evals: u64,
    pub individuals: u64,
    pub generations: u64,
    pub final_fitness: FitnessVector,
    pub final_genome: Genome,
    /// Active nodes in the final genome; a secondary size statistic.
    pub active_nodes: usize,
    pub seed: u64,
}

/// Runs the strategy with a generator seeded from `config.seed`.
pub fn run(config: &EsConfig, suite: &TaskSuite, assignment: &[usize]) -> Result<RunResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run_with_rng(config, suite, assignment, &mut rng)
}

pub fn run_with_rng<R: Rng + ?Sized>(
    config: &EsConfig,
    suite: &TaskSuite,
    assignment: &[usize],
    rng: &mut R,
) -> Result<RunResult> {
    run_observed(config, suite, assignment, rng, |_| {})
}

/// Summary of one completed generation, passed to observers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationReport {
    pub generation: u64,
    pub parent_scalar: f64,
    pub best_child_scalar: f64,
    pub replaced: bool,
    pub node_evals: u64,
}

/// [`run_with_rng`] with a callback after every generation.
pub fn run_observed<R: Rng + ?Sized>(
    config: &EsConfig,
    suite: &TaskSuite,
    assignment: &[usize],
    rng: &mut R,
    mut observer: impl FnMut(&GenerationReport),
) -> Result<RunResult> {
    config.validate()?;
    let params = config.genome_params;
    if assignment.len() != params.n_outputs {
        return Err(Error::param(format!(
            "assignment has {} entries for {} outputs",
            assignment.len(),
            params.n_outputs
        )));
    }

    let mut parent = random_genome(params, rng)?;
    let mut eval = Evaluator::new(&parent, suite, assignment, config.fitness_mode)?;
    let mut parent_fit = eval.evaluate(&parent);
    let mut effort = EffortCounter::default();
    effort.record(params.n_nodes);

    let mut weights = MutationWeights::uniform(&params, 1.0);
    let mut weights_stale = true;
    let mut generations = 0u64;
    // Offspring buffers, reused across generations.
    let mut child = parent.clone();
    let mut child_fit = parent_fit.clone();
    let mut best = parent.clone();
    let mut best_fit = parent_fit.clone();

    while !parent_fit.perfect() && effort.node_evals < config.budget {
        if weights_stale && !config.scheme.is_uniform() {
            weights = parent_weights(&parent, &parent_fit, assignment, config)?;
        }
        weights_stale = false;

        let mut ties = 0u32;
        for _ in 0..config.lambda {
            mutate_into(&parent, &mut child, config.base_rate, &weights, rng);
            eval.evaluate_into(&child, &mut child_fit);
            effort.record(params.n_nodes);
            let replace = if ties == 0 || child_fit.scalar > best_fit.scalar {
                ties = 1;
                true
            } else if child_fit.scalar == best_fit.scalar {
                // reservoir sampling keeps each tied child with equal probability
                ties += 1;
                rng.gen_range(0..ties) == 0
            } else {
                false
            };
            if replace {
                std::mem::swap(&mut best, &mut child);
                std::mem::swap(&mut best_fit, &mut child_fit);
            }
        }
        generations += 1;

        let replaced = best_fit.scalar >= parent_fit.scalar;
        observer(&GenerationReport {
            generation: generations,
            parent_scalar: parent_fit.scalar,
            best_child_scalar: best_fit.scalar,
            replaced,
            node_evals: effort.node_evals,
        });
        if replaced {
            if best != parent {
                weights_stale = true;
            }
            std::mem::swap(&mut parent, &mut best);
            std::mem::swap(&mut parent_fit, &mut best_fit);
        }
    }

    Ok(RunResult {
        success: parent_fit.perfect(),
        node_evals: effort.node_evals,
        individuals: effort.individuals,
        generations,
        active_nodes: decode(&parent).all_active.len(),
        final_fitness: parent_fit,
        final_genome: parent,
        seed: config.seed,
    })
}

/// Mutation weights for the offspring of `parent`, derived from its own
/// fitness vector.
pub fn parent_weights(
    parent: &Genome,
    fitness: &FitnessVector,
    assignment: &[usize],
    config: &EsConfig,
) -> Result<MutationWeights> {
    let cmap = ContributionMap::from_active(&decode(parent), parent.n_nodes(), assignment)?;
    let mut w = node_weights(&cmap, fitness, &config.scheme)?;
    if !config.weight_outputs {
        w.outputs.iter_mut().for_each(|x| *x = 1.0);
    }
    Ok(w)
}

/// Outcome of solving every task of a suite with separate single-output runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub runs: Vec<RunResult>,
    pub total_effort: u64,
    pub total_generations: u64,
    pub success: bool,
}

/// Runs the single-task strategy once per task, in suite order. Task `t`
/// uses the seed `derive_seed(config.seed, t)`. Every task is attempted even
/// after a failure so the total effort is always reported.
pub fn run_single_task_suite(config: &EsConfig, suite: &TaskSuite) -> Result<SuiteResult> {
    if config.genome_params.n_outputs != 1 {
        return Err(Error::param(format!(
            "single-task runs need 1 output, config has {}",
            config.genome_params.n_outputs
        )));
    }
    let runs = (0..suite.len())
        .map(|t| {
            let cfg = EsConfig {
                seed: derive_seed(config.seed, &[t as u64]),
                ..config.clone()
            };
            run(&cfg, suite, &[t])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteResult {
        total_effort: runs.iter().map(|r| r.node_evals).sum(),
        total_generations: runs.iter().map(|r| r.generations).sum(),
        success: runs.iter().all(|r| r.success),
        runs,
    })
}

/// One run of a genome carrying an output per task, in suite order.
pub fn run_multibehavior(config: &EsConfig, suite: &TaskSuite) -> Result<RunResult> {
    if config.genome_params.n_outputs != suite.len() {
        return Err(Error::param(format!(
            "multi-behavior runs need {} outputs, config has {}",
            suite.len(),
            config.genome_params.n_outputs
        )));
    }
    run(config, suite, &suite.full_assignment())
}

/// Mixes a base seed with a sequence of stream identifiers (SplitMix64
/// finalizer per word). Stable across platforms and releases.
pub fn derive_seed(base: u64, stream: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    stream
        .iter()
        .fold(mix(base), |acc, &s| mix(acc ^ mix(s.wrapping_add(1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{mutate, MutationWeights};
    use crate::tasks::fitness;

    fn suite() -> TaskSuite {
        TaskSuite::canonical()
    }

    #[test]
    fn perfect_initial_parent_terminates_immediately() {
        // n_nodes = 1 on NAND: about 1 in 6 random genomes are already correct.
        let s = suite();
        let nand = s.index_of("NAND").unwrap();
        let params = GenomeParams::new(2, 1, 1);
        let hit = (0..100u64)
            .map(|seed| run(&EsConfig::new(params, 0.1, 1_000, seed), &s, &[nand]).unwrap())
            .find(|r| r.generations == 0 && r.success)
            .expect("some seed starts perfect");
        assert_eq!(hit.node_evals, 1);
        assert_eq!(hit.individuals, 1);
    }

    #[test]
    fn budget_of_one_evaluation() {
        let s = suite();
        let xor = s.index_of("XOR").unwrap();
        let params = GenomeParams::new(2, 20, 1);
        // XOR needs four gates, so a random parent is rarely perfect; find one
        // that is not.
        let r = (0..100u64)
            .map(|seed| run(&EsConfig::new(params, 0.1, 20, seed), &s, &[xor]).unwrap())
            .find(|r| !r.final_fitness.perfect())
            .unwrap();
        assert!(!r.success);
        assert_eq!(r.node_evals, 20);
        assert_eq!(r.generations, 0);
    }

    #[test]
    fn effort_is_exact_at_generation_boundaries() {
        let s = suite();
        let params = GenomeParams::new(2, 20, 9);
        for seed in 0..20 {
            let mut cfg = EsConfig::new(params, 0.05, 20_000, seed);
            cfg.budget = 820;
            let r = run(&cfg, &s, &s.full_assignment()).unwrap();
            assert_eq!(r.node_evals, (1 + 4 * r.generations) * 20);
            if !r.success {
                assert_eq!(r.generations, 10);
                assert_eq!(r.node_evals, 820);
            }
        }
    }

    #[test]
    fn overshoot_is_bounded() {
        let s = suite();
        let params = GenomeParams::new(2, 7, 9);
        let mut cfg = EsConfig::new(params, 0.1, 100, 3);
        cfg.lambda = 5;
        let r = run(&cfg, &s, &s.full_assignment()).unwrap();
        assert!(!r.success);
        assert!(r.node_evals >= 100 && r.node_evals < 100 + 5 * 7);
    }

    #[test]
    fn replay_is_identical() {
        let s = suite();
        let cfg = EsConfig::new(GenomeParams::new(2, 30, 9), 0.05, 200_000, 42)
            .with_scheme(WeightScheme::exponential(2.0, 0.0));
        assert_eq!(
            run_multibehavior(&cfg, &s).unwrap(),
            run_multibehavior(&cfg, &s).unwrap()
        );
    }

    #[test]
    fn final_genome_reevaluates_to_recorded_fitness() {
        let s = suite();
        let cfg = EsConfig::new(GenomeParams::new(2, 30, 9), 0.05, 100_000, 7);
        let r = run_multibehavior(&cfg, &s).unwrap();
        assert_eq!(
            fitness(&r.final_genome, &s, &s.full_assignment()).unwrap(),
            r.final_fitness
        );
        if r.success {
            assert!(r.final_fitness.perfect());
        }
    }

    #[test]
    fn single_task_suite_sums_efforts() {
        let s = suite();
        let cfg = EsConfig::new(GenomeParams::new(2, 15, 1), 0.1, 2_000_000, 5);
        let res = run_single_task_suite(&cfg, &s).unwrap();
        assert_eq!(res.runs.len(), 9);
        assert_eq!(
            res.total_effort,
            res.runs.iter().map(|r| r.node_evals).sum::<u64>()
        );
        assert_eq!(res.success, res.runs.iter().all(|r| r.success));
        assert!(res.success);
        for (t, r) in res.runs.iter().enumerate() {
            assert_eq!(r.final_fitness.tasks, vec![t]);
            assert_eq!(r.seed, derive_seed(5, &[t as u64]));
        }
    }

    #[test]
    fn single_task_failure_still_reports_total() {
        let s = suite();
        let cfg = EsConfig::new(GenomeParams::new(2, 10, 1), 0.1, 10, 9);
        let res = run_single_task_suite(&cfg, &s).unwrap();
        assert!(!res.success);
        assert_eq!(
            res.total_effort,
            res.runs.iter().map(|r| r.node_evals).sum::<u64>()
        );
        assert!(res.total_effort >= 10);
    }

    #[test]
    fn output_count_mismatches() {
        let s = suite();
        let multi = EsConfig::new(GenomeParams::new(2, 10, 9), 0.1, 1_000, 0);
        let single = EsConfig::new(GenomeParams::new(2, 10, 1), 0.1, 1_000, 0);
        assert!(run_single_task_suite(&multi, &s).is_err());
        assert!(run_multibehavior(&single, &s).is_err());
        assert!(run(&multi, &s, &[0, 1]).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let s = suite();
        let base = EsConfig::new(GenomeParams::new(2, 10, 9), 0.1, 1_000, 0);
        for bad in [
            EsConfig {
                lambda: 0,
                ..base.clone()
            },
            EsConfig {
                budget: 0,
                ..base.clone()
            },
            EsConfig {
                base_rate: 0.0,
                ..base.clone()
            },
            EsConfig {
                base_rate: 1.5,
                ..base.clone()
            },
        ] {
            assert!(matches!(run_multibehavior(&bad, &s), Err(Error::Param(_))));
        }
    }

    #[test]
    fn linear_freeze_after_success() {
        // Once every task is solved, linear weighting with floor 0 assigns
        // zero weight to every active gene, so mutation cannot alter the
        // solved circuit.
        let s = suite();
        let cfg = EsConfig::new(GenomeParams::new(2, 40, 9), 0.05, 20_000_000, 11)
            .with_scheme(WeightScheme::linear(0.0));
        let r = run_multibehavior(&cfg, &s).unwrap();
        assert!(r.success);
        let assignment = s.full_assignment();
        let w = parent_weights(&r.final_genome, &r.final_fitness, &assignment, &cfg).unwrap();
        let active = decode(&r.final_genome);
        for (n, &x) in w.nodes.iter().enumerate() {
            assert_eq!(x, if active.is_active(n) { 0.0 } else { 1.0 });
        }
        assert!(w.outputs.iter().all(|&x| x == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let child = mutate(&r.final_genome, 1.0, &w, &mut rng).unwrap();
            assert_eq!(child.output_genes, r.final_genome.output_genes);
            for &n in &active.all_active {
                assert_eq!(child.node_genes[n], r.final_genome.node_genes[n]);
            }
            assert!(fitness(&child, &s, &assignment).unwrap().perfect());
        }
    }

    #[test]
    fn uniform_weights_for_constant_scheme() {
        let s = suite();
        let cfg = EsConfig::new(GenomeParams::new(2, 10, 9), 0.1, 1_000, 0);
        let g = random_genome(cfg.genome_params, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let f = fitness(&g, &s, &s.full_assignment()).unwrap();
        let w = parent_weights(&g, &f, &s.full_assignment(), &cfg).unwrap();
        assert_eq!(w, MutationWeights::uniform(&cfg.genome_params, 1.0));
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, &[0, 0]);
        assert_ne!(a, derive_seed(1, &[0, 1]));
        assert_ne!(a, derive_seed(1, &[1, 0]));
        assert_ne!(a, derive_seed(2, &[0, 0]));
        assert_eq!(a, derive_seed(1, &[0, 0]));
    }
}
