//! Two-input logic tasks and bit-parallel fitness evaluation.
//!
//! A 4-bit mask holds one output per input row. Rows are ordered
//! (a,b) = (0,0), (0,1), (1,0), (1,1) and written left to right, so row (0,0)
//! is the most significant bit: `0b1110` is NAND.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::Genome;

pub const ROW_MASK: u8 = 0b1111;
/// Wire values of input `a` across the four rows.
pub const INPUT_A: u8 = 0b0011;
/// Wire values of input `b` across the four rows.
pub const INPUT_B: u8 = 0b0101;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    pub name: String,
    pub expected: u8,
}

impl TruthTable {
    pub fn new(name: impl Into<String>, expected: u8) -> Result<Self> {
        if expected > ROW_MASK {
            return Err(Error::param(format!("mask {expected} exceeds 4 bits")));
        }
        Ok(TruthTable {
            name: name.into(),
            expected,
        })
    }

    /// Expected output for input row `(a, b)`.
    pub fn row(&self, a: bool, b: bool) -> bool {
        let row = 2 * a as u8 + b as u8;
        self.expected >> (3 - row) & 1 == 1
    }

    pub fn mask_string(&self) -> String {
        format!("{:04b}", self.expected)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSuite {
    tasks: Vec<TruthTable>,
}

const CANONICAL: [(&str, u8); 9] = [
    ("AND", 0b0001),
    ("AND_N", 0b0010),
    ("EQU", 0b1001),
    ("NAND", 0b1110),
    ("NOR", 0b1000),
    ("NOT", 0b1100),
    ("OR", 0b0111),
    ("OR_N", 0b1011),
    ("XOR", 0b0110),
];

impl TaskSuite {
    pub fn new(tasks: Vec<TruthTable>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::param("task suite is empty"));
        }
        for (i, t) in tasks.iter().enumerate() {
            if t.expected > ROW_MASK {
                return Err(Error::param(format!("task {} mask exceeds 4 bits", t.name)));
            }
            if tasks[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::param(format!("duplicate task name {}", t.name)));
            }
        }
        Ok(TaskSuite { tasks })
    }

    /// The nine elementary logic tasks, in alphabetical order. NOT negates
    /// `a`; AND_N is a ∧ ¬b and OR_N is a ∨ ¬b.
    pub fn canonical() -> Self {
        TaskSuite {
            tasks: CANONICAL
                .iter()
                .map(|&(name, expected)| TruthTable {
                    name: name.to_string(),
                    expected,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[TruthTable] {
        &self.tasks
    }

    pub fn get(&self, index: usize) -> Option<&TruthTable> {
        self.tasks.get(index)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.name == name)
    }

    /// The identity assignment: output `i` solves task `i`.
    pub fn full_assignment(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    /// Parses a suite file of the form
    ///
    /// ```toml
    /// [[task]]
    /// name = "MAJ"
    /// mask = "0111"
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Entry {
            name: String,
            mask: String,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct SuiteFile {
            task: Vec<Entry>,
        }
        let file: SuiteFile =
            toml::from_str(text).map_err(|e| Error::param(format!("suite file: {e}")))?;
        let tasks = file
            .task
            .into_iter()
            .map(|e| {
                let bits = e.mask.trim();
                if bits.len() != 4 || !bits.chars().all(|c| c == '0' || c == '1') {
                    return Err(Error::param(format!(
                        "task {}: mask must be four 0/1 digits, got {:?}",
                        e.name, e.mask
                    )));
                }
                TruthTable::new(e.name, u8::from_str_radix(bits, 2).expect("binary digits"))
            })
            .collect::<Result<Vec<_>>>()?;
        TaskSuite::new(tasks)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }
}

/// How the four rows of a task are turned into a fitness value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessMode {
    /// Fraction of rows matched: 0, 0.25, 0.5, 0.75 or 1.
    #[default]
    FractionCorrect,
    /// 1 if every row matches, else 0.
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    /// Task index for each entry of `per_task`, in assignment order.
    pub tasks: Vec<usize>,
    pub per_task: Vec<f64>,
    pub scalar: f64,
}

impl FitnessVector {
    pub fn perfect(&self) -> bool {
        self.per_task.iter().all(|&f| f == 1.0)
    }

    /// Fitness of task `task`, if it is covered by this vector.
    pub fn of_task(&self, task: usize) -> Option<f64> {
        self.tasks
            .iter()
            .position(|&t| t == task)
            .map(|i| self.per_task[i])
    }
}

/// Evaluates every output tap over all four input rows at once.
pub fn evaluate_outputs(genome: &Genome) -> Result<Vec<u8>> {
    let mut wires = Vec::new();
    eval_wires(genome, &mut wires)?;
    Ok(genome.output_genes.iter().map(|&o| wires[o]).collect())
}

/// Fills `wires` with the mask carried by every terminal. Reuses the buffer.
pub(crate) fn eval_wires(genome: &Genome, wires: &mut Vec<u8>) -> Result<()> {
    if genome.params.n_inputs != 2 {
        return Err(Error::param(format!(
            "logic tasks need exactly 2 inputs, genome has {}",
            genome.params.n_inputs
        )));
    }
    wires.clear();
    wires.reserve(genome.params.n_terminals());
    wires.push(INPUT_A);
    wires.push(INPUT_B);
    for &[a, b] in &genome.node_genes {
        let v = !(wires[a] & wires[b]) & ROW_MASK;
        wires.push(v);
    }
    Ok(())
}

fn check_assignment(genome: &Genome, suite: &TaskSuite, assignment: &[usize]) -> Result<()> {
    if assignment.len() != genome.n_outputs() {
        return Err(Error::param(format!(
            "assignment has {} entries for {} outputs",
            assignment.len(),
            genome.n_outputs()
        )));
    }
    for (i, &t) in assignment.iter().enumerate() {
        if t >= suite.len() {
            return Err(Error::param(format!("unknown task index {t}")));
        }
        if assignment[..i].contains(&t) {
            return Err(Error::param(format!("task {t} assigned twice")));
        }
    }
    Ok(())
}

/// Scores a single output mask against a task.
pub fn score(mask: u8, expected: u8, mode: FitnessMode) -> f64 {
    let matching = (!(mask ^ expected) & ROW_MASK).count_ones();
    match mode {
        FitnessMode::FractionCorrect => matching as f64 / 4.0,
        FitnessMode::Binary => (matching == 4) as u8 as f64,
    }
}

/// Fraction-correct fitness of each assigned output.
pub fn fitness(genome: &Genome, suite: &TaskSuite, assignment: &[usize]) -> Result<FitnessVector> {
    fitness_with(genome, suite, assignment, FitnessMode::FractionCorrect)
}

pub fn fitness_with(
    genome: &Genome,
    suite: &TaskSuite,
    assignment: &[usize],
    mode: FitnessMode,
) -> Result<FitnessVector> {
    check_assignment(genome, suite, assignment)?;
    let mut wires = Vec::new();
    eval_wires(genome, &mut wires)?;
    Ok(score_wires(genome, &wires, suite, assignment, mode))
}

pub(crate) fn score_wires(
    genome: &Genome,
    wires: &[u8],
    suite: &TaskSuite,
    assignment: &[usize],
    mode: FitnessMode,
) -> FitnessVector {
    let mut fv = FitnessVector {
        tasks: assignment.to_vec(),
        per_task: Vec::with_capacity(assignment.len()),
        scalar: 0.0,
    };
    score_wires_into(genome, wires, suite, mode, &mut fv);
    fv
}

/// Rescores `fv` in place; `fv.tasks` must already hold the assignment.
fn score_wires_into(
    genome: &Genome,
    wires: &[u8],
    suite: &TaskSuite,
    mode: FitnessMode,
    fv: &mut FitnessVector,
) {
    fv.per_task.clear();
    fv.per_task.extend(
        genome
            .output_genes
            .iter()
            .zip(&fv.tasks)
            .map(|(&o, &t)| score(wires[o], suite.tasks[t].expected, mode)),
    );
    fv.scalar = fv.per_task.iter().sum::<f64>() / fv.per_task.len() as f64;
}

/// Reusable evaluator that keeps its wire buffer between calls.
#[derive(Debug)]
pub(crate) struct Evaluator<'a> {
    suite: &'a TaskSuite,
    assignment: &'a [usize],
    mode: FitnessMode,
    wires: Vec<u8>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(
        genome: &Genome,
        suite: &'a TaskSuite,
        assignment: &'a [usize],
        mode: FitnessMode,
    ) -> Result<Self> {
        check_assignment(genome, suite, assignment)?;
        if genome.params.n_inputs != 2 {
            return Err(Error::param("logic tasks need exactly 2 inputs"));
        }
        Ok(Evaluator {
            suite,
            assignment,
            mode,
            wires: Vec::with_capacity(genome.params.n_terminals()),
        })
    }

    pub(crate) fn evaluate(&mut self, genome: &Genome) -> FitnessVector {
        eval_wires(genome, &mut self.wires).expect("checked in constructor");
        score_wires(genome, &self.wires, self.suite, self.assignment, self.mode)
    }

    /// Like `evaluate`, writing into a vector produced by an earlier call.
    pub(crate) fn evaluate_into(&mut self, genome: &Genome, fv: &mut FitnessVector) {
        eval_wires(genome, &mut self.wires).expect("checked in constructor");
        score_wires_into(genome, &self.wires, self.suite, self.mode, fv);
    }
}
