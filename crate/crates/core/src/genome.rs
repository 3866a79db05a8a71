//! Single-row Cartesian GP genomes over the NAND primitive.
//!
//! Terminal indices address the circuit's wires: `0..n_inputs` are the input
//! terminals and `n_inputs + j` is the output of node `j`. Every node is a
//! two-input NAND, so no function genes are stored. A genome is laid out as
//! `n_nodes` connection pairs followed by `n_outputs` output taps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenomeParams {
    pub n_inputs: usize,
    pub n_nodes: usize,
    pub n_outputs: usize,
    /// How far back a connection may reach. `None` means unlimited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels_back: Option<usize>,
}

impl GenomeParams {
    pub fn new(n_inputs: usize, n_nodes: usize, n_outputs: usize) -> Self {
        GenomeParams {
            n_inputs,
            n_nodes,
            n_outputs,
            levels_back: None,
        }
    }

    pub fn with_levels_back(mut self, levels_back: usize) -> Self {
        self.levels_back = Some(levels_back);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_inputs == 0 {
            return Err(Error::param("n_inputs must be at least 1"));
        }
        if self.n_nodes == 0 {
            return Err(Error::param("n_nodes must be at least 1"));
        }
        if self.n_outputs == 0 {
            return Err(Error::param("n_outputs must be at least 1"));
        }
        if self.levels_back == Some(0) {
            return Err(Error::param("levels_back must be at least 1"));
        }
        Ok(())
    }

    /// Number of addressable wires: inputs plus node outputs.
    pub fn n_terminals(&self) -> usize {
        self.n_inputs + self.n_nodes
    }

    /// Half-open range of legal connection targets for node `node`.
    pub fn connection_range(&self, node: usize) -> std::ops::Range<usize> {
        let hi = self.n_inputs + node;
        let lo = match self.levels_back {
            Some(lb) => hi.saturating_sub(lb),
            None => 0,
        };
        lo..hi
    }

    /// Half-open range of legal output taps.
    pub fn output_range(&self) -> std::ops::Range<usize> {
        0..self.n_terminals()
    }

    /// Total gene count: two connections per node plus one per output.
    pub fn n_genes(&self) -> usize {
        2 * self.n_nodes + self.n_outputs
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genome {
    pub params: GenomeParams,
    pub node_genes: Vec<[usize; 2]>,
    pub output_genes: Vec<usize>,
}

impl Genome {
    /// Builds a genome from explicit genes, rejecting anything that violates
    /// the feed-forward or range invariants.
    pub fn from_parts(
        params: GenomeParams,
        node_genes: Vec<[usize; 2]>,
        output_genes: Vec<usize>,
    ) -> Result<Self> {
        let genome = Genome {
            params,
            node_genes,
            output_genes,
        };
        genome.validate()?;
        Ok(genome)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        p.validate()?;
        if self.node_genes.len() != p.n_nodes {
            return Err(Error::param(format!(
                "expected {} node gene pairs, found {}",
                p.n_nodes,
                self.node_genes.len()
            )));
        }
        if self.output_genes.len() != p.n_outputs {
            return Err(Error::param(format!(
                "expected {} output genes, found {}",
                p.n_outputs,
                self.output_genes.len()
            )));
        }
        for (i, pair) in self.node_genes.iter().enumerate() {
            let range = p.connection_range(i);
            for &c in pair {
                if !range.contains(&c) {
                    return Err(Error::param(format!(
                        "node {i} connection {c} outside legal range {range:?}"
                    )));
                }
            }
        }
        for (j, &o) in self.output_genes.iter().enumerate() {
            if o >= p.n_terminals() {
                return Err(Error::param(format!(
                    "output {j} taps {o}, beyond {} terminals",
                    p.n_terminals()
                )));
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.params.n_nodes
    }

    pub fn n_outputs(&self) -> usize {
        self.params.n_outputs
    }

    /// Maps a terminal index to a node index, or `None` for input terminals.
    pub fn node_of(&self, terminal: usize) -> Option<usize> {
        terminal.checked_sub(self.params.n_inputs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("genome serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let genome: Genome =
            serde_json::from_str(text).map_err(|e| Error::param(format!("genome: {e}")))?;
        genome.validate()?;
        Ok(genome)
    }
}

/// Nodes reachable backwards from each output tap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveSet {
    /// Ascending node indices per output.
    pub per_output: Vec<Vec<usize>>,
    /// Ascending union of `per_output`.
    pub all_active: Vec<usize>,
}

impl ActiveSet {
    pub fn is_active(&self, node: usize) -> bool {
        self.all_active.binary_search(&node).is_ok()
    }
}

pub fn random_genome<R: Rng + ?Sized>(params: GenomeParams, rng: &mut R) -> Result<Genome> {
    params.validate()?;
    let node_genes = (0..params.n_nodes)
        .map(|i| {
            let range = params.connection_range(i);
            [rng.gen_range(range.clone()), rng.gen_range(range)]
        })
        .collect();
    let output_genes = (0..params.n_outputs)
        .map(|_| rng.gen_range(params.output_range()))
        .collect();
    Ok(Genome {
        params,
        node_genes,
        output_genes,
    })
}

/// Per-output backward reachability. Because connections only point to
/// earlier wires, one descending sweep over the nodes closes each set.
pub fn decode(genome: &Genome) -> ActiveSet {
    let n_nodes = genome.n_nodes();
    let mut marked = vec![false; n_nodes];
    let mut union = vec![false; n_nodes];
    let mut per_output = Vec::with_capacity(genome.n_outputs());

    for &tap in &genome.output_genes {
        marked.iter_mut().for_each(|m| *m = false);
        let Some(top) = genome.node_of(tap) else {
            per_output.push(Vec::new());
            continue;
        };
        marked[top] = true;
        for node in (0..=top).rev() {
            if !marked[node] {
                continue;
            }
            for &c in &genome.node_genes[node] {
                if let Some(src) = genome.node_of(c) {
                    marked[src] = true;
                }
            }
        }
        let active: Vec<usize> = (0..=top).filter(|&n| marked[n]).collect();
        for &n in &active {
            union[n] = true;
        }
        per_output.push(active);
    }

    ActiveSet {
        per_output,
        all_active: (0..n_nodes).filter(|&n| union[n]).collect(),
    }
}

/// Relative mutation weights, one per node (applied to both of its
/// connection genes) and one per output gene. Each entry lies in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MutationWeights {
    pub nodes: Vec<f64>,
    pub outputs: Vec<f64>,
}

impl MutationWeights {
    pub fn uniform(params: &GenomeParams, w: f64) -> Self {
        MutationWeights {
            nodes: vec![w; params.n_nodes],
            outputs: vec![w; params.n_outputs],
        }
    }

    fn validate_for(&self, params: &GenomeParams) -> Result<()> {
        if self.nodes.len() != params.n_nodes || self.outputs.len() != params.n_outputs {
            return Err(Error::param(format!(
                "weight vector shape ({}, {}) does not match genome ({}, {})",
                self.nodes.len(),
                self.outputs.len(),
                params.n_nodes,
                params.n_outputs
            )));
        }
        if let Some(w) = self
            .nodes
            .iter()
            .chain(&self.outputs)
            .find(|w| !(0.0..=1.0).contains(*w))
        {
            return Err(Error::param(format!("weight {w} outside [0, 1]")));
        }
        Ok(())
    }
}

/// Identifies a single gene within a genome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Locus {
    Connection { node: usize, slot: usize },
    Output(usize),
}

impl Locus {
    /// Flat position in the genome layout.
    pub fn position(&self, params: &GenomeParams) -> usize {
        match *self {
            Locus::Connection { node, slot } => 2 * node + slot,
            Locus::Output(j) => 2 * params.n_nodes + j,
        }
    }
}

/// Returns a mutated copy of `genome`. Each connection gene of node `i` is
/// redrawn uniformly from its legal range with probability
/// `base_rate * weights.nodes[i]`, and each output gene `j` with probability
/// `base_rate * weights.outputs[j]`. A redraw may land on the current value.
pub fn mutate<R: Rng + ?Sized>(
    genome: &Genome,
    base_rate: f64,
    weights: &MutationWeights,
    rng: &mut R,
) -> Result<Genome> {
    mutate_with(genome, base_rate, weights, rng, |_| {})
}

/// Like [`mutate`], also reporting every resampled locus.
pub fn mutate_traced<R: Rng + ?Sized>(
    genome: &Genome,
    base_rate: f64,
    weights: &MutationWeights,
    rng: &mut R,
) -> Result<(Genome, Vec<Locus>)> {
    let mut loci = Vec::new();
    let child = mutate_with(genome, base_rate, weights, rng, |l| loci.push(l))?;
    Ok((child, loci))
}

fn mutate_with<R: Rng + ?Sized>(
    genome: &Genome,
    base_rate: f64,
    weights: &MutationWeights,
    rng: &mut R,
    on_resample: impl FnMut(Locus),
) -> Result<Genome> {
    if !(0.0..=1.0).contains(&base_rate) {
        return Err(Error::param(format!(
            "base_rate {base_rate} outside [0, 1]"
        )));
    }
    weights.validate_for(&genome.params)?;
    let mut child = genome.clone();
    resample(&mut child, base_rate, weights, rng, on_resample);
    Ok(child)
}

/// [`mutate`] into an existing buffer, skipping argument checks. The caller
/// guarantees a valid rate and weights shaped for `genome`.
pub(crate) fn mutate_into<R: Rng + ?Sized>(
    genome: &Genome,
    child: &mut Genome,
    base_rate: f64,
    weights: &MutationWeights,
    rng: &mut R,
) {
    child.clone_from(genome);
    resample(child, base_rate, weights, rng, |_| {});
}

fn resample<R: Rng + ?Sized>(
    child: &mut Genome,
    base_rate: f64,
    weights: &MutationWeights,
    rng: &mut R,
    mut on_resample: impl FnMut(Locus),
) {
    let params = child.params;
    for (node, pair) in child.node_genes.iter_mut().enumerate() {
        let p = base_rate * weights.nodes[node];
        if p <= 0.0 {
            continue;
        }
        for (slot, gene) in pair.iter_mut().enumerate() {
            if rng.gen::<f64>() < p {
                *gene = rng.gen_range(params.connection_range(node));
                on_resample(Locus::Connection { node, slot });
            }
        }
    }
    for (j, gene) in child.output_genes.iter_mut().enumerate() {
        let p = base_rate * weights.outputs[j];
        if p > 0.0 && rng.gen::<f64>() < p {
            *gene = rng.gen_range(params.output_range());
            on_resample(Locus::Output(j));
        }
    }
}
