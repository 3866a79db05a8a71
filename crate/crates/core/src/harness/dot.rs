//! Graphviz rendering of evolved circuits.
//!
//! Gates are filled with the colour of the task they feed. A gate shared by
//! several tasks is striped with all of their colours.

use std::fmt::Write as _;

use crate::contribution::ContributionMap;
use crate::genome::{decode, Genome};
use crate::tasks::{FitnessVector, TaskSuite};

const PALETTE: [&str; 12] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#ffff33", "#a65628", "#f781bf",
    "#66c2a5", "#8da0cb", "#e78ac3", "#a6d854",
];
const INACTIVE: &str = "#d9d9d9";

#[derive(Clone, Copy, Debug, Default)]
pub struct DotOptions {
    /// Also draw nodes that feed no output.
    pub include_inactive: bool,
}

fn task_color(task: usize) -> &'static str {
    PALETTE[task % PALETTE.len()]
}

/// Renders `genome` as a `digraph`. `fitness.tasks` gives the task of each
/// output, and its values label the output taps.
pub fn export_dot(
    genome: &Genome,
    suite: &TaskSuite,
    fitness: &FitnessVector,
    options: DotOptions,
) -> String {
    let active = decode(genome);
    let cmap = ContributionMap::from_active(&active, genome.n_nodes(), &fitness.tasks)
        .expect("fitness vector covers every output");
    let task_name = |t: usize| {
        suite
            .get(t)
            .map(|x| x.name.clone())
            .unwrap_or_else(|| format!("task{t}"))
    };
    let n_inputs = genome.params.n_inputs;
    let wire = |terminal: usize| match genome.node_of(terminal) {
        Some(n) => format!("n{n}"),
        None => format!("i{terminal}"),
    };

    let mut s = String::new();
    s.push_str("digraph circuit {\n");
    s.push_str("  rankdir=TB;\n");
    s.push_str("  node [fontname=\"Helvetica\"];\n");
    for i in 0..n_inputs {
        writeln!(s, "  i{i} [label=\"I{i}\", shape=plaintext];").unwrap();
    }
    for (n, tasks) in cmap.node_tasks.iter().enumerate() {
        let is_active = !tasks.is_empty();
        if !is_active && !options.include_inactive {
            continue;
        }
        let names: Vec<String> = tasks.iter().map(|&t| task_name(t)).collect();
        let (style, fill) = match tasks.as_slice() {
            [] => ("filled,dashed".to_string(), INACTIVE.to_string()),
            [t] => ("filled".to_string(), task_color(*t).to_string()),
            many => (
                "striped".to_string(),
                many.iter()
                    .map(|&t| task_color(t))
                    .collect::<Vec<_>>()
                    .join(":"),
            ),
        };
        let tag = if is_active {
            names.join(",")
        } else {
            "inactive".to_string()
        };
        writeln!(
            s,
            "  n{n} [label=\"n{n} NAND\\n{tag}\", shape=box, style=\"{style}\", fillcolor=\"{fill}\"];"
        )
        .unwrap();
    }
    for (j, &t) in fitness.tasks.iter().enumerate() {
        writeln!(
            s,
            "  o{j} [label=\"{} {:.2}\", shape=invhouse, color=\"{}\", penwidth=2];",
            task_name(t),
            fitness.per_task[j],
            task_color(t)
        )
        .unwrap();
    }
    for (n, pair) in genome.node_genes.iter().enumerate() {
        if !active.is_active(n) && !options.include_inactive {
            continue;
        }
        for &c in pair {
            writeln!(s, "  {} -> n{n};", wire(c)).unwrap();
        }
    }
    for (j, &o) in genome.output_genes.iter().enumerate() {
        writeln!(s, "  {} -> o{j};", wire(o)).unwrap();
    }
    s.push_str("}\n");
    s
}
