use serde::Serialize;

use crate::genome::{decode, Genome};

/// Pairwise active-node overlap between output subcircuits. Entry `(s, t)`
/// counts nodes active for both outputs; the diagonal holds each output's
/// active-subcircuit size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl OverlapMatrix {
    pub fn size(&self) -> usize {
        self.counts.len()
    }

    /// Whitespace-aligned text rendering with row and column labels.
    pub fn to_text(&self, labels: &[String]) -> String {
        let width = labels.iter().map(|l| l.len()).max().unwrap_or(0).max(4);
        let mut s = format!("{:width$}", "");
        for l in labels {
            s.push_str(&format!(" {l:>width$}"));
        }
        s.push('\n');
        for (row, l) in self.counts.iter().zip(labels) {
            s.push_str(&format!("{l:width$}"));
            for c in row {
                s.push_str(&format!(" {c:>width$}"));
            }
            s.push('\n');
        }
        s
    }
}

pub fn overlap(genome: &Genome) -> OverlapMatrix {
    let active = decode(genome);
    let n = genome.n_nodes();
    let members: Vec<Vec<bool>> = active
        .per_output
        .iter()
        .map(|nodes| {
            let mut m = vec![false; n];
            nodes.iter().for_each(|&i| m[i] = true);
            m
        })
        .collect();
    let counts = members
        .iter()
        .map(|a| {
            members
                .iter()
                .map(|b| a.iter().zip(b).filter(|(x, y)| **x && **y).count())
                .collect()
        })
        .collect();
    OverlapMatrix { counts }
}
