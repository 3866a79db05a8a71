//! Effort distributions and ratios.
//!
//! Quantiles use linear interpolation between order statistics (position
//! `p * (n - 1)`), the same rule as NumPy's default and R's type 7. Failed
//! runs enter the statistics at their terminal effort, which is never below
//! the budget.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::Algorithm;
use super::records::ResultRecord;
use crate::error::{Error, Result};

/// Linearly interpolated quantile of ascending `sorted` data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub cell_id: String,
    pub n: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn from_efforts(
        algorithm: Algorithm,
        cell_id: impl Into<String>,
        efforts: &[u64],
        successes: usize,
    ) -> Result<Self> {
        if efforts.is_empty() {
            return Err(Error::config(format!("no records for {algorithm}")));
        }
        let mut v: Vec<f64> = efforts.iter().map(|&e| e as f64).collect();
        v.sort_by(f64::total_cmp);
        Ok(Summary {
            algorithm,
            cell_id: cell_id.into(),
            n: v.len(),
            successes,
            success_rate: successes as f64 / v.len() as f64,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

/// Groups records by (algorithm, cell) and summarizes each group. Groups
/// come out ordered by algorithm, then by first appearance of the cell.
pub fn summarize(records: &[ResultRecord]) -> Result<Vec<Summary>> {
    if records.is_empty() {
        return Err(Error::config("no records to summarize"));
    }
    let mut keys: Vec<(Algorithm, &str)> = Vec::new();
    for r in records {
        let key = (r.algorithm, r.cell_id.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.sort_by_key(|k| k.0);
    keys.into_iter()
        .map(|(alg, cell)| {
            let group: Vec<&ResultRecord> = records
                .iter()
                .filter(|r| r.algorithm == alg && r.cell_id == cell)
                .collect();
            let efforts: Vec<u64> = group.iter().map(|r| r.node_evals).collect();
            let successes = group.iter().filter(|r| r.success).count();
            Summary::from_efforts(alg, cell, &efforts, successes)
        })
        .collect()
}

/// `median(numerator) / median(denominator)` for every ordered pair of
/// summaries with distinct algorithms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MedianRatio {
    pub numerator: Algorithm,
    pub denominator: Algorithm,
    pub ratio: f64,
}

pub fn median_ratios(summaries: &[Summary]) -> Vec<MedianRatio> {
    let mut out = Vec::new();
    for a in summaries {
        for b in summaries {
            if a.algorithm != b.algorithm {
                out.push(MedianRatio {
                    numerator: a.algorithm,
                    denominator: b.algorithm,
                    ratio: a.median / b.median,
                });
            }
        }
    }
    out
}

/// Plain-text table of summaries followed by the ratios of the single-task
/// median to each multi-behavior median.
pub fn format_table(summaries: &[Summary]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:<18} {:<22} {:>5} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>14}",
        "algorithm", "cell", "n", "success", "min", "q1", "median", "q3", "max", "mean"
    )
    .unwrap();
    for x in summaries {
        writeln!(
            s,
            "{:<18} {:<22} {:>5} {:>8.3} {:>12.0} {:>12.1} {:>12.1} {:>12.1} {:>12.0} {:>14.1}",
            x.algorithm.id(),
            x.cell_id,
            x.n,
            x.success_rate,
            x.min,
            x.q1,
            x.median,
            x.q3,
            x.max,
            x.mean
        )
        .unwrap();
    }
    let one_cell_each = summaries
        .iter()
        .enumerate()
        .all(|(i, a)| summaries[..i].iter().all(|b| b.algorithm != a.algorithm));
    if one_cell_each {
        let ratios: Vec<MedianRatio> = median_ratios(summaries)
            .into_iter()
            .filter(|r| r.numerator == Algorithm::SingleTask)
            .collect();
        if !ratios.is_empty() {
            writeln!(s).unwrap();
            for r in ratios {
                writeln!(
                    s,
                    "median({}) / median({}) = {:.4}",
                    r.numerator, r.denominator, r.ratio
                )
                .unwrap();
            }
        }
    }
    s
}
