//! The results file: one delimited row per (algorithm, cell, replicate).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Algorithm;
use crate::error::{Error, Result};

pub const RESULT_COLUMNS: [&str; 13] = [
    "algorithm",
    "cell_id",
    "n_nodes",
    "base_rate",
    "scheme",
    "k",
    "floor",
    "replicate",
    "seed",
    "success",
    "node_evals",
    "generations",
    "duration_ms",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub algorithm: Algorithm,
    pub cell_id: String,
    pub n_nodes: usize,
    pub base_rate: f64,
    pub scheme: String,
    pub k: f64,
    pub floor: f64,
    pub replicate: usize,
    pub seed: u64,
    pub success: bool,
    /// Total node-evaluations; for `single_task` the sum over all task runs.
    pub node_evals: u64,
    pub generations: u64,
    pub duration_ms: u64,
}

pub fn write_records(path: &Path, records: &[ResultRecord]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records_to(file, records)
}

pub fn write_records_to<W: std::io::Write>(writer: W, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if records.is_empty() {
        w.write_record(RESULT_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<results>", e))?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records_from(file).map_err(|e| match e {
        Error::Csv(c) => Error::Parse {
            path: path.to_path_buf(),
            msg: c.to_string(),
        },
        other => other,
    })
}

pub fn read_records_from<R: std::io::Read>(reader: R) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().ne(RESULT_COLUMNS) {
        return Err(Error::param(format!(
            "results header {:?} does not match expected columns {:?}",
            headers.iter().collect::<Vec<_>>(),
            RESULT_COLUMNS
        )));
    }
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rep: usize) -> ResultRecord {
        ResultRecord {
            algorithm: Algorithm::MultiExponential,
            cell_id: "n30_r0.5_k5_f0".into(),
            n_nodes: 30,
            base_rate: 0.5,
            scheme: "exponential".into(),
            k: 5.0,
            floor: 0.0,
            replicate: rep,
            seed: 123,
            success: true,
            node_evals: 15_750,
            generations: 131,
            duration_ms: 0,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let mut buf = Vec::new();
        write_records_to(&mut buf, &[record(0), record(1)]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), RESULT_COLUMNS.join(","));
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "multi_exponential,n30_r0.5_k5_f0,30,0.5,exponential,5.0,0.0,0,123,true,15750,131,0"
        );
        assert_eq!(
            read_records_from(&buf[..]).unwrap(),
            vec![record(0), record(1)]
        );
    }

    #[test]
    fn empty_file_still_has_header() {
        let mut buf = Vec::new();
        write_records_to(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap().trim(),
            RESULT_COLUMNS.join(",")
        );
        assert!(read_records_from(&buf[..]).unwrap().is_empty());
    }

    #[test]
    fn wrong_header_rejected() {
        let text = "algorithm,cell,n_nodes\nsingle_task,x,1\n";
        assert!(read_records_from(text.as_bytes()).is_err());
    }
}
