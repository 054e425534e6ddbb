//! Per-iteration training telemetry.
//!
//! Two sinks share one record type: `metrics.csv` is the reproducibility
//! artifact (identical bytes for identical config and seed, so wall time
//! stays out of it) and `metrics.jsonl` carries the full records including
//! timing. Floats are written with Rust's shortest-round-trip formatting,
//! so parsing a file back yields bit-equal values.

use std::fmt::Write as _;
use std::path::Path;

use codelab_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Bumped whenever the CSV column set changes.
pub const METRICS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub iter: usize,
    pub algo: String,
    pub regret: f64,
    pub difficulty: f64,
    pub n_hat: f64,
    pub non_skip: usize,
    pub active_count: usize,
    pub passive_count: usize,
    /// Per-agent mean episode returns, agent order.
    pub returns: Vec<f64>,
    pub best_return: f64,
    pub best_agent: usize,
    pub eval_success: Option<f64>,
    /// Wall-clock for the iteration; JSONL only.
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Default)]
pub struct MetricsLog {
    pub records: Vec<MetricsRecord>,
}

impl MetricsLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: MetricsRecord) -> Result<()> {
        if let Some(prev) = self.records.last() {
            if prev.returns.len() != record.returns.len() {
                return Err(Error::Contract(format!(
                    "population changed mid-run: {} then {} return columns",
                    prev.returns.len(),
                    record.returns.len()
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn header(population: usize) -> String {
        let mut h = String::from(
            "iter,algo,regret,difficulty,n_hat,non_skip,active_count,passive_count",
        );
        for i in 0..population {
            let _ = write!(h, ",return_agent_{i}");
        }
        h.push_str(",best_return,best_agent,eval_success");
        h
    }

    pub fn to_csv(&self) -> String {
        let population = self.records.first().map(|r| r.returns.len()).unwrap_or(0);
        let mut out = Self::header(population);
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.iter,
                r.algo,
                r.regret,
                r.difficulty,
                r.n_hat,
                r.non_skip,
                r.active_count,
                r.passive_count
            );
            for ret in &r.returns {
                let _ = write!(out, ",{ret}");
            }
            let _ = write!(out, ",{},{}", r.best_return, r.best_agent);
            match r.eval_success {
                Some(s) => {
                    let _ = write!(out, ",{s}");
                }
                None => out.push(','),
            }
            out.push('\n');
        }
        out
    }

    /// Parse a `to_csv` artifact back. Wall time is not in the CSV, so it
    /// comes back as zero.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Serialization("empty metrics file".into()))?;
        let columns: Vec<&str> = header.split(',').collect();
        let population = columns.iter().filter(|c| c.starts_with("return_agent_")).count();
        if header != Self::header(population) {
            return Err(Error::Serialization(format!("unrecognized metrics header {header:?}")));
        }
        let mut log = MetricsLog::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::Serialization(format!(
                    "line {}: {} fields, header has {}",
                    lineno + 2,
                    fields.len(),
                    columns.len()
                )));
            }
            let num =
                |s: &str| -> Result<f64> {
                    s.parse().map_err(|e| {
                        Error::Serialization(format!("line {}: {e}: {s:?}", lineno + 2))
                    })
                };
            let int =
                |s: &str| -> Result<usize> {
                    s.parse().map_err(|e| {
                        Error::Serialization(format!("line {}: {e}: {s:?}", lineno + 2))
                    })
                };
            let returns: Vec<f64> =
                fields[8..8 + population].iter().map(|s| num(s)).collect::<Result<_>>()?;
            log.push(MetricsRecord {
                iter: int(fields[0])?,
                algo: fields[1].to_string(),
                regret: num(fields[2])?,
                difficulty: num(fields[3])?,
                n_hat: num(fields[4])?,
                non_skip: int(fields[5])?,
                active_count: int(fields[6])?,
                passive_count: int(fields[7])?,
                returns,
                best_return: num(fields[8 + population])?,
                best_agent: int(fields[9 + population])?,
                eval_success: match fields[10 + population] {
                    "" => None,
                    s => Some(num(s)?),
                },
                wall_ms: 0,
            })?;
        }
        Ok(log)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("metrics.csv"), self.to_csv())?;
        std::fs::write(dir.join("metrics.jsonl"), self.to_jsonl())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(iter: usize) -> MetricsRecord {
        MetricsRecord {
            iter,
            algo: "code".into(),
            regret: 0.125,
            difficulty: -0.0625,
            n_hat: 3.5,
            non_skip: 4,
            active_count: 3,
            passive_count: 1,
            returns: vec![0.25, 0.5],
            best_return: 0.5,
            best_agent: 1,
            eval_success: if iter % 2 == 0 { Some(0.75) } else { None },
            wall_ms: 0,
        }
    }

    #[test]
    fn header_is_stable() {
        assert_eq!(
            MetricsLog::header(2),
            "iter,algo,regret,difficulty,n_hat,non_skip,active_count,passive_count,\
             return_agent_0,return_agent_1,best_return,best_agent,eval_success"
        );
    }

    #[test]
    fn csv_round_trips() {
        let mut log = MetricsLog::new();
        log.push(record(0)).unwrap();
        log.push(record(1)).unwrap();
        let parsed = MetricsLog::parse_csv(&log.to_csv()).unwrap();
        assert_eq!(parsed.records, log.records);
    }

    #[test]
    fn round_trip_is_bit_exact_on_awkward_floats() {
        let mut log = MetricsLog::new();
        let mut r = record(0);
        r.regret = 0.1 + 0.2; // 0.30000000000000004
        r.returns = vec![1.0 / 3.0, f64::MIN_POSITIVE];
        log.push(r).unwrap();
        let parsed = MetricsLog::parse_csv(&log.to_csv()).unwrap();
        assert_eq!(parsed.records[0].regret.to_bits(), log.records[0].regret.to_bits());
        assert_eq!(parsed.records[0].returns[0].to_bits(), log.records[0].returns[0].to_bits());
        assert_eq!(parsed.records[0].returns[1].to_bits(), log.records[0].returns[1].to_bits());
    }

    #[test]
    fn population_change_is_rejected() {
        let mut log = MetricsLog::new();
        log.push(record(0)).unwrap();
        let mut shrunk = record(1);
        shrunk.returns = vec![0.25];
        assert!(log.push(shrunk).is_err());
    }

    #[test]
    fn jsonl_keeps_wall_time() {
        let mut log = MetricsLog::new();
        let mut r = record(0);
        r.wall_ms = 42;
        log.push(r).unwrap();
        assert!(log.to_jsonl().contains("\"wall_ms\":42"));
        assert!(!log.to_csv().contains("42"));
    }
}
