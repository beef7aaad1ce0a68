//! Run traces and their JSONL form.
//!
//! Line 1 is a header `{"type":"header","config":…,"seed":…}`; every further
//! line is one query `{phase, k, theta, shots, y, incumbent_y, B_k, …}`.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Method, RunConfig};
use crate::error::{Error, Result};
use crate::gp::Hyperparameters;
use crate::param::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Bo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub phase: Phase,
    /// Index within the phase.
    pub k: u64,
    pub theta: ParamVector,
    pub shots: u64,
    pub y: f64,
    /// Best incumbent-eligible `y` so far (`null` before the first one).
    pub incumbent_y: Option<f64>,
    /// Cumulative shots after this query.
    #[serde(rename = "B_k")]
    pub budget_spent: u64,
    /// Surrogate that proposed this query (BO phase).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Hyperparameters>,
    /// Residual target `y - μ_g(θ)` (low-shot-residual BO phase).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    #[serde(rename = "type")]
    kind: String,
    config: RunConfig,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    low_shot_model: Option<Hyperparameters>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: RunConfig,
    pub seed: u64,
    pub queries: Vec<QueryRecord>,
    /// Hyperparameters of the frozen low-shot mean (residual runs).
    pub low_shot_model: Option<Hyperparameters>,
    /// Seconds spent per BO iteration. Not serialized, so logs stay
    /// byte-reproducible.
    pub wall_time: Vec<f64>,
}

impl RunRecord {
    pub fn new(config: RunConfig, seed: u64) -> Self {
        RunRecord {
            config,
            seed,
            queries: Vec::new(),
            low_shot_model: None,
            wall_time: Vec::new(),
        }
    }

    /// Whether a query may become the incumbent: every query in vanilla runs,
    /// only the high-shot BO queries in residual runs.
    pub fn is_eligible(&self, q: &QueryRecord) -> bool {
        match self.config.method {
            Method::Vanilla => true,
            Method::Lsr => q.phase == Phase::Bo,
        }
    }

    pub fn total_shots(&self) -> u64 {
        self.queries.iter().map(|q| q.shots).sum()
    }

    /// Incumbent-eligible queries in order.
    pub fn eligible(&self) -> impl Iterator<Item = &QueryRecord> {
        self.queries.iter().filter(|q| self.is_eligible(q))
    }

    pub(crate) fn push(&mut self, mut q: QueryRecord) {
        let prev = self.queries.last().and_then(|p| p.incumbent_y);
        q.incumbent_y = if self.is_eligible(&q) {
            Some(prev.map_or(q.y, |p| p.min(q.y)))
        } else {
            prev
        };
        self.queries.push(q);
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            kind: "header".into(),
            config: self.config.clone(),
            seed: self.seed,
            low_shot_model: self.low_shot_model.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
        for q in &self.queries {
            serde_json::to_writer(&mut w, q)?;
            w.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_jsonl(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_jsonl<R: BufRead>(reader: R, path: &Path) -> Result<Self> {
        let malformed = |line: usize, msg: String| Error::Malformed {
            path: path.to_path_buf(),
            message: format!("line {line}: {msg}"),
        };
        let mut lines = reader.lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| malformed(1, "missing header".into()))?;
        let first = first.map_err(|e| Error::io(path, e))?;
        let header: Header =
            serde_json::from_str(&first).map_err(|e| malformed(1, e.to_string()))?;
        if header.kind != "header" {
            return Err(malformed(1, format!("expected header, found {:?}", header.kind)));
        }
        let mut queries = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            queries.push(serde_json::from_str(&line).map_err(|e| malformed(i + 1, e.to_string()))?);
        }
        Ok(RunRecord {
            config: header.config,
            seed: header.seed,
            queries,
            low_shot_model: header.low_shot_model,
            wall_time: Vec::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_jsonl(std::io::BufReader::new(file), path)
    }
}

/// Best incumbent-eligible query `(θ, y)`; ties go to the earliest query.
pub fn incumbent(record: &RunRecord) -> Result<(ParamVector, f64)> {
    let mut best: Option<&QueryRecord> = None;
    for q in record.eligible() {
        if best.is_none_or(|b| q.y < b.y) {
            best = Some(q);
        }
    }
    best.map(|q| (q.theta.clone(), q.y)).ok_or(Error::EmptyRecord)
}
