//! JSON file formats for instances and solutions.
//!
//! Serialization is byte-deterministic: maps are ordered, rationals are
//! written exactly as `"p/q"`, and field order is fixed by the structs.

use crate::instance::{Graph, Instance, InstanceError};
use crate::ratio::{fmt_q, parse_q, Q};
use crate::set::VertexSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Instance(#[from] InstanceError),
    #[error("invalid field: {0}")]
    Field(String),
}

/// On-disk instance description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    /// `[u, v, capacity]` triples
    pub edges: Vec<(usize, usize, i64)>,
    /// vertex lists, one per commodity
    pub commodities: Vec<Vec<usize>>,
    /// present exactly for common-sink instances
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<usize>,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        InstanceFile {
            n: instance.graph().num_vertices(),
            edges: instance
                .graph()
                .edges()
                .iter()
                .map(|e| (e.u, e.v, e.capacity))
                .collect(),
            commodities: instance.commodities().to_vec(),
            sink: instance.sink(),
        }
    }

    pub fn into_instance(self) -> Result<Instance, IoError> {
        let graph = Graph::new(self.n, self.edges)?;
        Ok(Instance::new(graph, self.commodities, self.sink)?)
    }
}

/// On-disk solution description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    /// the LP optimum, exactly, as `"p/q"`
    pub lambda: String,
    /// terminal id -> vertices of its cut
    pub cuts: BTreeMap<usize, Vec<usize>>,
    /// `[u, v, load]` per edge, in instance edge order
    pub loads: Vec<(usize, usize, i64)>,
    /// which guarantee the loads were checked against: `"8c+4"` or `"c+2"`
    pub bound: String,
    /// human-readable violation descriptions; empty on success
    pub violations: Vec<String>,
}

impl SolutionFile {
    pub fn lambda(&self) -> Result<Q, IoError> {
        parse_q(&self.lambda).map_err(IoError::Field)
    }

    pub fn set_lambda(&mut self, lambda: &Q) {
        self.lambda = fmt_q(lambda);
    }

    /// The per-terminal cuts as vertex sets over `0..n`.
    pub fn assignment(&self, n: usize) -> Result<Vec<VertexSet>, IoError> {
        let mut out = Vec::with_capacity(self.cuts.len());
        for (id, verts) in &self.cuts {
            if *id != out.len() {
                return Err(IoError::Field(format!(
                    "cut keys must be the consecutive terminal ids; missing {}",
                    out.len()
                )));
            }
            for &v in verts {
                if v >= n {
                    return Err(IoError::Field(format!("cut {id} mentions vertex {v} >= n")));
                }
            }
            out.push(VertexSet::from_iter(n, verts.iter().copied()));
        }
        Ok(out)
    }
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance, IoError> {
    let text = std::fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    file.into_instance()
}

pub fn read_solution(path: &std::path::Path) -> Result<SolutionFile, IoError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty-printed JSON with a trailing newline; identical input always
/// yields identical bytes.
pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::qr;

    #[test]
    fn instance_round_trips() {
        let file = InstanceFile {
            n: 3,
            edges: vec![(0, 1, 2), (1, 2, 1)],
            commodities: vec![vec![0, 2]],
            sink: Some(2),
        };
        let json = serde_json::to_string(&file).unwrap();
        let back: InstanceFile = serde_json::from_str(&json).unwrap();
        let inst = back.into_instance().unwrap();
        assert_eq!(inst.sink(), Some(2));
        let again = serde_json::to_string(&InstanceFile::from_instance(&inst)).unwrap();
        assert_eq!(json, again);
    }

    #[test]
    fn sink_field_is_omitted_for_mcp() {
        let file = InstanceFile {
            n: 2,
            edges: vec![(0, 1, 1)],
            commodities: vec![vec![0, 1]],
            sink: None,
        };
        let json = serde_json::to_string(&file).unwrap();
        assert!(!json.contains("sink"));
    }

    #[test]
    fn solution_lambda_is_exact() {
        let mut sol = SolutionFile {
            lambda: String::new(),
            cuts: BTreeMap::new(),
            loads: vec![],
            bound: "c+2".into(),
            violations: vec![],
        };
        sol.set_lambda(&qr(7, 3));
        assert_eq!(sol.lambda, "7/3");
        assert_eq!(sol.lambda().unwrap(), qr(7, 3));
    }

    #[test]
    fn assignment_requires_consecutive_ids() {
        let mut cuts = BTreeMap::new();
        cuts.insert(0usize, vec![0]);
        cuts.insert(2usize, vec![1]);
        let sol = SolutionFile {
            lambda: "1".into(),
            cuts,
            loads: vec![],
            bound: "c+2".into(),
            violations: vec![],
        };
        assert!(sol.assignment(3).is_err());
    }
}
