//! On-disk formats.
//!
//! * graph: `{"size": n, "labels": [[..], ..] | null, "adjacency": [[..], ..]}`
//! * cost matrix: headerless CSV, one row per vertex of G
//! * partial permutation: `{"rows": m, "cols": n, "l": l, "pairs": [[i, j], ..]}`
//! * trace: JSON lines, one [`TraceRecord`] per ζ step
//! * generator parameters: [`GeneratorParams`] as a JSON object
//!
//! Floats are written in shortest round-trip form, so parsing a written
//! file reproduces the in-memory value bit for bit.

use std::fmt::Write as _;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WcsError};
use crate::gnccp::{MatchResult, TraceRecord};
use crate::synth::GeneratorParams;
use crate::types::{CostMatrix, PartialPermutation, WeightedGraph};

/// Upper bound on any matrix dimension accepted from a file.
pub const MAX_DIMENSION: usize = 1 << 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    size: usize,
    labels: Option<Vec<Vec<f64>>>,
    adjacency: Vec<Vec<f64>>,
}

fn rows_to_array(rows: &[Vec<f64>], expect_cols: Option<usize>, what: &str) -> Result<Array2<f64>> {
    let ncols = match (expect_cols, rows.first()) {
        (Some(c), _) => c,
        (None, Some(r)) => r.len(),
        (None, None) => 0,
    };
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(WcsError::Parse(format!(
            "{what}: row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat).map_err(|e| WcsError::Parse(e.to_string()))
}

fn array_to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn parse_graph_json(text: &str) -> Result<WeightedGraph> {
    let file: GraphFile = serde_json::from_str(text)?;
    if file.size == 0 || file.size > MAX_DIMENSION {
        return Err(WcsError::Parse(format!(
            "graph size {} out of range",
            file.size
        )));
    }
    if file.adjacency.len() != file.size {
        return Err(WcsError::Parse(format!(
            "size is {} but adjacency has {} rows",
            file.size,
            file.adjacency.len()
        )));
    }
    let adjacency = rows_to_array(&file.adjacency, Some(file.size), "adjacency")?;
    let labels = match file.labels {
        None => None,
        Some(rows) => {
            if rows.len() != file.size {
                return Err(WcsError::Parse(format!(
                    "size is {} but {} labels given",
                    file.size,
                    rows.len()
                )));
            }
            Some(rows_to_array(&rows, None, "labels")?)
        }
    };
    WeightedGraph::new(adjacency, labels)
}

pub fn graph_to_json(graph: &WeightedGraph) -> String {
    let file = GraphFile {
        size: graph.size(),
        labels: graph.labels().map(array_to_rows),
        adjacency: array_to_rows(graph.adjacency()),
    };
    serde_json::to_string(&file).expect("graph serializes")
}

pub fn parse_cost_csv(text: &str) -> Result<CostMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| WcsError::Parse(format!("cost row {i}: '{f}' is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(WcsError::Parse("cost matrix is empty".into()));
    }
    if rows.len() > MAX_DIMENSION || rows[0].len() > MAX_DIMENSION {
        return Err(WcsError::Parse("cost matrix too large".into()));
    }
    CostMatrix::new(rows_to_array(&rows, None, "cost")?)
}

pub fn cost_to_csv(cost: &CostMatrix) -> String {
    matrix_to_csv(cost.entries())
}

pub fn matrix_to_csv(a: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in a.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PermutationFile {
    rows: usize,
    cols: usize,
    l: usize,
    pairs: Vec<[usize; 2]>,
}

pub fn parse_partial_permutation_json(text: &str) -> Result<PartialPermutation> {
    let file: PermutationFile = serde_json::from_str(text)?;
    if file.rows > MAX_DIMENSION || file.cols > MAX_DIMENSION {
        return Err(WcsError::Parse("assignment dimensions too large".into()));
    }
    let pairs: Vec<(usize, usize)> = file.pairs.iter().map(|p| (p[0], p[1])).collect();
    PartialPermutation::from_pairs(file.rows, file.cols, file.l, &pairs)
}

fn permutation_file(p: &PartialPermutation) -> PermutationFile {
    PermutationFile {
        rows: p.rows(),
        cols: p.cols(),
        l: p.size(),
        pairs: p.pairs().map(|(i, j)| [i, j]).collect(),
    }
}

pub fn partial_permutation_to_json(p: &PartialPermutation) -> String {
    serde_json::to_string(&permutation_file(p)).expect("assignment serializes")
}

pub fn trace_to_jsonl(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for rec in trace {
        out.push_str(&serde_json::to_string(rec).expect("trace serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_trace_jsonl(text: &str) -> Result<Vec<TraceRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(WcsError::from))
        .collect()
}

pub fn parse_params_json(text: &str) -> Result<GeneratorParams> {
    let params: GeneratorParams = serde_json::from_str(text)?;
    if params.n > MAX_DIMENSION {
        return Err(WcsError::Parse(format!("N = {} too large", params.n)));
    }
    params.validate()?;
    Ok(params)
}

pub fn params_to_json(params: &GeneratorParams) -> String {
    serde_json::to_string_pretty(params).expect("params serialize")
}

/// JSON shape of a match result as printed by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchReport {
    pub assignment: serde_json::Value,
    pub objective_h0: f64,
    pub objective_f: f64,
    pub discretized_by_fallback: bool,
    pub wall_time_secs: f64,
    pub zeta_steps: usize,
    pub final_zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub trace: Vec<TraceRecord>,
}

impl MatchReport {
    pub fn new(result: &MatchResult, accuracy: Option<f64>) -> Self {
        Self {
            assignment: serde_json::to_value(permutation_file(&result.assignment))
                .expect("assignment serializes"),
            objective_h0: result.objective_h0,
            objective_f: result.objective_f,
            discretized_by_fallback: result.discretized_by_fallback,
            wall_time_secs: result.wall_time.as_secs_f64(),
            zeta_steps: result.trace.len(),
            final_zeta: result.trace.last().map(|t| t.zeta),
            accuracy,
            trace: result.trace.clone(),
        }
    }

    pub fn assignment(&self) -> Result<PartialPermutation> {
        parse_partial_permutation_json(&self.assignment.to_string())
    }
}
