//! Prediction-file records and the order-graph export.
//!
//! Predictions are JSONL: one record per scene carrying the signed matrix,
//! parse diagnostics for the LLM method, and provenance (model + cache key,
//! or the baseline kind). Per-scene failures are recorded in the record's
//! `error` field rather than aborting a run.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::BaselineKind;
use crate::relations::{OcclusionRelations, RelationError, SignedOrderMatrix};
use crate::scene::Scene;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("record is for image {record} but the scene is image {scene}")]
    MismatchedRecord { record: u64, scene: u64 },
    #[error("record matrix covers {matrix} instances, scene has {scene}")]
    SizeMismatch { matrix: usize, scene: usize },
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: malformed prediction record: {detail}")]
    Malformed { path: String, detail: String },
}

/// Parse-level diagnostics, recorded for the LLM method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub unmatched_labels: Vec<String>,
    pub all_zero: bool,
    pub ignored_lines: usize,
}

/// Where a prediction came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Baseline { baseline: BaselineKind },
    Llm { model: String, cache_key: String },
}

/// One scene's prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub image_id: u64,
    pub method: String,
    pub signed: SignedOrderMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<ParseDiagnostics>,
    pub provenance: Provenance,
    /// Per-scene failure note; the matrix is all-zero when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Renders a prediction as a DOT digraph: one node per instance labeled with
/// its display name, one edge per occluder → occludee relation (two for
/// mutual pairs). Node order follows the instance list and edges are
/// row-major, so output bytes are stable.
pub fn export_dot(record: &PredictionRecord, scene: &Scene) -> Result<String, ReportError> {
    if record.image_id != scene.image_id {
        return Err(ReportError::MismatchedRecord {
            record: record.image_id,
            scene: scene.image_id,
        });
    }
    if record.signed.n != scene.instances.len() {
        return Err(ReportError::SizeMismatch {
            matrix: record.signed.n,
            scene: scene.instances.len(),
        });
    }
    let relations = OcclusionRelations::from_signed(&record.signed)?;
    Ok(relations_dot(
        &relations,
        &scene.display_names(),
        &format!("scene_{}", scene.image_id),
    ))
}

/// DOT rendering shared by predictions and ground truth.
pub fn relations_dot(relations: &OcclusionRelations, names: &[String], graph_name: &str) -> String {
    let quote = |name: &str| format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""));
    let mut out = format!("digraph {graph_name} {{\n");
    for name in names {
        out.push_str(&format!("  {};\n", quote(name)));
    }
    for (i, j) in relations.edges() {
        out.push_str(&format!("  {} -> {};\n", quote(&names[i]), quote(&names[j])));
    }
    out.push_str("}\n");
    out
}

pub fn write_predictions_jsonl(
    path: &Path,
    records: &[PredictionRecord],
) -> Result<(), ReportError> {
    let file = File::create(path).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).expect("record serialization cannot fail");
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|source| ReportError::Io {
                path: path.display().to_string(),
                source,
            })?;
    }
    out.flush().map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_predictions_jsonl(path: &Path) -> Result<Vec<PredictionRecord>, ReportError> {
    let file = File::open(path).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord =
            serde_json::from_str(&line).map_err(|e| ReportError::Malformed {
                path: format!("{}:{}", path.display(), idx + 1),
                detail: e.to_string(),
            })?;
        record.signed.validate().map_err(|e| ReportError::Malformed {
            path: format!("{}:{}", path.display(), idx + 1),
            detail: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
