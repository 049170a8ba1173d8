//! Pairwise occlusion order recovery over annotated images.
//!
//! The pipeline: ingest COCOA or InstaOrder annotations into [`scene::Scene`]
//! values, predict occlusion relations per scene (geometric baselines in
//! [`baselines`], or a vision-LLM through [`llm`] + [`parse`]), then score
//! predictions against ground truth with [`metrics`]. [`report`] holds the
//! prediction-file records and the DOT order-graph export.

pub mod baselines;
pub mod geometry;
pub mod ingest;
pub mod llm;
pub mod metrics;
pub mod parse;
pub mod relations;
pub mod report;
pub mod scene;

pub use baselines::{BaselineError, BaselineKind};
pub use geometry::{BBox, BinaryMask, GeometryError, Segmentation};
pub use ingest::{IngestError, IngestOptions, LoadOutcome};
pub use llm::{EndpointConfig, LlmClient, LlmError, LlmExchange, PromptSpec};
pub use metrics::{EvaluationReport, MetricsError, PairMode, SceneEvaluation};
pub use parse::{ParseReport, ParsedStatement};
pub use relations::{OcclusionRelations, RelationError, SignedOrderMatrix};
pub use report::{ParseDiagnostics, PredictionRecord, Provenance, ReportError};
pub use scene::{assign_display_names, category_csv, CategoryList, InstanceRef, Scene, SceneError};
