pub mod eval;
pub mod graph;
pub mod ingest;
pub mod parse;
pub mod predict;
