use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use ooro_core::ingest::read_scenes_jsonl;
use ooro_core::report::{export_dot, read_predictions_jsonl};

#[derive(Args)]
pub struct GraphArgs {
    /// Predictions JSONL
    #[arg(long)]
    pub pred: PathBuf,

    /// Scenes JSONL the predictions refer to
    #[arg(long)]
    pub scenes: PathBuf,

    /// Export only this scene; default is every prediction in file order
    #[arg(long)]
    pub image_id: Option<u64>,

    /// Output path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: GraphArgs) -> Result<i32> {
    let scenes = read_scenes_jsonl(&args.scenes)?;
    let by_image: HashMap<u64, _> = scenes.iter().map(|s| (s.image_id, s)).collect();
    let records = read_predictions_jsonl(&args.pred)?;

    let mut output = String::new();
    for record in &records {
        if args.image_id.is_some_and(|id| id != record.image_id) {
            continue;
        }
        let scene = by_image
            .get(&record.image_id)
            .with_context(|| format!("prediction for image {} has no scene", record.image_id))?;
        output.push_str(&export_dot(record, scene)?);
    }
    if output.is_empty() {
        anyhow::bail!("no prediction matched");
    }

    match &args.out {
        Some(path) => std::fs::write(path, output)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{output}"),
    }
    Ok(0)
}
