use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use ooro_core::ingest::read_scenes_jsonl;
use ooro_core::metrics::{aggregate, scene_accuracy, PairMode};
use ooro_core::relations::OcclusionRelations;
use ooro_core::report::read_predictions_jsonl;

#[derive(Args)]
pub struct EvalArgs {
    /// Predictions JSONL produced by `ooro predict`
    #[arg(long)]
    pub pred: PathBuf,

    /// Scenes JSONL the predictions were produced from
    #[arg(long)]
    pub scenes: PathBuf,

    /// Ordered-pair denominator: every pair, or only ground-truth-related
    #[arg(long, default_value = "all")]
    pub pair_mode: PairMode,

    /// Dataset label for the report; defaults to the scenes file stem
    #[arg(long)]
    pub dataset: Option<String>,

    /// Report JSON output path
    #[arg(long)]
    pub out_json: Option<PathBuf>,

    /// Report CSV output path (one row, Table-style columns)
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

pub fn run(args: EvalArgs) -> Result<i32> {
    let scenes = read_scenes_jsonl(&args.scenes)?;
    let mut by_image = HashMap::new();
    for scene in &scenes {
        if by_image.insert(scene.image_id, scene).is_some() {
            bail!("scenes file lists image {} twice", scene.image_id);
        }
    }

    let records = read_predictions_jsonl(&args.pred)?;
    if records.is_empty() {
        bail!("predictions file is empty");
    }
    let method = records[0].method.clone();
    let mut seen = HashSet::new();
    let mut evals = Vec::with_capacity(records.len());
    for record in &records {
        if record.method != method {
            bail!(
                "mixed methods in predictions file: {} and {}",
                method,
                record.method
            );
        }
        if !seen.insert(record.image_id) {
            bail!("predictions file lists image {} twice", record.image_id);
        }
        let scene = by_image
            .get(&record.image_id)
            .with_context(|| format!("prediction for image {} has no scene", record.image_id))?;
        let pred = OcclusionRelations::from_signed(&record.signed)?;
        evals.push(scene_accuracy(
            record.image_id,
            &pred,
            &scene.ground_truth,
            args.pair_mode,
        ));
    }

    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.scenes
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenes".to_string())
    });
    let report = aggregate(evals, &method, &dataset, args.pair_mode)?;

    if let Some(path) = &args.out_json {
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.out_csv {
        std::fs::write(path, report.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "method={} dataset={} pair_mode={} micro={:.4} macro={:.4} all_zero_rate={:.4} incomparable={}",
        report.method,
        report.dataset,
        report.pair_mode,
        report.micro_accuracy,
        report.macro_accuracy,
        report.all_zero_rate,
        report.incomparable_count
    );
    Ok(0)
}
