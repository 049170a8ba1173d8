use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use ooro_core::ingest::{self, IngestOptions};

#[derive(Args)]
pub struct IngestArgs {
    /// COCOA annotation JSON (self-contained regions + ordering)
    #[arg(long, conflicts_with_all = ["instaorder", "coco"])]
    pub cocoa: Option<PathBuf>,

    /// InstaOrder annotation JSON; requires --coco for instance metadata
    #[arg(long, requires = "coco")]
    pub instaorder: Option<PathBuf>,

    /// COCO instances JSON matching the InstaOrder file
    #[arg(long)]
    pub coco: Option<PathBuf>,

    /// Output scenes JSONL path
    #[arg(long)]
    pub out: PathBuf,

    /// Drop COCO iscrowd instances and the ordering entries touching them
    #[arg(long)]
    pub exclude_crowd: bool,
}

pub fn run(args: IngestArgs) -> Result<i32> {
    let options = IngestOptions {
        exclude_crowd: args.exclude_crowd,
    };
    let outcome = match (&args.cocoa, &args.instaorder) {
        (Some(cocoa), None) => ingest::load_cocoa(cocoa, options)?,
        (None, Some(instaorder)) => {
            let coco = args.coco.as_ref().expect("clap enforces --coco");
            ingest::load_instaorder(instaorder, coco, options)?
        }
        _ => bail!("exactly one of --cocoa or --instaorder is required"),
    };
    if !outcome.unmatched_image_ids.is_empty() {
        eprintln!(
            "warning: skipped {} record(s) with image ids absent from the COCO file",
            outcome.unmatched_image_ids.len()
        );
    }
    ingest::write_scenes_jsonl(&args.out, &outcome.scenes)?;
    println!(
        "{} scenes, {} instances",
        outcome.scenes.len(),
        outcome.instance_count()
    );
    Ok(0)
}
