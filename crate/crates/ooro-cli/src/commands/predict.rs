use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;

use ooro_core::baselines::{self, BaselineKind};
use ooro_core::ingest::read_scenes_jsonl;
use ooro_core::llm::{build_prompt, EndpointConfig, LlmClient, LlmError};
use ooro_core::parse::parse_response;
use ooro_core::relations::OcclusionRelations;
use ooro_core::report::{
    write_predictions_jsonl, ParseDiagnostics, PredictionRecord, Provenance,
};
use ooro_core::scene::{category_csv, Scene};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Area,
    Yaxis,
    Bbbd,
    Gpt,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Area => "area",
            Method::Yaxis => "yaxis",
            Method::Bbbd => "bbbd",
            Method::Gpt => "gpt",
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            Method::Area => Some(BaselineKind::Area),
            Method::Yaxis => Some(BaselineKind::YAxis),
            Method::Bbbd => Some(BaselineKind::Bbbd),
            Method::Gpt => None,
        }
    }
}

#[derive(Args)]
pub struct PredictArgs {
    /// Scenes JSONL produced by `ooro ingest`
    #[arg(long)]
    pub scenes: PathBuf,

    #[arg(long, value_enum)]
    pub method: Method,

    /// Output predictions JSONL path
    #[arg(long)]
    pub out: PathBuf,

    /// Worker threads; 0 picks the rayon default
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,

    /// Append per-instance bounding-box lines to the prompt (gpt)
    #[arg(long)]
    pub include_bboxes: bool,

    /// Response cache JSONL (gpt)
    #[arg(long)]
    pub cache: Option<PathBuf>,

    /// Resolve queries from the cache only; never touch the network (gpt)
    #[arg(long, conflicts_with = "live")]
    pub replay_only: bool,

    /// Send uncached queries to the endpoint and record them (gpt)
    #[arg(long)]
    pub live: bool,

    /// Model identifier used in requests and cache keys (gpt)
    #[arg(long)]
    pub model: Option<String>,

    /// Chat-completions endpoint URL (gpt --live)
    #[arg(long)]
    pub endpoint: Option<String>,

    /// Directory holding the scene image files (gpt)
    #[arg(long)]
    pub images: Option<PathBuf>,

    /// Concurrent in-flight requests in live mode
    #[arg(long, default_value_t = 4)]
    pub max_inflight: usize,

    /// Per-request timeout in seconds (gpt --live)
    #[arg(long, default_value_t = 120)]
    pub timeout_secs: u64,
}

pub fn run(args: PredictArgs) -> Result<i32> {
    let scenes = read_scenes_jsonl(&args.scenes)?;
    match args.method.baseline() {
        Some(kind) => {
            let records: Vec<PredictionRecord> = in_pool(effective_jobs(args.jobs, None), || {
                scenes
                    .par_iter()
                    .map(|scene| baseline_record(scene, kind))
                    .collect::<Vec<_>>()
            })?;
            write_predictions_jsonl(&args.out, &records)?;
            println!("{} predictions ({})", records.len(), args.method.name());
            Ok(0)
        }
        None => run_gpt(&args, &scenes),
    }
}

fn run_gpt(args: &PredictArgs, scenes: &[Scene]) -> Result<i32> {
    let cache = args
        .cache
        .as_ref()
        .context("--method gpt requires --cache")?;
    let model = args
        .model
        .as_ref()
        .context("--method gpt requires --model")?;
    let images = args
        .images
        .as_ref()
        .context("--method gpt requires --images")?;
    if !(args.replay_only || args.live) {
        bail!("--method gpt requires --replay-only or --live");
    }

    let client = if args.replay_only {
        LlmClient::replay(cache, model.clone())?
    } else {
        let endpoint = args.endpoint.as_ref().context("--live requires --endpoint")?;
        let mut config = EndpointConfig::new(endpoint.clone(), model.clone());
        config.api_key = std::env::var("OORO_API_KEY").ok();
        config.timeout = Duration::from_secs(args.timeout_secs);
        config.max_inflight = args.max_inflight;
        LlmClient::live(config, cache)?
    };

    let jobs = effective_jobs(args.jobs, Some(client.max_inflight()));
    let results: Vec<(PredictionRecord, bool)> = in_pool(jobs, || {
        scenes
            .par_iter()
            .map(|scene| gpt_record(scene, &client, images, args.include_bboxes))
            .collect::<Vec<_>>()
    })?;
    let misses = results.iter().filter(|(_, missed)| *missed).count();
    let records: Vec<PredictionRecord> = results.into_iter().map(|(r, _)| r).collect();
    write_predictions_jsonl(&args.out, &records)?;
    println!("{} predictions (gpt), {} cache miss(es)", records.len(), misses);

    // more than 10% misses in replay mode means the suite is misconfigured
    if args.replay_only && misses * 10 > scenes.len() {
        eprintln!(
            "error: {misses} of {} scenes missed the replay cache",
            scenes.len()
        );
        return Ok(3);
    }
    Ok(0)
}

fn effective_jobs(jobs: usize, inflight_cap: Option<usize>) -> usize {
    let requested = if jobs == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        jobs
    };
    match inflight_cap {
        Some(cap) => requested.min(cap),
        None => requested,
    }
}

fn in_pool<T: Send>(threads: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    Ok(pool.install(work))
}

fn baseline_record(scene: &Scene, kind: BaselineKind) -> PredictionRecord {
    let (relations, error) = match baselines::predict(kind, scene) {
        Ok(relations) => (relations, None),
        Err(e) => (
            OcclusionRelations::new(scene.instances.len()),
            Some(e.to_string()),
        ),
    };
    PredictionRecord {
        image_id: scene.image_id,
        method: kind.to_string(),
        signed: relations.to_signed(),
        diagnostics: None,
        provenance: Provenance::Baseline { baseline: kind },
        error,
    }
}

fn gpt_record(
    scene: &Scene,
    client: &LlmClient,
    images: &Path,
    include_bboxes: bool,
) -> (PredictionRecord, bool) {
    let n = scene.instances.len();
    let empty = OcclusionRelations::new(n);
    let degraded = |cache_key: String, error: String, missed: bool| {
        (
            PredictionRecord {
                image_id: scene.image_id,
                method: "gpt".to_string(),
                signed: empty.to_signed(),
                diagnostics: None,
                provenance: Provenance::Llm {
                    model: client.model().to_string(),
                    cache_key,
                },
                error: Some(error),
            },
            missed,
        )
    };

    let image_path = images.join(&scene.file_name);
    let image_bytes = match std::fs::read(&image_path) {
        Ok(bytes) => bytes,
        Err(e) => return degraded(String::new(), format!("reading {}: {e}", image_path.display()), false),
    };
    let bboxes: Vec<(String, ooro_core::BBox)> = scene
        .instances
        .iter()
        .map(|i| (i.display_name.clone(), i.bbox))
        .collect();
    let prompt = match build_prompt(&category_csv(scene), include_bboxes, Some(&bboxes)) {
        Ok(prompt) => prompt,
        Err(e) => return degraded(String::new(), e.to_string(), false),
    };
    let cache_key = client.cache_key_for(&image_bytes, &prompt);

    match client.query(&image_bytes, &prompt) {
        Ok(text) => {
            let (relations, parse_report) = parse_response(&text, scene);
            (
                PredictionRecord {
                    image_id: scene.image_id,
                    method: "gpt".to_string(),
                    signed: relations.to_signed(),
                    diagnostics: Some(ParseDiagnostics {
                        unmatched_labels: parse_report.unmatched_labels,
                        all_zero: parse_report.all_zero,
                        ignored_lines: parse_report.ignored_lines,
                    }),
                    provenance: Provenance::Llm {
                        model: client.model().to_string(),
                        cache_key,
                    },
                    error: None,
                },
                false,
            )
        }
        Err(e) => {
            let missed = matches!(e, LlmError::CacheMiss { .. });
            degraded(cache_key, e.to_string(), missed)
        }
    }
}
