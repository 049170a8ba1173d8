//! Prompt construction and the vision-LLM query path.
//!
//! Every query is keyed by a SHA-256 digest of `(model, prompt, image
//! digest)` and recorded as one JSONL row in an append-only cache. Replay
//! mode resolves queries from that cache alone and never opens a network
//! connection, which makes full pipeline runs (and CI) deterministic and
//! offline; live mode sends a chat-completions request with the image
//! attached as a base64 data URL, requesting temperature 0, and records the
//! exchange before returning it.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::BBox;

/// The prompt sent per image; `{categories}` is replaced by the scene's
/// display-name CSV.
pub const DEFAULT_PROMPT_TEMPLATE: &str = "List all visible objects stated in these {categories} from foreground to background starting from index 0.\n\
Professionally state object occlusion, return it in this format:\n\
\"Object A occludes Object B\"\n\
If there are multiple objects in same class, number them (e.g., bottle 0, bottle 1, etc).\n\
Return only the ordered list and occlusions - no explanations.";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("category list is empty")]
    EmptyCategoryList,
    #[error("no cached response for key {key}")]
    CacheMiss { key: String },
    #[error("request failed after {attempts} attempt(s): {detail}")]
    Transport { attempts: u32, detail: String },
    #[error("rate limited{}", .retry_after.map(|s| format!(" (retry after {s}s)")).unwrap_or_default())]
    RateLimited { retry_after: Option<u64> },
    #[error("malformed response: {detail}")]
    MalformedResponse { detail: String },
    #[error("image bytes are neither PNG nor JPEG")]
    UnsupportedImage,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cache line {line}: {detail}")]
    MalformedCache { line: usize, detail: String },
}

/// A rendered prompt plus the pieces it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub template: String,
    pub categories_csv: String,
    pub include_bboxes: bool,
    pub rendered: String,
}

/// Renders the prompt for one scene. With `include_bboxes`, one
/// `name: [x,y,w,h]` line per instance is inserted before the final
/// no-explanations instruction.
pub fn build_prompt(
    categories_csv: &str,
    include_bboxes: bool,
    bboxes: Option<&[(String, BBox)]>,
) -> Result<PromptSpec, LlmError> {
    if categories_csv.is_empty() {
        return Err(LlmError::EmptyCategoryList);
    }
    let template = DEFAULT_PROMPT_TEMPLATE.to_string();
    let mut rendered = template.replace("{categories}", categories_csv);
    debug_assert_eq!(rendered.matches(categories_csv).count(), 1);
    if include_bboxes {
        let lines: String = bboxes
            .unwrap_or(&[])
            .iter()
            .map(|(name, b)| {
                format!(
                    "{name}: [{},{},{},{}]",
                    fmt_coord(b.x),
                    fmt_coord(b.y),
                    fmt_coord(b.w),
                    fmt_coord(b.h)
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        if !lines.is_empty() {
            let (head, tail) = rendered
                .rsplit_once('\n')
                .expect("template has multiple lines");
            rendered = format!("{head}\n{lines}\n{tail}");
        }
    }
    Ok(PromptSpec {
        template,
        categories_csv: categories_csv.to_string(),
        include_bboxes,
        rendered,
    })
}

fn fmt_coord(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Lowercase-hex SHA-256 of the image bytes.
pub fn image_digest(image_bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(image_bytes))
}

/// Cache row key: SHA-256 over `model \n prompt \n image-digest`, hex.
pub fn cache_key(model: &str, prompt: &str, image_digest: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(model.as_bytes());
    hasher.update(b"\n");
    hasher.update(prompt.as_bytes());
    hasher.update(b"\n");
    hasher.update(image_digest.as_bytes());
    hex::encode(hasher.finalize())
}

/// One recorded request/response pair; one JSONL row in the cache file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmExchange {
    pub key: String,
    pub model: String,
    pub image_digest: String,
    pub prompt: String,
    pub response: String,
    /// UTC seconds at record time.
    pub ts: u64,
}

/// In-memory view of a cache file. Row order is irrelevant; on duplicate
/// keys the last row wins.
#[derive(Debug, Default)]
pub struct ResponseCache {
    entries: HashMap<String, LlmExchange>,
}

impl ResponseCache {
    /// Loads a cache file; a missing file is an empty cache.
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(source) => {
                return Err(LlmError::Io {
                    path: path.display().to_string(),
                    source,
                })
            }
        };
        let mut entries = HashMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| LlmError::Io {
                path: path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let exchange: LlmExchange =
                serde_json::from_str(&line).map_err(|e| LlmError::MalformedCache {
                    line: idx + 1,
                    detail: e.to_string(),
                })?;
            entries.insert(exchange.key.clone(), exchange);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&LlmExchange> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn insert(&mut self, exchange: LlmExchange) {
        self.entries.insert(exchange.key.clone(), exchange);
    }
}

/// Connection settings for live mode.
#[derive(Debug, Clone)]
pub struct EndpointConfig {
    /// Chat-completions URL, e.g. `https://api.openai.com/v1/chat/completions`.
    pub endpoint: String,
    pub model: String,
    /// Bearer credential; read from `OORO_API_KEY` by the CLI.
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// First backoff; doubles per retry (1s, 2s, 4s by default).
    pub retry_backoff: Duration,
    /// Upper bound on concurrent in-flight requests.
    pub max_inflight: usize,
}

impl EndpointConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            timeout: Duration::from_secs(120),
            max_retries: 3,
            retry_backoff: Duration::from_secs(1),
            max_inflight: 4,
        }
    }
}

enum Mode {
    Replay {
        cache: ResponseCache,
    },
    Live {
        config: EndpointConfig,
        http: reqwest::blocking::Client,
        cache: RwLock<ResponseCache>,
        writer: Mutex<BufWriter<File>>,
    },
}

/// Query front end. Replay resolves from the loaded cache with no network
/// path at all; live sends, records, then returns. Replay lookups are plain
/// reads of an immutable map; live cache appends go through a single writer.
pub struct LlmClient {
    model: String,
    mode: Mode,
}

impl LlmClient {
    /// Offline client over a recorded cache.
    pub fn replay(cache_path: &Path, model: impl Into<String>) -> Result<Self, LlmError> {
        Ok(Self {
            model: model.into(),
            mode: Mode::Replay {
                cache: ResponseCache::load(cache_path)?,
            },
        })
    }

    /// Live client; existing rows in `cache_path` are reused so interrupted
    /// runs resume without re-querying.
    pub fn live(config: EndpointConfig, cache_path: &Path) -> Result<Self, LlmError> {
        let cache = ResponseCache::load(cache_path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(cache_path)
            .map_err(|source| LlmError::Io {
                path: cache_path.display().to_string(),
                source,
            })?;
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Transport {
                attempts: 0,
                detail: e.to_string(),
            })?;
        Ok(Self {
            model: config.model.clone(),
            mode: Mode::Live {
                config,
                http,
                cache: RwLock::new(cache),
                writer: Mutex::new(BufWriter::new(file)),
            },
        })
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn max_inflight(&self) -> usize {
        match &self.mode {
            Mode::Replay { .. } => usize::MAX,
            Mode::Live { config, .. } => config.max_inflight.max(1),
        }
    }

    /// The cache key this client would use for the given request.
    pub fn cache_key_for(&self, image_bytes: &[u8], prompt: &PromptSpec) -> String {
        cache_key(&self.model, &prompt.rendered, &image_digest(image_bytes))
    }

    /// Resolves one request to the model's response text.
    pub fn query(&self, image_bytes: &[u8], prompt: &PromptSpec) -> Result<String, LlmError> {
        let digest = image_digest(image_bytes);
        let key = cache_key(&self.model, &prompt.rendered, &digest);
        match &self.mode {
            Mode::Replay { cache } => cache
                .get(&key)
                .map(|e| e.response.clone())
                .ok_or(LlmError::CacheMiss { key }),
            Mode::Live {
                config,
                http,
                cache,
                writer,
            } => {
                if let Some(hit) = cache
                    .read()
                    .expect("cache lock poisoned")
                    .get(&key)
                    .map(|e| e.response.clone())
                {
                    return Ok(hit);
                }
                let response = send_with_retries(http, config, image_bytes, &prompt.rendered)?;
                let exchange = LlmExchange {
                    key: key.clone(),
                    model: self.model.clone(),
                    image_digest: digest,
                    prompt: prompt.rendered.clone(),
                    response: response.clone(),
                    ts: SystemTime::now()
                        .duration_since(UNIX_EPOCH)
                        .map(|d| d.as_secs())
                        .unwrap_or(0),
                };
                {
                    let mut out = writer.lock().expect("writer lock poisoned");
                    let line =
                        serde_json::to_string(&exchange).expect("exchange serialization cannot fail");
                    out.write_all(line.as_bytes())
                        .and_then(|_| out.write_all(b"\n"))
                        .and_then(|_| out.flush())
                        .map_err(|source| LlmError::Io {
                            path: "cache file".to_string(),
                            source,
                        })?;
                }
                cache
                    .write()
                    .expect("cache lock poisoned")
                    .insert(exchange);
                Ok(response)
            }
        }
    }
}

fn image_mime(image_bytes: &[u8]) -> Result<&'static str, LlmError> {
    if image_bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        Ok("image/png")
    } else if image_bytes.starts_with(&[0xff, 0xd8, 0xff]) {
        Ok("image/jpeg")
    } else {
        Err(LlmError::UnsupportedImage)
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

fn send_with_retries(
    http: &reqwest::blocking::Client,
    config: &EndpointConfig,
    image_bytes: &[u8],
    prompt: &str,
) -> Result<String, LlmError> {
    let mime = image_mime(image_bytes)?;
    let data_url = format!(
        "data:{mime};base64,{}",
        base64::engine::general_purpose::STANDARD.encode(image_bytes)
    );
    let body = serde_json::json!({
        "model": config.model,
        "temperature": 0,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "text", "text": prompt},
                {"type": "image_url", "image_url": {"url": data_url}},
            ],
        }],
    });

    let attempts = config.max_retries + 1;
    let mut last_rate_limit: Option<Option<u64>> = None;
    let mut last_detail = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            let backoff = config.retry_backoff * 2u32.pow(attempt - 1);
            let wait = match last_rate_limit {
                Some(Some(secs)) => backoff.max(Duration::from_secs(secs)),
                _ => backoff,
            };
            std::thread::sleep(wait);
        }
        let mut request = http.post(&config.endpoint).json(&body);
        if let Some(key) = &config.api_key {
            request = request.bearer_auth(key);
        }
        match request.send() {
            Err(e) => {
                last_rate_limit = None;
                last_detail = e.to_string();
            }
            Ok(response) => {
                let status = response.status();
                if status.as_u16() == 429 {
                    let retry_after = response
                        .headers()
                        .get("retry-after")
                        .and_then(|v| v.to_str().ok())
                        .and_then(|v| v.parse::<u64>().ok());
                    last_rate_limit = Some(retry_after);
                    last_detail = "rate limited".to_string();
                    continue;
                }
                if status.is_server_error() {
                    last_rate_limit = None;
                    last_detail = format!("server error {status}");
                    continue;
                }
                if !status.is_success() {
                    return Err(LlmError::Transport {
                        attempts: attempt + 1,
                        detail: format!("status {status}"),
                    });
                }
                let parsed: ChatResponse =
                    response.json().map_err(|e| LlmError::MalformedResponse {
                        detail: e.to_string(),
                    })?;
                let content = parsed
                    .choices
                    .into_iter()
                    .next()
                    .and_then(|c| c.message.content)
                    .unwrap_or_default();
                if content.is_empty() {
                    return Err(LlmError::MalformedResponse {
                        detail: "empty or non-text payload".to_string(),
                    });
                }
                return Ok(content);
            }
        }
    }
    if let Some(retry_after) = last_rate_limit {
        return Err(LlmError::RateLimited { retry_after });
    }
    Err(LlmError::Transport {
        attempts,
        detail: last_detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Read;
    use std::net::TcpListener;

    const PNG_STUB: &[u8] = &[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a, 1, 2, 3];

    #[test]
    fn prompt_contains_csv_once_and_keeps_the_format_lines() {
        let csv = "clock 0,clock 1,building 0";
        let spec = build_prompt(csv, false, None).unwrap();
        assert_eq!(spec.rendered.matches(csv).count(), 1);
        assert!(spec.rendered.contains("\"Object A occludes Object B\""));
        assert!(spec
            .rendered
            .ends_with("Return only the ordered list and occlusions - no explanations."));
        assert!(!spec.include_bboxes);
    }

    #[test]
    fn prompt_bbox_lines_sit_before_the_final_instruction() {
        let boxes = vec![("person 0".to_string(), BBox::new(3.0, 4.5, 10.0, 20.0))];
        let spec = build_prompt("person 0", true, Some(&boxes)).unwrap();
        let lines: Vec<&str> = spec.rendered.lines().collect();
        assert_eq!(lines[lines.len() - 2], "person 0: [3,4.5,10,20]");
        assert_eq!(
            lines[lines.len() - 1],
            "Return only the ordered list and occlusions - no explanations."
        );
    }

    #[test]
    fn empty_category_list_is_rejected() {
        assert!(matches!(
            build_prompt("", false, None),
            Err(LlmError::EmptyCategoryList)
        ));
    }

    #[test]
    fn cache_key_matches_frozen_vector() {
        // frozen against an independent sha256 implementation
        let digest = image_digest(b"fake-image-bytes");
        assert_eq!(
            digest,
            "b0423673071359e7ff62ec7f2766b1bfe8682ee426b8d6672f8aab0619ba7648"
        );
        assert_eq!(
            cache_key("gpt-4o", "prompt text", &digest),
            "119b8f680b719a5cc40faaa78cfcfc2c26b2452f699f7a69aef00b7ca8d23645"
        );
    }

    #[test]
    fn cache_key_is_a_pure_function_of_its_parts() {
        let digest = image_digest(b"img");
        let a = cache_key("m", "p", &digest);
        assert_eq!(a, cache_key("m", "p", &digest));
        assert_ne!(a, cache_key("m2", "p", &digest));
        assert_ne!(a, cache_key("m", "p2", &digest));
        assert_ne!(a, cache_key("m", "p", &image_digest(b"img2")));
    }

    fn exchange(key: &str, response: &str) -> LlmExchange {
        LlmExchange {
            key: key.to_string(),
            model: "m".to_string(),
            image_digest: "d".repeat(64),
            prompt: "p".to_string(),
            response: response.to_string(),
            ts: 1700000000,
        }
    }

    #[test]
    fn cache_rows_are_order_insensitive() {
        let dir = tempfile::tempdir().unwrap();
        let forward = dir.path().join("a.jsonl");
        let backward = dir.path().join("b.jsonl");
        let rows = [exchange("k1", "one"), exchange("k2", "two")];
        let write = |path: &Path, rows: &[&LlmExchange]| {
            let mut out = String::new();
            for row in rows {
                out.push_str(&serde_json::to_string(row).unwrap());
                out.push('\n');
            }
            std::fs::write(path, out).unwrap();
        };
        write(&forward, &[&rows[0], &rows[1]]);
        write(&backward, &[&rows[1], &rows[0]]);
        let a = ResponseCache::load(&forward).unwrap();
        let b = ResponseCache::load(&backward).unwrap();
        for key in ["k1", "k2"] {
            assert_eq!(a.get(key), b.get(key));
        }
    }

    #[test]
    fn replay_hit_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let prompt = build_prompt("person 0", false, None).unwrap();
        let key = cache_key("m", &prompt.rendered, &image_digest(PNG_STUB));
        let mut row = exchange(&key, "person 0 occludes nothing");
        row.prompt = prompt.rendered.clone();
        std::fs::write(&path, format!("{}\n", serde_json::to_string(&row).unwrap())).unwrap();

        let client = LlmClient::replay(&path, "m").unwrap();
        assert_eq!(
            client.query(PNG_STUB, &prompt).unwrap(),
            "person 0 occludes nothing"
        );
        let other = build_prompt("dog 0", false, None).unwrap();
        assert!(matches!(
            client.query(PNG_STUB, &other),
            Err(LlmError::CacheMiss { .. })
        ));
    }

    #[test]
    fn replay_with_missing_cache_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let client = LlmClient::replay(&dir.path().join("absent.jsonl"), "m").unwrap();
        let prompt = build_prompt("person 0", false, None).unwrap();
        assert!(matches!(
            client.query(PNG_STUB, &prompt),
            Err(LlmError::CacheMiss { .. })
        ));
    }

    /// One-shot HTTP stub: accepts a single request, captures its body, and
    /// replies with the given JSON.
    fn spawn_stub(reply: &'static str) -> (String, std::sync::mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = Vec::new();
            let mut chunk = [0u8; 4096];
            let body_start;
            loop {
                let n = stream.read(&mut chunk).unwrap();
                buf.extend_from_slice(&chunk[..n]);
                if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                    body_start = pos + 4;
                    break;
                }
            }
            let headers = String::from_utf8_lossy(&buf[..body_start]).to_string();
            let content_length: usize = headers
                .lines()
                .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(str::trim).map(String::from))
                .and_then(|v| v.parse().ok())
                .unwrap_or(0);
            while buf.len() - body_start < content_length {
                let n = stream.read(&mut chunk).unwrap();
                buf.extend_from_slice(&chunk[..n]);
            }
            let body = String::from_utf8_lossy(&buf[body_start..]).to_string();
            tx.send(body).unwrap();
            let response = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                reply.len(),
                reply
            );
            use std::io::Write as _;
            stream.write_all(response.as_bytes()).unwrap();
        });
        (format!("http://{addr}/v1/chat/completions"), rx)
    }

    #[test]
    fn live_mode_records_and_replays_identically() {
        let reply = r#"{"choices":[{"message":{"content":"clock 0 occludes building 0"}}]}"#;
        let (endpoint, request_rx) = spawn_stub(reply);
        let dir = tempfile::tempdir().unwrap();
        let cache_path = dir.path().join("cache.jsonl");

        let mut config = EndpointConfig::new(endpoint, "stub-model");
        config.max_retries = 0;
        config.api_key = Some("secret".to_string());
        let client = LlmClient::live(config, &cache_path).unwrap();
        let prompt = build_prompt("clock 0,building 0", false, None).unwrap();
        let text = client.query(PNG_STUB, &prompt).unwrap();
        assert_eq!(text, "clock 0 occludes building 0");

        // the request carried the prompt, the model, and temperature 0
        let body: serde_json::Value =
            serde_json::from_str(&request_rx.recv().unwrap()).unwrap();
        assert_eq!(body["model"], "stub-model");
        assert_eq!(body["temperature"], 0);
        assert_eq!(body["messages"][0]["content"][0]["text"], prompt.rendered);
        let url = body["messages"][0]["content"][1]["image_url"]["url"]
            .as_str()
            .unwrap();
        assert!(url.starts_with("data:image/png;base64,"));

        // the exchange landed in the cache under the computed key
        let expected_key = client.cache_key_for(PNG_STUB, &prompt);
        let cache = ResponseCache::load(&cache_path).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(cache.get(&expected_key).unwrap().response, text);

        // an immediate replay of the same cache returns identical text
        let replay = LlmClient::replay(&cache_path, "stub-model").unwrap();
        assert_eq!(replay.query(PNG_STUB, &prompt).unwrap(), text);
    }

    #[test]
    fn live_mode_reuses_warm_cache_without_network() {
        // endpoint is unroutable; the warm row must satisfy the query
        let dir = tempfile::tempdir().unwrap();
        let cache_path = dir.path().join("cache.jsonl");
        let prompt = build_prompt("person 0", false, None).unwrap();
        let key = cache_key("m", &prompt.rendered, &image_digest(PNG_STUB));
        let mut row = exchange(&key, "warm");
        row.prompt = prompt.rendered.clone();
        std::fs::write(&cache_path, format!("{}\n", serde_json::to_string(&row).unwrap()))
            .unwrap();

        let mut config = EndpointConfig::new("http://127.0.0.1:1/unroutable", "m");
        config.max_retries = 0;
        config.timeout = Duration::from_millis(200);
        let client = LlmClient::live(config, &cache_path).unwrap();
        assert_eq!(client.query(PNG_STUB, &prompt).unwrap(), "warm");
    }

    #[test]
    fn empty_choices_is_a_malformed_response() {
        let (endpoint, _rx) = spawn_stub(r#"{"choices":[]}"#);
        let dir = tempfile::tempdir().unwrap();
        let mut config = EndpointConfig::new(endpoint, "m");
        config.max_retries = 0;
        let client = LlmClient::live(config, &dir.path().join("c.jsonl")).unwrap();
        let prompt = build_prompt("person 0", false, None).unwrap();
        assert!(matches!(
            client.query(PNG_STUB, &prompt),
            Err(LlmError::MalformedResponse { .. })
        ));
    }

    #[test]
    fn dead_endpoint_exhausts_into_transport_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = EndpointConfig::new("http://127.0.0.1:1/unroutable", "m");
        config.max_retries = 1;
        config.retry_backoff = Duration::from_millis(1);
        config.timeout = Duration::from_millis(200);
        let client = LlmClient::live(config, &dir.path().join("c.jsonl")).unwrap();
        let prompt = build_prompt("person 0", false, None).unwrap();
        match client.query(PNG_STUB, &prompt) {
            Err(LlmError::Transport { attempts, .. }) => assert_eq!(attempts, 2),
            other => panic!("expected Transport, got {other:?}"),
        }
    }

    #[test]
    fn non_image_bytes_are_rejected_in_live_mode() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = EndpointConfig::new("http://127.0.0.1:1/unroutable", "m");
        config.max_retries = 0;
        let client = LlmClient::live(config, &dir.path().join("c.jsonl")).unwrap();
        let prompt = build_prompt("person 0", false, None).unwrap();
        assert!(matches!(
            client.query(b"plain text", &prompt),
            Err(LlmError::UnsupportedImage)
        ));
    }
}
