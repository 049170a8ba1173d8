//! COCOA and InstaOrder annotation loading.
//!
//! COCOA files are self-contained: each annotation carries the image's
//! regions plus a `depth_constraint` string of 1-based `"front-behind"`
//! pairs. Regions have no boxes of their own, so bounding boxes are derived
//! from the decoded modal mask (the `visible_mask` RLE when the region is
//! partly occluded, otherwise the region polygon).
//!
//! InstaOrder files carry only ordering records; categories, boxes, and
//! masks are joined from the COCO instances file by image id and annotation
//! id. Occlusion entries are `"a < b"` (a occludes b) or `"a & b"` (mutual),
//! with 0-based indices into the record's `instance_ids`. Depth entries are
//! discarded.
//!
//! Parsing is strict on structure and lenient on unknown fields; both
//! datasets carry metadata this pipeline ignores.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer};
use thiserror::Error;

use crate::geometry::{BBox, RleCounts, Segmentation};
use crate::relations::OcclusionRelations;
use crate::scene::{assign_display_names, InstanceRef, Scene, SceneError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {path}")]
    FileNotFound { path: String },
    #[error("{path}: malformed annotation: {detail}")]
    MalformedAnnotation { path: String, detail: String },
    #[error("{path}: dangling reference: {detail}")]
    DanglingReference { path: String, detail: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// Loader result: scenes plus the ordering records that were skipped because
/// their image id had no match.
#[derive(Debug)]
pub struct LoadOutcome {
    pub scenes: Vec<Scene>,
    pub unmatched_image_ids: Vec<u64>,
}

impl LoadOutcome {
    pub fn instance_count(&self) -> usize {
        self.scenes.iter().map(|s| s.instances.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Drop COCO `iscrowd` instances (and any ordering entries touching
    /// them). Off by default; crowd regions are ingested as instances.
    pub exclude_crowd: bool,
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => IngestError::FileNotFound {
            path: path.display().to_string(),
        },
        _ => IngestError::Io {
            path: path.display().to_string(),
            source,
        },
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IngestError> {
    let file = open(path)?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| IngestError::MalformedAnnotation {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Shared COCO-style pieces
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct ImageInfo {
    id: u64,
    width: u32,
    height: u32,
    #[serde(default)]
    file_name: String,
}

fn image_index(images: &[ImageInfo]) -> HashMap<u64, &ImageInfo> {
    images.iter().map(|img| (img.id, img)).collect()
}

// ---------------------------------------------------------------------------
// COCOA
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct CocoaFile {
    #[serde(default)]
    images: Vec<ImageInfo>,
    #[serde(default)]
    annotations: Vec<CocoaAnnotation>,
}

#[derive(Deserialize)]
struct CocoaAnnotation {
    image_id: u64,
    #[serde(default)]
    depth_constraint: String,
    regions: Vec<CocoaRegion>,
    #[serde(default)]
    size: Option<usize>,
}

#[derive(Deserialize)]
struct CocoaRegion {
    name: String,
    /// Amodal outline as a flat `[x,y,x,y,...]` polygon.
    #[serde(default)]
    segmentation: Option<Vec<f64>>,
    /// Visible-pixel mask, present when the region is partly occluded.
    #[serde(default)]
    visible_mask: Option<RleObject>,
}

#[derive(Deserialize)]
struct RleObject {
    size: [u32; 2],
    counts: RleCounts,
}

/// Loads a COCOA annotation file: one scene per annotation record, ground
/// truth built from its pairwise `depth_constraint` ordering.
pub fn load_cocoa(annotation_file: &Path, options: IngestOptions) -> Result<LoadOutcome, IngestError> {
    let _ = options; // COCOA regions carry no iscrowd flag
    let file: CocoaFile = parse_json(annotation_file)?;
    let images = image_index(&file.images);
    let mut scenes = Vec::with_capacity(file.annotations.len());
    let mut seen_images: HashMap<u64, usize> = HashMap::new();

    for (ann_idx, ann) in file.annotations.iter().enumerate() {
        let at = |detail: &str| format!("annotations[{ann_idx}].{detail}");
        if let Some(prev) = seen_images.insert(ann.image_id, ann_idx) {
            return Err(IngestError::MalformedAnnotation {
                path: at(&format!("image_id {}", ann.image_id)),
                detail: format!("image already annotated at annotations[{prev}]"),
            });
        }
        let image = images.get(&ann.image_id).ok_or_else(|| IngestError::DanglingReference {
            path: at("image_id"),
            detail: format!("image {} not present in images list", ann.image_id),
        })?;
        if let Some(size) = ann.size {
            if size != ann.regions.len() {
                return Err(IngestError::MalformedAnnotation {
                    path: at("size"),
                    detail: format!("declares {size} regions, found {}", ann.regions.len()),
                });
            }
        }

        let (h, w) = (image.height as usize, image.width as usize);
        let mut instances = Vec::with_capacity(ann.regions.len());
        for (reg_idx, region) in ann.regions.iter().enumerate() {
            let reg_at = at(&format!("regions[{reg_idx}]"));
            let modal: Option<Segmentation> = match (&region.visible_mask, &region.segmentation) {
                (Some(rle), _) => Some(Segmentation::Rle {
                    size: rle.size,
                    counts: rle.counts.clone(),
                }),
                (None, Some(poly)) => Some(Segmentation::Polygons(vec![poly.clone()])),
                (None, None) => None,
            };
            let bbox = region_bbox(&modal, region.segmentation.as_deref(), h, w, &reg_at)?;
            instances.push(InstanceRef {
                scene_local_id: reg_idx,
                category: region.name.clone(),
                category_index: 0,
                display_name: String::new(),
                bbox,
                segmentation: modal,
            });
        }
        let instances = assign_display_names(instances);

        let mut gt = OcclusionRelations::new(instances.len());
        for pair in ann.depth_constraint.split(',') {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            let (front, behind) =
                parse_constraint_pair(pair, instances.len(), &at("depth_constraint"))?;
            gt.set_occludes(front, behind)
                .map_err(|e| IngestError::MalformedAnnotation {
                    path: at("depth_constraint"),
                    detail: e.to_string(),
                })?;
        }

        scenes.push(Scene::new(
            ann.image_id,
            image.file_name.clone(),
            image.width,
            image.height,
            instances,
            gt,
        )?);
    }

    Ok(LoadOutcome {
        scenes,
        unmatched_image_ids: Vec::new(),
    })
}

/// Modal-mask bounds; falls back to the amodal polygon when the visible
/// mask is empty (fully occluded region), then to a zero box.
fn region_bbox(
    modal: &Option<Segmentation>,
    amodal: Option<&[f64]>,
    height: usize,
    width: usize,
    path: &str,
) -> Result<BBox, IngestError> {
    let decode_err = |e: crate::geometry::GeometryError| IngestError::MalformedAnnotation {
        path: path.to_string(),
        detail: e.to_string(),
    };
    if let Some(seg) = modal {
        if let Some(bbox) = seg.decode(height, width).map_err(decode_err)?.tight_bbox() {
            return Ok(bbox);
        }
    }
    if let Some(poly) = amodal {
        let seg = Segmentation::Polygons(vec![poly.to_vec()]);
        if let Some(bbox) = seg.decode(height, width).map_err(decode_err)?.tight_bbox() {
            return Ok(bbox);
        }
    }
    Ok(BBox::new(0.0, 0.0, 0.0, 0.0))
}

/// `"a-b"` with 1-based region indices: region `a` occludes region `b`.
fn parse_constraint_pair(pair: &str, n: usize, path: &str) -> Result<(usize, usize), IngestError> {
    let malformed = |detail: String| IngestError::MalformedAnnotation {
        path: path.to_string(),
        detail,
    };
    let (a, b) = pair
        .split_once('-')
        .ok_or_else(|| malformed(format!("expected \"a-b\", found {pair:?}")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| malformed(format!("non-numeric index in {pair:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    for idx in [a, b] {
        if idx == 0 || idx > n {
            return Err(IngestError::DanglingReference {
                path: path.to_string(),
                detail: format!("ordering pair {pair:?} names region {idx} of {n}"),
            });
        }
    }
    if a == b {
        return Err(malformed(format!(
            "ordering pair {pair:?} relates a region to itself"
        )));
    }
    Ok((a - 1, b - 1))
}

// ---------------------------------------------------------------------------
// InstaOrder + COCO
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct InstaOrderFile {
    #[serde(default)]
    annotations: Vec<InstaOrderRecord>,
}

#[derive(Deserialize)]
struct InstaOrderRecord {
    image_id: u64,
    instance_ids: Vec<u64>,
    #[serde(default)]
    occlusion: Vec<OrderEntry>,
    // depth ordering entries are intentionally not modeled
}

#[derive(Deserialize)]
struct OrderEntry {
    order: String,
}

#[derive(Deserialize)]
struct CocoFile {
    #[serde(default)]
    images: Vec<ImageInfo>,
    #[serde(default)]
    annotations: Vec<CocoAnnotation>,
    #[serde(default)]
    categories: Vec<CocoCategory>,
}

#[derive(Deserialize)]
struct CocoAnnotation {
    id: u64,
    image_id: u64,
    category_id: u64,
    #[serde(default)]
    bbox: Option<[f64; 4]>,
    #[serde(default)]
    segmentation: Option<Segmentation>,
    #[serde(default, deserialize_with = "bool_from_int")]
    iscrowd: bool,
}

#[derive(Deserialize)]
struct CocoCategory {
    id: u64,
    name: String,
}

fn bool_from_int<'de, D: Deserializer<'de>>(deserializer: D) -> Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(u8),
    }
    Ok(match Flag::deserialize(deserializer)? {
        Flag::Bool(b) => b,
        Flag::Int(i) => i != 0,
    })
}

/// Merges InstaOrder occlusion records with COCO instance metadata by image
/// id. Records whose image id is absent from the COCO file are skipped and
/// reported in `unmatched_image_ids`; only occlusion order is ingested.
pub fn load_instaorder(
    instaorder_file: &Path,
    coco_file: &Path,
    options: IngestOptions,
) -> Result<LoadOutcome, IngestError> {
    let orders: InstaOrderFile = parse_json(instaorder_file)?;
    let coco: CocoFile = parse_json(coco_file)?;
    let images = image_index(&coco.images);
    let annotations: HashMap<u64, &CocoAnnotation> =
        coco.annotations.iter().map(|a| (a.id, a)).collect();
    let categories: HashMap<u64, &str> =
        coco.categories.iter().map(|c| (c.id, c.name.as_str())).collect();

    let mut scenes = Vec::new();
    let mut unmatched = Vec::new();
    let mut seen_images: HashMap<u64, usize> = HashMap::new();

    for (rec_idx, record) in orders.annotations.iter().enumerate() {
        let at = |detail: &str| format!("annotations[{rec_idx}].{detail}");
        let Some(image) = images.get(&record.image_id) else {
            unmatched.push(record.image_id);
            continue;
        };
        if let Some(prev) = seen_images.insert(record.image_id, rec_idx) {
            return Err(IngestError::MalformedAnnotation {
                path: at(&format!("image_id {}", record.image_id)),
                detail: format!("image already annotated at annotations[{prev}]"),
            });
        }

        // kept[old position] = surviving index after the crowd filter
        let mut kept: Vec<Option<usize>> = Vec::with_capacity(record.instance_ids.len());
        let mut instances = Vec::new();
        for (pos, &ann_id) in record.instance_ids.iter().enumerate() {
            let ann = annotations.get(&ann_id).ok_or_else(|| IngestError::DanglingReference {
                path: at(&format!("instance_ids[{pos}]")),
                detail: format!("COCO annotation {ann_id} not found"),
            })?;
            if ann.image_id != record.image_id {
                return Err(IngestError::MalformedAnnotation {
                    path: at(&format!("instance_ids[{pos}]")),
                    detail: format!(
                        "COCO annotation {ann_id} belongs to image {}, record is for image {}",
                        ann.image_id, record.image_id
                    ),
                });
            }
            if options.exclude_crowd && ann.iscrowd {
                kept.push(None);
                continue;
            }
            let category = categories.get(&ann.category_id).ok_or_else(|| {
                IngestError::DanglingReference {
                    path: at(&format!("instance_ids[{pos}]")),
                    detail: format!("COCO category {} not found", ann.category_id),
                }
            })?;
            kept.push(Some(instances.len()));
            instances.push(InstanceRef {
                scene_local_id: instances.len(),
                category: category.to_string(),
                category_index: 0,
                display_name: String::new(),
                bbox: ann
                    .bbox
                    .map(BBox::from)
                    .unwrap_or_else(|| BBox::new(0.0, 0.0, 0.0, 0.0)),
                segmentation: ann.segmentation.clone(),
            });
        }
        let instances = assign_display_names(instances);

        let mut gt = OcclusionRelations::new(instances.len());
        for (entry_idx, entry) in record.occlusion.iter().enumerate() {
            let path = at(&format!("occlusion[{entry_idx}]"));
            let pairs = match parse_order_string(&entry.order, record.instance_ids.len(), &path)? {
                OrderPair::Directed(a, b) => vec![(a, b)],
                OrderPair::Mutual(a, b) => vec![(a, b), (b, a)],
            };
            for (a, b) in pairs {
                // entries touching an excluded crowd instance are dropped
                let (Some(i), Some(j)) = (kept[a], kept[b]) else {
                    continue;
                };
                gt.set_occludes(i, j)
                    .map_err(|e| IngestError::MalformedAnnotation {
                        path: path.clone(),
                        detail: e.to_string(),
                    })?;
            }
        }

        scenes.push(Scene::new(
            record.image_id,
            image.file_name.clone(),
            image.width,
            image.height,
            instances,
            gt,
        )?);
    }

    Ok(LoadOutcome {
        scenes,
        unmatched_image_ids: unmatched,
    })
}

enum OrderPair {
    Directed(usize, usize),
    Mutual(usize, usize),
}

/// `"a < b"` (a occludes b) or `"a & b"` (mutual), 0-based indices.
fn parse_order_string(order: &str, n: usize, path: &str) -> Result<OrderPair, IngestError> {
    let malformed = |detail: String| IngestError::MalformedAnnotation {
        path: path.to_string(),
        detail,
    };
    let (separator, mutual) = if order.contains('&') {
        ('&', true)
    } else if order.contains('<') {
        ('<', false)
    } else {
        return Err(malformed(format!(
            "expected \"a < b\" or \"a & b\", found {order:?}"
        )));
    };
    let (a, b) = order.split_once(separator).expect("separator just located");
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| malformed(format!("non-numeric index in {order:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    for idx in [a, b] {
        if idx >= n {
            return Err(IngestError::DanglingReference {
                path: path.to_string(),
                detail: format!("ordering entry {order:?} names instance {idx} of {n}"),
            });
        }
    }
    if a == b {
        return Err(malformed(format!(
            "ordering entry {order:?} relates an instance to itself"
        )));
    }
    Ok(if mutual {
        OrderPair::Mutual(a, b)
    } else {
        OrderPair::Directed(a, b)
    })
}

// ---------------------------------------------------------------------------
// Scenes JSONL
// ---------------------------------------------------------------------------

/// Writes one scene per line in the normalized interchange form.
pub fn write_scenes_jsonl(path: &Path, scenes: &[Scene]) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = BufWriter::new(file);
    let mut write = |bytes: &[u8]| {
        out.write_all(bytes).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    for scene in scenes {
        let line = serde_json::to_string(scene).expect("scene serialization cannot fail");
        write(line.as_bytes())?;
        write(b"\n")?;
    }
    out.flush().map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_scenes_jsonl(path: &Path) -> Result<Vec<Scene>, IngestError> {
    let file = open(path)?;
    let mut scenes = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let scene: Scene =
            serde_json::from_str(&line).map_err(|e| IngestError::MalformedAnnotation {
                path: format!("{}:{}", path.display(), idx + 1),
                detail: e.to_string(),
            })?;
        scenes.push(scene);
    }
    Ok(scenes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const COCOA_MINI: &str = r#"{
        "images": [{"id": 5, "width": 8, "height": 8, "file_name": "mini.jpg"}],
        "annotations": [{
            "image_id": 5,
            "size": 2,
            "depth_constraint": "1-2",
            "regions": [
                {"name": "person", "segmentation": [0,0, 5,0, 5,5, 0,5], "isStuff": 0},
                {"name": "bench",
                 "segmentation": [2,2, 8,2, 8,8, 2,8],
                 "visible_mask": {"size": [8, 8], "counts": [50, 2, 6, 2, 4]}}
            ]
        }]
    }"#;

    #[test]
    fn cocoa_mini_fixture_builds_one_scene_with_one_edge() {
        let file = write_temp(COCOA_MINI);
        let outcome = load_cocoa(file.path(), IngestOptions::default()).unwrap();
        assert_eq!(outcome.scenes.len(), 1);
        assert_eq!(outcome.instance_count(), 2);
        let scene = &outcome.scenes[0];
        assert_eq!(scene.image_id, 5);
        assert_eq!(scene.file_name, "mini.jpg");
        let names = scene.display_names();
        assert_eq!(names, ["person 0", "bench 0"]);
        assert_eq!(scene.ground_truth.edges().collect::<Vec<_>>(), [(0, 1)]);
        // person bbox from its polygon raster: pixels 0..4 x 0..4
        assert_eq!(scene.instances[0].bbox, BBox::new(0.0, 0.0, 5.0, 5.0));
        // bench bbox from its visible-mask RLE (pixels rows 2..3 x cols 6..7),
        // not from the amodal polygon
        let bench = &scene.instances[1];
        assert!(matches!(bench.segmentation, Some(Segmentation::Rle { .. })));
        assert_eq!(bench.bbox, BBox::new(6.0, 2.0, 2.0, 2.0));
    }

    #[test]
    fn cocoa_dangling_ordering_reference() {
        let bad = COCOA_MINI.replace("\"1-2\"", "\"1-9\"");
        let file = write_temp(&bad);
        let err = load_cocoa(file.path(), IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::DanglingReference { .. }), "{err}");
    }

    #[test]
    fn cocoa_self_pair_is_malformed() {
        let bad = COCOA_MINI.replace("\"1-2\"", "\"2-2\"");
        let file = write_temp(&bad);
        let err = load_cocoa(file.path(), IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedAnnotation { .. }), "{err}");
    }

    #[test]
    fn cocoa_size_mismatch_is_malformed() {
        let bad = COCOA_MINI.replace("\"size\": 2", "\"size\": 3");
        let file = write_temp(&bad);
        let err = load_cocoa(file.path(), IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedAnnotation { .. }), "{err}");
    }

    #[test]
    fn cocoa_missing_image_entry_is_dangling() {
        let bad = COCOA_MINI.replace("\"id\": 5", "\"id\": 6");
        let file = write_temp(&bad);
        let err = load_cocoa(file.path(), IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::DanglingReference { .. }), "{err}");
    }

    #[test]
    fn missing_file_reports_not_found() {
        let err = load_cocoa(Path::new("/nonexistent/cocoa.json"), IngestOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::FileNotFound { .. }));
    }

    #[test]
    fn malformed_json_is_reported() {
        let file = write_temp("{not json");
        let err = load_cocoa(file.path(), IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedAnnotation { .. }));
    }

    const INSTAORDER_MINI: &str = r#"{
        "annotations": [
            {"image_id": 7,
             "instance_ids": [101, 102],
             "occlusion": [{"order": "0 & 1", "count": "2"}],
             "depth": [{"order": "0 < 1", "overlap": true}]},
            {"image_id": 8,
             "instance_ids": [103],
             "occlusion": []}
        ]
    }"#;

    const COCO_MINI: &str = r#"{
        "images": [{"id": 7, "width": 16, "height": 16, "file_name": "seven.jpg"}],
        "annotations": [
            {"id": 101, "image_id": 7, "category_id": 1,
             "bbox": [1, 1, 6, 6], "segmentation": [[1,1, 7,1, 7,7, 1,7]], "iscrowd": 0},
            {"id": 102, "image_id": 7, "category_id": 2,
             "bbox": [4, 4, 8, 8], "segmentation": [[4,4, 12,4, 12,12, 4,12]], "iscrowd": 0}
        ],
        "categories": [{"id": 1, "name": "person"}, {"id": 2, "name": "bench"}]
    }"#;

    #[test]
    fn instaorder_merge_builds_mutual_pair_and_skips_unmatched() {
        let inst = write_temp(INSTAORDER_MINI);
        let coco = write_temp(COCO_MINI);
        let outcome = load_instaorder(inst.path(), coco.path(), IngestOptions::default()).unwrap();
        assert_eq!(outcome.scenes.len(), 1);
        assert_eq!(outcome.unmatched_image_ids, [8]);
        let scene = &outcome.scenes[0];
        assert_eq!(scene.file_name, "seven.jpg");
        assert_eq!(scene.display_names(), ["person 0", "bench 0"]);
        assert!(scene.ground_truth.occludes(0, 1));
        assert!(scene.ground_truth.occludes(1, 0));
        assert_eq!(scene.instances[0].bbox, BBox::new(1.0, 1.0, 6.0, 6.0));
    }

    #[test]
    fn instaorder_directed_order_sets_one_edge() {
        let inst = write_temp(&INSTAORDER_MINI.replace("0 & 1", "1 < 0"));
        let coco = write_temp(COCO_MINI);
        let outcome = load_instaorder(inst.path(), coco.path(), IngestOptions::default()).unwrap();
        let gt = &outcome.scenes[0].ground_truth;
        assert!(gt.occludes(1, 0));
        assert!(!gt.occludes(0, 1));
    }

    #[test]
    fn instaorder_missing_instance_annotation_is_dangling() {
        let inst = write_temp(&INSTAORDER_MINI.replace("[101, 102]", "[101, 999]"));
        let coco = write_temp(COCO_MINI);
        let err =
            load_instaorder(inst.path(), coco.path(), IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::DanglingReference { .. }), "{err}");
    }

    #[test]
    fn instaorder_bad_order_string_is_malformed() {
        let inst = write_temp(&INSTAORDER_MINI.replace("0 & 1", "0 ~ 1"));
        let coco = write_temp(COCO_MINI);
        let err =
            load_instaorder(inst.path(), coco.path(), IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedAnnotation { .. }), "{err}");
    }

    #[test]
    fn exclude_crowd_drops_instances_and_remaps_orders() {
        let coco_with_crowd = COCO_MINI.replace(
            r#""iscrowd": 0},"#,
            r#""iscrowd": 1},"#,
        );
        let inst = write_temp(&INSTAORDER_MINI.replace("0 & 1", "1 < 0"));
        let coco = write_temp(&coco_with_crowd);
        let outcome = load_instaorder(
            inst.path(),
            coco.path(),
            IngestOptions { exclude_crowd: true },
        )
        .unwrap();
        let scene = &outcome.scenes[0];
        // the crowd person is dropped; the order entry touching it goes too
        assert_eq!(scene.display_names(), ["bench 0"]);
        assert!(scene.ground_truth.is_all_zero());
    }

    #[test]
    fn scenes_jsonl_round_trip_is_deterministic() {
        let file = write_temp(COCOA_MINI);
        let outcome = load_cocoa(file.path(), IngestOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.jsonl");
        let path_b = dir.path().join("b.jsonl");
        write_scenes_jsonl(&path_a, &outcome.scenes).unwrap();
        write_scenes_jsonl(&path_b, &outcome.scenes).unwrap();
        assert_eq!(
            std::fs::read(&path_a).unwrap(),
            std::fs::read(&path_b).unwrap()
        );
        let back = read_scenes_jsonl(&path_a).unwrap();
        assert_eq!(back, outcome.scenes);
    }
}
