//! Scene and instance model shared by ingestion, baselines, and evaluation.
//!
//! Instances keep their annotation-file order; that order fixes matrix row
//! and column identity everywhere downstream. Display names are always
//! numbered ("person 0" even for singletons) so parsing stays unambiguous.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use crate::geometry::{BBox, BinaryMask, GeometryError, Segmentation};
use crate::relations::{OcclusionRelations, RelationError, SignedOrderMatrix};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene {image_id}: ground truth is {gt_n}x{gt_n} but the scene has {instances} instances")]
    GroundTruthSizeMismatch {
        image_id: u64,
        gt_n: usize,
        instances: usize,
    },
    #[error("scene {image_id}: {source}")]
    InvalidGroundTruth {
        image_id: u64,
        source: RelationError,
    },
    #[error("duplicate display name {name:?}")]
    DuplicateDisplayName { name: String },
    #[error("instance {index}: display name {found:?} does not match {expected:?}")]
    DisplayNameMismatch {
        index: usize,
        expected: String,
        found: String,
    },
}

/// One annotated object in a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRef {
    /// Position in the scene's instance list.
    pub scene_local_id: usize,
    pub category: String,
    /// Ordinal among same-category instances, assigned in list order.
    pub category_index: usize,
    /// Always `"<category> <category_index>"`.
    pub display_name: String,
    pub bbox: BBox,
    /// Modal mask source, decoded on demand.
    pub segmentation: Option<Segmentation>,
}

impl InstanceRef {
    /// Decodes the modal mask at the scene's dimensions, if one is attached.
    pub fn decode_mask(&self, height: usize, width: usize) -> Option<Result<BinaryMask, GeometryError>> {
        self.segmentation.as_ref().map(|s| s.decode(height, width))
    }
}

/// One image's instances plus its ground-truth occlusion relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SceneRecord", into = "SceneRecord")]
pub struct Scene {
    pub image_id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<InstanceRef>,
    pub ground_truth: OcclusionRelations,
}

impl Scene {
    /// Builds a scene, clamping instance boxes to the image bounds and
    /// checking the ground-truth size against the instance count.
    pub fn new(
        image_id: u64,
        file_name: String,
        width: u32,
        height: u32,
        mut instances: Vec<InstanceRef>,
        ground_truth: OcclusionRelations,
    ) -> Result<Self, SceneError> {
        if ground_truth.n() != instances.len() {
            return Err(SceneError::GroundTruthSizeMismatch {
                image_id,
                gt_n: ground_truth.n(),
                instances: instances.len(),
            });
        }
        for inst in &mut instances {
            inst.bbox = inst.bbox.clamp_to(width as f64, height as f64);
        }
        Ok(Self {
            image_id,
            file_name,
            width,
            height,
            instances,
            ground_truth,
        })
    }

    pub fn display_names(&self) -> Vec<String> {
        self.instances.iter().map(|i| i.display_name.clone()).collect()
    }
}

/// Ordered display names for one scene; entries are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryList {
    names: Vec<String>,
}

impl CategoryList {
    pub fn new(names: Vec<String>) -> Result<Self, SceneError> {
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(SceneError::DuplicateDisplayName { name: name.clone() });
            }
        }
        Ok(Self { names })
    }

    /// Infallible: display names are unique within a scene by construction.
    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            names: scene.display_names(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Single CSV line of the names in instance order, RFC 4180 quoting.
    pub fn csv_line(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        writer
            .write_record(&self.names)
            .expect("in-memory CSV write cannot fail");
        let bytes = writer.into_inner().expect("in-memory CSV flush cannot fail");
        let mut line = String::from_utf8(bytes).expect("CSV output is UTF-8");
        while line.ends_with('\n') || line.ends_with('\r') {
            line.pop();
        }
        line
    }

    /// Parses one CSV line back into names (the `csv_line` inverse).
    pub fn from_csv_line(line: &str) -> Result<Self, SceneError> {
        if line.trim().is_empty() {
            return Self::new(Vec::new());
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(line.as_bytes());
        let mut names = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|_| SceneError::DuplicateDisplayName {
                name: line.to_string(),
            })?;
            names.extend(record.iter().map(|f| f.to_string()));
        }
        Self::new(names)
    }
}

/// The paper's prompt for one scene: display names joined as a CSV line.
pub fn category_csv(scene: &Scene) -> String {
    CategoryList::from_scene(scene).csv_line()
}

/// Assigns per-category indices in list order and the `"<category> <index>"`
/// display names. All instances are numbered, singletons included.
pub fn assign_display_names(instances: Vec<InstanceRef>) -> Vec<InstanceRef> {
    let mut counters: HashMap<String, usize> = HashMap::new();
    instances
        .into_iter()
        .enumerate()
        .map(|(pos, mut inst)| {
            let counter = counters.entry(inst.category.clone()).or_insert(0);
            inst.scene_local_id = pos;
            inst.category_index = *counter;
            inst.display_name = format!("{} {}", inst.category, inst.category_index);
            *counter += 1;
            inst
        })
        .collect()
}

// ---------------------------------------------------------------------------
// JSONL interchange form
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SceneRecord {
    image_id: u64,
    file_name: String,
    width: u32,
    height: u32,
    instances: Vec<InstanceRecord>,
    gt_signed: SignedOrderMatrix,
}

#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    category: String,
    category_index: usize,
    display_name: String,
    bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    segmentation: Option<Segmentation>,
}

impl From<Scene> for SceneRecord {
    fn from(scene: Scene) -> Self {
        SceneRecord {
            image_id: scene.image_id,
            file_name: scene.file_name,
            width: scene.width,
            height: scene.height,
            instances: scene
                .instances
                .into_iter()
                .map(|i| InstanceRecord {
                    category: i.category,
                    category_index: i.category_index,
                    display_name: i.display_name,
                    bbox: i.bbox.into(),
                    segmentation: i.segmentation,
                })
                .collect(),
            gt_signed: scene.ground_truth.to_signed(),
        }
    }
}

impl TryFrom<SceneRecord> for Scene {
    type Error = SceneError;

    fn try_from(record: SceneRecord) -> Result<Self, Self::Error> {
        let ground_truth = OcclusionRelations::from_signed(&record.gt_signed).map_err(|source| {
            SceneError::InvalidGroundTruth {
                image_id: record.image_id,
                source,
            }
        })?;
        let instances: Vec<InstanceRef> = record
            .instances
            .into_iter()
            .enumerate()
            .map(|(pos, i)| InstanceRef {
                scene_local_id: pos,
                category: i.category,
                category_index: i.category_index,
                display_name: i.display_name,
                bbox: i.bbox.into(),
                segmentation: i.segmentation,
            })
            .collect();
        for inst in &instances {
            let expected = format!("{} {}", inst.category, inst.category_index);
            if inst.display_name != expected {
                return Err(SceneError::DisplayNameMismatch {
                    index: inst.scene_local_id,
                    expected,
                    found: inst.display_name.clone(),
                });
            }
        }
        Scene::new(
            record.image_id,
            record.file_name,
            record.width,
            record.height,
            instances,
            ground_truth,
        )
    }
}
