//! The three deterministic heuristic predictors: Area, Y-Axis, and BBBD.
//!
//! All three assert a relation only for candidate pairs — unordered pairs
//! whose bounding boxes overlap with positive area. Area and Y-Axis are
//! meaningless for distant objects and BBBD is undefined without an
//! intersection region, so non-overlapping pairs stay unrelated.
//!
//! Tie-breaking is fixed so runs are reproducible: Area breaks equal areas
//! toward the lower instance id; Y-Axis breaks equal bottoms by larger area,
//! then lower id; BBBD emits nothing on equal in-region pixel counts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BinaryMask, GeometryError};
use crate::relations::OcclusionRelations;
use crate::scene::Scene;

/// The heuristic families compared against the vision-LLM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Area,
    YAxis,
    Bbbd,
}

impl std::fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BaselineKind::Area => "area",
            BaselineKind::YAxis => "yaxis",
            BaselineKind::Bbbd => "bbbd",
        })
    }
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("no instance in the scene has a mask; instances {instances:?} are missing one")]
    MissingMask { instances: Vec<usize> },
    #[error("instance {instance}: {source}")]
    BadMask {
        instance: usize,
        source: GeometryError,
    },
}

/// Unordered index pairs `(i, j)`, `i < j`, whose boxes overlap with
/// positive area.
pub fn candidate_pairs(scene: &Scene) -> Vec<(usize, usize)> {
    let n = scene.instances.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if scene.instances[i]
                .bbox
                .intersection(&scene.instances[j].bbox)
                .is_some()
            {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Larger bounding-box area occludes; equal areas fall to the lower id.
pub fn predict_area(scene: &Scene) -> OcclusionRelations {
    let mut relations = OcclusionRelations::new(scene.instances.len());
    for (i, j) in candidate_pairs(scene) {
        let (ai, aj) = (scene.instances[i].bbox.area(), scene.instances[j].bbox.area());
        let (occluder, occludee) = if aj > ai { (j, i) } else { (i, j) };
        relations
            .set_occludes(occluder, occludee)
            .expect("candidate pairs are distinct in-range indices");
    }
    relations
}

/// Lower bbox bottom edge occludes; ties fall to larger area, then lower id.
pub fn predict_yaxis(scene: &Scene) -> OcclusionRelations {
    let mut relations = OcclusionRelations::new(scene.instances.len());
    for (i, j) in candidate_pairs(scene) {
        let (bi, bj) = (scene.instances[i].bbox, scene.instances[j].bbox);
        let lower_j =
            bj.bottom() > bi.bottom() || (bj.bottom() == bi.bottom() && bj.area() > bi.area());
        let (occluder, occludee) = if lower_j { (j, i) } else { (i, j) };
        relations
            .set_occludes(occluder, occludee)
            .expect("candidate pairs are distinct in-range indices");
    }
    relations
}

/// Boundary-box-based detection: within each candidate pair's intersection
/// rectangle, the instance with more visible mask pixels occludes the other.
/// Equal counts, empty regions, and pairs missing a mask assert nothing.
///
/// Fails only when the scene has instances and none carries a mask.
pub fn predict_bbbd(scene: &Scene) -> Result<OcclusionRelations, BaselineError> {
    let (h, w) = (scene.height as usize, scene.width as usize);
    let mut masks: Vec<Option<BinaryMask>> = Vec::with_capacity(scene.instances.len());
    for inst in &scene.instances {
        match inst.decode_mask(h, w) {
            Some(Ok(mask)) => masks.push(Some(mask)),
            Some(Err(source)) => {
                return Err(BaselineError::BadMask {
                    instance: inst.scene_local_id,
                    source,
                })
            }
            None => masks.push(None),
        }
    }
    if !scene.instances.is_empty() && masks.iter().all(Option::is_none) {
        return Err(BaselineError::MissingMask {
            instances: (0..scene.instances.len()).collect(),
        });
    }

    let mut relations = OcclusionRelations::new(scene.instances.len());
    for (i, j) in candidate_pairs(scene) {
        let (Some(mask_i), Some(mask_j)) = (&masks[i], &masks[j]) else {
            continue;
        };
        let Some(region) = scene.instances[i]
            .bbox
            .intersection(&scene.instances[j].bbox)
        else {
            continue;
        };
        let count_i = mask_i.count_in_region(&region);
        let count_j = mask_j.count_in_region(&region);
        match count_i.cmp(&count_j) {
            std::cmp::Ordering::Greater => relations
                .set_occludes(i, j)
                .expect("candidate pairs are distinct in-range indices"),
            std::cmp::Ordering::Less => relations
                .set_occludes(j, i)
                .expect("candidate pairs are distinct in-range indices"),
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(relations)
}

/// Runs the named baseline.
pub fn predict(kind: BaselineKind, scene: &Scene) -> Result<OcclusionRelations, BaselineError> {
    match kind {
        BaselineKind::Area => Ok(predict_area(scene)),
        BaselineKind::YAxis => Ok(predict_yaxis(scene)),
        BaselineKind::Bbbd => predict_bbbd(scene),
    }
}
