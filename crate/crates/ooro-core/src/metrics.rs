//! Pairwise occlusion accuracy and dataset-level aggregation.
//!
//! A scene is scored over ordered pairs `(i, j)`, `i != j`: the prediction is
//! correct on a pair when it agrees with ground truth about whether `i`
//! occludes `j`. Two pair sets are supported: `all` (every ordered pair, the
//! default and the most literal entry-wise reading) and `gt-occluded` (only
//! pairs where ground truth relates the two instances in either direction).
//! The two bracket the plausible readings of a pooled accuracy; reports
//! always record which one was used, plus both micro (pair-pooled) and macro
//! (scene-mean) aggregation.
//!
//! A prediction whose instance count differs from ground truth cannot be
//! scored pairwise; the scene is flagged incomparable and excluded from the
//! averages but counted in the report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relations::OcclusionRelations;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no comparable scene with at least one evaluated pair")]
    EmptyEvaluation,
}

/// Which ordered pairs enter the denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    All,
    GtOccluded,
}

impl std::fmt::Display for PairMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PairMode::All => "all",
            PairMode::GtOccluded => "gt-occluded",
        })
    }
}

impl std::str::FromStr for PairMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(PairMode::All),
            "gt-occluded" => Ok(PairMode::GtOccluded),
            other => Err(format!("unknown pair mode {other:?} (expected all | gt-occluded)")),
        }
    }
}

/// Per-scene outcome. `total_pairs` is the evaluated denominator:
/// `n(n-1)` in `all` mode, the ground-truth-related pair count in
/// `gt-occluded` mode, and 0 for incomparable scenes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneEvaluation {
    pub image_id: u64,
    pub n: usize,
    pub correct_pairs: usize,
    pub total_pairs: usize,
    pub all_zero_prediction: bool,
    pub comparable: bool,
}

/// Scores one scene's prediction against ground truth.
pub fn scene_accuracy(
    image_id: u64,
    pred: &OcclusionRelations,
    gt: &OcclusionRelations,
    pair_mode: PairMode,
) -> SceneEvaluation {
    if pred.n() != gt.n() {
        return SceneEvaluation {
            image_id,
            n: gt.n(),
            correct_pairs: 0,
            total_pairs: 0,
            all_zero_prediction: pred.is_all_zero(),
            comparable: false,
        };
    }
    let n = gt.n();
    let mut correct = 0;
    let mut total = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if pair_mode == PairMode::GtOccluded && !(gt.occludes(i, j) || gt.occludes(j, i)) {
                continue;
            }
            total += 1;
            if pred.occludes(i, j) == gt.occludes(i, j) {
                correct += 1;
            }
        }
    }
    SceneEvaluation {
        image_id,
        n,
        correct_pairs: correct,
        total_pairs: total,
        all_zero_prediction: pred.is_all_zero(),
        comparable: true,
    }
}

/// Fraction of comparable scenes whose prediction asserts nothing.
pub fn all_zero_rate(evals: &[SceneEvaluation]) -> f64 {
    let comparable: Vec<_> = evals.iter().filter(|e| e.comparable).collect();
    if comparable.is_empty() {
        return 0.0;
    }
    comparable.iter().filter(|e| e.all_zero_prediction).count() as f64 / comparable.len() as f64
}

/// Dataset-level report for one method under one pair mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub dataset: String,
    pub pair_mode: PairMode,
    /// Pair-pooled: total correct pairs over total evaluated pairs.
    pub micro_accuracy: f64,
    /// Mean of per-scene accuracies over comparable scenes with pairs.
    pub macro_accuracy: f64,
    pub all_zero_rate: f64,
    pub incomparable_count: usize,
    pub per_scene: Vec<SceneEvaluation>,
}

impl EvaluationReport {
    /// Header plus one row: method, dataset, micro, macro, all-zero rate,
    /// incomparable count.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        writer
            .write_record([
                "method",
                "dataset",
                "micro_accuracy",
                "macro_accuracy",
                "all_zero_rate",
                "incomparable",
            ])
            .expect("in-memory CSV write cannot fail");
        writer
            .write_record([
                self.method.as_str(),
                self.dataset.as_str(),
                &self.micro_accuracy.to_string(),
                &self.macro_accuracy.to_string(),
                &self.all_zero_rate.to_string(),
                &self.incomparable_count.to_string(),
            ])
            .expect("in-memory CSV write cannot fail");
        String::from_utf8(writer.into_inner().expect("in-memory CSV flush cannot fail"))
            .expect("CSV output is UTF-8")
    }
}

/// Folds per-scene evaluations into a report.
///
/// Fails with [`MetricsError::EmptyEvaluation`] when no comparable scene
/// contributed a pair.
pub fn aggregate(
    evals: Vec<SceneEvaluation>,
    method: &str,
    dataset: &str,
    pair_mode: PairMode,
) -> Result<EvaluationReport, MetricsError> {
    let total_pairs: usize = evals
        .iter()
        .filter(|e| e.comparable)
        .map(|e| e.total_pairs)
        .sum();
    if total_pairs == 0 {
        return Err(MetricsError::EmptyEvaluation);
    }
    let correct_pairs: usize = evals
        .iter()
        .filter(|e| e.comparable)
        .map(|e| e.correct_pairs)
        .sum();
    let scored: Vec<f64> = evals
        .iter()
        .filter(|e| e.comparable && e.total_pairs > 0)
        .map(|e| e.correct_pairs as f64 / e.total_pairs as f64)
        .collect();
    Ok(EvaluationReport {
        method: method.to_string(),
        dataset: dataset.to_string(),
        pair_mode,
        micro_accuracy: correct_pairs as f64 / total_pairs as f64,
        macro_accuracy: scored.iter().sum::<f64>() / scored.len() as f64,
        all_zero_rate: all_zero_rate(&evals),
        incomparable_count: evals.iter().filter(|e| !e.comparable).count(),
        per_scene: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn relations(n: usize, edges: &[(usize, usize)]) -> OcclusionRelations {
        OcclusionRelations::from_edges(n, edges).unwrap()
    }

    fn table_ii_gt() -> OcclusionRelations {
        relations(3, &[(0, 2), (1, 2)])
    }

    #[test]
    fn identical_prediction_scores_one() {
        let gt = table_ii_gt();
        let eval = scene_accuracy(1, &gt, &gt, PairMode::All);
        assert_eq!(eval.correct_pairs, 6);
        assert_eq!(eval.total_pairs, 6);
        assert!(eval.comparable);
        assert!(!eval.all_zero_prediction);
    }

    #[test]
    fn missing_edge_scores_five_of_six() {
        // prediction lacks the 0 -> 2 edge: only ordered pair (0,2) differs
        let pred = relations(3, &[(1, 2)]);
        let eval = scene_accuracy(1, &pred, &table_ii_gt(), PairMode::All);
        assert_eq!(eval.correct_pairs, 5);
        assert_eq!(eval.total_pairs, 6);
    }

    #[test]
    fn instance_count_mismatch_is_incomparable() {
        let pred = OcclusionRelations::new(6);
        let eval = scene_accuracy(1, &pred, &table_ii_gt(), PairMode::All);
        assert!(!eval.comparable);
        assert_eq!(eval.total_pairs, 0);
        assert_eq!(eval.n, 3);
    }

    #[test]
    fn gt_occluded_mode_restricts_the_denominator() {
        // related pairs: (0,2),(2,0),(1,2),(2,1); pred misses 0 -> 2
        let pred = relations(3, &[(1, 2)]);
        let eval = scene_accuracy(1, &pred, &table_ii_gt(), PairMode::GtOccluded);
        assert_eq!(eval.total_pairs, 4);
        assert_eq!(eval.correct_pairs, 3);
    }

    #[test]
    fn all_zero_against_all_zero_gt_scores_one_in_all_mode() {
        let empty = OcclusionRelations::new(3);
        let eval = scene_accuracy(1, &empty, &empty, PairMode::All);
        assert_eq!(eval.correct_pairs, 6);
        assert!(eval.all_zero_prediction);
        let restricted = scene_accuracy(1, &empty, &empty, PairMode::GtOccluded);
        assert_eq!(restricted.total_pairs, 0);
    }

    #[test]
    fn aggregate_micro_and_macro() {
        let gt = table_ii_gt();
        let evals = vec![
            scene_accuracy(1, &relations(3, &[(1, 2)]), &gt, PairMode::All),
            scene_accuracy(2, &gt, &gt, PairMode::All),
        ];
        let report = aggregate(evals, "area", "fixture", PairMode::All).unwrap();
        assert_eq!(report.micro_accuracy, 11.0 / 12.0);
        assert_eq!(report.macro_accuracy, (5.0 / 6.0 + 1.0) / 2.0);
        assert_eq!(report.incomparable_count, 0);
    }

    #[test]
    fn micro_and_macro_diverge_on_uneven_scenes() {
        // scene A: 1 of 2 pairs; scene B: 6 of 6
        let a = scene_accuracy(
            1,
            &relations(2, &[(1, 0)]),
            &relations(2, &[(0, 1)]),
            PairMode::All,
        );
        assert_eq!((a.correct_pairs, a.total_pairs), (0, 2));
        let gt = table_ii_gt();
        let b = scene_accuracy(2, &gt, &gt, PairMode::All);
        let report = aggregate(vec![a, b], "x", "y", PairMode::All).unwrap();
        assert_eq!(report.micro_accuracy, 6.0 / 8.0);
        assert_eq!(report.macro_accuracy, (0.0 + 1.0) / 2.0);
    }

    #[test]
    fn aggregate_rejects_all_incomparable() {
        let evals = vec![scene_accuracy(
            1,
            &OcclusionRelations::new(6),
            &table_ii_gt(),
            PairMode::All,
        )];
        assert_eq!(
            aggregate(evals, "gpt", "fixture", PairMode::All),
            Err(MetricsError::EmptyEvaluation)
        );
    }

    #[test]
    fn all_zero_rate_counts() {
        let gt = table_ii_gt();
        let zero = OcclusionRelations::new(3);
        let none: Vec<SceneEvaluation> = (0..10)
            .map(|i| scene_accuracy(i, &gt, &gt, PairMode::All))
            .collect();
        assert_eq!(all_zero_rate(&none), 0.0);

        let mut thirteen = none.clone();
        thirteen.push(scene_accuracy(10, &zero, &gt, PairMode::All));
        thirteen.extend((11..13).map(|i| scene_accuracy(i, &gt, &gt, PairMode::All)));
        assert_eq!(all_zero_rate(&thirteen), 1.0 / 13.0);
    }

    #[test]
    fn report_csv_shape() {
        let gt = table_ii_gt();
        let report = aggregate(
            vec![scene_accuracy(1, &gt, &gt, PairMode::All)],
            "bbbd",
            "fixture",
            PairMode::All,
        )
        .unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "method,dataset,micro_accuracy,macro_accuracy,all_zero_rate,incomparable"
        );
        assert_eq!(lines.next().unwrap(), "bbbd,fixture,1,1,0,0");
    }

    prop_compose! {
        fn arb_pair(max_n: usize)(n in 0..=max_n)(
            a in arb_fixed_relations(n),
            b in arb_fixed_relations(n),
        ) -> (OcclusionRelations, OcclusionRelations) {
            (a, b)
        }
    }

    prop_compose! {
        fn arb_fixed_relations(n: usize)(
            bits in proptest::collection::vec(any::<bool>(), n * n),
        ) -> OcclusionRelations {
            let mut r = OcclusionRelations::new(n);
            for i in 0..n {
                for j in 0..n {
                    if i != j && bits[i * n + j] {
                        r.set_occludes(i, j).unwrap();
                    }
                }
            }
            r
        }
    }

    /// Independent oracle: flatten every ordered pair and count matches.
    fn brute_force_counts(
        pred: &OcclusionRelations,
        gt: &OcclusionRelations,
    ) -> (usize, usize) {
        let n = gt.n();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .collect();
        let correct = pairs
            .iter()
            .filter(|&&(i, j)| pred.occludes(i, j) == gt.occludes(i, j))
            .count();
        (correct, pairs.len())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn matches_brute_force_enumeration((pred, gt) in arb_pair(5)) {
            let eval = scene_accuracy(0, &pred, &gt, PairMode::All);
            let (correct, total) = brute_force_counts(&pred, &gt);
            prop_assert_eq!(eval.correct_pairs, correct);
            prop_assert_eq!(eval.total_pairs, total);
        }

        #[test]
        fn all_mode_is_symmetric_in_arguments((pred, gt) in arb_pair(5)) {
            let forward = scene_accuracy(0, &pred, &gt, PairMode::All);
            let backward = scene_accuracy(0, &gt, &pred, PairMode::All);
            prop_assert_eq!(forward.correct_pairs, backward.correct_pairs);
            prop_assert_eq!(forward.total_pairs, backward.total_pairs);
        }

        #[test]
        fn accuracy_is_permutation_invariant(
            (pred, gt) in arb_pair(5),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let n = gt.n();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let apply = |r: &OcclusionRelations| {
                let mut out = OcclusionRelations::new(n);
                for (i, j) in r.edges() {
                    out.set_occludes(perm[i], perm[j]).unwrap();
                }
                out
            };
            for mode in [PairMode::All, PairMode::GtOccluded] {
                let base = scene_accuracy(0, &pred, &gt, mode);
                let permuted = scene_accuracy(0, &apply(&pred), &apply(&gt), mode);
                prop_assert_eq!(base.correct_pairs, permuted.correct_pairs);
                prop_assert_eq!(base.total_pairs, permuted.total_pairs);
            }
        }
    }

    #[test]
    fn micro_matches_brute_force_over_a_thousand_scenes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xacc);
        let mut evals = Vec::new();
        let mut correct_sum = 0usize;
        let mut total_sum = 0usize;
        for image_id in 0..1000u64 {
            let n = rng.random_range(2..=5);
            let mut random_relations = || {
                let mut r = OcclusionRelations::new(n);
                for i in 0..n {
                    for j in 0..n {
                        if i != j && rng.random_bool(0.3) {
                            r.set_occludes(i, j).unwrap();
                        }
                    }
                }
                r
            };
            let pred = random_relations();
            let gt = random_relations();
            let (correct, total) = brute_force_counts(&pred, &gt);
            correct_sum += correct;
            total_sum += total;
            evals.push(scene_accuracy(image_id, &pred, &gt, PairMode::All));
        }
        let report = aggregate(evals, "random", "synthetic", PairMode::All).unwrap();
        assert_eq!(report.micro_accuracy, correct_sum as f64 / total_sum as f64);
    }
}
