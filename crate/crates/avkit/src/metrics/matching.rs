//! Per-frame truth/prediction matching.

use super::{EvalScope, FrameEval, MatchedPair};
use crate::scene::{iou_bev, occlusion_score, BoundingBox3D};
use crate::tracking::hungarian::solve_square;

/// A box with a persistent identity, as logged by either side.
#[derive(Debug, Clone)]
pub struct LabeledBox {
    pub id: u64,
    pub bbox: BoundingBox3D,
}

/// Applies the evaluation scope: only truths within range of ego and at most
/// `max_occlusion` occluded (from the ego viewpoint, with the other truths as
/// occluders) are kept.
pub fn scope_filter(truths: &[LabeledBox], scope: &EvalScope) -> Vec<LabeledBox> {
    truths
        .iter()
        .enumerate()
        .filter(|(i, t)| {
            if (t.bbox.center - scope.ego_position).norm() > scope.max_range_m {
                return false;
            }
            let occluders: Vec<BoundingBox3D> = truths
                .iter()
                .enumerate()
                .filter(|(j, _)| j != i)
                .map(|(_, o)| o.bbox)
                .collect();
            occlusion_score(&t.bbox, &scope.ego_position, &occluders) <= scope.max_occlusion
        })
        .map(|(_, t)| t.clone())
        .collect()
}

/// Optimal one-to-one matching maximizing total IoU, subject to IoU >=
/// `iou_threshold` per pair. Unmatched truths become FN; unmatched
/// predictions become FP.
pub fn match_frame(
    truths: &[LabeledBox],
    predictions: &[LabeledBox],
    iou_threshold: f64,
    scope: Option<&EvalScope>,
) -> FrameEval {
    let scoped: Vec<LabeledBox> = match scope {
        Some(s) => scope_filter(truths, s),
        None => truths.to_vec(),
    };
    let n = scoped.len().max(predictions.len());
    if n == 0 {
        return FrameEval::default();
    }
    // Maximize total IoU by minimizing -IoU; sub-threshold and dummy cells
    // cost 0, the same as leaving both sides unmatched.
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i < scoped.len() && j < predictions.len() {
                        let iou = iou_bev(&scoped[i].bbox, &predictions[j].bbox);
                        if iou >= iou_threshold {
                            -iou
                        } else {
                            0.0
                        }
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let assignment = solve_square(&cost);
    let mut eval = FrameEval::default();
    let mut matched_preds = vec![false; predictions.len()];
    for (i, truth) in scoped.iter().enumerate() {
        let j = assignment[i];
        let iou = if j < predictions.len() {
            iou_bev(&truth.bbox, &predictions[j].bbox)
        } else {
            0.0
        };
        if j < predictions.len() && iou >= iou_threshold && cost[i][j] < 0.0 {
            matched_preds[j] = true;
            eval.matches.push(MatchedPair {
                truth_id: truth.id,
                prediction_id: predictions[j].id,
                iou,
                center_distance: (truth.bbox.center - predictions[j].bbox.center).norm(),
            });
        } else {
            eval.false_negatives.push(truth.id);
        }
    }
    for (j, pred) in predictions.iter().enumerate() {
        if !matched_preds[j] {
            eval.false_positives.push(pred.id);
        }
    }
    eval
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rotation, WORLD};
    use crate::scene::{Dimensions, OcclusionScore};
    use nalgebra::Vector3;

    pub(crate) fn lb(id: u64, x: f64, y: f64) -> LabeledBox {
        LabeledBox {
            id,
            bbox: BoundingBox3D::new(
                Vector3::new(x, y, 0.75),
                Dimensions::new(1.5, 2.0, 4.0),
                Rotation::identity(),
                WORLD,
            ),
        }
    }

    #[test]
    fn identical_sets_match_perfectly() {
        let truths = vec![lb(1, 0.0, 0.0), lb(2, 10.0, 0.0)];
        let preds = vec![lb(11, 0.0, 0.0), lb(12, 10.0, 0.0)];
        let eval = match_frame(&truths, &preds, 0.3, None);
        assert_eq!(eval.matches.len(), 2);
        assert!(eval.false_positives.is_empty());
        assert!(eval.false_negatives.is_empty());
        assert!(eval.matches.iter().all(|m| (m.iou - 1.0).abs() < 1e-12));
    }

    #[test]
    fn empty_predictions_all_fn() {
        let truths = vec![lb(1, 0.0, 0.0), lb(2, 10.0, 0.0), lb(3, 20.0, 0.0)];
        let eval = match_frame(&truths, &[], 0.3, None);
        assert_eq!(eval.false_negatives.len(), 3);
        assert!(eval.matches.is_empty());
    }

    #[test]
    fn crossing_pair_resolved_optimally() {
        // Greedy by first truth would grab the high-IoU pred and strand the
        // second truth below threshold; the optimal matching crosses.
        let truths = vec![lb(1, 0.0, 0.0), lb(2, 1.2, 0.0)];
        let preds = vec![lb(11, 0.9, 0.0), lb(12, 0.3, 0.0)];
        let eval = match_frame(&truths, &preds, 0.1, None);
        // Exhaustive oracle over the 2x2 pairings.
        let iou = |t: &LabeledBox, p: &LabeledBox| iou_bev(&t.bbox, &p.bbox);
        let straight = iou(&truths[0], &preds[0]) + iou(&truths[1], &preds[1]);
        let crossed = iou(&truths[0], &preds[1]) + iou(&truths[1], &preds[0]);
        let best = straight.max(crossed);
        let total: f64 = eval.matches.iter().map(|m| m.iou).sum();
        assert!((total - best).abs() < 1e-12, "total {total} best {best}");
        assert_eq!(eval.matches.len(), 2);
    }

    #[test]
    fn scope_drops_far_and_occluded_truths() {
        let scope = EvalScope {
            ego_position: Vector3::new(0.0, 0.0, 0.75),
            max_range_m: 100.0,
            max_occlusion: OcclusionScore::Partial,
        };
        // Far truth, plus one fully hidden behind a big occluder.
        let mut wall = lb(9, 20.0, 0.0);
        wall.bbox.dimensions = Dimensions::new(10.0, 30.0, 1.0);
        wall.bbox.center.z = 2.0;
        let hidden = lb(2, 40.0, 0.0);
        let far = lb(3, 200.0, 0.0);
        let near = lb(1, 5.0, 3.0);
        let truths = vec![near.clone(), hidden, far, wall];
        let kept = scope_filter(&truths, &scope);
        let ids: Vec<u64> = kept.iter().map(|t| t.id).collect();
        assert!(ids.contains(&1));
        assert!(ids.contains(&9));
        assert!(!ids.contains(&2), "fully occluded truth kept: {ids:?}");
        assert!(!ids.contains(&3), "out-of-range truth kept");
    }
}
