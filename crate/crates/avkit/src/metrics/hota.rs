//! Higher-order tracking accuracy.

use super::matching::{scope_filter, LabeledBox};
use super::EvalScope;
use crate::scene::iou_bev;
use crate::tracking::hungarian::solve_square;
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct HotaBreakdown {
    /// Mean over the alpha grid of sqrt(DetA * AssA).
    pub hota: f64,
    pub det_a: f64,
    pub ass_a: f64,
}

/// The 19-point similarity threshold grid 0.05, 0.10, ..., 0.95.
pub fn alpha_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

/// One frame's identities and pairwise BEV IoU, shared across thresholds.
struct FrameSim {
    truth_ids: Vec<u64>,
    pred_ids: Vec<u64>,
    iou: Vec<Vec<f64>>,
}

/// HOTA over a sequence of frames. Each frame is the full set of truth and
/// prediction boxes; matching is redone at every alpha with BEV IoU as the
/// similarity.
pub fn hota(
    truth_frames: &[Vec<LabeledBox>],
    prediction_frames: &[Vec<LabeledBox>],
    scope: Option<&EvalScope>,
) -> HotaBreakdown {
    assert_eq!(truth_frames.len(), prediction_frames.len());
    let sims: Vec<FrameSim> = truth_frames
        .iter()
        .zip(prediction_frames)
        .map(|(truths, preds)| {
            let scoped: Vec<LabeledBox> = match scope {
                Some(s) => scope_filter(truths, s),
                None => truths.to_vec(),
            };
            let iou = scoped
                .iter()
                .map(|t| preds.iter().map(|p| iou_bev(&t.bbox, &p.bbox)).collect())
                .collect();
            FrameSim {
                truth_ids: scoped.iter().map(|t| t.id).collect(),
                pred_ids: preds.iter().map(|p| p.id).collect(),
                iou,
            }
        })
        .collect();
    let mut hota_sum = 0.0;
    let mut det_sum = 0.0;
    let mut ass_sum = 0.0;
    let grid = alpha_grid();
    for &alpha in &grid {
        let (det_a, ass_a) = hota_at_alpha(&sims, alpha);
        hota_sum += (det_a * ass_a).sqrt();
        det_sum += det_a;
        ass_sum += ass_a;
    }
    let n = grid.len() as f64;
    HotaBreakdown {
        hota: hota_sum / n,
        det_a: det_sum / n,
        ass_a: ass_sum / n,
    }
}

fn hota_at_alpha(frames: &[FrameSim], alpha: f64) -> (f64, f64) {
    // TP set as (truth id, prediction id) pairs, plus unmatched appearance
    // counts per identity.
    let mut tps: Vec<(u64, u64)> = Vec::new();
    let mut fn_total = 0usize;
    let mut fp_total = 0usize;
    let mut truth_unmatched: HashMap<u64, usize> = HashMap::new();
    let mut pred_unmatched: HashMap<u64, usize> = HashMap::new();
    for frame in frames {
        let nt = frame.truth_ids.len();
        let np = frame.pred_ids.len();
        let n = nt.max(np);
        let mut matched_pred = vec![false; np];
        if n > 0 {
            // Maximize total IoU; sub-threshold and padding cells cost 0,
            // the same as leaving both sides unmatched.
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i < nt && j < np && frame.iou[i][j] >= alpha {
                                -frame.iou[i][j]
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let assignment = solve_square(&cost);
            for i in 0..nt {
                let j = assignment[i];
                if j < np && cost[i][j] < 0.0 {
                    matched_pred[j] = true;
                    tps.push((frame.truth_ids[i], frame.pred_ids[j]));
                } else {
                    fn_total += 1;
                    *truth_unmatched.entry(frame.truth_ids[i]).or_default() += 1;
                }
            }
        }
        for (j, &m) in matched_pred.iter().enumerate() {
            if !m {
                fp_total += 1;
                *pred_unmatched.entry(frame.pred_ids[j]).or_default() += 1;
            }
        }
    }
    if tps.is_empty() {
        return (0.0, 0.0);
    }
    let det_a = tps.len() as f64 / (tps.len() + fn_total + fp_total) as f64;
    // Association accuracy: for each TP (i, j), TPA counts TPs with the same
    // (i, j), FNA counts appearances of truth i not matched to j, FPA counts
    // appearances of prediction j not matched to i.
    let mut pair_count: HashMap<(u64, u64), usize> = HashMap::new();
    let mut truth_tp: HashMap<u64, usize> = HashMap::new();
    let mut pred_tp: HashMap<u64, usize> = HashMap::new();
    for &(i, j) in &tps {
        *pair_count.entry((i, j)).or_default() += 1;
        *truth_tp.entry(i).or_default() += 1;
        *pred_tp.entry(j).or_default() += 1;
    }
    let mut ass_sum = 0.0;
    for &(i, j) in &tps {
        let tpa = pair_count[&(i, j)];
        let fna = truth_tp[&i] - tpa + truth_unmatched.get(&i).copied().unwrap_or(0);
        let fpa = pred_tp[&j] - tpa + pred_unmatched.get(&j).copied().unwrap_or(0);
        ass_sum += tpa as f64 / (tpa + fna + fpa) as f64;
    }
    (det_a, ass_sum / tps.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rotation, WORLD};
    use crate::scene::{BoundingBox3D, Dimensions};
    use nalgebra::Vector3;

    fn lb(id: u64, x: f64, y: f64) -> LabeledBox {
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
    fn perfect_tracking_scores_one() {
        let truths: Vec<Vec<LabeledBox>> = (0..5)
            .map(|k| vec![lb(1, k as f64, 0.0), lb(2, k as f64, 10.0)])
            .collect();
        let preds: Vec<Vec<LabeledBox>> = (0..5)
            .map(|k| vec![lb(101, k as f64, 0.0), lb(102, k as f64, 10.0)])
            .collect();
        let h = hota(&truths, &preds, None);
        assert!((h.hota - 1.0).abs() < 1e-12, "hota {}", h.hota);
        assert!((h.det_a - 1.0).abs() < 1e-12);
        assert!((h.ass_a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_switch_halves_association() {
        // One truth, tracked perfectly in position but by two different
        // prediction ids, each for half the frames. At every alpha:
        // DetA = 1; each TP has TPA = 5, FNA = 5, FPA = 0 => A(c) = 0.5.
        let truths: Vec<Vec<LabeledBox>> =
            (0..10).map(|k| vec![lb(1, k as f64, 0.0)]).collect();
        let preds: Vec<Vec<LabeledBox>> = (0..10)
            .map(|k| vec![lb(if k < 5 { 100 } else { 200 }, k as f64, 0.0)])
            .collect();
        let h = hota(&truths, &preds, None);
        assert!((h.det_a - 1.0).abs() < 1e-12);
        assert!((h.ass_a - 0.5).abs() < 1e-12);
        assert!((h.hota - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pure_clutter_and_misses_score_zero() {
        let truths: Vec<Vec<LabeledBox>> =
            (0..3).map(|_| vec![lb(1, 0.0, 0.0)]).collect();
        let preds: Vec<Vec<LabeledBox>> =
            (0..3).map(|_| vec![lb(9, 50.0, 50.0)]).collect();
        let h = hota(&truths, &preds, None);
        assert_eq!(h.hota, 0.0);
    }

    #[test]
    fn detection_misses_reduce_det_a() {
        // Truth present 10 frames, detected in 6 by one id, no FPs.
        // DetA = 6 / (6 + 4) = 0.6 at every alpha, and AssA = 0.6 as well
        // (FNA counts the 4 unmatched truth appearances).
        let truths: Vec<Vec<LabeledBox>> =
            (0..10).map(|k| vec![lb(1, k as f64, 0.0)]).collect();
        let preds: Vec<Vec<LabeledBox>> = (0..10)
            .map(|k| {
                if k % 5 < 3 {
                    vec![lb(100, k as f64, 0.0)]
                } else {
                    vec![]
                }
            })
            .collect();
        let h = hota(&truths, &preds, None);
        assert!((h.det_a - 0.6).abs() < 1e-12, "det_a {}", h.det_a);
        assert!((h.ass_a - 0.6).abs() < 1e-12, "ass_a {}", h.ass_a);
        assert!((h.hota - 0.6).abs() < 1e-12);
    }
}
