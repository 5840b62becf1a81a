//! Average precision over confidence-ranked detections.

use crate::scene::{iou_bev, BoundingBox3D, ObjectType};

#[derive(Debug, Clone)]
pub struct ScoredDetection {
    pub frame: usize,
    pub object_type: ObjectType,
    pub confidence: f64,
    pub bbox: BoundingBox3D,
}

#[derive(Debug, Clone)]
pub struct TruthBox {
    pub frame: usize,
    pub object_type: ObjectType,
    pub bbox: BoundingBox3D,
}

/// AP for one class: detections ranked by confidence across the whole
/// sequence, greedily matched to the highest-IoU unclaimed truth in the same
/// frame, then the precision-recall curve integrated with all-points
/// interpolation. Returns None when the class has no ground truth.
pub fn average_precision(
    detections: &[ScoredDetection],
    truths: &[TruthBox],
    object_type: ObjectType,
    iou_threshold: f64,
) -> Option<f64> {
    let truth_idx: Vec<usize> = truths
        .iter()
        .enumerate()
        .filter(|(_, t)| t.object_type == object_type)
        .map(|(i, _)| i)
        .collect();
    if truth_idx.is_empty() {
        return None;
    }
    let mut dets: Vec<&ScoredDetection> = detections
        .iter()
        .filter(|d| d.object_type == object_type)
        .collect();
    dets.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    let mut claimed = vec![false; truths.len()];
    let mut tp_flags = Vec::with_capacity(dets.len());
    for det in &dets {
        let mut best: Option<(usize, f64)> = None;
        for &ti in &truth_idx {
            if claimed[ti] || truths[ti].frame != det.frame {
                continue;
            }
            let iou = iou_bev(&det.bbox, &truths[ti].bbox);
            if iou >= iou_threshold && best.map_or(true, |(_, b)| iou > b) {
                best = Some((ti, iou));
            }
        }
        match best {
            Some((ti, _)) => {
                claimed[ti] = true;
                tp_flags.push(true);
            }
            None => tp_flags.push(false),
        }
    }
    // All-points interpolation: sum over recall steps of the maximum
    // precision achieved at or beyond that recall.
    let total_gt = truth_idx.len() as f64;
    let mut precisions = Vec::with_capacity(tp_flags.len());
    let mut recalls = Vec::with_capacity(tp_flags.len());
    let mut tp = 0usize;
    for (k, &is_tp) in tp_flags.iter().enumerate() {
        if is_tp {
            tp += 1;
        }
        precisions.push(tp as f64 / (k + 1) as f64);
        recalls.push(tp as f64 / total_gt);
    }
    // Make precision monotonically non-increasing from the right.
    for k in (0..precisions.len().saturating_sub(1)).rev() {
        precisions[k] = precisions[k].max(precisions[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for k in 0..recalls.len() {
        if recalls[k] > prev_recall {
            ap += (recalls[k] - prev_recall) * precisions[k];
            prev_recall = recalls[k];
        }
    }
    Some(ap)
}

/// Mean AP over the classes present in the ground truth.
pub fn mean_average_precision(
    detections: &[ScoredDetection],
    truths: &[TruthBox],
    iou_threshold: f64,
) -> f64 {
    let mut classes: Vec<ObjectType> = truths.iter().map(|t| t.object_type).collect();
    classes.sort();
    classes.dedup();
    if classes.is_empty() {
        return f64::NAN;
    }
    let sum: f64 = classes
        .iter()
        .filter_map(|&c| average_precision(detections, truths, c, iou_threshold))
        .sum();
    sum / classes.len() as f64
}
