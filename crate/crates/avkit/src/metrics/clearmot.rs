//! CLEAR-MOT and track coverage rates over a matched sequence.

use super::FrameEval;
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearMot {
    /// 1 - (FN + FP + IDSW) / GT; may be negative. NaN when GT = 0.
    pub mota: f64,
    /// Mean center distance (metres) over matched pairs. NaN when no matches.
    pub motp: f64,
    pub id_switches: usize,
    pub false_negatives: usize,
    pub false_positives: usize,
    pub ground_truths: usize,
}

pub fn clear_mot(frames: &[FrameEval]) -> ClearMot {
    let mut fn_total = 0usize;
    let mut fp_total = 0usize;
    let mut gt_total = 0usize;
    let mut idsw = 0usize;
    let mut dist_sum = 0.0;
    let mut match_count = 0usize;
    // Last prediction id matched to each truth, across frames.
    let mut last_match: HashMap<u64, u64> = HashMap::new();
    for frame in frames {
        fn_total += frame.false_negatives.len();
        fp_total += frame.false_positives.len();
        gt_total += frame.false_negatives.len() + frame.matches.len();
        for m in &frame.matches {
            if let Some(&prev) = last_match.get(&m.truth_id) {
                if prev != m.prediction_id {
                    idsw += 1;
                }
            }
            last_match.insert(m.truth_id, m.prediction_id);
            dist_sum += m.center_distance;
            match_count += 1;
        }
    }
    let mota = if gt_total == 0 {
        f64::NAN
    } else {
        1.0 - (fn_total + fp_total + idsw) as f64 / gt_total as f64
    };
    let motp = if match_count == 0 {
        f64::NAN
    } else {
        dist_sum / match_count as f64
    };
    ClearMot {
        mota,
        motp,
        id_switches: idsw,
        false_negatives: fn_total,
        false_positives: fp_total,
        ground_truths: gt_total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRates {
    /// Mean number of never-matched prediction tracks present per frame.
    pub false_track_rate: f64,
    /// Fraction of truth identities never matched in any frame.
    pub missed_track_rate: f64,
}

pub fn track_rates(frames: &[FrameEval]) -> TrackRates {
    let mut matched_preds: HashSet<u64> = HashSet::new();
    let mut matched_truths: HashSet<u64> = HashSet::new();
    let mut all_truths: HashSet<u64> = HashSet::new();
    for frame in frames {
        for m in &frame.matches {
            matched_preds.insert(m.prediction_id);
            matched_truths.insert(m.truth_id);
            all_truths.insert(m.truth_id);
        }
        all_truths.extend(frame.false_negatives.iter().copied());
    }
    let mut false_present = 0usize;
    for frame in frames {
        false_present += frame
            .false_positives
            .iter()
            .filter(|id| !matched_preds.contains(id))
            .count();
    }
    let false_track_rate = if frames.is_empty() {
        f64::NAN
    } else {
        false_present as f64 / frames.len() as f64
    };
    let missed_track_rate = if all_truths.is_empty() {
        f64::NAN
    } else {
        all_truths
            .iter()
            .filter(|id| !matched_truths.contains(id))
            .count() as f64
            / all_truths.len() as f64
    };
    TrackRates {
        false_track_rate,
        missed_track_rate,
    }
}
