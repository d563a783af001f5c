//! Greedy score-ordered matching of detections to ground truth.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Detection, TrackedAnnotation};
use crate::error::{Error, Result};
use crate::geometry::{
    bev_iou, center_distance, corner_distance, heading_similarity, nearest_surface_distance,
    BoxBev, Vec2,
};

/// How a detection/annotation pair is scored during matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMetric {
    /// Center distance in meters; passes when `d <= threshold`.
    Center,
    /// BEV IoU; passes when `iou >= threshold`.
    Iou,
    /// Mean paired-corner distance in meters; passes when `d <= threshold`.
    Corner,
}

impl MatchMetric {
    pub fn score(self, det: &BoxBev, gt: &BoxBev) -> f64 {
        match self {
            MatchMetric::Center => center_distance(det, gt),
            MatchMetric::Iou => bev_iou(det, gt),
            MatchMetric::Corner => corner_distance(det, gt),
        }
    }

    pub fn passes(self, score: f64, threshold: f64) -> bool {
        match self {
            MatchMetric::Iou => score >= threshold,
            MatchMetric::Center | MatchMetric::Corner => score <= threshold,
        }
    }

    /// Whether `a` is a strictly better match score than `b`.
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            MatchMetric::Iou => a > b,
            MatchMetric::Center | MatchMetric::Corner => a < b,
        }
    }
}

impl FromStr for MatchMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" => Ok(Self::Center),
            "iou" => Ok(Self::Iou),
            "corner" => Ok(Self::Corner),
            other => Err(Error::InvalidInput(format!("unknown match metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub detection: usize,
    pub annotation: usize,
    /// Distance in meters, or IoU for [`MatchMetric::Iou`].
    pub score: f64,
    pub heading_similarity: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    pub pairs: Vec<MatchPair>,
    pub false_positives: Vec<usize>,
    pub false_negatives: Vec<usize>,
}

/// Detections in descending score order; equal scores keep input order.
pub fn score_order(detections: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].score.total_cmp(&detections[a].score));
    order
}

/// Vetoes a (prediction, ground truth) pairing when it returns `true`.
pub type Disqualifier<'a> = &'a dyn Fn(&BoxBev, &BoxBev) -> bool;

/// Matches each detection, highest score first, to the best-scoring
/// unmatched annotation that passes `threshold` and is not disqualified.
/// Ties go to the lower annotation index.
///
/// `disqualify(pred, gt)` returning `true` forbids that pairing.
pub fn greedy_match(
    detections: &[Detection],
    annotations: &[TrackedAnnotation],
    metric: MatchMetric,
    threshold: f64,
    disqualify: Option<Disqualifier<'_>>,
) -> MatchResult {
    let mut taken = vec![false; annotations.len()];
    let mut result = MatchResult::default();

    for di in score_order(detections) {
        let det = &detections[di].bbox;
        let mut best: Option<(usize, f64)> = None;
        for (ai, ann) in annotations.iter().enumerate() {
            if taken[ai] {
                continue;
            }
            let s = metric.score(det, &ann.bbox);
            if !metric.passes(s, threshold) {
                continue;
            }
            if disqualify.is_some_and(|f| f(det, &ann.bbox)) {
                continue;
            }
            if best.map_or(true, |(_, b)| metric.better(s, b)) {
                best = Some((ai, s));
            }
        }
        match best {
            Some((ai, s)) => {
                taken[ai] = true;
                result.pairs.push(MatchPair {
                    detection: di,
                    annotation: ai,
                    score: s,
                    heading_similarity: heading_similarity(det.yaw(), annotations[ai].bbox.yaw()),
                });
            }
            None => result.false_positives.push(di),
        }
    }
    result.false_negatives = (0..annotations.len()).filter(|&i| !taken[i]).collect();
    result
}

/// True when `pred`'s nearest surface is farther from `ego` than `gt`'s by
/// more than `d_m`. Underestimated distances are never disqualified.
pub fn safety_disqualifier(pred: &BoxBev, gt: &BoxBev, ego: Vec2, d_m: f64) -> bool {
    let d_e = nearest_surface_distance(pred, ego) - nearest_surface_distance(gt, ego);
    d_e > d_m
}

/// Splits annotations into those kept for planning-aware evaluation and
/// those removed as occluded. An explicit `planning_relevant` flag wins
/// over visibility.
pub fn partition_visible(
    annotations: &[TrackedAnnotation],
    min_visibility: f64,
) -> (Vec<TrackedAnnotation>, Vec<TrackedAnnotation>) {
    annotations.iter().cloned().partition(|a| match a.planning_relevant {
        Some(flag) => flag,
        None => a.visibility >= min_visibility,
    })
}

pub fn occlusion_filter(annotations: &[TrackedAnnotation], min_visibility: f64) -> Vec<TrackedAnnotation> {
    partition_visible(annotations, min_visibility).0
}
