//! Full evaluation: every metric family, with and without the latency shift.
//!
//! A cell is one (metric, class, threshold) combination. Aggregates average
//! cells over classes first, then over thresholds, skipping cells that have
//! neither ground truth nor detections.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ap::{ahs_average, average_precision, pr_curve, Outcome};
use crate::data::{derive_gt_velocities_with, Detection, EvalConfig, Scene, TrackedAnnotation};
use crate::error::{Error, Result};
use crate::geometry::{corner_distance, BoxBev, Vec2};
use crate::latency::{frame_latency, latency_shift_frame};
use crate::matching::{greedy_match, partition_visible, safety_disqualifier, Disqualifier, MatchMetric};

/// The ego origin in every frame's coordinate system.
pub const EGO_ORIGIN: Vec2 = Vec2::ZERO;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFamily {
    /// Center distance over `center_thresholds`.
    Center,
    /// BEV IoU over `iou_thresholds`.
    Iou,
    /// Corner distance over `corner_thresholds`.
    Corner,
    /// Center-distance matching, heading-weighted precision.
    Heading,
    /// Occlusion filter, corner distance and the safety disqualifier.
    Planning,
}

impl MetricFamily {
    pub const ALL: [MetricFamily; 5] = [
        MetricFamily::Center,
        MetricFamily::Iou,
        MetricFamily::Corner,
        MetricFamily::Heading,
        MetricFamily::Planning,
    ];

    pub fn thresholds(self, cfg: &EvalConfig) -> &[f64] {
        match self {
            MetricFamily::Center | MetricFamily::Heading => &cfg.center_thresholds,
            MetricFamily::Iou => &cfg.iou_thresholds,
            MetricFamily::Corner | MetricFamily::Planning => &cfg.corner_thresholds,
        }
    }

    fn match_metric(self) -> MatchMetric {
        match self {
            MetricFamily::Center | MetricFamily::Heading => MatchMetric::Center,
            MetricFamily::Iou => MatchMetric::Iou,
            MetricFamily::Corner | MetricFamily::Planning => MatchMetric::Corner,
        }
    }
}

impl std::str::FromStr for MetricFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" => Ok(Self::Center),
            "iou" => Ok(Self::Iou),
            "corner" => Ok(Self::Corner),
            "heading" | "ahs" => Ok(Self::Heading),
            "planning" => Ok(Self::Planning),
            other => Err(Error::InvalidInput(format!("unknown metric family `{other}`"))),
        }
    }
}

/// A metric family, evaluated either on the frame as captured or after the
/// latency shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Metric {
    pub family: MetricFamily,
    pub latency: bool,
}

impl Metric {
    pub const MAP: Metric = Metric::new(MetricFamily::Center, false);
    pub const MAP_IOU: Metric = Metric::new(MetricFamily::Iou, false);
    pub const MAP_CORNER: Metric = Metric::new(MetricFamily::Corner, false);
    pub const MAHS: Metric = Metric::new(MetricFamily::Heading, false);
    pub const L_MAP: Metric = Metric::new(MetricFamily::Center, true);
    pub const P_MAP: Metric = Metric::new(MetricFamily::Planning, false);
    pub const LP_MAP: Metric = Metric::new(MetricFamily::Planning, true);

    pub const fn new(family: MetricFamily, latency: bool) -> Self {
        Metric { family, latency }
    }

    /// Both latency variants of every family.
    pub fn all() -> Vec<Metric> {
        Self::for_families(&MetricFamily::ALL)
    }

    pub fn for_families(families: &[MetricFamily]) -> Vec<Metric> {
        [false, true]
            .into_iter()
            .flat_map(|l| families.iter().map(move |&f| Metric::new(f, l)))
            .collect()
    }

    /// Name of the class-and-threshold mean, e.g. `L-mAP@IoU`.
    pub fn aggregate_name(self) -> &'static str {
        use MetricFamily::*;
        match (self.family, self.latency) {
            (Center, false) => "mAP",
            (Center, true) => "L-mAP",
            (Iou, false) => "mAP@IoU",
            (Iou, true) => "L-mAP@IoU",
            (Corner, false) => "mAP@Corner",
            (Corner, true) => "L-mAP@Corner",
            (Heading, false) => "mAHS@Center",
            (Heading, true) => "L-mAHS@Center",
            (Planning, false) => "P-mAP",
            (Planning, true) => "LP-mAP",
        }
    }

    /// Name of a single cell, e.g. `L-AP@IoU`.
    pub fn cell_name(self) -> &'static str {
        use MetricFamily::*;
        match (self.family, self.latency) {
            (Center, false) => "AP@Center",
            (Center, true) => "L-AP@Center",
            (Iou, false) => "AP@IoU",
            (Iou, true) => "L-AP@IoU",
            (Corner, false) => "AP@Corner",
            (Corner, true) => "L-AP@Corner",
            (Heading, false) => "AHS@Center",
            (Heading, true) => "L-AHS@Center",
            (Planning, false) => "P-AP",
            (Planning, true) => "LP-AP",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.aggregate_name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub metric: Metric,
    pub class_label: String,
    pub threshold: f64,
    /// AP in `[0, 1]`; `None` when the cell has no ground truth and no
    /// detections and is left out of the means.
    pub ap: Option<f64>,
    pub n_gt: usize,
    pub n_det: usize,
    pub n_tp: usize,
    /// Detections were present without any ground truth; `ap` is 0.
    pub no_ground_truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub metric: Metric,
    /// Mean in `[0, 1]`; `None` when every cell was excluded.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub cells: Vec<Cell>,
    pub aggregates: Vec<Aggregate>,
    /// Detections whose class is not in the config.
    pub ignored_detections: usize,
}

impl MetricReport {
    /// Aggregate on the 0–100 reporting scale.
    pub fn score(&self, metric: Metric) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.metric == metric)
            .and_then(|a| a.value)
            .map(|v| v * 100.0)
    }

    pub fn cells_for(&self, metric: Metric) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.metric == metric)
    }

    pub fn metrics(&self) -> Vec<Metric> {
        self.aggregates.iter().map(|a| a.metric).collect()
    }
}

struct FrameView {
    annotations: Vec<TrackedAnnotation>,
    detections: Vec<Detection>,
}

struct PreparedFrame {
    captured: FrameView,
    shifted: Option<FrameView>,
}

fn of_class<'a>(view: &'a FrameView, class: &'a str) -> (Vec<TrackedAnnotation>, Vec<Detection>) {
    (
        view.annotations
            .iter()
            .filter(|a| a.class_label == class)
            .cloned()
            .collect(),
        view.detections
            .iter()
            .filter(|d| d.class_label == class)
            .cloned()
            .collect(),
    )
}

/// Evaluates every metric in [`Metric::all`].
pub fn evaluate(scenes: &[Scene], cfg: &EvalConfig) -> Result<MetricReport> {
    evaluate_metrics(scenes, cfg, &Metric::all())
}

pub fn evaluate_metrics(scenes: &[Scene], cfg: &EvalConfig, metrics: &[Metric]) -> Result<MetricReport> {
    let classes: BTreeSet<&str> = cfg.classes.iter().map(String::as_str).collect();
    let mut seen = false;
    let mut ignored_detections = 0;
    for frame in scenes.iter().flat_map(|s| &s.frames) {
        seen |= frame.annotations.iter().any(|a| classes.contains(a.class_label.as_str()));
        for d in &frame.detections {
            if classes.contains(d.class_label.as_str()) {
                seen = true;
            } else {
                ignored_detections += 1;
            }
        }
    }
    if !seen {
        return Err(Error::EmptyClassIntersection);
    }

    let need_shift = metrics.iter().any(|m| m.latency);
    let mut frames = Vec::new();
    for scene in scenes {
        let scene = derive_gt_velocities_with(scene, cfg.gt_velocity_source)?;
        for frame in &scene.frames {
            let shifted = if need_shift {
                let e = latency_shift_frame(frame, frame_latency(frame, cfg), cfg)?;
                Some(FrameView {
                    annotations: e.shifted_annotations,
                    detections: e.shifted_detections,
                })
            } else {
                None
            };
            frames.push(PreparedFrame {
                captured: FrameView {
                    annotations: frame.annotations.clone(),
                    detections: frame.detections.clone(),
                },
                shifted,
            });
        }
    }

    let mut work = Vec::new();
    for &metric in metrics {
        for class in &cfg.classes {
            for &t in metric.family.thresholds(cfg) {
                work.push((metric, class.as_str(), t));
            }
        }
    }
    let cells: Vec<Cell> = work
        .par_iter()
        .map(|&(metric, class, threshold)| evaluate_cell(&frames, cfg, metric, class, threshold))
        .collect();

    let aggregates = metrics
        .iter()
        .map(|&metric| Aggregate {
            metric,
            value: aggregate(&cells, metric, metric.family.thresholds(cfg)),
        })
        .collect();

    Ok(MetricReport {
        cells,
        aggregates,
        ignored_detections,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn aggregate(cells: &[Cell], metric: Metric, thresholds: &[f64]) -> Option<f64> {
    mean(thresholds.iter().filter_map(|&t| {
        mean(
            cells
                .iter()
                .filter(|c| c.metric == metric && c.threshold == t)
                .filter_map(|c| c.ap),
        )
    }))
}

fn evaluate_cell(
    frames: &[PreparedFrame],
    cfg: &EvalConfig,
    metric: Metric,
    class: &str,
    threshold: f64,
) -> Cell {
    let match_metric = metric.family.match_metric();
    let d_m = cfg.margin_d_m;
    let disqualify = move |p: &BoxBev, g: &BoxBev| safety_disqualifier(p, g, EGO_ORIGIN, d_m);

    let mut outcomes = Vec::new();
    let mut n_gt = 0;
    let mut n_tp = 0;
    for frame in frames {
        let view = if metric.latency {
            frame.shifted.as_ref().expect("shifted frames prepared for latency metrics")
        } else {
            &frame.captured
        };
        let (anns, dets) = of_class(view, class);

        let (kept, removed, dq): (_, _, Option<Disqualifier<'_>>) =
            if metric.family == MetricFamily::Planning {
                let (kept, removed) = partition_visible(&anns, cfg.min_visibility);
                (kept, removed, Some(&disqualify))
            } else {
                (anns, Vec::new(), None)
            };

        let result = greedy_match(&dets, &kept, match_metric, threshold, dq);
        n_gt += kept.len();
        n_tp += result.pairs.len();
        outcomes.extend(
            result
                .pairs
                .iter()
                .map(|p| Outcome::tp(dets[p.detection].score, p.heading_similarity)),
        );
        for &fp in &result.false_positives {
            // a hit on occluded ground truth is neither rewarded nor punished
            let on_removed = removed
                .iter()
                .any(|g| corner_distance(&dets[fp].bbox, &g.bbox) <= threshold);
            if !on_removed {
                outcomes.push(Outcome::fp(dets[fp].score));
            }
        }
    }

    let n_det = outcomes.len();
    let ap = if n_gt == 0 && n_det == 0 {
        None
    } else if metric.family == MetricFamily::Heading {
        Some(ahs_average(&outcomes, n_gt, cfg.ap_mode))
    } else {
        Some(average_precision(&pr_curve(&outcomes, n_gt), cfg.ap_mode))
    };

    Cell {
        metric,
        class_label: class.to_owned(),
        threshold,
        ap,
        n_gt,
        n_det,
        n_tp,
        no_ground_truth: n_gt == 0 && n_det > 0,
    }
}
