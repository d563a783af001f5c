//! Precision-recall curves and average precision.

use crate::data::ApMode;

/// Number of evenly spaced recall samples, `0.00, 0.01, ..., 1.00`.
pub const RECALL_SAMPLES: usize = 101;

/// Recall at or below this is skipped in [`ApMode::RecallClipped`].
pub const MIN_RECALL: f64 = 0.1;
/// Precision at or below this counts as zero in [`ApMode::RecallClipped`].
pub const MIN_PRECISION: f64 = 0.1;

/// One detection's outcome after matching, pooled across frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub score: f64,
    pub true_positive: bool,
    /// Heading similarity of the match; ignored for false positives.
    pub heading_similarity: f64,
}

impl Outcome {
    pub fn tp(score: f64, heading_similarity: f64) -> Self {
        Outcome {
            score,
            true_positive: true,
            heading_similarity,
        }
    }

    pub fn fp(score: f64) -> Self {
        Outcome {
            score,
            true_positive: false,
            heading_similarity: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub score: f64,
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrCurve {
    /// One point per detection in descending score order.
    pub points: Vec<PrPoint>,
    pub n_gt: usize,
}

impl PrCurve {
    /// Detections present but no ground truth: AP is defined as zero.
    pub fn has_no_ground_truth(&self) -> bool {
        self.n_gt == 0
    }

    /// Precision at each of the [`RECALL_SAMPLES`] recall levels, taking the
    /// best precision at any recall at or beyond the level.
    pub fn interpolated(&self) -> [f64; RECALL_SAMPLES] {
        let mut out = [0.0; RECALL_SAMPLES];
        if self.n_gt == 0 {
            return out;
        }
        // running max from the high-recall end
        let mut envelope = vec![0.0; self.points.len()];
        let mut best = 0.0_f64;
        for (i, p) in self.points.iter().enumerate().rev() {
            best = best.max(p.precision);
            envelope[i] = best;
        }
        let mut j = 0;
        for (k, slot) in out.iter_mut().enumerate() {
            let level = k as f64 / 100.0;
            while j < self.points.len() && self.points[j].recall < level {
                j += 1;
            }
            if j == self.points.len() {
                break;
            }
            *slot = envelope[j];
        }
        out
    }
}

fn build(outcomes: &[Outcome], n_gt: usize, weight: impl Fn(&Outcome) -> f64) -> PrCurve {
    let mut sorted = outcomes.to_vec();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut tp = 0usize;
    let mut tp_weight = 0.0;
    let mut points = Vec::with_capacity(sorted.len());
    for (i, o) in sorted.iter().enumerate() {
        if o.true_positive {
            tp += 1;
            tp_weight += weight(o);
        }
        let recall = if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 };
        points.push(PrPoint {
            score: o.score,
            recall,
            precision: tp_weight / (i + 1) as f64,
        });
    }
    PrCurve { points, n_gt }
}

/// Cumulative precision/recall over detections sorted by descending score.
pub fn pr_curve(outcomes: &[Outcome], n_gt: usize) -> PrCurve {
    build(outcomes, n_gt, |_| 1.0)
}

/// Like [`pr_curve`], but each true positive adds its heading similarity to
/// the precision numerator instead of 1. Recall still counts whole matches.
pub fn pr_curve_heading_weighted(outcomes: &[Outcome], n_gt: usize) -> PrCurve {
    build(outcomes, n_gt, |o| o.heading_similarity)
}

pub fn average_precision(curve: &PrCurve, mode: ApMode) -> f64 {
    if curve.n_gt == 0 || curve.points.is_empty() {
        return 0.0;
    }
    let prec = curve.interpolated();
    match mode {
        ApMode::Simple => prec.iter().sum::<f64>() / RECALL_SAMPLES as f64,
        ApMode::RecallClipped => {
            let first = (MIN_RECALL * 100.0).round() as usize + 1;
            let tail = &prec[first..];
            let sum: f64 = tail
                .iter()
                .map(|p| (p - MIN_PRECISION).max(0.0) / (1.0 - MIN_PRECISION))
                .sum();
            sum / tail.len() as f64
        }
    }
}

/// Average heading similarity: AP over the heading-weighted curve.
pub fn ahs_average(outcomes: &[Outcome], n_gt: usize, mode: ApMode) -> f64 {
    average_precision(&pr_curve_heading_weighted(outcomes, n_gt), mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    use crate::geometry::heading_similarity;

    #[test]
    fn perfect_single_detection() {
        let c = pr_curve(&[Outcome::tp(1.0, 1.0)], 1);
        assert_eq!(
            c.points,
            vec![PrPoint {
                score: 1.0,
                recall: 1.0,
                precision: 1.0
            }]
        );
        assert_eq!(average_precision(&c, ApMode::Simple), 1.0);
        assert_eq!(average_precision(&c, ApMode::RecallClipped), 1.0);
    }

    #[test]
    fn single_miss_has_zero_precision() {
        let c = pr_curve(&[Outcome::fp(0.7)], 1);
        assert_eq!(c.points[0].precision, 0.0);
        assert_eq!(average_precision(&c, ApMode::Simple), 0.0);
    }

    #[test]
    fn no_detections() {
        let c = pr_curve(&[], 3);
        assert_eq!(average_precision(&c, ApMode::Simple), 0.0);
        assert_eq!(average_precision(&c, ApMode::RecallClipped), 0.0);
    }

    #[test]
    fn detections_without_ground_truth() {
        let c = pr_curve(&[Outcome::fp(0.7)], 0);
        assert!(c.has_no_ground_truth());
        assert_eq!(average_precision(&c, ApMode::Simple), 0.0);
    }

    #[test]
    fn hand_computed_points() {
        let outcomes = [Outcome::tp(0.9, 1.0), Outcome::fp(0.8), Outcome::tp(0.7, 1.0)];
        let c = pr_curve(&outcomes, 2);
        let got: Vec<(f64, f64)> = c.points.iter().map(|p| (p.recall, p.precision)).collect();
        assert_eq!(got[0], (0.5, 1.0));
        assert_eq!(got[1], (0.5, 0.5));
        assert_eq!(got[2].0, 1.0);
        assert_abs_diff_eq!(got[2].1, 2.0 / 3.0, epsilon = 1e-15);
        // recall levels 0.00..=0.50 see precision 1, 0.51..=1.00 see 2/3
        let want = (51.0 + 50.0 * 2.0 / 3.0) / 101.0;
        assert_abs_diff_eq!(average_precision(&c, ApMode::Simple), want, epsilon = 1e-12);
        // clipped: levels 0.11..=0.50 (40) at 1, 0.51..=1.00 (50) at 2/3
        let clip = |p: f64| (p - 0.1) / 0.9;
        let want = (40.0 * clip(1.0) + 50.0 * clip(2.0 / 3.0)) / 90.0;
        assert_abs_diff_eq!(average_precision(&c, ApMode::RecallClipped), want, epsilon = 1e-12);
    }

    #[test]
    fn input_order_does_not_matter() {
        let a = [Outcome::tp(0.9, 1.0), Outcome::fp(0.8), Outcome::tp(0.7, 1.0)];
        let b = [a[2], a[0], a[1]];
        assert_eq!(pr_curve(&a, 2), pr_curve(&b, 2));
    }

    #[test]
    fn heading_weighted_examples() {
        let h = heading_similarity(PI / 6.0, 0.0);
        assert_abs_diff_eq!(ahs_average(&[Outcome::tp(1.0, 1.0)], 1, ApMode::Simple), 1.0);
        assert_abs_diff_eq!(
            ahs_average(&[Outcome::tp(1.0, h)], 1, ApMode::Simple),
            5.0 / 6.0,
            epsilon = 1e-12
        );
        let opposite = heading_similarity(PI, 0.0);
        assert_abs_diff_eq!(ahs_average(&[Outcome::tp(1.0, opposite)], 1, ApMode::Simple), 0.0, epsilon = 1e-12);
    }
}
