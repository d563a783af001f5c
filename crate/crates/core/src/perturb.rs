//! Synthetic detections: copy ground truth, then inject systematic errors.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{Detection, Frame, Scene};
use crate::error::{Error, Result};
use crate::evaluate::EGO_ORIGIN;
use crate::geometry::Vec2;

/// Nearest-surface distance (m) separating near from far objects.
pub const NEAR_FAR_BOUNDARY: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftRange {
    #[default]
    All,
    /// Nearest surface closer than [`NEAR_FAR_BOUNDARY`].
    Near,
    /// Nearest surface at or beyond [`NEAR_FAR_BOUNDARY`].
    Far,
}

impl ShiftRange {
    pub fn contains(self, nearest_surface: f64) -> bool {
        match self {
            ShiftRange::All => true,
            ShiftRange::Near => nearest_surface < NEAR_FAR_BOUNDARY,
            ShiftRange::Far => nearest_surface >= NEAR_FAR_BOUNDARY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    /// Added to every detection's yaw (rad).
    pub yaw_offset: f64,
    /// Turn the box around and negate its velocity.
    pub yaw_flip: bool,
    /// Signed shift (m) along the ego → nearest-surface ray; positive is farther.
    pub radial_shift: f64,
    pub shift_range: ShiftRange,
    /// Added to every detection's velocity (m/s).
    pub velocity_error: Vec2,
    pub seed: u64,
    /// Share of detections perturbed, drawn per frame from `seed`.
    pub fraction: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            yaw_offset: 0.0,
            yaw_flip: false,
            radial_shift: 0.0,
            shift_range: ShiftRange::All,
            velocity_error: Vec2::ZERO,
            seed: 0,
            fraction: 1.0,
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = self.yaw_offset.is_finite()
            && self.radial_shift.is_finite()
            && self.velocity_error.is_finite();
        if !finite {
            return Err(Error::InvalidInput("perturbation values must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::InvalidInput(format!(
                "fraction must lie in [0, 1], got {}",
                self.fraction
            )));
        }
        Ok(())
    }
}

/// Replaces a frame's detections with exact copies of its annotations
/// (score 1, velocity = annotated velocity or zero).
pub fn oracle_detections(frame: &Frame) -> Frame {
    let mut out = frame.clone();
    out.detections = frame
        .annotations
        .iter()
        .map(|a| Detection {
            class_label: a.class_label.clone(),
            bbox: a.bbox,
            score: 1.0,
            velocity: a.velocity.unwrap_or(Vec2::ZERO),
        })
        .collect();
    out
}

fn frame_rng(seed: u64, frame_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(frame_id.as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

fn perturb_detection(d: &Detection, spec: &PerturbationSpec) -> Result<Detection> {
    let mut out = d.clone();
    let mut yaw = d.bbox.yaw() + spec.yaw_offset;
    if spec.yaw_flip {
        yaw += PI;
        out.velocity = -out.velocity;
    }
    if yaw != d.bbox.yaw() {
        out.bbox = out.bbox.with_yaw(yaw)?;
    }

    if spec.radial_shift != 0.0 {
        let nearest = out.bbox.closest_point(EGO_ORIGIN) - EGO_ORIGIN;
        if spec.shift_range.contains(nearest.norm()) {
            // inside the box the ray is undefined; fall back to the center ray
            let ray = if nearest.norm() > 0.0 {
                nearest
            } else {
                out.bbox.center() - EGO_ORIGIN
            };
            let len = ray.norm();
            if len > 0.0 {
                out.bbox = out.bbox.translated(ray * (spec.radial_shift / len))?;
            }
        }
    }

    out.velocity += spec.velocity_error;
    Ok(out)
}

/// Applies `spec` to each detection of `frame`. Sizes and scores are kept.
pub fn apply_spec(frame: &Frame, spec: &PerturbationSpec) -> Result<Frame> {
    spec.validate()?;
    let mut rng = (spec.fraction < 1.0).then(|| frame_rng(spec.seed, &frame.frame_id));
    let mut out = frame.clone();
    for d in &mut out.detections {
        let chosen = match rng.as_mut() {
            Some(r) => r.gen::<f64>() < spec.fraction,
            None => true,
        };
        if chosen {
            *d = perturb_detection(d, spec)?;
        }
    }
    Ok(out)
}

/// Oracle detections followed by `spec`, for every frame of every scene.
pub fn perturb_scenes(scenes: &[Scene], spec: &PerturbationSpec) -> Result<Vec<Scene>> {
    scenes
        .iter()
        .map(|s| {
            Ok(Scene {
                scene_id: s.scene_id.clone(),
                frames: s
                    .frames
                    .iter()
                    .map(|f| apply_spec(&oracle_detections(f), spec))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TrackedAnnotation;
    use crate::geometry::{bev_iou, nearest_surface_distance, BoxBev};

    fn ann(id: &str, x: f64, y: f64, v: Vec2) -> TrackedAnnotation {
        TrackedAnnotation {
            instance_id: id.into(),
            class_label: "car".into(),
            bbox: BoxBev::new(Vec2::new(x, y), 4.0, 2.0, 0.0).unwrap(),
            velocity: Some(v),
            velocity_imputed: false,
            visibility: 1.0,
            planning_relevant: None,
        }
    }

    fn frame(anns: Vec<TrackedAnnotation>) -> Frame {
        Frame {
            frame_id: "f0".into(),
            timestamp: 0.0,
            ego_velocity: Vec2::ZERO,
            annotations: anns,
            detections: Vec::new(),
            latency_override: None,
        }
    }

    #[test]
    fn oracle_copies_annotations() {
        let f = frame(vec![
            ann("a", 10.0, 0.0, Vec2::new(1.0, 0.0)),
            ann("b", -5.0, 3.0, Vec2::ZERO),
            ann("c", 30.0, -8.0, Vec2::new(0.0, 2.0)),
        ]);
        let o = oracle_detections(&f);
        assert_eq!(o.detections.len(), 3);
        for (d, a) in o.detections.iter().zip(&f.annotations) {
            assert_eq!(bev_iou(&d.bbox, &a.bbox), 1.0);
            assert_eq!(d.score, 1.0);
            assert_eq!(Some(d.velocity), a.velocity);
        }
        assert!(oracle_detections(&frame(vec![])).detections.is_empty());
    }

    #[test]
    fn identity_spec_is_noop() {
        let f = oracle_detections(&frame(vec![ann("a", 10.0, 2.0, Vec2::new(1.0, 0.0))]));
        assert_eq!(apply_spec(&f, &PerturbationSpec::default()).unwrap(), f);
    }

    #[test]
    fn radial_shift_moves_face_by_exact_amount() {
        let f = oracle_detections(&frame(vec![ann("a", 10.0, 0.0, Vec2::ZERO)]));
        let spec = PerturbationSpec {
            radial_shift: 0.6,
            shift_range: ShiftRange::Near,
            ..Default::default()
        };
        let p = apply_spec(&f, &spec).unwrap();
        let d_e = nearest_surface_distance(&p.detections[0].bbox, EGO_ORIGIN)
            - nearest_surface_distance(&f.annotations[0].bbox, EGO_ORIGIN);
        assert!((d_e - 0.6).abs() < 1e-12);
    }

    #[test]
    fn shift_range_respects_boundary() {
        let f = oracle_detections(&frame(vec![
            ann("near", 10.0, 0.0, Vec2::ZERO),
            ann("far", 40.0, 0.0, Vec2::ZERO),
        ]));
        let spec = PerturbationSpec {
            radial_shift: -0.6,
            shift_range: ShiftRange::Far,
            ..Default::default()
        };
        let p = apply_spec(&f, &spec).unwrap();
        assert_eq!(p.detections[0], f.detections[0]);
        assert!((p.detections[1].bbox.center().x - 39.4).abs() < 1e-12);
        assert!(ShiftRange::Near.contains(19.999) && !ShiftRange::Near.contains(20.0));
    }

    #[test]
    fn flip_negates_velocity_and_twice_restores() {
        let f = oracle_detections(&frame(vec![ann("a", 10.0, 0.0, Vec2::new(10.0, 0.0))]));
        let spec = PerturbationSpec {
            yaw_flip: true,
            ..Default::default()
        };
        let once = apply_spec(&f, &spec).unwrap();
        assert_eq!(once.detections[0].velocity, Vec2::new(-10.0, 0.0));
        assert!((once.detections[0].bbox.yaw() - PI).abs() < 1e-12);
        let twice = apply_spec(&once, &spec).unwrap();
        assert_eq!(twice.detections[0].velocity, f.detections[0].velocity);
        assert!(twice.detections[0].bbox.yaw().abs() < 1e-12);
    }

    #[test]
    fn fraction_selection_is_seeded() {
        let anns = (0..40).map(|i| ann(&format!("a{i}"), 10.0 + 6.0 * i as f64, 0.0, Vec2::ZERO)).collect();
        let f = oracle_detections(&frame(anns));
        let spec = PerturbationSpec {
            yaw_offset: 0.3,
            fraction: 0.5,
            seed: 7,
            ..Default::default()
        };
        let a = apply_spec(&f, &spec).unwrap();
        let b = apply_spec(&f, &spec).unwrap();
        assert_eq!(a, b);
        let changed = a.detections.iter().zip(&f.detections).filter(|(x, y)| x != y).count();
        assert!(changed > 5 && changed < 35, "{changed}");
        let other = apply_spec(&f, &PerturbationSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let f = frame(vec![]);
        let bad = PerturbationSpec {
            fraction: 1.5,
            ..Default::default()
        };
        assert!(apply_spec(&f, &bad).is_err());
    }

    #[test]
    fn spec_parses_from_json() {
        let s: PerturbationSpec =
            serde_json::from_str(r#"{"radial_shift":0.6,"shift_range":"near","velocity_error":[3,0]}"#).unwrap();
        assert_eq!(s.shift_range, ShiftRange::Near);
        assert_eq!(s.velocity_error, Vec2::new(3.0, 0.0));
        assert_eq!(s.fraction, 1.0);
    }
}
