//! Time shift to the instant inference completes.
//!
//! Ground truth moves by its (estimated) velocity, `x + v̂·Δt`. Detections
//! move by their predicted velocity, optionally minus the ego velocity,
//! `x + (v_pred - v_ego)·Δt`. Only centers move; yaw and extents are kept.

use crate::data::{Detection, EvalConfig, Frame, PredVelocityFrame, TrackedAnnotation};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// A frame after propagation by `effective_time - timestamp` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalFrame {
    pub frame_id: String,
    pub effective_time: f64,
    pub shifted_annotations: Vec<TrackedAnnotation>,
    pub shifted_detections: Vec<Detection>,
}

pub fn propagate_gt(x: Vec2, v_hat: Vec2, dt: f64) -> Vec2 {
    x + v_hat * dt
}

pub fn propagate_pred(x: Vec2, v_pred: Vec2, v_ego: Vec2, dt: f64, ego_comp: bool) -> Vec2 {
    if ego_comp {
        x + (v_pred - v_ego) * dt
    } else {
        x + v_pred * dt
    }
}

/// Shifts every object in `frame` forward by `dt` seconds.
///
/// Annotations must carry velocities (see
/// [`derive_gt_velocities`](crate::data::derive_gt_velocities)).
pub fn latency_shift_frame(frame: &Frame, dt: f64, cfg: &EvalConfig) -> Result<EvalFrame> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidInput(format!("latency must be finite and >= 0, got {dt}")));
    }

    let shifted_annotations = frame
        .annotations
        .iter()
        .map(|a| {
            let v = a
                .velocity
                .ok_or_else(|| Error::MissingVelocity(a.instance_id.clone()))?;
            let mut out = a.clone();
            out.bbox = a.bbox.with_center(propagate_gt(a.bbox.center(), v, dt))?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let shifted_detections = frame
        .detections
        .iter()
        .map(|d| {
            let v_world = match cfg.pred_velocity_frame {
                PredVelocityFrame::World => d.velocity,
                PredVelocityFrame::EgoRelative => d.velocity + frame.ego_velocity,
            };
            let c = propagate_pred(
                d.bbox.center(),
                v_world,
                frame.ego_velocity,
                dt,
                cfg.ego_velocity_compensation,
            );
            let mut out = d.clone();
            out.bbox = d.bbox.with_center(c)?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EvalFrame {
        frame_id: frame.frame_id.clone(),
        effective_time: frame.timestamp + dt,
        shifted_annotations,
        shifted_detections,
    })
}

/// Latency to apply to `frame` under `cfg`: the frame's measured value in
/// replay mode when present, otherwise the run-wide value.
pub fn frame_latency(frame: &Frame, cfg: &EvalConfig) -> f64 {
    match (cfg.latency_replay, frame.latency_override) {
        (true, Some(l)) => l,
        _ => cfg.latency_dt,
    }
}
