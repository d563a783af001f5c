#![allow(dead_code)]

use lpap_core::{BoxBev, Detection, Frame, Scene, TrackedAnnotation, Vec2};
use rand::Rng;

pub fn bbox(x: f64, y: f64, l: f64, w: f64, yaw: f64) -> BoxBev {
    BoxBev::new(Vec2::new(x, y), l, w, yaw).unwrap()
}

pub fn ann(id: &str, class: &str, b: BoxBev, v: Vec2) -> TrackedAnnotation {
    TrackedAnnotation {
        instance_id: id.into(),
        class_label: class.into(),
        bbox: b,
        velocity: Some(v),
        velocity_imputed: false,
        visibility: 1.0,
        planning_relevant: None,
    }
}

pub fn det(class: &str, b: BoxBev, score: f64, v: Vec2) -> Detection {
    Detection {
        class_label: class.into(),
        bbox: b,
        score,
        velocity: v,
    }
}

pub fn frame(id: &str, t: f64, anns: Vec<TrackedAnnotation>, dets: Vec<Detection>) -> Frame {
    Frame {
        frame_id: id.into(),
        timestamp: t,
        ego_velocity: Vec2::ZERO,
        annotations: anns,
        detections: dets,
        latency_override: None,
    }
}

pub fn scene(id: &str, frames: Vec<Frame>) -> Scene {
    Scene {
        scene_id: id.into(),
        frames,
    }
}

/// One car at `(10, 0)` and one detection at `(10 + shift, 0)`, both with
/// velocity zero.
pub fn shifted_car_scene(id: &str, shift: f64) -> Scene {
    let gt = bbox(10.0, 0.0, 4.0, 2.0, 0.0);
    let pred = bbox(10.0 + shift, 0.0, 4.0, 2.0, 0.0);
    scene(
        id,
        vec![frame(
            "f0",
            0.0,
            vec![ann("a", "car", gt, Vec2::ZERO)],
            vec![det("car", pred, 1.0, Vec2::ZERO)],
        )],
    )
}

/// One car at `(10, 0)` moving at `gt_speed` along x and a detection on top
/// of it reporting `pred_speed`.
pub fn moving_car_scene(id: &str, gt_speed: f64, pred_speed: f64) -> Scene {
    let b = bbox(10.0, 0.0, 4.0, 2.0, 0.0);
    scene(
        id,
        vec![frame(
            "f0",
            0.0,
            vec![ann("a", "car", b, Vec2::new(gt_speed, 0.0))],
            vec![det("car", b, 1.0, Vec2::new(pred_speed, 0.0))],
        )],
    )
}

/// A scene of `n_frames` frames 0.5 s apart with a few tracked objects of
/// two classes and noisy, partly spurious detections.
pub fn random_scene<R: Rng>(rng: &mut R, id: &str, n_frames: usize) -> Scene {
    let classes = ["car", "pedestrian"];
    let n_obj = rng.gen_range(1..6);
    let mut objs: Vec<(String, &str, Vec2, Vec2, f64, f64, f64)> = (0..n_obj)
        .map(|k| {
            let class = classes[rng.gen_range(0..classes.len())];
            let (l, w) = if class == "car" { (4.5, 1.9) } else { (0.8, 0.7) };
            (
                format!("{id}-o{k}"),
                class,
                Vec2::new(rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0)),
                Vec2::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)),
                rng.gen_range(-3.1..3.1),
                l,
                w,
            )
        })
        .collect();
    let mut frames = Vec::new();
    for f in 0..n_frames {
        let t = f as f64 * 0.5;
        let mut anns = Vec::new();
        let mut dets = Vec::new();
        for (oid, class, pos, vel, yaw, l, w) in &mut objs {
            let b = bbox(pos.x, pos.y, *l, *w, *yaw);
            let mut a = ann(oid, class, b, *vel);
            a.visibility = rng.gen_range(0.0..1.0);
            if rng.gen_bool(0.3) {
                a.velocity = None;
            }
            anns.push(a);
            if rng.gen_bool(0.8) {
                let noise = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
                let db = bbox(pos.x + noise.x, pos.y + noise.y, *l, *w, *yaw + rng.gen_range(-0.5..0.5));
                let dv = *vel + Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                dets.push(det(class, db, rng.gen_range(0.05..1.0), dv));
            }
            *pos += *vel * 0.5;
        }
        for _ in 0..rng.gen_range(0..3) {
            let class = classes[rng.gen_range(0..classes.len())];
            let b = bbox(rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0), 2.0, 1.5, 0.0);
            dets.push(det(class, b, rng.gen_range(0.05..1.0), Vec2::ZERO));
        }
        frames.push(frame(&format!("{id}-f{f}"), t, anns, dets));
    }
    scene(id, frames)
}

/// Exact kinematics of a constant-jerk track sampled every `delta_small`,
/// extrapolated from the finite-difference velocity over `delta_big`.
/// Returns the absolute position error. `a_prev` is the acceleration one
/// interval before the present.
pub fn constant_jerk_residual(a_prev: f64, jerk: f64, delta_small: f64, delta_big: f64) -> f64 {
    // x(τ) with τ measured from the previous annotation
    let x = |tau: f64| 0.5 * a_prev * tau * tau + jerk * tau * tau * tau / 6.0;
    let now = delta_small;
    let v_hat = (x(now) - x(0.0)) / delta_small;
    let predicted = x(now) + v_hat * delta_big;
    (x(now + delta_big) - predicted).abs()
}
