//! Evaluation inputs: scenes of timestamped frames, their JSONL encoding,
//! ground-truth velocity derivation, and the evaluation config.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxBev, Vec2};

/// nuScenes detection classes, used when a config omits `classes`.
pub const DEFAULT_CLASSES: [&str; 10] = [
    "car",
    "truck",
    "bus",
    "trailer",
    "construction_vehicle",
    "pedestrian",
    "motorcycle",
    "bicycle",
    "traffic_cone",
    "barrier",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TrackedAnnotation {
    pub instance_id: String,
    pub class_label: String,
    pub bbox: BoxBev,
    /// World-frame object velocity (m/s).
    pub velocity: Option<Vec2>,
    /// Set when `velocity` was filled with zero at a track's first appearance.
    pub velocity_imputed: bool,
    /// Unoccluded fraction in `[0, 1]`.
    pub visibility: f64,
    pub planning_relevant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub class_label: String,
    pub bbox: BoxBev,
    pub score: f64,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub frame_id: String,
    pub timestamp: f64,
    pub ego_velocity: Vec2,
    pub annotations: Vec<TrackedAnnotation>,
    pub detections: Vec<Detection>,
    /// Measured inference latency for this frame (s), used in replay mode.
    pub latency_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub scene_id: String,
    pub frames: Vec<Frame>,
}

// ---------------------------------------------------------------------------
// JSONL records

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    scene_id: String,
    frame_id: String,
    timestamp: f64,
    ego_velocity: [f64; 2],
    annotations: Vec<AnnotationRecord>,
    detections: Vec<DetectionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    latency_s: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationRecord {
    instance_id: String,
    class: String,
    #[serde(rename = "box")]
    bbox: [f64; 5],
    velocity: Option<[f64; 2]>,
    visibility: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planning_relevant: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    class: String,
    #[serde(rename = "box")]
    bbox: [f64; 5],
    score: f64,
    velocity: [f64; 2],
}

fn invalid(line: usize, field: String, message: impl Into<String>) -> Error {
    Error::Validation {
        line,
        field,
        message: message.into(),
    }
}

fn check_vec(line: usize, field: impl Fn() -> String, v: [f64; 2]) -> Result<Vec2> {
    let v = Vec2::from(v);
    if !v.is_finite() {
        return Err(invalid(line, field(), "components must be finite"));
    }
    Ok(v)
}

fn check_box(line: usize, field: impl Fn() -> String, a: [f64; 5]) -> Result<BoxBev> {
    BoxBev::from_array(a).map_err(|e| invalid(line, field(), e.to_string()))
}

impl FrameRecord {
    fn into_frame(self, line: usize) -> Result<(String, Frame)> {
        if !self.timestamp.is_finite() {
            return Err(invalid(line, "timestamp".into(), "must be finite"));
        }
        if let Some(l) = self.latency_s {
            if !(l.is_finite() && l >= 0.0) {
                return Err(invalid(line, "latency_s".into(), "must be finite and >= 0"));
            }
        }
        let ego_velocity = check_vec(line, || "ego_velocity".into(), self.ego_velocity)?;

        let mut seen = HashSet::new();
        let mut annotations = Vec::with_capacity(self.annotations.len());
        for (i, a) in self.annotations.into_iter().enumerate() {
            let f = |name: &str| format!("annotations[{i}].{name}");
            if !(0.0..=1.0).contains(&a.visibility) {
                return Err(invalid(
                    line,
                    f("visibility"),
                    format!("{} outside [0, 1]", a.visibility),
                ));
            }
            if !seen.insert(a.instance_id.clone()) {
                return Err(invalid(
                    line,
                    f("instance_id"),
                    format!("duplicate instance `{}` in frame", a.instance_id),
                ));
            }
            let velocity = match a.velocity {
                Some(v) => Some(check_vec(line, || f("velocity"), v)?),
                None => None,
            };
            annotations.push(TrackedAnnotation {
                instance_id: a.instance_id,
                class_label: a.class,
                bbox: check_box(line, || f("box"), a.bbox)?,
                velocity,
                velocity_imputed: false,
                visibility: a.visibility,
                planning_relevant: a.planning_relevant,
            });
        }

        let mut detections = Vec::with_capacity(self.detections.len());
        for (i, d) in self.detections.into_iter().enumerate() {
            let f = |name: &str| format!("detections[{i}].{name}");
            if !(0.0..=1.0).contains(&d.score) {
                return Err(invalid(line, f("score"), format!("{} outside [0, 1]", d.score)));
            }
            detections.push(Detection {
                class_label: d.class,
                bbox: check_box(line, || f("box"), d.bbox)?,
                score: d.score,
                velocity: check_vec(line, || f("velocity"), d.velocity)?,
            });
        }

        Ok((
            self.scene_id,
            Frame {
                frame_id: self.frame_id,
                timestamp: self.timestamp,
                ego_velocity,
                annotations,
                detections,
                latency_override: self.latency_s,
            },
        ))
    }

    fn from_frame(scene_id: &str, f: &Frame) -> Self {
        FrameRecord {
            scene_id: scene_id.to_owned(),
            frame_id: f.frame_id.clone(),
            timestamp: f.timestamp,
            ego_velocity: f.ego_velocity.into(),
            annotations: f
                .annotations
                .iter()
                .map(|a| AnnotationRecord {
                    instance_id: a.instance_id.clone(),
                    class: a.class_label.clone(),
                    bbox: a.bbox.to_array(),
                    velocity: a.velocity.map(Into::into),
                    visibility: a.visibility,
                    planning_relevant: a.planning_relevant,
                })
                .collect(),
            detections: f
                .detections
                .iter()
                .map(|d| DetectionRecord {
                    class: d.class_label.clone(),
                    bbox: d.bbox.to_array(),
                    score: d.score,
                    velocity: d.velocity.into(),
                })
                .collect(),
            latency_s: f.latency_override,
        }
    }
}

/// Reads every scene in a JSONL stream, one frame object per line.
///
/// Frames are grouped by `scene_id` in order of first appearance. Blank lines
/// are skipped. Errors carry the 1-based line number of the offending record.
pub fn parse_scenes<R: BufRead>(reader: R) -> Result<Vec<Scene>> {
    let mut scenes: Vec<Scene> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    // line of the last frame seen per scene, for ordering errors
    let mut last_line: Vec<usize> = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: FrameRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let (scene_id, frame) = record.into_frame(lineno)?;
        let slot = *index.entry(scene_id.clone()).or_insert_with(|| {
            scenes.push(Scene {
                scene_id: scene_id.clone(),
                frames: Vec::new(),
            });
            last_line.push(0);
            scenes.len() - 1
        });
        let scene = &mut scenes[slot];
        if let Some(prev) = scene.frames.last() {
            if frame.timestamp <= prev.timestamp {
                return Err(Error::Ordering {
                    scene: scene_id,
                    message: format!(
                        "line {lineno}: timestamp {} does not follow {} (line {})",
                        frame.timestamp, prev.timestamp, last_line[slot]
                    ),
                });
            }
        }
        last_line[slot] = lineno;
        scene.frames.push(frame);
    }
    Ok(scenes)
}

/// Reads a stream holding at most one scene. An empty stream gives an empty scene.
pub fn parse_scene<R: BufRead>(reader: R) -> Result<Scene> {
    let mut scenes = parse_scenes(reader)?;
    match scenes.len() {
        0 => Ok(Scene::default()),
        1 => Ok(scenes.remove(0)),
        n => Err(Error::Parse {
            line: 0,
            message: format!("expected one scene, found {n}"),
        }),
    }
}

/// Writes scenes as JSONL in the same schema [`parse_scenes`] reads.
pub fn write_scenes<W: Write>(scenes: &[Scene], mut out: W) -> Result<()> {
    for scene in scenes {
        for frame in &scene.frames {
            serde_json::to_writer(&mut out, &FrameRecord::from_frame(&scene.scene_id, frame))?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Ground-truth velocities

/// Where ground-truth velocities come from before latency propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocitySource {
    /// Keep annotated velocities; finite-difference only the missing ones.
    #[default]
    Annotated,
    /// Finite-difference every annotation, overwriting annotated values.
    Derived,
}

impl FromStr for VelocitySource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annotated" => Ok(Self::Annotated),
            "derived" => Ok(Self::Derived),
            other => Err(Error::Config(format!("unknown gt_velocity_source `{other}`"))),
        }
    }
}

/// Fills missing annotation velocities by backward finite difference.
pub fn derive_gt_velocities(scene: &Scene) -> Result<Scene> {
    derive_gt_velocities_with(scene, VelocitySource::Annotated)
}

/// Backward finite difference against the same instance in the previous
/// frame: `v = (x_t - x_{t-δt}) / δt`. Tracks absent from the previous frame
/// get a zero velocity and `velocity_imputed = true`.
pub fn derive_gt_velocities_with(scene: &Scene, source: VelocitySource) -> Result<Scene> {
    let mut out = scene.clone();
    for k in 0..out.frames.len() {
        let (before, rest) = out.frames.split_at_mut(k);
        let frame = &mut rest[0];
        let prev = before.last();
        let dt = match prev {
            Some(p) => {
                let dt = frame.timestamp - p.timestamp;
                if dt.is_nan() || dt <= 0.0 {
                    return Err(Error::Ordering {
                        scene: scene.scene_id.clone(),
                        message: format!(
                            "frame `{}` is {dt} s after its predecessor",
                            frame.frame_id
                        ),
                    });
                }
                dt
            }
            None => 0.0,
        };
        // positions as annotated in the input, never the derived ones
        let prev_centers: HashMap<&str, Vec2> = match k.checked_sub(1) {
            Some(pk) => scene.frames[pk]
                .annotations
                .iter()
                .map(|a| (a.instance_id.as_str(), a.bbox.center()))
                .collect(),
            None => HashMap::new(),
        };
        for ann in &mut frame.annotations {
            let keep = source == VelocitySource::Annotated && ann.velocity.is_some();
            if keep {
                continue;
            }
            match prev_centers.get(ann.instance_id.as_str()) {
                Some(&p) => {
                    ann.velocity = Some((ann.bbox.center() - p) * (1.0 / dt));
                    ann.velocity_imputed = false;
                }
                None => {
                    ann.velocity = Some(Vec2::ZERO);
                    ann.velocity_imputed = true;
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Config

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApMode {
    /// Mean interpolated precision over 101 recall samples.
    #[default]
    Simple,
    /// Samples above 10% recall, precision shifted by 0.1 and rescaled.
    RecallClipped,
}

impl FromStr for ApMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Self::Simple),
            "recall_clipped" => Ok(Self::RecallClipped),
            other => Err(Error::Config(format!("unknown ap_mode `{other}`"))),
        }
    }
}

/// Frame in which detection velocities are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredVelocityFrame {
    #[default]
    World,
    /// Relative to the ego vehicle; converted by adding the ego velocity.
    EgoRelative,
}

impl FromStr for PredVelocityFrame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "world" => Ok(Self::World),
            "ego_relative" => Ok(Self::EgoRelative),
            other => Err(Error::Config(format!("unknown pred_velocity_frame `{other}`"))),
        }
    }
}

/// A validated evaluation config. Build one with [`validate_config`] or by
/// deserializing a JSON object with the same field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct EvalConfig {
    pub classes: Vec<String>,
    pub center_thresholds: Vec<f64>,
    pub iou_thresholds: Vec<f64>,
    pub corner_thresholds: Vec<f64>,
    pub margin_d_m: f64,
    pub latency_dt: f64,
    pub min_visibility: f64,
    pub ap_mode: ApMode,
    pub ego_velocity_compensation: bool,
    pub pred_velocity_frame: PredVelocityFrame,
    pub gt_velocity_source: VelocitySource,
    pub latency_replay: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        validate_config(RawConfig::default()).expect("defaults are valid")
    }
}

/// Unvalidated config as read from JSON; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub classes: Option<Vec<String>>,
    pub center_thresholds: Option<Vec<f64>>,
    pub iou_thresholds: Option<Vec<f64>>,
    pub corner_thresholds: Option<Vec<f64>>,
    pub margin_d_m: Option<f64>,
    pub latency_dt: Option<f64>,
    pub min_visibility: Option<f64>,
    pub ap_mode: Option<String>,
    pub ego_velocity_compensation: Option<bool>,
    pub pred_velocity_frame: Option<String>,
    pub gt_velocity_source: Option<String>,
    pub latency_replay: Option<bool>,
}

impl TryFrom<RawConfig> for EvalConfig {
    type Error = Error;
    fn try_from(raw: RawConfig) -> Result<Self> {
        validate_config(raw)
    }
}

fn thresholds(name: &str, given: Option<Vec<f64>>, default: &[f64]) -> Result<Vec<f64>> {
    let mut t = given.unwrap_or_else(|| default.to_vec());
    if t.is_empty() {
        return Err(Error::Config(format!("{name} is empty")));
    }
    if let Some(bad) = t.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Config(format!("{name} contains non-positive value {bad}")));
    }
    t.sort_by(f64::total_cmp);
    t.dedup();
    Ok(t)
}

/// Fills defaults, sorts thresholds and checks every bound.
pub fn validate_config(raw: RawConfig) -> Result<EvalConfig> {
    let classes = raw
        .classes
        .unwrap_or_else(|| DEFAULT_CLASSES.iter().map(|s| s.to_string()).collect());
    if classes.is_empty() {
        return Err(Error::Config("class list is empty".into()));
    }

    let iou_thresholds = thresholds("iou_thresholds", raw.iou_thresholds, &[0.3, 0.5])?;
    if let Some(bad) = iou_thresholds.iter().find(|v| **v > 1.0) {
        return Err(Error::Config(format!("iou threshold {bad} exceeds 1")));
    }

    let margin_d_m = raw.margin_d_m.unwrap_or(0.5);
    if !(margin_d_m.is_finite() && margin_d_m > 0.0) {
        return Err(Error::Config(format!("margin_d_m must be > 0, got {margin_d_m}")));
    }
    let latency_dt = raw.latency_dt.unwrap_or(0.0);
    if !(latency_dt.is_finite() && latency_dt >= 0.0) {
        return Err(Error::Config(format!("latency_dt must be >= 0, got {latency_dt}")));
    }
    let min_visibility = raw.min_visibility.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&min_visibility) {
        return Err(Error::Config(format!(
            "min_visibility must lie in [0, 1], got {min_visibility}"
        )));
    }

    Ok(EvalConfig {
        classes,
        center_thresholds: thresholds("center_thresholds", raw.center_thresholds, &[0.5, 1.0, 1.5, 2.0])?,
        iou_thresholds,
        corner_thresholds: thresholds("corner_thresholds", raw.corner_thresholds, &[0.5, 1.0, 1.5, 2.0])?,
        margin_d_m,
        latency_dt,
        min_visibility,
        ap_mode: raw.ap_mode.as_deref().map(str::parse).transpose()?.unwrap_or_default(),
        ego_velocity_compensation: raw.ego_velocity_compensation.unwrap_or(false),
        pred_velocity_frame: raw
            .pred_velocity_frame
            .as_deref()
            .map(str::parse)
            .transpose()?
            .unwrap_or_default(),
        gt_velocity_source: raw
            .gt_velocity_source
            .as_deref()
            .map(str::parse)
            .transpose()?
            .unwrap_or_default(),
        latency_replay: raw.latency_replay.unwrap_or(false),
    })
}

/// Parses a JSON config object.
pub fn parse_config(json: &str) -> Result<EvalConfig> {
    let raw: RawConfig = serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
    validate_config(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_FRAME: &str = r#"{"scene_id":"s","frame_id":"f0","timestamp":0.0,"ego_velocity":[0,0],"annotations":[{"instance_id":"a","class":"car","box":[10,0,4,2,0],"velocity":null,"visibility":1.0}],"detections":[{"class":"car","box":[10.2,0,4,2,0],"score":0.9,"velocity":[1,0]}]}"#;

    fn frame_line(t: f64, x: f64, vel: &str) -> String {
        format!(
            r#"{{"scene_id":"s","frame_id":"f{t}","timestamp":{t},"ego_velocity":[0,0],"annotations":[{{"instance_id":"a","class":"car","box":[{x},0,4,2,0],"velocity":{vel},"visibility":1.0}}],"detections":[]}}"#
        )
    }

    #[test]
    fn parses_minimal_record() {
        let scene = parse_scene(ONE_FRAME.as_bytes()).unwrap();
        assert_eq!(scene.scene_id, "s");
        assert_eq!(scene.frames.len(), 1);
        assert_eq!(scene.frames[0].annotations.len(), 1);
        assert_eq!(scene.frames[0].detections[0].score, 0.9);
    }

    #[test]
    fn empty_stream_is_empty_scene() {
        let scene = parse_scene("".as_bytes()).unwrap();
        assert!(scene.frames.is_empty());
        assert!(parse_scenes("\n\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn score_out_of_range_is_rejected() {
        let bad = ONE_FRAME.replace("\"score\":0.9", "\"score\":1.5");
        match parse_scene(bad.as_bytes()) {
            Err(Error::Validation { line, field, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(field, "detections[0].score");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn visibility_out_of_range_is_rejected() {
        let bad = ONE_FRAME.replace("\"visibility\":1.0", "\"visibility\":-0.1");
        assert!(matches!(parse_scene(bad.as_bytes()), Err(Error::Validation { .. })));
    }

    #[test]
    fn schema_error_names_line() {
        let text = format!("{ONE_FRAME}\n{{\"scene_id\": 3}}\n");
        let err = parse_scenes(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().starts_with("line 2:"));
    }

    #[test]
    fn non_increasing_timestamps_are_rejected() {
        let text = format!("{}\n{}\n", frame_line(1.0, 0.0, "null"), frame_line(1.0, 1.0, "null"));
        assert!(matches!(parse_scenes(text.as_bytes()), Err(Error::Ordering { .. })));
    }

    #[test]
    fn duplicate_instance_is_rejected() {
        let dup = ONE_FRAME.replace(
            r#""visibility":1.0}]"#,
            r#""visibility":1.0},{"instance_id":"a","class":"car","box":[0,0,4,2,0],"velocity":null,"visibility":1.0}]"#,
        );
        assert!(matches!(parse_scene(dup.as_bytes()), Err(Error::Validation { .. })));
    }

    #[test]
    fn groups_interleaved_scenes() {
        let a = ONE_FRAME.to_string();
        let b = ONE_FRAME.replace("\"scene_id\":\"s\"", "\"scene_id\":\"t\"");
        let scenes = parse_scenes(format!("{a}\n{b}\n").as_bytes()).unwrap();
        assert_eq!(scenes.len(), 2);
        assert_eq!(scenes[1].scene_id, "t");
    }

    #[test]
    fn finite_difference_velocity() {
        let text = format!("{}\n{}\n", frame_line(0.0, 8.0, "null"), frame_line(0.5, 10.0, "null"));
        let scene = derive_gt_velocities(&parse_scene(text.as_bytes()).unwrap()).unwrap();
        let first = &scene.frames[0].annotations[0];
        assert_eq!(first.velocity, Some(Vec2::ZERO));
        assert!(first.velocity_imputed);
        let second = &scene.frames[1].annotations[0];
        assert_eq!(second.velocity, Some(Vec2::new(4.0, 0.0)));
        assert!(!second.velocity_imputed);
    }

    #[test]
    fn stationary_track_has_zero_velocity() {
        let text = format!("{}\n{}\n", frame_line(0.0, 5.0, "null"), frame_line(0.5, 5.0, "null"));
        let scene = derive_gt_velocities(&parse_scene(text.as_bytes()).unwrap()).unwrap();
        assert_eq!(scene.frames[1].annotations[0].velocity, Some(Vec2::ZERO));
    }

    #[test]
    fn annotated_velocity_is_kept_unless_derived_mode() {
        let text = format!("{}\n{}\n", frame_line(0.0, 8.0, "null"), frame_line(0.5, 10.0, "[7,1]"));
        let scene = parse_scene(text.as_bytes()).unwrap();
        let kept = derive_gt_velocities(&scene).unwrap();
        assert_eq!(kept.frames[1].annotations[0].velocity, Some(Vec2::new(7.0, 1.0)));
        let derived = derive_gt_velocities_with(&scene, VelocitySource::Derived).unwrap();
        assert_eq!(derived.frames[1].annotations[0].velocity, Some(Vec2::new(4.0, 0.0)));
    }

    #[test]
    fn derivation_rejects_unordered_frames() {
        let mut scene = parse_scene(
            format!("{}\n{}\n", frame_line(0.0, 8.0, "null"), frame_line(0.5, 10.0, "null")).as_bytes(),
        )
        .unwrap();
        scene.frames[1].timestamp = 0.0;
        assert!(matches!(derive_gt_velocities(&scene), Err(Error::Ordering { .. })));
    }

    #[test]
    fn default_config() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg.center_thresholds, vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(cfg.iou_thresholds, vec![0.3, 0.5]);
        assert_eq!(cfg.corner_thresholds, vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(cfg.margin_d_m, 0.5);
        assert_eq!(cfg.latency_dt, 0.0);
        assert_eq!(cfg.min_visibility, 0.5);
        assert_eq!(cfg.ap_mode, ApMode::Simple);
        assert!(!cfg.ego_velocity_compensation);
        assert_eq!(cfg.pred_velocity_frame, PredVelocityFrame::World);
        assert_eq!(cfg.classes.len(), DEFAULT_CLASSES.len());
        assert_eq!(cfg, EvalConfig::default());
    }

    #[test]
    fn thresholds_are_sorted() {
        let cfg = parse_config(r#"{"center_thresholds":[2.0,0.5]}"#).unwrap();
        assert_eq!(cfg.center_thresholds, vec![0.5, 2.0]);
    }

    #[test]
    fn config_errors() {
        assert!(parse_config(r#"{"margin_d_m":0}"#).is_err());
        assert!(parse_config(r#"{"classes":[]}"#).is_err());
        assert!(parse_config(r#"{"corner_thresholds":[1.0,-0.5]}"#).is_err());
        assert!(parse_config(r#"{"ap_mode":"eleven_point"}"#).is_err());
        assert!(parse_config(r#"{"latency_dt":-0.1}"#).is_err());
        assert!(parse_config(r#"{"iou_thresholds":[1.5]}"#).is_err());
        assert!(parse_config(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = parse_config(r#"{"classes":["car"],"ap_mode":"recall_clipped","latency_dt":0.1}"#).unwrap();
        let back: EvalConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
