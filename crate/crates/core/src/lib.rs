//! Latency-aware and planning-aware evaluation of 3D object detectors in
//! bird's-eye view.
//!
//! The usual detection metrics compare a prediction with the ground truth
//! of the sensor frame it came from. A deployed detector hands its output
//! to the planner only after inference completes, and the planner cares
//! more about how close an object's near face is than about box overlap.
//! This crate scores detections both ways:
//!
//! * **L-mAP** moves ground truth and detections to the instant inference
//!   completes ([`latency`]) before matching.
//! * **P-mAP** matches on corner distance, drops occluded objects, and
//!   rejects detections that place the nearest surface too far away
//!   ([`matching::safety_disqualifier`]).
//! * classic mAP over center distance, IoU and corner distance, plus the
//!   heading-weighted mAHS.
//!
//! Around the metrics sit a perturbation harness for synthetic detections
//! ([`perturb`]), the closed-form analysis of annotation frequency
//! ([`annotation`]), and L-mAP driven model and deployment selection
//! ([`optimize`]).
//!
//! ```
//! use lpap_core::{evaluate, parse_scenes, EvalConfig, Metric};
//!
//! let jsonl = r#"{"scene_id":"s","frame_id":"f0","timestamp":0.0,"ego_velocity":[0,0],"annotations":[{"instance_id":"a","class":"car","box":[10,0,4,2,0],"velocity":[5,0],"visibility":1.0}],"detections":[{"class":"car","box":[10,0,4,2,0],"score":0.9,"velocity":[5,0]}]}"#;
//! let scenes = parse_scenes(jsonl.as_bytes())?;
//! let cfg = EvalConfig { latency_dt: 0.1, ..EvalConfig::default() };
//! let report = evaluate(&scenes, &cfg)?;
//! assert_eq!(report.score(Metric::L_MAP), Some(100.0));
//! # Ok::<(), lpap_core::Error>(())
//! ```

pub mod annotation;
pub mod ap;
pub mod data;
mod error;
pub mod evaluate;
pub mod geometry;
pub mod latency;
pub mod matching;
pub mod optimize;
pub mod perturb;
pub mod report;

pub use data::{parse_scene, parse_scenes, write_scenes, Detection, EvalConfig, Frame, Scene, TrackedAnnotation};
pub use error::{Error, Result};
pub use evaluate::{evaluate, evaluate_metrics, Metric, MetricFamily, MetricReport};
pub use geometry::{BoxBev, Vec2};

// Book chapters are compiled as doc tests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/latency.md")]
    mod latency {}
    #[doc = include_str!("../../../book/src/matching.md")]
    mod matching {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/perturbation.md")]
    mod perturbation {}
    #[doc = include_str!("../../../book/src/annotation.md")]
    mod annotation {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
