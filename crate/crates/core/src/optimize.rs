//! Selection driven by L-mAP alone: hyperparameter search over candidate
//! models and deployment choice under a budget.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::PathBuf;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{parse_scenes, EvalConfig, Scene};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate_metrics, Metric};

/// Deployment options: CenterPoint and TransFusion-L, PyTorch or TensorRT,
/// on an RTX4060Ti ($1k) or RTX3090 ($4k) system.
pub const DEPLOYMENT_OPTIONS_CSV: &str = include_str!("../fixtures/deployment_options.csv");
/// CenterPoint with 1, 3, 6 or 9 merged LiDAR sweeps as surrogate candidates.
pub const MULTIFRAME_SURROGATES_CSV: &str = include_str!("../fixtures/multiframe_surrogates.csv");
pub const MULTIFRAME_SURROGATES_JSON: &str = include_str!("../fixtures/multiframe_surrogates.json");

/// How a candidate's L-mAP is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorBinding {
    /// Detections in a scene JSONL file, evaluated at the given latency.
    Dump { path: PathBuf, latency_s: f64 },
    /// A precomputed score.
    Surrogate { latency_s: Option<f64>, l_map: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCandidate", into = "RawCandidate")]
pub struct CandidateConfig {
    pub id: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub binding: EvaluatorBinding,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCandidate {
    id: String,
    #[serde(default)]
    params: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dump: Option<DumpBinding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    surrogate: Option<SurrogateBinding>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DumpBinding {
    path: PathBuf,
    latency_s: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurrogateBinding {
    #[serde(default)]
    latency_s: Option<f64>,
    l_map: f64,
}

impl TryFrom<RawCandidate> for CandidateConfig {
    type Error = Error;
    fn try_from(raw: RawCandidate) -> Result<Self> {
        let binding = match (raw.dump, raw.surrogate) {
            (Some(d), None) => EvaluatorBinding::Dump {
                path: d.path,
                latency_s: d.latency_s,
            },
            (None, Some(s)) => EvaluatorBinding::Surrogate {
                latency_s: s.latency_s,
                l_map: s.l_map,
            },
            _ => {
                return Err(Error::Candidate {
                    id: raw.id,
                    message: "exactly one of `dump` and `surrogate` is required".into(),
                })
            }
        };
        Ok(CandidateConfig {
            id: raw.id,
            params: raw.params,
            binding,
        })
    }
}

impl From<CandidateConfig> for RawCandidate {
    fn from(c: CandidateConfig) -> Self {
        let (dump, surrogate) = match c.binding {
            EvaluatorBinding::Dump { path, latency_s } => (Some(DumpBinding { path, latency_s }), None),
            EvaluatorBinding::Surrogate { latency_s, l_map } => {
                (None, Some(SurrogateBinding { latency_s, l_map }))
            }
        };
        RawCandidate {
            id: c.id,
            params: c.params,
            dump,
            surrogate,
        }
    }
}

impl CandidateConfig {
    pub fn surrogate(id: impl Into<String>, latency_s: f64, l_map: f64) -> Self {
        CandidateConfig {
            id: id.into(),
            params: BTreeMap::new(),
            binding: EvaluatorBinding::Surrogate {
                latency_s: Some(latency_s),
                l_map,
            },
        }
    }

    pub fn dump(id: impl Into<String>, path: impl Into<PathBuf>, latency_s: f64) -> Self {
        CandidateConfig {
            id: id.into(),
            params: BTreeMap::new(),
            binding: EvaluatorBinding::Dump {
                path: path.into(),
                latency_s,
            },
        }
    }
}

#[derive(Deserialize)]
struct SurrogateRow {
    id: String,
    latency_s: Option<f64>,
    l_map: f64,
}

/// Reads `id,latency_s,l_map` rows.
pub fn read_surrogates_csv<R: Read>(reader: R) -> Result<Vec<CandidateConfig>> {
    csv::Reader::from_reader(reader)
        .deserialize::<SurrogateRow>()
        .map(|row| {
            let row = row?;
            Ok(CandidateConfig {
                id: row.id,
                params: BTreeMap::new(),
                binding: EvaluatorBinding::Surrogate {
                    latency_s: row.latency_s,
                    l_map: row.l_map,
                },
            })
        })
        .collect()
}

/// Reads a JSON array of candidates.
pub fn read_candidates_json<R: Read>(reader: R) -> Result<Vec<CandidateConfig>> {
    Ok(serde_json::from_reader(reader)?)
}

/// Produces a candidate's L-mAP on the 0–100 scale.
pub trait CandidateEvaluator: Sync {
    fn evaluate(&self, candidate: &CandidateConfig) -> Result<f64>;
}

/// Scores surrogates by lookup and detection dumps by running the full
/// evaluation at the candidate's latency.
///
/// With non-empty `data`, a dump supplies only detections: they replace the
/// detections of the `data` frame with the same scene and frame id, and
/// frames missing from the dump are scored with no detections.
pub struct LmapEvaluator<'a> {
    pub data: &'a [Scene],
    pub cfg: &'a EvalConfig,
}

impl CandidateEvaluator for LmapEvaluator<'_> {
    fn evaluate(&self, c: &CandidateConfig) -> Result<f64> {
        evaluate_candidate(c, self.data, self.cfg)
    }
}

fn merge_detections(data: &[Scene], dump: Vec<Scene>) -> Vec<Scene> {
    let mut by_key: HashMap<(String, String), _> = HashMap::new();
    for scene in dump {
        for frame in scene.frames {
            by_key.insert((scene.scene_id.clone(), frame.frame_id), frame.detections);
        }
    }
    data.iter()
        .map(|s| {
            let mut s = s.clone();
            for f in &mut s.frames {
                f.detections = by_key
                    .remove(&(s.scene_id.clone(), f.frame_id.clone()))
                    .unwrap_or_default();
            }
            s
        })
        .collect()
}

pub fn evaluate_candidate(c: &CandidateConfig, data: &[Scene], cfg: &EvalConfig) -> Result<f64> {
    let fail = |message: String| Error::Candidate {
        id: c.id.clone(),
        message,
    };
    match &c.binding {
        EvaluatorBinding::Surrogate { latency_s, l_map } => {
            if latency_s.is_none() {
                return Err(fail("surrogate has no latency".into()));
            }
            Ok(*l_map)
        }
        EvaluatorBinding::Dump { path, latency_s } => {
            let file = File::open(path).map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
            let dump = parse_scenes(BufReader::new(file)).map_err(|e| fail(e.to_string()))?;
            let scenes = if data.is_empty() {
                dump
            } else {
                merge_detections(data, dump)
            };
            let cfg = EvalConfig {
                latency_dt: *latency_s,
                ..cfg.clone()
            };
            let report = evaluate_metrics(&scenes, &cfg, &[Metric::L_MAP])?;
            Ok(report.score(Metric::L_MAP).unwrap_or(0.0))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub id: String,
    pub l_map: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub best: CandidateConfig,
    pub best_l_map: f64,
    /// Evaluations in submission order.
    pub trace: Vec<Trial>,
}

/// Evaluates up to `trial_budget` candidates and returns the highest L-mAP,
/// earliest trial first on ties.
///
/// The whole space is enumerated in order when it fits the budget;
/// otherwise `trial_budget` candidates are drawn uniformly without
/// replacement from a generator seeded with `seed`.
pub fn search(
    space: impl IntoIterator<Item = CandidateConfig>,
    evaluator: &dyn CandidateEvaluator,
    trial_budget: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    if trial_budget == 0 {
        return Err(Error::InvalidInput("trial budget must be at least 1".into()));
    }
    let space: Vec<CandidateConfig> = space.into_iter().collect();
    if space.is_empty() {
        return Err(Error::InvalidInput("search space is empty".into()));
    }
    let chosen: Vec<usize> = if space.len() <= trial_budget {
        (0..space.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample(&mut rng, space.len(), trial_budget).into_vec()
    };

    let scores: Vec<f64> = chosen
        .par_iter()
        .map(|&i| evaluator.evaluate(&space[i]))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = k;
        }
    }
    Ok(SearchOutcome {
        best: space[chosen[best]].clone(),
        best_l_map: scores[best],
        trace: chosen
            .iter()
            .zip(&scores)
            .map(|(&i, &l_map)| Trial {
                id: space[i].id.clone(),
                l_map,
            })
            .collect(),
    })
}

/// [`search`] with the standard [`LmapEvaluator`].
pub fn lhpo_search(
    space: impl IntoIterator<Item = CandidateConfig>,
    data: &[Scene],
    cfg: &EvalConfig,
    trial_budget: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    search(space, &LmapEvaluator { data, cfg }, trial_budget, seed)
}

// ---------------------------------------------------------------------------
// Deployment

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentOption {
    pub model: String,
    pub backend: String,
    pub device: String,
    /// Cumulative development cost ($).
    pub dev_cost: f64,
    /// Hardware cost per deployed system ($).
    pub device_unit_cost: f64,
    pub l_map: f64,
}

impl DeploymentOption {
    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.model, self.backend, self.device)
    }
}

pub fn read_options_csv<R: Read>(reader: R) -> Result<Vec<DeploymentOption>> {
    let options: Vec<DeploymentOption> = csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    for o in &options {
        let ok = [o.dev_cost, o.device_unit_cost]
            .iter()
            .all(|c| c.is_finite() && *c >= 0.0);
        if !ok {
            return Err(Error::InvalidInput(format!("{}: costs must be >= 0", o.label())));
        }
        if !(0.0..=100.0).contains(&o.l_map) {
            return Err(Error::InvalidInput(format!("{}: l_map outside [0, 100]", o.label())));
        }
    }
    Ok(options)
}

/// The bundled deployment option set.
pub fn bundled_options() -> Vec<DeploymentOption> {
    read_options_csv(DEPLOYMENT_OPTIONS_CSV.as_bytes()).expect("bundled fixture parses")
}

pub fn total_cost(opt: &DeploymentOption, n_systems: u32) -> f64 {
    opt.dev_cost + f64::from(n_systems) * opt.device_unit_cost
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DeploymentDecision {
    Selected {
        /// Position in the input option list.
        index: usize,
        option: DeploymentOption,
        total_cost: f64,
    },
    Infeasible,
}

/// Highest L-mAP among options whose total cost fits `budget`; ties go to
/// the cheaper option, then to the earlier one.
pub fn optimize_deployment(
    options: &[DeploymentOption],
    n_systems: u32,
    budget: f64,
) -> Result<DeploymentDecision> {
    if options.is_empty() {
        return Err(Error::InvalidInput("no deployment options".into()));
    }
    if n_systems == 0 {
        return Err(Error::InvalidInput("n_systems must be at least 1".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, o) in options.iter().enumerate() {
        let cost = total_cost(o, n_systems);
        if cost > budget {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, bc)) => o.l_map > options[b].l_map || (o.l_map == options[b].l_map && cost < bc),
        };
        if better {
            best = Some((i, cost));
        }
    }
    Ok(match best {
        Some((index, total_cost)) => DeploymentDecision::Selected {
            index,
            option: options[index].clone(),
            total_cost,
        },
        None => DeploymentDecision::Infeasible,
    })
}
