use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lpap_core::annotation::{error_grid, GridRequest, Quantity};
use lpap_core::data::{parse_config, EvalConfig};
use lpap_core::optimize::{
    bundled_options, lhpo_search, optimize_deployment, read_candidates_json, read_options_csv,
    read_surrogates_csv, total_cost, DeploymentDecision, EvaluatorBinding,
};
use lpap_core::perturb::{perturb_scenes, PerturbationSpec};
use lpap_core::report::{self, ALL_SCENES};
use lpap_core::{evaluate_metrics, parse_scenes, write_scenes, Metric, MetricFamily, MetricReport, Scene};

mod manifest;

use manifest::RunManifest;

/// A problem with the user's input rather than with the tool.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Parser)]
#[command(name = "lpap", version, about = "Latency- and planning-aware 3D detection evaluation")]
struct Cli {
    /// Evaluation config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampled searches and partial perturbations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Score detections in a scene file.
    Eval {
        scenes: PathBuf,
        /// Inference latency in milliseconds; overrides the config.
        #[arg(long)]
        latency_ms: Option<f64>,
        /// Aggregate names (mAP, L-mAP, P-mAP, ...) or families (center, iou,
        /// corner, heading, planning).
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
        /// Also report every scene on its own.
        #[arg(long)]
        per_scene: bool,
        /// Use each frame's recorded `latency_s` when present.
        #[arg(long)]
        replay_latency: bool,
    },
    /// Replace detections with perturbed copies of the ground truth.
    Perturb {
        scenes: PathBuf,
        /// Perturbation spec (JSON).
        #[arg(long)]
        spec: PathBuf,
    },
    /// Tabulate the error of velocity extrapolation from sparse annotations.
    AnnotationError {
        /// Annotation intervals in seconds.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        dt_annotation: Vec<f64>,
        /// Inference latency in seconds.
        #[arg(long, default_value_t = 0.2)]
        dt_inference: f64,
        #[arg(long, value_enum, default_value_t = QuantityArg::Position)]
        quantity: QuantityArg,
        /// Error levels to flag; defaults depend on the quantity.
        #[arg(long, value_delimiter = ',')]
        iso: Vec<f64>,
        /// Acceleration range `lo,hi` in m/s².
        #[arg(long, value_delimiter = ',', default_value = "0,3")]
        a_range: Vec<f64>,
        /// Jerk range `lo,hi` in m/s³.
        #[arg(long, value_delimiter = ',', default_value = "0,3")]
        j_range: Vec<f64>,
        /// Samples per axis.
        #[arg(long, default_value_t = 31)]
        resolution: usize,
    },
    /// Pick the candidate with the highest L-mAP.
    Hpo {
        /// Candidates as CSV (`id,latency_s,l_map`) or JSON.
        #[arg(long)]
        candidates: PathBuf,
        /// Ground truth merged with each dump's detections.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Pick the deployment with the highest L-mAP within a budget.
    DeployOpt {
        /// Options CSV; the bundled option set when omitted.
        #[arg(long)]
        options: Option<PathBuf>,
        #[arg(long)]
        n_systems: u32,
        #[arg(long)]
        budget: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Position,
    Velocity,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Position => Quantity::Position,
            QuantityArg::Velocity => Quantity::Velocity,
        }
    }
}

fn core<T>(r: lpap_core::Result<T>) -> Result<T> {
    r.map_err(|e| {
        if e.is_input_error() {
            anyhow::Error::new(InputError(e.to_string()))
        } else {
            anyhow::Error::new(e)
        }
    })
}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

/// A plain table rendered as CSV or Markdown.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_markdown<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "| {} |", self.header.join(" | "))?;
        writeln!(w, "|{}", "---|".repeat(self.header.len()))?;
        for r in &self.rows {
            writeln!(w, "| {} |", r.join(" | "))?;
        }
        Ok(())
    }

    fn render(&self, format: Format, manifest: &RunManifest) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => {
                manifest.write_csv_comment(&mut buf)?;
                self.write_csv(&mut buf)?;
            }
            Format::Md => {
                self.write_markdown(&mut buf)?;
                manifest.write_markdown_block(&mut buf)?;
            }
        }
        Ok(buf)
    }
}

struct Ctx {
    format: Format,
    out: Option<PathBuf>,
    manifest: RunManifest,
}

impl Ctx {
    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(bytes)?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

fn load_config(config: Option<&Path>, manifest: &mut RunManifest) -> Result<EvalConfig> {
    match config {
        Some(path) => {
            let bytes = manifest.read_input(path)?;
            let text = String::from_utf8(bytes).map_err(|_| input_error("config is not UTF-8"))?;
            core(parse_config(&text))
        }
        None => Ok(EvalConfig::default()),
    }
}

fn load_scenes(path: &Path, manifest: &mut RunManifest) -> Result<Vec<Scene>> {
    let bytes = manifest.read_input(path)?;
    core(parse_scenes(bytes.as_slice())).with_context(|| format!("in {}", path.display()))
}

fn parse_metrics(names: &[String]) -> Result<Vec<Metric>> {
    if names.is_empty() {
        return Ok(Metric::all());
    }
    let mut out = Vec::new();
    for name in names {
        let name = name.trim();
        let found: Vec<Metric> = match Metric::all().into_iter().find(|m| m.aggregate_name().eq_ignore_ascii_case(name)) {
            Some(m) => vec![m],
            None => {
                let family: MetricFamily = core(name.to_ascii_lowercase().parse())?;
                Metric::for_families(&[family])
            }
        };
        for m in found {
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    Ok(out)
}

fn cmd_eval(
    ctx: &mut Ctx,
    config: Option<&Path>,
    scenes: &Path,
    latency_ms: Option<f64>,
    metrics: &[String],
    per_scene: bool,
    replay_latency: bool,
) -> Result<()> {
    let mut cfg = load_config(config, &mut ctx.manifest)?;
    if let Some(ms) = latency_ms {
        if !(ms.is_finite() && ms >= 0.0) {
            return Err(input_error(format!("--latency-ms must be >= 0, got {ms}")));
        }
        cfg.latency_dt = ms / 1000.0;
    }
    if replay_latency {
        cfg.latency_replay = true;
    }
    ctx.manifest.set_config(&cfg)?;
    let metrics = parse_metrics(metrics)?;
    let scenes = load_scenes(scenes, &mut ctx.manifest)?;

    let mut reports: Vec<(String, MetricReport)> = Vec::new();
    if per_scene {
        for s in &scenes {
            let r = core(evaluate_metrics(std::slice::from_ref(s), &cfg, &metrics))
                .with_context(|| format!("scene `{}`", s.scene_id))?;
            reports.push((s.scene_id.clone(), r));
        }
    }
    reports.push((ALL_SCENES.into(), core(evaluate_metrics(&scenes, &cfg, &metrics))?));
    let labelled: Vec<(&str, &MetricReport)> = reports.iter().map(|(s, r)| (s.as_str(), r)).collect();

    let mut buf = Vec::new();
    match ctx.format {
        Format::Csv => {
            ctx.manifest.write_csv_comment(&mut buf)?;
            core(report::write_csv(&labelled, &mut buf))?;
        }
        Format::Md => {
            core(report::write_markdown(&labelled, &mut buf))?;
            ctx.manifest.write_markdown_block(&mut buf)?;
        }
    }
    ctx.emit(&buf)
}

fn cmd_perturb(ctx: &mut Ctx, scenes: &Path, spec_path: &Path, seed: Option<u64>) -> Result<()> {
    let bytes = ctx.manifest.read_input(spec_path)?;
    let mut spec: PerturbationSpec = serde_json::from_slice(&bytes)
        .map_err(|e| input_error(format!("{}: {e}", spec_path.display())))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    ctx.manifest.seed = Some(spec.seed);
    let scenes = load_scenes(scenes, &mut ctx.manifest)?;
    let perturbed = core(perturb_scenes(&scenes, &spec))?;
    let mut buf = Vec::new();
    core(write_scenes(&perturbed, &mut buf))?;
    ctx.emit(&buf)?;
    // scene files carry no comments, so the manifest goes alongside
    if let Some(out) = &ctx.out {
        let mut path = out.clone().into_os_string();
        path.push(".manifest.json");
        let json = serde_json::to_string_pretty(&ctx.manifest)?;
        fs::write(&path, json + "\n").context("writing manifest")?;
    }
    Ok(())
}

fn range(name: &str, v: &[f64]) -> Result<(f64, f64)> {
    match v {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(input_error(format!("--{name} takes exactly two values `lo,hi`"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_annotation_error(
    ctx: &mut Ctx,
    dt_annotation: Vec<f64>,
    dt_inference: f64,
    quantity: Quantity,
    iso: Vec<f64>,
    a_range: &[f64],
    j_range: &[f64],
    resolution: usize,
) -> Result<()> {
    let req = GridRequest {
        delta_small_values: dt_annotation,
        delta_big: dt_inference,
        accel_range: range("a-range", a_range)?,
        jerk_range: range("j-range", j_range)?,
        iso_levels: if iso.is_empty() {
            quantity.default_iso_levels().to_vec()
        } else {
            iso
        },
        quantity,
        resolution,
    };
    let grid = core(error_grid(&req))?;
    let mut buf = Vec::new();
    match ctx.format {
        Format::Csv => {
            ctx.manifest.write_csv_comment(&mut buf)?;
            core(grid.write_csv(&mut buf))?;
        }
        Format::Md => {
            let mut csv_text = Vec::new();
            core(grid.write_csv(&mut csv_text))?;
            let mut reader = csv::Reader::from_reader(csv_text.as_slice());
            let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
            writeln!(buf, "| {} |", header.join(" | "))?;
            writeln!(buf, "|{}", "---|".repeat(header.len()))?;
            for rec in reader.records() {
                let rec = rec?;
                writeln!(buf, "| {} |", rec.iter().collect::<Vec<_>>().join(" | "))?;
            }
            ctx.manifest.write_markdown_block(&mut buf)?;
        }
    }
    ctx.emit(&buf)
}

fn cmd_hpo(
    ctx: &mut Ctx,
    config: Option<&Path>,
    candidates: &Path,
    data: Option<&Path>,
    trials: usize,
    seed: u64,
) -> Result<()> {
    let cfg = load_config(config, &mut ctx.manifest)?;
    ctx.manifest.set_config(&cfg)?;
    ctx.manifest.seed = Some(seed);
    let bytes = ctx.manifest.read_input(candidates)?;
    let is_json = candidates
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let mut space = if is_json {
        core(read_candidates_json(bytes.as_slice()))
    } else {
        core(read_surrogates_csv(bytes.as_slice()))
    }
    .with_context(|| format!("in {}", candidates.display()))?;

    // dump paths are relative to the candidates file
    let base = candidates.parent().unwrap_or(Path::new("."));
    for c in &mut space {
        if let EvaluatorBinding::Dump { path, .. } = &mut c.binding {
            if path.is_relative() {
                *path = base.join(&*path);
            }
            ctx.manifest.read_input(path)?;
        }
    }
    let data = match data {
        Some(p) => load_scenes(p, &mut ctx.manifest)?,
        None => Vec::new(),
    };
    let outcome = core(lhpo_search(space, &data, &cfg, trials, seed))?;

    let mut rows: Vec<Vec<String>> = outcome
        .trace
        .iter()
        .enumerate()
        .map(|(i, t)| vec!["trial".into(), i.to_string(), t.id.clone(), format!("{:.4}", t.l_map)])
        .collect();
    rows.push(vec![
        "best".into(),
        String::new(),
        outcome.best.id.clone(),
        format!("{:.4}", outcome.best_l_map),
    ]);
    let table = Table {
        header: vec!["kind", "trial", "id", "l_map"],
        rows,
    };
    ctx.emit(&table.render(ctx.format, &ctx.manifest)?)
}

fn cmd_deploy_opt(ctx: &mut Ctx, options: Option<&Path>, n_systems: u32, budget: f64) -> Result<()> {
    if !budget.is_finite() {
        return Err(input_error("--budget must be finite"));
    }
    let options = match options {
        Some(p) => {
            let bytes = ctx.manifest.read_input(p)?;
            core(read_options_csv(bytes.as_slice())).with_context(|| format!("in {}", p.display()))?
        }
        None => bundled_options(),
    };
    let decision = core(optimize_deployment(&options, n_systems, budget))?;

    let option_row = |kind: &str, i: usize, status: &str| {
        let o = &options[i];
        vec![
            kind.to_string(),
            i.to_string(),
            o.model.clone(),
            o.backend.clone(),
            o.device.clone(),
            o.dev_cost.to_string(),
            o.device_unit_cost.to_string(),
            o.l_map.to_string(),
            total_cost(o, n_systems).to_string(),
            status.to_string(),
        ]
    };
    let mut rows: Vec<Vec<String>> = (0..options.len())
        .map(|i| {
            let fits = total_cost(&options[i], n_systems) <= budget;
            option_row("option", i, if fits { "feasible" } else { "over_budget" })
        })
        .collect();
    rows.push(match &decision {
        DeploymentDecision::Selected { index, .. } => option_row("decision", *index, "selected"),
        DeploymentDecision::Infeasible => {
            let mut r = vec![String::new(); 10];
            r[0] = "decision".into();
            r[9] = "infeasible".into();
            r
        }
    });
    let table = Table {
        header: vec![
            "kind",
            "index",
            "model",
            "backend",
            "device",
            "dev_cost",
            "device_unit_cost",
            "l_map",
            "total_cost",
            "status",
        ],
        rows,
    };
    ctx.emit(&table.render(ctx.format, &ctx.manifest)?)
}

fn run(cli: Cli, args: Vec<String>) -> Result<()> {
    let name = match &cli.command {
        Command::Eval { .. } => "eval",
        Command::Perturb { .. } => "perturb",
        Command::AnnotationError { .. } => "annotation-error",
        Command::Hpo { .. } => "hpo",
        Command::DeployOpt { .. } => "deploy-opt",
    };
    let mut ctx = Ctx {
        format: cli.format,
        out: cli.out,
        manifest: RunManifest::new(name, args, cli.seed),
    };
    let config = cli.config.as_deref();
    match cli.command {
        Command::Eval {
            scenes,
            latency_ms,
            metrics,
            per_scene,
            replay_latency,
        } => cmd_eval(&mut ctx, config, &scenes, latency_ms, &metrics, per_scene, replay_latency),
        Command::Perturb { scenes, spec } => {
            if ctx.format != Format::Csv {
                return Err(input_error("perturb writes scene JSONL; --format does not apply"));
            }
            cmd_perturb(&mut ctx, &scenes, &spec, cli.seed)
        }
        Command::AnnotationError {
            dt_annotation,
            dt_inference,
            quantity,
            iso,
            a_range,
            j_range,
            resolution,
        } => cmd_annotation_error(
            &mut ctx,
            dt_annotation,
            dt_inference,
            quantity.into(),
            iso,
            &a_range,
            &j_range,
            resolution,
        ),
        Command::Hpo {
            candidates,
            data,
            trials,
        } => cmd_hpo(&mut ctx, config, &candidates, data.as_deref(), trials, cli.seed.unwrap_or(0)),
        Command::DeployOpt {
            options,
            n_systems,
            budget,
        } => cmd_deploy_opt(&mut ctx, options.as_deref(), n_systems, budget),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = std::env::args().skip(1).collect();
    match run(cli, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<InputError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
