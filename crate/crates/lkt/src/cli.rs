//! Command-line surface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lkt_core::cv::{CvConfig, CvReport};
use lkt_core::dataset::TrialEvent;
use lkt_core::recommend::{candidate_probabilities, rank, Ranked, DEFAULT_MASTERY, DEFAULT_TARGET};
use lkt_core::simulate::{generate, SynthConfig};
use lkt_core::spec::presets::{expand, preset, TABLE2};
use lkt_core::{
    filter_pipeline, optimize_nonlinear, parse_model, predict, Dataset, FilterConfig, FitConfig,
    FittedModel, ModelSpec,
};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::ingest::{item_kcs, load_datashop, write_tsv, ColumnMap};
use crate::output::{file_digest, read_json, write_file, Artifact, Header};
use crate::{parallel, report};

#[derive(Debug, Parser)]
#[command(
    name = "lkt",
    version,
    about = "Logistic knowledge tracing: fit, evaluate and compare learner models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and write model.json.
    Fit(FitArgs),
    /// Predict success probabilities with a fitted model.
    Predict(PredictArgs),
    /// Split-half cross-validation of one or more models; writes cv.json.
    Cv(CvArgs),
    /// Cross-validation plus the comparison report.
    Compare(CvArgs),
    /// Generate a synthetic dataset from a ground-truth model.
    Simulate(SimulateArgs),
    /// Rank candidate items for a student by closeness to a target probability.
    Recommend(RecommendArgs),
    /// Render a saved cv.json.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Tab-delimited event log.
    #[arg(long)]
    pub data: PathBuf,
    /// JSON column map overriding the DataShop defaults.
    #[arg(long)]
    pub columns: Option<PathBuf>,
    /// Filter pipeline: a JSON FilterConfig file, or `default` for the default
    /// thresholds. Without this flag no filtering is applied.
    #[arg(long)]
    pub filter: Option<String>,
}

#[derive(Debug, Args)]
pub struct FitOptions {
    /// JSON FitConfig overriding the defaults.
    #[arg(long)]
    pub fit_config: Option<PathBuf>,
    /// Simplex starts (the first is the screened default start).
    #[arg(long)]
    pub starts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Model specification text.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<String>,
    /// Named preset such as table2:2.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub fit: FitOptions,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Md,
    Tsv,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Model specification text (repeatable).
    #[arg(long)]
    pub spec: Vec<String>,
    /// Preset names (repeatable, comma separated); `table2:*` and `table3:*` expand in table order.
    #[arg(long, alias = "preset", value_delimiter = ',')]
    pub presets: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long)]
    pub seed: u64,
    /// Random subsample of this many students per run before splitting.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub fit: FitOptions,
    /// Output formats (repeatable); cv defaults to json, compare to json and md.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub report: Vec<ReportFormat>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON SynthConfig; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub students: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub kcs: Option<usize>,
    #[arg(long)]
    pub items_per_kc: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Event log holding the student's history.
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub student: String,
    /// Candidate items (comma separated); defaults to every item in the data.
    #[arg(long, value_delimiter = ',')]
    pub items: Vec<String>,
    /// Time of the next trial; defaults to the student's last event time.
    #[arg(long)]
    pub time: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TARGET)]
    pub target: f64,
    #[arg(long, default_value_t = DEFAULT_MASTERY)]
    pub mastery: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// cv.json written by `cv` or `compare`.
    #[arg(long)]
    pub cv: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "md")]
    pub report: Vec<ReportFormat>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Outcome of a successful command: artifacts written, plus whether any fit
/// carried a hard-failure flag.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub hard_failure: Option<String>,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Cv(a) => cmd_cv(a, &[ReportFormat::Json]),
        Command::Compare(a) => cmd_cv(a, &[ReportFormat::Json, ReportFormat::Md]),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Recommend(a) => cmd_recommend(a),
        Command::Report(a) => cmd_report(a),
    }
}

struct Loaded {
    ds: Dataset,
    config: serde_json::Value,
}

fn load(args: &DataArgs) -> Result<Loaded> {
    let columns: ColumnMap = match &args.columns {
        Some(p) => read_json(p)?,
        None => ColumnMap::default(),
    };
    let filter: Option<FilterConfig> = match args.filter.as_deref() {
        None => None,
        Some("default") => Some(FilterConfig::default()),
        Some(path) => Some(read_json(Path::new(path))?),
    };
    let raw = load_datashop(&args.data, &columns)?;
    for w in &raw.provenance.warnings {
        eprintln!("warning: {w}");
    }
    let ds = match &filter {
        Some(f) => filter_pipeline(&raw, f)?,
        None => raw,
    };
    let config = json!({
        "data_sha256": file_digest(&args.data)?,
        "columns": columns,
        "filter": filter,
    });
    Ok(Loaded { ds, config })
}

fn fit_config(opts: &FitOptions, seed: u64) -> Result<FitConfig> {
    let mut cfg: FitConfig = match &opts.fit_config {
        Some(p) => read_json(p)?,
        None => FitConfig::default(),
    };
    if let Some(s) = opts.starts {
        cfg.starts = s;
    }
    cfg.seed = seed;
    Ok(cfg)
}

fn label_for(name: &str) -> String {
    match name
        .strip_prefix("table2:")
        .and_then(|r| r.parse::<usize>().ok())
    {
        Some(row) if (1..=TABLE2.len()).contains(&row) => format!("{name} {}", TABLE2[row - 1].0),
        _ => name.to_string(),
    }
}

/// Specs and display labels: presets first in the order given, then spec texts.
fn collect_specs(texts: &[String], presets: &[String]) -> Result<(Vec<ModelSpec>, Vec<String>)> {
    let mut specs = Vec::new();
    let mut labels = Vec::new();
    for p in presets {
        for name in expand(p.trim()).map_err(lkt_core::Error::from)? {
            specs.push(preset(&name).map_err(lkt_core::Error::from)?);
            labels.push(label_for(&name));
        }
    }
    for t in texts {
        let spec = parse_model(t).map_err(lkt_core::Error::from)?;
        labels.push(spec.render());
        specs.push(spec);
    }
    if specs.is_empty() {
        return Err(Error::Usage("give at least one --spec or --presets".into()));
    }
    Ok((specs, labels))
}

fn cmd_fit(a: FitArgs) -> Result<Outcome> {
    let loaded = load(&a.data)?;
    let spec = match (&a.spec, &a.preset) {
        (Some(t), _) => parse_model(t).map_err(lkt_core::Error::from)?,
        (None, Some(p)) => preset(p).map_err(lkt_core::Error::from)?,
        (None, None) => return Err(Error::Usage("give --spec or --preset".into())),
    };
    let cfg = fit_config(&a.fit, a.seed)?;
    let model = optimize_nonlinear(&loaded.ds, &spec, &cfg)?;
    let config = json!({
        "command": "fit",
        "input": loaded.config,
        "spec": spec.render(),
        "fit": cfg,
    });
    let path = a.out.join("model.json");
    Artifact::new(
        config,
        ModelBody {
            model: model.clone(),
            warnings: loaded.ds.provenance.warnings.clone(),
        },
    )
    .write(&path)?;

    println!("model\t{}", model.spec);
    for p in &model.resolved {
        println!(
            "param\t{}.{}\t{}\t{}",
            p.feature,
            p.name,
            p.value,
            if p.free { "fitted" } else { "fixed" }
        );
    }
    println!("log_likelihood\t{}", model.log_likelihood);
    println!("mcfadden_train\t{}", model.mcfadden());
    println!("coefficients\t{}", model.coefficients.len());
    let d = &model.diagnostics;
    println!(
        "converged\t{}\nseparation\t{}\nouter_evaluations\t{}",
        d.converged, d.separation, d.outer_evaluations
    );
    let hard_failure =
        (!model.log_likelihood.is_finite()).then(|| "non-finite log-likelihood".to_string());
    Ok(Outcome {
        written: vec![path],
        hard_failure,
    })
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct ModelBody {
    model: FittedModel,
    warnings: Vec<String>,
}

fn cmd_predict(a: PredictArgs) -> Result<Outcome> {
    let artifact: Artifact<ModelBody> = read_json(&a.model)?;
    let loaded = load(&a.data)?;
    let p = predict(&artifact.body.model, &loaded.ds)?;
    let config = json!({
        "command": "predict",
        "model_fingerprint": artifact.header.fingerprint,
        "input": loaded.config,
    });
    let header = Header::new(&config);
    let mut text = format!("# {}\nstudent\titem\ttime\toutcome\tp\n", header.line());
    for (ev, p) in loaded.ds.events().iter().zip(p) {
        text.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            ev.student,
            ev.item.as_deref().unwrap_or(""),
            ev.time,
            ev.outcome,
            p
        ));
    }
    let path = a.out.join("predictions.tsv");
    write_file(&path, text.as_bytes())?;
    Ok(Outcome {
        written: vec![path],
        hard_failure: None,
    })
}

fn write_reports(
    report: &CvReport,
    config: serde_json::Value,
    formats: &[ReportFormat],
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let header = Header::new(&config);
    let mut written = Vec::new();
    for f in formats {
        let path = match f {
            ReportFormat::Json => {
                let path = out.join("cv.json");
                Artifact::new(
                    config.clone(),
                    CvBody {
                        report: report.clone(),
                    },
                )
                .write(&path)?;
                path
            }
            ReportFormat::Md => {
                let path = out.join("report.md");
                write_file(&path, report::markdown(report, &header.line()).as_bytes())?;
                path
            }
            ReportFormat::Tsv => {
                let path = out.join("report.tsv");
                write_file(&path, report::tsv(report, &header.line()).as_bytes())?;
                path
            }
        };
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
struct CvBody {
    report: CvReport,
}

fn cmd_cv(a: CvArgs, default_formats: &[ReportFormat]) -> Result<Outcome> {
    let loaded = load(&a.data)?;
    let (specs, labels) = collect_specs(&a.spec, &a.presets)?;
    let cfg = CvConfig {
        runs: a.runs,
        seed: a.seed,
        subsample: a.subsample,
        fit: fit_config(&a.fit, a.seed)?,
    };
    let report = parallel::split_half_cv(&loaded.ds, &specs, Some(&labels), &cfg, a.threads)?;
    let config = json!({
        "command": "cv",
        "input": loaded.config,
        "specs": specs.iter().map(ModelSpec::render).collect::<Vec<_>>(),
        "labels": labels,
        "cv": cfg,
    });
    let formats = if a.report.is_empty() {
        default_formats
    } else {
        &a.report
    };
    let written = write_reports(&report, config, formats, &a.out)?;
    for (i, m) in report.summary.iter().enumerate() {
        println!(
            "{}\t{}\tr2={}\trmse={}\tauc={}",
            i + 1,
            m.label,
            m.mean_mcfadden.map_or("NA".into(), |v| format!("{v:.4}")),
            m.mean_rmse.map_or("NA".into(), |v| format!("{v:.4}")),
            m.mean_auc.map_or("NA".into(), |v| format!("{v:.4}"))
        );
    }
    let failed: Vec<String> = report
        .summary
        .iter()
        .filter(|m| m.failed_runs > 0)
        .map(|m| format!("{} failed in {} runs", m.label, m.failed_runs))
        .collect();
    let hard_failure = (!failed.is_empty()).then(|| failed.join("; "));
    Ok(Outcome {
        written,
        hard_failure,
    })
}

fn cmd_simulate(a: SimulateArgs) -> Result<Outcome> {
    let mut cfg: SynthConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SynthConfig::default(),
    };
    if let Some(v) = a.students {
        cfg.students = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.kcs {
        cfg.kcs = v;
    }
    if let Some(v) = a.items_per_kc {
        cfg.items_per_kc = v;
    }
    cfg.seed = a.seed;
    let ds = generate(&cfg)?;
    let config = json!({ "command": "simulate", "simulate": cfg });
    let header = Header::new(&config);
    let mut buf = Vec::new();
    write_tsv(&ds, &mut buf, &[header.line()])?;
    let data = a.out.join("data.tsv");
    write_file(&data, &buf)?;
    let prov = a.out.join("provenance.json");
    Artifact::new(
        config,
        json!({ "events": ds.len(), "students": ds.students().len(), "provenance": ds.provenance }),
    )
    .write(&prov)?;
    println!("events\t{}\nstudents\t{}", ds.len(), ds.students().len());
    Ok(Outcome {
        written: vec![data, prov],
        hard_failure: None,
    })
}

fn cmd_recommend(a: RecommendArgs) -> Result<Outcome> {
    let artifact: Artifact<ModelBody> = read_json(&a.model)?;
    let model = &artifact.body.model;
    let loaded = load(&a.data)?;
    let ds = &loaded.ds;
    let idx = ds
        .student_index(&a.student)
        .ok_or_else(|| Error::Usage(format!("student {:?} is not in the data", a.student)))?;
    let history = ds.student_events(idx);
    let catalog = item_kcs(ds);
    let items: Vec<String> = if a.items.is_empty() {
        catalog.keys().cloned().collect()
    } else {
        a.items.clone()
    };
    let time = a
        .time
        .unwrap_or_else(|| history.last().map_or(0.0, |e| e.time));
    let candidates = items
        .iter()
        .map(|item| {
            let kcs = catalog
                .get(item)
                .ok_or_else(|| Error::Usage(format!("item {item:?} is not in the data")))?;
            let mut ev = TrialEvent::new(a.student.clone(), time, 0)
                .with_item(item.clone())
                .with_kcs(kcs.iter().cloned());
            if let Some(s) = history.last().and_then(|e| e.session.clone()) {
                ev = ev.with_session(s);
            }
            if let Some(last) = history.last() {
                ev.extra = last.extra.clone();
            }
            Ok(ev)
        })
        .collect::<Result<Vec<_>>>()?;
    let probs = candidate_probabilities(model, history, &candidates, &ds.schema)?;
    let ranked: Vec<Ranked> = rank(&probs, a.target, a.mastery)?;
    println!("rank\titem\tp\tdistance\tmastered");
    for (i, r) in ranked.iter().enumerate() {
        println!(
            "{}\t{}\t{:.4}\t{:.4}\t{}",
            i + 1,
            r.item,
            r.p,
            r.distance,
            r.mastered
        );
    }
    let mut written = Vec::new();
    if let Some(out) = &a.out {
        let config = json!({
            "command": "recommend",
            "model_fingerprint": artifact.header.fingerprint,
            "input": loaded.config,
            "student": a.student,
            "items": items,
            "time": time,
            "target": a.target,
            "mastery": a.mastery,
        });
        let path = out.join("recommend.json");
        Artifact::new(config, json!({ "ranking": ranked })).write(&path)?;
        written.push(path);
    }
    Ok(Outcome {
        written,
        hard_failure: None,
    })
}

fn cmd_report(a: ReportArgs) -> Result<Outcome> {
    let artifact: Artifact<CvBody> = read_json(&a.cv)?;
    let written = write_reports(&artifact.body.report, artifact.config, &a.report, &a.out)?;
    Ok(Outcome {
        written,
        hard_failure: None,
    })
}
