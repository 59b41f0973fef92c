use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use visuomotor::bundle::ModelBundle;
use visuomotor::config::RunConfig;
use visuomotor::harness::{
    compare_adaptation, eval_seed, eval_stage, read_metrics, report_dir, write_comparison, write_evaluation,
};
use visuomotor::pipeline::{adapt_bundle, generate, train, DataKind};
use visuomotor::{binfmt, plot, FormatError};
use visuomotor_core::curriculum::Stage;

#[derive(Parser)]
#[command(name = "visuomotor", version, about = "Developmental reaching with growing self-organizing maps")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured run seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Gaze,
    Arm,
    Eyehand,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Gaze => Stage::Gaze,
            StageArg::Arm => Stage::Arm,
            StageArg::Eyehand => Stage::EyeHand,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gaze,
    Arm,
    Eyehand,
    Envchange,
}

impl From<KindArg> for DataKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Gaze => DataKind::Gaze,
            KindArg::Arm => DataKind::Arm,
            KindArg::Eyehand => DataKind::EyeHand,
            KindArg::Envchange => DataKind::EnvChange,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the default configuration as TOML.
    InitConfig {
        #[arg(long)]
        out: PathBuf,
    },
    /// Record a babbling dataset.
    GenData {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        data: PathBuf,
        /// Bundle with a gaze model; needed for eyehand and envchange data.
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Train one stage into a model bundle.
    Train {
        #[arg(long, value_enum)]
        stage: StageArg,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        models: PathBuf,
    },
    /// Evaluate one stage and write its report and metrics.
    Eval {
        #[arg(long, value_enum)]
        stage: StageArg,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
        /// Lock the shoulder rotation joint at zero.
        #[arg(long)]
        locked: bool,
    },
    /// Adapt a bundle to the envchange dataset.
    Adapt {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare an original and an adapted bundle on the locked robot.
    Compare {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        adapted: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Render error histograms from a metrics CSV and weight scatters from a bundle.
    Plot {
        #[arg(long)]
        metrics: Vec<PathBuf>,
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every step from data generation to the adaptation comparison.
    Curriculum {
        #[arg(long)]
        workdir: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        compare_trials: Option<usize>,
        #[arg(long)]
        no_plots: bool,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, FormatError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn emit(v: serde_json::Value) {
    println!("{v}");
}

fn load_bundle(dir: &Path, stage: &str, cfg: &RunConfig) -> Result<ModelBundle, FormatError> {
    if !ModelBundle::exists(dir) {
        return Err(visuomotor_core::Error::MissingModel(match stage {
            "gaze" => "gaze",
            "arm" => "arm",
            _ => "eyehand",
        })
        .into());
    }
    let b = ModelBundle::load(dir)?;
    if b.config.robot != cfg.robot {
        return Err(FormatError::RobotMismatch);
    }
    Ok(b)
}

fn run_eval(
    cfg: &RunConfig,
    stage: Stage,
    models: &Path,
    out: &Path,
    trials: Option<usize>,
    repeats: Option<usize>,
    locked: bool,
) -> Result<serde_json::Value, FormatError> {
    let bundle = load_bundle(models, stage.name(), cfg)?;
    let trials = trials.unwrap_or(cfg.eval.trials);
    let repeats = repeats.unwrap_or(cfg.eval.repeats);
    let eval = eval_stage(stage, &bundle.models, cfg, trials, repeats, eval_seed(cfg, stage, locked), locked)?;
    let name = format!("eval-{}{}", stage.name(), if locked { "-locked" } else { "" });
    let [json, csv] = write_evaluation(&report_dir(out, cfg), &name, &eval)?;
    Ok(json!({
        "command": "eval",
        "stage": stage.name(),
        "report": json,
        "metrics": csv,
        "median": eval.report.median.mean,
        "success_rate": eval.report.success_rate.mean,
    }))
}

fn run_compare(
    cfg: &RunConfig,
    original: &Path,
    adapted: &Path,
    out: &Path,
    trials: Option<usize>,
    repeats: Option<usize>,
) -> Result<serde_json::Value, FormatError> {
    let a = load_bundle(original, "eyehand", cfg)?;
    let b = load_bundle(adapted, "eyehand", cfg)?;
    let trials = trials.unwrap_or(cfg.eval.compare_trials);
    let repeats = repeats.unwrap_or(cfg.eval.repeats);
    let (cmp, evals) = compare_adaptation(&a, &b, trials, repeats, eval_seed(cfg, Stage::EyeHand, true))?;
    let files = write_comparison(&report_dir(out, cfg), &cmp, &evals)?;
    Ok(json!({
        "command": "compare",
        "files": files,
        "original_success": cmp.original.successes.mean,
        "adapted_success": cmp.adapted.successes.mean,
        "verdict": cmp.verdict,
    }))
}

fn run_plot(metrics: &[PathBuf], models: Option<&Path>, out: &Path) -> Result<serde_json::Value, FormatError> {
    let mut files = Vec::new();
    for m in metrics {
        let rows = read_metrics(m)?;
        let stem = m.file_stem().and_then(|s| s.to_str()).unwrap_or("metrics");
        files.extend(plot::error_histograms(&rows, out, &format!("{stem}-"))?);
    }
    if let Some(dir) = models {
        std::fs::create_dir_all(out)?;
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("gwr") {
                continue;
            }
            let net = binfmt::load_network(&path)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("net");
            let svg = out.join(format!("{stem}-weights.svg"));
            plot::weight_scatter(&net, &svg)?;
            files.push(svg);
        }
    }
    files.sort();
    Ok(json!({ "command": "plot", "files": files }))
}

fn run(cli: &Cli) -> Result<(), FormatError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::InitConfig { out } => {
            std::fs::write(out, cfg.to_toml()?)?;
            emit(json!({ "command": "init-config", "path": out, "digest": cfg.digest() }));
        }
        Command::GenData { kind, data, models } => {
            let kind = DataKind::from(*kind);
            let (count, sha256) = generate(kind, &cfg, data, models.as_deref())?;
            emit(json!({ "command": "gen-data", "kind": kind.name(), "count": count, "sha256": sha256 }));
        }
        Command::Train { stage, data, models } => {
            let stage = Stage::from(*stage);
            let bundle = train(stage, &cfg, data, models)?;
            let mut neurons = serde_json::Map::new();
            for m in [&bundle.models.gaze, &bundle.models.arm, &bundle.models.eyehand].into_iter().flatten() {
                neurons.insert(m.stage.name().into(), serde_json::to_value(m.connectivity())?);
            }
            emit(json!({ "command": "train", "stage": stage.name(), "models": models, "connectivity": neurons }));
        }
        Command::Eval { stage, models, out, trials, repeats, locked } => {
            emit(run_eval(&cfg, (*stage).into(), models, out, *trials, *repeats, *locked)?);
        }
        Command::Adapt { data, models, out } => {
            let b = adapt_bundle(&cfg, data, models, out)?;
            emit(json!({ "command": "adapt", "out": out, "adapted_from": b.adapted_from }));
        }
        Command::Compare { original, adapted, out, trials, repeats } => {
            emit(run_compare(&cfg, original, adapted, out, *trials, *repeats)?);
        }
        Command::Plot { metrics, models, out } => emit(run_plot(metrics, models.as_deref(), out)?),
        Command::Curriculum { workdir, trials, repeats, compare_trials, no_plots } => {
            let data = workdir.join("data");
            let models = workdir.join("models");
            let adapted = workdir.join("models-adapted");
            let reports = workdir.join("reports");
            for kind in [DataKind::Gaze, DataKind::Arm] {
                let (count, _) = generate(kind, &cfg, &data, None)?;
                emit(json!({ "command": "gen-data", "kind": kind.name(), "count": count }));
            }
            train(Stage::Gaze, &cfg, &data, &models)?;
            train(Stage::Arm, &cfg, &data, &models)?;
            let (count, _) = generate(DataKind::EyeHand, &cfg, &data, Some(&models))?;
            emit(json!({ "command": "gen-data", "kind": "eyehand", "count": count }));
            train(Stage::EyeHand, &cfg, &data, &models)?;
            for stage in [Stage::Gaze, Stage::Arm, Stage::EyeHand] {
                emit(run_eval(&cfg, stage, &models, &reports, *trials, *repeats, false)?);
            }
            let (count, _) = generate(DataKind::EnvChange, &cfg, &data, Some(&models))?;
            emit(json!({ "command": "gen-data", "kind": "envchange", "count": count }));
            adapt_bundle(&cfg, &data, &models, &adapted)?;
            emit(run_compare(&cfg, &models, &adapted, &reports, *compare_trials, *repeats)?);
            if !no_plots {
                let dir = report_dir(&reports, &cfg);
                let metrics: Vec<PathBuf> = ["eval-gaze", "eval-arm", "eval-eyehand", "compare"]
                    .iter()
                    .map(|n| dir.join(format!("{n}.csv")))
                    .collect();
                emit(run_plot(&metrics, Some(&models), &dir.join("plots"))?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.code(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
