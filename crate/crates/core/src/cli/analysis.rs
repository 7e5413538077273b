use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use super::write_atomic;
use crate::calibration::DEFAULT_BIN_COUNT;
use crate::error::{Error, Result};
use crate::eval_ingest::{
    bundles_to_points, parse_prediction_log, parse_summary_table, write_summary_table, ResultBundle,
    TaskSummary,
};
use crate::frontier::{
    detect_degradation, pareto_classify, scaling_stats_with, select_lambda_star, write_frontier_report,
    Normalization, DEFAULT_TOLERANCE,
};
use crate::tensor_store::open_checkpoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum NormalizeArg {
    #[default]
    SweepMax,
    ItAccuracy,
}

#[derive(Debug, Clone, Args)]
pub struct CalibArgs {
    /// JSONL prediction log; repeat for several models.
    #[arg(long = "log", required = true)]
    pub logs: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BIN_COUNT)]
    pub bins: usize,
    /// Write calibration.json, reliability.csv and summary.csv here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub(super) fn cmd_calib(args: &CalibArgs) -> Result<()> {
    let mut reports = Vec::new();
    let mut reliability = String::from(
        "model_id,lambda,task,bin,lower,upper,count,mean_confidence,accuracy,gap\n",
    );
    let mut summaries = Vec::new();

    for path in &args.logs {
        let bundle = parse_prediction_log(path)?;
        if bundle.record_count() == 0 {
            return Err(Error::EmptyInput);
        }
        let lambda = bundle.lambda.map(|l| l.to_string()).unwrap_or_default();
        let mut summary = ResultBundle::new(bundle.model_id.clone(), bundle.lambda);
        for report in bundle.calibration(args.bins)? {
            println!(
                "{} {} n={} accuracy={:.6} mean_confidence={:.6} ece={:.6}",
                bundle.model_id, report.task, report.n, report.accuracy, report.mean_confidence, report.ece
            );
            for (i, b) in report.bins.iter().enumerate() {
                let _ = writeln!(
                    reliability,
                    "{},{},{},{},{},{},{},{},{},{}",
                    bundle.model_id, lambda, report.task, i, b.lower, b.upper, b.count,
                    b.mean_confidence, b.accuracy, b.gap
                );
            }
            summary.summaries.insert(
                report.task.clone(),
                TaskSummary {
                    accuracy: 100.0 * report.accuracy,
                    ece: Some(report.ece),
                },
            );
            reports.push(json!({
                "model_id": bundle.model_id,
                "lambda": bundle.lambda,
                "report": report,
            }));
        }
        summaries.push(summary);
    }

    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let text = serde_json::to_string_pretty(&reports).map_err(|e| Error::Serialization(e.to_string()))?;
        write_atomic(&dir.join("calibration.json"), text + "\n")?;
        write_atomic(&dir.join("reliability.csv"), reliability)?;
        write_summary_table(&summaries, dir.join("summary.csv"))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct FrontierArgs {
    /// Summary CSV (model_id,lambda,task,accuracy,ece); repeatable.
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    /// JSONL prediction log carrying a lambda; repeatable.
    #[arg(long = "log")]
    pub logs: Vec<PathBuf>,
    /// Task whose accuracy is the first objective.
    #[arg(long)]
    pub acc_task: String,
    /// Task whose ECE is the second objective (defaults to --acc-task).
    #[arg(long)]
    pub ece_task: Option<String>,
    /// Bins for ECE computed from logs.
    #[arg(long, default_value_t = DEFAULT_BIN_COUNT)]
    pub bins: usize,
    /// Per-step tolerance of the lambda > 1 monotonicity checks.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::SweepMax)]
    pub normalize: NormalizeArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Tasks checked for lambda > 1 degradation (default: all).
    #[arg(long = "degradation-task")]
    pub degradation_tasks: Vec<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub(super) fn cmd_frontier(args: &FrontierArgs) -> Result<()> {
    if args.inputs.is_empty() && args.logs.is_empty() {
        return Err(Error::InvalidArgument("give at least one --input or --log".into()));
    }
    if !(args.tau >= 0.0 && args.tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be non-negative", args.tau)));
    }
    let mut bundles = Vec::new();
    for path in &args.inputs {
        bundles.extend(parse_summary_table(path)?);
    }
    for path in &args.logs {
        bundles.push(parse_prediction_log(path)?);
    }
    for b in &bundles {
        b.validate()?;
    }
    let points = bundles_to_points(&bundles, args.bins)?;
    let acc_task = args.acc_task.as_str();
    let ece_task = args.ece_task.as_deref().unwrap_or(acc_task);

    let pareto = pareto_classify(&points, acc_task, ece_task)?;
    let star = select_lambda_star(&points, acc_task, ece_task)?;
    let normalization = match args.normalize {
        NormalizeArg::SweepMax => Normalization::SweepMax,
        NormalizeArg::ItAccuracy => Normalization::ItAccuracy,
    };
    let scaling = match scaling_stats_with(&points, acc_task, ece_task, normalization) {
        Ok(s) => Some(s),
        Err(Error::TooFewPoints { needed, got }) => {
            log::info!("skipping scaling statistics: {got} interior points, need {needed}");
            None
        }
        Err(e) => return Err(e),
    };

    let tasks: BTreeSet<String> = if args.degradation_tasks.is_empty() {
        points
            .iter()
            .filter(|p| p.lambda > 1.0)
            .flat_map(|p| p.accuracy.keys().cloned())
            .collect()
    } else {
        args.degradation_tasks.iter().cloned().collect()
    };
    let degradation: Vec<_> = tasks
        .iter()
        .filter_map(|t| detect_degradation(&points, t, args.tau))
        .collect();

    write_frontier_report(
        &args.out_dir,
        &pareto,
        Some(&star),
        scaling.as_ref(),
        &degradation,
        args.format == OutputFormat::Json,
    )?;

    let frontier: Vec<String> = pareto
        .frontier_points()
        .map(|p| format!("{}({})", p.lambda, p.model_id))
        .collect();
    println!("frontier {}", frontier.join(" "));
    let (acc, ece) = star.axes(acc_task, ece_task)?;
    println!(
        "lambda_star={} model_id={} accuracy={} ece={}",
        star.lambda, star.model_id, acc, ece
    );
    if let Some(s) = &scaling {
        println!("scaling peak_gain={} smoothness={}", s.peak_gain, s.smoothness);
    }
    for d in &degradation {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "n/a".into());
        println!(
            "degradation task={} flagged={} accuracy_declining={} ece_rising={} half_crossing={}",
            d.task,
            d.flagged,
            d.accuracy_declining,
            opt(d.ece_rising.map(|b| b.to_string())),
            opt(d.half_crossing_lambda.map(|l| l.to_string()))
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    /// Checkpoint file or shard index.
    pub path: PathBuf,
    #[arg(long)]
    pub json: bool,
}

pub(super) fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    let m = open_checkpoint(&args.path)?;
    if args.json {
        let tensors: Vec<_> = m
            .tensors
            .iter()
            .map(|t| {
                json!({
                    "name": t.name,
                    "dtype": t.dtype.as_str(),
                    "shape": t.shape,
                    "bytes": t.byte_len(),
                    "shard": m.shards[t.shard].path.display().to_string(),
                })
            })
            .collect();
        let out = json!({ "tensors": tensors, "metadata": m.metadata });
        println!("{}", serde_json::to_string_pretty(&out).map_err(|e| Error::Serialization(e.to_string()))?);
        return Ok(());
    }
    for t in &m.tensors {
        println!("{}\t{}\t{:?}\t{}", t.name, t.dtype, t.shape, t.byte_len());
    }
    for (k, v) in &m.metadata {
        println!("metadata {k}={v}");
    }
    Ok(())
}
