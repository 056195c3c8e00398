//! Command line front end: dataset ingestion, protocol-based feature
//! ranking, top-k evaluation sweeps, synthetic tables, and plot rendering.
//!
//! Every command is a pure function of its input files and the --seed flag;
//! rerunning writes identical bytes (the sweep report's wall-time column is
//! the one measured, non-reproducible field).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retinarank::evalkit::{
    accuracy_vs_k_svg, evaluate_binary_subtask, make_split, roc_svg, run_protocol, sweep_topk,
    write_report_csv, write_roc_points, EvalReport, PlotSeries,
};
use retinarank::learners::{ClassifierKind, ClassifierSpec};
use retinarank::pipeline::ingest_dataset;
use retinarank::prep::DatasetConfig;
use retinarank::ranking::{read_ranking, write_ranking, RankMethod};
use retinarank::synth::{generate, SynthSpec};
use retinarank::{Error, FeatureTable, Result, SampleSource};

#[derive(Parser)]
#[command(
    name = "retinarank",
    version,
    about = "Feature ranking and evaluation for region-based image classification",
    after_help = "Exit codes: 0 success, 1 usage error, 2 data error.\n\
                  RETINARANK_OUT, when set, overrides every --out-dir flag."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract candidate regions from a configured image dataset and write
    /// the feature table.
    Ingest(IngestArgs),
    /// Rank features with the 5-fold protocol and write the consensus order.
    Rank(RankArgs),
    /// Train on the 30% train side and evaluate top-k subsets on the rest.
    Sweep(SweepArgs),
    /// Generate a labeled synthetic table with known informative features.
    Synth(SynthArgs),
    /// Re-render plots from previously written report files.
    Report(ReportArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Dataset config file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output feature-table CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    /// Feature-table CSV from `ingest` or `synth`.
    #[arg(long)]
    table: PathBuf,
    /// Ranking methods, comma separated: fscore, corr, mrmr.
    #[arg(long, value_delimiter = ',', default_value = "mrmr", value_parser = parse_method)]
    method: Vec<RankMethod>,
    /// Classifier probing each fold's validation error: bdt, df, knn.
    #[arg(long, default_value = "knn", value_parser = parse_classifier)]
    classifier: ClassifierKind,
    /// Histogram bins for mutual information.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Split/training seed; reuse it in `sweep` so the sides match.
    #[arg(long)]
    seed: u64,
    /// Directory receiving ranking_<method>.csv files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Feature-table CSV from `ingest` or `synth`.
    #[arg(long)]
    table: PathBuf,
    /// Ranking CSV from `rank`.
    #[arg(long)]
    ranking: PathBuf,
    /// Classifiers, comma separated: bdt, df, knn.
    #[arg(long, value_delimiter = ',', default_value = "bdt", value_parser = parse_classifier)]
    classifier: Vec<ClassifierKind>,
    /// Feature counts to evaluate; default 5,10,20,40 capped at L, plus L.
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    /// Split/training seed; reuse the `rank` seed so the sides match.
    #[arg(long)]
    seed: u64,
    /// Directory receiving report.csv, ROC point files and SVG plots.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Positive class of an extra two-class ROC restricted to rows of the
    /// two given classes (for multi-class tables).
    #[arg(long, requires = "roc_negative")]
    roc_positive: Option<u32>,
    /// Negative class of the extra two-class ROC.
    #[arg(long, requires = "roc_positive")]
    roc_negative: Option<u32>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 5000)]
    samples: usize,
    /// Features carrying class-dependent means, placed first.
    #[arg(long, default_value_t = 10)]
    informative: usize,
    /// Pure-noise features appended after the informative block.
    #[arg(long, default_value_t = 40)]
    noise: usize,
    /// Class-mean separation in standard deviations.
    #[arg(long, default_value_t = 1.5)]
    effect: f64,
    #[arg(long)]
    seed: u64,
    /// Output feature-table CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// report.csv written by `sweep`.
    #[arg(long)]
    summary: PathBuf,
    /// ROC point files as name=path, repeatable.
    #[arg(long)]
    roc: Vec<String>,
    /// Directory receiving the re-rendered SVG plots.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<RankMethod, String> {
    RankMethod::parse(s).ok_or_else(|| format!("unknown method '{s}' (fscore, corr, mrmr)"))
}

fn parse_classifier(s: &str) -> std::result::Result<ClassifierKind, String> {
    ClassifierKind::parse(s).map_err(|e| e.to_string())
}

/// Output directories only: the RETINARANK_OUT variable wins over the flag.
fn resolve_out_dir(flag: PathBuf) -> Result<PathBuf> {
    let dir = std::env::var_os("RETINARANK_OUT").map_or(flag, PathBuf::from);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; only real usage
            // mistakes exit nonzero.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let config = DatasetConfig::load(&args.config)?;
    let table = ingest_dataset(&config)?;
    table.write_csv(&args.out)?;
    println!(
        "{}: {} samples x {} features -> {}",
        config.name,
        table.n(),
        table.feature_count(),
        args.out.display()
    );

    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &label in &table.labels {
        *counts.entry(label).or_insert(0) += 1;
    }
    let peak = counts.values().copied().max().unwrap_or(1);
    for (id, class) in config.classes.iter().enumerate() {
        let count = counts.get(&(id as u32)).copied().unwrap_or(0);
        let bar = "#".repeat((count * 40).div_ceil(peak));
        println!("  class {id} {:<24} {count:>7} {bar}", class.name);
    }
    Ok(())
}

fn cmd_rank(args: RankArgs) -> Result<()> {
    let out_dir = resolve_out_dir(args.out_dir)?;
    let table = FeatureTable::read_csv(&args.table)?;
    let plan = make_split(&table, args.seed)?;
    let classifier = ClassifierSpec::default_for(args.classifier);
    for method in args.method {
        let protocol = run_protocol(&table, &plan, method, &classifier, args.bins, args.seed)?;
        let path = out_dir.join(format!("ranking_{}.csv", method.as_str()));
        write_ranking(&path, &protocol.consensus, &table.feature_names)?;
        let mean_error = protocol.validation_errors.iter().sum::<f64>()
            / protocol.validation_errors.len() as f64;
        println!(
            "{}: wrote {}; mean fold validation error {mean_error:.4} ({})",
            method.as_str(),
            path.display(),
            args.classifier.as_str()
        );
        let preview: Vec<&str> = protocol.consensus.order[..protocol.consensus.order.len().min(10)]
            .iter()
            .map(|&f| table.feature_names[f].as_str())
            .collect();
        println!("  top features: {}", preview.join(", "));
    }
    Ok(())
}

/// 5, 10, 20, 40 capped at the feature count, always ending at the full set.
fn default_ks(l: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = [5usize, 10, 20, 40].iter().copied().filter(|&k| k < l).collect();
    ks.push(l);
    ks
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let out_dir = resolve_out_dir(args.out_dir)?;
    let table = FeatureTable::read_csv(&args.table)?;
    let ranking = read_ranking(&args.ranking)?;
    let method = ranking.method.as_str();
    let plan = make_split(&table, args.seed)?;
    let ks = args.ks.unwrap_or_else(|| default_ks(table.feature_count()));

    let binary = table.class_set().len() == 2;
    let mut reports: Vec<EvalReport> = Vec::new();
    let mut accuracy_series = Vec::new();
    let mut roc_series = Vec::new();
    for kind in args.classifier {
        let classifier = ClassifierSpec::default_for(kind);
        let swept = sweep_topk(&table, &plan, &ranking.order, &classifier, &ks, method, args.seed)?;
        accuracy_series.push(PlotSeries {
            name: kind.as_str().to_string(),
            points: swept.iter().map(|r| (r.k as f64, r.accuracy)).collect(),
        });
        if binary {
            // The richest curve: ROC at the largest feature count swept.
            let best = swept.iter().max_by_key(|r| r.k).expect("ks is non-empty");
            push_roc(&out_dir, kind.as_str(), best, &mut roc_series)?;
        }
        reports.extend(swept);

        if let (Some(positive), Some(negative)) = (args.roc_positive, args.roc_negative) {
            let report = evaluate_binary_subtask(
                &table, &plan, None, &classifier, positive, negative, method, args.seed,
            )?;
            let tag = format!("{}_{positive}v{negative}", kind.as_str());
            push_roc(&out_dir, &tag, &report, &mut roc_series)?;
            reports.push(report);
        }
    }

    let report_path = out_dir.join("report.csv");
    write_report_csv(&report_path, &reports)?;
    for report in &reports {
        println!("{}", report.summary_line());
    }
    println!("wrote {}", report_path.display());

    let accuracy_path = out_dir.join("accuracy_vs_k.svg");
    fs::write(&accuracy_path, accuracy_vs_k_svg(&accuracy_series))
        .map_err(|e| Error::io(&accuracy_path, e))?;
    println!("wrote {}", accuracy_path.display());
    if !roc_series.is_empty() {
        let roc_path = out_dir.join("roc.svg");
        fs::write(&roc_path, roc_svg(&roc_series)).map_err(|e| Error::io(&roc_path, e))?;
        println!("wrote {}", roc_path.display());
    }
    Ok(())
}

/// Writes roc_<tag>.csv and queues the curve for the combined SVG.
fn push_roc(
    out_dir: &Path,
    tag: &str,
    report: &EvalReport,
    series: &mut Vec<PlotSeries>,
) -> Result<()> {
    if report.roc_points.is_empty() {
        return Ok(());
    }
    let path = out_dir.join(format!("roc_{tag}.csv"));
    write_roc_points(&path, &report.roc_points)?;
    let name = match report.auc {
        Some(auc) => format!("{tag} (AUC {auc:.3})"),
        None => tag.to_string(),
    };
    series.push(PlotSeries {
        name,
        points: report.roc_points.clone(),
    });
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        classes: args.classes,
        samples: args.samples,
        informative: args.informative,
        noise: args.noise,
        effect: args.effect,
    };
    let table = generate(&spec, args.seed)?;
    table.write_csv(&args.out)?;
    println!(
        "wrote {} samples x {} features to {} (features 0..{} informative)",
        table.n(),
        table.feature_count(),
        args.out.display(),
        spec.informative
    );
    Ok(())
}

/// Minimal reader for the report.csv summary format.
fn read_summary(path: &Path) -> Result<Vec<(usize, String, String, f64)>> {
    let bad = |msg: String| Error::Data(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != EvalReport::SUMMARY_HEADER {
        return Err(bad(format!(
            "expected header '{}', got '{header}'",
            EvalReport::SUMMARY_HEADER
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let k: usize = record[0].parse().map_err(|_| bad("bad k".into()))?;
        let accuracy: f64 = record[3].parse().map_err(|_| bad("bad accuracy".into()))?;
        rows.push((k, record[1].to_string(), record[2].to_string(), accuracy));
    }
    if rows.is_empty() {
        return Err(bad("no report rows".into()));
    }
    Ok(rows)
}

fn read_roc_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let bad = |msg: String| Error::Data(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 2 {
            return Err(bad("expected fpr,tpr rows".into()));
        }
        let fpr: f64 = record[0].parse().map_err(|_| bad("bad fpr".into()))?;
        let tpr: f64 = record[1].parse().map_err(|_| bad("bad tpr".into()))?;
        points.push((fpr, tpr));
    }
    Ok(points)
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let out_dir = resolve_out_dir(args.out_dir)?;
    let rows = read_summary(&args.summary)?;

    // One accuracy curve per (method, classifier), points ordered by k.
    let mut grouped: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for (k, method, classifier, accuracy) in rows {
        grouped
            .entry((method, classifier))
            .or_default()
            .push((k as f64, accuracy));
    }
    let accuracy_series: Vec<PlotSeries> = grouped
        .into_iter()
        .map(|((method, classifier), mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            PlotSeries {
                name: format!("{method}/{classifier}"),
                points,
            }
        })
        .collect();
    let accuracy_path = out_dir.join("accuracy_vs_k.svg");
    fs::write(&accuracy_path, accuracy_vs_k_svg(&accuracy_series))
        .map_err(|e| Error::io(&accuracy_path, e))?;
    println!("wrote {}", accuracy_path.display());

    let mut roc_series = Vec::new();
    for spec in &args.roc {
        let (name, path) = spec.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("--roc wants name=path, got '{spec}'"))
        })?;
        roc_series.push(PlotSeries {
            name: name.to_string(),
            points: read_roc_points(Path::new(path))?,
        });
    }
    if !roc_series.is_empty() {
        let roc_path = out_dir.join("roc.svg");
        fs::write(&roc_path, roc_svg(&roc_series)).map_err(|e| Error::io(&roc_path, e))?;
        println!("wrote {}", roc_path.display());
    }
    Ok(())
}
