//! Evaluation harness: stratified splits, the 5-fold rank/validate
//! protocol with rank averaging, the top-k accuracy/time sweep, and report
//! output.

pub mod metrics;
pub mod split;
pub mod svg;


use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::learners::{stream_seed, ClassifierSpec};
use crate::ranking::{average_ranks, rank, RankMethod, RankingResult};
use crate::table::{gather, FeatureTable, SampleSource};

pub use metrics::{compute_metrics, roc_curve, EvalReport};
pub use split::{make_split, stratified_folds, SplitPlan, PROTOCOL_FOLDS, TRAIN_FRACTION};
pub use svg::{accuracy_vs_k_svg, roc_svg, PlotSeries};

/// Output of the 5-fold ranking protocol over the train side.
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    /// Rank-averaged consensus over the folds; scores are mean 1-based
    /// positions (lower is better).
    pub consensus: RankingResult,
    pub per_fold: Vec<RankingResult>,
    /// Misclassification rate of the fold classifier on the held-out
    /// validation fifth.
    pub validation_errors: Vec<f64>,
}

/// Per fold: ranks features on the 80% rank set, trains the classifier on
/// the same rows, and scores error on the 20% validation set. Test-side
/// rows are never touched.
pub fn run_protocol<S: SampleSource + ?Sized>(
    source: &S,
    plan: &SplitPlan,
    method: RankMethod,
    classifier: &ClassifierSpec,
    bins: usize,
    seed: u64,
) -> Result<ProtocolResult> {
    let mut per_fold = Vec::with_capacity(plan.folds.len());
    let mut validation_errors = Vec::with_capacity(plan.folds.len());
    for (fold, (rank_rows, val_rows)) in plan.folds.iter().enumerate() {
        let rank_table = gather(source, rank_rows);
        let val_table = gather(source, val_rows);
        let mut ranking = rank(&rank_table, method, bins)?;
        ranking.fold_id = Some(fold);

        let model = classifier.train(&rank_table, stream_seed(seed, fold as u64))?;
        let (pred, _) = model.predict(&val_table.values)?;
        let wrong = pred
            .iter()
            .zip(&val_table.labels)
            .filter(|(a, b)| a != b)
            .count();
        validation_errors.push(wrong as f64 / val_table.n() as f64);
        per_fold.push(ranking);
    }
    let consensus = average_ranks(&per_fold)?;
    Ok(ProtocolResult {
        consensus,
        per_fold,
        validation_errors,
    })
}

fn check_feature_order(order: &[usize], l: usize) -> Result<()> {
    if order.len() != l {
        return Err(Error::InvalidArgument(format!(
            "feature order lists {} features, table has {l}",
            order.len()
        )));
    }
    let mut seen = vec![false; l];
    for &f in order {
        if f >= l || seen[f] {
            return Err(Error::InvalidArgument(format!(
                "feature order is not a permutation of 0..{l}"
            )));
        }
        seen[f] = true;
    }
    Ok(())
}

/// Trains on the train table and evaluates on the test table, timing only
/// the train+predict span on the monotonic clock.
fn timed_eval(
    train: &FeatureTable,
    test: &FeatureTable,
    classifier: &ClassifierSpec,
    positive: Option<u32>,
    seed: u64,
) -> Result<EvalReport> {
    let started = Instant::now();
    let model = classifier.train(train, seed)?;
    let (pred, scores) = model.predict(&test.values)?;
    let wall_time_s = started.elapsed().as_secs_f64();
    let mut report = compute_metrics(&model.class_ids, &test.labels, &pred, &scores, positive)?;
    report.classifier = classifier.kind().as_str().to_string();
    report.wall_time_s = wall_time_s;
    Ok(report)
}

/// For each k: keeps the top-k ranked feature columns, trains on the 30%
/// train side, and evaluates on the 70% test side.
pub fn sweep_topk<S: SampleSource + ?Sized>(
    source: &S,
    plan: &SplitPlan,
    order: &[usize],
    classifier: &ClassifierSpec,
    ks: &[usize],
    method_tag: &str,
    seed: u64,
) -> Result<Vec<EvalReport>> {
    let l = source.feature_count();
    check_feature_order(order, l)?;
    for &k in ks {
        if k == 0 || k > l {
            return Err(Error::InvalidArgument(format!(
                "top-k sweep requires 1 <= k <= {l}, got {k}"
            )));
        }
    }
    let train = gather(source, &plan.train_rows);
    let test = gather(source, &plan.test_rows);
    let mut reports = Vec::with_capacity(ks.len());
    for &k in ks {
        let columns = &order[..k];
        let sub_train = train.subset_columns(columns);
        let sub_test = test.subset_columns(columns);
        let mut report = timed_eval(&sub_train, &sub_test, classifier, None, seed)?;
        report.k = k;
        report.method = method_tag.to_string();
        log::info!(
            "k={k} {method_tag} {} accuracy {:.4} wall {:.3}s",
            report.classifier,
            report.accuracy,
            report.wall_time_s
        );
        reports.push(report);
    }
    Ok(reports)
}

/// Binary sub-task evaluation: restricts both sides to rows of the two
/// classes, optionally keeps only `columns`, and reports with `positive`
/// as the positive class.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_binary_subtask<S: SampleSource + ?Sized>(
    source: &S,
    plan: &SplitPlan,
    columns: Option<&[usize]>,
    classifier: &ClassifierSpec,
    positive: u32,
    negative: u32,
    method_tag: &str,
    seed: u64,
) -> Result<EvalReport> {
    if positive == negative {
        return Err(Error::InvalidArgument(
            "binary sub-task needs two distinct classes".into(),
        ));
    }
    let keep = |rows: &[usize]| -> Vec<usize> {
        rows.iter()
            .copied()
            .filter(|&r| {
                let label = source.label(r);
                label == positive || label == negative
            })
            .collect()
    };
    let train_rows = keep(&plan.train_rows);
    let test_rows = keep(&plan.test_rows);
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::Data(format!(
            "no rows with classes {positive}/{negative} on both split sides"
        )));
    }
    let mut train = gather(source, &train_rows);
    let mut test = gather(source, &test_rows);
    if let Some(columns) = columns {
        train = train.subset_columns(columns);
        test = test.subset_columns(columns);
    }
    let mut report = timed_eval(&train, &test, classifier, Some(positive), seed)?;
    report.k = columns.map_or(source.feature_count(), <[usize]>::len);
    report.method = method_tag.to_string();
    Ok(report)
}

/// Writes the summary CSV, one line per report.
pub fn write_report_csv(path: &Path, reports: &[EvalReport]) -> Result<()> {
    let mut out = String::from(EvalReport::SUMMARY_HEADER);
    out.push('\n');
    for report in reports {
        out.push_str(&report.summary_line());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes ROC points as `fpr,tpr` rows.
pub fn write_roc_points(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::from("fpr,tpr\n");
    for &(fpr, tpr) in points {
        out.push_str(&format!("{fpr:.16e},{tpr:.16e}\n"));
    }
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
