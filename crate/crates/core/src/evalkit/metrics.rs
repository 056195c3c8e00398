//! Confusion-matrix metrics, threshold-sweep ROC curves, and trapezoid AUC.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Evaluation summary for one classification run. `sensitivity`,
/// `specificity`, and `auc` are None whenever undefined (multi-class report
/// or single-class truth) rather than being forced to 0.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub k: usize,
    pub method: String,
    pub classifier: String,
    /// Ascending class labels; confusion rows/columns and score columns
    /// align to this.
    pub class_ids: Vec<u32>,
    /// Rows indexed by true class, columns by predicted class.
    pub confusion: Array2<u64>,
    pub accuracy: f64,
    pub per_class_accuracy: Vec<Option<f64>>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub roc_points: Vec<(f64, f64)>,
    pub auc: Option<f64>,
    pub wall_time_s: f64,
}

fn opt_field(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

impl EvalReport {
    pub const SUMMARY_HEADER: &'static str =
        "k,method,classifier,accuracy,sen,spec,auc,wall_time_s";

    /// One CSV row matching [`Self::SUMMARY_HEADER`]; undefined metrics
    /// stay empty.
    pub fn summary_line(&self) -> String {
        format!(
            "{},{},{},{:.16e},{},{},{},{:.6}",
            self.k,
            self.method,
            self.classifier,
            self.accuracy,
            opt_field(self.sensitivity),
            opt_field(self.specificity),
            opt_field(self.auc),
            self.wall_time_s
        )
    }
}

/// ROC curve by sweeping all distinct score thresholds, highest first, plus
/// the trapezoid AUC. Tied scores move as one group, so ties contribute
/// half-area exactly like the rank-sum probability. None when either class
/// is absent.
pub fn roc_curve(positive: &[bool], scores: &[f64]) -> Option<(Vec<(f64, f64)>, f64)> {
    let pos_total = positive.iter().filter(|&&p| p).count() as f64;
    let neg_total = positive.len() as f64 - pos_total;
    if pos_total == 0.0 || neg_total == 0.0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("finite scores")
            .then(a.cmp(&b))
    });

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut area2 = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut group_tp, mut group_fp) = (0.0, 0.0);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if positive[order[j]] {
                group_tp += 1.0;
            } else {
                group_fp += 1.0;
            }
            j += 1;
        }
        area2 += group_fp * (tp + (tp + group_tp));
        tp += group_tp;
        fp += group_fp;
        points.push((fp / neg_total, tp / pos_total));
        i = j;
    }
    Some((points, area2 / (2.0 * pos_total * neg_total)))
}

/// Builds the evaluation report from aligned truth/prediction/score arrays.
/// Score columns align to `class_ids`. Binary metrics use `positive` as the
/// positive class when given, otherwise the higher class id.
pub fn compute_metrics(
    class_ids: &[u32],
    truth: &[u32],
    pred: &[u32],
    scores: &Array2<f64>,
    positive: Option<u32>,
) -> Result<EvalReport> {
    let n = truth.len();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "metrics require at least one sample".into(),
        ));
    }
    if pred.len() != n || scores.nrows() != n || scores.ncols() != class_ids.len() {
        return Err(Error::InvalidArgument(format!(
            "misaligned metric inputs: {n} truth, {} predictions, {}x{} scores for {} classes",
            pred.len(),
            scores.nrows(),
            scores.ncols(),
            class_ids.len()
        )));
    }

    let c = class_ids.len();
    let index_of = |label: u32| -> Result<usize> {
        class_ids
            .binary_search(&label)
            .map_err(|_| Error::InvalidArgument(format!("label {label} not in the class set")))
    };
    let mut confusion = Array2::<u64>::zeros((c, c));
    for (&t, &p) in truth.iter().zip(pred) {
        confusion[(index_of(t)?, index_of(p)?)] += 1;
    }

    let trace: u64 = (0..c).map(|i| confusion[(i, i)]).sum();
    let accuracy = trace as f64 / n as f64;
    let per_class_accuracy = (0..c)
        .map(|i| {
            let row_total: u64 = confusion.row(i).sum();
            (row_total > 0).then(|| confusion[(i, i)] as f64 / row_total as f64)
        })
        .collect();

    let mut sensitivity = None;
    let mut specificity = None;
    let mut roc_points = Vec::new();
    let mut auc = None;
    if c == 2 {
        let pos_label = positive.unwrap_or(class_ids[1]);
        let pos = index_of(pos_label)?;
        let neg = 1 - pos;
        let tp = confusion[(pos, pos)] as f64;
        let fnn = confusion[(pos, neg)] as f64;
        let tn = confusion[(neg, neg)] as f64;
        let fpp = confusion[(neg, pos)] as f64;
        if tp + fnn > 0.0 {
            sensitivity = Some(tp / (tp + fnn));
        }
        if tn + fpp > 0.0 {
            specificity = Some(tn / (tn + fpp));
        }
        let flags: Vec<bool> = truth.iter().map(|&t| t == pos_label).collect();
        let pos_scores: Vec<f64> = scores.column(pos).to_vec();
        if let Some((points, area)) = roc_curve(&flags, &pos_scores) {
            roc_points = points;
            auc = Some(area);
        }
    }

    Ok(EvalReport {
        k: 0,
        method: String::new(),
        classifier: String::new(),
        class_ids: class_ids.to_vec(),
        confusion,
        accuracy,
        per_class_accuracy,
        sensitivity,
        specificity,
        roc_points,
        auc,
        wall_time_s: 0.0,
    })
}
