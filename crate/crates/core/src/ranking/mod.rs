//! Feature ranking: F-score, correlation aggregation and mRMR, plus
//! cross-fold rank averaging.

pub mod mrmr;

use std::path::Path;

use log::warn;
use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::table::FeatureTable;

pub use mrmr::mrmr_rank;

/// Score given to features whose F-score denominator vanishes; large enough
/// to rank first, finite so downstream consumers stay NaN-free.
pub const FSCORE_SENTINEL: f64 = 1e300;

pub const DEFAULT_MRMR_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMethod {
    FScore,
    Corr,
    Mrmr,
}

impl RankMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RankMethod::FScore => "fscore",
            RankMethod::Corr => "corr",
            RankMethod::Mrmr => "mrmr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fscore" => Some(RankMethod::FScore),
            "corr" => Some(RankMethod::Corr),
            "mrmr" => Some(RankMethod::Mrmr),
            _ => None,
        }
    }

    pub const ALL: [RankMethod; 3] = [RankMethod::FScore, RankMethod::Corr, RankMethod::Mrmr];
}

#[derive(Debug, Clone)]
pub struct RankingResult {
    pub method: RankMethod,
    /// Permutation of 0..L-1, best feature first.
    pub order: Vec<usize>,
    /// Aligned to feature index. For FSCORE and CORR, `order` sorts these
    /// descending; for averaged results they are mean 1-based positions.
    pub scores: Vec<f64>,
    pub fold_id: Option<usize>,
}

impl RankingResult {
    pub fn feature_count(&self) -> usize {
        self.order.len()
    }

    /// 1-based position of each feature in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0usize; self.order.len()];
        for (rank, &f) in self.order.iter().enumerate() {
            pos[f] = rank + 1;
        }
        pos
    }
}

/// Indices sorted by score descending, ties by ascending index.
fn descending_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("ranking scores are finite")
            .then(a.cmp(&b))
    });
    idx
}

fn class_index_sets(labels: &[u32]) -> Vec<(u32, Vec<usize>)> {
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    classes
        .into_iter()
        .map(|c| {
            let rows = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == c)
                .map(|(i, _)| i)
                .collect();
            (c, rows)
        })
        .collect()
}

fn column_mean(col: &ArrayView1<'_, f64>, rows: &[usize]) -> f64 {
    rows.iter().map(|&i| col[i]).sum::<f64>() / rows.len() as f64
}

/// Ratio of between-class mean spread to summed within-class scatter:
///
/// F = sum_j (mean_j - mean)^2  /  sum_j [1/(n_j - 1)] sum_k (v - mean_j)^2
pub fn fscore_rank(table: &FeatureTable) -> Result<RankingResult> {
    let classes = class_index_sets(&table.labels);
    if classes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "F-score needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    if let Some((c, rows)) = classes.iter().find(|(_, rows)| rows.len() < 2) {
        return Err(Error::InvalidArgument(format!(
            "F-score needs at least 2 samples per class; class {c} has {}",
            rows.len()
        )));
    }

    let l = table.values.ncols();
    let all_rows: Vec<usize> = (0..table.n()).collect();
    let mut scores = Vec::with_capacity(l);
    let mut degenerate = Vec::new();
    for j in 0..l {
        let col = table.column(j);
        let overall = column_mean(&col, &all_rows);
        let mut numerator = 0.0;
        let mut denominator = 0.0;
        for (_, rows) in &classes {
            let mean_j = column_mean(&col, rows);
            numerator += (mean_j - overall) * (mean_j - overall);
            let scatter: f64 = rows.iter().map(|&i| (col[i] - mean_j).powi(2)).sum();
            denominator += scatter / (rows.len() - 1) as f64;
        }
        if denominator == 0.0 {
            degenerate.push(j);
            scores.push(FSCORE_SENTINEL);
        } else {
            scores.push(numerator / denominator);
        }
    }
    if !degenerate.is_empty() {
        warn!(
            "F-score denominator vanished for feature(s) {degenerate:?}; \
             assigned sentinel score"
        );
    }
    Ok(RankingResult {
        method: RankMethod::FScore,
        order: descending_order(&scores),
        scores,
        fold_id: None,
    })
}

/// How the pairwise coefficients collapse to one score per feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrAggregation {
    MeanAbs,
    MaxAbs,
}

/// Population Pearson correlation of two columns; 0 when either side is
/// constant.
pub fn pearson(a: &ArrayView1<'_, f64>, b: &ArrayView1<'_, f64>) -> f64 {
    let n = a.len() as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    (cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0)
}

pub fn correlation_rank(table: &FeatureTable) -> RankingResult {
    correlation_rank_with(table, CorrAggregation::MeanAbs)
}

/// Features scored by how strongly they correlate with the remaining
/// features (mean or max of |rho|), highest first.
pub fn correlation_rank_with(table: &FeatureTable, agg: CorrAggregation) -> RankingResult {
    let l = table.values.ncols();
    let mut rho = vec![0.0; l * l];
    let mut constant = Vec::new();
    for i in 0..l {
        let col_i = table.column(i);
        if col_i.iter().all(|&v| v == col_i[0]) {
            constant.push(i);
        }
        for j in i + 1..l {
            let r = pearson(&col_i, &table.column(j));
            rho[i * l + j] = r;
            rho[j * l + i] = r;
        }
    }
    if !constant.is_empty() {
        warn!("constant feature(s) {constant:?} score 0 under correlation ranking");
    }

    let scores: Vec<f64> = (0..l)
        .map(|i| {
            if l == 1 {
                return 0.0;
            }
            let others = (0..l).filter(|&j| j != i).map(|j| rho[i * l + j].abs());
            match agg {
                CorrAggregation::MeanAbs => others.sum::<f64>() / (l - 1) as f64,
                CorrAggregation::MaxAbs => others.fold(0.0, f64::max),
            }
        })
        .collect();
    RankingResult {
        method: RankMethod::Corr,
        order: descending_order(&scores),
        scores,
        fold_id: None,
    }
}

/// Runs the named ranking method; `bins` only applies to mRMR.
pub fn rank(table: &FeatureTable, method: RankMethod, bins: usize) -> Result<RankingResult> {
    match method {
        RankMethod::FScore => fscore_rank(table),
        RankMethod::Corr => Ok(correlation_rank(table)),
        RankMethod::Mrmr => mrmr::mrmr_rank(table, bins),
    }
}

/// Consensus ranking: mean 1-based position per feature across folds,
/// sorted ascending, ties by ascending feature index.
pub fn average_ranks(per_fold: &[RankingResult]) -> Result<RankingResult> {
    let Some(first) = per_fold.first() else {
        return Err(Error::InvalidArgument(
            "average_ranks needs at least one fold".into(),
        ));
    };
    let l = first.feature_count();
    for r in per_fold {
        if r.feature_count() != l {
            return Err(Error::InvalidArgument(format!(
                "fold rankings disagree on feature count: {} vs {l}",
                r.feature_count()
            )));
        }
        if r.method != first.method {
            return Err(Error::InvalidArgument(
                "fold rankings mix ranking methods".into(),
            ));
        }
    }

    let mut mean_pos = vec![0.0; l];
    for r in per_fold {
        for (f, pos) in r.positions().into_iter().enumerate() {
            mean_pos[f] += pos as f64;
        }
    }
    for p in &mut mean_pos {
        *p /= per_fold.len() as f64;
    }
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        mean_pos[a]
            .partial_cmp(&mean_pos[b])
            .expect("mean positions are finite")
            .then(a.cmp(&b))
    });
    Ok(RankingResult {
        method: first.method,
        order,
        scores: mean_pos,
        fold_id: None,
    })
}

/// Writes `rank,feature_index,feature_name,score,method` rows, best first.
pub fn write_ranking(path: &Path, result: &RankingResult, names: &[String]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    writer
        .write_record(["rank", "feature_index", "feature_name", "score", "method"])
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    for (rank, &f) in result.order.iter().enumerate() {
        let name = names.get(f).map(String::as_str).unwrap_or("");
        writer
            .write_record([
                (rank + 1).to_string(),
                f.to_string(),
                name.to_string(),
                format!("{:.16e}", result.scores[f]),
                result.method.as_str().to_string(),
            ])
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads a ranking file back; scores are realigned by feature index.
pub fn read_ranking(path: &Path) -> Result<RankingResult> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let bad = |msg: String| Error::Data(format!("{}: {msg}", path.display()));
    let mut rows: Vec<(usize, usize, f64, RankMethod)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 5 {
            return Err(bad(format!("expected 5 fields, got {}", record.len())));
        }
        let rank: usize = record[0].parse().map_err(|_| bad("bad rank".into()))?;
        let feature: usize = record[1]
            .parse()
            .map_err(|_| bad("bad feature index".into()))?;
        let score: f64 = record[3].parse().map_err(|_| bad("bad score".into()))?;
        let method = RankMethod::parse(&record[4])
            .ok_or_else(|| bad(format!("unknown method '{}'", &record[4])))?;
        rows.push((rank, feature, score, method));
    }
    if rows.is_empty() {
        return Err(bad("empty ranking".into()));
    }
    let method = rows[0].3;
    if rows.iter().any(|r| r.3 != method) {
        return Err(bad("mixed methods in one ranking".into()));
    }
    rows.sort_by_key(|r| r.0);
    let l = rows.len();
    let mut order = Vec::with_capacity(l);
    let mut scores = vec![0.0; l];
    for (expect, (rank, feature, score, _)) in rows.into_iter().enumerate() {
        if rank != expect + 1 {
            return Err(bad(format!("rank column must be 1..{l} in order")));
        }
        if feature >= l {
            return Err(bad(format!("feature index {feature} out of range")));
        }
        order.push(feature);
        scores[feature] = score;
    }
    let mut seen = vec![false; l];
    for &f in &order {
        if seen[f] {
            return Err(bad(format!("feature {f} listed twice")));
        }
        seen[f] = true;
    }
    Ok(RankingResult {
        method,
        order,
        scores,
        fold_id: None,
    })
}
