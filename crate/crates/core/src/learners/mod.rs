//! Classifier family: boosted decision trees, a bagged decision forest,
//! and a k-nearest-neighbor baseline, with shared train/predict/persistence
//! plumbing and cross-validated model selection.

mod bdt;
mod forest;
mod knn;
mod tree;


use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::FeatureTable;

pub use bdt::{BdtModel, BdtParams};
pub use forest::{DfModel, DfParams};
pub use knn::KnnModel;
pub use tree::{Tree, TreeNode};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierKind {
    Bdt,
    Df,
    Knn,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Bdt => "bdt",
            ClassifierKind::Df => "df",
            ClassifierKind::Knn => "knn",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "bdt" => Ok(ClassifierKind::Bdt),
            "df" => Ok(ClassifierKind::Df),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::InvalidArgument(format!(
                "unknown classifier '{other}', expected one of bdt, df, knn"
            ))),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// A classifier kind plus its hyperparameters, ready to train.
#[derive(Debug, Clone)]
pub enum ClassifierSpec {
    Bdt(BdtParams),
    Df(DfParams),
    Knn(KnnParams),
}

impl ClassifierSpec {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Bdt => ClassifierSpec::Bdt(BdtParams::default()),
            ClassifierKind::Df => ClassifierSpec::Df(DfParams::default()),
            ClassifierKind::Knn => ClassifierSpec::Knn(KnnParams::default()),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::Bdt(_) => ClassifierKind::Bdt,
            ClassifierSpec::Df(_) => ClassifierKind::Df,
            ClassifierSpec::Knn(_) => ClassifierKind::Knn,
        }
    }

    pub fn train(&self, table: &FeatureTable, seed: u64) -> Result<TrainedModel> {
        match self {
            ClassifierSpec::Bdt(params) => train_bdt(table, params, seed),
            ClassifierSpec::Df(params) => train_df(table, params, seed),
            ClassifierSpec::Knn(params) => train_knn(table, params.k),
        }
    }

    fn hyperparams(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        match self {
            ClassifierSpec::Bdt(p) => {
                map.insert("rounds".into(), p.rounds as f64);
                map.insert("max_depth".into(), p.max_depth as f64);
                map.insert("learning_rate".into(), p.learning_rate);
                map.insert("min_leaf".into(), p.min_leaf as f64);
                map.insert("balance_classes".into(), f64::from(p.balance_classes));
            }
            ClassifierSpec::Df(p) => {
                map.insert("trees".into(), p.trees as f64);
                map.insert("min_leaf".into(), p.min_leaf as f64);
                if let Some(mtry) = p.mtry {
                    map.insert("mtry".into(), mtry as f64);
                }
                map.insert("balance_classes".into(), f64::from(p.balance_classes));
            }
            ClassifierSpec::Knn(p) => {
                map.insert("k".into(), p.k as f64);
            }
        }
        map
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ModelState {
    Bdt(BdtModel),
    Df(DfModel),
    Knn(KnnModel),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub hyperparams: BTreeMap<String, f64>,
    /// Original class labels in ascending order; score columns align to this.
    pub class_ids: Vec<u32>,
    pub feature_count: usize,
    pub train_seed: u64,
    pub state: ModelState,
}

/// Spreads a base seed into per-stream seeds (one per tree) so draws are
/// keyed to sample identity, not row position.
pub fn stream_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// First index holding the maximum value; ties go to the lower index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Training data in a row-order-independent form: rows sorted by sample id,
/// labels mapped to dense class indices.
struct CanonicalData {
    values: Array2<f64>,
    dense: Vec<usize>,
    class_ids: Vec<u32>,
}

fn canonicalize(table: &FeatureTable) -> Result<CanonicalData> {
    table.validate()?;
    let class_ids: Vec<u32> = table.class_set().into_iter().collect();
    let mut order: Vec<usize> = (0..table.n()).collect();
    order.sort_by(|&a, &b| {
        table.sample_ids[a]
            .cmp(&table.sample_ids[b])
            .then(a.cmp(&b))
    });
    let l = table.feature_names.len();
    let mut values = Array2::zeros((order.len(), l));
    let mut dense = Vec::with_capacity(order.len());
    for (out, &src) in order.iter().enumerate() {
        values.row_mut(out).assign(&table.values.row(src));
        let label = table.labels[src];
        let idx = class_ids
            .binary_search(&label)
            .expect("label present in class set");
        dense.push(idx);
    }
    Ok(CanonicalData {
        values,
        dense,
        class_ids,
    })
}

fn require_multiclass(class_ids: &[u32], kind: ClassifierKind) -> Result<()> {
    if class_ids.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{kind} training requires at least 2 classes, found {}",
            class_ids.len()
        )));
    }
    Ok(())
}

pub fn train_bdt(table: &FeatureTable, params: &BdtParams, seed: u64) -> Result<TrainedModel> {
    let data = canonicalize(table)?;
    require_multiclass(&data.class_ids, ClassifierKind::Bdt)?;
    let model = bdt::fit_bdt(&data.values, &data.dense, data.class_ids.len(), params);
    Ok(TrainedModel {
        kind: ClassifierKind::Bdt,
        hyperparams: ClassifierSpec::Bdt(params.clone()).hyperparams(),
        class_ids: data.class_ids,
        feature_count: table.feature_names.len(),
        train_seed: seed,
        state: ModelState::Bdt(model),
    })
}

pub fn train_df(table: &FeatureTable, params: &DfParams, seed: u64) -> Result<TrainedModel> {
    let data = canonicalize(table)?;
    require_multiclass(&data.class_ids, ClassifierKind::Df)?;
    let model = forest::fit_forest(&data.values, &data.dense, data.class_ids.len(), params, seed);
    Ok(TrainedModel {
        kind: ClassifierKind::Df,
        hyperparams: ClassifierSpec::Df(params.clone()).hyperparams(),
        class_ids: data.class_ids,
        feature_count: table.feature_names.len(),
        train_seed: seed,
        state: ModelState::Df(model),
    })
}

pub fn train_knn(table: &FeatureTable, k: usize) -> Result<TrainedModel> {
    let data = canonicalize(table)?;
    if k == 0 || k > data.dense.len() {
        return Err(Error::InvalidArgument(format!(
            "knn requires 1 <= k <= n, got k={k} with n={}",
            data.dense.len()
        )));
    }
    let model = knn::fit_knn(&data.values, &data.dense, k);
    Ok(TrainedModel {
        kind: ClassifierKind::Knn,
        hyperparams: ClassifierSpec::Knn(KnnParams { k }).hyperparams(),
        class_ids: data.class_ids,
        feature_count: table.feature_names.len(),
        train_seed: 0,
        state: ModelState::Knn(model),
    })
}

impl TrainedModel {
    /// Predicted labels and per-class scores for a query matrix. Labels are
    /// always the class id of the row's argmax score column.
    pub fn predict(&self, rows: &Array2<f64>) -> Result<(Vec<u32>, Array2<f64>)> {
        if rows.ncols() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                got: rows.ncols(),
            });
        }
        let c = self.class_ids.len();
        let mut scores = Array2::zeros((rows.nrows(), c));
        let mut labels = Vec::with_capacity(rows.nrows());
        for (i, row) in rows.rows().into_iter().enumerate() {
            let row = row.to_vec();
            let row_scores = match &self.state {
                ModelState::Bdt(model) => bdt::bdt_scores(model, &row, c),
                ModelState::Df(model) => forest::forest_scores(model, &row, c),
                ModelState::Knn(model) => knn::knn_scores(model, &row, c),
            };
            labels.push(self.class_ids[argmax(&row_scores)]);
            for (j, s) in row_scores.into_iter().enumerate() {
                scores[(i, j)] = s;
            }
        }
        Ok((labels, scores))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: TrainedModel,
}

pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let text = serde_json::to_string(&file)
        .map_err(|e| Error::Data(format!("model serialization failed: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::Data(format!("{}: invalid model file: {e}", path.display())))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Data(format!(
            "{}: unsupported model format version {}, expected {}",
            path.display(),
            file.format_version,
            MODEL_FORMAT_VERSION
        )));
    }
    Ok(file.model)
}

/// Trains every candidate on each (train, validation) index fold and returns
/// the kind with the lowest mean validation misclassification rate. Ties keep
/// the earliest candidate.
pub fn select_classifier(
    candidates: &[ClassifierSpec],
    train: &FeatureTable,
    folds: &[(Vec<usize>, Vec<usize>)],
    seed: u64,
) -> Result<ClassifierKind> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "classifier selection requires at least one candidate".into(),
        ));
    }
    if folds.is_empty() {
        return Err(Error::InvalidArgument(
            "classifier selection requires at least one fold".into(),
        ));
    }
    let mut best: Option<(f64, ClassifierKind)> = None;
    for spec in candidates {
        let mut error_sum = 0.0;
        for (fit_rows, val_rows) in folds {
            let fit = train.subset_rows(fit_rows);
            let val = train.subset_rows(val_rows);
            let model = spec.train(&fit, seed)?;
            let (labels, _) = model.predict(&val.values)?;
            let wrong = labels
                .iter()
                .zip(&val.labels)
                .filter(|(a, b)| a != b)
                .count();
            error_sum += wrong as f64 / val.labels.len().max(1) as f64;
        }
        let mean_error = error_sum / folds.len() as f64;
        log::debug!(
            "candidate {} mean validation error {:.6}",
            spec.kind(),
            mean_error
        );
        if best.is_none_or(|(e, _)| mean_error < e) {
            best = Some((mean_error, spec.kind()));
        }
    }
    Ok(best.expect("non-empty candidates").1)
}
