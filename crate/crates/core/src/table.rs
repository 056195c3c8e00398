//! The n-by-L sample matrix exchanged between extraction, ranking and
//! learning, plus its CSV interchange format.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Read-only access to samples, row by row.
///
/// Ranking and training code is generic over this trait so tests can wrap a
/// table and record exactly which rows were touched.
pub trait SampleSource {
    fn len(&self) -> usize;
    fn feature_count(&self) -> usize;
    fn feature_names(&self) -> &[String];
    /// Feature vector of sample `i`; the only way to reach feature values.
    fn row(&self, i: usize) -> Vec<f64>;
    fn label(&self, i: usize) -> u32;
    fn sample_id(&self, i: usize) -> &str;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn labels(&self) -> Vec<u32> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

/// Copies the given rows of a source into a dense table.
///
/// Protocol code gathers each phase's row set exactly once and then works
/// on the dense copy, so a logging wrapper sees one access per (phase, row).
pub fn gather<S: SampleSource + ?Sized>(source: &S, rows: &[usize]) -> FeatureTable {
    let l = source.feature_count();
    let mut values = Array2::zeros((rows.len(), l));
    let mut labels = Vec::with_capacity(rows.len());
    let mut sample_ids = Vec::with_capacity(rows.len());
    for (out, &i) in rows.iter().enumerate() {
        let row = source.row(i);
        assert_eq!(row.len(), l, "source row length mismatch");
        for (j, v) in row.into_iter().enumerate() {
            values[(out, j)] = v;
        }
        labels.push(source.label(i));
        sample_ids.push(source.sample_id(i).to_string());
    }
    FeatureTable {
        values,
        feature_names: source.feature_names().to_vec(),
        labels,
        sample_ids,
        image_ids: vec![String::new(); rows.len()],
        dataset_tag: String::new(),
    }
}

#[derive(Debug, Clone)]
pub struct FeatureTable {
    /// n x L, no NaN or infinite entries.
    pub values: Array2<f64>,
    pub feature_names: Vec<String>,
    pub labels: Vec<u32>,
    pub sample_ids: Vec<String>,
    pub image_ids: Vec<String>,
    pub dataset_tag: String,
}

impl SampleSource for FeatureTable {
    fn len(&self) -> usize {
        self.values.nrows()
    }

    fn feature_count(&self) -> usize {
        self.values.ncols()
    }

    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).to_vec()
    }

    fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    fn sample_id(&self, i: usize) -> &str {
        &self.sample_ids[i]
    }
}

impl FeatureTable {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn class_set(&self) -> BTreeSet<u32> {
        self.labels.iter().copied().collect()
    }

    /// Checks the structural invariants: consistent lengths, finite values.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.labels.len() != n || self.sample_ids.len() != n || self.image_ids.len() != n {
            return Err(Error::Data(format!(
                "table metadata out of step: {n} rows, {} labels, {} sample ids, {} image ids",
                self.labels.len(),
                self.sample_ids.len(),
                self.image_ids.len()
            )));
        }
        if self.feature_names.len() != self.values.ncols() {
            return Err(Error::Data(format!(
                "{} feature names for {} columns",
                self.feature_names.len(),
                self.values.ncols()
            )));
        }
        if let Some(((i, j), v)) = self
            .values
            .indexed_iter()
            .find(|(_, v)| !v.is_finite())
        {
            return Err(Error::Data(format!(
                "non-finite value {v} at sample {i} ({}), feature {j} ({})",
                self.sample_ids[i], self.feature_names[j]
            )));
        }
        Ok(())
    }

    pub fn subset_rows(&self, rows: &[usize]) -> FeatureTable {
        let mut values = Array2::zeros((rows.len(), self.values.ncols()));
        for (out, &i) in rows.iter().enumerate() {
            values.row_mut(out).assign(&self.values.row(i));
        }
        FeatureTable {
            values,
            feature_names: self.feature_names.clone(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            sample_ids: rows.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            image_ids: rows.iter().map(|&i| self.image_ids[i].clone()).collect(),
            dataset_tag: self.dataset_tag.clone(),
        }
    }

    pub fn subset_columns(&self, columns: &[usize]) -> FeatureTable {
        let mut values = Array2::zeros((self.n(), columns.len()));
        for (out, &j) in columns.iter().enumerate() {
            values.column_mut(out).assign(&self.values.column(j));
        }
        FeatureTable {
            values,
            feature_names: columns
                .iter()
                .map(|&j| self.feature_names[j].clone())
                .collect(),
            labels: self.labels.clone(),
            sample_ids: self.sample_ids.clone(),
            image_ids: self.image_ids.clone(),
            dataset_tag: self.dataset_tag.clone(),
        }
    }

    /// Writes `sample_id,image_id,<features...>,label` with floats carrying
    /// 17 significant digits so values round-trip exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut header = Vec::with_capacity(self.feature_names.len() + 3);
        header.push("sample_id".to_string());
        header.push("image_id".to_string());
        header.extend(self.feature_names.iter().cloned());
        header.push("label".to_string());
        writer.write_record(&header).map_err(|e| csv_error(path, e))?;

        for i in 0..self.n() {
            let mut record = Vec::with_capacity(header.len());
            record.push(self.sample_ids[i].clone());
            record.push(self.image_ids[i].clone());
            for v in self.values.row(i) {
                record.push(format!("{v:.16e}"));
            }
            record.push(self.labels[i].to_string());
            writer.write_record(&record).map_err(|e| csv_error(path, e))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<FeatureTable> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        if header.len() < 4
            || header.get(0) != Some("sample_id")
            || header.get(1) != Some("image_id")
            || header.get(header.len() - 1) != Some("label")
        {
            return Err(Error::Data(format!(
                "{}: expected header sample_id,image_id,<features>,label",
                path.display()
            )));
        }
        let feature_names: Vec<String> = header
            .iter()
            .skip(2)
            .take(header.len() - 3)
            .map(str::to_string)
            .collect();
        let l = feature_names.len();

        let mut rows: Vec<f64> = Vec::new();
        let mut labels = Vec::new();
        let mut sample_ids = Vec::new();
        let mut image_ids = Vec::new();
        for (lineno, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            if record.len() != l + 3 {
                return Err(Error::Data(format!(
                    "{}: record {} has {} fields, expected {}",
                    path.display(),
                    lineno + 2,
                    record.len(),
                    l + 3
                )));
            }
            sample_ids.push(record[0].to_string());
            image_ids.push(record[1].to_string());
            for j in 0..l {
                let raw = &record[j + 2];
                let v: f64 = raw.parse().map_err(|_| {
                    Error::Data(format!(
                        "{}: record {}: bad real '{raw}'",
                        path.display(),
                        lineno + 2
                    ))
                })?;
                rows.push(v);
            }
            let raw = &record[l + 2];
            labels.push(raw.parse().map_err(|_| {
                Error::Data(format!(
                    "{}: record {}: bad label '{raw}'",
                    path.display(),
                    lineno + 2
                ))
            })?);
        }
        let n = labels.len();
        let values = Array2::from_shape_vec((n, l), rows).expect("row-major build");
        let table = FeatureTable {
            values,
            feature_names,
            labels,
            sample_ids,
            image_ids,
            dataset_tag: String::new(),
        };
        table.validate()?;
        Ok(table)
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample_table() -> FeatureTable {
        FeatureTable {
            values: array![
                [0.1, -1.5e-7, 3.0],
                [2.0_f64.sqrt(), 1.0 / 3.0, -0.0],
                [1e300, 5.0e-324, std::f64::consts::PI]
            ],
            feature_names: vec!["a".into(), "b".into(), "c".into()],
            labels: vec![0, 1, 1],
            sample_ids: vec!["s0".into(), "s1".into(), "s2".into()],
            image_ids: vec!["i0".into(), "i0".into(), "i1".into()],
            dataset_tag: "demo".into(),
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let table = sample_table();
        table.write_csv(&path).unwrap();
        let back = FeatureTable::read_csv(&path).unwrap();
        assert_eq!(back.feature_names, table.feature_names);
        assert_eq!(back.labels, table.labels);
        assert_eq!(back.sample_ids, table.sample_ids);
        assert_eq!(back.image_ids, table.image_ids);
        for (a, b) in back.values.iter().zip(table.values.iter()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a} != {b}");
        }
    }

    #[test]
    fn validate_flags_non_finite() {
        let mut table = sample_table();
        table.values[(1, 2)] = f64::NAN;
        assert!(table.validate().is_err());
    }

    #[test]
    fn subsets_keep_alignment() {
        let table = sample_table();
        let rows = table.subset_rows(&[2, 0]);
        assert_eq!(rows.sample_ids, vec!["s2", "s0"]);
        assert_eq!(rows.labels, vec![1, 0]);
        assert_eq!(rows.values[(0, 0)], 1e300);

        let cols = table.subset_columns(&[2, 1]);
        assert_eq!(cols.feature_names, vec!["c", "b"]);
        assert_eq!(cols.values[(0, 0)], 3.0);
        assert_eq!(cols.values[(0, 1)], -1.5e-7);
    }

    #[test]
    fn gather_matches_subset_rows() {
        let table = sample_table();
        let picked = gather(&table, &[1, 2]);
        assert_eq!(picked.sample_ids, vec!["s1", "s2"]);
        assert_eq!(picked.values.row(0), table.values.row(1));
        assert_eq!(picked.labels, vec![1, 1]);
    }

    #[test]
    fn malformed_csv_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "sample_id,image_id,a,label\ns0,i0,notanumber,1\n").unwrap();
        let err = FeatureTable::read_csv(&path).unwrap_err();
        assert!(err.is_data_error());
    }
}
