//! Tabular dataset ingestion and min-max scaling.
//!
//! A [`Dataset`] keeps the original feature values next to their min-max
//! scaled copy. The scaled view is what the evolutionary search and the
//! fitness functions see; the original view is only shown to users.

use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed CSV at line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        line: u64,
        column: usize,
        value: String,
    },
    #[error("line {line}, column {column}: missing value")]
    Missing { line: u64, column: usize },
    #[error("dataset needs at least 2 rows, found {0}")]
    TooFewRows(usize),
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("label column {0} not found")]
    LabelColumnNotFound(String),
    #[error("duplicate feature name {0:?}")]
    DuplicateFeature(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("cannot subsample {requested} rows from {available}")]
    Subsample { requested: usize, available: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

impl LabelColumn {
    /// Parses a CLI/API style reference: `last`, a 0-based index, or a header name.
    pub fn parse(text: &str) -> Self {
        if text.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = text.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(text.to_string())
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub name: String,
    pub has_header: bool,
    pub label_column: LabelColumn,
}

impl CsvOptions {
    pub fn new(name: impl Into<String>, label_column: LabelColumn) -> Self {
        Self {
            name: name.into(),
            has_header: true,
            label_column,
        }
    }

    pub fn headerless(mut self) -> Self {
        self.has_header = false;
        self
    }
}

/// Dataset metadata that is safe to share: no feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub n_instances: usize,
}

/// Immutable labelled dataset with original and scaled views.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    feature_names: Vec<String>,
    rows: Matrix,
    labels: Vec<String>,
    scaled: Matrix,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        rows: Matrix,
        labels: Vec<String>,
    ) -> Result<Self, DataError> {
        if rows.cols() == 0 {
            return Err(DataError::NoFeatures);
        }
        if rows.rows() < 2 {
            return Err(DataError::TooFewRows(rows.rows()));
        }
        if feature_names.len() != rows.cols() {
            return Err(DataError::Shape(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                rows.cols()
            )));
        }
        if labels.len() != rows.rows() {
            return Err(DataError::Shape(format!(
                "{} labels for {} rows",
                labels.len(),
                rows.rows()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateFeature(name.clone()));
            }
        }
        let scaled = scale_minmax(&rows);
        Ok(Self {
            name: name.into(),
            feature_names,
            rows,
            labels,
            scaled,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn scaled(&self) -> &Matrix {
        &self.scaled
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_instances(&self) -> usize {
        self.rows.rows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.cols()
    }

    /// Distinct labels in sorted order.
    pub fn class_names(&self) -> Vec<String> {
        self.labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names(),
            n_instances: self.n_instances(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Stratified random subsample of `count` rows; class proportions are
    /// kept up to rounding. Rows keep their original relative order.
    pub fn stratified_subsample(&self, count: usize, seed: u64) -> Result<Self, DataError> {
        let n = self.n_instances();
        if count < 2 || count > n {
            return Err(DataError::Subsample {
                requested: count,
                available: n,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes = self.class_names();
        let mut pools: Vec<Vec<usize>> = classes
            .iter()
            .map(|c| (0..n).filter(|&i| &self.labels[i] == c).collect())
            .collect();
        for pool in &mut pools {
            pool.shuffle(&mut rng);
        }
        // largest-remainder allocation of the quota per class
        let exact: Vec<f64> = pools
            .iter()
            .map(|p| p.len() as f64 * count as f64 / n as f64)
            .collect();
        let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
        let mut order: Vec<usize> = (0..pools.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut remaining = count - quota.iter().sum::<usize>();
        for &c in order.iter().cycle() {
            if remaining == 0 {
                break;
            }
            if quota[c] < pools[c].len() {
                quota[c] += 1;
                remaining -= 1;
            }
        }
        let mut picked: Vec<usize> = pools
            .iter()
            .zip(&quota)
            .flat_map(|(p, &q)| p[..q].iter().copied())
            .collect();
        picked.sort_unstable();
        let rows = self.rows.select_rows(&picked);
        let labels = picked.iter().map(|&i| self.labels[i].clone()).collect();
        Dataset::new(self.name.clone(), self.feature_names.clone(), rows, labels)
    }

    /// Writes the dataset as CSV with a header row and the label last.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.feature_names.clone();
        header.push("label".to_string());
        w.write_record(&header).map_err(csv_err)?;
        for (row, label) in self.rows.iter_rows().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.clone());
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    DataError::Malformed {
        line,
        message: e.to_string(),
    }
}

/// Feature names `f0 .. f{count-1}` for data without a header.
pub fn assign_feature_names(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("f{i}")).collect()
}

/// Per-column min-max scaling to `[0, 1]`; constant columns become zeros.
pub fn scale_minmax(rows: &Matrix) -> Matrix {
    let (n, m) = (rows.rows(), rows.cols());
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for row in rows.iter_rows() {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let mut out = Matrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let range = hi[j] - lo[j];
            if range > 0.0 {
                let v = (rows.get(i, j) - lo[j]) / range;
                out.set(i, j, v.clamp(0.0, 1.0));
            }
        }
    }
    out
}

/// Reads a labelled dataset from CSV.
pub fn load_csv<R: Read>(source: R, options: &CsvOptions) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header: Option<Vec<String>> = if options.has_header {
        Some(
            reader
                .headers()
                .map_err(csv_err)?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        records.push((line, record));
    }

    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| records.first().map(|(_, r)| r.len()))
        .unwrap_or(0);

    let label_idx = match &options.label_column {
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => return Err(DataError::LabelColumnNotFound(i.to_string())),
        LabelColumn::Last if width > 0 => width - 1,
        LabelColumn::Last => return Err(DataError::LabelColumnNotFound("last".into())),
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| DataError::LabelColumnNotFound(name.clone()))?,
    };
    if width < 2 {
        return Err(DataError::NoFeatures);
    }
    if records.len() < 2 {
        return Err(DataError::TooFewRows(records.len()));
    }

    let feature_names = match &header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, s)| s.clone())
            .collect(),
        None => assign_feature_names(width - 1),
    };

    let mut data = Vec::with_capacity(records.len() * (width - 1));
    let mut labels = Vec::with_capacity(records.len());
    for (line, record) in &records {
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                if cell.is_empty() {
                    return Err(DataError::Missing {
                        line: *line,
                        column: j,
                    });
                }
                labels.push(cell.to_string());
                continue;
            }
            if cell.is_empty() {
                return Err(DataError::Missing {
                    line: *line,
                    column: j,
                });
            }
            let v: f64 = cell.parse().map_err(|_| DataError::NonNumeric {
                line: *line,
                column: j,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonNumeric {
                    line: *line,
                    column: j,
                    value: cell.to_string(),
                });
            }
            data.push(v);
        }
    }
    let rows = Matrix::from_flat(records.len(), width - 1, data);
    Dataset::new(options.name.clone(), feature_names, rows, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(label: LabelColumn) -> CsvOptions {
        CsvOptions::new("t", label)
    }

    #[test]
    fn feature_names_are_generated() {
        assert_eq!(assign_feature_names(1), vec!["f0"]);
        assert_eq!(assign_feature_names(3), vec!["f0", "f1", "f2"]);
        let many = assign_feature_names(1024);
        assert_eq!(many.len(), 1024);
        assert_eq!(many[0], "f0");
        assert_eq!(many[1023], "f1023");
    }

    #[test]
    fn scale_examples() {
        let m = Matrix::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let s = scale_minmax(&m);
        assert_eq!(s.column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(s.column(1), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_column_without_label_is_rejected() {
        let err = load_csv("h\n1\n2\n".as_bytes(), &opts(LabelColumn::Index(0))).unwrap_err();
        assert!(matches!(err, DataError::NoFeatures), "{err}");
    }

    #[test]
    fn headerless_last_label() {
        let src = "1,2,a\n3,4,b\n5,6,a\n";
        let ds = load_csv(src.as_bytes(), &opts(LabelColumn::Last).headerless()).unwrap();
        assert_eq!(ds.feature_names(), ["f0", "f1"]);
        assert_eq!(ds.labels(), ["a", "b", "a"]);
        assert_eq!(ds.rows().row(1), [3.0, 4.0]);
    }

    #[test]
    fn label_by_name_in_first_column() {
        let src = "class,x,y\npsoriasis,1,2\nother,3,4\n";
        let ds = load_csv(src.as_bytes(), &opts(LabelColumn::Name("class".into()))).unwrap();
        assert_eq!(ds.feature_names(), ["x", "y"]);
        assert_eq!(ds.class_names(), ["other", "psoriasis"]);
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let src = "x,y,c\n1,2,a\n3,oops,b\n";
        match load_csv(src.as_bytes(), &opts(LabelColumn::Last)).unwrap_err() {
            DataError::NonNumeric {
                line,
                column,
                value,
            } => {
                assert_eq!((line, column, value.as_str()), (3, 1, "oops"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_value_rejected() {
        let src = "x,y,c\n1,,a\n3,4,b\n";
        assert!(matches!(
            load_csv(src.as_bytes(), &opts(LabelColumn::Last)).unwrap_err(),
            DataError::Missing { column: 1, .. }
        ));
    }

    #[test]
    fn ragged_row_is_malformed() {
        let src = "x,y,c\n1,2,a\n3,b\n";
        assert!(matches!(
            load_csv(src.as_bytes(), &opts(LabelColumn::Last)).unwrap_err(),
            DataError::Malformed { .. }
        ));
    }

    #[test]
    fn empty_and_single_row_rejected() {
        assert!(matches!(
            load_csv("x,c\n".as_bytes(), &opts(LabelColumn::Last)).unwrap_err(),
            DataError::TooFewRows(0)
        ));
        assert!(matches!(
            load_csv("x,c\n1,a\n".as_bytes(), &opts(LabelColumn::Last)).unwrap_err(),
            DataError::TooFewRows(1)
        ));
    }

    #[test]
    fn duplicate_feature_names_rejected() {
        let src = "x,x,c\n1,2,a\n3,4,b\n";
        assert!(matches!(
            load_csv(src.as_bytes(), &opts(LabelColumn::Last)).unwrap_err(),
            DataError::DuplicateFeature(_)
        ));
    }

    #[test]
    fn unknown_label_column() {
        let src = "x,y\n1,2\n3,4\n";
        assert!(matches!(
            load_csv(src.as_bytes(), &opts(LabelColumn::Name("class".into()))).unwrap_err(),
            DataError::LabelColumnNotFound(_)
        ));
        assert!(matches!(
            load_csv(src.as_bytes(), &opts(LabelColumn::Index(7))).unwrap_err(),
            DataError::LabelColumnNotFound(_)
        ));
    }

    #[test]
    fn label_column_parse() {
        assert_eq!(LabelColumn::parse("last"), LabelColumn::Last);
        assert_eq!(LabelColumn::parse("0"), LabelColumn::Index(0));
        assert_eq!(LabelColumn::parse("class"), LabelColumn::Name("class".into()));
    }

    #[test]
    fn stratified_subsample_keeps_proportions() {
        let n = 100;
        let rows = Matrix::from_flat(n, 1, (0..n).map(|i| i as f64).collect());
        let labels = (0..n)
            .map(|i| if i < 75 { "a".to_string() } else { "b".to_string() })
            .collect();
        let ds = Dataset::new("t", vec!["x".into()], rows, labels).unwrap();
        let sub = ds.stratified_subsample(20, 3).unwrap();
        assert_eq!(sub.n_instances(), 20);
        assert_eq!(sub.labels().iter().filter(|l| *l == "a").count(), 15);
        assert_eq!(sub, ds.stratified_subsample(20, 3).unwrap());
        assert!(ds.stratified_subsample(101, 0).is_err());
    }
}
