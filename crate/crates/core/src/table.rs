//! Sample-by-feature tables and their CSV form.
//!
//! CSV layout: header `id,label,<feature names...>`, one row per sample,
//! label `0`/`1`, or `?` when unknown.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::texture::FeatureVector;

pub const UNKNOWN_LABEL: &str = "?";

/// `n` samples by `d` named features, optionally labeled
/// (0 = control, 1 = osteoporotic).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    ids: Vec<String>,
    names: Vec<String>,
    values: Vec<f64>,
    labels: Option<Vec<u8>>,
}

impl FeatureTable {
    /// `values` is row-major, `ids.len() x names.len()`.
    pub fn new(
        ids: Vec<String>,
        names: Vec<String>,
        values: Vec<f64>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        let (n, d) = (ids.len(), names.len());
        if values.len() != n * d {
            return Err(Error::Table(format!(
                "{n} x {d} table needs {} values, got {}",
                n * d,
                values.len()
            )));
        }
        let mut seen = HashSet::with_capacity(d);
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Table(format!("duplicate feature name {name:?}")));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Table(format!(
                "non-finite value at row {}, feature {}",
                pos / d.max(1),
                names[pos % d.max(1)]
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::Table(format!(
                    "{} labels for {n} samples",
                    labels.len()
                )));
            }
            if labels.iter().any(|&l| l > 1) {
                return Err(Error::Table("labels must be 0 or 1".into()));
            }
        }
        Ok(FeatureTable {
            ids,
            names,
            values,
            labels,
        })
    }

    /// Builds a table from per-sample feature vectors sharing one name list.
    pub fn from_vectors(
        ids: Vec<String>,
        vectors: &[FeatureVector],
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        if ids.len() != vectors.len() {
            return Err(Error::Table(format!(
                "{} ids for {} vectors",
                ids.len(),
                vectors.len()
            )));
        }
        let names = vectors
            .first()
            .map(|v| v.names().to_vec())
            .unwrap_or_default();
        let mut values = Vec::with_capacity(names.len() * vectors.len());
        for (id, v) in ids.iter().zip(vectors) {
            if v.names() != names.as_slice() {
                return Err(Error::Table(format!(
                    "sample {id} has a different feature layout"
                )));
            }
            values.extend_from_slice(v.values());
        }
        FeatureTable::new(ids, names, values, labels)
    }

    pub fn n_samples(&self) -> usize {
        self.ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn require_labels(&self) -> Result<&[u8]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::Table("table has no labels".into()))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_samples()).map(move |i| self.row(i))
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_features() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn with_labels(mut self, labels: Option<Vec<u8>>) -> Result<Self> {
        let ids = std::mem::take(&mut self.ids);
        FeatureTable::new(ids, self.names, self.values, labels)
    }

    /// Rows in the given order.
    pub fn subset_rows(&self, rows: &[usize]) -> FeatureTable {
        let d = self.n_features();
        let mut values = Vec::with_capacity(rows.len() * d);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        FeatureTable {
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
            names: self.names.clone(),
            values,
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&r| l[r]).collect()),
        }
    }

    /// Columns in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<FeatureTable> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::Table(format!(
                "column {bad} out of range for {} features",
                self.n_features()
            )));
        }
        let mut values = Vec::with_capacity(self.n_samples() * cols.len());
        for row in self.rows() {
            values.extend(cols.iter().map(|&c| row[c]));
        }
        FeatureTable::new(
            self.ids.clone(),
            cols.iter().map(|&c| self.names[c].clone()).collect(),
            values,
            self.labels.clone(),
        )
    }

    /// Columns looked up by name.
    pub fn select_named(&self, names: &[String]) -> Result<FeatureTable> {
        let cols = names
            .iter()
            .map(|n| {
                self.feature_index(n)
                    .ok_or_else(|| Error::Table(format!("feature {n:?} not in table")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.select_columns(&cols)
    }

    pub fn with_prefix(mut self, prefix: &str) -> FeatureTable {
        for n in &mut self.names {
            n.insert_str(0, prefix);
        }
        self
    }

    /// Side-by-side concatenation of two tables over the same samples.
    pub fn hconcat(&self, other: &FeatureTable) -> Result<FeatureTable> {
        if self.n_samples() != other.n_samples() {
            return Err(Error::Table(format!(
                "row count mismatch: {} vs {}",
                self.n_samples(),
                other.n_samples()
            )));
        }
        if self.ids != other.ids {
            return Err(Error::Table("tables list different samples".into()));
        }
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Table("tables disagree on labels".into()))
            }
            (Some(a), _) => Some(a.clone()),
            (None, b) => b.clone(),
        };
        let mut values = Vec::with_capacity(self.values.len() + other.values.len());
        for i in 0..self.n_samples() {
            values.extend_from_slice(self.row(i));
            values.extend_from_slice(other.row(i));
        }
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        FeatureTable::new(self.ids.clone(), names, values, labels)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<FeatureTable> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || &header[0] != "id" || &header[1] != "label" {
            return Err(Error::Table(
                "header must start with `id,label`".into(),
            ));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut ids = Vec::new();
        let mut values = Vec::new();
        let mut labels: Vec<Option<u8>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            ids.push(rec[0].to_string());
            labels.push(match rec[1].trim() {
                UNKNOWN_LABEL => None,
                "0" => Some(0),
                "1" => Some(1),
                other => {
                    return Err(Error::Table(format!(
                        "row {}: bad label {other:?}",
                        line + 1
                    )))
                }
            });
            for (j, field) in rec.iter().skip(2).enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Table(format!(
                        "row {}: feature {} is not a number: {field:?}",
                        line + 1,
                        names[j]
                    ))
                })?;
                values.push(v);
            }
        }
        let labels = if labels.iter().all(Option::is_some) && !labels.is_empty() {
            Some(labels.into_iter().map(Option::unwrap).collect())
        } else if labels.iter().all(Option::is_none) {
            None
        } else {
            return Err(Error::Table(
                "table mixes known and unknown labels".into(),
            ));
        };
        FeatureTable::new(ids, names, values, labels)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend(self.names.iter().cloned());
        wtr.write_record(&header)?;
        for i in 0..self.n_samples() {
            let mut rec = Vec::with_capacity(self.n_features() + 2);
            rec.push(self.ids[i].clone());
            rec.push(match &self.labels {
                Some(l) => l[i].to_string(),
                None => UNKNOWN_LABEL.to_string(),
            });
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FeatureTable> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        FeatureTable::read_csv(std::io::BufReader::new(f))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}
