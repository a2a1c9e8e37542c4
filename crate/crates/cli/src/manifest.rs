//! Label manifest: CSV `id,filename,label`, label one of `control`,
//! `osteoporosis` or `?`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub id: String,
    pub filename: PathBuf,
    pub label: Option<u8>,
}

pub fn parse_label(text: &str) -> Result<Option<u8>> {
    match text.trim() {
        "control" | "0" => Ok(Some(0)),
        "osteoporosis" | "1" => Ok(Some(1)),
        "?" => Ok(None),
        other => bail!("unknown label {other:?} (expected control, osteoporosis or ?)"),
    }
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .with_context(|| format!("{}: missing `{name}` column", path.display()))
}

pub fn read_manifest(path: &Path) -> Result<Vec<Entry>> {
    let mut rdr = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let (id_col, file_col, label_col) = (
        column(&headers, "id", path)?,
        column(&headers, "filename", path)?,
        column(&headers, "label", path)?,
    );
    let mut entries = Vec::new();
    let mut seen = HashMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            bail!("{}: row {} has an empty id", path.display(), line + 2);
        }
        if let Some(prev) = seen.insert(id.clone(), line + 2) {
            bail!("{}: id {id:?} repeats rows {prev} and {}", path.display(), line + 2);
        }
        let label = parse_label(rec.get(label_col).unwrap_or(""))
            .with_context(|| format!("{}: row {}", path.display(), line + 2))?;
        entries.push(Entry {
            id,
            filename: PathBuf::from(rec.get(file_col).unwrap_or("").trim()),
            label,
        });
    }
    Ok(entries)
}

/// `id -> label` from any CSV with `id` and `label` columns (a manifest
/// qualifies); labels must all be known.
pub fn read_truth(path: &Path) -> Result<HashMap<String, u8>> {
    let mut rdr = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read labels {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let (id_col, label_col) = (column(&headers, "id", path)?, column(&headers, "label", path)?);
    let mut out = HashMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        match parse_label(rec.get(label_col).unwrap_or(""))? {
            Some(l) => {
                out.insert(id, l);
            }
            None => bail!("{}: row {} has no label", path.display(), line + 2),
        }
    }
    Ok(out)
}

/// Table labels: all known, all unknown (`None`), or an error when mixed.
pub fn table_labels(entries: &[Entry]) -> Result<Option<Vec<u8>>> {
    let known = entries.iter().filter(|e| e.label.is_some()).count();
    if known == entries.len() && known > 0 {
        Ok(Some(entries.iter().map(|e| e.label.unwrap()).collect()))
    } else if known == 0 {
        Ok(None)
    } else {
        bail!(
            "manifest mixes labeled and unlabeled rows ({known} of {} labeled)",
            entries.len()
        )
    }
}
