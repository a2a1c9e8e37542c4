//! Feature tables for a run: loaded from CSV, or extracted from the images
//! listed in a manifest.

use std::path::Path;

use anyhow::{bail, Context, Result};
use osteotex::cnn::{load_network_spec, parse_network_spec, shipped, Network, WeightStore};
use osteotex::image::load_pgm;
use osteotex::texture::{extract_traditional, traditional_feature_names, FeatureVector};
use osteotex::FeatureTable;
use rayon::prelude::*;

use crate::config::{Approach, ExperimentConfig};
use crate::manifest::{read_manifest, table_labels};

#[derive(Debug, Default)]
pub struct Sources {
    pub trad: Option<FeatureTable>,
    pub deep: Option<FeatureTable>,
    /// Network spec name, when deep features are involved and known.
    pub network: Option<String>,
    /// Images that could not be processed; their rows are left out.
    pub failures: usize,
}

impl Sources {
    /// Human-readable feature type for reports.
    pub fn feature_type(&self, approach: Approach) -> String {
        let net = self.network.as_deref();
        match (approach, net) {
            (Approach::Traditional, _) => "traditional".into(),
            (Approach::Deep, Some(n)) => format!("deep ({n})"),
            (Approach::Deep, None) => "deep".into(),
            (Approach::Merged, Some(n)) => format!("merged ({n} + traditional)"),
            (Approach::Merged, None) => "merged (deep + traditional)".into(),
        }
    }

    pub fn trad(&self) -> Result<&FeatureTable> {
        self.trad.as_ref().context("no traditional features")
    }

    pub fn deep(&self) -> Result<&FeatureTable> {
        self.deep.as_ref().context("no deep features")
    }
}

pub fn load_network(cfg: &ExperimentConfig) -> Result<Network> {
    let spec_arg = cfg.net_spec.as_deref().context("no network spec given")?;
    let spec = match shipped::by_name(spec_arg) {
        Some(text) => parse_network_spec(text)?,
        None => load_network_spec(spec_arg)?,
    };
    let weights_path = cfg.weights.as_deref().context("no weights given")?;
    let weights = WeightStore::load(weights_path)
        .with_context(|| format!("loading weights {}", weights_path.display()))?;
    Ok(Network::new(spec, weights)?)
}

fn network_name(cfg: &ExperimentConfig) -> Option<String> {
    let s = cfg.net_spec.as_deref()?;
    if shipped::by_name(s).is_some() {
        return Some(s.to_string());
    }
    let text = std::fs::read_to_string(s).ok()?;
    parse_network_spec(&text).ok().map(|spec| spec.name)
}

/// Extracts the requested feature kinds for every manifest entry, in
/// manifest order. Images that fail are reported on stderr and skipped.
pub fn extract(cfg: &ExperimentConfig, want_trad: bool, want_deep: bool) -> Result<Sources> {
    let manifest = cfg.manifest.as_deref().context("no manifest given")?;
    let images = cfg.images.as_deref().context("no image directory given")?;
    let entries = read_manifest(manifest)?;
    let network = if want_deep {
        Some(load_network(cfg)?)
    } else {
        None
    };
    let texture = cfg.texture();

    if entries.is_empty() {
        eprintln!("warning: {} lists no images", manifest.display());
    }

    let rows: Vec<Result<(Option<FeatureVector>, Option<FeatureVector>)>> = entries
        .par_iter()
        .map(|e| {
            let path = images.join(&e.filename);
            let img = load_pgm(&path).with_context(|| format!("{}", path.display()))?;
            let trad = want_trad
                .then(|| extract_traditional(&img, &texture))
                .transpose()
                .with_context(|| format!("{}: texture features", path.display()))?;
            let deep = network
                .as_ref()
                .map(|n| n.extract(&img))
                .transpose()
                .with_context(|| format!("{}: deep features", path.display()))?;
            Ok((trad, deep))
        })
        .collect();

    let mut kept = Vec::new();
    let mut trad_vecs = Vec::new();
    let mut deep_vecs = Vec::new();
    let mut failures = 0;
    for (entry, row) in entries.iter().zip(rows) {
        match row {
            Ok((t, d)) => {
                kept.push(entry.clone());
                trad_vecs.extend(t);
                deep_vecs.extend(d);
            }
            Err(e) => {
                eprintln!("error: {}: {e:#}", entry.id);
                failures += 1;
            }
        }
    }
    let ids: Vec<String> = kept.iter().map(|e| e.id.clone()).collect();
    let labels = table_labels(&kept)?;
    let build = |vecs: &[FeatureVector], names: Vec<String>| -> Result<FeatureTable> {
        if vecs.is_empty() {
            Ok(FeatureTable::new(Vec::new(), names, Vec::new(), None)?)
        } else {
            Ok(FeatureTable::from_vectors(ids.clone(), vecs, labels.clone())?)
        }
    };
    Ok(Sources {
        trad: want_trad
            .then(|| build(&trad_vecs, traditional_feature_names()))
            .transpose()?,
        deep: network
            .as_ref()
            .map(|n| build(&deep_vecs, n.feature_names()))
            .transpose()?,
        network: network.map(|n| n.spec().name.clone()),
        failures,
    })
}

fn load_table(path: &Path) -> Result<FeatureTable> {
    FeatureTable::load(path).with_context(|| format!("loading table {}", path.display()))
}

/// The tables an approach needs: given tables take precedence, the rest is
/// extracted from images.
pub fn gather(cfg: &ExperimentConfig, approach: Approach) -> Result<Sources> {
    let trad_file = approach
        .needs_traditional()
        .then_some(cfg.traditional_table.as_deref())
        .flatten();
    let deep_file = approach
        .needs_deep()
        .then_some(cfg.deep_table.as_deref())
        .flatten();
    let extract_trad = approach.needs_traditional() && trad_file.is_none();
    let extract_deep = approach.needs_deep() && deep_file.is_none();

    let mut sources = if extract_trad || extract_deep {
        extract(cfg, extract_trad, extract_deep)?
    } else {
        Sources::default()
    };
    if let Some(p) = trad_file {
        sources.trad = Some(load_table(p)?);
    }
    if let Some(p) = deep_file {
        sources.deep = Some(load_table(p)?);
        sources.network = network_name(cfg);
    }
    if let (Some(d), Some(t)) = (&sources.deep, &sources.trad) {
        if d.ids() != t.ids() {
            bail!("deep and traditional tables list different samples");
        }
    }
    Ok(sources)
}
