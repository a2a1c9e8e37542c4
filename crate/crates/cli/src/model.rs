//! What `train` saves: the classifier plus everything needed to rebuild its
//! input columns from fresh feature tables.

use anyhow::{bail, Result};
use osteotex::classify::{otmd, TrainedModel};
use osteotex::select::Selector;
use osteotex::texture::TraditionalConfig;
use osteotex::FeatureTable;
use serde::{Deserialize, Serialize};

use crate::config::Approach;
use crate::sources::Sources;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub approach: Approach,
    pub selector: Selector,
    pub k_features: usize,
    pub seed: u64,
    /// Selected column names of each source, unprefixed, in model order.
    pub deep_features: Vec<String>,
    pub trad_features: Vec<String>,
    pub texture: TraditionalConfig,
    pub network: Option<String>,
    pub feature_type: String,
    pub model: TrainedModel,
}

impl ModelBundle {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        Ok(otmd::encode(self)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Ok(otmd::decode(bytes)?)
    }

    /// The model's input table, checked against the model width.
    pub fn project(&self, sources: &Sources) -> Result<FeatureTable> {
        let table = project(self.approach, &self.deep_features, &self.trad_features, sources)?;
        if table.n_features() != self.model.n_features() {
            bail!(
                "model expects {} features, projected table has {}",
                self.model.n_features(),
                table.n_features()
            );
        }
        Ok(table)
    }
}

/// The selected columns of each source, with `deep:`/`trad:` prefixes when
/// merged.
pub fn project(
    approach: Approach,
    deep_features: &[String],
    trad_features: &[String],
    sources: &Sources,
) -> Result<FeatureTable> {
    Ok(match approach {
        Approach::Traditional => sources.trad()?.select_named(trad_features)?,
        Approach::Deep => sources.deep()?.select_named(deep_features)?,
        Approach::Merged => {
            let d = sources.deep()?.select_named(deep_features)?;
            let t = sources.trad()?.select_named(trad_features)?;
            d.with_prefix("deep:").hconcat(&t.with_prefix("trad:"))?
        }
    })
}
