//! JSON instance files.
//!
//! The canonical form is `serde_json` pretty printing plus a trailing
//! newline; parsing a canonical file and serializing it again reproduces it
//! byte for byte.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::market::Instance;
use crate::subset::{Money, SellerSubset};
use crate::tiebreak::TieBreakRule;
use crate::valuation::Valuation;

pub const FORMAT_VERSION: u32 = 1;

fn default_tiebreak() -> String {
    TieBreakRule::default().name().to_string()
}

fn default_denomination() -> String {
    "units".to_string()
}

/// On-disk instance description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub n: usize,
    pub costs: Vec<Money>,
    pub valuation: Valuation,
    #[serde(default = "default_tiebreak")]
    pub tiebreak: String,
    /// Subset masks in selection order; only with `"tiebreak": "ranking"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<u32>>,
    #[serde(default = "default_denomination")]
    pub denomination: String,
}

/// A parsed and validated instance together with its tie-break rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedInstance {
    pub instance: Instance,
    pub tiebreak: TieBreakRule,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance, tiebreak: &TieBreakRule) -> Self {
        let ranking = match tiebreak {
            TieBreakRule::Ranking(order) => Some(order.iter().map(|q| q.mask()).collect()),
            _ => None,
        };
        InstanceFile {
            version: FORMAT_VERSION,
            n: inst.n(),
            costs: inst.costs().to_vec(),
            valuation: inst.valuation().clone(),
            tiebreak: tiebreak.name().to_string(),
            ranking,
            denomination: inst.denomination().to_string(),
        }
    }

    pub fn validate(&self) -> Result<LoadedInstance> {
        if self.version != FORMAT_VERSION {
            return Err(Error::InvalidInstance(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        if self.costs.len() != self.n {
            return Err(Error::InvalidInstance(format!("n = {} but {} costs given", self.n, self.costs.len())));
        }
        let instance = Instance::new(self.costs.clone(), self.valuation.clone(), self.denomination.clone())?;
        let tiebreak = match (self.tiebreak.as_str(), &self.ranking) {
            ("ranking", Some(masks)) => {
                TieBreakRule::ranking(masks.iter().map(|&m| SellerSubset::from_mask(m)).collect(), self.n)?
            }
            ("ranking", None) => return Err(Error::InvalidTieBreak("rule \"ranking\" needs a ranking array".into())),
            (_, Some(_)) => {
                return Err(Error::InvalidTieBreak("a ranking array is only allowed with rule \"ranking\"".into()))
            }
            (name, None) => TieBreakRule::from_name(name)?,
        };
        Ok(LoadedInstance { instance, tiebreak })
    }
}

pub fn parse_instance(text: &str) -> Result<LoadedInstance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.validate()
}

pub fn serialize_instance(inst: &Instance, tiebreak: &TieBreakRule) -> String {
    let mut text = serde_json::to_string_pretty(&InstanceFile::from_instance(inst, tiebreak))
        .expect("instance files always serialize");
    text.push('\n');
    text
}

/// Lowercase hex SHA-256 of the canonical serialization.
pub fn instance_hash(inst: &Instance, tiebreak: &TieBreakRule) -> String {
    hex::encode(Sha256::digest(serialize_instance(inst, tiebreak).as_bytes()))
}
