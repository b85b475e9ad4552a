//! Strategy files: per-seller policies for either auction format.
//!
//! ```json
//! {
//!   "format": "nyb",
//!   "default": {"policy": "canonical"},
//!   "sellers": {"0": {"policy": "constant", "bid": 95}}
//! }
//! ```
//!
//! Sellers without an entry use `default`; a file without `default` must
//! list every seller.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::descending::{DescPolicy, DescProfile};
use crate::error::{Error, Result};
use crate::nyb::{NybPolicy, NybProfile};
use crate::report::AuctionFormat;
use crate::subset::Money;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Canonical,
    Truthful,
    Constant { bid: Money },
    AlwaysAccept,
    AlwaysFreeze,
    FreezeAtOrBelow { price: Money },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub format: AuctionFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<PolicySpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sellers: BTreeMap<String, PolicySpec>,
}

impl StrategyFile {
    pub fn canonical(format: AuctionFormat) -> Self {
        StrategyFile { format, default: Some(PolicySpec::Canonical), sellers: BTreeMap::new() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidStrategy(e.to_string()))
    }

    fn per_seller(&self, n: usize, format: AuctionFormat) -> Result<Vec<PolicySpec>> {
        if self.format != format {
            return Err(Error::InvalidStrategy(format!(
                "strategy file is for {} auctions, not {}",
                self.format.name(),
                format.name()
            )));
        }
        let mut out: Vec<Option<PolicySpec>> = vec![self.default.clone(); n];
        for (key, spec) in &self.sellers {
            let i: usize = key
                .parse()
                .ok()
                .filter(|&i| i < n)
                .ok_or_else(|| Error::InvalidStrategy(format!("seller key {key:?} is not an id below {n}")))?;
            out[i] = Some(spec.clone());
        }
        out.into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| Error::InvalidStrategy(format!("no policy for seller {i}"))))
            .collect()
    }

    pub fn nyb_profile(&self, n: usize) -> Result<NybProfile> {
        let policies = self
            .per_seller(n, AuctionFormat::Nyb)?
            .into_iter()
            .map(|spec| match spec {
                PolicySpec::Canonical => Ok(NybPolicy::Canonical),
                PolicySpec::Truthful => Ok(NybPolicy::Truthful),
                PolicySpec::Constant { bid } if bid >= 0 => Ok(NybPolicy::Constant(bid)),
                other => Err(Error::InvalidStrategy(format!("{other:?} is not a valid bidding policy"))),
            })
            .collect::<Result<_>>()?;
        Ok(NybProfile(policies))
    }

    pub fn desc_profile(&self, n: usize) -> Result<DescProfile> {
        let policies = self
            .per_seller(n, AuctionFormat::Descending)?
            .into_iter()
            .map(|spec| match spec {
                PolicySpec::Canonical => Ok(DescPolicy::Canonical),
                PolicySpec::AlwaysAccept => Ok(DescPolicy::AlwaysAccept),
                PolicySpec::AlwaysFreeze => Ok(DescPolicy::AlwaysFreeze),
                PolicySpec::FreezeAtOrBelow { price } => Ok(DescPolicy::FreezeAtOrBelow(price)),
                other => Err(Error::InvalidStrategy(format!("{other:?} is not a valid descending policy"))),
            })
            .collect::<Result<_>>()?;
        Ok(DescProfile(policies))
    }
}
