//! Buyer valuations over seller subsets.
//!
//! Three representations are supported: an explicit table with one entry per
//! subset mask, an anonymous table indexed by subset size, and additive
//! per-seller weights. Every valuation is integer valued, non-negative and
//! normalized so that the empty set is worth zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{SellerSubset, MAX_SELLERS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "lowercase")]
pub enum Valuation {
    /// `values[mask]` is the value of the subset with that mask.
    Explicit(Vec<i64>),
    /// `values[k]` is the value of any subset of size `k`.
    Anonymous(Vec<i64>),
    /// `values[i]` is seller `i`'s stand-alone weight; `v(Q)` is the sum.
    Additive(Vec<i64>),
}

impl Valuation {
    pub fn explicit(values: Vec<i64>) -> Result<Self> {
        let v = Valuation::Explicit(values);
        v.validate()?;
        Ok(v)
    }

    pub fn anonymous(values: Vec<i64>) -> Result<Self> {
        let v = Valuation::Anonymous(values);
        v.validate()?;
        Ok(v)
    }

    pub fn additive(values: Vec<i64>) -> Result<Self> {
        let v = Valuation::Additive(values);
        v.validate()?;
        Ok(v)
    }

    /// `v(Q) = max_{i in Q} w_i`, materialized as an explicit table.
    pub fn unit_demand(weights: &[i64]) -> Result<Self> {
        let n = weights.len();
        if n > MAX_SELLERS {
            return Err(Error::TooLarge { n, max: MAX_SELLERS });
        }
        let table = SellerSubset::all(n)
            .map(|q| q.iter().map(|i| weights[i]).max().unwrap_or(0))
            .collect();
        Valuation::explicit(table)
    }

    /// Builds an explicit table from a closure over subsets.
    pub fn from_fn(n: usize, f: impl Fn(SellerSubset) -> i64) -> Result<Self> {
        if n > MAX_SELLERS {
            return Err(Error::TooLarge { n, max: MAX_SELLERS });
        }
        Valuation::explicit(SellerSubset::all(n).map(f).collect())
    }

    /// Number of sellers the valuation is defined over.
    pub fn sellers(&self) -> usize {
        match self {
            Valuation::Explicit(t) => t.len().trailing_zeros() as usize,
            Valuation::Anonymous(t) => t.len().saturating_sub(1),
            Valuation::Additive(w) => w.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Valuation::Explicit(_) => "explicit",
            Valuation::Anonymous(_) => "anonymous",
            Valuation::Additive(_) => "additive",
        }
    }

    pub fn raw_values(&self) -> &[i64] {
        match self {
            Valuation::Explicit(t) | Valuation::Anonymous(t) | Valuation::Additive(t) => t,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = self.raw_values();
        if let Some(bad) = values.iter().find(|&&x| x < 0) {
            return Err(Error::InvalidValuation(format!("negative value {bad}")));
        }
        match self {
            Valuation::Explicit(t) => {
                if t.is_empty() || !t.len().is_power_of_two() {
                    return Err(Error::InvalidValuation(format!(
                        "explicit table needs 2^n entries, got {}",
                        t.len()
                    )));
                }
                if t[0] != 0 {
                    return Err(Error::InvalidValuation(format!("v(empty set) must be 0, got {}", t[0])));
                }
            }
            Valuation::Anonymous(t) => {
                if t.is_empty() {
                    return Err(Error::InvalidValuation("anonymous table needs n+1 entries".into()));
                }
                if t[0] != 0 {
                    return Err(Error::InvalidValuation(format!("v(0) must be 0, got {}", t[0])));
                }
            }
            Valuation::Additive(_) => {}
        }
        if self.sellers() > MAX_SELLERS {
            return Err(Error::TooLarge { n: self.sellers(), max: MAX_SELLERS });
        }
        Ok(())
    }

    /// `v(Q)`. Fails if `Q` mentions a seller the valuation does not cover.
    pub fn value(&self, q: SellerSubset) -> Result<i64> {
        let n = self.sellers();
        if !q.fits(n) {
            return Err(Error::SubsetOutOfRange { subset: q, n });
        }
        Ok(self.value_unchecked(q))
    }

    pub(crate) fn value_unchecked(&self, q: SellerSubset) -> i64 {
        match self {
            Valuation::Explicit(t) => t[q.mask() as usize],
            Valuation::Anonymous(t) => t[q.len()],
            Valuation::Additive(w) => q.iter().map(|i| w[i]).sum(),
        }
    }

    /// The full table `v(Q)` for every mask `Q` of `[0, n)`.
    pub fn table(&self) -> Vec<i64> {
        SellerSubset::all(self.sellers()).map(|q| self.value_unchecked(q)).collect()
    }

    /// `max_Q v(Q)`.
    pub fn max_value(&self) -> i64 {
        match self {
            Valuation::Explicit(t) | Valuation::Anonymous(t) => t.iter().copied().max().unwrap_or(0),
            Valuation::Additive(w) => w.iter().sum(),
        }
    }
}
