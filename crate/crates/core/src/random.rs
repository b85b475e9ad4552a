//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::Instance;
use crate::subset::{Money, SellerSubset, MAX_SELLERS};
use crate::valuation::Valuation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomKind {
    Explicit,
    Anonymous,
    Additive,
    /// `v(Q) = max_{i in Q} w_i`, stored as an explicit table.
    UnitDemand,
}

impl RandomKind {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "explicit" => Ok(RandomKind::Explicit),
            "anonymous" => Ok(RandomKind::Anonymous),
            "additive" => Ok(RandomKind::Additive),
            "unit-demand" => Ok(RandomKind::UnitDemand),
            other => Err(Error::InvalidValuation(format!(
                "unknown kind {other:?} (expected explicit, anonymous, additive or unit-demand)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomInstanceSpec {
    pub seed: u64,
    pub n: usize,
    /// Every subset value lies in `[0, max_value]`.
    pub max_value: Money,
    /// Every cost lies in `[0, max_cost]`.
    pub max_cost: Money,
    pub kind: RandomKind,
    /// Make explicit and anonymous tables monotone by taking running maxima.
    pub monotone: bool,
}

impl RandomInstanceSpec {
    pub fn new(seed: u64, n: usize, max_value: Money, max_cost: Money, kind: RandomKind) -> Self {
        RandomInstanceSpec { seed, n, max_value, max_cost, kind, monotone: false }
    }
}

pub fn gen_random(spec: &RandomInstanceSpec) -> Result<Instance> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidInstance("need at least one seller".into()));
    }
    if n > MAX_SELLERS {
        return Err(Error::TooLarge { n, max: MAX_SELLERS });
    }
    if spec.max_value < 0 || spec.max_cost < 0 {
        return Err(Error::InvalidInstance("value and cost ranges must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let valuation = match spec.kind {
        RandomKind::Explicit => {
            let mut table: Vec<i64> = (0..1usize << n).map(|_| rng.gen_range(0..=spec.max_value)).collect();
            table[0] = 0;
            if spec.monotone {
                for q in SellerSubset::all(n) {
                    let best = q.iter().map(|i| table[q.without(i).mask() as usize]).max().unwrap_or(0);
                    let slot = &mut table[q.mask() as usize];
                    *slot = (*slot).max(best);
                }
            }
            Valuation::explicit(table)?
        }
        RandomKind::Anonymous => {
            let mut sizes: Vec<i64> = (0..=n).map(|_| rng.gen_range(0..=spec.max_value)).collect();
            sizes[0] = 0;
            if spec.monotone {
                for k in 1..=n {
                    sizes[k] = sizes[k].max(sizes[k - 1]);
                }
            }
            Valuation::anonymous(sizes)?
        }
        RandomKind::Additive => {
            // keep the grand total within max_value
            let per = spec.max_value / n as i64;
            Valuation::additive((0..n).map(|_| rng.gen_range(0..=per)).collect())?
        }
        RandomKind::UnitDemand => {
            let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=spec.max_value)).collect();
            Valuation::unit_demand(&weights)?
        }
    };
    let costs = (0..n).map(|_| rng.gen_range(0..=spec.max_cost)).collect();
    Instance::new(costs, valuation, "units")
}
