//! Instances, buyer demand, winner selection and outcome accounting.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{Money, SellerId, SellerSubset, MAX_SELLERS};
use crate::tiebreak::TieBreakRule;
use crate::valuation::Valuation;

/// A procurement instance: seller costs plus the buyer's valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    costs: Vec<Money>,
    valuation: Valuation,
    denomination: String,
}

impl Instance {
    pub fn new(costs: Vec<Money>, valuation: Valuation, denomination: impl Into<String>) -> Result<Self> {
        let n = costs.len();
        if n == 0 {
            return Err(Error::InvalidInstance("need at least one seller".into()));
        }
        if n > MAX_SELLERS {
            return Err(Error::TooLarge { n, max: MAX_SELLERS });
        }
        if let Some(bad) = costs.iter().find(|&&c| c < 0) {
            return Err(Error::InvalidInstance(format!("negative cost {bad}")));
        }
        valuation.validate()?;
        if valuation.sellers() != n {
            return Err(Error::InvalidInstance(format!(
                "{} valuation covers {} sellers but {n} costs were given",
                valuation.kind_name(),
                valuation.sellers()
            )));
        }
        Ok(Instance { costs, valuation, denomination: denomination.into() })
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn costs(&self) -> &[Money] {
        &self.costs
    }

    pub fn cost(&self, i: SellerId) -> Money {
        self.costs[i]
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn denomination(&self) -> &str {
        &self.denomination
    }

    pub fn max_cost(&self) -> Money {
        self.costs.iter().copied().max().unwrap_or(0)
    }

    pub fn max_value(&self) -> Money {
        self.valuation.max_value()
    }
}

/// Precomputed buyer behaviour for one instance and tie-break rule.
///
/// Holds the value table and the tie-break preference order so repeated
/// winner selection is a single scan over `2^n` subsets.
#[derive(Debug, Clone)]
pub struct WinnerSelector {
    n: usize,
    values: Vec<i64>,
    order: Vec<SellerSubset>,
}

impl WinnerSelector {
    pub fn new(valuation: &Valuation, tiebreak: &TieBreakRule) -> Result<Self> {
        let n = valuation.sellers();
        if n > MAX_SELLERS {
            return Err(Error::TooLarge { n, max: MAX_SELLERS });
        }
        Ok(WinnerSelector { n, values: valuation.table(), order: tiebreak.preference_order(n)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, q: SellerSubset) -> i64 {
        self.values[q.mask() as usize]
    }

    pub fn utility(&self, prices: &[Money], q: SellerSubset) -> i64 {
        self.value(q) - q.iter().map(|i| prices[i]).sum::<i64>()
    }

    /// Every utility-maximizing subset, in tie-break preference order.
    pub fn demand_set(&self, prices: &[Money]) -> Vec<SellerSubset> {
        debug_assert_eq!(prices.len(), self.n);
        let utils: Vec<i64> = self.order.iter().map(|&q| self.utility(prices, q)).collect();
        let best = utils.iter().copied().max().unwrap_or(0);
        self.order
            .iter()
            .zip(&utils)
            .filter(|&(_, &u)| u == best)
            .map(|(&q, _)| q)
            .collect()
    }

    /// The tie-break-first member of the demand set.
    pub fn select(&self, prices: &[Money]) -> SellerSubset {
        debug_assert_eq!(prices.len(), self.n);
        let mut best = SellerSubset::EMPTY;
        let mut best_u = i64::MIN;
        for &q in &self.order {
            let u = self.utility(prices, q);
            if u > best_u {
                best_u = u;
                best = q;
            }
        }
        best
    }
}

fn check_prices(n: usize, prices: &[Money]) -> Result<()> {
    if prices.len() != n {
        return Err(Error::InvalidInstance(format!("price vector has {} entries, expected {n}", prices.len())));
    }
    if let Some(bad) = prices.iter().find(|&&p| p < 0) {
        return Err(Error::InvalidInstance(format!("negative price {bad}")));
    }
    Ok(())
}

pub fn value(v: &Valuation, q: SellerSubset) -> Result<i64> {
    v.value(q)
}

/// `v(Q) - sum_{i in Q} p_i`.
pub fn buyer_utility(v: &Valuation, prices: &[Money], q: SellerSubset) -> Result<i64> {
    check_prices(v.sellers(), prices)?;
    Ok(v.value(q)? - q.iter().map(|i| prices[i]).sum::<i64>())
}

/// All utility-maximizing subsets, by exhaustive enumeration.
pub fn demand_set(v: &Valuation, prices: &[Money]) -> Result<Vec<SellerSubset>> {
    check_prices(v.sellers(), prices)?;
    let mut d = WinnerSelector::new(v, &TieBreakRule::LexMask)?.demand_set(prices);
    d.sort();
    Ok(d)
}

pub fn select_winner(v: &Valuation, prices: &[Money], tiebreak: &TieBreakRule) -> Result<SellerSubset> {
    check_prices(v.sellers(), prices)?;
    Ok(WinnerSelector::new(v, tiebreak)?.select(prices))
}

/// `v(W) - sum_{i in W} c_i`.
pub fn social_welfare(inst: &Instance, w: SellerSubset) -> Result<i64> {
    buyer_utility(inst.valuation(), inst.costs(), w)
}

/// The tie-break-first welfare maximizer: winner selection at cost prices.
pub fn efficient_allocation(inst: &Instance, tiebreak: &TieBreakRule) -> Result<SellerSubset> {
    select_winner(inst.valuation(), inst.costs(), tiebreak)
}

/// `Less` if `q` is selected before `r`.
pub fn compare_subsets(tiebreak: &TieBreakRule, q: SellerSubset, r: SellerSubset) -> Result<Ordering> {
    tiebreak.compare(q, r)
}

/// Final accounting for one play of an auction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub winners: SellerSubset,
    pub final_prices: Vec<Money>,
    pub payments: Vec<Money>,
    pub buyer_utility: i64,
    pub seller_utilities: Vec<i64>,
    pub welfare: i64,
    pub buyer_cost: Money,
}

impl AuctionOutcome {
    pub fn new(inst: &Instance, winners: SellerSubset, final_prices: Vec<Money>) -> Self {
        let n = inst.n();
        debug_assert_eq!(final_prices.len(), n);
        let payments: Vec<Money> =
            (0..n).map(|i| if winners.contains(i) { final_prices[i] } else { 0 }).collect();
        let seller_utilities =
            (0..n).map(|i| if winners.contains(i) { payments[i] - inst.cost(i) } else { 0 }).collect();
        let value = inst.valuation().value_unchecked(winners);
        let buyer_cost: Money = payments.iter().sum();
        let welfare = value - winners.iter().map(|i| inst.cost(i)).sum::<i64>();
        AuctionOutcome {
            winners,
            final_prices,
            payments,
            buyer_utility: value - buyer_cost,
            seller_utilities,
            welfare,
            buyer_cost,
        }
    }
}
