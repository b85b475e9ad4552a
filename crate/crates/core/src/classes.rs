//! Exhaustive checks for valuation classes: submodularity, anonymity,
//! weak concavity of anonymous valuations and (grid-bounded) gross
//! substitutes. Each check returns the first witness it finds.

use serde::Serialize;

use crate::config::{pow_sat, WorkBudget};
use crate::error::{Error, Result};
use crate::market::WinnerSelector;
use crate::subset::{Money, SellerId, SellerSubset};
use crate::tiebreak::TieBreakRule;
use crate::valuation::Valuation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum SubmodularCheck {
    Pass,
    /// `v(Q + i) - v(Q) < v(R + i) - v(R)` with `Q ⊂ R`, `i ∉ R`.
    Counterexample { smaller: SellerSubset, larger: SellerSubset, seller: SellerId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum AnonymityCheck {
    Pass { sizes: Vec<i64> },
    Counterexample { first: SellerSubset, second: SellerSubset },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum ConcavityCheck {
    Pass,
    /// `v(k) - v(k-1) > v(k-1) - v(k-2)`.
    IncreasesAt { k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum GrossSubstitutesCheck {
    /// No violation on the grid. This does not prove the property for
    /// prices off the grid.
    Pass { grid_points: usize },
    /// `demanded ∈ D(v; low)` but no `R ∈ D(v; high)` keeps
    /// `demanded ∩ {i : low_i = high_i}`.
    Counterexample { low: Vec<Money>, high: Vec<Money>, demanded: SellerSubset },
}

/// Integer price grid `{0, step, 2*step, ...} ∪ {cap}` per seller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PriceGrid {
    pub cap: Money,
    pub step: Money,
}

impl PriceGrid {
    pub fn full(cap: Money) -> Self {
        PriceGrid { cap, step: 1 }
    }

    /// A grid over `[0, cap]` with at most `points` points per seller.
    pub fn coarse(cap: Money, points: usize) -> Self {
        let segments = points.saturating_sub(1).max(1) as i64;
        PriceGrid { cap, step: ((cap + segments - 1) / segments).max(1) }
    }

    pub fn points(&self) -> Vec<Money> {
        let mut pts: Vec<Money> = (0..=self.cap.max(0)).step_by(self.step.max(1) as usize).collect();
        if pts.last() != Some(&self.cap.max(0)) {
            pts.push(self.cap.max(0));
        }
        pts
    }
}

pub fn check_submodular(v: &Valuation, budget: WorkBudget) -> Result<SubmodularCheck> {
    let n = v.sellers();
    budget.check(pow_sat(3, n).saturating_mul(n as u128))?;
    let table = v.table();
    let val = |s: SellerSubset| table[s.mask() as usize];
    for larger in SellerSubset::all(n) {
        for smaller in larger.subsets() {
            if smaller == larger {
                continue;
            }
            for i in (0..n).filter(|&i| !larger.contains(i)) {
                let gain_small = val(smaller.with(i)) - val(smaller);
                let gain_large = val(larger.with(i)) - val(larger);
                if gain_small < gain_large {
                    return Ok(SubmodularCheck::Counterexample { smaller, larger, seller: i });
                }
            }
        }
    }
    Ok(SubmodularCheck::Pass)
}

pub fn check_anonymous(v: &Valuation) -> Result<AnonymityCheck> {
    if let Valuation::Anonymous(sizes) = v {
        return Ok(AnonymityCheck::Pass { sizes: sizes.clone() });
    }
    let n = v.sellers();
    if n > crate::subset::MAX_SELLERS {
        return Err(Error::TooLarge { n, max: crate::subset::MAX_SELLERS });
    }
    let mut first_of_size: Vec<Option<SellerSubset>> = vec![None; n + 1];
    for q in SellerSubset::all(n) {
        match first_of_size[q.len()] {
            None => first_of_size[q.len()] = Some(q),
            Some(r) => {
                if v.value_unchecked(q) != v.value_unchecked(r) {
                    return Ok(AnonymityCheck::Counterexample { first: r, second: q });
                }
            }
        }
    }
    let sizes = first_of_size.iter().map(|q| v.value_unchecked(q.expect("every size occurs"))).collect();
    Ok(AnonymityCheck::Pass { sizes })
}

/// Size profile of an anonymous valuation, or the anonymity witness as an error.
pub fn anonymous_sizes(v: &Valuation) -> Result<Vec<i64>> {
    match check_anonymous(v)? {
        AnonymityCheck::Pass { sizes } => Ok(sizes),
        AnonymityCheck::Counterexample { first, second } => Err(Error::NotAnonymous { first, second }),
    }
}

pub fn check_concave_anonymous(v: &Valuation) -> Result<ConcavityCheck> {
    let sizes = anonymous_sizes(v)?;
    let marginals: Vec<i64> = sizes.windows(2).map(|w| w[1] - w[0]).collect();
    for k in 1..marginals.len() {
        if marginals[k] > marginals[k - 1] {
            // marginals[k] is the gain from the (k+1)-th seller
            return Ok(ConcavityCheck::IncreasesAt { k: k + 1 });
        }
    }
    Ok(ConcavityCheck::Pass)
}

/// Checks gross substitutes on every grid pair `p <= p'`.
pub fn check_gross_substitutes(v: &Valuation, grid: PriceGrid, budget: WorkBudget) -> Result<GrossSubstitutesCheck> {
    let n = v.sellers();
    let pts = grid.points();
    let k = pts.len();
    let vectors = pow_sat(k as u128, n);
    let pairs = pow_sat((k * (k + 1) / 2) as u128, n);
    budget.check(vectors.saturating_add(pairs).saturating_mul(1u128 << n))?;

    let selector = WinnerSelector::new(v, &TieBreakRule::LexMask)?;
    let vectors = vectors as usize;
    let decode = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; n];
        for slot in out.iter_mut() {
            *slot = idx % k;
            idx /= k;
        }
        out
    };
    let encode = |digits: &[usize]| digits.iter().rev().fold(0usize, |acc, &d| acc * k + d);
    let prices_of = |digits: &[usize]| digits.iter().map(|&d| pts[d]).collect::<Vec<_>>();
    let demand: Vec<Vec<SellerSubset>> =
        (0..vectors).map(|idx| selector.demand_set(&prices_of(&decode(idx)))).collect();

    for idx in 0..vectors {
        let low = decode(idx);
        let mut high = low.clone();
        loop {
            let unchanged: SellerSubset = (0..n).filter(|&i| low[i] == high[i]).collect();
            let d_high = &demand[encode(&high)];
            for &q in &demand[idx] {
                let keep = q.intersection(unchanged);
                if !d_high.iter().any(|r| keep.is_subset_of(*r)) {
                    return Ok(GrossSubstitutesCheck::Counterexample {
                        low: prices_of(&low),
                        high: prices_of(&high),
                        demanded: q,
                    });
                }
            }
            // next `high` with low <= high, odometer style
            let mut pos = 0;
            while pos < n {
                if high[pos] + 1 < k {
                    high[pos] += 1;
                    break;
                }
                high[pos] = low[pos];
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
    }
    Ok(GrossSubstitutesCheck::Pass { grid_points: k })
}
