//! Total orders over seller subsets used to break ties in the buyer's demand.
//!
//! Picking the first demanded subset under a fixed total order satisfies
//! independence of irrelevant alternatives, which the efficiency arguments
//! of both auction formats rely on.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::subset::{SellerSubset, MAX_SELLERS};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TieBreakRule {
    /// Larger subsets first, then smaller masks.
    #[default]
    MaxCardThenLexMask,
    /// Smaller masks first (so the empty set beats everything).
    LexMask,
    /// Caller supplied ranking: element 0 is selected first. Must list every
    /// subset of `[0, n)` exactly once.
    Ranking(Vec<SellerSubset>),
}

impl TieBreakRule {
    pub fn name(&self) -> &'static str {
        match self {
            TieBreakRule::MaxCardThenLexMask => "max-card-lex",
            TieBreakRule::LexMask => "lex-mask",
            TieBreakRule::Ranking(_) => "ranking",
        }
    }

    /// Parses a built-in rule name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "max-card-lex" => Ok(TieBreakRule::MaxCardThenLexMask),
            "lex-mask" => Ok(TieBreakRule::LexMask),
            other => Err(Error::InvalidTieBreak(format!(
                "unknown rule {other:?} (expected max-card-lex or lex-mask)"
            ))),
        }
    }

    pub fn ranking(order: Vec<SellerSubset>, n: usize) -> Result<Self> {
        let rule = TieBreakRule::Ranking(order);
        rule.preference_order(n)?;
        Ok(rule)
    }

    /// `Less` means `q` is selected before `r`.
    pub fn compare(&self, q: SellerSubset, r: SellerSubset) -> Result<Ordering> {
        if q == r {
            return Err(Error::EqualSubsets(q));
        }
        match self {
            TieBreakRule::MaxCardThenLexMask => Ok(r.len().cmp(&q.len()).then(q.mask().cmp(&r.mask()))),
            TieBreakRule::LexMask => Ok(q.mask().cmp(&r.mask())),
            TieBreakRule::Ranking(order) => {
                let pos = |s: SellerSubset| {
                    order
                        .iter()
                        .position(|&x| x == s)
                        .ok_or_else(|| Error::InvalidTieBreak(format!("subset {s} missing from ranking")))
                };
                Ok(pos(q)?.cmp(&pos(r)?))
            }
        }
    }

    /// Every subset of `[0, n)`, most preferred first.
    pub fn preference_order(&self, n: usize) -> Result<Vec<SellerSubset>> {
        if n > MAX_SELLERS {
            return Err(Error::TooLarge { n, max: MAX_SELLERS });
        }
        match self {
            TieBreakRule::MaxCardThenLexMask => {
                let mut all: Vec<SellerSubset> = SellerSubset::all(n).collect();
                all.sort_by_key(|s| (std::cmp::Reverse(s.len()), s.mask()));
                Ok(all)
            }
            TieBreakRule::LexMask => Ok(SellerSubset::all(n).collect()),
            TieBreakRule::Ranking(order) => {
                let size = 1usize << n;
                if order.len() != size {
                    return Err(Error::InvalidTieBreak(format!(
                        "ranking lists {} subsets, expected {size}",
                        order.len()
                    )));
                }
                let mut seen = vec![false; size];
                for s in order {
                    let m = s.mask() as usize;
                    if m >= size || std::mem::replace(&mut seen[m], true) {
                        return Err(Error::InvalidTieBreak(format!("ranking repeats or overflows at {s}")));
                    }
                }
                Ok(order.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> SellerSubset {
        ids.iter().copied().collect()
    }

    #[test]
    fn max_card_prefers_larger_then_smaller_mask() {
        let t = TieBreakRule::MaxCardThenLexMask;
        assert_eq!(t.compare(set(&[1, 2]), set(&[0])).unwrap(), Ordering::Less);
        assert_eq!(t.compare(set(&[0]), set(&[1])).unwrap(), Ordering::Less);
        assert!(matches!(t.compare(SellerSubset::EMPTY, SellerSubset::EMPTY), Err(Error::EqualSubsets(_))));
    }

    #[test]
    fn orders_are_total_and_transitive() {
        let n = 4;
        let rules = [
            TieBreakRule::MaxCardThenLexMask,
            TieBreakRule::LexMask,
            TieBreakRule::ranking(SellerSubset::all(n).rev().collect(), n).unwrap(),
        ];
        let all: Vec<_> = SellerSubset::all(n).collect();
        for t in &rules {
            for &a in &all {
                for &b in &all {
                    if a == b {
                        continue;
                    }
                    let ab = t.compare(a, b).unwrap();
                    assert_ne!(ab, Ordering::Equal);
                    assert_eq!(ab.reverse(), t.compare(b, a).unwrap());
                    for &c in &all {
                        if c == a || c == b {
                            continue;
                        }
                        if ab == Ordering::Less && t.compare(b, c).unwrap() == Ordering::Less {
                            assert_eq!(t.compare(a, c).unwrap(), Ordering::Less);
                        }
                    }
                }
            }
            // the explicit order agrees with pairwise comparison
            let order = t.preference_order(n).unwrap();
            for w in order.windows(2) {
                assert_eq!(t.compare(w[0], w[1]).unwrap(), Ordering::Less);
            }
        }
    }

    #[test]
    fn ranking_must_be_a_permutation() {
        let bad = vec![SellerSubset::EMPTY, SellerSubset::EMPTY];
        assert!(TieBreakRule::ranking(bad, 1).is_err());
        assert!(TieBreakRule::ranking(vec![SellerSubset::EMPTY], 1).is_err());
        assert!(TieBreakRule::from_name("coin-flip").is_err());
    }
}
