use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Amount of money in denomination units (cents, dimes, ...). Always exact.
pub type Money = i64;

/// 0-based seller index.
pub type SellerId = usize;

/// Hard cap on the number of sellers for anything that enumerates all subsets.
pub const MAX_SELLERS: usize = 20;

/// A set of sellers encoded as a bit mask: bit `i` is seller `i`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SellerSubset(u32);

impl SellerSubset {
    pub const EMPTY: SellerSubset = SellerSubset(0);

    pub const fn from_mask(mask: u32) -> Self {
        SellerSubset(mask)
    }

    /// All `n` sellers.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 32);
        if n >= 32 {
            SellerSubset(u32::MAX)
        } else {
            SellerSubset((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: SellerId) -> Self {
        SellerSubset(1 << i)
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: SellerId) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    #[must_use]
    pub fn with(self, i: SellerId) -> Self {
        SellerSubset(self.0 | (1 << i))
    }

    #[must_use]
    pub fn without(self, i: SellerId) -> Self {
        SellerSubset(self.0 & !(1 << i))
    }

    #[must_use]
    pub fn union(self, other: Self) -> Self {
        SellerSubset(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: Self) -> Self {
        SellerSubset(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// True if every member is below `n`.
    pub fn fits(self, n: usize) -> bool {
        self.is_subset_of(SellerSubset::full(n))
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = SellerId> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Every subset of `[0, n)` in increasing mask order.
    pub fn all(n: usize) -> impl DoubleEndedIterator<Item = SellerSubset> + ExactSizeIterator {
        (0..(1u32 << n)).map(SellerSubset)
    }

    /// Every subset of `self` (including the empty set and `self`).
    pub fn subsets(self) -> impl Iterator<Item = SellerSubset> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(SellerSubset(cur))
        })
    }
}

impl FromIterator<SellerId> for SellerSubset {
    fn from_iter<I: IntoIterator<Item = SellerId>>(iter: I) -> Self {
        iter.into_iter().fold(SellerSubset::EMPTY, SellerSubset::with)
    }
}

impl fmt::Debug for SellerSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SellerSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for SellerSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for SellerSubset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ids = Vec::<SellerId>::deserialize(deserializer)?;
        if let Some(&bad) = ids.iter().find(|&&i| i >= 32) {
            return Err(serde::de::Error::custom(format!("seller id {bad} out of range")));
        }
        Ok(ids.into_iter().collect())
    }
}
