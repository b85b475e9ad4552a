//! Reference instances used by the experiments, the CLI and the tests.

use crate::market::Instance;
use crate::subset::{Money, SellerSubset};
use crate::valuation::Valuation;

pub const FORK: usize = 0;
pub const CHOP_A: usize = 1;
pub const CHOP_B: usize = 2;

/// Fork seller plus two chopstick sellers; a fork or a pair of chopsticks is
/// worth `value`, a single chopstick nothing.
pub fn chopsticks(fork_cost: Money, chop_cost: Money, value: Money, denomination: &str) -> Instance {
    let v = Valuation::from_fn(3, |q| {
        let pair = q.contains(CHOP_A) && q.contains(CHOP_B);
        if q.contains(FORK) || pair {
            value
        } else {
            0
        }
    })
    .expect("static table");
    Instance::new(vec![fork_cost, chop_cost, chop_cost], v, denomination).expect("static instance")
}

/// Chopsticks in cents: costs (50, 10, 10), value 100.
pub fn chop() -> Instance {
    chopsticks(50, 10, 100, "cents")
}

/// Chopsticks in dimes: costs (5, 1, 1), value 10.
pub fn chop_dime() -> Instance {
    chopsticks(5, 1, 10, "dimes")
}

/// Chopsticks in nickels: costs (10, 2, 2), value 20.
pub fn chop_nickel() -> Instance {
    chopsticks(10, 2, 20, "nickels")
}

/// Anonymous cost-gap instance in half units: with money doubled, `v(k) = 2k`
/// for `k <= n-2`, `v(n-1) = 2(n-2)`, `v(n) = 2(n-1)`; every cost is zero.
pub fn cost_gap(n: usize) -> Instance {
    assert!(n >= 3, "cost-gap construction needs n >= 3");
    let n_i = n as i64;
    let sizes = (0..=n)
        .map(|k| {
            let k = k as i64;
            if k <= n_i - 2 {
                2 * k
            } else if k == n_i - 1 {
                2 * (n_i - 2)
            } else {
                2 * (n_i - 1)
            }
        })
        .collect();
    Instance::new(vec![0; n], Valuation::anonymous(sizes).expect("static"), "half-units")
        .expect("static instance")
}

/// The n = 4 cost-gap instance: sizes (0, 2, 4, 4, 6), zero costs.
pub fn gap4() -> Instance {
    cost_gap(4)
}

/// Concave anonymous instance: sizes (0, 10, 18, 24, 28), costs (3, 5, 7, 9).
pub fn concave_example() -> Instance {
    Instance::new(vec![3, 5, 7, 9], Valuation::anonymous(vec![0, 10, 18, 24, 28]).expect("static"), "units")
        .expect("static instance")
}

pub fn chop_pair() -> SellerSubset {
    SellerSubset::singleton(CHOP_A).with(CHOP_B)
}
