//! The sequential Name-Your-BAFO auction.
//!
//! Sellers are approached one at a time (in a fixed or bid-adaptive order);
//! each names a single bid after seeing every earlier bid. Once all bids are
//! in, the buyer buys the tie-break-first utility-maximizing subset and pays
//! each winner their bid.
//!
//! Besides simple play-outs this module computes an exact subgame perfect
//! equilibrium over the bid grid `[0, B]^n` by backward induction, and
//! checks arbitrary strategy profiles with the one-shot deviation test.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{pow_sat, WorkBudget};
use crate::error::{Error, Result};
use crate::market::{AuctionOutcome, Instance, WinnerSelector};
use crate::subset::{Money, SellerId, SellerSubset};
use crate::tiebreak::TieBreakRule;

/// Bids named so far, in approach order.
pub type BidHistory = [(SellerId, Money)];

type AdaptiveFn = dyn Fn(&BidHistory) -> SellerId + Send + Sync;

/// The order in which sellers are asked for their bid.
#[derive(Clone)]
pub enum NybOrder {
    Fixed(Vec<SellerId>),
    /// Picks the next seller from the observed bids. Must name a seller that
    /// has not bid yet.
    Adaptive { name: String, rule: Arc<AdaptiveFn> },
}

impl fmt::Debug for NybOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl NybOrder {
    pub fn identity(n: usize) -> Self {
        NybOrder::Fixed((0..n).collect())
    }

    pub fn fixed(order: Vec<SellerId>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::InvalidOrder(format!("order lists {} sellers, expected {n}", order.len())));
        }
        for &i in &order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidOrder(format!("order {order:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(NybOrder::Fixed(order))
    }

    pub fn adaptive(name: impl Into<String>, rule: impl Fn(&BidHistory) -> SellerId + Send + Sync + 'static) -> Self {
        NybOrder::Adaptive { name: name.into(), rule: Arc::new(rule) }
    }

    pub fn name(&self) -> String {
        match self {
            NybOrder::Fixed(order) => {
                let ids: Vec<String> = order.iter().map(ToString::to_string).collect();
                format!("fixed:{}", ids.join(","))
            }
            NybOrder::Adaptive { name, .. } => format!("adaptive:{name}"),
        }
    }

    /// The seller approached after `history`.
    pub fn next(&self, history: &BidHistory, n: usize) -> Result<SellerId> {
        let k = history.len();
        if k >= n {
            return Err(Error::InvalidOrder("every seller has already bid".into()));
        }
        let i = match self {
            NybOrder::Fixed(order) => order[k],
            NybOrder::Adaptive { rule, .. } => rule(history),
        };
        if i >= n || history.iter().any(|&(j, _)| j == i) {
            return Err(Error::InvalidOrder(format!("rule picked seller {i}, who is not an unbid seller")));
        }
        Ok(i)
    }
}

type CustomBidFn = dyn Fn(&NybAuction, SellerId, &BidHistory) -> Money + Send + Sync;

/// One seller's bidding strategy.
#[derive(Clone)]
pub enum NybPolicy {
    /// Largest bid that still wins against later sellers at cost, else cost.
    Canonical,
    /// Always bid cost.
    Truthful,
    Constant(Money),
    Custom(Arc<CustomBidFn>),
}

impl fmt::Debug for NybPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NybPolicy::Canonical => f.write_str("Canonical"),
            NybPolicy::Truthful => f.write_str("Truthful"),
            NybPolicy::Constant(b) => write!(f, "Constant({b})"),
            NybPolicy::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// One policy per seller, indexed by seller id.
#[derive(Debug, Clone)]
pub struct NybProfile(pub Vec<NybPolicy>);

impl NybProfile {
    pub fn uniform(policy: NybPolicy, n: usize) -> Self {
        NybProfile(vec![policy; n])
    }

    pub fn canonical(n: usize) -> Self {
        NybProfile::uniform(NybPolicy::Canonical, n)
    }
}

/// Which bid a seller names when several bids are equally good for them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BidTieBreak {
    #[default]
    Highest,
    Lowest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NybEvent {
    pub step: usize,
    pub seller: SellerId,
    pub bid: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NybRun {
    pub bids: Vec<Money>,
    pub events: Vec<NybEvent>,
    pub outcome: AuctionOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct NodeChoice {
    seller: SellerId,
    bid: Money,
    winners: SellerSubset,
}

/// Exact equilibrium of the bid-grid game, queryable at every internal node.
#[derive(Debug, Clone)]
pub struct NybEquilibrium {
    pub outcome: AuctionOutcome,
    /// Equilibrium bids in approach order along the root play-out.
    pub path: Vec<NybEvent>,
    pub node_count: u64,
    nodes: HashMap<Vec<Money>, NodeChoice>,
    costs: Vec<Money>,
}

impl NybEquilibrium {
    /// The acting seller and their equilibrium bid after the bid prefix
    /// `bids` (approach order), or `None` for complete or off-grid prefixes.
    pub fn action_at(&self, bids: &[Money]) -> Option<(SellerId, Money)> {
        self.nodes.get(bids).map(|c| (c.seller, c.bid))
    }

    /// Equilibrium winner set of the subgame after `bids`.
    pub fn winners_at(&self, bids: &[Money]) -> Option<SellerSubset> {
        self.nodes.get(bids).map(|c| c.winners)
    }

    /// Seller utilities when equilibrium play continues from `bids`.
    pub fn payoff_at(&self, bids: &[Money]) -> Option<Vec<i64>> {
        let mut prefix = bids.to_vec();
        let mut assigned: Vec<Option<Money>> = vec![None; self.costs.len()];
        let winners = self.nodes.get(bids)?.winners;
        // recover who named which bid by replaying choices from the root
        let mut seen = Vec::new();
        for &b in bids {
            let c = self.nodes.get(&seen)?;
            assigned[c.seller] = Some(b);
            seen.push(b);
        }
        while let Some(c) = self.nodes.get(&prefix) {
            assigned[c.seller] = Some(c.bid);
            prefix.push(c.bid);
        }
        Some(
            (0..self.costs.len())
                .map(|i| match assigned[i] {
                    Some(b) if winners.contains(i) => b - self.costs[i],
                    _ => 0,
                })
                .collect(),
        )
    }

    /// Internal nodes of the game tree with their equilibrium winner sets.
    pub fn internal_nodes(&self) -> impl Iterator<Item = (&[Money], SellerSubset)> {
        self.nodes.iter().map(|(k, c)| (k.as_slice(), c.winners))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NybWitness {
    /// Bids already named (approach order) at the violating node.
    pub bids: Vec<Money>,
    pub seller: SellerId,
    pub profile_bid: Money,
    pub deviation_bid: Money,
    pub utility_gain: i64,
    pub wins_after_deviation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum NybVerdict {
    Pass { nodes_checked: u64 },
    Witness(NybWitness),
}

/// A Name-Your-BAFO auction over one instance.
#[derive(Debug, Clone)]
pub struct NybAuction<'a> {
    inst: &'a Instance,
    tiebreak: TieBreakRule,
    order: NybOrder,
    selector: WinnerSelector,
    cap: Money,
}

/// Seller preference: utility, then winning, then the bid tie-break.
fn preference(utility: i64, wins: bool, bid: Money, ties: BidTieBreak) -> (i64, bool, Money) {
    let bid_key = match ties {
        BidTieBreak::Highest => bid,
        BidTieBreak::Lowest => -bid,
    };
    (utility, wins, bid_key)
}

impl<'a> NybAuction<'a> {
    /// Uses the default bid cap `max(max_Q v(Q), max_i c_i)`.
    pub fn new(inst: &'a Instance, tiebreak: TieBreakRule, order: NybOrder) -> Result<Self> {
        let selector = WinnerSelector::new(inst.valuation(), &tiebreak)?;
        let cap = inst.max_value().max(inst.max_cost());
        if let NybOrder::Fixed(o) = &order {
            NybOrder::fixed(o.clone(), inst.n())?;
        }
        Ok(NybAuction { inst, tiebreak, order, selector, cap })
    }

    /// Overrides the bid cap. Must cover every cost and every subset value.
    pub fn with_bid_cap(mut self, cap: Money) -> Result<Self> {
        if cap < self.inst.max_cost() || cap < self.inst.max_value() {
            return Err(Error::InvalidInstance(format!(
                "bid cap {cap} must be at least max cost {} and max value {}",
                self.inst.max_cost(),
                self.inst.max_value()
            )));
        }
        self.cap = cap;
        Ok(self)
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    pub fn tiebreak(&self) -> &TieBreakRule {
        &self.tiebreak
    }

    pub fn order(&self) -> &NybOrder {
        &self.order
    }

    pub fn bid_cap(&self) -> Money {
        self.cap
    }

    fn n(&self) -> usize {
        self.inst.n()
    }

    /// Attaches seller ids to a bid prefix given in approach order.
    pub fn history_of(&self, bids: &[Money]) -> Result<Vec<(SellerId, Money)>> {
        if bids.len() > self.n() {
            return Err(Error::InvalidState(format!("{} bids for {} sellers", bids.len(), self.n())));
        }
        let mut history = Vec::with_capacity(bids.len());
        for &b in bids {
            let i = self.order.next(&history, self.n())?;
            history.push((i, b));
        }
        Ok(history)
    }

    fn conditional_from_history(&self, history: &BidHistory) -> Vec<Money> {
        let mut prices = self.inst.costs().to_vec();
        for &(i, b) in history {
            prices[i] = b;
        }
        prices
    }

    /// Bids of sellers approached so far, costs for everyone else.
    pub fn conditional_prices(&self, bids: &[Money]) -> Result<Vec<Money>> {
        Ok(self.conditional_from_history(&self.history_of(bids)?))
    }

    /// Buyer's choice and payments once every seller has bid.
    /// `bids` is indexed by seller id.
    pub fn settle(&self, bids: &[Money]) -> Result<AuctionOutcome> {
        if bids.len() != self.n() {
            return Err(Error::InvalidState(format!("need {} bids, got {}", self.n(), bids.len())));
        }
        let winners = self.selector.select(bids);
        Ok(AuctionOutcome::new(self.inst, winners, bids.to_vec()))
    }

    fn canonical_from_history(&self, history: &BidHistory) -> Result<(SellerId, Money)> {
        let k = self.order.next(history, self.n())?;
        let mut prices = self.conditional_from_history(history);
        let cost = self.inst.cost(k);
        // winning is downward closed in the own bid, so scan from the top
        for b in (cost..=self.cap).rev() {
            prices[k] = b;
            if self.selector.select(&prices).contains(k) {
                return Ok((k, b));
            }
        }
        Ok((k, cost))
    }

    /// Canonical bid of the next seller after the prefix `bids`.
    pub fn canonical_bid(&self, bids: &[Money]) -> Result<Money> {
        let history = self.history_of(bids)?;
        Ok(self.canonical_from_history(&history)?.1)
    }

    fn policy_bid(&self, profile: &NybProfile, seller: SellerId, history: &BidHistory) -> Result<Money> {
        let policy = profile
            .0
            .get(seller)
            .ok_or_else(|| Error::InvalidStrategy(format!("no policy for seller {seller}")))?;
        let bid = match policy {
            NybPolicy::Canonical => self.canonical_from_history(history)?.1,
            NybPolicy::Truthful => self.inst.cost(seller),
            NybPolicy::Constant(b) => *b,
            NybPolicy::Custom(f) => f(self, seller, history),
        };
        if bid < 0 {
            return Err(Error::InvalidStrategy(format!("seller {seller} bid {bid} < 0")));
        }
        Ok(bid)
    }

    /// Plays the auction with the given profile.
    pub fn run(&self, profile: &NybProfile) -> Result<NybRun> {
        if profile.0.len() != self.n() {
            return Err(Error::InvalidStrategy(format!("profile has {} policies for {} sellers", profile.0.len(), self.n())));
        }
        let mut history: Vec<(SellerId, Money)> = Vec::with_capacity(self.n());
        let mut events = Vec::with_capacity(self.n());
        for step in 0..self.n() {
            let seller = self.order.next(&history, self.n())?;
            let bid = self.policy_bid(profile, seller, &history)?;
            history.push((seller, bid));
            events.push(NybEvent { step, seller, bid });
        }
        let bids = self.conditional_from_history(&history);
        let outcome = self.settle(&bids)?;
        Ok(NybRun { bids, events, outcome })
    }

    pub fn run_canonical(&self) -> Result<NybRun> {
        self.run(&NybProfile::canonical(self.n()))
    }

    fn required_work(&self) -> u128 {
        pow_sat(self.cap as u128 + 1, self.n()).saturating_mul(1u128 << self.n())
    }

    pub fn solve_exact(&self, budget: WorkBudget) -> Result<NybEquilibrium> {
        self.solve_exact_with(budget, BidTieBreak::Highest)
    }

    /// Backward induction over the whole bid grid `[0, B]^n`.
    pub fn solve_exact_with(&self, budget: WorkBudget, ties: BidTieBreak) -> Result<NybEquilibrium> {
        budget.check(self.required_work())?;
        let mut solver = Solver {
            auction: self,
            ties,
            nodes: HashMap::new(),
            history: Vec::with_capacity(self.n()),
            prices: self.inst.costs().to_vec(),
            node_count: 0,
        };
        let root_winners = solver.solve()?;
        let nodes = solver.nodes;
        let node_count = solver.node_count;

        let mut path = Vec::new();
        let mut prefix = Vec::new();
        let mut bids = self.inst.costs().to_vec();
        while let Some(c) = nodes.get(&prefix) {
            path.push(NybEvent { step: path.len(), seller: c.seller, bid: c.bid });
            bids[c.seller] = c.bid;
            prefix.push(c.bid);
        }
        let outcome = self.settle(&bids)?;
        debug_assert_eq!(outcome.winners, root_winners);
        Ok(NybEquilibrium { outcome, path, node_count, nodes, costs: self.inst.costs().to_vec() })
    }

    /// One-shot deviation check of `profile` at every node of the bid grid.
    /// Reports the first violation in post-order.
    pub fn verify_spe(&self, profile: &NybProfile, budget: WorkBudget) -> Result<NybVerdict> {
        if profile.0.len() != self.n() {
            return Err(Error::InvalidStrategy(format!("profile has {} policies for {} sellers", profile.0.len(), self.n())));
        }
        budget.check(self.required_work())?;
        let mut v = Verifier {
            auction: self,
            profile,
            history: Vec::with_capacity(self.n()),
            prices: self.inst.costs().to_vec(),
            witness: None,
            nodes: 0,
        };
        v.visit()?;
        Ok(match v.witness {
            Some(w) => NybVerdict::Witness(w),
            None => NybVerdict::Pass { nodes_checked: v.nodes },
        })
    }
}

struct Solver<'s, 'a> {
    auction: &'s NybAuction<'a>,
    ties: BidTieBreak,
    nodes: HashMap<Vec<Money>, NodeChoice>,
    history: Vec<(SellerId, Money)>,
    prices: Vec<Money>,
    node_count: u64,
}

impl Solver<'_, '_> {
    fn solve(&mut self) -> Result<SellerSubset> {
        let a = self.auction;
        self.node_count += 1;
        if self.history.len() == a.n() {
            return Ok(a.selector.select(&self.prices));
        }
        let k = a.order.next(&self.history, a.n())?;
        let cost = a.inst.cost(k);
        let saved = self.prices[k];
        let mut best: Option<((i64, bool, Money), Money, SellerSubset)> = None;
        for b in 0..=a.cap {
            self.prices[k] = b;
            self.history.push((k, b));
            let w = self.solve()?;
            self.history.pop();
            let wins = w.contains(k);
            let key = preference(if wins { b - cost } else { 0 }, wins, b, self.ties);
            if best.as_ref().is_none_or(|(bk, _, _)| key > *bk) {
                best = Some((key, b, w));
            }
        }
        self.prices[k] = saved;
        let (_, bid, winners) = best.expect("non-empty bid grid");
        let key: Vec<Money> = self.history.iter().map(|&(_, b)| b).collect();
        self.nodes.insert(key, NodeChoice { seller: k, bid, winners });
        Ok(winners)
    }
}

struct Verifier<'s, 'a> {
    auction: &'s NybAuction<'a>,
    profile: &'s NybProfile,
    history: Vec<(SellerId, Money)>,
    prices: Vec<Money>,
    witness: Option<NybWitness>,
    nodes: u64,
}

impl Verifier<'_, '_> {
    /// Winner set reached from the current node when everyone follows the
    /// profile. Stops descending once a witness is known.
    fn visit(&mut self) -> Result<SellerSubset> {
        let a = self.auction;
        self.nodes += 1;
        if self.history.len() == a.n() {
            return Ok(a.selector.select(&self.prices));
        }
        let k = a.order.next(&self.history, a.n())?;
        let cost = a.inst.cost(k);
        let chosen = a.policy_bid(self.profile, k, &self.history)?;
        if chosen > a.cap {
            return Err(Error::InvalidStrategy(format!(
                "seller {k} bids {chosen}, above the bid cap {}",
                a.cap
            )));
        }
        let saved = self.prices[k];
        let mut outcomes = Vec::with_capacity(a.cap as usize + 1);
        for b in 0..=a.cap {
            self.prices[k] = b;
            self.history.push((k, b));
            let w = self.visit()?;
            self.history.pop();
            if self.witness.is_some() {
                self.prices[k] = saved;
                return Ok(w);
            }
            outcomes.push(w);
        }
        self.prices[k] = saved;

        let pref = |b: Money| {
            let wins = outcomes[b as usize].contains(k);
            (if wins { b - cost } else { 0 }, wins)
        };
        let on_path = pref(chosen);
        let best = (0..=a.cap).max_by_key(|&b| (pref(b), b)).expect("non-empty grid");
        if pref(best) > on_path {
            self.witness = Some(NybWitness {
                bids: self.history.iter().map(|&(_, b)| b).collect(),
                seller: k,
                profile_bid: chosen,
                deviation_bid: best,
                utility_gain: pref(best).0 - on_path.0,
                wins_after_deviation: pref(best).1,
            });
        }
        Ok(outcomes[chosen as usize])
    }
}
