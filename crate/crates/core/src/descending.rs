//! The descending auction with BAFO.
//!
//! Every price starts at `h`. While some seller outside the tentative
//! allocation `W(p)` is still unfrozen, the ordering picks one of them and
//! that seller either accepts a one-unit decrease or freezes their price.
//! A price that reaches zero freezes automatically. The buyer then buys
//! `W(p)` at the final prices.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::{anonymous_sizes, check_concave_anonymous, ConcavityCheck};
use crate::config::{pow_sat, WorkBudget};
use crate::error::{Error, Result};
use crate::market::{AuctionOutcome, Instance, WinnerSelector};
use crate::subset::{Money, SellerId, SellerSubset};
use crate::tiebreak::TieBreakRule;

/// A node of the descending game: current offers plus the frozen set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DescState {
    pub prices: Vec<Money>,
    pub frozen: SellerSubset,
}

impl DescState {
    pub fn initial(n: usize, h: Money) -> Self {
        DescState { prices: vec![h; n], frozen: SellerSubset::EMPTY }
    }

    pub fn n(&self) -> usize {
        self.prices.len()
    }

    pub fn is_frozen(&self, i: SellerId) -> bool {
        self.frozen.contains(i)
    }

    /// Prices are non-negative and every zero price is frozen.
    pub fn validate(&self) -> Result<()> {
        for (i, &p) in self.prices.iter().enumerate() {
            if p < 0 {
                return Err(Error::InvalidState(format!("seller {i} has negative price {p}")));
            }
            if p == 0 && !self.frozen.contains(i) {
                return Err(Error::InvalidState(format!("seller {i} is at price 0 but not frozen")));
            }
        }
        if !self.frozen.fits(self.n()) {
            return Err(Error::InvalidState(format!("frozen set {} names unknown sellers", self.frozen)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescAction {
    Accept,
    Freeze,
}

/// What a step did, as recorded in transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescEventKind {
    Accept,
    Freeze,
    AutoFreeze,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescEvent {
    pub step: usize,
    pub seller: SellerId,
    pub action: DescEventKind,
    pub price_after: Money,
}

/// Applies one action by seller `i`.
pub fn step(state: &DescState, i: SellerId, action: DescAction) -> Result<(DescState, DescEventKind)> {
    if i >= state.n() {
        return Err(Error::InvalidState(format!("unknown seller {i}")));
    }
    if state.frozen.contains(i) {
        return Err(Error::FrozenSeller(i));
    }
    let mut next = state.clone();
    let kind = match action {
        DescAction::Freeze => {
            next.frozen = next.frozen.with(i);
            DescEventKind::Freeze
        }
        DescAction::Accept => {
            if next.prices[i] < 1 {
                return Err(Error::AcceptAtZero(i));
            }
            next.prices[i] -= 1;
            if next.prices[i] == 0 {
                next.frozen = next.frozen.with(i);
                DescEventKind::AutoFreeze
            } else {
                DescEventKind::Accept
            }
        }
    };
    Ok((next, kind))
}

type OrderingFn = dyn Fn(&DescState, SellerSubset) -> Option<SellerId> + Send + Sync;

/// Picks the next seller to act from the current state and tentative winners.
#[derive(Clone, Default)]
pub enum DescOrdering {
    #[default]
    LowestEligibleIndex,
    /// First eligible seller in the list; sellers not listed come after, by index.
    FixedPriority(Vec<SellerId>),
    Custom { name: String, rule: Arc<OrderingFn> },
}

impl fmt::Debug for DescOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl DescOrdering {
    pub fn custom(name: impl Into<String>, rule: impl Fn(&DescState, SellerSubset) -> Option<SellerId> + Send + Sync + 'static) -> Self {
        DescOrdering::Custom { name: name.into(), rule: Arc::new(rule) }
    }

    pub fn name(&self) -> String {
        match self {
            DescOrdering::LowestEligibleIndex => "lowest-index".into(),
            DescOrdering::FixedPriority(list) => {
                let ids: Vec<String> = list.iter().map(ToString::to_string).collect();
                format!("priority:{}", ids.join(","))
            }
            DescOrdering::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// Sellers allowed to act: not tentatively winning and not frozen.
    pub fn eligible(state: &DescState, winners: SellerSubset) -> SellerSubset {
        SellerSubset::full(state.n()).intersection(SellerSubset::from_mask(!(winners.union(state.frozen)).mask()))
    }

    /// The next seller to act, or `None` once every non-winner is frozen.
    pub fn next(&self, state: &DescState, winners: SellerSubset) -> Result<Option<SellerId>> {
        let eligible = Self::eligible(state, winners);
        let pick = match self {
            DescOrdering::LowestEligibleIndex => eligible.iter().next(),
            DescOrdering::FixedPriority(list) => {
                list.iter().copied().find(|&i| eligible.contains(i)).or_else(|| eligible.iter().next())
            }
            DescOrdering::Custom { rule, .. } => rule(state, winners),
        };
        match pick {
            Some(i) if !eligible.contains(i) => {
                Err(Error::InvalidOrder(format!("ordering picked seller {i}, who is not eligible")))
            }
            None if !eligible.is_empty() => {
                Err(Error::InvalidOrder("ordering terminated while sellers were still eligible".into()))
            }
            other => Ok(other),
        }
    }
}

type CustomActionFn = dyn Fn(&DescendingAuction, &DescState, SellerId) -> DescAction + Send + Sync;

#[derive(Clone)]
pub enum DescPolicy {
    Canonical,
    AlwaysAccept,
    AlwaysFreeze,
    /// Freeze once the own price is at or below the threshold, accept above it.
    FreezeAtOrBelow(Money),
    Custom(Arc<CustomActionFn>),
}

impl fmt::Debug for DescPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DescPolicy::Canonical => f.write_str("Canonical"),
            DescPolicy::AlwaysAccept => f.write_str("AlwaysAccept"),
            DescPolicy::AlwaysFreeze => f.write_str("AlwaysFreeze"),
            DescPolicy::FreezeAtOrBelow(t) => write!(f, "FreezeAtOrBelow({t})"),
            DescPolicy::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// One policy per seller, indexed by seller id.
#[derive(Debug, Clone)]
pub struct DescProfile(pub Vec<DescPolicy>);

impl DescProfile {
    pub fn uniform(policy: DescPolicy, n: usize) -> Self {
        DescProfile(vec![policy; n])
    }

    pub fn canonical(n: usize) -> Self {
        DescProfile::uniform(DescPolicy::Canonical, n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescRun {
    pub events: Vec<DescEvent>,
    pub final_state: DescState,
    pub outcome: AuctionOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct StateValue {
    action: Option<(SellerId, DescAction)>,
    winners: SellerSubset,
    final_prices: Vec<Money>,
}

/// Exact equilibrium of the descending game, memoized on `(p, F)`.
#[derive(Debug, Clone)]
pub struct DescEquilibrium {
    pub outcome: AuctionOutcome,
    pub path: Vec<DescEvent>,
    pub state_count: u64,
    memo: HashMap<DescState, StateValue>,
    costs: Vec<Money>,
}

impl DescEquilibrium {
    /// Acting seller and their equilibrium action, `None` at terminal or
    /// unvisited states.
    pub fn action_at(&self, s: &DescState) -> Option<(SellerId, DescAction)> {
        self.memo.get(s).and_then(|v| v.action)
    }

    pub fn winners_at(&self, s: &DescState) -> Option<SellerSubset> {
        self.memo.get(s).map(|v| v.winners)
    }

    pub fn final_prices_at(&self, s: &DescState) -> Option<&[Money]> {
        self.memo.get(s).map(|v| v.final_prices.as_slice())
    }

    /// Seller utilities of equilibrium play continued from `s`.
    pub fn payoff_at(&self, s: &DescState) -> Option<Vec<i64>> {
        let v = self.memo.get(s)?;
        Some(
            (0..self.costs.len())
                .map(|i| if v.winners.contains(i) { v.final_prices[i] - self.costs[i] } else { 0 })
                .collect(),
        )
    }

    /// Every state reachable from the root, with its continuation winners.
    pub fn states(&self) -> impl Iterator<Item = (&DescState, SellerSubset)> {
        self.memo.iter().map(|(s, v)| (s, v.winners))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescWitness {
    pub state: DescState,
    pub seller: SellerId,
    pub profile_action: DescAction,
    pub better_action: DescAction,
    pub utility_gain: i64,
    pub wins_after_deviation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum DescVerdict {
    Pass { states_checked: u64 },
    Witness(DescWitness),
}

/// A descending auction with BAFO over one instance.
#[derive(Debug, Clone)]
pub struct DescendingAuction<'a> {
    inst: &'a Instance,
    tiebreak: TieBreakRule,
    ordering: DescOrdering,
    selector: WinnerSelector,
    h: Money,
}

impl<'a> DescendingAuction<'a> {
    /// Uses the default starting price `max(max_Q v(Q), max_i c_i, 1)`.
    pub fn new(inst: &'a Instance, tiebreak: TieBreakRule, ordering: DescOrdering) -> Result<Self> {
        let selector = WinnerSelector::new(inst.valuation(), &tiebreak)?;
        let h = inst.max_value().max(inst.max_cost()).max(1);
        Ok(DescendingAuction { inst, tiebreak, ordering, selector, h })
    }

    pub fn with_h(mut self, h: Money) -> Result<Self> {
        if h < 1 {
            return Err(Error::InvalidInstance(format!("starting price h = {h} must be at least 1")));
        }
        self.h = h;
        Ok(self)
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    pub fn tiebreak(&self) -> &TieBreakRule {
        &self.tiebreak
    }

    pub fn ordering(&self) -> &DescOrdering {
        &self.ordering
    }

    pub fn h(&self) -> Money {
        self.h
    }

    fn n(&self) -> usize {
        self.inst.n()
    }

    pub fn initial_state(&self) -> DescState {
        DescState::initial(self.n(), self.h)
    }

    fn check_state(&self, s: &DescState) -> Result<()> {
        if s.n() != self.n() {
            return Err(Error::InvalidState(format!("state has {} prices, expected {}", s.n(), self.n())));
        }
        s.validate()
    }

    /// Frozen sellers at their prices, everyone else at cost.
    pub fn hat_prices(&self, s: &DescState) -> Vec<Money> {
        (0..self.n()).map(|i| if s.is_frozen(i) { s.prices[i] } else { self.inst.cost(i) }).collect()
    }

    /// Like [`Self::hat_prices`], except that an unfrozen seller already
    /// below cost keeps the current price.
    pub fn effective_prices(&self, s: &DescState) -> Vec<Money> {
        (0..self.n())
            .map(|i| if s.is_frozen(i) { s.prices[i] } else { s.prices[i].min(self.inst.cost(i)) })
            .collect()
    }

    pub fn winners_at_prices(&self, prices: &[Money]) -> SellerSubset {
        self.selector.select(prices)
    }

    /// `W(p)` at the current offers.
    pub fn tentative_winner(&self, s: &DescState) -> SellerSubset {
        self.selector.select(&s.prices)
    }

    pub fn is_terminal(&self, s: &DescState) -> bool {
        DescOrdering::eligible(s, self.tentative_winner(s)).is_empty()
    }

    /// Acting seller at `s`, or `None` if the auction is over.
    pub fn next_seller(&self, s: &DescState) -> Result<Option<SellerId>> {
        self.ordering.next(s, self.tentative_winner(s))
    }

    /// Freeze if already at or below cost, or if still demanded with the
    /// own price frozen; accept if demanded once the own price drops to
    /// cost; freeze otherwise.
    pub fn canonical_action(&self, s: &DescState, i: SellerId) -> Result<DescAction> {
        self.check_state(s)?;
        if i >= self.n() {
            return Err(Error::InvalidState(format!("unknown seller {i}")));
        }
        if s.is_frozen(i) {
            return Err(Error::FrozenSeller(i));
        }
        let cost = self.inst.cost(i);
        let p = s.prices[i];
        if p <= cost {
            return Ok(DescAction::Freeze);
        }
        let mut prices = self.effective_prices(s);
        prices[i] = p;
        if self.selector.select(&prices).contains(i) {
            return Ok(DescAction::Freeze);
        }
        prices[i] = cost;
        if self.selector.select(&prices).contains(i) {
            Ok(DescAction::Accept)
        } else {
            Ok(DescAction::Freeze)
        }
    }

    fn policy_action(&self, profile: &DescProfile, s: &DescState, i: SellerId) -> Result<DescAction> {
        let policy = profile
            .0
            .get(i)
            .ok_or_else(|| Error::InvalidStrategy(format!("no policy for seller {i}")))?;
        Ok(match policy {
            DescPolicy::Canonical => self.canonical_action(s, i)?,
            DescPolicy::AlwaysAccept => DescAction::Accept,
            DescPolicy::AlwaysFreeze => DescAction::Freeze,
            DescPolicy::FreezeAtOrBelow(t) => {
                if s.prices[i] <= *t {
                    DescAction::Freeze
                } else {
                    DescAction::Accept
                }
            }
            DescPolicy::Custom(f) => f(self, s, i),
        })
    }

    fn check_profile(&self, profile: &DescProfile) -> Result<()> {
        if profile.0.len() != self.n() {
            return Err(Error::InvalidStrategy(format!(
                "profile has {} policies for {} sellers",
                profile.0.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// Plays the auction from the initial state.
    pub fn run(&self, profile: &DescProfile) -> Result<DescRun> {
        self.run_from(profile, self.initial_state())
    }

    pub fn run_canonical(&self) -> Result<DescRun> {
        self.run(&DescProfile::canonical(self.n()))
    }

    pub fn run_from(&self, profile: &DescProfile, start: DescState) -> Result<DescRun> {
        self.check_profile(profile)?;
        self.check_state(&start)?;
        let bound = self.n() * (start.prices.iter().copied().max().unwrap_or(0) as usize + 1);
        let mut s = start;
        let mut events = Vec::new();
        while let Some(i) = self.next_seller(&s)? {
            if events.len() >= bound {
                return Err(Error::InvalidState(format!("run exceeded {bound} steps")));
            }
            let action = self.policy_action(profile, &s, i)?;
            let (next, kind) = step(&s, i, action)?;
            events.push(DescEvent { step: events.len(), seller: i, action: kind, price_after: next.prices[i] });
            s = next;
        }
        let outcome = AuctionOutcome::new(self.inst, self.tentative_winner(&s), s.prices.clone());
        Ok(DescRun { events, final_state: s, outcome })
    }

    fn required_work(&self) -> u128 {
        pow_sat(self.h as u128 + 1, self.n()).saturating_mul(1u128 << self.n())
    }

    fn prefers(&self, i: SellerId, v: &StateValue) -> (i64, bool) {
        let wins = v.winners.contains(i);
        (if wins { v.final_prices[i] - self.inst.cost(i) } else { 0 }, wins)
    }

    /// Memoized backward induction over every state reachable from the root.
    /// Sellers rank continuations by utility, then winning, and freeze when
    /// still indifferent.
    pub fn solve_exact(&self, budget: WorkBudget) -> Result<DescEquilibrium> {
        budget.check(self.required_work())?;
        let mut memo = HashMap::new();
        let root = self.initial_state();
        self.solve_state(&root, &mut memo)?;

        let mut path = Vec::new();
        let mut s = root;
        while let Some((i, a)) = memo.get(&s).and_then(|v: &StateValue| v.action) {
            let (next, kind) = step(&s, i, a)?;
            path.push(DescEvent { step: path.len(), seller: i, action: kind, price_after: next.prices[i] });
            s = next;
        }
        let end = &memo[&s];
        let outcome = AuctionOutcome::new(self.inst, end.winners, end.final_prices.clone());
        Ok(DescEquilibrium {
            outcome,
            path,
            state_count: memo.len() as u64,
            memo,
            costs: self.inst.costs().to_vec(),
        })
    }

    fn solve_state(&self, s: &DescState, memo: &mut HashMap<DescState, StateValue>) -> Result<StateValue> {
        if let Some(v) = memo.get(s) {
            return Ok(v.clone());
        }
        let value = match self.next_seller(s)? {
            None => StateValue { action: None, winners: self.tentative_winner(s), final_prices: s.prices.clone() },
            Some(i) => {
                let (frozen, _) = step(s, i, DescAction::Freeze)?;
                let on_freeze = self.solve_state(&frozen, memo)?;
                let (accepted, _) = step(s, i, DescAction::Accept)?;
                let on_accept = self.solve_state(&accepted, memo)?;
                if self.prefers(i, &on_accept) > self.prefers(i, &on_freeze) {
                    StateValue { action: Some((i, DescAction::Accept)), ..on_accept }
                } else {
                    StateValue { action: Some((i, DescAction::Freeze)), ..on_freeze }
                }
            }
        };
        memo.insert(s.clone(), value.clone());
        Ok(value)
    }

    /// One-shot deviation check of `profile` at every state reachable under
    /// any play. Reports the first violation in post-order, trying Accept
    /// before Freeze.
    pub fn verify_spe(&self, profile: &DescProfile, budget: WorkBudget) -> Result<DescVerdict> {
        self.check_profile(profile)?;
        budget.check(self.required_work())?;
        let mut memo = HashMap::new();
        let mut witness = None;
        self.verify_state(profile, &self.initial_state(), &mut memo, &mut witness)?;
        Ok(match witness {
            Some(w) => DescVerdict::Witness(w),
            None => DescVerdict::Pass { states_checked: memo.len() as u64 },
        })
    }

    fn verify_state(
        &self,
        profile: &DescProfile,
        s: &DescState,
        memo: &mut HashMap<DescState, StateValue>,
        witness: &mut Option<DescWitness>,
    ) -> Result<StateValue> {
        if let Some(v) = memo.get(s) {
            return Ok(v.clone());
        }
        let value = match self.next_seller(s)? {
            None => StateValue { action: None, winners: self.tentative_winner(s), final_prices: s.prices.clone() },
            Some(i) => {
                let (accepted, _) = step(s, i, DescAction::Accept)?;
                let on_accept = self.verify_state(profile, &accepted, memo, witness)?;
                if witness.is_some() {
                    return Ok(on_accept);
                }
                let (frozen, _) = step(s, i, DescAction::Freeze)?;
                let on_freeze = self.verify_state(profile, &frozen, memo, witness)?;
                if witness.is_some() {
                    return Ok(on_freeze);
                }
                let chosen = self.policy_action(profile, s, i)?;
                let (taken, other, other_action) = match chosen {
                    DescAction::Accept => (on_accept, on_freeze, DescAction::Freeze),
                    DescAction::Freeze => (on_freeze, on_accept, DescAction::Accept),
                };
                let (got, alt) = (self.prefers(i, &taken), self.prefers(i, &other));
                if alt > got {
                    *witness = Some(DescWitness {
                        state: s.clone(),
                        seller: i,
                        profile_action: chosen,
                        better_action: other_action,
                        utility_gain: alt.0 - got.0,
                        wins_after_deviation: alt.1,
                    });
                }
                StateValue { action: Some((i, chosen)), ..taken }
            }
        };
        memo.insert(s.clone(), value.clone());
        Ok(value)
    }
}

/// Closed-form outcome for anonymous, weakly concave valuations: the
/// cheapest sellers whose marginal covers their cost win, all at the
/// marginal value of one more seller.
///
/// When every seller wins there is no next marginal; the last one,
/// `v(n) - v(n-1)`, is used instead.
pub fn concave_threshold_outcome(inst: &Instance) -> Result<AuctionOutcome> {
    let sizes = anonymous_sizes(inst.valuation())?;
    if let ConcavityCheck::IncreasesAt { k } = check_concave_anonymous(inst.valuation())? {
        return Err(Error::NotConcave { k });
    }
    let n = inst.n();
    let marginal = |k: usize| sizes[k] - sizes[k - 1];
    let mut by_cost: Vec<SellerId> = (0..n).collect();
    by_cost.sort_by_key(|&i| (inst.cost(i), i));
    let k = by_cost
        .iter()
        .enumerate()
        .take_while(|&(j, &i)| marginal(j + 1) >= inst.cost(i))
        .count();
    let winners: SellerSubset = by_cost[..k].iter().copied().collect();
    let price = if k < n { marginal(k + 1) } else { marginal(n) };
    let final_prices = (0..n).map(|i| if winners.contains(i) { price } else { inst.cost(i) }).collect();
    Ok(AuctionOutcome::new(inst, winners, final_prices))
}
