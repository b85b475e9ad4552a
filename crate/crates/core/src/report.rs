//! Machine-readable transcripts and reports, and transcript replay.

use serde::{Deserialize, Serialize};

use crate::descending::{step, DescAction, DescEvent, DescEventKind, DescState, DescendingAuction};
use crate::error::{Error, Result};
use crate::io::{instance_hash, FORMAT_VERSION};
use crate::market::{AuctionOutcome, Instance};
use crate::nyb::{NybAuction, NybEvent};
use crate::subset::{Money, SellerSubset};
use crate::tiebreak::TieBreakRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuctionFormat {
    Nyb,
    Descending,
}

impl AuctionFormat {
    pub fn name(self) -> &'static str {
        match self {
            AuctionFormat::Nyb => "nyb",
            AuctionFormat::Descending => "descending",
        }
    }
}

/// Provenance shared by every report: enough to rerun it bit for bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub format: AuctionFormat,
    pub version: u32,
    pub engine: String,
    pub instance_hash: String,
    pub tiebreak: String,
    pub ordering: String,
    pub seed: Option<u64>,
    /// Bid cap `B` for Name-Your-BAFO, starting price `h` for descending.
    pub price_bound: Money,
}

impl ReportHeader {
    pub fn nyb(a: &NybAuction, seed: Option<u64>) -> Self {
        Self::build(AuctionFormat::Nyb, a.instance(), a.tiebreak(), a.order().name(), seed, a.bid_cap())
    }

    pub fn descending(a: &DescendingAuction, seed: Option<u64>) -> Self {
        Self::build(AuctionFormat::Descending, a.instance(), a.tiebreak(), a.ordering().name(), seed, a.h())
    }

    fn build(
        format: AuctionFormat,
        inst: &Instance,
        tiebreak: &TieBreakRule,
        ordering: String,
        seed: Option<u64>,
        price_bound: Money,
    ) -> Self {
        ReportHeader {
            format,
            version: FORMAT_VERSION,
            engine: concat!("bafo ", env!("CARGO_PKG_VERSION")).to_string(),
            instance_hash: instance_hash(inst, tiebreak),
            tiebreak: tiebreak.name().to_string(),
            ordering,
            seed,
            price_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Events {
    Nyb(Vec<NybEvent>),
    Descending(Vec<DescEvent>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub events: Events,
    pub outcome: AuctionOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub spe_winners: SellerSubset,
    pub spe_prices: Vec<Money>,
    pub payments: Vec<Money>,
    pub buyer_cost: Money,
    pub welfare: i64,
    pub node_count: u64,
    pub path: Events,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u128>,
}

impl SolveReport {
    pub fn new(header: ReportHeader, outcome: &AuctionOutcome, node_count: u64, path: Events) -> Self {
        SolveReport {
            header,
            spe_winners: outcome.winners,
            spe_prices: outcome.final_prices.clone(),
            payments: outcome.payments.clone(),
            buyer_cost: outcome.buyer_cost,
            welfare: outcome.welfare,
            node_count,
            path,
            runtime_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport<V> {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub verdict: V,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

/// Replays a transcript against an instance and returns the outcome the
/// events imply; errors if any event breaks the auction rules or the
/// transcript does not belong to this instance.
pub fn replay(inst: &Instance, tiebreak: &TieBreakRule, t: &Transcript) -> Result<AuctionOutcome> {
    let hash = instance_hash(inst, tiebreak);
    if t.header.instance_hash != hash {
        return Err(Error::InvalidState("transcript belongs to a different instance".into()));
    }
    match (&t.events, t.header.format) {
        (Events::Nyb(events), AuctionFormat::Nyb) => replay_nyb(inst, tiebreak, events),
        (Events::Descending(events), AuctionFormat::Descending) => {
            replay_descending(inst, tiebreak, t.header.price_bound, events)
        }
        // an empty event list parses as the first untagged variant
        (Events::Nyb(events), AuctionFormat::Descending) if events.is_empty() => {
            replay_descending(inst, tiebreak, t.header.price_bound, &[])
        }
        _ => Err(Error::InvalidState("event kind does not match the transcript format".into())),
    }
}

pub fn replay_nyb(inst: &Instance, tiebreak: &TieBreakRule, events: &[NybEvent]) -> Result<AuctionOutcome> {
    let n = inst.n();
    if events.len() != n {
        return Err(Error::InvalidState(format!("{} bids for {n} sellers", events.len())));
    }
    let mut bids: Vec<Option<Money>> = vec![None; n];
    for (k, e) in events.iter().enumerate() {
        if e.step != k || e.seller >= n || bids[e.seller].is_some() || e.bid < 0 {
            return Err(Error::InvalidState(format!("bad bid event {e:?}")));
        }
        bids[e.seller] = Some(e.bid);
    }
    let bids: Vec<Money> = bids.into_iter().map(|b| b.expect("every seller bid")).collect();
    let a = NybAuction::new(inst, tiebreak.clone(), crate::nyb::NybOrder::identity(n))?;
    a.settle(&bids)
}

pub fn replay_descending(inst: &Instance, tiebreak: &TieBreakRule, h: Money, events: &[DescEvent]) -> Result<AuctionOutcome> {
    let a = DescendingAuction::new(inst, tiebreak.clone(), Default::default())?.with_h(h)?;
    let mut s = DescState::initial(inst.n(), h);
    for (k, e) in events.iter().enumerate() {
        if e.step != k {
            return Err(Error::InvalidState(format!("event {k} has step {}", e.step)));
        }
        let eligible = crate::descending::DescOrdering::eligible(&s, a.tentative_winner(&s));
        if e.seller >= inst.n() || !eligible.contains(e.seller) {
            return Err(Error::InvalidState(format!("seller {} may not act at step {k}", e.seller)));
        }
        let action = match e.action {
            DescEventKind::Freeze => DescAction::Freeze,
            DescEventKind::Accept | DescEventKind::AutoFreeze => DescAction::Accept,
        };
        let (next, kind) = step(&s, e.seller, action)?;
        if kind != e.action || next.prices[e.seller] != e.price_after {
            return Err(Error::InvalidState(format!("event {k} does not follow from the rules")));
        }
        s = next;
    }
    if !a.is_terminal(&s) {
        return Err(Error::InvalidState("transcript stops before the auction ends".into()));
    }
    Ok(AuctionOutcome::new(inst, a.tentative_winner(&s), s.prices))
}
