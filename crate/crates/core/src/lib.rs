//! Procurement auctions with best-and-final offers.
//!
//! Two formats are modelled as finite extensive-form games over integer
//! money: the sequential Name-Your-BAFO auction ([`nyb`]) and the descending
//! auction with BAFO ([`descending`]). Both come with canonical strategies,
//! exact subgame perfect equilibrium solvers and one-shot deviation
//! verifiers that run exhaustively on small instances.

pub mod classes;
pub mod config;
pub mod descending;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod io;
pub mod market;
pub mod nyb;
pub mod random;
pub mod report;
pub mod strategy;
pub mod subset;
pub mod tiebreak;
pub mod valuation;

pub use config::WorkBudget;
pub use error::{Error, Result};
pub use market::{AuctionOutcome, Instance, WinnerSelector};
pub use subset::{Money, SellerId, SellerSubset, MAX_SELLERS};
pub use tiebreak::TieBreakRule;
pub use valuation::Valuation;
