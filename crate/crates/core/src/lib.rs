//! Truthful dynamic double auctions.
//!
//! Agents arrive over discrete periods with a private value and a window of
//! presence. A single-period matching rule is lifted into a dynamic mechanism
//! by [`chain`], which prices each agent by the worst counterfactual it could
//! have faced in earlier periods and keeps only "strong no-trade" losers alive.

pub mod baselines;
pub mod chain;
pub mod error;
pub mod market;
pub mod rules;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use market::{AgentId, AgentType, Money, Period, Side, TOLERANCE};
