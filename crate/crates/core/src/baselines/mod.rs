//! Reference mechanisms: the greedy and offline optimal matchings, the
//! randomized fixed-price rule, a naive dynamic trade-reduction auction and
//! adaptive ZIP-style traders.

pub mod blum;
pub mod greedy;
pub mod naive;
pub mod offline;
pub mod zip;

use crate::market::{AgentId, Money, Period};

/// A trade settled in the period it happens.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trade {
    pub period: Period,
    pub buyer: AgentId,
    pub seller: AgentId,
    pub buyer_payment: Money,
    /// Signed: negative when the seller receives money.
    pub seller_payment: Money,
}
