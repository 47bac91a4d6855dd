//! Agents, offers, the order book, the history of departed offers and the
//! keyed random source shared by every mechanism.

mod book;
mod history;
mod random;
pub mod schedule;

pub use book::OrderBook;
pub use history::{ExitReason, History, HistoryEntry};
pub use random::{Omega, Purpose, RandomSource};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete time period. The first period is 1.
pub type Period = u32;

/// Currency amount. Payments are signed: buyers pay a positive amount, sellers
/// "pay" a negative amount, i.e. they receive its magnitude.
pub type Money = f64;

/// Equality tolerance for currency comparisons.
pub const TOLERANCE: Money = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buyer,
    Seller,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buyer => Side::Seller,
            Side::Seller => Side::Buyer,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buyer => "buyer",
            Side::Seller => "seller",
        }
    }

    /// Most competitive value an offer on this side can report.
    pub fn top_value(self) -> Money {
        match self {
            Side::Buyer => Money::INFINITY,
            Side::Seller => 0.0,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Side> {
        match s.trim().to_ascii_lowercase().as_str() {
            "buyer" | "bid" | "b" => Ok(Side::Buyer),
            "seller" | "ask" | "s" => Ok(Side::Seller),
            other => Err(Error::Config(format!("unknown side {other:?}"))),
        }
    }
}

/// Private type of an agent: presence window and signed value.
///
/// Buyers have `value > 0`; sellers have `value <= 0`, the negated cost of
/// the item they hold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentType {
    pub id: AgentId,
    pub side: Side,
    pub arrival: Period,
    pub departure: Period,
    pub value: Money,
}

impl AgentType {
    pub fn buyer(id: u32, arrival: Period, departure: Period, value: Money) -> AgentType {
        AgentType { id: AgentId(id), side: Side::Buyer, arrival, departure, value }
    }

    pub fn seller(id: u32, arrival: Period, departure: Period, value: Money) -> AgentType {
        AgentType { id: AgentId(id), side: Side::Seller, arrival, departure, value }
    }

    pub fn patience(&self) -> Period {
        self.departure.saturating_sub(self.arrival)
    }

    pub fn is_present(&self, t: Period) -> bool {
        self.arrival <= t && t <= self.departure
    }

    pub fn validate(&self, k: Period) -> Result<()> {
        if self.arrival < 1 {
            return Err(Error::ArrivalBeforeStart { id: self.id });
        }
        if self.arrival > self.departure {
            return Err(Error::ArrivalAfterDeparture {
                id: self.id,
                arrival: self.arrival,
                departure: self.departure,
            });
        }
        if self.patience() > k {
            return Err(Error::PatienceExceeded { id: self.id, patience: self.patience(), k });
        }
        let sign_ok = match self.side {
            Side::Buyer => self.value > 0.0,
            Side::Seller => self.value <= 0.0,
        };
        if !sign_ok || self.value.is_nan() {
            return Err(Error::ValueSign { id: self.id, value: self.value });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OfferState {
    Active,
    Matched,
    PricedOut,
    Expired,
}

impl OfferState {
    pub fn as_str(self) -> &'static str {
        match self {
            OfferState::Active => "active",
            OfferState::Matched => "matched",
            OfferState::PricedOut => "priced_out",
            OfferState::Expired => "expired",
        }
    }
}

/// An agent's reported type plus its lifecycle inside a mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct Offer {
    pub report: AgentType,
    pub state: OfferState,
    /// Lower bound on the final payment; `-inf` when unconstrained.
    pub admission_price: Money,
    pub match_period: Option<Period>,
    pub payment: Option<Money>,
}

impl Offer {
    pub fn new(report: AgentType, admission_price: Money) -> Offer {
        Offer { report, state: OfferState::Active, admission_price, match_period: None, payment: None }
    }

    pub fn id(&self) -> AgentId {
        self.report.id
    }

    /// Period at which goods or cash owed to this agent are released.
    pub fn settlement_period(&self) -> Period {
        self.report.departure
    }

    fn leave(&mut self, next: OfferState) -> Result<()> {
        if self.state != OfferState::Active {
            return Err(Error::NotActive { id: self.id(), state: self.state.as_str() });
        }
        self.state = next;
        Ok(())
    }

    pub fn mark_matched(&mut self, period: Period, payment: Money) -> Result<()> {
        self.leave(OfferState::Matched)?;
        self.match_period = Some(period);
        self.payment = Some(payment);
        Ok(())
    }

    pub fn mark_priced_out(&mut self) -> Result<()> {
        self.leave(OfferState::PricedOut)
    }

    pub fn mark_expired(&mut self) -> Result<()> {
        self.leave(OfferState::Expired)
    }
}

/// The view of an active offer that single-period rules operate on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Participant {
    pub id: AgentId,
    pub value: Money,
    pub departure: Period,
}

impl Participant {
    pub fn new(id: u32, value: Money, departure: Period) -> Participant {
        Participant { id: AgentId(id), value, departure }
    }
}

impl From<&AgentType> for Participant {
    fn from(a: &AgentType) -> Participant {
        Participant { id: a.id, value: a.value, departure: a.departure }
    }
}
