use std::fmt;

use crate::market::{AgentId, Money, Period};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Event {
    Admitted { id: AgentId, admission_price: Money },
    Rejected { id: AgentId, admission_price: Money },
    /// Buy-side and sell-side price of the period (`inf` when an extra offer
    /// could not trade, `-inf` when it would have survived).
    Price { buy: Money, sell: Money },
    Matched { buyer: AgentId, seller: AgentId },
    Charged { id: AgentId, payment: Money },
    PricedOut { id: AgentId },
    Expired { id: AgentId },
    Survived { id: AgentId },
    /// Payment collected from a buyer.
    CashIn { id: AgentId, amount: Money },
    /// Payment released to a seller.
    CashOut { id: AgentId, amount: Money },
    /// Good collected from a seller.
    ItemIn { id: AgentId },
    /// Good released to a buyer.
    ItemOut { id: AgentId },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoggedEvent {
    pub period: Period,
    pub event: Event,
}

impl fmt::Display for LoggedEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.period)?;
        match self.event {
            Event::Admitted { id, admission_price } => write!(f, "admit {id} q={admission_price}"),
            Event::Rejected { id, admission_price } => write!(f, "reject {id} q={admission_price}"),
            Event::Price { buy, sell } => write!(f, "price buy={buy} sell={sell}"),
            Event::Matched { buyer, seller } => write!(f, "match {buyer} {seller}"),
            Event::Charged { id, payment } => write!(f, "charge {id} {payment}"),
            Event::PricedOut { id } => write!(f, "priced_out {id}"),
            Event::Expired { id } => write!(f, "expire {id}"),
            Event::Survived { id } => write!(f, "survive {id}"),
            Event::CashIn { id, amount } => write!(f, "cash_in {id} {amount}"),
            Event::CashOut { id, amount } => write!(f, "cash_out {id} {amount}"),
            Event::ItemIn { id } => write!(f, "item_in {id}"),
            Event::ItemOut { id } => write!(f, "item_out {id}"),
        }
    }
}
