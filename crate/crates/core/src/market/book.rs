use std::collections::BTreeMap;

use super::{AgentId, Offer, Participant, Period, Side};
use crate::error::{Error, Result};

/// Active offers keyed by agent id.
#[derive(Clone, Debug, Default)]
pub struct OrderBook {
    offers: BTreeMap<AgentId, Offer>,
}

impl OrderBook {
    pub fn new() -> OrderBook {
        OrderBook::default()
    }

    pub fn insert(&mut self, offer: Offer) -> Result<()> {
        let id = offer.id();
        if self.offers.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.offers.insert(id, offer);
        Ok(())
    }

    pub fn remove(&mut self, id: AgentId) -> Result<Offer> {
        self.offers.remove(&id).ok_or(Error::UnknownAgent(id))
    }

    pub fn get(&self, id: AgentId) -> Option<&Offer> {
        self.offers.get(&id)
    }

    pub fn contains(&self, id: AgentId) -> bool {
        self.offers.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.offers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Offer> {
        self.offers.values()
    }

    pub fn ids(&self) -> Vec<AgentId> {
        self.offers.keys().copied().collect()
    }

    pub fn side(&self, side: Side) -> Vec<Participant> {
        self.offers
            .values()
            .filter(|o| o.report.side == side)
            .map(|o| Participant::from(&o.report))
            .collect()
    }

    pub fn bids(&self) -> Vec<Participant> {
        self.side(Side::Buyer)
    }

    pub fn asks(&self) -> Vec<Participant> {
        self.side(Side::Seller)
    }

    /// Offers whose reported departure is `t`.
    pub fn departing(&self, t: Period) -> Vec<AgentId> {
        self.offers.values().filter(|o| o.report.departure == t).map(Offer::id).collect()
    }
}
