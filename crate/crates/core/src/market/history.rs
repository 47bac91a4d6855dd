use std::collections::BTreeSet;

use super::{AgentId, Money, Participant, Period, Side};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitReason {
    Traded,
    Expired,
    PricedOut,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryEntry {
    pub id: AgentId,
    pub side: Side,
    /// Signed reported value.
    pub value: Money,
    pub departure: Period,
    /// Period in which the offer left the market.
    pub period: Period,
    pub reason: ExitReason,
}

impl HistoryEntry {
    pub fn participant(&self) -> Participant {
        Participant { id: self.id, value: self.value, departure: self.departure }
    }
}

/// Offers that are no longer active, in the order they left.
#[derive(Clone, Debug, Default)]
pub struct History {
    entries: Vec<HistoryEntry>,
    seen: BTreeSet<AgentId>,
}

impl History {
    pub fn new() -> History {
        History::default()
    }

    pub fn append(&mut self, entry: HistoryEntry) -> Result<()> {
        if !self.seen.insert(entry.id) {
            return Err(Error::DuplicateId(entry.id));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    /// The most recent `n` entries.
    pub fn window(&self, n: usize) -> &[HistoryEntry] {
        &self.entries[self.entries.len().saturating_sub(n)..]
    }

    /// Entries appended at or after position `cursor`.
    pub fn since(&self, cursor: usize) -> &[HistoryEntry] {
        &self.entries[cursor.min(self.entries.len())..]
    }

    /// Traded or priced-out offers whose reported departure is not before `t`.
    pub fn unexpired(&self, t: Period) -> impl Iterator<Item = &HistoryEntry> {
        self.entries
            .iter()
            .filter(move |e| e.departure >= t && e.reason != ExitReason::Expired)
    }

    pub fn mean_abs_value(&self) -> Option<Money> {
        if self.entries.is_empty() {
            return None;
        }
        Some(self.entries.iter().map(|e| e.value.abs()).sum::<Money>() / self.entries.len() as Money)
    }
}
