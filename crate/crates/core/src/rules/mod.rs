//! Single-period matching rules.
//!
//! Every rule maps the active bids and asks of one period (plus, for the
//! history-aware rules, a price or an augmentation set) to a [`Clearing`]:
//! the matched pairs, the payments, the no-trade set and the strong no-trade
//! subset whose members may survive into the next period.

mod critical;
pub mod mcafee;
pub mod price;
pub mod price_match;
pub mod simple;
pub mod trade_reduction;
pub mod windowed;

pub use critical::critical_price;
pub use price::{PriceTracker, PriceVariant};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{AgentId, Money, Omega, Participant, Side, TOLERANCE};

/// Most competitive ask used when probing whether a seller could ever trade.
pub const EPSILON_ASK: Money = 10.0 * TOLERANCE;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Clearing {
    /// (buyer, seller) pairs.
    pub pairs: Vec<(AgentId, AgentId)>,
    /// Signed payment of every winner.
    pub payments: BTreeMap<AgentId, Money>,
    /// Losers that could not have traded whatever value they reported.
    pub nt: BTreeSet<AgentId>,
    /// Subset of `nt` allowed to stay in the market.
    pub snt: BTreeSet<AgentId>,
    /// Buy-side and sell-side prices, when the rule defines them.
    pub prices: Option<(Money, Money)>,
}

impl Clearing {
    pub fn is_winner(&self, id: AgentId) -> bool {
        self.payments.contains_key(&id)
    }

    pub fn payment(&self, id: AgentId) -> Option<Money> {
        self.payments.get(&id).copied()
    }

    pub fn n_trades(&self) -> usize {
        self.pairs.len()
    }

    /// Sum of payments; non-negative for budget-balanced rules.
    pub fn revenue(&self) -> Money {
        self.payments.values().sum()
    }
}

/// Single-period rule used inside the dynamic mechanism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    TradeReduction,
    McAfee,
    Simple,
    PriceBased { variant: PriceVariant },
    WindowedMcAfee { window: usize },
    ActiveMcAfee,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::TradeReduction => "tr_da",
            Rule::McAfee => "mcafee",
            Rule::Simple => "simple",
            Rule::PriceBased { variant } => variant.name(),
            Rule::WindowedMcAfee { .. } => "windowed_mcafee",
            Rule::ActiveMcAfee => "active_mcafee",
        }
    }

    pub fn is_price_based(&self) -> bool {
        matches!(self, Rule::PriceBased { .. } | Rule::Simple)
    }

    /// Build a rule from its name and the parameters that apply to it.
    pub fn from_name(name: &str, params: &RuleParams) -> Result<Rule> {
        Ok(match name {
            "tr_da" => Rule::TradeReduction,
            "mcafee" => Rule::McAfee,
            "simple" => Rule::Simple,
            "windowed_mcafee" => Rule::WindowedMcAfee { window: params.mcafee_window },
            "active_mcafee" => Rule::ActiveMcAfee,
            "ewma" => Rule::PriceBased { variant: PriceVariant::Ewma { lambda: params.lambda } },
            "median" => Rule::PriceBased { variant: PriceVariant::Median { window: params.window } },
            "clearing" => Rule::PriceBased { variant: PriceVariant::Clearing { window: params.window } },
            "history_mcafee" => {
                Rule::PriceBased { variant: PriceVariant::HistoryMcAfee { window: params.window } }
            }
            "fixed" => Rule::PriceBased { variant: PriceVariant::Fixed { price: params.fixed_price } },
            other => return Err(Error::Config(format!("unknown rule {other:?}"))),
        })
    }
}

/// Tunable parameters shared by the rule family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleParams {
    pub lambda: f64,
    /// History entries seen by the median, clearing and history McAfee prices.
    pub window: usize,
    /// History entries added to the active offers by windowed McAfee.
    pub mcafee_window: usize,
    pub fixed_price: Money,
}

impl Default for RuleParams {
    fn default() -> RuleParams {
        RuleParams { lambda: 0.05, window: 150, mcafee_window: 0, fixed_price: 100.0 }
    }
}

pub const RULE_NAMES: [&str; 10] = [
    "tr_da",
    "mcafee",
    "simple",
    "ewma",
    "median",
    "clearing",
    "history_mcafee",
    "fixed",
    "windowed_mcafee",
    "active_mcafee",
];

/// Period-specific input beyond the active offers.
#[derive(Clone, Debug, PartialEq)]
pub enum Context {
    None,
    Price(Money),
    Augmented { bids: Vec<Participant>, asks: Vec<Participant> },
}

/// Run `rule` on one period.
pub fn clear(rule: &Rule, ctx: &Context, bids: &[Participant], asks: &[Participant], omega: Omega) -> Clearing {
    match (rule, ctx) {
        (Rule::TradeReduction, _) => trade_reduction::clear(bids, asks, omega),
        (Rule::McAfee, _) => mcafee::clear(bids, asks, omega),
        (Rule::Simple, Context::Price(p)) => simple::clear(*p, bids, asks, omega),
        (Rule::PriceBased { .. }, Context::Price(p)) => price_match::clear(*p, bids, asks, omega).clearing,
        (Rule::WindowedMcAfee { .. } | Rule::ActiveMcAfee, Context::Augmented { bids: hb, asks: ha }) => {
            windowed::clear(hb, ha, bids, asks, omega)
        }
        (Rule::WindowedMcAfee { .. } | Rule::ActiveMcAfee, _) => windowed::clear(&[], &[], bids, asks, omega),
        (Rule::Simple | Rule::PriceBased { .. }, _) => {
            panic!("price-based rule {} run without a price", rule.name())
        }
    }
}

/// Sort by value, most competitive first, ties by rank.
pub(crate) fn sort_desc(side: &[Participant], omega: Omega) -> Vec<Participant> {
    let mut v = side.to_vec();
    v.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| omega.rank(a.id).cmp(&omega.rank(b.id)))
    });
    v
}

/// Sort by rank only.
pub(crate) fn sort_by_rank(side: &[Participant], omega: Omega) -> Vec<Participant> {
    let mut v = side.to_vec();
    v.sort_by_key(|p| omega.rank(p.id));
    v
}

pub(crate) fn ids(side: &[Participant]) -> impl Iterator<Item = AgentId> + '_ {
    side.iter().map(|p| p.id)
}

/// Replace `id`'s value by the most competitive one on its side.
pub(crate) fn with_top_value(side: &[Participant], id: AgentId, top: Money) -> Vec<Participant> {
    side.iter().map(|p| if p.id == id { Participant { value: top, ..*p } } else { *p }).collect()
}

/// Losers that still lose when their value is replaced by the most
/// competitive one, as judged by `wins`.
pub(crate) fn no_trade_by_replacement<F>(
    bids: &[Participant],
    asks: &[Participant],
    winners: &BTreeMap<AgentId, Money>,
    wins: F,
) -> BTreeSet<AgentId>
where
    F: Fn(&[Participant], &[Participant], AgentId) -> bool,
{
    let mut nt = BTreeSet::new();
    for b in bids.iter().filter(|b| !winners.contains_key(&b.id)) {
        if !wins(&with_top_value(bids, b.id, Money::INFINITY), asks, b.id) {
            nt.insert(b.id);
        }
    }
    for s in asks.iter().filter(|s| !winners.contains_key(&s.id)) {
        if !wins(bids, &with_top_value(asks, s.id, EPSILON_ASK), s.id) {
            nt.insert(s.id);
        }
    }
    nt
}

/// Participants with consecutive ids starting at `first`, all departing at
/// `departure`.
pub fn participants(values: &[Money], first: u32, departure: u32) -> Vec<Participant> {
    values.iter().enumerate().map(|(i, v)| Participant::new(first + i as u32, *v, departure)).collect()
}

pub(crate) fn side_of(id: AgentId, bids: &[Participant]) -> Side {
    if bids.iter().any(|b| b.id == id) {
        Side::Buyer
    } else {
        Side::Seller
    }
}
