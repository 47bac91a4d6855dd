//! The dynamic mechanism.
//!
//! Each period: arriving agents are admitted if their value meets the
//! admission price, the worst price they would have faced had they arrived in
//! any earlier clearing period of their window. The single-period rule then
//! clears the active offers; winners pay the larger of the admission price and
//! the rule's price, strong no-trade losers stay, all other losers are priced
//! out. Goods and cash owed to matched agents are held until the agent's
//! reported departure.

mod events;
pub mod worked;

pub use events::{Event, LoggedEvent};

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{
    AgentId, AgentType, ExitReason, History, HistoryEntry, Money, Offer, OfferState, OrderBook, Participant,
    Period, Purpose, RandomSource, Side,
};
use crate::rules::price_match::{self, examination_probability};
use crate::rules::{self, Clearing, Context, PriceTracker, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    /// Goods and cash are released at the reported departure.
    Relaxed,
    /// Everything settles in the matching period.
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissionMode {
    /// Rerun the recorded period with the arriving agent inserted.
    Replay,
    /// For posted-price rules: price the agent with the probability that it
    /// would have been examined, drawn from a per-agent coin.
    Coin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub rule: Rule,
    /// Maximal patience `d - a`.
    pub k: Period,
    /// Clearing happens in periods divisible by `tau`.
    pub tau: Period,
    pub feasibility: Feasibility,
    pub admission: AdmissionMode,
    /// Starting point of history-derived prices.
    pub initial_price: Money,
}

impl ChainConfig {
    pub fn new(rule: Rule, k: Period) -> ChainConfig {
        ChainConfig {
            rule,
            k,
            tau: 1,
            feasibility: Feasibility::Relaxed,
            admission: AdmissionMode::Replay,
            initial_price: 100.0,
        }
    }

    pub fn is_clearing_period(&self, t: Period) -> bool {
        t % self.tau.max(1) == 0
    }
}

/// What an agent would have faced in an earlier period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Counterfactual {
    /// Would have stayed in the strong no-trade set; imposes nothing.
    Survives,
    /// Would have traded at this signed price.
    Price(Money),
    /// Would have lost and left; cannot be admitted.
    Excluded,
}

impl Counterfactual {
    fn bound(self) -> Money {
        match self {
            Counterfactual::Survives => Money::NEG_INFINITY,
            Counterfactual::Price(p) => p,
            Counterfactual::Excluded => Money::INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
struct Snapshot {
    period: Period,
    bids: Vec<Participant>,
    asks: Vec<Participant>,
    ctx: Context,
    matched: Option<price_match::MatchResult>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriceRecord {
    pub period: Period,
    pub buy: Counterfactual,
    pub sell: Counterfactual,
}

#[derive(Clone, Debug)]
pub struct ChainState {
    config: ChainConfig,
    source: RandomSource,
    period: Period,
    book: OrderBook,
    history: History,
    tracker: Option<PriceTracker>,
    snapshots: VecDeque<Snapshot>,
    done: BTreeMap<AgentId, Offer>,
    escrow: Vec<(Period, Event)>,
    events: Vec<LoggedEvent>,
    prices: Vec<PriceRecord>,
}

/// Everything a finished run produced.
#[derive(Clone, Debug)]
pub struct ChainOutcome {
    pub offers: BTreeMap<AgentId, Offer>,
    pub events: Vec<LoggedEvent>,
    pub prices: Vec<PriceRecord>,
    pub pairs: Vec<(Period, AgentId, AgentId)>,
}

impl ChainOutcome {
    pub fn offer(&self, id: AgentId) -> Option<&Offer> {
        self.offers.get(&id)
    }

    /// Period at which a matched agent receives the good or the cash.
    pub fn settlement(&self, id: AgentId, feasibility: Feasibility) -> Option<Period> {
        let o = self.offers.get(&id)?;
        let t = o.match_period?;
        Some(match feasibility {
            Feasibility::Relaxed => o.settlement_period(),
            Feasibility::Strong => t,
        })
    }
}

impl ChainState {
    pub fn new(config: ChainConfig, source: RandomSource) -> ChainState {
        let tracker = match &config.rule {
            Rule::PriceBased { variant } => Some(PriceTracker::new(variant.clone(), config.initial_price)),
            _ => None,
        };
        ChainState {
            config,
            source,
            period: 0,
            book: OrderBook::new(),
            history: History::new(),
            tracker,
            snapshots: VecDeque::new(),
            done: BTreeMap::new(),
            escrow: Vec::new(),
            events: Vec::new(),
            prices: Vec::new(),
        }
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn events(&self) -> &[LoggedEvent] {
        &self.events
    }

    pub fn price_log(&self) -> &[PriceRecord] {
        &self.prices
    }

    fn log(&mut self, event: Event) {
        self.events.push(LoggedEvent { period: self.period, event });
    }

    /// Open period `t`. Periods must increase.
    pub fn begin_period(&mut self, t: Period) -> Result<()> {
        if t <= self.period {
            return Err(Error::NonMonotonePeriod { current: self.period, next: t });
        }
        self.period = t;
        Ok(())
    }

    /// What `agent` would have faced had it arrived in clearing period `t`.
    pub fn counterfactual(&self, t: Period, agent: &AgentType) -> Counterfactual {
        match self.snapshots.iter().find(|s| s.period == t) {
            Some(snap) => self.counterfactual_in(snap, agent),
            None => Counterfactual::Survives,
        }
    }

    fn counterfactual_in(&self, snap: &Snapshot, agent: &AgentType) -> Counterfactual {
        let omega = self.source.omega(snap.period);
        if let (AdmissionMode::Coin, Some(result), Context::Price(p)) =
            (self.config.admission, &snap.matched, &snap.ctx)
        {
            let (own, other) = match agent.side {
                Side::Buyer => (&snap.bids, &snap.asks),
                Side::Seller => (&snap.asks, &snap.bids),
            };
            let rho = examination_probability(own, other, result, snap.period);
            let u = self.source.agent_uniform(snap.period, Purpose::AdmissionCoin, agent.id);
            return if u < rho {
                Counterfactual::Price(match agent.side {
                    Side::Buyer => *p,
                    Side::Seller => -*p,
                })
            } else {
                Counterfactual::Survives
            };
        }
        let probe = Participant { id: agent.id, value: agent.side.top_value(), departure: agent.departure };
        let c = match agent.side {
            Side::Buyer => {
                let mut bids = snap.bids.clone();
                bids.push(probe);
                rules::clear(&self.config.rule, &snap.ctx, &bids, &snap.asks, omega)
            }
            Side::Seller => {
                let mut asks = snap.asks.clone();
                asks.push(probe);
                rules::clear(&self.config.rule, &snap.ctx, &snap.bids, &asks, omega)
            }
        };
        if let Some(x) = c.payment(agent.id) {
            Counterfactual::Price(x)
        } else if c.snt.contains(&agent.id) {
            Counterfactual::Survives
        } else {
            Counterfactual::Excluded
        }
    }

    /// Admission price of a report arriving now.
    pub fn admission_price(&self, agent: &AgentType) -> Money {
        let first = agent.departure.saturating_sub(self.config.k).max(1);
        self.snapshots
            .iter()
            .filter(|s| s.period >= first && s.period < agent.arrival)
            .map(|s| self.counterfactual_in(s, agent).bound())
            .fold(Money::NEG_INFINITY, Money::max)
    }

    /// Process a report arriving in the current period.
    pub fn on_arrival(&mut self, agent: AgentType) -> Result<bool> {
        agent.validate(self.config.k)?;
        if agent.arrival != self.period {
            return Err(Error::WrongPeriod { id: agent.id, arrival: agent.arrival, period: self.period });
        }
        if self.book.contains(agent.id) || self.done.contains_key(&agent.id) {
            return Err(Error::DuplicateId(agent.id));
        }
        let q = self.admission_price(&agent);
        if agent.value >= q {
            self.book.insert(Offer::new(agent, q))?;
            self.log(Event::Admitted { id: agent.id, admission_price: q });
            Ok(true)
        } else {
            let mut offer = Offer::new(agent, q);
            offer.mark_priced_out()?;
            self.history.append(entry(&agent, self.period, ExitReason::PricedOut))?;
            self.done.insert(agent.id, offer);
            self.log(Event::Rejected { id: agent.id, admission_price: q });
            Ok(false)
        }
    }

    fn context(&mut self) -> Context {
        let t = self.period;
        match &self.config.rule {
            Rule::PriceBased { .. } => {
                let tracker = self.tracker.as_mut().expect("price-based rule has a tracker");
                Context::Price(tracker.update(&self.history))
            }
            Rule::Simple => Context::Price(self.history.mean_abs_value().unwrap_or(self.config.initial_price)),
            Rule::WindowedMcAfee { window } => augmented(self.history.window(*window).iter()),
            Rule::ActiveMcAfee => augmented(self.history.unexpired(t)),
            Rule::TradeReduction | Rule::McAfee => Context::None,
        }
    }

    /// Clear the current period, retire offers and release settlements.
    pub fn clear_period(&mut self) -> Result<Clearing> {
        let t = self.period;
        let mut exits: Vec<(AgentId, OfferState, Option<Money>)> = Vec::new();
        let clearing = if self.config.is_clearing_period(t) {
            let ctx = self.context();
            let bids = self.book.bids();
            let asks = self.book.asks();
            let omega = self.source.omega(t);
            let (clearing, matched) = match (&self.config.rule, &ctx) {
                (Rule::PriceBased { .. }, Context::Price(p)) => {
                    let r = price_match::clear(*p, &bids, &asks, omega);
                    (r.clearing.clone(), Some(r))
                }
                _ => (rules::clear(&self.config.rule, &ctx, &bids, &asks, omega), None),
            };
            let snap = Snapshot { period: t, bids, asks, ctx, matched };
            let record = self.price_record(&snap);
            self.log(Event::Price { buy: record.buy.bound(), sell: record.sell.bound() });
            self.prices.push(record);
            for offer in self.book.iter() {
                let id = offer.id();
                if let Some(p) = clearing.payment(id) {
                    exits.push((id, OfferState::Matched, Some(offer.admission_price.max(p))));
                } else if clearing.snt.contains(&id) {
                    if offer.report.departure == t {
                        exits.push((id, OfferState::Expired, None));
                    }
                } else {
                    exits.push((id, OfferState::PricedOut, None));
                }
            }
            self.snapshots.push_back(snap);
            clearing
        } else {
            for offer in self.book.iter().filter(|o| o.report.departure == t) {
                exits.push((offer.id(), OfferState::Expired, None));
            }
            Clearing::default()
        };

        let horizon = (t + 1).saturating_sub(self.config.k);
        while self.snapshots.front().is_some_and(|s| s.period < horizon) {
            self.snapshots.pop_front();
        }

        for &(b, s) in &clearing.pairs {
            self.log(Event::Matched { buyer: b, seller: s });
        }
        exits.sort_by_key(|(id, _, _)| self.source.rank(t, Purpose::Log, *id));
        for (id, state, payment) in exits {
            let mut offer = self.book.remove(id)?;
            let reason = match state {
                OfferState::Matched => {
                    let x = payment.expect("winners have a payment");
                    offer.mark_matched(t, x)?;
                    self.log(Event::Charged { id, payment: x });
                    self.settle_later(&offer, x);
                    ExitReason::Traded
                }
                OfferState::PricedOut => {
                    offer.mark_priced_out()?;
                    self.log(Event::PricedOut { id });
                    ExitReason::PricedOut
                }
                _ => {
                    offer.mark_expired()?;
                    self.log(Event::Expired { id });
                    ExitReason::Expired
                }
            };
            self.history.append(entry(&offer.report, t, reason))?;
            self.done.insert(id, offer);
        }
        let survivors: Vec<AgentId> = self.book.ids();
        for id in survivors {
            self.log(Event::Survived { id });
        }
        self.release(t);
        Ok(clearing)
    }

    fn price_record(&self, snap: &Snapshot) -> PriceRecord {
        let phantom = |side: Side, id: u32| AgentType {
            id: AgentId(id),
            side,
            arrival: snap.period + 1,
            departure: snap.period + 1,
            value: side.top_value(),
        };
        match &snap.ctx {
            Context::Price(p) => {
                PriceRecord { period: snap.period, buy: Counterfactual::Price(*p), sell: Counterfactual::Price(-*p) }
            }
            _ => PriceRecord {
                period: snap.period,
                buy: self.counterfactual_in(snap, &phantom(Side::Buyer, u32::MAX)),
                sell: self.counterfactual_in(snap, &phantom(Side::Seller, u32::MAX - 1)),
            },
        }
    }

    fn settle_later(&mut self, offer: &Offer, payment: Money) {
        let t = self.period;
        let id = offer.id();
        let due = match self.config.feasibility {
            Feasibility::Relaxed => offer.settlement_period(),
            Feasibility::Strong => t,
        };
        match offer.report.side {
            Side::Buyer => {
                self.log(Event::CashIn { id, amount: payment });
                self.escrow.push((due, Event::ItemOut { id }));
            }
            Side::Seller => {
                self.log(Event::ItemIn { id });
                self.escrow.push((due, Event::CashOut { id, amount: -payment }));
            }
        }
    }

    fn release(&mut self, t: Period) {
        let (due, keep): (Vec<_>, Vec<_>) = self.escrow.drain(..).partition(|(p, _)| *p <= t);
        self.escrow = keep;
        for (_, e) in due {
            self.log(e);
        }
    }

    /// Run one period: open it, admit `arrivals`, clear.
    pub fn run_period(&mut self, t: Period, arrivals: &[AgentType]) -> Result<Clearing> {
        self.begin_period(t)?;
        let mut arrivals = arrivals.to_vec();
        arrivals.sort_by_key(|a| self.source.rank(t, Purpose::Log, a.id));
        for a in arrivals {
            self.on_arrival(a)?;
        }
        self.clear_period()
    }

    pub fn finish(self) -> ChainOutcome {
        let mut offers = self.done;
        for o in self.book.iter() {
            offers.insert(o.id(), o.clone());
        }
        let pairs = self
            .events
            .iter()
            .filter_map(|e| match e.event {
                Event::Matched { buyer, seller } => Some((e.period, buyer, seller)),
                _ => None,
            })
            .collect();
        ChainOutcome { offers, events: self.events, prices: self.prices, pairs }
    }
}

fn entry(a: &AgentType, period: Period, reason: ExitReason) -> HistoryEntry {
    HistoryEntry { id: a.id, side: a.side, value: a.value, departure: a.departure, period, reason }
}

fn augmented<'a>(entries: impl Iterator<Item = &'a HistoryEntry>) -> Context {
    let (mut bids, mut asks) = (Vec::new(), Vec::new());
    for e in entries {
        match e.side {
            Side::Buyer => bids.push(e.participant()),
            Side::Seller => asks.push(e.participant()),
        }
    }
    Context::Augmented { bids, asks }
}

/// Run a whole schedule through the mechanism.
pub fn run(config: &ChainConfig, schedule: &[AgentType], source: &RandomSource) -> Result<ChainOutcome> {
    let mut by_period: BTreeMap<Period, Vec<AgentType>> = BTreeMap::new();
    for a in schedule {
        by_period.entry(a.arrival).or_default().push(*a);
    }
    let last = schedule.iter().map(|a| a.departure).max().unwrap_or(0);
    let mut state = ChainState::new(config.clone(), source.clone());
    for t in 1..=last {
        let arrivals = by_period.remove(&t).unwrap_or_default();
        state.run_period(t, &arrivals)?;
    }
    Ok(state.finish())
}
