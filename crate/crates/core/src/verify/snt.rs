//! Validity of strong no-trade constructions.
//!
//! (a) an agent in the no-trade set that stays beyond the period cannot
//! change its own strong no-trade status by changing its report;
//! (b) a strong no-trade agent that stays cannot change the status of any
//! other staying agent, not even by being absent.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::market::{AgentId, Money, Participant, Period, RandomSource, Side};
use crate::rules::{self, Clearing, Context, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SntConstruction {
    /// The set computed by the rule itself.
    Rule,
    /// Every no-trade agent.
    NoTrade,
    /// The lowest-ranked agent of a fixed universe, if it is in no-trade.
    Dictatorial,
    /// Every no-trade agent when a side has fewer than two offers.
    Quorum,
    Empty,
}

impl SntConstruction {
    pub const ALL: [SntConstruction; 5] = [
        SntConstruction::Rule,
        SntConstruction::NoTrade,
        SntConstruction::Dictatorial,
        SntConstruction::Quorum,
        SntConstruction::Empty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SntConstruction::Rule => "rule",
            SntConstruction::NoTrade => "no_trade",
            SntConstruction::Dictatorial => "dictatorial",
            SntConstruction::Quorum => "quorum",
            SntConstruction::Empty => "empty",
        }
    }
}

/// Constructions expected to be valid for `rule`.
pub fn valid_constructions(rule: &Rule) -> Vec<SntConstruction> {
    let mut v = vec![SntConstruction::Rule, SntConstruction::Dictatorial, SntConstruction::Empty];
    if matches!(rule, Rule::TradeReduction | Rule::McAfee) {
        v.push(SntConstruction::Quorum);
    }
    v
}

/// One period's market as seen by a rule.
#[derive(Clone, Debug)]
pub struct SntState {
    pub rule: Rule,
    pub ctx: Context,
    pub period: Period,
    pub bids: Vec<Participant>,
    pub asks: Vec<Participant>,
    pub source: RandomSource,
    /// Every agent that could be present; fixes the dictator.
    pub universe: Vec<AgentId>,
}

impl SntState {
    pub fn new(rule: Rule, ctx: Context, period: Period, bids: Vec<Participant>, asks: Vec<Participant>) -> SntState {
        let universe = bids.iter().chain(&asks).map(|p| p.id).collect();
        SntState { rule, ctx, period, bids, asks, source: RandomSource::new(0), universe }
    }

    fn clearing(&self, bids: &[Participant], asks: &[Participant]) -> Clearing {
        rules::clear(&self.rule, &self.ctx, bids, asks, self.source.omega(self.period))
    }

    fn snt_of(&self, c: SntConstruction, bids: &[Participant], asks: &[Participant]) -> BTreeSet<AgentId> {
        let clearing = self.clearing(bids, asks);
        match c {
            SntConstruction::Rule => clearing.snt,
            SntConstruction::NoTrade => clearing.nt,
            SntConstruction::Empty => BTreeSet::new(),
            SntConstruction::Quorum => {
                if bids.len() < 2 || asks.len() < 2 {
                    clearing.nt
                } else {
                    BTreeSet::new()
                }
            }
            SntConstruction::Dictatorial => {
                let omega = self.source.omega(self.period);
                let dictator = self.universe.iter().min_by_key(|id| omega.rank(**id));
                dictator.filter(|d| clearing.nt.contains(d)).into_iter().copied().collect()
            }
        }
    }

    fn side_of(&self, id: AgentId) -> Option<Side> {
        if self.bids.iter().any(|p| p.id == id) {
            Some(Side::Buyer)
        } else if self.asks.iter().any(|p| p.id == id) {
            Some(Side::Seller)
        } else {
            None
        }
    }

    /// The offers with `id`'s report replaced, or removed when `probe` is
    /// [`Probe::Absent`].
    fn probed(&self, id: AgentId, probe: Probe) -> (Vec<Participant>, Vec<Participant>) {
        let apply = |side: &[Participant]| -> Vec<Participant> {
            side.iter()
                .filter_map(|p| {
                    if p.id != id {
                        return Some(*p);
                    }
                    match probe {
                        Probe::Absent => None,
                        Probe::Value(v) => Some(Participant { value: v, ..*p }),
                        Probe::Departure(d) => Some(Participant { departure: d, ..*p }),
                    }
                })
                .collect()
        };
        (apply(&self.bids), apply(&self.asks))
    }

    fn departure(&self, id: AgentId) -> Option<Period> {
        self.bids.iter().chain(&self.asks).find(|p| p.id == id).map(|p| p.departure)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    Value(Money),
    Departure(Period),
    Absent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SntViolation {
    pub agent: AgentId,
    pub condition: Condition,
    pub probe: Probe,
}

/// Alternative reports for `id`: values just around every other offer's
/// value and the price, extreme values, later departures, and absence.
pub fn probe_grid(state: &SntState, id: AgentId) -> Vec<Probe> {
    let Some(side) = state.side_of(id) else { return Vec::new() };
    let mut mags: Vec<Money> = state.bids.iter().chain(&state.asks).map(|p| p.value.abs()).collect();
    if let Context::Price(p) = state.ctx {
        mags.push(p.abs());
    }
    let top = mags.iter().copied().fold(1.0, Money::max);
    let mut values = vec![0.0, 2.0 * top + 1.0];
    for m in mags {
        values.extend([m - 0.01, m, m + 0.01]);
    }
    let mut probes: Vec<Probe> = values
        .into_iter()
        .filter(|v| *v >= 0.0)
        .map(|v| Probe::Value(if side == Side::Buyer { v } else { -v }))
        .collect();
    probes.extend([Probe::Departure(state.period + 1), Probe::Departure(state.period + 3), Probe::Absent]);
    probes
}

/// Violations of the two conditions for agent `id` under `probes`.
pub fn check_snt_valid(c: SntConstruction, state: &SntState, id: AgentId, probes: &[Probe]) -> Vec<SntViolation> {
    let t = state.period;
    let Some(d) = state.departure(id) else { return Vec::new() };
    if d <= t {
        return Vec::new();
    }
    let base = state.clearing(&state.bids, &state.asks);
    let snt = state.snt_of(c, &state.bids, &state.asks);
    let staying = |set: &BTreeSet<AgentId>, bids: &[Participant], asks: &[Participant]| -> BTreeSet<AgentId> {
        set.iter()
            .copied()
            .filter(|j| *j != id && bids.iter().chain(asks).any(|p| p.id == *j && p.departure > t))
            .collect()
    };
    let others = staying(&snt, &state.bids, &state.asks);
    let mut found = Vec::new();
    for &probe in probes {
        if matches!(probe, Probe::Departure(d2) if d2 <= t) {
            continue;
        }
        let (bids, asks) = state.probed(id, probe);
        let snt2 = state.snt_of(c, &bids, &asks);
        if base.nt.contains(&id) && probe != Probe::Absent && snt.contains(&id) != snt2.contains(&id) {
            found.push(SntViolation { agent: id, condition: Condition::A, probe });
        }
        if snt.contains(&id) && staying(&snt2, &bids, &asks) != others {
            found.push(SntViolation { agent: id, condition: Condition::B, probe });
        }
    }
    found
}

/// Check every agent of `state` against its full probe grid.
pub fn check_state(c: SntConstruction, state: &SntState) -> Vec<SntViolation> {
    let ids: Vec<AgentId> = state.bids.iter().chain(&state.asks).map(|p| p.id).collect();
    ids.into_iter().flat_map(|id| check_snt_valid(c, state, id, &probe_grid(state, id))).collect()
}

/// A random small market for `rule`: up to `max_per_side` offers per side
/// with integer values in `1..=10`, departures now or up to two periods
/// later, a price for the posted-price rules and a short history for the
/// augmented ones.
pub fn random_state(rule: &Rule, source: &RandomSource, max_per_side: usize) -> SntState {
    let t: Period = 5;
    let mut rng = source.rng(t, crate::market::Purpose::Schedule);
    let mut next = 1u32;
    let mut side = |rng: &mut rand_chacha::ChaCha8Rng, sign: Money, n: usize, depart: bool| -> Vec<Participant> {
        (0..n)
            .map(|_| {
                let v = sign * rng.random_range(1..=10) as Money;
                let d = if depart { t + rng.random_range(0..=2) } else { rng.random_range(1..t) };
                next += 1;
                Participant::new(next - 1, v, d)
            })
            .collect()
    };
    let nb = rng.random_range(0..=max_per_side);
    let na = rng.random_range(0..=max_per_side);
    let bids = side(&mut rng, 1.0, nb, true);
    let asks = side(&mut rng, -1.0, na, true);
    let ctx = match rule {
        Rule::PriceBased { .. } | Rule::Simple => Context::Price(rng.random_range(1..=20) as Money / 2.0),
        Rule::WindowedMcAfee { .. } | Rule::ActiveMcAfee => {
            let (hb, ha) = (rng.random_range(0..=3), rng.random_range(0..=3));
            Context::Augmented { bids: side(&mut rng, 1.0, hb, false), asks: side(&mut rng, -1.0, ha, false) }
        }
        Rule::TradeReduction | Rule::McAfee => Context::None,
    };
    let mut state = SntState::new(rule.clone(), ctx, t, bids, asks);
    state.source = source.clone();
    state
}
