//! Adaptive traders in the style of zero-intelligence-plus.
//!
//! A few protocol agents bid on behalf of the arriving offers. Each keeps a
//! profit margin per side and patience category; an offer declares
//! `w * (1 + margin)` and moves its declaration toward a target derived from
//! the previous period's most competitive offers. Learned margins are fed
//! back into the category margin when an offer trades or expires. The same
//! schedule is replayed several times for training; the last replay counts.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Trade;
use crate::market::{AgentType, Money, Period, Purpose, RandomSource, Side};

#[derive(Clone, Debug, PartialEq)]
pub struct ZipConfig {
    pub traders: usize,
    pub training_trials: u32,
    pub k: Period,
    /// Initial learning weight is `1 - base_rate`.
    pub base_rate: f64,
    /// Upper bound of the target noise draws.
    pub noise: f64,
}

impl ZipConfig {
    pub fn new(k: Period) -> ZipConfig {
        ZipConfig { traders: 5, training_trials: 10, k, base_rate: 0.7, noise: 0.05 }
    }
}

#[derive(Clone, Debug)]
struct Trader {
    beta: f64,
    gamma: f64,
    /// Margin per side (buyer, seller) and patience category.
    margin: [[f64; 3]; 2],
}

#[derive(Clone, Debug)]
struct Live {
    agent: AgentType,
    trader: usize,
    category: usize,
    margin: f64,
    delta: f64,
    declared: Money,
}

fn side_index(s: Side) -> usize {
    match s {
        Side::Buyer => 0,
        Side::Seller => 1,
    }
}

pub fn category(patience: Period, k: Period) -> usize {
    ((patience as usize * 3) / (k as usize + 1)).min(2)
}

fn clamp_margin(side: Side, m: f64) -> f64 {
    match side {
        Side::Buyer => m.clamp(-1.0, 0.0),
        Side::Seller => m.max(0.0),
    }
}

/// Learning weight in period `t` of replay `trial` (1-based).
pub fn learning_rate(cfg: &ZipConfig, trial: u32, t: Period, t_end: Period) -> f64 {
    let step = (1.0 - cfg.base_rate) / (cfg.training_trials as f64 + 1.0);
    let frac = t as f64 / t_end.max(1) as f64;
    1.0 - (cfg.base_rate + (trial as f64 - 1.0) * step + frac * frac * step)
}

/// Declared value of true value `w` under margin `mu`.
pub fn declare(w: Money, mu: f64) -> Money {
    w * (1.0 + mu)
}

/// Blend a finished offer's margin into its category margin.
pub fn blend(category_margin: f64, offer_margin: f64, rate: f64) -> f64 {
    (1.0 - rate) * category_margin + rate * offer_margin
}

/// Target declaration for a category whose most competitive declaration was
/// `best`: nudged toward more competitive if it could not trade against the
/// best opposing declaration, toward less competitive otherwise.
pub fn target(best: Money, best_other: Money, eta: f64, xi: f64) -> Money {
    let step = eta * best.abs() + xi;
    if best + best_other < 0.0 {
        best + step
    } else {
        best - step
    }
}

pub fn run(schedule: &[AgentType], cfg: &ZipConfig, source: &RandomSource) -> Vec<Trade> {
    let mut rng = source.rng(0, Purpose::Traders);
    let mut traders: Vec<Trader> = (0..cfg.traders.max(1))
        .map(|_| {
            let mut margin = [[0.0; 3]; 2];
            for c in 0..3 {
                margin[0][c] = -rng.random_range(0.05..0.35);
                margin[1][c] = rng.random_range(0.05..0.35);
            }
            Trader { beta: rng.random_range(0.1..0.2), gamma: rng.random_range(0.2..0.8), margin }
        })
        .collect();
    let mut trades = Vec::new();
    for trial in 1..=cfg.training_trials + 1 {
        trades = replay(schedule, cfg, trial, &mut traders, &mut rng);
    }
    trades
}

fn replay(
    schedule: &[AgentType],
    cfg: &ZipConfig,
    trial: u32,
    traders: &mut [Trader],
    rng: &mut ChaCha8Rng,
) -> Vec<Trade> {
    let t_end = schedule.iter().map(|a| a.departure).max().unwrap_or(0);
    let mut arrivals: BTreeMap<Period, Vec<AgentType>> = BTreeMap::new();
    for a in schedule {
        arrivals.entry(a.arrival).or_default().push(*a);
    }
    let mut live: Vec<Live> = Vec::new();
    let mut trades = Vec::new();
    let mut prev_best: Option<([[Money; 3]; 2], [Money; 2])> = None;
    let desc = |x: &Live, y: &Live| y.declared.partial_cmp(&x.declared).unwrap_or(Ordering::Equal);

    for t in 1..=t_end {
        let rate = learning_rate(cfg, trial, t, t_end);

        // Targets come from the previous period's declarations before it cleared.
        if let Some((best, best_side)) = prev_best.take() {
            let mut targets = vec![[[None::<Money>; 3]; 2]; traders.len()];
            for tg in targets.iter_mut() {
                for s in 0..2 {
                    for c in 0..3 {
                        let eta = rng.random_range(0.0..cfg.noise);
                        let xi = rng.random_range(0.0..cfg.noise);
                        if best[s][c].is_finite() {
                            tg[s][c] = Some(target(best[s][c], best_side[1 - s], eta, xi));
                        }
                    }
                }
            }
            for o in live.iter_mut() {
                let s = side_index(o.agent.side);
                let Some(tau) = targets[o.trader][s][o.category] else { continue };
                let tr = &traders[o.trader];
                o.delta = tr.gamma * o.delta + (1.0 - tr.gamma) * tr.beta * (tau - o.declared);
                o.margin = clamp_margin(o.agent.side, (o.declared + o.delta) / o.agent.value - 1.0);
                o.declared = declare(o.agent.value, o.margin);
            }
        }

        for a in arrivals.remove(&t).unwrap_or_default() {
            let trader = rng.random_range(0..traders.len());
            let category = category(a.patience(), cfg.k);
            let margin = traders[trader].margin[side_index(a.side)][category];
            live.push(Live { agent: a, trader, category, margin, delta: 0.0, declared: declare(a.value, margin) });
        }

        if !live.is_empty() {
            let mut best = [[Money::NEG_INFINITY; 3]; 2];
            let mut best_side = [Money::NEG_INFINITY; 2];
            for o in &live {
                let s = side_index(o.agent.side);
                best[s][o.category] = best[s][o.category].max(o.declared);
                best_side[s] = best_side[s].max(o.declared);
            }
            prev_best = Some((best, best_side));
        }

        let mut bids: Vec<Live> = live.iter().filter(|o| o.agent.side == Side::Buyer).cloned().collect();
        let mut asks: Vec<Live> = live.iter().filter(|o| o.agent.side == Side::Seller).cloned().collect();
        bids.sort_by(desc);
        asks.sort_by(desc);
        let n = bids.iter().zip(&asks).take_while(|(b, s)| b.declared + s.declared >= 0.0).count();
        let mut done = Vec::new();
        for (b, s) in bids.iter().zip(&asks).take(n) {
            let p = (b.declared - s.declared) / 2.0;
            trades.push(Trade { period: t, buyer: b.agent.id, seller: s.agent.id, buyer_payment: p, seller_payment: -p });
            done.push(b.agent.id);
            done.push(s.agent.id);
        }
        live.retain(|o| {
            let finished = done.contains(&o.agent.id) || o.agent.departure <= t;
            if finished {
                let m = &mut traders[o.trader].margin[side_index(o.agent.side)][o.category];
                *m = blend(*m, o.margin, rate);
            }
            !finished
        });
    }
    trades
}
