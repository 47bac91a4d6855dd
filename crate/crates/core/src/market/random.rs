use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AgentId, Period};

/// What a random draw is used for. Each purpose gets an independent stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Orderings inside single-period rules: scan order, ties, subsets.
    Order,
    /// Order in which same-period events are logged and appended to history.
    Log,
    /// Per-agent admission coin for the probabilistic admission mode.
    AdmissionCoin,
    /// Price draw of the randomized fixed-price baseline.
    FixedPrice,
    /// Adaptive trader parameters and noise.
    Traders,
    /// Schedule generation.
    Schedule,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Order => 0x6f72_6465,
            Purpose::Log => 0x6c6f_6700,
            Purpose::AdmissionCoin => 0x636f_696e,
            Purpose::FixedPrice => 0x6669_7870,
            Purpose::Traders => 0x7a69_7000,
            Purpose::Schedule => 0x7363_6864,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(h: u64, x: u64) -> u64 {
    splitmix(h ^ splitmix(x))
}

/// Deterministic randomness keyed by (seed, trial, period, purpose).
///
/// Orderings are derived from agent ids only, never from reported values, so
/// the relative order of two agents does not depend on who else is present.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSource {
    seed: u64,
    trial: u64,
    orders: BTreeMap<Period, Vec<AgentId>>,
}

impl RandomSource {
    pub fn new(seed: u64) -> RandomSource {
        RandomSource { seed, trial: 0, orders: BTreeMap::new() }
    }

    pub fn with_trial(&self, trial: u64) -> RandomSource {
        RandomSource { seed: self.seed, trial, orders: self.orders.clone() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    /// Pin the scan order used in `period`; listed agents come first in the
    /// given order, others follow in keyed order.
    pub fn set_order(&mut self, period: Period, ids: Vec<AgentId>) {
        self.orders.insert(period, ids);
    }

    pub fn key(&self, period: Period, purpose: Purpose) -> u64 {
        mix(mix(mix(self.seed, self.trial), period as u64), purpose.tag())
    }

    pub fn agent_key(&self, period: Period, purpose: Purpose, id: AgentId) -> u64 {
        mix(self.key(period, purpose), id.0 as u64)
    }

    /// Position of `id` in the permutation used for `purpose` in `period`.
    pub fn rank(&self, period: Period, purpose: Purpose, id: AgentId) -> u64 {
        if let Some(pos) = self.orders.get(&period).and_then(|o| o.iter().position(|x| *x == id)) {
            return pos as u64;
        }
        (1 << 63) | (self.agent_key(period, purpose, id) >> 1)
    }

    pub fn rng(&self, period: Period, purpose: Purpose) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key(period, purpose))
    }

    pub fn agent_rng(&self, period: Period, purpose: Purpose, id: AgentId) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.agent_key(period, purpose, id))
    }

    /// Uniform draw in `[0, 1)` keyed by agent.
    pub fn agent_uniform(&self, period: Period, purpose: Purpose, id: AgentId) -> f64 {
        (self.agent_key(period, purpose, id) >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn omega(&self, period: Period) -> Omega<'_> {
        Omega { source: self, period }
    }
}

/// The randomness a single-period rule sees in one period.
#[derive(Clone, Copy, Debug)]
pub struct Omega<'a> {
    source: &'a RandomSource,
    period: Period,
}

impl<'a> Omega<'a> {
    pub fn period(&self) -> Period {
        self.period
    }

    pub fn rank(&self, id: AgentId) -> u64 {
        self.source.rank(self.period, Purpose::Order, id)
    }
}
