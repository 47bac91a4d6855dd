//! Small hand-checked markets used by the tests, the CLI and the bindings.
//!
//! Both period-3 markets share the same nine offers. Periods 1 and 2 are
//! filled with offers whose only role is to produce the stated earlier
//! prices; the scan order of each period is pinned.

use super::ChainConfig;
use crate::market::{AgentId, AgentType, RandomSource};
use crate::rules::{PriceVariant, Rule};

/// Ids of the period-3 offers: bids 1..=4, asks 11..=15.
pub fn period3_offers() -> Vec<AgentType> {
    vec![
        AgentType::buyer(1, 3, 4, 15.0),
        AgentType::buyer(2, 3, 3, 10.0),
        AgentType::buyer(3, 3, 3, 7.0),
        AgentType::buyer(4, 3, 5, 6.0),
        AgentType::seller(11, 3, 4, -1.0),
        AgentType::seller(12, 3, 5, -3.0),
        AgentType::seller(13, 3, 3, -4.0),
        AgentType::seller(14, 3, 4, -5.0),
        AgentType::seller(15, 3, 5, -10.0),
    ]
}

fn ids(v: &[u32]) -> Vec<AgentId> {
    v.iter().map(|&i| AgentId(i)).collect()
}

const TABLE_IDS: [u32; 9] = [1, 2, 3, 4, 11, 12, 13, 14, 15];

/// Posted-price market with prices 8, 7 and 6.5 in periods 1 to 3.
///
/// The price is the mean absolute value of the offers that left since the
/// previous period (an average with weight one), starting at 8.
pub fn posted_price() -> (ChainConfig, Vec<AgentType>, RandomSource) {
    let mut config = ChainConfig::new(Rule::PriceBased { variant: PriceVariant::Ewma { lambda: 1.0 } }, 2);
    config.initial_price = 8.0;
    let mut schedule = vec![
        AgentType::buyer(21, 1, 1, 13.0),
        AgentType::seller(22, 1, 1, -1.0),
        AgentType::buyer(23, 2, 2, 11.5),
        AgentType::seller(24, 2, 2, -1.0),
    ];
    schedule.extend(period3_offers());
    let mut source = RandomSource::new(0);
    let mut early = TABLE_IDS.to_vec();
    early.extend([21, 22, 23, 24]);
    source.set_order(1, ids(&early));
    source.set_order(2, ids(&early));
    source.set_order(3, ids(&[4, 2, 14, 1, 12, 11, 13, 15]));
    (config, schedule, source)
}

/// McAfee market where an extra bid would have paid 8 and 7 and an extra
/// ask 7 and 6 in periods 1 and 2.
pub fn mcafee() -> (ChainConfig, Vec<AgentType>, RandomSource) {
    let config = ChainConfig::new(Rule::McAfee, 2);
    let mut schedule = vec![
        AgentType::buyer(21, 1, 1, 8.0),
        AgentType::buyer(22, 1, 1, 7.5),
        AgentType::seller(23, 1, 1, -7.0),
        AgentType::seller(24, 1, 1, -7.5),
        AgentType::buyer(31, 2, 4, 7.0),
        AgentType::buyer(32, 2, 4, 6.5),
        AgentType::seller(33, 2, 4, -6.0),
        AgentType::seller(34, 2, 4, -6.5),
    ];
    schedule.extend(period3_offers());
    (config, schedule, RandomSource::new(0))
}

/// Two-period market where per-period trade reduction rewards delaying and
/// overbidding. Bids 1..=4, asks 11..=15.
pub fn naive_dynamic() -> Vec<AgentType> {
    vec![
        AgentType::buyer(1, 1, 2, 15.0),
        AgentType::buyer(2, 1, 2, 10.0),
        AgentType::buyer(3, 1, 2, 4.0),
        AgentType::buyer(4, 2, 2, 3.0),
        AgentType::seller(11, 1, 2, -1.0),
        AgentType::seller(12, 2, 2, -1.0),
        AgentType::seller(13, 1, 1, -2.0),
        AgentType::seller(14, 2, 2, -2.0),
        AgentType::seller(15, 1, 2, -5.0),
    ]
}
