use crate::market::{AgentId, Period};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("agent {id:?}: arrival {arrival} after departure {departure}")]
    ArrivalAfterDeparture { id: AgentId, arrival: Period, departure: Period },
    #[error("agent {id:?}: patience {patience} exceeds bound {k}")]
    PatienceExceeded { id: AgentId, patience: Period, k: Period },
    #[error("agent {id:?}: value {value} has the wrong sign for its side")]
    ValueSign { id: AgentId, value: f64 },
    #[error("agent {id:?}: arrival must be at least period 1")]
    ArrivalBeforeStart { id: AgentId },
    #[error("duplicate agent id {0:?}")]
    DuplicateId(AgentId),
    #[error("unknown agent id {0:?}")]
    UnknownAgent(AgentId),
    #[error("offer {id:?} is {state}, cannot transition")]
    NotActive { id: AgentId, state: &'static str },
    #[error("agent {id:?} reported arrival {arrival} in period {period}")]
    WrongPeriod { id: AgentId, arrival: Period, period: Period },
    #[error("period {next} does not follow {current}")]
    NonMonotonePeriod { current: Period, next: Period },
    #[error("w_min must be positive, got {0}")]
    NonPositiveMinValue(f64),
    #[error("value range is empty: min {min}, max {max}")]
    EmptyValueRange { min: f64, max: f64 },
    #[error("win region of agent {0:?} is not monotone in its value")]
    NonMonotone(AgentId),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
