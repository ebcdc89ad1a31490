use thiserror::Error;

/// Errors surfaced by any of the library's subsystems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("scripted frog at site {site} ran out of steps at time {time}")]
    ScriptUnderrun { site: i64, time: u64 },

    #[error("start site {start} is outside the allowed set")]
    StartOutsideAllowed { start: i64 },

    #[error("all {censored} runs were censored; cannot estimate")]
    AllCensored { censored: u64 },

    #[error("site {site} is censored inside the requested window")]
    CensoredInWindow { site: i64 },

    #[error("invalid step profile: {0}")]
    InvalidProfile(String),

    #[error("invalid corridor schedule: {0}")]
    InvalidSchedule(String),

    #[error("start {x} is on or outside the initial corridor ({lo}, {hi})")]
    StartOutsideCorridor { x: f64, lo: f64, hi: f64 },

    #[error("eigenfunction series hit the {cap}-term cap before converging")]
    SeriesCapped { cap: usize },

    #[error("corridor solver failed: {0}")]
    CorridorSolver(String),

    #[error("conditioning event never hit: {hits} of {replicas} replicas")]
    ConditioningNeverHit { hits: u64, replicas: u64 },

    #[error("overlapping deformation intervals: [{a0}, {a1}] and [{b0}, {b1}]")]
    OverlappingIntervals { a0: f64, a1: f64, b0: f64, b1: f64 },

    #[error("oracle query ({x}, len {len}) outside backing window [{lo}, {hi}]")]
    OracleWindow { x: i64, len: u64, lo: i64, hi: i64 },

    #[error("clustering input mixes positive- and negative-side intervals")]
    MixedSides,

    #[error("optimization produced no finite energy over {restarts} restarts")]
    NoFiniteEnergy { restarts: u32 },

    #[error("non-monotone empirical profile at site {site}")]
    NonMonotoneProfile { site: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;
