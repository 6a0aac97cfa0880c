//! Simulation lab: scenario generators for each dependence regime, an exact
//! enumerator for finite supports and a seeded Monte Carlo harness.

pub mod exact;
pub mod generate;
pub mod montecarlo;
pub mod scenario;

pub use exact::{enumerate_exact, format_probability, ExactStatistic};
pub use generate::{gen_iid, gen_sequential_adversarial, gen_simultaneous_factor, generate, replication_rng};
pub use montecarlo::{
    mc_demimartingale, mc_power, mc_type1, DemimartingaleConfig, DemimartingaleEstimate, McConfig,
    MonotoneFn, MonteCarloSummary, RateEstimate,
};
pub use scenario::{FactorState, Scenario, ScenarioKind, TwoPoint};
