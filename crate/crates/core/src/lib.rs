//! Surge pricing for spatial ride markets.
//!
//! Min-cost transport flows between supply and demand, unit-demand market
//! clearing prices, surge prices in the continuous and discrete settings,
//! and an online simulator for competitive-ratio experiments.
//!
//! Every solver is generic over [`Scalar`]. Use [`Rational`] for exact
//! certificates and `f64` for large simulations.

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod market;
pub mod mass;
pub mod mcf;
pub mod metric;
pub mod online;
pub mod scalar;
pub mod transport;

pub use continuous::{
    build_market_from_flow, continuous_surge_prices, target_supply_surge, taxicab_utility,
    verify_equilibrium_continuous, verify_unique_induction, EquilibriumReport, SurgeVector, ZeroDemandPrice,
};
pub use discrete::{
    build_discrete_market, social_welfare_discrete, solve_discrete, verify_envy_free, verify_taxi_best_response,
    verify_truthful, Assignment, DiscreteInstance, DiscreteSurgeVector,
};
pub use error::{Error, Result};
pub use market::{
    brute_force_oracle, max_weight_matching, minimal_walrasian_prices, verify_clearing, ClearingPrices, Matching,
    UnitDemandMarket,
};
pub use mass::MassVector;
pub use metric::MetricSpace;
pub use online::{
    competitive_experiment, gen_drift, gen_geometric, gen_single_vertex, gen_subset, lazify, lazy_diagnostics,
    offline_opt, run_comp, run_match, run_rand, run_stay, sequence_stats, surge_prices_for_step, DemandSequence,
    LazyDiagnostics, SequenceStats, SupplyTrajectory,
};
pub use scalar::Scalar;
pub use transport::{
    flow_cost, min_cost_flow, verify_min_cost, zero_reduced_cost_edges, DualPotentials, Flow, OptimalityReport,
};

pub type Rational = num_rational::BigRational;

pub type ExactMetric = MetricSpace<Rational>;
pub type ExactMass = MassVector<Rational>;
pub type ExactFlow = Flow<Rational>;
pub type ExactMarket = UnitDemandMarket<Rational>;
pub type ExactDiscreteInstance = DiscreteInstance<Rational>;
pub type FloatMetric = MetricSpace<f64>;
pub type FloatMass = MassVector<f64>;
pub type FloatFlow = Flow<f64>;
