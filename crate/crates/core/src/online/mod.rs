//! Supply sequences over time: online policies, generators, the offline
//! optimum and the lazy-sequence toolkit.

mod experiment;
mod generators;
mod lazy;
mod offline;

pub use experiment::{
    competitive_experiment, paired_experiment, run_algorithm, trial_rngs, AlgorithmSpec, ExperimentSummary,
    GeneratorSpec, TrialRecord,
};
pub use generators::{
    gen_drift, gen_drift_with, gen_geometric, gen_geometric_with, gen_single_vertex, gen_single_vertex_with,
    gen_subset, gen_subset_with,
};
pub use lazy::{lazify, lazy_diagnostics, lazy_violations, LazyDiagnostics, LazyRule};
pub use offline::{offline_opt, offline_opt_blocks, offline_opt_exact, offline_opt_two_vertex, EXACT_SIZE_CAP};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::continuous::{continuous_surge_prices, verify_equilibrium_continuous, SurgeVector, ZeroDemandPrice};
use crate::error::{Error, Result};
use crate::mass::MassVector;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;
use crate::transport::{earthmover, min_cost_flow, uniform_flow, Flow};

#[derive(Debug, Clone, PartialEq)]
pub struct DemandSequence<S> {
    steps: Vec<MassVector<S>>,
    metric: MetricSpace<S>,
}

impl<S: Scalar> DemandSequence<S> {
    pub fn new(steps: Vec<MassVector<S>>, metric: MetricSpace<S>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidParameter("demand sequence needs at least one step".into()));
        }
        for d in &steps {
            metric.check_dim(d.len())?;
        }
        Ok(DemandSequence { steps, metric })
    }

    pub fn steps(&self) -> &[MassVector<S>] {
        &self.steps
    }

    pub fn metric(&self) -> &MetricSpace<S> {
        &self.metric
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn k(&self) -> usize {
        self.metric.k()
    }
}

/// Supplies `s^1..s^T`, the flows between consecutive supplies and the
/// welfare bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyTrajectory<S> {
    steps: Vec<MassVector<S>>,
    flows: Vec<Flow<S>>,
    per_step_served: Vec<S>,
    per_step_moved: Vec<S>,
    total_sw: S,
}

fn cheapest_flow<S: Scalar>(a: &MassVector<S>, b: &MassVector<S>, m: &MetricSpace<S>) -> Result<Flow<S>> {
    if m.uniform_cost().is_some() {
        return Ok(uniform_flow(a, b, m)?.0);
    }
    Ok(min_cost_flow(a, b, m)?.0)
}

impl<S: Scalar> SupplyTrajectory<S> {
    /// Connects consecutive supplies by min-cost flows.
    pub fn new(steps: Vec<MassVector<S>>, d: &DemandSequence<S>) -> Result<Self> {
        let m = d.metric();
        let flows = steps.windows(2).map(|w| cheapest_flow(&w[0], &w[1], m)).collect::<Result<Vec<_>>>()?;
        Self::with_flows(steps, flows, d)
    }

    /// Uses the given flows, which must move each supply onto the next.
    pub fn with_flows(steps: Vec<MassVector<S>>, flows: Vec<Flow<S>>, d: &DemandSequence<S>) -> Result<Self> {
        if steps.len() != d.len() {
            return Err(Error::DimensionMismatch { expected: d.len(), found: steps.len() });
        }
        if flows.len() + 1 != steps.len() {
            return Err(Error::DimensionMismatch { expected: steps.len() - 1, found: flows.len() });
        }
        let m = d.metric();
        for s in &steps {
            m.check_dim(s.len())?;
        }
        for (t, f) in flows.iter().enumerate() {
            if !f.source().approx_eq(&steps[t]) || !f.target().approx_eq(&steps[t + 1]) {
                return Err(Error::InvalidFlow(format!("flow {t} does not join supplies {t} and {}", t + 1)));
            }
        }
        let per_step_served: Vec<S> = steps.iter().zip(d.steps()).map(|(s, dt)| s.served(dt)).collect();
        let mut per_step_moved = vec![S::zero()];
        for w in steps.windows(2) {
            per_step_moved.push(earthmover(&w[0], &w[1], m)?);
        }
        let total_sw = sw_from_parts(&per_step_served, &per_step_moved);
        Ok(SupplyTrajectory { steps, flows, per_step_served, per_step_moved, total_sw })
    }

    pub fn steps(&self) -> &[MassVector<S>] {
        &self.steps
    }

    /// `flows()[t]` moves `steps()[t]` onto `steps()[t + 1]`.
    pub fn flows(&self) -> &[Flow<S>] {
        &self.flows
    }

    pub fn per_step_served(&self) -> &[S] {
        &self.per_step_served
    }

    /// Earthmover cost paid at each step; zero at the first step.
    pub fn per_step_moved(&self) -> &[S] {
        &self.per_step_moved
    }

    pub fn total_sw(&self) -> &S {
        &self.total_sw
    }

    /// Welfare recomputed from scratch.
    pub fn recompute_sw(&self, d: &DemandSequence<S>) -> Result<S> {
        let served: S = self.steps.iter().zip(d.steps()).map(|(s, dt)| s.served(dt)).sum();
        let mut moved = S::zero();
        for w in self.steps.windows(2) {
            moved = moved + earthmover(&w[0], &w[1], d.metric())?;
        }
        Ok(served - moved)
    }
}

fn sw_from_parts<S: Scalar>(served: &[S], moved: &[S]) -> S {
    served.iter().cloned().sum::<S>() - moved.iter().cloned().sum::<S>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceStats<S> {
    /// Inverse of the largest single-vertex demand.
    pub rho: S,
    /// Average total-variation drift, counting `d^0 = d^1`.
    pub delta: S,
    pub l_max: S,
}

pub fn sequence_stats<S: Scalar>(d: &DemandSequence<S>) -> SequenceStats<S> {
    let top = d.steps().iter().map(MassVector::max_entry).reduce(|a, b| crate::scalar::max(&a, &b)).expect("nonempty");
    let drift: S = d.steps().windows(2).map(|w| w[0].tv_distance(&w[1])).sum();
    let t = S::from_usize(d.len()).expect("horizon fits");
    SequenceStats { rho: S::one() / top, delta: drift / t, l_max: d.metric().max_distance() }
}

/// Uniform supply at every step.
pub fn run_stay<S: Scalar>(d: &DemandSequence<S>) -> Result<SupplyTrajectory<S>> {
    let s = MassVector::uniform(d.k());
    SupplyTrajectory::new(vec![s; d.len()], d)
}

/// Supply equal to demand at every step.
pub fn run_match<S: Scalar>(d: &DemandSequence<S>) -> Result<SupplyTrajectory<S>> {
    SupplyTrajectory::new(d.steps().to_vec(), d)
}

pub fn run_rand<S: Scalar>(d: &DemandSequence<S>, p: f64, seed: u64) -> Result<SupplyTrajectory<S>> {
    run_rand_with(d, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Starts at `d^1`; afterwards jumps to the current demand with
/// probability `p` and otherwise keeps the previous supply.
pub fn run_rand_with<S: Scalar, R: Rng>(d: &DemandSequence<S>, p: f64, rng: &mut R) -> Result<SupplyTrajectory<S>> {
    check_probability(p)?;
    let mut steps = Vec::with_capacity(d.len());
    steps.push(d.steps()[0].clone());
    for dt in &d.steps()[1..] {
        let next = if rng.random_bool(p) { dt.clone() } else { steps.last().expect("nonempty").clone() };
        steps.push(next);
    }
    SupplyTrajectory::new(steps, d)
}

pub fn run_comp<S: Scalar>(d: &DemandSequence<S>, p: f64, seed: u64) -> Result<SupplyTrajectory<S>> {
    run_comp_with(d, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// One fair coin, tossed before anything else: heads runs STAY for the
/// whole horizon, tails runs RAND(p).
pub fn run_comp_with<S: Scalar, R: Rng>(d: &DemandSequence<S>, p: f64, rng: &mut R) -> Result<SupplyTrajectory<S>> {
    check_probability(p)?;
    if rng.random_bool(0.5) {
        run_stay(d)
    } else {
        run_rand_with(d, p, rng)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")))
    }
}

/// Surge prices that make the equilibrium supply equal `policy_target`.
///
/// When the target is the current demand this is the continuous surge
/// price vector. When the target is the previous supply, prices are one
/// everywhere, which keeps every taxicab in place on metrics with all
/// distances at least one.
pub fn surge_prices_for_step<S: Scalar>(
    policy_target: &MassVector<S>,
    s_prev: &MassVector<S>,
    d_t: &MassVector<S>,
    m: &MetricSpace<S>,
) -> Result<SurgeVector<S>> {
    m.check_dim(policy_target.len())?;
    if policy_target.approx_eq(d_t) {
        return Ok(continuous_surge_prices(s_prev, d_t, m, ZeroDemandPrice::Zero)?.0);
    }
    if !policy_target.approx_eq(s_prev) {
        return Err(Error::InvalidParameter("target must be the demand or the previous supply".into()));
    }
    if !m.unit_min() {
        return Err(Error::Unsupported("holding supply needs every distance to be at least 1".into()));
    }
    let r = SurgeVector { price: vec![S::one(); m.k()], zero_demand: ZeroDemandPrice::One };
    let rep = verify_equilibrium_continuous(s_prev, s_prev, &r, d_t, m)?;
    if !rep.ok {
        return Err(Error::ContractViolation(format!("hold prices leave profitable moves: {:?}", rep.violations)));
    }
    Ok(r)
}
