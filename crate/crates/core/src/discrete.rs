//! Surge prices with individual passengers and taxicabs.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::{max_weight_matching, minimal_walrasian_prices, ClearingPrices, UnitDemandMarket};
use crate::metric::MetricSpace;
use crate::scalar::Scalar;
use crate::transport::solve_transport;

const MAX_TRUTH_PASSENGERS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Passenger<S> {
    pub id: String,
    pub location: usize,
    pub value: S,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxicab {
    pub id: String,
    pub location: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance<S> {
    metric: MetricSpace<S>,
    passengers: Vec<Passenger<S>>,
    taxicabs: Vec<Taxicab>,
}

impl<S: Scalar> DiscreteInstance<S> {
    pub fn new(metric: MetricSpace<S>, passengers: Vec<Passenger<S>>, taxicabs: Vec<Taxicab>) -> Result<Self> {
        let k = metric.k();
        for p in &passengers {
            if p.location >= k {
                return Err(Error::InvalidParameter(format!("passenger {} at missing vertex {}", p.id, p.location)));
            }
            if p.value.is_neg() {
                return Err(Error::InvalidParameter(format!("passenger {} has negative value", p.id)));
            }
        }
        if let Some(t) = taxicabs.iter().find(|t| t.location >= k) {
            return Err(Error::InvalidParameter(format!("taxicab {} at missing vertex {}", t.id, t.location)));
        }
        let mut seen = HashSet::new();
        if let Some(id) = passengers.iter().map(|p| &p.id).find(|id| !seen.insert(id.as_str())) {
            return Err(Error::InvalidParameter(format!("duplicate passenger id `{id}`")));
        }
        let mut seen = HashSet::new();
        if let Some(id) = taxicabs.iter().map(|t| &t.id).find(|id| !seen.insert(id.as_str())) {
            return Err(Error::InvalidParameter(format!("duplicate taxicab id `{id}`")));
        }
        Ok(DiscreteInstance { metric, passengers, taxicabs })
    }

    /// Passengers `p0, p1, ...` and taxicabs `t0, t1, ...` from locations.
    pub fn from_locations(metric: MetricSpace<S>, passengers: Vec<(usize, S)>, taxicabs: Vec<usize>) -> Result<Self> {
        let passengers = passengers
            .into_iter()
            .enumerate()
            .map(|(i, (location, value))| Passenger { id: format!("p{i}"), location, value })
            .collect();
        let taxicabs =
            taxicabs.into_iter().enumerate().map(|(j, location)| Taxicab { id: format!("t{j}"), location }).collect();
        Self::new(metric, passengers, taxicabs)
    }

    pub fn metric(&self) -> &MetricSpace<S> {
        &self.metric
    }

    pub fn passengers(&self) -> &[Passenger<S>] {
        &self.passengers
    }

    pub fn taxicabs(&self) -> &[Taxicab] {
        &self.taxicabs
    }

    /// `ℓ̄(i, j)`: distance from taxicab `j` to passenger `i`.
    pub fn pickup_cost(&self, i: usize, j: usize) -> &S {
        self.metric.dist(self.passengers[i].location, self.taxicabs[j].location)
    }

    /// Taxicab counts per vertex.
    pub fn supply_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.metric.k()];
        self.taxicabs.iter().for_each(|t| c[t.location] += 1);
        c
    }

    /// Same instance with one passenger's value replaced.
    pub fn with_value(&self, passenger: usize, value: S) -> Result<Self> {
        let mut next = self.clone();
        if value.is_neg() {
            return Err(Error::InvalidParameter("negative value".into()));
        }
        next.passengers[passenger].value = value;
        Ok(next)
    }
}

/// Who serves whom, and where taxicabs end up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// Passenger served by each taxicab.
    pub serves: Vec<Option<usize>>,
    /// `induced_flow[u][v]`: taxicabs moving from `u` to `v`.
    pub induced_flow: Vec<Vec<usize>>,
    pub new_supply: Vec<usize>,
}

impl Assignment {
    pub fn from_serves<S: Scalar>(inst: &DiscreteInstance<S>, serves: Vec<Option<usize>>) -> Result<Self> {
        let k = inst.metric.k();
        if serves.len() != inst.taxicabs.len() {
            return Err(Error::DimensionMismatch { expected: inst.taxicabs.len(), found: serves.len() });
        }
        let mut taken = vec![false; inst.passengers.len()];
        let mut induced_flow = vec![vec![0; k]; k];
        let mut new_supply = vec![0; k];
        for (j, s) in serves.iter().enumerate() {
            let from = inst.taxicabs[j].location;
            let to = match *s {
                Some(i) => {
                    if i >= taken.len() || std::mem::replace(&mut taken[i], true) {
                        return Err(Error::InvalidParameter(format!("passenger {i} served twice or missing")));
                    }
                    inst.passengers[i].location
                }
                None => from,
            };
            induced_flow[from][to] += 1;
            new_supply[to] += 1;
        }
        Ok(Assignment { serves, induced_flow, new_supply })
    }

    /// Taxicab serving each passenger.
    pub fn server_of(&self, n_passengers: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_passengers];
        for (j, s) in self.serves.iter().enumerate() {
            if let Some(i) = s {
                out[*i] = Some(j);
            }
        }
        out
    }
}

/// `r_v = min_j ℓ(loc t_j, v) + p_j`, or `None` when there are no taxicabs.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSurgeVector<S> {
    pub price: Vec<Option<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution<S> {
    pub assignment: Assignment,
    pub taxi_prices: ClearingPrices<S>,
    pub surge: DiscreteSurgeVector<S>,
}

/// Buyers are passengers, items are taxicabs, value `val - ℓ̄`.
pub fn build_discrete_market<S: Scalar>(inst: &DiscreteInstance<S>) -> Result<UnitDemandMarket<S>> {
    let valuation = (0..inst.passengers.len())
        .map(|i| {
            (0..inst.taxicabs.len())
                .map(|j| inst.passengers[i].value.clone() - inst.pickup_cost(i, j).clone())
                .collect()
        })
        .collect();
    UnitDemandMarket::new(
        inst.passengers.iter().map(|p| p.id.clone()).collect(),
        inst.taxicabs.iter().map(|t| t.id.clone()).collect(),
        valuation,
    )
}

pub fn surge_from_taxi_prices<S: Scalar>(inst: &DiscreteInstance<S>, p: &ClearingPrices<S>) -> DiscreteSurgeVector<S> {
    let price = (0..inst.metric.k())
        .map(|v| {
            inst.taxicabs
                .iter()
                .zip(&p.price)
                .map(|(t, pj)| inst.metric.dist(t.location, v).clone() + pj.clone())
                .reduce(|a, b| crate::scalar::min(&a, &b))
        })
        .collect();
    DiscreteSurgeVector { price }
}

/// Welfare-maximizing assignment (ties go to the lower passenger index),
/// minimal Walrasian taxicab prices and the surge vector they induce.
pub fn solve_discrete<S: Scalar>(inst: &DiscreteInstance<S>) -> Result<DiscreteSolution<S>> {
    let mkt = build_discrete_market(inst)?;
    let g = max_weight_matching(&mkt);
    let taxi_prices = minimal_walrasian_prices(&mkt, &g)?;
    let assignment = Assignment::from_serves(inst, g.owners(inst.taxicabs.len()))?;
    let surge = surge_from_taxi_prices(inst, &taxi_prices);
    Ok(DiscreteSolution { assignment, taxi_prices, surge })
}

/// Served values minus the earthmover cost from the old to the new taxicab
/// counts.
pub fn social_welfare_discrete<S: Scalar>(inst: &DiscreteInstance<S>, a: &Assignment) -> Result<S> {
    let served: S = a.serves.iter().flatten().map(|&i| inst.passengers[i].value.clone()).sum();
    let old: Vec<S> = inst.supply_counts().into_iter().map(|c| S::from_usize(c).expect("count fits")).collect();
    let new: Vec<S> = a.new_supply.iter().map(|&c| S::from_usize(c).expect("count fits")).collect();
    let moved = solve_transport(&old, &new, |u, v| inst.metric.dist(u, v).clone())?;
    Ok(served - moved.cost)
}

/// Cost of moving taxicabs as the assignment says.
pub fn induced_flow_cost<S: Scalar>(inst: &DiscreteInstance<S>, a: &Assignment) -> S {
    let k = inst.metric.k();
    (0..k)
        .flat_map(|u| (0..k).map(move |v| (u, v)))
        .map(|(u, v)| S::from_usize(a.induced_flow[u][v]).expect("count fits") * inst.metric.dist(u, v).clone())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiscreteViolation<S> {
    /// An unserved passenger values the ride above the local surge price.
    UnservedEnvious { passenger: usize, value: S, surge: S },
    /// A served passenger pays more than the ride is worth.
    ServedOverpays { passenger: usize, value: S, surge: Option<S> },
    /// A taxicab would earn more by serving at vertex `at`.
    TaxiDeviation { taxicab: usize, at: usize, gain: S },
    /// A served pair misses the minimum defining the surge price.
    MinNotAchieved { passenger: usize, taxicab: usize, cost_plus_price: S, surge: Option<S> },
    /// A misreported value gives the passenger strictly more utility.
    ProfitableMisreport { passenger: usize, report: S, gain: S },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteReport<S> {
    pub ok: bool,
    pub violations: Vec<DiscreteViolation<S>>,
}

impl<S> DiscreteReport<S> {
    fn from(violations: Vec<DiscreteViolation<S>>) -> Self {
        DiscreteReport { ok: violations.is_empty(), violations }
    }
}

/// Unserved passengers have `val <= r`, served ones `val >= r`, at their
/// own location.
pub fn verify_envy_free<S: Scalar>(
    inst: &DiscreteInstance<S>,
    a: &Assignment,
    r: &DiscreteSurgeVector<S>,
) -> Result<DiscreteReport<S>> {
    inst.metric.check_dim(r.price.len())?;
    let server = a.server_of(inst.passengers.len());
    let mut violations = Vec::new();
    for (i, p) in inst.passengers.iter().enumerate() {
        let surge = &r.price[p.location];
        match (server[i], surge) {
            (None, Some(rv)) if p.value.clone() - rv.clone() > S::tolerance() => violations
                .push(DiscreteViolation::UnservedEnvious { passenger: i, value: p.value.clone(), surge: rv.clone() }),
            (Some(_), None) => {
                violations.push(DiscreteViolation::ServedOverpays { passenger: i, value: p.value.clone(), surge: None })
            }
            (Some(_), Some(rv)) if (rv.clone() - p.value.clone()).is_pos() => {
                violations.push(DiscreteViolation::ServedOverpays {
                    passenger: i,
                    value: p.value.clone(),
                    surge: Some(rv.clone()),
                })
            }
            _ => {}
        }
    }
    Ok(DiscreteReport::from(violations))
}

/// Each taxicab's price `p_j` is at least `r_w - ℓ(w, loc t_j)` for every
/// vertex `w`; unassigned taxicabs (price 0) gain nothing by moving.
pub fn verify_taxi_best_response<S: Scalar>(
    inst: &DiscreteInstance<S>,
    a: &Assignment,
    p: &ClearingPrices<S>,
    r: &DiscreteSurgeVector<S>,
) -> Result<DiscreteReport<S>> {
    inst.metric.check_dim(r.price.len())?;
    if p.price.len() != inst.taxicabs.len() || a.serves.len() != inst.taxicabs.len() {
        return Err(Error::DimensionMismatch { expected: inst.taxicabs.len(), found: p.price.len() });
    }
    let mut violations = Vec::new();
    for (j, t) in inst.taxicabs.iter().enumerate() {
        let profit = if a.serves[j].is_some() { p.price[j].clone() } else { S::zero() };
        for (w, rw) in r.price.iter().enumerate() {
            let Some(rw) = rw else { continue };
            let gain = rw.clone() - inst.metric.dist(w, t.location).clone() - profit.clone();
            if gain.is_pos() {
                violations.push(DiscreteViolation::TaxiDeviation { taxicab: j, at: w, gain });
            }
        }
    }
    Ok(DiscreteReport::from(violations))
}

/// Every served pair attains the surge minimum: `ℓ̄(i, j) + p_j = r_{loc b_i}`.
pub fn verify_achieves_min<S: Scalar>(
    inst: &DiscreteInstance<S>,
    a: &Assignment,
    p: &ClearingPrices<S>,
    r: &DiscreteSurgeVector<S>,
) -> Result<DiscreteReport<S>> {
    inst.metric.check_dim(r.price.len())?;
    let mut violations = Vec::new();
    for (j, s) in a.serves.iter().enumerate() {
        let Some(i) = *s else { continue };
        let lhs = inst.pickup_cost(i, j).clone() + p.price[j].clone();
        let surge = r.price[inst.passengers[i].location].clone();
        if surge.as_ref().is_none_or(|rv| !rv.approx_eq(&lhs)) {
            violations.push(DiscreteViolation::MinNotAchieved {
                passenger: i,
                taxicab: j,
                cost_plus_price: lhs,
                surge,
            });
        }
    }
    Ok(DiscreteReport::from(violations))
}

/// Integers `0..=12` plus every passenger's true value `± 1/2`, nonnegative
/// entries only, sorted and deduplicated.
pub fn default_misreport_grid<S: Scalar>(inst: &DiscreteInstance<S>) -> Vec<S> {
    let mut grid: Vec<S> = (0..=12).map(|x| S::from_i32(x).expect("small integer")).collect();
    let half = S::ratio(1, 2);
    for p in &inst.passengers {
        grid.push(p.value.clone() + half.clone());
        let below = p.value.clone() - half.clone();
        if !below.is_neg() {
            grid.push(below);
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("grid values are ordered"));
    grid.dedup_by(|a, b| a.approx_eq(b));
    grid
}

/// Quasi-linear utility at the true value: `val - r` if served, else 0.
fn passenger_utility<S: Scalar>(inst: &DiscreteInstance<S>, sol: &DiscreteSolution<S>, i: usize, true_value: &S) -> S {
    let served = sol.assignment.serves.contains(&Some(i));
    if !served {
        return S::zero();
    }
    let r = sol.surge.price[inst.passengers[i].location].clone().expect("a served passenger has a taxicab");
    true_value.clone() - r
}

/// Re-solves the instance for every passenger and every misreported value
/// and reports any report that strictly raises the passenger's utility.
pub fn verify_truthful<S: Scalar>(inst: &DiscreteInstance<S>, misreport_grid: &[S]) -> Result<DiscreteReport<S>> {
    if misreport_grid.is_empty() {
        return Err(Error::InvalidParameter("empty misreport grid".into()));
    }
    if inst.passengers.len() > MAX_TRUTH_PASSENGERS {
        return Err(Error::TooLarge(format!(
            "{} passengers exceed the enumeration limit of {MAX_TRUTH_PASSENGERS}",
            inst.passengers.len()
        )));
    }
    let truthful = solve_discrete(inst)?;
    let jobs: Vec<(usize, &S)> =
        (0..inst.passengers.len()).flat_map(|i| misreport_grid.iter().map(move |x| (i, x))).collect();
    let found: Vec<Option<DiscreteViolation<S>>> = jobs
        .par_iter()
        .map(|&(i, report)| -> Result<Option<DiscreteViolation<S>>> {
            let value = &inst.passengers[i].value;
            let honest = passenger_utility(inst, &truthful, i, value);
            let lied = inst.with_value(i, report.clone())?;
            let sol = solve_discrete(&lied)?;
            let gain = passenger_utility(inst, &sol, i, value) - honest;
            Ok(gain.is_pos().then(|| DiscreteViolation::ProfitableMisreport {
                passenger: i,
                report: report.clone(),
                gain,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(DiscreteReport::from(found.into_iter().flatten().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::ratio(n, 1)
    }

    fn line() -> MetricSpace<Rational> {
        MetricSpace::uniform(2, q(2)).unwrap()
    }

    #[test]
    fn two_passengers_one_taxi() {
        let inst = DiscreteInstance::from_locations(line(), vec![(1, q(5)), (1, q(3))], vec![0]).unwrap();
        let mkt = build_discrete_market(&inst).unwrap();
        assert_eq!(mkt.rows(), vec![vec![q(3)], vec![q(1)]]);
        let sol = solve_discrete(&inst).unwrap();
        assert_eq!(sol.assignment.serves, vec![Some(0)]);
        assert_eq!(sol.taxi_prices.price, vec![q(1)]);
        assert_eq!(sol.surge.price[1], Some(q(3)));
        assert_eq!(social_welfare_discrete(&inst, &sol.assignment).unwrap(), q(3));
        assert!(verify_envy_free(&inst, &sol.assignment, &sol.surge).unwrap().ok);
        assert!(verify_taxi_best_response(&inst, &sol.assignment, &sol.taxi_prices, &sol.surge).unwrap().ok);
        assert!(verify_achieves_min(&inst, &sol.assignment, &sol.taxi_prices, &sol.surge).unwrap().ok);
        assert!(verify_truthful(&inst, &default_misreport_grid(&inst)).unwrap().ok);
        let cheap = DiscreteSurgeVector { price: vec![Some(q(0)), Some(Rational::ratio(1, 2))] };
        assert!(!verify_envy_free(&inst, &sol.assignment, &cheap).unwrap().ok);
    }

    #[test]
    fn negative_surplus_goes_unserved() {
        let inst = DiscreteInstance::from_locations(line(), vec![(1, q(1))], vec![0]).unwrap();
        let sol = solve_discrete(&inst).unwrap();
        assert_eq!(sol.assignment.serves, vec![None]);
        assert_eq!(sol.taxi_prices.price, vec![q(0)]);
        assert_eq!(sol.surge.price[1], Some(q(2)));
        assert_eq!(social_welfare_discrete(&inst, &sol.assignment).unwrap(), q(0));
    }

    #[test]
    fn excess_supply_is_free() {
        let inst = DiscreteInstance::from_locations(line(), vec![(1, q(5))], vec![0, 0]).unwrap();
        let sol = solve_discrete(&inst).unwrap();
        assert_eq!(sol.taxi_prices.price, vec![q(0), q(0)]);
        assert_eq!(sol.surge.price[1], Some(q(2)));
    }

    #[test]
    fn empty_instance() {
        let inst = DiscreteInstance::<Rational>::from_locations(line(), vec![], vec![]).unwrap();
        let sol = solve_discrete(&inst).unwrap();
        assert_eq!(sol.surge.price, vec![None, None]);
        assert!(verify_envy_free(&inst, &sol.assignment, &sol.surge).unwrap().ok);
        assert!(verify_taxi_best_response(&inst, &sol.assignment, &sol.taxi_prices, &sol.surge).unwrap().ok);
        assert!(verify_truthful(&inst, &[q(1)]).unwrap().ok);
        assert!(verify_truthful(&inst, &[]).is_err());
        assert_eq!(social_welfare_discrete(&inst, &sol.assignment).unwrap(), q(0));
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(DiscreteInstance::from_locations(line(), vec![(5, q(1))], vec![]).is_err());
        assert!(DiscreteInstance::from_locations(line(), vec![(0, q(-1))], vec![]).is_err());
    }
}
