//! Surge prices when supply and demand are continuous masses.
//!
//! A min-cost flow from supply to demand becomes a unit-demand market with
//! one bidder and one item per support edge. Minimal clearing prices of
//! that market give one price per destination, and the surge price there
//! is `C - p`.

use crate::error::{Error, Result};
use crate::market::{max_weight_matching, minimal_walrasian_prices, ClearingPrices, UnitDemandMarket};
use crate::mass::MassVector;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;
use crate::transport::{min_cost_flow, optimal_support, Flow};

/// How vertices without demand are priced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroDemandPrice {
    #[default]
    Zero,
    One,
    /// The constant `C` itself, i.e. a zero item price.
    CMinusZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeVector<S> {
    pub price: Vec<S>,
    pub zero_demand: ZeroDemandPrice,
}

/// Market induced by a flow: bidder `(w, z)` values item `(x, y)` at
/// `C - ℓ(w, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMarket<S> {
    pub market: UnitDemandMarket<S>,
    /// Support edge behind each bidder and each item, in the same order.
    pub edges: Vec<(usize, usize)>,
    pub c: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumViolation<S> {
    pub origin: usize,
    pub flowed_to: usize,
    pub better: usize,
    pub gap: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<S> {
    pub ok: bool,
    pub violations: Vec<EquilibriumViolation<S>>,
    /// Every edge some min-cost flow from `s` to `s'` uses.
    pub checked_edges: Vec<(usize, usize)>,
    pub checked_edge_set: String,
}

/// `C = max ℓ + 1`.
pub fn market_constant<S: Scalar>(m: &MetricSpace<S>) -> S {
    m.max_distance() + S::one()
}

/// Utility of a taxicab at `u` that drives to `v`:
/// `r_v · min(s'_v, d_v) / s'_v - ℓ(u, v)`, with the fraction taken as 0 when
/// `s'_v = 0`.
pub fn taxicab_utility<S: Scalar>(
    u: usize,
    v: usize,
    s_new: &MassVector<S>,
    r: &SurgeVector<S>,
    d: &MassVector<S>,
    m: &MetricSpace<S>,
) -> S {
    let sv = &s_new[v];
    let earn = if sv.is_pos() { r.price[v].clone() * crate::scalar::min(sv, &d[v]) / sv.clone() } else { S::zero() };
    earn - m.dist(u, v).clone()
}

/// Utility of a single taxicab deviating to `w`. Where `s'_w = 0` the
/// deviator is alone and serves any demand there for sure, so the fraction
/// is 1 if `d_w > 0`. Elsewhere this equals [`taxicab_utility`].
pub fn deviation_utility<S: Scalar>(
    u: usize,
    w: usize,
    s_new: &MassVector<S>,
    r: &SurgeVector<S>,
    d: &MassVector<S>,
    m: &MetricSpace<S>,
) -> S {
    if !s_new[w].is_pos() && d[w].is_pos() {
        return r.price[w].clone() - m.dist(u, w).clone();
    }
    taxicab_utility(u, w, s_new, r, d, m)
}

pub fn build_market_from_flow<S: Scalar>(f: &Flow<S>, m: &MetricSpace<S>) -> Result<FlowMarket<S>> {
    m.check_dim(f.k())?;
    let edges = f.support();
    if edges.is_empty() {
        return Err(Error::InvalidFlow("flow has empty support".into()));
    }
    let c = market_constant(m);
    let valuation =
        edges.iter().map(|&(w, _)| edges.iter().map(|&(_, y)| c.clone() - m.dist(w, y).clone()).collect()).collect();
    let bidders = edges.iter().map(|(w, z)| format!("b({w},{z})")).collect();
    let items = edges.iter().map(|(x, y)| format!("m({x},{y})")).collect();
    Ok(FlowMarket { market: UnitDemandMarket::new(bidders, items, valuation)?, edges, c })
}

/// Minimal clearing prices of a flow market, collapsed to one price per
/// destination. Fails if two items with the same destination disagree or if
/// the optimal matching leaves a bidder out.
pub fn destination_prices<S: Scalar>(fm: &FlowMarket<S>, k: usize) -> Result<(ClearingPrices<S>, Vec<Option<S>>)> {
    let g = max_weight_matching(&fm.market);
    if let Some(i) = g.assignment().iter().position(Option::is_none) {
        return Err(Error::ContractViolation(format!(
            "bidder {} left unmatched in a flow market",
            fm.market.bidders()[i]
        )));
    }
    let p = minimal_walrasian_prices(&fm.market, &g)?;
    let mut per_dest: Vec<Option<S>> = vec![None; k];
    for (j, &(_, y)) in fm.edges.iter().enumerate() {
        match &per_dest[y] {
            None => per_dest[y] = Some(p.price[j].clone()),
            Some(q) if q.approx_eq(&p.price[j]) => {}
            Some(q) => {
                return Err(Error::ContractViolation(format!("items into vertex {y} priced {q} and {}", p.price[j])))
            }
        }
    }
    Ok((p, per_dest))
}

/// Surge prices under which the supply `s` moves to exactly `d`.
pub fn continuous_surge_prices<S: Scalar>(
    s: &MassVector<S>,
    d: &MassVector<S>,
    m: &MetricSpace<S>,
    zero_demand: ZeroDemandPrice,
) -> Result<(SurgeVector<S>, Flow<S>)> {
    let (f, _) = min_cost_flow(s, d, m)?;
    let fm = build_market_from_flow(&f, m)?;
    let (_, per_dest) = destination_prices(&fm, m.k())?;
    let price = (0..m.k())
        .map(|y| {
            if d[y].is_pos() {
                let p = per_dest[y].clone().expect("positive demand receives flow");
                fm.c.clone() - p
            } else {
                match zero_demand {
                    ZeroDemandPrice::Zero => S::zero(),
                    ZeroDemandPrice::One => S::one(),
                    ZeroDemandPrice::CMinusZero => fm.c.clone(),
                }
            }
        })
        .collect();
    Ok((SurgeVector { price, zero_demand }, f))
}

/// Checks that no taxicab on any edge of any min-cost flow from `s` to
/// `s_new` could do strictly better by driving elsewhere. Alternatives are
/// valued with [`deviation_utility`].
pub fn verify_equilibrium_continuous<S: Scalar>(
    s: &MassVector<S>,
    s_new: &MassVector<S>,
    r: &SurgeVector<S>,
    d: &MassVector<S>,
    m: &MetricSpace<S>,
) -> Result<EquilibriumReport<S>> {
    m.check_dim(r.price.len())?;
    m.check_dim(d.len())?;
    let (f, duals) = min_cost_flow(s, s_new, m)?;
    let checked_edges = optimal_support(&f, &duals, m)?;
    let k = m.k();
    let mut violations = Vec::new();
    let mut best_cache: Vec<Option<(usize, S)>> = vec![None; k];
    for &(u, v) in &checked_edges {
        let (w, best) = best_cache[u]
            .get_or_insert_with(|| {
                (0..k)
                    .map(|w| (w, deviation_utility(u, w, s_new, r, d, m)))
                    .reduce(|a, b| if b.1 > a.1 { b } else { a })
                    .expect("metric has a vertex")
            })
            .clone();
        let gap = best - taxicab_utility(u, v, s_new, r, d, m);
        if gap.is_pos() {
            violations.push(EquilibriumViolation { origin: u, flowed_to: v, better: w, gap });
        }
    }
    Ok(EquilibriumReport {
        ok: violations.is_empty(),
        violations,
        checked_edge_set: format!(
            "{} edges: union of supports of all min-cost flows (tight edges with an alternating-cycle witness)",
            checked_edges.len()
        ),
        checked_edges,
    })
}

/// True iff `(s, d, r)` is an equilibrium inducing `d` and every candidate
/// supply fails to be one.
pub fn verify_unique_induction<S: Scalar>(
    s: &MassVector<S>,
    d: &MassVector<S>,
    r: &SurgeVector<S>,
    m: &MetricSpace<S>,
    candidates: &[MassVector<S>],
) -> Result<bool> {
    if let Some(i) = candidates.iter().position(|c| c.approx_eq(d)) {
        return Err(Error::InvalidParameter(format!("candidate {i} equals the demand")));
    }
    if !verify_equilibrium_continuous(s, d, r, d, m)?.ok {
        return Ok(false);
    }
    for c in candidates {
        if verify_equilibrium_continuous(s, c, r, d, m)?.ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Candidate supplies `d + ε(e_a - e_b)` over positive-demand vertices
/// `a != b`, with `0 < ε < d_b` so the support of `d` is unchanged.
/// `draws` yields pairs `(a_raw, b_raw, t)` with `t` in `(0, 1)`.
pub fn support_preserving_perturbations<S: Scalar>(
    d: &MassVector<S>,
    draws: impl IntoIterator<Item = (usize, usize, S)>,
) -> Vec<MassVector<S>> {
    let pos: Vec<usize> = (0..d.len()).filter(|&v| d[v].is_pos()).collect();
    if pos.len() < 2 {
        return Vec::new();
    }
    draws
        .into_iter()
        .map(|(a, b, t)| {
            let a = pos[a % pos.len()];
            let mut b = pos[b % pos.len()];
            if a == b {
                b = pos[(pos.iter().position(|&x| x == a).expect("a in support") + 1) % pos.len()];
            }
            let eps = d[b].clone() * t;
            let mut v = d.as_slice().to_vec();
            v[a] = v[a].clone() + eps.clone();
            v[b] = v[b].clone() - eps;
            MassVector::new(v).expect("perturbation keeps the simplex")
        })
        .collect()
}

/// Prices aimed at moving the supply to `alpha` instead of `d`:
/// `r̄_i = max(1, α_i / d_i) · r_i`. The returned report checks the
/// equilibrium condition for the new supply `alpha`.
pub fn target_supply_surge<S: Scalar>(
    s: &MassVector<S>,
    d: &MassVector<S>,
    alpha: &MassVector<S>,
    m: &MetricSpace<S>,
    zero_demand: ZeroDemandPrice,
) -> Result<(SurgeVector<S>, EquilibriumReport<S>)> {
    m.check_dim(alpha.len())?;
    if let Some(i) = (0..alpha.len()).find(|&i| alpha[i].is_pos() && !d[i].is_pos()) {
        return Err(Error::Precondition(format!("target supply positive at vertex {i} where demand is zero")));
    }
    let (r, _) = continuous_surge_prices(s, d, m, zero_demand)?;
    let price = r
        .price
        .iter()
        .enumerate()
        .map(|(i, ri)| {
            if d[i].is_pos() {
                let ratio = alpha[i].clone() / d[i].clone();
                crate::scalar::max(&S::one(), &ratio) * ri.clone()
            } else {
                ri.clone()
            }
        })
        .collect();
    let r_bar = SurgeVector { price, zero_demand };
    let report = verify_equilibrium_continuous(s, alpha, &r_bar, d, m)?;
    Ok((r_bar, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn two_point() -> (MetricSpace<Rational>, MassVector<Rational>, MassVector<Rational>) {
        let m = MetricSpace::uniform(2, q(1, 1)).unwrap();
        let s = MassVector::new(vec![q(1, 1), q(0, 1)]).unwrap();
        let d = MassVector::new(vec![q(0, 1), q(1, 1)]).unwrap();
        (m, s, d)
    }

    #[test]
    fn two_point_prices() {
        let (m, s, d) = two_point();
        let (f, _) = min_cost_flow(&s, &d, &m).unwrap();
        let fm = build_market_from_flow(&f, &m).unwrap();
        assert_eq!(fm.c, q(2, 1));
        assert_eq!(*fm.market.value(0, 0), q(1, 1));
        let (r, _) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::Zero).unwrap();
        assert_eq!(r.price, vec![q(0, 1), q(2, 1)]);
        let (r1, _) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::One).unwrap();
        assert_eq!(r1.price[0], q(1, 1));
        assert!(verify_equilibrium_continuous(&s, &d, &r, &d, &m).unwrap().ok);
        assert!(verify_unique_induction(&s, &d, &r, &m, &[s.clone()]).unwrap());
        assert!(verify_unique_induction(&s, &d, &r, &m, &[d.clone()]).is_err());
    }

    #[test]
    fn single_vertex_market() {
        let m = MetricSpace::uniform(1, q(1, 1)).unwrap();
        let s = MassVector::<Rational>::uniform(1);
        let f = Flow::identity(&s, &m).unwrap();
        let fm = build_market_from_flow(&f, &m).unwrap();
        assert_eq!(*fm.market.value(0, 0), fm.c);
    }

    #[test]
    fn empty_destination_utility() {
        let (m, s, d) = two_point();
        let r = SurgeVector { price: vec![q(9, 1), q(9, 1)], zero_demand: ZeroDemandPrice::Zero };
        assert_eq!(taxicab_utility(1, 0, &d, &r, &s, &m), q(-1, 1));
    }

    #[test]
    fn target_supply_precondition() {
        let (m, s, d) = two_point();
        assert!(matches!(target_supply_surge(&s, &d, &s, &m, ZeroDemandPrice::Zero), Err(Error::Precondition(_))));
        let (r, rep) = target_supply_surge(&s, &d, &d, &m, ZeroDemandPrice::Zero).unwrap();
        assert_eq!(r.price, continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::Zero).unwrap().0.price);
        assert!(rep.ok);
    }
}
