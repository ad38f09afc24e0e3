//! Earthmover flows between mass vectors on a finite metric.

mod simplex;
mod uniform;
mod witness;

pub use uniform::uniform_flow;
pub use witness::{alternative_optima, optimal_support, witness_flow};

use crate::error::{Error, Result};
use crate::mass::MassVector;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

pub(crate) use simplex::Simplex;

/// Sparse transport plan from `source` to `target`, entries sorted by `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow<S> {
    k: usize,
    entries: Vec<(usize, usize, S)>,
    source: MassVector<S>,
    target: MassVector<S>,
    cost: S,
}

impl<S: Scalar> Flow<S> {
    /// Builds a flow and checks it moves `source` onto `target`.
    pub fn new(
        entries: Vec<(usize, usize, S)>,
        source: MassVector<S>,
        target: MassVector<S>,
        metric: &MetricSpace<S>,
    ) -> Result<Self> {
        let f = Self::unchecked(entries, source, target, metric)?;
        f.validate()?;
        Ok(f)
    }

    /// Builds a flow without checking row and column sums. Entries must
    /// still index valid vertices.
    pub fn unchecked(
        entries: Vec<(usize, usize, S)>,
        source: MassVector<S>,
        target: MassVector<S>,
        metric: &MetricSpace<S>,
    ) -> Result<Self> {
        let k = metric.k();
        metric.check_dim(source.len())?;
        metric.check_dim(target.len())?;
        let mut entries = entries;
        if let Some(&(u, v, _)) = entries.iter().find(|(u, v, _)| *u >= k || *v >= k) {
            return Err(Error::InvalidFlow(format!("edge ({u}, {v}) out of range")));
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, S)> = Vec::with_capacity(entries.len());
        for (u, v, x) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 = last.2.clone() + x,
                _ => merged.push((u, v, x)),
            }
        }
        merged.retain(|(_, _, x)| !x.is_nil());
        let cost = merged.iter().map(|(u, v, x)| x.clone() * metric.dist(*u, *v).clone()).sum();
        Ok(Flow { k, entries: merged, source, target, cost })
    }

    /// Nonnegativity plus row sums equal to the source and column sums equal
    /// to the target.
    pub fn validate(&self) -> Result<()> {
        if let Some((u, v, x)) = self.entries.iter().find(|(_, _, x)| x.is_neg()) {
            return Err(Error::InvalidFlow(format!("negative flow {x} on ({u}, {v})")));
        }
        let (rows, cols) = self.marginals();
        let slack = S::tolerance() * S::from_usize(self.k).unwrap_or_else(S::one);
        for u in 0..self.k {
            if (rows[u].clone() - self.source[u].clone()).abs() > slack {
                return Err(Error::InvalidFlow(format!(
                    "outflow {} at vertex {u} differs from source mass {}",
                    rows[u], self.source[u]
                )));
            }
            if (cols[u].clone() - self.target[u].clone()).abs() > slack {
                return Err(Error::InvalidFlow(format!(
                    "inflow {} at vertex {u} differs from target mass {}",
                    cols[u], self.target[u]
                )));
            }
        }
        Ok(())
    }

    fn marginals(&self) -> (Vec<S>, Vec<S>) {
        let mut rows = vec![S::zero(); self.k];
        let mut cols = vec![S::zero(); self.k];
        for (u, v, x) in &self.entries {
            rows[*u] = rows[*u].clone() + x.clone();
            cols[*v] = cols[*v].clone() + x.clone();
        }
        (rows, cols)
    }

    /// Moves each vertex's mass onto itself.
    pub fn identity(s: &MassVector<S>, metric: &MetricSpace<S>) -> Result<Self> {
        let entries = s.as_slice().iter().enumerate().map(|(u, x)| (u, u, x.clone())).collect();
        Self::new(entries, s.clone(), s.clone(), metric)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[(usize, usize, S)] {
        &self.entries
    }

    pub fn source(&self) -> &MassVector<S> {
        &self.source
    }

    pub fn target(&self) -> &MassVector<S> {
        &self.target
    }

    pub fn cost(&self) -> &S {
        &self.cost
    }

    pub fn get(&self, u: usize, v: usize) -> S {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(u, v)))
            .map(|i| self.entries[i].2.clone())
            .unwrap_or_else(|_| S::zero())
    }

    /// Edges carrying positive flow, in lexicographic order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.entries.iter().filter(|e| e.2.is_pos()).map(|e| (e.0, e.1)).collect()
    }

    pub fn to_matrix(&self) -> Vec<Vec<S>> {
        let mut out = vec![vec![S::zero(); self.k]; self.k];
        for (u, v, x) in &self.entries {
            out[*u][*v] = x.clone();
        }
        out
    }

    /// Mass leaving vertices, `Σ_{u != v} f(u, v)`.
    pub fn moved_mass(&self) -> S {
        self.entries.iter().filter(|e| e.0 != e.1).map(|e| e.2.clone()).sum()
    }

    pub fn convert<T: Scalar>(&self, metric: &MetricSpace<T>) -> Result<Flow<T>> {
        let entries = self.entries.iter().map(|(u, v, x)| (*u, *v, T::from_rational(&x.to_rational()))).collect();
        Flow::unchecked(entries, self.source.convert(), self.target.convert(), metric)
    }
}

/// Dual certificate: `target[v] - source[u] <= ℓ(u, v)` everywhere, with
/// equality on every edge an optimal flow uses.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials<S> {
    pub source: Vec<S>,
    pub target: Vec<S>,
}

impl<S: Scalar> DualPotentials<S> {
    pub fn zero(k: usize) -> Self {
        DualPotentials { source: vec![S::zero(); k], target: vec![S::zero(); k] }
    }

    /// `ℓ(u, v) - target[v] + source[u]`.
    pub fn reduced_cost(&self, metric: &MetricSpace<S>, u: usize, v: usize) -> S {
        metric.dist(u, v).clone() - self.target[v].clone() + self.source[u].clone()
    }

    /// Dual objective `Σ target[v]·d_v - Σ source[u]·s_u`.
    pub fn objective(&self, s: &MassVector<S>, d: &MassVector<S>) -> S {
        let gain: S = self.target.iter().zip(d.as_slice()).map(|(p, x)| p.clone() * x.clone()).sum();
        let loss: S = self.source.iter().zip(s.as_slice()).map(|(p, x)| p.clone() * x.clone()).sum();
        gain - loss
    }

    /// First edge (lexicographically) where feasibility fails.
    pub fn first_infeasible(&self, metric: &MetricSpace<S>) -> Option<(usize, usize)> {
        let k = metric.k();
        (0..k).flat_map(|u| (0..k).map(move |v| (u, v))).find(|&(u, v)| self.reduced_cost(metric, u, v).is_neg())
    }
}

/// Result of a balanced transportation solve on arbitrary masses.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution<S> {
    pub entries: Vec<(usize, usize, S)>,
    pub duals: DualPotentials<S>,
    pub cost: S,
}

/// Solves the balanced transportation problem with `cost(u, v)` per unit.
/// Supplies and demands must be nonnegative with equal totals. Only
/// positive rows and columns enter the simplex; the remaining potentials
/// are filled in so the duals stay feasible on every pair.
pub fn solve_transport<S: Scalar>(
    supply: &[S],
    demand: &[S],
    cost: impl Fn(usize, usize) -> S,
) -> Result<TransportSolution<S>> {
    if supply.iter().chain(demand).any(|x| x.is_neg()) {
        return Err(Error::InvalidMass("negative supply or demand".into()));
    }
    let total_s: S = supply.iter().cloned().sum();
    let total_d: S = demand.iter().cloned().sum();
    let slack = S::tolerance() * S::from_usize(supply.len() + demand.len()).unwrap_or_else(S::one);
    if (total_s.clone() - total_d.clone()).abs() > slack {
        return Err(Error::InvalidMass(format!("unbalanced totals {total_s} and {total_d}")));
    }
    let mut src = vec![S::zero(); supply.len()];
    let mut tgt = vec![S::zero(); demand.len()];
    let mut entries = Vec::new();
    if let Some(solved) = SolvedBasis::new(supply, demand, &cost)? {
        let (pu, pv) = solved.simplex.potentials();
        for (i, &u) in solved.rows.iter().enumerate() {
            src[u] = -pu[i].clone();
        }
        for (j, &v) in solved.cols.iter().enumerate() {
            tgt[v] = pv[j].clone();
        }
        entries = solved.entries();
        complete_duals(&mut src, &mut tgt, &solved.rows, &solved.cols, &cost);
    }
    let cost_total = entries.iter().map(|(u, v, x)| x.clone() * cost(*u, *v)).sum();
    Ok(TransportSolution { entries, duals: DualPotentials { source: src, target: tgt }, cost: cost_total })
}

/// Optimal simplex basis over the positive rows and columns.
#[derive(Clone)]
pub(crate) struct SolvedBasis<S> {
    pub(crate) simplex: Simplex<S>,
    pub(crate) rows: Vec<usize>,
    pub(crate) cols: Vec<usize>,
}

impl<S: Scalar> SolvedBasis<S> {
    pub(crate) fn new(supply: &[S], demand: &[S], cost: &impl Fn(usize, usize) -> S) -> Result<Option<Self>> {
        let rows: Vec<usize> = (0..supply.len()).filter(|&u| supply[u].is_pos()).collect();
        let cols: Vec<usize> = (0..demand.len()).filter(|&v| demand[v].is_pos()).collect();
        if rows.is_empty() || cols.is_empty() {
            return Ok(None);
        }
        let a: Vec<S> = rows.iter().map(|&u| supply[u].clone()).collect();
        let b: Vec<S> = cols.iter().map(|&v| demand[v].clone()).collect();
        let c: Vec<S> = rows.iter().flat_map(|&u| cols.iter().map(move |&v| (u, v))).map(|(u, v)| cost(u, v)).collect();
        let mut simplex = Simplex::new(&a, &b, c);
        simplex.solve()?;
        Ok(Some(SolvedBasis { simplex, rows, cols }))
    }

    pub(crate) fn entries(&self) -> Vec<(usize, usize, S)> {
        self.simplex.positive_cells().into_iter().map(|(i, j, x)| (self.rows[i], self.cols[j], x)).collect()
    }
}

fn complete_duals<S: Scalar>(
    src: &mut [S],
    tgt: &mut [S],
    rows: &[usize],
    cols: &[usize],
    cost: &impl Fn(usize, usize) -> S,
) {
    let mut row_on = vec![false; src.len()];
    rows.iter().for_each(|&u| row_on[u] = true);
    let mut col_on = vec![false; tgt.len()];
    cols.iter().for_each(|&v| col_on[v] = true);
    for u in (0..src.len()).filter(|&u| !row_on[u]) {
        src[u] = cols
            .iter()
            .map(|&v| tgt[v].clone() - cost(u, v))
            .reduce(|a, b| crate::scalar::max(&a, &b))
            .unwrap_or_else(S::zero);
    }
    for v in (0..tgt.len()).filter(|&v| !col_on[v]) {
        tgt[v] = (0..src.len())
            .map(|u| src[u].clone() + cost(u, v))
            .reduce(|a, b| crate::scalar::min(&a, &b))
            .unwrap_or_else(S::zero);
    }
}

/// Exact earthmover flow from `s` to `d` with optimality duals. The flow is a
/// basic solution with at most `2k - 1` positive entries. If `s == d` the
/// identity flow is returned with zero duals.
pub fn min_cost_flow<S: Scalar>(
    s: &MassVector<S>,
    d: &MassVector<S>,
    metric: &MetricSpace<S>,
) -> Result<(Flow<S>, DualPotentials<S>)> {
    metric.check_dim(s.len())?;
    metric.check_dim(d.len())?;
    if s.approx_eq(d) {
        return Ok((Flow::identity(s, metric)?, DualPotentials::zero(metric.k())));
    }
    let sol = solve_transport(s.as_slice(), d.as_slice(), |u, v| metric.dist(u, v).clone())?;
    let flow = Flow::new(sol.entries, s.clone(), d.clone(), metric)?;
    Ok((flow, sol.duals))
}

/// Earthmover distance `em(s, d)`.
pub fn earthmover<S: Scalar>(s: &MassVector<S>, d: &MassVector<S>, metric: &MetricSpace<S>) -> Result<S> {
    if let Some(c) = metric.uniform_cost() {
        metric.check_dim(s.len())?;
        metric.check_dim(d.len())?;
        return Ok(c.clone() * s.tv_distance(d));
    }
    Ok(min_cost_flow(s, d, metric)?.0.cost().clone())
}

/// `Σ f(u, v)·ℓ(u, v)`.
pub fn flow_cost<S: Scalar>(f: &Flow<S>, metric: &MetricSpace<S>) -> Result<S> {
    metric.check_dim(f.k())?;
    Ok(f.entries().iter().map(|(u, v, x)| x.clone() * metric.dist(*u, *v).clone()).sum())
}

/// Outcome of checking a flow against a dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub optimal: bool,
    /// Pairs where `target[v] - source[u] > ℓ(u, v)`.
    pub infeasible: Vec<(usize, usize)>,
    /// Support edges that are not tight.
    pub slack_on_support: Vec<(usize, usize)>,
}

/// Checks dual feasibility and complementary slackness. An ill-formed flow
/// is an error; a valid but suboptimal one yields `optimal == false`.
pub fn verify_min_cost<S: Scalar>(
    f: &Flow<S>,
    duals: &DualPotentials<S>,
    metric: &MetricSpace<S>,
) -> Result<OptimalityReport> {
    metric.check_dim(f.k())?;
    metric.check_dim(duals.source.len())?;
    metric.check_dim(duals.target.len())?;
    f.validate()?;
    let k = metric.k();
    let infeasible: Vec<_> = (0..k)
        .flat_map(|u| (0..k).map(move |v| (u, v)))
        .filter(|&(u, v)| duals.reduced_cost(metric, u, v).is_neg())
        .collect();
    let slack_on_support: Vec<_> =
        f.support().into_iter().filter(|&(u, v)| !duals.reduced_cost(metric, u, v).is_nil()).collect();
    Ok(OptimalityReport { optimal: infeasible.is_empty() && slack_on_support.is_empty(), infeasible, slack_on_support })
}

/// Edges with zero reduced cost. Every min-cost flow is supported here.
pub fn zero_reduced_cost_edges<S: Scalar>(
    duals: &DualPotentials<S>,
    metric: &MetricSpace<S>,
) -> Result<Vec<(usize, usize)>> {
    metric.check_dim(duals.source.len())?;
    metric.check_dim(duals.target.len())?;
    if let Some((u, v)) = duals.first_infeasible(metric) {
        return Err(Error::InfeasibleDuals(u, v));
    }
    let k = metric.k();
    Ok((0..k)
        .flat_map(|u| (0..k).map(move |v| (u, v)))
        .filter(|&(u, v)| duals.reduced_cost(metric, u, v).is_nil())
        .collect())
}
