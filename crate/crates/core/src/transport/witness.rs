//! Optimal flows other than the one the solver returned.
//!
//! With an optimal dual fixed, the optimal flows are exactly the feasible
//! flows supported on tight edges. A tight edge `(u, v)` idle in `f` is used
//! by some optimum iff an alternating cycle exists: add on tight edges,
//! remove on edges where `f > 0`.

use std::collections::{HashSet, VecDeque};

use super::{DualPotentials, Flow, SolvedBasis};
use crate::error::Result;
use crate::mass::MassVector;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

/// An optimal flow with `g(u, v) > 0`, built by pushing mass around one
/// alternating cycle of `f`. `None` if no optimal flow uses the edge.
pub fn witness_flow<S: Scalar>(
    f: &Flow<S>,
    duals: &DualPotentials<S>,
    metric: &MetricSpace<S>,
    u: usize,
    v: usize,
) -> Result<Option<Flow<S>>> {
    metric.check_dim(f.k())?;
    if f.get(u, v).is_pos() {
        return Ok(Some(f.clone()));
    }
    if !duals.reduced_cost(metric, u, v).is_nil() {
        return Ok(None);
    }
    let Some(cycle) = alternating_cycle(f, duals, metric, u, v) else {
        return Ok(None);
    };
    let eps = cycle
        .iter()
        .skip(1)
        .step_by(2)
        .map(|&(a, b)| f.get(a, b))
        .reduce(|a, b| crate::scalar::min(&a, &b))
        .expect("cycle removes flow somewhere");
    let mut entries = f.entries().to_vec();
    for (pos, &(a, b)) in cycle.iter().enumerate() {
        let delta = if pos % 2 == 0 { eps.clone() } else { -eps.clone() };
        entries.push((a, b, delta));
    }
    Flow::new(entries, f.source().clone(), f.target().clone(), metric).map(Some)
}

/// Cells `[(u, v), (x1, v), (x1, y1), (x2, y1), ..., (u, y)]`; even
/// positions are tight edges that gain mass, odd positions carry flow in
/// `f` and lose it.
fn alternating_cycle<S: Scalar>(
    f: &Flow<S>,
    duals: &DualPotentials<S>,
    metric: &MetricSpace<S>,
    u: usize,
    v: usize,
) -> Option<Vec<(usize, usize)>> {
    let k = metric.k();
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (x, y, w) in f.entries() {
        if w.is_pos() {
            into[*y].push(*x);
        }
    }
    // parent[x] = (previous source, column through which x was reached)
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; k];
    let mut col_seen = vec![false; k];
    let mut queue = VecDeque::new();
    col_seen[v] = true;
    for &x in &into[v] {
        parent[x] = Some((usize::MAX, v));
        queue.push_back(x);
    }
    let mut found = parent[u].is_some();
    while !found {
        let Some(x) = queue.pop_front() else { break };
        for y in 0..k {
            if col_seen[y] || !duals.reduced_cost(metric, x, y).is_nil() {
                continue;
            }
            col_seen[y] = true;
            for &x2 in &into[y] {
                if parent[x2].is_none() {
                    parent[x2] = Some((x, y));
                    if x2 == u {
                        found = true;
                    }
                    queue.push_back(x2);
                }
            }
            if found {
                break;
            }
        }
    }
    if !found {
        return None;
    }
    // walk back from u to v
    let mut back = Vec::new();
    let mut x = u;
    loop {
        let (prev, y) = parent[x].expect("reached node has a parent");
        back.push((x, y));
        if prev == usize::MAX {
            break;
        }
        back.push((prev, y));
        x = prev;
    }
    // back = [(u, y_last), (x_last, y_last), ..., (x1, v)]
    back.reverse();
    let mut cycle = vec![(u, v)];
    cycle.extend(back);
    Some(cycle)
}

/// Every edge used by at least one min-cost flow, given one optimal flow and
/// an optimal dual.
pub fn optimal_support<S: Scalar>(
    f: &Flow<S>,
    duals: &DualPotentials<S>,
    metric: &MetricSpace<S>,
) -> Result<Vec<(usize, usize)>> {
    metric.check_dim(f.k())?;
    let k = metric.k();
    let mut out = Vec::new();
    for u in 0..k {
        if !f.source()[u].is_pos() {
            continue;
        }
        for v in 0..k {
            if !f.target()[v].is_pos() || !duals.reduced_cost(metric, u, v).is_nil() {
                continue;
            }
            if f.get(u, v).is_pos() || alternating_cycle(f, duals, metric, u, v).is_some() {
                out.push((u, v));
            }
        }
    }
    Ok(out)
}

/// Distinct basic optimal flows reached from the solver's basis by pivots on
/// zero-reduced-cost cells, the solver's own flow first. Stops after `limit`
/// flows.
pub fn alternative_optima<S: Scalar>(
    s: &MassVector<S>,
    d: &MassVector<S>,
    metric: &MetricSpace<S>,
    limit: usize,
) -> Result<Vec<Flow<S>>> {
    metric.check_dim(s.len())?;
    metric.check_dim(d.len())?;
    let cost = |u: usize, v: usize| metric.dist(u, v).clone();
    let Some(start) = SolvedBasis::new(s.as_slice(), d.as_slice(), &cost)? else {
        return Ok(Vec::new());
    };
    let mut flows: Vec<Flow<S>> = Vec::new();
    let mut seen_bases = HashSet::new();
    let mut queue = VecDeque::from([start]);
    let max_bases = limit.saturating_mul(16).max(64);
    while let Some(basis) = queue.pop_front() {
        if flows.len() >= limit || seen_bases.len() >= max_bases {
            break;
        }
        let key = basis_key(&basis);
        if !seen_bases.insert(key) {
            continue;
        }
        let flow = Flow::new(basis.entries(), s.clone(), d.clone(), metric)?;
        if !flows.iter().any(|g| g.entries() == flow.entries()) {
            flows.push(flow);
        }
        for (i, j) in basis.simplex.degenerate_candidates() {
            let mut next = basis.clone();
            next.simplex.pivot(i, j);
            queue.push_back(next);
        }
    }
    Ok(flows)
}

fn basis_key<S: Scalar>(b: &SolvedBasis<S>) -> Vec<bool> {
    let (m, n) = (b.simplex.m, b.simplex.n);
    (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| b.simplex.is_basic(i, j)).collect()
}
