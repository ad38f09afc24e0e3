//! Min-cost flow by successive shortest paths with Dijkstra potentials.
//!
//! Capacities may be fractional or unbounded. Negative arc costs are allowed
//! as long as every arc with positive capacity points from a lower to a
//! higher node index, which gives the initial potentials in one sweep.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct Arc<S> {
    to: usize,
    /// `None` is unbounded.
    cap: Option<S>,
    flow: S,
    cost: S,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork<S> {
    arcs: Vec<Arc<S>>,
    adj: Vec<Vec<usize>>,
}

/// Handle to a forward arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcId(usize);

struct Entry<S> {
    key: S,
    node: usize,
}

impl<S: PartialOrd> PartialEq for Entry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: PartialOrd> Eq for Entry<S> {}

impl<S: PartialOrd> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: PartialOrd> Ord for Entry<S> {
    // reversed so the heap pops the smallest key
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.partial_cmp(&self.key).unwrap_or(Ordering::Equal).then(other.node.cmp(&self.node))
    }
}

impl<S: Scalar> FlowNetwork<S> {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { arcs: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: Option<S>, cost: S) -> ArcId {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, flow: S::zero(), cost: cost.clone() });
        self.arcs.push(Arc { to: from, cap: Some(S::zero()), flow: S::zero(), cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        ArcId(id)
    }

    pub fn flow(&self, arc: ArcId) -> &S {
        &self.arcs[arc.0].flow
    }

    fn residual(&self, e: usize) -> Option<S> {
        let a = &self.arcs[e];
        a.cap.as_ref().map(|c| c.clone() - a.flow.clone())
    }

    fn has_residual(&self, e: usize) -> bool {
        self.residual(e).is_none_or(|r| r.is_pos())
    }

    fn initial_potentials(&self) -> Result<Vec<S>> {
        let n = self.nodes();
        let mut pot: Vec<Option<S>> = vec![None; n];
        pot[0] = Some(S::zero());
        for u in 0..n {
            let Some(pu) = pot[u].clone() else { continue };
            for &e in &self.adj[u] {
                if !self.has_residual(e) {
                    continue;
                }
                let a = &self.arcs[e];
                if a.to <= u {
                    return Err(Error::Unsupported("network arcs must follow node order".into()));
                }
                let cand = pu.clone() + a.cost.clone();
                if pot[a.to].as_ref().is_none_or(|p| cand < *p) {
                    pot[a.to] = Some(cand);
                }
            }
        }
        let top = pot.iter().flatten().cloned().reduce(|a, b| crate::scalar::max(&a, &b)).unwrap_or_else(S::zero);
        Ok(pot.into_iter().map(|p| p.unwrap_or_else(|| top.clone())).collect())
    }

    fn shortest_paths(&self, source: usize, pot: &[S]) -> (Vec<Option<S>>, Vec<Option<usize>>) {
        let n = self.nodes();
        let mut dist: Vec<Option<S>> = vec![None; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(S::zero());
        heap.push(Entry { key: S::zero(), node: source });
        while let Some(Entry { key, node: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &e in &self.adj[u] {
                if !self.has_residual(e) {
                    continue;
                }
                let a = &self.arcs[e];
                if done[a.to] {
                    continue;
                }
                let reduced = crate::scalar::pos_part(a.cost.clone() + pot[u].clone() - pot[a.to].clone());
                let cand = key.clone() + reduced;
                if dist[a.to].as_ref().is_none_or(|d| cand < *d) {
                    dist[a.to] = Some(cand.clone());
                    via[a.to] = Some(e);
                    heap.push(Entry { key: cand, node: a.to });
                }
            }
        }
        (dist, via)
    }

    /// Sends `amount` from `source` (node 0) to `sink` at minimum cost and
    /// returns that cost.
    pub fn min_cost_flow(&mut self, sink: usize, amount: S) -> Result<S> {
        let source = 0;
        let mut pot = self.initial_potentials()?;
        let mut remaining = amount;
        let mut total = S::zero();
        while remaining.is_pos() {
            let (dist, via) = self.shortest_paths(source, &pot);
            let Some(reach) = dist[sink].clone() else {
                return Err(Error::InvalidParameter("sink unreachable with remaining demand".into()));
            };
            let mut path = Vec::new();
            let mut v = sink;
            while v != source {
                let e = via[v].expect("reached nodes have a parent arc");
                path.push(e);
                v = self.arcs[e ^ 1].to;
            }
            let push = path
                .iter()
                .filter_map(|&e| self.residual(e))
                .fold(remaining.clone(), |m, r| crate::scalar::min(&m, &r));
            for &e in &path {
                self.arcs[e].flow = self.arcs[e].flow.clone() + push.clone();
                self.arcs[e ^ 1].flow = self.arcs[e ^ 1].flow.clone() - push.clone();
                total = total + push.clone() * self.arcs[e].cost.clone();
            }
            remaining = remaining - push;
            for (p, d) in pot.iter_mut().zip(&dist) {
                *p = p.clone() + d.clone().unwrap_or_else(|| reach.clone());
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn picks_cheaper_parallel_arcs() {
        let mut g = FlowNetwork::new(3);
        let cheap = g.add_arc(0, 1, Some(q(1, 3)), q(-1, 1));
        let free = g.add_arc(0, 1, None, q(0, 1));
        g.add_arc(1, 2, None, q(0, 1));
        let cost = g.min_cost_flow(2, q(1, 1)).unwrap();
        assert_eq!(cost, q(-1, 3));
        assert_eq!(*g.flow(cheap), q(1, 3));
        assert_eq!(*g.flow(free), q(2, 3));
    }

    #[test]
    fn reroutes_through_residual_arcs() {
        // 0 -> 1 -> 3 and 0 -> 2 -> 3 with a cross arc 1 -> 2
        let mut g = FlowNetwork::new(4);
        g.add_arc(0, 1, Some(1.0), 1.0);
        g.add_arc(0, 2, Some(1.0), 4.0);
        g.add_arc(1, 2, Some(1.0), 1.0);
        g.add_arc(1, 3, Some(1.0), 5.0);
        g.add_arc(2, 3, Some(1.0), 1.0);
        let cost = g.min_cost_flow(3, 2.0).unwrap();
        assert!((cost - 11.0).abs() < 1e-12);
    }

    #[test]
    fn reports_infeasible_amounts() {
        let mut g = FlowNetwork::new(2);
        g.add_arc(0, 1, Some(q(1, 2)), q(0, 1));
        assert!(g.min_cost_flow(1, q(1, 1)).is_err());
    }
}
