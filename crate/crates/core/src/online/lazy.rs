//! Lazy supply sequences and the `h`, `g`, `z` diagnostics.

use super::{DemandSequence, SupplyTrajectory};
use crate::error::{Error, Result};
use crate::mass::MassVector;
use crate::scalar::{self, Scalar};
use crate::transport::Flow;

/// Which laziness rule a flow entry `f^t(u, v)`, `u != v`, breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LazyRule {
    /// `s^t_v > d^t_v`: mass shipped into an oversupplied vertex.
    Overshoot,
    /// `s^{t-1}_u <= d^t_u`: mass shipped out of a vertex that needed it.
    Undersupplied,
    /// `s^t_u < d^t_u`: the sender is left below its demand.
    Drained,
}

/// Violations as `(t, u, v, rule)` where `t` indexes the flow into step
/// `t + 1`. With `strict` the drained rule is checked too.
pub fn lazy_violations<S: Scalar>(
    s: &SupplyTrajectory<S>,
    d: &DemandSequence<S>,
    strict: bool,
) -> Vec<(usize, usize, usize, LazyRule)> {
    let mut out = Vec::new();
    for (t, f) in s.flows().iter().enumerate() {
        let (prev, next, dt) = (&s.steps()[t], &s.steps()[t + 1], &d.steps()[t + 1]);
        for (u, v, x) in f.entries() {
            if u == v || !x.is_pos() {
                continue;
            }
            if (next[*v].clone() - dt[*v].clone()).is_pos() {
                out.push((t, *u, *v, LazyRule::Overshoot));
            }
            if !(prev[*u].clone() - dt[*u].clone()).is_pos() {
                out.push((t, *u, *v, LazyRule::Undersupplied));
            }
            if strict && (dt[*u].clone() - next[*u].clone()).is_pos() {
                out.push((t, *u, *v, LazyRule::Drained));
            }
        }
    }
    out
}

type Matrix<S> = Vec<Vec<S>>;

fn add<S: Scalar>(x: &mut S, y: S) {
    *x = x.clone() + y;
}

/// Replaces `w -> u -> v` chains by `w -> v`, which the triangle
/// inequality makes no more expensive.
fn remove_transshipment<S: Scalar>(f: &mut Matrix<S>) {
    let k = f.len();
    for u in 0..k {
        loop {
            let w = (0..k).find(|&w| w != u && f[w][u].is_pos());
            let v = (0..k).find(|&v| v != u && f[u][v].is_pos());
            let (Some(w), Some(v)) = (w, v) else { break };
            let m = scalar::min(&f[w][u], &f[u][v]);
            add(&mut f[w][u], -m.clone());
            add(&mut f[u][v], -m.clone());
            add(&mut f[u][u], m.clone());
            add(&mut f[w][v], m);
        }
    }
}

/// Keeps `eps` of the `u -> v` shipment at `u` during step `t` and lets the
/// following step send it on from `u` in the same proportions as `v`'s mass.
#[allow(clippy::needless_range_loop)]
fn keep_home<S: Scalar>(sup: &mut Matrix<S>, flows: &mut [Matrix<S>], t: usize, u: usize, v: usize, eps: S) {
    let before = sup[t][v].clone();
    add(&mut flows[t - 1][u][v], -eps.clone());
    add(&mut flows[t - 1][u][u], eps.clone());
    add(&mut sup[t][v], -eps.clone());
    add(&mut sup[t][u], eps.clone());
    if let Some(next) = flows.get_mut(t) {
        for w in 0..next.len() {
            let part = next[v][w].clone() * eps.clone() / before.clone();
            add(&mut next[v][w], -part.clone());
            add(&mut next[u][w], part);
        }
    }
}

/// Rewrites a supply sequence into a lazy one with at least the same
/// welfare. A forward sweep removes transshipment, then trims shipments
/// that overshoot the receiver's demand or drain the sender below its own
/// demand, carrying the kept mass into the next step's flow.
pub fn lazify<S: Scalar>(s: &SupplyTrajectory<S>, d: &DemandSequence<S>) -> Result<SupplyTrajectory<S>> {
    let k = d.k();
    let mut sup: Matrix<S> = s.steps().iter().map(|x| x.as_slice().to_vec()).collect();
    let mut flows: Vec<Matrix<S>> = s.flows().iter().map(Flow::to_matrix).collect();
    for t in 1..sup.len() {
        let dt = d.steps()[t].as_slice();
        remove_transshipment(&mut flows[t - 1]);
        for u in 0..k {
            for v in 0..k {
                if u == v {
                    continue;
                }
                let over = sup[t][v].clone() - dt[v].clone();
                if flows[t - 1][u][v].is_pos() && over.is_pos() {
                    let eps = scalar::min(&over, &flows[t - 1][u][v]);
                    keep_home(&mut sup, &mut flows, t, u, v, eps);
                }
                let short = dt[u].clone() - sup[t][u].clone();
                if flows[t - 1][u][v].is_pos() && short.is_pos() {
                    let eps = scalar::min(&short, &flows[t - 1][u][v]);
                    keep_home(&mut sup, &mut flows, t, u, v, eps);
                }
            }
        }
    }
    let steps = sup.into_iter().map(MassVector::new).collect::<Result<Vec<_>>>()?;
    let flows = flows
        .into_iter()
        .enumerate()
        .map(|(t, f)| {
            let entries = f
                .into_iter()
                .enumerate()
                .flat_map(|(u, row)| row.into_iter().enumerate().map(move |(v, x)| (u, v, scalar::pos_part(x))))
                .collect();
            Flow::new(entries, steps[t].clone(), steps[t + 1].clone(), d.metric())
        })
        .collect::<Result<Vec<_>>>()?;
    let out = SupplyTrajectory::with_flows(steps, flows, d)?;
    if s.total_sw().le_tol(out.total_sw()) {
        Ok(out)
    } else {
        Err(Error::ContractViolation(format!("lazify lowered welfare from {} to {}", s.total_sw(), out.total_sw())))
    }
}

/// `h`, `g` and `z` for window `n`; row `t` is step `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyDiagnostics<S> {
    pub h: Vec<Vec<S>>,
    pub g: Vec<Vec<S>>,
    pub z: Vec<Vec<S>>,
    pub n: usize,
}

impl<S: Scalar> LazyDiagnostics<S> {
    pub fn sum_h(&self) -> S {
        self.h.iter().flatten().cloned().sum()
    }

    /// Largest `Σ_i Σ_{τ ∈ [t-n, t)} z^τ_i` over all `t`.
    pub fn max_window_z(&self) -> S {
        let per_step: Vec<S> = self.z.iter().map(|row| row.iter().cloned().sum()).collect();
        (0..=per_step.len())
            .map(|t| per_step[t.saturating_sub(self.n)..t].iter().cloned().sum::<S>())
            .reduce(|a, b| scalar::max(&a, &b))
            .unwrap_or_else(S::zero)
    }
}

/// `h^t = min(s^{t-1}, d^t)` with `s^0 = s^1`; `g^t` is the largest demand
/// over the previous `n` steps (zero before the start); `z = max(0, h - g)`.
pub fn lazy_diagnostics<S: Scalar>(
    s: &SupplyTrajectory<S>,
    d: &DemandSequence<S>,
    n: usize,
) -> Result<LazyDiagnostics<S>> {
    if n == 0 {
        return Err(Error::InvalidParameter("window must be positive".into()));
    }
    if s.steps().len() != d.len() {
        return Err(Error::DimensionMismatch { expected: d.len(), found: s.steps().len() });
    }
    let k = d.k();
    let (mut h, mut g, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for t in 0..d.len() {
        let prev = &s.steps()[t.saturating_sub(1)];
        let hr: Vec<S> = (0..k).map(|i| scalar::min(&prev[i], &d.steps()[t][i])).collect();
        let gr: Vec<S> = (0..k)
            .map(|i| {
                d.steps()[t.saturating_sub(n)..t]
                    .iter()
                    .map(|x| x[i].clone())
                    .reduce(|a, b| scalar::max(&a, &b))
                    .unwrap_or_else(S::zero)
            })
            .collect();
        z.push(hr.iter().zip(&gr).map(|(a, b)| scalar::pos_part(a.clone() - b.clone())).collect());
        h.push(hr);
        g.push(gr);
    }
    Ok(LazyDiagnostics { h, g, z, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn v2(a: Rational) -> MassVector<Rational> {
        MassVector::new(vec![a.clone(), q(1, 1) - a]).unwrap()
    }

    fn seq(a: &[Rational]) -> DemandSequence<Rational> {
        DemandSequence::new(a.iter().cloned().map(v2).collect(), MetricSpace::uniform(2, q(1, 1)).unwrap()).unwrap()
    }

    #[test]
    fn overshoot_is_repaired() {
        let d = seq(&[q(1, 1), q(1, 2), q(1, 2)]);
        // ships everything to vertex 1 although it only wants half
        let s = SupplyTrajectory::new(vec![v2(q(1, 1)), v2(q(0, 1)), v2(q(1, 2))], &d).unwrap();
        assert!(!lazy_violations(&s, &d, false).is_empty());
        let lazy = lazify(&s, &d).unwrap();
        assert!(lazy_violations(&lazy, &d, true).is_empty());
        assert!(lazy.total_sw() >= s.total_sw());
        assert_eq!(lazy.steps()[1], v2(q(1, 2)));
    }

    #[test]
    fn lazy_input_is_unchanged() {
        let d = seq(&[q(1, 1), q(1, 4), q(1, 4)]);
        let s = SupplyTrajectory::new(vec![v2(q(1, 1)), v2(q(1, 2)), v2(q(1, 2))], &d).unwrap();
        assert!(lazy_violations(&s, &d, true).is_empty());
        assert_eq!(lazify(&s, &d).unwrap(), s);
    }

    #[test]
    fn zero_demand_diagnostics() {
        let m = MetricSpace::uniform(2, q(1, 1)).unwrap();
        let d = DemandSequence::new(vec![v2(q(1, 1)); 3], m).unwrap();
        let s = SupplyTrajectory::new(vec![v2(q(0, 1)); 3], &d).unwrap();
        let diag = lazy_diagnostics(&s, &d, 2).unwrap();
        assert!(diag.h.iter().flatten().all(|x| *x == q(0, 1)));
        assert_eq!(diag.g[0], vec![q(0, 1), q(0, 1)]);
        assert_eq!(diag.g[2], vec![q(1, 1), q(0, 1)]);
        assert_eq!(diag.max_window_z(), q(0, 1));
    }
}
