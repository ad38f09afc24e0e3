//! Offline optimum: exact time-expanded min-cost flow, plus two dynamic
//! programs for the structured sequences used in experiments.

use super::{DemandSequence, SupplyTrajectory};
use crate::error::{Error, Result};
use crate::mass::MassVector;
use crate::mcf::FlowNetwork;
use crate::scalar::{self, Scalar};

/// Largest `T·k` the exact solver accepts.
pub const EXACT_SIZE_CAP: usize = 10_000;

/// Best supply sequence for `d`, dispatching to a dynamic program when the
/// sequence allows it and to the exact flow formulation otherwise.
pub fn offline_opt<S: Scalar>(d: &DemandSequence<S>) -> Result<SupplyTrajectory<S>> {
    if d.metric().uniform_cost().is_some() && demand_blocks(d).is_some() {
        return offline_opt_blocks(d);
    }
    if d.k() == 2 {
        return offline_opt_two_vertex(d);
    }
    offline_opt_exact(d)
}

fn confirm<S: Scalar>(traj: SupplyTrajectory<S>, value: &S) -> Result<SupplyTrajectory<S>> {
    if !traj.total_sw().approx_eq(value) {
        return Err(Error::ContractViolation(format!(
            "recovered supply has welfare {} but the solver reported {value}",
            traj.total_sw()
        )));
    }
    Ok(traj)
}

/// Time-expanded network: per step and vertex an entry and an exit node
/// joined by a reward arc (capacity `d^t_i`, cost −1) and a free arc;
/// exits connect to the next step's entries at metric cost. One unit of
/// mass enters at the first step anywhere.
pub fn offline_opt_exact<S: Scalar>(d: &DemandSequence<S>) -> Result<SupplyTrajectory<S>> {
    let (t_len, k) = (d.len(), d.k());
    if t_len * k > EXACT_SIZE_CAP {
        return Err(Error::TooLarge(format!("T·k = {} exceeds {EXACT_SIZE_CAP}", t_len * k)));
    }
    let m = d.metric();
    let hub_cost = m.uniform_cost().cloned();
    let layer = 2 * k + usize::from(hub_cost.is_some());
    let entry = |t: usize, i: usize| 1 + t * layer + i;
    let exit = |t: usize, i: usize| 1 + t * layer + k + i;
    let hub = |t: usize| 1 + t * layer + 2 * k;
    let sink = 1 + t_len * layer;
    let mut g = FlowNetwork::new(sink + 1);
    for i in 0..k {
        g.add_arc(0, entry(0, i), None, S::zero());
    }
    let mut node_arcs = Vec::with_capacity(t_len * k);
    for (t, dt) in d.steps().iter().enumerate() {
        for i in 0..k {
            let reward = dt[i].is_pos().then(|| g.add_arc(entry(t, i), exit(t, i), Some(dt[i].clone()), -S::one()));
            let free = g.add_arc(entry(t, i), exit(t, i), None, S::zero());
            node_arcs.push((reward, free));
        }
        if t + 1 == t_len {
            continue;
        }
        match &hub_cost {
            Some(c) => {
                for i in 0..k {
                    g.add_arc(exit(t, i), entry(t + 1, i), None, S::zero());
                    g.add_arc(exit(t, i), hub(t), None, c.clone());
                    g.add_arc(hub(t), entry(t + 1, i), None, S::zero());
                }
            }
            None => {
                for i in 0..k {
                    for j in 0..k {
                        g.add_arc(exit(t, i), entry(t + 1, j), None, m.dist(i, j).clone());
                    }
                }
            }
        }
    }
    for i in 0..k {
        g.add_arc(exit(t_len - 1, i), sink, None, S::zero());
    }
    let cost = g.min_cost_flow(sink, S::one())?;
    let steps = node_arcs
        .chunks(k)
        .map(|row| {
            let masses = row
                .iter()
                .map(|(reward, free)| reward.map_or_else(S::zero, |a| g.flow(a).clone()) + g.flow(*free).clone())
                .collect();
            MassVector::new(masses)
        })
        .collect::<Result<Vec<_>>>()?;
    confirm(SupplyTrajectory::new(steps, d)?, &-cost)
}

/// Groups steps by support when every step is uniform on its support and
/// any two supports are equal or disjoint.
fn demand_blocks<S: Scalar>(d: &DemandSequence<S>) -> Option<(Vec<Vec<usize>>, Vec<usize>)> {
    let k = d.k();
    let mut owner: Vec<Option<usize>> = vec![None; k];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut of_step = Vec::with_capacity(d.len());
    for dt in d.steps() {
        let support: Vec<usize> = (0..k).filter(|&i| dt[i].is_pos()).collect();
        let share = S::one() / S::from_usize(support.len()).expect("support size fits");
        if support.iter().any(|&i| !dt[i].approx_eq(&share)) {
            return None;
        }
        let b = match owner[support[0]] {
            Some(b) if blocks[b] == support => b,
            Some(_) => return None,
            None => {
                if support.iter().any(|&i| owner[i].is_some()) {
                    return None;
                }
                support.iter().for_each(|&i| owner[i] = Some(blocks.len()));
                blocks.push(support);
                blocks.len() - 1
            }
        };
        of_step.push(b);
    }
    Some((blocks, of_step))
}

/// Uniform metric and each step uniform on one block of a partition. All
/// mass then sits on one block at a time, spread evenly, and the optimum is
/// a shortest path over blocks.
pub fn offline_opt_blocks<S: Scalar>(d: &DemandSequence<S>) -> Result<SupplyTrajectory<S>> {
    let Some(c) = d.metric().uniform_cost().cloned() else {
        return Err(Error::Unsupported("block program needs a uniform metric".into()));
    };
    let Some((blocks, of_step)) = demand_blocks(d) else {
        return Err(Error::Unsupported("demand is not uniform on a partition of blocks".into()));
    };
    let n = blocks.len();
    let gain = |t: usize, b: usize| if of_step[t] == b { S::one() } else { S::zero() };
    let mut value: Vec<Vec<S>> = Vec::with_capacity(d.len());
    value.push((0..n).map(|b| gain(0, b)).collect());
    for t in 1..d.len() {
        let prev = &value[t - 1];
        let best = prev.iter().cloned().reduce(|a, b| scalar::max(&a, &b)).expect("at least one block");
        let jump = best - c.clone();
        let row = (0..n).map(|b| gain(t, b) + scalar::max(&prev[b], &jump)).collect();
        value.push(row);
    }
    let argmax = |row: &[S]| {
        (0..row.len()).fold(0, |bi, b| if row[b] > row[bi] && !row[b].approx_eq(&row[bi]) { b } else { bi })
    };
    let last = value.last().expect("nonempty");
    let total = last[argmax(last)].clone();
    let mut path = vec![argmax(last)];
    for t in (1..d.len()).rev() {
        let here = *path.last().expect("nonempty");
        let prev = &value[t - 1];
        let top = argmax(prev);
        let stay = (prev[top].clone() - c.clone()).le_tol(&prev[here]);
        path.push(if stay { here } else { top });
    }
    path.reverse();
    let shapes = blocks.iter().map(|b| MassVector::uniform_on(d.k(), b)).collect::<Result<Vec<_>>>()?;
    let steps = path.into_iter().map(|b| shapes[b].clone()).collect();
    confirm(SupplyTrajectory::new(steps, d)?, &total)
}

/// Concave piecewise-linear function on `[0, 1]` given by breakpoints.
type Pl<S> = Vec<(S, S)>;

fn eval<S: Scalar>(f: &Pl<S>, x: &S) -> S {
    let i = f.iter().position(|(px, _)| px >= x).unwrap_or(f.len() - 1);
    if i == 0 || f[i].0 == *x {
        return f[i].1.clone();
    }
    let ((x0, y0), (x1, y1)) = (&f[i - 1], &f[i]);
    y0.clone() + (y1.clone() - y0.clone()) * (x.clone() - x0.clone()) / (x1.clone() - x0.clone())
}

/// Adds the one-step service `min(x, a) + min(1 - x, 1 - a)`.
fn add_service<S: Scalar>(f: &mut Pl<S>, a: &S) {
    if !f.iter().any(|(x, _)| x == a) {
        let y = eval(f, a);
        let at = f.iter().position(|(x, _)| x > a).unwrap_or(f.len());
        f.insert(at, (a.clone(), y));
    }
    for (x, y) in f.iter_mut() {
        let served = if *x <= *a { x.clone() + S::one() - a.clone() } else { a.clone() + S::one() - x.clone() };
        *y = y.clone() + served;
    }
}

/// `x ↦ max_y f(y) − c|x − y|`: slopes clamped to `[−c, c]` around the peak.
fn clip<S: Scalar>(f: &Pl<S>, c: &S) -> Pl<S> {
    let peak = (0..f.len()).fold(0, |pi, i| if f[i].1 > f[pi].1 { i } else { pi });
    let mut g = f.clone();
    for i in (0..peak).rev() {
        let dx = f[i + 1].0.clone() - f[i].0.clone();
        let slope = (f[i + 1].1.clone() - f[i].1.clone()) / dx.clone();
        g[i].1 = g[i + 1].1.clone() - scalar::min(&slope, c) * dx;
    }
    for i in peak + 1..f.len() {
        let dx = f[i].0.clone() - f[i - 1].0.clone();
        let slope = (f[i].1.clone() - f[i - 1].1.clone()) / dx.clone();
        g[i].1 = g[i - 1].1.clone() + scalar::max(&slope, &-c.clone()) * dx;
    }
    g
}

fn simplify<S: Scalar>(f: &mut Pl<S>) {
    let mut out: Pl<S> = Vec::with_capacity(f.len());
    for p in f.drain(..) {
        while out.len() >= 2 {
            let (a, b) = (&out[out.len() - 2], &out[out.len() - 1]);
            let left = (b.1.clone() - a.1.clone()) / (b.0.clone() - a.0.clone());
            let right = (p.1.clone() - b.1.clone()) / (p.0.clone() - b.0.clone());
            if !left.approx_eq(&right) {
                break;
            }
            out.pop();
        }
        out.push(p);
    }
    *f = out;
}

/// Two vertices: the value function of the mass at vertex 0 stays concave
/// and piecewise linear, so each step is a slope clamp plus one tent.
pub fn offline_opt_two_vertex<S: Scalar>(d: &DemandSequence<S>) -> Result<SupplyTrajectory<S>> {
    if d.k() != 2 {
        return Err(Error::Unsupported("two-vertex program needs k = 2".into()));
    }
    let c = d.metric().dist(0, 1).clone();
    let mut values: Vec<Pl<S>> = Vec::with_capacity(d.len());
    for (t, dt) in d.steps().iter().enumerate() {
        let mut f = match t {
            0 => vec![(S::zero(), S::zero()), (S::one(), S::zero())],
            _ => clip(&values[t - 1], &c),
        };
        add_service(&mut f, &dt[0]);
        simplify(&mut f);
        values.push(f);
    }
    let last = values.last().expect("nonempty");
    let top = (0..last.len())
        .fold(0, |bi, i| if last[i].1 > last[bi].1 && !last[i].1.approx_eq(&last[bi].1) { i } else { bi });
    let total = last[top].1.clone();
    let mut xs = vec![last[top].0.clone()];
    for t in (1..d.len()).rev() {
        let x = xs.last().expect("nonempty").clone();
        let f = &values[t - 1];
        let mut best = (x.clone(), eval(f, &x));
        for (y, fy) in f {
            let score = fy.clone() - c.clone() * (x.clone() - y.clone()).abs();
            if score > best.1 && !score.approx_eq(&best.1) {
                best = (y.clone(), score);
            }
        }
        xs.push(best.0);
    }
    xs.reverse();
    let steps = xs.into_iter().map(|x| MassVector::new(vec![x.clone(), S::one() - x])).collect::<Result<Vec<_>>>()?;
    confirm(SupplyTrajectory::new(steps, d)?, &total)
}
