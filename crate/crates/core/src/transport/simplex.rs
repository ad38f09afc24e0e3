//! Transportation simplex (u-v method) on a dense cost matrix.
//!
//! Rows are sources and columns are targets, both with strictly positive
//! mass. The basis is a spanning tree of `m + n - 1` cells that may carry
//! degenerate zero values. Pivoting uses Bland's rule on the row-major cell
//! index, which rules out cycling.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct Simplex<S> {
    pub(crate) m: usize,
    pub(crate) n: usize,
    cost: Vec<S>,
    value: Vec<S>,
    basic: Vec<bool>,
}

impl<S: Scalar> Simplex<S> {
    /// Northwest-corner start. Both sides must be nonempty and balanced.
    pub(crate) fn new(supply: &[S], demand: &[S], cost: Vec<S>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        debug_assert_eq!(cost.len(), m * n);
        let mut value = vec![S::zero(); m * n];
        let mut basic = vec![false; m * n];
        let mut a = supply.to_vec();
        let mut b = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let x = crate::scalar::min(&a[i], &b[j]);
            let x = if x.is_neg() { S::zero() } else { x };
            value[i * n + j] = x.clone();
            basic[i * n + j] = true;
            a[i] = a[i].clone() - x.clone();
            b[j] = b[j].clone() - x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && !a[i].is_pos()) {
                i += 1;
            } else {
                j += 1;
            }
        }
        Simplex { m, n, cost, value, basic }
    }

    pub(crate) fn value(&self, i: usize, j: usize) -> &S {
        &self.value[i * self.n + j]
    }

    pub(crate) fn cost(&self, i: usize, j: usize) -> &S {
        &self.cost[i * self.n + j]
    }

    pub(crate) fn is_basic(&self, i: usize, j: usize) -> bool {
        self.basic[i * self.n + j]
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let (m, n) = (self.m, self.n);
        let mut adj = vec![Vec::new(); m + n];
        for i in 0..m {
            for j in 0..n {
                if self.basic[i * n + j] {
                    adj[i].push(m + j);
                    adj[m + j].push(i);
                }
            }
        }
        adj
    }

    /// Row and column potentials with `u_i + v_j = c_ij` on basic cells.
    pub(crate) fn potentials(&self) -> (Vec<S>, Vec<S>) {
        let (m, n) = (self.m, self.n);
        let adj = self.adjacency();
        let mut pot: Vec<Option<S>> = vec![None; m + n];
        pot[0] = Some(S::zero());
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let px = pot[x].clone().expect("visited node has a potential");
            for &y in &adj[x] {
                if pot[y].is_some() {
                    continue;
                }
                let c = if x < m { self.cost(x, y - m) } else { self.cost(y, x - m) };
                pot[y] = Some(c.clone() - px.clone());
                queue.push_back(y);
            }
        }
        let pot: Vec<S> = pot.into_iter().map(|p| p.expect("basis spans every row and column")).collect();
        let v = pot[m..].to_vec();
        let mut u = pot;
        u.truncate(m);
        (u, v)
    }

    pub(crate) fn reduced_cost(&self, u: &[S], v: &[S], i: usize, j: usize) -> S {
        self.cost(i, j).clone() - u[i].clone() - v[j].clone()
    }

    /// Cells of the cycle closed by adding `(i, j)`, starting with `(i, j)`
    /// itself. Even positions gain flow, odd positions lose it.
    pub(crate) fn cycle(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let m = self.m;
        let adj = self.adjacency();
        let start = m + j;
        let mut parent = vec![usize::MAX; m + self.n];
        parent[start] = start;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            if x == i {
                break;
            }
            for &y in &adj[x] {
                if parent[y] == usize::MAX {
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut path = vec![(i, j)];
        let mut x = i;
        while x != start {
            let p = parent[x];
            path.push(if x < m { (x, p - m) } else { (p, x - m) });
            x = p;
        }
        // the walk above runs from row i back to column j; the cycle wants
        // the cell touching column j right after the entering cell
        path[1..].reverse();
        path
    }

    /// Brings `(i, j)` into the basis, shifting flow around its cycle.
    /// Returns the cell that left.
    pub(crate) fn pivot(&mut self, i: usize, j: usize) -> (usize, usize) {
        let n = self.n;
        let cycle = self.cycle(i, j);
        let theta = cycle
            .iter()
            .skip(1)
            .step_by(2)
            .map(|&(a, b)| self.value[a * n + b].clone())
            .fold(None, |acc: Option<S>, x| match acc {
                Some(t) if t <= x => Some(t),
                _ => Some(x),
            })
            .expect("cycle has a decreasing cell");
        let leaving = cycle
            .iter()
            .skip(1)
            .step_by(2)
            .filter(|&&(a, b)| self.value[a * n + b].le_tol(&theta))
            .min()
            .copied()
            .expect("some decreasing cell attains theta");
        for (pos, &(a, b)) in cycle.iter().enumerate() {
            let cell = &mut self.value[a * n + b];
            *cell = if pos % 2 == 0 { cell.clone() + theta.clone() } else { cell.clone() - theta.clone() };
            if cell.is_neg() || (pos % 2 == 1 && cell.is_nil()) {
                *cell = S::zero();
            }
        }
        self.value[leaving.0 * n + leaving.1] = S::zero();
        self.basic[leaving.0 * n + leaving.1] = false;
        self.basic[i * n + j] = true;
        leaving
    }

    /// First non-basic cell (row-major) with negative reduced cost.
    fn entering(&self) -> Option<(usize, usize)> {
        let (u, v) = self.potentials();
        for i in 0..self.m {
            for j in 0..self.n {
                if !self.is_basic(i, j) && self.reduced_cost(&u, &v, i, j).is_neg() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub(crate) fn solve(&mut self) -> Result<()> {
        let cap = 1_000_000usize.max(50 * self.m * self.n);
        for _ in 0..cap {
            match self.entering() {
                None => return Ok(()),
                Some((i, j)) => {
                    self.pivot(i, j);
                }
            }
        }
        Err(Error::ContractViolation("transportation simplex did not converge".into()))
    }

    #[cfg(test)]
    pub(crate) fn objective(&self) -> S {
        self.value.iter().zip(&self.cost).map(|(x, c)| x.clone() * c.clone()).sum()
    }

    /// Non-basic cells with zero reduced cost, in row-major order.
    pub(crate) fn degenerate_candidates(&self) -> Vec<(usize, usize)> {
        let (u, v) = self.potentials();
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in 0..self.n {
                if !self.is_basic(i, j) && self.reduced_cost(&u, &v, i, j).is_nil() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub(crate) fn positive_cells(&self) -> Vec<(usize, usize, S)> {
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in 0..self.n {
                let x = self.value(i, j);
                if x.is_pos() {
                    out.push((i, j, x.clone()));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::ratio(n, 1)
    }

    #[test]
    fn northwest_corner_spans() {
        let s = Simplex::new(&[q(3), q(2)], &[q(1), q(1), q(3)], vec![q(0); 6]);
        let count = (0..2).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|&(i, j)| s.is_basic(i, j)).count();
        assert_eq!(count, 4);
    }

    #[test]
    fn solves_small_textbook_problem() {
        // supplies 20, 30, 25; demands 10, 35, 30
        let cost = vec![q(8), q(6), q(10), q(9), q(12), q(13), q(14), q(9), q(16)];
        let mut s = Simplex::new(&[q(20), q(30), q(25)], &[q(10), q(35), q(30)], cost);
        s.solve().unwrap();
        assert_eq!(s.objective(), brute(&[20, 30, 25], &[10, 35, 30], &[8, 6, 10, 9, 12, 13, 14, 9, 16]));
        let (u, v) = s.potentials();
        for i in 0..3 {
            for j in 0..3 {
                assert!(!s.reduced_cost(&u, &v, i, j).is_neg());
            }
        }
    }

    // exhaustive search over integral plans
    fn brute(a: &[i64], b: &[i64], c: &[i64]) -> Rational {
        fn go(i: usize, a: &[i64], b: &mut Vec<i64>, c: &[i64], acc: i64, best: &mut i64) {
            let n = b.len();
            if i == a.len() {
                if b.iter().all(|&x| x == 0) {
                    *best = (*best).min(acc);
                }
                return;
            }
            fn split(j: usize, left: i64, i: usize, a: &[i64], b: &mut Vec<i64>, c: &[i64], acc: i64, best: &mut i64) {
                let n = b.len();
                if j == n - 1 {
                    if left <= b[j] {
                        b[j] -= left;
                        go(i + 1, a, b, c, acc + left * c[i * n + j], best);
                        b[j] += left;
                    }
                    return;
                }
                for x in 0..=left.min(b[j]) {
                    b[j] -= x;
                    split(j + 1, left - x, i, a, b, c, acc + x * c[i * n + j], best);
                    b[j] += x;
                }
            }
            let _ = n;
            split(0, a[i], i, a, b, c, acc, best);
        }
        let mut best = i64::MAX;
        go(0, a, &mut b.to_vec(), c, 0, &mut best);
        q(best)
    }
}
