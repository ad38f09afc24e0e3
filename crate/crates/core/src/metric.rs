use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite metric space on vertices `0..k`, stored as a dense distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace<S> {
    k: usize,
    dist: Vec<S>,
    /// Every off-diagonal distance is at least one.
    unit_min: bool,
    /// Common off-diagonal distance, when all of them agree.
    uniform: Option<S>,
}

impl<S: Scalar> MetricSpace<S> {
    /// Validates the metric axioms (zero diagonal, symmetry, nonnegativity,
    /// triangle inequality) and rejects anything else.
    pub fn new(matrix: Vec<Vec<S>>) -> Result<Self> {
        let k = matrix.len();
        if k == 0 {
            return Err(Error::NonMetric("metric needs at least one vertex".into()));
        }
        for row in &matrix {
            if row.len() != k {
                return Err(Error::DimensionMismatch { expected: k, found: row.len() });
            }
        }
        let dist: Vec<S> = matrix.into_iter().flatten().collect();
        let m = Self::assemble(k, dist);
        m.check_axioms()?;
        Ok(m)
    }

    /// Every pair of distinct vertices at distance `cost`.
    pub fn uniform(k: usize, cost: S) -> Result<Self> {
        if k == 0 {
            return Err(Error::NonMetric("metric needs at least one vertex".into()));
        }
        if cost.is_neg() {
            return Err(Error::NonMetric("negative distance".into()));
        }
        let mut dist = vec![cost; k * k];
        for u in 0..k {
            dist[u * k + u] = S::zero();
        }
        Ok(Self::assemble(k, dist))
    }

    /// Builds the shortest-path metric of an undirected weighted graph.
    /// Pairs with no connecting path make the closure fail.
    pub fn shortest_path_closure(k: usize, edges: &[(usize, usize, S)]) -> Result<Self> {
        if k == 0 {
            return Err(Error::NonMetric("metric needs at least one vertex".into()));
        }
        let mut d: Vec<Option<S>> = vec![None; k * k];
        for u in 0..k {
            d[u * k + u] = Some(S::zero());
        }
        for (u, v, w) in edges {
            let (u, v) = (*u, *v);
            if u >= k || v >= k {
                return Err(Error::NonMetric(format!("edge ({u}, {v}) out of range")));
            }
            if w.is_neg() {
                return Err(Error::NonMetric(format!("negative edge weight on ({u}, {v})")));
            }
            if u == v {
                continue;
            }
            for (a, b) in [(u, v), (v, u)] {
                let slot = &mut d[a * k + b];
                if slot.as_ref().is_none_or(|cur| w < cur) {
                    *slot = Some(w.clone());
                }
            }
        }
        for via in 0..k {
            for a in 0..k {
                let Some(left) = d[a * k + via].clone() else { continue };
                for b in 0..k {
                    let Some(right) = d[via * k + b].clone() else { continue };
                    let cand = left.clone() + right;
                    let slot = &mut d[a * k + b];
                    if slot.as_ref().is_none_or(|cur| cand < *cur) {
                        *slot = Some(cand);
                    }
                }
            }
        }
        let dist = d
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                x.ok_or_else(|| Error::NonMetric(format!("vertices {} and {} are disconnected", i / k, i % k)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(k, dist))
    }

    fn assemble(k: usize, dist: Vec<S>) -> Self {
        let mut unit_min = true;
        let mut uniform: Option<S> = None;
        let mut is_uniform = true;
        for u in 0..k {
            for v in 0..k {
                if u == v {
                    continue;
                }
                let x = &dist[u * k + v];
                if x.clone() - S::one() < -S::tolerance() {
                    unit_min = false;
                }
                match &uniform {
                    None => uniform = Some(x.clone()),
                    Some(c) if !c.approx_eq(x) => is_uniform = false,
                    _ => {}
                }
            }
        }
        // a single vertex is trivially uniform with no off-diagonal cost
        let uniform = if k == 1 {
            Some(S::zero())
        } else if is_uniform {
            uniform
        } else {
            None
        };
        MetricSpace { k, dist, unit_min, uniform }
    }

    fn check_axioms(&self) -> Result<()> {
        let k = self.k;
        for u in 0..k {
            if !self.dist(u, u).is_nil() {
                return Err(Error::NonMetric(format!("nonzero self-distance at vertex {u}")));
            }
            for v in 0..k {
                let x = self.dist(u, v);
                if x.is_neg() {
                    return Err(Error::NonMetric(format!("negative distance between {u} and {v}")));
                }
                if !x.approx_eq(self.dist(v, u)) {
                    return Err(Error::NonMetric(format!("asymmetric distance between {u} and {v}")));
                }
            }
        }
        for u in 0..k {
            for v in 0..k {
                for w in 0..k {
                    let direct = self.dist(u, w).clone();
                    let detour = self.dist(u, v).clone() + self.dist(v, w).clone();
                    if !direct.le_tol(&detour) {
                        return Err(Error::NonMetric(format!("triangle inequality fails for {u} -> {v} -> {w}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dist(&self, u: usize, v: usize) -> &S {
        &self.dist[u * self.k + v]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.dist.chunks(self.k)
    }

    pub fn max_distance(&self) -> S {
        self.dist.iter().fold(S::zero(), |acc, x| crate::scalar::max(&acc, x))
    }

    /// Whether `ℓ(u, v) >= 1` for all `u != v`.
    pub fn unit_min(&self) -> bool {
        self.unit_min
    }

    /// The shared off-diagonal distance if the metric is uniform.
    pub fn uniform_cost(&self) -> Option<&S> {
        self.uniform.as_ref()
    }

    pub fn convert<T: Scalar>(&self) -> MetricSpace<T> {
        let dist = self.dist.iter().map(|x| T::from_rational(&x.to_rational())).collect();
        MetricSpace::<T>::assemble(self.k, dist)
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, found: len });
        }
        Ok(())
    }
}
