use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Nonnegative per-vertex masses summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector<S> {
    masses: Vec<S>,
}

impl<S: Scalar> MassVector<S> {
    pub fn new(masses: Vec<S>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidMass("empty vector".into()));
        }
        if let Some(i) = masses.iter().position(|x| x.is_neg()) {
            return Err(Error::InvalidMass(format!("negative mass {} at vertex {i}", masses[i])));
        }
        let total: S = masses.iter().cloned().sum();
        // sums of many floats drift, so scale the slack with the length
        let slack = S::tolerance() * S::from_usize(masses.len()).unwrap_or_else(S::one);
        if (total.clone() - S::one()).abs() > slack {
            return Err(Error::InvalidMass(format!("masses sum to {total}, not 1")));
        }
        let masses = masses.into_iter().map(|x| if x.is_neg() { S::zero() } else { x }).collect();
        Ok(MassVector { masses })
    }

    /// Normalises nonnegative weights. Fails if they are all zero.
    pub fn normalized(weights: Vec<S>) -> Result<Self> {
        let total: S = weights.iter().cloned().sum();
        if !total.is_pos() {
            return Err(Error::InvalidMass("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total.clone()).collect())
    }

    pub fn uniform(k: usize) -> Self {
        let share = S::one() / S::from_usize(k).expect("vertex count fits the scalar");
        MassVector { masses: vec![share; k] }
    }

    pub fn unit(k: usize, vertex: usize) -> Self {
        let mut masses = vec![S::zero(); k];
        masses[vertex] = S::one();
        MassVector { masses }
    }

    /// Spreads mass evenly over `support`.
    pub fn uniform_on(k: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidMass("empty support".into()));
        }
        let share = S::one() / S::from_usize(support.len()).expect("support size fits the scalar");
        let mut masses = vec![S::zero(); k];
        for &v in support {
            if v >= k {
                return Err(Error::InvalidMass(format!("support vertex {v} out of range")));
            }
            masses[v] = share.clone();
        }
        MassVector::new(masses)
    }

    /// Per-vertex counts divided by their total.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        Self::normalized(counts.iter().map(|&c| S::from_usize(c).expect("count fits")).collect())
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.masses
    }

    pub fn into_vec(self) -> Vec<S> {
        self.masses
    }

    /// Total demand served, `Σ min(self_v, demand_v)`.
    pub fn served(&self, demand: &MassVector<S>) -> S {
        self.masses.iter().zip(&demand.masses).map(|(s, d)| scalar::min(s, d)).sum()
    }

    /// Total variation distance `½‖self − other‖₁`.
    pub fn tv_distance(&self, other: &MassVector<S>) -> S {
        self.masses.iter().zip(&other.masses).map(|(a, b)| scalar::pos_part(a.clone() - b.clone())).sum()
    }

    pub fn max_entry(&self) -> S {
        self.masses.iter().fold(S::zero(), |acc, x| scalar::max(&acc, x))
    }

    pub fn approx_eq(&self, other: &MassVector<S>) -> bool {
        self.len() == other.len() && self.masses.iter().zip(&other.masses).all(|(a, b)| a.approx_eq(b))
    }

    pub fn convert<T: Scalar>(&self) -> MassVector<T> {
        MassVector { masses: self.masses.iter().map(|x| T::from_rational(&x.to_rational())).collect() }
    }
}

impl<S> Index<usize> for MassVector<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.masses[i]
    }
}
