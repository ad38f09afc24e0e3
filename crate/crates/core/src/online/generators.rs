//! Random demand sequences used by the lower-bound constructions.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::DemandSequence;
use crate::error::{Error, Result};
use crate::mass::MassVector;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

fn check_horizon(t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    Ok(())
}

pub fn gen_single_vertex<S: Scalar>(k: usize, t: usize, seed: u64) -> Result<DemandSequence<S>> {
    gen_single_vertex_with(k, t, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// All demand at one vertex drawn uniformly and independently each step,
/// unit distances.
pub fn gen_single_vertex_with<S: Scalar, R: Rng>(k: usize, t: usize, rng: &mut R) -> Result<DemandSequence<S>> {
    gen_subset_with(&S::one(), k, t, rng)
}

pub fn gen_subset<S: Scalar>(rho: &S, k: usize, t: usize, seed: u64) -> Result<DemandSequence<S>> {
    gen_subset_with(rho, k, t, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Vertices split into `⌊k/⌈ρ⌉⌋` blocks of `⌈ρ⌉` consecutive vertices; each
/// step one block, drawn uniformly, carries uniform demand. Unit distances.
pub fn gen_subset_with<S: Scalar, R: Rng>(rho: &S, k: usize, t: usize, rng: &mut R) -> Result<DemandSequence<S>> {
    check_horizon(t)?;
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one vertex".into()));
    }
    if *rho < S::one() || *rho > S::from_usize(k).expect("vertex count fits") {
        return Err(Error::InvalidParameter(format!("rho = {rho} outside [1, {k}]")));
    }
    let size = rho.to_rational().ceil().to_integer().to_usize().expect("block size fits");
    let blocks = k / size;
    let shapes: Vec<MassVector<S>> = (0..blocks)
        .map(|b| MassVector::uniform_on(k, &(b * size..(b + 1) * size).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let steps = (0..t).map(|_| shapes[rng.random_range(0..blocks)].clone()).collect();
    DemandSequence::new(steps, MetricSpace::uniform(k, S::one())?)
}

pub fn gen_geometric<S: Scalar>(epsilon: &S, k: usize, t: usize, seed: u64) -> Result<DemandSequence<S>> {
    gen_geometric_with(epsilon, k, t, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Runs of single-vertex demand on the metric with all distances `1 + ε`.
/// Run lengths are geometric with mean `1 + ε`; consecutive runs sit at
/// different vertices.
pub fn gen_geometric_with<S: Scalar, R: Rng>(
    epsilon: &S,
    k: usize,
    t: usize,
    rng: &mut R,
) -> Result<DemandSequence<S>> {
    check_horizon(t)?;
    if !epsilon.is_pos() || *epsilon >= S::one() {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    if k < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    let eps = epsilon.to_f64().expect("finite epsilon");
    let duration = Geometric::new(1.0 / (1.0 + eps)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut steps = Vec::with_capacity(t);
    let mut at = rng.random_range(0..k);
    while steps.len() < t {
        let run = 1 + duration.sample(rng) as usize;
        for _ in 0..run.min(t - steps.len()) {
            steps.push(MassVector::unit(k, at));
        }
        let shift = rng.random_range(1..k);
        at = (at + shift) % k;
    }
    DemandSequence::new(steps, MetricSpace::uniform(k, S::one() + epsilon.clone())?)
}

pub fn gen_drift<S: Scalar>(delta: &S, t: usize, seed: u64) -> Result<DemandSequence<S>> {
    gen_drift_with(delta, t, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Two vertices at distance one; each step is `(1, 0)` or `(1 - 2δ, 2δ)`
/// with equal probability.
pub fn gen_drift_with<S: Scalar, R: Rng>(delta: &S, t: usize, rng: &mut R) -> Result<DemandSequence<S>> {
    check_horizon(t)?;
    if delta.is_neg() || *delta > S::ratio(1, 2) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside [0, 1/2]")));
    }
    let two = S::from_i32(2).expect("small integer");
    let a = MassVector::unit(2, 0);
    let b = MassVector::new(vec![S::one() - two.clone() * delta.clone(), two * delta.clone()])?;
    let steps = (0..t).map(|_| if rng.random_bool(0.5) { a.clone() } else { b.clone() }).collect();
    DemandSequence::new(steps, MetricSpace::uniform(2, S::one())?)
}
