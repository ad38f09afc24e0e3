//! Paired competitive-ratio experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::generators::{gen_drift_with, gen_geometric_with, gen_single_vertex_with, gen_subset_with};
use super::{
    offline_opt, run_comp_with, run_match, run_rand_with, run_stay, sequence_stats, DemandSequence, SupplyTrajectory,
};
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec<S> {
    SingleVertex { k: usize, t: usize },
    Subset { rho: S, k: usize, t: usize },
    Geometric { epsilon: S, k: usize, t: usize },
    Drift { delta: S, t: usize },
}

impl<S: Scalar> GeneratorSpec<S> {
    pub fn generate(&self, rng: &mut ChaCha8Rng) -> Result<DemandSequence<S>> {
        match self {
            GeneratorSpec::SingleVertex { k, t } => gen_single_vertex_with(*k, *t, rng),
            GeneratorSpec::Subset { rho, k, t } => gen_subset_with(rho, *k, *t, rng),
            GeneratorSpec::Geometric { epsilon, k, t } => gen_geometric_with(epsilon, *k, *t, rng),
            GeneratorSpec::Drift { delta, t } => gen_drift_with(delta, *t, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmSpec {
    Stay,
    Match,
    Rand(f64),
    Comp(f64),
}

impl std::fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlgorithmSpec::Stay => write!(f, "stay"),
            AlgorithmSpec::Match => write!(f, "match"),
            AlgorithmSpec::Rand(p) => write!(f, "rand(p={p})"),
            AlgorithmSpec::Comp(p) => write!(f, "comp(p={p})"),
        }
    }
}

pub fn run_algorithm<S: Scalar>(
    alg: AlgorithmSpec,
    d: &DemandSequence<S>,
    rng: &mut ChaCha8Rng,
) -> Result<SupplyTrajectory<S>> {
    match alg {
        AlgorithmSpec::Stay => run_stay(d),
        AlgorithmSpec::Match => run_match(d),
        AlgorithmSpec::Rand(p) => run_rand_with(d, p, rng),
        AlgorithmSpec::Comp(p) => run_comp_with(d, p, rng),
    }
}

/// Generator and algorithm streams for one trial. Both depend only on the
/// seed and the trial index.
pub fn trial_rngs(seed: u64, trial: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let stream = 2 * trial as u64;
    let mut gen = ChaCha8Rng::seed_from_u64(seed);
    gen.set_stream(stream);
    let mut alg = ChaCha8Rng::seed_from_u64(seed);
    alg.set_stream(stream + 1);
    (gen, alg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord<S> {
    pub trial: usize,
    pub t: usize,
    pub k: usize,
    pub rho: S,
    pub delta: S,
    pub sw_alg: S,
    pub sw_opt: S,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary<S> {
    pub algorithm: AlgorithmSpec,
    pub records: Vec<TrialRecord<S>>,
    pub mean_sw_alg: f64,
    pub sd_sw_alg: f64,
    pub mean_sw_opt: f64,
    pub sd_sw_opt: f64,
    /// Mean algorithm welfare over mean optimal welfare.
    pub ratio_of_means: f64,
    pub mean_ratio: f64,
    pub sd_ratio: f64,
    /// Normal-approximation 95% interval for the mean per-trial ratio.
    pub ratio_ci95: (f64, f64),
}

fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 { xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

fn summarize<S: Scalar>(algorithm: AlgorithmSpec, records: Vec<TrialRecord<S>>) -> ExperimentSummary<S> {
    let f = |x: &S| x.to_f64().expect("finite welfare");
    let (mean_sw_alg, sd_sw_alg) = mean_sd(records.iter().map(|r| f(&r.sw_alg)));
    let (mean_sw_opt, sd_sw_opt) = mean_sd(records.iter().map(|r| f(&r.sw_opt)));
    let (mean_ratio, sd_ratio) = mean_sd(records.iter().map(|r| r.ratio));
    let half = 1.96 * sd_ratio / (records.len() as f64).sqrt();
    ExperimentSummary {
        algorithm,
        mean_sw_alg,
        sd_sw_alg,
        mean_sw_opt,
        sd_sw_opt,
        ratio_of_means: mean_sw_alg / mean_sw_opt,
        mean_ratio,
        sd_ratio,
        ratio_ci95: (mean_ratio - half, mean_ratio + half),
        records,
    }
}

/// Runs every algorithm against the offline optimum on the same demand
/// sequences. Trials run in parallel; results are ordered by trial index.
pub fn paired_experiment<S: Scalar>(
    generator: &GeneratorSpec<S>,
    algorithms: &[AlgorithmSpec],
    trials: usize,
    seed: u64,
) -> Result<Vec<ExperimentSummary<S>>> {
    let per_trial: Vec<Vec<TrialRecord<S>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (mut gen, alg_rng) = trial_rngs(seed, trial);
            let d = generator.generate(&mut gen)?;
            let stats = sequence_stats(&d);
            let opt = offline_opt(&d)?;
            algorithms
                .iter()
                .map(|&alg| {
                    let sw_alg = run_algorithm(alg, &d, &mut alg_rng.clone())?.total_sw().clone();
                    let sw_opt = opt.total_sw().clone();
                    let ratio = sw_alg.to_f64().expect("finite") / sw_opt.to_f64().expect("finite");
                    Ok(TrialRecord {
                        trial,
                        t: d.len(),
                        k: d.k(),
                        rho: stats.rho.clone(),
                        delta: stats.delta.clone(),
                        sw_alg,
                        sw_opt,
                        ratio,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(algorithms
        .iter()
        .enumerate()
        .map(|(a, &alg)| summarize(alg, per_trial.iter().map(|row| row[a].clone()).collect()))
        .collect())
}

pub fn competitive_experiment<S: Scalar>(
    generator: &GeneratorSpec<S>,
    algorithm: AlgorithmSpec,
    trials: usize,
    seed: u64,
) -> Result<ExperimentSummary<S>> {
    Ok(paired_experiment(generator, &[algorithm], trials, seed)?.remove(0))
}
