//! `name:key=value,...` specs for generators and algorithms.

use std::collections::BTreeMap;
use std::path::PathBuf;

use surgeflow_core::online::{AlgorithmSpec, GeneratorSpec};
use surgeflow_core::Rational;

use crate::error::CliError;
use crate::number::parse_rational;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec<Rational>,
    pub algorithm: AlgorithmSpec,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
    pub exact: bool,
}

fn split(spec: &str) -> Result<(String, BTreeMap<String, String>), CliError> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("{spec:?}: expected key=value, got {part:?}")))?;
        if params.insert(key.trim().to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Input(format!("{spec:?}: {key} given twice")));
        }
    }
    Ok((name.trim().to_ascii_lowercase(), params))
}

struct Params<'a> {
    spec: &'a str,
    map: BTreeMap<String, String>,
}

impl Params<'_> {
    fn take(&mut self, keys: &[&str]) -> Result<String, CliError> {
        keys.iter()
            .find_map(|k| self.map.remove(*k))
            .ok_or_else(|| CliError::Input(format!("{:?}: missing parameter {}", self.spec, keys[0])))
    }

    fn usize(&mut self, keys: &[&str]) -> Result<usize, CliError> {
        let v = self.take(keys)?;
        v.parse().map_err(|_| CliError::Input(format!("{:?}: {} = {v:?} is not a count", self.spec, keys[0])))
    }

    fn rational(&mut self, keys: &[&str]) -> Result<Rational, CliError> {
        let v = self.take(keys)?;
        parse_rational(&v).map_err(|e| CliError::Input(format!("{:?}: {e}", self.spec)))
    }

    fn probability(&mut self) -> Result<f64, CliError> {
        let v = self.take(&["p"])?;
        match v.parse::<f64>() {
            Ok(p) if (0.0..=1.0).contains(&p) => Ok(p),
            _ => Err(CliError::Input(format!("{:?}: p = {v:?} is not a probability", self.spec))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.keys().next() {
            Some(k) => Err(CliError::Input(format!("{:?}: unknown parameter {k}", self.spec))),
            None => Ok(()),
        }
    }
}

/// `single-vertex:k=,T=`, `subset:rho=,k=,T=`, `geometric:epsilon=,k=,T=`
/// or `drift:delta=,T=`.
pub fn parse_generator(spec: &str) -> Result<GeneratorSpec<Rational>, CliError> {
    let (name, map) = split(spec)?;
    let mut p = Params { spec, map };
    let g = match name.as_str() {
        "single-vertex" | "single" => GeneratorSpec::SingleVertex { k: p.usize(&["k"])?, t: p.usize(&["T", "t"])? },
        "subset" => GeneratorSpec::Subset { rho: p.rational(&["rho"])?, k: p.usize(&["k"])?, t: p.usize(&["T", "t"])? },
        "geometric" => GeneratorSpec::Geometric {
            epsilon: p.rational(&["epsilon", "eps"])?,
            k: p.usize(&["k"])?,
            t: p.usize(&["T", "t"])?,
        },
        "drift" => GeneratorSpec::Drift { delta: p.rational(&["delta"])?, t: p.usize(&["T", "t"])? },
        _ => return Err(CliError::Input(format!("unknown generator {name:?}"))),
    };
    p.finish()?;
    Ok(g)
}

/// `stay`, `match`, `rand:p=` or `comp:p=`.
pub fn parse_algorithm(spec: &str) -> Result<AlgorithmSpec, CliError> {
    let (name, map) = split(spec)?;
    let mut p = Params { spec, map };
    let a = match name.as_str() {
        "stay" => AlgorithmSpec::Stay,
        "match" => AlgorithmSpec::Match,
        "rand" => AlgorithmSpec::Rand(p.probability()?),
        "comp" => AlgorithmSpec::Comp(p.probability()?),
        _ => return Err(CliError::Input(format!("unknown algorithm {name:?}"))),
    };
    p.finish()?;
    Ok(a)
}
