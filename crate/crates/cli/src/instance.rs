//! Instance files: JSON with exact rationals as `"p/q"` strings.

use std::path::Path;

use serde::{Deserialize, Serialize};
use surgeflow_core::discrete::{Passenger, Taxicab};
use surgeflow_core::{DiscreteInstance, MassVector, MetricSpace, Rational, SurgeVector, ZeroDemandPrice};

use crate::error::CliError;
use crate::number::{parse_rational, render};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: String,
    pub metric: MetricFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supply: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<Vec<String>>,
    /// Claimed surge prices, checked by `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surge: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_demand_price: Option<ZeroDemandArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passengers: Option<Vec<PassengerFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxicabs: Option<Vec<TaxicabFile>>,
}

/// Either `k` plus undirected `edges` (always closed under shortest paths)
/// or a full `matrix`, closed only when `closure` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub closure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassengerFile {
    pub id: String,
    pub location: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxicabFile {
    pub id: String,
    pub location: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ZeroDemandArg {
    Zero,
    One,
    /// Item price zero, so the surge price is `C`.
    C,
}

impl From<ZeroDemandArg> for ZeroDemandPrice {
    fn from(z: ZeroDemandArg) -> Self {
        match z {
            ZeroDemandArg::Zero => ZeroDemandPrice::Zero,
            ZeroDemandArg::One => ZeroDemandPrice::One,
            ZeroDemandArg::C => ZeroDemandPrice::CMinusZero,
        }
    }
}

impl From<ZeroDemandPrice> for ZeroDemandArg {
    fn from(z: ZeroDemandPrice) -> Self {
        match z {
            ZeroDemandPrice::Zero => ZeroDemandArg::Zero,
            ZeroDemandPrice::One => ZeroDemandArg::One,
            ZeroDemandPrice::CMinusZero => ZeroDemandArg::C,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousInstance {
    pub metric: MetricSpace<Rational>,
    pub supply: MassVector<Rational>,
    pub demand: MassVector<Rational>,
    pub surge: Option<SurgeVector<Rational>>,
    pub zero_demand: Option<ZeroDemandPrice>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Continuous(ContinuousInstance),
    Discrete(DiscreteInstance<Rational>),
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{field}: {msg}"))
}

fn rationals(field: &str, xs: &[String]) -> Result<Vec<Rational>, CliError> {
    xs.iter().enumerate().map(|(i, x)| parse_rational(x).map_err(|e| invalid(&format!("{field}[{i}]"), e))).collect()
}

impl MetricFile {
    pub fn build(&self) -> Result<MetricSpace<Rational>, CliError> {
        match (&self.k, &self.edges, &self.matrix) {
            (Some(k), Some(edges), None) => {
                let edges = edges
                    .iter()
                    .enumerate()
                    .map(|(i, (u, v, w))| {
                        parse_rational(w).map(|w| (*u, *v, w)).map_err(|e| invalid(&format!("metric.edges[{i}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                MetricSpace::shortest_path_closure(*k, &edges).map_err(|e| invalid("metric", e))
            }
            (k, None, Some(rows)) => {
                let m = rows
                    .iter()
                    .enumerate()
                    .map(|(i, row)| rationals(&format!("metric.matrix[{i}]"), row))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(k) = k {
                    if *k != m.len() {
                        return Err(invalid("metric.k", format!("{k} but the matrix has {} rows", m.len())));
                    }
                }
                if self.closure {
                    let edges: Vec<_> = m
                        .iter()
                        .enumerate()
                        .flat_map(|(u, row)| row.iter().enumerate().map(move |(v, w)| (u, v, w.clone())))
                        .collect();
                    MetricSpace::shortest_path_closure(m.len(), &edges).map_err(|e| invalid("metric", e))
                } else {
                    MetricSpace::new(m).map_err(|e| invalid("metric", format!("{e} (set \"closure\": true to repair)")))
                }
            }
            _ => Err(invalid("metric", "give either k and edges, or matrix")),
        }
    }

    pub fn from_metric(m: &MetricSpace<Rational>) -> Self {
        MetricFile {
            k: None,
            edges: None,
            matrix: Some(m.rows().map(|row| row.iter().map(render).collect()).collect()),
            closure: false,
        }
    }
}

fn mass(field: &str, xs: &[String], k: usize) -> Result<MassVector<Rational>, CliError> {
    if xs.len() != k {
        return Err(invalid(field, format!("length {} but the metric has {k} vertices", xs.len())));
    }
    MassVector::new(rationals(field, xs)?).map_err(|e| invalid(field, e))
}

impl InstanceFile {
    pub fn build(&self) -> Result<Instance, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid("schema_version", format!("unsupported version {:?}", self.schema_version)));
        }
        let metric = self.metric.build()?;
        let k = metric.k();
        let continuous = self.supply.is_some() || self.demand.is_some() || self.surge.is_some();
        let discrete = self.passengers.is_some() || self.taxicabs.is_some();
        match (continuous, discrete) {
            (true, false) => {
                let (Some(s), Some(d)) = (&self.supply, &self.demand) else {
                    return Err(invalid("supply/demand", "both are required"));
                };
                let supply = mass("supply", s, k)?;
                let demand = mass("demand", d, k)?;
                let zero_demand = self.zero_demand_price.map(ZeroDemandPrice::from);
                let surge = match &self.surge {
                    Some(r) if r.len() != k => {
                        return Err(invalid("surge", format!("length {} but the metric has {k} vertices", r.len())))
                    }
                    Some(r) => Some(SurgeVector {
                        price: rationals("surge", r)?,
                        zero_demand: zero_demand.unwrap_or_default(),
                    }),
                    None => None,
                };
                Ok(Instance::Continuous(ContinuousInstance { metric, supply, demand, surge, zero_demand }))
            }
            (false, true) => {
                if self.zero_demand_price.is_some() {
                    return Err(invalid("zero_demand_price", "only applies to continuous instances"));
                }
                let passengers = self
                    .passengers
                    .iter()
                    .flatten()
                    .enumerate()
                    .map(|(i, p)| {
                        let value =
                            parse_rational(&p.value).map_err(|e| invalid(&format!("passengers[{i}].value"), e))?;
                        Ok(Passenger { id: p.id.clone(), location: p.location, value })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let taxicabs = self
                    .taxicabs
                    .iter()
                    .flatten()
                    .map(|t| Taxicab { id: t.id.clone(), location: t.location })
                    .collect();
                let inst = DiscreteInstance::new(metric, passengers, taxicabs)
                    .map_err(|e| invalid("passengers/taxicabs", e))?;
                Ok(Instance::Discrete(inst))
            }
            (true, true) => Err(invalid("instance", "continuous and discrete fields are mutually exclusive")),
            (false, false) => Err(invalid("instance", "needs supply/demand or passengers/taxicabs")),
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let base = |m: &MetricSpace<Rational>| InstanceFile {
            schema_version: SCHEMA_VERSION.into(),
            metric: MetricFile::from_metric(m),
            supply: None,
            demand: None,
            surge: None,
            zero_demand_price: None,
            passengers: None,
            taxicabs: None,
        };
        let masses = |v: &MassVector<Rational>| v.as_slice().iter().map(render).collect();
        match inst {
            Instance::Continuous(c) => InstanceFile {
                supply: Some(masses(&c.supply)),
                demand: Some(masses(&c.demand)),
                surge: c.surge.as_ref().map(|r| r.price.iter().map(render).collect()),
                zero_demand_price: c.zero_demand.map(ZeroDemandArg::from),
                ..base(&c.metric)
            },
            Instance::Discrete(d) => InstanceFile {
                passengers: Some(
                    d.passengers()
                        .iter()
                        .map(|p| PassengerFile { id: p.id.clone(), location: p.location, value: render(&p.value) })
                        .collect(),
                ),
                taxicabs: Some(
                    d.taxicabs().iter().map(|t| TaxicabFile { id: t.id.clone(), location: t.location }).collect(),
                ),
                ..base(d.metric())
            },
        }
    }
}

/// Parses and validates instance JSON. Syntax errors carry line and column.
pub fn parse_instance_str(text: &str) -> Result<Instance, CliError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("schema: {e}")))?;
    file.build()
}

pub fn parse_instance(path: &Path) -> Result<Instance, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_instance_str(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn serialize_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = r#"{
        "schema_version": "1",
        "metric": {"k": 3, "edges": [[0, 1, "1"], [1, 2, "1/2"]]},
        "supply": ["1/2", "1/2", "0"],
        "demand": ["0", "1/3", "2/3"]
    }"#;

    #[test]
    fn edges_are_closed() {
        let Instance::Continuous(c) = parse_instance_str(TRIANGLE).unwrap() else { panic!() };
        assert_eq!(*c.metric.dist(0, 2), Rational::new(3.into(), 2.into()));
    }

    #[test]
    fn rejects_mass_below_one() {
        let bad = TRIANGLE.replace(r#""2/3""#, r#""0.65""#);
        let err = parse_instance_str(&bad).unwrap_err().to_string();
        assert!(err.contains("demand"), "{err}");
    }

    #[test]
    fn rejects_negative_distance() {
        let bad = TRIANGLE.replace(r#""1/2"]"#, r#""-1/2"]"#);
        assert!(parse_instance_str(&bad).is_err());
    }

    #[test]
    fn non_metric_matrix_needs_closure() {
        let text = r#"{"schema_version": "1",
            "metric": {"matrix": [["0", "1", "5"], ["1", "0", "1"], ["5", "1", "0"]]},
            "supply": ["1", "0", "0"], "demand": ["0", "0", "1"]}"#;
        let err = parse_instance_str(text).unwrap_err().to_string();
        assert!(err.contains("closure"), "{err}");
        let fixed = text.replace(r#""0"]]}"#, r#""0"]], "closure": true}"#);
        let Instance::Continuous(c) = parse_instance_str(&fixed).unwrap() else { panic!() };
        assert_eq!(*c.metric.dist(0, 2), Rational::from_integer(2.into()));
    }

    #[test]
    fn syntax_errors_report_lines() {
        let err = parse_instance_str("{\n\"schema_version\": \"1\",\n\"metric\": }").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn mixed_kinds_are_rejected() {
        let bad = TRIANGLE.replace("\"supply\"", "\"taxicabs\": [], \"supply\"");
        assert!(parse_instance_str(&bad).is_err());
    }

    #[test]
    fn discrete_round_trip() {
        let text = r#"{"schema_version": "1", "metric": {"k": 2, "edges": [[0, 1, "2"]]},
            "passengers": [{"id": "a", "location": 1, "value": "7/2"}],
            "taxicabs": [{"id": "x", "location": 0}]}"#;
        let inst = parse_instance_str(text).unwrap();
        assert_eq!(parse_instance_str(&serialize_instance(&inst)).unwrap(), inst);
    }
}
