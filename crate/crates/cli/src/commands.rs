//! Subcommand bodies. Each returns a JSON or CSV document and whether every
//! certificate in it holds.

use std::path::Path;

use serde_json::{json, Value};
use surgeflow_core::continuous::destination_prices;
use surgeflow_core::discrete::{default_misreport_grid, verify_achieves_min, DiscreteReport, DiscreteViolation};
use surgeflow_core::online::{run_algorithm, trial_rngs, AlgorithmSpec, ExperimentSummary, GeneratorSpec};
use surgeflow_core::{
    build_market_from_flow, continuous_surge_prices, offline_opt, social_welfare_discrete, solve_discrete,
    verify_envy_free, verify_equilibrium_continuous, verify_taxi_best_response, verify_truthful, DiscreteInstance,
    EquilibriumReport, Error, Rational, SurgeVector, ZeroDemandPrice,
};

use crate::error::CliError;
use crate::instance::{ContinuousInstance, Instance, ZeroDemandArg};
use crate::number::{render, Emit};
use crate::spec::ExperimentConfig;

pub struct Document {
    pub text: String,
    pub ok: bool,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(render).collect()
}

fn edge((u, v): &(usize, usize)) -> String {
    format!("{u}->{v}")
}

fn equilibrium_json(rep: &EquilibriumReport<Rational>) -> Value {
    json!({
        "ok": rep.ok,
        "violations": rep.violations.iter().map(|v| json!({
            "origin": v.origin,
            "flowed_to": v.flowed_to,
            "better": v.better,
            "gap": render(&v.gap),
        })).collect::<Vec<_>>(),
        "checked_edges": rep.checked_edges.iter().map(edge).collect::<Vec<_>>(),
        "checked_edge_set": rep.checked_edge_set,
    })
}

fn surge_json(r: &SurgeVector<Rational>) -> Value {
    json!({ "zero_demand_price": ZeroDemandArg::from(r.zero_demand), "price": strings(&r.price) })
}

pub fn surge_continuous(c: &ContinuousInstance, convention: ZeroDemandPrice) -> Result<Document, CliError> {
    let (r, f) = continuous_surge_prices(&c.supply, &c.demand, &c.metric, convention)?;
    let fm = build_market_from_flow(&f, &c.metric)?;
    let (item_prices, _) = destination_prices(&fm, c.metric.k())?;
    let rep = verify_equilibrium_continuous(&c.supply, &c.demand, &r, &c.demand, &c.metric)?;
    let doc = json!({
        "flow": {
            "entries": f.entries().iter().map(|(u, v, x)| json!([u, v, render(x)])).collect::<Vec<_>>(),
            "cost": render(f.cost()),
        },
        "market": {
            "c": render(&fm.c),
            "bidders": fm.edges.iter().map(edge).collect::<Vec<_>>(),
            "items": fm.edges.iter().map(edge).collect::<Vec<_>>(),
            "valuations": fm.market.rows().iter().map(|row| strings(row)).collect::<Vec<_>>(),
        },
        "item_prices": strings(&item_prices.price),
        "surge": surge_json(&r),
        "equilibrium": equilibrium_json(&rep),
    });
    Ok(Document { text: pretty(&doc), ok: rep.ok })
}

/// Checks the surge vector stored in the file, or the computed one if the
/// file has none.
pub fn verify_continuous(c: &ContinuousInstance) -> Result<Document, CliError> {
    let Some(r) = &c.surge else {
        return surge_continuous(c, c.zero_demand.unwrap_or_default());
    };
    let rep = verify_equilibrium_continuous(&c.supply, &c.demand, r, &c.demand, &c.metric)?;
    let doc = json!({ "surge": surge_json(r), "equilibrium": equilibrium_json(&rep) });
    Ok(Document { text: pretty(&doc), ok: rep.ok })
}

fn opt_str(x: &Option<Rational>) -> Value {
    x.as_ref().map_or(Value::Null, |x| Value::from(render(x)))
}

fn violation_json(v: &DiscreteViolation<Rational>) -> Value {
    match v {
        DiscreteViolation::UnservedEnvious { passenger, value, surge } => {
            json!({ "kind": "unserved_envious", "passenger": passenger, "value": render(value), "surge": render(surge) })
        }
        DiscreteViolation::ServedOverpays { passenger, value, surge } => {
            json!({ "kind": "served_overpays", "passenger": passenger, "value": render(value), "surge": opt_str(surge) })
        }
        DiscreteViolation::TaxiDeviation { taxicab, at, gain } => {
            json!({ "kind": "taxi_deviation", "taxicab": taxicab, "at": at, "gain": render(gain) })
        }
        DiscreteViolation::MinNotAchieved { passenger, taxicab, cost_plus_price, surge } => json!({
            "kind": "min_not_achieved",
            "passenger": passenger,
            "taxicab": taxicab,
            "cost_plus_price": render(cost_plus_price),
            "surge": opt_str(surge),
        }),
        DiscreteViolation::ProfitableMisreport { passenger, report, gain } => {
            json!({ "kind": "profitable_misreport", "passenger": passenger, "report": render(report), "gain": render(gain) })
        }
    }
}

fn report_json(rep: &DiscreteReport<Rational>) -> Value {
    json!({ "ok": rep.ok, "violations": rep.violations.iter().map(violation_json).collect::<Vec<_>>() })
}

pub fn surge_discrete(inst: &DiscreteInstance<Rational>) -> Result<Document, CliError> {
    let sol = solve_discrete(inst)?;
    let a = &sol.assignment;
    let envy = verify_envy_free(inst, a, &sol.surge)?;
    let best = verify_taxi_best_response(inst, a, &sol.taxi_prices, &sol.surge)?;
    let min = verify_achieves_min(inst, a, &sol.taxi_prices, &sol.surge)?;
    let (truthful, truthful_ok) = match verify_truthful(inst, &default_misreport_grid(inst)) {
        Ok(rep) => (report_json(&rep), rep.ok),
        Err(Error::TooLarge(why)) => (json!({ "skipped": why }), true),
        Err(e) => return Err(e.into()),
    };
    let doc = json!({
        "assignment": inst.taxicabs().iter().zip(&a.serves).map(|(t, p)| json!({
            "taxicab": t.id,
            "passenger": p.map(|i| inst.passengers()[i].id.clone()),
        })).collect::<Vec<_>>(),
        "new_supply": a.new_supply,
        "taxi_prices": strings(&sol.taxi_prices.price),
        "surge": sol.surge.price.iter().map(opt_str).collect::<Vec<_>>(),
        "welfare": render(&social_welfare_discrete(inst, a)?),
        "reports": {
            "envy_free": report_json(&envy),
            "taxi_best_response": report_json(&best),
            "achieves_min": report_json(&min),
            "truthful": truthful,
        },
    });
    Ok(Document { text: pretty(&doc), ok: envy.ok && best.ok && min.ok && truthful_ok })
}

pub fn verify(inst: &Instance) -> Result<Document, CliError> {
    match inst {
        Instance::Continuous(c) => verify_continuous(c),
        Instance::Discrete(d) => surge_discrete(d),
    }
}

fn float_generator(g: &GeneratorSpec<Rational>) -> GeneratorSpec<f64> {
    use num_traits::ToPrimitive;
    let f = |x: &Rational| x.to_f64().expect("finite parameter");
    match g {
        GeneratorSpec::SingleVertex { k, t } => GeneratorSpec::SingleVertex { k: *k, t: *t },
        GeneratorSpec::Subset { rho, k, t } => GeneratorSpec::Subset { rho: f(rho), k: *k, t: *t },
        GeneratorSpec::Geometric { epsilon, k, t } => GeneratorSpec::Geometric { epsilon: f(epsilon), k: *k, t: *t },
        GeneratorSpec::Drift { delta, t } => GeneratorSpec::Drift { delta: f(delta), t: *t },
    }
}

pub struct Simulation {
    pub csv: String,
    pub plot_data: Option<String>,
    pub summary: String,
}

fn simulate_with<S: Emit>(cfg: &ExperimentConfig, gen: &GeneratorSpec<S>) -> Result<Simulation, CliError> {
    let summaries = surgeflow_core::online::paired_experiment(gen, &[cfg.algorithm], cfg.trials, cfg.seed)?;
    let s: &ExperimentSummary<S> = &summaries[0];
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(["trial", "T", "k", "rho", "delta", "sw_alg", "sw_opt", "ratio"]).map_err(io)?;
    for r in &s.records {
        w.write_record([
            r.trial.to_string(),
            r.t.to_string(),
            r.k.to_string(),
            r.rho.cell(),
            r.delta.cell(),
            r.sw_alg.cell(),
            r.sw_opt.cell(),
            format!("{}", r.ratio),
        ])
        .map_err(io)?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?).expect("csv is utf-8");
    let plot_data = match &cfg.plot_data {
        Some(_) => Some(plot_series(cfg, gen)?),
        None => None,
    };
    let summary = format!(
        "{} over {} trials: mean ratio {:.4} (95% CI {:.4}..{:.4}), ratio of means {:.4}",
        cfg.algorithm, cfg.trials, s.mean_ratio, s.ratio_ci95.0, s.ratio_ci95.1, s.ratio_of_means
    );
    Ok(Simulation { csv, plot_data, summary })
}

/// Per-step served and moved mass of the algorithm and the offline optimum,
/// regenerated from the same per-trial streams as the CSV.
fn plot_series<S: Emit>(cfg: &ExperimentConfig, gen: &GeneratorSpec<S>) -> Result<String, CliError> {
    let series = |xs: &[S]| xs.iter().map(Emit::json).collect::<Vec<_>>();
    let mut trials = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let (mut g, alg_rng) = trial_rngs(cfg.seed, trial);
        let d = gen.generate(&mut g)?;
        let alg = run_algorithm(cfg.algorithm, &d, &mut alg_rng.clone())?;
        let opt = offline_opt(&d)?;
        trials.push(json!({
            "trial": trial,
            "served_alg": series(alg.per_step_served()),
            "moved_alg": series(alg.per_step_moved()),
            "served_opt": series(opt.per_step_served()),
            "moved_opt": series(opt.per_step_moved()),
        }));
    }
    Ok(pretty(&json!({ "algorithm": cfg.algorithm.to_string(), "seed": cfg.seed, "trials": trials })))
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation, CliError> {
    if cfg.trials == 0 {
        return Err(CliError::Input("trials must be positive".into()));
    }
    if let AlgorithmSpec::Rand(p) | AlgorithmSpec::Comp(p) = cfg.algorithm {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Input(format!("p = {p} is not a probability")));
        }
    }
    if cfg.exact {
        simulate_with(cfg, &cfg.generator)
    } else {
        simulate_with(cfg, &float_generator(&cfg.generator))
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
