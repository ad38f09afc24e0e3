mod common;

use common::*;
use proptest::prelude::*;
use surgeflow_core::transport::{alternative_optima, optimal_support, uniform_flow, witness_flow};
use surgeflow_core::{
    flow_cost, min_cost_flow, verify_min_cost, zero_reduced_cost_edges, Flow, MassVector, MetricSpace, Rational,
};

#[test]
fn worked_example_cost_is_one() {
    let m = example_metric();
    let (f, duals) = min_cost_flow(&example_supply(), &example_demand(), &m).unwrap();
    assert_eq!(*f.cost(), q(1, 1));
    assert!(f.support().len() <= 2 * 6 - 1);
    assert!(verify_min_cost(&f, &duals, &m).unwrap().optimal);
    for entries in [example_flow_a(), example_flow_b()] {
        let g = Flow::new(entries, example_supply(), example_demand(), &m).unwrap();
        assert_eq!(flow_cost(&g, &m).unwrap(), q(1, 1));
        assert!(verify_min_cost(&g, &duals, &m).unwrap().optimal);
    }
}

#[test]
fn tight_edges_cover_both_optima() {
    let m = example_metric();
    let (f, duals) = min_cost_flow(&example_supply(), &example_demand(), &m).unwrap();
    let tight = zero_reduced_cost_edges(&duals, &m).unwrap();
    let usable = optimal_support(&f, &duals, &m).unwrap();
    for (u, v, _) in example_flow_a().into_iter().chain(example_flow_b()) {
        assert!(tight.contains(&(u, v)), "({u}, {v}) not tight");
        assert!(usable.contains(&(u, v)), "({u}, {v}) has no witness");
        let w = witness_flow(&f, &duals, &m, u, v).unwrap().unwrap();
        assert!(w.get(u, v) > q(0, 1));
        assert_eq!(*w.cost(), q(1, 1));
    }
}

#[test]
fn suboptimal_flow_reported_false() {
    let m = example_metric();
    let (_, duals) = min_cost_flow(&example_supply(), &example_demand(), &m).unwrap();
    let bad = Flow::new(
        vec![
            (0, 5, q(1, 8)),
            (0, 3, q(5, 24)),
            (2, 3, q(1, 8)),
            (2, 2, q(1, 8)),
            (2, 4, q(1, 12)),
            (1, 4, q(7, 24)),
            (1, 3, q(1, 24)),
        ],
        example_supply(),
        example_demand(),
        &m,
    )
    .unwrap();
    assert_eq!(*bad.cost(), q(3, 2));
    let rep = verify_min_cost(&bad, &duals, &m).unwrap();
    assert!(!rep.optimal);
    assert!(rep.slack_on_support.contains(&(0, 5)));
}

#[test]
fn alternative_optima_share_cost() {
    let m = example_metric();
    let alts = alternative_optima(&example_supply(), &example_demand(), &m, 32).unwrap();
    assert!(alts.len() >= 2);
    for g in &alts {
        assert_eq!(*g.cost(), q(1, 1));
    }
}

#[test]
fn float_instance_agrees_with_exact() {
    let m = example_metric();
    let mf: MetricSpace<f64> = m.convert();
    let (f, duals) = min_cost_flow(&example_supply().convert(), &example_demand().convert(), &mf).unwrap();
    assert!((f.cost() - 1.0).abs() < 1e-12);
    assert!(verify_min_cost(&f, &duals, &mf).unwrap().optimal);
}

/// Minimum over integral plans of the problem scaled by `den`.
fn brute_emd(s: &[i64], d: &[i64], m: &MetricSpace<Rational>, den: i64) -> Rational {
    fn rows(
        u: usize,
        s: &[i64],
        left: &mut Vec<i64>,
        m: &MetricSpace<Rational>,
        acc: Rational,
        best: &mut Option<Rational>,
    ) {
        if u == s.len() {
            if left.iter().all(|&x| x == 0) && best.as_ref().is_none_or(|b| acc < *b) {
                *best = Some(acc);
            }
            return;
        }
        cols(u, 0, s[u], s, left, m, acc, best);
    }
    #[allow(clippy::too_many_arguments)]
    fn cols(
        u: usize,
        v: usize,
        rest: i64,
        s: &[i64],
        left: &mut Vec<i64>,
        m: &MetricSpace<Rational>,
        acc: Rational,
        best: &mut Option<Rational>,
    ) {
        let k = left.len();
        if v == k - 1 {
            if rest <= left[v] {
                left[v] -= rest;
                rows(u + 1, s, left, m, acc + m.dist(u, v).clone() * q(rest, 1), best);
                left[v] += rest;
            }
            return;
        }
        for x in 0..=rest.min(left[v]) {
            left[v] -= x;
            cols(u, v + 1, rest - x, s, left, m, acc.clone() + m.dist(u, v).clone() * q(x, 1), best);
            left[v] += x;
        }
    }
    let mut best = None;
    rows(0, s, &mut d.to_vec(), m, q(0, 1), &mut best);
    best.unwrap() / q(den, 1)
}

fn small_instance() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>, Vec<i64>, i64)> {
    (1usize..=3, 1i64..=6).prop_flat_map(|(k, den)| {
        (
            Just(k),
            proptest::collection::vec(1i64..=4, 3),
            proptest::collection::vec(0..=den, k),
            proptest::collection::vec(0..=den, k),
            Just(den),
        )
    })
}

fn compositions(raw: &[i64], den: i64) -> Vec<i64> {
    // turn arbitrary nonnegative ints into a composition of `den`
    let mut out = vec![0; raw.len()];
    let mut left = den;
    for (i, &x) in raw.iter().enumerate() {
        let take = if i + 1 == raw.len() { left } else { x.min(left) };
        out[i] = take;
        left -= take;
    }
    out
}

fn rational_mass(counts: &[i64], den: i64) -> MassVector<Rational> {
    MassVector::new(counts.iter().map(|&c| q(c, den)).collect()).unwrap()
}

fn random_metric(k: usize, w: &[i64]) -> MetricSpace<Rational> {
    if k == 1 {
        return MetricSpace::uniform(1, q(1, 1)).unwrap();
    }
    closure_metric(k, w)
}

fn random_mass(k: usize) -> impl Strategy<Value = MassVector<Rational>> {
    (proptest::collection::vec(0u32..=12, k), 1u32..=12).prop_map(move |(mut w, extra)| {
        let i = extra as usize % w.len();
        w[i] += extra;
        from_weights(&w)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_brute_force((k, w, s, d, den) in small_instance()) {
        let m = random_metric(k, &w);
        let s = compositions(&s, den);
        let d = compositions(&d, den);
        let (f, duals) = min_cost_flow(&rational_mass(&s, den), &rational_mass(&d, den), &m).unwrap();
        prop_assert_eq!(f.cost().clone(), brute_emd(&s, &d, &m, den));
        prop_assert!(verify_min_cost(&f, &duals, &m).unwrap().optimal);
        prop_assert!(f.support().len() <= 2 * k - 1);
    }

    #[test]
    fn earthmover_is_a_metric(
        (k, w) in (1usize..=5).prop_flat_map(|k| (Just(k), proptest::collection::vec(1i64..=5, 10))),
        seeds in proptest::collection::vec(proptest::collection::vec(0u32..=12, 5), 3),
    ) {
        let m = random_metric(k, &w);
        let mk = |v: &Vec<u32>| {
            let mut v = v[..k].to_vec();
            v[0] += 1;
            from_weights(&v)
        };
        let (a, b, c) = (mk(&seeds[0]), mk(&seeds[1]), mk(&seeds[2]));
        let em = |x: &MassVector<Rational>, y: &MassVector<Rational>| min_cost_flow(x, y, &m).unwrap().0.cost().clone();
        prop_assert_eq!(em(&a, &b), em(&b, &a));
        prop_assert_eq!(em(&a, &a), q(0, 1));
        prop_assert!(em(&a, &c) <= em(&a, &b) + em(&b, &c));
    }

    #[test]
    fn solver_flows_always_certify(
        (k, w) in (2usize..=6).prop_flat_map(|k| (Just(k), proptest::collection::vec(1i64..=6, 15))),
        s in random_mass(6),
        d in random_mass(6),
    ) {
        let m = random_metric(k, &w);
        let cut = |x: &MassVector<Rational>| {
            let mut v: Vec<u32> = x.as_slice()[..k].iter().map(|r| (r * q(1000, 1)).to_integer().try_into().unwrap()).collect();
            v[0] += 1;
            from_weights(&v)
        };
        let (s, d) = (cut(&s), cut(&d));
        let (f, duals) = min_cost_flow(&s, &d, &m).unwrap();
        prop_assert!(verify_min_cost(&f, &duals, &m).unwrap().optimal);
        prop_assert_eq!(duals.objective(&s, &d), f.cost().clone());
        for g in alternative_optima(&s, &d, &m, 8).unwrap() {
            prop_assert_eq!(g.cost().clone(), f.cost().clone());
            prop_assert!(verify_min_cost(&g, &duals, &m).unwrap().optimal);
        }
        for (u, v) in optimal_support(&f, &duals, &m).unwrap() {
            let g = witness_flow(&f, &duals, &m, u, v).unwrap().unwrap();
            prop_assert_eq!(g.cost().clone(), f.cost().clone());
        }
    }

    #[test]
    fn uniform_fast_path_agrees(k in 2usize..=6, c in 1i64..=4, s in random_mass(6), d in random_mass(6)) {
        let m = MetricSpace::uniform(k, q(c, 2)).unwrap();
        let cut = |x: &MassVector<Rational>| {
            let mut v: Vec<u32> = x.as_slice()[..k].iter().map(|r| (r * q(1000, 1)).to_integer().try_into().unwrap()).collect();
            v[0] += 1;
            from_weights(&v)
        };
        let (s, d) = (cut(&s), cut(&d));
        let (f, duals) = uniform_flow(&s, &d, &m).unwrap();
        prop_assert!(verify_min_cost(&f, &duals, &m).unwrap().optimal);
        prop_assert_eq!(f.cost().clone(), min_cost_flow(&s, &d, &m).unwrap().0.cost().clone());
    }
}
