mod common;

use common::*;
use proptest::prelude::*;
use surgeflow_core::continuous::{destination_prices, support_preserving_perturbations};
use surgeflow_core::transport::alternative_optima;
use surgeflow_core::{
    build_market_from_flow, continuous_surge_prices, max_weight_matching, min_cost_flow, minimal_walrasian_prices,
    target_supply_surge, taxicab_utility, verify_equilibrium_continuous, verify_unique_induction, Flow, MassVector,
    Rational, SurgeVector, ZeroDemandPrice,
};

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| q(x, 1)).collect()
}

#[test]
fn example_flow_induces_market() {
    let m = example_metric();
    let f = Flow::new(example_flow_a(), example_supply(), example_demand(), &m).unwrap();
    let fm = build_market_from_flow(&f, &m).unwrap();
    assert_eq!(fm.c, q(4, 1));
    // rows and columns ordered b14, b24, b25, b33, b35, b36
    assert_eq!(fm.edges, vec![(0, 3), (1, 3), (1, 4), (2, 2), (2, 4), (2, 5)]);
    let table = [
        [3, 3, 2, 2, 2, 1],
        [2, 2, 3, 3, 3, 2],
        [2, 2, 3, 3, 3, 2],
        [1, 1, 2, 4, 2, 3],
        [1, 1, 2, 4, 2, 3],
        [1, 1, 2, 4, 2, 3],
    ];
    for (i, row) in table.iter().enumerate() {
        assert_eq!(fm.market.rows()[i], ints(row));
    }
    let g = max_weight_matching(&fm.market);
    let p = minimal_walrasian_prices(&fm.market, &g).unwrap();
    assert_eq!(p.price, ints(&[0, 0, 1, 3, 1, 2]));
}

#[test]
fn worked_example_surge() {
    let m = example_metric();
    let (s, d) = (example_supply(), example_demand());
    let (r, f) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::One).unwrap();
    assert_eq!(*f.cost(), q(1, 1));
    assert_eq!(r.price, ints(&[1, 1, 1, 4, 3, 2]));
    let (r0, _) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::Zero).unwrap();
    assert_eq!(r0.price, ints(&[0, 0, 1, 4, 3, 2]));
    let rep = verify_equilibrium_continuous(&s, &d, &r, &d, &m).unwrap();
    assert!(rep.ok, "{:?}", rep.violations);
    for (u, v, _) in example_flow_a().into_iter().chain(example_flow_b()) {
        assert!(rep.checked_edges.contains(&(u, v)));
    }
    assert_eq!(taxicab_utility(0, 3, &d, &r, &d, &m), q(3, 1));
}

#[test]
fn lowered_price_is_caught() {
    let m = example_metric();
    let (s, d) = (example_supply(), example_demand());
    let r = SurgeVector { price: ints(&[1, 1, 1, 1, 3, 2]), zero_demand: ZeroDemandPrice::One };
    let rep = verify_equilibrium_continuous(&s, &d, &r, &d, &m).unwrap();
    assert!(!rep.ok);
    assert!(rep.violations.iter().any(|v| v.origin == 0 && v.flowed_to == 3));
}

#[test]
fn trivial_equilibria() {
    let m = example_metric();
    let d = example_demand();
    let zero = SurgeVector { price: vec![q(0, 1); 6], zero_demand: ZeroDemandPrice::Zero };
    assert!(verify_equilibrium_continuous(&d, &d, &zero, &d, &m).unwrap().ok);
    let (r, f) = continuous_surge_prices(&d, &d, &m, ZeroDemandPrice::Zero).unwrap();
    assert_eq!(*f.cost(), q(0, 1));
    assert!(verify_equilibrium_continuous(&d, &d, &r, &d, &m).unwrap().ok);
}

#[test]
fn alternative_optima_all_in_equilibrium() {
    let m = example_metric();
    let (s, d) = (example_supply(), example_demand());
    let (r, _) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::One).unwrap();
    let rep = verify_equilibrium_continuous(&s, &d, &r, &d, &m).unwrap();
    for g in alternative_optima(&s, &d, &m, 32).unwrap() {
        for (u, v) in g.support() {
            assert!(rep.checked_edges.contains(&(u, v)));
        }
    }
    assert!(rep.ok);
}

#[test]
fn worked_example_unique_induction() {
    let m = example_metric();
    let (s, d) = (example_supply(), example_demand());
    let (r, _) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::Zero).unwrap();
    let draws = (0..20).map(|i| (i * 7 + 1, i * 3 + 2, q(1 + (i as i64 % 9), 10)));
    let cands = support_preserving_perturbations(&d, draws);
    assert_eq!(cands.len(), 20);
    assert!(verify_unique_induction(&s, &d, &r, &m, &cands).unwrap());
}

#[test]
fn target_supply_example() {
    let m = example_metric();
    let (s, d) = (example_supply(), example_demand());
    let alpha = mass(&[(0, 1), (0, 1), (1, 8), (1, 2), (1, 4), (1, 8)]);
    let (r_bar, rep) = target_supply_surge(&s, &d, &alpha, &m, ZeroDemandPrice::Zero).unwrap();
    assert_eq!(r_bar.price, vec![q(0, 1), q(0, 1), q(1, 1), q(16, 3), q(3, 1), q(2, 1)]);
    assert!(rep.ok, "{:?}", rep.violations);
}

fn instance(max_k: usize) -> impl Strategy<Value = (usize, Vec<i64>, Vec<u32>, Vec<u32>, u32)> {
    (2..=max_k).prop_flat_map(|k| {
        (
            Just(k),
            proptest::collection::vec(1i64..=5, k * (k - 1) / 2),
            proptest::collection::vec(0u32..=12, k),
            proptest::collection::vec(0u32..=12, k),
            0u32..1000,
        )
    })
}

fn with_mass(mut w: Vec<u32>, salt: u32) -> MassVector<Rational> {
    let i = salt as usize % w.len();
    if w.iter().all(|&x| x == 0) {
        w[i] = 1;
    }
    from_weights(&w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn surge_prices_form_equilibria((k, w, sw, dw, salt) in instance(6)) {
        let m = closure_metric(k, &w);
        let s = with_mass(sw, salt);
        let d = with_mass(dw, salt + 1);
        let (f, _) = min_cost_flow(&s, &d, &m).unwrap();
        let fm = build_market_from_flow(&f, &m).unwrap();
        // equal prices per destination are asserted inside
        let (_, per_dest) = destination_prices(&fm, k).unwrap();
        for y in 0..k {
            prop_assert_eq!(per_dest[y].is_some(), d[y] > q(0, 1));
        }
        let (r, _) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::Zero).unwrap();
        let rep = verify_equilibrium_continuous(&s, &d, &r, &d, &m).unwrap();
        prop_assert!(rep.ok, "{:?}", rep.violations);
        let g = max_weight_matching(&fm.market);
        let diagonal: Rational = (0..fm.edges.len()).map(|i| fm.market.value(i, i).clone()).sum();
        prop_assert_eq!(g.welfare(&fm.market), diagonal);
    }

    #[test]
    fn perturbed_supplies_are_rejected((k, w, sw, dw, salt) in instance(6)) {
        let m = closure_metric(k, &w);
        let s = with_mass(sw, salt);
        let d = with_mass(dw, salt + 1);
        let (r, _) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::Zero).unwrap();
        let draws = (0..20u32).map(|i| ((salt + 3 * i) as usize, (salt / 7 + 5 * i) as usize, q(1 + ((salt + i) % 11) as i64, 12)));
        let cands = support_preserving_perturbations(&d, draws);
        prop_assert!(verify_unique_induction(&s, &d, &r, &m, &cands).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn renormalized_noise_is_rejected((k, w, sw, dw, salt) in instance(6), noise in proptest::collection::vec(proptest::collection::vec(0u32..=3, 6), 20)) {
        let m = closure_metric(k, &w);
        let s = with_mass(sw, salt);
        let d = with_mass(dw, salt + 1);
        let (r, _) = continuous_surge_prices(&s, &d, &m, ZeroDemandPrice::Zero).unwrap();
        let scaled: Vec<Rational> = d.as_slice().iter().map(|x| x * q(24, 1)).collect();
        let cands: Vec<MassVector<Rational>> = noise
            .iter()
            .map(|n| MassVector::normalized(scaled.iter().zip(n).map(|(x, e)| x + q(*e as i64, 1)).collect()).unwrap())
            .filter(|c| *c != d)
            .collect();
        prop_assert!(verify_unique_induction(&s, &d, &r, &m, &cands).unwrap());
    }
}
