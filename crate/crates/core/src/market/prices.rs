use super::hungarian::max_partial;
use super::{ClearingPrices, Matching, UnitDemandMarket};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maximum welfare using only the given bidders and items.
pub fn sub_market_welfare<S: Scalar>(mkt: &UnitDemandMarket<S>, bidders: &[usize], items: &[usize]) -> S {
    max_partial(&|i, j| mkt.value(i, j).clone(), bidders, items).0
}

pub fn max_welfare<S: Scalar>(mkt: &UnitDemandMarket<S>) -> S {
    let all_b: Vec<usize> = (0..mkt.n_bidders()).collect();
    let all_i: Vec<usize> = (0..mkt.n_items()).collect();
    sub_market_welfare(mkt, &all_b, &all_i)
}

/// Welfare-maximizing matching. Among optima, the assignment vector is
/// lexicographically smallest with "unmatched" ranked after every item, so
/// pairs of value zero are kept when they tie with leaving a bidder alone.
pub fn max_weight_matching<S: Scalar>(mkt: &UnitDemandMarket<S>) -> Matching {
    let (n, m) = (mkt.n_bidders(), mkt.n_items());
    let target = max_welfare(mkt);
    let mut free_items: Vec<usize> = (0..m).collect();
    let mut fixed = S::zero();
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let mut chosen = None;
        for (pos, &j) in free_items.iter().enumerate() {
            let mut others = free_items.clone();
            others.remove(pos);
            let total = fixed.clone() + mkt.value(i, j).clone() + sub_market_welfare(mkt, &rest, &others);
            if total.approx_eq(&target) {
                chosen = Some(pos);
                break;
            }
        }
        match chosen {
            Some(pos) => {
                let j = free_items.remove(pos);
                fixed = fixed + mkt.value(i, j).clone();
                assignment.push(Some(j));
            }
            None => assignment.push(None),
        }
    }
    Matching::new(assignment, m).expect("construction keeps items distinct")
}

/// Pointwise-minimal Walrasian prices, which are the VCG payments: the item
/// held by bidder `i` costs `W(B - i) - (W - v_i)`, unsold items cost 0.
pub fn minimal_walrasian_prices<S: Scalar>(mkt: &UnitDemandMarket<S>, g: &Matching) -> Result<ClearingPrices<S>> {
    let (n, m) = (mkt.n_bidders(), mkt.n_items());
    if g.assignment().len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.assignment().len() });
    }
    Matching::new(g.assignment().to_vec(), m)?;
    let w = max_welfare(mkt);
    let got = g.welfare(mkt);
    if !got.approx_eq(&w) {
        return Err(Error::ContractViolation(format!("matching welfare {got} is below the maximum {w}")));
    }
    let items: Vec<usize> = (0..m).collect();
    let mut price = vec![S::zero(); m];
    for (i, j) in g.pairs() {
        let others: Vec<usize> = (0..n).filter(|&b| b != i).collect();
        let without = sub_market_welfare(mkt, &others, &items);
        let p = without - (w.clone() - mkt.value(i, j).clone());
        price[j] = if p.is_nil() { S::zero() } else { p };
    }
    Ok(ClearingPrices { price })
}
