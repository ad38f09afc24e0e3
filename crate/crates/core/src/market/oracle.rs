use super::{ClearingPrices, Matching, UnitDemandMarket};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SIDE: usize = 7;

/// Exhaustive reference solver for markets up to 7×7: enumerates every
/// partial matching for the welfare maximum and every sub-market for the
/// VCG prices.
pub fn brute_force_oracle<S: Scalar>(mkt: &UnitDemandMarket<S>) -> Result<(Matching, ClearingPrices<S>)> {
    let (n, m) = (mkt.n_bidders(), mkt.n_items());
    if n > MAX_SIDE || m > MAX_SIDE {
        return Err(Error::TooLarge(format!("{n}×{m} market exceeds the {MAX_SIDE}×{MAX_SIDE} oracle limit")));
    }
    let all: Vec<usize> = (0..n).collect();
    let (w, best) = search(mkt, &all, m);
    let mut price = vec![S::zero(); m];
    for (pos, a) in best.iter().enumerate() {
        if let Some(j) = a {
            let i = all[pos];
            let others: Vec<usize> = all.iter().copied().filter(|&b| b != i).collect();
            let (without, _) = search(mkt, &others, m);
            price[*j] = without - (w.clone() - mkt.value(i, *j).clone());
        }
    }
    Ok((Matching::new(best, m)?, ClearingPrices { price }))
}

/// Best welfare over matchings of `bidders`; the first maximum in the
/// enumeration order (items ascending, then unmatched) is kept.
fn search<S: Scalar>(mkt: &UnitDemandMarket<S>, bidders: &[usize], m: usize) -> (S, Vec<Option<usize>>) {
    fn go<S: Scalar>(
        mkt: &UnitDemandMarket<S>,
        bidders: &[usize],
        pos: usize,
        taken: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        acc: S,
        best: &mut Option<(S, Vec<Option<usize>>)>,
    ) {
        if pos == bidders.len() {
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                *best = Some((acc, cur.clone()));
            }
            return;
        }
        let i = bidders[pos];
        for j in 0..taken.len() {
            if taken[j] {
                continue;
            }
            taken[j] = true;
            cur.push(Some(j));
            go(mkt, bidders, pos + 1, taken, cur, acc.clone() + mkt.value(i, j).clone(), best);
            cur.pop();
            taken[j] = false;
        }
        cur.push(None);
        go(mkt, bidders, pos + 1, taken, cur, acc, best);
        cur.pop();
    }
    let mut best = None;
    go(mkt, bidders, 0, &mut vec![false; m], &mut Vec::new(), S::zero(), &mut best);
    best.expect("the empty matching is always enumerated")
}
