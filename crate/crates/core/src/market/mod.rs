//! Unit-demand markets: bidders want at most one item each.

mod hungarian;
mod oracle;
mod prices;

pub use oracle::brute_force_oracle;
pub use prices::{max_weight_matching, max_welfare, minimal_walrasian_prices, sub_market_welfare};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitDemandMarket<S> {
    bidders: Vec<String>,
    items: Vec<String>,
    valuation: Vec<S>,
}

impl<S: Scalar> UnitDemandMarket<S> {
    /// `valuation[i][j]` is bidder `i`'s value for item `j`, possibly negative.
    pub fn new(bidders: Vec<String>, items: Vec<String>, valuation: Vec<Vec<S>>) -> Result<Self> {
        if valuation.len() != bidders.len() {
            return Err(Error::DimensionMismatch { expected: bidders.len(), found: valuation.len() });
        }
        for row in &valuation {
            if row.len() != items.len() {
                return Err(Error::DimensionMismatch { expected: items.len(), found: row.len() });
            }
        }
        for (side, ids) in [("bidder", &bidders), ("item", &items)] {
            let mut seen = HashSet::new();
            if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
                return Err(Error::InvalidMarket(format!("duplicate {side} id `{dup}`")));
            }
        }
        Ok(UnitDemandMarket { bidders, items, valuation: valuation.into_iter().flatten().collect() })
    }

    /// Market with ids `b0, b1, ...` and `m0, m1, ...`.
    pub fn from_matrix(valuation: Vec<Vec<S>>) -> Result<Self> {
        let n = valuation.len();
        let m = valuation.first().map_or(0, Vec::len);
        Self::new((0..n).map(|i| format!("b{i}")).collect(), (0..m).map(|j| format!("m{j}")).collect(), valuation)
    }

    pub fn bidders(&self) -> &[String] {
        &self.bidders
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn n_bidders(&self) -> usize {
        self.bidders.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn value(&self, bidder: usize, item: usize) -> &S {
        &self.valuation[bidder * self.items.len() + item]
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        if self.items.is_empty() {
            return vec![Vec::new(); self.bidders.len()];
        }
        self.valuation.chunks(self.items.len()).map(<[S]>::to_vec).collect()
    }
}

/// Partial injective map from bidders to items.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assignment: Vec<Option<usize>>,
}

impl Matching {
    pub fn new(assignment: Vec<Option<usize>>, n_items: usize) -> Result<Self> {
        let mut taken = vec![false; n_items];
        for (i, a) in assignment.iter().enumerate() {
            if let Some(j) = *a {
                if j >= n_items {
                    return Err(Error::InvalidMarket(format!("bidder {i} assigned to missing item {j}")));
                }
                if std::mem::replace(&mut taken[j], true) {
                    return Err(Error::InvalidMarket(format!("item {j} assigned twice")));
                }
            }
        }
        Ok(Matching { assignment })
    }

    pub fn empty(n_bidders: usize) -> Self {
        Matching { assignment: vec![None; n_bidders] }
    }

    pub fn item_of(&self, bidder: usize) -> Option<usize> {
        self.assignment[bidder]
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    /// Owner of each item.
    pub fn owners(&self, n_items: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_items];
        for (i, a) in self.assignment.iter().enumerate() {
            if let Some(j) = a {
                out[*j] = Some(i);
            }
        }
        out
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignment.iter().enumerate().filter_map(|(i, a)| a.map(|j| (i, j)))
    }

    pub fn welfare<S: Scalar>(&self, mkt: &UnitDemandMarket<S>) -> S {
        self.pairs().map(|(i, j)| mkt.value(i, j).clone()).sum()
    }

    /// Sort key where "unmatched" comes after every item.
    pub fn lex_key(&self, n_items: usize) -> Vec<usize> {
        self.assignment.iter().map(|a| a.unwrap_or(n_items)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearingPrices<S> {
    pub price: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClearingViolation<S> {
    NegativePrice {
        item: usize,
        price: S,
    },
    /// A matched bidder gets negative utility from their own item.
    NegativeUtility {
        bidder: usize,
        item: usize,
        utility: S,
    },
    /// Some item gives `bidder` strictly more utility than what it holds.
    BetterItem {
        bidder: usize,
        held: Option<usize>,
        better: usize,
        gap: S,
    },
    UnallocatedPriced {
        item: usize,
        price: S,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearingReport<S> {
    pub ok: bool,
    pub violations: Vec<ClearingViolation<S>>,
}

/// Checks that `(g, p)` is a competitive equilibrium: everyone holds a
/// utility-maximizing item (or nothing when no item gives positive
/// utility), and unsold items are free.
pub fn verify_clearing<S: Scalar>(
    mkt: &UnitDemandMarket<S>,
    g: &Matching,
    p: &ClearingPrices<S>,
) -> Result<ClearingReport<S>> {
    let (n, m) = (mkt.n_bidders(), mkt.n_items());
    if g.assignment().len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.assignment().len() });
    }
    if p.price.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: p.price.len() });
    }
    Matching::new(g.assignment().to_vec(), m)?;
    let mut violations = Vec::new();
    for (j, x) in p.price.iter().enumerate() {
        if x.is_neg() {
            violations.push(ClearingViolation::NegativePrice { item: j, price: x.clone() });
        }
    }
    for i in 0..n {
        let held = g.item_of(i);
        let own = match held {
            Some(j) => mkt.value(i, j).clone() - p.price[j].clone(),
            None => S::zero(),
        };
        if let Some(j) = held {
            if own.is_neg() {
                violations.push(ClearingViolation::NegativeUtility { bidder: i, item: j, utility: own.clone() });
            }
        }
        for j in 0..m {
            let gap = mkt.value(i, j).clone() - p.price[j].clone() - own.clone();
            if gap.is_pos() {
                violations.push(ClearingViolation::BetterItem { bidder: i, held, better: j, gap });
            }
        }
    }
    for (j, owner) in g.owners(m).into_iter().enumerate() {
        if owner.is_none() && !p.price[j].is_nil() {
            violations.push(ClearingViolation::UnallocatedPriced { item: j, price: p.price[j].clone() });
        }
    }
    Ok(ClearingReport { ok: violations.is_empty(), violations })
}
