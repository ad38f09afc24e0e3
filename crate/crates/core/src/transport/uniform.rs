use super::{DualPotentials, Flow};
use crate::error::{Error, Result};
use crate::mass::MassVector;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

/// Min-cost flow on a uniform metric: every vertex keeps `min(s_u, d_u)`
/// and surpluses fill deficits in index order. Duals take values in
/// `{0, c}`.
pub fn uniform_flow<S: Scalar>(
    s: &MassVector<S>,
    d: &MassVector<S>,
    metric: &MetricSpace<S>,
) -> Result<(Flow<S>, DualPotentials<S>)> {
    let Some(c) = metric.uniform_cost().cloned() else {
        return Err(Error::Unsupported("uniform flow needs a uniform metric".into()));
    };
    metric.check_dim(s.len())?;
    metric.check_dim(d.len())?;
    let k = metric.k();
    let mut entries = Vec::with_capacity(2 * k);
    let mut surplus = Vec::new();
    let mut deficit = Vec::new();
    let mut duals = DualPotentials::zero(k);
    for u in 0..k {
        let keep = crate::scalar::min(&s[u], &d[u]);
        if keep.is_pos() {
            entries.push((u, u, keep));
        }
        let gap = s[u].clone() - d[u].clone();
        if gap.is_pos() {
            surplus.push((u, gap));
        } else if gap.is_neg() {
            deficit.push((u, -gap));
            duals.source[u] = c.clone();
            duals.target[u] = c.clone();
        }
    }
    let (mut i, mut j) = (0, 0);
    while i < surplus.len() && j < deficit.len() {
        let x = crate::scalar::min(&surplus[i].1, &deficit[j].1);
        entries.push((surplus[i].0, deficit[j].0, x.clone()));
        surplus[i].1 = surplus[i].1.clone() - x.clone();
        deficit[j].1 = deficit[j].1.clone() - x;
        if !surplus[i].1.is_pos() {
            i += 1;
        }
        if !deficit[j].1.is_pos() {
            j += 1;
        }
    }
    Ok((Flow::new(entries, s.clone(), d.clone(), metric)?, duals))
}
