use crate::scalar::Scalar;

/// Minimum-cost assignment of every row to a distinct column (`rows <= cols`).
/// Returns the column of each row. Shortest augmenting paths with
/// potentials, `O(rows² · cols)`.
pub(crate) fn assign_min<S: Scalar>(cost: &[Vec<S>], cols: usize) -> Vec<usize> {
    let n = cost.len();
    assert!(n <= cols, "more rows than columns");
    let mut u = vec![S::zero(); n + 1];
    let mut v = vec![S::zero(); cols + 1];
    // owner[j]: 1-based row holding column j, 0 when free; column 0 is the root
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv: Vec<Option<S>> = vec![None; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<S> = None;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1].clone() - u[i0].clone() - v[j].clone();
                if minv[j].as_ref().is_none_or(|m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("just set");
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("a free column remains");
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] = u[owner[j]].clone() + delta.clone();
                    v[j] = v[j].clone() - delta.clone();
                } else if let Some(m) = minv[j].as_mut() {
                    *m = m.clone() - delta.clone();
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![usize::MAX; n];
    for j in 1..=cols {
        if owner[j] != 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

/// Maximum total value of a partial matching between `rows` and `cols`
/// (each a subset of indices into `value`), where any row may stay
/// unmatched at value 0.
pub(crate) fn max_partial<S: Scalar>(
    value: &dyn Fn(usize, usize) -> S,
    rows: &[usize],
    cols: &[usize],
) -> (S, Vec<Option<usize>>) {
    let n = rows.len();
    if n == 0 || cols.is_empty() {
        return (S::zero(), vec![None; n]);
    }
    let width = cols.len() + n;
    let cost: Vec<Vec<S>> = rows
        .iter()
        .map(|&r| {
            let mut row: Vec<S> = cols.iter().map(|&c| -value(r, c)).collect();
            row.extend(std::iter::repeat_n(S::zero(), n));
            row
        })
        .collect();
    let pick = assign_min(&cost, width);
    let mut total = S::zero();
    let mut out = vec![None; n];
    for (i, &j) in pick.iter().enumerate() {
        if j < cols.len() {
            let x = value(rows[i], cols[j]);
            total = total + x;
            out[i] = Some(cols[j]);
        }
    }
    (total, out)
}
